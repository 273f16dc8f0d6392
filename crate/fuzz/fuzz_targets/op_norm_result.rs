#![no_main]

use chevetlab::geometry::OpNormResult;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(r) = serde_json::from_slice::<OpNormResult>(data) {
        assert!(r.value.is_finite() && r.value >= 0.0);
        let js = serde_json::to_string(&r).unwrap();
        let back: OpNormResult = serde_json::from_str(&js).unwrap();
        assert_eq!(back.value, r.value);
        assert_eq!(back.is_exact(), r.is_exact());
    }
});
