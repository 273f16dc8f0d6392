#![no_main]

use chevetlab::chaining::NetHierarchy;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    // the validating deserializer must reject anything that is not a
    // faithful serialization of a buildable hierarchy, without panicking
    if let Ok(h) = serde_json::from_slice::<NetHierarchy>(data) {
        assert!(h.k <= h.n && h.n <= 64);
        let js = serde_json::to_string(&h).unwrap();
        let back: NetHierarchy = serde_json::from_str(&js).unwrap();
        assert_eq!(back, h);
    }
});
