#![no_main]

use chevetlab::ensembles::EnsembleSpec;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    // arbitrary byte streams must either fail cleanly or produce a spec
    // whose serialization round-trips
    if let Ok(spec) = serde_json::from_slice::<EnsembleSpec>(data) {
        let js = serde_json::to_string(&spec).unwrap();
        let back: EnsembleSpec = serde_json::from_str(&js).unwrap();
        assert_eq!(back, spec);
        assert!(spec.rows >= 1 && spec.cols >= 1);
    }
});
