#![no_main]

use chevetlab::harness::ExperimentSpec;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(spec) = serde_json::from_slice::<ExperimentSpec>(data) {
        // validation must never panic, whatever the grid contents
        let _ = spec.validate();
        let js = serde_json::to_string(&spec).unwrap();
        let back: ExperimentSpec = serde_json::from_str(&js).unwrap();
        assert_eq!(back, spec);
    }
});
