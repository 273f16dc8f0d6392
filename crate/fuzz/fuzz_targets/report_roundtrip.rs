#![no_main]

use chevetlab::harness::{emit_csv, emit_json, ExperimentReport};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    // reports parsed from arbitrary bytes must re-emit in both formats
    // without panicking, and JSON emission must be a fixpoint
    if let Ok(report) = serde_json::from_slice::<ExperimentReport>(data) {
        let js = emit_json(&report).unwrap();
        let back: ExperimentReport = serde_json::from_str(&js).unwrap();
        assert_eq!(emit_json(&back).unwrap(), js);
        let _ = emit_csv(&report).unwrap();
    }
});
