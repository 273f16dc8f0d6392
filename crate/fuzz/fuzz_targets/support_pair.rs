#![no_main]

use chevetlab::submatrix::SupportPair;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(sp) = serde_json::from_slice::<SupportPair>(data) {
        // indices deserialize to strictly increasing zero-based positions
        assert!(sp.rows.windows(2).all(|w| w[0] < w[1]));
        assert!(sp.cols.windows(2).all(|w| w[0] < w[1]));
        let js = serde_json::to_string(&sp).unwrap();
        let back: SupportPair = serde_json::from_str(&js).unwrap();
        assert_eq!(back, sp);
    }
});
