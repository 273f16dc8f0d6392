#![no_main]

use chevetlab::geometry::{dual_norm, BallSpec};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(ball) = serde_json::from_slice::<BallSpec>(data) {
        let js = serde_json::to_string(&ball).unwrap();
        let back: BallSpec = serde_json::from_str(&js).unwrap();
        assert_eq!(back, ball);
        // exercise the gauge machinery on anything small enough
        if ball.dim <= 64 {
            let mut e = vec![0.0; ball.dim];
            e[0] = 1.0;
            let v = dual_norm(&e, &ball).unwrap();
            assert!(v.is_finite() && v >= 0.0);
            let w = dual_norm(&e, &ball.polar()).unwrap();
            assert!(w.is_finite() && w >= 0.0);
        }
    }
});
