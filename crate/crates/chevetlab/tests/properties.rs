//! Property tests for the structural invariants: norms behave like norms,
//! duality and scaling are exact, decompositions respect their contracts,
//! and the wire formats round-trip.

use proptest::prelude::*;

use chevetlab::chaining::{build_level_net, decompose_sparse};
use chevetlab::ensembles::{EnsembleKind, EnsembleSpec, RowKind};
use chevetlab::geometry::{dual_norm, op_norm, BallShape, BallSpec};
use chevetlab::mat::Matrix;

fn shapes(dim: usize) -> Vec<BallShape> {
    vec![
        BallShape::Lp(1.0),
        BallShape::Lp(1.5),
        BallShape::Lp(2.0),
        BallShape::Lp(f64::INFINITY),
        BallShape::SparseHull(2.min(dim)),
        BallShape::SparsePolar(2.min(dim)),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn dual_norms_are_norms(
        a in prop::collection::vec(-10.0f64..10.0, 5),
        b in prop::collection::vec(-10.0f64..10.0, 5),
        scale in -4.0f64..4.0,
    ) {
        for shape in shapes(5) {
            let ball = BallSpec::new(5, shape).unwrap();
            let na = dual_norm(&a, &ball).unwrap();
            let nb = dual_norm(&b, &ball).unwrap();
            let sum: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x + y).collect();
            let ns = dual_norm(&sum, &ball).unwrap();
            prop_assert!(ns <= na + nb + 1e-9 * (1.0 + na + nb));
            let scaled: Vec<f64> = a.iter().map(|x| scale * x).collect();
            let nsc = dual_norm(&scaled, &ball).unwrap();
            prop_assert!((nsc - scale.abs() * na).abs() <= 1e-9 * (1.0 + na));
        }
    }

    #[test]
    fn op_norm_duality_and_scaling(
        entries in prop::collection::vec(-5.0f64..5.0, 12),
        c in 0.25f64..4.0,
    ) {
        let g = Matrix::from_fn(3, 4, |i, j| entries[i * 4 + j]);
        let gt = g.transpose();
        let pairs = [
            (BallShape::Lp(1.0), BallShape::Lp(2.0)),
            (BallShape::Lp(2.0), BallShape::Lp(2.0)),
            (BallShape::Lp(2.0), BallShape::Lp(f64::INFINITY)),
            (BallShape::SparseHull(2), BallShape::SparsePolar(2)),
        ];
        for (ks, ls) in pairs {
            let k = BallSpec::new(4, ks).unwrap();
            let l = BallSpec::new(3, ls).unwrap();
            let a = op_norm(&g, &k, &l).unwrap();
            prop_assert!(a.is_exact());
            let b = op_norm(&gt, &l.polar(), &k.polar()).unwrap();
            prop_assert!((a.value - b.value).abs() <= 1e-9 * (1.0 + a.value));
            let s = op_norm(&g.scale(c), &k, &l).unwrap();
            prop_assert!((s.value - c * a.value).abs() <= 1e-9 * (1.0 + s.value));
            if let Some(p) = a.pairing(&g) {
                prop_assert!((p - a.value).abs() <= 1e-9 * (1.0 + a.value));
            }
        }
    }

    #[test]
    fn sparse_decomposition_contract(
        raw in prop::collection::vec(-1.0f64..1.0, 7),
        k_pick in 0usize..3,
    ) {
        let k = [1usize, 3, 7][k_pick];
        let h = build_level_net(12, k).unwrap();
        // build a k-sparse unit vector from the raw entries
        let mut x = vec![0.0; 12];
        let mut nrm = 0.0;
        for i in 0..k {
            let v = if raw[i].abs() < 1e-3 { 1e-3 } else { raw[i] };
            x[i * 12 / 7] = v;
            nrm += v * v;
        }
        let nrm = nrm.sqrt();
        for v in x.iter_mut() {
            *v /= nrm;
        }
        let d = decompose_sparse(&x, &h).unwrap();
        prop_assert!(d.err2 <= 0.125 + 1e-12);
        let mut seen = std::collections::HashSet::new();
        for piece in &d.pieces {
            for &(ix, _) in piece {
                prop_assert!(seen.insert(ix));
                prop_assert!(x[ix] != 0.0);
            }
        }
    }

    #[test]
    fn wire_formats_round_trip(
        n in 1usize..20,
        cols in 1usize..20,
        p in 1.0f64..6.0,
        seed in any::<u64>(),
        dim in 2usize..12,
        sparsity in 1usize..4,
    ) {
        let specs = [
            EnsembleSpec::new(EnsembleKind::Gaussian, n, cols).unwrap(),
            EnsembleSpec::new(EnsembleKind::UniformBpBall { p }, n, cols).unwrap(),
            EnsembleSpec::new(EnsembleKind::RotatedExponential { rotation_seed: seed }, n, cols)
                .unwrap(),
            EnsembleSpec::new(
                EnsembleKind::IndependentLcRows { row_kind: RowKind::Exponential },
                n,
                cols,
            )
            .unwrap(),
        ];
        for spec in specs {
            let js = serde_json::to_string(&spec).unwrap();
            prop_assert_eq!(serde_json::from_str::<EnsembleSpec>(&js).unwrap(), spec);
        }
        let sparsity = sparsity.min(dim);
        for shape in [BallShape::Lp(p), BallShape::SparseHull(sparsity), BallShape::SparsePolar(sparsity)] {
            let ball = BallSpec::new(dim, shape).unwrap();
            let js = serde_json::to_string(&ball).unwrap();
            prop_assert_eq!(serde_json::from_str::<BallSpec>(&js).unwrap(), ball);
            // the polar is an involution; the conjugate exponent only up to
            // rounding in p/(p-1)
            let back = ball.polar().polar();
            prop_assert_eq!(back.dim, ball.dim);
            match (back.shape, ball.shape) {
                (BallShape::Lp(a), BallShape::Lp(b)) => {
                    prop_assert!((a - b).abs() <= 1e-12 * b)
                }
                (a, b) => prop_assert_eq!(a, b),
            }
        }
        // exact involution for the exactly-representable exponents
        for p_exact in [1.0, 2.0, f64::INFINITY] {
            let ball = BallSpec::new(dim, BallShape::Lp(p_exact)).unwrap();
            prop_assert_eq!(ball.polar().polar(), ball);
        }
    }
}
