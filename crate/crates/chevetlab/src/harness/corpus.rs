//! The default body pairs and the committed finite point sets used by the
//! sandwich experiments.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::geometry::{BallShape, BallSpec};
use crate::rng::substream;
use crate::Result;

/// The (K, L) pairs exercised by the norm experiments.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PairKind {
    B1B1,
    B2B2,
    B1B2,
    /// Sparse hull to sparse polar; carries the (k, m) sparsities.
    UmUk,
    B2Binf,
}

impl PairKind {
    pub const ALL: [PairKind; 5] = [
        PairKind::B1B1,
        PairKind::B2B2,
        PairKind::B1B2,
        PairKind::UmUk,
        PairKind::B2Binf,
    ];

    pub fn label(&self) -> &'static str {
        match self {
            PairKind::B1B1 => "b1->b1",
            PairKind::B2B2 => "b2->b2",
            PairKind::B1B2 => "b1->b2",
            PairKind::UmUk => "um->uk",
            PairKind::B2Binf => "b2->binf",
        }
    }

    /// Materialize the domain/codomain bodies for an n x N matrix.
    pub fn balls(&self, n: usize, cols: usize, k: usize, m: usize) -> Result<(BallSpec, BallSpec)> {
        let (ks, ls) = match self {
            PairKind::B1B1 => (BallShape::Lp(1.0), BallShape::Lp(1.0)),
            PairKind::B2B2 => (BallShape::Lp(2.0), BallShape::Lp(2.0)),
            PairKind::B1B2 => (BallShape::Lp(1.0), BallShape::Lp(2.0)),
            PairKind::UmUk => (BallShape::SparseHull(m), BallShape::SparsePolar(k)),
            PairKind::B2Binf => (BallShape::Lp(2.0), BallShape::Lp(f64::INFINITY)),
        };
        Ok((BallSpec::new(cols, ks)?, BallSpec::new(n, ls)?))
    }
}

/// Default corpus of body pairs.
pub fn corpus_pairs() -> Vec<PairKind> {
    PairKind::ALL.to_vec()
}

fn cross(dim: usize, scale: f64) -> Vec<Vec<f64>> {
    let mut out = Vec::with_capacity(2 * dim);
    for i in 0..dim {
        for sign in [scale, -scale] {
            let mut v = vec![0.0; dim];
            v[i] = sign;
            out.push(v);
        }
    }
    out
}

fn two_sparse_cross(dim: usize, cap: usize) -> Vec<Vec<f64>> {
    let s = 1.0 / std::f64::consts::SQRT_2;
    let mut out = Vec::new();
    'outer: for i in 0..dim - 1 {
        for (a, b) in [(s, s), (s, -s)] {
            for sign in [1.0, -1.0] {
                let mut v = vec![0.0; dim];
                v[i] = sign * a;
                v[i + 1] = sign * b;
                out.push(v);
                if out.len() == cap {
                    break 'outer;
                }
            }
        }
    }
    out
}

/// Random unit vectors supported on s coordinates, from a fixed substream.
fn sparse_cloud(dim: usize, sparsity: usize, count: usize, stream: u64) -> Vec<Vec<f64>> {
    let mut rng = substream(0xc0_95e7, &[stream]);
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let mut idx: Vec<usize> = (0..dim).collect();
        for i in (1..dim).rev() {
            let j = (rng.random::<u64>() % (i as u64 + 1)) as usize;
            idx.swap(i, j);
        }
        let mut v = vec![0.0; dim];
        let mut nrm = 0.0;
        for &i in &idx[..sparsity] {
            let g: f64 = StandardNormal.sample(&mut rng);
            v[i] = g;
            nrm += g * g;
        }
        let nrm = nrm.sqrt();
        for &i in &idx[..sparsity] {
            v[i] /= nrm;
        }
        out.push(v);
    }
    out
}

/// The 20 committed finite sets for the process-sandwich experiment. All of
/// them have the sparse, max-like geometry under which the exponential
/// supremum dominates the gaussian one at these sizes; dense clouds do not
/// and are deliberately absent.
pub fn corpus_sets() -> Vec<(String, Vec<Vec<f64>>)> {
    let mut sets: Vec<(String, Vec<Vec<f64>>)> = vec![
        ("cross-d4".into(), cross(4, 1.0)),
        ("cross-d8".into(), cross(8, 1.0)),
        ("cross-d16".into(), cross(16, 1.0)),
        ("cross-d8-half".into(), cross(8, 0.5)),
        ("cross-d8-double".into(), cross(8, 2.0)),
        ("cross-d16-x1.5".into(), cross(16, 1.5)),
        ("sparse2-cross-d8".into(), two_sparse_cross(8, 28)),
        ("sparse2-cross-d16".into(), two_sparse_cross(16, 60)),
    ];
    let clouds: [(usize, usize, usize, u64); 11] = [
        (8, 2, 32, 1),
        (12, 2, 24, 2),
        (16, 2, 48, 3),
        (10, 3, 30, 4),
        (12, 3, 40, 5),
        (16, 3, 64, 6),
        (14, 3, 48, 7),
        (8, 3, 24, 8),
        (6, 2, 16, 9),
        (16, 4, 56, 10),
        (12, 4, 36, 11),
    ];
    for (d, s, count, stream) in clouds {
        sets.push((
            format!("sparse{s}-cloud-d{d}-t{count}"),
            sparse_cloud(d, s, count, stream),
        ));
    }
    // a mixed set: basis cross plus adjacent 2-sparse directions
    let mut mixed = cross(8, 1.0);
    mixed.extend(two_sparse_cross(8, 16));
    sets.push(("mixed-cross-d8".into(), mixed));
    debug_assert_eq!(sets.len(), 20);
    sets
}
