//! Symmetric eigen-solves, spectral norms, and orthonormalization.
//!
//! Small symmetric matrices (side <= 32) go through a cyclic Jacobi solve;
//! larger ones through power iteration with a deterministic all-ones start
//! and tolerance 1e-10, falling back to Jacobi if the iteration stalls.
//! Everything here is deterministic given its inputs.

use crate::mat::{dot, norm2, Matrix};

/// Largest symmetric side handled by the direct Jacobi solve.
pub const DIRECT_EIG_LIMIT: usize = 32;
/// Relative tolerance for power iteration.
pub const POWER_TOL: f64 = 1e-10;

/// Eigen-decomposition of a symmetric matrix by cyclic Jacobi rotations.
/// Returns eigenvalues (unsorted) and eigenvectors as columns.
pub fn jacobi_eigh(a: &Matrix) -> (Vec<f64>, Matrix) {
    let (vals, vecs) = jacobi_core(a, true);
    (vals, vecs.expect("vectors requested"))
}

/// Eigenvalues only; cheaper inside tight enumeration loops.
pub fn jacobi_eigvals(a: &Matrix) -> Vec<f64> {
    jacobi_core(a, false).0
}

fn jacobi_core(a: &Matrix, with_vectors: bool) -> (Vec<f64>, Option<Matrix>) {
    let n = a.rows();
    assert_eq!(n, a.cols(), "jacobi needs a square matrix");
    let mut m = a.clone();
    let mut v = with_vectors.then(|| Matrix::identity(n));
    if n <= 1 {
        return ((0..n).map(|i| m.get(i, i)).collect(), v);
    }
    let scale = m
        .data()
        .iter()
        .map(|x| x * x)
        .sum::<f64>()
        .sqrt()
        .max(f64::MIN_POSITIVE);
    for _sweep in 0..64 {
        let mut off = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off += m.get(p, q) * m.get(p, q);
            }
        }
        if off.sqrt() <= 1e-14 * scale {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m.get(p, q);
                if apq.abs() <= 1e-300 {
                    continue;
                }
                let theta = (m.get(q, q) - m.get(p, p)) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for i in 0..n {
                    let mip = m.get(i, p);
                    let miq = m.get(i, q);
                    m.set(i, p, c * mip - s * miq);
                    m.set(i, q, s * mip + c * miq);
                }
                for j in 0..n {
                    let mpj = m.get(p, j);
                    let mqj = m.get(q, j);
                    m.set(p, j, c * mpj - s * mqj);
                    m.set(q, j, s * mpj + c * mqj);
                }
                if let Some(v) = v.as_mut() {
                    for i in 0..n {
                        let vip = v.get(i, p);
                        let viq = v.get(i, q);
                        v.set(i, p, c * vip - s * viq);
                        v.set(i, q, s * vip + c * viq);
                    }
                }
            }
        }
    }
    ((0..n).map(|i| m.get(i, i)).collect(), v)
}

/// Largest singular value of a rectangular matrix, no vectors.
pub fn spectral_value(a: &Matrix) -> f64 {
    let (r, c) = (a.rows(), a.cols());
    if r == 0 || c == 0 {
        return 0.0;
    }
    if r == 1 {
        return crate::mat::norm2(a.row(0));
    }
    if c == 1 {
        return crate::mat::norm2(&a.col(0));
    }
    let on_cols = c <= r;
    let side: Vec<usize> = (0..if on_cols { c } else { r }).collect();
    let gram = if on_cols {
        a.gram_of_cols(&side, 1.0)
    } else {
        a.transpose().gram_of_cols(&side, 1.0)
    };
    if gram.rows() <= DIRECT_EIG_LIMIT {
        jacobi_eigvals(&gram)
            .into_iter()
            .fold(0.0f64, f64::max)
            .max(0.0)
            .sqrt()
    } else {
        sym_extreme_eig(&gram).0.max(0.0).sqrt()
    }
}

/// Eigenvalue of largest magnitude of a symmetric matrix, with eigenvector.
pub fn sym_extreme_eig(a: &Matrix) -> (f64, Vec<f64>) {
    let n = a.rows();
    assert_eq!(n, a.cols());
    if n == 0 {
        return (0.0, vec![]);
    }
    if n <= DIRECT_EIG_LIMIT {
        let (vals, vecs) = jacobi_eigh(a);
        let (idx, lam) = extreme_by_abs(&vals);
        return (lam, vecs.col(idx));
    }
    match power_iteration_sym(a) {
        Some(r) => r,
        None => {
            let (vals, vecs) = jacobi_eigh(a);
            let (idx, lam) = extreme_by_abs(&vals);
            (lam, vecs.col(idx))
        }
    }
}

fn extreme_by_abs(vals: &[f64]) -> (usize, f64) {
    let mut idx = 0;
    for (i, v) in vals.iter().enumerate() {
        // deterministic tie-break: smallest index wins
        if v.abs() > vals[idx].abs() + 0.0 {
            idx = i;
        }
        let _ = v;
    }
    (idx, vals[idx])
}

fn power_iteration_sym(a: &Matrix) -> Option<(f64, Vec<f64>)> {
    let n = a.rows();
    let mut v = vec![1.0 / (n as f64).sqrt(); n];
    for iter in 0..100_000 {
        let mut w = a.matvec(&v);
        let nw = norm2(&w);
        if nw <= 1e-300 {
            return Some((0.0, v));
        }
        for x in &mut w {
            *x /= nw;
        }
        let av = a.matvec(&w);
        let lam = dot(&w, &av);
        let mut res = 0.0;
        for i in 0..n {
            let r = av[i] - lam * w[i];
            res += r * r;
        }
        v = w;
        if res.sqrt() <= POWER_TOL * lam.abs().max(1e-300) {
            return Some((lam, v));
        }
        // restart from a skewed deterministic vector if the all-ones start
        // happens to sit in a null direction
        if iter == 200 && lam.abs() <= 1e-300 {
            for (i, x) in v.iter_mut().enumerate() {
                *x = 1.0 + (i as f64 + 1.0).sqrt();
            }
            let nv = norm2(&v);
            for x in &mut v {
                *x /= nv;
            }
        }
    }
    None
}

/// Largest singular value with a consistent singular pair (u, v): A v = sigma u.
#[derive(Debug, Clone)]
pub struct SpectralResult {
    pub value: f64,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
}

/// Spectral norm via the Gram matrix on the smaller side.
pub fn spectral_norm(a: &Matrix) -> SpectralResult {
    let (r, c) = (a.rows(), a.cols());
    if r == 0 || c == 0 {
        return SpectralResult {
            value: 0.0,
            u: vec![0.0; r],
            v: vec![0.0; c],
        };
    }
    // 1 x c and r x 1 have closed forms
    if r == 1 {
        let row = a.row(0).to_vec();
        let s = norm2(&row);
        let v = if s > 0.0 {
            row.iter().map(|x| x / s).collect()
        } else {
            unit_vec(c, 0)
        };
        return SpectralResult {
            value: s,
            u: vec![1.0],
            v,
        };
    }
    if c == 1 {
        let col = a.col(0);
        let s = norm2(&col);
        let u = if s > 0.0 {
            col.iter().map(|x| x / s).collect()
        } else {
            unit_vec(r, 0)
        };
        return SpectralResult {
            value: s,
            u,
            v: vec![1.0],
        };
    }
    let on_cols = c <= r;
    let side: Vec<usize> = (0..if on_cols { c } else { r }).collect();
    let gram = if on_cols {
        a.gram_of_cols(&side, 1.0)
    } else {
        a.transpose().gram_of_cols(&side, 1.0)
    };
    let (lam, w) = sym_extreme_eig(&gram);
    let sigma = lam.max(0.0).sqrt();
    if sigma <= 1e-300 {
        return SpectralResult {
            value: 0.0,
            u: unit_vec(r, 0),
            v: unit_vec(c, 0),
        };
    }
    let (u, v) = if on_cols {
        let mut u = a.matvec(&w);
        for x in &mut u {
            *x /= sigma;
        }
        (u, w)
    } else {
        let mut v = a.tr_matvec(&w);
        for x in &mut v {
            *x /= sigma;
        }
        (w, v)
    };
    SpectralResult { value: sigma, u, v }
}

fn unit_vec(n: usize, i: usize) -> Vec<f64> {
    let mut v = vec![0.0; n];
    v[i] = 1.0;
    v
}

/// Orthonormalize the columns of a square matrix by modified Gram-Schmidt
/// with one re-orthogonalization pass. The R diagonal is positive by
/// construction, which is the sign convention that makes a gaussian input
/// Haar distributed.
pub fn mgs_orthonormal(g: &Matrix) -> Matrix {
    let n = g.rows();
    assert_eq!(n, g.cols());
    let mut cols: Vec<Vec<f64>> = (0..n).map(|j| g.col(j)).collect();
    for j in 0..n {
        for _pass in 0..2 {
            for i in 0..j {
                let proj = {
                    let (qi, vj) = (&cols[i], &cols[j]);
                    dot(qi, vj)
                };
                let qi = cols[i].clone();
                for (x, q) in cols[j].iter_mut().zip(qi.iter()) {
                    *x -= proj * q;
                }
            }
        }
        let nv = norm2(&cols[j]);
        assert!(nv > 1e-300, "degenerate input to orthonormalization");
        for x in &mut cols[j] {
            *x /= nv;
        }
    }
    Matrix::from_fn(n, n, |i, j| cols[j][i])
}
