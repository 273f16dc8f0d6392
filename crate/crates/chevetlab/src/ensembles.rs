//! Samplers for every random object in the experiments, with statistical
//! self-audits.
//!
//! All samplers are pure functions of an explicit RNG state: identical
//! `(spec, seed)` gives a bit-identical draw. The symmetric exponential
//! distribution used throughout has density `2^{-1/2} exp(-sqrt(2) |x|)`,
//! i.e. variance 1.

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use rand::Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::linalg::mgs_orthonormal;
use crate::mat::Matrix;
use crate::rng::substream;
use crate::{Error, Result};

pub const SQRT2: f64 = std::f64::consts::SQRT_2;
const SQRT3: f64 = 1.732_050_807_568_877_2;

/// Row law for the independent-rows ensemble.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RowKind {
    Exponential,
    UniformBpBall { p: f64 },
}

/// The matrix/vector laws the harness knows how to draw.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EnsembleKind {
    Gaussian,
    Exponential,
    UniformCube,
    /// Rows drawn uniformly from B_p^N, rescaled to unit coordinate variance.
    UniformBpBall {
        p: f64,
    },
    /// U * Gamma with Gamma exponential and U the fixed Haar rotation
    /// determined by `rotation_seed`.
    RotatedExponential {
        rotation_seed: u64,
    },
    /// Independent isotropic log-concave unconditional rows.
    IndependentLcRows {
        row_kind: RowKind,
    },
}

/// Declarative description of a random matrix distribution. `cols == 1`
/// encodes a vector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnsembleSpec {
    pub kind: EnsembleKind,
    pub rows: usize,
    pub cols: usize,
}

impl EnsembleSpec {
    pub fn new(kind: EnsembleKind, rows: usize, cols: usize) -> Result<Self> {
        if rows < 1 || cols < 1 {
            return Err(Error::InvalidDimension(format!(
                "ensemble dimensions must be positive, got {rows}x{cols}"
            )));
        }
        match kind {
            EnsembleKind::UniformBpBall { p }
            | EnsembleKind::IndependentLcRows {
                row_kind: RowKind::UniformBpBall { p },
            } => {
                if !(p >= 1.0) || !p.is_finite() {
                    return Err(Error::InvalidParameter(format!(
                        "bp-ball needs finite p >= 1, got {p}"
                    )));
                }
            }
            _ => {}
        }
        Ok(EnsembleSpec { kind, rows, cols })
    }

    pub fn dim(&self) -> usize {
        self.rows * self.cols
    }

    /// Whether the law is invariant under arbitrary entry sign flips.
    pub fn is_unconditional(&self) -> bool {
        !matches!(self.kind, EnsembleKind::RotatedExponential { .. })
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SpecJson {
    kind: String,
    n: u64,
    #[serde(rename = "N")]
    cols: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    p: Option<f64>,
    #[serde(rename = "rotationSeed", skip_serializing_if = "Option::is_none")]
    rotation_seed: Option<u64>,
}

impl Serialize for EnsembleSpec {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let (kind, p, rotation_seed) = match self.kind {
            EnsembleKind::Gaussian => ("gaussian", None, None),
            EnsembleKind::Exponential => ("exponential", None, None),
            EnsembleKind::UniformCube => ("uniform-cube", None, None),
            EnsembleKind::UniformBpBall { p } => ("uniform-bp-ball", Some(p), None),
            EnsembleKind::RotatedExponential { rotation_seed } => {
                ("rotated-exponential", None, Some(rotation_seed))
            }
            EnsembleKind::IndependentLcRows { row_kind } => match row_kind {
                RowKind::Exponential => ("independent-lc-rows", None, None),
                RowKind::UniformBpBall { p } => ("independent-lc-rows", Some(p), None),
            },
        };
        SpecJson {
            kind: kind.to_string(),
            n: self.rows as u64,
            cols: self.cols as u64,
            p,
            rotation_seed,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for EnsembleSpec {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let j = SpecJson::deserialize(d)?;
        let reject_p = |p: &Option<f64>| -> std::result::Result<(), D::Error> {
            if p.is_some() {
                Err(D::Error::custom(format!(
                    "kind {:?} does not take p",
                    j.kind
                )))
            } else {
                Ok(())
            }
        };
        let reject_seed = |s: &Option<u64>| -> std::result::Result<(), D::Error> {
            if s.is_some() {
                Err(D::Error::custom(format!(
                    "kind {:?} does not take rotationSeed",
                    j.kind
                )))
            } else {
                Ok(())
            }
        };
        let kind = match j.kind.as_str() {
            "gaussian" => {
                reject_p(&j.p)?;
                reject_seed(&j.rotation_seed)?;
                EnsembleKind::Gaussian
            }
            "exponential" => {
                reject_p(&j.p)?;
                reject_seed(&j.rotation_seed)?;
                EnsembleKind::Exponential
            }
            "uniform-cube" => {
                reject_p(&j.p)?;
                reject_seed(&j.rotation_seed)?;
                EnsembleKind::UniformCube
            }
            "uniform-bp-ball" => {
                reject_seed(&j.rotation_seed)?;
                let p =
                    j.p.ok_or_else(|| D::Error::custom("uniform-bp-ball needs p"))?;
                EnsembleKind::UniformBpBall { p }
            }
            "rotated-exponential" => {
                reject_p(&j.p)?;
                let rotation_seed = j
                    .rotation_seed
                    .ok_or_else(|| D::Error::custom("rotated-exponential needs rotationSeed"))?;
                EnsembleKind::RotatedExponential { rotation_seed }
            }
            "independent-lc-rows" => {
                reject_seed(&j.rotation_seed)?;
                let row_kind = match j.p {
                    Some(p) => RowKind::UniformBpBall { p },
                    None => RowKind::Exponential,
                };
                EnsembleKind::IndependentLcRows { row_kind }
            }
            other => return Err(D::Error::custom(format!("unknown ensemble kind {other:?}"))),
        };
        if j.n > u32::MAX as u64 || j.cols > u32::MAX as u64 {
            return Err(D::Error::custom("dimension out of range"));
        }
        EnsembleSpec::new(kind, j.n as usize, j.cols as usize)
            .map_err(|e| D::Error::custom(e.to_string()))
    }
}

/// One symmetric exponential draw with variance 1, by inverse CDF:
/// sign times Exp(rate sqrt(2)).
#[inline]
pub fn exponential_entry(rng: &mut impl Rng) -> f64 {
    let u: f64 = rng.random();
    let e = -(1.0 - u).ln() / SQRT2;
    if rng.random::<bool>() {
        e
    } else {
        -e
    }
}

#[inline]
fn gaussian_entry(rng: &mut impl Rng) -> f64 {
    StandardNormal.sample(rng)
}

#[inline]
fn cube_entry(rng: &mut impl Rng) -> f64 {
    let u: f64 = rng.random();
    (2.0 * u - 1.0) * SQRT3
}

/// One row drawn uniformly from B_p^dim (unnormalized coordinate variance),
/// by the generalized-Gamma representation: coordinates with density
/// proportional to exp(-|t|^p) plus an independent Exp(1) in the radial
/// denominator.
fn bp_ball_row_raw(p: f64, dim: usize, rng: &mut impl Rng) -> Vec<f64> {
    let gamma = Gamma::new(1.0 / p, 1.0).expect("valid gamma shape");
    let mut g: Vec<f64> = Vec::with_capacity(dim);
    let mut sum_p = 0.0;
    for _ in 0..dim {
        let mag: f64 = gamma.sample(rng).powf(1.0 / p);
        let v = if rng.random::<bool>() { mag } else { -mag };
        sum_p += mag.powf(p);
        g.push(v);
    }
    let u: f64 = rng.random();
    let z = -(1.0 - u).ln();
    let denom = (sum_p + z).powf(1.0 / p);
    g.iter().map(|x| x / denom).collect()
}

/// Coordinate variance of the uniform distribution on B_p^dim, estimated
/// once per (p, dim) by a seeded million-coordinate pilot run and cached.
pub fn bp_ball_coordinate_variance(p: f64, dim: usize) -> f64 {
    static CACHE: OnceLock<Mutex<HashMap<(u64, usize), f64>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let key = (p.to_bits(), dim);
    if let Some(v) = cache.lock().unwrap().get(&key) {
        return *v;
    }
    let n_vec = (1_000_000usize).div_ceil(dim).max(1_000);
    let mut rng = substream(0xb9_ba11 ^ p.to_bits(), &[dim as u64]);
    let mut acc = 0.0;
    for _ in 0..n_vec {
        for x in bp_ball_row_raw(p, dim, &mut rng) {
            acc += x * x;
        }
    }
    let var = acc / (n_vec * dim) as f64;
    cache.lock().unwrap().insert(key, var);
    var
}

fn bp_ball_row(p: f64, dim: usize, rng: &mut impl Rng) -> Vec<f64> {
    let scale = 1.0 / bp_ball_coordinate_variance(p, dim).sqrt();
    bp_ball_row_raw(p, dim, rng)
        .into_iter()
        .map(|x| x * scale)
        .collect()
}

/// Haar-distributed orthogonal matrix: orthonormalized gaussian matrix with
/// the R diagonal sign fixed positive.
pub fn random_orthogonal(dim: usize, rng: &mut impl Rng) -> Result<Matrix> {
    if dim < 1 {
        return Err(Error::InvalidDimension(format!(
            "orthogonal dim must be >= 1, got {dim}"
        )));
    }
    let g = Matrix::from_fn(dim, dim, |_, _| gaussian_entry(rng));
    Ok(mgs_orthonormal(&g))
}

/// Rotate the columns of an exponential draw by the fixed orthogonal `u`.
pub fn sample_rotated_exponential(u: &Matrix, cols: usize, rng: &mut impl Rng) -> Result<Matrix> {
    let n = u.rows();
    if u.cols() != n {
        return Err(Error::DimensionMismatch("rotation must be square".into()));
    }
    let g = Matrix::from_fn(n, cols, |_, _| exponential_entry(rng));
    let mut out = Matrix::zeros(n, cols);
    for j in 0..cols {
        let col = g.col(j);
        let rot = u.matvec(&col);
        for i in 0..n {
            out.set(i, j, rot[i]);
        }
    }
    Ok(out)
}

/// The rotation used by the rotated-exponential kind for a given seed.
pub fn rotation_for_seed(dim: usize, rotation_seed: u64) -> Result<Matrix> {
    let mut rng = substream(rotation_seed, &[0x5a_f0]);
    random_orthogonal(dim, &mut rng)
}

/// One draw from the ensemble.
pub fn sample(spec: &EnsembleSpec, rng: &mut impl Rng) -> Result<Matrix> {
    let (n, cols) = (spec.rows, spec.cols);
    if n < 1 || cols < 1 {
        return Err(Error::InvalidDimension(format!("bad shape {n}x{cols}")));
    }
    let m = match spec.kind {
        EnsembleKind::Gaussian => Matrix::from_fn(n, cols, |_, _| gaussian_entry(rng)),
        EnsembleKind::Exponential => Matrix::from_fn(n, cols, |_, _| exponential_entry(rng)),
        EnsembleKind::UniformCube => Matrix::from_fn(n, cols, |_, _| cube_entry(rng)),
        EnsembleKind::UniformBpBall { p } => {
            if !(p >= 1.0) {
                return Err(Error::InvalidParameter(format!("p must be >= 1, got {p}")));
            }
            rows_matrix(n, cols, |rng| bp_ball_row(p, cols, rng), rng)
        }
        EnsembleKind::RotatedExponential { rotation_seed } => {
            let u = rotation_for_seed(n, rotation_seed)?;
            sample_rotated_exponential(&u, cols, rng)?
        }
        EnsembleKind::IndependentLcRows { row_kind } => match row_kind {
            RowKind::Exponential => rows_matrix(
                n,
                cols,
                |rng| (0..cols).map(|_| exponential_entry(rng)).collect(),
                rng,
            ),
            RowKind::UniformBpBall { p } => {
                if !(p >= 1.0) {
                    return Err(Error::InvalidParameter(format!("p must be >= 1, got {p}")));
                }
                rows_matrix(n, cols, |rng| bp_ball_row(p, cols, rng), rng)
            }
        },
    };
    debug_assert!(m.all_finite());
    Ok(m)
}

fn rows_matrix<R: Rng>(
    n: usize,
    cols: usize,
    mut row: impl FnMut(&mut R) -> Vec<f64>,
    rng: &mut R,
) -> Matrix {
    let mut m = Matrix::zeros(n, cols);
    for i in 0..n {
        let r = row(rng);
        for j in 0..cols {
            m.set(i, j, r[j]);
        }
    }
    m
}

/// Empirical isotropy audit of the flattened ensemble.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IsotropyReport {
    pub dim: usize,
    #[serde(rename = "maxAbsMean")]
    pub max_abs_mean: f64,
    #[serde(rename = "maxAbsCovDeviation")]
    pub max_abs_cov_deviation: f64,
    pub trials: u64,
    /// sqrt of the largest empirical fourth moment; the per-entry standard
    /// error of the covariance estimate is at most this over sqrt(trials).
    #[serde(rename = "standardErrorScale")]
    pub standard_error_scale: f64,
}

impl IsotropyReport {
    /// CLT-calibrated pass threshold for the covariance deviation.
    pub fn threshold(&self) -> f64 {
        4.0 * self.standard_error_scale / (self.trials as f64).sqrt()
    }

    pub fn passes(&self) -> bool {
        self.max_abs_cov_deviation <= self.threshold()
    }
}

/// Audit an arbitrary sampler producing flattened d-dimensional draws.
pub fn check_isotropy_with<R: Rng>(
    dim: usize,
    trials: u64,
    rng: &mut R,
    mut draw: impl FnMut(&mut R) -> Vec<f64>,
) -> IsotropyReport {
    assert!(trials >= 2, "isotropy audit needs at least two trials");
    let mut mean = vec![0.0; dim];
    let mut cov = vec![0.0; dim * dim];
    let mut m4 = vec![0.0; dim];
    for _ in 0..trials {
        let x = draw(rng);
        debug_assert_eq!(x.len(), dim);
        for i in 0..dim {
            mean[i] += x[i];
            m4[i] += x[i] * x[i] * x[i] * x[i];
            for j in i..dim {
                cov[i * dim + j] += x[i] * x[j];
            }
        }
    }
    let t = trials as f64;
    let mut max_mean = 0.0f64;
    let mut max_dev = 0.0f64;
    let mut max_m4 = 0.0f64;
    for i in 0..dim {
        max_mean = max_mean.max((mean[i] / t).abs());
        max_m4 = max_m4.max(m4[i] / t);
        for j in i..dim {
            let c = cov[i * dim + j] / t;
            let target = if i == j { 1.0 } else { 0.0 };
            max_dev = max_dev.max((c - target).abs());
        }
    }
    IsotropyReport {
        dim,
        max_abs_mean: max_mean,
        max_abs_cov_deviation: max_dev,
        trials,
        standard_error_scale: max_m4.sqrt(),
    }
}

/// Audit one ensemble kind.
pub fn check_isotropy(
    spec: &EnsembleSpec,
    trials: u64,
    rng: &mut impl Rng,
) -> Result<IsotropyReport> {
    if trials < 1000 {
        return Err(Error::InvalidParameter(format!(
            "isotropy audit needs at least 1000 trials, got {trials}"
        )));
    }
    let dim = spec.dim();
    let mut err = None;
    let report = check_isotropy_with(dim, trials, rng, |r| match sample(spec, r) {
        Ok(m) => m.data().to_vec(),
        Err(e) => {
            err = Some(e);
            vec![0.0; dim]
        }
    });
    match err {
        Some(e) => Err(e),
        None => Ok(report),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mat::dot;
    use crate::rng::substream;
    use crate::stats::{ks_statistic, ks_threshold};

    #[test]
    fn exponential_moments_match() {
        let mut rng = substream(1, &[]);
        let trials = 1_000_000usize;
        let mut s1 = 0.0;
        let mut s2 = 0.0;
        for _ in 0..trials {
            let e = exponential_entry(&mut rng);
            s1 += e.abs();
            s2 += e * e;
        }
        let m1 = s1 / trials as f64;
        let m2 = s2 / trials as f64;
        // E|E| = 1/sqrt(2); Var|E| = 1 - 1/2 -> se = sqrt(0.5/T)
        let se1 = (0.5 / trials as f64).sqrt();
        assert!((m1 - 1.0 / SQRT2).abs() <= 3.0 * se1, "E|E|={m1}");
        // E E^2 = 1; Var(E^2) = 6 - 1 = 5
        let se2 = (5.0 / trials as f64).sqrt();
        assert!((m2 - 1.0).abs() <= 3.0 * se2, "E E^2={m2}");
    }

    #[test]
    fn identity_rotation_matches_exponential_marginals() {
        // rotated-exponential with U = Id is the exponential law; two-sample
        // KS on a fixed functional must not reject at level 1e-3.
        let n = 100_000;
        let u = Matrix::identity(3);
        let w = [0.6, -1.3, 0.25, 0.9, 0.1, -0.4, 1.1, -0.2, 0.35];
        let mut rng = substream(7, &[]);
        let mut a: Vec<f64> = (0..n)
            .map(|_| {
                let m = sample_rotated_exponential(&u, 3, &mut rng).unwrap();
                dot(m.data(), &w)
            })
            .collect();
        let spec = EnsembleSpec::new(EnsembleKind::Exponential, 3, 3).unwrap();
        let mut b: Vec<f64> = (0..n)
            .map(|_| dot(sample(&spec, &mut rng).unwrap().data(), &w))
            .collect();
        let d = ks_statistic(&mut a, &mut b);
        assert!(d <= ks_threshold(n, n, 1e-3), "KS statistic {d} rejects");
    }

    #[test]
    fn unconditional_kinds_survive_sign_flips() {
        // fixed sign pattern, fixed functional, KS at level 1e-3
        let n = 100_000;
        let signs = [1.0, -1.0, -1.0, 1.0, -1.0, 1.0, 1.0, -1.0, -1.0];
        let w = [0.9, 0.2, -0.7, 0.4, -1.2, 0.05, -0.3, 0.8, 0.5];
        for kind in [
            EnsembleKind::Exponential,
            EnsembleKind::Gaussian,
            EnsembleKind::UniformCube,
            EnsembleKind::UniformBpBall { p: 1.5 },
        ] {
            let spec = EnsembleSpec::new(kind, 3, 3).unwrap();
            let mut rng = substream(11, &[]);
            let mut a: Vec<f64> = (0..n)
                .map(|_| dot(sample(&spec, &mut rng).unwrap().data(), &w))
                .collect();
            let mut b: Vec<f64> = (0..n)
                .map(|_| {
                    let m = sample(&spec, &mut rng).unwrap();
                    m.data()
                        .iter()
                        .zip(&signs)
                        .zip(&w)
                        .map(|((x, s), wi)| x * s * wi)
                        .sum()
                })
                .collect();
            let d = ks_statistic(&mut a, &mut b);
            assert!(d <= ks_threshold(n, n, 1e-3), "{kind:?}: KS {d} rejects");
        }
    }

    #[test]
    fn deterministic_given_spec_and_seed() {
        let spec =
            EnsembleSpec::new(EnsembleKind::RotatedExponential { rotation_seed: 5 }, 4, 6).unwrap();
        let a = sample(&spec, &mut substream(99, &[3])).unwrap();
        let b = sample(&spec, &mut substream(99, &[3])).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn orthogonal_dim_one_is_sign() {
        let mut rng = substream(2, &[]);
        let mut seen = [false, false];
        for _ in 0..64 {
            let u = random_orthogonal(1, &mut rng).unwrap();
            let v = u.get(0, 0);
            assert!((v.abs() - 1.0).abs() < 1e-12);
            seen[usize::from(v > 0.0)] = true;
        }
        assert!(seen[0] && seen[1], "both signs of O(1) should occur");
    }

    #[test]
    fn orthogonal_is_orthogonal_to_1e12() {
        let mut rng = substream(3, &[]);
        for _ in 0..20 {
            let u = random_orthogonal(5, &mut rng).unwrap();
            let ut = u.transpose();
            for i in 0..5 {
                for j in 0..5 {
                    let e: f64 = (0..5).map(|k| ut.get(i, k) * u.get(k, j)).sum();
                    let want = if i == j { 1.0 } else { 0.0 };
                    assert!((e - want).abs() <= 1e-12);
                }
            }
        }
    }

    #[test]
    fn haar_first_column_matches_sphere_moments() {
        // coordinates of a uniform point on S^2: mean 0, variance 1/3
        let trials = 100_000;
        let mut rng = substream(4, &[]);
        let mut s1 = [0.0; 3];
        let mut s2 = [0.0; 3];
        for _ in 0..trials {
            let u = random_orthogonal(3, &mut rng).unwrap();
            for i in 0..3 {
                let x = u.get(i, 0);
                s1[i] += x;
                s2[i] += x * x;
            }
        }
        let t = trials as f64;
        // Var(coord) = 1/3, Var(coord^2) = 1/5 - 1/9 = 4/45
        let se_mean = (1.0 / 3.0 / t).sqrt();
        let se_var = (4.0 / 45.0 / t).sqrt();
        for i in 0..3 {
            assert!((s1[i] / t).abs() <= 3.0 * se_mean, "mean {}", s1[i] / t);
            assert!(
                (s2[i] / t - 1.0 / 3.0).abs() <= 3.0 * se_var,
                "var {}",
                s2[i] / t
            );
        }
    }

    #[test]
    fn bp_ball_dim_one_is_uniform_segment() {
        // B_p^1 = [-1, 1] for every p; rescaled entries are uniform-cube
        let spec = EnsembleSpec::new(EnsembleKind::UniformBpBall { p: 3.0 }, 4, 1).unwrap();
        let mut rng = substream(12, &[]);
        let mut max_abs: f64 = 0.0;
        let mut s2 = 0.0;
        let trials = 20_000;
        for _ in 0..trials {
            let m = sample(&spec, &mut rng).unwrap();
            for &x in m.data() {
                max_abs = max_abs.max(x.abs());
                s2 += x * x;
            }
        }
        let var = s2 / (4.0 * trials as f64);
        assert!(
            max_abs <= SQRT3 * 1.01,
            "support should be about [-sqrt3, sqrt3]"
        );
        assert!((var - 1.0).abs() < 0.03);
    }

    #[test]
    fn bp_ball_pilot_matches_analytic_variance() {
        // oracle: the coordinate variance of the uniform distribution on
        // B_p^d has the closed form
        // Gamma(3/p) Gamma(d/p + 1) / (Gamma(1/p) Gamma((d+2)/p + 1))
        use statrs::function::gamma::ln_gamma;
        for (p, d) in [(1.0, 4), (1.5, 9), (3.0, 9), (2.0, 32)] {
            let pilot = bp_ball_coordinate_variance(p, d);
            let analytic = (ln_gamma(3.0 / p) + ln_gamma(d as f64 / p + 1.0)
                - ln_gamma(1.0 / p)
                - ln_gamma((d as f64 + 2.0) / p + 1.0))
            .exp();
            let rel = (pilot - analytic).abs() / analytic;
            assert!(
                rel < 1e-2,
                "p={p} d={d}: pilot {pilot} vs analytic {analytic}"
            );
        }
    }

    #[test]
    fn rotated_rectangular_ensemble_is_isotropic() {
        let spec =
            EnsembleSpec::new(EnsembleKind::RotatedExponential { rotation_seed: 3 }, 3, 4).unwrap();
        let mut rng = substream(13, &[]);
        let rep = check_isotropy(&spec, 100_000, &mut rng).unwrap();
        assert!(
            rep.passes(),
            "dev={} thr={}",
            rep.max_abs_cov_deviation,
            rep.threshold()
        );
    }

    #[test]
    fn isotropy_passes_for_exponential_and_fails_for_scaled() {
        let spec = EnsembleSpec::new(EnsembleKind::Exponential, 3, 3).unwrap();
        let mut rng = substream(5, &[]);
        let rep = check_isotropy(&spec, 100_000, &mut rng).unwrap();
        assert!(
            rep.passes(),
            "dev={} thr={}",
            rep.max_abs_cov_deviation,
            rep.threshold()
        );

        let mut rng = substream(6, &[]);
        let rep2 = check_isotropy_with(9, 100_000, &mut rng, |r| {
            sample(&spec, r)
                .unwrap()
                .data()
                .iter()
                .map(|x| 2.0 * x)
                .collect()
        });
        assert!(!rep2.passes());
        assert!(
            (rep2.max_abs_cov_deviation - 3.0).abs() < 0.2,
            "dev={}",
            rep2.max_abs_cov_deviation
        );
    }

    #[test]
    fn spec_json_round_trip_and_field_names() {
        let spec = EnsembleSpec::new(EnsembleKind::UniformBpBall { p: 1.5 }, 2, 7).unwrap();
        let js = serde_json::to_value(&spec).unwrap();
        assert_eq!(js["kind"], "uniform-bp-ball");
        assert_eq!(js["n"], 2);
        assert_eq!(js["N"], 7);
        assert_eq!(js["p"], 1.5);
        let back: EnsembleSpec = serde_json::from_value(js).unwrap();
        assert_eq!(back, spec);

        let rot =
            EnsembleSpec::new(EnsembleKind::RotatedExponential { rotation_seed: 9 }, 3, 4).unwrap();
        let js = serde_json::to_value(&rot).unwrap();
        assert_eq!(js["rotationSeed"], 9);
        assert_eq!(serde_json::from_value::<EnsembleSpec>(js).unwrap(), rot);
    }

    #[test]
    fn spec_json_rejects_invalid() {
        for bad in [
            r#"{"kind":"exponential","n":0,"N":3}"#,
            r#"{"kind":"uniform-bp-ball","n":2,"N":3,"p":0.5}"#,
            r#"{"kind":"uniform-bp-ball","n":2,"N":3}"#,
            r#"{"kind":"gaussian","n":2,"N":3,"p":2.0}"#,
            r#"{"kind":"rotated-exponential","n":2,"N":3}"#,
            r#"{"kind":"no-such-kind","n":2,"N":3}"#,
            r#"{"kind":"exponential","n":2,"N":3,"extra":1}"#,
        ] {
            assert!(
                serde_json::from_str::<EnsembleSpec>(bad).is_err(),
                "accepted: {bad}"
            );
        }
    }
}
