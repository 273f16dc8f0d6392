//! Closed-form and Monte Carlo evaluation of the displayed bounds: the
//! two-term norm bound and its weak converse, the gaussian analogue, the
//! sparse-gauge expectation and its closed form, the l1 -> l1 scaling, tail
//! shapes, and admissible restricted-isometry sparsity thresholds.
//!
//! Absolute constants are never baked in: operations either return the
//! constant-free expression or take the constant as an explicit parameter.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::ensembles::exponential_entry;
use crate::geometry::{circumradius, codomain_radius, dual_norm, gauge, sup_linf, BallSpec};
use crate::stats::EstimateWithCI;
use crate::{Error, Result};

/// The two-term upper bound: termK = R(K) E||sum_{i<=n} xi_i e_i||_L and
/// termL = R(L polar) E||sum_{i<=N} xi_i e_i||_{K polar}.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChevetBound {
    #[serde(rename = "termK")]
    pub term_k: f64,
    #[serde(rename = "termL")]
    pub term_l: f64,
    pub total: f64,
    /// Monte Carlo expectation of the L-gauge of the n-dimensional vector.
    #[serde(rename = "expectationL")]
    pub expectation_l: EstimateWithCI,
    /// Monte Carlo expectation of the K-dual norm of the N-dimensional vector.
    #[serde(rename = "expectationKPolar")]
    pub expectation_k_polar: EstimateWithCI,
    #[serde(rename = "radiusK")]
    pub radius_k: f64,
    #[serde(rename = "codomainRadiusL")]
    pub codomain_radius_l: f64,
}

fn chevet_rhs_with(
    k_ball: &BallSpec,
    l_ball: &BallSpec,
    trials: u64,
    rng: &mut impl Rng,
    gaussian: bool,
) -> Result<ChevetBound> {
    if trials < 1000 {
        return Err(Error::InvalidParameter(
            "bound estimation needs at least 1000 trials".into(),
        ));
    }
    let n = l_ball.dim;
    let cols = k_ball.dim;
    let mut samples_l = Vec::with_capacity(trials as usize);
    let mut samples_k = Vec::with_capacity(trials as usize);
    let mut v = vec![0.0; n];
    let mut w = vec![0.0; cols];
    for _ in 0..trials {
        for x in v.iter_mut() {
            *x = if gaussian {
                StandardNormal.sample(rng)
            } else {
                exponential_entry(rng)
            };
        }
        samples_l.push(gauge(&v, l_ball)?);
        for x in w.iter_mut() {
            *x = if gaussian {
                StandardNormal.sample(rng)
            } else {
                exponential_entry(rng)
            };
        }
        samples_k.push(dual_norm(&w, k_ball)?);
    }
    let expectation_l = EstimateWithCI::from_samples(&samples_l, 0);
    let expectation_k_polar = EstimateWithCI::from_samples(&samples_k, 0);
    let radius_k = circumradius(k_ball);
    let codomain_radius_l = codomain_radius(l_ball);
    let term_k = radius_k * expectation_l.mean;
    let term_l = codomain_radius_l * expectation_k_polar.mean;
    Ok(ChevetBound {
        term_k,
        term_l,
        total: term_k + term_l,
        expectation_l,
        expectation_k_polar,
        radius_k,
        codomain_radius_l,
    })
}

/// Two-term upper bound with exponential coordinate vectors.
pub fn chevet_rhs(
    k_ball: &BallSpec,
    l_ball: &BallSpec,
    trials: u64,
    rng: &mut impl Rng,
) -> Result<ChevetBound> {
    chevet_rhs_with(k_ball, l_ball, trials, rng, false)
}

/// Same bound with gaussian coordinate vectors.
pub fn gaussian_chevet_rhs(
    k_ball: &BallSpec,
    l_ball: &BallSpec,
    trials: u64,
    rng: &mut impl Rng,
) -> Result<ChevetBound> {
    chevet_rhs_with(k_ball, l_ball, trials, rng, true)
}

/// The weak converse: half of
/// max_i ||e_i||_{K polar} E||Y_n||_L + max_i ||e_i||_L E||Y_N||_{K polar}.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChevetLowerBound {
    pub value: f64,
    #[serde(rename = "basisNormKPolar")]
    pub basis_norm_k_polar: f64,
    #[serde(rename = "basisNormL")]
    pub basis_norm_l: f64,
    #[serde(rename = "expectationL")]
    pub expectation_l: EstimateWithCI,
    #[serde(rename = "expectationKPolar")]
    pub expectation_k_polar: EstimateWithCI,
}

pub fn chevet_lower(
    k_ball: &BallSpec,
    l_ball: &BallSpec,
    trials: u64,
    rng: &mut impl Rng,
) -> Result<ChevetLowerBound> {
    if trials < 1000 {
        return Err(Error::InvalidParameter(
            "bound estimation needs at least 1000 trials".into(),
        ));
    }
    let mut basis_norm_k_polar = 0.0f64;
    for i in 0..k_ball.dim {
        let mut e = vec![0.0; k_ball.dim];
        e[i] = 1.0;
        basis_norm_k_polar = basis_norm_k_polar.max(dual_norm(&e, k_ball)?);
    }
    let mut basis_norm_l = 0.0f64;
    for i in 0..l_ball.dim {
        let mut e = vec![0.0; l_ball.dim];
        e[i] = 1.0;
        basis_norm_l = basis_norm_l.max(gauge(&e, l_ball)?);
    }
    let mut samples_l = Vec::with_capacity(trials as usize);
    let mut v = vec![0.0; l_ball.dim];
    for _ in 0..trials {
        for x in v.iter_mut() {
            *x = exponential_entry(rng);
        }
        samples_l.push(gauge(&v, l_ball)?);
    }
    let expectation_l = EstimateWithCI::from_samples(&samples_l, 0);
    let mut samples_k = Vec::with_capacity(trials as usize);
    let mut w = vec![0.0; k_ball.dim];
    for _ in 0..trials {
        for x in w.iter_mut() {
            *x = exponential_entry(rng);
        }
        samples_k.push(dual_norm(&w, k_ball)?);
    }
    let expectation_k_polar = EstimateWithCI::from_samples(&samples_k, 0);
    let value =
        0.5 * (basis_norm_k_polar * expectation_l.mean + basis_norm_l * expectation_k_polar.mean);
    Ok(ChevetLowerBound {
        value,
        basis_norm_k_polar,
        basis_norm_l,
        expectation_l,
        expectation_k_polar,
    })
}

/// Constant-free submatrix bound sqrt(m) ln(3N/m) + sqrt(k) ln(3n/k).
pub fn subm_bound(k: usize, m: usize, n: usize, cols: usize) -> Result<f64> {
    if k < 1 || k > n || m < 1 || m > cols {
        return Err(Error::InvalidParameter(format!(
            "need 1 <= k <= n and 1 <= m <= N, got k={k} n={n} m={m} N={cols}"
        )));
    }
    Ok((m as f64).sqrt() * (3.0 * cols as f64 / m as f64).ln()
        + (k as f64).sqrt() * (3.0 * n as f64 / k as f64).ln())
}

/// Closed form sqrt(l) ln(3n/l) for the expected top-l gauge.
pub fn est_um_closed(l: usize, n: usize) -> Result<f64> {
    if l < 1 || l > n {
        return Err(Error::InvalidParameter(format!(
            "need 1 <= l <= n, got l={l} n={n}"
        )));
    }
    Ok((l as f64).sqrt() * (3.0 * n as f64 / l as f64).ln())
}

/// Monte Carlo expectation of the top-l euclidean norm of an exponential
/// n-vector.
pub fn est_um_exact(l: usize, n: usize, trials: u64, rng: &mut impl Rng) -> Result<EstimateWithCI> {
    if l < 1 || l > n {
        return Err(Error::InvalidParameter(format!(
            "need 1 <= l <= n, got l={l} n={n}"
        )));
    }
    if trials < 2 {
        return Err(Error::InvalidParameter("need at least two trials".into()));
    }
    let mut samples = Vec::with_capacity(trials as usize);
    let mut v = vec![0.0; n];
    for _ in 0..trials {
        for x in v.iter_mut() {
            *x = exponential_entry(rng);
        }
        samples.push(crate::geometry::top_k_l2(&v, l));
    }
    Ok(EstimateWithCI::from_samples(&samples, 0))
}

/// n + ln N.
pub fn lonenorm_bound(n: usize, cols: usize) -> f64 {
    n as f64 + (cols as f64).ln()
}

/// Tail parameters sigma = R(K) R(L polar) and
/// sigma' = sup_K ||.||_inf * sup_{L polar} ||.||_inf; for a point set,
/// a = sup |z| and b = sup ||z||_inf.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct TailParams {
    pub sigma: f64,
    #[serde(rename = "sigmaPrime")]
    pub sigma_prime: f64,
    pub a: f64,
    pub b: f64,
}

impl TailParams {
    pub fn from_pair(k_ball: &BallSpec, l_ball: &BallSpec) -> Self {
        let sigma = circumradius(k_ball) * codomain_radius(l_ball);
        let sigma_prime = sup_linf(k_ball) * sup_linf(&l_ball.polar());
        TailParams {
            sigma,
            sigma_prime,
            a: sigma,
            b: sigma_prime,
        }
    }

    pub fn from_set(points: &[Vec<f64>]) -> Self {
        let mut a = 0.0f64;
        let mut b = 0.0f64;
        for z in points {
            a = a.max(crate::mat::norm2(z));
            b = b.max(crate::mat::norm_inf(z));
        }
        TailParams {
            sigma: a,
            sigma_prime: b,
            a,
            b,
        }
    }
}

/// exp(-c min(t^2 / sigma^2, t / sigma')); shape only, never a probability
/// claim.
pub fn tail_shape(t: f64, params: &TailParams, c: f64) -> Result<f64> {
    if t < 0.0 {
        return Err(Error::InvalidParameter("tail shape needs t >= 0".into()));
    }
    if !(c > 0.0) {
        return Err(Error::InvalidParameter("tail shape needs c > 0".into()));
    }
    if t == 0.0 {
        return Ok(1.0);
    }
    let quad = t * t / (params.sigma * params.sigma);
    let lin = t / params.sigma_prime;
    Ok((-c * quad.min(lin)).exp())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RipBranch {
    #[serde(rename = "i")]
    I,
    #[serde(rename = "ii")]
    II,
}

/// Largest admissible sparsity for target isometry defect theta, with the
/// caller-supplied constant.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RipThreshold {
    pub theta: f64,
    pub n: usize,
    #[serde(rename = "N")]
    pub cols: usize,
    pub m: usize,
    pub branch: RipBranch,
    pub c: f64,
}

pub fn rip_admissible_m(theta: f64, n: usize, cols: usize, c: f64) -> Result<RipThreshold> {
    if !(theta > 0.0 && theta < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "theta must be in (0,1), got {theta}"
        )));
    }
    if !(c > 0.0) {
        return Err(Error::InvalidParameter(
            "constant c must be positive".into(),
        ));
    }
    if n < 1 || cols < 1 {
        return Err(Error::InvalidDimension(
            "dimensions must be positive".into(),
        ));
    }
    let (branch, raw) = if cols <= n {
        let val = c * theta * theta * n as f64 / (3.0 / theta).ln().powi(3);
        (RipBranch::I, val.min(cols as f64))
    } else {
        let log_ratio = (3.0 * cols as f64 / (theta * n as f64)).ln();
        let base = c * theta * n as f64 / log_ratio;
        let val = base * (1.0 / log_ratio).min(theta / (3.0 / theta).ln().powi(2));
        (RipBranch::II, val.min(cols as f64))
    };
    Ok(RipThreshold {
        theta,
        n,
        cols,
        m: raw.floor().max(0.0) as usize,
        branch,
        c,
    })
}
