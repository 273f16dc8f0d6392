//! Gamma_q functionals on finite point sets, empirical suprema of gaussian
//! and exponential processes, and the leveled sparse-net construction with
//! its peeling decomposition.
//!
//! Conventions: admissible sequences satisfy |A_0| = 1 and |A_s| <= 2^(2^s),
//! sets are drawn from the input set itself, and the defining sum runs from
//! s = 0. Values returned by the greedy construction are upper bounds.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::ensembles::exponential_entry;
use crate::mat::norm2;
use crate::stats::EstimateWithCI;
use crate::submatrix::{binomial_f, Combinations};
use crate::{Error, Result};

/// Single chaining constant used by every sandwich check in the harness.
///
/// Derivation (committed once, conservative): for variance-1 symmetric
/// exponential coordinates the mgf satisfies E exp(u <a,E>) <= exp(u^2 |a|^2)
/// for |u| ||a||_inf <= 1, so increments obey
/// P(|<a,E>| >= t) <= 2 exp(-min(t^2 / (4|a|^2), t / (2||a||_inf))).
/// A union bound over the at most 2^(2^(s+1)) chain links of level s and
/// integration give E max <= 2 sigma_2 sqrt(ln 2M) + 4 sigma_inf ln 2M with
/// sqrt(ln 2M) <= 0.84 * 2^((s+1)/2) and ln 2M <= 0.70 * 2^(s+1). Link radii
/// are at most d(x, A_s) + d(x, A_{s-1}); re-indexing the two sums yields
/// E sup <= 5.7 gamma_2 + 16.9 gamma_1. The gaussian chain needs only
/// E sup <= 4.1 gamma_2. One constant covers both with slack.
pub const CHAIN_CONST: f64 = 18.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    Euclidean,
    Sup,
}

impl Metric {
    pub fn dist(&self, a: &[f64], b: &[f64]) -> f64 {
        match self {
            Metric::Euclidean => a
                .iter()
                .zip(b)
                .map(|(x, y)| (x - y) * (x - y))
                .sum::<f64>()
                .sqrt(),
            Metric::Sup => a
                .iter()
                .zip(b)
                .fold(0.0f64, |m, (x, y)| m.max((x - y).abs())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProcessLaw {
    Gaussian,
    Exponential,
}

/// An admissible sequence of subsets of the input set, by point indices.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AdmissibleSequence {
    pub levels: Vec<Vec<usize>>,
}

impl AdmissibleSequence {
    pub fn is_admissible(&self) -> bool {
        self.levels.first().map_or(false, |a0| a0.len() == 1)
            && self
                .levels
                .iter()
                .enumerate()
                .all(|(s, a)| s == 0 || a.len() as f64 <= 2f64.powf(2f64.powi(s as i32)))
    }
}

const MAX_POINTS: usize = 4096;
const MAX_DIM: usize = 64;

fn validate_set(points: &[Vec<f64>]) -> Result<usize> {
    if points.is_empty() {
        return Err(Error::InvalidParameter("point set must be nonempty".into()));
    }
    if points.len() > MAX_POINTS {
        return Err(Error::OverBudget(format!(
            "point set larger than {MAX_POINTS}"
        )));
    }
    let d = points[0].len();
    if d == 0 || d > MAX_DIM {
        return Err(Error::InvalidDimension(format!(
            "dimension must be in 1..={MAX_DIM}"
        )));
    }
    if points.iter().any(|p| p.len() != d) {
        return Err(Error::DimensionMismatch("ragged point set".into()));
    }
    Ok(d)
}

/// Cardinality cap of level s: |A_0| = 1, |A_s| <= 2^(2^s) for s >= 1.
fn level_cap(s: usize, total: usize) -> usize {
    if s == 0 {
        return 1.min(total);
    }
    if s >= 5 {
        return total; // 2^32 and beyond always covers desk-scale sets
    }
    let cap = 1u64 << (1u64 << s);
    (cap as usize).min(total)
}

/// Greedy upper bound for gamma_q via farthest-point traversal seeded at the
/// point nearest the centroid. Returns the value and the certifying sequence.
pub fn gamma_q_upper(
    points: &[Vec<f64>],
    q: u8,
    metric: Metric,
) -> Result<(f64, AdmissibleSequence)> {
    let d = validate_set(points)?;
    if q != 1 && q != 2 {
        return Err(Error::InvalidParameter(format!(
            "q must be 1 or 2, got {q}"
        )));
    }
    let t = points.len();
    let centroid: Vec<f64> = (0..d)
        .map(|j| points.iter().map(|p| p[j]).sum::<f64>() / t as f64)
        .collect();
    let mut order = Vec::with_capacity(t);
    let seed = (0..t)
        .min_by(|&a, &b| {
            metric
                .dist(&points[a], &centroid)
                .partial_cmp(&metric.dist(&points[b], &centroid))
                .unwrap()
                .then(a.cmp(&b))
        })
        .unwrap();
    order.push(seed);
    let mut min_dist: Vec<f64> = (0..t)
        .map(|i| metric.dist(&points[i], &points[seed]))
        .collect();
    while order.len() < t {
        let next = (0..t)
            .max_by(|&a, &b| {
                min_dist[a]
                    .partial_cmp(&min_dist[b])
                    .unwrap()
                    .then(b.cmp(&a))
            })
            .unwrap();
        order.push(next);
        for i in 0..t {
            min_dist[i] = min_dist[i].min(metric.dist(&points[i], &points[next]));
        }
    }
    // levels are prefixes of the traversal
    let mut levels = Vec::new();
    let mut s = 0;
    loop {
        let cap = level_cap(s, t);
        levels.push(order[..cap].to_vec());
        if cap == t {
            break;
        }
        s += 1;
    }
    let value = sequence_value(points, &levels, q, metric);
    Ok((value, AdmissibleSequence { levels }))
}

fn sequence_value(points: &[Vec<f64>], levels: &[Vec<usize>], q: u8, metric: Metric) -> f64 {
    let mut worst = 0.0f64;
    for x in points {
        let mut acc = 0.0;
        for (s, level) in levels.iter().enumerate() {
            let dist = level
                .iter()
                .map(|&i| metric.dist(x, &points[i]))
                .fold(f64::INFINITY, f64::min);
            let w = match q {
                1 => (1u64 << s) as f64,
                _ => ((1u64 << s) as f64).sqrt(),
            };
            acc += w * dist;
        }
        worst = worst.max(acc);
    }
    worst
}

/// Exhaustive minimum over admissible sequences drawn from the set itself;
/// only feasible for very small sets.
pub fn gamma_q_exact_small(points: &[Vec<f64>], q: u8, metric: Metric) -> Result<f64> {
    validate_set(points)?;
    let t = points.len();
    if t > 8 {
        return Err(Error::OverBudget(
            "exact gamma only runs for sets of at most 8 points".into(),
        ));
    }
    // |A_2| <= 16 >= |T|, so levels beyond s = 1 contribute nothing when the
    // final level is the whole set; enumerate A_0 (single point) and A_1
    // (any subset of size <= 4).
    let mut best = f64::INFINITY;
    let w1 = match q {
        1 => 2.0,
        _ => 2.0f64.sqrt(),
    };
    let mut a1_candidates: Vec<Vec<usize>> = Vec::new();
    for size in 1..=t.min(4) {
        a1_candidates.extend(Combinations::new(t, size));
    }
    for a0 in 0..t {
        for a1 in &a1_candidates {
            let mut worst = 0.0f64;
            for x in points {
                let d0 = metric.dist(x, &points[a0]);
                let d1 = a1
                    .iter()
                    .map(|&i| metric.dist(x, &points[i]))
                    .fold(f64::INFINITY, f64::min);
                // levels s >= 2 can always take the whole set: distance zero
                worst = worst.max(d0 + w1 * d1);
            }
            best = best.min(worst);
        }
    }
    Ok(best)
}

/// Monte Carlo estimate of E sup_{z in T} <z, xi> for xi with iid gaussian
/// or exponential coordinates.
pub fn emp_sup_process(
    points: &[Vec<f64>],
    law: ProcessLaw,
    trials: u64,
    rng: &mut impl Rng,
    seed_label: u64,
) -> Result<EstimateWithCI> {
    let d = validate_set(points)?;
    if trials < 100 {
        return Err(Error::InvalidParameter(
            "process estimate needs at least 100 trials".into(),
        ));
    }
    let mut samples = Vec::with_capacity(trials as usize);
    let mut xi = vec![0.0; d];
    for _ in 0..trials {
        for x in xi.iter_mut() {
            *x = match law {
                ProcessLaw::Gaussian => StandardNormal.sample(rng),
                ProcessLaw::Exponential => exponential_entry(rng),
            };
        }
        let sup = points
            .iter()
            .map(|z| z.iter().zip(&xi).map(|(a, b)| a * b).sum::<f64>())
            .fold(f64::NEG_INFINITY, f64::max);
        samples.push(sup);
    }
    Ok(EstimateWithCI::from_samples(&samples, seed_label))
}

/// One level of the sparse-net hierarchy. The net itself is the truncation
/// lattice with the stated pitch inside the cap
/// { support <= support_size } ∩ B_2 ∩ box_bound * B_inf,
/// which certifies the covering radius by construction; points are
/// enumerated on demand.
#[derive(Debug, Clone, PartialEq)]
pub struct NetLevel {
    pub level: usize,
    pub support_size: usize,
    pub epsilon: f64,
    pub pitch: f64,
    pub box_bound: f64,
    /// Largest magnitude index: coordinates are l * pitch, |l| <= max_steps.
    pub max_steps: u64,
    /// Exact dedup'd point count (exact integer while below 2^53).
    pub cardinality: f64,
    /// binom(n, 2^level) * (12 k / 2^level)^(2^level).
    pub card_bound: f64,
    /// Observed constant: ln(cardinality) / (2^level * ln(2n / 2^level)).
    pub chat: f64,
}

/// The leveled net hierarchy for k = 2^r - 1 sparse unit vectors in R^n.
#[derive(Debug, Clone, PartialEq)]
pub struct NetHierarchy {
    pub n: usize,
    pub k: usize,
    pub r: usize,
    pub levels: Vec<NetLevel>,
}

/// Net points are materialized (for serialization and audits) only below
/// this count.
pub const MATERIALIZE_CAP: f64 = 200_000.0;

impl NetLevel {
    /// Integer square budget: a lattice vector (l_1..l_j) is in the cap iff
    /// 2^level * sum l_t^2 <= 16 k^2 and each |l_t| <= max_steps.
    fn sq_budget(&self, k: usize) -> u64 {
        (16 * (k as u64) * (k as u64)) >> self.level
    }

    /// Truncate one coordinate to the lattice. Returns the signed step.
    fn quantize_coord(&self, x: f64) -> i64 {
        let steps = (x.abs() / self.pitch + 1e-9).floor() as i64;
        let steps = steps.min(self.max_steps as i64);
        if x < 0.0 {
            -steps
        } else {
            steps
        }
    }
}

impl NetHierarchy {
    pub fn level(&self, i: usize) -> &NetLevel {
        &self.levels[i]
    }

    /// Quantize a block of coordinates (values at the given indices) onto
    /// level i. Returns sparse (index, value) pairs; exact lattice points
    /// map to themselves.
    pub fn quantize_block(&self, i: usize, idxs: &[usize], vals: &[f64]) -> Vec<(usize, f64)> {
        let lv = &self.levels[i];
        let k = self.k;
        let mut steps: Vec<i64> = vals.iter().map(|&v| lv.quantize_coord(v)).collect();
        // the epsilon guard in quantize_coord can push a near-multiple up;
        // walk back if the integer budget is breached
        let budget = lv.sq_budget(k) as i128;
        loop {
            let ssq: i128 = steps.iter().map(|&l| (l as i128) * (l as i128)).sum();
            if ssq <= budget {
                break;
            }
            let worst = (0..steps.len())
                .filter(|&t| steps[t] != 0)
                .max_by(|&a, &b| {
                    let oa = steps[a].abs() as f64 * lv.pitch - vals[a].abs();
                    let ob = steps[b].abs() as f64 * lv.pitch - vals[b].abs();
                    oa.partial_cmp(&ob).unwrap().then(b.cmp(&a))
                })
                .expect("nonzero step exists while over budget");
            steps[worst] -= steps[worst].signum();
        }
        idxs.iter()
            .zip(&steps)
            .filter(|(_, &l)| l != 0)
            .map(|(&ix, &l)| (ix, l as f64 * lv.pitch))
            .collect()
    }

    /// Enumerate all distinct points of a level (supports of each size with
    /// all-nonzero lattice values). Refuses when the level is too large to
    /// materialize.
    pub fn enumerate_level(&self, i: usize) -> Result<Vec<Vec<(usize, f64)>>> {
        let lv = &self.levels[i];
        if lv.cardinality > MATERIALIZE_CAP {
            return Err(Error::OverBudget(format!(
                "level {i} has {} points, above the materialization cap",
                lv.cardinality
            )));
        }
        let budget = lv.sq_budget(self.k);
        let mut out = vec![vec![]]; // the zero point (empty support)
        for j in 1..=lv.support_size {
            for sup in Combinations::new(self.n, j) {
                let mut steps = vec![0i64; j];
                enumerate_steps(&mut steps, 0, budget, lv.max_steps, &mut |s: &[i64]| {
                    out.push(
                        sup.iter()
                            .zip(s)
                            .map(|(&ix, &l)| (ix, l as f64 * lv.pitch))
                            .collect(),
                    );
                });
            }
        }
        Ok(out)
    }
}

fn enumerate_steps(
    steps: &mut Vec<i64>,
    pos: usize,
    budget_left: u64,
    max_steps: u64,
    emit: &mut impl FnMut(&[i64]),
) {
    if pos == steps.len() {
        emit(steps);
        return;
    }
    // all coordinates nonzero: magnitude 1..max_steps, both signs
    let mut l = 1u64;
    while l <= max_steps && l * l <= budget_left {
        for sign in [1i64, -1i64] {
            steps[pos] = sign * l as i64;
            enumerate_steps(steps, pos + 1, budget_left - l * l, max_steps, emit);
        }
        l += 1;
    }
    steps[pos] = 0;
}

/// Build the hierarchy for ambient dimension n and sparsity k = 2^r - 1.
pub fn build_level_net(n: usize, k: usize) -> Result<NetHierarchy> {
    if n < 1 || n > 64 {
        return Err(Error::OverBudget(format!(
            "ambient dimension {n} outside 1..=64"
        )));
    }
    if k < 1 || k > n || !(k + 1).is_power_of_two() {
        return Err(Error::InvalidParameter(format!(
            "sparsity must be 2^r - 1 with k <= n, got k={k}, n={n}"
        )));
    }
    let r = (k + 1).trailing_zeros() as usize;
    let mut levels = Vec::with_capacity(r);
    for i in 0..r {
        let two_i = 1usize << i;
        let support_size = two_i.min(n);
        let epsilon = two_i as f64 / (4.0 * k as f64);
        let pitch = epsilon / (two_i as f64).sqrt();
        let box_bound = 1.0 / (two_i as f64).sqrt();
        // box_bound / pitch = 4k / 2^i exactly
        let max_steps = (4 * k as u64) >> i;
        let budget = (16 * (k as u64) * (k as u64)) >> i;
        let cardinality = count_lattice_points(n, support_size, max_steps, budget);
        let card_bound = binomial_f(n, two_i) * (12.0 * k as f64 / two_i as f64).powi(two_i as i32);
        let denom = two_i as f64 * (2.0 * n as f64 / two_i as f64).ln();
        let chat = if cardinality > 1.0 {
            cardinality.ln() / denom
        } else {
            0.0
        };
        levels.push(NetLevel {
            level: i,
            support_size,
            epsilon,
            pitch,
            box_bound,
            max_steps,
            cardinality,
            card_bound,
            chat,
        });
    }
    Ok(NetHierarchy { n, k, r, levels })
}

/// Exact dedup'd count: sum over support sizes j of
/// C(n, j) * 2^j * #{ (l_1..l_j) in {1..L}^j : sum l^2 <= budget }.
fn count_lattice_points(n: usize, support_size: usize, max_steps: u64, budget: u64) -> f64 {
    let b = budget as usize;
    // w[t] = number of tuples of the current length with sum of squares = t
    let mut w = vec![0.0f64; b + 1];
    w[0] = 1.0;
    let mut total = 1.0; // j = 0: the zero point
    for j in 1..=support_size {
        let mut next = vec![0.0f64; b + 1];
        for t in 0..=b {
            if w[t] == 0.0 {
                continue;
            }
            let mut l = 1u64;
            while l <= max_steps && t + (l * l) as usize <= b {
                next[t + (l * l) as usize] += w[t];
                l += 1;
            }
        }
        w = next;
        let count_j: f64 = w.iter().sum();
        total += binomial_f(n, j) * 2f64.powi(j as i32) * count_j;
    }
    total
}

/// Result of peeling a sparse vector through the hierarchy.
#[derive(Debug, Clone)]
pub struct SparseDecomposition {
    pub target: Vec<f64>,
    /// One sparse piece per level, pairwise disjoint supports.
    pub pieces: Vec<Vec<(usize, f64)>>,
    pub approx: Vec<f64>,
    pub err2: f64,
}

/// Decompose a k-sparse unit vector level by level: level i takes the
/// coordinates of magnitude rank [2^i, 2^end) and truncates them onto the
/// level-i lattice. Ranks at level i are at least 2^i, so the magnitude band
/// fits the level's sup-norm cap automatically.
pub fn decompose_sparse(x: &[f64], h: &NetHierarchy) -> Result<SparseDecomposition> {
    if x.len() != h.n {
        return Err(Error::DimensionMismatch(format!(
            "vector has dim {}, hierarchy was built for {}",
            x.len(),
            h.n
        )));
    }
    let nz: Vec<usize> = (0..x.len()).filter(|&i| x[i] != 0.0).collect();
    if nz.len() > h.k {
        return Err(Error::InvalidParameter(format!(
            "support {} exceeds the hierarchy sparsity {}",
            nz.len(),
            h.k
        )));
    }
    let nrm = norm2(x);
    if (nrm - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidParameter(format!(
            "input must be a unit vector, |x| = {nrm}"
        )));
    }
    let mut ranked = nz.clone();
    ranked.sort_by(|&a, &b| x[b].abs().partial_cmp(&x[a].abs()).unwrap().then(a.cmp(&b)));
    let mut pieces = Vec::with_capacity(h.r);
    let mut approx = vec![0.0; x.len()];
    for i in 0..h.r {
        let lo = ((1usize << i) - 1).min(ranked.len());
        let hi = ((1usize << (i + 1)) - 1).min(ranked.len());
        let idxs = &ranked[lo..hi];
        let vals: Vec<f64> = idxs.iter().map(|&ix| x[ix]).collect();
        let piece = h.quantize_block(i, idxs, &vals);
        for &(ix, v) in &piece {
            approx[ix] = v;
        }
        pieces.push(piece);
    }
    let err2: f64 = x.iter().zip(&approx).map(|(a, b)| (a - b) * (a - b)).sum();
    debug_assert!(err2 <= 0.125 + 1e-12);
    Ok(SparseDecomposition {
        target: x.to_vec(),
        pieces,
        approx,
        err2,
    })
}

// ---- serialization: {n, k, levels: [{i, epsilon, points: [[[idx, val], ...], ...]}]}

#[derive(Serialize, Deserialize)]
struct LevelJson {
    i: u64,
    epsilon: f64,
    points: Vec<Vec<(u64, f64)>>,
}

#[derive(Serialize, Deserialize)]
struct HierarchyJson {
    n: u64,
    k: u64,
    levels: Vec<LevelJson>,
}

impl Serialize for NetHierarchy {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::Error as _;
        let mut levels = Vec::with_capacity(self.levels.len());
        for lv in &self.levels {
            let pts = self
                .enumerate_level(lv.level)
                .map_err(|e| S::Error::custom(e.to_string()))?;
            levels.push(LevelJson {
                i: lv.level as u64,
                epsilon: lv.epsilon,
                // sparse coordinates are serialized 1-based
                points: pts
                    .into_iter()
                    .map(|p| p.into_iter().map(|(ix, v)| (ix as u64 + 1, v)).collect())
                    .collect(),
            });
        }
        HierarchyJson {
            n: self.n as u64,
            k: self.k as u64,
            levels,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for NetHierarchy {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let j = HierarchyJson::deserialize(d)?;
        let h = build_level_net(j.n as usize, j.k as usize)
            .map_err(|e| D::Error::custom(e.to_string()))?;
        if j.levels.len() != h.r {
            return Err(D::Error::custom(format!(
                "expected {} levels, got {}",
                h.r,
                j.levels.len()
            )));
        }
        for (lv, jl) in h.levels.iter().zip(&j.levels) {
            if jl.i as usize != lv.level || (jl.epsilon - lv.epsilon).abs() > 1e-12 {
                return Err(D::Error::custom("level header mismatch"));
            }
            if jl.points.len() as f64 != lv.cardinality {
                return Err(D::Error::custom(format!(
                    "level {} should have {} points, got {}",
                    lv.level,
                    lv.cardinality,
                    jl.points.len()
                )));
            }
            for p in &jl.points {
                let mut sq = 0.0;
                let mut last = 0u64;
                if p.len() > lv.support_size {
                    return Err(D::Error::custom("net point support too large"));
                }
                for &(ix, v) in p {
                    if ix < 1 || ix > j.n || ix <= last {
                        return Err(D::Error::custom(
                            "net point indices must be sorted, 1-based",
                        ));
                    }
                    last = ix;
                    if v.abs() > lv.box_bound * (1.0 + 1e-9) {
                        return Err(D::Error::custom("net point violates the sup-norm cap"));
                    }
                    let steps = v / lv.pitch;
                    if (steps - steps.round()).abs() > 1e-6 || steps.round() == 0.0 {
                        return Err(D::Error::custom("net point off the lattice"));
                    }
                    sq += v * v;
                }
                if sq > 1.0 + 1e-9 {
                    return Err(D::Error::custom("net point outside the unit ball"));
                }
            }
        }
        Ok(h)
    }
}
