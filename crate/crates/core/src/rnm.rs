//! Report noisy max over counting queries.
//!
//! The argmax follows the recursive definition exactly: the head of a list
//! wins only when it is *strictly* greater than the maximum of the tail, so
//! ties resolve to the later index. Under continuous noise ties have
//! probability zero and the choice does not affect any probability computed
//! here.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;
use serde::Serialize;

use crate::dataset::{
    counting_query, dominates_by_at_most_one, neighbor_pairs, CountingQuerySet, Dataset,
};
use crate::error::{DpError, Result};
use crate::laplace::{laplace_vector_sample, Laplace, TAIL_SCALES};
use crate::quadrature::integrate_piecewise;
use crate::rng::RandomSource;

/// Default absolute tolerance for RNM output probabilities.
pub const DEFAULT_PROB_TOL: f64 = 1e-9;

/// Below this probability a DP ratio is flagged as numerically unstable.
pub const UNSTABLE_PROB: f64 = 1e-6;

/// A real number or −∞.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum ExtendedReal {
    NegInfinity,
    Finite(f64),
}

impl ExtendedReal {
    pub fn finite(self) -> Option<f64> {
        match self {
            Self::Finite(x) => Some(x),
            Self::NegInfinity => None,
        }
    }

    /// −∞ maps to `f64::NEG_INFINITY`.
    pub fn to_f64(self) -> f64 {
        self.finite().unwrap_or(f64::NEG_INFINITY)
    }
}

impl PartialOrd for ExtendedReal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match (self, other) {
            (Self::NegInfinity, Self::NegInfinity) => Some(Ordering::Equal),
            (Self::NegInfinity, _) => Some(Ordering::Less),
            (_, Self::NegInfinity) => Some(Ordering::Greater),
            (Self::Finite(a), Self::Finite(b)) => a.partial_cmp(b),
        }
    }
}

/// `(max, argmax)` by the recursion
/// `[] ↦ (−∞, 0)`, `x :: xs ↦ if x > m then (x, 0) else (m, i + 1)`
/// where `(m, i)` is the result on `xs`.
pub fn max_argmax(xs: &[f64]) -> (ExtendedReal, usize) {
    xs.iter()
        .rev()
        .fold((ExtendedReal::NegInfinity, 0), |(m, i), &x| {
            if ExtendedReal::Finite(x) > m {
                (ExtendedReal::Finite(x), 0)
            } else {
                (m, i + 1)
            }
        })
}

pub fn argmax_list(xs: &[f64]) -> usize {
    max_argmax(xs).1
}

/// `take i ks ++ [k] ++ drop i ks`.
pub fn list_insert(k: f64, ks: &[f64], i: usize) -> Result<Vec<f64>> {
    if i > ks.len() {
        return Err(DpError::Index {
            index: i,
            len: ks.len(),
        });
    }
    let mut out = Vec::with_capacity(ks.len() + 1);
    out.extend_from_slice(&ks[..i]);
    out.push(k);
    out.extend_from_slice(&ks[i..]);
    Ok(out)
}

pub fn argmax_insert(k: f64, ks: &[f64], i: usize) -> Result<usize> {
    Ok(argmax_list(&list_insert(k, ks, i)?))
}

/// Right-hand side of the insertion characterisation:
/// `k ≥ max ks ∧ k ≠ max (drop i ks)`.
pub fn argmax_insert_condition(k: f64, ks: &[f64], i: usize) -> bool {
    let k = ExtendedReal::Finite(k);
    let tail = &ks[i.min(ks.len())..];
    k >= max_argmax(ks).0 && k != max_argmax(tail).0
}

/// `argmax_j (c_j + r_j)` with `r ~ Lap(1/ε)^m`.
pub fn rnm_sample_scores(scores: &[f64], eps: f64, rng: &mut RandomSource) -> Result<usize> {
    check_eps(eps)?;
    Ok(argmax_list(&laplace_vector_sample(1.0 / eps, scores, rng)))
}

/// Report noisy max on the counting queries `q` evaluated at `data`.
/// Always 0 when `m ≤ 1`.
pub fn rnm_sample(
    q: &CountingQuerySet,
    eps: f64,
    data: &Dataset,
    rng: &mut RandomSource,
) -> Result<usize> {
    let scores: Vec<f64> = counting_query(q, data).into_iter().map(|c| c as f64).collect();
    rnm_sample_scores(&scores, eps, rng)
}

fn check_eps(eps: f64) -> Result<()> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(DpError::Parameter(format!("epsilon must be positive, got {eps}")));
    }
    Ok(())
}

/// `Pr[argmax_j (c_j + r_j) = i]` via
/// `∫ f(t − c_i) Π_{j≠i} F(t − c_j) dt`, with `f`, `F` the `Lap(1/ε)` density
/// and CDF. The integral is split at every score and truncated 40 noise
/// scales either side of `c_i`.
pub fn rnm_prob_exact(scores: &[f64], eps: f64, i: usize, tol: f64) -> Result<f64> {
    if scores.is_empty() {
        return Err(DpError::Domain("no queries (m = 0)".into()));
    }
    if i >= scores.len() {
        return Err(DpError::Index {
            index: i,
            len: scores.len(),
        });
    }
    check_eps(eps)?;
    if !(tol > 0.0) {
        return Err(DpError::Parameter(format!("tolerance must be positive, got {tol}")));
    }
    if scores.len() == 1 {
        return Ok(1.0);
    }
    let noise = Laplace::centered(1.0 / eps);
    let ci = scores[i];
    let others: Vec<f64> = scores
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != i)
        .map(|(_, &c)| c)
        .collect();
    let integrand = |t: f64| {
        let mut v = noise.pdf_unchecked(t - ci);
        for &c in &others {
            v *= noise.cdf(t - c);
        }
        v
    };
    let w = TAIL_SCALES / eps;
    let q = integrate_piecewise(&integrand, ci - w, ci + w, scores, tol);
    Ok(q.value)
}

/// `[Pr[RNM(c) = i] for i < m]`.
pub fn rnm_distribution(scores: &[f64], eps: f64, tol: f64) -> Result<Vec<f64>> {
    (0..scores.len())
        .map(|i| rnm_prob_exact(scores, eps, i, tol))
        .collect()
}

/// Noise values `r_j` and scores `c_j` for every index but a designated
/// hole `i`, where the noise is still to be drawn.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NoiseAssignment {
    pub hole: usize,
    pub scores: Vec<f64>,
    pub noise: Vec<f64>,
}

impl NoiseAssignment {
    /// Removes index `hole` from full-length score and noise vectors.
    pub fn without(hole: usize, scores: &[f64], noise: &[f64]) -> Result<Self> {
        if scores.len() != noise.len() {
            return Err(DpError::Dimension {
                expected: scores.len(),
                actual: noise.len(),
            });
        }
        if hole >= scores.len() {
            return Err(DpError::Index {
                index: hole,
                len: scores.len(),
            });
        }
        let drop = |v: &[f64]| {
            v.iter()
                .enumerate()
                .filter(|&(j, _)| j != hole)
                .map(|(_, &x)| x)
                .collect()
        };
        Ok(Self {
            hole,
            scores: drop(scores),
            noise: drop(noise),
        })
    }

    /// `max_{j≠i} (c_j + r_j)`; −∞ when there are no other indices.
    pub fn noisy_max(&self) -> ExtendedReal {
        let sums: Vec<f64> = self
            .scores
            .iter()
            .zip(&self.noise)
            .map(|(c, r)| c + r)
            .collect();
        max_argmax(&sums).0
    }
}

/// `p_i = Pr_{r_i ~ Lap(1/ε)}[c_i + r_i ≥ M] = 1 − F(M − c_i)` where
/// `M = max_{j≠i}(c_j + r_j)` is fixed by `others`.
pub fn rnm_p_i(ci: f64, others: &NoiseAssignment, eps: f64) -> Result<f64> {
    check_eps(eps)?;
    Ok(match others.noisy_max() {
        ExtendedReal::NegInfinity => 1.0,
        ExtendedReal::Finite(m) => Laplace::centered(1.0 / eps).survival(m - ci),
    })
}

/// With `ys ≤ xs ≤ ys + 1` componentwise, checks
/// `max(xs + rs) ≥ max(ys + rs)` and `max(xs + rs) ≤ max(ys + rs) + 1`.
/// `None` when the premise fails.
pub fn verify_max_adjacency(xs: &[f64], ys: &[f64], rs: &[f64]) -> Option<bool> {
    if xs.len() != ys.len() || xs.len() != rs.len() {
        return None;
    }
    if !xs.iter().zip(ys).all(|(x, y)| x >= y && *x <= y + 1.0) {
        return None;
    }
    let add = |v: &[f64]| -> Vec<f64> { v.iter().zip(rs).map(|(a, b)| a + b).collect() };
    let d = max_argmax(&add(xs)).0;
    let d2 = max_argmax(&add(ys)).0;
    Some(match (d, d2) {
        (ExtendedReal::Finite(a), ExtendedReal::Finite(b)) => a >= b && a <= b + 1.0,
        (ExtendedReal::NegInfinity, ExtendedReal::NegInfinity) => true,
        _ => false,
    })
}

/// One `(D, D', i)` cell of an RNM verification.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RnmCell {
    pub d: Vec<u64>,
    pub d_prime: Vec<u64>,
    pub i: usize,
    pub p: f64,
    pub p_prime: f64,
    pub ratio: f64,
    pub bound: f64,
    pub pass: bool,
    pub unstable: bool,
}

/// Result of [`verify_rnm_dp_finer`] for one query set.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RnmVerification {
    pub epsilon: f64,
    pub m: usize,
    pub n: usize,
    pub max_entry: u64,
    pub tol: f64,
    /// `e^ε`.
    pub finer_bound: f64,
    /// `e^{mε}`, the bound obtained by treating RNM as post-processing of
    /// an `m`-sensitive Laplace mechanism.
    pub naive_bound: f64,
    pub max_ratio: f64,
    pub pairs: usize,
    pub dichotomy_holds: bool,
    pub unstable_cells: usize,
    pub pass: bool,
    pub cells: Vec<RnmCell>,
}

/// Cache of RNM output laws keyed by the score vector shifted to minimum 0
/// and sorted, which determines the law up to relabelling. Sharing one
/// table across many query sets avoids recomputing common score patterns.
#[derive(Debug, Clone)]
pub struct RnmTable {
    eps: f64,
    tol: f64,
    probs: BTreeMap<Vec<u64>, Vec<f64>>,
}

impl RnmTable {
    pub fn new(eps: f64, tol: f64) -> Result<Self> {
        check_eps(eps)?;
        if !(tol > 0.0) {
            return Err(DpError::Parameter(format!("tolerance must be positive, got {tol}")));
        }
        Ok(Self {
            eps,
            tol,
            probs: BTreeMap::new(),
        })
    }

    pub fn epsilon(&self) -> f64 {
        self.eps
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    /// Number of distinct canonical score vectors computed so far.
    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    fn canonical(c: &[u64]) -> Vec<u64> {
        let min = c.iter().copied().min().unwrap_or(0);
        let mut v: Vec<u64> = c.iter().map(|x| x - min).collect();
        v.sort_unstable();
        v
    }

    /// Computes the laws of all given score vectors not yet cached.
    pub fn ensure<'a>(&mut self, vectors: impl IntoIterator<Item = &'a Vec<u64>>) -> Result<()> {
        let missing: BTreeSet<Vec<u64>> = vectors
            .into_iter()
            .map(|c| Self::canonical(c))
            .filter(|k| !self.probs.contains_key(k))
            .collect();
        let missing: Vec<Vec<u64>> = missing.into_iter().collect();
        let (eps, tol) = (self.eps, self.tol);
        let probs: Vec<Vec<f64>> = missing
            .par_iter()
            .map(|k| {
                let scores: Vec<f64> = k.iter().map(|&x| x as f64).collect();
                rnm_distribution(&scores, eps, tol)
            })
            .collect::<Result<_>>()?;
        self.probs.extend(missing.into_iter().zip(probs));
        Ok(())
    }

    /// `Pr[RNM(c) = i]`, computing the law on a cache miss.
    pub fn prob(&mut self, c: &[u64], i: usize) -> Result<f64> {
        if i >= c.len() {
            return Err(DpError::Index { index: i, len: c.len() });
        }
        let key = Self::canonical(c);
        if !self.probs.contains_key(&key) {
            self.ensure([&key])?;
        }
        Ok(self.cached(c, i))
    }

    fn cached(&self, c: &[u64], i: usize) -> f64 {
        let key = Self::canonical(c);
        let target = c[i] - c.iter().copied().min().unwrap_or(0);
        let pos = key.iter().position(|&x| x == target).expect("value present");
        self.probs[&key][pos]
    }
}

/// Exhaustively checks `p ≤ e^ε p'` and `p' ≤ e^ε p` for
/// `p = Pr[RNM(q(D)) = i]`, `p' = Pr[RNM(q(D')) = i]`, over every
/// 1-adjacent pair of histograms with entries in `0..=max_entry` and every
/// output `i`. Also confirms, for each pair, that the score vectors satisfy
/// one of the two one-sided Lipschitz relations the argument relies on.
///
/// A cell passes when its ratio is at most `e^ε + 3·tol / min(p, p')`.
pub fn verify_rnm_dp_finer(
    q: &CountingQuerySet,
    eps: f64,
    max_entry: u64,
    tol: f64,
    limit: u128,
) -> Result<RnmVerification> {
    let mut table = RnmTable::new(eps, tol)?;
    verify_rnm_dp_finer_with(&mut table, q, max_entry, limit, true)
}

/// As [`verify_rnm_dp_finer`], drawing probabilities from a shared table.
/// With `keep_cells` false only failing cells are kept in the report.
pub fn verify_rnm_dp_finer_with(
    table: &mut RnmTable,
    q: &CountingQuerySet,
    max_entry: u64,
    limit: u128,
    keep_cells: bool,
) -> Result<RnmVerification> {
    let (eps, tol) = (table.eps, table.tol);
    let pairs: Vec<(Dataset, Dataset)> = neighbor_pairs(q.n(), max_entry, 1, limit)?
        .into_iter()
        .filter(|(a, b)| a < b)
        .collect();
    let m = q.m();
    let bound = eps.exp();
    let mut report = RnmVerification {
        epsilon: eps,
        m,
        n: q.n(),
        max_entry,
        tol,
        finer_bound: bound,
        naive_bound: (m as f64 * eps).exp(),
        max_ratio: 1.0,
        pairs: pairs.len(),
        dichotomy_holds: true,
        unstable_cells: 0,
        pass: true,
        cells: Vec::new(),
    };
    if m == 0 {
        return Ok(report);
    }
    let scored: Vec<(Vec<u64>, Vec<u64>, &Dataset, &Dataset)> = pairs
        .iter()
        .map(|(a, b)| (counting_query(q, a), counting_query(q, b), a, b))
        .collect();
    table.ensure(scored.iter().flat_map(|(c, c2, _, _)| [c, c2]))?;
    for (c, c2, a, b) in &scored {
        if !(dominates_by_at_most_one(c, c2) || dominates_by_at_most_one(c2, c)) {
            report.dichotomy_holds = false;
        }
        for i in 0..m {
            let (p, p2) = (table.cached(c, i), table.cached(c2, i));
            let lo = p.min(p2);
            let ratio = p.max(p2) / lo;
            let slack = 3.0 * tol / lo;
            let pass = ratio <= bound + slack;
            let unstable = lo < UNSTABLE_PROB;
            report.max_ratio = report.max_ratio.max(ratio);
            report.unstable_cells += unstable as usize;
            report.pass &= pass;
            if keep_cells || !pass {
                report.cells.push(RnmCell {
                    d: a.counts().to_vec(),
                    d_prime: b.counts().to_vec(),
                    i,
                    p,
                    p_prime: p2,
                    ratio,
                    bound,
                    pass,
                    unstable,
                });
            }
        }
    }
    report.pass &= report.dichotomy_holds;
    Ok(report)
}
