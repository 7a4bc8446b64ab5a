//! The ε-hockey-stick divergence
//! `Δ^ε(μ, ν) = sup_S μ(S) − e^ε ν(S)`
//! and the checks built on it.
//!
//! For finite distributions the supremum is attained at
//! `S = {y : μ(y) > e^ε ν(y)}`, so [`divergence_discrete`] is a linear-time
//! sum of positive parts; [`divergence_brute_force`] enumerates every subset
//! and serves as its oracle. For two Laplace densities the same positive-part
//! integral is evaluated by quadrature, and for sampler-only distributions
//! [`divergence_monte_carlo`] gives confidence bounds over a restricted event
//! family. A restricted family can only under-estimate the supremum, so the
//! Monte Carlo path is an auditing tool, never a proof.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use statrs::distribution::{Beta, ContinuousCDF};

use crate::error::{DpError, Result};
use crate::laplace::{Laplace, TAIL_SCALES};
use crate::quadrature::integrate_piecewise;
use crate::rng::RandomSource;

/// Allowed deviation of a probability table's total mass from 1.
pub const NORMALIZATION_TOL: f64 = 1e-12;

/// Largest support [`divergence_brute_force`] will enumerate.
pub const BRUTE_FORCE_MAX_SUPPORT: usize = 20;

/// Slack used when a check compares a computed divergence against a bound.
pub const CHECK_SLACK: f64 = 1e-12;

/// A probability mass function over a finite set of labels.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteDistribution<L> {
    // sorted by label, labels distinct
    entries: Vec<(L, f64)>,
}

impl<L> DiscreteDistribution<L> {
    pub fn support(&self) -> impl Iterator<Item = &L> {
        self.entries.iter().map(|e| &e.0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&L, f64)> {
        self.entries.iter().map(|(l, p)| (l, *p))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn total_mass(&self) -> f64 {
        self.entries.iter().map(|e| e.1).sum()
    }
}

impl<L: Ord + Clone> DiscreteDistribution<L> {
    /// Validates non-negativity, distinct labels and total mass 1.
    pub fn new(entries: impl IntoIterator<Item = (L, f64)>) -> Result<Self> {
        let mut entries: Vec<(L, f64)> = entries.into_iter().collect();
        for (_, p) in &entries {
            if !(p.is_finite() && *p >= 0.0) {
                return Err(DpError::Validation(format!("invalid probability {p}")));
            }
        }
        entries.sort_by(|a, b| a.0.cmp(&b.0));
        if entries.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(DpError::Validation("duplicate outcome label".into()));
        }
        let total: f64 = entries.iter().map(|e| e.1).sum();
        if (total - 1.0).abs() > NORMALIZATION_TOL {
            return Err(DpError::Validation(format!(
                "probabilities sum to {total}, not 1"
            )));
        }
        Ok(Self { entries })
    }

    /// Accumulates masses (duplicate labels are merged) and rescales to
    /// total mass 1.
    pub fn from_weights(weights: impl IntoIterator<Item = (L, f64)>) -> Result<Self> {
        let mut acc: BTreeMap<L, f64> = BTreeMap::new();
        for (l, w) in weights {
            if !(w.is_finite() && w >= 0.0) {
                return Err(DpError::Validation(format!("invalid weight {w}")));
            }
            *acc.entry(l).or_insert(0.0) += w;
        }
        let total: f64 = acc.values().sum();
        if !(total > 0.0) {
            return Err(DpError::Validation("total weight is zero".into()));
        }
        Ok(Self {
            entries: acc.into_iter().map(|(l, w)| (l, w / total)).collect(),
        })
    }

    /// Merges duplicate labels without renormalising. Used for exact
    /// pushforwards whose total mass is 1 up to rounding.
    pub(crate) fn from_masses(masses: impl IntoIterator<Item = (L, f64)>) -> Self {
        let mut acc: BTreeMap<L, f64> = BTreeMap::new();
        for (l, w) in masses {
            *acc.entry(l).or_insert(0.0) += w;
        }
        Self {
            entries: acc.into_iter().collect(),
        }
    }

    pub fn point(label: L) -> Self {
        Self {
            entries: vec![(label, 1.0)],
        }
    }

    pub fn uniform(labels: impl IntoIterator<Item = L>) -> Result<Self> {
        Self::from_weights(labels.into_iter().map(|l| (l, 1.0)))
    }

    pub fn prob(&self, label: &L) -> f64 {
        self.entries
            .binary_search_by(|e| e.0.cmp(label))
            .map(|i| self.entries[i].1)
            .unwrap_or(0.0)
    }

    pub fn prob_of<'a>(&self, event: impl IntoIterator<Item = &'a L>) -> f64
    where
        L: 'a,
    {
        event.into_iter().map(|l| self.prob(l)).sum()
    }

    pub fn map<M: Ord + Clone>(&self, f: impl Fn(&L) -> M) -> DiscreteDistribution<M> {
        DiscreteDistribution::from_masses(self.entries.iter().map(|(l, p)| (f(l), *p)))
    }

    /// `(μ ≫= k)(y) = Σ_x μ(x) k(x)(y)`.
    pub fn bind<M: Ord + Clone>(
        &self,
        kernel: &DiscreteKernel<L, M>,
    ) -> Result<DiscreteDistribution<M>> {
        let mut out = Vec::new();
        for (x, px) in &self.entries {
            let row = kernel.row(x)?;
            out.extend(row.iter().map(|(y, py)| (y.clone(), px * py)));
        }
        Ok(DiscreteDistribution::from_masses(out))
    }

    /// Independent product `μ ⊗ ν`.
    pub fn product<M: Ord + Clone>(
        &self,
        other: &DiscreteDistribution<M>,
    ) -> DiscreteDistribution<(L, M)> {
        let mut out = Vec::with_capacity(self.len() * other.len());
        for (a, pa) in &self.entries {
            for (b, pb) in &other.entries {
                out.push(((a.clone(), b.clone()), pa * pb));
            }
        }
        DiscreteDistribution { entries: out }
    }

    /// Inverse-CDF draw over the labels in sorted order.
    pub fn sample(&self, rng: &mut RandomSource) -> L {
        let u = rng.uniform_open() * self.total_mass();
        let mut acc = 0.0;
        for (l, p) in &self.entries {
            acc += p;
            if u < acc {
                return l.clone();
            }
        }
        self.entries
            .iter()
            .rev()
            .find(|e| e.1 > 0.0)
            .map(|e| e.0.clone())
            .expect("distribution has positive mass")
    }
}

fn label_union<'a, L: Ord + Clone>(
    mu: &'a DiscreteDistribution<L>,
    nu: &'a DiscreteDistribution<L>,
) -> Vec<&'a L> {
    let set: BTreeSet<&L> = mu.support().chain(nu.support()).collect();
    set.into_iter().collect()
}

/// A Markov kernel between finite label sets: one distribution per input.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteKernel<X, Y> {
    rows: BTreeMap<X, DiscreteDistribution<Y>>,
}

impl<X: Ord + Clone, Y: Ord + Clone> DiscreteKernel<X, Y> {
    pub fn new(rows: impl IntoIterator<Item = (X, DiscreteDistribution<Y>)>) -> Self {
        Self {
            rows: rows.into_iter().collect(),
        }
    }

    /// Kernel of a deterministic map, tabulated on `domain`.
    pub fn deterministic(domain: impl IntoIterator<Item = X>, f: impl Fn(&X) -> Y) -> Self {
        Self::new(domain.into_iter().map(|x| {
            let y = f(&x);
            (x, DiscreteDistribution::point(y))
        }))
    }

    pub fn row(&self, x: &X) -> Result<&DiscreteDistribution<Y>> {
        self.rows
            .get(x)
            .ok_or_else(|| DpError::Domain("kernel undefined on input".into()))
    }

    pub fn rows(&self) -> impl Iterator<Item = (&X, &DiscreteDistribution<Y>)> {
        self.rows.iter()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DivergenceMethod {
    #[serde(rename = "exact-discrete")]
    ExactDiscrete,
    #[serde(rename = "quadrature")]
    Quadrature,
    #[serde(rename = "monte-carlo")]
    MonteCarlo,
}

impl fmt::Display for DivergenceMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::ExactDiscrete => "exact-discrete",
            Self::Quadrature => "quadrature",
            Self::MonteCarlo => "monte-carlo",
        })
    }
}

/// A value of `Δ^ε` with how it was obtained.
///
/// `error_bound` is 0 for exact results, the quadrature error estimate for
/// quadrature, and for Monte Carlo the width of the confidence band: `value`
/// is then the lower confidence bound and `value + error_bound` the upper.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DivergenceResult {
    pub epsilon: f64,
    pub value: f64,
    pub method: DivergenceMethod,
    pub error_bound: f64,
}

/// `Σ_y max(0, μ(y) − e^ε ν(y))` over the union of the supports.
pub fn divergence_discrete<L: Ord + Clone>(
    mu: &DiscreteDistribution<L>,
    nu: &DiscreteDistribution<L>,
    eps: f64,
) -> DivergenceResult {
    let scale = eps.exp();
    let value = label_union(mu, nu)
        .into_iter()
        .map(|y| (mu.prob(y) - scale * nu.prob(y)).max(0.0))
        .sum();
    DivergenceResult {
        epsilon: eps,
        value,
        method: DivergenceMethod::ExactDiscrete,
        error_bound: 0.0,
    }
}

/// The event attaining the supremum: `{y : μ(y) > e^ε ν(y)}`.
pub fn worst_event<L: Ord + Clone>(
    mu: &DiscreteDistribution<L>,
    nu: &DiscreteDistribution<L>,
    eps: f64,
) -> Vec<L> {
    let scale = eps.exp();
    label_union(mu, nu)
        .into_iter()
        .filter(|y| mu.prob(y) > scale * nu.prob(y))
        .cloned()
        .collect()
}

/// `(μ(S), ν(S))` for every subset `S` of the union support, indexed by bitmask.
fn subset_masses<L: Ord + Clone>(
    mu: &DiscreteDistribution<L>,
    nu: &DiscreteDistribution<L>,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let labels = label_union(mu, nu);
    if labels.len() > BRUTE_FORCE_MAX_SUPPORT {
        return Err(DpError::Capacity {
            required: labels.len() as u128,
            limit: BRUTE_FORCE_MAX_SUPPORT as u128,
        });
    }
    let pm: Vec<f64> = labels.iter().map(|y| mu.prob(y)).collect();
    let pn: Vec<f64> = labels.iter().map(|y| nu.prob(y)).collect();
    let size = 1usize << labels.len();
    let mut sm = vec![0.0; size];
    let mut sn = vec![0.0; size];
    for mask in 1..size {
        let low = mask.trailing_zeros() as usize;
        let rest = mask & (mask - 1);
        sm[mask] = sm[rest] + pm[low];
        sn[mask] = sn[rest] + pn[low];
    }
    Ok((sm, sn))
}

/// `max_S μ(S) − e^ε ν(S)` by explicit enumeration of all subsets of the
/// union support (at most [`BRUTE_FORCE_MAX_SUPPORT`] labels).
pub fn divergence_brute_force<L: Ord + Clone>(
    mu: &DiscreteDistribution<L>,
    nu: &DiscreteDistribution<L>,
    eps: f64,
) -> Result<DivergenceResult> {
    let (sm, sn) = subset_masses(mu, nu)?;
    let scale = eps.exp();
    // mask 0 is the empty set, contributing 0
    let value = sm
        .iter()
        .zip(&sn)
        .map(|(a, b)| a - scale * b)
        .fold(0.0, f64::max);
    Ok(DivergenceResult {
        epsilon: eps,
        value,
        method: DivergenceMethod::ExactDiscrete,
        error_bound: 0.0,
    })
}

/// Whether `μ(S) ≤ e^ε ν(S) + δ` holds for every subset `S`, by enumeration.
pub fn event_inequality_holds<L: Ord + Clone>(
    mu: &DiscreteDistribution<L>,
    nu: &DiscreteDistribution<L>,
    eps: f64,
    delta: f64,
) -> Result<bool> {
    let (sm, sn) = subset_masses(mu, nu)?;
    let scale = eps.exp();
    Ok(sm.iter().zip(&sn).all(|(a, b)| *a <= scale * b + delta))
}

/// Smallest ε with `Δ^ε(μ, ν) = 0`: `max_y ln(μ(y)/ν(y))`, `+∞` if `μ` has
/// mass where `ν` has none.
pub fn minimal_epsilon<L: Ord + Clone>(
    mu: &DiscreteDistribution<L>,
    nu: &DiscreteDistribution<L>,
) -> f64 {
    label_union(mu, nu)
        .into_iter()
        .filter(|y| mu.prob(y) > 0.0)
        .map(|y| {
            let q = nu.prob(y);
            if q > 0.0 {
                (mu.prob(y) / q).ln()
            } else {
                f64::INFINITY
            }
        })
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Points where `f_{Lap(b,x)}(t) = e^ε f_{Lap(b,y)}(t)` changes sign,
/// i.e. solutions of `|t−y| − |t−x| = εb` on the sloped segment.
fn laplace_crossings(scale: f64, x: f64, y: f64, eps: f64) -> Vec<f64> {
    let s = eps * scale;
    let (lo, hi) = (x.min(y), x.max(y));
    let t = if x < y {
        (x + y - s) / 2.0
    } else {
        (x + y + s) / 2.0
    };
    if t > lo && t < hi {
        vec![t]
    } else {
        Vec::new()
    }
}

/// `Δ^ε(Lap(b, x), Lap(b, y))` by adaptive quadrature of the positive part
/// `max(0, f_x − e^ε f_y)`, split at `x`, `y` and the closed-form crossing
/// point and truncated 40 scales beyond each location.
pub fn divergence_laplace_pair(
    scale: f64,
    x: f64,
    y: f64,
    eps: f64,
    tol: f64,
) -> Result<DivergenceResult> {
    if !(scale > 0.0) {
        return Err(DpError::Parameter(format!("scale must be positive, got {scale}")));
    }
    if !(tol > 0.0) {
        return Err(DpError::Parameter(format!("tolerance must be positive, got {tol}")));
    }
    let (fx, fy) = (Laplace::new(scale, x), Laplace::new(scale, y));
    let k = eps.exp();
    let integrand = |t: f64| (fx.pdf_unchecked(t) - k * fy.pdf_unchecked(t)).max(0.0);
    let lo = x.min(y) - TAIL_SCALES * scale;
    let hi = x.max(y) + TAIL_SCALES * scale;
    let mut cuts = vec![x, y];
    cuts.extend(laplace_crossings(scale, x, y, eps));
    // mass of the integrand beyond the window is below the Lap(b,x) tails
    let q = integrate_piecewise(&integrand, lo, hi, &cuts, tol * 0.5);
    Ok(DivergenceResult {
        epsilon: eps,
        value: q.value,
        method: DivergenceMethod::Quadrature,
        error_bound: q.error + 2.0 * (-TAIL_SCALES).exp(),
    })
}

/// Clopper–Pearson two-sided interval for a binomial proportion at level
/// `1 − alpha`.
pub fn clopper_pearson(successes: u64, trials: u64, alpha: f64) -> (f64, f64) {
    let (k, n) = (successes as f64, trials as f64);
    let lower = if successes == 0 {
        0.0
    } else {
        Beta::new(k, n - k + 1.0)
            .expect("valid beta parameters")
            .inverse_cdf(alpha / 2.0)
    };
    let upper = if successes >= trials {
        1.0
    } else {
        Beta::new(k + 1.0, n - k)
            .expect("valid beta parameters")
            .inverse_cdf(1.0 - alpha / 2.0)
    };
    (lower, upper)
}

/// Confidence bounds on `max_S μ(S) − e^ε ν(S)` over a finite event family.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonteCarloEstimate {
    pub epsilon: f64,
    /// Lower confidence bound on the restricted supremum, clamped at 0.
    pub lower: f64,
    /// Plug-in estimate, clamped at 0.
    pub point: f64,
    /// Upper confidence bound on the restricted supremum, clamped at 0.
    pub upper: f64,
    /// Event achieving `lower`, if any event has a positive lower bound.
    pub best_event: Option<usize>,
    pub samples: usize,
}

impl MonteCarloEstimate {
    pub fn to_result(&self) -> DivergenceResult {
        DivergenceResult {
            epsilon: self.epsilon,
            value: self.lower,
            method: DivergenceMethod::MonteCarlo,
            error_bound: self.upper - self.lower,
        }
    }
}

fn validate_mc(samples: usize, alpha: f64, events: usize) -> Result<()> {
    if samples < 1000 {
        return Err(DpError::Parameter(format!(
            "at least 1000 samples required, got {samples}"
        )));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(DpError::Parameter(format!("alpha {alpha} not in (0, 1)")));
    }
    if events == 0 {
        return Err(DpError::Domain("empty event family".into()));
    }
    Ok(())
}

/// Combines per-event hit counts into the family-wide bounds. Each of the
/// `2·|family|` proportion intervals is taken at level `alpha / (2|family|)`,
/// so all hold simultaneously with probability at least `1 − alpha`.
pub fn estimate_from_counts(
    hits_mu: &[u64],
    hits_nu: &[u64],
    samples: usize,
    eps: f64,
    alpha: f64,
) -> MonteCarloEstimate {
    let level = alpha / (2.0 * hits_mu.len() as f64);
    let scale = eps.exp();
    let n = samples as u64;
    let mut est = MonteCarloEstimate {
        epsilon: eps,
        lower: 0.0,
        point: 0.0,
        upper: 0.0,
        best_event: None,
        samples,
    };
    for (s, (&a, &b)) in hits_mu.iter().zip(hits_nu).enumerate() {
        let (ml, mu_) = clopper_pearson(a, n, level);
        let (nl, nu_) = clopper_pearson(b, n, level);
        let lower = ml - scale * nu_;
        let upper = mu_ - scale * nl;
        let point = a as f64 / samples as f64 - scale * b as f64 / samples as f64;
        if lower > est.lower {
            est.lower = lower;
            est.best_event = Some(s);
        }
        est.upper = est.upper.max(upper);
        est.point = est.point.max(point);
    }
    est
}

/// Monte Carlo bounds on `Δ^ε` restricted to `events`, drawing `samples`
/// outcomes from each sampler.
pub fn divergence_monte_carlo_estimate<T, A, B, E>(
    mut sample_mu: A,
    mut sample_nu: B,
    events: &[E],
    eps: f64,
    samples: usize,
    alpha: f64,
    rng: &mut RandomSource,
) -> Result<MonteCarloEstimate>
where
    A: FnMut(&mut RandomSource) -> T,
    B: FnMut(&mut RandomSource) -> T,
    E: Fn(&T) -> bool,
{
    validate_mc(samples, alpha, events.len())?;
    let mut hits_mu = vec![0u64; events.len()];
    let mut hits_nu = vec![0u64; events.len()];
    for _ in 0..samples {
        let a = sample_mu(rng);
        let b = sample_nu(rng);
        for (k, ev) in events.iter().enumerate() {
            hits_mu[k] += ev(&a) as u64;
            hits_nu[k] += ev(&b) as u64;
        }
    }
    Ok(estimate_from_counts(&hits_mu, &hits_nu, samples, eps, alpha))
}

/// As [`divergence_monte_carlo_estimate`], reported as a [`DivergenceResult`].
pub fn divergence_monte_carlo<T, A, B, E>(
    sample_mu: A,
    sample_nu: B,
    events: &[E],
    eps: f64,
    samples: usize,
    alpha: f64,
    rng: &mut RandomSource,
) -> Result<DivergenceResult>
where
    A: FnMut(&mut RandomSource) -> T,
    B: FnMut(&mut RandomSource) -> T,
    E: Fn(&T) -> bool,
{
    divergence_monte_carlo_estimate(sample_mu, sample_nu, events, eps, samples, alpha, rng)
        .map(|e| e.to_result())
}

/// A half-open interval `(lo, hi]` of the real line.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn contains(&self, x: f64) -> bool {
        x > self.lo && x <= self.hi
    }
}

/// Grid of `cells − 1` interior cut points at the empirical quantiles of
/// `pilot`, bracketed by ±∞.
pub fn quantile_grid(pilot: &[f64], cells: usize) -> Vec<f64> {
    let mut sorted: Vec<f64> = pilot.iter().copied().filter(|x| !x.is_nan()).collect();
    sorted.sort_by(f64::total_cmp);
    let mut grid = vec![f64::NEG_INFINITY];
    if !sorted.is_empty() {
        for k in 1..cells {
            let idx = (k * sorted.len()) / cells;
            grid.push(sorted[idx.min(sorted.len() - 1)]);
        }
    }
    grid.push(f64::INFINITY);
    grid.dedup();
    grid
}

/// All intervals with both endpoints on `grid`.
pub fn grid_intervals(grid: &[f64]) -> Vec<Interval> {
    let mut out = Vec::new();
    for i in 0..grid.len() {
        for j in i + 1..grid.len() {
            out.push(Interval {
                lo: grid[i],
                hi: grid[j],
            });
        }
    }
    out
}

/// Monte Carlo bounds for real-valued samplers over every interval with
/// endpoints on a quantile grid. The grid is built from a separate pilot
/// batch of `pilot` draws from each sampler so that the evaluation samples
/// stay independent of the event family.
#[allow(clippy::too_many_arguments)]
pub fn divergence_monte_carlo_real<A, B>(
    mut sample_mu: A,
    mut sample_nu: B,
    eps: f64,
    samples: usize,
    alpha: f64,
    cells: usize,
    pilot: usize,
    rng: &mut RandomSource,
) -> Result<(MonteCarloEstimate, Vec<Interval>)>
where
    A: FnMut(&mut RandomSource) -> f64,
    B: FnMut(&mut RandomSource) -> f64,
{
    let mut pilot_draws = Vec::with_capacity(2 * pilot);
    for _ in 0..pilot {
        pilot_draws.push(sample_mu(rng));
        pilot_draws.push(sample_nu(rng));
    }
    let grid = quantile_grid(&pilot_draws, cells.max(2));
    let intervals = grid_intervals(&grid);
    validate_mc(samples, alpha, intervals.len())?;
    // bin once, then interval counts are differences of cumulative bins
    let bins = grid.len() - 1;
    let mut cnt_mu = vec![0u64; bins];
    let mut cnt_nu = vec![0u64; bins];
    let bin_of = |x: f64| -> usize {
        // cell c is (grid[c], grid[c+1]]
        let idx = grid.partition_point(|g| *g < x);
        idx.saturating_sub(1).min(bins - 1)
    };
    for _ in 0..samples {
        cnt_mu[bin_of(sample_mu(rng))] += 1;
        cnt_nu[bin_of(sample_nu(rng))] += 1;
    }
    let cum = |c: &[u64]| -> Vec<u64> {
        let mut out = vec![0u64; c.len() + 1];
        for (i, v) in c.iter().enumerate() {
            out[i + 1] = out[i] + v;
        }
        out
    };
    let (cm, cn) = (cum(&cnt_mu), cum(&cnt_nu));
    let mut hits_mu = Vec::with_capacity(intervals.len());
    let mut hits_nu = Vec::with_capacity(intervals.len());
    for i in 0..grid.len() {
        for j in i + 1..grid.len() {
            hits_mu.push(cm[j] - cm[i]);
            hits_nu.push(cn[j] - cn[i]);
        }
    }
    Ok((
        estimate_from_counts(&hits_mu, &hits_nu, samples, eps, alpha),
        intervals,
    ))
}

/// Outcome of a structural check whose premises may not hold.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum PropertyCheck {
    Holds { value: f64, bound: f64 },
    Violated { value: f64, bound: f64 },
    PreconditionNotMet { detail: String },
}

impl PropertyCheck {
    pub fn holds(&self) -> bool {
        matches!(self, Self::Holds { .. })
    }

    pub fn is_violation(&self) -> bool {
        matches!(self, Self::Violated { .. })
    }

    fn judge(value: f64, bound: f64, slack: f64) -> Self {
        if value <= bound + slack {
            Self::Holds { value, bound }
        } else {
            Self::Violated { value, bound }
        }
    }
}

/// Given `Δ^{ε₁}(μ, ν) ≤ δ₁` and `Δ^{ε₂}(f(x), g(x)) ≤ δ₂` for every `x`,
/// checks `Δ^{ε₁+ε₂}(μ ≫= f, ν ≫= g) ≤ δ₁ + δ₂`.
#[allow(clippy::too_many_arguments)]
pub fn check_composability_brute_force<X, Y>(
    mu: &DiscreteDistribution<X>,
    nu: &DiscreteDistribution<X>,
    f: &DiscreteKernel<X, Y>,
    g: &DiscreteKernel<X, Y>,
    eps1: f64,
    eps2: f64,
    delta1: f64,
    delta2: f64,
) -> Result<PropertyCheck>
where
    X: Ord + Clone,
    Y: Ord + Clone,
{
    let outer = divergence_discrete(mu, nu, eps1).value;
    if outer > delta1 + CHECK_SLACK {
        return Ok(PropertyCheck::PreconditionNotMet {
            detail: format!("outer divergence {outer} exceeds δ₁ = {delta1}"),
        });
    }
    for x in label_union(mu, nu) {
        let (fx, gx) = (f.row(x)?, g.row(x)?);
        let inner = divergence_discrete(fx, gx, eps2).value;
        if inner > delta2 + CHECK_SLACK {
            return Ok(PropertyCheck::PreconditionNotMet {
                detail: format!("kernel divergence {inner} exceeds δ₂ = {delta2}"),
            });
        }
    }
    let composed = divergence_discrete(&mu.bind(f)?, &nu.bind(g)?, eps1 + eps2).value;
    Ok(PropertyCheck::judge(composed, delta1 + delta2, 1e-10))
}

/// Given `Δ^{ε₁}(μ₁, μ₂) ≤ 0` and `Δ^{ε₂}(μ₂, μ₃) ≤ 0`, checks
/// `Δ^{ε₁+ε₂}(μ₁, μ₃) ≤ 0`.
pub fn check_transitivity<L: Ord + Clone>(
    mu1: &DiscreteDistribution<L>,
    mu2: &DiscreteDistribution<L>,
    mu3: &DiscreteDistribution<L>,
    eps1: f64,
    eps2: f64,
) -> PropertyCheck {
    let d12 = divergence_discrete(mu1, mu2, eps1).value;
    let d23 = divergence_discrete(mu2, mu3, eps2).value;
    if d12 > CHECK_SLACK || d23 > CHECK_SLACK {
        return PropertyCheck::PreconditionNotMet {
            detail: format!("premise divergences {d12}, {d23} are not 0"),
        };
    }
    let d13 = divergence_discrete(mu1, mu3, eps1 + eps2).value;
    PropertyCheck::judge(d13, 0.0, CHECK_SLACK)
}
