//! Checking `(ε, δ)`-DP of a mechanism over a set of adjacent input pairs.
//!
//! DP requires `Pr[M(D) ∈ S] ≤ e^ε Pr[M(D') ∈ S] + δ` for every pair and
//! every event, which is `Δ^ε(M(D), M(D')) ≤ δ`. The adjacency relation is
//! not assumed symmetric, so every pair is checked in both directions.

use rayon::prelude::*;
use serde::Serialize;

use crate::dataset::{adjacency_chain, neighbor_pairs, verify_chain, Dataset};
use crate::divergence::{
    divergence_discrete, divergence_laplace_pair, estimate_from_counts, worst_event,
    MonteCarloEstimate,
};
use crate::error::{DpError, Result};
use crate::rng::RandomSource;

use super::budget::PrivacyBudget;
use super::events::EventSpace;
use super::library::LaplaceMechanism;
use super::Mechanism;

/// Slack on exact divergence comparisons, absorbing rounding in
/// probability tables.
pub const DP_SLACK: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Direction {
    /// `Δ^ε(M(D), M(D'))` for the pair `(D, D')`.
    Forward,
    /// `Δ^ε(M(D'), M(D))`.
    Backward,
}

/// An event on which the DP inequality fails:
/// `Pr[M(from) ∈ event] − e^ε Pr[M(to) ∈ event] = gap > δ`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Witness<I, E> {
    pub pair_index: usize,
    pub direction: Direction,
    pub from: I,
    pub to: I,
    pub event: E,
    pub from_mass: f64,
    pub to_mass: f64,
    pub gap: f64,
}

/// Outcome of an exact or density-based DP check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DpCheck<W> {
    pub pass: bool,
    pub epsilon: f64,
    pub delta: f64,
    pub pairs_checked: usize,
    /// Largest divergence seen over all pairs and directions (for the
    /// multivariate Laplace check: 0 when certified, else the witness gap).
    pub max_divergence: f64,
    /// First violation found.
    pub witness: Option<W>,
}

fn oriented<I>(pair: &(I, I), dir: Direction) -> (&I, &I) {
    match dir {
        Direction::Forward => (&pair.0, &pair.1),
        Direction::Backward => (&pair.1, &pair.0),
    }
}

/// Exact check through the mechanism's output tables.
pub fn check_dp_exact<M>(
    mech: &M,
    pairs: &[(M::Input, M::Input)],
    budget: &PrivacyBudget,
) -> Result<DpCheck<Witness<M::Input, Vec<M::Output>>>>
where
    M: Mechanism,
    M::Input: Clone,
    M::Output: Ord + Clone,
{
    check_dp_exact_with_slack(mech, pairs, budget, DP_SLACK)
}

pub fn check_dp_exact_with_slack<M>(
    mech: &M,
    pairs: &[(M::Input, M::Input)],
    budget: &PrivacyBudget,
    slack: f64,
) -> Result<DpCheck<Witness<M::Input, Vec<M::Output>>>>
where
    M: Mechanism,
    M::Input: Clone,
    M::Output: Ord + Clone,
{
    let mut report = DpCheck {
        pass: true,
        epsilon: budget.epsilon,
        delta: budget.delta,
        pairs_checked: pairs.len(),
        max_divergence: 0.0,
        witness: None,
    };
    let law = |x: &M::Input| {
        mech.pmf(x)?.ok_or_else(|| {
            DpError::Unsupported("mechanism has no exact output law; use the statistical check".into())
        })
    };
    for (idx, pair) in pairs.iter().enumerate() {
        let laws = (law(&pair.0)?, law(&pair.1)?);
        for dir in [Direction::Forward, Direction::Backward] {
            let (mu, nu) = oriented(&laws, dir);
            let d = divergence_discrete(mu, nu, budget.epsilon).value;
            report.max_divergence = report.max_divergence.max(d);
            if d > budget.delta + slack {
                report.pass = false;
                if report.witness.is_none() {
                    let event = worst_event(mu, nu, budget.epsilon);
                    let (from, to) = oriented(pair, dir);
                    report.witness = Some(Witness {
                        pair_index: idx,
                        direction: dir,
                        from: from.clone(),
                        to: to.clone(),
                        from_mass: mu.prob_of(&event),
                        to_mass: nu.prob_of(&event),
                        gap: d,
                        event,
                    });
                }
            }
        }
    }
    Ok(report)
}

/// One coordinate constraint of an orthant event: `lower ≤ t_j` or
/// `t_j ≤ upper`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HalfLine {
    pub coordinate: usize,
    pub lower: Option<f64>,
    pub upper: Option<f64>,
}

/// Output law of a Laplace mechanism event; a product of half-lines.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrthantEvent {
    pub constraints: Vec<HalfLine>,
}

/// DP check for the Laplace mechanism through its density.
///
/// For `D, D'` with centres `x = f(D)`, `y = f(D')`, the density ratio is
/// bounded by `exp(|x − y|₁ / b)` and the bound is attained on the orthant
/// beyond both centres in the direction of `x − y`. So the privacy loss
/// `L = |x − y|₁ / b ≤ ε` certifies `Δ^ε = 0`, and `L > ε` is refuted by
/// that orthant with gap `2^{−r}(1 − e^{ε−L})`, `r` the number of differing
/// coordinates. Each certified pair is corroborated by one-dimensional
/// quadrature per coordinate at the split budget `|x_j − y_j| / b`, which must
/// come out below `tol`.
///
/// One-dimensional outputs are checked directly by quadrature, which also
/// covers `δ > 0`. For `m > 1` with `δ > 0`, a pair whose orthant gap does
/// not exceed `δ` cannot be decided here and yields `Unsupported`.
pub fn check_dp_laplace(
    mech: &LaplaceMechanism,
    pairs: &[(Dataset, Dataset)],
    budget: &PrivacyBudget,
    tol: f64,
) -> Result<DpCheck<Witness<Dataset, OrthantEvent>>> {
    let b = mech.scale();
    let eps = budget.epsilon;
    let mut report = DpCheck {
        pass: true,
        epsilon: eps,
        delta: budget.delta,
        pairs_checked: pairs.len(),
        max_divergence: 0.0,
        witness: None,
    };
    for (idx, pair) in pairs.iter().enumerate() {
        let centres = (mech.locations(&pair.0)?, mech.locations(&pair.1)?);
        for dir in [Direction::Forward, Direction::Backward] {
            let (x, y) = oriented(&centres, dir);
            let (from, to) = oriented(pair, dir);
            let loss: f64 = x.iter().zip(y).map(|(a, c)| (a - c).abs()).sum::<f64>() / b;
            let orthant = orthant_witness(x, y, b, eps);
            let failure = if mech.m() == 1 {
                let d = divergence_laplace_pair(b, x[0], y[0], eps, tol)?.value;
                report.max_divergence = report.max_divergence.max(d);
                d > budget.delta + tol
            } else if loss <= eps * (1.0 + 1e-12) {
                for j in 0..x.len() {
                    let split = (x[j] - y[j]).abs() / b;
                    let d = divergence_laplace_pair(b, x[j], y[j], split, tol)?.value;
                    if d > tol {
                        return Err(DpError::Validation(format!(
                            "coordinate divergence {d} exceeds tolerance {tol} at a certified pair"
                        )));
                    }
                }
                false
            } else {
                let gap = orthant.2;
                report.max_divergence = report.max_divergence.max(gap);
                if gap <= budget.delta {
                    return Err(DpError::Unsupported(
                        "multivariate Laplace check with δ > 0 is inconclusive; use the statistical check"
                            .into(),
                    ));
                }
                true
            };
            if failure {
                report.pass = false;
                if report.witness.is_none() {
                    let (event, from_mass, gap) = orthant.clone();
                    report.witness = Some(Witness {
                        pair_index: idx,
                        direction: dir,
                        from: from.clone(),
                        to: to.clone(),
                        event,
                        from_mass,
                        to_mass: (from_mass - gap) / eps.exp(),
                        gap,
                    });
                }
            }
        }
    }
    Ok(report)
}

/// The orthant where the density ratio of `Lap(b, x)` to `Lap(b, y)` is
/// maximal, with its mass under `x` and its gap at `ε`.
fn orthant_witness(x: &[f64], y: &[f64], b: f64, eps: f64) -> (OrthantEvent, f64, f64) {
    let mut constraints = Vec::new();
    let mut mass_x = 1.0;
    let mut mass_y = 1.0;
    for (j, (&a, &c)) in x.iter().zip(y).enumerate() {
        if a == c {
            continue;
        }
        let (lower, upper) = if a > c { (Some(a), None) } else { (None, Some(a)) };
        constraints.push(HalfLine {
            coordinate: j,
            lower,
            upper,
        });
        mass_x *= 0.5;
        mass_y *= 0.5 * (-(a - c).abs() / b).exp();
    }
    let gap = mass_x - eps.exp() * mass_y;
    (OrthantEvent { constraints }, mass_x, gap)
}

/// Statistical audit settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StatisticalConfig {
    /// Draws per side per pair, at least 1000.
    pub samples: usize,
    /// Overall miscoverage, split evenly over pairs, directions and events.
    pub alpha: f64,
    /// A run that finds no significant violation is reported inconclusive
    /// when its upper confidence bound exceeds `δ + resolution`.
    pub resolution: f64,
    /// Draws per side used to choose the event family.
    pub pilot: usize,
}

impl Default for StatisticalConfig {
    fn default() -> Self {
        Self {
            samples: 100_000,
            alpha: 0.001,
            resolution: 0.1,
            pilot: 2_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    NoViolationFound,
    Violation,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StatisticalWitness<I> {
    pub pair_index: usize,
    pub direction: Direction,
    pub from: I,
    pub to: I,
    pub event: String,
    pub lower: f64,
    pub upper: f64,
}

/// Result of [`check_dp_statistical`]. `max_lower` is a lower confidence
/// bound on the largest divergence over the inspected events; a positive
/// excess over δ is a violation at confidence `1 − alpha`. Passing only
/// means that no violation was found among those events.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StatisticalAudit<I> {
    pub verdict: Verdict,
    pub epsilon: f64,
    pub delta: f64,
    pub pairs_checked: usize,
    pub max_lower: f64,
    pub max_point: f64,
    pub max_upper: f64,
    pub witness: Option<StatisticalWitness<I>>,
}

/// Monte Carlo audit: for each pair, draws from both sides, builds the
/// output type's event family from a pilot batch, and bounds the divergence
/// in both directions with Clopper–Pearson intervals. Pair `k` uses the
/// sub-stream `rng.fork(k)`, so results depend only on the seed.
pub fn check_dp_statistical<M>(
    mech: &M,
    pairs: &[(M::Input, M::Input)],
    budget: &PrivacyBudget,
    config: &StatisticalConfig,
    rng: &RandomSource,
) -> Result<StatisticalAudit<M::Input>>
where
    M: Mechanism + Sync,
    M::Input: Clone + Sync,
    M::Output: EventSpace,
{
    if config.samples < 1000 {
        return Err(DpError::Parameter(format!(
            "at least 1000 samples required, got {}",
            config.samples
        )));
    }
    if !(config.alpha > 0.0 && config.alpha < 1.0) {
        return Err(DpError::Parameter(format!("alpha {} not in (0, 1)", config.alpha)));
    }
    let per_pair_alpha = config.alpha / (2.0 * pairs.len().max(1) as f64);
    let estimates: Vec<(MonteCarloEstimate, MonteCarloEstimate, Vec<String>)> = pairs
        .par_iter()
        .enumerate()
        .map(|(idx, pair)| {
            let mut r = rng.fork(idx as u64);
            let mut pilot = Vec::with_capacity(2 * config.pilot);
            for _ in 0..config.pilot {
                pilot.push(mech.sample(&pair.0, &mut r)?);
                pilot.push(mech.sample(&pair.1, &mut r)?);
            }
            let events = M::Output::event_family(&pilot);
            if events.is_empty() {
                return Err(DpError::Domain("empty event family".into()));
            }
            let mut hits_a = vec![0u64; events.len()];
            let mut hits_b = vec![0u64; events.len()];
            for _ in 0..config.samples {
                let a = mech.sample(&pair.0, &mut r)?;
                let b = mech.sample(&pair.1, &mut r)?;
                for (k, e) in events.iter().enumerate() {
                    hits_a[k] += e.contains(&a) as u64;
                    hits_b[k] += e.contains(&b) as u64;
                }
            }
            let fwd = estimate_from_counts(&hits_a, &hits_b, config.samples, budget.epsilon, per_pair_alpha);
            let bwd = estimate_from_counts(&hits_b, &hits_a, config.samples, budget.epsilon, per_pair_alpha);
            Ok((fwd, bwd, events.into_iter().map(|e| e.label).collect()))
        })
        .collect::<Result<_>>()?;

    let mut audit = StatisticalAudit {
        verdict: Verdict::NoViolationFound,
        epsilon: budget.epsilon,
        delta: budget.delta,
        pairs_checked: pairs.len(),
        max_lower: 0.0,
        max_point: 0.0,
        max_upper: 0.0,
        witness: None,
    };
    for (idx, (fwd, bwd, labels)) in estimates.iter().enumerate() {
        for (dir, est) in [(Direction::Forward, fwd), (Direction::Backward, bwd)] {
            audit.max_lower = audit.max_lower.max(est.lower);
            audit.max_point = audit.max_point.max(est.point);
            audit.max_upper = audit.max_upper.max(est.upper);
            if est.lower > budget.delta && audit.witness.is_none() {
                let (from, to) = oriented(&pairs[idx], dir);
                audit.witness = Some(StatisticalWitness {
                    pair_index: idx,
                    direction: dir,
                    from: from.clone(),
                    to: to.clone(),
                    event: est
                        .best_event
                        .map(|k| labels[k].clone())
                        .unwrap_or_default(),
                    lower: est.lower,
                    upper: est.upper,
                });
            }
        }
    }
    audit.verdict = if audit.max_lower > budget.delta {
        Verdict::Violation
    } else if audit.max_upper > budget.delta + config.resolution {
        Verdict::Inconclusive
    } else {
        Verdict::NoViolationFound
    };
    Ok(audit)
}

/// Result of [`check_group_privacy`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroupPrivacyReport<O> {
    /// Whether the mechanism is `(ε, 0)`-DP on 1-adjacent pairs.
    pub base_check: bool,
    pub k: u64,
    pub group_epsilon: f64,
    pub pairs_checked: usize,
    pub chains_verified: usize,
    pub max_divergence: f64,
    pub pass: bool,
    pub witness: Option<Witness<Dataset, Vec<O>>>,
}

/// For an `(ε, 0)`-DP mechanism on 1-adjacency, checks
/// `Δ^{kε}(M(D), M(D')) ≤ 1e−10` in both directions for every enumerated pair
/// at distance at most `k`, and that each pair is joined by a chain of at
/// most `k` unit steps.
pub fn check_group_privacy<M>(
    mech: &M,
    eps: f64,
    k: u64,
    n: usize,
    max_entry: u64,
    limit: u128,
) -> Result<GroupPrivacyReport<M::Output>>
where
    M: Mechanism<Input = Dataset>,
    M::Output: Ord + Clone,
{
    let budget = PrivacyBudget::pure(eps)?;
    let adjacent = neighbor_pairs(n, max_entry, 1, limit)?;
    let base = check_dp_exact(mech, &adjacent, &budget)?;
    let group_epsilon = budget.group(k)?.epsilon;
    let mut report = GroupPrivacyReport {
        base_check: base.pass,
        k,
        group_epsilon,
        pairs_checked: 0,
        chains_verified: 0,
        max_divergence: 0.0,
        pass: false,
        witness: None,
    };
    if !base.pass {
        return Ok(report);
    }
    let pairs = neighbor_pairs(n, max_entry, k, limit)?;
    for (a, b) in &pairs {
        let chain = adjacency_chain(a, b, k)?;
        if verify_chain(&chain, a, b, k) {
            report.chains_verified += 1;
        }
    }
    let group = check_dp_exact(mech, &pairs, &PrivacyBudget::pure(group_epsilon)?)?;
    report.pairs_checked = pairs.len();
    report.max_divergence = group.max_divergence;
    report.pass = group.pass && report.chains_verified == pairs.len();
    report.witness = group.witness;
    Ok(report)
}
