//! Concrete mechanisms.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use crate::dataset::{counting, counting_query, CountingQuerySet, Dataset};
use crate::divergence::DiscreteDistribution;
use crate::error::{DpError, Result};
use crate::laplace::{laplace_vector_sample, Laplace};
use crate::rng::RandomSource;
use crate::rnm::{argmax_list, rnm_distribution, rnm_sample_scores, DEFAULT_PROB_TOL};

use super::budget::SensitivitySpec;
use super::Mechanism;

/// Ignores its input and always returns `value`.
#[derive(Debug, Clone)]
pub struct ConstantMechanism<I, O> {
    pub value: O,
    _input: std::marker::PhantomData<fn(&I)>,
}

impl<I, O> ConstantMechanism<I, O> {
    pub fn new(value: O) -> Self {
        Self {
            value,
            _input: std::marker::PhantomData,
        }
    }
}

impl<I, O: Ord + Clone> Mechanism for ConstantMechanism<I, O> {
    type Input = I;
    type Output = O;

    fn sample(&self, _input: &I, _rng: &mut RandomSource) -> Result<O> {
        Ok(self.value.clone())
    }

    fn pmf(&self, _input: &I) -> Result<Option<DiscreteDistribution<O>>> {
        Ok(Some(DiscreteDistribution::point(self.value.clone())))
    }
}

/// A mechanism given by an explicit output law for every input.
#[derive(Debug, Clone)]
pub struct TableMechanism<I, O> {
    rows: BTreeMap<I, DiscreteDistribution<O>>,
}

impl<I: Ord + Clone, O: Ord + Clone> TableMechanism<I, O> {
    pub fn new(rows: impl IntoIterator<Item = (I, DiscreteDistribution<O>)>) -> Self {
        Self {
            rows: rows.into_iter().collect(),
        }
    }

    fn row(&self, input: &I) -> Result<&DiscreteDistribution<O>> {
        self.rows
            .get(input)
            .ok_or_else(|| DpError::Domain("input outside the mechanism's table".into()))
    }

    pub fn inputs(&self) -> impl Iterator<Item = &I> {
        self.rows.keys()
    }
}

impl<I: Ord + Clone, O: Ord + Clone> Mechanism for TableMechanism<I, O> {
    type Input = I;
    type Output = O;

    fn sample(&self, input: &I, rng: &mut RandomSource) -> Result<O> {
        Ok(self.row(input)?.sample(rng))
    }

    fn pmf(&self, input: &I) -> Result<Option<DiscreteDistribution<O>>> {
        Ok(Some(self.row(input)?.clone()))
    }
}

/// Reports a bit, flipped with probability `flip_prob`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RandomizedResponse {
    pub flip_prob: f64,
}

impl RandomizedResponse {
    pub fn new(flip_prob: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&flip_prob) {
            return Err(DpError::Parameter(format!("flip probability {flip_prob} not in [0, 1]")));
        }
        Ok(Self { flip_prob })
    }

    /// `|ln((1 − p) / p)|`, the tight ε on the bit-flip adjacency.
    pub fn epsilon(&self) -> f64 {
        ((1.0 - self.flip_prob) / self.flip_prob).ln().abs()
    }

    fn law(&self, bit: u8) -> DiscreteDistribution<u8> {
        let p = self.flip_prob;
        DiscreteDistribution::from_masses([(bit, 1.0 - p), (1 - bit, p)])
    }
}

fn check_bit(bit: u8) -> Result<u8> {
    if bit > 1 {
        return Err(DpError::Domain(format!("randomized response input {bit} is not a bit")));
    }
    Ok(bit)
}

impl Mechanism for RandomizedResponse {
    type Input = u8;
    type Output = u8;

    fn sample(&self, input: &u8, rng: &mut RandomSource) -> Result<u8> {
        let bit = check_bit(*input)?;
        Ok(if rng.bernoulli(self.flip_prob) { 1 - bit } else { bit })
    }

    fn pmf(&self, input: &u8) -> Result<Option<DiscreteDistribution<u8>>> {
        Ok(Some(self.law(check_bit(*input)?)))
    }
}

/// Randomized response on the bit `[q(D) ≥ threshold]` for a counting query.
#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdResponse {
    pub queries: CountingQuerySet,
    pub threshold: u64,
    pub response: RandomizedResponse,
}

impl ThresholdResponse {
    pub fn new(n: usize, predicate: Vec<usize>, threshold: u64, flip_prob: f64) -> Result<Self> {
        Ok(Self {
            queries: CountingQuerySet::new(n, vec![predicate])?,
            threshold,
            response: RandomizedResponse::new(flip_prob)?,
        })
    }

    fn bit(&self, input: &Dataset) -> Result<u8> {
        Ok((counting(&self.queries, 0, input)? >= self.threshold) as u8)
    }
}

impl Mechanism for ThresholdResponse {
    type Input = Dataset;
    type Output = u8;

    fn sample(&self, input: &Dataset, rng: &mut RandomSource) -> Result<u8> {
        self.response.sample(&self.bit(input)?, rng)
    }

    fn pmf(&self, input: &Dataset) -> Result<Option<DiscreteDistribution<u8>>> {
        self.response.pmf(&self.bit(input)?)
    }

    fn input_dim(&self) -> Option<usize> {
        Some(self.queries.n())
    }
}

type QueryFn = Arc<dyn Fn(&Dataset) -> Vec<f64> + Send + Sync>;

/// `D ↦ f(D) + Lap(Δf/ε)^m`.
#[derive(Clone)]
pub struct LaplaceMechanism {
    query: QueryFn,
    m: usize,
    n: Option<usize>,
    sensitivity: SensitivitySpec,
    epsilon: f64,
    scale: f64,
}

impl fmt::Debug for LaplaceMechanism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LaplaceMechanism")
            .field("m", &self.m)
            .field("sensitivity", &self.sensitivity)
            .field("epsilon", &self.epsilon)
            .field("scale", &self.scale)
            .finish()
    }
}

impl LaplaceMechanism {
    /// Requires `ε > 0` and `0 < Δf < ∞`.
    pub fn new(
        query: impl Fn(&Dataset) -> Vec<f64> + Send + Sync + 'static,
        m: usize,
        sensitivity: SensitivitySpec,
        epsilon: f64,
    ) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(DpError::Parameter(format!("epsilon must be positive, got {epsilon}")));
        }
        let df = match sensitivity.finite() {
            Some(v) if v > 0.0 => v,
            _ => {
                return Err(DpError::Parameter(
                    "sensitivity must be positive and finite".into(),
                ))
            }
        };
        Ok(Self {
            query: Arc::new(query),
            m,
            n: None,
            sensitivity,
            epsilon,
            scale: df / epsilon,
        })
    }

    /// Laplace mechanism over a tuple of counting queries.
    pub fn counting(q: CountingQuerySet, sensitivity: SensitivitySpec, epsilon: f64) -> Result<Self> {
        let m = q.m();
        let n = q.n();
        let mut mech = Self::new(
            move |d: &Dataset| counting_query(&q, d).into_iter().map(|c| c as f64).collect(),
            m,
            sensitivity,
            epsilon,
        )?;
        mech.n = Some(n);
        Ok(mech)
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn sensitivity(&self) -> SensitivitySpec {
        self.sensitivity
    }

    /// `f(D)`, the centre of the output density.
    pub fn locations(&self, input: &Dataset) -> Result<Vec<f64>> {
        let loc = (self.query)(input);
        if loc.len() != self.m {
            return Err(DpError::Dimension {
                expected: self.m,
                actual: loc.len(),
            });
        }
        Ok(loc)
    }

    /// Law of output coordinate `j`: `Lap(Δf/ε, f(D)_j)`.
    pub fn coordinate_law(&self, input: &Dataset, j: usize) -> Result<Laplace> {
        let loc = self.locations(input)?;
        let z = *loc.get(j).ok_or(DpError::Index {
            index: j,
            len: self.m,
        })?;
        Ok(Laplace::new(self.scale, z))
    }

    /// Product density `Π_j f_{Lap(b, f(D)_j)}(t_j)`.
    pub fn density(&self, input: &Dataset, t: &[f64]) -> Result<f64> {
        let loc = self.locations(input)?;
        if t.len() != loc.len() {
            return Err(DpError::Dimension {
                expected: loc.len(),
                actual: t.len(),
            });
        }
        loc.iter()
            .zip(t)
            .try_fold(1.0, |acc, (&z, &x)| Ok(acc * Laplace::new(self.scale, z).pdf(x)?))
    }
}

impl Mechanism for LaplaceMechanism {
    type Input = Dataset;
    type Output = Vec<f64>;

    fn sample(&self, input: &Dataset, rng: &mut RandomSource) -> Result<Vec<f64>> {
        Ok(laplace_vector_sample(self.scale, &self.locations(input)?, rng))
    }

    fn input_dim(&self) -> Option<usize> {
        self.n
    }
}

fn check_eps(eps: f64) -> Result<()> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(DpError::Parameter(format!("epsilon must be positive, got {eps}")));
    }
    Ok(())
}

fn scores(q: &CountingQuerySet, d: &Dataset) -> Vec<f64> {
    counting_query(q, d).into_iter().map(|c| c as f64).collect()
}

/// Report noisy max with `Lap(1/ε)` noise on every counting query.
///
/// The exact output law is evaluated by quadrature to `tol` and
/// renormalised.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportNoisyMax {
    pub queries: CountingQuerySet,
    pub epsilon: f64,
    pub tol: f64,
}

impl ReportNoisyMax {
    pub fn new(queries: CountingQuerySet, epsilon: f64) -> Result<Self> {
        check_eps(epsilon)?;
        Ok(Self {
            queries,
            epsilon,
            tol: DEFAULT_PROB_TOL,
        })
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }
}

impl Mechanism for ReportNoisyMax {
    type Input = Dataset;
    type Output = usize;

    fn sample(&self, input: &Dataset, rng: &mut RandomSource) -> Result<usize> {
        rnm_sample_scores(&scores(&self.queries, input), self.epsilon, rng)
    }

    fn pmf(&self, input: &Dataset) -> Result<Option<DiscreteDistribution<usize>>> {
        let c = scores(&self.queries, input);
        if c.len() <= 1 {
            return Ok(Some(DiscreteDistribution::point(0)));
        }
        let probs = rnm_distribution(&c, self.epsilon, self.tol)?;
        DiscreteDistribution::from_weights(probs.into_iter().enumerate()).map(Some)
    }

    fn input_dim(&self) -> Option<usize> {
        Some(self.queries.n())
    }
}

/// A broken report-noisy-max that perturbs only the first query and reads
/// the rest exactly. Exists to exercise the auditors.
#[derive(Debug, Clone, PartialEq)]
pub struct FirstOnlyNoisyMax {
    pub queries: CountingQuerySet,
    pub epsilon: f64,
}

impl FirstOnlyNoisyMax {
    pub fn new(queries: CountingQuerySet, epsilon: f64) -> Result<Self> {
        check_eps(epsilon)?;
        Ok(Self { queries, epsilon })
    }
}

impl Mechanism for FirstOnlyNoisyMax {
    type Input = Dataset;
    type Output = usize;

    fn sample(&self, input: &Dataset, rng: &mut RandomSource) -> Result<usize> {
        let mut c = scores(&self.queries, input);
        if let Some(first) = c.first_mut() {
            *first = Laplace::new(1.0 / self.epsilon, *first).sample(rng);
        }
        Ok(argmax_list(&c))
    }

    fn pmf(&self, input: &Dataset) -> Result<Option<DiscreteDistribution<usize>>> {
        let c = scores(&self.queries, input);
        if c.len() <= 1 {
            return Ok(Some(DiscreteDistribution::point(0)));
        }
        // head wins iff c_0 + r_0 > max of the (noise-free) tail
        let rest = &c[1..];
        let runner_up = argmax_list(rest) + 1;
        let tail_max = rest.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let p0 = Laplace::new(1.0 / self.epsilon, c[0]).survival(tail_max);
        Ok(Some(DiscreteDistribution::from_masses([
            (0, p0),
            (runner_up, 1.0 - p0),
        ])))
    }

    fn input_dim(&self) -> Option<usize> {
        Some(self.queries.n())
    }
}
