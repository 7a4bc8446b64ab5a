//! Mechanisms, composition combinators, budgets and DP checkers.
//!
//! A mechanism is only a randomized map from inputs to outputs. Whether it
//! is (ε, δ)-DP is a judgment about the triple (mechanism, adjacency,
//! budget), made by the functions in [`check`]; budgets are tracked next to
//! mechanisms by the [`budget`] accountant rather than stored in them.
//!
//! Exact output laws propagate through the combinators where they can:
//! pushforward, product and finite mixture of probability tables stay
//! exact; anything with real-valued output exposes only a sampler (plus,
//! for the Laplace mechanism, its density parameters).

pub mod budget;
pub mod check;
pub mod events;
pub mod library;

use crate::divergence::{DiscreteDistribution, DiscreteKernel};
use crate::error::{DpError, Result};
use crate::rng::RandomSource;

pub use budget::{BudgetTree, PrivacyBudget, Sensitivity, SensitivityProvenance, SensitivitySpec};
pub use check::{
    check_dp_exact, check_dp_laplace, check_dp_statistical, check_group_privacy, DpCheck,
    StatisticalAudit, StatisticalConfig, Verdict, Witness,
};
pub use events::{Event, EventSpace};
pub use library::{
    ConstantMechanism, FirstOnlyNoisyMax, LaplaceMechanism, RandomizedResponse, ReportNoisyMax,
    TableMechanism, ThresholdResponse,
};

/// A randomized algorithm `Input → Prob(Output)`.
pub trait Mechanism {
    type Input;
    type Output;

    fn sample(&self, input: &Self::Input, rng: &mut RandomSource) -> Result<Self::Output>;

    /// Exact output distribution, for mechanisms with a finite output law.
    fn pmf(&self, _input: &Self::Input) -> Result<Option<DiscreteDistribution<Self::Output>>> {
        Ok(None)
    }

    /// Length of the histograms this mechanism accepts, when fixed.
    fn input_dim(&self) -> Option<usize> {
        None
    }
}

impl<M: Mechanism + ?Sized> Mechanism for Box<M> {
    type Input = M::Input;
    type Output = M::Output;

    fn sample(&self, input: &Self::Input, rng: &mut RandomSource) -> Result<Self::Output> {
        (**self).sample(input, rng)
    }

    fn pmf(&self, input: &Self::Input) -> Result<Option<DiscreteDistribution<Self::Output>>> {
        (**self).pmf(input)
    }

    fn input_dim(&self) -> Option<usize> {
        (**self).input_dim()
    }
}

/// A data-independent randomized map applied to mechanism outputs.
pub trait Kernel<X> {
    type Output;

    fn apply(&self, x: &X, rng: &mut RandomSource) -> Result<Self::Output>;

    fn pmf(&self, _x: &X) -> Result<Option<DiscreteDistribution<Self::Output>>> {
        Ok(None)
    }
}

impl<X: Ord + Clone, Y: Ord + Clone> Kernel<X> for DiscreteKernel<X, Y> {
    type Output = Y;

    fn apply(&self, x: &X, rng: &mut RandomSource) -> Result<Y> {
        Ok(self.row(x)?.sample(rng))
    }

    fn pmf(&self, x: &X) -> Result<Option<DiscreteDistribution<Y>>> {
        Ok(Some(self.row(x)?.clone()))
    }
}

/// A deterministic map viewed as a kernel with point-mass rows.
#[derive(Debug, Clone, Copy)]
pub struct Map<F>(pub F);

impl<X, Y: Ord + Clone, F: Fn(&X) -> Y> Kernel<X> for Map<F> {
    type Output = Y;

    fn apply(&self, x: &X, _rng: &mut RandomSource) -> Result<Y> {
        Ok((self.0)(x))
    }

    fn pmf(&self, x: &X) -> Result<Option<DiscreteDistribution<Y>>> {
        Ok(Some(DiscreteDistribution::point((self.0)(x))))
    }
}

/// `D ↦ M(D) ≫= g`.
#[derive(Debug, Clone)]
pub struct PostProcessed<M, G> {
    pub inner: M,
    pub kernel: G,
}

pub fn post_process<M, G>(mech: M, kernel: G) -> PostProcessed<M, G>
where
    M: Mechanism,
    G: Kernel<M::Output>,
{
    PostProcessed { inner: mech, kernel }
}

impl<M, G> Mechanism for PostProcessed<M, G>
where
    M: Mechanism,
    G: Kernel<M::Output>,
    G::Output: Ord + Clone,
{
    type Input = M::Input;
    type Output = G::Output;

    fn sample(&self, input: &M::Input, rng: &mut RandomSource) -> Result<G::Output> {
        let y = self.inner.sample(input, rng)?;
        self.kernel.apply(&y, rng)
    }

    fn pmf(&self, input: &M::Input) -> Result<Option<DiscreteDistribution<G::Output>>> {
        let Some(inner) = self.inner.pmf(input)? else {
            return Ok(None);
        };
        let mut masses = Vec::new();
        for (y, p) in inner.iter() {
            let Some(row) = self.kernel.pmf(y)? else {
                return Ok(None);
            };
            masses.extend(row.iter().map(|(z, q)| (z.clone(), p * q)));
        }
        Ok(Some(DiscreteDistribution::from_masses(masses)))
    }

    fn input_dim(&self) -> Option<usize> {
        self.inner.input_dim()
    }
}

/// `D ↦ M(D) ⊗ N(D)`: independent runs on the same input.
#[derive(Debug, Clone)]
pub struct PairComposed<M1, M2> {
    pub first: M1,
    pub second: M2,
}

/// Pairs two mechanisms over the same input space. Fails when both declare
/// an input length and the lengths differ.
pub fn pair_compose<M1, M2>(first: M1, second: M2) -> Result<PairComposed<M1, M2>>
where
    M1: Mechanism,
    M2: Mechanism<Input = M1::Input>,
{
    check_dims(first.input_dim(), second.input_dim())?;
    Ok(PairComposed { first, second })
}

fn check_dims(a: Option<usize>, b: Option<usize>) -> Result<()> {
    match (a, b) {
        (Some(x), Some(y)) if x != y => Err(DpError::Dimension {
            expected: x,
            actual: y,
        }),
        _ => Ok(()),
    }
}

impl<M1, M2> Mechanism for PairComposed<M1, M2>
where
    M1: Mechanism,
    M2: Mechanism<Input = M1::Input>,
    M1::Output: Ord + Clone,
    M2::Output: Ord + Clone,
{
    type Input = M1::Input;
    type Output = (M1::Output, M2::Output);

    fn sample(&self, input: &M1::Input, rng: &mut RandomSource) -> Result<Self::Output> {
        Ok((self.first.sample(input, rng)?, self.second.sample(input, rng)?))
    }

    fn pmf(&self, input: &M1::Input) -> Result<Option<DiscreteDistribution<Self::Output>>> {
        match (self.first.pmf(input)?, self.second.pmf(input)?) {
            (Some(a), Some(b)) => Ok(Some(a.product(&b))),
            _ => Ok(None),
        }
    }

    fn input_dim(&self) -> Option<usize> {
        self.first.input_dim().or(self.second.input_dim())
    }
}

/// A second-stage mechanism that also sees the first stage's output.
pub trait AdaptiveKernel<I, Z> {
    type Output;

    fn sample(&self, input: &I, z: &Z, rng: &mut RandomSource) -> Result<Self::Output>;

    fn pmf(&self, _input: &I, _z: &Z) -> Result<Option<DiscreteDistribution<Self::Output>>> {
        Ok(None)
    }
}

/// `D ↦ {z ← M(D); N(D, z)}`.
#[derive(Debug, Clone)]
pub struct AdaptiveComposed<M, K> {
    pub first: M,
    pub kernel: K,
}

pub fn adaptive_compose<M, K>(first: M, kernel: K) -> AdaptiveComposed<M, K>
where
    M: Mechanism,
    K: AdaptiveKernel<M::Input, M::Output>,
{
    AdaptiveComposed { first, kernel }
}

impl<M, K> Mechanism for AdaptiveComposed<M, K>
where
    M: Mechanism,
    K: AdaptiveKernel<M::Input, M::Output>,
    K::Output: Ord + Clone,
{
    type Input = M::Input;
    type Output = K::Output;

    fn sample(&self, input: &M::Input, rng: &mut RandomSource) -> Result<K::Output> {
        let z = self.first.sample(input, rng)?;
        self.kernel.sample(input, &z, rng)
    }

    fn pmf(&self, input: &M::Input) -> Result<Option<DiscreteDistribution<K::Output>>> {
        let Some(first) = self.first.pmf(input)? else {
            return Ok(None);
        };
        let mut masses = Vec::new();
        for (z, p) in first.iter() {
            let Some(row) = self.kernel.pmf(input, z)? else {
                return Ok(None);
            };
            masses.extend(row.iter().map(|(y, q)| (y.clone(), p * q)));
        }
        Ok(Some(DiscreteDistribution::from_masses(masses)))
    }

    fn input_dim(&self) -> Option<usize> {
        self.first.input_dim()
    }
}

/// An adaptive kernel given by a table from `(input, z)` to output laws.
#[derive(Debug, Clone)]
pub struct TableAdaptiveKernel<I, Z, Y> {
    rows: std::collections::BTreeMap<(I, Z), DiscreteDistribution<Y>>,
}

impl<I: Ord + Clone, Z: Ord + Clone, Y: Ord + Clone> TableAdaptiveKernel<I, Z, Y> {
    pub fn new(rows: impl IntoIterator<Item = ((I, Z), DiscreteDistribution<Y>)>) -> Self {
        Self {
            rows: rows.into_iter().collect(),
        }
    }

    fn row(&self, input: &I, z: &Z) -> Result<&DiscreteDistribution<Y>> {
        self.rows
            .get(&(input.clone(), z.clone()))
            .ok_or_else(|| DpError::Domain("adaptive kernel undefined for (input, z)".into()))
    }
}

impl<I: Ord + Clone, Z: Ord + Clone, Y: Ord + Clone> AdaptiveKernel<I, Z>
    for TableAdaptiveKernel<I, Z, Y>
{
    type Output = Y;

    fn sample(&self, input: &I, z: &Z, rng: &mut RandomSource) -> Result<Y> {
        Ok(self.row(input, z)?.sample(rng))
    }

    fn pmf(&self, input: &I, z: &Z) -> Result<Option<DiscreteDistribution<Y>>> {
        Ok(Some(self.row(input, z)?.clone()))
    }
}

/// Adapts a mechanism into an adaptive kernel that ignores `z`.
#[derive(Debug, Clone)]
pub struct IgnoreIntermediate<M>(pub M);

impl<M: Mechanism, Z> AdaptiveKernel<M::Input, Z> for IgnoreIntermediate<M> {
    type Output = M::Output;

    fn sample(&self, input: &M::Input, _z: &Z, rng: &mut RandomSource) -> Result<M::Output> {
        self.0.sample(input, rng)
    }

    fn pmf(&self, input: &M::Input, _z: &Z) -> Result<Option<DiscreteDistribution<M::Output>>> {
        self.0.pmf(input)
    }
}

/// Adapts a kernel on `z` alone (ignoring the input) into an adaptive kernel.
#[derive(Debug, Clone)]
pub struct IgnoreInput<G>(pub G);

impl<I, Z, G: Kernel<Z>> AdaptiveKernel<I, Z> for IgnoreInput<G> {
    type Output = G::Output;

    fn sample(&self, _input: &I, z: &Z, rng: &mut RandomSource) -> Result<G::Output> {
        self.0.apply(z, rng)
    }

    fn pmf(&self, _input: &I, z: &Z) -> Result<Option<DiscreteDistribution<G::Output>>> {
        self.0.pmf(z)
    }
}
