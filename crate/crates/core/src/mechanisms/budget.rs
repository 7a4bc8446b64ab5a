//! Privacy budgets and the composition rules that combine them.

use serde::{Deserialize, Serialize};

use crate::error::{DpError, Result};

/// An `(ε, δ)` pair with `ε ≥ 0` and `δ ≥ 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrivacyBudget {
    pub epsilon: f64,
    pub delta: f64,
}

impl PrivacyBudget {
    pub fn new(epsilon: f64, delta: f64) -> Result<Self> {
        if !(epsilon >= 0.0 && epsilon.is_finite()) {
            return Err(DpError::Parameter(format!("epsilon must be ≥ 0, got {epsilon}")));
        }
        if !(delta >= 0.0 && delta.is_finite()) {
            return Err(DpError::Parameter(format!("delta must be ≥ 0, got {delta}")));
        }
        Ok(Self { epsilon, delta })
    }

    /// `(ε, 0)`.
    pub fn pure(epsilon: f64) -> Result<Self> {
        Self::new(epsilon, 0.0)
    }

    pub fn zero() -> Self {
        Self {
            epsilon: 0.0,
            delta: 0.0,
        }
    }

    /// Sequential (and adaptive) composition: `(ε₁ + ε₂, δ₁ + δ₂)`.
    pub fn add(&self, other: &Self) -> Self {
        Self {
            epsilon: self.epsilon + other.epsilon,
            delta: self.delta + other.delta,
        }
    }

    /// Whether a mechanism with this budget is also `looser`-DP.
    pub fn weakens_to(&self, looser: &Self) -> bool {
        self.epsilon <= looser.epsilon && self.delta <= looser.delta
    }

    /// Restates this budget as `looser`, which must dominate it.
    pub fn weaken(&self, looser: &Self) -> Result<Self> {
        if self.weakens_to(looser) {
            Ok(*looser)
        } else {
            Err(DpError::Parameter(format!(
                "cannot weaken ({}, {}) to ({}, {})",
                self.epsilon, self.delta, looser.epsilon, looser.delta
            )))
        }
    }

    /// Group privacy for datasets at distance `k`: `(kε, 0)`. Only defined
    /// for `δ = 0`.
    pub fn group(&self, k: u64) -> Result<Self> {
        if self.delta != 0.0 {
            return Err(DpError::Unsupported(
                "group privacy is only available for δ = 0".into(),
            ));
        }
        Ok(Self {
            epsilon: k as f64 * self.epsilon,
            delta: 0.0,
        })
    }
}

/// A composition tree over budgets, folded by [`BudgetTree::total`].
///
/// JSON form (externally tagged), e.g.
/// `{"seq": [{"budget": {"epsilon": 1, "delta": 0}}, ...]}`,
/// `{"group": {"k": 4, "of": ...}}`,
/// `{"weaken": {"epsilon": 2, "delta": 0, "of": ...}}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BudgetTree {
    Budget(PrivacyBudget),
    Seq(Vec<BudgetTree>),
    Adaptive(Vec<BudgetTree>),
    Post(Box<BudgetTree>),
    Group { k: u64, of: Box<BudgetTree> },
    Weaken { epsilon: f64, delta: f64, of: Box<BudgetTree> },
}

impl BudgetTree {
    pub fn total(&self) -> Result<PrivacyBudget> {
        match self {
            Self::Budget(b) => PrivacyBudget::new(b.epsilon, b.delta),
            Self::Seq(parts) | Self::Adaptive(parts) => parts
                .iter()
                .try_fold(PrivacyBudget::zero(), |acc, p| Ok(acc.add(&p.total()?))),
            Self::Post(inner) => inner.total(),
            Self::Group { k, of } => of.total()?.group(*k),
            Self::Weaken { epsilon, delta, of } => {
                of.total()?.weaken(&PrivacyBudget::new(*epsilon, *delta)?)
            }
        }
    }
}

/// A running ledger of spent budgets under sequential composition.
#[derive(Debug, Clone, Default, Serialize)]
pub struct Accountant {
    entries: Vec<(String, PrivacyBudget)>,
}

impl Accountant {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn spend(&mut self, label: impl Into<String>, budget: PrivacyBudget) {
        self.entries.push((label.into(), budget));
    }

    pub fn entries(&self) -> &[(String, PrivacyBudget)] {
        &self.entries
    }

    pub fn total(&self) -> PrivacyBudget {
        self.entries
            .iter()
            .fold(PrivacyBudget::zero(), |acc, (_, b)| acc.add(b))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SensitivityProvenance {
    Declared,
    Exhaustive,
    Analytic,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Sensitivity {
    Finite(f64),
    Infinite,
}

/// `Δf` together with how it was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SensitivitySpec {
    pub value: Sensitivity,
    pub provenance: SensitivityProvenance,
}

impl SensitivitySpec {
    pub fn new(value: f64, provenance: SensitivityProvenance) -> Result<Self> {
        if value.is_nan() || value < 0.0 {
            return Err(DpError::Parameter(format!("sensitivity must be ≥ 0, got {value}")));
        }
        let value = if value.is_infinite() {
            Sensitivity::Infinite
        } else {
            Sensitivity::Finite(value)
        };
        Ok(Self { value, provenance })
    }

    pub fn declared(value: f64) -> Result<Self> {
        Self::new(value, SensitivityProvenance::Declared)
    }

    pub fn finite(&self) -> Option<f64> {
        match self.value {
            Sensitivity::Finite(v) => Some(v),
            Sensitivity::Infinite => None,
        }
    }
}
