//! JSON configuration files for the command-line tools.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::Deserialize;

use crate::dataset::{neighbor_pairs, CountingQuerySet, Dataset, DEFAULT_ENUMERATION_LIMIT};
use crate::divergence::DiscreteDistribution;
use crate::error::{DpError, Result};
use crate::laplace::Laplace;
use crate::mechanisms::{
    FirstOnlyNoisyMax, LaplaceMechanism, Mechanism, ReportNoisyMax, SensitivityProvenance, SensitivitySpec,
    ThresholdResponse,
};
use crate::rng::RandomSource;

pub fn load_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| DpError::Validation(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| DpError::Validation(format!("{}: {e}", path.display())))
}

/// A histogram given inline or as a path to a JSON file, relative to the
/// configuration file.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum DatasetRef {
    Inline(Dataset),
    Path(PathBuf),
}

impl DatasetRef {
    pub fn resolve(&self, config_path: &Path) -> Result<Dataset> {
        match self {
            DatasetRef::Inline(d) => Ok(d.clone()),
            DatasetRef::Path(p) => {
                let full = match config_path.parent() {
                    Some(dir) if p.is_relative() => dir.join(p),
                    _ => p.clone(),
                };
                load_json(&full)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RnmVariant {
    #[default]
    Standard,
    /// Noise on the first score only; not private.
    FirstOnly,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum MechanismConfig {
    Laplace {
        queries: CountingQuerySet,
        epsilon: f64,
        /// Defaults to the largest number of queries counting one type.
        #[serde(default)]
        sensitivity: Option<f64>,
    },
    Rnm {
        queries: CountingQuerySet,
        epsilon: f64,
        #[serde(default)]
        variant: RnmVariant,
    },
    RandomizedResponse {
        n: usize,
        predicate: Vec<usize>,
        threshold: u64,
        flip_prob: f64,
    },
    Composed {
        first: Box<MechanismConfig>,
        second: Box<MechanismConfig>,
    },
}

impl MechanismConfig {
    pub fn kind(&self) -> &'static str {
        match self {
            MechanismConfig::Laplace { .. } => "laplace",
            MechanismConfig::Rnm {
                variant: RnmVariant::Standard,
                ..
            } => "rnm",
            MechanismConfig::Rnm {
                variant: RnmVariant::FirstOnly,
                ..
            } => "rnm-first-only",
            MechanismConfig::RandomizedResponse { .. } => "randomized-response",
            MechanismConfig::Composed { .. } => "composed",
        }
    }
}

/// A configured mechanism with finite outputs, each reported as a list of
/// integers (one per component).
#[derive(Debug, Clone)]
pub enum DiscreteMech {
    Rnm(ReportNoisyMax),
    FirstOnly(FirstOnlyNoisyMax),
    Threshold(ThresholdResponse),
    Composed(Box<DiscreteMech>, Box<DiscreteMech>),
}

fn widen<T: Copy + Ord + Into<u64>>(d: DiscreteDistribution<T>) -> DiscreteDistribution<Vec<u64>> {
    d.map(|x| vec![(*x).into()])
}

impl Mechanism for DiscreteMech {
    type Input = Dataset;
    type Output = Vec<u64>;

    fn sample(&self, input: &Dataset, rng: &mut RandomSource) -> Result<Vec<u64>> {
        Ok(match self {
            DiscreteMech::Rnm(m) => vec![m.sample(input, rng)? as u64],
            DiscreteMech::FirstOnly(m) => vec![m.sample(input, rng)? as u64],
            DiscreteMech::Threshold(m) => vec![m.sample(input, rng)? as u64],
            DiscreteMech::Composed(a, b) => {
                let mut v = a.sample(input, rng)?;
                v.extend(b.sample(input, rng)?);
                v
            }
        })
    }

    fn pmf(&self, input: &Dataset) -> Result<Option<DiscreteDistribution<Vec<u64>>>> {
        let idx = |d: DiscreteDistribution<usize>| d.map(|x| vec![*x as u64]);
        Ok(match self {
            DiscreteMech::Rnm(m) => m.pmf(input)?.map(idx),
            DiscreteMech::FirstOnly(m) => m.pmf(input)?.map(idx),
            DiscreteMech::Threshold(m) => m.pmf(input)?.map(widen),
            DiscreteMech::Composed(a, b) => match (a.pmf(input)?, b.pmf(input)?) {
                (Some(x), Some(y)) => Some(x.product(&y).map(|(u, v)| {
                    let mut w = u.clone();
                    w.extend(v.iter().copied());
                    w
                })),
                _ => None,
            },
        })
    }

    fn input_dim(&self) -> Option<usize> {
        match self {
            DiscreteMech::Rnm(m) => m.input_dim(),
            DiscreteMech::FirstOnly(m) => m.input_dim(),
            DiscreteMech::Threshold(m) => m.input_dim(),
            DiscreteMech::Composed(a, _) => a.input_dim(),
        }
    }
}

#[derive(Debug, Clone)]
pub enum Built {
    Laplace(LaplaceMechanism),
    Discrete(DiscreteMech),
}

impl Built {
    pub fn input_dim(&self) -> Option<usize> {
        match self {
            Built::Laplace(m) => m.input_dim(),
            Built::Discrete(m) => m.input_dim(),
        }
    }
}

/// Largest number of queries that count a single type: the L1 sensitivity
/// of a counting query tuple.
pub fn counting_sensitivity(q: &CountingQuerySet) -> u64 {
    (0..q.n())
        .map(|k| (0..q.m()).filter(|&i| q.counts_type(i, k)).count() as u64)
        .max()
        .unwrap_or(0)
}

pub fn build_mechanism(cfg: &MechanismConfig) -> Result<Built> {
    match cfg {
        MechanismConfig::Laplace {
            queries,
            epsilon,
            sensitivity,
        } => {
            let spec = match sensitivity {
                Some(s) => SensitivitySpec::declared(*s)?,
                None => SensitivitySpec::new(counting_sensitivity(queries) as f64, SensitivityProvenance::Analytic)?,
            };
            Ok(Built::Laplace(LaplaceMechanism::counting(queries.clone(), spec, *epsilon)?))
        }
        _ => Ok(Built::Discrete(build_discrete(cfg)?)),
    }
}

fn build_discrete(cfg: &MechanismConfig) -> Result<DiscreteMech> {
    match cfg {
        MechanismConfig::Laplace { .. } => Err(DpError::Unsupported(
            "composed mechanisms must have finite outputs".into(),
        )),
        MechanismConfig::Rnm {
            queries,
            epsilon,
            variant: RnmVariant::Standard,
        } => Ok(DiscreteMech::Rnm(ReportNoisyMax::new(queries.clone(), *epsilon)?)),
        MechanismConfig::Rnm {
            queries,
            epsilon,
            variant: RnmVariant::FirstOnly,
        } => Ok(DiscreteMech::FirstOnly(FirstOnlyNoisyMax::new(queries.clone(), *epsilon)?)),
        MechanismConfig::RandomizedResponse {
            n,
            predicate,
            threshold,
            flip_prob,
        } => Ok(DiscreteMech::Threshold(ThresholdResponse::new(
            *n,
            predicate.clone(),
            *threshold,
            *flip_prob,
        )?)),
        MechanismConfig::Composed { first, second } => {
            let (a, b) = (build_discrete(first)?, build_discrete(second)?);
            if let (Some(x), Some(y)) = (a.input_dim(), b.input_dim()) {
                if x != y {
                    return Err(DpError::Dimension { expected: x, actual: y });
                }
            }
            Ok(DiscreteMech::Composed(Box::new(a), Box::new(b)))
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
pub struct SampleConfig {
    pub mechanism: MechanismConfig,
    pub dataset: DatasetRef,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum DistributionSpec {
    /// Probability table over string labels.
    Discrete { table: BTreeMap<String, f64> },
    Laplace { scale: f64, location: f64 },
    /// Sampling access only to the wrapped distribution.
    Sampler { of: Box<DistributionSpec> },
}

impl DistributionSpec {
    /// The distribution behind any number of sampler wrappers.
    pub fn underlying(&self) -> Result<&DistributionSpec> {
        match self {
            DistributionSpec::Sampler { of } => of.underlying(),
            other => Ok(other),
        }
    }

    pub fn table(&self) -> Result<DiscreteDistribution<String>> {
        match self.underlying()? {
            DistributionSpec::Discrete { table } => {
                DiscreteDistribution::new(table.iter().map(|(k, v)| (k.clone(), *v)))
            }
            _ => Err(DpError::Validation("expected a discrete table".into())),
        }
    }

    pub fn laplace(&self) -> Result<Laplace> {
        match self.underlying()? {
            DistributionSpec::Laplace { scale, location } => {
                if !(*scale > 0.0 && scale.is_finite() && location.is_finite()) {
                    return Err(DpError::Parameter(format!(
                        "laplace needs finite scale > 0 and finite location, got ({scale}, {location})"
                    )));
                }
                Ok(Laplace::new(*scale, *location))
            }
            _ => Err(DpError::Validation("expected a laplace distribution".into())),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
pub struct DivergenceConfig {
    pub epsilon: f64,
    pub mu: DistributionSpec,
    pub nu: DistributionSpec,
}

#[derive(Debug, Clone, Copy, Deserialize)]
pub struct BudgetConfig {
    pub epsilon: f64,
    #[serde(default)]
    pub delta: f64,
}

/// Enumerates all histogram pairs over `n` types with entries up to
/// `max_entry` and L1 distance between 1 and `radius`.
#[derive(Debug, Clone, Copy, Deserialize)]
pub struct AdjacencyConfig {
    #[serde(default)]
    pub n: Option<usize>,
    pub max_entry: u64,
    #[serde(default = "one")]
    pub radius: u64,
}

fn one() -> u64 {
    1
}

#[derive(Debug, Clone, Deserialize)]
pub struct AuditConfig {
    pub mechanism: MechanismConfig,
    pub budget: BudgetConfig,
    #[serde(default)]
    pub adjacency: Option<AdjacencyConfig>,
    #[serde(default)]
    pub pairs: Option<Vec<(DatasetRef, DatasetRef)>>,
}

impl AuditConfig {
    pub fn pairs(&self, config_path: &Path, input_dim: Option<usize>) -> Result<Vec<(Dataset, Dataset)>> {
        let mut out = Vec::new();
        if let Some(pairs) = &self.pairs {
            for (a, b) in pairs {
                out.push((a.resolve(config_path)?, b.resolve(config_path)?));
            }
        }
        if let Some(adj) = self.adjacency {
            let n = adj
                .n
                .or(input_dim)
                .ok_or_else(|| DpError::Validation("adjacency needs the number of types n".into()))?;
            out.extend(neighbor_pairs(n, adj.max_entry, adj.radius, DEFAULT_ENUMERATION_LIMIT)?);
        }
        if self.pairs.is_none() && self.adjacency.is_none() {
            return Err(DpError::Validation("audit needs `pairs` or `adjacency`".into()));
        }
        if let Some(n) = input_dim {
            for (a, b) in &out {
                for d in [a, b] {
                    if d.len() != n {
                        return Err(DpError::Dimension {
                            expected: n,
                            actual: d.len(),
                        });
                    }
                }
            }
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default)]
pub struct RnmVerifyConfig {
    pub n: usize,
    pub max_entry: u64,
    pub max_m: usize,
    pub epsilon: f64,
    pub tol: f64,
    /// Explicit query sets; when absent every multiset of nonempty
    /// predicates with up to `max_m` members is checked.
    pub query_sets: Option<Vec<CountingQuerySet>>,
}

impl Default for RnmVerifyConfig {
    fn default() -> Self {
        Self {
            n: 3,
            max_entry: 2,
            max_m: 3,
            epsilon: 1.0,
            tol: 1e-9,
            query_sets: None,
        }
    }
}
