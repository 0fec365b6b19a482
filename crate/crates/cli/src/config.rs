//! Experiment configuration files.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use serde::Deserialize;

use recur_core::algebra::{c64, BlockLiteral};
use recur_core::compactness::Metric;
use recur_core::{
    AlgebraElement, BlockShape, DynamicalSystem, MeasureSemigroup, SemigroupKind, TraceState,
};

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub system: SystemSpec,
    pub element: Option<ElementSpec>,
    #[serde(default)]
    pub verify: VerifySpec,
    pub compactness: Option<CompactnessSpec>,
    pub recurrence: Option<RecurrenceSpec>,
    pub average: Option<AverageSpec>,
    /// Output directory, overridden by `--out` or `RECUR_OUT_DIR`.
    pub output: Option<PathBuf>,
}

fn naturals() -> SemigroupKind {
    SemigroupKind::Naturals
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum SystemSpec {
    Rotation {
        p: i64,
        q: usize,
        #[serde(default = "naturals")]
        semigroup: SemigroupKind,
    },
    Classical {
        permutation: Vec<usize>,
        /// Uniform when omitted.
        weights: Option<Vec<f64>>,
        #[serde(default = "naturals")]
        semigroup: SemigroupKind,
    },
    Conjugation {
        dims: Vec<usize>,
        weights: Vec<f64>,
        /// One generator per semigroup coordinate, as block literals.
        generators: Vec<Vec<BlockLiteral>>,
        #[serde(default = "naturals")]
        semigroup: SemigroupKind,
    },
}

/// Exactly one of `name`, `matrix`, `set` or `terms`.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ElementSpec {
    pub name: Option<String>,
    pub matrix: Option<Vec<BlockLiteral>>,
    pub set: Option<Vec<usize>>,
    pub terms: Option<Vec<Term>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Term {
    #[serde(default = "unit")]
    pub coef: [f64; 2],
    pub name: String,
}

fn unit() -> [f64; 2] {
    [1.0, 0.0]
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifySpec {
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default = "default_seed")]
    pub seed: u64,
}

fn default_samples() -> usize {
    200
}

fn default_seed() -> u64 {
    2024
}

impl Default for VerifySpec {
    fn default() -> Self {
        VerifySpec {
            samples: default_samples(),
            seed: default_seed(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompactnessSpec {
    pub epsilons: Vec<f64>,
    pub windows: Vec<usize>,
    #[serde(default)]
    pub metric: Metric,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RecurrenceSpec {
    pub exponents: Vec<u64>,
    pub epsilon: f64,
    /// Canonical window index to scan.
    pub window: usize,
    #[serde(default = "default_max_r")]
    pub max_r: usize,
}

fn default_max_r() -> usize {
    10
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum Windows {
    List(Vec<usize>),
    Range { from: usize, to: usize },
}

impl Windows {
    pub fn sizes(&self) -> Vec<usize> {
        match self {
            Windows::List(v) => v.clone(),
            Windows::Range { from, to } => (*from..=*to).collect(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AverageSpec {
    pub exponents: Option<Vec<u64>>,
    pub windows: Windows,
    /// Classical systems only: averages `nu(V ∩ T^{-n}V ∩ ... ∩ T^{-kn}V)`.
    pub furstenberg: Option<FurstenbergSpec>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FurstenbergSpec {
    pub set: Vec<usize>,
    pub k: usize,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("invalid config {}", path.display()))
    }

    pub fn parse(text: &str) -> anyhow::Result<Self> {
        Ok(toml::from_str(text)?)
    }
}

impl SystemSpec {
    pub fn build(&self) -> anyhow::Result<DynamicalSystem> {
        Ok(match self {
            SystemSpec::Rotation { p, q, semigroup } => {
                DynamicalSystem::rotation(*p, *q, MeasureSemigroup::new(*semigroup)?)?
            }
            SystemSpec::Classical {
                permutation,
                weights,
                semigroup,
            } => {
                let n = permutation.len();
                let weights = weights
                    .clone()
                    .unwrap_or_else(|| vec![1.0 / n.max(1) as f64; n]);
                DynamicalSystem::classical(
                    permutation.clone(),
                    weights,
                    MeasureSemigroup::new(*semigroup)?,
                )?
            }
            SystemSpec::Conjugation {
                dims,
                weights,
                generators,
                semigroup,
            } => {
                let trace = TraceState::new(BlockShape::new(dims.clone())?, weights.clone())?;
                let generators = generators
                    .iter()
                    .map(|g| AlgebraElement::from_literal(g))
                    .collect::<Result<Vec<_>, _>>()?;
                DynamicalSystem::conjugation(trace, MeasureSemigroup::new(*semigroup)?, generators)?
            }
        })
    }
}

/// Named element, with a trailing `*` for the adjoint.
fn named(sys: &DynamicalSystem, name: &str) -> anyhow::Result<AlgebraElement> {
    match name.strip_suffix('*') {
        Some(base) => Ok(sys.element(base)?.adjoint()),
        None => Ok(sys.element(name)?.clone()),
    }
}

impl ElementSpec {
    pub fn build(&self, sys: &DynamicalSystem) -> anyhow::Result<AlgebraElement> {
        let given = [
            self.name.is_some(),
            self.matrix.is_some(),
            self.set.is_some(),
            self.terms.is_some(),
        ];
        if given.iter().filter(|&&g| g).count() != 1 {
            bail!("element needs exactly one of name, matrix, set, terms");
        }
        let a = if let Some(name) = &self.name {
            named(sys, name)?
        } else if let Some(m) = &self.matrix {
            AlgebraElement::from_literal(m)?
        } else if let Some(set) = &self.set {
            sys.characteristic(&set.iter().copied().collect::<BTreeSet<_>>())?
        } else {
            let terms = self.terms.as_deref().unwrap_or_default();
            if terms.is_empty() {
                bail!("element terms must be nonempty");
            }
            let mut total = AlgebraElement::zero(sys.shape());
            for t in terms {
                let x = named(sys, &t.name)?.scale(c64(t.coef[0], t.coef[1]));
                total = total.try_add(&x)?;
            }
            total
        };
        if !a.has_shape(sys.shape()) {
            bail!("element does not match the system's block layout");
        }
        Ok(a)
    }
}
