use std::fmt;
use std::str::FromStr;

use crate::error::{ConfigError, SamplingError};

/// How many actions the traverser samples at each of its infosets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RobustK {
    Count(usize),
    /// `k = max_I |A(I)|`: every action everywhere.
    Max,
}

/// The traverser's per-infoset sampling distribution `σ^{rs(k)}_i`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RobustDist {
    #[default]
    Uniform,
    /// Sample from the current strategy itself. Only meaningful for `k = 1`.
    OnPolicy,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SamplingScheme {
    /// One traverser action drawn from the current strategy.
    Outcome,
    /// Every traverser action.
    External,
    Robust { k: RobustK, dist: RobustDist },
}

/// What the traverser does at one infoset.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Draw {
    All,
    /// `k` distinct actions uniformly at random.
    Uniform(usize),
    /// One action from `σ_i`.
    OnPolicy,
}

impl SamplingScheme {
    pub fn robust(k: usize) -> Result<Self, SamplingError> {
        if k == 0 {
            return Err(SamplingError::ZeroK);
        }
        Ok(SamplingScheme::Robust { k: RobustK::Count(k), dist: RobustDist::Uniform })
    }

    pub fn robust_max() -> Self {
        SamplingScheme::Robust { k: RobustK::Max, dist: RobustDist::Uniform }
    }

    /// Robust sampling with `σ^{rs(1)}_i = σ_i`.
    pub fn robust_on_policy() -> Self {
        SamplingScheme::Robust { k: RobustK::Count(1), dist: RobustDist::OnPolicy }
    }

    pub fn validate(&self) -> Result<(), SamplingError> {
        match *self {
            SamplingScheme::Robust { k: RobustK::Count(0), .. } => Err(SamplingError::ZeroK),
            SamplingScheme::Robust { k: RobustK::Count(k), dist: RobustDist::OnPolicy } if k != 1 => {
                Err(SamplingError::OnPolicyK(k))
            }
            SamplingScheme::Robust { k: RobustK::Max, dist: RobustDist::OnPolicy } => {
                Err(SamplingError::OnPolicyK(usize::MAX))
            }
            _ => Ok(()),
        }
    }

    pub(crate) fn draw(&self, num_actions: usize, max_actions: usize) -> Draw {
        match *self {
            SamplingScheme::External => Draw::All,
            SamplingScheme::Outcome => Draw::OnPolicy,
            SamplingScheme::Robust { dist: RobustDist::OnPolicy, .. } => Draw::OnPolicy,
            SamplingScheme::Robust { k, dist: RobustDist::Uniform } => {
                let k = match k {
                    RobustK::Count(k) => k,
                    RobustK::Max => max_actions,
                };
                if k >= num_actions {
                    Draw::All
                } else {
                    Draw::Uniform(k)
                }
            }
        }
    }

    /// `σ^{rs(k)}_i(a|I)`: the probability that action `a` is among the sampled ones.
    pub(crate) fn inclusion(&self, sigma: &[f64], a: usize, max_actions: usize) -> f64 {
        match self.draw(sigma.len(), max_actions) {
            Draw::All => 1.0,
            Draw::Uniform(k) => k as f64 / sigma.len() as f64,
            Draw::OnPolicy => sigma[a],
        }
    }
}

impl fmt::Display for SamplingScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SamplingScheme::Outcome => write!(f, "outcome"),
            SamplingScheme::External => write!(f, "external"),
            SamplingScheme::Robust { k: RobustK::Max, .. } => write!(f, "robust:max"),
            SamplingScheme::Robust { k: RobustK::Count(k), dist: RobustDist::Uniform } => write!(f, "robust:{}", k),
            SamplingScheme::Robust { k: RobustK::Count(k), dist: RobustDist::OnPolicy } => {
                write!(f, "robust:{}:on-policy", k)
            }
        }
    }
}

impl FromStr for SamplingScheme {
    type Err = ConfigError;

    /// `outcome`, `external`, `robust:<k>`, `robust:max`, `robust:1:on-policy`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || ConfigError::invalid("sampling", format!("`{}` is not outcome, external, robust:<k> or robust:max", s));
        let scheme = match s.trim().split(':').collect::<Vec<_>>().as_slice() {
            ["outcome"] | ["os"] => SamplingScheme::Outcome,
            ["external"] | ["es"] => SamplingScheme::External,
            ["robust", "max"] => SamplingScheme::robust_max(),
            ["robust", k] => SamplingScheme::Robust { k: RobustK::Count(k.parse().map_err(|_| bad())?), dist: RobustDist::Uniform },
            ["robust", k, "on-policy"] => {
                SamplingScheme::Robust { k: RobustK::Count(k.parse().map_err(|_| bad())?), dist: RobustDist::OnPolicy }
            }
            _ => return Err(bad()),
        };
        scheme.validate().map_err(|e| ConfigError::invalid("sampling", e.to_string()))?;
        Ok(scheme)
    }
}
