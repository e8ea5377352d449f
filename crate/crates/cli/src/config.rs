//! Experiment configuration: one JSON file per run.

use serde::{Deserialize, Serialize};
use subexp_core::{
    Budget, Family, HazardModel, PowerLog, PowerLogTerm, Regime, RvMetadata, SignMode,
    SurvivalComponent, TailDistribution, WeightSequence,
};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub distribution: DistributionConfig,
    pub weights: WeightsConfig,
    #[serde(default)]
    pub expansion: ExpansionConfig,
    pub grid: GridConfig,
    #[serde(default)]
    pub oracle: Budget,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DistributionConfig {
    pub tail: TailSpec,
    /// Anchor of the hazard representation.
    pub t0: f64,
    /// `P(X < 0)` for a two-sided law `±Y`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lower_mass: Option<f64>,
    /// Shorthand for `lower_mass = 0.5`.
    #[serde(default)]
    pub symmetric: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase", deny_unknown_fields)]
pub enum TailSpec {
    Weibull {
        shape: f64,
    },
    #[serde(rename = "logweibull")]
    LogWeibull {
        shape: f64,
    },
    #[serde(rename = "lognormal2")]
    LogNormal2 {
        theta: f64,
    },
    /// Hazard `Σ c t^p (log t)^q`, given as `[c, p, q]` triples.
    Hazard {
        terms: Vec<[f64; 3]>,
        sbar_t0: f64,
        metadata: RvMetadata,
        #[serde(default = "default_smooth_order")]
        smooth_order: usize,
        /// Lower end of the linear body below `t0`.
        #[serde(default)]
        body_lower: f64,
    },
    /// Survival `Σ w exp(-Λ(s t))`.
    Survival {
        components: Vec<SurvivalComponent>,
        metadata: RvMetadata,
        #[serde(default = "default_smooth_order")]
        smooth_order: usize,
        #[serde(default)]
        body_lower: f64,
    },
}

fn default_smooth_order() -> usize {
    subexp_core::hazard::BUILTIN_SMOOTH_ORDER
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightsConfig {
    /// Explicit weights `c_1, c_2, ...`.
    pub weights: Vec<f64>,
    /// Continue geometrically after the last explicit weight.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generator: Option<GeneratorConfig>,
    /// Summability exponent.
    #[serde(default = "default_delta")]
    pub delta: f64,
}

fn default_delta() -> f64 {
    0.5
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorConfig {
    pub ratio: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExpansionConfig {
    #[serde(default)]
    pub order: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub regime_override: Option<Regime>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Spacing {
    #[default]
    Geometric,
    Linear,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub t_min: f64,
    pub t_max: f64,
    pub points: usize,
    #[serde(default)]
    pub spacing: Spacing,
}

impl GridConfig {
    pub fn points(&self) -> Vec<f64> {
        if self.points == 1 {
            return vec![self.t_min];
        }
        let last = (self.points - 1) as f64;
        (0..self.points)
            .map(|i| {
                let s = i as f64 / last;
                match self.spacing {
                    Spacing::Geometric => self.t_min * (self.t_max / self.t_min).powf(s),
                    Spacing::Linear => self.t_min + (self.t_max - self.t_min) * s,
                }
            })
            .collect()
    }
}

fn schema(path: &str, message: impl Into<String>) -> CliError {
    CliError::Schema {
        path: path.into(),
        message: message.into(),
    }
}

impl Config {
    /// Parse and validate; schema errors carry the path of the offending key.
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let config: Config = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            schema(&path, e.into_inner().to_string())
        })?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let w = &self.weights;
        if w.weights.is_empty() {
            return Err(schema("weights.weights", "weight list must not be empty"));
        }
        if let Some(i) = w.weights.iter().position(|c| !c.is_finite()) {
            return Err(schema(&format!("weights.weights[{i}]"), "weights must be finite"));
        }
        let g = &self.grid;
        if g.points == 0 {
            return Err(schema("grid.points", "need at least one grid point"));
        }
        if !(g.t_min > 0.0 && g.t_min <= g.t_max && g.t_max.is_finite()) {
            return Err(schema("grid", "need 0 < t_min <= t_max < inf"));
        }
        if !(self.distribution.t0.is_finite() && self.distribution.t0 > 0.0) {
            return Err(schema("distribution.t0", "t0 must be positive and finite"));
        }
        if let Some(p) = self.distribution.lower_mass {
            if self.distribution.symmetric {
                return Err(schema(
                    "distribution.lower_mass",
                    "give either lower_mass or symmetric, not both",
                ));
            }
            if !(p > 0.0 && p < 1.0) {
                return Err(schema("distribution.lower_mass", "must lie in (0, 1)"));
            }
        }
        if self.oracle.n == 0 {
            return Err(schema("oracle.n", "sample count must be positive"));
        }
        Ok(())
    }

    pub fn grid(&self) -> Vec<f64> {
        self.grid.points()
    }

    pub fn distribution(&self) -> Result<TailDistribution, CliError> {
        let d = &self.distribution;
        let dist = match &d.tail {
            TailSpec::Weibull { shape } => TailDistribution::builtin(Family::Weibull { shape: *shape }, d.t0)?,
            TailSpec::LogWeibull { shape } => {
                TailDistribution::builtin(Family::LogWeibull { shape: *shape }, d.t0)?
            }
            TailSpec::LogNormal2 { theta } => {
                TailDistribution::builtin(Family::LogNormal2 { theta: *theta }, d.t0)?
            }
            TailSpec::Hazard {
                terms,
                sbar_t0,
                metadata,
                smooth_order,
                body_lower,
            } => {
                let rate = PowerLog::new(terms.iter().map(|&[c, p, q]| PowerLogTerm::new(c, p, q)));
                let tail = HazardModel::from_hazard(rate, d.t0, *sbar_t0, *metadata, *smooth_order)?;
                TailDistribution::custom(tail, *body_lower)?
            }
            TailSpec::Survival {
                components,
                metadata,
                smooth_order,
                body_lower,
            } => {
                let tail = HazardModel::from_survival(components.clone(), d.t0, *metadata, *smooth_order)?;
                TailDistribution::custom(tail, *body_lower)?
            }
        };
        Ok(match (d.symmetric, d.lower_mass) {
            (true, _) => dist.symmetric()?,
            (false, Some(p)) => dist.two_sided(p)?,
            (false, None) => dist,
        })
    }

    pub fn weights(&self) -> Result<WeightSequence, CliError> {
        let w = &self.weights;
        let two_sided = self.distribution.symmetric || self.distribution.lower_mass.is_some();
        let mode = if two_sided { SignMode::Balanced } else { SignMode::OneSided };
        Ok(WeightSequence::from_list(
            &w.weights,
            w.generator.map(|g| g.ratio),
            w.delta,
            mode,
        )?)
    }
}
