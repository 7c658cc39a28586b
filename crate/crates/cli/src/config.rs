use std::fmt;
use std::path::Path;

use influence::{Environment, EqualizingTest, TypeDistribution};
use serde::Deserialize;

/// Malformed or unreadable scenario file; maps to exit code 2.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "config error: {}", self.0)
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub environment: EnvironmentConfig,
    pub distribution: DistributionConfig,
    #[serde(default)]
    pub solver: SolverConfig,
    /// Oracle command: let the outside option be chosen too.
    #[serde(default)]
    pub coercion: bool,
    #[serde(default)]
    pub welfare: WelfareConfig,
    #[serde(default)]
    pub sweep: Option<SweepConfig>,
    #[serde(default)]
    pub figures: FiguresConfig,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnvironmentConfig {
    pub mu_low: f64,
    pub mu_prior: f64,
    pub mu_high: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(
    tag = "kind",
    content = "params",
    rename_all = "snake_case",
    deny_unknown_fields
)]
pub enum DistributionConfig {
    Uniform(UniformParams),
    PiecewiseCdf(PiecewiseParams),
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UniformParams {
    pub low: f64,
    pub high: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PiecewiseParams {
    /// `(theta, F(theta))` pairs from `F = 0` to `F = 1`.
    pub knots: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MenuChoice {
    #[default]
    Optimal,
    Extended,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverConfig {
    pub grid_size: usize,
    pub oracle_n: usize,
    pub menu: MenuChoice,
    pub tolerances: Tolerances,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            grid_size: 501,
            oracle_n: 200,
            menu: MenuChoice::Optimal,
            tolerances: Tolerances::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    /// Largest accepted incentive or participation violation.
    pub constraint: f64,
    /// Largest accepted oracle revenue gap.
    pub oracle_gap: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            constraint: 1e-9,
            oracle_gap: 0.01,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct WelfareConfig {
    pub equalizing: EqualizingTest,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
#[allow(clippy::enum_variant_names)]
pub enum SweepParameter {
    MuLow,
    MuPrior,
    MuHigh,
}

impl SweepParameter {
    pub fn name(self) -> &'static str {
        match self {
            SweepParameter::MuLow => "mu_low",
            SweepParameter::MuPrior => "mu_prior",
            SweepParameter::MuHigh => "mu_high",
        }
    }
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub parameter: SweepParameter,
    pub from: f64,
    pub to: f64,
    pub points: usize,
    #[serde(default)]
    pub workers: Option<usize>,
}

impl SweepConfig {
    pub fn values(&self) -> Vec<f64> {
        if self.points == 1 {
            return vec![self.from];
        }
        (0..self.points)
            .map(|k| self.from + (self.to - self.from) * k as f64 / (self.points - 1) as f64)
            .collect()
    }
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FiguresConfig {
    /// Prior reduction used for the comparative-statics series.
    pub statics_delta: f64,
}

impl Default for FiguresConfig {
    fn default() -> Self {
        FiguresConfig {
            statics_delta: 0.025,
        }
    }
}

impl ScenarioConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let cfg: ScenarioConfig = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            ConfigError(format!("at `{path}`: {}", e.inner()))
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), ConfigError> {
        self.env()?;
        self.dist()?;
        if self.solver.grid_size < 2 {
            return Err(ConfigError(
                "at `solver.grid_size`: must be at least 2".into(),
            ));
        }
        if self.solver.oracle_n < 2 {
            return Err(ConfigError(
                "at `solver.oracle_n`: must be at least 2".into(),
            ));
        }
        if let Some(s) = &self.sweep {
            if s.points == 0 {
                return Err(ConfigError("at `sweep.points`: must be positive".into()));
            }
            if !(s.from.is_finite() && s.to.is_finite()) {
                return Err(ConfigError("at `sweep`: range must be finite".into()));
            }
            if s.workers == Some(0) {
                return Err(ConfigError("at `sweep.workers`: must be positive".into()));
            }
        }
        if self.figures.statics_delta.is_nan() || self.figures.statics_delta < 0.0 {
            return Err(ConfigError(
                "at `figures.statics_delta`: must be nonnegative".into(),
            ));
        }
        Ok(())
    }

    pub fn env(&self) -> Result<Environment, ConfigError> {
        let e = self.environment;
        Environment::new(e.mu_low, e.mu_prior, e.mu_high)
            .map_err(|err| ConfigError(format!("at `environment`: {err}")))
    }

    pub fn dist(&self) -> Result<TypeDistribution, ConfigError> {
        let d = match &self.distribution {
            DistributionConfig::Uniform(p) => TypeDistribution::uniform(p.low, p.high),
            DistributionConfig::PiecewiseCdf(p) => {
                TypeDistribution::piecewise_linear_cdf(p.knots.clone())
            }
        };
        d.map_err(|err| ConfigError(format!("at `distribution.params`: {err}")))
    }
}
