//! Run configuration, read from and echoed to TOML.
//!
//! ```toml
//! [scenario]
//! kind = "parallel"
//! a_sigma = 0.5
//! dd_over_sigma = 1.0
//! dz_over_sigma = 0.5
//!
//! [detector]
//! omega_sigma = 0.1
//!
//! [quadrature]
//! rel_tol = 1e-6
//!
//! [sweep]
//! parameter = "dz_over_sigma"
//! start = 0.05
//! stop = 3.0
//! points = 60
//! quantities = ["p", "x", "concurrence"]
//! ```

use serde::{Deserialize, Serialize};
use udw_harvest::detector::{DetectorError, Scenario, ScenarioConfig};
use udw_harvest::harvest::{Quantity, SweepSpec, SweptParameter, DEFAULT_THRESHOLD_TOL};
use udw_harvest::quad::QuadratureSpec;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot parse configuration: {0}")]
    Parse(toml::de::Error),
    #[error("invalid [scenario] or [detector]: {0}")]
    Scenario(DetectorError),
    #[error("invalid [quadrature]: {0}")]
    Quadrature(String),
    #[error("invalid [sweep]: {0}")]
    Sweep(String),
    #[error("invalid [threshold]: {0}")]
    Threshold(String),
    #[error("the {0} command needs a [{1}] section")]
    MissingSection(&'static str, &'static str),
}

impl From<toml::de::Error> for ConfigError {
    fn from(e: toml::de::Error) -> Self {
        Self::Parse(e)
    }
}

impl From<DetectorError> for ConfigError {
    fn from(e: DetectorError) -> Self {
        Self::Scenario(e)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub scenario: ScenarioSection,
    pub detector: DetectorSection,
    #[serde(default)]
    pub quadrature: QuadratureSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threshold: Option<ThresholdSection>,
    /// Written into manifests and ignored when a manifest is read back as a
    /// configuration.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub run: Option<RunSection>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSection {
    pub kind: Scenario,
    #[serde(default)]
    pub a_sigma: f64,
    pub dd_over_sigma: f64,
    pub dz_over_sigma: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetectorSection {
    pub omega_sigma: f64,
}

/// Overrides of the double-integral defaults. Missing keys keep their
/// defaults.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadratureSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rel_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub abs_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_subdivisions: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub truncation_exponent: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon_schedule: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub extrapolation_order: Option<usize>,
}

impl QuadratureSection {
    pub fn resolve(&self) -> Result<QuadratureSpec, ConfigError> {
        let d = QuadratureSpec::two_dimensional();
        let spec = QuadratureSpec {
            rel_tol: self.rel_tol.unwrap_or(d.rel_tol),
            abs_tol: self.abs_tol.unwrap_or(d.abs_tol),
            max_subdivisions: self.max_subdivisions.unwrap_or(d.max_subdivisions),
            truncation_exponent: self.truncation_exponent.unwrap_or(d.truncation_exponent),
            epsilon_schedule: self.epsilon_schedule.clone().unwrap_or(d.epsilon_schedule),
            extrapolation_order: self.extrapolation_order.unwrap_or(d.extrapolation_order),
        };
        spec.validate()
            .map_err(|e| ConfigError::Quadrature(e.to_string()))?;
        Ok(spec)
    }

    fn from_spec(spec: &QuadratureSpec) -> Self {
        Self {
            rel_tol: Some(spec.rel_tol),
            abs_tol: Some(spec.abs_tol),
            max_subdivisions: Some(spec.max_subdivisions),
            truncation_exponent: Some(spec.truncation_exponent),
            epsilon_schedule: Some(spec.epsilon_schedule.clone()),
            extrapolation_order: Some(spec.extrapolation_order),
        }
    }
}

/// The swept parameter and its grid, given either as an explicit list or as
/// `points` equally spaced values from `start` to `stop`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub parameter: SweptParameter,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stop: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<usize>,
    #[serde(default = "default_quantities")]
    pub quantities: Vec<Quantity>,
}

fn default_quantities() -> Vec<Quantity> {
    vec![Quantity::P, Quantity::X, Quantity::Concurrence]
}

impl SweepSection {
    pub fn resolve_grid(&self) -> Result<Vec<f64>, ConfigError> {
        match (&self.grid, self.start, self.stop, self.points) {
            (Some(grid), None, None, None) => Ok(grid.clone()),
            (None, Some(start), Some(stop), Some(points)) => Ok(linspace(start, stop, points)),
            _ => Err(ConfigError::Sweep(
                "give either `grid` or all of `start`, `stop` and `points`".into(),
            )),
        }
    }
}

/// `points` equally spaced values from `start` to `stop`, both included.
pub fn linspace(start: f64, stop: f64, points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![start],
        n => (0..n)
            .map(|k| {
                if k + 1 == n {
                    stop
                } else {
                    start + (stop - start) * k as f64 / (n - 1) as f64
                }
            })
            .collect(),
    }
}

/// Which threshold to locate at every grid point of the sweep.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ThresholdTarget {
    DdMax,
    AMax,
}

impl ThresholdTarget {
    fn parameter(self) -> SweptParameter {
        match self {
            Self::DdMax => SweptParameter::DeltaD,
            Self::AMax => SweptParameter::A,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThresholdSection {
    pub target: ThresholdTarget,
    /// Initial bracket of the search variable. Entanglement must be
    /// harvested at its lower end.
    pub bracket: [f64; 2],
    #[serde(default = "default_threshold_tol")]
    pub tol: f64,
}

fn default_threshold_tol() -> f64 {
    DEFAULT_THRESHOLD_TOL
}

/// Manifest information about a finished run.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RunSection {
    pub artifact_version: String,
    pub command: String,
    pub output: String,
    pub threads: usize,
    pub wall_time_seconds: f64,
    pub rows_converged: Vec<bool>,
    /// Row index and message of every row that failed outright.
    pub row_errors: Vec<String>,
}

/// A threshold search repeated over the grid of a sweep.
#[derive(Clone, Debug, PartialEq)]
pub struct ThresholdPlan {
    pub template: ScenarioConfig,
    pub parameter: SweptParameter,
    pub grid: Vec<f64>,
    pub target: ThresholdTarget,
    pub bracket: (f64, f64),
    pub tol: f64,
}

impl Config {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let mut config: Config = toml::from_str(text)?;
        config.run = None;
        Ok(config)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration serializes to TOML")
    }

    pub fn scenario_config(&self) -> Result<ScenarioConfig, ConfigError> {
        let s = &self.scenario;
        Ok(ScenarioConfig::new(
            s.kind,
            s.a_sigma,
            s.dd_over_sigma,
            s.dz_over_sigma,
            self.detector.omega_sigma,
        )?)
    }

    pub fn quadrature_spec(&self) -> Result<QuadratureSpec, ConfigError> {
        self.quadrature.resolve()
    }

    pub fn sweep_spec(&self) -> Result<SweepSpec, ConfigError> {
        let sweep = self
            .sweep
            .as_ref()
            .ok_or(ConfigError::MissingSection("sweep", "sweep"))?;
        let grid = sweep.resolve_grid()?;
        let spec = SweepSpec {
            template: self.scenario_config()?,
            parameter: sweep.parameter,
            grid,
            quantities: sweep.quantities.clone(),
        };
        spec.configs()
            .map_err(|e| ConfigError::Sweep(e.to_string()))?;
        Ok(spec)
    }

    pub fn threshold_plan(&self) -> Result<ThresholdPlan, ConfigError> {
        let sweep = self
            .sweep
            .as_ref()
            .ok_or(ConfigError::MissingSection("threshold", "sweep"))?;
        let threshold = self
            .threshold
            .as_ref()
            .ok_or(ConfigError::MissingSection("threshold", "threshold"))?;
        if sweep.parameter == threshold.target.parameter() {
            return Err(ConfigError::Threshold(format!(
                "cannot sweep {} while searching for its threshold",
                sweep.parameter.name()
            )));
        }
        let [lo, hi] = threshold.bracket;
        if !(lo.is_finite() && hi.is_finite() && hi > lo && threshold.tol > 0.0) {
            return Err(ConfigError::Threshold(format!(
                "bracket must satisfy lo < hi and tol must be positive, got [{lo}, {hi}] and {}",
                threshold.tol
            )));
        }
        let grid = sweep.resolve_grid()?;
        let template = self.scenario_config()?;
        let spec = SweepSpec {
            template,
            parameter: sweep.parameter,
            grid: grid.clone(),
            quantities: Vec::new(),
        };
        spec.configs()
            .map_err(|e| ConfigError::Sweep(e.to_string()))?;
        Ok(ThresholdPlan {
            template,
            parameter: sweep.parameter,
            grid,
            target: threshold.target,
            bracket: (lo, hi),
            tol: threshold.tol,
        })
    }

    /// The configuration with every default filled in and the grid written
    /// out explicitly, so that it reproduces the same run when read back.
    pub fn resolved(&self) -> Result<Config, ConfigError> {
        let quadrature = QuadratureSection::from_spec(&self.quadrature_spec()?);
        let sweep = match &self.sweep {
            Some(s) => Some(SweepSection {
                parameter: s.parameter,
                grid: Some(s.resolve_grid()?),
                start: None,
                stop: None,
                points: None,
                quantities: s.quantities.clone(),
            }),
            None => None,
        };
        Ok(Config {
            quadrature,
            sweep,
            run: None,
            ..self.clone()
        })
    }

    /// Replaces the relative tolerance of the double integrals.
    pub fn with_rel_tol(mut self, rel_tol: f64) -> Self {
        self.quadrature.rel_tol = Some(rel_tol);
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const EXAMPLE: &str = r#"
[scenario]
kind = "anti_parallel"
a_sigma = 0.5
dd_over_sigma = 1.0
dz_over_sigma = 0.5

[detector]
omega_sigma = 0.1

[sweep]
parameter = "dz_over_sigma"
start = 0.1
stop = 1.0
points = 4
"#;

    #[test]
    fn parses_the_documented_layout() {
        let c = Config::from_toml(EXAMPLE).unwrap();
        let cfg = c.scenario_config().unwrap();
        assert_eq!(cfg.scenario, Scenario::AntiParallel);
        assert_eq!(
            (cfg.a, cfg.delta_d, cfg.delta_z, cfg.omega()),
            (0.5, 1.0, 0.5, 0.1)
        );
        let s = c.sweep_spec().unwrap();
        assert_eq!(s.parameter, SweptParameter::DeltaZ);
        assert_eq!(s.grid.len(), 4);
        assert_eq!(s.grid[3], 1.0);
        assert_eq!(s.quantities, default_quantities());
        assert_eq!(
            c.quadrature_spec().unwrap(),
            QuadratureSpec::two_dimensional()
        );
    }

    #[test]
    fn resolved_configuration_round_trips() {
        let c = Config::from_toml(EXAMPLE).unwrap().resolved().unwrap();
        let back = Config::from_toml(&c.to_toml()).unwrap();
        assert_eq!(back, c);
        assert_eq!(back.resolved().unwrap(), c);
    }

    #[test]
    fn unknown_keys_are_reported_with_their_name() {
        let bad = EXAMPLE.replace("omega_sigma", "omega");
        let e = Config::from_toml(&bad).unwrap_err().to_string();
        assert!(e.contains("omega"), "{e}");
    }

    #[test]
    fn zero_acceleration_needs_the_static_scenario() {
        let bad = EXAMPLE.replace("a_sigma = 0.5", "a_sigma = 0.0");
        let e = Config::from_toml(&bad)
            .unwrap()
            .scenario_config()
            .unwrap_err();
        assert!(
            e.to_string()
                .contains("scenario = Inertial required when a = 0"),
            "{e}"
        );
    }

    #[test]
    fn grid_must_be_given_one_way() {
        let bad = EXAMPLE.replace("points = 4", "points = 4\ngrid = [0.5]");
        let e = Config::from_toml(&bad).unwrap().sweep_spec().unwrap_err();
        assert!(matches!(e, ConfigError::Sweep(_)));
    }

    #[test]
    fn linspace_hits_both_ends() {
        let g = linspace(0.05, 5.0, 100);
        assert_eq!((g[0], g[99]), (0.05, 5.0));
        assert!(g.windows(2).all(|w| w[1] > w[0]));
    }
}
