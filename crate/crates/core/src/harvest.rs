//! Harvested entanglement: concurrence of the detector pair, parameter
//! sweeps and the search for the separation or acceleration beyond which no
//! entanglement is harvested.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::detector::{
    c_correlator, nonlocal_correlator, pd_raw_oracle, transition_probability, DetectorError,
    Estimate, Scenario, ScenarioConfig,
};
use crate::quad::QuadratureSpec;
use crate::ComplexValue;

/// Relative agreement required between the transition probabilities of the
/// two detectors.
pub const CONGRUENCE_TOLERANCE: f64 = 1e-9;

/// Default width of the final bracket of a threshold search.
pub const DEFAULT_THRESHOLD_TOL: f64 = 1e-3;

/// Interior points sampled across a threshold bracket to detect multiple
/// crossings before bisection starts.
const SCAN_POINTS: usize = 8;

/// Upper limit for growing a threshold bracket that does not yet contain a
/// crossing.
const BRACKET_GROWTH_LIMIT: f64 = 64.0;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum HarvestError {
    #[error("the sweep grid is empty")]
    EmptyGrid,
    #[error("the sweep grid must be strictly increasing")]
    GridNotIncreasing,
    #[error("grid value {value} of {parameter:?}: {source}")]
    InvalidGridPoint {
        parameter: SweptParameter,
        value: f64,
        source: DetectorError,
    },
    #[error("no entanglement is harvested at the lower end {lo} of the bracket, so there is no threshold")]
    NoThreshold { lo: f64 },
    #[error("entanglement is still harvested at {hi}, no threshold below it")]
    NoUpperCrossing { hi: f64 },
    #[error("invalid threshold bracket ({lo}, {hi}) or tolerance {tol}")]
    InvalidBracket { lo: f64, hi: f64, tol: f64 },
    #[error("detectors A and B have different transition probabilities: {p_a} and {p_b}")]
    NotCongruent { p_a: f64, p_b: f64 },
    #[error("the acceleration threshold needs an accelerated scenario")]
    InertialAmax,
    #[error(transparent)]
    Detector(#[from] DetectorError),
}

/// Concurrence `2·max(0, |x| − √(p_a·p_b))` of the detector pair at leading
/// order in the coupling.
pub fn concurrence(p_a: f64, p_b: f64, x: ComplexValue) -> f64 {
    2.0 * (x.norm() - (p_a * p_b).sqrt()).max(0.0)
}

/// Observables that a sweep can request.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Quantity {
    P,
    X,
    C,
    Concurrence,
}

/// Observables of one detector pair, per λ².
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HarvestResult {
    pub p_a: f64,
    pub p_b: f64,
    pub err_p: f64,
    /// Nonlocal correlator, when requested.
    pub x: Option<ComplexValue>,
    pub err_x: Option<f64>,
    /// Cross-correlator, when requested.
    pub c_corr: Option<ComplexValue>,
    pub err_c: Option<f64>,
    /// Whether every computed quantity met its tolerance.
    pub converged: bool,
}

impl HarvestResult {
    pub fn abs_x(&self) -> Option<f64> {
        self.x.map(|x| x.norm())
    }

    /// Concurrence recomputed from the stored probabilities and correlator.
    pub fn concurrence(&self) -> Option<f64> {
        self.x.map(|x| concurrence(self.p_a, self.p_b, x))
    }

    /// `|X| − √(P_A P_B)`, positive exactly when entanglement is harvested.
    pub fn margin(&self) -> Option<f64> {
        self.x.map(|x| x.norm() - (self.p_a * self.p_b).sqrt())
    }
}

/// Specification for the transition probability, which is a one-dimensional
/// integral and is resolved more tightly than the double integrals.
fn probability_spec(quad: &QuadratureSpec) -> QuadratureSpec {
    let one = QuadratureSpec::one_dimensional();
    QuadratureSpec {
        rel_tol: quad.rel_tol.min(one.rel_tol),
        abs_tol: quad.abs_tol.min(one.abs_tol),
        max_subdivisions: quad.max_subdivisions.max(one.max_subdivisions),
        ..quad.clone()
    }
}

fn probability(cfg: &ScenarioConfig, quad: &QuadratureSpec) -> Result<Estimate<f64>, DetectorError> {
    transition_probability(cfg, &probability_spec(quad))
}

/// Checks that both detectors of `cfg` have the same transition probability,
/// by integrating along each worldline separately.
pub fn check_congruence(cfg: &ScenarioConfig, quad: &QuadratureSpec) -> Result<(), HarvestError> {
    let (a, b) = cfg.trajectories()?;
    let spec = probability_spec(quad);
    let p_a = pd_raw_oracle(&a, cfg.omega(), &spec)?.value;
    let p_b = pd_raw_oracle(&b, cfg.omega(), &spec)?.value;
    if (p_a - p_b).abs() <= CONGRUENCE_TOLERANCE * p_a.abs().max(p_b.abs()) {
        Ok(())
    } else {
        Err(HarvestError::NotCongruent { p_a, p_b })
    }
}

/// Evaluates the requested observables for one configuration. The
/// transition probability is always computed; `X` is computed when `X` or
/// the concurrence is requested.
pub fn harvest(
    cfg: &ScenarioConfig,
    quantities: &[Quantity],
    quad: &QuadratureSpec,
) -> Result<HarvestResult, DetectorError> {
    let p = probability(cfg, quad)?;
    let mut result = HarvestResult {
        p_a: p.value,
        p_b: p.value,
        err_p: p.error_estimate,
        x: None,
        err_x: None,
        c_corr: None,
        err_c: None,
        converged: p.converged,
    };
    if quantities.iter().any(|q| matches!(q, Quantity::X | Quantity::Concurrence)) {
        let x = nonlocal_correlator(cfg, quad)?;
        result.x = Some(x.value);
        result.err_x = Some(x.error_estimate);
        result.converged &= x.converged;
    }
    if quantities.contains(&Quantity::C) {
        let c = c_correlator(cfg, quad)?;
        result.c_corr = Some(c.value);
        result.err_c = Some(c.error_estimate);
        result.converged &= c.converged;
    }
    Ok(result)
}

/// Parameter varied along a sweep.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SweptParameter {
    #[serde(rename = "a_sigma")]
    A,
    #[serde(rename = "dd_over_sigma")]
    DeltaD,
    #[serde(rename = "dz_over_sigma")]
    DeltaZ,
}

impl SweptParameter {
    pub fn name(self) -> &'static str {
        match self {
            Self::A => "a_sigma",
            Self::DeltaD => "dd_over_sigma",
            Self::DeltaZ => "dz_over_sigma",
        }
    }

    /// `template` with this parameter set to `value`. Setting the
    /// acceleration of an accelerated pair to zero yields the static pair,
    /// which is the limit of every accelerated motion.
    pub fn apply(self, template: &ScenarioConfig, value: f64) -> Result<ScenarioConfig, DetectorError> {
        let cfg = match self {
            Self::A if value == 0.0 => ScenarioConfig {
                scenario: Scenario::Inertial,
                ..template.with_a(0.0)
            },
            Self::A => template.with_a(value),
            Self::DeltaD => template.with_delta_d(value),
            Self::DeltaZ => template.with_delta_z(value),
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

/// A one-parameter family of configurations and the observables wanted at
/// each of them.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepSpec {
    pub template: ScenarioConfig,
    pub parameter: SweptParameter,
    pub grid: Vec<f64>,
    pub quantities: Vec<Quantity>,
}

impl SweepSpec {
    /// Resolves every grid point to a configuration.
    pub fn configs(&self) -> Result<Vec<ScenarioConfig>, HarvestError> {
        if self.grid.is_empty() {
            return Err(HarvestError::EmptyGrid);
        }
        if self.grid.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(HarvestError::GridNotIncreasing);
        }
        self.grid
            .iter()
            .map(|&value| {
                self.parameter
                    .apply(&self.template, value)
                    .map_err(|source| HarvestError::InvalidGridPoint {
                        parameter: self.parameter,
                        value,
                        source,
                    })
            })
            .collect()
    }
}

/// One grid point of a sweep. Failures are recorded per row.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub swept_value: f64,
    pub outcome: Result<HarvestResult, DetectorError>,
}

impl SweepRow {
    pub fn converged(&self) -> bool {
        matches!(&self.outcome, Ok(r) if r.converged)
    }
}

/// Rows of a sweep in grid order.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepTable {
    pub parameter: SweptParameter,
    pub rows: Vec<SweepRow>,
}

impl SweepTable {
    pub fn all_converged(&self) -> bool {
        self.rows.iter().all(SweepRow::converged)
    }
}

/// Evaluates `spec` at every grid point. Points are evaluated in parallel
/// and each row depends only on its own configuration, so the table does not
/// depend on the number of worker threads.
pub fn run_sweep(spec: &SweepSpec, quad: &QuadratureSpec) -> Result<SweepTable, HarvestError> {
    quad.validate().map_err(DetectorError::from)?;
    let configs = spec.configs()?;
    check_congruence(&configs[0], quad)?;
    let rows = spec
        .grid
        .par_iter()
        .zip(configs.par_iter())
        .map(|(&swept_value, cfg)| SweepRow {
            swept_value,
            outcome: harvest(cfg, &spec.quantities, quad),
        })
        .collect();
    Ok(SweepTable {
        parameter: spec.parameter,
        rows,
    })
}

/// Located threshold of a harvesting region.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThresholdResult {
    /// Midpoint of the final bracket.
    pub value: f64,
    /// Entanglement is harvested at `bracket.0` and not at `bracket.1`.
    pub bracket: (f64, f64),
    /// Width of the final bracket.
    pub tolerance_achieved: f64,
    /// Number of bisection steps.
    pub iterations: usize,
    /// Set when the margin changes sign more than once across the initial
    /// bracket. The smallest crossing is returned.
    pub multiple_crossings: bool,
    /// Whether every evaluation met its quadrature tolerance.
    pub converged: bool,
}

/// Bisection for the smallest zero crossing, from positive to non-positive,
/// of `margin` on `bracket`.
///
/// The bracket is first sampled at a few interior points to detect several
/// crossings. If the margin is still positive at the upper end, the bracket
/// is grown geometrically up to a fixed factor.
pub fn bisect_threshold<M>(margin: M, bracket: (f64, f64), tol: f64) -> Result<ThresholdResult, HarvestError>
where
    M: Fn(f64) -> Result<Estimate<f64>, HarvestError> + Sync,
{
    let (lo, mut hi) = bracket;
    if !(lo.is_finite() && hi.is_finite() && hi > lo && tol > 0.0) {
        return Err(HarvestError::InvalidBracket { lo, hi, tol });
    }
    let mut converged = true;
    let eval = |x: f64, converged: &mut bool| -> Result<f64, HarvestError> {
        let m = margin(x)?;
        *converged &= m.converged;
        Ok(m.value)
    };
    let first = eval(lo, &mut converged)?;
    if first <= 0.0 {
        return Err(HarvestError::NoThreshold { lo });
    }
    let limit = lo + (hi - lo) * BRACKET_GROWTH_LIMIT;
    let (points, values) = loop {
        let points: Vec<f64> = (0..=SCAN_POINTS + 1)
            .map(|k| lo + (hi - lo) * k as f64 / (SCAN_POINTS + 1) as f64)
            .collect();
        let scanned: Vec<Result<Estimate<f64>, HarvestError>> = points[1..].par_iter().map(|&x| margin(x)).collect();
        let mut values = vec![first];
        for m in scanned {
            let m = m?;
            converged &= m.converged;
            values.push(m.value);
        }
        if values.iter().any(|&v| v <= 0.0) {
            break (points, values);
        }
        if hi >= limit {
            return Err(HarvestError::NoUpperCrossing { hi });
        }
        hi = lo + 2.0 * (hi - lo);
    };
    let sign_changes = values.windows(2).filter(|w| (w[0] > 0.0) != (w[1] > 0.0)).count();
    let k = values.iter().position(|&v| v <= 0.0).expect("scan found a non-positive margin");
    let (mut a, mut b) = (points[k - 1], points[k]);
    let mut iterations = 0;
    while b - a > tol {
        let mid = 0.5 * (a + b);
        if eval(mid, &mut converged)? > 0.0 {
            a = mid;
        } else {
            b = mid;
        }
        iterations += 1;
    }
    Ok(ThresholdResult {
        value: 0.5 * (a + b),
        bracket: (a, b),
        tolerance_achieved: b - a,
        iterations,
        multiple_crossings: sign_changes > 1,
        converged,
    })
}

fn margin_estimate(p: &Estimate<f64>, x: &Estimate<ComplexValue>) -> Estimate<f64> {
    Estimate {
        value: x.value.norm() - p.value,
        error_estimate: x.error_estimate + p.error_estimate,
        converged: x.converged && p.converged,
    }
}

/// Largest separation at which the pair of `cfg` harvests entanglement.
/// The transition probability does not depend on the separation and is
/// computed once.
pub fn find_ddmax(
    cfg: &ScenarioConfig,
    bracket_hint: (f64, f64),
    quad: &QuadratureSpec,
    tol: f64,
) -> Result<ThresholdResult, HarvestError> {
    cfg.validate()?;
    quad.validate().map_err(DetectorError::from)?;
    check_congruence(cfg, quad)?;
    let p = probability(cfg, quad)?;
    bisect_threshold(
        |dd| {
            let at = SweptParameter::DeltaD.apply(cfg, dd)?;
            Ok(margin_estimate(&p, &nonlocal_correlator(&at, quad)?))
        },
        bracket_hint,
        tol,
    )
}

/// Largest acceleration at which the pair of `cfg` harvests entanglement.
pub fn find_amax(
    cfg: &ScenarioConfig,
    bracket_hint: (f64, f64),
    quad: &QuadratureSpec,
    tol: f64,
) -> Result<ThresholdResult, HarvestError> {
    cfg.validate()?;
    if cfg.scenario == Scenario::Inertial {
        return Err(HarvestError::InertialAmax);
    }
    quad.validate().map_err(DetectorError::from)?;
    check_congruence(cfg, quad)?;
    bisect_threshold(
        |a| {
            let at = SweptParameter::A.apply(cfg, a)?;
            let p = probability(&at, quad)?;
            Ok(margin_estimate(&p, &nonlocal_correlator(&at, quad)?))
        },
        bracket_hint,
        tol,
    )
}
