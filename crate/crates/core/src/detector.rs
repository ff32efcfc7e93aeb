//! Detector observables: transition probability `P`, nonlocal correlator `X`
//! and cross-correlator `C`, for a pair of identical detectors with Gaussian
//! switching of unit width near a reflecting plane.
//!
//! Everything is expressed per λ² in units of σ.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::field::{wightman_boundary, wightman_free, Event, FieldError, Trajectory, TrajectoryKind};
use crate::quad::{
    extrapolate_to_zero, integrate_2d_regularized_detailed, integrate_full_line, integrate_pv,
    integrate_semi_infinite, per_sample_spec, sign_changes, Envelope, Integrand2d, IntegrationOrder, QuadError,
    QuadratureSpec, RegularizedIntegral, Singularity,
};
use crate::specfun::{erfc_real, faddeeva, inv_sq_minus_inv_sinh_sq, SpecialFunctionError};
use crate::ComplexValue;

/// Distances to the plane below this value are treated as lying on it.
pub const ON_BOUNDARY_LIMIT: f64 = 0.01;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DetectorError {
    #[error("on-boundary regime: dz_over_sigma = {0} but configurations with dz_over_sigma < 1/100 are treated as lying on the boundary")]
    OnBoundary(f64),
    #[error("scenario = Inertial required when a = 0")]
    InertialRequired,
    #[error("scenario = Inertial requires a = 0, got a_sigma = {0}")]
    InertialWithAcceleration(f64),
    #[error("a_sigma must be non-negative and finite, got {0}")]
    Acceleration(f64),
    #[error("dd_over_sigma must be positive and finite, got {0}")]
    Separation(f64),
    #[error("dz_over_sigma must be positive and finite, got {0}")]
    Distance(f64),
    #[error("omega_sigma must be positive and finite, got {0}")]
    Gap(f64),
    #[error("operation expects scenario {expected:?}, got {got:?}")]
    WrongScenario { expected: Scenario, got: Scenario },
    #[error(transparent)]
    Quadrature(#[from] QuadError),
    #[error(transparent)]
    Trajectory(#[from] FieldError),
    #[error(transparent)]
    SpecialFunction(#[from] SpecialFunctionError),
}

/// Detector energy gap Ω in units of 1/σ. The switching width and the
/// coupling are both fixed to 1.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DetectorParams {
    pub omega: f64,
}

/// Motion of the detector pair.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    Inertial,
    Parallel,
    AntiParallel,
    Perpendicular,
}

impl Scenario {
    pub const ACCELERATED: [Scenario; 3] = [Self::Parallel, Self::AntiParallel, Self::Perpendicular];

    pub fn name(self) -> &'static str {
        match self {
            Self::Inertial => "inertial",
            Self::Parallel => "parallel",
            Self::AntiParallel => "anti_parallel",
            Self::Perpendicular => "perpendicular",
        }
    }

    fn kinds(self) -> (TrajectoryKind, TrajectoryKind) {
        use TrajectoryKind::*;
        match self {
            Self::Inertial => (RestA, RestB),
            Self::Parallel => (ParallelA, ParallelB),
            Self::AntiParallel => (AntiParallelA, AntiParallelB),
            Self::Perpendicular => (PerpA, PerpB),
        }
    }
}

/// Geometry and motion of a detector pair.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub scenario: Scenario,
    pub a: f64,
    pub delta_d: f64,
    pub delta_z: f64,
    pub params: DetectorParams,
}

impl ScenarioConfig {
    pub fn new(
        scenario: Scenario,
        a: f64,
        delta_d: f64,
        delta_z: f64,
        omega: f64,
    ) -> Result<Self, DetectorError> {
        let cfg = Self {
            scenario,
            a,
            delta_d,
            delta_z,
            params: DetectorParams { omega },
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), DetectorError> {
        if !(self.a >= 0.0 && self.a.is_finite()) {
            return Err(DetectorError::Acceleration(self.a));
        }
        match (self.scenario, self.a == 0.0) {
            (Scenario::Inertial, false) => return Err(DetectorError::InertialWithAcceleration(self.a)),
            (Scenario::Inertial, true) | (_, false) => {}
            (_, true) => return Err(DetectorError::InertialRequired),
        }
        if !(self.delta_d > 0.0 && self.delta_d.is_finite()) {
            return Err(DetectorError::Separation(self.delta_d));
        }
        if !self.delta_z.is_finite() {
            return Err(DetectorError::Distance(self.delta_z));
        }
        if self.delta_z < ON_BOUNDARY_LIMIT {
            return Err(DetectorError::OnBoundary(self.delta_z));
        }
        let omega = self.params.omega;
        if !(omega > 0.0 && omega.is_finite()) {
            return Err(DetectorError::Gap(omega));
        }
        Ok(())
    }

    pub fn omega(&self) -> f64 {
        self.params.omega
    }

    /// Worldlines of detectors A and B.
    pub fn trajectories(&self) -> Result<(Trajectory, Trajectory), DetectorError> {
        let (ka, kb) = self.scenario.kinds();
        Ok((
            Trajectory::new(ka, self.a, self.delta_d, self.delta_z)?,
            Trajectory::new(kb, self.a, self.delta_d, self.delta_z)?,
        ))
    }

    pub fn with_a(self, a: f64) -> Self {
        Self { a, ..self }
    }

    pub fn with_delta_d(self, delta_d: f64) -> Self {
        Self { delta_d, ..self }
    }

    pub fn with_delta_z(self, delta_z: f64) -> Self {
        Self { delta_z, ..self }
    }
}

/// A computed quantity with its error estimate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Estimate<T> {
    pub value: T,
    pub error_estimate: f64,
    pub converged: bool,
}

impl<T> Estimate<T> {
    pub fn exact(value: T) -> Self {
        Self {
            value,
            error_estimate: 0.0,
            converged: true,
        }
    }
}

fn check_omega(omega: f64) -> Result<(), DetectorError> {
    if omega > 0.0 && omega.is_finite() {
        Ok(())
    } else {
        Err(DetectorError::Gap(omega))
    }
}

fn check_delta_z(delta_z: f64) -> Result<(), DetectorError> {
    if delta_z > 0.0 && delta_z.is_finite() {
        Ok(())
    } else {
        Err(DetectorError::Distance(delta_z))
    }
}

/// Transition probability of a detector without a boundary and without
/// acceleration, `(1/4π)[e^{−Ω²} − √π Ω erfc Ω]`.
pub fn pd_free_inertial(omega: f64) -> Result<f64, DetectorError> {
    check_omega(omega)?;
    Ok(((-omega * omega).exp() - PI.sqrt() * omega * erfc_real(omega)?) / (4.0 * PI))
}

/// Transition probability of a static detector at distance `delta_z` from
/// the plane, in closed form.
///
/// The boundary term is evaluated as `e^{−Ω²} Im w(−Δz + iΩ)/(8√π Δz)` with
/// the Faddeeva function `w`, which stays finite as Δz grows and vanishes
/// smoothly against the free term as Δz → 0.
pub fn pd_inertial(omega: f64, delta_z: f64) -> Result<f64, DetectorError> {
    check_omega(omega)?;
    check_delta_z(delta_z)?;
    let free = pd_free_inertial(omega)?;
    let w = faddeeva(ComplexValue::new(-delta_z, omega))?;
    let image = (-omega * omega).exp() * w.im / (8.0 * PI.sqrt() * delta_z);
    Ok(free + image)
}

/// Transition probability of a uniformly accelerated detector near the
/// plane, from its reduction to one-dimensional integrals in
/// `ŝ = aτ/2`-type variables.
///
/// The four contributions are the regular free-space integral, the
/// principal-value image integral with its pole at `arcsinh(aΔz)`, the
/// inertial free-space term and the pole's surface term.
pub fn pd_accelerated(
    omega: f64,
    a: f64,
    delta_z: f64,
    spec: &QuadratureSpec,
) -> Result<Estimate<f64>, DetectorError> {
    check_omega(omega)?;
    check_delta_z(delta_z)?;
    if !(a > 0.0 && a.is_finite()) {
        return Err(DetectorError::Acceleration(a));
    }
    spec.validate()?;
    let alpha = 1.0 / (a * a);
    let beta = 2.0 * omega / a;
    let prefactor = a / (4.0 * PI.powf(1.5));
    let envelope = Envelope::gaussian(0.0, alpha);

    let regular = integrate_semi_infinite(
        |s| {
            ComplexValue::new(
                (beta * s).cos() * (-alpha * s * s).exp() * inv_sq_minus_inv_sinh_sq(s),
                0.0,
            )
        },
        &envelope,
        spec,
    );

    let adz = a * delta_z;
    let pole = adz.asinh();
    let principal = integrate_pv(
        |s| {
            let sh = s.sinh();
            ComplexValue::new(
                (beta * s).cos() * (-alpha * s * s).exp() / ((sh - adz) * (sh + adz)),
                0.0,
            )
        },
        pole,
        &envelope,
        spec,
    )?;

    let surface = a / (4.0 * PI.sqrt()) * (-alpha * pole * pole).exp() * (beta * pole).sin()
        / (2.0 * pole).sinh();
    let value = prefactor * (regular.value.re + principal.value.re) + pd_free_inertial(omega)? + surface;
    let error_estimate = prefactor * (regular.error_estimate + principal.error_estimate);
    Ok(Estimate {
        value,
        error_estimate,
        converged: regular.converged && principal.converged && value.is_finite(),
    })
}

/// Transition probability of `omega` for the detector of `cfg`, using the
/// closed form for static detectors and the reduced integrals otherwise.
pub fn transition_probability(
    cfg: &ScenarioConfig,
    spec: &QuadratureSpec,
) -> Result<Estimate<f64>, DetectorError> {
    cfg.validate()?;
    match cfg.scenario {
        Scenario::Inertial => Ok(Estimate::exact(pd_inertial(cfg.omega(), cfg.delta_z)?)),
        _ => pd_accelerated(cfg.omega(), cfg.a, cfg.delta_z, spec),
    }
}

/// Singular points of `1/(k(x) − iε·r(x))` on `[lo, hi]`: sign changes of
/// `k`, and near-zero local minima of `|k|` where the sign does not change.
fn kernel_singularities<K, R>(k: K, reg: R, lo: f64, hi: f64, eps: f64, out: &mut Vec<Singularity>)
where
    K: Fn(f64) -> f64,
    R: Fn(f64) -> f64,
{
    const SAMPLES: usize = 128;
    const NEAR_ZERO: f64 = 0.25;
    let width_at = |x: f64| {
        let h = 1e-7 * (hi - lo).max(1e-300);
        let slope = (k(x + h) - k(x - h)).abs() / (2.0 * h);
        eps * (reg(x).abs() + eps) / (slope + eps)
    };
    for root in sign_changes(&k, lo, hi, SAMPLES) {
        out.push(Singularity {
            at: root,
            width: width_at(root),
        });
    }
    let step = (hi - lo) / SAMPLES as f64;
    let values: Vec<f64> = (0..=SAMPLES).map(|i| k(lo + step * i as f64)).collect();
    for i in 1..SAMPLES {
        let (l, m, r) = (values[i - 1], values[i], values[i + 1]);
        let same_sign = l.signum() == m.signum() && m.signum() == r.signum();
        if same_sign && m.abs() < l.abs() && m.abs() <= r.abs() && m.abs() < NEAR_ZERO {
            let (mut a, mut b) = (lo + step * (i - 1) as f64, lo + step * (i + 1) as f64);
            for _ in 0..60 {
                let m1 = a + (b - a) * 0.381_966_011_250_105_1;
                let m2 = b - (b - a) * 0.381_966_011_250_105_1;
                if k(m1).abs() < k(m2).abs() {
                    b = m2;
                } else {
                    a = m1;
                }
            }
            let at = 0.5 * (a + b);
            let depth = k(at).abs();
            let h = step * 1e-2;
            let curvature = ((k(at + h) + k(at - h) - 2.0 * k(at)) / (h * h)).abs();
            let width = ((depth + eps) / curvature.max(1e-12)).sqrt();
            out.push(Singularity { at, width });
        }
    }
}

/// Normalized invariant interval `|Δx|² − Δt²` between the two detectors,
/// with A evaluated at proper time `u − s` and B at `u` (`AB`), or with the
/// roles exchanged (`BA`). Written in factored forms that avoid
/// cancellation between exponentially large terms.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PairInterval {
    scenario: Scenario,
    a: f64,
    delta_d: f64,
}

/// Order of the two detectors in a Wightman function `W(x_1(u − s), x_2(u))`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PairOrder {
    /// `x_1 = x_A`, `x_2 = x_B`.
    AB,
    /// `x_1 = x_B`, `x_2 = x_A`.
    BA,
}

impl PairInterval {
    pub fn new(scenario: Scenario, a: f64, delta_d: f64) -> Self {
        Self { scenario, a, delta_d }
    }

    fn e(&self, x: f64) -> f64 {
        (self.a * x).exp_m1() / self.a
    }

    fn sh(&self, x: f64) -> f64 {
        (self.a * x).sinh() / self.a
    }

    fn ch1(&self, x: f64) -> f64 {
        let h = (0.5 * self.a * x).sinh();
        2.0 * h * h / self.a
    }

    pub fn at(&self, u: f64, s: f64, order: PairOrder) -> f64 {
        let dd = self.delta_d;
        match (self.scenario, order) {
            (Scenario::Inertial, _) => (dd - s) * (dd + s),
            (Scenario::Parallel, order) => {
                let sign = if order == PairOrder::AB { -1.0 } else { 1.0 };
                let au = self.a * u;
                ((-au).exp() * self.e(s) + sign * dd) * (au.exp() * self.e(-s) + sign * dd)
            }
            (Scenario::AntiParallel, _) => {
                (dd + self.e(u - s) + self.e(-u)) * (dd + self.e(u) + self.e(s - u))
            }
            (Scenario::Perpendicular, PairOrder::AB) => {
                let x = self.ch1(u) + dd;
                x * x + (self.e(s - u) + self.sh(u)) * (self.e(u - s) - self.sh(u))
            }
            (Scenario::Perpendicular, PairOrder::BA) => {
                let x = self.ch1(u - s) + dd;
                x * x + (self.e(-u) + self.sh(u - s)) * (self.e(u) - self.sh(u - s))
            }
        }
    }
}

/// The accelerated-pair kernels exactly as they appear in the literature
/// (`f_AB`, `f_BA`, `g`, `h_AB`, `h_BA` without the regulator), equal to
/// `a²` times [`PairInterval::at`]. Used only for cross-checks; they lose
/// precision through cancellation at small `a`.
pub fn literal_kernel(scenario: Scenario, a: f64, delta_d: f64, u: f64, s: f64, order: PairOrder) -> f64 {
    let (dd, ch, sh) = (delta_d, f64::cosh, f64::sinh);
    match (scenario, order) {
        (Scenario::Inertial, _) => (dd * dd - s * s) * a * a,
        (Scenario::Parallel, PairOrder::AB) => {
            2.0 + a * a * dd * dd - 2.0 * ch(a * s) + 2.0 * a * dd * ch(a * u)
                - 2.0 * a * dd * ch(a * (u - s))
        }
        (Scenario::Parallel, PairOrder::BA) => {
            2.0 + a * a * dd * dd - 2.0 * ch(a * s) - 2.0 * a * dd * ch(a * u)
                + 2.0 * a * dd * ch(a * (u - s))
        }
        (Scenario::AntiParallel, _) => {
            2.0 + (2.0 - a * dd).powi(2) + 2.0 * ch(a * s - 2.0 * a * u)
                + (2.0 * a * dd - 4.0) * (ch(a * u) + ch(a * u - a * s))
        }
        (Scenario::Perpendicular, PairOrder::AB) => {
            3.0 + (a * dd - 1.0).powi(2) - 2.0 * ch(a * (u - s)) - 2.0 * (1.0 - a * dd) * ch(a * u)
                + 2.0 * sh(a * u) * sh(a * (u - s))
        }
        (Scenario::Perpendicular, PairOrder::BA) => {
            3.0 + (a * dd - 1.0).powi(2) - 2.0 * ch(a * u) - 2.0 * (1.0 - a * dd) * ch(a * (u - s))
                + 2.0 * sh(a * u) * sh(a * (u - s))
        }
    }
}

/// Which orderings of the pair enter the `X` integrand.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Orderings {
    /// Both time orderings, as required by the time-ordered product.
    #[default]
    Symmetrized,
    /// Only the `AB` ordering, counted twice.
    DoubledAb,
}

/// Variants of the `X` integrand used for cross-checks.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct XOptions {
    /// Whether the image term of the Wightman function is included.
    pub image: bool,
    pub orderings: Orderings,
    pub order: IntegrationOrder,
}

impl Default for XOptions {
    fn default() -> Self {
        Self {
            image: true,
            orderings: Orderings::Symmetrized,
            order: IntegrationOrder::InnerS,
        }
    }
}

/// Integrand of `X` in the variables `u = τ`, `s = τ − τ'`.
pub struct XIntegrand {
    interval: PairInterval,
    image_shift: f64,
    omega: f64,
    options: XOptions,
}

impl XIntegrand {
    pub fn new(cfg: &ScenarioConfig, options: XOptions) -> Self {
        let a = if cfg.scenario == Scenario::Inertial { 1.0 } else { cfg.a };
        Self {
            interval: PairInterval::new(cfg.scenario, a, cfg.delta_d),
            image_shift: 4.0 * cfg.delta_z * cfg.delta_z,
            omega: cfg.omega(),
            options,
        }
    }

    fn orders(&self) -> &'static [(PairOrder, f64)] {
        let symmetric = matches!(self.interval.scenario, Scenario::Inertial | Scenario::AntiParallel);
        match (self.options.orderings, symmetric) {
            (Orderings::DoubledAb, _) | (Orderings::Symmetrized, true) => &[(PairOrder::AB, 2.0)],
            (Orderings::Symmetrized, false) => &[(PairOrder::AB, 1.0), (PairOrder::BA, 1.0)],
        }
    }

    fn kernel(&self, u: f64, s: f64, eps: f64) -> ComplexValue {
        let mut sum = ComplexValue::new(0.0, 0.0);
        for &(order, weight) in self.orders() {
            let k = self.interval.at(u, s, order);
            let mut term = ComplexValue::new(k, -eps).inv();
            if self.options.image {
                term -= ComplexValue::new(k + self.image_shift, -eps).inv();
            }
            sum += term * weight;
        }
        sum
    }
}

/// `exp(−u² + us − s²/2 − i(2u − s)Ω)`, the switching functions and phase of
/// the `X` integrand.
fn x_envelope(u: f64, s: f64, omega: f64) -> ComplexValue {
    ComplexValue::new(-u * u + u * s - 0.5 * s * s, -(2.0 * u - s) * omega).exp()
}

impl Integrand2d for XIntegrand {
    fn value(&self, u: f64, s: f64, eps: f64) -> ComplexValue {
        -x_envelope(u, s, self.omega) * self.kernel(u, s, eps) / (4.0 * PI * PI)
    }

    fn inner_singularities(
        &self,
        outer: f64,
        eps: f64,
        order: IntegrationOrder,
        lo: f64,
        hi: f64,
    ) -> Vec<Singularity> {
        let mut out = Vec::new();
        let shifts: &[f64] = if self.options.image {
            &[0.0, self.image_shift]
        } else {
            &[0.0]
        };
        if self.interval.scenario == Scenario::Inertial {
            if order == IntegrationOrder::InnerS {
                for shift in shifts {
                    let root = (self.interval.delta_d.powi(2) + shift).sqrt();
                    out.push(Singularity {
                        at: root,
                        width: eps / (2.0 * root),
                    });
                }
            }
            return out;
        }
        for &(pair, _) in self.orders() {
            for &shift in shifts {
                let k = |x: f64| match order {
                    IntegrationOrder::InnerS => self.interval.at(outer, x, pair) + shift,
                    IntegrationOrder::InnerU => self.interval.at(x, outer, pair) + shift,
                };
                kernel_singularities(k, |_| 1.0, lo, hi, eps, &mut out);
            }
        }
        out
    }

    fn outer_singularities(
        &self,
        eps: f64,
        order: IntegrationOrder,
        _lo: f64,
        _hi: f64,
    ) -> Vec<Singularity> {
        if self.interval.scenario != Scenario::Inertial || order != IntegrationOrder::InnerU {
            return Vec::new();
        }
        let shifts: &[f64] = if self.options.image {
            &[0.0, self.image_shift]
        } else {
            &[0.0]
        };
        shifts
            .iter()
            .map(|shift| {
                let root = (self.interval.delta_d.powi(2) + shift).sqrt();
                Singularity {
                    at: root,
                    width: eps / (2.0 * root),
                }
            })
            .collect()
    }
}

/// Closed form of `X` for two static detectors a distance `delta_d` apart
/// and `delta_z` from the plane:
/// `(i/4√π) e^{−Ω²} [w(−R/2)/R − w(−Δd/2)/Δd]` with `R = √(Δd² + 4Δz²)`.
pub fn x_inertial(omega: f64, delta_d: f64, delta_z: f64) -> Result<ComplexValue, DetectorError> {
    check_omega(omega)?;
    check_delta_z(delta_z)?;
    if !(delta_d > 0.0 && delta_d.is_finite()) {
        return Err(DetectorError::Separation(delta_d));
    }
    let r = delta_d.hypot(2.0 * delta_z);
    let image = faddeeva(ComplexValue::new(-0.5 * r, 0.0))? / r;
    let free = faddeeva(ComplexValue::new(-0.5 * delta_d, 0.0))? / delta_d;
    let scale = (-omega * omega).exp() / (4.0 * PI.sqrt());
    Ok(ComplexValue::new(0.0, scale) * (image - free))
}

/// `X` by direct regularized double integration, for any scenario.
pub fn x_regularized(
    cfg: &ScenarioConfig,
    options: XOptions,
    spec: &QuadratureSpec,
) -> Result<RegularizedIntegral, DetectorError> {
    cfg.validate()?;
    spec.validate()?;
    let integrand = XIntegrand::new(cfg, options);
    Ok(integrate_2d_regularized_detailed(&integrand, options.order, spec))
}

fn expect(cfg: &ScenarioConfig, expected: Scenario) -> Result<(), DetectorError> {
    if cfg.scenario == expected {
        Ok(())
    } else {
        Err(DetectorError::WrongScenario {
            expected,
            got: cfg.scenario,
        })
    }
}

fn estimate(r: RegularizedIntegral) -> Estimate<ComplexValue> {
    Estimate {
        value: r.result.value,
        error_estimate: r.result.error_estimate,
        converged: r.result.converged,
    }
}

/// `X` for two detectors accelerated in parallel.
pub fn x_parallel(cfg: &ScenarioConfig, spec: &QuadratureSpec) -> Result<Estimate<ComplexValue>, DetectorError> {
    expect(cfg, Scenario::Parallel)?;
    Ok(estimate(x_regularized(cfg, XOptions::default(), spec)?))
}

/// `X` for two detectors accelerated in opposite directions.
pub fn x_antiparallel(cfg: &ScenarioConfig, spec: &QuadratureSpec) -> Result<Estimate<ComplexValue>, DetectorError> {
    expect(cfg, Scenario::AntiParallel)?;
    Ok(estimate(x_regularized(cfg, XOptions::default(), spec)?))
}

/// `X` for two detectors accelerated along perpendicular axes.
pub fn x_perpendicular(cfg: &ScenarioConfig, spec: &QuadratureSpec) -> Result<Estimate<ComplexValue>, DetectorError> {
    expect(cfg, Scenario::Perpendicular)?;
    Ok(estimate(x_regularized(cfg, XOptions::default(), spec)?))
}

/// `X` for any scenario: the closed form for static detectors, the
/// regularized double integral otherwise.
pub fn nonlocal_correlator(
    cfg: &ScenarioConfig,
    spec: &QuadratureSpec,
) -> Result<Estimate<ComplexValue>, DetectorError> {
    cfg.validate()?;
    match cfg.scenario {
        Scenario::Inertial => Ok(Estimate::exact(x_inertial(cfg.omega(), cfg.delta_d, cfg.delta_z)?)),
        _ => Ok(estimate(x_regularized(cfg, XOptions::default(), spec)?)),
    }
}

/// Stationary separation `W(x(s/2), x(−s/2))` along a single worldline.
fn self_wightman(traj: &Trajectory, s: f64, eps: f64) -> ComplexValue {
    wightman_boundary(&traj.event_at(0.5 * s), &traj.event_at(-0.5 * s), eps)
}

fn interval(x1: &Event, x2: &Event, z_sep: f64) -> f64 {
    let dt = x1.t - x2.t;
    let (dx, dy) = (x1.x - x2.x, x1.y - x2.y);
    dt * dt - dx * dx - dy * dy - z_sep * z_sep
}

/// Transition probability by direct integration of the switching-weighted
/// Wightman function along one worldline,
/// `√π ∫ ds e^{−iΩs − s²/4} W(x(s/2), x(−s/2))`, extrapolated in ε.
///
/// Serves as an independent check on [`pd_inertial`] and [`pd_accelerated`].
pub fn pd_raw_oracle(
    traj: &Trajectory,
    omega: f64,
    spec: &QuadratureSpec,
) -> Result<Estimate<f64>, DetectorError> {
    check_omega(omega)?;
    spec.validate()?;
    let radius = Envelope::gaussian(0.0, 0.25).radius(spec.truncation_exponent);
    let per_sample = per_sample_spec(spec);
    let samples = spec
        .epsilon_schedule
        .iter()
        .map(|&eps| {
            let mut envelope = Envelope::gaussian(0.0, 0.25).with_singularity(0.0, eps);
            let mut found = Vec::new();
            let two_z = 2.0 * traj.delta_z();
            let image_interval = |s: f64| {
                let (x1, x2) = (traj.event_at(0.5 * s), traj.event_at(-0.5 * s));
                interval(&x1, &x2, two_z)
            };
            let time_gap = |s: f64| 2.0 * (traj.event_at(0.5 * s).t).abs();
            kernel_singularities(image_interval, time_gap, -radius, radius, eps, &mut found);
            envelope.singularities.extend(found);
            let f = |s: f64| {
                ComplexValue::new(-0.25 * s * s, -omega * s).exp() * self_wightman(traj, s, eps)
            };
            (eps, integrate_full_line(f, &envelope, &per_sample))
        })
        .collect();
    let r = extrapolate_to_zero(samples, spec).result;
    let value = r.value * PI.sqrt();
    Ok(Estimate {
        value: value.re,
        error_estimate: r.error_estimate * PI.sqrt() + value.im.abs(),
        converged: r.converged && value.im.abs() <= spec.target(value.re.abs()).max(1e-10 * value.re.abs()),
    })
}

/// Integrand of `C` folded onto `s ≥ 0`:
/// `χ(u)χ(u−s)[e^{−iΩs} W(x_A(u), x_B(u−s)) + e^{iΩs} W(x_A(u−s), x_B(u))]`.
pub struct CIntegrand {
    a: Trajectory,
    b: Trajectory,
    omega: f64,
}

impl CIntegrand {
    pub fn new(a: Trajectory, b: Trajectory, omega: f64) -> Self {
        Self { a, b, omega }
    }

    fn pairs(&self, u: f64, s: f64) -> [(Event, Event); 2] {
        [
            (self.a.event_at(u), self.b.event_at(u - s)),
            (self.a.event_at(u - s), self.b.event_at(u)),
        ]
    }
}

impl Integrand2d for CIntegrand {
    fn value(&self, u: f64, s: f64, eps: f64) -> ComplexValue {
        let chi = (-0.5 * u * u - 0.5 * (u - s) * (u - s)).exp();
        let [(a1, b1), (a2, b2)] = self.pairs(u, s);
        let phase = ComplexValue::from_polar(1.0, -self.omega * s);
        chi * (phase * wightman_boundary(&a1, &b1, eps) + phase.conj() * wightman_boundary(&a2, &b2, eps))
    }

    fn inner_singularities(
        &self,
        outer: f64,
        eps: f64,
        order: IntegrationOrder,
        lo: f64,
        hi: f64,
    ) -> Vec<Singularity> {
        let mut out = Vec::new();
        let at = |x: f64| match order {
            IntegrationOrder::InnerS => self.pairs(outer, x),
            IntegrationOrder::InnerU => self.pairs(x, outer),
        };
        for which in 0..2 {
            for image in [false, true] {
                let k = |x: f64| {
                    let (p, q) = at(x)[which];
                    let z_sep = if image { p.z + q.z } else { p.z - q.z };
                    interval(&p, &q, z_sep)
                };
                let reg = |x: f64| {
                    let (p, q) = at(x)[which];
                    2.0 * (p.t - q.t).abs()
                };
                kernel_singularities(k, reg, lo, hi, eps, &mut out);
            }
        }
        out
    }

    fn outer_singularities(
        &self,
        eps: f64,
        order: IntegrationOrder,
        _lo: f64,
        _hi: f64,
    ) -> Vec<Singularity> {
        // For two static worldlines the light-cone crossings sit at fixed
        // values of s, whatever the value of u.
        if order != IntegrationOrder::InnerU || !(self.a.kind().is_rest() && self.b.kind().is_rest()) {
            return Vec::new();
        }
        let (p, q) = (self.a.event_at(0.0), self.b.event_at(0.0));
        let planar = (p.x - q.x).powi(2) + (p.y - q.y).powi(2);
        [p.z - q.z, p.z + q.z]
            .iter()
            .map(|z_sep| (planar + z_sep * z_sep).sqrt())
            .filter(|&at| at > 0.0)
            .map(|at| Singularity { at, width: eps })
            .collect()
    }
}

/// `C` between two arbitrary worldlines.
pub fn c_correlator_between(
    a: &Trajectory,
    b: &Trajectory,
    omega: f64,
    order: IntegrationOrder,
    spec: &QuadratureSpec,
) -> Result<Estimate<ComplexValue>, DetectorError> {
    check_omega(omega)?;
    spec.validate()?;
    let integrand = CIntegrand::new(*a, *b, omega);
    Ok(estimate(integrate_2d_regularized_detailed(&integrand, order, spec)))
}

/// `C` for the detector pair of `cfg`.
pub fn c_correlator(cfg: &ScenarioConfig, spec: &QuadratureSpec) -> Result<Estimate<ComplexValue>, DetectorError> {
    cfg.validate()?;
    let (a, b) = cfg.trajectories()?;
    c_correlator_between(&a, &b, cfg.omega(), IntegrationOrder::InnerS, spec)
}

/// Free-space Wightman function along one worldline, for the image-free
/// variant of the transition probability.
pub fn pd_raw_oracle_free(
    traj: &Trajectory,
    omega: f64,
    spec: &QuadratureSpec,
) -> Result<Estimate<f64>, DetectorError> {
    check_omega(omega)?;
    spec.validate()?;
    let per_sample = per_sample_spec(spec);
    let samples = spec
        .epsilon_schedule
        .iter()
        .map(|&eps| {
            let envelope = Envelope::gaussian(0.0, 0.25).with_singularity(0.0, eps);
            let f = |s: f64| {
                let w = wightman_free(&traj.event_at(0.5 * s), &traj.event_at(-0.5 * s), eps);
                ComplexValue::new(-0.25 * s * s, -omega * s).exp() * w
            };
            (eps, integrate_full_line(f, &envelope, &per_sample))
        })
        .collect();
    let r = extrapolate_to_zero(samples, spec).result;
    let value = r.value * PI.sqrt();
    Ok(Estimate {
        value: value.re,
        error_estimate: r.error_estimate * PI.sqrt() + value.im.abs(),
        converged: r.converged,
    })
}
