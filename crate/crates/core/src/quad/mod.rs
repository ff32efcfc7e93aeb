//! Adaptive Gauss–Kronrod quadrature for the integral shapes that occur in
//! detector response calculations.
//!
//! Every entry point returns an [`IntegralResult`] whose `converged` flag is
//! only set when the error estimate meets the requested tolerance. Failures
//! are reported through the flag rather than through a silently wrong value.
//!
//! * [`integrate_interval`], [`integrate_semi_infinite`] and
//!   [`integrate_full_line`] handle regular one-dimensional integrals under a
//!   Gaussian envelope.
//! * [`integrate_pv`] computes a Cauchy principal value across a simple pole.
//! * [`integrate_2d_regularized`] evaluates a double integral over
//!   `u ∈ ℝ, s ≥ 0` whose integrand carries an `iε` regulator, at each ε of a
//!   schedule, and extrapolates the sequence to `ε = 0`.

mod rule;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::ComplexValue;

/// Tolerances, truncation and regularization settings shared by all
/// integrators.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadratureSpec {
    /// Target relative error.
    pub rel_tol: f64,
    /// Absolute error floor.
    pub abs_tol: f64,
    /// Maximum number of interval bisections per adaptive integration.
    pub max_subdivisions: usize,
    /// The integrand is treated as zero where its Gaussian envelope falls
    /// below `exp(-truncation_exponent)`.
    pub truncation_exponent: f64,
    /// Regulator values, strictly decreasing, for the extrapolation to ε = 0.
    pub epsilon_schedule: Vec<f64>,
    /// Degree of the extrapolating polynomial in ε.
    pub extrapolation_order: usize,
}

impl QuadratureSpec {
    /// Defaults for one-dimensional integrals.
    pub fn one_dimensional() -> Self {
        Self {
            rel_tol: 1e-8,
            abs_tol: 1e-13,
            max_subdivisions: 2000,
            truncation_exponent: 40.0,
            epsilon_schedule: vec![1e-2, 5e-3, 2.5e-3, 1.25e-3],
            extrapolation_order: 3,
        }
    }

    /// Defaults for regularized double integrals.
    pub fn two_dimensional() -> Self {
        Self {
            rel_tol: 1e-6,
            abs_tol: 1e-12,
            max_subdivisions: 1000,
            ..Self::one_dimensional()
        }
    }

    /// Returns a copy with a different relative tolerance.
    pub fn with_rel_tol(mut self, rel_tol: f64) -> Self {
        self.rel_tol = rel_tol;
        self
    }

    /// Checks the field invariants.
    pub fn validate(&self) -> Result<(), QuadError> {
        let bad = |m: &str| Err(QuadError::InvalidSpec(m.to_string()));
        if !(self.rel_tol > 0.0 && self.rel_tol.is_finite()) {
            return bad("rel_tol must be positive and finite");
        }
        if !(self.abs_tol >= 0.0 && self.abs_tol.is_finite()) {
            return bad("abs_tol must be non-negative and finite");
        }
        if self.max_subdivisions == 0 {
            return bad("max_subdivisions must be at least 1");
        }
        if !(self.truncation_exponent >= 25.0 && self.truncation_exponent.is_finite()) {
            return bad("truncation_exponent must be at least 25");
        }
        if self.epsilon_schedule.is_empty() {
            return bad("epsilon_schedule must not be empty");
        }
        if self.epsilon_schedule.iter().any(|e| !(*e > 0.0 && e.is_finite())) {
            return bad("epsilon_schedule entries must be positive and finite");
        }
        if self.epsilon_schedule.windows(2).any(|w| w[1] >= w[0]) {
            return bad("epsilon_schedule must be strictly decreasing");
        }
        if self.extrapolation_order >= self.epsilon_schedule.len() {
            return bad("extrapolation_order must be smaller than the schedule length");
        }
        Ok(())
    }

    /// Error target for an integral of magnitude `magnitude`.
    pub fn target(&self, magnitude: f64) -> f64 {
        (self.rel_tol * magnitude).max(self.abs_tol)
    }
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self::one_dimensional()
    }
}

/// Outcome of an integration.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IntegralResult {
    pub value: ComplexValue,
    pub error_estimate: f64,
    pub subdivisions_used: usize,
    pub converged: bool,
}

impl IntegralResult {
    fn zero() -> Self {
        Self {
            value: ComplexValue::new(0.0, 0.0),
            error_estimate: 0.0,
            subdivisions_used: 0,
            converged: true,
        }
    }

    fn failed(subdivisions_used: usize) -> Self {
        Self {
            value: ComplexValue::new(f64::NAN, f64::NAN),
            error_estimate: f64::INFINITY,
            subdivisions_used,
            converged: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum QuadError {
    #[error("invalid quadrature spec: {0}")]
    InvalidSpec(String),
    #[error("pole at {pole} lies outside the open interval ({lo}, {hi})")]
    PoleOutsideDomain { pole: f64, lo: f64, hi: f64 },
    #[error("residue estimate at {0} is not finite")]
    NonFiniteResidue(f64),
}

/// A point near which the integrand varies on the length scale `width`.
///
/// Breakpoints are placed at the point and at geometrically growing
/// distances on either side so that the adaptive rule starts from a mesh
/// graded towards it.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Singularity {
    pub at: f64,
    pub width: f64,
}

/// Gaussian damping `exp(-rate·(x - center)²)` that bounds a 1D integrand,
/// together with any known near-singular points.
#[derive(Clone, Debug, PartialEq)]
pub struct Envelope {
    pub center: f64,
    pub rate: f64,
    pub singularities: Vec<Singularity>,
}

impl Envelope {
    pub fn gaussian(center: f64, rate: f64) -> Self {
        Self {
            center,
            rate,
            singularities: Vec::new(),
        }
    }

    pub fn with_singularity(mut self, at: f64, width: f64) -> Self {
        self.singularities.push(Singularity { at, width });
        self
    }

    /// Distance from the center at which the envelope drops to
    /// `exp(-truncation_exponent)`.
    pub fn radius(&self, truncation_exponent: f64) -> f64 {
        (truncation_exponent / self.rate).sqrt()
    }
}

impl Default for Envelope {
    fn default() -> Self {
        Self::gaussian(0.0, 1.0)
    }
}

const GRADING_RATIO: f64 = 4.0;
const GRADING_LEVELS: usize = 8;

/// Sorted breakpoints covering `[lo, hi]`, refined around each singularity.
fn breakpoints(lo: f64, hi: f64, singularities: &[Singularity]) -> Vec<f64> {
    let mut pts = vec![lo, hi];
    for s in singularities {
        if !(s.at.is_finite() && s.width > 0.0) {
            continue;
        }
        pts.push(s.at);
        let mut d = s.width;
        for _ in 0..GRADING_LEVELS {
            pts.push(s.at - d);
            pts.push(s.at + d);
            d *= GRADING_RATIO;
        }
    }
    pts.retain(|x| *x >= lo && *x <= hi);
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    pts.dedup_by(|a, b| (*a - *b).abs() <= 8.0 * f64::EPSILON * a.abs().max(b.abs()));
    pts
}

/// Integrand value together with the uncertainty it carries, for integrands
/// that are themselves computed numerically.
#[derive(Clone, Copy, Debug)]
struct Sample {
    value: ComplexValue,
    error: f64,
}

struct Segment {
    a: f64,
    b: f64,
    value: ComplexValue,
    error: f64,
    id: usize,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error
            .total_cmp(&other.error)
            .then_with(|| other.id.cmp(&self.id))
    }
}

fn evaluate<F>(f: &F, a: f64, b: f64, parallel: bool) -> (ComplexValue, f64)
where
    F: Fn(f64) -> Sample + Sync,
{
    let x = rule::nodes(a, b);
    let mut fv = [ComplexValue::new(0.0, 0.0); rule::NODES];
    let mut errs = [0.0; rule::NODES];
    if parallel {
        let samples: Vec<Sample> = x.par_iter().map(|&xi| f(xi)).collect();
        for (i, s) in samples.into_iter().enumerate() {
            fv[i] = s.value;
            errs[i] = s.error;
        }
    } else {
        for (i, &xi) in x.iter().enumerate() {
            let s = f(xi);
            fv[i] = s.value;
            errs[i] = s.error;
        }
    }
    let (value, err) = rule::combine(a, b, &fv);
    let propagated = 0.5 * (b - a).abs() * rule::weighted_sum(&errs);
    (value, err + propagated)
}

fn too_narrow(a: f64, b: f64) -> bool {
    let m = 0.5 * (a + b);
    (b - a).abs() <= 64.0 * f64::EPSILON * a.abs().max(b.abs()) || m <= a || m >= b
}

/// Globally adaptive bisection over the intervals delimited by `points`.
fn adaptive<F>(f: &F, points: &[f64], spec: &QuadratureSpec, parallel: bool) -> IntegralResult
where
    F: Fn(f64) -> Sample + Sync,
{
    let spans: Vec<(f64, f64)> = points
        .windows(2)
        .map(|w| (w[0], w[1]))
        .filter(|(a, b)| b > a)
        .collect();
    if spans.is_empty() {
        return IntegralResult::zero();
    }
    let initial: Vec<(ComplexValue, f64)> = if parallel {
        spans
            .par_iter()
            .map(|&(a, b)| evaluate(f, a, b, false))
            .collect()
    } else {
        spans.iter().map(|&(a, b)| evaluate(f, a, b, false)).collect()
    };
    let mut heap = BinaryHeap::new();
    let mut frozen: Vec<Segment> = Vec::new();
    let mut next_id = 0;
    for (&(a, b), &(value, error)) in spans.iter().zip(initial.iter()) {
        heap.push(Segment {
            a,
            b,
            value,
            error,
            id: next_id,
        });
        next_id += 1;
    }
    let mut subdivisions = 0;
    loop {
        let (value, error) = totals(&heap, &frozen);
        if !(value.re.is_finite() && value.im.is_finite() && error.is_finite()) {
            return IntegralResult::failed(subdivisions);
        }
        let target = spec.target(value.norm());
        if error <= target || subdivisions >= spec.max_subdivisions || heap.is_empty() {
            return IntegralResult {
                value,
                error_estimate: error,
                subdivisions_used: subdivisions,
                converged: error <= target,
            };
        }
        let worst = heap.pop().unwrap();
        if too_narrow(worst.a, worst.b) {
            frozen.push(worst);
            continue;
        }
        let mid = 0.5 * (worst.a + worst.b);
        let halves = [(worst.a, mid), (mid, worst.b)];
        let results: Vec<(ComplexValue, f64)> = if parallel {
            halves
                .par_iter()
                .map(|&(a, b)| evaluate(f, a, b, true))
                .collect()
        } else {
            halves.iter().map(|&(a, b)| evaluate(f, a, b, false)).collect()
        };
        for (&(a, b), &(value, error)) in halves.iter().zip(results.iter()) {
            heap.push(Segment {
                a,
                b,
                value,
                error,
                id: next_id,
            });
            next_id += 1;
        }
        subdivisions += 1;
    }
}

fn totals(heap: &BinaryHeap<Segment>, frozen: &[Segment]) -> (ComplexValue, f64) {
    let mut segs: Vec<&Segment> = heap.iter().chain(frozen.iter()).collect();
    segs.sort_by(|x, y| x.a.total_cmp(&y.a));
    segs.iter().fold((ComplexValue::new(0.0, 0.0), 0.0), |(v, e), s| {
        (v + s.value, e + s.error)
    })
}

fn plain<F>(f: &F) -> impl Fn(f64) -> Sample + Sync + '_
where
    F: Fn(f64) -> ComplexValue + Sync,
{
    move |x| Sample {
        value: f(x),
        error: 0.0,
    }
}

/// Integrates `f` over `[a, b]`, starting from a mesh refined around the
/// given singularities.
pub fn integrate_interval<F>(
    f: F,
    a: f64,
    b: f64,
    singularities: &[Singularity],
    spec: &QuadratureSpec,
) -> IntegralResult
where
    F: Fn(f64) -> ComplexValue + Sync,
{
    if !(a.is_finite() && b.is_finite()) {
        return IntegralResult::failed(0);
    }
    if b <= a {
        let r = integrate_interval(f, b, a, singularities, spec);
        return IntegralResult { value: -r.value, ..r };
    }
    adaptive(&plain(&f), &breakpoints(a, b, singularities), spec, false)
}

/// Integrates `f` over `[0, ∞)`, truncated where the envelope is negligible.
pub fn integrate_semi_infinite<F>(f: F, envelope: &Envelope, spec: &QuadratureSpec) -> IntegralResult
where
    F: Fn(f64) -> ComplexValue + Sync,
{
    let hi = envelope.center + envelope.radius(spec.truncation_exponent);
    if hi <= 0.0 {
        return IntegralResult::zero();
    }
    let lo = (envelope.center - envelope.radius(spec.truncation_exponent)).max(0.0);
    integrate_interval(f, lo, hi, &envelope.singularities, spec)
}

/// Integrates `f` over the real line, truncated on both sides where the
/// envelope is negligible.
pub fn integrate_full_line<F>(f: F, envelope: &Envelope, spec: &QuadratureSpec) -> IntegralResult
where
    F: Fn(f64) -> ComplexValue + Sync,
{
    let r = envelope.radius(spec.truncation_exponent);
    integrate_interval(
        f,
        envelope.center - r,
        envelope.center + r,
        &envelope.singularities,
        spec,
    )
}

/// Numerical residue of `f` at a simple pole, from the symmetric combination
/// `h·(f(p+h) − f(p−h))/2` at two step sizes with Richardson correction.
pub fn estimate_residue<F>(f: &F, pole: f64, scale: f64) -> Result<ComplexValue, QuadError>
where
    F: Fn(f64) -> ComplexValue,
{
    let at = |h: f64| (f(pole + h) - f(pole - h)) * (0.5 * h);
    let h = 1e-3 * scale;
    let r = (at(0.5 * h) * 4.0 - at(h)) / 3.0;
    if r.re.is_finite() && r.im.is_finite() {
        Ok(r)
    } else {
        Err(QuadError::NonFiniteResidue(pole))
    }
}

/// Principal value of `∫_lo^hi f` across a simple pole, using a symmetric
/// window of half-width `window` around the pole.
///
/// Inside the window the residue part `r/(x − pole)` is removed from both
/// mirror points and the remainders are folded onto one side. Outside the
/// window `f` is integrated as is.
pub fn integrate_pv_on<F>(
    f: F,
    lo: f64,
    hi: f64,
    pole: f64,
    window: f64,
    singularities: &[Singularity],
    spec: &QuadratureSpec,
) -> Result<IntegralResult, QuadError>
where
    F: Fn(f64) -> ComplexValue + Sync,
{
    spec.validate()?;
    if !(pole > lo && pole < hi) {
        return Err(QuadError::PoleOutsideDomain { pole, lo, hi });
    }
    let window = window.min(pole - lo).min(hi - pole);
    if !(window > 0.0) {
        return Err(QuadError::PoleOutsideDomain { pole, lo, hi });
    }
    let residue = estimate_residue(&f, pole, window)?;
    let (left, right) = (pole - window, pole + window);
    let g = |x: f64| -> ComplexValue {
        if x < left || x > right {
            f(x)
        } else if x <= pole {
            ComplexValue::new(0.0, 0.0)
        } else {
            let t = x - pole;
            let pole_part = residue / t;
            (f(x) - pole_part) + (f(pole - t) + pole_part)
        }
    };
    let mut points = breakpoints(lo, hi, singularities);
    points.extend([left, pole, right]);
    points.sort_by(|a, b| a.total_cmp(b));
    points.dedup();
    let h = plain(&g);
    let result = adaptive(&h, &points, spec, false);
    Ok(result)
}

/// Principal value of `∫_0^∞ f` across a simple pole at `pole > 0`.
///
/// The window half-width is half the distance from the pole to the origin,
/// and the truncated domain always extends at least five window widths past
/// the pole.
pub fn integrate_pv<F>(
    f: F,
    pole: f64,
    envelope: &Envelope,
    spec: &QuadratureSpec,
) -> Result<IntegralResult, QuadError>
where
    F: Fn(f64) -> ComplexValue + Sync,
{
    if !(pole > 0.0 && pole.is_finite()) {
        return Err(QuadError::PoleOutsideDomain {
            pole,
            lo: 0.0,
            hi: f64::INFINITY,
        });
    }
    let window = 0.5 * pole;
    let hi = (envelope.center + envelope.radius(spec.truncation_exponent)).max(pole + 5.0 * window);
    integrate_pv_on(f, 0.0, hi, pole, window, &envelope.singularities, spec)
}

/// Quadratic form `uu·u² + us·u·s + ss·s²` whose exponential bounds a 2D
/// integrand.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadraticEnvelope {
    pub uu: f64,
    pub us: f64,
    pub ss: f64,
}

impl QuadraticEnvelope {
    /// Envelope of the product of two unit Gaussian switching functions,
    /// `exp(−τ²/2 − τ'²/2)` with `u = τ`, `s = τ − τ'`.
    pub const SWITCHING: Self = Self {
        uu: 1.0,
        us: -1.0,
        ss: 0.5,
    };

    /// Range of the outer variable where the envelope exceeds `exp(-t)`.
    fn outer_range(&self, order: IntegrationOrder, t: f64) -> (f64, f64) {
        match order {
            IntegrationOrder::InnerS => {
                let r = (t / (self.uu - self.us * self.us / (4.0 * self.ss))).sqrt();
                (-r, r)
            }
            IntegrationOrder::InnerU => {
                let r = (t / (self.ss - self.us * self.us / (4.0 * self.uu))).sqrt();
                (0.0, r)
            }
        }
    }

    /// Range of the inner variable at fixed outer value, or `None` if empty.
    fn inner_range(&self, order: IntegrationOrder, outer: f64, t: f64) -> Option<(f64, f64)> {
        let (a, b, c, floor) = match order {
            IntegrationOrder::InnerS => (self.ss, self.us * outer, self.uu * outer * outer - t, 0.0),
            IntegrationOrder::InnerU => (
                self.uu,
                self.us * outer,
                self.ss * outer * outer - t,
                f64::NEG_INFINITY,
            ),
        };
        let disc = b * b - 4.0 * a * c;
        if disc <= 0.0 {
            return None;
        }
        let root = disc.sqrt();
        let lo = ((-b - root) / (2.0 * a)).max(floor);
        let hi = (-b + root) / (2.0 * a);
        (hi > lo).then_some((lo, hi))
    }
}

/// Which variable is integrated innermost in a double integral.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IntegrationOrder {
    /// Integrate over `s` at each fixed `u`.
    #[default]
    InnerS,
    /// Integrate over `u` at each fixed `s`.
    InnerU,
}

/// An integrand on `u ∈ ℝ, s ≥ 0` carrying an `iε` regulator.
pub trait Integrand2d: Sync {
    fn value(&self, u: f64, s: f64, eps: f64) -> ComplexValue;

    /// Gaussian bound used for truncation.
    fn envelope(&self) -> QuadraticEnvelope {
        QuadraticEnvelope::SWITCHING
    }

    /// Near-singular points of the inner integrand at fixed outer value,
    /// restricted to `[lo, hi]`.
    fn inner_singularities(
        &self,
        _outer: f64,
        _eps: f64,
        _order: IntegrationOrder,
        _lo: f64,
        _hi: f64,
    ) -> Vec<Singularity> {
        Vec::new()
    }

    /// Near-singular points of the outer integrand on `[lo, hi]`.
    fn outer_singularities(
        &self,
        _eps: f64,
        _order: IntegrationOrder,
        _lo: f64,
        _hi: f64,
    ) -> Vec<Singularity> {
        Vec::new()
    }
}

impl<F> Integrand2d for F
where
    F: Fn(f64, f64, f64) -> ComplexValue + Sync,
{
    fn value(&self, u: f64, s: f64, eps: f64) -> ComplexValue {
        self(u, s, eps)
    }
}

/// Attaches an explicit envelope to a closure integrand.
pub struct WithEnvelope<F> {
    pub f: F,
    pub envelope: QuadraticEnvelope,
}

impl<F> Integrand2d for WithEnvelope<F>
where
    F: Fn(f64, f64, f64) -> ComplexValue + Sync,
{
    fn value(&self, u: f64, s: f64, eps: f64) -> ComplexValue {
        (self.f)(u, s, eps)
    }

    fn envelope(&self) -> QuadraticEnvelope {
        self.envelope
    }
}

/// Share of the relative tolerance given to each inner integral.
const INNER_TOLERANCE_SHARE: f64 = 0.01;

/// Double integral at one fixed regulator value.
pub fn integrate_2d_fixed<I>(
    f: &I,
    eps: f64,
    order: IntegrationOrder,
    spec: &QuadratureSpec,
) -> IntegralResult
where
    I: Integrand2d + ?Sized,
{
    let env = f.envelope();
    let t = spec.truncation_exponent;
    let inner_spec = QuadratureSpec {
        rel_tol: spec.rel_tol * INNER_TOLERANCE_SHARE,
        abs_tol: 0.0,
        ..spec.clone()
    };
    let inner = |outer: f64| -> Sample {
        let Some((lo, hi)) = env.inner_range(order, outer, t) else {
            return Sample {
                value: ComplexValue::new(0.0, 0.0),
                error: 0.0,
            };
        };
        let sing = f.inner_singularities(outer, eps, order, lo, hi);
        let g = |x: f64| match order {
            IntegrationOrder::InnerS => f.value(outer, x, eps),
            IntegrationOrder::InnerU => f.value(x, outer, eps),
        };
        let r = adaptive(&plain(&g), &breakpoints(lo, hi, &sing), &inner_spec, false);
        Sample {
            value: r.value,
            error: r.error_estimate,
        }
    };
    let (lo, hi) = env.outer_range(order, t);
    let mut sing = f.outer_singularities(eps, order, lo, hi);
    if order == IntegrationOrder::InnerS && lo < 0.0 && hi > 0.0 {
        sing.push(Singularity { at: 0.0, width: 0.0 });
    }
    let mut points = breakpoints(lo, hi, &sing);
    if order == IntegrationOrder::InnerS && lo < 0.0 && hi > 0.0 && !points.contains(&0.0) {
        points.push(0.0);
        points.sort_by(|a, b| a.total_cmp(b));
    }
    adaptive(&inner, &points, spec, true)
}

/// Regularized double integral together with the raw values it was
/// extrapolated from.
#[derive(Clone, Debug, PartialEq)]
pub struct RegularizedIntegral {
    pub result: IntegralResult,
    /// `(ε, integral at ε)` for every schedule entry.
    pub samples: Vec<(f64, IntegralResult)>,
    /// Difference between the extrapolations of the two highest orders.
    pub extrapolation_residual: f64,
}

fn lagrange_at_zero(xs: &[f64]) -> Vec<f64> {
    (0..xs.len())
        .map(|k| {
            xs.iter()
                .enumerate()
                .filter(|(j, _)| *j != k)
                .map(|(_, &xj)| xj / (xj - xs[k]))
                .product()
        })
        .collect()
}

fn extrapolate(samples: &[(f64, IntegralResult)], order: usize) -> (ComplexValue, f64) {
    let tail = &samples[samples.len() - order - 1..];
    let xs: Vec<f64> = tail.iter().map(|(e, _)| *e).collect();
    let w = lagrange_at_zero(&xs);
    let value = tail
        .iter()
        .zip(&w)
        .fold(ComplexValue::new(0.0, 0.0), |acc, ((_, r), wk)| acc + r.value * *wk);
    let propagated = tail
        .iter()
        .zip(&w)
        .map(|((_, r), wk)| r.error_estimate * wk.abs())
        .sum();
    (value, propagated)
}

/// Evaluates the double integral at each ε of the schedule and extrapolates
/// polynomially to ε = 0.
pub fn integrate_2d_regularized_detailed<I>(
    f: &I,
    order: IntegrationOrder,
    spec: &QuadratureSpec,
) -> RegularizedIntegral
where
    I: Integrand2d + ?Sized,
{
    if spec.validate().is_err() {
        return RegularizedIntegral {
            result: IntegralResult::failed(0),
            samples: Vec::new(),
            extrapolation_residual: f64::INFINITY,
        };
    }
    let per_sample = per_sample_spec(spec);
    let samples: Vec<(f64, IntegralResult)> = spec
        .epsilon_schedule
        .par_iter()
        .map(|&eps| (eps, integrate_2d_fixed(f, eps, order, &per_sample)))
        .collect();
    extrapolate_to_zero(samples, spec)
}

/// Sum of the magnitudes of the extrapolation weights, the factor by which
/// errors of the individual samples are amplified in the extrapolated value.
pub fn extrapolation_amplification(spec: &QuadratureSpec) -> f64 {
    let n = spec.epsilon_schedule.len();
    let p = spec.extrapolation_order.min(n.saturating_sub(1));
    lagrange_at_zero(&spec.epsilon_schedule[n - p - 1..])
        .iter()
        .map(|w| w.abs())
        .sum()
}

/// Tolerances for the fixed-ε samples, tightened so that the amplified
/// sample errors use half of the error budget of `spec`. The other half is
/// left to the truncation error of the extrapolation.
pub fn per_sample_spec(spec: &QuadratureSpec) -> QuadratureSpec {
    let amp = 2.0 * extrapolation_amplification(spec).max(1.0);
    QuadratureSpec {
        rel_tol: spec.rel_tol / amp,
        abs_tol: spec.abs_tol / amp,
        ..spec.clone()
    }
}

/// Safety factor applied to the observed contraction between extrapolation orders.
const EXTRAPOLATION_SAFETY: f64 = 10.0;

/// Polynomial extrapolation to ε = 0 through the `extrapolation_order + 1`
/// smallest regulator values.
///
/// The error estimate adds the truncation error of the extrapolation to the
/// quadrature errors amplified by the extrapolation weights. From order 3
/// on, the truncation error is the difference from the next-lower order
/// scaled by the observed contraction between orders. Below that it is the
/// plain difference.
pub fn extrapolate_to_zero(
    samples: Vec<(f64, IntegralResult)>,
    spec: &QuadratureSpec,
) -> RegularizedIntegral {
    if samples.is_empty() {
        return RegularizedIntegral {
            result: IntegralResult::failed(0),
            samples,
            extrapolation_residual: f64::INFINITY,
        };
    }
    let p = spec.extrapolation_order.min(samples.len() - 1);
    let (value, propagated) = extrapolate(&samples, p);
    let residual = if p == 0 {
        if samples.len() > 1 {
            (samples[samples.len() - 1].1.value - samples[samples.len() - 2].1.value).norm()
        } else {
            0.0
        }
    } else {
        let values: Vec<ComplexValue> = (0..=p).map(|k| extrapolate(&samples, k).0).collect();
        let diffs: Vec<f64> = values.windows(2).map(|w| (w[1] - w[0]).norm()).collect();
        let last = diffs[p - 1];
        if p >= 3 {
            // Successive orders contract geometrically once the expansion in
            // ε is resolved, so the last difference times the contraction
            // ratio bounds the remainder.
            let ratio = |k: usize| if diffs[k - 1] > 0.0 { diffs[k] / diffs[k - 1] } else { 1.0 };
            let contraction = (ratio(p - 1).max(ratio(p - 2)) * EXTRAPOLATION_SAFETY).min(1.0);
            last * contraction
        } else {
            last
        }
    };
    let error_estimate = residual + propagated;
    let subdivisions_used = samples.iter().map(|(_, r)| r.subdivisions_used).sum();
    let all_converged = samples.iter().all(|(_, r)| r.converged);
    let finite = value.re.is_finite() && value.im.is_finite() && error_estimate.is_finite();
    RegularizedIntegral {
        result: IntegralResult {
            value,
            error_estimate,
            subdivisions_used,
            converged: finite && all_converged && error_estimate <= spec.target(value.norm()),
        },
        samples,
        extrapolation_residual: residual,
    }
}

/// Regularized double integral with the inner integration over `s`.
pub fn integrate_2d_regularized<I>(f: &I, spec: &QuadratureSpec) -> IntegralResult
where
    I: Integrand2d + ?Sized,
{
    integrate_2d_regularized_detailed(f, IntegrationOrder::InnerS, spec).result
}

/// Zeros of a real function on `[lo, hi]`, found by sampling `n` equal
/// steps for sign changes and refining each by bisection.
pub fn sign_changes<G>(g: G, lo: f64, hi: f64, n: usize) -> Vec<f64>
where
    G: Fn(f64) -> f64,
{
    let mut roots = Vec::new();
    if !(hi > lo) || n == 0 {
        return roots;
    }
    let step = (hi - lo) / n as f64;
    let mut x0 = lo;
    let mut g0 = g(x0);
    for i in 1..=n {
        let x1 = if i == n { hi } else { lo + step * i as f64 };
        let g1 = g(x1);
        if g0 == 0.0 {
            roots.push(x0);
        } else if g0 * g1 < 0.0 {
            let (mut a, mut b, mut ga) = (x0, x1, g0);
            for _ in 0..200 {
                let m = 0.5 * (a + b);
                if m <= a || m >= b {
                    break;
                }
                let gm = g(m);
                if gm == 0.0 {
                    a = m;
                    b = m;
                    break;
                }
                if (gm < 0.0) == (ga < 0.0) {
                    a = m;
                    ga = gm;
                } else {
                    b = m;
                }
            }
            roots.push(0.5 * (a + b));
        }
        x0 = x1;
        g0 = g1;
    }
    if g0 == 0.0 {
        roots.push(x0);
    }
    roots
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_specs_validate() {
        QuadratureSpec::one_dimensional().validate().unwrap();
        QuadratureSpec::two_dimensional().validate().unwrap();
    }

    #[test]
    fn invalid_specs_are_rejected() {
        let base = QuadratureSpec::one_dimensional();
        let cases = [
            QuadratureSpec { rel_tol: 0.0, ..base.clone() },
            QuadratureSpec { abs_tol: -1.0, ..base.clone() },
            QuadratureSpec { truncation_exponent: 10.0, ..base.clone() },
            QuadratureSpec { epsilon_schedule: vec![1e-3, 1e-2], ..base.clone() },
            QuadratureSpec { epsilon_schedule: vec![1e-2, -1e-3], ..base.clone() },
            QuadratureSpec { extrapolation_order: 4, ..base.clone() },
        ];
        for c in cases {
            assert!(c.validate().is_err(), "{c:?}");
        }
    }

    #[test]
    fn graded_breakpoints_are_sorted_and_clipped() {
        let p = breakpoints(0.0, 1.0, &[Singularity { at: 0.5, width: 1e-3 }]);
        assert_eq!(p[0], 0.0);
        assert_eq!(*p.last().unwrap(), 1.0);
        assert!(p.windows(2).all(|w| w[1] > w[0]));
        assert!(p.contains(&0.5));
        assert!(p.iter().any(|&x| (x - 0.501).abs() < 1e-15));
    }

    #[test]
    fn lagrange_weights_reproduce_polynomials() {
        let xs = [1e-2, 5e-3, 2.5e-3, 1.25e-3];
        let w = lagrange_at_zero(&xs);
        let p = |x: f64| 3.0 - 2.0 * x + 5.0 * x * x - 7.0 * x * x * x;
        let v: f64 = xs.iter().zip(&w).map(|(x, wk)| p(*x) * wk).sum();
        assert!((v - 3.0).abs() < 1e-12);
    }

    #[test]
    fn sign_changes_finds_all_roots() {
        let r = sign_changes(|x| (x - 0.3) * (x - 1.7) * (x + 2.0), -3.0, 3.0, 60);
        assert_eq!(r.len(), 3);
        for (got, want) in r.iter().zip([-2.0, 0.3, 1.7]) {
            assert!((got - want).abs() < 1e-14);
        }
    }
}
