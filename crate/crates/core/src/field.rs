//! Detector worldlines and the massless scalar Wightman function in the
//! presence of a perfectly reflecting plane at `z = 0`.
//!
//! All lengths and times are in units of the switching width σ.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::ComplexValue;

/// A spacetime point `(t, x, y, z)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Event {
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Event {
    pub fn new(t: f64, x: f64, y: f64, z: f64) -> Self {
        Self { t, x, y, z }
    }

    pub fn is_finite(&self) -> bool {
        self.t.is_finite() && self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }
}

/// Worldline family. `A` and `B` label the two detectors of a pair.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TrajectoryKind {
    /// `(τ, 0, 0, Δz)`.
    RestA,
    /// `(τ, Δd, 0, Δz)`.
    RestB,
    /// `(sinh aτ/a, cosh aτ/a, 0, Δz)`.
    ParallelA,
    /// `(sinh aτ/a, cosh aτ/a + Δd, 0, Δz)`.
    ParallelB,
    /// `(sinh aτ/a, (cosh aτ − 1)/a, 0, Δz)`.
    AntiParallelA,
    /// `(sinh aτ/a, −(cosh aτ − 1)/a − Δd, 0, Δz)`.
    AntiParallelB,
    /// `(sinh aτ/a, 0, (cosh aτ − 1)/a, Δz)`.
    PerpA,
    /// `(sinh aτ/a, (cosh aτ − 1)/a + Δd, 0, Δz)`.
    PerpB,
}

impl TrajectoryKind {
    pub fn is_rest(self) -> bool {
        matches!(self, Self::RestA | Self::RestB)
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FieldError {
    #[error("delta_z must be positive and finite, got {0}")]
    DeltaZ(f64),
    #[error("delta_d must be non-negative and finite, got {0}")]
    DeltaD(f64),
    #[error("acceleration must be non-negative and finite, got {0}")]
    Acceleration(f64),
    #[error("{0:?} requires a positive acceleration")]
    ZeroAcceleration(TrajectoryKind),
}

/// A worldline parameterized by proper time.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Trajectory {
    kind: TrajectoryKind,
    a: f64,
    delta_d: f64,
    delta_z: f64,
}

impl Trajectory {
    pub fn new(kind: TrajectoryKind, a: f64, delta_d: f64, delta_z: f64) -> Result<Self, FieldError> {
        if !(delta_z > 0.0 && delta_z.is_finite()) {
            return Err(FieldError::DeltaZ(delta_z));
        }
        if !(delta_d >= 0.0 && delta_d.is_finite()) {
            return Err(FieldError::DeltaD(delta_d));
        }
        if !(a >= 0.0 && a.is_finite()) {
            return Err(FieldError::Acceleration(a));
        }
        if a == 0.0 && !kind.is_rest() {
            return Err(FieldError::ZeroAcceleration(kind));
        }
        Ok(Self {
            kind,
            a,
            delta_d,
            delta_z,
        })
    }

    pub fn kind(&self) -> TrajectoryKind {
        self.kind
    }

    pub fn acceleration(&self) -> f64 {
        self.a
    }

    pub fn delta_d(&self) -> f64 {
        self.delta_d
    }

    pub fn delta_z(&self) -> f64 {
        self.delta_z
    }

    /// Position at proper time `tau`.
    pub fn event_at(&self, tau: f64) -> Event {
        event_at(self, tau)
    }
}

/// `(cosh x − 1)/a` written as `2 sinh²(x/2)/a` to avoid cancellation.
fn cosh_m1_over(a: f64, x: f64) -> f64 {
    let h = (0.5 * x).sinh();
    2.0 * h * h / a
}

/// Position of `traj` at proper time `tau`.
pub fn event_at(traj: &Trajectory, tau: f64) -> Event {
    use TrajectoryKind::*;
    let (a, dd, dz) = (traj.a, traj.delta_d, traj.delta_z);
    if traj.kind.is_rest() {
        let x = if traj.kind == RestB { dd } else { 0.0 };
        return Event::new(tau, x, 0.0, dz);
    }
    let at = a * tau;
    let t = at.sinh() / a;
    let lift = cosh_m1_over(a, at);
    match traj.kind {
        ParallelA => Event::new(t, at.cosh() / a, 0.0, dz),
        ParallelB => Event::new(t, at.cosh() / a + dd, 0.0, dz),
        AntiParallelA => Event::new(t, lift, 0.0, dz),
        AntiParallelB => Event::new(t, -lift - dd, 0.0, dz),
        PerpA => Event::new(t, 0.0, lift, dz),
        PerpB => Event::new(t, lift + dd, 0.0, dz),
        RestA | RestB => unreachable!(),
    }
}

fn regulated_interval(x1: &Event, x2: &Event, eps: f64, z_sep: f64) -> ComplexValue {
    let dt = ComplexValue::new(x1.t - x2.t, -eps);
    let (dx, dy) = (x1.x - x2.x, x1.y - x2.y);
    dt * dt - (dx * dx + dy * dy + z_sep * z_sep)
}

/// Free-space part `−1/(4π²)·1/((Δt − iε)² − |Δx|²)`.
pub fn wightman_free(x1: &Event, x2: &Event, eps: f64) -> ComplexValue {
    -regulated_interval(x1, x2, eps, x1.z - x2.z).inv() / (4.0 * PI * PI)
}

/// Image part `+1/(4π²)·1/((Δt − iε)² − |Δx|² − (z + z')² + (z − z')²)`,
/// the contribution of the mirror-reflected source.
pub fn wightman_image(x1: &Event, x2: &Event, eps: f64) -> ComplexValue {
    regulated_interval(x1, x2, eps, x1.z + x2.z).inv() / (4.0 * PI * PI)
}

/// Wightman function with Dirichlet image term, regulated by `iε` on the
/// time difference.
pub fn wightman_boundary(x1: &Event, x2: &Event, eps: f64) -> ComplexValue {
    wightman_free(x1, x2, eps) + wightman_image(x1, x2, eps)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rest_and_parallel_examples() {
        let r = Trajectory::new(TrajectoryKind::RestA, 0.0, 1.0, 0.5).unwrap();
        assert_eq!(r.event_at(1.5), Event::new(1.5, 0.0, 0.0, 0.5));
        let p = Trajectory::new(TrajectoryKind::ParallelA, 1.0, 1.0, 0.5).unwrap();
        assert_eq!(p.event_at(0.0), Event::new(0.0, 1.0, 0.0, 0.5));
    }

    #[test]
    fn anti_parallel_example() {
        let t = Trajectory::new(TrajectoryKind::AntiParallelA, 0.5, 1.0, 0.7).unwrap();
        let e = t.event_at(2.0);
        assert!((e.t - 2.350_402_387_287_602_9).abs() < 1e-15);
        assert!((e.x - 1.086_161_269_630_487_8).abs() < 1e-15);
        assert_eq!((e.y, e.z), (0.0, 0.7));
    }

    #[test]
    fn invalid_geometries_are_rejected() {
        use TrajectoryKind::*;
        assert_eq!(Trajectory::new(RestA, 0.0, 1.0, 0.0), Err(FieldError::DeltaZ(0.0)));
        assert!(Trajectory::new(RestA, 0.0, -1.0, 1.0).is_err());
        assert!(Trajectory::new(ParallelA, f64::NAN, 1.0, 1.0).is_err());
        assert_eq!(
            Trajectory::new(PerpB, 0.0, 1.0, 1.0),
            Err(FieldError::ZeroAcceleration(PerpB))
        );
    }

    #[test]
    fn direct_substitution() {
        let x1 = Event::new(0.0, 0.0, 0.0, 1.0);
        let x2 = Event::new(0.0, 1.0, 0.0, 1.0);
        let eps = 1e-3;
        let w = wightman_boundary(&x1, &x2, eps);
        let d = ComplexValue::new(0.0, -eps);
        let want = -((d * d - 1.0).inv() - (d * d - 1.0 - 4.0).inv()) / (4.0 * PI * PI);
        assert!((w - want).norm() < 1e-16);
        assert!((w.re - (-1.0 + 0.2) / (-4.0 * PI * PI)).abs() < 1e-7);
    }

    #[test]
    fn image_cancels_on_the_plane() {
        for h in [1e-3, 1e-6, 1e-9] {
            let x1 = Event::new(0.3, 0.0, 0.0, h);
            let x2 = Event::new(0.0, 0.7, 0.0, h);
            let w = wightman_boundary(&x1, &x2, 1e-3);
            assert!(w.norm() < 10.0 * h * wightman_free(&x1, &x2, 1e-3).norm());
        }
    }

    #[test]
    fn image_negligible_far_from_plane() {
        let x1 = Event::new(0.3, 0.0, 0.0, 1e6);
        let x2 = Event::new(0.0, 0.7, 0.0, 1e6);
        let free = wightman_free(&x1, &x2, 1e-3);
        assert!(wightman_image(&x1, &x2, 1e-3).norm() < 1e-12 * free.norm());
    }
}
