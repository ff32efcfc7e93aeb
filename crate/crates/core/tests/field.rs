use proptest::prelude::*;
use udw_harvest::field::{
    event_at, wightman_boundary, wightman_free, wightman_image, Event, Trajectory, TrajectoryKind,
};

fn event() -> impl Strategy<Value = Event> {
    (-5.0f64..5.0, -5.0f64..5.0, -5.0f64..5.0, 0.01f64..5.0)
        .prop_map(|(t, x, y, z)| Event::new(t, x, y, z))
}

fn close(a: udw_harvest::ComplexValue, b: udw_harvest::ComplexValue, tol: f64) -> bool {
    (a - b).norm() <= tol * a.norm().max(b.norm())
}

const ACCELERATED: [TrajectoryKind; 6] = [
    TrajectoryKind::ParallelA,
    TrajectoryKind::ParallelB,
    TrajectoryKind::AntiParallelA,
    TrajectoryKind::AntiParallelB,
    TrajectoryKind::PerpA,
    TrajectoryKind::PerpB,
];

/// Coordinates in the plane of the hyperbola, shifted so that the apex of
/// the hyperbola sits at distance 1/a from the origin.
fn hyperbola_coordinate(kind: TrajectoryKind, e: &Event, a: f64, dd: f64) -> f64 {
    use TrajectoryKind::*;
    match kind {
        ParallelA => e.x,
        ParallelB => e.x - dd,
        AntiParallelA => e.x + 1.0 / a,
        AntiParallelB => -(e.x + dd) + 1.0 / a,
        PerpA => e.y + 1.0 / a,
        PerpB => e.x - dd + 1.0 / a,
        RestA | RestB => unreachable!(),
    }
}

proptest! {
    #[test]
    fn exchange_conjugates(x1 in event(), x2 in event(), eps in 1e-4f64..1e-1) {
        let a = wightman_boundary(&x1, &x2, eps);
        let b = wightman_boundary(&x2, &x1, eps).conj();
        prop_assert!(close(a, b, 1e-12));
    }

    #[test]
    fn translation_invariant_parallel_to_plane(
        x1 in event(), x2 in event(), shift in (-3.0f64..3.0, -3.0f64..3.0, -3.0f64..3.0),
    ) {
        let (dt, dx, dy) = shift;
        let move_by = |e: Event| Event::new(e.t + dt, e.x + dx, e.y + dy, e.z);
        let a = wightman_boundary(&x1, &x2, 1e-3);
        let b = wightman_boundary(&move_by(x1), &move_by(x2), 1e-3);
        prop_assert!(close(a, b, 1e-9));
    }

    #[test]
    fn image_term_subtracts(x1 in event(), x2 in event(), eps in 1e-4f64..1e-1) {
        let free = wightman_free(&x1, &x2, eps);
        let image = wightman_image(&x1, &x2, eps);
        let total = wightman_boundary(&x1, &x2, eps);
        prop_assert_eq!(total, free + image);
        prop_assert!(total.norm() <= free.norm() + image.norm());
        // The image piece is the free expression at the mirrored point, with opposite sign.
        let mirrored = Event::new(x2.t, x2.x, x2.y, -x2.z);
        prop_assert!(close(image, -wightman_free(&x1, &mirrored, eps), 1e-14));
    }

    #[test]
    fn accelerated_worldlines_lie_on_hyperbolae(
        k in 0usize..6, a in 0.05f64..3.0, dd in 0.0f64..3.0, tau in -10.0f64..10.0,
    ) {
        let kind = ACCELERATED[k];
        let traj = Trajectory::new(kind, a, dd, 0.5).unwrap();
        let e = event_at(&traj, tau);
        let x = hyperbola_coordinate(kind, &e, a, dd);
        let lhs = (x - e.t) * (x + e.t);
        let want = 1.0 / (a * a);
        // Squaring loses digits in proportion to x² + t², so the tolerance is
        // relative to that scale. It coincides with 1/a² at τ = 0.
        let scale = x * x + e.t * e.t;
        prop_assert!((lhs - want).abs() <= 1e-12 * scale, "{} vs {}", lhs, want);
        prop_assert_eq!(e.z, 0.5);
    }
}
