use bounce_core::nonlinear::nonlinear_flight_step;
use bounce_core::{
    build_flight, collide, energy, floor_force, BallState, CmCoords, ModelParams, NonlinearConfig, NonlinearParams,
};
use proptest::prelude::*;

fn params() -> impl Strategy<Value = ModelParams> {
    (1e-3..0.49f64, 1e-3..2.5f64).prop_map(|(g, m)| ModelParams::new(g, m).unwrap())
}

fn state() -> impl Strategy<Value = BallState> {
    (0.0..1.0f64, -1.0..1.0f64, 0.3..1.7f64, -1.0..1.0f64).prop_map(|(x, xd, y, yd)| BallState::new(0.0, x, xd, y, yd))
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}

proptest! {
    #[test]
    fn cm_round_trip(s in state()) {
        let back = BallState::from_cm(s.t, s.to_cm());
        prop_assert!(close(back.x, s.x, 1e-15) && close(back.xdot, s.xdot, 1e-15));
        prop_assert!(close(back.y, s.y, 1e-15) && close(back.ydot, s.ydot, 1e-15));
    }

    #[test]
    fn energy_bounded_below(p in params(), s in state()) {
        prop_assert!(energy(&s, &p).value() >= p.min_energy().value() - 1e-15);
    }

    #[test]
    fn flight_semigroup(p in params(), s in state(), t1 in 0.0..4.0f64, t2 in 0.0..4.0f64) {
        let direct = build_flight(&s, &p).eval(t1 + t2);
        let mid = build_flight(&s, &p).eval(t1);
        let split = build_flight(&mid, &p).eval(t2);
        for (a, b) in [(direct.x, split.x), (direct.xdot, split.xdot), (direct.y, split.y), (direct.ydot, split.ydot)] {
            prop_assert!(close(a, b, 1e-10), "{} vs {}", a, b);
        }
        prop_assert!(close(split.t, s.t + t1 + t2, 1e-14));
    }

    #[test]
    fn energy_non_increasing_in_flight(p in params(), s in state(), t1 in 0.0..4.0f64, dt in 0.0..4.0f64) {
        let f = build_flight(&s, &p);
        let e1 = f.energy(t1).value();
        let e2 = f.energy(t1 + dt).value();
        prop_assert!(e2 <= e1 + 1e-12, "{} then {}", e1, e2);
    }

    #[test]
    fn collision_preserves_energy(p in params(), xd in -1.0..1.0f64, y in 0.3..1.7f64, yd in -1.0..1.0f64) {
        let s = BallState::new(0.0, 0.0, xd, y, yd);
        let after = collide(&s);
        prop_assert_eq!(after.xdot, -s.xdot);
        prop_assert!(close(energy(&after, &p).value(), energy(&s, &p).value(), 1e-15));
    }

    #[test]
    fn floor_force_is_free_acceleration_at_rest(p in params(), y in 0.3..1.7f64, yd in -1.0..1.0f64) {
        let s = BallState::new(0.0, 0.0, 0.0, y, yd);
        prop_assert!(close(floor_force(&s, &p), s.flight_accelerations(&p).0, 1e-15));
    }

    #[test]
    fn nonlinear_energy_non_increasing(
        xi in -0.3..0.3f64,
        xidot in -0.5..0.5f64,
        a in 0.0..2.0f64,
        b in 0.0..2.0f64,
    ) {
        let p = NonlinearParams::new(0.01, 0.1, 1.0, a, b).unwrap();
        let s = BallState::from_cm(0.0, CmCoords { psi: 1.0, psidot: 0.0, xi, xidot });
        let (next, _, _) = nonlinear_flight_step(&s, &p, 0.01, &NonlinearConfig::default()).unwrap();
        prop_assert!(p.energy(&next) <= p.energy(&s) + 1e-12);
    }
}
