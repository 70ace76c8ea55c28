//! Closed-form propagation and contact search checked against independent
//! numerical references written directly in (x, y) coordinates.

mod common;

use bounce_core::{build_flight, energy, run_simulation, BallState, EngineConfig, ModelParams};
use common::{contact_oracle, reference};
use num::{BigRational, FromPrimitive, ToPrimitive};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn closed_form_flight_matches_numeric_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let mut worst = 0.0f64;
    for k in 0..1000 {
        let mu = match k % 10 {
            0 => 1.0,
            1 => 1.0 + 1e-9,
            2 => rng.gen_range(1.0..3.0),
            _ => rng.gen_range(1e-3..1.0),
        };
        let p = ModelParams::new(rng.gen_range(1e-3..0.5), mu).unwrap();
        let s = BallState::new(
            0.0,
            rng.gen_range(0.0..1.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(0.5..1.5),
            rng.gen_range(-1.0..1.0),
        );
        let tau = rng.gen_range(0.0..8.0);
        let got = build_flight(&s, &p).eval(tau);
        let want = reference(&p, [s.x, s.xdot, s.y, s.ydot], tau);
        for (g, w) in [got.x, got.xdot, got.y, got.ydot].iter().zip(&want) {
            let err = (g - w).abs() / w.abs().max(1.0);
            worst = worst.max(err);
            assert!(err < 1e-10, "case {k}: {g} vs {w} (mu = {mu}, tau = {tau})");
        }
    }
    println!("worst relative deviation {worst:e}");
}

#[test]
fn first_contact_of_a_long_drop() {
    let p = ModelParams::new(0.01, 0.01).unwrap();
    let init = BallState::drop_from(6.0, 0.0);
    let cfg = EngineConfig {
        max_impacts: 1,
        ..EngineConfig::default()
    };
    let log = run_simulation(&init, &p, &cfg).unwrap();
    let want = contact_oracle(&p, &init, 100.0);
    assert!((log.events[0].t - want).abs() < 1e-9, "{} vs {want}", log.events[0].t);
}

#[test]
fn contact_times_match_dense_sampling() {
    let p = ModelParams::new(0.01, 0.1).unwrap();
    let cfg = EngineConfig {
        max_impacts: 101,
        ..EngineConfig::default()
    };
    let log = run_simulation(&BallState::drop_from(0.05, 0.0), &p, &cfg).unwrap();
    assert_eq!(log.events.len(), 101);
    for w in log.events.windows(2) {
        let start = BallState::new(w[0].t, 0.0, w[0].xdot_post, w[0].y, w[0].ydot);
        let want = contact_oracle(&p, &start, 100.0);
        assert!(
            (w[1].tau - want).abs() < 1e-9,
            "impact {}: {} vs {want}",
            w[1].n,
            w[1].tau
        );
    }
}

fn exact(v: f64) -> BigRational {
    BigRational::from_f64(v).unwrap()
}

#[test]
fn energy_matches_exact_rational_evaluation() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let half = BigRational::new(1.into(), 2.into());
    for _ in 0..1000 {
        let p = ModelParams::new(rng.gen_range(1e-3..0.5), rng.gen_range(1e-3..2.0)).unwrap();
        let s = BallState::new(
            0.0,
            rng.gen_range(0.0..2.0),
            rng.gen_range(-2.0..2.0),
            rng.gen_range(0.0..3.0),
            rng.gen_range(-2.0..2.0),
        );
        let (x, xd, y, yd) = (exact(s.x), exact(s.xdot), exact(s.y), exact(s.ydot));
        let one = BigRational::from_integer(1.into());
        let psi = (&y + &x - &one) * &half;
        let xi = (&y - &x - &one) * &half;
        let psidot = (&yd + &xd) * &half;
        let xidot = (&yd - &xd) * &half;
        let terms = [
            &half * &xidot * &xidot,
            &half * &xi * &xi,
            &half * &psidot * &psidot,
            exact(p.gamma) * &psi,
        ];
        let scale: f64 = terms.iter().map(|t| t.to_f64().unwrap().abs()).sum();
        let want = terms.iter().fold(BigRational::from_integer(0.into()), |acc, t| acc + t);
        let got = energy(&s, &p).value();
        let err = (exact(got) - want).to_f64().unwrap().abs();
        assert!(err <= 1e-15 * scale.max(f64::MIN_POSITIVE), "{err:e} at scale {scale}");
    }
}
