use std::hint::black_box;

use bounce_core::{
    build_flight, find_next_contact, run_nonlinear, run_simulation, BallState, EngineConfig, ModelParams,
    NonlinearConfig, NonlinearParams,
};
use criterion::{criterion_group, criterion_main, Criterion};

fn flight(c: &mut Criterion) {
    let p = ModelParams::new(0.01, 0.1).unwrap();
    let s = BallState::new(0.0, 0.2, 0.3, 1.1, -0.2);
    let f = build_flight(&s, &p);
    c.bench_function("flight_eval", |b| b.iter(|| f.eval(black_box(1.7))));
    c.bench_function("build_flight", |b| b.iter(|| build_flight(black_box(&s), &p)));
}

fn contact(c: &mut Criterion) {
    let p = ModelParams::new(0.01, 0.1).unwrap();
    let cfg = EngineConfig::default();
    let f = build_flight(&BallState::new(0.0, 0.0, 0.05, 0.99, 0.02), &p);
    c.bench_function("find_next_contact", |b| {
        b.iter(|| find_next_contact(black_box(&f), &p, &cfg).unwrap())
    });
}

fn runs(c: &mut Criterion) {
    let p = ModelParams::new(0.01, 0.1).unwrap();
    let cfg = EngineConfig {
        max_impacts: 1000,
        ..EngineConfig::default()
    };
    let init = BallState::drop_from(0.1, 0.0);
    c.bench_function("run_1000_impacts", |b| {
        b.iter(|| run_simulation(black_box(&init), &p, &cfg).unwrap())
    });

    let np = NonlinearParams::new(0.01, 0.1, 1.0, 0.5, 0.5).unwrap();
    let ncfg = NonlinearConfig {
        engine: EngineConfig {
            max_impacts: 100,
            ..EngineConfig::default()
        },
        ..NonlinearConfig::default()
    };
    c.bench_function("nonlinear_100_impacts", |b| {
        b.iter(|| run_nonlinear(black_box(&init), &np, &ncfg).unwrap())
    });
}

criterion_group!(benches, flight, contact, runs);
criterion_main!(benches);
