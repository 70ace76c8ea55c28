//! Estimators behind the numerical experiments: restitution from flight
//! times, tail statistics of the impact sequence, and the sticky-limit sweep.

use serde::{Deserialize, Serialize};

use crate::engine::{
    last_decade, log_slope, normalized_ratios, run_simulation, ContactKind, EngineConfig, SimulationLog, Termination,
};
use crate::error::{BounceError, Result};
use crate::model::{BallState, ModelParams};
use crate::sticky::{build_sticky, find_detachment, Detachment};

/// Restitution read off the times of the macroscopic flights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RestitutionSeries {
    /// Every other time of flight, starting with the initial drop.
    pub flights: Vec<f64>,
    /// `flights[n + 1] / flights[n]` for `n >= 1`. The drop is half a flight,
    /// so its ratio is left out.
    pub ratios: Vec<f64>,
    /// Mean of the leading ratios that stay within the plateau band.
    pub plateau: f64,
    /// Number of leading ratios in the plateau.
    pub plateau_len: usize,
}

/// Width of the band that delimits the initial plateau of the ratios.
pub const PLATEAU_BAND: f64 = 1e-3;

pub fn restitution_from_flights(log: &SimulationLog) -> Result<RestitutionSeries> {
    let flights: Vec<f64> = log.events.iter().step_by(2).map(|e| e.tau).collect();
    if flights.len() < 3 {
        return Err(BounceError::InsufficientFlights {
            needed: 3,
            available: flights.len(),
        });
    }
    let ratios: Vec<f64> = flights[1..].windows(2).map(|w| w[1] / w[0]).collect();
    let (mut lo, mut hi) = (ratios[0], ratios[0]);
    let mut len = 0;
    for &r in &ratios {
        let (l, h) = (lo.min(r), hi.max(r));
        if h - l > PLATEAU_BAND {
            break;
        }
        lo = l;
        hi = h;
        len += 1;
    }
    let plateau = ratios[..len].iter().sum::<f64>() / len as f64;
    Ok(RestitutionSeries {
        flights,
        ratios,
        plateau,
        plateau_len: len,
    })
}

/// Restitution of the spring for one full compression, `exp(-mu pi / sqrt(1 - mu^2))`.
pub fn spring_restitution(mu: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&mu) {
        return Err(BounceError::Domain(format!(
            "spring restitution needs 0 <= mu < 1, got {mu}"
        )));
    }
    Ok((-mu * std::f64::consts::PI / (1.0 - mu * mu).sqrt()).exp())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailStat {
    pub mean: f64,
    /// Standard deviation over the window.
    pub spread: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticReport {
    pub window: usize,
    /// `n tau_n mu / 3`
    pub n_tau: TailStat,
    /// `n Xdot_n mu / (3 gamma)`
    pub n_velocity: TailStat,
    /// `Xdot_n / (tau_n gamma)`
    pub velocity_over_tau: TailStat,
    /// Fitted exponent of `tau_n` against `n`.
    pub tau_exponent: f64,
}

/// Minimum number of last-decade impacts accepted by [`asymptotic_report`].
pub const MIN_TAIL: usize = 1000;

/// Tail statistics of a run that was stopped while the impacts were still
/// accumulating, either at the flight-time floor or at the impact cap.
pub fn asymptotic_report(log: &SimulationLog) -> Result<AsymptoticReport> {
    match log.termination {
        Termination::AsymptoticFloor | Termination::ImpactLimit => {}
        other => return Err(BounceError::NotAsymptotic(other)),
    }
    let tail = last_decade(&log.events);
    if tail.len() < MIN_TAIL {
        return Err(BounceError::InsufficientTail {
            needed: MIN_TAIL,
            available: tail.len(),
        });
    }
    let ratios: Vec<[f64; 3]> = tail.iter().map(|e| normalized_ratios(e, &log.params)).collect();
    let stat = |k: usize| {
        let m = ratios.len() as f64;
        let mean = ratios.iter().map(|r| r[k]).sum::<f64>() / m;
        let var = ratios.iter().map(|r| (r[k] - mean).powi(2)).sum::<f64>() / m;
        TailStat {
            mean,
            spread: var.sqrt(),
        }
    };
    let (lx, ly): (Vec<f64>, Vec<f64>) = tail.iter().map(|e| ((e.n as f64).ln(), e.tau.ln())).unzip();
    Ok(AsymptoticReport {
        window: tail.len(),
        n_tau: stat(0),
        n_velocity: stat(1),
        velocity_over_tau: stat(2),
        tau_exponent: log_slope(&lx, &ly),
    })
}

/// Initial state of the sticky family: lower mass on the floor moving up at
/// `epsilon`, upper mass on the zero-force plane with velocity `ydot0`.
pub fn sticky_initial(epsilon: f64, ydot0: f64, p: &ModelParams) -> BallState {
    BallState::new(0.0, 0.0, epsilon, 1.0 + 2.0 * p.gamma - 2.0 * p.mu * ydot0, ydot0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub epsilon: f64,
    /// Regular impacts in `(0, t_c)`.
    pub impacts: usize,
    /// Root-mean-square distance of `y` from the sticky solution on `(0, t_c)`.
    pub norm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StickySweep {
    /// Duration of the contact phase of the `epsilon = 0` run.
    pub t_c: f64,
    pub rows: Vec<SweepRow>,
}

/// Sample intervals on `(0, t_c)` used by [`sticky_sweep`].
pub const SWEEP_GRID: usize = 20_000;

/// Runs the sticky family for every `epsilon` and measures how far the upper
/// mass strays from the `epsilon = 0` solution before that one detaches.
pub fn sticky_sweep(epsilons: &[f64], ydot0: f64, p: &ModelParams, cfg: &EngineConfig) -> Result<StickySweep> {
    let onset = sticky_initial(0.0, ydot0, p);
    let t_c = match find_detachment(&build_sticky(&onset, p)?, p, cfg) {
        Detachment::At(t) if t <= cfg.t_max => t,
        _ => {
            return Err(BounceError::Domain(format!(
                "the epsilon = 0 run has no finite contact phase before t = {}",
                cfg.t_max
            )))
        }
    };
    let sampled = |eps: f64| {
        let c = EngineConfig {
            t_max: t_c,
            sample_dt: Some(t_c / SWEEP_GRID as f64),
            ..*cfg
        };
        run_simulation(&sticky_initial(eps, ydot0, p), p, &c)
    };
    let ys = |log: &SimulationLog| -> Vec<f64> { log.trajectory.iter().map(|s| s.y).collect() };
    let reference = ys(&sampled(0.0)?);
    let mut rows = Vec::with_capacity(epsilons.len());
    for &eps in epsilons {
        let log = sampled(eps)?;
        let y = ys(&log);
        let impacts = log
            .events
            .iter()
            .filter(|e| e.kind == ContactKind::Regular && e.t < t_c)
            .count();
        rows.push(SweepRow {
            epsilon: eps,
            impacts,
            norm: rms_difference(&y, &reference, t_c / SWEEP_GRID as f64),
        });
    }
    Ok(StickySweep { t_c, rows })
}

/// `sqrt((1/T) int_0^T (a - b)^2 dt)` by the trapezoid rule, for samples
/// spaced `dt` apart starting at zero.
pub fn rms_difference(a: &[f64], b: &[f64], dt: f64) -> f64 {
    let n = a.len().min(b.len());
    if n < 2 {
        return 0.0;
    }
    let span = dt * (n - 1) as f64;
    let sq = |k: usize| (a[k] - b[k]).powi(2);
    let inner: f64 = (1..n - 1).map(sq).sum();
    let integral = dt * (0.5 * (sq(0) + sq(n - 1)) + inner);
    (integral / span).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::ContactEvent;

    fn event(n: usize, tau: f64) -> ContactEvent {
        ContactEvent {
            n,
            t: 0.0,
            tau,
            kind: ContactKind::Regular,
            xdot_pre: -1.0,
            xdot_post: 1.0,
            y: 1.0,
            ydot: 0.0,
            energy: 0.0,
        }
    }

    fn synthetic_log(taus: &[f64], termination: Termination) -> SimulationLog {
        let p = ModelParams::new(0.01, 0.1).unwrap();
        SimulationLog {
            params: p,
            initial: BallState::drop_from(1.0, 0.0),
            events: taus.iter().enumerate().map(|(k, &t)| event(k + 1, t)).collect(),
            trajectory: Vec::new(),
            termination,
            final_state: BallState::drop_from(1.0, 0.0),
            asymptotics: None,
            handoff: Vec::new(),
        }
    }

    #[test]
    fn elastic_flights_give_unit_restitution() {
        // Drop (half flight), then alternating long and short flights.
        let taus = [1.0, 0.01, 2.0, 0.01, 2.0, 0.01, 2.0, 0.01, 2.0];
        let r = restitution_from_flights(&synthetic_log(&taus, Termination::TimeLimit)).unwrap();
        assert_eq!(r.flights, vec![1.0, 2.0, 2.0, 2.0, 2.0]);
        assert!(r.ratios.iter().all(|&x| x == 1.0));
        assert_eq!(r.plateau, 1.0);
        assert_eq!(r.plateau_len, 3);
    }

    #[test]
    fn restitution_needs_flights() {
        let e = restitution_from_flights(&synthetic_log(&[1.0, 0.1], Termination::TimeLimit));
        assert!(matches!(e, Err(BounceError::InsufficientFlights { .. })));
    }

    #[test]
    fn spring_restitution_reference() {
        assert!((spring_restitution(0.01).unwrap() - 0.969).abs() < 1e-3);
        assert_eq!(spring_restitution(0.0).unwrap(), 1.0);
        assert!(spring_restitution(1.0).is_err());
    }

    #[test]
    fn report_refuses_runs_without_tail() {
        let log = synthetic_log(&[1.0; 50], Termination::TimeLimit);
        assert!(matches!(
            asymptotic_report(&log),
            Err(BounceError::NotAsymptotic(Termination::TimeLimit))
        ));
        let log = synthetic_log(&[1.0; 50], Termination::ImpactLimit);
        assert!(matches!(
            asymptotic_report(&log),
            Err(BounceError::InsufficientTail { .. })
        ));
    }

    #[test]
    fn report_on_exact_law() {
        let p = ModelParams::new(0.01, 0.1).unwrap();
        let mut log = synthetic_log(&[], Termination::ImpactLimit);
        log.events = (1..=20_000)
            .map(|n| {
                let tau = 3.0 / (p.mu * n as f64);
                ContactEvent {
                    xdot_post: p.gamma * tau,
                    ..event(n, tau)
                }
            })
            .collect();
        let r = asymptotic_report(&log).unwrap();
        for s in [r.n_tau, r.n_velocity, r.velocity_over_tau] {
            assert!((s.mean - 1.0).abs() < 1e-12);
            assert!(s.spread < 1e-12);
        }
        assert!((r.tau_exponent + 1.0).abs() < 1e-12);
    }

    #[test]
    fn rms_of_constant_shift() {
        let a: Vec<f64> = (0..101).map(|k| (k as f64 * 0.1).sin()).collect();
        let b: Vec<f64> = a.iter().map(|v| v + 0.25).collect();
        assert!((rms_difference(&b, &a, 0.1) - 0.25).abs() < 1e-15);
        assert_eq!(rms_difference(&a, &a, 0.1), 0.0);
    }
}
