//! Contact phase: the lower mass is pinned to the floor while the floor
//! pushes up on it. The upper mass then obeys `y'' + mu y' + y/2 = 1/2 - gamma`
//! and the phase ends when the floor force `F` crosses zero from below.

use serde::{Deserialize, Serialize};

use crate::engine::EngineConfig;
use crate::error::{BounceError, Result};
use crate::model::{BallState, ModelParams};
use crate::oscillator::{DampedOscillator, Regime};
use crate::roots::first_upcrossing;

/// Slack on `x`, `xdot` and `F` when validating a sticky onset.
pub const ONSET_TOLERANCE: f64 = 1e-9;

/// Offset used to step over a tangential zero of `F`.
const DOUBLE_ROOT_STEP: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StickySolution {
    onset: BallState,
    params: ModelParams,
    osc: DampedOscillator,
    w0: f64,
    wd0: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Detachment {
    /// Offset from the onset at which the ball lifts off.
    At(f64),
    /// The floor force stays negative for all time.
    Never,
}

impl Detachment {
    pub fn offset(self) -> Option<f64> {
        match self {
            Detachment::At(t) => Some(t),
            Detachment::Never => None,
        }
    }
}

/// Builds the contact-phase solution from a genuine onset: the lower mass at
/// rest on the floor, zero floor force, and the force about to turn negative.
pub fn build_sticky(onset: &BallState, p: &ModelParams) -> Result<StickySolution> {
    if onset.x.abs() > ONSET_TOLERANCE || onset.xdot.abs() > ONSET_TOLERANCE {
        return Err(BounceError::NotStickyOnset(format!(
            "lower mass not at rest on the floor (x = {:e}, xdot = {:e})",
            onset.x, onset.xdot
        )));
    }
    let plane = 1.0 + 2.0 * p.gamma - 2.0 * p.mu * onset.ydot;
    if (onset.y - plane).abs() > 2.0 * ONSET_TOLERANCE {
        return Err(BounceError::NotStickyOnset(format!(
            "y = {} is off the zero-force plane y = {}",
            onset.y, plane
        )));
    }
    if onset.ydot >= 4.0 * p.gamma * p.mu {
        return Err(BounceError::NotStickyOnset(format!(
            "ydot = {} is not below 4 gamma mu = {}",
            onset.ydot,
            4.0 * p.gamma * p.mu
        )));
    }
    Ok(resting_contact(onset, p))
}

/// Contact-phase solution for any state with the lower mass at rest on the
/// floor, without checking that the force vanishes.
pub fn resting_contact(s: &BallState, p: &ModelParams) -> StickySolution {
    let onset = BallState {
        x: 0.0,
        xdot: 0.0,
        ..*s
    };
    StickySolution {
        onset,
        params: *p,
        osc: DampedOscillator::new(0.5 * p.mu, 0.5),
        w0: onset.y - p.y_equilibrium(),
        wd0: onset.ydot,
    }
}

impl StickySolution {
    pub fn onset(&self) -> &BallState {
        &self.onset
    }

    pub fn regime(&self) -> Regime {
        self.osc.regime()
    }

    pub fn eval(&self, tau: f64) -> BallState {
        let (w, wd) = self.osc.eval(self.w0, self.wd0, tau);
        BallState {
            t: self.onset.t + tau,
            x: 0.0,
            xdot: 0.0,
            y: self.params.y_equilibrium() + w,
            ydot: wd,
        }
    }

    /// Floor force and its first two derivatives.
    pub fn force(&self, tau: f64) -> [f64; 3] {
        let [w, wd, wdd, wddd] = self.osc.eval_derivatives(self.w0, self.wd0, tau);
        let mu = self.params.mu;
        [
            0.5 * w + mu * wd - 2.0 * self.params.gamma,
            0.5 * wd + mu * wdd,
            0.5 * wdd + mu * wddd,
        ]
    }

    /// Upper bound on `F + 2 gamma` valid from `tau` onwards.
    pub fn force_envelope(&self, tau: f64) -> f64 {
        let (w, wd) = self.osc.eval(self.w0, self.wd0, tau);
        let v = 0.5 * wd * wd + 0.25 * w * w;
        ((1.0 + 2.0 * self.params.mu * self.params.mu) * v).sqrt()
    }

    fn sample_step(&self) -> f64 {
        let mu2 = self.params.mu * self.params.mu;
        let t_contact = if mu2 < 2.0 {
            2.0 * std::f64::consts::PI / (2.0 - mu2).sqrt()
        } else {
            1.0 / self.osc.slowest_rate()
        };
        t_contact / 64.0
    }

    fn horizon(&self) -> f64 {
        50.0 / self.params.mu.min(self.osc.slowest_rate())
    }
}

/// First offset at which the floor force crosses zero with positive slope.
pub fn find_detachment(ss: &StickySolution, p: &ModelParams, cfg: &EngineConfig) -> Detachment {
    let gamma = p.gamma;
    if ss.force_envelope(0.0) < 2.0 * gamma {
        return Detachment::Never;
    }
    let h = |t: f64| ss.force(t);
    let step = ss.sample_step();
    let end = ss.horizon();
    let Some(mut start) = departure_offset(&h, cfg.departure_offset(step * 64.0)) else {
        // F is non-negative arbitrarily close to the onset: the force was
        // already lifting the ball.
        return Detachment::At(0.0);
    };
    loop {
        let root = first_upcrossing(h, start, end, step, |t, _| ss.force_envelope(t) < 2.0 * gamma);
        match root {
            None => return Detachment::Never,
            Some(t) if h(t)[1] > 0.0 => return Detachment::At(t),
            Some(t) => start = t + DOUBLE_ROOT_STEP,
        }
    }
}

/// Smallest probe offset at which `h` is strictly negative, halving from
/// `tau0`. `None` if `h` stays non-negative down to denormal offsets.
pub(crate) fn departure_offset<H>(h: &H, tau0: f64) -> Option<f64>
where
    H: Fn(f64) -> [f64; 3],
{
    let mut t = tau0;
    for _ in 0..1100 {
        if h(t)[0] < 0.0 {
            return Some(t);
        }
        t *= 0.5;
        if t == 0.0 {
            break;
        }
    }
    None
}

/// Durations of the finite contact phases among `solutions`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DurationSummary {
    pub finite: usize,
    pub infinite: usize,
    pub min_duration: Option<f64>,
}

pub fn min_duration_check(solutions: &[StickySolution], p: &ModelParams, cfg: &EngineConfig) -> DurationSummary {
    let mut summary = DurationSummary {
        finite: 0,
        infinite: 0,
        min_duration: None,
    };
    for ss in solutions {
        match find_detachment(ss, p, cfg) {
            Detachment::At(d) => {
                summary.finite += 1;
                summary.min_duration = Some(summary.min_duration.map_or(d, |m: f64| m.min(d)));
            }
            Detachment::Never => summary.infinite += 1,
        }
    }
    summary
}

/// Onset on the zero-force plane with upper-mass velocity `ydot`.
pub fn onset_with_velocity(t: f64, ydot: f64, p: &ModelParams) -> BallState {
    BallState::new(t, 0.0, 0.0, 1.0 + 2.0 * p.gamma - 2.0 * p.mu * ydot, ydot)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{energy, floor_force};

    fn params(gamma: f64, mu: f64) -> ModelParams {
        ModelParams::new(gamma, mu).unwrap()
    }

    #[test]
    fn onset_reproduced_at_zero_offset() {
        let p = params(0.1, 0.1);
        let s = onset_with_velocity(2.0, -0.3, &p);
        let ss = build_sticky(&s, &p).unwrap();
        let e = ss.eval(0.0);
        assert!((e.y - s.y).abs() < 1e-14);
        assert!((e.ydot - s.ydot).abs() < 1e-14);
        let [f, fd, _] = ss.force(0.0);
        assert!(f.abs() < 1e-15);
        assert!(fd < 0.0);
    }

    #[test]
    fn equilibrium_never_detaches() {
        let p = params(0.1, 0.3);
        let ss = resting_contact(&BallState::equilibrium(&p), &p);
        for t in [0.0, 1.0, 50.0] {
            assert!((ss.force(t)[0] + 2.0 * p.gamma).abs() < 1e-15);
        }
        assert_eq!(find_detachment(&ss, &p, &EngineConfig::default()), Detachment::Never);
    }

    #[test]
    fn rejects_states_off_the_onset_plane() {
        let p = params(0.1, 0.1);
        let mut s = onset_with_velocity(0.0, -0.3, &p);
        s.y += 1e-3;
        assert!(matches!(build_sticky(&s, &p), Err(BounceError::NotStickyOnset(_))));
        let s = onset_with_velocity(0.0, 4.0 * p.gamma * p.mu + 1e-3, &p);
        assert!(build_sticky(&s, &p).is_err());
        let mut s = onset_with_velocity(0.0, -0.3, &p);
        s.xdot = 1e-6;
        assert!(build_sticky(&s, &p).is_err());
    }

    #[test]
    fn onset_velocity_near_threshold_sticks_forever() {
        let p = params(0.1, 0.1);
        let s = onset_with_velocity(0.0, 4.0 * p.gamma * p.mu - 1e-4, &p);
        let ss = build_sticky(&s, &p).unwrap();
        assert_eq!(find_detachment(&ss, &p, &EngineConfig::default()), Detachment::Never);
    }

    #[test]
    fn fast_onset_detaches_with_rising_force() {
        let p = params(0.1, 0.1);
        let ss = build_sticky(&onset_with_velocity(0.0, -0.8, &p), &p).unwrap();
        let Detachment::At(td) = find_detachment(&ss, &p, &EngineConfig::default()) else {
            panic!("expected a finite contact phase");
        };
        let [f, fd, _] = ss.force(td);
        assert!(f.abs() < 1e-14);
        assert!(fd > 0.0);
        // Force stays non-positive throughout the phase.
        let n = 2000;
        for k in 1..n {
            let t = td * k as f64 / n as f64;
            assert!(ss.force(t)[0] <= 1e-12, "F > 0 at {t}");
            assert!((floor_force(&ss.eval(t), &p) - ss.force(t)[0]).abs() < 1e-14);
        }
    }

    #[test]
    fn energy_decreases_during_contact() {
        let p = params(0.05, 0.2);
        let ss = build_sticky(&onset_with_velocity(0.0, -0.5, &p), &p).unwrap();
        let mut prev = energy(&ss.eval(0.0), &p).value();
        for k in 1..400 {
            let e = energy(&ss.eval(0.01 * k as f64), &p).value();
            assert!(e <= prev + 1e-15);
            prev = e;
        }
    }

    #[test]
    fn duration_summary_counts_outcomes() {
        let p = params(0.1, 0.1);
        let cfg = EngineConfig::default();
        let solutions: Vec<_> = [-0.9, -0.5, 0.0, 0.039]
            .iter()
            .map(|&v| build_sticky(&onset_with_velocity(0.0, v, &p), &p).unwrap())
            .collect();
        let s = min_duration_check(&solutions, &p, &cfg);
        assert_eq!(s.finite + s.infinite, 4);
        assert!(s.infinite >= 1);
        if let Some(m) = s.min_duration {
            assert!(m > 0.0);
        }
    }
}
