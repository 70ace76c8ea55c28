//! Ball with a nonlinear spring: `xi'' = -rho xi |xi|^a - 2 mu xi' |xi|^b`
//! during flight. Flights are integrated numerically; impacts use the same
//! collision rule as the linear model.

pub mod rk;

use serde::{Deserialize, Serialize};

use crate::engine::{collide, last_decade, ContactEvent, ContactKind, EngineConfig, SimulationLog, Termination};
use crate::error::{BounceError, Result};
use crate::model::{BallState, ModelParams, FLOOR_TOLERANCE};
use rk::{dopri_step, hermite, step_factor, State};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NonlinearParams {
    pub model: ModelParams,
    pub rho: f64,
    pub a: f64,
    pub b: f64,
}

impl NonlinearParams {
    pub fn new(gamma: f64, mu: f64, rho: f64, a: f64, b: f64) -> Result<Self> {
        let p = Self {
            model: ModelParams { gamma, mu },
            rho,
            a,
            b,
        };
        p.validate()?;
        Ok(p)
    }

    /// The linear spring.
    pub fn linear(model: ModelParams) -> Self {
        Self {
            model,
            rho: 1.0,
            a: 0.0,
            b: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.model.validate()?;
        if !(self.rho.is_finite() && self.rho > 0.0) {
            return Err(BounceError::InvalidParams(format!(
                "rho must be positive, got {}",
                self.rho
            )));
        }
        if !(self.a.is_finite() && self.a >= 0.0 && self.b.is_finite() && self.b >= 0.0) {
            return Err(BounceError::InvalidParams(format!(
                "exponents must be non-negative, got a = {}, b = {}",
                self.a, self.b
            )));
        }
        Ok(())
    }

    /// Half-compression at static equilibrium.
    pub fn xi_equilibrium(&self) -> f64 {
        -(self.model.gamma / self.rho).powf(1.0 / (self.a + 1.0))
    }

    /// Lower mass on the floor, spring at its equilibrium compression.
    pub fn equilibrium_state(&self) -> BallState {
        BallState::new(0.0, 0.0, 0.0, 1.0 + 2.0 * self.xi_equilibrium(), 0.0)
    }

    fn spring(&self, xi: f64, xidot: f64) -> f64 {
        let m = xi.abs();
        let pa = if self.a == 0.0 { 1.0 } else { m.powf(self.a) };
        let pb = if self.b == 0.0 { 1.0 } else { m.powf(self.b) };
        -self.rho * xi * pa - 2.0 * self.model.mu * xidot * pb
    }

    /// Right-hand side for the flight state `[x, xdot, xi, xidot]`.
    fn rhs(&self, s: &State) -> State {
        let xidd = self.spring(s[2], s[3]);
        [s[1], -self.model.gamma - xidd, s[3], xidd]
    }

    /// Acceleration of the upper mass, which does not feel the floor.
    pub fn upper_acceleration(&self, s: &BallState) -> f64 {
        let c = s.to_cm();
        -self.model.gamma + self.spring(c.xi, c.xidot)
    }

    /// Lower-mass acceleration in flight.
    pub fn lower_acceleration(&self, s: &BallState) -> f64 {
        let c = s.to_cm();
        -self.model.gamma - self.spring(c.xi, c.xidot)
    }

    pub fn energy(&self, s: &BallState) -> f64 {
        let c = s.to_cm();
        0.5 * (c.psidot * c.psidot + c.xidot * c.xidot)
            + self.rho * c.xi.abs().powf(self.a + 2.0) / (self.a + 2.0)
            + self.model.gamma * c.psi
    }

    /// Limit of `(X_n - X_{n+1}) / X_n^2` for the post-impact velocities.
    pub fn alpha_theory(&self) -> f64 {
        let g = self.model.gamma;
        self.model.mu / (3.0 * g) * (g / self.rho).powf(self.b / (self.a + 1.0))
    }

    fn non_smooth(&self) -> bool {
        (self.a > 0.0 && self.a < 1.0) || (self.b > 0.0 && self.b < 1.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NonlinearConfig {
    pub engine: EngineConfig,
    /// Absolute and relative local error tolerance.
    pub tol: f64,
    pub h_max: f64,
    pub max_retries: usize,
}

impl Default for NonlinearConfig {
    fn default() -> Self {
        Self {
            engine: EngineConfig::default(),
            tol: 1e-13,
            h_max: 0.5,
            max_retries: 60,
        }
    }
}

fn to_state(s: &BallState) -> State {
    [s.x, s.xdot, 0.5 * (s.y - s.x - 1.0), 0.5 * (s.ydot - s.xdot)]
}

fn from_state(t: f64, y: &State) -> BallState {
    BallState::new(t, y[0], y[1], y[0] + 2.0 * y[2] + 1.0, y[1] + 2.0 * y[3])
}

/// Below this `|xi|` the step is kept shorter than the time to reach zero,
/// where the right-hand side is not smooth.
const SMOOTHNESS_BAND: f64 = 1e-2;

struct Integrator<'a> {
    p: &'a NonlinearParams,
    cfg: &'a NonlinearConfig,
    t: f64,
    y: State,
    f: State,
    h: f64,
}

/// One accepted step: start time, start state and slope, step length, and
/// error norm.
struct Accepted {
    t0: f64,
    y0: State,
    f0: State,
    h: f64,
    err: f64,
}

impl<'a> Integrator<'a> {
    fn new(s: &BallState, p: &'a NonlinearParams, cfg: &'a NonlinearConfig, h: f64) -> Self {
        let y = to_state(s);
        Self {
            p,
            cfg,
            t: s.t,
            f: p.rhs(&y),
            y,
            h: h.min(cfg.h_max),
        }
    }

    fn reset(&mut self, s: &BallState) {
        self.t = s.t;
        self.y = to_state(s);
        self.f = self.p.rhs(&self.y);
    }

    fn capped(&self, h: f64) -> f64 {
        let (xi, xidot) = (self.y[2], self.y[3]);
        if self.p.non_smooth() && xi.abs() < SMOOTHNESS_BAND && xidot.abs() > 1e-12 {
            h.min(xi.abs() / xidot.abs() + 1e-8)
        } else {
            h
        }
    }

    /// Advances by one accepted step not going past `t_end`.
    fn advance(&mut self, t_end: f64) -> Result<Accepted> {
        let rhs = |s: &State| self.p.rhs(s);
        let mut h = self.capped(self.h).min(t_end - self.t);
        for _ in 0..self.cfg.max_retries {
            let s = dopri_step(&rhs, &self.y, &self.f, h, self.cfg.tol, self.cfg.tol);
            if s.err <= 1.0 && s.y.iter().all(|v| v.is_finite()) {
                let acc = Accepted {
                    t0: self.t,
                    y0: self.y,
                    f0: self.f,
                    h,
                    err: s.err,
                };
                let clipped = h < self.h * 0.999;
                self.t = if h == t_end - self.t { t_end } else { self.t + h };
                self.y = s.y;
                self.f = s.f;
                let grown = (h * step_factor(s.err)).min(self.cfg.h_max);
                self.h = if clipped { self.h.max(grown) } else { grown };
                return Ok(acc);
            }
            h *= step_factor(s.err).min(0.9);
        }
        Err(BounceError::StepFailure {
            t: self.t,
            retries: self.cfg.max_retries,
        })
    }

    /// State at `t0 + s` obtained by a fresh step from the start of `acc`.
    fn substep(&self, acc: &Accepted, s: f64) -> State {
        if s == 0.0 {
            return acc.y0;
        }
        let rhs = |v: &State| self.p.rhs(v);
        dopri_step(&rhs, &acc.y0, &acc.f0, s, self.cfg.tol, self.cfg.tol).y
    }
}

/// Cubic Hermite interpolant of component `i` over an accepted step.
fn dense(acc: &Accepted, y1: &State, f1: &State, i: usize, theta: f64) -> (f64, f64) {
    hermite(acc.y0[i], acc.f0[i], y1[i], f1[i], acc.h, theta)
}

/// Locates a floor contact inside the accepted step, returning its offset
/// from the start of the step.
fn locate_contact(integ: &Integrator, acc: &Accepted) -> Option<f64> {
    let (y1, f1) = (&integ.y, &integ.f);
    let x = |theta: f64| dense(acc, y1, f1, 0, theta);
    let xdot = |theta: f64| dense(acc, y1, f1, 1, theta);

    let hi = if y1[0] < 0.0 {
        1.0
    } else if acc.y0[1] < 0.0 && y1[1] > 0.0 {
        let (mut lo, mut hi) = (0.0, 1.0);
        while hi - lo > 1e-14 {
            let mid = 0.5 * (lo + hi);
            if xdot(mid).0 < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        if x(hi).0 >= 0.0 {
            return None;
        }
        hi
    } else {
        return None;
    };

    let (mut lo, mut hi) = (0.0, hi);
    while (hi - lo) * acc.h > 1e-12 * acc.h.max(1.0) && hi - lo > f64::EPSILON {
        let mid = 0.5 * (lo + hi);
        if x(mid).0 > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    // Polish with exact substeps: Newton on x along the integrator.
    let mut s = 0.5 * (lo + hi) * acc.h;
    for _ in 0..4 {
        let v = integ.substep(acc, s);
        if v[1] == 0.0 {
            break;
        }
        let ds = v[0] / v[1];
        let next = (s - ds).clamp(0.0, acc.h);
        let done = (next - s).abs() <= 1e-15 * (acc.t0.abs() + s).max(1.0);
        s = next;
        if done {
            break;
        }
    }
    Some(s)
}

/// One adaptive flight step from `state`. Returns the new state, the step
/// length actually taken, and the error norm of the accepted step.
pub fn nonlinear_flight_step(
    state: &BallState,
    p: &NonlinearParams,
    dt_suggestion: f64,
    cfg: &NonlinearConfig,
) -> Result<(BallState, f64, f64)> {
    let mut integ = Integrator::new(state, p, cfg, dt_suggestion);
    let acc = integ.advance(f64::INFINITY)?;
    Ok((from_state(integ.t, &integ.y), acc.h, acc.err))
}

fn initial_step(p: &NonlinearParams) -> f64 {
    1e-3 * (0.5 / p.model.gamma).sqrt().min(1.0)
}

/// Integrates the flight starting at `state` up to the next floor contact.
pub fn nonlinear_find_contact(
    state: &BallState,
    p: &NonlinearParams,
    cfg: &NonlinearConfig,
) -> Result<(f64, BallState)> {
    let mut integ = Integrator::new(state, p, cfg, initial_step(p));
    match next_contact(&mut integ, cfg.engine.t_max)? {
        Some(s) => Ok((s.t - state.t, s)),
        None => Err(BounceError::NoContact {
            t_start: state.t,
            t_limit: cfg.engine.t_max,
        }),
    }
}

fn next_contact(integ: &mut Integrator, t_end: f64) -> Result<Option<BallState>> {
    next_contact_sampled(integ, t_end, &mut |_, _, _, _| {})
}

/// Runs to the next contact, handing every accepted step to `visit` together
/// with the end of the portion of the step that lies in the flight.
fn next_contact_sampled<V>(integ: &mut Integrator, t_end: f64, visit: &mut V) -> Result<Option<BallState>>
where
    V: FnMut(&Accepted, &State, &State, f64),
{
    while integ.t < t_end {
        let acc = integ.advance(t_end)?;
        if let Some(s) = locate_contact(integ, &acc) {
            visit(&acc, &integ.y, &integ.f, s);
            let mut y = integ.substep(&acc, s);
            y[0] = 0.0;
            let contact = from_state(acc.t0 + s, &y);
            return Ok(Some(contact));
        }
        visit(&acc, &integ.y, &integ.f, acc.h);
    }
    Ok(None)
}

/// Event-driven run of the nonlinear model. Contact phases are not modelled:
/// a sticky onset is reported as an error, and a run may only start resting
/// on the floor at static equilibrium.
pub fn run_nonlinear(initial: &BallState, p: &NonlinearParams, cfg: &NonlinearConfig) -> Result<SimulationLog> {
    p.validate()?;
    cfg.engine.validate()?;
    let ecfg = &cfg.engine;
    if !initial.is_finite() || !initial.satisfies_floor() {
        return Err(BounceError::InvalidState(format!("invalid initial state {initial:?}")));
    }
    let model = p.model;
    let t_end = ecfg.t_max;
    let mut log = SimulationLog {
        params: model,
        initial: *initial,
        events: Vec::new(),
        trajectory: Vec::new(),
        termination: Termination::TimeLimit,
        final_state: *initial,
        asymptotics: None,
        handoff: Vec::new(),
    };

    let mut state = *initial;
    if state.x <= FLOOR_TOLERANCE && state.xdot.abs() <= ecfg.v_eps && p.lower_acceleration(&state) < -ecfg.a_eps {
        if p.upper_acceleration(&state).abs() <= ecfg.a_eps && state.ydot.abs() <= ecfg.v_eps {
            log.final_state = BallState { t: t_end, ..state };
            if let Some(dt) = ecfg.sample_dt {
                let n = ((t_end - state.t) / dt).floor() as usize;
                log.trajectory = (0..=n)
                    .map(|k| BallState {
                        t: state.t + k as f64 * dt,
                        ..state
                    })
                    .collect();
            }
            return Ok(log);
        }
        return Err(BounceError::Domain(
            "resting contact away from equilibrium is not modelled for the nonlinear spring".into(),
        ));
    }

    let mut integ = Integrator::new(&state, p, cfg, initial_step(p));
    let mut next_sample = 0usize;
    let mut samples = Vec::new();
    let mut last_t = initial.t;
    if state.x <= FLOOR_TOLERANCE && state.xdot < -ecfg.v_eps {
        state.x = 0.0;
        push_event(&mut log.events, ContactKind::Regular, &state, last_t, p);
        state = collide(&state);
        integ.reset(&state);
    }

    loop {
        if log.events.len() >= ecfg.max_impacts {
            log.termination = Termination::ImpactLimit;
            break;
        }
        let mut visit = |acc: &Accepted, y1: &State, f1: &State, upto: f64| {
            let Some(dt) = ecfg.sample_dt else { return };
            loop {
                let t = initial.t + next_sample as f64 * dt;
                let off = t - acc.t0;
                if off >= upto || t > t_end {
                    break;
                }
                let theta = off / acc.h;
                let mut v = [0.0; 4];
                for (i, c) in v.iter_mut().enumerate() {
                    *c = dense(acc, y1, f1, i, theta).0;
                }
                samples.push(from_state(t, &v));
                next_sample += 1;
            }
        };
        match next_contact_sampled(&mut integ, t_end, &mut visit)? {
            None => {
                log.termination = Termination::TimeLimit;
                state = from_state(integ.t, &integ.y);
                if let Some(dt) = ecfg.sample_dt {
                    if initial.t + next_sample as f64 * dt <= t_end
                        && samples.last().is_none_or(|s: &BallState| s.t < t_end)
                    {
                        samples.push(state);
                    }
                }
                break;
            }
            Some(contact) => {
                let tau = contact.t - last_t;
                let kind = if contact.xdot.abs() > ecfg.v_eps {
                    ContactKind::Regular
                } else if p.lower_acceleration(&contact) > ecfg.a_eps {
                    ContactKind::Grazing
                } else {
                    return Err(BounceError::Domain(format!(
                        "sticky contact at t = {} is not modelled for the nonlinear spring",
                        contact.t
                    )));
                };
                push_event(&mut log.events, kind, &contact, last_t, p);
                last_t = contact.t;
                state = collide(&contact);
                integ.reset(&state);
                if kind == ContactKind::Regular && tau < ecfg.tau_floor {
                    log.termination = Termination::AsymptoticFloor;
                    break;
                }
            }
        }
    }
    log.final_state = state;
    log.trajectory = samples;
    Ok(log)
}

fn push_event(events: &mut Vec<ContactEvent>, kind: ContactKind, s: &BallState, last_t: f64, p: &NonlinearParams) {
    events.push(ContactEvent {
        n: events.len() + 1,
        t: s.t,
        tau: s.t - last_t,
        kind,
        xdot_pre: s.xdot,
        xdot_post: -s.xdot,
        y: s.y,
        ydot: s.ydot,
        energy: p.energy(s),
    });
}

/// Minimum number of last-decade impacts for [`nonlinear_asymptotic_alpha`].
pub const MIN_ALPHA_TAIL: usize = 100;

/// Mean over the last decade of `(X_n - X_{n+1}) / X_n^2`, with its predicted limit.
pub fn nonlinear_asymptotic_alpha(run: &SimulationLog, p: &NonlinearParams) -> Result<(f64, f64)> {
    let tail = last_decade(&run.events);
    if tail.len() < MIN_ALPHA_TAIL + 1 {
        return Err(BounceError::InsufficientTail {
            needed: MIN_ALPHA_TAIL + 1,
            available: tail.len(),
        });
    }
    let samples: Vec<f64> = tail
        .windows(2)
        .filter(|w| w[1].n == w[0].n + 1)
        .map(|w| (w[0].xdot_post - w[1].xdot_post) / (w[0].xdot_post * w[0].xdot_post))
        .collect();
    if samples.len() < MIN_ALPHA_TAIL {
        return Err(BounceError::InsufficientTail {
            needed: MIN_ALPHA_TAIL,
            available: samples.len(),
        });
    }
    let alpha_hat = samples.iter().sum::<f64>() / samples.len() as f64;
    Ok((alpha_hat, p.alpha_theory()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::run_simulation;
    use crate::flight::build_flight;

    #[test]
    fn linear_reduction_of_a_single_step() {
        let model = ModelParams::new(0.02, 0.1).unwrap();
        let p = NonlinearParams::linear(model);
        let s = BallState::new(0.0, 0.3, 0.2, 1.25, -0.1);
        let cfg = NonlinearConfig::default();
        let (mut state, mut t) = (s, 0.0f64);
        while t < 1.0 {
            let (next, dt, _) = nonlinear_flight_step(&state, &p, (1.0 - t).min(0.05), &cfg).unwrap();
            state = next;
            t += dt;
        }
        let exact = build_flight(&s, &model).eval(t);
        assert!((state.x - exact.x).abs() < 1e-9);
        assert!((state.y - exact.y).abs() < 1e-9);
    }

    #[test]
    fn equilibrium_rests_on_the_floor() {
        let p = NonlinearParams::new(0.01, 0.1, 1.0, 0.5, 0.5).unwrap();
        let eq = p.equilibrium_state();
        assert!(p.upper_acceleration(&eq).abs() < 1e-15);
        assert!(p.lower_acceleration(&eq) < 0.0);
        let cfg = NonlinearConfig {
            engine: EngineConfig {
                t_max: 10.0,
                ..EngineConfig::default()
            },
            ..NonlinearConfig::default()
        };
        let log = run_nonlinear(&eq, &p, &cfg).unwrap();
        assert!(log.events.is_empty());
        assert_eq!(log.final_state.y, eq.y);
    }

    #[test]
    fn linear_contact_times_match_engine() {
        let model = ModelParams::new(0.05, 0.1).unwrap();
        let p = NonlinearParams::linear(model);
        let engine = EngineConfig {
            max_impacts: 20,
            ..EngineConfig::default()
        };
        let init = BallState::drop_from(0.5, 0.0);
        let a = run_simulation(&init, &model, &engine).unwrap();
        let b = run_nonlinear(
            &init,
            &p,
            &NonlinearConfig {
                engine,
                ..NonlinearConfig::default()
            },
        )
        .unwrap();
        assert_eq!(a.events.len(), b.events.len());
        for (x, y) in a.events.iter().zip(&b.events) {
            assert!((x.t - y.t).abs() < 1e-8, "{} vs {}", x.t, y.t);
        }
    }

    #[test]
    fn energy_decreases_along_nonlinear_flight() {
        let p = NonlinearParams::new(0.01, 0.1, 1.0, 0.5, 0.5).unwrap();
        let cfg = NonlinearConfig::default();
        let mut s = BallState::new(0.0, 0.5, 0.1, 1.2, -0.3);
        let mut e = p.energy(&s);
        for _ in 0..200 {
            let (next, _, _) = nonlinear_flight_step(&s, &p, 0.05, &cfg).unwrap();
            let en = p.energy(&next);
            assert!(en <= e + 1e-12);
            s = next;
            e = en;
        }
    }

    #[test]
    fn alpha_theory_values() {
        let lin = NonlinearParams::linear(ModelParams::new(0.01, 0.1).unwrap());
        assert!((lin.alpha_theory() - 0.1 / 0.03).abs() < 1e-14);
        let h = NonlinearParams::new(0.01, 0.1, 1.0, 0.5, 0.5).unwrap();
        assert!((h.alpha_theory() - 0.1 / 0.03 * 0.01f64.cbrt()).abs() < 1e-14);
    }

    #[test]
    fn parameter_validation() {
        assert!(NonlinearParams::new(0.01, 0.1, 0.0, 0.5, 0.5).is_err());
        assert!(NonlinearParams::new(0.01, 0.1, 1.0, -0.5, 0.5).is_err());
    }
}
