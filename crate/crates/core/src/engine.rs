//! Event-driven simulation loop: exact flights, machine-precision contact
//! location, the collision map, and hand-over to contact phases.

use serde::{Deserialize, Serialize};

use crate::error::{BounceError, Result};
use crate::flight::{build_flight, FlightSolution};
use crate::model::{energy, BallState, ModelParams, FLOOR_TOLERANCE};
use crate::oscillator::Regime;
use crate::roots::first_upcrossing;
use crate::sticky::{build_sticky, departure_offset, find_detachment, resting_contact, Detachment, StickySolution};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EngineConfig {
    /// Time at which the run stops.
    pub t_max: f64,
    /// Maximum number of logged events.
    pub max_impacts: usize,
    /// A regular impact ending a flight shorter than this stops the run.
    pub tau_floor: f64,
    /// Contact velocities at or below this magnitude count as zero.
    pub v_eps: f64,
    /// Contact accelerations at or below this magnitude count as zero.
    pub a_eps: f64,
    /// First probe offset off the floor, relative to `max(1, T_xi)`.
    pub departure_probe: f64,
    /// Sampling interval of the stored trajectory; `None` stores nothing.
    pub sample_dt: Option<f64>,
    /// Number of velocities to extrapolate with the terminal map after the
    /// run hits `tau_floor`; zero disables the hand-off.
    pub handoff_steps: usize,
}

impl Default for EngineConfig {
    fn default() -> Self {
        Self {
            t_max: 1e4,
            max_impacts: 1_000_000,
            tau_floor: 1e-9,
            v_eps: 1e-10,
            a_eps: 1e-10,
            departure_probe: 1e-9,
            sample_dt: None,
            handoff_steps: 0,
        }
    }
}

impl EngineConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(BounceError::InvalidParams(format!("{name} must be positive, got {v}")))
            }
        };
        positive("t_max", self.t_max)?;
        positive("tau_floor", self.tau_floor)?;
        positive("v_eps", self.v_eps)?;
        positive("a_eps", self.a_eps)?;
        positive("departure_probe", self.departure_probe)?;
        if let Some(dt) = self.sample_dt {
            positive("sample_dt", dt)?;
        }
        Ok(())
    }

    pub(crate) fn departure_offset(&self, t_char: f64) -> f64 {
        self.departure_probe * t_char.max(1.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ContactKind {
    Regular,
    Grazing,
    StickyStart,
    StickyEnd,
}

impl ContactKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ContactKind::Regular => "regular",
            ContactKind::Grazing => "grazing",
            ContactKind::StickyStart => "sticky_start",
            ContactKind::StickyEnd => "sticky_end",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContactEvent {
    /// One-based position in the log.
    pub n: usize,
    pub t: f64,
    /// Time since the previous event (or since the start of the run).
    pub tau: f64,
    pub kind: ContactKind,
    pub xdot_pre: f64,
    pub xdot_post: f64,
    pub y: f64,
    pub ydot: f64,
    pub energy: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Termination {
    TimeLimit,
    ImpactLimit,
    AsymptoticFloor,
    InfiniteSticky,
}

/// Tail means of the normalized ratios that tend to one as impacts accumulate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticConstants {
    /// Number of regular impacts averaged over.
    pub window: usize,
    /// Mean of `n tau_n mu / 3`.
    pub n_tau: f64,
    /// Mean of `n Xdot_n mu / (3 gamma)`.
    pub n_velocity: f64,
    /// Mean of `Xdot_n / (tau_n gamma)`.
    pub velocity_over_tau: f64,
    /// Fitted exponent of `tau_n` against `n`.
    pub tau_exponent: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationLog {
    pub params: ModelParams,
    pub initial: BallState,
    pub events: Vec<ContactEvent>,
    pub trajectory: Vec<BallState>,
    pub termination: Termination,
    pub final_state: BallState,
    pub asymptotics: Option<AsymptoticConstants>,
    /// Impact velocities continued with the terminal map after the floor.
    pub handoff: Vec<f64>,
}

/// Time scale on which the gap can change sign: the shortest of the spring
/// half-period, the free-fall time and the bound on the flight itself.
fn flight_sample_step(f: &FlightSolution, horizon: f64) -> f64 {
    let osc = f.oscillator();
    let t_xi = match osc.regime() {
        Regime::Underdamped => std::f64::consts::PI / (-osc.beta().powi(2) + osc.omega0_sq()).sqrt(),
        _ => std::f64::consts::PI / osc.spectral_radius(),
    };
    let t_psi = (0.5 / f.params().gamma).sqrt();
    t_xi.min(t_psi).min(horizon) / 64.0
}

/// Offset and state of the next floor contact of the flight `f`. The state is
/// snapped to `x = 0`.
pub fn find_next_contact(f: &FlightSolution, p: &ModelParams, cfg: &EngineConfig) -> Result<(f64, BallState)> {
    let o = f.origin();
    let h = |t: f64| {
        let [x, xd, xdd, _] = f.x_derivatives(t);
        [-x, -xd, -xdd]
    };
    let horizon = f.contact_horizon();
    let remaining = cfg.t_max - o.t;
    let step = flight_sample_step(f, horizon.max(f64::MIN_POSITIVE));

    let start = if o.x > 0.0 {
        0.0
    } else {
        let t_char = p.characteristic_times().t_xi.unwrap_or(1.0);
        departure_offset(&h, cfg.departure_offset(t_char)).ok_or(BounceError::DegenerateContact {
            t: o.t,
            xdot: o.xdot,
            xddot: f.x_derivatives(0.0)[2],
        })?
    };

    let end = horizon * (1.0 + 1e-12) + f64::MIN_POSITIVE;
    let limited = end > remaining;
    let end = end.min(remaining.max(start));
    let root = first_upcrossing(h, start, end, step.min(end - start).max(f64::MIN_POSITIVE), |_, _| {
        false
    });
    match root {
        Some(tau) => {
            let mut s = f.eval(tau);
            s.x = 0.0;
            Ok((tau, s))
        }
        None if limited => Err(BounceError::NoContact {
            t_start: o.t,
            t_limit: cfg.t_max,
        }),
        None => {
            // The bound guarantees x <= 0 at the horizon, so only a contact
            // closer than one ulp of the horizon can end up here.
            let mut s = f.eval(horizon);
            s.x = 0.0;
            Ok((horizon, s))
        }
    }
}

/// Reflects the lower-mass velocity; the upper mass is untouched.
pub fn collide(s: &BallState) -> BallState {
    BallState { xdot: -s.xdot, ..*s }
}

/// Kind of a contact from the state at the contact instant.
pub fn classify_contact(s: &BallState, p: &ModelParams, cfg: &EngineConfig) -> Result<ContactKind> {
    if s.xdot.abs() > cfg.v_eps {
        return Ok(ContactKind::Regular);
    }
    let (xddot, _) = s.flight_accelerations(p);
    if xddot > cfg.a_eps {
        return Ok(ContactKind::Grazing);
    }
    if xddot.abs() <= cfg.a_eps {
        return Ok(if s.ydot < 4.0 * p.gamma * p.mu {
            ContactKind::StickyStart
        } else {
            // Third derivative non-negative: the ball touches and lifts.
            ContactKind::Grazing
        });
    }
    Err(BounceError::DegenerateContact {
        t: s.t,
        xdot: s.xdot,
        xddot,
    })
}

/// Jumps of the derivatives of `x` and `y` across one regular impact, against
/// their predicted multiples of the post-impact velocity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JumpReport {
    pub velocity: f64,
    /// Observed `[xdot], [xddot], [yddot], [x'''], [y''']`.
    pub observed: [f64; 5],
    pub predicted: [f64; 5],
}

impl JumpReport {
    pub fn max_error(&self) -> f64 {
        self.observed
            .iter()
            .zip(&self.predicted)
            .map(|(o, p)| (o - p).abs())
            .fold(0.0, f64::max)
    }
}

/// Compares derivatives at the end of `f_pre` with those at the start of
/// `f_post` for a regular impact.
pub fn jump_relations_check(e: &ContactEvent, f_pre: &FlightSolution, f_post: &FlightSolution) -> JumpReport {
    let mu = f_pre.params().mu;
    let tau_pre = e.t - f_pre.origin().t;
    let xa = f_pre.x_derivatives(tau_pre);
    let ya = f_pre.y_derivatives(tau_pre);
    let xb = f_post.x_derivatives(0.0);
    let yb = f_post.y_derivatives(0.0);
    let v = e.xdot_post;
    let c3 = (4.0 * mu * mu - 1.0) * v;
    JumpReport {
        velocity: v,
        observed: [
            xb[1] - xa[1],
            xb[2] - xa[2],
            yb[2] - ya[2],
            xb[3] - xa[3],
            yb[3] - ya[3],
        ],
        predicted: [2.0 * v, -2.0 * mu * v, 2.0 * mu * v, c3, -c3],
    }
}

enum Phase {
    Flight,
    Contact { logged: bool },
}

struct Recorder<'a> {
    cfg: &'a EngineConfig,
    t0: f64,
    next_sample: usize,
    samples: Vec<BallState>,
}

impl Recorder<'_> {
    /// Stores samples with times in `[from, to)` (or `[from, to]` when `closed`).
    fn segment<F: Fn(f64) -> BallState>(&mut self, from: f64, to: f64, closed: bool, eval: F) {
        let Some(dt) = self.cfg.sample_dt else { return };
        loop {
            let t = self.t0 + self.next_sample as f64 * dt;
            if t > to || (!closed && t == to) {
                break;
            }
            let mut s = eval(t - from);
            s.t = t;
            self.samples.push(s);
            self.next_sample += 1;
        }
    }
}

/// Runs the hybrid dynamics from `initial` until a termination condition.
pub fn run_simulation(initial: &BallState, p: &ModelParams, cfg: &EngineConfig) -> Result<SimulationLog> {
    p.validate()?;
    cfg.validate()?;
    if !initial.is_finite() {
        return Err(BounceError::InvalidState("non-finite initial state".into()));
    }
    if !initial.satisfies_floor() {
        return Err(BounceError::InvalidState(format!(
            "lower mass below the floor: x = {}",
            initial.x
        )));
    }

    let t_end = cfg.t_max;
    let mut rec = Recorder {
        cfg,
        t0: initial.t,
        next_sample: 0,
        samples: Vec::new(),
    };
    let mut events: Vec<ContactEvent> = Vec::new();
    let mut state = *initial;
    let mut last_event_t = initial.t;

    let push = |events: &mut Vec<ContactEvent>, kind, s: &BallState, xdot_post: f64, last: f64| {
        events.push(ContactEvent {
            n: events.len() + 1,
            t: s.t,
            tau: s.t - last,
            kind,
            xdot_pre: s.xdot,
            xdot_post,
            y: s.y,
            ydot: s.ydot,
            energy: energy(s, p).value(),
        });
    };

    let mut phase = if state.x <= FLOOR_TOLERANCE {
        state.x = 0.0;
        initial_floor_phase(&state, p, cfg)
    } else {
        Phase::Flight
    };
    if let Phase::Flight = phase {
        if state.x == 0.0 && state.xdot < -cfg.v_eps {
            push(&mut events, ContactKind::Regular, &state, -state.xdot, last_event_t);
            state = collide(&state);
        }
    }

    let (termination, final_state) = loop {
        if events.len() >= cfg.max_impacts {
            break (Termination::ImpactLimit, state);
        }
        match phase {
            Phase::Flight => {
                let f = build_flight(&state, p);
                match find_next_contact(&f, p, cfg) {
                    Err(BounceError::NoContact { .. }) => {
                        rec.segment(state.t, t_end, true, |t| f.eval(t));
                        break (Termination::TimeLimit, f.eval(t_end - state.t));
                    }
                    Err(e) => return Err(e),
                    Ok((_, contact)) => {
                        rec.segment(state.t, contact.t, false, |t| f.eval(t));
                        let tau = contact.t - last_event_t;
                        match classify_contact(&contact, p, cfg)? {
                            kind @ (ContactKind::Regular | ContactKind::Grazing) => {
                                push(&mut events, kind, &contact, -contact.xdot, last_event_t);
                                state = collide(&contact);
                                last_event_t = contact.t;
                                if kind == ContactKind::Regular && tau < cfg.tau_floor {
                                    break (Termination::AsymptoticFloor, state);
                                }
                            }
                            ContactKind::StickyStart | ContactKind::StickyEnd => {
                                push(&mut events, ContactKind::StickyStart, &contact, 0.0, last_event_t);
                                state = BallState { xdot: 0.0, ..contact };
                                last_event_t = contact.t;
                                phase = Phase::Contact { logged: true };
                            }
                        }
                    }
                }
            }
            Phase::Contact { logged } => {
                let ss: StickySolution = if logged {
                    build_sticky(&state, p)?
                } else {
                    resting_contact(&state, p)
                };
                let detach = find_detachment(&ss, p, cfg);
                match detach.offset().filter(|d| state.t + d <= t_end) {
                    None => {
                        rec.segment(state.t, t_end, true, |t| ss.eval(t));
                        let term = if logged && detach == Detachment::Never {
                            Termination::InfiniteSticky
                        } else {
                            Termination::TimeLimit
                        };
                        break (term, ss.eval(t_end - state.t));
                    }
                    Some(d) => {
                        rec.segment(state.t, state.t + d, false, |t| ss.eval(t));
                        let lift = ss.eval(d);
                        push(&mut events, ContactKind::StickyEnd, &lift, 0.0, last_event_t);
                        state = lift;
                        last_event_t = lift.t;
                        phase = Phase::Flight;
                    }
                }
            }
        }
    };

    let asymptotics = match termination {
        Termination::AsymptoticFloor => tail_constants(&events, p, 1),
        _ => None,
    };
    let handoff = match (termination, events.last()) {
        (Termination::AsymptoticFloor, Some(last)) if cfg.handoff_steps > 0 => {
            terminal_map(last.xdot_post, p, cfg.handoff_steps)
        }
        _ => Vec::new(),
    };

    Ok(SimulationLog {
        params: *p,
        initial: *initial,
        events,
        trajectory: rec.samples,
        termination,
        final_state,
        asymptotics,
        handoff,
    })
}

/// Decides how a run starting with the lower mass on the floor proceeds.
fn initial_floor_phase(s: &BallState, p: &ModelParams, cfg: &EngineConfig) -> Phase {
    if s.xdot.abs() > cfg.v_eps {
        return Phase::Flight;
    }
    let (xddot, _) = s.flight_accelerations(p);
    if xddot > cfg.a_eps || (xddot.abs() <= cfg.a_eps && s.ydot >= 4.0 * p.gamma * p.mu) {
        Phase::Flight
    } else {
        Phase::Contact { logged: false }
    }
}

/// Iterates `v -> v - (mu / (3 gamma)) v^2` from `v0`.
pub fn terminal_map(v0: f64, p: &ModelParams, steps: usize) -> Vec<f64> {
    let alpha = p.mu / (3.0 * p.gamma);
    let mut v = v0;
    (0..steps)
        .map(|_| {
            v -= alpha * v * v;
            v
        })
        .collect()
}

/// Regular impacts with index `n` in the last decade `[N/10, N]` of the log.
pub fn last_decade(events: &[ContactEvent]) -> Vec<&ContactEvent> {
    let Some(last) = events.last() else {
        return Vec::new();
    };
    let lo = (last.n / 10).max(1);
    events
        .iter()
        .filter(|e| e.n >= lo && e.kind == ContactKind::Regular && e.tau > 0.0)
        .collect()
}

/// `n tau_n mu / 3`, `n Xdot_n mu / (3 gamma)` and `Xdot_n / (tau_n gamma)`.
pub fn normalized_ratios(e: &ContactEvent, p: &ModelParams) -> [f64; 3] {
    let n = e.n as f64;
    [
        n * e.tau * p.mu / 3.0,
        n * e.xdot_post * p.mu / (3.0 * p.gamma),
        e.xdot_post / (e.tau * p.gamma),
    ]
}

/// Last-decade means of the normalized ratios, if at least `min_window`
/// regular impacts fall in the window.
pub fn tail_constants(events: &[ContactEvent], p: &ModelParams, min_window: usize) -> Option<AsymptoticConstants> {
    let tail = last_decade(events);
    if tail.len() < min_window.max(2) {
        return None;
    }
    let m = tail.len() as f64;
    let mut sums = [0.0; 3];
    for e in &tail {
        for (s, r) in sums.iter_mut().zip(normalized_ratios(e, p)) {
            *s += r;
        }
    }
    let (lx, ly): (Vec<f64>, Vec<f64>) = tail.iter().map(|e| ((e.n as f64).ln(), e.tau.ln())).unzip();
    Some(AsymptoticConstants {
        window: tail.len(),
        n_tau: sums[0] / m,
        n_velocity: sums[1] / m,
        velocity_over_tau: sums[2] / m,
        tau_exponent: log_slope(&lx, &ly),
    })
}

/// Least-squares slope of `y` against `x`.
pub fn log_slope(x: &[f64], y: &[f64]) -> f64 {
    let m = x.len() as f64;
    let mx = x.iter().sum::<f64>() / m;
    let my = y.iter().sum::<f64>() / m;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}
