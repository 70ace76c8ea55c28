//! Exact propagation of the airborne motion.
//!
//! Off the floor the centre of mass falls freely (`psi'' = -gamma`) and the
//! half-compression is a damped oscillator (`xi'' = -xi - 2 mu xi'`). The
//! floor gap `x = psi - xi` is evaluated from Taylor remainders of the
//! oscillator so that it keeps full relative precision when the ball is
//! within a hair of the floor.

use crate::model::{BallState, CmCoords, Energy, ModelParams};
use crate::oscillator::{DampedOscillator, Regime};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlightSolution {
    origin: BallState,
    cm: CmCoords,
    params: ModelParams,
    osc: DampedOscillator,
}

pub fn build_flight(s: &BallState, p: &ModelParams) -> FlightSolution {
    FlightSolution {
        origin: *s,
        cm: s.to_cm(),
        params: *p,
        osc: DampedOscillator::new(p.mu, 1.0),
    }
}

pub fn eval_flight(f: &FlightSolution, tau: f64) -> BallState {
    f.eval(tau)
}

pub fn eval_flight_derivatives(f: &FlightSolution, tau: f64) -> [f64; 4] {
    f.x_derivatives(tau)
}

impl FlightSolution {
    pub fn origin(&self) -> &BallState {
        &self.origin
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn regime(&self) -> Regime {
        self.osc.regime()
    }

    pub fn oscillator(&self) -> &DampedOscillator {
        &self.osc
    }

    fn psi(&self, tau: f64) -> (f64, f64) {
        let g = self.params.gamma;
        (
            self.cm.psi + self.cm.psidot * tau - 0.5 * g * tau * tau,
            self.cm.psidot - g * tau,
        )
    }

    /// Floor gap and its rate, `(x, xdot)`.
    pub fn gap(&self, tau: f64) -> (f64, f64) {
        let g = self.params.gamma;
        let (r_pos, r_vel) = self.osc.remainders(self.cm.xi, self.cm.xidot, tau);
        let o = &self.origin;
        (
            o.x + o.xdot * tau - 0.5 * g * tau * tau - r_pos,
            o.xdot - g * tau - r_vel,
        )
    }

    /// `x` and its first three time derivatives at offset `tau`.
    pub fn x_derivatives(&self, tau: f64) -> [f64; 4] {
        let (x, xdot) = self.gap(tau);
        let [_, _, xi_dd, xi_ddd] = self.osc.eval_derivatives(self.cm.xi, self.cm.xidot, tau);
        [x, xdot, -self.params.gamma - xi_dd, -xi_ddd]
    }

    /// `y` and its first three time derivatives at offset `tau`.
    pub fn y_derivatives(&self, tau: f64) -> [f64; 4] {
        let (psi, psidot) = self.psi(tau);
        let [xi, xid, xidd, xiddd] = self.osc.eval_derivatives(self.cm.xi, self.cm.xidot, tau);
        [psi + xi + 1.0, psidot + xid, -self.params.gamma + xidd, xiddd]
    }

    pub fn eval(&self, tau: f64) -> BallState {
        let (psi, psidot) = self.psi(tau);
        let (xi, xidot) = self.osc.eval(self.cm.xi, self.cm.xidot, tau);
        let (x, xdot) = self.gap(tau);
        BallState {
            t: self.origin.t + tau,
            x,
            xdot,
            y: psi + xi + 1.0,
            ydot: psidot + xidot,
        }
    }

    pub fn cm_at(&self, tau: f64) -> CmCoords {
        let (psi, psidot) = self.psi(tau);
        let (xi, xidot) = self.osc.eval(self.cm.xi, self.cm.xidot, tau);
        CmCoords { psi, psidot, xi, xidot }
    }

    pub fn energy(&self, tau: f64) -> Energy {
        let c = self.cm_at(tau);
        Energy(0.5 * (c.xidot * c.xidot + c.xi * c.xi + c.psidot * c.psidot) + self.params.gamma * c.psi)
    }

    /// Offset by which the floor must have been reached: the oscillator
    /// amplitude `sqrt(xi^2 + xi'^2)` never grows, so `x <= psi + amplitude`,
    /// and the parabola drops below `-amplitude` at the returned time.
    pub fn contact_horizon(&self) -> f64 {
        let amp = self.cm.xi.hypot(self.cm.xidot);
        let g = self.params.gamma;
        let v = self.cm.psidot;
        let h = self.cm.psi + amp;
        if h <= 0.0 && v <= 0.0 {
            return 0.0;
        }
        (v + (v * v + 2.0 * g * h).max(0.0).sqrt()) / g
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(gamma: f64, mu: f64) -> ModelParams {
        ModelParams::new(gamma, mu).unwrap()
    }

    #[test]
    fn offset_zero_reproduces_origin() {
        let p = params(0.03, 0.2);
        let s = BallState::new(1.5, 0.2, -0.3, 1.4, 0.7);
        let e = build_flight(&s, &p).eval(0.0);
        assert!((e.x - s.x).abs() < 1e-14);
        assert!((e.xdot - s.xdot).abs() < 1e-14);
        assert!((e.y - s.y).abs() < 1e-14);
        assert!((e.ydot - s.ydot).abs() < 1e-14);
        assert_eq!(e.t, s.t);
    }

    #[test]
    fn unexcited_spring_is_a_parabola() {
        let p = params(0.5, 0.3);
        let f = build_flight(&BallState::drop_from(1.0, 0.0), &p);
        let s = f.eval(2.0);
        assert!(s.x.abs() < 1e-15);
        assert!((s.xdot + 1.0).abs() < 1e-15);
        for tau in [0.1, 0.7, 3.0] {
            let c = f.cm_at(tau);
            assert_eq!(c.xi, 0.0);
            assert_eq!(c.xidot, 0.0);
            let [_, _, xdd, _] = f.x_derivatives(tau);
            assert_eq!(xdd, -0.5);
        }
    }

    #[test]
    fn critical_damping_regime() {
        let f = build_flight(&BallState::drop_from(1.0, 0.0), &params(0.1, 1.0));
        assert_eq!(f.regime(), Regime::Critical);
        let f = build_flight(&BallState::drop_from(1.0, 0.0), &params(0.1, 2.0));
        assert_eq!(f.regime(), Regime::Overdamped);
    }

    #[test]
    fn acceleration_matches_equations_of_motion() {
        let p = params(0.02, 0.15);
        let s = BallState::new(0.0, 0.0, 0.3, 0.9, -0.1);
        let f = build_flight(&s, &p);
        let (xdd, _) = s.flight_accelerations(&p);
        assert!((f.x_derivatives(0.0)[2] - xdd).abs() < 1e-12);
    }

    #[test]
    fn central_difference_of_velocity_matches_acceleration() {
        let p = params(0.02, 0.15);
        let f = build_flight(&BallState::new(0.0, 0.1, 0.3, 0.9, -0.1), &p);
        let h = 1e-5;
        for tau in [0.2, 1.3, 4.0] {
            let fd = (f.gap(tau + h).1 - f.gap(tau - h).1) / (2.0 * h);
            assert!((fd - f.x_derivatives(tau)[2]).abs() < 1e-9);
        }
    }

    #[test]
    fn horizon_bounds_first_contact() {
        let p = params(0.01, 0.05);
        let f = build_flight(&BallState::new(0.0, 0.0, 0.4, 1.1, -0.2), &p);
        let h = f.contact_horizon();
        assert!(f.gap(h).0 <= 0.0);
    }
}
