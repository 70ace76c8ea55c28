//! Closed-form solution of the homogeneous damped oscillator
//! `w'' + 2 beta w' + omega0^2 w = 0`.
//!
//! The solution is written as `w = e^{-beta t} [a C(t) + (b + beta a) S(t)]`
//! where `C` and `S` are the even and odd fundamental solutions of
//! `u'' = s u` with `s = beta^2 - omega0^2`. Both are entire in `s t^2`, so
//! near the critical boundary they are summed as power series and no branch
//! switch introduces an error. For short offsets the Taylor remainders
//! `w(t) - a - b t` and `w'(t) - b` are summed directly from the derivative
//! recurrence; the floor gap of the ball is a small difference of such terms.

use serde::{Deserialize, Serialize};

/// Width of the band around `beta = omega0` labelled critical.
pub const CRITICAL_BAND: f64 = 1e-6;

const SERIES_ARG_LIMIT: f64 = 0.1;
const REMAINDER_SERIES_LIMIT: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Regime {
    Underdamped,
    Critical,
    Overdamped,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DampedOscillator {
    beta: f64,
    omega0_sq: f64,
    s: f64,
    regime: Regime,
}

impl DampedOscillator {
    pub fn new(beta: f64, omega0_sq: f64) -> Self {
        debug_assert!(beta >= 0.0 && omega0_sq > 0.0);
        let omega0 = omega0_sq.sqrt();
        let regime = if (beta / omega0 - 1.0).abs() < CRITICAL_BAND {
            Regime::Critical
        } else if beta < omega0 {
            Regime::Underdamped
        } else {
            Regime::Overdamped
        };
        Self {
            beta,
            omega0_sq,
            s: beta * beta - omega0_sq,
            regime,
        }
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn omega0_sq(&self) -> f64 {
        self.omega0_sq
    }

    pub fn regime(&self) -> Regime {
        self.regime
    }

    /// Magnitude of the fastest characteristic root.
    pub fn spectral_radius(&self) -> f64 {
        if self.s <= 0.0 {
            self.omega0_sq.sqrt()
        } else {
            self.beta + self.s.sqrt()
        }
    }

    /// Slowest decay rate of the envelope.
    pub fn slowest_rate(&self) -> f64 {
        if self.s <= 0.0 {
            self.beta
        } else {
            self.beta - self.s.sqrt()
        }
    }

    /// Damped period for underdamped motion, `None` otherwise.
    pub fn damped_period(&self) -> Option<f64> {
        (self.s < 0.0).then(|| 2.0 * std::f64::consts::PI / (-self.s).sqrt())
    }

    /// Returns `(e^{-beta t} C(t), e^{-beta t} S(t))`.
    fn weights(&self, t: f64) -> (f64, f64) {
        let z = self.s * t * t;
        if z.abs() < SERIES_ARG_LIMIT {
            let (mut c, mut sn) = (1.0, 1.0);
            let (mut tc, mut ts) = (1.0, 1.0);
            for k in 1..20 {
                let k2 = (2 * k) as f64;
                tc *= z / ((k2 - 1.0) * k2);
                ts *= z / (k2 * (k2 + 1.0));
                c += tc;
                sn += ts;
                if tc.abs() < 1e-18 && ts.abs() < 1e-18 {
                    break;
                }
            }
            let decay = (-self.beta * t).exp();
            (decay * c, decay * sn * t)
        } else if self.s < 0.0 {
            let w = (-self.s).sqrt();
            let decay = (-self.beta * t).exp();
            let (sin, cos) = (w * t).sin_cos();
            (decay * cos, decay * sin / w)
        } else {
            let kappa = self.s.sqrt();
            if kappa * t < 20.0 {
                let decay = (-self.beta * t).exp();
                (decay * (kappa * t).cosh(), decay * (kappa * t).sinh() / kappa)
            } else {
                let slow = ((kappa - self.beta) * t).exp();
                let fast = (-(kappa + self.beta) * t).exp();
                (0.5 * (slow + fast), 0.5 * (slow - fast) / kappa)
            }
        }
    }

    /// Position and velocity at offset `t` from initial data `(a, b)`.
    pub fn eval(&self, a: f64, b: f64, t: f64) -> (f64, f64) {
        let (c, s) = self.weights(t);
        (
            a * c + (b + self.beta * a) * s,
            b * c - (self.omega0_sq * a + self.beta * b) * s,
        )
    }

    /// Position, velocity, acceleration and jerk at offset `t`.
    pub fn eval_derivatives(&self, a: f64, b: f64, t: f64) -> [f64; 4] {
        let (w, wd) = self.eval(a, b, t);
        let wdd = self.acceleration(w, wd);
        let wddd = -2.0 * self.beta * wdd - self.omega0_sq * wd;
        [w, wd, wdd, wddd]
    }

    pub fn acceleration(&self, w: f64, wd: f64) -> f64 {
        -2.0 * self.beta * wd - self.omega0_sq * w
    }

    /// Taylor remainders `(w(t) - a - b t, w'(t) - b)`, accurate to a few ulps
    /// of the remainder itself even when `t` is tiny.
    pub fn remainders(&self, a: f64, b: f64, t: f64) -> (f64, f64) {
        if self.spectral_radius() * t <= REMAINDER_SERIES_LIMIT {
            // d_{k+2} = -2 beta d_{k+1} - omega0^2 d_k
            let (mut d_prev, mut d_cur) = (b, self.acceleration(a, b));
            let mut pow = t; // t^k / k! for the velocity series, k starting at 1
            let mut r_vel = d_cur * pow;
            let mut r_pos = d_cur * pow * t / 2.0;
            for k in 2..80 {
                let d_next = -2.0 * self.beta * d_cur - self.omega0_sq * d_prev;
                d_prev = d_cur;
                d_cur = d_next;
                pow *= t / k as f64;
                let dv = d_cur * pow;
                let dp = dv * t / (k + 1) as f64;
                r_vel += dv;
                r_pos += dp;
                if dv.abs() <= 1e-18 * r_vel.abs() && dp.abs() <= 1e-18 * r_pos.abs() {
                    break;
                }
                if dv == 0.0 && dp == 0.0 {
                    break;
                }
            }
            (r_pos, r_vel)
        } else {
            let (w, wd) = self.eval(a, b, t);
            (w - a - b * t, wd - b)
        }
    }
}
