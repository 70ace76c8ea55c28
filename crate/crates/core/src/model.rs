//! Domain types of the two-mass ball: parameters, phase points, energy and
//! the force the ball exerts on the floor.
//!
//! Everything is nondimensional: lengths are in units of the rest length of
//! the spring, times in units of `sqrt(m / 2k)`. The lower mass sits at `x`,
//! the upper one at `y`; the floor is `x = 0`.

use serde::{Deserialize, Serialize};

use crate::error::{BounceError, Result};

/// Slack allowed on the floor constraint `x >= 0` to absorb root-finder residue.
pub const FLOOR_TOLERANCE: f64 = 1e-12;

/// Gravity and damping of the linear model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// Dimensionless gravity, `g m / (2 L k)`.
    pub gamma: f64,
    /// Dimensionless damping, `nu / sqrt(2 k m)`.
    pub mu: f64,
}

impl ModelParams {
    pub fn new(gamma: f64, mu: f64) -> Result<Self> {
        let p = Self { gamma, mu };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gamma.is_finite() && self.gamma > 0.0) {
            return Err(BounceError::InvalidParams(format!(
                "gamma must be positive and finite, got {}",
                self.gamma
            )));
        }
        if !(self.mu.is_finite() && self.mu > 0.0) {
            return Err(BounceError::InvalidParams(format!(
                "mu must be positive and finite, got {}",
                self.mu
            )));
        }
        Ok(())
    }

    /// True when the upper mass rests above the floor at equilibrium.
    pub fn physical(&self) -> bool {
        self.gamma < 0.5
    }

    /// Height of the upper mass at static equilibrium.
    pub fn y_equilibrium(&self) -> f64 {
        1.0 - 2.0 * self.gamma
    }

    /// Energy of the static equilibrium, the global minimum.
    pub fn min_energy(&self) -> Energy {
        Energy(-0.5 * self.gamma * self.gamma)
    }

    /// Energy below which the spring can never shrink to zero length.
    pub fn max_initial_energy(&self) -> Energy {
        Energy((1.0 - 4.0 * self.gamma) / 8.0)
    }

    pub fn characteristic_times(&self) -> CharacteristicTimes {
        characteristic_times(self)
    }
}

/// Phase point of the two masses. The floor frame is canonical; the
/// centre-of-mass view is derived on demand.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BallState {
    pub t: f64,
    pub x: f64,
    pub xdot: f64,
    pub y: f64,
    pub ydot: f64,
}

/// Centre-of-mass and half-compression coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CmCoords {
    pub psi: f64,
    pub psidot: f64,
    pub xi: f64,
    pub xidot: f64,
}

impl BallState {
    pub fn new(t: f64, x: f64, xdot: f64, y: f64, ydot: f64) -> Self {
        Self { t, x, xdot, y, ydot }
    }

    pub fn from_cm(t: f64, cm: CmCoords) -> Self {
        Self {
            t,
            x: cm.psi - cm.xi,
            xdot: cm.psidot - cm.xidot,
            y: cm.psi + cm.xi + 1.0,
            ydot: cm.psidot + cm.xidot,
        }
    }

    /// Static equilibrium: lower mass on the floor, spring compressed by `2 gamma`.
    pub fn equilibrium(p: &ModelParams) -> Self {
        Self::new(0.0, 0.0, 0.0, p.y_equilibrium(), 0.0)
    }

    /// Free drop with the spring at rest length and the centre of mass at `psi0`.
    pub fn drop_from(psi0: f64, psidot0: f64) -> Self {
        Self::from_cm(
            0.0,
            CmCoords {
                psi: psi0,
                psidot: psidot0,
                xi: 0.0,
                xidot: 0.0,
            },
        )
    }

    pub fn to_cm(&self) -> CmCoords {
        to_cm_coords(self)
    }

    pub fn satisfies_floor(&self) -> bool {
        self.x >= -FLOOR_TOLERANCE
    }

    pub fn is_finite(&self) -> bool {
        self.t.is_finite() && self.x.is_finite() && self.xdot.is_finite() && self.y.is_finite() && self.ydot.is_finite()
    }

    /// Accelerations `(xddot, yddot)` of the free (airborne) dynamics.
    pub fn flight_accelerations(&self, p: &ModelParams) -> (f64, f64) {
        let coupling = 0.5 * (self.y - self.x) + p.mu * (self.ydot - self.xdot);
        let xddot = coupling - p.gamma - 0.5;
        let yddot = -coupling - p.gamma + 0.5;
        (xddot, yddot)
    }
}

/// `(x, y)` to `(psi, xi)`: half-sum and half-difference about the rest length.
pub fn to_cm_coords(s: &BallState) -> CmCoords {
    CmCoords {
        psi: 0.5 * (s.y + s.x - 1.0),
        psidot: 0.5 * (s.ydot + s.xdot),
        xi: 0.5 * (s.y - s.x - 1.0),
        xidot: 0.5 * (s.ydot - s.xdot),
    }
}

/// Mechanical energy (kinetic + spring + gravitational).
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct Energy(pub f64);

impl Energy {
    pub fn value(self) -> f64 {
        self.0
    }
}

pub fn energy(s: &BallState, p: &ModelParams) -> Energy {
    let c = s.to_cm();
    Energy(0.5 * c.xidot * c.xidot + 0.5 * c.xi * c.xi + 0.5 * c.psidot * c.psidot + p.gamma * c.psi)
}

/// Net force of spring and gravity on the lower mass while it touches the floor.
pub fn floor_force(s: &BallState, p: &ModelParams) -> f64 {
    0.5 * s.y + p.mu * s.ydot - p.gamma - 0.5
}

/// Lowest energy at which a grazing or sticky contact can occur.
pub fn anomaly_energy_barrier(p: &ModelParams) -> f64 {
    let mu2 = p.mu * p.mu;
    p.gamma * p.gamma * (3.0 - 2.0 * mu2) / (2.0 * (1.0 + 2.0 * mu2))
}

/// Free-fall, half-period and damping times of the flight dynamics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CharacteristicTimes {
    pub t_psi: f64,
    /// Half the damped spring period; `None` when the spring is not underdamped.
    pub t_xi: Option<f64>,
    pub t_d: f64,
}

pub fn characteristic_times(p: &ModelParams) -> CharacteristicTimes {
    CharacteristicTimes {
        t_psi: (0.5 / p.gamma).sqrt(),
        t_xi: (p.mu < 1.0).then(|| std::f64::consts::PI / (1.0 - p.mu * p.mu).sqrt()),
        t_d: 1.0 / p.mu,
    }
}
