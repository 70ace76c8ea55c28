//! Rigid ball bouncing with a restitution law, the classical setting in which
//! a constant coefficient produces infinitely many impacts in finite time.

use serde::{Deserialize, Serialize};

use crate::error::{BounceError, Result};
use crate::experiments::spring_restitution;
use crate::model::ModelParams;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum RestitutionModel {
    Constant(f64),
    /// `r(u) = 1 - (u / U)^{1/5}`, leading terms of the Hertz-contact law.
    OneFifth {
        u_scale: f64,
    },
    /// Constant spring restitution at high speed, linear approach to one below
    /// the crossover speed.
    Stitched(ModelParams),
}

impl RestitutionModel {
    pub fn coefficient(&self, u: f64) -> Result<f64> {
        match *self {
            RestitutionModel::Constant(r) => Ok(r),
            RestitutionModel::OneFifth { u_scale } => Ok(1.0 - (u / u_scale).powf(0.2)),
            RestitutionModel::Stitched(p) => stitched_restitution(u, &p),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RigidBounce {
    /// Take-off speeds `u_0 ... u_n`.
    pub speeds: Vec<f64>,
    /// Flight durations `2 u_k / g`.
    pub flight_times: Vec<f64>,
    /// Partial sums of the flight durations.
    pub cumulative_time: Vec<f64>,
}

/// `n` flights of a rigid ball launched at `u0` under gravity `g`.
pub fn rigid_bounce(u0: f64, g: f64, model: RestitutionModel, n: usize) -> Result<RigidBounce> {
    if !(u0 > 0.0 && u0.is_finite()) || !(g > 0.0 && g.is_finite()) || n == 0 {
        return Err(BounceError::InvalidParams(format!(
            "need u0 > 0, g > 0, n >= 1 (got u0 = {u0}, g = {g}, n = {n})"
        )));
    }
    let mut speeds = Vec::with_capacity(n);
    let mut u = u0;
    for _ in 0..n {
        speeds.push(u);
        u *= model.coefficient(u)?;
    }
    let flight_times: Vec<f64> = speeds.iter().map(|u| 2.0 * u / g).collect();
    let cumulative_time = flight_times
        .iter()
        .scan(0.0, |acc, t| {
            *acc += t;
            Some(*acc)
        })
        .collect();
    Ok(RigidBounce {
        speeds,
        flight_times,
        cumulative_time,
    })
}

/// Total time `2 u0 (1 - r^N) / (g (1 - r))` of the first `N` flights under a
/// constant coefficient.
pub fn geometric_flight_time(u0: f64, g: f64, r: f64, flights: usize) -> f64 {
    2.0 * u0 * (1.0 - r.powi(flights as i32)) / (g * (1.0 - r))
}

/// Speed below which the stitched law leaves the spring restitution for the
/// linear branch.
pub fn crossover_speed(p: &ModelParams) -> Result<f64> {
    Ok(3.0 * p.gamma / p.mu * (1.0 - spring_restitution(p.mu)?))
}

/// Restitution of the deformable ball as a function of impact speed.
pub fn stitched_restitution(u: f64, p: &ModelParams) -> Result<f64> {
    if u.is_nan() || u < 0.0 {
        return Err(BounceError::Domain(format!(
            "impact speed must be non-negative, got {u}"
        )));
    }
    let r_spring = spring_restitution(p.mu)?;
    if u > crossover_speed(p)? {
        Ok(r_spring)
    } else {
        Ok(1.0 - p.mu / (3.0 * p.gamma) * u)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_restitution_collapses() {
        let b = rigid_bounce(1.0, 1.0, RestitutionModel::Constant(0.5), 20).unwrap();
        assert!((b.cumulative_time[19] - 4.0).abs() < 1e-5);
        for (k, s) in b.cumulative_time.iter().enumerate() {
            assert!((s - geometric_flight_time(1.0, 1.0, 0.5, k + 1)).abs() < 1e-12);
        }
    }

    #[test]
    fn elastic_flights_never_stop() {
        let b = rigid_bounce(1.0, 2.0, RestitutionModel::Constant(1.0), 100).unwrap();
        assert!(b.flight_times.iter().all(|&t| t == 1.0));
        assert_eq!(b.cumulative_time[99], 100.0);
    }

    #[test]
    fn stitched_law_is_continuous_and_monotone() {
        let p = ModelParams::new(0.01, 0.01).unwrap();
        let uc = crossover_speed(&p).unwrap();
        let below = stitched_restitution(uc, &p).unwrap();
        let above = stitched_restitution(uc * (1.0 + 1e-15), &p).unwrap();
        assert!((below - above).abs() < 1e-14);
        assert_eq!(stitched_restitution(0.0, &p).unwrap(), 1.0);
        assert!((stitched_restitution(10.0, &p).unwrap() - 0.969).abs() < 1e-3);
        let mut prev = 1.0;
        for k in 0..1000 {
            let r = stitched_restitution(k as f64 * 2.0 * uc / 1000.0, &p).unwrap();
            assert!(r <= prev);
            prev = r;
        }
    }

    #[test]
    fn stitched_law_needs_underdamped_spring() {
        let p = ModelParams::new(0.01, 1.5).unwrap();
        assert!(matches!(stitched_restitution(0.1, &p), Err(BounceError::Domain(_))));
        let p = ModelParams::new(0.01, 0.1).unwrap();
        assert!(stitched_restitution(-1.0, &p).is_err());
    }

    #[test]
    fn rejects_bad_launch() {
        assert!(rigid_bounce(0.0, 1.0, RestitutionModel::Constant(0.5), 3).is_err());
        assert!(rigid_bounce(1.0, 1.0, RestitutionModel::Constant(0.5), 0).is_err());
    }
}
