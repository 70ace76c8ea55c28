//! Scalar recurrences describing the late impacts: the quadratic map, its
//! power-law generalization, and the implicit map for the ratio of
//! consecutive velocities.

use serde::{Deserialize, Serialize};

use crate::engine::log_slope;
use crate::error::{BounceError, Result};
use crate::roots::invert_increasing;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum MapRule {
    /// `x -> x - alpha_n x^2`
    Quadratic,
    /// `x -> x - alpha x^beta`
    Power { alpha: f64, beta: f64 },
    /// `f(alpha_{n+1}) = g(alpha_n) + b_n`
    AlphaImplicit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapSequence {
    pub rule: MapRule,
    /// `x_0, x_1, ..., x_n`.
    pub iterates: Vec<f64>,
}

/// Summary of `n^p x_n` over the last decade `[N/10, N]` of a sequence.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailEstimate {
    pub mean: f64,
    pub min: f64,
    pub max: f64,
}

impl MapSequence {
    pub fn len(&self) -> usize {
        self.iterates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.iterates.is_empty()
    }

    pub fn last(&self) -> Option<f64> {
        self.iterates.last().copied()
    }

    fn last_decade(&self) -> std::ops::RangeInclusive<usize> {
        let n = self.iterates.len().saturating_sub(1);
        (n / 10).max(1)..=n
    }

    /// Tail of `n^power x_n`.
    pub fn scaled_tail(&self, power: f64) -> TailEstimate {
        let vals: Vec<f64> = self
            .last_decade()
            .map(|n| (n as f64).powf(power) * self.iterates[n])
            .collect();
        TailEstimate {
            mean: vals.iter().sum::<f64>() / vals.len() as f64,
            min: vals.iter().copied().fold(f64::INFINITY, f64::min),
            max: vals.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        }
    }

    /// Least-squares exponent of `x_n` against `n` over the last decade.
    pub fn fitted_exponent(&self) -> f64 {
        let (lx, ly): (Vec<f64>, Vec<f64>) = self
            .last_decade()
            .map(|n| ((n as f64).ln(), self.iterates[n].ln()))
            .unzip();
        log_slope(&lx, &ly)
    }
}

fn check_start(x0: f64) -> Result<()> {
    if x0 > 0.0 && x0.is_finite() {
        Ok(())
    } else {
        Err(BounceError::IterateEscaped { n: 0, value: x0 })
    }
}

/// `x_{k+1} = x_k - alpha(k) x_k^2` for `n` steps. The iterates must stay in
/// `(0, x0]`.
pub fn quadratic_map_iterate<A>(x0: f64, alpha: A, n: usize) -> Result<MapSequence>
where
    A: Fn(usize) -> f64,
{
    check_start(x0)?;
    let mut iterates = Vec::with_capacity(n + 1);
    iterates.push(x0);
    let mut x = x0;
    for k in 0..n {
        x -= alpha(k) * x * x;
        if !(x > 0.0 && x <= x0) {
            return Err(BounceError::IterateEscaped { n: k + 1, value: x });
        }
        iterates.push(x);
    }
    Ok(MapSequence {
        rule: MapRule::Quadratic,
        iterates,
    })
}

/// `x_{k+1} = x_k - alpha x_k^beta` for `n` steps.
pub fn power_map_iterate(x0: f64, alpha: f64, beta: f64, n: usize) -> Result<MapSequence> {
    check_start(x0)?;
    if beta.is_nan() || beta <= 1.0 {
        return Err(BounceError::InvalidParams(format!("beta must exceed 1, got {beta}")));
    }
    let mut iterates = Vec::with_capacity(n + 1);
    iterates.push(x0);
    let mut x = x0;
    for k in 0..n {
        x -= alpha * x.powf(beta);
        if !(x > 0.0 && x <= x0) {
            return Err(BounceError::IterateEscaped { n: k + 1, value: x });
        }
        iterates.push(x);
    }
    Ok(MapSequence {
        rule: MapRule::Power { alpha, beta },
        iterates,
    })
}

/// `f(x) = 6x - 4x^2 + x^3`, with its derivative.
pub fn alpha_map_f(x: f64) -> (f64, f64) {
    (x * (6.0 - x * (4.0 - x)), 6.0 - x * (8.0 - 3.0 * x))
}

/// `g(x) = (6x - 8x^2 + 3x^3) / (1 - x)^3`.
pub fn alpha_map_g(x: f64) -> f64 {
    x * (6.0 - x * (8.0 - 3.0 * x)) / (1.0 - x).powi(3)
}

/// Value of `f` at the right end of its domain.
pub const ALPHA_MAP_F_MAX: f64 = 3.0;

/// Solves `f(alpha_{k+1}) = g(alpha_k) + b(k)` for `n` steps, inverting `f`
/// on `[0, 1]` by safeguarded Newton from the linearized guess.
pub fn alpha_implicit_map_iterate<B>(alpha0: f64, b: B, n: usize) -> Result<MapSequence>
where
    B: Fn(usize) -> f64,
{
    if !(alpha0 > 0.0 && alpha0 < 1.0) {
        return Err(BounceError::IterateEscaped { n: 0, value: alpha0 });
    }
    let mut iterates = Vec::with_capacity(n + 1);
    iterates.push(alpha0);
    let mut a = alpha0;
    for k in 0..n {
        let target = alpha_map_g(a) + b(k);
        if !(0.0..=ALPHA_MAP_F_MAX).contains(&target) {
            return Err(BounceError::NoRoot { n: k + 1, target });
        }
        let (next, _) = invert_increasing(alpha_map_f, target, target / 6.0, 0.0, 1.0, 1e-15);
        a = next;
        iterates.push(a);
    }
    Ok(MapSequence {
        rule: MapRule::AlphaImplicit,
        iterates,
    })
}

/// Growth of the partial sums of a positive sequence.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SumDiagnostic {
    pub partial_sum: f64,
    /// Increase of the partial sum over the last decade of terms.
    pub last_decade_increment: f64,
    /// Least-squares slope of the partial sums against `ln n` over the last decade.
    pub log_slope: f64,
    /// The last decade added less than `rel_tol` of the total.
    pub converging: bool,
}

pub fn divergent_sum_check(seq: &[f64], rel_tol: f64) -> SumDiagnostic {
    let sums: Vec<f64> = seq
        .iter()
        .scan(0.0, |acc, x| {
            *acc += x;
            Some(*acc)
        })
        .collect();
    let n = sums.len();
    if n < 2 {
        return SumDiagnostic {
            partial_sum: sums.last().copied().unwrap_or(0.0),
            last_decade_increment: 0.0,
            log_slope: 0.0,
            converging: false,
        };
    }
    let lo = (n / 10).max(1);
    let total = sums[n - 1];
    let increment = total - sums[lo - 1];
    let (lx, ly): (Vec<f64>, Vec<f64>) = (lo..=n).map(|k| ((k as f64).ln(), sums[k - 1])).unzip();
    SumDiagnostic {
        partial_sum: total,
        last_decade_increment: increment,
        log_slope: log_slope(&lx, &ly),
        converging: increment <= rel_tol * total.abs(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_map_limit() {
        let s = quadratic_map_iterate(0.01, |_| 1.0, 100_000).unwrap();
        assert!(s.iterates.windows(2).all(|w| w[1] < w[0] && w[1] > 0.0));
        let n = 100_000.0;
        assert!((n * s.last().unwrap() - 1.0).abs() < 0.01);
    }

    #[test]
    fn quadratic_map_escapes_from_large_start() {
        let e = quadratic_map_iterate(2.0, |_| 1.0, 10);
        assert!(matches!(e, Err(BounceError::IterateEscaped { n: 1, .. })));
    }

    #[test]
    fn power_map_with_beta_two_is_quadratic() {
        let q = quadratic_map_iterate(0.01, |_| 1.5, 1000).unwrap();
        let p = power_map_iterate(0.01, 1.5, 2.0, 1000).unwrap();
        for (a, b) in q.iterates.iter().zip(&p.iterates) {
            assert!((a - b).abs() <= 1e-15 * a);
        }
    }

    #[test]
    fn alpha_map_functions() {
        assert_eq!(alpha_map_f(1.0).0, ALPHA_MAP_F_MAX);
        assert_eq!(alpha_map_f(0.0).1, 6.0);
        for k in 1..100 {
            let x = k as f64 / 100.0;
            assert!(alpha_map_f(x).1 > 0.0);
            let bound = -x * x / (1.0 - x).powi(3);
            assert!(alpha_map_f(x).0 - alpha_map_g(x) <= bound * (1.0 - 1e-12));
        }
    }

    #[test]
    fn alpha_map_from_tiny_start_stays_small() {
        let s = alpha_implicit_map_iterate(1e-9, |_| 0.0, 3).unwrap();
        assert!(s.iterates.iter().all(|&a| a > 0.0 && a < 1e-8));
    }

    #[test]
    fn sums_of_harmonic_like_sequence_diverge() {
        let s = quadratic_map_iterate(0.01, |_| 1.0, 100_000).unwrap();
        let d = divergent_sum_check(&s.iterates, 1e-6);
        assert!(!d.converging);
        assert!((d.log_slope - 1.0).abs() < 0.1);

        let c = divergent_sum_check(&[0.3; 1000], 1e-6);
        assert!(!c.converging);
        assert!((c.partial_sum - 300.0).abs() < 1e-9);

        let geometric: Vec<f64> = (0..1000).map(|k| 0.5f64.powi(k)).collect();
        assert!(divergent_sum_check(&geometric, 1e-6).converging);
    }
}
