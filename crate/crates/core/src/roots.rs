//! Bracketed scalar root refinement: bisection down to a coarse width, then
//! Newton steps that fall back to bisection whenever they leave the bracket.

/// Tolerances for [`refine_root`].
#[derive(Debug, Clone, Copy)]
pub struct RefineTolerance {
    /// Bisect until the bracket is narrower than this before trying Newton.
    pub bisect_width: f64,
    /// Relative step size at which Newton is considered converged.
    pub rel: f64,
    /// Absolute floor for the convergence test.
    pub abs: f64,
    pub max_iter: usize,
}

impl Default for RefineTolerance {
    fn default() -> Self {
        Self {
            bisect_width: 1e-6,
            rel: 1e-13,
            abs: 1e-300,
            max_iter: 200,
        }
    }
}

/// Finds a root of `f` in `[lo, hi]` given `f(lo)` and `f(hi)` of opposite
/// sign (zero counts as either sign). `f` returns `(value, derivative)`.
///
/// The returned point is the bracket end on the `hi` side of the sign change
/// after convergence, so for a function positive at `lo` the result satisfies
/// `f <= 0` up to the Newton polish.
pub fn refine_root<F>(f: F, mut lo: f64, mut hi: f64, tol: RefineTolerance) -> f64
where
    F: Fn(f64) -> (f64, f64),
{
    let (f_lo, _) = f(lo);
    let (f_hi, _) = f(hi);
    if f_lo == 0.0 {
        return lo;
    }
    if f_hi == 0.0 {
        return hi;
    }
    debug_assert!(f_lo.signum() != f_hi.signum(), "root is not bracketed");
    let lo_sign = f_lo.signum();

    let scale = lo.abs().max(hi.abs()).max(1.0);
    while hi - lo > tol.bisect_width * scale {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            return hi;
        }
        let (fm, _) = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if fm.signum() == lo_sign {
            lo = mid;
        } else {
            hi = mid;
        }
    }

    let mut x = 0.5 * (lo + hi);
    for _ in 0..tol.max_iter {
        let (fx, dfx) = f(x);
        if fx == 0.0 {
            return x;
        }
        if fx.signum() == lo_sign {
            lo = x;
        } else {
            hi = x;
        }
        let newton = if dfx != 0.0 { x - fx / dfx } else { f64::NAN };
        let next = if newton.is_finite() && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        let step = (next - x).abs();
        x = next;
        if step <= tol.rel * x.abs() + tol.abs || hi - lo <= tol.rel * x.abs() + tol.abs {
            break;
        }
    }
    x
}

/// Safeguarded Newton for a strictly increasing function on `[lo, hi]`,
/// solving `f(x) = target`. Returns the root and the number of iterations.
pub fn invert_increasing<F>(f: F, target: f64, guess: f64, lo: f64, hi: f64, tol: f64) -> (f64, usize)
where
    F: Fn(f64) -> (f64, f64),
{
    let (mut lo, mut hi) = (lo, hi);
    let mut x = guess.clamp(lo, hi);
    for iter in 1..=200 {
        let (fx, dfx) = f(x);
        let r = fx - target;
        if r == 0.0 {
            return (x, iter);
        }
        if r < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        let newton = x - r / dfx;
        let next = if newton.is_finite() && newton >= lo && newton <= hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        let step = (next - x).abs();
        x = next;
        if step <= tol * x.abs().max(f64::MIN_POSITIVE) {
            return (x, iter);
        }
    }
    (x, 200)
}

/// Scans `h` on `[start, end]` at spacing `step` for the first point where it
/// crosses from negative to positive. `h` returns its value and first two
/// derivatives. Interior maxima between samples are located from the sign
/// change of the derivative; a maximum that stays at or below zero, however
/// close, is not a crossing. `stop` is consulted at every sample and ends the scan early.
///
/// The caller guarantees `h(start) < 0`.
pub fn first_upcrossing<H, S>(h: H, start: f64, end: f64, step: f64, mut stop: S) -> Option<f64>
where
    H: Fn(f64) -> [f64; 3],
    S: FnMut(f64, &[f64; 3]) -> bool,
{
    let tol = RefineTolerance::default();
    let value = |t: f64| {
        let d = h(t);
        (d[0], d[1])
    };
    let slope = |t: f64| {
        let d = h(t);
        (d[1], d[2])
    };
    let mut prev = start;
    let mut hp = h(start);
    while prev < end {
        let t = (prev + step).min(end);
        let ht = h(t);
        if ht[0] > 0.0 {
            return Some(refine_root(value, prev, t, tol));
        }
        if hp[1] > 0.0 && ht[1] < 0.0 {
            let tm = refine_root(slope, prev, t, tol);
            if h(tm)[0] > 0.0 {
                return Some(refine_root(value, prev, tm, tol));
            }
        }
        if stop(t, &ht) {
            return None;
        }
        prev = t;
        hp = ht;
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_sqrt_two() {
        let r = refine_root(|x| (2.0 - x * x, -2.0 * x), 1.0, 2.0, RefineTolerance::default());
        assert!((r - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn survives_bad_derivative() {
        // Flat derivative far from the root sends Newton out of the bracket.
        let f = |x: f64| ((x - 0.3).powi(3), 0.0);
        let r = refine_root(f, 0.0, 1.0, RefineTolerance::default());
        assert!((r - 0.3).abs() < 1e-5);
    }

    #[test]
    fn inverts_cubic() {
        let f = |x: f64| (6.0 * x - 4.0 * x * x + x * x * x, 6.0 - 8.0 * x + 3.0 * x * x);
        let (x, iters) = invert_increasing(f, 2.0, 2.0 / 6.0, 0.0, 1.0, 1e-15);
        let (fx, _) = f(x);
        assert!((fx - 2.0).abs() < 1e-14);
        assert!(iters <= 8);
    }

    #[test]
    fn upcrossing_between_samples() {
        // A narrow bump that peaks between two samples.
        let h = |t: f64| {
            let u = t - 0.55;
            [1e-3 - u * u, -2.0 * u, -2.0]
        };
        let r = first_upcrossing(h, 0.0, 2.0, 0.1, |_, _| false).unwrap();
        assert!((r - (0.55 - 1e-3f64.sqrt())).abs() < 1e-13);
    }

    #[test]
    fn shallow_maximum_is_a_miss() {
        let h = |t: f64| {
            let u = t - 0.55;
            [-1e-13 - u * u, -2.0 * u, -2.0]
        };
        assert!(first_upcrossing(h, 0.0, 2.0, 0.1, |_, _| false).is_none());
    }
}
