//! Independent numerical references shared by the integration tests.

use bounce_core::{BallState, ModelParams};

pub type V4 = [f64; 4];

/// Free two-mass dynamics in the original coordinates `[x, xdot, y, ydot]`.
pub fn free_rhs(p: &ModelParams, s: &V4) -> V4 {
    let c = 0.5 * (s[2] - s[0]) + p.mu * (s[3] - s[1]);
    [s[1], c - p.gamma - 0.5, s[3], -c - p.gamma + 0.5]
}

pub fn rk4(p: &ModelParams, s0: V4, tau: f64, steps: usize) -> V4 {
    let h = tau / steps as f64;
    let add = |a: &V4, b: &V4, k: f64| [a[0] + k * b[0], a[1] + k * b[1], a[2] + k * b[2], a[3] + k * b[3]];
    let mut s = s0;
    for _ in 0..steps {
        let k1 = free_rhs(p, &s);
        let k2 = free_rhs(p, &add(&s, &k1, 0.5 * h));
        let k3 = free_rhs(p, &add(&s, &k2, 0.5 * h));
        let k4 = free_rhs(p, &add(&s, &k3, h));
        for i in 0..4 {
            s[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
    }
    s
}

/// RK4 with step halving until two successive answers agree, then one
/// Richardson correction.
pub fn reference(p: &ModelParams, s0: V4, tau: f64) -> V4 {
    let mut n = ((tau / 0.02).ceil() as usize).max(4);
    let mut coarse = rk4(p, s0, tau, n);
    loop {
        n *= 2;
        let fine = rk4(p, s0, tau, n);
        let diff = (0..4).map(|i| (fine[i] - coarse[i]).abs()).fold(0.0, f64::max);
        if diff < 1e-12 || n > 1 << 22 {
            let mut out = fine;
            for i in 0..4 {
                out[i] += (fine[i] - coarse[i]) / 15.0;
            }
            return out;
        }
        coarse = fine;
    }
}

/// Lower-mass height from the free-fall and oscillator parts, written out
/// for an underdamped spring.
pub fn gap_oracle(p: &ModelParams, s: &BallState, tau: f64) -> f64 {
    let psi = 0.5 * (s.y + s.x - 1.0);
    let psidot = 0.5 * (s.ydot + s.xdot);
    let xi = 0.5 * (s.y - s.x - 1.0);
    let xidot = 0.5 * (s.ydot - s.xdot);
    let w = (1.0 - p.mu * p.mu).sqrt();
    let xi_t = (-p.mu * tau).exp() * (xi * (w * tau).cos() + (xidot + p.mu * xi) / w * (w * tau).sin());
    psi + psidot * tau - 0.5 * p.gamma * tau * tau - xi_t
}

/// First time the gap becomes non-positive, by dense sampling and bisection.
pub fn contact_oracle(p: &ModelParams, s: &BallState, limit: f64) -> f64 {
    let step = 1e-6;
    let mut k = 1usize;
    while gap_oracle(p, s, k as f64 * step) > 0.0 {
        k += 1;
        assert!((k as f64) * step < limit, "oracle found no contact");
    }
    let (mut lo, mut hi) = ((k - 1) as f64 * step, k as f64 * step);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if gap_oracle(p, s, mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}
