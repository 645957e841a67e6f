//! Piecewise-cubic interpolation of uniformly sampled signals.
//!
//! Each interval `[t_k, t_{k+1}]` is interpolated by the cubic through the four
//! nearest samples (one-sided at the ends). Midpoint values therefore carry an
//! `O(dt^4)` error, which keeps the fixed-step RK4 propagators fourth order
//! when pulses are only known on the grid.

use crate::C64;

/// Values at the interval midpoints `t_k + dt/2`, `k = 0..len-1`.
///
/// Fewer than four samples fall back to linear interpolation.
pub fn midpoints(samples: &[C64]) -> Vec<C64> {
    let n = samples.len();
    if n < 2 {
        return Vec::new();
    }
    if n < 4 {
        return samples.windows(2).map(|w| (w[0] + w[1]) * 0.5).collect();
    }
    let mut out = Vec::with_capacity(n - 1);
    let s = samples;
    out.push((s[0] * 5.0 + s[1] * 15.0 - s[2] * 5.0 + s[3]) / 16.0);
    for k in 1..n - 2 {
        out.push((-s[k - 1] + s[k] * 9.0 + s[k + 1] * 9.0 - s[k + 2]) / 16.0);
    }
    out.push((s[n - 4] - s[n - 3] * 5.0 + s[n - 2] * 15.0 + s[n - 1] * 5.0) / 16.0);
    out
}

/// Value at `t` of the signal sampled at `t0 + k dt`. Outside the sampled
/// range the end values are held.
pub fn sample_at(samples: &[C64], t0: f64, dt: f64, t: f64) -> C64 {
    let n = samples.len();
    if n == 0 {
        return C64::new(0.0, 0.0);
    }
    let x = (t - t0) / dt;
    if x <= 0.0 {
        return samples[0];
    }
    if x >= (n - 1) as f64 {
        return samples[n - 1];
    }
    if n < 4 {
        let k = x.floor() as usize;
        let f = x - k as f64;
        return samples[k] * (1.0 - f) + samples[k + 1] * f;
    }
    let k = (x.floor() as usize).min(n - 2);
    // stencil start so that the interval [k, k+1] sits inside [j, j+3]
    let j = k.saturating_sub(1).min(n - 4);
    let u = x - j as f64;
    let mut acc = C64::new(0.0, 0.0);
    for a in 0..4 {
        let mut w = 1.0;
        for b in 0..4 {
            if a != b {
                w *= (u - b as f64) / (a as f64 - b as f64);
            }
        }
        acc += samples[j + a] * w;
    }
    acc
}
