use std::f64::consts::{FRAC_PI_4, PI};

use crate::error::{Error, Result};

/// Largest |x| accepted by [`bessel_j0`].
pub const BESSEL_J0_MAX_ARG: f64 = 50.0;

const SERIES_LIMIT: f64 = 12.0;

/// Bessel function of the first kind, order zero, for |x| < 50.
///
/// Power series up to |x| = 12, Hankel asymptotic expansion beyond.
pub fn bessel_j0(x: f64) -> Result<f64> {
    if !x.is_finite() || x.abs() >= BESSEL_J0_MAX_ARG {
        return Err(Error::Range(format!(
            "bessel_j0 defined here for |x| < {BESSEL_J0_MAX_ARG}, got {x}"
        )));
    }
    let x = x.abs();
    Ok(if x <= SERIES_LIMIT {
        series(x)
    } else {
        asymptotic(x)
    })
}

/// First `count` positive zeros of `J0` below [`BESSEL_J0_MAX_ARG`], by
/// bracketing on a 0.1 grid and bisecting to machine precision.
pub fn bessel_j0_zeros(count: usize) -> Vec<f64> {
    let j0 = |x: f64| if x <= SERIES_LIMIT { series(x) } else { asymptotic(x) };
    let mut zeros = Vec::with_capacity(count);
    let mut a = 0.0;
    while zeros.len() < count && a + 0.1 < BESSEL_J0_MAX_ARG {
        let b = a + 0.1;
        if j0(a) * j0(b) < 0.0 {
            let (mut lo, mut hi) = (a, b);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                if j0(lo) * j0(mid) <= 0.0 {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            zeros.push(0.5 * (lo + hi));
        }
        a = b;
    }
    zeros
}

fn series(x: f64) -> f64 {
    let q = -0.25 * x * x;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..200 {
        term *= q / ((k * k) as f64);
        sum += term;
        if term.abs() < 1e-18 * sum.abs().max(1e-300) && k > 4 {
            break;
        }
    }
    sum
}

fn asymptotic(x: f64) -> f64 {
    // u_k = prod_{i<=k} (-(2i-1)^2) / (8^k k! x^k); P sums even k, Q odd k,
    // both with alternating signs. Truncate at the smallest term.
    let mut u = 1.0_f64;
    let mut p = 1.0;
    let mut q = 0.0;
    let mut prev = f64::INFINITY;
    for k in 1..200 {
        let odd = (2 * k - 1) as f64;
        u *= -(odd * odd) / (8.0 * k as f64 * x);
        if u.abs() >= prev {
            break;
        }
        prev = u.abs();
        let sign = if (k / 2) % 2 == 0 { 1.0 } else { -1.0 };
        if k % 2 == 0 {
            p += sign * u;
        } else {
            q += sign * u;
        }
        if u.abs() < 1e-18 {
            break;
        }
    }
    let chi = x - FRAC_PI_4;
    (2.0 / (PI * x)).sqrt() * (p * chi.cos() - q * chi.sin())
}
