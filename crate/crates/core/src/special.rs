//! Bessel functions of integer order and the unnormalized sinc.
//!
//! `J_l` uses the power series for `x < 1`, Miller's downward recurrence
//! normalized by `J_0² + 2ΣJ_k² = 1` for `1 <= x < 30`, and Hankel's
//! asymptotic expansion for `J_0`, `J_1` followed by upward recurrence beyond.
//! `e^{-x} I_l` uses the series for `x <= 15` and downward recurrence
//! normalized by `e^{-x}(I_0 + 2ΣI_k) = 1` above.

use std::f64::consts::{FRAC_PI_4, PI};

use crate::error::{invalid, Result};

pub const MAX_ORDER: u32 = 20;

const RESCALE_ABOVE: f64 = 1e250;

/// `sin(x)/x` with `sinc(0) = 1`.
pub fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        let x2 = x * x;
        1.0 - x2 / 6.0 + x2 * x2 / 120.0
    } else {
        x.sin() / x
    }
}

fn check_args(l: u32, x: f64) -> Result<()> {
    if l > MAX_ORDER {
        return invalid(format!("Bessel order {l} exceeds {MAX_ORDER}"));
    }
    if !x.is_finite() || x < 0.0 {
        return invalid(format!("Bessel argument must be finite and >= 0, got {x}"));
    }
    Ok(())
}

/// Bessel function of the first kind `J_l(x)`.
pub fn bessel_j(l: u32, x: f64) -> Result<f64> {
    check_args(l, x)?;
    if x == 0.0 {
        return Ok(if l == 0 { 1.0 } else { 0.0 });
    }
    Ok(if x < 1.0 {
        j_series(l, x)
    } else if x < 30.0 {
        j_miller(l, x)
    } else {
        j_asymptotic_upward(l, x)
    })
}

fn j_series(l: u32, x: f64) -> f64 {
    let half = 0.5 * x;
    let mut term = 1.0;
    for k in 1..=l {
        term *= half / k as f64;
    }
    let mut sum = term;
    let q = -half * half;
    for k in 1..200u32 {
        term *= q / (k as f64 * (k + l) as f64);
        sum += term;
        if term.abs() < 1e-17 * sum.abs() {
            break;
        }
    }
    sum
}

fn j_miller(l: u32, x: f64) -> f64 {
    let m = (l as f64).max(x.ceil());
    let start = (m + 30.0 + (40.0 * m).sqrt()) as usize;
    let mut vals = vec![0.0f64; start + 2];
    vals[start] = 1e-30;
    for k in (1..=start).rev() {
        let next = 2.0 * k as f64 / x * vals[k] - vals[k + 1];
        vals[k - 1] = next;
        if next.abs() > RESCALE_ABOVE {
            for v in vals[k - 1..].iter_mut() {
                *v /= RESCALE_ABOVE;
            }
        }
    }
    let sum_sq: f64 = vals[0] * vals[0] + 2.0 * vals[1..].iter().map(|v| v * v).sum::<f64>();
    let linear: f64 = vals[0] + 2.0 * vals.iter().skip(2).step_by(2).sum::<f64>();
    vals[l as usize] / sum_sq.sqrt() * linear.signum()
}

/// Hankel's expansion for orders 0 and 1.
fn j_hankel(nu: u32, x: f64) -> f64 {
    let mu = 4.0 * (nu * nu) as f64;
    let mut p = 1.0;
    let mut q = 0.0;
    let mut term = 1.0;
    let mut prev = f64::INFINITY;
    for k in 1..60u32 {
        let odd = (2 * k - 1) as f64;
        term *= (mu - odd * odd) / (k as f64 * 8.0 * x);
        if term.abs() > prev {
            break;
        }
        prev = term.abs();
        match k % 4 {
            1 => q += term,
            2 => p -= term,
            3 => q -= term,
            _ => p += term,
        }
        if term.abs() < 1e-17 {
            break;
        }
    }
    let chi = x - (nu as f64 * 0.5 * PI + FRAC_PI_4);
    (2.0 / (PI * x)).sqrt() * (p * chi.cos() - q * chi.sin())
}

fn j_asymptotic_upward(l: u32, x: f64) -> f64 {
    let j0 = j_hankel(0, x);
    if l == 0 {
        return j0;
    }
    let mut prev = j0;
    let mut cur = j_hankel(1, x);
    for k in 1..l {
        let next = 2.0 * k as f64 / x * cur - prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// Exponentially scaled modified Bessel function `e^{-x} I_l(x)`.
pub fn bessel_i_scaled(l: u32, x: f64) -> Result<f64> {
    check_args(l, x)?;
    if x == 0.0 {
        return Ok(if l == 0 { 1.0 } else { 0.0 });
    }
    Ok(if x <= 15.0 {
        i_series(l, x) * (-x).exp()
    } else {
        i_miller(l, x)
    })
}

fn i_series(l: u32, x: f64) -> f64 {
    let half = 0.5 * x;
    let mut term = 1.0;
    for k in 1..=l {
        term *= half / k as f64;
    }
    let mut sum = term;
    let q = half * half;
    for k in 1..400u32 {
        term *= q / (k as f64 * (k + l) as f64);
        sum += term;
        if term < 1e-17 * sum {
            break;
        }
    }
    sum
}

fn i_miller(l: u32, x: f64) -> f64 {
    let start = l as usize + (92.0 * x).sqrt().ceil() as usize + 20;
    let mut vals = vec![0.0f64; start + 2];
    vals[start] = 1e-30;
    for k in (1..=start).rev() {
        let next = 2.0 * k as f64 / x * vals[k] + vals[k + 1];
        vals[k - 1] = next;
        if next > RESCALE_ABOVE {
            for v in vals[k - 1..].iter_mut() {
                *v /= RESCALE_ABOVE;
            }
        }
    }
    let total = vals[0] + 2.0 * vals[1..].iter().sum::<f64>();
    vals[l as usize] / total
}
