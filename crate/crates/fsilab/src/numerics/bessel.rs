//! Bessel functions of integer order and complex argument.
//!
//! Power series below |z| = 15, Hankel asymptotic expansions above. The
//! crossover keeps both branches near 5e-11 relative error for orders up to 8.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use num_complex::Complex64 as C;

use crate::error::{Error, Result};

pub const MAX_ORDER: u32 = 8;
const SERIES_RADIUS: f64 = 15.0;
const OVERFLOW_RADIUS: f64 = 700.0;
const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// J_n(z) for 0 <= n <= 8.
pub fn bessel_j(n: u32, z: C) -> Result<C> {
    check(n, z)?;
    Ok(j_raw(n, z))
}

/// Y_n(z) on the principal branch, z != 0.
pub fn bessel_y(n: u32, z: C) -> Result<C> {
    check(n, z)?;
    if z.norm() == 0.0 {
        return Err(Error::Singularity("Y_n is singular at z = 0".into()));
    }
    Ok(y_raw(n, z))
}

/// J_n'(z) = (J_{n-1} - J_{n+1}) / 2.
pub fn bessel_j_prime(n: u32, z: C) -> Result<C> {
    check(n, z)?;
    Ok(derivative(n, z, j_raw))
}

/// Y_n'(z) = (Y_{n-1} - Y_{n+1}) / 2.
pub fn bessel_y_prime(n: u32, z: C) -> Result<C> {
    check(n, z)?;
    if z.norm() == 0.0 {
        return Err(Error::Singularity("Y_n is singular at z = 0".into()));
    }
    Ok(derivative(n, z, y_raw))
}

fn check(n: u32, z: C) -> Result<()> {
    if n > MAX_ORDER {
        return Err(Error::Domain(format!("order {n} exceeds {MAX_ORDER}")));
    }
    if !z.re.is_finite() || !z.im.is_finite() || z.norm() >= OVERFLOW_RADIUS {
        return Err(Error::Domain(format!("|z| = {} outside the supported range", z.norm())));
    }
    Ok(())
}

fn derivative(n: u32, z: C, f: fn(u32, C) -> C) -> C {
    if n == 0 {
        -f(1, z)
    } else {
        (f(n - 1, z) - f(n + 1, z)) * 0.5
    }
}

fn sign(n: u32) -> f64 {
    if n % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

pub(crate) fn j_raw(n: u32, z: C) -> C {
    if z.norm() < SERIES_RADIUS {
        return j_series(n, z);
    }
    if z.re < 0.0 {
        return j_raw(n, -z) * sign(n);
    }
    let (h1, h2) = hankel_asymptotic(n, z);
    (h1 + h2) * 0.5
}

pub(crate) fn y_raw(n: u32, z: C) -> C {
    if z.norm() < SERIES_RADIUS {
        return y_series(n, z);
    }
    if z.re < 0.0 {
        // Y_n(w e^{±iπ}) = (-1)^n (Y_n(w) ± 2i J_n(w))
        let w = -z;
        let s = if z.im >= 0.0 { 1.0 } else { -1.0 };
        return (y_raw(n, w) + C::new(0.0, 2.0 * s) * j_raw(n, w)) * sign(n);
    }
    let (h1, h2) = hankel_asymptotic(n, z);
    (h1 - h2) / C::new(0.0, 2.0)
}

fn factorial(n: u32) -> f64 {
    (1..=n).fold(1.0, |acc, k| acc * k as f64)
}

fn j_series(n: u32, z: C) -> C {
    let h = z * 0.5;
    let h2 = -h * h;
    let mut term = h.powu(n) / factorial(n);
    let mut sum = term;
    let mut k = 0u32;
    loop {
        k += 1;
        term = term * h2 / (k as f64 * (n + k) as f64);
        sum += term;
        if (k as f64) > h.norm() && term.norm() <= 1e-17 * sum.norm() {
            break;
        }
        if k > 400 {
            break;
        }
    }
    sum
}

fn y_series(n: u32, z: C) -> C {
    let h = z * 0.5;
    let h2 = -h * h;
    // finite sum: (n-k-1)!/k! (z/2)^{2k-n}
    let mut finite = C::new(0.0, 0.0);
    if n > 0 {
        let hinv = h.inv();
        for k in 0..n {
            let c = factorial(n - k - 1) / factorial(k);
            finite += hinv.powu(n) * (h * h).powu(k) * c;
        }
    }
    // psi(k+1) + psi(n+k+1)
    let harmonic = |m: u32| (1..=m).fold(0.0, |acc, j| acc + 1.0 / j as f64);
    let mut psi_a = -EULER_GAMMA;
    let mut psi_b = -EULER_GAMMA + harmonic(n);
    let mut term = h.powu(n) / factorial(n);
    let mut sum = term * (psi_a + psi_b);
    let mut k = 0u32;
    loop {
        k += 1;
        psi_a += 1.0 / k as f64;
        psi_b += 1.0 / (n + k) as f64;
        term = term * h2 / (k as f64 * (n + k) as f64);
        let t = term * (psi_a + psi_b);
        sum += t;
        if (k as f64) > h.norm() && t.norm() <= 1e-17 * sum.norm() {
            break;
        }
        if k > 400 {
            break;
        }
    }
    let jn = j_series(n, z);
    (jn * h.ln() * 2.0 - finite - sum) / PI
}

/// H^(1)_n(z), H^(2)_n(z) by their asymptotic expansions; Re z >= 0.
fn hankel_asymptotic(n: u32, z: C) -> (C, C) {
    let mu = 4.0 * (n * n) as f64;
    let mut t1 = C::new(1.0, 0.0);
    let mut t2 = C::new(1.0, 0.0);
    let mut s1 = t1;
    let mut s2 = t2;
    let (mut best1, mut best2) = (f64::INFINITY, f64::INFINITY);
    let (mut live1, mut live2) = (true, true);
    let i = C::new(0.0, 1.0);
    for k in 1..200u32 {
        let odd = (2 * k - 1) as f64;
        let f = (mu - odd * odd) / (8.0 * k as f64) / z;
        let past_peak = odd > 2.0 * n as f64;
        if live1 {
            let next = t1 * f * i;
            if past_peak && next.norm() > best1 {
                live1 = false;
            } else {
                t1 = next;
                best1 = t1.norm();
                s1 += t1;
                if t1.norm() <= 1e-17 * s1.norm() {
                    live1 = false;
                }
            }
        }
        if live2 {
            let next = t2 * f * (-i);
            if past_peak && next.norm() > best2 {
                live2 = false;
            } else {
                t2 = next;
                best2 = t2.norm();
                s2 += t2;
                if t2.norm() <= 1e-17 * s2.norm() {
                    live2 = false;
                }
            }
        }
        if !live1 && !live2 {
            break;
        }
    }
    let chi = z - (n as f64) * FRAC_PI_2 - FRAC_PI_4;
    let pre = (C::new(2.0 / PI, 0.0) / z).sqrt();
    let h1 = pre * (i * chi).exp() * s1;
    let h2 = pre * (-i * chi).exp() * s2;
    (h1, h2)
}
