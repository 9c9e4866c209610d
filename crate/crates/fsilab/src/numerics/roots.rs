use num_complex::Complex64 as C;

use crate::error::{Error, Result};

const MAX_NEWTON: usize = 100;

/// Newton iteration with a central finite-difference derivative.
///
/// Returns the first iterate with |f(z)| <= tol.
pub fn find_root<F>(f: F, seed: C, tol: f64) -> Result<C>
where
    F: Fn(C) -> C,
{
    if !(tol > 0.0) {
        return Err(Error::Domain("tolerance must be positive".into()));
    }
    let mut z = seed;
    let mut fz = f(z);
    for _ in 0..MAX_NEWTON {
        if !fz.norm().is_finite() {
            break;
        }
        if fz.norm() <= tol {
            return Ok(z);
        }
        let d = fd_derivative(&f, z);
        if d.norm() == 0.0 || !d.norm().is_finite() {
            break;
        }
        let mut step = fz / d;
        // halve the step until the residual stops exploding
        let mut next = z - step;
        let mut fnext = f(next);
        let mut tries = 0;
        while !(fnext.norm() < 4.0 * fz.norm()) && tries < 30 {
            step *= 0.5;
            next = z - step;
            fnext = f(next);
            tries += 1;
        }
        z = next;
        fz = fnext;
    }
    if fz.norm() <= tol {
        return Ok(z);
    }
    Err(Error::IterationLimit { last: z, residual: fz.norm() })
}

/// Central difference with step 1e-7 max(1, |z|) along the real axis.
pub fn fd_derivative<F>(f: &F, z: C) -> C
where
    F: Fn(C) -> C,
{
    let h = 1e-7 * z.norm().max(1.0);
    (f(z + h) - f(z - h)) / (2.0 * h)
}

/// Bisection on a sign-changing bracket, returning the midpoint of the final bracket.
pub fn bisect<F>(f: F, lo: f64, hi: f64, tol: f64) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    let (mut a, mut b) = (lo, hi);
    let mut fa = f(a);
    let fb = f(b);
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if !(fa * fb < 0.0) {
        return Err(Error::Bracket { lo, hi });
    }
    while (b - a).abs() > tol {
        let m = 0.5 * (a + b);
        if m <= a.min(b) || m >= a.max(b) {
            break;
        }
        let fm = f(m);
        if fm == 0.0 {
            return Ok(m);
        }
        if fa * fm < 0.0 {
            b = m;
        } else {
            a = m;
            fa = fm;
        }
    }
    Ok(0.5 * (a + b))
}
