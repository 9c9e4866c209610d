use num_complex::Complex64 as C;

use crate::error::{Error, Result};

/// Dense polynomial, coefficients in ascending degree.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial {
    pub coeffs: Vec<C>,
}

impl Polynomial {
    /// Builds a polynomial and strips exactly-zero leading coefficients.
    pub fn new(mut coeffs: Vec<C>) -> Self {
        while coeffs.len() > 1 && coeffs.last().is_some_and(|c| c.norm() == 0.0) {
            coeffs.pop();
        }
        Polynomial { coeffs }
    }

    pub fn from_real(coeffs: &[f64]) -> Self {
        Self::new(coeffs.iter().map(|&c| C::new(c, 0.0)).collect())
    }

    /// Monic polynomial with the given roots.
    pub fn from_roots(roots: &[C]) -> Self {
        let mut p = Polynomial::new(vec![C::new(1.0, 0.0)]);
        for &r in roots {
            p = p.mul(&Polynomial::new(vec![-r, C::new(1.0, 0.0)]));
        }
        p
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.norm() == 0.0)
    }

    pub fn eval(&self, z: C) -> C {
        self.coeffs.iter().rev().fold(C::new(0.0, 0.0), |acc, &c| acc * z + c)
    }

    /// p(z) and p'(z) in one Horner pass.
    pub fn eval_with_derivative(&self, z: C) -> (C, C) {
        let mut p = C::new(0.0, 0.0);
        let mut dp = C::new(0.0, 0.0);
        for &c in self.coeffs.iter().rev() {
            dp = dp * z + p;
            p = p * z + c;
        }
        (p, dp)
    }

    pub fn add(&self, other: &Polynomial) -> Polynomial {
        let n = self.coeffs.len().max(other.coeffs.len());
        let zero = C::new(0.0, 0.0);
        Polynomial::new(
            (0..n)
                .map(|k| {
                    self.coeffs.get(k).copied().unwrap_or(zero)
                        + other.coeffs.get(k).copied().unwrap_or(zero)
                })
                .collect(),
        )
    }

    pub fn sub(&self, other: &Polynomial) -> Polynomial {
        self.add(&other.scale(C::new(-1.0, 0.0)))
    }

    pub fn scale(&self, s: C) -> Polynomial {
        Polynomial::new(self.coeffs.iter().map(|&c| c * s).collect())
    }

    pub fn mul(&self, other: &Polynomial) -> Polynomial {
        let mut out = vec![C::new(0.0, 0.0); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Polynomial::new(out)
    }

    pub fn derivative(&self) -> Polynomial {
        if self.coeffs.len() <= 1 {
            return Polynomial::new(vec![C::new(0.0, 0.0)]);
        }
        Polynomial::new(self.coeffs.iter().enumerate().skip(1).map(|(k, &c)| c * k as f64).collect())
    }

    pub fn max_coeff(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Residual bound used to accept a computed root.
    pub fn root_tolerance(&self, root: C) -> f64 {
        1e-10 * self.max_coeff() * root.norm().max(1.0).powi(self.degree() as i32)
    }
}

/// All roots of `p` by Aberth-Ehrlich simultaneous iteration.
pub fn poly_roots(p: &Polynomial) -> Result<Vec<C>> {
    let p = Polynomial::new(p.coeffs.clone());
    if p.is_zero() {
        return Err(Error::Domain("zero polynomial".into()));
    }
    let n = p.degree();
    if n == 0 {
        return Err(Error::Domain("constant polynomial has no roots".into()));
    }
    let lead = p.coeffs[n];
    if n == 1 {
        return Ok(vec![-p.coeffs[0] / lead]);
    }
    if n == 2 {
        return Ok(quadratic(p.coeffs[2], p.coeffs[1], p.coeffs[0]));
    }
    let mut best: Option<(f64, Vec<C>)> = None;
    for attempt in 0..4 {
        let roots = aberth(&p, 0.4 + 0.7 * attempt as f64);
        let worst = roots
            .iter()
            .map(|&r| p.eval(r).norm() / p.root_tolerance(r))
            .fold(0.0, f64::max);
        if worst <= 1.0 {
            return Ok(roots);
        }
        if best.as_ref().is_none_or(|(w, _)| worst < *w) {
            best = Some((worst, roots));
        }
    }
    let (worst, roots) = best.expect("at least one attempt");
    let last = roots
        .iter()
        .copied()
        .max_by(|a, b| p.eval(*a).norm().total_cmp(&p.eval(*b).norm()))
        .unwrap_or_default();
    Err(Error::IterationLimit { last, residual: worst })
}

/// Roots of a z^2 + b z + c avoiding cancellation.
pub fn quadratic(a: C, b: C, c: C) -> Vec<C> {
    let disc = (b * b - a * c * 4.0).sqrt();
    let s = if (b.conj() * disc).re >= 0.0 { b + disc } else { b - disc };
    if s.norm() == 0.0 {
        return vec![C::new(0.0, 0.0); 2];
    }
    let q = -s * 0.5;
    let r1 = q / a;
    let r2 = if q.norm() == 0.0 { C::new(0.0, 0.0) } else { c / q };
    vec![r1, r2]
}

fn aberth(p: &Polynomial, phase: f64) -> Vec<C> {
    let n = p.degree();
    let lead = p.coeffs[n].norm();
    // Cauchy-style radius from the coefficient magnitudes
    let radius = (0..n)
        .map(|k| (p.coeffs[k].norm() / lead).powf(1.0 / (n - k) as f64))
        .fold(0.0, f64::max)
        .max(1e-12);
    let mut z: Vec<C> = (0..n)
        .map(|k| C::from_polar(radius, phase + 2.0 * std::f64::consts::PI * k as f64 / n as f64))
        .collect();
    let mut done = vec![false; n];
    for _ in 0..500 {
        let mut all_done = true;
        for k in 0..n {
            if done[k] {
                continue;
            }
            let (v, dv) = p.eval_with_derivative(z[k]);
            if v.norm() == 0.0 {
                done[k] = true;
                continue;
            }
            let ratio = v / dv;
            let mut s = C::new(0.0, 0.0);
            for j in 0..n {
                if j != k {
                    s += (z[k] - z[j]).inv();
                }
            }
            let step = ratio / (C::new(1.0, 0.0) - ratio * s);
            if !step.re.is_finite() || !step.im.is_finite() {
                z[k] += C::from_polar(1e-8 * radius, k as f64);
                all_done = false;
                continue;
            }
            z[k] -= step;
            if step.norm() <= 1e-14 * z[k].norm().max(f64::MIN_POSITIVE) {
                done[k] = true;
            } else {
                all_done = false;
            }
        }
        if all_done {
            break;
        }
    }
    z
}
