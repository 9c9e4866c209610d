//! Normal-mode stability analysis of the coupled model problem.
//!
//! A mode (a, b, d)_j^n = (q, r, s) A^n φ^j solves the interior scheme when φ is
//! a root of a quartic; the two roots with |φ| > 1 decay into the solid. The
//! interface conditions then give a 2×2 system 𝒢(A) k = 0 and unstable modes
//! are zeros of det 𝒢 with |A| > 1.
//!
//! Internally everything is written in ψ = 1/φ so that the a-family root,
//! which runs off to infinity as λy → 1, stays at a finite point. Columns of
//! 𝒢 are divided by their φ, which does not move any zero.

use std::f64::consts::PI;

use num_complex::Complex64 as C;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::mode_coupler::{SchemeKind, ZfModel};
use crate::numerics::{bisect, poly_roots, Polynomial};

const I: C = C::new(0.0, 1.0);
/// Inner search radius.
pub const INNER_RADIUS: f64 = 1.0 + 1e-6;
/// Certification threshold on the normalized det 𝒢 residual.
pub const CERT_TOL: f64 = 1e-9;
// Irrational angular offset keeps cell edges off the real axis.
const THETA0: f64 = 0.123_456_789_1;

/// A certified normal mode with |A| > 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalModeRoot {
    pub a: C,
    /// a-family spatial eigenvalue (infinite when λy = 1, λx = 0).
    pub phi1: C,
    /// b-family spatial eigenvalue.
    pub phi2: C,
    pub eigvec1: [C; 3],
    pub eigvec2: [C; 3],
    /// |det 𝒢| / (|g11 g22| + |g12 g21|).
    pub residual: f64,
}

fn c(re: f64) -> C {
    C::new(re, 0.0)
}

fn inv_or_zero(phi: C) -> C {
    if phi.re.is_infinite() || phi.im.is_infinite() {
        c(0.0)
    } else {
        phi.inv()
    }
}

fn inv_or_inf(psi: C) -> C {
    if psi.norm() == 0.0 {
        C::new(f64::INFINITY, 0.0)
    } else {
        psi.inv()
    }
}

/// s = κ (r − q) with κ = iλx A²/(3A² − 4A + 1).
pub fn kappa(a: C, lambda_x: f64) -> Result<C> {
    if lambda_x == 0.0 {
        return Ok(c(0.0));
    }
    let den = a * a * 3.0 - a * 4.0 + 1.0;
    if den.norm() < 1e-14 * (3.0 * a.norm_sqr() + 4.0 * a.norm() + 1.0) {
        return Err(Error::Singularity(format!("3A² − 4A + 1 vanishes at A = {a}")));
    }
    Ok(I * lambda_x * a * a / den)
}

/// (c0 + c1(φ − 1/φ) + L2(φ − 2 + 1/φ)) φ as ascending coefficients in φ.
fn lp(c0: C, c1: C, l2: C) -> [C; 3] {
    [-c1 + l2, c0 - l2 * 2.0, c1 + l2]
}

/// The reduced (a, b) block, each entry times φ, as quadratics in φ.
fn block_phi(a: C, lx: f64, ly: f64) -> Result<[[[C; 3]; 2]; 2]> {
    let k = kappa(a, lx)?;
    let g = I * (lx * ly / 4.0);
    let diag0 = c(1.0) - a - lx * lx / 4.0 + k * I * lx;
    let off0 = c(lx * lx / 4.0) - k * I * lx;
    let l2 = c(ly * ly / 2.0);
    Ok([
        [lp(diag0, c(-ly / 2.0) - k * g, l2), lp(off0, k * g, c(0.0))],
        [lp(off0, -k * g, c(0.0)), lp(diag0, c(ly / 2.0) + k * g, l2)],
    ])
}

fn eval_rev(p: &[C; 3], psi: C) -> C {
    // m(φ)/φ² = p0 ψ² + p1 ψ + p2
    (p[0] * psi + p[1]) * psi + p[2]
}

fn eval_block(blk: &[[[C; 3]; 2]; 2], psi: C) -> [[C; 2]; 2] {
    [
        [eval_rev(&blk[0][0], psi), eval_rev(&blk[0][1], psi)],
        [eval_rev(&blk[1][0], psi), eval_rev(&blk[1][1], psi)],
    ]
}

fn quartic_phi(blk: &[[[C; 3]; 2]; 2]) -> Polynomial {
    let p = |v: &[C; 3]| Polynomial::new(v.to_vec());
    p(&blk[0][0]).mul(&p(&blk[1][1])).sub(&p(&blk[0][1]).mul(&p(&blk[1][0])))
}

/// The four spatial eigenvalues, largest modulus first.
///
/// Roots lost to a vanishing leading coefficient are reported as infinite.
pub fn phi_roots(a: C, lambda_x: f64, lambda_y: f64) -> Result<[C; 4]> {
    if !(lambda_y > 0.0) {
        return Err(Error::Domain("λy must be positive".into()));
    }
    let q = quartic_phi(&block_phi(a, lambda_x, lambda_y)?);
    let mut roots = if q.degree() >= 1 { poly_roots(&q)? } else { vec![] };
    while roots.len() < 4 {
        roots.push(C::new(f64::INFINITY, 0.0));
    }
    roots.sort_by(|x, y| y.norm().total_cmp(&x.norm()));
    Ok([roots[0], roots[1], roots[2], roots[3]])
}

/// Smaller-modulus root of a ψ² + b ψ + c, stable when a = 0.
fn small_root(a: C, b: C, cc: C) -> C {
    let disc = (b * b - a * cc * 4.0).sqrt();
    let s = if (b.conj() * disc).re >= 0.0 { b + disc } else { b - disc };
    let q = -s * 0.5;
    if q.norm() == 0.0 {
        c(0.0)
    } else {
        cc / q
    }
}

/// ψ of the a-family and b-family decaying roots at λx = 0.
fn psi_pair_1d(a: C, ly: f64) -> (C, C) {
    let mid = c(1.0) - a - ly * ly;
    let plus = c((ly * ly + ly) / 2.0);
    let minus = c((ly * ly - ly) / 2.0);
    (small_root(plus, mid, minus), small_root(minus, mid, plus))
}

/// The two decaying roots in ψ for λx ≥ 0.
fn psi_pair(a: C, lx: f64, ly: f64) -> Result<(C, C)> {
    if lx == 0.0 {
        return Ok(psi_pair_1d(a, ly));
    }
    let blk = block_phi(a, lx, ly)?;
    let q = quartic_phi(&blk);
    let mut rev = q.coeffs.clone();
    rev.resize(5, c(0.0));
    rev.reverse();
    let mut roots = poly_roots(&Polynomial::new(rev))?;
    roots.sort_by(|x, y| x.norm().total_cmp(&y.norm()));
    Ok((roots[0], roots[1]))
}

/// Closed-form decaying pair (φ1, φ2) at λx = 0 with the branch chosen by Re A against 1 − λy².
pub fn branch_select_1d(a: C, lambda_y: f64) -> Result<(C, C)> {
    if a.norm() <= 1.0 {
        return Err(Error::Domain("branch selection needs |A| > 1".into()));
    }
    if !(lambda_y > 0.0 && lambda_y <= 1.0) {
        return Err(Error::Domain("need 0 < λy ≤ 1".into()));
    }
    let ly = lambda_y;
    let radicand = a * a - a * 2.0 + 1.0 + a * (2.0 * ly * ly) - ly * ly;
    let line = 1.0 - ly * ly;
    // on the line the radicand is negative real; take the +0 side of the cut
    let s = if a.re == line { C::new(0.0, (-radicand.re).max(0.0).sqrt()) } else { radicand.sqrt() };
    let plus = a.re > line || (a.re == line && a.im > 0.0);
    let num = if plus { a + (ly * ly - 1.0) + s } else { a + (ly * ly - 1.0) - s };
    let phi2 = num / (ly * (ly + 1.0));
    let phi1 = if ly == 1.0 { C::new(f64::INFINITY, 0.0) } else { num / (ly * (ly - 1.0)) };
    Ok((phi1, phi2))
}

fn block_singular(m: &[[C; 2]; 2]) -> Result<()> {
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    let big = m.iter().flatten().map(|v| v.norm()).fold(0.0, f64::max);
    let scale = big * big;
    if det.norm() > 1e-8 * scale {
        return Err(Error::Consistency(format!("block not singular: |det| = {:e}, scale {scale:e}", det.norm())));
    }
    Ok(())
}

/// Eigenvector at ψ with the λx → 0 normalization; returns (vector, is_a_family).
fn eigvec_psi(psi: C, a: C, lx: f64, ly: f64) -> Result<([C; 3], bool)> {
    let m = eval_block(&block_phi(a, lx, ly)?, psi);
    block_singular(&m)?;
    let k = kappa(a, lx)?;
    let a_family = m[1][1].norm() >= m[0][0].norm();
    let (q, r) = if a_family { (c(1.0), -m[1][0] / m[1][1]) } else { (-m[0][1] / m[0][0], c(1.0)) };
    Ok(([q, r, k * (r - q)], a_family))
}

/// (q, r, s) at a root φ of the quartic.
pub fn eigvec(phi: C, a: C, lambda_x: f64, lambda_y: f64) -> Result<[C; 3]> {
    Ok(eigvec_psi(inv_or_zero(phi), a, lambda_x, lambda_y)?.0)
}

fn model_only(scheme: &SchemeKind) -> Result<()> {
    match scheme {
        SchemeKind::Amp { zf: ZfModel::Monolithic } => {
            Err(Error::Domain("normal-mode analysis uses the model fluid impedance".into()))
        }
        SchemeKind::TpIterated { .. } => Err(Error::Domain("no normal-mode closure for iterated TP".into())),
        _ => Ok(()),
    }
}

/// First row of 𝒢 for one column, times ψ.
fn row1(scheme: &SchemeKind, q: C, r: C, psi: C, a: C, m: f64) -> C {
    let p1 = c(1.0) + psi * psi;
    let bdf = (a * a * 3.0 - a * 4.0 + 1.0) / (a * a);
    match scheme {
        SchemeKind::Tp | SchemeKind::TpIterated { .. } => (r + q) * p1 + psi * bdf * m * (r - q),
        SchemeKind::Atp => (r - q) * p1 + psi * (a + 1.0) / ((a - 1.0) * m) * (r + q),
        SchemeKind::Amp { .. } => {
            // z̄p v_I and p_I of the mode, both times D
            let s = (r + q) * 0.5;
            let vs = (r - q) * 0.5;
            let cc = (a * 4.0 - 1.0) / (a * a * 3.0);
            let beta = bdf * 0.5;
            let d = (c(1.0) - cc) * (m * m) + m + 1.0;
            let vd = vs * (m + 1.0) - s * (2.0 * m / 3.0);
            let pd = (beta * vd - s * d) * (m / (m + 1.0));
            r * p1 * d - psi * (vd - pd) * 2.0
        }
    }
}

/// Size of the terms entering one column of 𝒢, before cancellation.
fn column_scale(scheme: &SchemeKind, q: C, r: C, psi: C, a: C, m: f64) -> f64 {
    let p1 = 1.0 + psi.norm_sqr();
    let bdf = (a * a * 3.0 - a * 4.0 + 1.0) / (a * a);
    let top = match scheme {
        SchemeKind::Tp | SchemeKind::TpIterated { .. } => (r + q).norm() * p1 + (psi * bdf * m * (r - q)).norm(),
        SchemeKind::Atp => (r - q).norm() * p1 + (psi * (a + 1.0) / ((a - 1.0) * m) * (r + q)).norm(),
        SchemeKind::Amp { .. } => {
            let cc = (a * 4.0 - 1.0) / (a * a * 3.0);
            let d = (c(1.0) - cc) * (m * m) + m + 1.0;
            let qr = q.norm() + r.norm();
            r.norm() * p1 * d.norm() + 2.0 * psi.norm() * qr * (1.0 + m) * (1.0 + bdf.norm() + d.norm())
        }
    };
    let bottom = q.norm() * (1.0 + psi.norm()).powi(2);
    top.hypot(bottom)
}

fn row2(q: C, psi: C) -> C {
    q * (c(1.0) - psi) * (c(1.0) - psi)
}

/// 𝒢 with column n divided by φ_n.
pub fn g_matrix(scheme: &SchemeKind, a: C, phi: [C; 2], vecs: [[C; 3]; 2], m_eta: f64) -> Result<[[C; 2]; 2]> {
    model_only(scheme)?;
    let mut g = [[c(0.0); 2]; 2];
    for n in 0..2 {
        let psi = inv_or_zero(phi[n]);
        let (q, r) = (vecs[n][0], vecs[n][1]);
        g[0][n] = row1(scheme, q, r, psi, a, m_eta);
        g[1][n] = row2(q, psi);
    }
    Ok(g)
}

fn det2(g: &[[C; 2]; 2]) -> (C, f64) {
    let d = g[0][0] * g[1][1] - g[0][1] * g[1][0];
    let scale = (g[0][0] * g[1][1]).norm() + (g[0][1] * g[1][0]).norm();
    (d, if scale > 0.0 { d.norm() / scale } else { 0.0 })
}

/// Full normal-mode data at A (no root assumption).
pub fn normal_mode(scheme: &SchemeKind, a: C, lambda_x: f64, lambda_y: f64, m_eta: f64) -> Result<NormalModeRoot> {
    model_only(scheme)?;
    let (p1, p2) = psi_pair(a, lambda_x, lambda_y)?;
    let (v1, fam1) = eigvec_psi(p1, a, lambda_x, lambda_y)?;
    let (v2, _) = eigvec_psi(p2, a, lambda_x, lambda_y)?;
    let (p1, p2, v1, v2) = if fam1 { (p1, p2, v1, v2) } else { (p2, p1, v2, v1) };
    let phi = [inv_or_inf(p1), inv_or_inf(p2)];
    let g = g_matrix(scheme, a, phi, [v1, v2], m_eta)?;
    let (d, _) = det2(&g);
    let s1 = column_scale(scheme, v1[0], v1[1], p1, a, m_eta);
    let s2 = column_scale(scheme, v2[0], v2[1], p2, a, m_eta);
    let residual = if s1 * s2 > 0.0 { d.norm() / (s1 * s2) } else { 0.0 };
    Ok(NormalModeRoot { a, phi1: phi[0], phi2: phi[1], eigvec1: v1, eigvec2: v2, residual })
}

/// det 𝒢(A) with normalized eigenvectors and scaled columns.
pub fn det_g(scheme: &SchemeKind, a: C, lambda_x: f64, lambda_y: f64, m_eta: f64) -> Result<C> {
    if a.norm() <= 1.0 {
        return Err(Error::Domain("det 𝒢 is defined for |A| > 1".into()));
    }
    let nm = normal_mode(scheme, a, lambda_x, lambda_y, m_eta)?;
    let g = g_matrix(scheme, a, [nm.phi1, nm.phi2], [nm.eigvec1, nm.eigvec2], m_eta)?;
    Ok(det2(&g).0)
}

/// Analytic function of A whose zeros in |A| > 1 are the normal modes.
///
/// For λx > 0 both columns use the same unnormalized null vector, and the
/// determinant is divided by ψ1 − ψ2 so that it does not depend on root order.
pub fn counting_function(scheme: &SchemeKind, a: C, lambda_x: f64, lambda_y: f64, m_eta: f64) -> Result<C> {
    let (p1, p2) = psi_pair(a, lambda_x, lambda_y)?;
    if lambda_x == 0.0 {
        let g = [
            [row1(scheme, c(1.0), c(0.0), p1, a, m_eta), row1(scheme, c(0.0), c(1.0), p2, a, m_eta)],
            [row2(c(1.0), p1), row2(c(0.0), p2)],
        ];
        return Ok(det2(&g).0);
    }
    let blk = block_phi(a, lambda_x, lambda_y)?;
    let col = |psi: C| {
        let m = eval_block(&blk, psi);
        let (q, r) = (m[0][1] + m[1][1], -m[0][0] - m[1][0]);
        (row1(scheme, q, r, psi, a, m_eta), row2(q, psi))
    };
    let (g11, g21) = col(p1);
    let (g12, g22) = col(p2);
    Ok((g11 * g22 - g12 * g21) / (p1 - p2))
}

/// Search controls for [`find_unstable_roots`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchOptions {
    pub inner: f64,
    /// Outer radius; `None` picks 10·max(1, Mη, 1/Mη).
    pub a_max: Option<f64>,
    pub cert_tol: f64,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions { inner: INNER_RADIUS, a_max: None, cert_tol: CERT_TOL }
    }
}

pub fn default_a_max(m_eta: f64) -> f64 {
    10.0 * m_eta.max(1.0 / m_eta).max(1.0)
}

/// Roots and bookkeeping of one search.
#[derive(Debug, Clone, PartialEq)]
pub struct RootSearch {
    pub roots: Vec<NormalModeRoot>,
    /// Zeros counted by the argument principle.
    pub counted: usize,
    /// Located zeros that failed certification.
    pub rejected: usize,
}

impl RootSearch {
    pub fn max_abs_a(&self) -> f64 {
        self.roots.iter().map(|r| r.a.norm()).fold(1.0, f64::max)
    }
}

struct Winding<'a> {
    f: &'a dyn Fn(C) -> Result<C>,
}

impl Winding<'_> {
    fn value(&self, z: C) -> Result<C> {
        let v = (self.f)(z)?;
        if !(v.norm() > 0.0) || !v.norm().is_finite() {
            return Err(Error::Refinement(format!("counting function {v} at A = {z}")));
        }
        Ok(v)
    }

    /// Total change of arg f along a path t ∈ [0, 1].
    fn path(&self, z: &dyn Fn(f64) -> C, n0: usize) -> Result<f64> {
        let mut total = 0.0;
        let mut t0 = 0.0;
        let mut f0 = self.value(z(0.0))?;
        for k in 1..=n0 {
            let t1 = k as f64 / n0 as f64;
            let f1 = self.value(z(t1))?;
            total += self.segment(z, t0, t1, f0, f1, 0)?;
            t0 = t1;
            f0 = f1;
        }
        Ok(total)
    }

    fn segment(&self, z: &dyn Fn(f64) -> C, t0: f64, t1: f64, f0: C, f1: C, depth: u32) -> Result<f64> {
        let d = (f1 / f0).arg();
        // A = 1 is a singular point of the λx > 0 symbol just inside the inner circle;
        // grade the contour towards it so the phase cannot wrap a full turn unseen
        let (z0, z1, zm) = (z(t0), z(t1), z(0.5 * (t0 + t1)));
        let near = (z0 - 1.0).norm().min((z1 - 1.0).norm()).min((zm - 1.0).norm());
        if d.abs() < PI / 4.0 && (z1 - z0).norm() < near {
            return Ok(d);
        }
        if depth > 48 {
            return Err(Error::Refinement(format!("argument jump unresolved near A = {}", z(t0))));
        }
        let tm = 0.5 * (t0 + t1);
        let fm = self.value(z(tm))?;
        Ok(self.segment(z, t0, tm, f0, fm, depth + 1)? + self.segment(z, tm, t1, fm, f1, depth + 1)?)
    }

    /// Zeros inside the log-polar cell [u0, u1] × [t0, t1] (A = e^{u + iθ}).
    fn cell(&self, u0: f64, u1: f64, t0: f64, t1: f64) -> Result<usize> {
        let n_u = ((u1 - u0) / 0.25).ceil().max(4.0) as usize;
        let n_t = ((t1 - t0) / 0.2).ceil().max(4.0) as usize;
        let at = |u: f64, t: f64| C::new(u, t).exp();
        let mut total = 0.0;
        total += self.path(&|s| at(u0 + s * (u1 - u0), t0), n_u)?;
        total += self.path(&|s| at(u1, t0 + s * (t1 - t0)), n_t)?;
        total += self.path(&|s| at(u1 - s * (u1 - u0), t1), n_u)?;
        total += self.path(&|s| at(u0, t1 - s * (t1 - t0)), n_t)?;
        round_count(total)
    }

    fn circle(&self, u: f64) -> Result<f64> {
        self.path(&|s| C::new(u, THETA0 + 2.0 * PI * s).exp(), 64)
    }
}

fn round_count(total: f64) -> Result<usize> {
    let w = total / (2.0 * PI);
    let n = w.round();
    if (w - n).abs() > 0.05 || n < 0.0 {
        return Err(Error::Refinement(format!("non-integer winding {w}")));
    }
    Ok(n as usize)
}

/// Newton on an analytic function with a central-difference derivative of relative step `h`.
pub fn newton_polish(f: &dyn Fn(C) -> Result<C>, z0: C, h: f64) -> Result<C> {
    let mut z = z0;
    for _ in 0..80 {
        let fz = f(z)?;
        if fz.norm() == 0.0 {
            return Ok(z);
        }
        let dz = h * z.norm().max(1.0);
        let d = (f(z + dz)? - f(z - dz)?) / (2.0 * dz);
        if d.norm() == 0.0 || !d.norm().is_finite() {
            break;
        }
        let step = fz / d;
        z -= step;
        if step.norm() <= 1e-14 * z.norm().max(1.0) {
            return Ok(z);
        }
    }
    Err(Error::IterationLimit { last: z, residual: f(z).map(|v| v.norm()).unwrap_or(f64::NAN) })
}

fn locate(
    w: &Winding,
    f: &dyn Fn(C) -> Result<C>,
    cell: (f64, f64, f64, f64),
    count: usize,
    depth: u32,
    out: &mut Vec<C>,
) -> Result<()> {
    if count == 0 {
        return Ok(());
    }
    let (u0, u1, t0, t1) = cell;
    let (du, dt) = (u1 - u0, t1 - t0);
    let centre = C::new(0.5 * (u0 + u1), 0.5 * (t0 + t1)).exp();
    if count == 1 && du.max(dt) < 0.5 {
        if let Ok(z) = newton_polish(f, centre, 1e-7) {
            let (u, t) = (z.norm().ln(), (z.arg() - t0).rem_euclid(2.0 * PI) + t0);
            let slack = 1e-9;
            if u >= u0 - slack && u <= u1 + slack && t >= t0 - slack && t <= t1 + slack {
                out.push(z);
                return Ok(());
            }
        }
    }
    if du.max(dt) < 1e-10 || depth > 200 {
        out.push(centre);
        return Ok(());
    }
    let mut last = None;
    for frac in [0.4871, 0.5371, 0.4419] {
        let halves = if du >= dt {
            let um = u0 + frac * du;
            ((u0, um, t0, t1), (um, u1, t0, t1))
        } else {
            let tm = t0 + frac * dt;
            ((u0, u1, t0, tm), (u0, u1, tm, t1))
        };
        match w.cell(halves.0 .0, halves.0 .1, halves.0 .2, halves.0 .3) {
            Ok(n1) if n1 <= count => {
                locate(w, f, halves.0, n1, depth + 1, out)?;
                return locate(w, f, halves.1, count - n1, depth + 1, out);
            }
            Ok(n1) => last = Some(Error::Refinement(format!("sub-cell count {n1} exceeds parent {count}"))),
            Err(e) => last = Some(e),
        }
    }
    Err(last.unwrap_or_else(|| Error::Refinement("split failed".into())))
}

/// All certified zeros of det 𝒢 with inner < |A| < a_max.
pub fn search_roots(
    scheme: &SchemeKind,
    lambda_x: f64,
    lambda_y: f64,
    m_eta: f64,
    opts: SearchOptions,
) -> Result<RootSearch> {
    model_only(scheme)?;
    if !(lambda_y > 0.0 && lambda_y <= 1.0) || !(lambda_x >= 0.0) || !(m_eta > 0.0) {
        return Err(Error::Domain("need 0 < λy ≤ 1, λx ≥ 0, Mη > 0".into()));
    }
    let a_max = opts.a_max.unwrap_or_else(|| default_a_max(m_eta));
    let f = |z: C| counting_function(scheme, z, lambda_x, lambda_y, m_eta);
    let w = Winding { f: &f };
    let (u0, u1) = (opts.inner.ln(), a_max.ln());
    let counted = round_count(w.circle(u1)? - w.circle(u0)?)?;
    let mut zeros = Vec::new();
    locate(&w, &f, (u0, u1, THETA0, THETA0 + 2.0 * PI), counted, 0, &mut zeros)?;
    let mut roots = Vec::new();
    let mut rejected = 0;
    for z in zeros {
        let z = newton_polish(&f, z, 1e-7).unwrap_or(z);
        match normal_mode(scheme, z, lambda_x, lambda_y, m_eta) {
            Ok(nm) if nm.residual <= opts.cert_tol && z.norm() > 1.0 => roots.push(nm),
            _ => rejected += 1,
        }
    }
    roots.sort_by(|x, y| y.a.norm().total_cmp(&x.a.norm()).then(x.a.im.total_cmp(&y.a.im)));
    Ok(RootSearch { roots, counted, rejected })
}

/// Certified unstable roots for general (λx, λy, Mη).
pub fn find_unstable_roots(
    scheme: &SchemeKind,
    lambda_x: f64,
    lambda_y: f64,
    m_eta: f64,
) -> Result<Vec<NormalModeRoot>> {
    Ok(search_roots(scheme, lambda_x, lambda_y, m_eta, SearchOptions::default())?.roots)
}

/// Certified unstable roots at λx = 0, η = 1, M = 𝓜/λy.
pub fn find_unstable_roots_1d(scheme: &SchemeKind, lambda_y: f64, mgrid: f64) -> Result<Vec<NormalModeRoot>> {
    find_unstable_roots(scheme, 0.0, lambda_y, mgrid / lambda_y)
}

/// Root path under continuation in λx.
#[derive(Debug, Clone, PartialEq)]
pub struct ContinuationPath {
    /// (λx, A, residual)
    pub points: Vec<(f64, C, f64)>,
    pub failed_at: Option<usize>,
}

/// Tracks a root from λx = 0 to `lambda_x_target` on (λx)_k = sqrt(k Δ), Δ = target²/N.
pub fn continue_lambda_x(
    root: &NormalModeRoot,
    scheme: &SchemeKind,
    lambda_y: f64,
    m_eta: f64,
    lambda_x_target: f64,
    n: usize,
) -> ContinuationPath {
    let mut points = vec![(0.0, root.a, root.residual)];
    if lambda_x_target == 0.0 || n == 0 {
        return ContinuationPath { points, failed_at: None };
    }
    let step = lambda_x_target * lambda_x_target / n as f64;
    let mut a = root.a;
    for k in 1..=n {
        let lx = (k as f64 * step).sqrt();
        let f = |z: C| counting_function(scheme, z, lx, lambda_y, m_eta);
        let next = newton_polish(&f, a, 1e-7).and_then(|z| Ok((z, normal_mode(scheme, z, lx, lambda_y, m_eta)?)));
        match next {
            Ok((z, nm)) if nm.residual <= CERT_TOL => {
                a = z;
                points.push((lx, z, nm.residual));
            }
            _ => return ContinuationPath { points, failed_at: Some(k) },
        }
    }
    ContinuationPath { points, failed_at: None }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CellStatus {
    Stable,
    Unstable,
    Failed,
}

impl CellStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            CellStatus::Stable => "stable",
            CellStatus::Unstable => "unstable",
            CellStatus::Failed => "failed",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cell {
    /// max |A| over certified roots, 1 when there are none, NaN on failure.
    pub max_abs_a: f64,
    pub nroots: usize,
    pub status: CellStatus,
}

/// max |A| over a 2D parameter grid; `values[i][j]` belongs to (axis1[i], axis2[j]).
#[derive(Debug, Clone, PartialEq)]
pub struct RegionMap {
    pub axis1: String,
    pub grid1: Vec<f64>,
    pub axis2: String,
    pub grid2: Vec<f64>,
    pub cells: Vec<Vec<Cell>>,
}

impl RegionMap {
    pub fn failures(&self) -> usize {
        self.cells.iter().flatten().filter(|c| c.status == CellStatus::Failed).count()
    }

    /// Largest max|A| over non-failed cells.
    pub fn max_value(&self) -> f64 {
        self.cells.iter().flatten().filter(|c| c.status != CellStatus::Failed).map(|c| c.max_abs_a).fold(0.0, f64::max)
    }
}

fn check_grid(g: &[f64], name: &str) -> Result<()> {
    if g.is_empty() || g.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Domain(format!("{name} grid must be non-empty and strictly increasing")));
    }
    Ok(())
}

pub fn stability_cell(scheme: &SchemeKind, lambda_x: f64, lambda_y: f64, m_eta: f64) -> Cell {
    match find_unstable_roots(scheme, lambda_x, lambda_y, m_eta) {
        Ok(roots) => {
            let max = roots.iter().map(|r| r.a.norm()).fold(1.0, f64::max);
            let status = if roots.is_empty() { CellStatus::Stable } else { CellStatus::Unstable };
            Cell { max_abs_a: max, nroots: roots.len(), status }
        }
        Err(_) => Cell { max_abs_a: f64::NAN, nroots: 0, status: CellStatus::Failed },
    }
}

/// 1D map over (λy, 𝓜); cells are computed in parallel and merged by index.
pub fn stability_map(scheme: &SchemeKind, lambda_y: &[f64], mgrid: &[f64]) -> Result<RegionMap> {
    model_only(scheme)?;
    check_grid(lambda_y, "lambda_y")?;
    check_grid(mgrid, "mgrid")?;
    let nm = mgrid.len();
    let flat: Vec<Cell> = (0..lambda_y.len() * nm)
        .into_par_iter()
        .map(|k| {
            let (ly, mg) = (lambda_y[k / nm], mgrid[k % nm]);
            stability_cell(scheme, 0.0, ly, mg / ly)
        })
        .collect();
    Ok(RegionMap {
        axis1: "lambda_y".into(),
        grid1: lambda_y.to_vec(),
        axis2: "mgrid".into(),
        grid2: mgrid.to_vec(),
        cells: flat.chunks(nm).map(|c| c.to_vec()).collect(),
    })
}

/// A bracketed stability boundary in 𝓜 at fixed λy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Boundary {
    pub mgrid: f64,
    /// Certified-stable end of the bracket.
    pub stable: f64,
    /// Certified-unstable end of the bracket.
    pub unstable: f64,
}

/// Bisects on certified-root presence in log 𝓜 between `lo` and `hi`.
pub fn stability_boundary(scheme: &SchemeKind, lambda_y: f64, lo: f64, hi: f64, log_tol: f64) -> Result<Boundary> {
    let indicator = |lm: f64| -> f64 {
        match find_unstable_roots_1d(scheme, lambda_y, lm.exp()) {
            Ok(r) if r.is_empty() => -1.0,
            Ok(_) => 1.0,
            Err(_) => f64::NAN,
        }
    };
    let (flo, fhi) = (indicator(lo.ln()), indicator(hi.ln()));
    if flo.is_nan() || fhi.is_nan() {
        return Err(Error::Refinement("root search failed at a bracket end".into()));
    }
    let mid = bisect(indicator, lo.ln(), hi.ln(), log_tol)?;
    let half = 0.5 * log_tol;
    let (a, b) = ((mid - half).exp(), (mid + half).exp());
    let (stable, unstable) = if flo < 0.0 { (a, b) } else { (b, a) };
    Ok(Boundary { mgrid: mid.exp(), stable, unstable })
}

fn poly(c: &[C]) -> Polynomial {
    Polynomial::new(c.to_vec())
}

/// max |A| of the periodic interior scheme over φ = e^{iω} on `n_omega` points.
pub fn cauchy_amplification(lambda_x: f64, lambda_y: f64, n_omega: usize) -> Result<f64> {
    let (lx, ly) = (lambda_x, lambda_y);
    let mut best: f64 = 0.0;
    for k in 0..n_omega {
        let w = 2.0 * PI * k as f64 / n_omega as f64;
        let d0 = C::new(0.0, 2.0 * w.sin());
        let d2 = c(2.0 * w.cos() - 2.0);
        let g = I * (lx * ly / 4.0) * d0;
        // rows (a, b, d) in unknowns (q, r, s); entries are polynomials in A
        let m = [
            [poly(&[c(1.0 - lx * lx / 4.0) - d0 * (ly / 2.0) + d2 * (ly * ly / 2.0), c(-1.0)]), poly(&[c(lx * lx / 4.0)]), poly(&[-I * lx + g])],
            [poly(&[c(lx * lx / 4.0)]), poly(&[c(1.0 - lx * lx / 4.0) + d0 * (ly / 2.0) + d2 * (ly * ly / 2.0), c(-1.0)]), poly(&[I * lx + g])],
            [poly(&[c(0.0), c(0.0), I * (lx / 3.0)]), poly(&[c(0.0), c(0.0), -I * (lx / 3.0)]), poly(&[c(1.0 / 3.0), c(-4.0 / 3.0), c(1.0)])],
        ];
        let minor = |i: usize, j: usize, k: usize, l: usize| m[1][i].mul(&m[2][j]).sub(&m[1][k].mul(&m[2][l]));
        let det = m[0][0]
            .mul(&minor(1, 2, 2, 1))
            .sub(&m[0][1].mul(&minor(0, 2, 2, 0)))
            .add(&m[0][2].mul(&minor(0, 1, 1, 0)));
        for r in cluster_means(&det, poly_roots(&det)?) {
            best = best.max(r.norm());
        }
    }
    Ok(best)
}

/// Replaces each cluster of k nearby roots by one point, refined by Newton
/// on the (k-1)th derivative where the multiple root is simple.
fn cluster_means(p: &Polynomial, mut roots: Vec<C>) -> Vec<C> {
    let mut out = Vec::new();
    while let Some(r) = roots.pop() {
        let tol = 1e-3 * r.norm().max(1.0);
        let (near, far): (Vec<C>, Vec<C>) = roots.iter().partition(|z| (*z - r).norm() < tol);
        let k = near.len() + 1;
        let mut z = (near.iter().sum::<C>() + r) / k as f64;
        if k > 1 {
            let mut dp = p.clone();
            for _ in 1..k {
                dp = dp.derivative();
            }
            for _ in 0..20 {
                let (f, df) = dp.eval_with_derivative(z);
                if df.norm() == 0.0 {
                    break;
                }
                let step = f / df;
                if step.norm() > tol {
                    break;
                }
                z -= step;
                if step.norm() <= 1e-15 * z.norm().max(1.0) {
                    break;
                }
            }
        }
        out.push(z);
        roots = far;
    }
    out
}

/// Cauchy-problem amplification over a (λx, λy) grid, in parallel.
pub fn cauchy_cfl_map(lambda_x: &[f64], lambda_y: &[f64], n_omega: usize) -> Result<RegionMap> {
    check_grid(lambda_x, "lambda_x")?;
    check_grid(lambda_y, "lambda_y")?;
    let ny = lambda_y.len();
    let flat: Vec<Cell> = (0..lambda_x.len() * ny)
        .into_par_iter()
        .map(|k| match cauchy_amplification(lambda_x[k / ny], lambda_y[k % ny], n_omega) {
            Ok(v) => Cell {
                max_abs_a: v,
                nroots: 0,
                status: if v <= 1.0 + 1e-9 { CellStatus::Stable } else { CellStatus::Unstable },
            },
            Err(_) => Cell { max_abs_a: f64::NAN, nroots: 0, status: CellStatus::Failed },
        })
        .collect();
    Ok(RegionMap {
        axis1: "lambda_x".into(),
        grid1: lambda_x.to_vec(),
        axis2: "lambda_y".into(),
        grid2: lambda_y.to_vec(),
        cells: flat.chunks(ny).map(|c| c.to_vec()).collect(),
    })
}

/// `count` log-spaced values from `lo` to `hi`.
pub fn log_space(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..count).map(|k| (a + (b - a) * k as f64 / (count - 1) as f64).exp()).collect()
}

/// max over the Mη samples of the AMP max|A| at (λx, λy).
pub fn amp_cfl_check(lambda_x: f64, lambda_y: f64, m_eta: &[f64]) -> Result<f64> {
    let scheme = SchemeKind::amp();
    let mut worst: f64 = 1.0;
    for &m in m_eta {
        let roots = find_unstable_roots(&scheme, lambda_x, lambda_y, m)?;
        worst = roots.iter().map(|r| r.a.norm()).fold(worst, f64::max);
    }
    Ok(worst)
}

/// (ω*, A*) = (4/(3M₀+4), 3M₀/(3M₀+4)).
pub fn tp_iteration_optimum(m0: f64) -> Result<(f64, f64)> {
    if !(m0 >= 0.0) {
        return Err(Error::Domain("M0 must be non-negative".into()));
    }
    let den = 3.0 * m0 + 4.0;
    Ok((4.0 / den, 3.0 * m0 / den))
}

/// Smallest k with (A*)^k < τ.
pub fn iterations_needed(m0: f64, tau: f64) -> Result<u64> {
    if !(tau > 0.0 && tau < 1.0) {
        return Err(Error::Domain("need 0 < τ < 1".into()));
    }
    let (_, a) = tp_iteration_optimum(m0)?;
    if a == 0.0 {
        return Ok(1);
    }
    let k = (tau.ln() / a.ln()).floor() as u64 + 1;
    // guard the floor against rounding at exact powers
    let k = if (k as f64 - 1.0) * a.ln() < tau.ln() && k > 1 { k - 1 } else { k };
    Ok(k)
}

/// Monolithic fluid impedance of the viscous half-space and its pieces.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VariationalImpedance {
    pub z_f: f64,
    /// z_f / z_μ
    pub xi: f64,
    pub lambda: f64,
    pub gamma: f64,
    pub z_mu: f64,
    pub z_rho: f64,
}

pub fn fluid_impedance_variational(k: f64, mu: f64, rho: f64, dt: f64, zbar: f64) -> Result<VariationalImpedance> {
    if [k, mu, rho, dt, zbar].iter().any(|v| !(*v > 0.0)) {
        return Err(Error::Domain("k, μ, ρ, Δt, z̄ must be positive".into()));
    }
    let lambda = mu * k * k * dt / rho;
    let gamma = (1.0 / lambda + 1.0).sqrt();
    let z_mu = 2.0 * mu * k;
    let z_rho = rho / (dt * k);
    // γ − 1 written without cancellation for large Λ
    let two_lg = 2.0 / (gamma + 1.0);
    let a11 = c(-gamma * z_mu - zbar);
    let a12 = c(-1.0 + two_lg);
    let a21 = I * (z_rho + z_mu + gamma * zbar);
    let a22 = -I * (1.0 + two_lg * zbar / z_mu);
    let z_f = (-a11 + a12 * a21 / a22 - zbar).re;
    Ok(VariationalImpedance { z_f, xi: z_f / z_mu, lambda, gamma, z_mu, z_rho })
}

/// c_am ρh/Δt + c_ad μ/h.
pub fn fluid_impedance_full(rho: f64, h: f64, dt: f64, mu: f64, c_am: f64, c_ad: f64) -> f64 {
    c_am * rho * h / dt + c_ad * mu / h
}
