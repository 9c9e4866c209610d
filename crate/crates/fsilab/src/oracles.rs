//! Exact solutions of three polar FSI problems and their dispersion solvers.
//!
//! Radial elastic piston (closed form), rotating elastic disk in a fluid
//! annulus (time factor e^{iωt}), and a radial traveling wave of a Stokes
//! fluid disk inside an elastic annulus (time factor e^{i(nθ-ωt)}).

use std::f64::consts::PI;

use num_complex::Complex64 as C;

use crate::csvfmt::fmt_e;
use crate::error::{Error, Result};
use crate::numerics::bessel::MAX_ORDER;
use crate::numerics::quad::simpson;
use crate::numerics::{bessel_j, bessel_j_prime, bessel_y, bessel_y_prime, fd_derivative, find_root, null_vector, Matrix};

const I: C = C::new(0.0, 1.0);

fn c(re: f64) -> C {
    C::new(re, 0.0)
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("{name} must be positive and finite, got {v}")))
    }
}

/// 7th-order smoothstep: 0 at t = 0, 1 for t >= 1, three continuous derivatives at both ends.
pub fn smooth_ramp(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else if t >= 1.0 {
        1.0
    } else {
        (35.0 + (-84.0 + (70.0 - 20.0 * t) * t) * t) * t.powi(4)
    }
}

// ---------------------------------------------------------------- piston

/// Radially oscillating elastic disk 0 < r̄ < r0 inside a fluid annulus out to R.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PistonParams {
    pub beta: f64,
    pub omega: f64,
    pub r0: f64,
    pub r_outer: f64,
    pub rho: f64,
    pub lambdabar: f64,
    pub mubar: f64,
    pub rhobar: f64,
}

impl PistonParams {
    pub fn new(
        beta: f64,
        omega: f64,
        r0: f64,
        r_outer: f64,
        rho: f64,
        lambdabar: f64,
        mubar: f64,
        rhobar: f64,
    ) -> Result<Self> {
        let p = PistonParams { beta, omega, r0, r_outer, rho, lambdabar, mubar, rhobar };
        p.validate()?;
        Ok(p)
    }

    /// β = 0.05, ω = π, r0 = 0.5, R = 1, ρ = 1 and a unit solid with λ̄ = μ̄ = ρ̄ = δ.
    pub fn standard(delta: f64) -> Result<Self> {
        Self::new(0.05, PI, 0.5, 1.0, 1.0, delta, delta, delta)
    }

    pub fn validate(&self) -> Result<()> {
        positive("r0", self.r0)?;
        positive("rho", self.rho)?;
        positive("mubar", self.mubar)?;
        positive("rhobar", self.rhobar)?;
        if !(self.r_outer > self.r0) {
            return Err(Error::Domain("outer radius must exceed r0".into()));
        }
        if !(self.lambdabar + 2.0 * self.mubar > 0.0) || !self.beta.is_finite() || !self.omega.is_finite() {
            return Err(Error::Domain("invalid piston material or motion".into()));
        }
        if self.b().abs() >= self.r0 {
            return Err(Error::Domain("interface amplitude reaches the axis".into()));
        }
        Ok(())
    }

    pub fn cpbar(&self) -> f64 {
        ((self.lambdabar + 2.0 * self.mubar) / self.rhobar).sqrt()
    }

    fn j1(&self, x: f64) -> f64 {
        bessel_j(1, c(x)).map(|v| v.re).unwrap_or(f64::NAN)
    }

    /// Interface amplitude b = β J1(ω r0 / c̄p).
    pub fn b(&self) -> f64 {
        self.beta * self.j1(self.omega * self.r0 / self.cpbar())
    }
}

/// Radial solid displacement ū(r̄, t) = β J1(ω r̄/c̄p) sin(ωt).
pub fn piston_solid_displacement(p: &PistonParams, rbar: f64, t: f64) -> f64 {
    p.beta * p.j1(p.omega * rbar / p.cpbar()) * (p.omega * t).sin()
}

/// Interface radius and velocity.
pub fn piston_interface(p: &PistonParams, t: f64) -> (f64, f64) {
    let b = p.b();
    (p.r0 + b * (p.omega * t).sin(), b * p.omega * (p.omega * t).cos())
}

/// Outer-boundary velocity V, its time derivative, and the outer pressure P.
pub fn piston_outer(p: &PistonParams, t: f64) -> (f64, f64, f64) {
    let (w, rr) = (p.omega, p.r_outer);
    let b = p.b();
    let (ri, ri_dot) = piston_interface(p, t);
    let v = ri / rr * w * b * (w * t).cos();
    let v_dot = (ri_dot * w * b * (w * t).cos() - ri * w * w * b * (w * t).sin()) / rr;
    let x = w * p.r0 / p.cpbar();
    let j1p = bessel_j_prime(1, c(x)).map(|v| v.re).unwrap_or(f64::NAN);
    let solid = p.beta * ((p.lambdabar + 2.0 * p.mubar) * w / p.cpbar() * j1p + p.lambdabar / p.r0 * p.j1(x));
    let big_p = -(0.5 * p.rho * (1.0 - rr * rr / (ri * ri)) * v * v
        + p.rho * rr * (rr / ri).ln() * v_dot
        + solid * (w * t).sin());
    (v, v_dot, big_p)
}

/// Fluid radial velocity and pressure at r_I(t) <= r <= R.
pub fn piston_fluid(p: &PistonParams, r: f64, t: f64) -> Result<(f64, f64)> {
    let (ri, _) = piston_interface(p, t);
    let slack = 1e-12 * p.r_outer;
    if !(r >= ri - slack && r <= p.r_outer + slack) {
        return Err(Error::Domain(format!("r = {r} is outside the fluid annulus [{ri}, {}]", p.r_outer)));
    }
    let rr = p.r_outer;
    let (v, v_dot, big_p) = piston_outer(p, t);
    let vr = rr / r * v;
    let pressure = big_p + 0.5 * p.rho * (1.0 - rr * rr / (r * r)) * v * v + p.rho * rr * (rr / r).ln() * v_dot;
    Ok((vr, pressure))
}

// ---------------------------------------------------------- dispersion modes

/// Which exact solution a [`DispersionMode`] belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModeProblem {
    RotatingDisk,
    TravelingWave,
}

impl ModeProblem {
    pub fn id(&self) -> &'static str {
        match self {
            ModeProblem::RotatingDisk => "rotating-disk",
            ModeProblem::TravelingWave => "traveling-wave",
        }
    }
}

/// A certified frequency with its normalized constants.
#[derive(Debug, Clone, PartialEq)]
pub struct DispersionMode {
    pub problem: ModeProblem,
    pub n: u32,
    pub delta: f64,
    pub omega: C,
    /// (b, b̄) for the disk, (p_I, d, d̄1..d̄4) for the traveling wave.
    pub constants: Vec<C>,
    /// Relative residual of each matching or boundary condition.
    pub residuals: Vec<f64>,
}

impl DispersionMode {
    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().copied().fold(0.0, f64::max)
    }

    pub fn csv_header(&self) -> String {
        let mut h = String::from("problem,n,delta,omega_re,omega_im,residual");
        for k in 0..self.constants.len() {
            h.push_str(&format!(",c{k}_re,c{k}_im"));
        }
        h
    }

    /// `problem,n,delta,omega_re,omega_im,residual,c0_re,c0_im,...`
    pub fn csv_row(&self) -> String {
        let mut s = format!(
            "{},{},{},{},{},{}",
            self.problem.id(),
            self.n,
            fmt_e(self.delta),
            fmt_e(self.omega.re),
            fmt_e(self.omega.im),
            fmt_e(self.max_residual())
        );
        for z in &self.constants {
            s.push_str(&format!(",{},{}", fmt_e(z.re), fmt_e(z.im)));
        }
        s
    }
}

/// Built-in seeds, keyed by (problem, δ, n).
pub fn seed_table(problem: ModeProblem, delta: f64, n: u32) -> Option<C> {
    let same = |a: f64| (delta / a - 1.0).abs() < 1e-9;
    match problem {
        ModeProblem::RotatingDisk if same(1e-3) => Some(C::new(7.664, 0.001497)),
        ModeProblem::RotatingDisk if same(1.0) => Some(C::new(8.778, 0.7854)),
        ModeProblem::RotatingDisk if same(1e3) => Some(C::new(10.27, 0.002055)),
        ModeProblem::TravelingWave if same(1.0) && n == 3 => Some(C::new(3.491, -1.154)),
        _ => None,
    }
}

/// Newton on f / scale, then a few extra steps to full precision.
///
/// `scale` is the size of the terms of f near the seed, so the stopping
/// test measures cancellation rather than absolute size.
fn solve_dispersion<F: Fn(C) -> C>(f: F, seed: C, scale: f64) -> Result<C> {
    let scale = scale.max(f64::MIN_POSITIVE);
    let g = |z: C| f(z) / scale;
    let mut z = find_root(&g, seed, 1e-11)?;
    for _ in 0..8 {
        let d = fd_derivative(&g, z);
        if d.norm() == 0.0 || !d.norm().is_finite() {
            break;
        }
        let step = g(z) / d;
        if !step.norm().is_finite() {
            break;
        }
        z -= step;
        if step.norm() <= 1e-15 * z.norm() {
            break;
        }
    }
    Ok(z)
}

/// Local minima of |f| on a grid over `re` x `im`, best first.
fn scan_seeds<F: Fn(C) -> Option<f64>>(f: F, re: (f64, f64), im: (f64, f64), n: usize) -> Vec<C> {
    let at = |i: usize, j: usize| {
        C::new(re.0 + (re.1 - re.0) * i as f64 / (n - 1) as f64, im.0 + (im.1 - im.0) * j as f64 / (n - 1) as f64)
    };
    let vals: Vec<Vec<f64>> =
        (0..n).map(|i| (0..n).map(|j| f(at(i, j)).unwrap_or(f64::INFINITY)).collect()).collect();
    let mut minima = Vec::new();
    for i in 1..n - 1 {
        for j in 1..n - 1 {
            let v = vals[i][j];
            let lower = (-1i32..=1).all(|di| {
                (-1i32..=1).all(|dj| (di == 0 && dj == 0) || vals[(i as i32 + di) as usize][(j as i32 + dj) as usize] >= v)
            });
            if lower && v.is_finite() {
                minima.push((v, at(i, j)));
            }
        }
    }
    minima.sort_by(|a, b| a.0.total_cmp(&b.0));
    minima.into_iter().map(|(_, z)| z).collect()
}

fn relative(terms: &[C]) -> f64 {
    let scale: f64 = terms.iter().map(|t| t.norm()).sum();
    if scale == 0.0 {
        0.0
    } else {
        terms.iter().sum::<C>().norm() / scale
    }
}

// ---------------------------------------------------------- rotating disk

/// Elastic disk 0 < r < r0 twisting inside a fluid annulus r0 < r < R.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RotatingDiskProblem {
    pub r0: f64,
    pub r_outer: f64,
    pub rho: f64,
    pub nu: f64,
    pub mubar: f64,
    pub rhobar: f64,
    pub u0bar: f64,
}

impl RotatingDiskProblem {
    pub fn new(r0: f64, r_outer: f64, rho: f64, nu: f64, mubar: f64, rhobar: f64, u0bar: f64) -> Result<Self> {
        for (name, v) in [("r0", r0), ("rho", rho), ("nu", nu), ("mubar", mubar), ("rhobar", rhobar), ("u0bar", u0bar)] {
            positive(name, v)?;
        }
        if !(r_outer > r0) {
            return Err(Error::Domain("outer radius must exceed r0".into()));
        }
        Ok(RotatingDiskProblem { r0, r_outer, rho, nu, mubar, rhobar, u0bar })
    }

    /// r0 = 1/2, R = 1, ρ = 1, ν = 0.1, μ̄ = ρ̄ = δ, ū0 = 1e-5.
    pub fn standard(delta: f64) -> Result<Self> {
        Self::new(0.5, 1.0, 1.0, 0.1, delta, delta, 1e-5)
    }

    pub fn mu(&self) -> f64 {
        self.rho * self.nu
    }

    pub fn csbar(&self) -> f64 {
        (self.mubar / self.rhobar).sqrt()
    }

    /// λ with λ² = -iω/ν, the sign that goes with e^{iωt}.
    pub fn lambda(&self, omega: C) -> C {
        (-I * omega / self.nu).sqrt()
    }

    pub fn ks(&self, omega: C) -> C {
        omega / self.csbar()
    }

    /// Radial shape of the fluid velocity, per unit b: J1(λr)Y1(λR) − J1(λR)Y1(λr).
    fn shape(&self, omega: C, r: f64) -> Result<C> {
        let lam = self.lambda(omega);
        Ok(bessel_j(1, lam * r)? * bessel_y(1, lam * self.r_outer)?
            - bessel_j(1, lam * self.r_outer)? * bessel_y(1, lam * r)?)
    }

    fn shape_prime(&self, omega: C, r: f64) -> Result<C> {
        let lam = self.lambda(omega);
        Ok(lam
            * (bessel_j_prime(1, lam * r)? * bessel_y(1, lam * self.r_outer)?
                - bessel_j(1, lam * self.r_outer)? * bessel_y_prime(1, lam * r)?))
    }
}

/// D2(ω), the determinant of the 2x2 matching system.
pub fn rotating_disk_residual(prob: &RotatingDiskProblem, omega: C) -> Result<C> {
    if omega.norm() == 0.0 {
        return Err(Error::Domain("omega must be nonzero".into()));
    }
    let (r0, rr) = (prob.r0, prob.r_outer);
    let lam = prob.lambda(omega);
    let ks = prob.ks(omega);
    let w1 = prob.shape(omega, r0)?;
    let w2 = bessel_j(2, lam * r0)? * bessel_y(1, lam * rr)? - bessel_j(1, lam * rr)? * bessel_y(2, lam * r0)?;
    Ok(ks * prob.mubar * bessel_j(2, ks * r0)? * w1 - I * omega * prob.mu() * lam * bessel_j(1, ks * r0)? * w2)
}

/// Size of the two products whose difference is D2.
fn disk_term_scale(prob: &RotatingDiskProblem, omega: C) -> Result<f64> {
    let (r0, rr) = (prob.r0, prob.r_outer);
    let lam = prob.lambda(omega);
    let ks = prob.ks(omega);
    let w1 = prob.shape(omega, r0)?;
    let w2 = bessel_j(2, lam * r0)? * bessel_y(1, lam * rr)? - bessel_j(1, lam * rr)? * bessel_y(2, lam * r0)?;
    Ok((ks * prob.mubar * bessel_j(2, ks * r0)? * w1).norm() + (omega * prob.mu() * lam * bessel_j(1, ks * r0)? * w2).norm())
}

/// Relative residuals of velocity and shear-stress matching at r0.
fn disk_matching(prob: &RotatingDiskProblem, omega: C, b: C, bbar: C) -> Result<Vec<f64>> {
    let r0 = prob.r0;
    let ks = prob.ks(omega);
    let v = b * prob.shape(omega, r0)?;
    let u = bbar * bessel_j(1, ks * r0)?;
    let vp = b * prob.shape_prime(omega, r0)?;
    let up = bbar * ks * bessel_j_prime(1, ks * r0)?;
    // μ d/dr(v/r) = μ̄ d/dr(u/r)
    let fluid = (vp / r0 - v / (r0 * r0)) * prob.mu();
    let solid = (up / r0 - u / (r0 * r0)) * prob.mubar;
    Ok(vec![relative(&[v, -I * omega * u]), relative(&[fluid, -solid])])
}

/// Solves D2(ω) = 0 from `seed` and normalizes so that ū(r0, 0) = ū0.
pub fn rotating_disk_solve(prob: &RotatingDiskProblem, seed: C) -> Result<DispersionMode> {
    let f = |w: C| rotating_disk_residual(prob, w).unwrap_or(C::new(f64::NAN, f64::NAN));
    let omega = solve_dispersion(f, seed, disk_term_scale(prob, seed)?)?;
    let ks = prob.ks(omega);
    let bbar = prob.u0bar / bessel_j(1, ks * prob.r0)?;
    // velocity matching v(r0) = iω ū(r0)
    let b = I * omega * prob.u0bar / prob.shape(omega, prob.r0)?;
    let residuals = disk_matching(prob, omega, b, bbar)?;
    let mode = DispersionMode {
        problem: ModeProblem::RotatingDisk,
        n: 1,
        delta: prob.rhobar,
        omega,
        constants: vec![b, bbar],
        residuals,
    };
    if mode.max_residual() > 1e-8 {
        return Err(Error::Consistency(format!("matching residual {:e} after solve", mode.max_residual())));
    }
    Ok(mode)
}

/// Seed from the built-in table, or the best local minimum of |D2| on a scan.
pub fn rotating_disk_seed(prob: &RotatingDiskProblem) -> Result<C> {
    if let Some(s) = seed_table(ModeProblem::RotatingDisk, prob.rhobar, 1) {
        if *prob == RotatingDiskProblem::standard(prob.rhobar)? {
            return Ok(s);
        }
    }
    let scale = |w: C| {
        let lam = prob.lambda(w);
        (prob.mubar * prob.ks(w).norm() + prob.mu() * w.norm() * lam.norm()).max(1e-300)
    };
    scan_seeds(|w| rotating_disk_residual(prob, w).ok().map(|d| d.norm() / scale(w)), (1.0, 20.0), (0.0, 3.0), 60)
        .into_iter()
        .find(|&s| rotating_disk_solve(prob, s).is_ok())
        .ok_or_else(|| Error::Domain("no rotating-disk root found by the seed scan".into()))
}

/// Real fields at radius r and time t; `None` where r lies outside that medium.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiskFields {
    pub v_theta: Option<f64>,
    pub u_theta_bar: Option<f64>,
    pub pressure: Option<f64>,
}

/// Complex modal velocity v̂θ(r) e^{iωt}.
pub fn rotating_disk_velocity(prob: &RotatingDiskProblem, mode: &DispersionMode, r: f64, t: f64) -> Result<C> {
    Ok(mode.constants[0] * prob.shape(mode.omega, r)? * (I * mode.omega * t).exp())
}

pub fn rotating_disk_fields(prob: &RotatingDiskProblem, mode: &DispersionMode, r: f64, t: f64) -> Result<DiskFields> {
    if mode.problem != ModeProblem::RotatingDisk {
        return Err(Error::Domain("mode does not belong to the rotating disk".into()));
    }
    if !(0.0..=prob.r_outer).contains(&r) {
        return Err(Error::Domain(format!("r = {r} outside [0, {}]", prob.r_outer)));
    }
    let phase = (I * mode.omega * t).exp();
    let mut out = DiskFields { v_theta: None, u_theta_bar: None, pressure: None };
    if r <= prob.r0 {
        out.u_theta_bar = Some((mode.constants[1] * bessel_j(1, prob.ks(mode.omega) * r)? * phase).re);
    }
    if r >= prob.r0 {
        out.v_theta = Some(rotating_disk_velocity(prob, mode, r, t)?.re);
        let v = |s: f64| rotating_disk_velocity(prob, mode, s, t).map(|z| z.re).unwrap_or(f64::NAN);
        let f = |s: f64| v(s).powi(2) / s;
        // tolerance relative to the integrand size; the fields scale with ū0
        let size = (0..=8).map(|k| f(prob.r0 + (r - prob.r0) * k as f64 / 8.0)).fold(0.0, f64::max);
        out.pressure = Some(prob.rho * simpson(f, prob.r0, r, 1e-10 * size * (r - prob.r0)));
    }
    Ok(out)
}

// ---------------------------------------------------------- traveling wave

/// Stokes fluid disk 0 < r < r0 inside an elastic annulus r0 < r < R.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TravelingWaveProblem {
    pub n: u32,
    pub r0: f64,
    pub r_outer: f64,
    pub rho: f64,
    pub nu: f64,
    pub mubar: f64,
    pub lambdabar: f64,
    pub rhobar: f64,
    pub u0bar: f64,
}

impl TravelingWaveProblem {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        n: u32,
        r0: f64,
        r_outer: f64,
        rho: f64,
        nu: f64,
        mubar: f64,
        lambdabar: f64,
        rhobar: f64,
        u0bar: f64,
    ) -> Result<Self> {
        if n == 0 || n + 1 > MAX_ORDER {
            return Err(Error::Domain(format!("wavenumber n must lie in 1..={}", MAX_ORDER - 1)));
        }
        for (name, v) in [("r0", r0), ("rho", rho), ("nu", nu), ("mubar", mubar), ("rhobar", rhobar), ("u0bar", u0bar)] {
            positive(name, v)?;
        }
        if !(r_outer > r0) {
            return Err(Error::Domain("outer radius must exceed r0".into()));
        }
        if !(lambdabar + 2.0 * mubar > 0.0) {
            return Err(Error::Domain("lambdabar + 2 mubar must be positive".into()));
        }
        Ok(TravelingWaveProblem { n, r0, r_outer, rho, nu, mubar, lambdabar, rhobar, u0bar })
    }

    /// r0 = 1, R = 1.2, ρ = 1, ν = 0.1, μ̄ = λ̄ = ρ̄ = δ, ū0 = 1e-7.
    pub fn standard(n: u32, delta: f64) -> Result<Self> {
        Self::new(n, 1.0, 1.2, 1.0, 0.1, delta, delta, delta, 1e-7)
    }

    pub fn mu(&self) -> f64 {
        self.rho * self.nu
    }

    /// λ with λ² = iω/ν.
    pub fn lambda(&self, omega: C) -> C {
        (I * omega / self.nu).sqrt()
    }

    pub fn kp(&self, omega: C) -> C {
        omega / ((self.lambdabar + 2.0 * self.mubar) / self.rhobar).sqrt()
    }

    pub fn ks(&self, omega: C) -> C {
        omega / (self.mubar / self.rhobar).sqrt()
    }
}

/// Z_n(x), Z_n'(x), Z_n''(x) from the recurrence and Bessel's equation.
fn bessel3(first_kind: bool, n: u32, x: C) -> Result<[C; 3]> {
    let (z, zp) = if first_kind {
        (bessel_j(n, x)?, bessel_j_prime(n, x)?)
    } else {
        (bessel_y(n, x)?, bessel_y_prime(n, x)?)
    };
    let nn = (n * n) as f64;
    Ok([z, zp, -zp / x - (c(1.0) - nn / (x * x)) * z])
}

/// Fluid coefficient functions at r for constants (p_I, d).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FluidProfile {
    pub v_r: C,
    pub v_theta: C,
    pub p: C,
    pub v_r_prime: C,
    pub v_theta_prime: C,
}

impl FluidProfile {
    pub fn sigma_rr(&self, mu: f64) -> C {
        -self.p + self.v_r_prime * (2.0 * mu)
    }

    pub fn sigma_rtheta(&self, mu: f64, n: u32, r: f64) -> C {
        (I * n as f64 / r * self.v_r + self.v_theta_prime - self.v_theta / r) * mu
    }
}

/// Solid coefficient functions at r for constants (d̄1..d̄4).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolidProfile {
    pub u_r: C,
    pub u_theta: C,
    pub sigma_rr: C,
    pub sigma_rtheta: C,
}

pub fn traveling_wave_fluid(prob: &TravelingWaveProblem, omega: C, p_i: C, d: C, r: f64) -> Result<FluidProfile> {
    let n = prob.n;
    let nf = n as f64;
    let mu = prob.mu();
    let lam = prob.lambda(omega);
    let coef = p_i * nf / (lam * lam * mu * prob.r0.powi(n as i32));
    let (rn1, rn2) = (r.powi(n as i32 - 1), if n >= 2 { (nf - 1.0) * r.powi(n as i32 - 2) } else { 0.0 });
    let p = p_i * (r / prob.r0).powi(n as i32);
    let (mut v_r, mut v_theta) = (coef * rn1, I * coef * rn1);
    let (mut v_r_prime, mut v_theta_prime) = (coef * rn2, I * coef * rn2);
    if d.norm() != 0.0 {
        let [jn, jp, jpp] = bessel3(true, n, lam * r)?;
        v_r += d * jn / r;
        v_r_prime += d * (lam * jp / r - jn / (r * r));
        v_theta += d * I * lam / nf * jp;
        v_theta_prime += d * I * lam * lam / nf * jpp;
    }
    Ok(FluidProfile { v_r, v_theta, p, v_r_prime, v_theta_prime })
}

pub fn traveling_wave_solid(prob: &TravelingWaveProblem, omega: C, dbar: [C; 4], r: f64) -> Result<SolidProfile> {
    let n = prob.n;
    let nf = n as f64;
    let (kp, ks) = (prob.kp(omega), prob.ks(omega));
    let mut phi = [c(0.0); 3];
    let mut h = [c(0.0); 3];
    for (k, &coef) in dbar.iter().enumerate() {
        if coef.norm() == 0.0 {
            continue;
        }
        let (kk, target) = if k < 2 { (kp, &mut phi) } else { (ks, &mut h) };
        let z = bessel3(k % 2 == 0, n, kk * r)?;
        target[0] += coef * z[0];
        target[1] += coef * kk * z[1];
        target[2] += coef * kk * kk * z[2];
    }
    let inr = I * nf / r;
    let (mb, lb) = (prob.mubar, prob.lambdabar);
    Ok(SolidProfile {
        u_r: phi[1] + inr * h[0],
        u_theta: inr * phi[0] - h[1],
        sigma_rr: phi[2] * (2.0 * mb + lb) + (phi[1] - phi[0] * (nf * nf / r)) * (lb / r) + inr * 2.0 * mb * (h[1] - h[0] / r),
        sigma_rtheta: -h[2] * mb + (h[1] - h[0] * (nf * nf / r)) * (mb / r) + inr * 2.0 * mb * (phi[1] - phi[0] / r),
    })
}

/// The six conditions, each split into its fluid and solid parts, for constants `d`.
fn traveling_wave_conditions(prob: &TravelingWaveProblem, omega: C, d: &[C; 6]) -> Result<[[C; 2]; 6]> {
    let (r0, rr, mu) = (prob.r0, prob.r_outer, prob.mu());
    let dbar = [d[2], d[3], d[4], d[5]];
    let fl = traveling_wave_fluid(prob, omega, d[0], d[1], r0)?;
    let so = traveling_wave_solid(prob, omega, dbar, r0)?;
    let outer = traveling_wave_solid(prob, omega, dbar, rr)?;
    let z = c(0.0);
    Ok([
        [z, outer.sigma_rr],
        [z, outer.sigma_rtheta],
        // v = -iω ū
        [fl.v_r, I * omega * so.u_r],
        [fl.v_theta, I * omega * so.u_theta],
        [fl.sigma_rr(mu), -so.sigma_rr],
        [fl.sigma_rtheta(mu, prob.n, r0), -so.sigma_rtheta],
    ])
}

/// M(ω), columns ordered (p_I, d, d̄1, d̄2, d̄3, d̄4).
pub fn traveling_wave_matrix(prob: &TravelingWaveProblem, omega: C) -> Result<Matrix> {
    if omega.norm() == 0.0 {
        return Err(Error::Domain("omega must be nonzero".into()));
    }
    let mut m = Matrix::zeros(6);
    for col in 0..6 {
        let mut e = [c(0.0); 6];
        e[col] = c(1.0);
        let rows = traveling_wave_conditions(prob, omega, &e)?;
        for (row, parts) in rows.iter().enumerate() {
            m[(row, col)] = parts[0] + parts[1];
        }
    }
    Ok(m)
}

fn row_scales(m: &Matrix) -> [f64; 6] {
    let mut s = [1.0; 6];
    for (i, v) in s.iter_mut().enumerate() {
        let big = (0..6).map(|j| m[(i, j)].norm()).fold(0.0, f64::max);
        if big > 0.0 {
            *v = 1.0 / big;
        }
    }
    s
}

/// Hadamard bound on |det m|.
fn column_product(m: &Matrix) -> f64 {
    (0..m.n).map(|j| (0..m.n).map(|i| m[(i, j)].norm_sqr()).sum::<f64>().sqrt()).product()
}

fn scaled(m: &Matrix, s: &[f64; 6]) -> Matrix {
    let mut out = m.clone();
    for i in 0..6 {
        for j in 0..6 {
            out[(i, j)] *= s[i];
        }
    }
    out
}

/// det M(ω) with rows scaled by the given factors.
pub fn traveling_wave_det(prob: &TravelingWaveProblem, omega: C, scales: Option<[f64; 6]>) -> Result<C> {
    let m = traveling_wave_matrix(prob, omega)?;
    let s = scales.unwrap_or_else(|| row_scales(&m));
    Ok(scaled(&m, &s).det())
}

/// Interface displacement (ū_r, ū_θ)(r0) at θ = t = 0 for constants `d`.
fn interface_displacement(prob: &TravelingWaveProblem, omega: C, d: &[C]) -> Result<(C, C)> {
    let s = traveling_wave_solid(prob, omega, [d[2], d[3], d[4], d[5]], prob.r0)?;
    Ok((s.u_r, s.u_theta))
}

/// Solves det M(ω) = 0, then normalizes d so the real interface displacement has size ū0.
///
/// The phase of d is fixed by making ū_r(r0, 0, 0) real and positive.
pub fn traveling_wave_solve(prob: &TravelingWaveProblem, seed: C) -> Result<DispersionMode> {
    // scales frozen at the seed keep the function analytic in ω
    let scales = row_scales(&traveling_wave_matrix(prob, seed)?);
    let f = |w: C| traveling_wave_det(prob, w, Some(scales)).unwrap_or(C::new(f64::NAN, f64::NAN));
    let omega = solve_dispersion(f, seed, column_product(&scaled(&traveling_wave_matrix(prob, seed)?, &scales)))?;
    let m = traveling_wave_matrix(prob, omega)?;
    let mut d = null_vector(&scaled(&m, &row_scales(&m)))?;
    let (ur, _) = interface_displacement(prob, omega, &d)?;
    if ur.norm() > 0.0 {
        let rot = ur.conj() / ur.norm();
        d.iter_mut().for_each(|x| *x *= rot);
    }
    let (ur, ut) = interface_displacement(prob, omega, &d)?;
    let size = ur.re.hypot(ut.re);
    if size == 0.0 {
        return Err(Error::Degenerate("mode has no interface displacement".into()));
    }
    d.iter_mut().for_each(|x| *x *= prob.u0bar / size);
    // per row, the cancellation among the six column contributions
    let residuals = (0..6).map(|i| relative(&(0..6).map(|j| m[(i, j)] * d[j]).collect::<Vec<_>>())).collect();
    let mode = DispersionMode {
        problem: ModeProblem::TravelingWave,
        n: prob.n,
        delta: prob.rhobar,
        omega,
        constants: d,
        residuals,
    };
    if mode.max_residual() > 1e-8 {
        return Err(Error::Consistency(format!("matching residual {:e} after solve", mode.max_residual())));
    }
    Ok(mode)
}

/// Seed from the built-in table, or the best local minimum of a scaled det M on a scan.
pub fn traveling_wave_seed(prob: &TravelingWaveProblem) -> Result<C> {
    if let Some(s) = seed_table(ModeProblem::TravelingWave, prob.rhobar, prob.n) {
        if *prob == TravelingWaveProblem::standard(prob.n, prob.rhobar)? {
            return Ok(s);
        }
    }
    let norm_det = |w: C| -> Option<f64> {
        let m = traveling_wave_matrix(prob, w).ok()?;
        let sm = scaled(&m, &row_scales(&m));
        Some(sm.det().norm() / column_product(&sm).max(1e-300))
    };
    scan_seeds(norm_det, (0.5, 10.0), (-3.0, -0.01), 50)
        .into_iter()
        .find(|&s| traveling_wave_solve(prob, s).is_ok())
        .ok_or_else(|| Error::Domain("no traveling-wave root found by the seed scan".into()))
}

/// Real fields at (r, θ, t); fluid entries exist for r <= r0, solid ones for r >= r0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaveFields {
    pub v_r: Option<f64>,
    pub v_theta: Option<f64>,
    pub p: Option<f64>,
    pub u_r_bar: Option<f64>,
    pub u_theta_bar: Option<f64>,
}

pub fn traveling_wave_fields(
    prob: &TravelingWaveProblem,
    mode: &DispersionMode,
    r: f64,
    theta: f64,
    t: f64,
) -> Result<WaveFields> {
    if mode.problem != ModeProblem::TravelingWave || mode.constants.len() != 6 {
        return Err(Error::Domain("mode does not belong to the traveling wave".into()));
    }
    if !(r > 0.0 && r <= prob.r_outer) {
        return Err(Error::Domain(format!("r = {r} outside (0, {}]", prob.r_outer)));
    }
    let d = &mode.constants;
    let phase = (I * (c(prob.n as f64 * theta) - mode.omega * t)).exp();
    let mut out = WaveFields { v_r: None, v_theta: None, p: None, u_r_bar: None, u_theta_bar: None };
    if r <= prob.r0 {
        let f = traveling_wave_fluid(prob, mode.omega, d[0], d[1], r)?;
        out.v_r = Some((f.v_r * phase).re);
        out.v_theta = Some((f.v_theta * phase).re);
        out.p = Some((f.p * phase).re);
    }
    if r >= prob.r0 {
        let s = traveling_wave_solid(prob, mode.omega, [d[2], d[3], d[4], d[5]], r)?;
        out.u_r_bar = Some((s.u_r * phase).re);
        out.u_theta_bar = Some((s.u_theta * phase).re);
    }
    Ok(out)
}
