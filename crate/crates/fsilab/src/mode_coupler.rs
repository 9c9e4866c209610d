//! Interface closures for the Fourier-mode model problem and the time stepper.
//!
//! The fluid is an inviscid column of height H over the solid. For a mode
//! e^{i kx x} its pressure response to interface acceleration is
//! p_I = ρ H_eff v̇_I with H_eff = tanh(kx H)/kx.

use num_complex::Complex64 as C;

use crate::error::{Error, Result};
use crate::numerics::quad::integrate;
use crate::solid_lattice::{
    d_quadrature_step, extrapolate_ghost, lax_wendroff_step, DQuadrature, ModeParams, SolidLattice,
};
use crate::stability::fluid_impedance_full;

/// tanh(kx H)/kx, with the limit H below kx H = 1e-8.
pub fn effective_height(kx: f64, h: f64) -> f64 {
    let x = kx * h;
    if x < 1e-8 {
        h
    } else {
        x.tanh() / kx
    }
}

/// Fluid impedance used in the AMP velocity average.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ZfModel {
    /// ρ H_eff / Δt
    #[default]
    Model,
    /// ρΔy/Δt + 2ρν/Δy
    Monolithic,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SchemeKind {
    Amp { zf: ZfModel },
    Tp,
    TpIterated { omega: f64, max_iters: usize, tol: f64 },
    Atp,
}

impl SchemeKind {
    pub fn amp() -> Self {
        SchemeKind::Amp { zf: ZfModel::Model }
    }

    pub fn validate(&self) -> Result<()> {
        if let SchemeKind::TpIterated { omega, max_iters, tol } = *self {
            if !(omega > 0.0 && omega <= 1.0) {
                return Err(Error::Domain(format!("omega = {omega} outside (0, 1]")));
            }
            if max_iters == 0 || !(tol > 0.0) {
                return Err(Error::Domain("TP iteration needs max_iters ≥ 1 and tol > 0".into()));
            }
        }
        Ok(())
    }

    pub fn name(&self) -> &'static str {
        match self {
            SchemeKind::Amp { .. } => "amp",
            SchemeKind::Tp => "tp",
            SchemeKind::TpIterated { .. } => "tp-iter",
            SchemeKind::Atp => "atp",
        }
    }
}

/// Interface values at levels n and n−1 (index 0 is level n).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InterfaceHistory {
    pub v: [C; 2],
    pub p: [C; 2],
    pub v_f: C,
    pub level: usize,
}

impl InterfaceHistory {
    /// Seeds both levels from the lattice's interface values.
    pub fn seeded(lat: &SolidLattice, p: &ModeParams) -> Self {
        let (a0, b0) = (lat.a[1], lat.b[1]);
        let v = (b0 - a0) / (2.0 * p.zp());
        let pr = -(b0 + a0) * 0.5;
        InterfaceHistory { v: [v, v], p: [pr, pr], v_f: v, level: lat.level }
    }

    pub fn push(&mut self, v: C, p: C, v_f: C) {
        self.v = [v, self.v[0]];
        self.p = [p, self.p[0]];
        self.v_f = v_f;
        self.level += 1;
    }

    fn scale(&mut self, s: f64) {
        self.v = [self.v[0] * s, self.v[1] * s];
        self.p = [self.p[0] * s, self.p[1] * s];
        self.v_f *= s;
    }
}

/// Result of one interface closure.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Closure {
    pub v_i: C,
    pub p_i: C,
    pub v_f: C,
    pub b_ghost: C,
}

pub fn fluid_impedance(p: &ModeParams, model: ZfModel) -> f64 {
    match model {
        ZfModel::Model => p.rho * p.h_eff() / p.dt,
        ZfModel::Monolithic => fluid_impedance_full(p.rho, p.dy, p.dt, p.rho * p.nu, 1.0, 2.0),
    }
}

fn bdf_history(h: &InterfaceHistory) -> C {
    h.v[0] * 2.0 - h.v[1] * 0.5
}

/// AMP closure. `lat` holds level n+1 in the interior and the extrapolated ghost a.
pub fn amp_step(lat: &SolidLattice, h: &InterfaceHistory, p: &ModeParams, model: ZfModel) -> Result<Closure> {
    let zp = p.zp();
    let zf = fluid_impedance(p, model);
    let (a0, b0) = (lat.a[1], lat.b[1]);
    let vs = (b0 - a0) / (2.0 * zp);
    let ss = (b0 + a0) * 0.5;
    let kappa = p.rho * p.h_eff() / p.dt;
    let me = p.m_eta();
    let w = zf / (zf + zp);
    let u = zp / (zf + zp);
    let c1 = h.v[0] * (4.0 / 3.0) - h.v[1] / 3.0;
    let den = me + u;
    if !(den.abs() >= 1e-14 * (me + 1.0)) || !den.is_finite() {
        return Err(Error::Degenerate(format!("AMP elimination denominator {den:e}")));
    }
    // v = w v_f + u v_s, v_f = c1 + 2P/(3κ), P(Mη+1) = κ(1.5 v − hist) − Mη σ_s
    let pi = ((c1 * (1.5 * w) + vs * (1.5 * u) - bdf_history(h)) * kappa - ss * me) / den;
    let vf = c1 + pi * (2.0 / (3.0 * kappa));
    let vi = vf * w + vs * u;
    let b_ghost = -lat.b[2] + (-pi + vi * zp) * 2.0;
    Ok(Closure { v_i: vi, p_i: pi, v_f: vf, b_ghost })
}

/// TP closure: solid velocity to the fluid, fluid traction back to the solid.
pub fn tp_step(lat: &SolidLattice, h: &InterfaceHistory, p: &ModeParams) -> Closure {
    let (a0, b0) = (lat.a[1], lat.b[1]);
    let vi = (b0 - a0) / (2.0 * p.zp());
    let vdot = (vi * 1.5 - bdf_history(h)) / p.dt;
    let pi = vdot * (p.rho * p.h_eff());
    let b_ghost = -lat.b[2] - lat.a[0] - lat.a[2] - pi * 4.0;
    Closure { v_i: vi, p_i: pi, v_f: vi, b_ghost }
}

/// ATP closure: solid traction to the fluid, fluid velocity back to the solid.
pub fn atp_step(lat: &SolidLattice, h: &InterfaceHistory, p: &ModeParams) -> Closure {
    let (a0, b0) = (lat.a[1], lat.b[1]);
    let pi = -(b0 + a0) * 0.5;
    let vi = h.v[0] + (pi + h.p[0]) * (p.dt / (2.0 * p.rho * p.h_eff()));
    let b_ghost = -lat.b[2] + lat.a[0] + lat.a[2] + vi * (4.0 * p.zp());
    Closure { v_i: vi, p_i: pi, v_f: vi, b_ghost }
}

/// Outcome of the TP sub-iteration at one time step.
#[derive(Debug, Clone, PartialEq)]
pub struct TpIteration {
    pub v_i: C,
    pub p_i: C,
    pub b0: C,
    /// v_I^{(k)}, k = 0, 1, …
    pub iterates: Vec<C>,
    /// Fixed point of the recurrence.
    pub v_star: C,
    pub converged: bool,
    pub diverged: bool,
}

impl TpIteration {
    /// e^{(k)}/e^{(k−1)} on the first pair of iterates, where rounding matters least.
    pub fn measured_ratio(&self) -> Option<C> {
        let e: Vec<C> = self.iterates.iter().take(2).map(|v| v - self.v_star).collect();
        (e.len() == 2 && e[0].norm() > 0.0).then(|| e[1] / e[0])
    }
}

/// Predicted error ratio 1 − ω(3Mη/2 + 1).
pub fn tp_iteration_ratio(omega: f64, m_eta: f64) -> f64 {
    1.0 - omega * (1.5 * m_eta + 1.0)
}

/// Under-relaxed TP sub-iteration starting from the interior b_0 of `lat`.
pub fn tp_iterate(
    lat: &SolidLattice,
    h: &InterfaceHistory,
    p: &ModeParams,
    omega: f64,
    max_iters: usize,
    tol: f64,
) -> Result<TpIteration> {
    SchemeKind::TpIterated { omega, max_iters, tol }.validate()?;
    let zp = p.zp();
    let a0 = lat.a[1];
    let rho_h = p.rho * p.h_eff();
    let hist = bdf_history(h);
    let pressure = |v: C| (v * 1.5 - hist) / p.dt * rho_h;
    // v* = (−2a0 + 2ρH_eff hist/Δt) / (2 zp + 3ρH_eff/Δt)
    let v_star = (-a0 * 2.0 + hist * (2.0 * rho_h / p.dt)) / (2.0 * zp + 3.0 * rho_h / p.dt);
    let mut b0 = lat.b[1];
    let mut v = (b0 - a0) / (2.0 * zp);
    let mut iterates = vec![v];
    let e0 = (v - v_star).norm();
    let scale = v_star.norm().max(e0).max(f64::MIN_POSITIVE);
    let (mut converged, mut diverged) = (e0 <= tol * scale, false);
    let mut k = 0;
    while !converged && k < max_iters {
        b0 = -a0 - pressure(v) * 2.0;
        v = (b0 - a0) * (omega / (2.0 * zp)) + v * (1.0 - omega);
        iterates.push(v);
        k += 1;
        let e = (v - v_star).norm();
        if e <= tol * scale {
            converged = true;
        } else if e > 1e12 * e0.max(f64::MIN_POSITIVE) || !e.is_finite() {
            diverged = true;
            break;
        }
    }
    let pi = pressure(v);
    Ok(TpIteration { v_i: v, p_i: pi, b0, iterates, v_star, converged, diverged })
}

/// Solution of ρH v̇ + z̄p v = −a_I(t) for kx = 0, where a_I is the characteristic
/// arriving at the interface from the solid. Returns (v_I(t), outgoing b_I(t)).
pub fn exact_interface_1d<F>(incoming: F, v0: C, p: &ModeParams, t: f64) -> Result<(C, C)>
where
    F: Fn(f64) -> C,
{
    if !(t >= 0.0) {
        return Err(Error::Domain("t must be non-negative".into()));
    }
    let rho_h = p.rho * p.h;
    let lam = p.zp() / rho_h;
    let conv = integrate(|tau| incoming(tau) * (lam * (tau - t)).exp(), 0.0, t, 1e-13);
    let v = -conv / rho_h + v0 * (-lam * t).exp();
    Ok((v, v * (2.0 * p.zp()) + incoming(t)))
}

/// Per-step record of a simulation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepRecord {
    pub step: usize,
    /// ln ‖(a, b, d, z̄p v_I)‖ including accumulated renormalization.
    pub log_norm: f64,
    pub v_i: C,
    pub p_i: C,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdvanceReport {
    /// Per-step growth factor from a least-squares fit over the last half of the run.
    pub growth: f64,
    /// RMS residual of that fit in ln units.
    pub residual: f64,
    pub unbounded: bool,
    /// Steps whose TP sub-iteration did not converge.
    pub iteration_failures: usize,
    pub records: Vec<StepRecord>,
}

/// A time-domain run of one scheme on one Fourier mode.
#[derive(Debug, Clone)]
pub struct Simulation {
    pub params: ModeParams,
    pub scheme: SchemeKind,
    pub quadrature: DQuadrature,
    pub lattice: SolidLattice,
    pub history: InterfaceHistory,
    /// ln of the factor divided out by renormalization.
    pub log_scale: f64,
    pub iteration_failures: usize,
    /// Interface values in the lattice's (renormalized) units.
    pub last: StepRecord,
}

const RENORM_ABOVE: f64 = 1e50;

impl Simulation {
    pub fn new(scheme: SchemeKind, params: ModeParams, mut lattice: SolidLattice) -> Result<Self> {
        scheme.validate()?;
        params.validate()?;
        lattice.check()?;
        lattice.d_prev = lattice.d.clone();
        let history = InterfaceHistory::seeded(&lattice, &params);
        let mut sim = Simulation {
            params,
            scheme,
            quadrature: DQuadrature::Bdf2,
            lattice,
            history,
            log_scale: 0.0,
            iteration_failures: 0,
            last: StepRecord { step: 0, log_norm: 0.0, v_i: history.v[0], p_i: history.p[0] },
        };
        sim.last.log_norm = sim.log_norm();
        Ok(sim)
    }

    fn raw_norm(&self) -> f64 {
        (self.lattice.norm_sqr() + (self.history.v[0] * self.params.zp()).norm_sqr()).sqrt()
    }

    pub fn log_norm(&self) -> f64 {
        self.raw_norm().ln() + self.log_scale
    }

    pub fn step(&mut self) -> Result<StepRecord> {
        let p = self.params;
        let lat = &self.lattice;
        let (mut a, mut b) = lax_wendroff_step(lat, &p);
        let n = lat.len();
        // bottom: nothing enters from below, b leaves by extrapolation
        a[n - 1] = C::new(0.0, 0.0);
        b[n - 1] = b[n - 2] * 2.0 - b[n - 3];
        a[0] = extrapolate_ghost(&a);
        let view = SolidLattice { a, b, d: lat.d.clone(), d_prev: lat.d_prev.clone(), depth: lat.depth, level: lat.level + 1 };
        let closure = match self.scheme {
            SchemeKind::Amp { zf } => amp_step(&view, &self.history, &p, zf)?,
            SchemeKind::Tp => tp_step(&view, &self.history, &p),
            SchemeKind::Atp => atp_step(&view, &self.history, &p),
            SchemeKind::TpIterated { omega, max_iters, tol } => {
                let it = tp_iterate(&view, &self.history, &p, omega, max_iters, tol)?;
                if !it.converged {
                    self.iteration_failures += 1;
                }
                let b_ghost = -view.b[2] - view.a[0] - view.a[2] - it.p_i * 4.0;
                Closure { v_i: it.v_i, p_i: it.p_i, v_f: it.v_i, b_ghost }
            }
        };
        let SolidLattice { mut a, mut b, .. } = view;
        b[0] = closure.b_ghost;
        let d = d_quadrature_step(&self.lattice, &p, &a, &b, self.quadrature);
        let lat = &mut self.lattice;
        std::mem::swap(&mut lat.a, &mut a);
        std::mem::swap(&mut lat.b, &mut b);
        lat.d_prev = std::mem::replace(&mut lat.d, d);
        lat.level += 1;
        self.history.push(closure.v_i, closure.p_i, closure.v_f);
        if !self.lattice.is_finite() {
            return Err(Error::Domain("non-finite state".into()));
        }
        let norm = self.raw_norm();
        if norm > RENORM_ABOVE {
            self.lattice.scale(1.0 / norm);
            self.history.scale(1.0 / norm);
            self.log_scale += norm.ln();
        }
        self.last = StepRecord { step: self.lattice.level, log_norm: self.log_norm(), v_i: closure.v_i, p_i: closure.p_i };
        Ok(self.last)
    }

    /// Runs `nsteps` steps and fits the growth rate over the last half.
    pub fn advance(&mut self, nsteps: usize) -> Result<AdvanceReport> {
        if nsteps < 16 {
            return Err(Error::Domain("advance needs at least 16 steps".into()));
        }
        let mut records = Vec::with_capacity(nsteps + 1);
        records.push(self.last);
        let mut unbounded = false;
        for _ in 0..nsteps {
            match self.step() {
                Ok(r) => records.push(r),
                Err(Error::Domain(_)) => {
                    unbounded = true;
                    break;
                }
                Err(e) => return Err(e),
            }
        }
        let (growth, residual) = if unbounded { (f64::INFINITY, f64::NAN) } else { fit_growth(&records) };
        Ok(AdvanceReport { growth, residual, unbounded, iteration_failures: self.iteration_failures, records })
    }
}

/// exp(slope) and RMS residual of ln‖·‖ against step over the last half.
pub fn fit_growth(records: &[StepRecord]) -> (f64, f64) {
    let tail = &records[records.len() / 2..];
    if tail.iter().any(|r| !r.log_norm.is_finite()) {
        // identically zero state
        return (0.0, 0.0);
    }
    let n = tail.len() as f64;
    let mx = tail.iter().map(|r| r.step as f64).sum::<f64>() / n;
    let my = tail.iter().map(|r| r.log_norm).sum::<f64>() / n;
    let sxx: f64 = tail.iter().map(|r| (r.step as f64 - mx).powi(2)).sum();
    let sxy: f64 = tail.iter().map(|r| (r.step as f64 - mx) * (r.log_norm - my)).sum();
    let slope = sxy / sxx;
    let rss: f64 = tail.iter().map(|r| (r.log_norm - my - slope * (r.step as f64 - mx)).powi(2)).sum();
    (slope.exp(), (rss / n).sqrt())
}

/// Convenience wrapper around [`Simulation::advance`].
pub fn advance(
    scheme: SchemeKind,
    params: ModeParams,
    init: SolidLattice,
    nsteps: usize,
) -> Result<(Simulation, AdvanceReport)> {
    let mut sim = Simulation::new(scheme, params, init)?;
    let report = sim.advance(nsteps)?;
    Ok((sim, report))
}

/// Lattice filled with seeded complex noise in the top `width` points.
pub fn noisy_lattice(depth: usize, width: usize, seed: u64) -> SolidLattice {
    use rand::{Rng, SeedableRng};
    let mut rng = rand::rngs::StdRng::seed_from_u64(seed);
    let mut lat = SolidLattice::zeros(depth);
    let draw = |rng: &mut rand::rngs::StdRng| C::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
    for i in 0..width.min(depth + 1) {
        lat.a[i] = draw(&mut rng);
        lat.b[i] = draw(&mut rng);
        lat.d[i] = draw(&mut rng);
    }
    lat.d_prev = lat.d.clone();
    lat
}
