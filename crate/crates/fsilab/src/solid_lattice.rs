//! Fourier-transformed acoustic solid in characteristic variables.
//!
//! a = σ22 − z̄p v moves up toward the interface, b = σ22 + z̄p v moves down
//! into the solid, d = σ21 is advanced by quadrature. Grid points are
//! j = 1, 0, −1, …, −J with j = 1 the ghost point above the interface.

use num_complex::Complex64 as C;

use crate::error::{Error, Result};
use crate::mode_coupler::effective_height;

const I: C = C::new(0.0, 1.0);

/// One Fourier-mode configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeParams {
    pub kx: f64,
    pub h: f64,
    pub rho: f64,
    pub nu: f64,
    pub rhobar: f64,
    pub cpbar: f64,
    pub dy: f64,
    pub dt: f64,
}

impl ModeParams {
    pub fn new(kx: f64, h: f64, rho: f64, nu: f64, rhobar: f64, cpbar: f64, dy: f64, dt: f64) -> Result<Self> {
        let p = ModeParams { kx, h, rho, nu, rhobar, cpbar, dy, dt };
        p.validate()?;
        Ok(p)
    }

    /// Unit solid (ρ̄ = c̄p = Δy = 1) realizing the given dimensionless groups.
    ///
    /// `kx_h` fixes η = tanh(kx H)/(kx H); it is ignored when λx = 0.
    pub fn from_dimensionless(lambda_x: f64, lambda_y: f64, mgrid: f64, kx_h: f64) -> Result<Self> {
        if !(lambda_y > 0.0) || !(mgrid > 0.0) || !(lambda_x >= 0.0) {
            return Err(Error::Domain("need λy > 0, 𝓜 > 0, λx ≥ 0".into()));
        }
        let dt = lambda_y;
        let kx = lambda_x / dt;
        let h = if kx > 0.0 && kx_h > 0.0 { kx_h / kx } else { 1.0 };
        let rho = mgrid / h;
        ModeParams::new(kx, h, rho, 0.0, 1.0, 1.0, 1.0, dt)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [self.h, self.rho, self.rhobar, self.cpbar, self.dy, self.dt];
        if positive.iter().any(|v| !(*v > 0.0) || !v.is_finite()) {
            return Err(Error::Domain("H, ρ, ρ̄, c̄p, Δy, Δt must be positive".into()));
        }
        if !(self.kx >= 0.0) || !(self.nu >= 0.0) {
            return Err(Error::Domain("kx and ν must be non-negative".into()));
        }
        Ok(())
    }

    pub fn lambda_x(&self) -> f64 {
        self.kx * self.cpbar * self.dt
    }

    pub fn lambda_y(&self) -> f64 {
        self.cpbar * self.dt / self.dy
    }

    pub fn zp(&self) -> f64 {
        self.rhobar * self.cpbar
    }

    pub fn h_eff(&self) -> f64 {
        effective_height(self.kx, self.h)
    }

    pub fn eta(&self) -> f64 {
        self.h_eff() / self.h
    }

    /// Acoustic mass ratio ρH/(z̄p Δt).
    pub fn m(&self) -> f64 {
        self.rho * self.h / (self.zp() * self.dt)
    }

    /// Grid mass ratio ρH/(ρ̄ Δy).
    pub fn mgrid(&self) -> f64 {
        self.rho * self.h / (self.rhobar * self.dy)
    }

    pub fn m_eta(&self) -> f64 {
        self.m() * self.eta()
    }

    /// λx² + λy² ≤ 1.
    pub fn within_cfl(&self) -> bool {
        self.lambda_x().powi(2) + self.lambda_y().powi(2) <= 1.0 + 1e-12
    }
}

/// Which quadrature advances d.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DQuadrature {
    #[default]
    Bdf2,
    Trapezoid,
}

/// Semi-discrete solid state; index i = 1 − j.
#[derive(Debug, Clone, PartialEq)]
pub struct SolidLattice {
    pub depth: usize,
    pub a: Vec<C>,
    pub b: Vec<C>,
    pub d: Vec<C>,
    pub d_prev: Vec<C>,
    pub level: usize,
}

impl SolidLattice {
    pub fn zeros(depth: usize) -> Self {
        let n = depth + 2;
        let z = vec![C::new(0.0, 0.0); n];
        SolidLattice { depth, a: z.clone(), b: z.clone(), d: z.clone(), d_prev: z, level: 0 }
    }

    /// Array index of grid point j.
    pub fn idx(j: i64) -> usize {
        (1 - j) as usize
    }

    pub fn len(&self) -> usize {
        self.depth + 2
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn check(&self) -> Result<()> {
        let n = self.len();
        if self.depth < 3 || [&self.a, &self.b, &self.d, &self.d_prev].iter().any(|v| v.len() != n) {
            return Err(Error::Domain("lattice arrays must have length J + 2 with J ≥ 3".into()));
        }
        Ok(())
    }

    pub fn is_finite(&self) -> bool {
        [&self.a, &self.b, &self.d]
            .iter()
            .all(|v| v.iter().all(|c| c.re.is_finite() && c.im.is_finite()))
    }

    pub fn norm_sqr(&self) -> f64 {
        [&self.a, &self.b, &self.d]
            .iter()
            .map(|v| v.iter().map(|c| c.norm_sqr()).sum::<f64>())
            .sum()
    }

    pub fn scale(&mut self, s: f64) {
        for v in [&mut self.a, &mut self.b, &mut self.d, &mut self.d_prev] {
            for c in v.iter_mut() {
                *c *= s;
            }
        }
    }
}

/// Lax-Wendroff update of (a, b) at one point from its three-point neighbourhood.
///
/// Each triple is (u_{j+1}, u_j, u_{j−1}).
pub fn lw_point(a: [C; 3], b: [C; 3], d: [C; 3], lambda_x: f64, lambda_y: f64) -> (C, C) {
    let (lx, ly) = (lambda_x, lambda_y);
    let d0 = |u: [C; 3]| u[0] - u[2];
    let dpm = |u: [C; 3]| u[0] - u[1] * 2.0 + u[2];
    let diff = b[1] - a[1];
    let src = I * (lx * ly / 4.0) * d0(d);
    let an = a[1] - d0(a) * (ly / 2.0) + dpm(a) * (ly * ly / 2.0) - I * lx * d[1] + src + diff * (lx * lx / 4.0);
    let bn = b[1] + d0(b) * (ly / 2.0) + dpm(b) * (ly * ly / 2.0) + I * lx * d[1] + src - diff * (lx * lx / 4.0);
    (an, bn)
}

/// New (a, b) at j = 0..−J+1; entries at j = 1 and j = −J are copied from level n.
pub fn lax_wendroff_step(lat: &SolidLattice, p: &ModeParams) -> (Vec<C>, Vec<C>) {
    let (lx, ly) = (p.lambda_x(), p.lambda_y());
    let mut a = lat.a.clone();
    let mut b = lat.b.clone();
    for i in 1..=lat.depth {
        let tri = |v: &Vec<C>| [v[i - 1], v[i], v[i + 1]];
        let (an, bn) = lw_point(tri(&lat.a), tri(&lat.b), tri(&lat.d), lx, ly);
        a[i] = an;
        b[i] = bn;
    }
    (a, b)
}

/// d at level n+1 on every grid point.
pub fn d_quadrature_step(lat: &SolidLattice, p: &ModeParams, a_new: &[C], b_new: &[C], rule: DQuadrature) -> Vec<C> {
    let lx = p.lambda_x();
    (0..lat.len())
        .map(|i| match rule {
            DQuadrature::Bdf2 => {
                lat.d[i] * (4.0 / 3.0) - lat.d_prev[i] / 3.0 + I * (lx / 3.0) * (b_new[i] - a_new[i])
            }
            DQuadrature::Trapezoid => {
                lat.d[i] + I * (lx / 4.0) * ((b_new[i] - a_new[i]) + (lat.b[i] - lat.a[i]))
            }
        })
        .collect()
}

/// a_1 = 2 a_0 − a_{−1}.
pub fn extrapolate_ghost(a: &[C]) -> C {
    a[1] * 2.0 - a[2]
}

/// (v̄, σ22, σ21) from characteristic variables.
pub fn to_primitive(a: C, b: C, d: C, p: &ModeParams) -> (C, C, C) {
    let zp = p.zp();
    ((b - a) / (2.0 * zp), (b + a) * 0.5, d)
}

/// (a, b, d) from primitive variables.
pub fn from_primitive(v: C, sigma22: C, sigma21: C, p: &ModeParams) -> (C, C, C) {
    let zp = p.zp();
    (sigma22 - v * zp, sigma22 + v * zp, sigma21)
}

/// One Lax-Wendroff step with periodic wrap-around; used to study the interior scheme alone.
pub fn lax_wendroff_periodic(a: &[C], b: &[C], d: &[C], lambda_x: f64, lambda_y: f64) -> (Vec<C>, Vec<C>) {
    let n = a.len();
    let tri = |v: &[C], i: usize| [v[(i + n - 1) % n], v[i], v[(i + 1) % n]];
    (0..n).map(|i| lw_point(tri(a, i), tri(b, i), tri(d, i), lambda_x, lambda_y)).unzip()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(lx: f64, ly: f64) -> ModeParams {
        ModeParams::from_dimensionless(lx, ly, 1.0, 1.0).unwrap()
    }

    fn c(re: f64, im: f64) -> C {
        C::new(re, im)
    }

    #[test]
    fn derived_groups() {
        let p = ModeParams::new(2.0, 0.5, 1.2, 0.1, 3.0, 2.0, 0.1, 0.02).unwrap();
        assert!((p.lambda_x() - 0.08).abs() < 1e-15);
        assert!((p.lambda_y() - 0.4).abs() < 1e-15);
        assert!((p.mgrid() - p.m() * p.lambda_y()).abs() <= 1e-14 * p.mgrid());
        assert!(p.eta() > 0.0 && p.eta() <= 1.0);
        assert!(ModeParams::new(0.0, -1.0, 1.0, 0.0, 1.0, 1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn from_dimensionless_round_trips() {
        let p = ModeParams::from_dimensionless(0.3, 0.5, 7.0, 2.0).unwrap();
        assert!((p.lambda_x() - 0.3).abs() < 1e-15);
        assert!((p.lambda_y() - 0.5).abs() < 1e-15);
        assert!((p.mgrid() - 7.0).abs() < 1e-12);
        assert!((p.eta() - 2f64.tanh() / 2.0).abs() < 1e-15);
    }

    #[test]
    fn constant_field_is_preserved() {
        let p = params(0.0, 0.7);
        let mut lat = SolidLattice::zeros(10);
        lat.a.iter_mut().for_each(|v| *v = c(1.5, -0.5));
        let (a, _) = lax_wendroff_step(&lat, &p);
        for v in &a[1..=10] {
            assert!((v - c(1.5, -0.5)).norm() < 1e-15);
        }
    }

    #[test]
    fn unit_cfl_is_an_exact_shift() {
        let p = params(0.0, 1.0);
        let mut lat = SolidLattice::zeros(12);
        for i in 0..lat.len() {
            lat.a[i] = c((i as f64 * 0.7).sin(), i as f64);
            lat.b[i] = c((i as f64 * 1.3).cos(), -(i as f64));
        }
        let (a, b) = lax_wendroff_step(&lat, &p);
        for i in 1..=12 {
            // a^{n+1}_j = a^n_{j−1} (index i+1), b^{n+1}_j = b^n_{j+1} (index i−1)
            assert!((a[i] - lat.a[i + 1]).norm() <= 4.0 * f64::EPSILON * lat.a[i + 1].norm().max(1.0));
            assert!((b[i] - lat.b[i - 1]).norm() <= 4.0 * f64::EPSILON * lat.b[i - 1].norm().max(1.0));
        }
    }

    #[test]
    fn d_quadrature_hand_value() {
        let p = params(0.3, 0.5);
        let mut lat = SolidLattice::zeros(3);
        lat.d[2] = c(1.0, 0.0);
        lat.d_prev[2] = c(0.5, 0.0);
        let a = vec![c(0.0, 0.0); 5];
        let mut b = a.clone();
        b[2] = c(0.0, 2.0);
        let d = d_quadrature_step(&lat, &p, &a, &b, DQuadrature::Bdf2);
        assert!((d[2] - c(0.966_666_666_666_666_7, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn d_quadrature_fixed_points() {
        let p = params(0.0, 0.5);
        let mut lat = SolidLattice::zeros(4);
        lat.d.iter_mut().for_each(|v| *v = c(0.25, 1.0));
        lat.d_prev = lat.d.clone();
        let z = vec![c(3.0, 0.0); 6];
        let d = d_quadrature_step(&lat, &p, &z, &z, DQuadrature::Bdf2);
        assert!(d.iter().all(|v| (v - c(0.25, 1.0)).norm() < 1e-15));
        let p = params(0.4, 0.5);
        let lat = SolidLattice::zeros(4);
        let d = d_quadrature_step(&lat, &p, &z, &z, DQuadrature::Bdf2);
        assert!(d.iter().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn ghost_extrapolation() {
        // index 1 is j = 0, index 2 is j = −1
        let lin: Vec<C> = (0..5).map(|i| c(1.0 - i as f64, 0.0) * 3.0 + 2.0).collect();
        assert_eq!(extrapolate_ghost(&lin), lin[0]);
        let quad: Vec<C> = (0..5).map(|i| c((1.0 - i as f64).powi(2), 0.0)).collect();
        assert_eq!(extrapolate_ghost(&quad), c(-1.0, 0.0));
    }

    #[test]
    fn primitive_round_trip() {
        let p = ModeParams::new(0.0, 1.0, 1.0, 0.0, 2.5, 1.7, 1.0, 0.5).unwrap();
        let (a, b, d) = (c(0.3, -1.0), c(2.0, 0.25), c(-0.5, 0.5));
        let (v, s22, s21) = to_primitive(a, b, d, &p);
        let (a2, b2, d2) = from_primitive(v, s22, s21, &p);
        assert!((a - a2).norm() < 1e-15 && (b - b2).norm() < 1e-15 && d == d2);
        assert_eq!(to_primitive(a, a, d, &p).0, c(0.0, 0.0));
        assert_eq!(to_primitive(a, -a, d, &p).1, c(0.0, 0.0));
    }

    #[test]
    fn fourier_symbol_of_the_decoupled_update() {
        let n = 32;
        let ly = 0.6;
        for k in 1..n {
            let w = 2.0 * std::f64::consts::PI * k as f64 / n as f64;
            let a: Vec<C> = (0..n).map(|j| C::from_polar(1.0, w * j as f64)).collect();
            let zero = vec![c(0.0, 0.0); n];
            let (a1, b1) = lax_wendroff_periodic(&a, &zero, &zero, 0.0, ly);
            let g = a1[3] / a[3];
            let expect = (c(1.0 - ly * ly * (1.0 - w.cos()), 0.0)).norm_sqr() + (ly * w.sin()).powi(2);
            assert!((g.norm_sqr() - expect).abs() < 1e-13, "k={k}");
            assert!(a1.iter().zip(&a).all(|(x, y)| (*x / *y - g).norm() < 1e-13));
            assert!(b1.iter().all(|x| x.norm() == 0.0));
        }
    }

    proptest::proptest! {
        #[test]
        fn decoupled_update_is_dissipative(
            ly in 0.01f64..=1.0,
            re in proptest::collection::vec(-1.0f64..1.0, 16),
            im in proptest::collection::vec(-1.0f64..1.0, 16),
        ) {
            let a: Vec<C> = re.iter().zip(&im).map(|(&x, &y)| c(x, y)).collect();
            let b: Vec<C> = im.iter().zip(&re).map(|(&x, &y)| c(x, -y)).collect();
            let zero = vec![c(0.0, 0.0); 16];
            let (a1, b1) = lax_wendroff_periodic(&a, &b, &zero, 0.0, ly);
            let n2 = |v: &[C]| v.iter().map(|z| z.norm_sqr()).sum::<f64>();
            proptest::prop_assert!(n2(&a1) <= n2(&a) * (1.0 + 1e-12));
            proptest::prop_assert!(n2(&b1) <= n2(&b) * (1.0 + 1e-12));
        }
    }
}
