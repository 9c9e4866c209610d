use fsilab::numerics::{bessel_j, bessel_y};
use fsilab::oracles::*;
use num_complex::Complex64 as C;
use rand::{Rng, SeedableRng};

fn rel(a: C, b: C) -> f64 {
    (a - b).norm() / b.norm()
}

fn slope(hs: &[f64], errs: &[f64]) -> f64 {
    let n = hs.len();
    (errs[0].ln() - errs[n - 1].ln()) / (hs[0].ln() - hs[n - 1].ln())
}

const DISK_TABLE: [(f64, (f64, f64), (f64, f64), (f64, f64)); 3] = [
    (1e-3, (7.664, 0.001497), (4.938, -4.327), (-1523.0, 2316.0)),
    (1.0, (8.778, 0.7854), (4.355, -6.155), (-3.512, 1.913)),
    (1e3, (10.27, 0.002055), (2.216, -5.864), (-2.944, 0.0005914)),
];

#[test]
fn rotating_disk_reproduces_the_frequency_table() {
    for (delta, w, b, bb) in DISK_TABLE {
        let prob = RotatingDiskProblem::standard(delta).unwrap();
        let mode = rotating_disk_solve(&prob, rotating_disk_seed(&prob).unwrap()).unwrap();
        let u0 = prob.u0bar;
        assert!(rel(mode.omega, C::new(w.0, w.1)) < 5e-4, "delta={delta} omega={}", mode.omega);
        assert!(rel(mode.constants[0] / u0, C::new(b.0, b.1)) < 5e-3, "b={}", mode.constants[0] / u0);
        assert!(rel(mode.constants[1] / u0, C::new(bb.0, bb.1)) < 5e-3, "bbar={}", mode.constants[1] / u0);
        assert!(mode.max_residual() <= 1e-8);
    }
}

#[test]
fn printed_table_frequencies_are_near_roots() {
    for (delta, w, _, _) in DISK_TABLE {
        let prob = RotatingDiskProblem::standard(delta).unwrap();
        let w = C::new(w.0, w.1);
        let mode = rotating_disk_solve(&prob, w).unwrap();
        let scale = |z: C| rotating_disk_residual(&prob, z * 1.01).unwrap().norm();
        // the printed value sits far closer to a zero than a 1% offset does
        assert!(rotating_disk_residual(&prob, w).unwrap().norm() < 0.1 * scale(mode.omega));
    }
}

#[test]
fn rotating_disk_root_pairs_and_seed_stability() {
    let prob = RotatingDiskProblem::standard(1.0).unwrap();
    let mode = rotating_disk_solve(&prob, C::new(8.778, 0.7854)).unwrap();
    let mirror = rotating_disk_solve(&prob, -mode.omega.conj()).unwrap();
    assert!((mirror.omega + mode.omega.conj()).norm() < 1e-9 * mode.omega.norm());
    for f in [0.95, 1.05] {
        for seed in [mode.omega * f, C::new(mode.omega.re * f, mode.omega.im), C::new(mode.omega.re, mode.omega.im * f)] {
            let again = rotating_disk_solve(&prob, seed).unwrap();
            assert!((again.omega - mode.omega).norm() < 1e-9 * mode.omega.norm(), "seed {seed}");
        }
    }
}

#[test]
fn printed_b_denominator_does_not_match_the_table() {
    // J1(λr0)Y1(λr0) − J1(λR)Y1(λr0) in the denominator misses the table by far
    let prob = RotatingDiskProblem::standard(1.0).unwrap();
    let mode = rotating_disk_solve(&prob, C::new(8.778, 0.7854)).unwrap();
    let lam = prob.lambda(mode.omega);
    let (r0, rr) = (prob.r0, prob.r_outer);
    let den = bessel_j(1, lam * r0).unwrap() * bessel_y(1, lam * r0).unwrap()
        - bessel_j(1, lam * rr).unwrap() * bessel_y(1, lam * r0).unwrap();
    let printed = C::new(0.0, 1.0) * mode.omega / den;
    assert!(rel(printed, C::new(4.355, -6.155)) > 0.5);
    assert!(rel(mode.constants[0] / prob.u0bar, C::new(4.355, -6.155)) < 5e-3);
}

#[test]
fn rotating_disk_fields_satisfy_the_pde() {
    let prob = RotatingDiskProblem::standard(1.0).unwrap();
    let mode = rotating_disk_solve(&prob, C::new(8.778, 0.7854)).unwrap();
    let v = |r: f64, t: f64| rotating_disk_velocity(&prob, &mode, r, t).unwrap().re;
    let u = |r: f64, t: f64| rotating_disk_fields(&prob, &mode, r, t).unwrap().u_theta_bar.unwrap();
    let cs2 = prob.mubar / prob.rhobar;
    let hs = [0.02, 0.01, 0.005];
    let mut fluid = Vec::new();
    let mut solid = Vec::new();
    for &h in &hs {
        let mut ef: f64 = 0.0;
        let mut es: f64 = 0.0;
        for &(r, t) in &[(0.7, 0.1), (0.85, 0.33), (0.6, 0.5)] {
            let dt = (v(r, t + h) - v(r, t - h)) / (2.0 * h);
            // ∂r((1/r)∂r(r v)) = v'' + v'/r − v/r²
            let (vm, v0, vp) = (v(r - h, t), v(r, t), v(r + h, t));
            let lap = (vp - 2.0 * v0 + vm) / (h * h) + (vp - vm) / (2.0 * h * r) - v0 / (r * r);
            ef = ef.max((dt - prob.nu * lap).abs());
        }
        for &(r, t) in &[(0.2, 0.1), (0.35, 0.27)] {
            let utt = (u(r, t + h) - 2.0 * u(r, t) + u(r, t - h)) / (h * h);
            let (um, u0, up) = (u(r - h, t), u(r, t), u(r + h, t));
            let lap = (up - 2.0 * u0 + um) / (h * h) + (up - um) / (2.0 * h * r) - u0 / (r * r);
            es = es.max((utt - cs2 * lap).abs());
        }
        fluid.push(ef);
        solid.push(es);
    }
    assert!(slope(&hs, &fluid) >= 1.9, "fluid residuals {fluid:?}");
    assert!(slope(&hs, &solid) >= 1.9, "solid residuals {solid:?}");
    // p(r0) = 0 and no slip at R
    assert_eq!(rotating_disk_fields(&prob, &mode, prob.r0, 0.4).unwrap().pressure, Some(0.0));
    assert!(v(prob.r_outer, 0.4).abs() < 1e-12 * prob.u0bar);
    // dp/dr = ρ v²/r, and the Simpson integral against Gauss-Kronrod
    let p = |r: f64| rotating_disk_fields(&prob, &mode, r, 0.2).unwrap().pressure.unwrap();
    let r = 0.75;
    let d = |h: f64| (p(r + h) - p(r - h)) / (2.0 * h);
    let dp = (4.0 * d(5e-4) - d(1e-3)) / 3.0;
    let expect = v(r, 0.2).powi(2) / r;
    assert!((dp - expect).abs() <= 1e-5 * expect, "{dp} vs {expect}");
    let gk = fsilab::numerics::quad::integrate(|s| C::new(v(s, 0.2).powi(2) / s, 0.0), prob.r0, 0.9, 1e-20).re;
    assert!((p(0.9) - prob.rho * gk).abs() <= 1e-8 * gk.abs());
}

fn tw_mode() -> (TravelingWaveProblem, DispersionMode) {
    let prob = TravelingWaveProblem::standard(3, 1.0).unwrap();
    let mode = traveling_wave_solve(&prob, traveling_wave_seed(&prob).unwrap()).unwrap();
    (prob, mode)
}

#[test]
fn traveling_wave_frequency_and_residuals() {
    let (prob, mode) = tw_mode();
    assert!(rel(mode.omega, C::new(3.491, -1.154)) < 5e-4, "omega = {}", mode.omega);
    assert_eq!(mode.residuals.len(), 6);
    assert!(mode.max_residual() <= 1e-8, "{:?}", mode.residuals);
    // normalization of the real interface displacement
    let f = traveling_wave_fields(&prob, &mode, prob.r0, 0.0, 0.0).unwrap();
    let size = f.u_r_bar.unwrap().hypot(f.u_theta_bar.unwrap());
    assert!((size - prob.u0bar).abs() <= 1e-10 * prob.u0bar);
    // the mirrored member of the pair
    let mirror = traveling_wave_solve(&prob, C::new(-3.491, -1.154)).unwrap();
    assert!((mirror.omega + mode.omega.conj()).norm() < 1e-9 * mode.omega.norm());
    assert!(mirror.max_residual() <= 1e-8);
    // seeds perturbed by 5%
    for f in [0.95, 1.05] {
        let again = traveling_wave_solve(&prob, mode.omega * f).unwrap();
        assert!((again.omega - mode.omega).norm() < 1e-9 * mode.omega.norm());
    }
}

#[test]
fn traveling_wave_det_small_at_printed_frequency() {
    let prob = TravelingWaveProblem::standard(3, 1.0).unwrap();
    let m = traveling_wave_matrix(&prob, C::new(3.491, -1.154)).unwrap();
    let norm = m.norm_inf();
    assert!(m.det().norm() / norm.powi(6) <= 1e-6);
}

/// Stresses rebuilt from finite differences of the displacement and velocity profiles.
#[test]
fn traveling_wave_matrix_matches_condition_by_condition_oracle() {
    let prob = TravelingWaveProblem::standard(3, 1.0).unwrap();
    let w = C::new(3.3, -1.0);
    let m = traveling_wave_matrix(&prob, w).unwrap();
    let i = C::new(0.0, 1.0);
    let nf = prob.n as f64;
    let (lb, mb, mu) = (prob.lambdabar, prob.mubar, prob.mu());
    let h = 1e-5;
    for col in 0..6 {
        let mut e = [C::new(0.0, 0.0); 6];
        e[col] = C::new(1.0, 0.0);
        let dbar = [e[2], e[3], e[4], e[5]];
        let solid = |r: f64| traveling_wave_solid(&prob, w, dbar, r).unwrap();
        let fluid = |r: f64| traveling_wave_fluid(&prob, w, e[0], e[1], r).unwrap();
        let sigma = |r: f64| {
            let (a, b, c) = (solid(r - h), solid(r), solid(r + h));
            let dur = (c.u_r - a.u_r) / (2.0 * h);
            let dut = (c.u_theta - a.u_theta) / (2.0 * h);
            let srr = dur * (lb + 2.0 * mb) + (b.u_r + i * nf * b.u_theta) * (lb / r);
            let srt = (dut - b.u_theta / r + i * nf * b.u_r / r) * mb;
            (srr, srt, b)
        };
        let (srr_r, srt_r, _) = sigma(prob.r_outer);
        let (srr_0, srt_0, s0) = sigma(prob.r0);
        let r0 = prob.r0;
        let (fa, fb, fc) = (fluid(r0 - h), fluid(r0), fluid(r0 + h));
        let fsrr = -fb.p + (fc.v_r - fa.v_r) / (2.0 * h) * (2.0 * mu);
        let fsrt = (i * nf * fb.v_r / r0 + (fc.v_theta - fa.v_theta) / (2.0 * h) - fb.v_theta / r0) * mu;
        let expect = [
            srr_r,
            srt_r,
            fb.v_r + i * w * s0.u_r,
            fb.v_theta + i * w * s0.u_theta,
            fsrr - srr_0,
            fsrt - srt_0,
        ];
        for row in 0..6 {
            let scale = 1.0 + expect[row].norm();
            assert!((m[(row, col)] - expect[row]).norm() <= 1e-6 * scale, "row {row} col {col}: {} vs {}", m[(row, col)], expect[row]);
        }
    }
}

#[test]
fn traveling_wave_fields_symmetry_decay_and_incompressibility() {
    let (prob, mode) = tw_mode();
    let n = prob.n as f64;
    let shift = 2.0 * std::f64::consts::PI / n;
    for &(r, th, t) in &[(0.5, 0.3, 0.1), (1.1, 1.0, 0.25)] {
        let a = traveling_wave_fields(&prob, &mode, r, th, t).unwrap();
        let b = traveling_wave_fields(&prob, &mode, r, th + shift, t).unwrap();
        for (x, y) in [(a.v_r, b.v_r), (a.v_theta, b.v_theta), (a.p, b.p), (a.u_r_bar, b.u_r_bar), (a.u_theta_bar, b.u_theta_bar)] {
            if let (Some(x), Some(y)) = (x, y) {
                assert!((x - y).abs() <= 1e-12 * (1.0 + x.abs()) * prob.u0bar.max(x.abs()));
            }
        }
    }
    // modal decay: the complex amplitude shrinks by |e^{-iωt}|
    let r = 0.8;
    let amp = |t: f64| {
        let re = traveling_wave_fields(&prob, &mode, r, 0.0, t).unwrap().v_r.unwrap();
        let im = traveling_wave_fields(&prob, &mode, r, -std::f64::consts::FRAC_PI_2 / n, t).unwrap().v_r.unwrap();
        re.hypot(im)
    };
    let t = 0.7;
    let expect = (C::new(0.0, -1.0) * mode.omega * t).exp().norm();
    assert!((amp(t) / amp(0.0) - expect).abs() < 1e-10);
    // incompressibility at random interior points, with O(h²) convergence
    let mut rng = rand::rngs::StdRng::seed_from_u64(3);
    let vr = |r: f64, th: f64| traveling_wave_fields(&prob, &mode, r, th, 0.2).unwrap().v_r.unwrap();
    let vt = |r: f64, th: f64| traveling_wave_fields(&prob, &mode, r, th, 0.2).unwrap().v_theta.unwrap();
    let vscale = (0..20).map(|k| vr(0.5, k as f64 * 0.3).abs()).fold(0.0, f64::max);
    let div = |r: f64, th: f64, h: f64| {
        ((r + h) * vr(r + h, th) - (r - h) * vr(r - h, th)) / (2.0 * h * r) + (vt(r, th + h) - vt(r, th - h)) / (2.0 * h * r)
    };
    for _ in 0..50 {
        let r = rng.gen_range(0.2..0.95);
        let th = rng.gen_range(0.0..std::f64::consts::TAU);
        assert!(div(r, th, 1e-4).abs() <= 1e-6 * vscale, "div at ({r}, {th})");
    }
    let hs = [0.04, 0.02, 0.01];
    let errs: Vec<f64> = hs.iter().map(|&h| div(0.6, 0.4, h).abs()).collect();
    assert!(slope(&hs, &errs) >= 1.9, "{errs:?}");
}

#[test]
fn traveling_wave_fields_satisfy_stokes_momentum() {
    let (prob, mode) = tw_mode();
    let (rho, mu) = (prob.rho, prob.mu());
    let f = |r: f64, th: f64, t: f64| traveling_wave_fields(&prob, &mode, r, th, t).unwrap();
    let (r, th, t) = (0.6, 0.4, 0.2);
    let hs = [0.04, 0.02, 0.01];
    let mut errs = Vec::new();
    for &h in &hs {
        let vr = |r: f64, th: f64, t: f64| f(r, th, t).v_r.unwrap();
        let vt = |r: f64, th: f64, t: f64| f(r, th, t).v_theta.unwrap();
        let p = |r: f64, th: f64| f(r, th, t).p.unwrap();
        let dt = (vr(r, th, t + h) - vr(r, th, t - h)) / (2.0 * h);
        let dp = (p(r + h, th) - p(r - h, th)) / (2.0 * h);
        let (m, c, pl) = (vr(r - h, th, t), vr(r, th, t), vr(r + h, th, t));
        let lap = (pl - 2.0 * c + m) / (h * h)
            + (pl - m) / (2.0 * h * r)
            + (vr(r, th + h, t) - 2.0 * c + vr(r, th - h, t)) / (h * h * r * r);
        let dvt = (vt(r, th + h, t) - vt(r, th - h, t)) / (2.0 * h);
        // ρ ∂t v_r + ∂r p = μ (Δ v_r − v_r/r² − (2/r²) ∂θ v_θ)
        let res = rho * dt + dp - mu * (lap - c / (r * r) - 2.0 * dvt / (r * r));
        errs.push(res.abs());
    }
    assert!(slope(&hs, &errs) >= 1.9, "{errs:?}");
}

#[test]
fn piston_stress_matching_and_divergence() {
    let p = PistonParams::standard(1.0).unwrap();
    let h = 1e-5;
    for k in 0..20 {
        let t = 0.1 * k as f64;
        let (ri, _) = piston_interface(&p, t);
        let (_, pressure) = piston_fluid(&p, ri, t).unwrap();
        let u = |r: f64| piston_solid_displacement(&p, r, t);
        let r0 = p.r0;
        let du = (u(r0 + h) - u(r0 - h)) / (2.0 * h);
        let dru = ((r0 + h) * u(r0 + h) - (r0 - h) * u(r0 - h)) / (2.0 * h);
        let sigma = p.lambdabar / r0 * dru + 2.0 * p.mubar * du;
        assert!((-pressure - sigma).abs() <= 1e-8, "t={t}: {}", -pressure - sigma);
        // (1/r) ∂r (r v_r) = 0: r v_r is constant across the annulus
        let rv = |r: f64| r * piston_fluid(&p, r, t).unwrap().0;
        for r in [ri, 0.7, 0.9, p.r_outer] {
            assert!((rv(r) - rv(p.r_outer)).abs() <= 1e-13 * (1.0 + rv(p.r_outer).abs()));
        }
    }
}
