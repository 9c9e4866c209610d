//! Python bindings: mode parameters, the normal-mode analyzer, the time-domain
//! simulator and the exact-solution oracles.

use fsilab::mode_coupler::{noisy_lattice, SchemeKind, Simulation};
use fsilab::oracles::{
    rotating_disk_seed, rotating_disk_solve, traveling_wave_seed, traveling_wave_solve, DispersionMode, RotatingDiskProblem,
    TravelingWaveProblem,
};
use fsilab::solid_lattice::ModeParams;
use fsilab::{stability, Complex64};
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

fn err(e: fsilab::Error) -> PyErr {
    match e {
        fsilab::Error::Domain(_) | fsilab::Error::Degenerate(_) => PyValueError::new_err(e.to_string()),
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

fn scheme(name: &str, omega: Option<f64>) -> PyResult<SchemeKind> {
    let s = match name {
        "amp" => SchemeKind::amp(),
        "tp" => SchemeKind::Tp,
        "atp" => SchemeKind::Atp,
        "tp-iter" => SchemeKind::TpIterated {
            omega: omega.ok_or_else(|| PyValueError::new_err("tp-iter needs omega"))?,
            max_iters: 50,
            tol: 1e-12,
        },
        other => return Err(PyValueError::new_err(format!("unknown scheme '{other}'"))),
    };
    s.validate().map_err(err)?;
    Ok(s)
}

/// Parameters of one Fourier mode of the coupled problem.
#[pyclass(name = "ModeParams", from_py_object)]
#[derive(Clone, Copy)]
struct PyModeParams {
    inner: ModeParams,
}

#[pymethods]
impl PyModeParams {
    #[new]
    #[pyo3(signature = (kx, h, rho, nu, rhobar, cpbar, dy, dt))]
    #[allow(clippy::too_many_arguments)]
    fn new(kx: f64, h: f64, rho: f64, nu: f64, rhobar: f64, cpbar: f64, dy: f64, dt: f64) -> PyResult<Self> {
        Ok(Self { inner: ModeParams::new(kx, h, rho, nu, rhobar, cpbar, dy, dt).map_err(err)? })
    }

    /// Unit solid realizing (λx, λy, 𝓜); `kx_h` sets η when λx > 0.
    #[staticmethod]
    #[pyo3(signature = (lambda_x, lambda_y, mgrid, kx_h=1.0))]
    fn from_dimensionless(lambda_x: f64, lambda_y: f64, mgrid: f64, kx_h: f64) -> PyResult<Self> {
        Ok(Self { inner: ModeParams::from_dimensionless(lambda_x, lambda_y, mgrid, kx_h).map_err(err)? })
    }

    #[getter]
    fn lambda_x(&self) -> f64 {
        self.inner.lambda_x()
    }
    #[getter]
    fn lambda_y(&self) -> f64 {
        self.inner.lambda_y()
    }
    #[getter]
    fn mgrid(&self) -> f64 {
        self.inner.mgrid()
    }
    #[getter]
    fn m_eta(&self) -> f64 {
        self.inner.m_eta()
    }
    #[getter]
    fn zp(&self) -> f64 {
        self.inner.zp()
    }
    fn within_cfl(&self) -> bool {
        self.inner.within_cfl()
    }

    fn __repr__(&self) -> String {
        let p = &self.inner;
        format!("ModeParams(kx={}, h={}, rho={}, nu={}, rhobar={}, cpbar={}, dy={}, dt={})", p.kx, p.h, p.rho, p.nu, p.rhobar, p.cpbar, p.dy, p.dt)
    }
}

/// Certified normal-mode root with |A| > 1.
#[pyclass(name = "Root", frozen, get_all)]
struct PyRoot {
    a: Complex64,
    phi1: Complex64,
    phi2: Complex64,
    residual: f64,
}

#[pymethods]
impl PyRoot {
    fn __repr__(&self) -> String {
        format!("Root(a={}, |a|={:.6}, residual={:.1e})", self.a, self.a.norm(), self.residual)
    }
}

/// All certified unstable roots for one (λx, λy, Mη) cell.
#[pyfunction]
#[pyo3(signature = (scheme_name, lambda_x, lambda_y, m_eta, omega=None))]
fn find_unstable_roots(scheme_name: &str, lambda_x: f64, lambda_y: f64, m_eta: f64, omega: Option<f64>) -> PyResult<Vec<PyRoot>> {
    let s = scheme(scheme_name, omega)?;
    let roots = stability::find_unstable_roots(&s, lambda_x, lambda_y, m_eta).map_err(err)?;
    Ok(roots.into_iter().map(|r| PyRoot { a: r.a, phi1: r.phi1, phi2: r.phi2, residual: r.residual }).collect())
}

/// max|A| over a (λy, 𝓜) grid for λx = 0. Failed cells come back as NaN.
#[pyfunction]
fn stability_map(scheme_name: &str, lambda_y: Vec<f64>, mgrid: Vec<f64>) -> PyResult<Vec<Vec<f64>>> {
    let s = scheme(scheme_name, None)?;
    let map = stability::stability_map(&s, &lambda_y, &mgrid).map_err(err)?;
    Ok(map
        .cells
        .iter()
        .map(|row| row.iter().map(|c| if c.status == stability::CellStatus::Failed { f64::NAN } else { c.max_abs_a }).collect())
        .collect())
}

/// (𝓜*, last stable 𝓜, first unstable 𝓜) along fixed λy.
#[pyfunction]
#[pyo3(signature = (scheme_name, lambda_y, lo=1e-6, hi=1e7, log_tol=0.00995))]
fn stability_boundary(scheme_name: &str, lambda_y: f64, lo: f64, hi: f64, log_tol: f64) -> PyResult<(f64, f64, f64)> {
    let s = scheme(scheme_name, None)?;
    let b = stability::stability_boundary(&s, lambda_y, lo, hi, log_tol).map_err(err)?;
    Ok((b.mgrid, b.stable, b.unstable))
}

#[pyfunction]
fn amp_cfl_check(lambda_x: f64, lambda_y: f64, m_eta: Vec<f64>) -> PyResult<f64> {
    stability::amp_cfl_check(lambda_x, lambda_y, &m_eta).map_err(err)
}

#[pyfunction]
#[pyo3(signature = (lambda_x, lambda_y, n_omega=256))]
fn cauchy_amplification(lambda_x: f64, lambda_y: f64, n_omega: usize) -> PyResult<f64> {
    stability::cauchy_amplification(lambda_x, lambda_y, n_omega).map_err(err)
}

/// (ω*, A*) for the under-relaxed TP iteration.
#[pyfunction]
fn tp_iteration_optimum(m0: f64) -> PyResult<(f64, f64)> {
    stability::tp_iteration_optimum(m0).map_err(err)
}

#[pyfunction]
fn iterations_needed(m0: f64, tau: f64) -> PyResult<u64> {
    stability::iterations_needed(m0, tau).map_err(err)
}

/// z_f of the viscous half-space for the given wavenumber and time step.
#[pyfunction]
fn fluid_impedance_variational(k: f64, mu: f64, rho: f64, dt: f64, zbar: f64) -> PyResult<f64> {
    Ok(stability::fluid_impedance_variational(k, mu, rho, dt, zbar).map_err(err)?.z_f)
}

/// Runs the time-domain model from seeded noise. Returns (growth per step, fit residual, ln‖·‖ per step).
#[pyfunction]
#[pyo3(signature = (scheme_name, params, steps=400, seed=1, omega=None))]
fn simulate(scheme_name: &str, params: PyModeParams, steps: usize, seed: u64, omega: Option<f64>) -> PyResult<(f64, f64, Vec<f64>)> {
    let s = scheme(scheme_name, omega)?;
    let depth = (params.inner.lambda_y() * steps as f64).ceil() as usize + 32;
    let mut sim = Simulation::new(s, params.inner, noisy_lattice(depth, 16, seed)).map_err(err)?;
    let report = sim.advance(steps).map_err(err)?;
    Ok((report.growth, report.residual, report.records.iter().map(|r| r.log_norm).collect()))
}

fn mode_tuple(m: DispersionMode) -> (Complex64, Vec<Complex64>, f64) {
    let res = m.max_residual();
    (m.omega, m.constants, res)
}

/// Rotating-disk eigenfrequency: (ω, [b, b̄], max residual).
#[pyfunction]
#[pyo3(signature = (delta=1.0))]
fn rotating_disk(delta: f64) -> PyResult<(Complex64, Vec<Complex64>, f64)> {
    let prob = RotatingDiskProblem::standard(delta).map_err(err)?;
    let seed = rotating_disk_seed(&prob).map_err(err)?;
    Ok(mode_tuple(rotating_disk_solve(&prob, seed).map_err(err)?))
}

/// Traveling-wave eigenfrequency: (ω, constants, max residual).
#[pyfunction]
#[pyo3(signature = (n=3, delta=1.0))]
fn traveling_wave(n: u32, delta: f64) -> PyResult<(Complex64, Vec<Complex64>, f64)> {
    let prob = TravelingWaveProblem::standard(n, delta).map_err(err)?;
    let seed = traveling_wave_seed(&prob).map_err(err)?;
    Ok(mode_tuple(traveling_wave_solve(&prob, seed).map_err(err)?))
}

#[pymodule]
#[pyo3(name = "fsilab")]
fn fsilab_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyModeParams>()?;
    m.add_class::<PyRoot>()?;
    m.add_function(wrap_pyfunction!(find_unstable_roots, m)?)?;
    m.add_function(wrap_pyfunction!(stability_map, m)?)?;
    m.add_function(wrap_pyfunction!(stability_boundary, m)?)?;
    m.add_function(wrap_pyfunction!(amp_cfl_check, m)?)?;
    m.add_function(wrap_pyfunction!(cauchy_amplification, m)?)?;
    m.add_function(wrap_pyfunction!(tp_iteration_optimum, m)?)?;
    m.add_function(wrap_pyfunction!(iterations_needed, m)?)?;
    m.add_function(wrap_pyfunction!(fluid_impedance_variational, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(rotating_disk, m)?)?;
    m.add_function(wrap_pyfunction!(traveling_wave, m)?)?;
    Ok(())
}
