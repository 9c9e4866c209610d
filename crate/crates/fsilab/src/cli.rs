//! Command-line front end: sweeps, simulations, dispersion solves and CSV output.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Write;
use std::path::PathBuf;

use num_complex::Complex64 as C;

use crate::csvfmt::fmt_e;
use crate::mode_coupler::{noisy_lattice, tp_iterate, tp_iteration_ratio, InterfaceHistory, SchemeKind, Simulation};
use crate::oracles::{
    piston_fluid, piston_interface, piston_solid_displacement, rotating_disk_seed, rotating_disk_solve, seed_table,
    traveling_wave_seed, traveling_wave_solve, DispersionMode, ModeProblem, PistonParams, RotatingDiskProblem,
    TravelingWaveProblem,
};
use crate::solid_lattice::{DQuadrature, ModeParams, SolidLattice};
use crate::stability::{
    amp_cfl_check, cauchy_cfl_map, iterations_needed, log_space, stability_map, tp_iteration_optimum, CellStatus,
    RegionMap,
};

pub const USAGE: &str = "\
usage: fsilab <command> [options] [--config FILE] [--threads N]

commands:
  stability-map   --scheme amp|tp|atp --ly GRID --mgrid GRID [--out FILE]
  cfl-map         --lx GRID --ly GRID [--n-omega N] [--out FILE]
  amp-cfl-check   --lx X --ly Y [--meta GRID]
  simulate        --scheme amp|tp|atp|tp-iter --ly Y --mgrid M [--lx X] [--kxh K]
                  [--steps N] [--depth J] [--seed S] [--quadrature bdf|trapezoid]
                  [--omega W --max-iters K --tol T] [--out FILE]
  iterate         --m0 LIST [--omega W] [--kmax K] [--out FILE]
  dispersion      rotating-disk|traveling-wave [--delta D] [--n N] [--seed RE,IM] [--out FILE]
  oracle-check

GRID is lo:hi:count or lo:hi:count:log, or a single number.
Config files hold `key = value` lines; `#` starts a comment. Flags override the file.
";

/// Failure to understand the command line; exit code 2.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    StabilityMap,
    CflMap,
    AmpCflCheck,
    Simulate,
    Iterate,
    Dispersion,
    OracleCheck,
}

impl Command {
    fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "stability-map" => Command::StabilityMap,
            "cfl-map" => Command::CflMap,
            "amp-cfl-check" => Command::AmpCflCheck,
            "simulate" => Command::Simulate,
            "iterate" => Command::Iterate,
            "dispersion" => Command::Dispersion,
            "oracle-check" => Command::OracleCheck,
            _ => return None,
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            Command::StabilityMap => "stability-map",
            Command::CflMap => "cfl-map",
            Command::AmpCflCheck => "amp-cfl-check",
            Command::Simulate => "simulate",
            Command::Iterate => "iterate",
            Command::Dispersion => "dispersion",
            Command::OracleCheck => "oracle-check",
        }
    }

    fn keys(&self) -> &'static [&'static str] {
        match self {
            Command::StabilityMap => &["scheme", "ly", "mgrid"],
            Command::CflMap => &["lx", "ly", "n-omega"],
            Command::AmpCflCheck => &["lx", "ly", "meta"],
            Command::Simulate => &[
                "scheme", "lx", "ly", "mgrid", "kxh", "steps", "depth", "seed", "quadrature", "omega", "max-iters", "tol",
            ],
            Command::Iterate => &["m0", "omega", "kmax"],
            Command::Dispersion => &["problem", "delta", "n", "seed"],
            Command::OracleCheck => &[],
        }
    }
}

/// Effective configuration of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub values: BTreeMap<String, String>,
    pub out: Option<PathBuf>,
    pub threads: Option<usize>,
}

impl RunConfig {
    fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(|s| s.as_str())
    }

    fn required(&self, key: &str) -> Result<&str, UsageError> {
        self.get(key).ok_or_else(|| UsageError(format!("missing required key '{key}' for {}", self.command.name())))
    }

    fn number(&self, key: &str, default: Option<f64>) -> Result<f64, UsageError> {
        match self.get(key) {
            Some(s) => parse_number(key, s),
            None => default.ok_or_else(|| UsageError(format!("missing required key '{key}' for {}", self.command.name()))),
        }
    }

    fn count(&self, key: &str, default: usize) -> Result<usize, UsageError> {
        match self.get(key) {
            Some(s) => s.trim().parse().map_err(|_| UsageError(format!("key '{key}': '{s}' is not a non-negative integer"))),
            None => Ok(default),
        }
    }

    fn grid(&self, key: &str, default: Option<&str>) -> Result<Vec<f64>, UsageError> {
        match self.get(key).or(default) {
            Some(s) => parse_grid(key, s),
            None => Err(UsageError(format!("missing required key '{key}' for {}", self.command.name()))),
        }
    }

    /// `# config: ...` echo; the worker count is left out so output does not depend on it.
    pub fn echo(&self) -> String {
        let mut s = format!("# config: command={}", self.command.name());
        for (k, v) in &self.values {
            let _ = write!(s, " {k}={v}");
        }
        s
    }
}

fn parse_number(key: &str, s: &str) -> Result<f64, UsageError> {
    match s.trim().parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(UsageError(format!("key '{key}': '{s}' is not a finite number"))),
    }
}

/// `lo:hi:count[:log]` or a single number.
pub fn parse_grid(key: &str, s: &str) -> Result<Vec<f64>, UsageError> {
    let parts: Vec<&str> = s.trim().split(':').collect();
    let bad = |why: &str| UsageError(format!("key '{key}': bad grid '{s}' ({why})"));
    match parts.len() {
        1 => Ok(vec![parse_number(key, parts[0])?]),
        3 | 4 => {
            let lo = parse_number(key, parts[0])?;
            let hi = parse_number(key, parts[1])?;
            let n: usize = parts[2].trim().parse().map_err(|_| bad("count is not an integer"))?;
            if n == 0 {
                return Err(bad("count must be positive"));
            }
            if n > 1 && !(hi > lo) {
                return Err(bad("need lo < hi"));
            }
            if parts.len() == 4 {
                if parts[3].trim() != "log" {
                    return Err(bad("the fourth field may only be 'log'"));
                }
                if !(lo > 0.0) {
                    return Err(bad("log grids need lo > 0"));
                }
                return Ok(log_space(lo, hi, n));
            }
            if n == 1 {
                return Ok(vec![lo]);
            }
            Ok((0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect())
        }
        _ => Err(bad("expected lo:hi:count[:log]")),
    }
}

fn parse_file(text: &str) -> Result<Vec<(String, String)>, UsageError> {
    let mut out = Vec::new();
    for (no, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| UsageError(format!("config line {}: expected key = value", no + 1)))?;
        out.push((k.trim().to_string(), v.trim().to_string()));
    }
    Ok(out)
}

/// Parses argv (without the program name). `read` loads a config file.
pub fn parse_config(args: &[String], read: &dyn Fn(&str) -> std::io::Result<String>) -> Result<RunConfig, UsageError> {
    let first = args.first().ok_or_else(|| UsageError("no command given".into()))?;
    let command = Command::parse(first).ok_or_else(|| UsageError(format!("unknown command '{first}'")))?;
    let mut flags: Vec<(String, String)> = Vec::new();
    let mut file: Option<String> = None;
    let mut i = 1;
    while i < args.len() {
        let a = &args[i];
        if let Some(key) = a.strip_prefix("--") {
            let (key, value) = match key.split_once('=') {
                Some((k, v)) => (k.to_string(), v.to_string()),
                None => {
                    let v = args.get(i + 1).ok_or_else(|| UsageError(format!("flag '--{key}' needs a value")))?;
                    i += 1;
                    (key.to_string(), v.clone())
                }
            };
            if key == "config" {
                file = Some(value);
            } else {
                flags.push((key, value));
            }
        } else if command == Command::Dispersion && !flags.iter().any(|(k, _)| k == "problem") {
            flags.push(("problem".into(), a.clone()));
        } else {
            return Err(UsageError(format!("unexpected argument '{a}'")));
        }
        i += 1;
    }
    let mut merged: Vec<(String, String)> = Vec::new();
    if let Some(path) = file {
        let text = read(&path).map_err(|e| UsageError(format!("cannot read config file '{path}': {e}")))?;
        merged.extend(parse_file(&text)?);
    }
    merged.extend(flags);
    let mut values = BTreeMap::new();
    let mut out = None;
    let mut threads = None;
    for (k, v) in merged {
        match k.as_str() {
            "out" => out = Some(PathBuf::from(v)),
            "threads" => {
                let n: usize = v.trim().parse().map_err(|_| UsageError(format!("key 'threads': '{v}' is not a positive integer")))?;
                if n == 0 {
                    return Err(UsageError("key 'threads' must be at least 1".into()));
                }
                threads = Some(n);
            }
            _ if command.keys().contains(&k.as_str()) => {
                values.insert(k, v);
            }
            _ => return Err(UsageError(format!("unknown key '{k}' for {}", command.name()))),
        }
    }
    let cfg = RunConfig { command, values, out, threads };
    validate(&cfg)?;
    Ok(cfg)
}

fn scheme_of(cfg: &RunConfig) -> Result<SchemeKind, UsageError> {
    let name = cfg.required("scheme")?;
    let scheme = match name {
        "amp" => SchemeKind::amp(),
        "tp" => SchemeKind::Tp,
        "atp" => SchemeKind::Atp,
        "tp-iter" => SchemeKind::TpIterated {
            omega: cfg.number("omega", None)?,
            max_iters: cfg.count("max-iters", 50)?,
            tol: cfg.number("tol", Some(1e-12))?,
        },
        other => return Err(UsageError(format!("key 'scheme': unknown scheme '{other}'"))),
    };
    scheme.validate().map_err(|e| UsageError(format!("key 'scheme': {e}")))?;
    Ok(scheme)
}

fn validate(cfg: &RunConfig) -> Result<(), UsageError> {
    match cfg.command {
        Command::StabilityMap => {
            let s = scheme_of(cfg)?;
            if matches!(s, SchemeKind::TpIterated { .. }) {
                return Err(UsageError("key 'scheme': stability-map supports amp, tp and atp".into()));
            }
            cfg.grid("ly", None)?;
            cfg.grid("mgrid", None)?;
        }
        Command::CflMap => {
            cfg.grid("lx", None)?;
            cfg.grid("ly", None)?;
        }
        Command::AmpCflCheck => {
            cfg.number("lx", None)?;
            cfg.number("ly", None)?;
            cfg.grid("meta", Some(DEFAULT_META))?;
        }
        Command::Simulate => {
            let s = scheme_of(cfg)?;
            if !matches!(s, SchemeKind::TpIterated { .. }) {
                for k in ["omega", "max-iters", "tol"] {
                    if cfg.get(k).is_some() {
                        return Err(UsageError(format!("key '{k}' requires scheme tp-iter, not {}", s.name())));
                    }
                }
            }
            cfg.number("ly", None)?;
            cfg.number("mgrid", None)?;
            if let Some(q) = cfg.get("quadrature") {
                if q != "bdf" && q != "trapezoid" {
                    return Err(UsageError(format!("key 'quadrature': unknown rule '{q}'")));
                }
            }
        }
        Command::Iterate => {
            m0_list(cfg)?;
        }
        Command::Dispersion => {
            let p = cfg.required("problem")?;
            if p != "rotating-disk" && p != "traveling-wave" {
                return Err(UsageError(format!("unknown dispersion problem '{p}'")));
            }
            if let Some(s) = cfg.get("seed") {
                parse_seed(s)?;
            }
        }
        Command::OracleCheck => {}
    }
    Ok(())
}

const DEFAULT_META: &str = "1e-6:1e6:25:log";

fn m0_list(cfg: &RunConfig) -> Result<Vec<f64>, UsageError> {
    let s = cfg.required("m0")?;
    let v: Vec<f64> = if s.contains(':') {
        parse_grid("m0", s)?
    } else {
        s.split(',').map(|x| parse_number("m0", x)).collect::<Result<_, _>>()?
    };
    if v.iter().any(|m| !(*m >= 0.0)) {
        return Err(UsageError("key 'm0': values must be non-negative".into()));
    }
    Ok(v)
}

fn parse_seed(s: &str) -> Result<C, UsageError> {
    let (re, im) = s.split_once(',').ok_or_else(|| UsageError(format!("key 'seed': expected RE,IM, got '{s}'")))?;
    Ok(C::new(parse_number("seed", re)?, parse_number("seed", im)?))
}

/// Result of one command: CSV text (if any), summary lines and the exit code.
struct Outcome {
    csv: Option<String>,
    summary: Vec<String>,
    code: i32,
}

fn region_csv(cfg: &RunConfig, map: &RegionMap, with_status: bool) -> String {
    let mut s = cfg.echo();
    s.push('\n');
    if with_status {
        s.push_str(&format!("{},{},max_abs_A,nroots,status\n", map.axis1, map.axis2));
    } else {
        s.push_str(&format!("{},{},max_abs_A\n", map.axis1, map.axis2));
    }
    for (i, row) in map.cells.iter().enumerate() {
        for (j, cell) in row.iter().enumerate() {
            let _ = write!(s, "{},{},{}", fmt_e(map.grid1[i]), fmt_e(map.grid2[j]), fmt_e(cell.max_abs_a));
            if with_status {
                let _ = write!(s, ",{},{}", cell.nroots, cell.status.as_str());
            }
            s.push('\n');
        }
    }
    s
}

fn region_summary(map: &RegionMap) -> String {
    let cells = map.grid1.len() * map.grid2.len();
    let unstable = map.cells.iter().flatten().filter(|c| c.status == CellStatus::Unstable).count();
    format!(
        "cells computed: {cells}, max|A| = {:.6}, unstable: {unstable}, failures: {}",
        map.max_value(),
        map.failures()
    )
}

fn run_stability_map(cfg: &RunConfig) -> Result<Outcome, String> {
    let scheme = scheme_of(cfg).map_err(|e| e.0)?;
    let ly = cfg.grid("ly", None).map_err(|e| e.0)?;
    let mg = cfg.grid("mgrid", None).map_err(|e| e.0)?;
    let map = stability_map(&scheme, &ly, &mg).map_err(|e| e.to_string())?;
    let code = if map.failures() > 0 { 1 } else { 0 };
    Ok(Outcome { csv: Some(region_csv(cfg, &map, true)), summary: vec![region_summary(&map)], code })
}

fn run_cfl_map(cfg: &RunConfig) -> Result<Outcome, String> {
    let lx = cfg.grid("lx", None).map_err(|e| e.0)?;
    let ly = cfg.grid("ly", None).map_err(|e| e.0)?;
    let n = cfg.count("n-omega", 64).map_err(|e| e.0)?.max(1);
    let map = cauchy_cfl_map(&lx, &ly, n).map_err(|e| e.to_string())?;
    let code = if map.failures() > 0 { 1 } else { 0 };
    Ok(Outcome { csv: Some(region_csv(cfg, &map, false)), summary: vec![region_summary(&map)], code })
}

fn run_amp_cfl_check(cfg: &RunConfig) -> Result<Outcome, String> {
    let lx = cfg.number("lx", None).map_err(|e| e.0)?;
    let ly = cfg.number("ly", None).map_err(|e| e.0)?;
    let meta = cfg.grid("meta", Some(DEFAULT_META)).map_err(|e| e.0)?;
    match amp_cfl_check(lx, ly, &meta) {
        Ok(v) => {
            let stable = v <= 1.0 + 1e-9;
            let verdict = if stable { "stable" } else { "unstable" };
            Ok(Outcome { csv: None, summary: vec![format!("max|A| = {v:.6} ({verdict})")], code: 0 })
        }
        Err(e) => Ok(Outcome { csv: None, summary: vec![format!("root search failed: {e}")], code: 1 }),
    }
}

fn run_simulate(cfg: &RunConfig) -> Result<Outcome, String> {
    let e = |u: UsageError| u.0;
    let scheme = scheme_of(cfg).map_err(e)?;
    let lx = cfg.number("lx", Some(0.0)).map_err(e)?;
    let ly = cfg.number("ly", None).map_err(e)?;
    let mg = cfg.number("mgrid", None).map_err(e)?;
    let kxh = cfg.number("kxh", Some(1.0)).map_err(e)?;
    let steps = cfg.count("steps", 400).map_err(e)?;
    let depth = cfg.count("depth", (ly * steps as f64).ceil() as usize + 32).map_err(e)?;
    let seed = cfg.count("seed", 1).map_err(e)? as u64;
    let params = ModeParams::from_dimensionless(lx, ly, mg, kxh).map_err(|e| e.to_string())?;
    let mut sim = Simulation::new(scheme, params, noisy_lattice(depth, 16, seed)).map_err(|e| e.to_string())?;
    if cfg.get("quadrature") == Some("trapezoid") {
        sim.quadrature = DQuadrature::Trapezoid;
    }
    let report = sim.advance(steps).map_err(|e| e.to_string())?;
    let mut s = cfg.echo();
    s.push_str("\nstep,log_norm,v_I_re,v_I_im,p_I_re,p_I_im\n");
    for r in &report.records {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{}",
            r.step,
            fmt_e(r.log_norm),
            fmt_e(r.v_i.re),
            fmt_e(r.v_i.im),
            fmt_e(r.p_i.re),
            fmt_e(r.p_i.im)
        );
    }
    let mut summary = vec![format!(
        "steps: {}, growth per step = {:.6}, fit residual = {:.3e}{}",
        report.records.len() - 1,
        report.growth,
        report.residual,
        if report.unbounded { " (unbounded)" } else { "" }
    )];
    if report.iteration_failures > 0 {
        summary.push(format!("TP sub-iteration failed to converge on {} steps", report.iteration_failures));
    }
    let code = if report.iteration_failures > 0 { 1 } else { 0 };
    Ok(Outcome { csv: Some(s), summary, code })
}

fn run_iterate(cfg: &RunConfig) -> Result<Outcome, String> {
    let m0s = m0_list(cfg).map_err(|e| e.0)?;
    let kmax = cfg.count("kmax", 20).map_err(|e| e.0)?.max(1);
    let mut s = cfg.echo();
    s.push_str("\nM0,omega,k,ratio\n");
    let mut summary = Vec::new();
    for &m0 in &m0s {
        let (w_opt, a_opt) = tp_iteration_optimum(m0).map_err(|e| e.to_string())?;
        let omega = match cfg.get("omega") {
            Some(v) => parse_number("omega", v).map_err(|e| e.0)?,
            None => w_opt,
        };
        // a 1D lattice whose Mη equals M0
        let ly = 0.5;
        let params = ModeParams::from_dimensionless(0.0, ly, (m0 * ly).max(1e-300), 1.0).map_err(|e| e.to_string())?;
        let mut lat = SolidLattice::zeros(4);
        lat.a[1] = C::new(0.3, -0.1);
        lat.b[1] = C::new(1.0, 0.5);
        let hist = InterfaceHistory { v: [C::new(0.2, 0.1), C::new(0.1, 0.0)], p: [C::new(0.0, 0.0); 2], v_f: C::new(0.2, 0.1), level: 0 };
        let it = tp_iterate(&lat, &hist, &params, omega, kmax, 1e-300).map_err(|e| e.to_string())?;
        let errs: Vec<C> = it.iterates.iter().map(|v| v - it.v_star).collect();
        for k in 1..errs.len() {
            if errs[k - 1].norm() == 0.0 {
                break;
            }
            let _ = writeln!(s, "{},{},{},{}", fmt_e(m0), fmt_e(omega), k, fmt_e((errs[k] / errs[k - 1]).re));
        }
        let needed = iterations_needed(m0, 1e-6).map(|k| k.to_string()).unwrap_or_else(|_| "-".into());
        summary.push(format!(
            "M0 = {m0}: omega = {omega:.6}, predicted ratio = {:.6}, optimum omega* = {w_opt:.6} (ratio {a_opt:.6}), iterations for 1e-6 = {needed}",
            tp_iteration_ratio(omega, m0)
        ));
    }
    Ok(Outcome { csv: Some(s), summary, code: 0 })
}

fn run_dispersion(cfg: &RunConfig) -> Result<Outcome, String> {
    let delta = cfg.number("delta", Some(1.0)).map_err(|e| e.0)?;
    let seed = cfg.get("seed").map(parse_seed).transpose().map_err(|e| e.0)?;
    let solved: crate::Result<DispersionMode> = match cfg.required("problem").map_err(|e| e.0)? {
        "rotating-disk" => RotatingDiskProblem::standard(delta).and_then(|p| {
            let s = match seed {
                Some(s) => s,
                None => rotating_disk_seed(&p)?,
            };
            rotating_disk_solve(&p, s)
        }),
        _ => {
            let n = cfg.count("n", 3).map_err(|e| e.0)? as u32;
            TravelingWaveProblem::standard(n, delta).and_then(|p| {
                let s = match seed {
                    Some(s) => s,
                    None => traveling_wave_seed(&p)?,
                };
                traveling_wave_solve(&p, s)
            })
        }
    };
    match solved {
        Ok(mode) => {
            let csv = format!("{}\n{}\n{}\n", cfg.echo(), mode.csv_header(), mode.csv_row());
            let summary = format!(
                "{} n={} delta={}: omega = {:.10} {:+.10}i, max residual {:.2e}",
                mode.problem.id(),
                mode.n,
                delta,
                mode.omega.re,
                mode.omega.im,
                mode.max_residual()
            );
            Ok(Outcome { csv: Some(csv), summary: vec![summary], code: 0 })
        }
        Err(e) => Ok(Outcome { csv: None, summary: vec![format!("dispersion solve failed: {e}")], code: 1 }),
    }
}

fn run_oracle_check() -> Result<Outcome, String> {
    let mut lines = Vec::new();
    let mut ok_all = true;
    let mut line = |name: &str, ok: bool, detail: String| {
        ok_all &= ok;
        lines.push(format!("{} {name}: {detail}", if ok { "PASS" } else { "FAIL" }));
    };
    for (delta, w) in [(1e-3, C::new(7.664, 0.001497)), (1.0, C::new(8.778, 0.7854)), (1e3, C::new(10.27, 0.002055))] {
        let res = RotatingDiskProblem::standard(delta).and_then(|p| rotating_disk_solve(&p, seed_table(ModeProblem::RotatingDisk, delta, 1).unwrap_or(w)));
        match res {
            Ok(m) => {
                let rel = (m.omega - w).norm() / w.norm();
                line(&format!("rotating disk delta={delta}"), rel < 5e-4, format!("omega = {:.6} {:+.6}i (rel {rel:.1e})", m.omega.re, m.omega.im));
            }
            Err(e) => line(&format!("rotating disk delta={delta}"), false, e.to_string()),
        }
    }
    let w = C::new(3.491, -1.154);
    match TravelingWaveProblem::standard(3, 1.0).and_then(|p| traveling_wave_solve(&p, w)) {
        Ok(m) => {
            let rel = (m.omega - w).norm() / w.norm();
            let ok = rel < 5e-4 && m.max_residual() <= 1e-8;
            line("traveling wave n=3", ok, format!("omega = {:.6} {:+.6}i, residual {:.1e}", m.omega.re, m.omega.im, m.max_residual()));
        }
        Err(e) => line("traveling wave n=3", false, e.to_string()),
    }
    match PistonParams::standard(1.0) {
        Ok(p) => {
            let h = 1e-5;
            let worst = (0..20)
                .map(|k| {
                    let t = 0.1 * k as f64;
                    let (ri, _) = piston_interface(&p, t);
                    let pressure = piston_fluid(&p, ri, t).map(|v| v.1).unwrap_or(f64::NAN);
                    let u = |r: f64| piston_solid_displacement(&p, r, t);
                    let r0 = p.r0;
                    let du = (u(r0 + h) - u(r0 - h)) / (2.0 * h);
                    let dru = ((r0 + h) * u(r0 + h) - (r0 - h) * u(r0 - h)) / (2.0 * h);
                    (-pressure - (p.lambdabar / r0 * dru + 2.0 * p.mubar * du)).abs()
                })
                .fold(0.0, f64::max);
            line("radial piston stress matching", worst <= 1e-8, format!("max residual {worst:.1e}"));
        }
        Err(e) => line("radial piston stress matching", false, e.to_string()),
    }
    Ok(Outcome { csv: None, summary: lines, code: if ok_all { 0 } else { 1 } })
}

/// Runs the CLI; returns the process exit code.
pub fn run(args: &[String], stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32 {
    if args.is_empty() || args[0] == "-h" || args[0] == "--help" || args[0] == "help" {
        let _ = write!(stderr, "{USAGE}");
        return if args.is_empty() { 2 } else { 0 };
    }
    let cfg = match parse_config(args, &|p| std::fs::read_to_string(p)) {
        Ok(c) => c,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}\n\n{USAGE}");
            return 2;
        }
    };
    run_config(&cfg, stdout, stderr)
}

/// Executes a parsed configuration.
pub fn run_config(cfg: &RunConfig, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32 {
    let work = || match cfg.command {
        Command::StabilityMap => run_stability_map(cfg),
        Command::CflMap => run_cfl_map(cfg),
        Command::AmpCflCheck => run_amp_cfl_check(cfg),
        Command::Simulate => run_simulate(cfg),
        Command::Iterate => run_iterate(cfg),
        Command::Dispersion => run_dispersion(cfg),
        Command::OracleCheck => run_oracle_check(),
    };
    let result = match cfg.threads {
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(work),
            Err(e) => Err(format!("cannot start {n} worker threads: {e}")),
        },
        None => work(),
    };
    let outcome = match result {
        Ok(o) => o,
        Err(msg) => {
            let _ = writeln!(stderr, "error: {msg}");
            return 1;
        }
    };
    // with the CSV on stdout, keep the summary on stderr
    let mut code = outcome.code;
    if let Some(csv) = &outcome.csv {
        match &cfg.out {
            Some(path) => {
                if let Err(e) = std::fs::write(path, csv) {
                    let _ = writeln!(stderr, "error: cannot write '{}': {e}", path.display());
                    return 1;
                }
                let _ = writeln!(stdout, "wrote {}", path.display());
            }
            None => {
                let _ = stdout.write_all(csv.as_bytes());
            }
        }
    }
    let sink: &mut dyn Write = if outcome.csv.is_some() && cfg.out.is_none() { stderr } else { stdout };
    for line in &outcome.summary {
        if writeln!(sink, "{line}").is_err() {
            code = code.max(1);
        }
    }
    code
}
