//! Scenario orchestration: runs a validated configuration, writes the
//! artifacts and a JSON manifest listing each of them with its SHA-256.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use memkin_core::oracles::{oracle_laplace, oracle_memory_kernel};
use memkin_core::symmat::{relative_frobenius_error, relative_frobenius_error_complex};
use memkin_core::{cutoff, laplace_kernel, memory_kernel, Complex64};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::{Scenario, SimulationConfig};
use crate::diagnostics::{convergence_study, default_velocity_samples, kernel_time_integral_check, stationarity_study, time_averaged_v_norm};
use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::io::{encode_vkf1, moments_table, NumericTable};
use crate::landau::{run_landau, LandauOperator};
use crate::memory::{run_memory, HistoryMode};
use crate::perturbation::perturbed_maxwellian;
use crate::spectral::SpectralEngine;
use crate::trajectory::{RunInfo, Trajectory};

pub const MANIFEST_FILE: &str = "manifest.json";

/// Largest relative error accepted by the kernel-check scenario.
pub const KERNEL_CHECK_TOL: f64 = 1e-6;
pub const KERNEL_INTEGRAL_TOL: f64 = 1e-8;
pub const CONVERGENCE_RATIO: f64 = 1.3;
pub const L_DOUBLING_TOL: f64 = 0.05;
pub const STATIONARITY_ORDER: f64 = 0.8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Success,
    CheckFailed,
    Aborted,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Success => 0,
            Status::Aborted => 3,
            Status::CheckFailed => 4,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    /// `"<="` or `">="`.
    pub relation: &'static str,
    pub bound: f64,
    pub passed: bool,
}

impl Check {
    pub fn at_most(name: &str, value: f64, bound: f64) -> Self {
        Self { name: name.into(), value, relation: "<=", bound, passed: value <= bound }
    }

    pub fn at_least(name: &str, value: f64, bound: f64) -> Self {
        Self { name: name.into(), value, relation: ">=", bound, passed: value >= bound }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Artifact {
    pub file: String,
    pub sha256: String,
    pub bytes: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunRecord {
    pub label: String,
    #[serde(flatten)]
    pub info: RunInfo,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Phase {
    pub name: String,
    pub seconds: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunManifest {
    pub code_version: &'static str,
    pub scenario: Scenario,
    pub threads: usize,
    pub status: Status,
    pub abort_reason: Option<String>,
    pub config: SimulationConfig,
    pub runs: Vec<RunRecord>,
    pub phases: Vec<Phase>,
    pub values: BTreeMap<String, f64>,
    pub checks: Vec<Check>,
    pub notes: Vec<String>,
    pub artifacts: Vec<Artifact>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

struct Context<'a> {
    config: &'a SimulationConfig,
    dir: PathBuf,
    manifest: RunManifest,
}

impl Context<'_> {
    fn emit(&mut self, file: &str, bytes: Vec<u8>) -> Result<()> {
        let path = self.dir.join(file);
        fs::write(&path, &bytes).map_err(|e| Error::io(&path, e))?;
        self.manifest.artifacts.push(Artifact { file: file.into(), sha256: sha256_hex(&bytes), bytes: bytes.len() });
        Ok(())
    }

    fn phase<T>(&mut self, name: &str, f: impl FnOnce(&mut Self) -> Result<T>) -> Result<T> {
        let start = Instant::now();
        let out = f(self);
        self.manifest.phases.push(Phase { name: name.into(), seconds: start.elapsed().as_secs_f64() });
        out
    }

    fn run_record(&mut self, label: String, info: &RunInfo) {
        self.manifest.runs.push(RunRecord { label, info: info.clone() });
    }

    fn emit_trajectory(&mut self, prefix: &str, traj: &Trajectory) -> Result<()> {
        self.emit(&format!("{prefix}moments.csv"), moments_table(&traj.times, &traj.moments).encode())?;
        self.emit(&format!("{prefix}u_final.vkf1"), encode_vkf1(traj.final_state()))
    }

    fn check(&mut self, check: Check) {
        self.manifest.checks.push(check);
    }

    fn value(&mut self, name: &str, v: f64) {
        self.manifest.values.insert(name.into(), v);
    }

    fn note(&mut self, text: impl Into<String>) {
        self.manifest.notes.push(text.into());
    }

    fn report_norm(&mut self, engine: &SpectralEngine, label: &str, traj: &Trajectory) -> Result<()> {
        if let Some(req) = self.config.norm {
            let v = time_averaged_v_norm(engine, traj, req.decay, req.order, req.weight)?;
            self.value(&format!("{label}_v_norm"), v);
        }
        Ok(())
    }
}

/// Outcome of [`run`]: the final manifest, also written to
/// `out_dir/manifest.json`.
#[derive(Clone, Debug)]
pub struct RunSummary {
    pub status: Status,
    pub manifest: RunManifest,
}

/// Runs `config` for `scenario` into `out_dir` on `threads` worker threads
/// (rayon's default when `None`). Configuration errors are returned before
/// anything is written; solver failures produce a manifest with status
/// `aborted` and whatever artifacts were complete.
pub fn run(config: &SimulationConfig, scenario: Scenario, out_dir: &Path, threads: Option<usize>) -> Result<RunSummary> {
    if let Some(s) = config.scenario {
        if s != scenario {
            return Err(Error::Config(format!("the config selects scenario {s} but {scenario} was requested")));
        }
    }
    let config = SimulationConfig { scenario: Some(scenario), ..config.clone() };
    config.validate()?;
    if threads == Some(0) {
        return Err(Error::Config("--threads must be at least 1".into()));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.unwrap_or(0))
        .build()
        .map_err(|e| Error::Internal(format!("thread pool: {e}")))?;
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    pool.install(|| {
        let mut ctx = Context {
            config: &config,
            dir: out_dir.to_path_buf(),
            manifest: RunManifest {
                code_version: env!("CARGO_PKG_VERSION"),
                scenario,
                threads: rayon::current_num_threads(),
                status: Status::Success,
                abort_reason: None,
                config: config.clone(),
                runs: Vec::new(),
                phases: Vec::new(),
                values: BTreeMap::new(),
                checks: Vec::new(),
                notes: Vec::new(),
                artifacts: Vec::new(),
            },
        };
        let outcome = match scenario {
            Scenario::Memory => memory_scenario(&mut ctx),
            Scenario::Landau => landau_scenario(&mut ctx),
            Scenario::Converge => converge_scenario(&mut ctx),
            Scenario::Stationarity => stationarity_scenario(&mut ctx),
            Scenario::KernelCheck => kernel_check_scenario(&mut ctx),
        };
        match outcome {
            Ok(()) => {}
            Err(e @ Error::Config(_)) => return Err(e),
            Err(e) => {
                if let Error::Abort { partial: Some(traj), .. } = &e {
                    ctx.emit_trajectory("partial_", traj)?;
                }
                if let Error::Abort { snapshot: Some(u), .. } = &e {
                    ctx.emit("u_abort.vkf1", encode_vkf1(u))?;
                }
                ctx.manifest.status = Status::Aborted;
                ctx.manifest.abort_reason = Some(e.to_string());
            }
        }
        if ctx.manifest.status == Status::Success && ctx.manifest.checks.iter().any(|c| !c.passed) {
            ctx.manifest.status = Status::CheckFailed;
        }
        let json = serde_json::to_vec_pretty(&ctx.manifest).map_err(|e| Error::Internal(format!("manifest encoding: {e}")))?;
        let path = out_dir.join(MANIFEST_FILE);
        fs::write(&path, json).map_err(|e| Error::io(&path, e))?;
        Ok(RunSummary { status: ctx.manifest.status, manifest: ctx.manifest })
    })
}

fn initial_datum(config: &SimulationConfig, engine: &SpectralEngine) -> Result<ScalarField> {
    perturbed_maxwellian(engine.grid(), &config.maxwellian()?, config.delta2, &config.perturbation)
}

fn memory_scenario(ctx: &mut Context<'_>) -> Result<()> {
    let config = ctx.config;
    let engine = SpectralEngine::new(config.velocity_grid()?);
    let spec = config.cutoff()?;
    let u0 = initial_datum(config, &engine)?;
    ctx.emit("u_initial.vkf1", encode_vkf1(&u0))?;
    let k_max = LandauOperator::new(&engine, &spec).k_max(&u0)?;
    let mcfg = config.memory_config(config.eps, engine.grid().dv(), k_max)?;
    mcfg.validate()?;
    mcfg.check_cfl(engine.grid().dv(), k_max)?;
    let traj = ctx.phase("memory run", |_| run_memory(&engine, &spec, &mcfg, &u0))?;
    ctx.run_record(format!("memory {} eps={}", mcfg.mode, mcfg.eps), &traj.info);
    ctx.value("dt", mcfg.dt);
    ctx.emit_trajectory("", &traj)?;
    ctx.report_norm(&engine, "memory", &traj)?;
    if config.cross_check {
        let other = match mcfg.mode {
            HistoryMode::Windowed => HistoryMode::Naive,
            HistoryMode::Naive => HistoryMode::Windowed,
        };
        let ocfg = crate::memory::MemoryConfig { mode: other, ..mcfg };
        let reference = ctx.phase("cross-check run", |_| run_memory(&engine, &spec, &ocfg, &u0))?;
        ctx.run_record(format!("memory {other} eps={}", mcfg.eps), &reference.info);
        let mut table = NumericTable::new(&["t", "max_abs_deviation"]);
        let mut worst: f64 = 0.0;
        for ((t, a), b) in traj.times.iter().zip(&traj.states).zip(&reference.states) {
            let d = a.max_abs_diff(b);
            worst = worst.max(d);
            table.push(vec![*t, d]);
        }
        ctx.emit("cross_check.csv", table.encode())?;
        ctx.check(Check::at_most("windowed vs naive max deviation", worst, 10.0 * config.tail_tol));
    }
    Ok(())
}

fn landau_scenario(ctx: &mut Context<'_>) -> Result<()> {
    let config = ctx.config;
    let engine = SpectralEngine::new(config.velocity_grid()?);
    let spec = config.cutoff()?;
    let u0 = initial_datum(config, &engine)?;
    ctx.emit("u_initial.vkf1", encode_vkf1(&u0))?;
    let lcfg = config.landau_config();
    let traj = ctx.phase("landau run", |_| run_landau(&engine, &spec, &lcfg, &u0))?;
    ctx.run_record("landau".into(), &traj.info);
    ctx.emit_trajectory("", &traj)?;
    let drift = traj.conservation_drift();
    ctx.value("relative_mass_drift", drift.mass);
    ctx.value("relative_momentum_drift", drift.momentum);
    ctx.value("relative_energy_drift", drift.energy);
    ctx.value("max_entropy_increase", drift.entropy_increase);
    ctx.report_norm(&engine, "landau", &traj)
}

fn converge_scenario(ctx: &mut Context<'_>) -> Result<()> {
    let config = ctx.config;
    let grid = config.velocity_grid()?;
    let spec = config.cutoff()?;
    let initial = |g: &crate::grid::VelocityGrid| perturbed_maxwellian(g, &config.maxwellian()?, config.delta2, &config.perturbation);
    let report = ctx.phase("convergence study", |_| convergence_study(&grid, &spec, &config.sweep(), &initial, config.l_doubling))?;
    ctx.run_record("landau reference".into(), &report.landau_run);
    for (eps, info) in report.eps_list.iter().zip(&report.memory_runs) {
        ctx.run_record(format!("memory eps={eps}"), info);
    }
    let order = report.fitted_order.unwrap_or(f64::NAN);
    let mut table = NumericTable::new(&["eps", "error", "fitted_order"]);
    for (eps, err) in report.eps_list.iter().zip(&report.errors) {
        table.push(vec![*eps, *err, order]);
    }
    ctx.emit("convergence.csv", table.encode())?;
    ctx.value("fitted_order", order);
    ctx.note("the fitted order is descriptive: convergence is established without a rate");
    if let Some(reason) = report.failure {
        return Err(Error::Study(reason));
    }
    ctx.check(Check::at_least("errors strictly decreasing", f64::from(u8::from(report.monotone)), 1.0));
    let min_ratio = report.ratios().into_iter().fold(f64::INFINITY, f64::min);
    ctx.check(Check::at_least("minimum error ratio per eps step", min_ratio, CONVERGENCE_RATIO));
    if let Some(l) = &report.l_doubling {
        ctx.value("l_doubling_error", l.doubled_error);
        ctx.check(Check::at_most("relative error change under L doubling", l.relative_change(), L_DOUBLING_TOL));
    }
    Ok(())
}

fn stationarity_scenario(ctx: &mut Context<'_>) -> Result<()> {
    let config = ctx.config;
    let grid = config.velocity_grid()?;
    let spec = config.cutoff()?;
    let m = config.maxwellian()?;
    let report = ctx.phase("stationarity sweep", |_| stationarity_study(&grid, &spec, &config.sweep(), &m))?;
    for (eps, info) in report.eps_list.iter().zip(&report.memory_runs) {
        ctx.run_record(format!("memory eps={eps}"), info);
    }
    let order = report.fitted_order.unwrap_or(f64::NAN);
    let mut table = NumericTable::new(&["eps", "residual", "fitted_order"]);
    for (eps, r) in report.eps_list.iter().zip(&report.residuals) {
        table.push(vec![*eps, *r, order]);
    }
    ctx.emit("stationarity.csv", table.encode())?;
    ctx.value("landau_residual", report.landau_residual);
    ctx.value("fitted_order", order);
    ctx.note("the order bound is a frozen empirical regression bound, not a proven rate");
    if let Some(reason) = report.failure {
        return Err(Error::Study(reason));
    }
    ctx.check(Check::at_least("residuals strictly decreasing", f64::from(u8::from(report.monotone)), 1.0));
    ctx.check(Check::at_least("fitted residual order", order, STATIONARITY_ORDER));
    Ok(())
}

fn oracle_err(e: memkin_core::oracles::OracleError) -> Error {
    Error::Internal(format!("oracle quadrature: {e}"))
}

fn kernel_check_scenario(ctx: &mut Context<'_>) -> Result<()> {
    let config = ctx.config;
    let spec = config.cutoff()?;
    let kc = &config.kernel_check;
    let samples = default_velocity_samples(kc.samples);

    let mut memory = NumericTable::new(&["w1", "w2", "w3", "tau", "relative_error"]);
    let mut laplace = NumericTable::new(&["w1", "w2", "w3", "z_re", "z_im", "relative_error"]);
    let mut integral = NumericTable::new(&["w1", "w2", "w3", "t_factor", "relative_error"]);
    ctx.phase("kernel oracles", |_| {
        for w in &samples {
            let speed = (w[0] * w[0] + w[1] * w[1] + w[2] * w[2]).sqrt();
            let eta = cutoff(speed * speed, &spec);
            for s in &kc.scaled_lags {
                let tau = s / speed;
                let closed = memory_kernel(tau, *w, &spec)?;
                let oracle = oracle_memory_kernel(tau, *w).map_err(oracle_err)? * eta;
                memory.push(vec![w[0], w[1], w[2], tau, relative_frobenius_error(&closed, &oracle)]);
            }
            for z in &kc.laplace_points {
                let z = Complex64::new(z[0], z[1]);
                let closed = laplace_kernel(z, *w, &spec)?;
                let oracle = oracle_laplace(z, *w, &spec).map_err(oracle_err)?;
                laplace.push(vec![w[0], w[1], w[2], z.re, z.im, relative_frobenius_error_complex(&closed, &oracle)]);
            }
        }
        for r in kernel_time_integral_check(&spec, kc.t_factor, &samples)? {
            integral.push(vec![r.w[0], r.w[1], r.w[2], kc.t_factor, r.relative_error]);
        }
        Ok(())
    })?;
    let max = |t: &NumericTable| t.column("relative_error").unwrap().into_iter().fold(0.0, f64::max);
    let (m, l, i) = (max(&memory), max(&laplace), max(&integral));
    ctx.emit("kernel_check_memory.csv", memory.encode())?;
    ctx.emit("kernel_check_laplace.csv", laplace.encode())?;
    ctx.emit("kernel_check_time_integral.csv", integral.encode())?;
    ctx.check(Check::at_most("memory kernel vs Fourier integral", m, KERNEL_CHECK_TOL));
    ctx.check(Check::at_most("Laplace kernel vs numeric transform", l, KERNEL_CHECK_TOL));
    ctx.check(Check::at_most("time integral of memory kernel vs Landau kernel", i, KERNEL_INTEGRAL_TOL));
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn checks_and_exit_codes() {
        assert!(Check::at_most("a", 1.0, 1.0).passed);
        assert!(!Check::at_least("b", 0.5, 0.8).passed);
        assert!(!Check::at_least("c", f64::NAN, 0.8).passed);
        assert_eq!([Status::Success, Status::Aborted, Status::CheckFailed].map(Status::exit_code), [0, 3, 4]);
        assert_eq!(sha256_hex(b"abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    }
}
