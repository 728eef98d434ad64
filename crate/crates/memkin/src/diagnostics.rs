//! Probes built on the solvers: boundary layer, Laplace transforms of
//! recorded traces, the Markovian kernel identity, time-averaged norms and
//! the eps-convergence studies.

use memkin_core::trace::{laplace_side_energy, laplace_trapezoid, laplace_truncation_bound, time_side_energy};
use memkin_core::{
    boundary_layer_forcing_kernel, boundary_layer_kernel, integrate_memory_kernel, landau_kernel, symmat::relative_frobenius_error, Complex64,
    CutoffSpec, SymMat3,
};

use crate::error::{Error, Result};
use crate::field::{Maxwellian, ScalarField, VectorField};
use crate::grid::VelocityGrid;
use crate::landau::{run_landau, LandauConfig, LandauOperator};
use crate::memory::{run_memory, HistoryMode, MemoryConfig};
use crate::multiplier::SpectralMultiplier;
use crate::norms::{weighted_sobolev_norm, Weight};
use crate::spectral::{Contraction, SpectralEngine};
use crate::stencil::stencil_divergence;
use crate::trajectory::{RunInfo, Trajectory};

/// Initial datum of the boundary layer. A Maxwellian is differentiated
/// analytically, anything else spectrally.
#[derive(Clone, Copy, Debug)]
pub enum InitialDatum<'a> {
    Sampled(&'a ScalarField),
    Maxwellian(Maxwellian),
}

#[derive(Clone, Debug)]
pub struct BoundaryLayer {
    /// `B = ∇·B_F`
    pub field: ScalarField,
    /// `B_F`
    pub flux: VectorField,
}

fn bracket_divergence(engine: &SpectralEngine, mult: &SpectralMultiplier, u0: InitialDatum<'_>) -> Result<BoundaryLayer> {
    let grid = *engine.grid();
    let mut ws = engine.workspace();
    let mut flux = VectorField::zeros(grid);
    let (u, grad) = match u0 {
        InitialDatum::Sampled(u) => (u.clone(), engine.gradient_values(u.values())),
        InitialDatum::Maxwellian(m) => (m.sample(&grid), m.sample_gradient(&grid)),
    };
    let state = engine.padded_state(u.values(), &grad.comps)?;
    let view = engine.apply_tensor_view(mult, Contraction::State(&state), &mut ws);
    view.accumulate_bracket(u.values(), &grad.comps, 1.0, &mut flux.comps);
    Ok(BoundaryLayer { field: stencil_divergence(&grid, &flux)?, flux })
}

fn check_datum(engine: &SpectralEngine, u0: InitialDatum<'_>) -> Result<()> {
    match u0 {
        InitialDatum::Sampled(u) if u.grid() != engine.grid() => Err(Error::GridMismatch),
        _ => Ok(()),
    }
}

/// Boundary layer `B(t, ·; u0)` and its flux `B_F`.
pub fn boundary_layer(engine: &SpectralEngine, t: f64, u0: InitialDatum<'_>, eps: f64, spec: &CutoffSpec) -> Result<BoundaryLayer> {
    if !(t >= 0.0) || !(eps > 0.0) {
        return Err(Error::Config(format!("boundary layer needs t >= 0 and eps > 0, got t = {t}, eps = {eps}")));
    }
    check_datum(engine, u0)?;
    let mult = SpectralMultiplier::from_kernel(engine, |w| boundary_layer_kernel(t, eps, w, spec));
    bracket_divergence(engine, &mult, u0)
}

/// `∂_tt B(t, ·; u0)`, the same bracket with kernel
/// `(pi^2/4)(e^{-t|w|/eps}/eps) eta P^perp`.
pub fn boundary_layer_forcing(engine: &SpectralEngine, t: f64, u0: InitialDatum<'_>, eps: f64, spec: &CutoffSpec) -> Result<BoundaryLayer> {
    if !(t >= 0.0) || !(eps > 0.0) {
        return Err(Error::Config(format!("boundary layer needs t >= 0 and eps > 0, got t = {t}, eps = {eps}")));
    }
    check_datum(engine, u0)?;
    let mult = SpectralMultiplier::from_kernel(engine, |w| boundary_layer_forcing_kernel(t, eps, w, spec));
    bracket_divergence(engine, &mult, u0)
}

/// Relative sup-norm mismatch between the second difference
/// `(B(2h) - 2B(h) + B(0)) / h^2` with `h = 1e-3 eps` and the forcing at
/// `t = h`.
pub fn boundary_layer_second_derivative_check(engine: &SpectralEngine, u0: InitialDatum<'_>, eps: f64, spec: &CutoffSpec) -> Result<f64> {
    let h = 1e-3 * eps;
    let b0 = boundary_layer(engine, 0.0, u0, eps, spec)?.field;
    let b1 = boundary_layer(engine, h, u0, eps, spec)?.field;
    let b2 = boundary_layer(engine, 2.0 * h, u0, eps, spec)?.field;
    let rhs = boundary_layer_forcing(engine, h, u0, eps, spec)?.field;
    let mut fd = b2;
    fd.axpy(-2.0, &b1);
    fd.axpy(1.0, &b0);
    let fd = fd.scaled(1.0 / (h * h));
    Ok(fd.max_abs_diff(&rhs) / rhs.max_abs())
}

/// Trapezoid Laplace transform `∫ e^{-zt} u(t, v) dt` over the recorded
/// times at the given nodes.
pub fn laplace_probe(traj: &Trajectory, z: Complex64, nodes: &[usize]) -> Result<Vec<Complex64>> {
    nodes
        .iter()
        .map(|&i| {
            let values: Vec<f64> = traj.states.iter().map(|s| s.values()[i]).collect();
            Ok(laplace_trapezoid(&traj.times, &values, z)?)
        })
        .collect()
}

/// Bound `sup|u| e^{-Re z T} / Re z` on the transform beyond the last record.
pub fn laplace_probe_truncation(traj: &Trajectory, z: Complex64) -> f64 {
    let sup = traj.states.iter().map(ScalarField::max_abs).fold(0.0, f64::max);
    laplace_truncation_bound(sup, z.re, *traj.times.last().unwrap_or(&0.0))
}

/// Both sides of the Laplace-Plancherel identity for a scalar trace.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PlancherelCheck {
    pub time_side: f64,
    pub laplace_side: f64,
}

impl PlancherelCheck {
    pub fn relative_gap(&self) -> f64 {
        (self.time_side - self.laplace_side).abs() / self.time_side.abs()
    }
}

pub fn plancherel_check(times: &[f64], values: &[f64], decay: f64, omega_max: f64, intervals: usize) -> Result<PlancherelCheck> {
    if times.len() != values.len() || times.len() < 2 {
        return Err(Error::Config("a trace needs at least two samples with matching times".into()));
    }
    if !(decay >= 1.0) {
        return Err(Error::Config(format!("decay rate A must be >= 1, got {decay}")));
    }
    Ok(PlancherelCheck {
        time_side: time_side_energy(times, values, decay),
        laplace_side: laplace_side_energy(times, values, decay, omega_max, intervals),
    })
}

/// Relative velocities used when no explicit sample is given: a spiral of
/// directions with magnitudes between 0.5 and 6.
pub fn default_velocity_samples(count: usize) -> Vec<[f64; 3]> {
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    (0..count)
        .map(|k| {
            let s = (k as f64 + 0.5) / count as f64;
            let z = 1.0 - 2.0 * s;
            let rho = (1.0 - z * z).sqrt();
            let phi = golden * k as f64;
            let r = 0.5 + 5.5 * s;
            [r * rho * phi.cos(), r * rho * phi.sin(), r * z]
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct KernelIntegralSample {
    pub w: [f64; 3],
    pub integral: SymMat3<f64>,
    pub landau: SymMat3<f64>,
    pub relative_error: f64,
}

/// `∫_0^{T/|w|} G(tau, w) dtau` against the Landau kernel, by Simpson with
/// `dtau = 0.01/|w|`; dead-zone samples compare zero with zero.
pub fn kernel_time_integral_check(spec: &CutoffSpec, t_factor: f64, samples: &[[f64; 3]]) -> Result<Vec<KernelIntegralSample>> {
    if !(t_factor >= 20.0) {
        return Err(Error::Config(format!("T_factor must be >= 20 for the tail e^-T to be negligible, got {t_factor}")));
    }
    let intervals = (t_factor / 0.01).ceil() as usize;
    Ok(samples
        .iter()
        .map(|&w| {
            let r = (w[0] * w[0] + w[1] * w[1] + w[2] * w[2]).sqrt();
            let landau = landau_kernel(w, spec);
            let integral = if r > 0.0 { integrate_memory_kernel(w, spec, t_factor / r, intervals) } else { SymMat3::ZERO };
            let relative_error = if landau.frobenius_norm() == 0.0 {
                integral.frobenius_norm()
            } else {
                relative_frobenius_error(&integral, &landau)
            };
            KernelIntegralSample { w, integral, landau, relative_error }
        })
        .collect())
}

/// `sqrt(∫ e^{-A t} ||u(t)||^2_{H^n_nu} dt)` by the trapezoid rule over the
/// recorded times.
pub fn time_averaged_v_norm(engine: &SpectralEngine, traj: &Trajectory, decay: f64, order: usize, weight: Weight) -> Result<f64> {
    if !(decay >= 1.0) {
        return Err(Error::Config(format!("decay rate A must be >= 1, got {decay}")));
    }
    let sq: Vec<f64> = traj
        .states
        .iter()
        .map(|u| weighted_sobolev_norm(engine, u, order, weight).map(|n| n * n))
        .collect::<Result<_>>()?;
    Ok(memkin_core::trace::discounted_integral(&traj.times, &sq, decay).sqrt())
}

/// Least-squares slope of `log err` against `log eps`.
pub fn fit_order(eps: &[f64], err: &[f64]) -> Option<f64> {
    if eps.len() < 2 || eps.len() != err.len() || err.iter().any(|e| !(*e > 0.0)) {
        return None;
    }
    let x: Vec<f64> = eps.iter().map(|e| e.ln()).collect();
    let y: Vec<f64> = err.iter().map(|e| e.ln()).collect();
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let sxy: f64 = x.iter().zip(&y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    Some(sxy / sxx)
}

pub fn strictly_decreasing(values: &[f64]) -> bool {
    values.windows(2).all(|w| w[1] < w[0])
}

/// Parameters shared by every run of an eps sweep.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepSetup {
    pub eps_list: Vec<f64>,
    pub t_end: f64,
    pub record_interval: f64,
    pub tail_tol: f64,
    pub mode: HistoryMode,
    pub cfl_factor: f64,
    pub max_window: usize,
    /// Fixed memory step with its record stride; derived from the record
    /// interval when absent.
    pub fixed_step: Option<(f64, usize)>,
}

impl SweepSetup {
    pub fn validate(&self) -> Result<()> {
        if self.eps_list.is_empty() {
            return Err(Error::Config("eps_list is empty".into()));
        }
        if !strictly_decreasing(&self.eps_list) {
            return Err(Error::Config(format!("eps_list must be strictly decreasing, got {:?}", self.eps_list)));
        }
        if self.eps_list.iter().any(|e| !(*e > 0.0)) {
            return Err(Error::Config("every eps must be positive".into()));
        }
        Ok(())
    }

    /// Memory configuration for one eps with a step that divides the record
    /// interval.
    pub fn memory_config(&self, eps: f64, dv: f64, k_max: f64) -> Result<MemoryConfig> {
        let base = match self.fixed_step {
            Some((dt, record_stride)) => MemoryConfig { dt, record_stride, cfl_factor: self.cfl_factor, ..MemoryConfig::new(eps, self.t_end) },
            None => MemoryConfig::with_record_interval(eps, self.t_end, self.record_interval, self.cfl_factor, dv, k_max)?,
        };
        Ok(MemoryConfig { mode: self.mode, tail_tol: self.tail_tol, max_window: self.max_window, ..base })
    }

    fn landau_config(&self) -> LandauConfig {
        LandauConfig { t_end: self.t_end, record_interval: self.record_interval, cfl_factor: self.cfl_factor, ..Default::default() }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LDoublingCheck {
    pub eps: f64,
    pub error: f64,
    pub doubled_error: f64,
}

impl LDoublingCheck {
    pub fn relative_change(&self) -> f64 {
        (self.doubled_error - self.error).abs() / self.error
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ConvergenceReport {
    pub eps_list: Vec<f64>,
    /// `sup_{t <= t_end} ||u_eps(t) - u(t)||_{L^2_lambda}` per completed eps.
    pub errors: Vec<f64>,
    pub fitted_order: Option<f64>,
    pub monotone: bool,
    pub l_doubling: Option<LDoublingCheck>,
    pub landau_run: RunInfo,
    pub memory_runs: Vec<RunInfo>,
    /// Set when a solver failed; the report then covers the eps values
    /// completed before the failure.
    pub failure: Option<String>,
}

impl ConvergenceReport {
    /// Ratios `err(eps_k) / err(eps_{k+1})`.
    pub fn ratios(&self) -> Vec<f64> {
        self.errors.windows(2).map(|w| w[0] / w[1]).collect()
    }

    fn finish(&mut self) {
        let eps = &self.eps_list[..self.errors.len()];
        self.fitted_order = fit_order(eps, &self.errors);
        self.monotone = strictly_decreasing(&self.errors);
    }
}

fn sweep_error(engine: &SpectralEngine, spec: &CutoffSpec, setup: &SweepSetup, eps: f64, u0: &ScalarField, reference: &Trajectory) -> Result<(f64, RunInfo)> {
    let k_max = LandauOperator::new(engine, spec).k_max(u0)?;
    let cfg = setup.memory_config(eps, engine.grid().dv(), k_max)?;
    let traj = run_memory(engine, spec, &cfg, u0)?;
    Ok((traj.sup_lambda_distance(reference, setup.t_end)?, traj.info))
}

/// Runs the memory solver for every eps and the Landau solver once from the
/// same datum and compares them at the shared record times. With
/// `l_doubling`, the largest eps is repeated on a grid with twice the
/// half-width and the same spacing.
pub fn convergence_study(
    grid: &VelocityGrid,
    spec: &CutoffSpec,
    setup: &SweepSetup,
    initial: &dyn Fn(&VelocityGrid) -> Result<ScalarField>,
    l_doubling: bool,
) -> Result<ConvergenceReport> {
    setup.validate()?;
    let engine = SpectralEngine::new(*grid);
    let u0 = initial(grid)?;
    let mut report = ConvergenceReport { eps_list: setup.eps_list.clone(), ..Default::default() };
    let landau = match run_landau(&engine, spec, &setup.landau_config(), &u0) {
        Ok(t) => t,
        Err(e) => {
            report.failure = Some(format!("Landau reference: {e}"));
            return Ok(report);
        }
    };
    report.landau_run = landau.info.clone();
    for &eps in &setup.eps_list {
        match sweep_error(&engine, spec, setup, eps, &u0, &landau) {
            Ok((err, info)) => {
                report.errors.push(err);
                report.memory_runs.push(info);
            }
            Err(e) => {
                report.failure = Some(format!("eps = {eps}: {e}"));
                report.finish();
                return Ok(report);
            }
        }
    }
    report.finish();
    if l_doubling {
        let big = VelocityGrid::new(2 * grid.n(), 2.0 * grid.half_width())?;
        let big_engine = SpectralEngine::new(big);
        let eps = setup.eps_list[0];
        let run = || -> Result<f64> {
            let u0 = initial(&big)?;
            let landau = run_landau(&big_engine, spec, &setup.landau_config(), &u0)?;
            Ok(sweep_error(&big_engine, spec, setup, eps, &u0, &landau)?.0)
        };
        match run() {
            Ok(doubled_error) => report.l_doubling = Some(LDoublingCheck { eps, error: report.errors[0], doubled_error }),
            Err(e) => report.failure = Some(format!("L-doubling run: {e}")),
        }
    }
    Ok(report)
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct StationarityReport {
    pub eps_list: Vec<f64>,
    pub residuals: Vec<f64>,
    pub fitted_order: Option<f64>,
    pub monotone: bool,
    /// Same residual for the Landau solver.
    pub landau_residual: f64,
    pub memory_runs: Vec<RunInfo>,
    pub failure: Option<String>,
}

/// `sup_t ||u_eps(t) - m||_{L^2_lambda}` from `u0 = m` for every eps, plus the
/// Landau counterpart.
pub fn stationarity_study(grid: &VelocityGrid, spec: &CutoffSpec, setup: &SweepSetup, maxwellian: &Maxwellian) -> Result<StationarityReport> {
    setup.validate()?;
    let engine = SpectralEngine::new(*grid);
    let m = maxwellian.sample(grid);
    let mut report = StationarityReport { eps_list: setup.eps_list.clone(), ..Default::default() };
    let k_max = LandauOperator::new(&engine, spec).k_max(&m)?;
    let landau = run_landau(&engine, spec, &setup.landau_config(), &m);
    match landau {
        Ok(t) => report.landau_residual = t.sup_lambda_distance_to(&m)?,
        Err(e) => {
            report.failure = Some(format!("Landau reference: {e}"));
            return Ok(report);
        }
    }
    for &eps in &setup.eps_list {
        let run = setup.memory_config(eps, grid.dv(), k_max).and_then(|cfg| run_memory(&engine, spec, &cfg, &m));
        match run {
            Ok(traj) => {
                report.residuals.push(traj.sup_lambda_distance_to(&m)?);
                report.memory_runs.push(traj.info);
            }
            Err(e) => {
                report.failure = Some(format!("eps = {eps}: {e}"));
                break;
            }
        }
    }
    report.fitted_order = fit_order(&report.eps_list[..report.residuals.len()], &report.residuals);
    report.monotone = strictly_decreasing(&report.residuals);
    Ok(report)
}
