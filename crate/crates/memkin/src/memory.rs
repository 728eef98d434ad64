//! Time integration of the equation with memory
//!
//! ```text
//! ∂_t u = ∇·F,   F(t) = (1/eps) ∫_0^t [ (G_s * u_s) ∇u_s - (G_s * ∇u_s) u_s ] ds
//! ```
//!
//! with `G_s = G((t - s)/eps, ·)`. The history integral uses the composite
//! trapezoid rule on the step lattice and, in windowed mode, drops lags
//! beyond the certified window of the multiplier table.

use std::collections::VecDeque;
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use memkin_core::CutoffSpec;

use crate::error::{Error, Result};
use crate::field::{Maxwellian, ScalarField, VectorField};
use crate::landau::{abort, guard, LandauOperator, BLOWUP_FACTOR, DEFAULT_CFL};
use crate::multiplier::{build_memory_table, MemoryMultiplierTable, TableRequest};
use crate::norms::l2_lambda_norm;
use crate::spectral::{Contraction, PaddedState, SpectralEngine, Workspace};
use crate::stencil::stencil_divergence;
use crate::trajectory::Trajectory;

pub const DEFAULT_MAX_WINDOW: usize = 100_000;
/// Largest admissible horizon.
pub const MAX_T_END: f64 = 1.0;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HistoryMode {
    /// Lags up to the certified window.
    #[default]
    Windowed,
    /// Every past step.
    Naive,
}

impl fmt::Display for HistoryMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            HistoryMode::Windowed => "windowed",
            HistoryMode::Naive => "naive",
        })
    }
}

impl FromStr for HistoryMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "windowed" => Ok(HistoryMode::Windowed),
            "naive" => Ok(HistoryMode::Naive),
            other => Err(Error::Config(format!("unknown history mode {other:?} (expected windowed or naive)"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MemoryConfig {
    pub eps: f64,
    pub dt: f64,
    pub t_end: f64,
    pub record_stride: usize,
    pub mode: HistoryMode,
    pub tail_tol: f64,
    pub cfl_factor: f64,
    pub max_window: usize,
    pub blowup_factor: f64,
}

impl MemoryConfig {
    /// Configuration with `dt = record_interval / m`, `m` the smallest
    /// integer for which `dt <= min(eps / 8, cfl dv^2 / k_max)`.
    pub fn with_record_interval(eps: f64, t_end: f64, record_interval: f64, cfl: f64, dv: f64, k_max: f64) -> Result<Self> {
        if !(record_interval > 0.0) {
            return Err(Error::Config(format!("record interval must be positive, got {record_interval}")));
        }
        let limit = default_step_limit(eps, cfl, dv, k_max);
        let substeps = (record_interval / limit * (1.0 - 1e-12)).ceil().max(1.0);
        Ok(Self { dt: record_interval / substeps, record_stride: substeps as usize, cfl_factor: cfl, ..Self::new(eps, t_end) })
    }

    /// Defaults with `dt = eps / 8` and one record per step.
    pub fn new(eps: f64, t_end: f64) -> Self {
        Self {
            eps,
            dt: eps / 8.0,
            t_end,
            record_stride: 1,
            mode: HistoryMode::Windowed,
            tail_tol: 1e-10,
            cfl_factor: DEFAULT_CFL,
            max_window: DEFAULT_MAX_WINDOW,
            blowup_factor: BLOWUP_FACTOR,
        }
    }

    /// Number of steps; `t_end` must be an integer multiple of `dt`.
    pub fn steps(&self) -> Result<usize> {
        let ratio = self.t_end / self.dt;
        let steps = ratio.round();
        if steps < 1.0 || (ratio - steps).abs() > 1e-9 * ratio.max(1.0) {
            return Err(Error::Config(format!("t_end = {} is not an integer multiple of dt = {}", self.t_end, self.dt)));
        }
        Ok(steps as usize)
    }

    /// Checks everything that does not depend on the initial datum.
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("eps", self.eps), ("dt", self.dt), ("t_end", self.t_end), ("tail_tol", self.tail_tol), ("cfl_factor", self.cfl_factor)] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::Config(format!("{name} must be positive and finite, got {v}")));
            }
        }
        if self.dt > 0.25 * self.eps {
            return Err(Error::Config(format!(
                "dt = {} exceeds eps/4 = {}: the memory kernel varies on the time scale eps and must be resolved",
                self.dt,
                0.25 * self.eps
            )));
        }
        if self.t_end > MAX_T_END {
            return Err(Error::Config(format!(
                "t_end = {} exceeds {MAX_T_END}: solutions are only guaranteed on short horizons",
                self.t_end
            )));
        }
        if self.record_stride == 0 {
            return Err(Error::Config("record_stride must be at least 1".into()));
        }
        self.steps().map(|_| ())
    }

    /// Checks the diffusive stability limit `dt <= cfl dv^2 / k_max`.
    pub fn check_cfl(&self, dv: f64, k_max: f64) -> Result<()> {
        let limit = crate::landau::cfl_step(self.cfl_factor, dv, k_max);
        if self.dt > limit {
            return Err(Error::Config(format!(
                "dt = {} exceeds the diffusive limit cfl * dv^2 / k_max = {limit} (k_max = {k_max})",
                self.dt
            )));
        }
        Ok(())
    }
}

fn default_step_limit(eps: f64, cfl: f64, dv: f64, k_max: f64) -> f64 {
    (eps / 8.0).min(crate::landau::cfl_step(cfl, dv, k_max))
}

/// A past state in the form the flux needs: its padded transforms, values
/// and periodic gradient.
#[derive(Clone, Debug)]
pub struct HistoryEntry {
    pub state: PaddedState,
    pub values: Vec<f64>,
    pub gradient: [Vec<f64>; 3],
}

impl HistoryEntry {
    pub fn new(engine: &SpectralEngine, u: &ScalarField) -> Result<Self> {
        let gradient = engine.gradient_values(u.values()).comps;
        Ok(Self { state: engine.padded_state(u.values(), &gradient)?, values: u.values().to_vec(), gradient })
    }

    fn bytes(&self) -> usize {
        self.state.bytes() + 4 * self.values.len() * std::mem::size_of::<f64>()
    }
}

/// Ring of past states, newest last.
#[derive(Clone, Debug)]
pub struct HistoryBuffer {
    entries: VecDeque<HistoryEntry>,
    capacity: Option<usize>,
    newest_step: Option<usize>,
}

impl HistoryBuffer {
    /// Keeps the last `window + 1` entries, or everything in naive mode.
    pub fn new(mode: HistoryMode, window: usize) -> Self {
        let capacity = match mode {
            HistoryMode::Windowed => Some(window + 1),
            HistoryMode::Naive => None,
        };
        Self { entries: VecDeque::new(), capacity, newest_step: None }
    }

    pub fn push(&mut self, entry: HistoryEntry) {
        if self.capacity == Some(self.entries.len()) {
            self.entries.pop_front();
        }
        self.entries.push_back(entry);
        self.newest_step = Some(self.newest_step.map_or(0, |s| s + 1));
    }

    /// Entry `back` steps before the newest.
    pub fn get(&self, back: usize) -> Option<&HistoryEntry> {
        self.entries.len().checked_sub(back + 1).map(|i| &self.entries[i])
    }

    pub fn newest_step(&self) -> Option<usize> {
        self.newest_step
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn bytes(&self) -> usize {
        self.entries.iter().map(HistoryEntry::bytes).sum()
    }
}

/// Highest lag entering the flux at step `step`.
pub fn lag_count(mode: HistoryMode, table: &MemoryMultiplierTable, step: usize) -> usize {
    match mode {
        HistoryMode::Windowed => step.min(table.window()),
        HistoryMode::Naive => step,
    }
}

/// Trapezoid weight of lag `k` out of `0..=last`, including `dt / eps`.
fn lag_weight(k: usize, last: usize, lag_step: f64) -> f64 {
    if k == 0 || k == last {
        0.5 * lag_step
    } else {
        lag_step
    }
}

fn add_lag_term(
    engine: &SpectralEngine,
    table: &MemoryMultiplierTable,
    lag: usize,
    entry: &HistoryEntry,
    weight: f64,
    ws: &mut Workspace,
    flux: &mut VectorField,
) -> Result<()> {
    if lag >= table.len() {
        return Err(Error::Internal(format!("lag {lag} requested but the multiplier table stores {} lags", table.len())));
    }
    let view = engine.apply_tensor_view(table.multiplier(lag), Contraction::State(&entry.state), ws);
    view.accumulate_bracket(&entry.values, &entry.gradient, weight, &mut flux.comps);
    Ok(())
}

/// History flux at step `step`, lags `1..=K` only, with `entry_at_lag(k)`
/// the state `k` steps back.
fn history_part<'h>(
    engine: &SpectralEngine,
    table: &MemoryMultiplierTable,
    mode: HistoryMode,
    step: usize,
    entry_at_lag: impl Fn(usize) -> Option<&'h HistoryEntry>,
    ws: &mut Workspace,
) -> Result<VectorField> {
    let mut flux = VectorField::zeros(*engine.grid());
    let last = lag_count(mode, table, step);
    for k in 1..=last {
        let entry = entry_at_lag(k).ok_or_else(|| Error::Internal(format!("history lacks the state {k} steps back at step {step}")))?;
        add_lag_term(engine, table, k, entry, lag_weight(k, last, table.lag_step()), ws, &mut flux)?;
    }
    Ok(flux)
}

/// Memory flux at step `step`: trapezoid sum over lags `0..=K`, where
/// `entry_at_lag(k)` returns the state at step `step - k`.
pub fn memory_flux<'h>(
    engine: &SpectralEngine,
    table: &MemoryMultiplierTable,
    mode: HistoryMode,
    step: usize,
    entry_at_lag: impl Fn(usize) -> Option<&'h HistoryEntry>,
    ws: &mut Workspace,
) -> Result<VectorField> {
    if step == 0 {
        return Ok(VectorField::zeros(*engine.grid()));
    }
    let mut flux = history_part(engine, table, mode, step, &entry_at_lag, ws)?;
    let head = entry_at_lag(0).ok_or_else(|| Error::Internal("history lacks the current state".into()))?;
    add_lag_term(engine, table, 0, head, 0.5 * table.lag_step(), ws, &mut flux)?;
    Ok(flux)
}

/// Solver state between steps.
pub struct MemoryState<'e> {
    engine: &'e SpectralEngine,
    table: MemoryMultiplierTable,
    mode: HistoryMode,
    history: HistoryBuffer,
    u: ScalarField,
    /// Flux at the current step.
    flux: VectorField,
    step: usize,
    dt: f64,
    ws: Workspace,
}

impl<'e> MemoryState<'e> {
    pub fn new(engine: &'e SpectralEngine, table: MemoryMultiplierTable, mode: HistoryMode, dt: f64, u0: &ScalarField) -> Result<Self> {
        let mut history = HistoryBuffer::new(mode, table.window());
        history.push(HistoryEntry::new(engine, u0)?);
        Ok(Self {
            engine,
            table,
            mode,
            history,
            u: u0.clone(),
            flux: VectorField::zeros(*u0.grid()),
            step: 0,
            dt,
            ws: engine.workspace(),
        })
    }

    pub fn u(&self) -> &ScalarField {
        &self.u
    }

    pub fn step_index(&self) -> usize {
        self.step
    }

    pub fn time(&self) -> f64 {
        self.step as f64 * self.dt
    }

    pub fn flux(&self) -> &VectorField {
        &self.flux
    }

    pub fn table(&self) -> &MemoryMultiplierTable {
        &self.table
    }

    pub fn history(&self) -> &HistoryBuffer {
        &self.history
    }
}

/// One Heun step.
///
/// The predictor `ũ = u_n + dt ∇·F_n` enters the corrector flux as the lag-0
/// state; all other lags come from the history. After the update the flux
/// at `t_{n+1}` differs from the corrector flux only in that lag-0 term, so
/// it is obtained by swapping that single term.
pub fn memory_step(state: &mut MemoryState<'_>) -> Result<()> {
    let engine = state.engine;
    let dt = state.dt;
    let next = state.step + 1;
    let div_now = stencil_divergence(engine.grid(), &state.flux)?;
    let mut predictor = state.u.clone();
    predictor.axpy(dt, &div_now);
    if !predictor.is_finite() {
        return Err(Error::Abort {
            time: next as f64 * dt,
            reason: "non-finite predictor".into(),
            snapshot: Some(Box::new(predictor)),
            partial: None,
        });
    }
    let predicted = HistoryEntry::new(engine, &predictor)?;
    let history = &state.history;
    let mut rest = history_part(engine, &state.table, state.mode, next, |k| history.get(k - 1), &mut state.ws)?;
    let head_weight = 0.5 * state.table.lag_step();
    let mut corrector_flux = rest.clone();
    add_lag_term(engine, &state.table, 0, &predicted, head_weight, &mut state.ws, &mut corrector_flux)?;
    let div_next = stencil_divergence(engine.grid(), &corrector_flux)?;
    let vals = state.u.values_mut();
    for i in 0..vals.len() {
        vals[i] += 0.5 * dt * (div_now.values()[i] + div_next.values()[i]);
    }
    let entry = HistoryEntry::new(engine, &state.u)?;
    add_lag_term(engine, &state.table, 0, &entry, head_weight, &mut state.ws, &mut rest)?;
    state.history.push(entry);
    state.flux = rest;
    state.step = next;
    Ok(())
}

/// Builds the multiplier table needed for `config` over its whole horizon.
pub fn build_table_for(engine: &SpectralEngine, spec: &CutoffSpec, config: &MemoryConfig) -> Result<MemoryMultiplierTable> {
    let steps = config.steps()?;
    build_memory_table(
        engine,
        spec,
        TableRequest {
            eps: config.eps,
            dt: config.dt,
            tail_tol: config.tail_tol,
            horizon: Some(steps),
            truncate_to_window: config.mode == HistoryMode::Windowed,
            max_window: config.max_window,
        },
    )
}

/// Integrates from `u0` to `t_end`, recording every `record_stride` steps.
pub fn run_memory(engine: &SpectralEngine, spec: &CutoffSpec, config: &MemoryConfig, u0: &ScalarField) -> Result<Trajectory> {
    config.validate()?;
    if engine.grid() != u0.grid() {
        return Err(Error::GridMismatch);
    }
    let setup = Instant::now();
    let k_max = LandauOperator::new(engine, spec).k_max(u0)?;
    config.check_cfl(engine.grid().dv(), k_max)?;
    let steps = config.steps()?;
    let table = build_table_for(engine, spec, config)?;
    let mut traj = Trajectory::start(u0);
    traj.info.window = Some(table.window());
    traj.info.tail_bound = Some(table.tail_bound());
    traj.info.stored_lags = Some(table.len());
    let mut state = MemoryState::new(engine, table, config.mode, config.dt, u0)?;
    traj.info.setup_seconds = setup.elapsed().as_secs_f64();
    let stepping = Instant::now();
    let initial_sup = u0.max_abs();
    for n in 1..=steps {
        match memory_step(&mut state) {
            Ok(()) => {}
            Err(Error::Abort { time, reason, snapshot, .. }) => {
                return Err(Error::Abort { time, reason, snapshot, partial: Some(Box::new(traj)) });
            }
            Err(e) => return Err(e),
        }
        let t = n as f64 * config.dt;
        traj.info.note_step(config.dt);
        guard(t, state.u(), initial_sup, config.blowup_factor, &traj)?;
        let m = traj.log_step(t, state.u());
        if n % config.record_stride == 0 || n == steps {
            traj.record(t, state.u(), m);
        }
    }
    traj.info.stepping_seconds = stepping.elapsed().as_secs_f64();
    if !state.u().is_finite() {
        return Err(abort(config.t_end, "non-finite final state".into(), state.u(), &traj));
    }
    Ok(traj)
}

/// Runs from the Maxwellian `m` and returns `sup_t ||u(t) - m||_{L^2_lambda}`
/// over the recorded times.
pub fn stationarity_residual(engine: &SpectralEngine, spec: &CutoffSpec, config: &MemoryConfig, maxwellian: &Maxwellian) -> Result<f64> {
    let m = maxwellian.sample(engine.grid());
    let traj = run_memory(engine, spec, config, &m)?;
    traj.sup_lambda_distance_to(&m)
}

/// `sup_t ||u(t) - m||_{L^2_lambda}` of an existing trajectory; identical to
/// [`stationarity_residual`] when `traj` started from `m`.
pub fn residual_of(traj: &Trajectory, m: &ScalarField) -> Result<f64> {
    let mut sup: f64 = 0.0;
    for u in &traj.states {
        sup = sup.max(l2_lambda_norm(&u.sub(m)?));
    }
    Ok(sup)
}
