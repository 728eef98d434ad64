//! The cutoff Landau equation `∂_t u = ∇·(K[u] ∇u - P[u] u)` with
//! `K[u] = a * u` and `P[u] = a * ∇u`.

use std::time::Instant;

use memkin_core::CutoffSpec;

use crate::error::{Error, Result};
use crate::field::{ScalarField, SymTensorField, VectorField};
use crate::multiplier::{build_landau_multiplier, SpectralMultiplier};
use crate::spectral::{Contraction, SpectralEngine, Workspace};
use crate::stencil::stencil_divergence;
use crate::trajectory::Trajectory;

pub const DEFAULT_CFL: f64 = 0.05;
pub const BLOWUP_FACTOR: f64 = 1e3;

/// Collision operator with a precomputed Landau multiplier and scratch space.
pub struct LandauOperator<'e> {
    engine: &'e SpectralEngine,
    multiplier: SpectralMultiplier,
    ws: Workspace,
}

/// Collision flux together with the largest eigenvalue of `K[u]`.
#[derive(Clone, Debug)]
pub struct FluxSample {
    pub flux: VectorField,
    pub k_max: f64,
}

impl<'e> LandauOperator<'e> {
    pub fn new(engine: &'e SpectralEngine, spec: &CutoffSpec) -> Self {
        Self { engine, multiplier: build_landau_multiplier(engine, spec), ws: engine.workspace() }
    }

    pub fn engine(&self) -> &'e SpectralEngine {
        self.engine
    }

    pub fn multiplier(&self) -> &SpectralMultiplier {
        &self.multiplier
    }

    /// `(K[u], P[u])`.
    pub fn coefficients(&mut self, u: &ScalarField) -> Result<(SymTensorField, VectorField)> {
        let grad = self.engine.gradient_values(u.values());
        let state = self.engine.padded_state(u.values(), &grad.comps)?;
        let r = self.engine.apply_tensor(&self.multiplier, Contraction::State(&state), &mut self.ws);
        Ok((r.tensor, r.contracted))
    }

    /// `K[u] ∇u - P[u] u` and the largest eigenvalue of `K[u]` over the grid.
    pub fn flux(&mut self, u: &ScalarField) -> Result<FluxSample> {
        let grad = self.engine.gradient_values(u.values());
        let state = self.engine.padded_state(u.values(), &grad.comps)?;
        let view = self.engine.apply_tensor_view(&self.multiplier, Contraction::State(&state), &mut self.ws);
        let mut flux = VectorField::zeros(*u.grid());
        view.accumulate_bracket(u.values(), &grad.comps, 1.0, &mut flux.comps);
        let k_max = max_eigenvalue(&view.tensor);
        Ok(FluxSample { flux, k_max })
    }

    pub fn rhs(&mut self, u: &ScalarField) -> Result<ScalarField> {
        Ok(self.rhs_with_bound(u)?.0)
    }

    fn rhs_with_bound(&mut self, u: &ScalarField) -> Result<(ScalarField, f64)> {
        let s = self.flux(u)?;
        Ok((stencil_divergence(self.engine.grid(), &s.flux)?, s.k_max))
    }

    /// Largest eigenvalue of `K[u]` over the grid.
    pub fn k_max(&mut self, u: &ScalarField) -> Result<f64> {
        Ok(self.flux(u)?.k_max)
    }
}

pub(crate) fn max_eigenvalue(tensor: &[&[f64]; 6]) -> f64 {
    (0..tensor[0].len())
        .map(|i| memkin_core::SymMat3::from_components(std::array::from_fn(|c| tensor[c][i])).max_eigenvalue())
        .fold(0.0, f64::max)
}

/// `(K[u], P[u])`; see [`LandauOperator::coefficients`].
pub fn landau_coefficients(engine: &SpectralEngine, spec: &CutoffSpec, u: &ScalarField) -> Result<(SymTensorField, VectorField)> {
    LandauOperator::new(engine, spec).coefficients(u)
}

/// `∇·(K[u] ∇u - P[u] u)`.
pub fn landau_rhs(engine: &SpectralEngine, spec: &CutoffSpec, u: &ScalarField) -> Result<ScalarField> {
    LandauOperator::new(engine, spec).rhs(u)
}

/// Largest stable step `cfl * dv^2 / k_max`.
pub fn cfl_step(cfl: f64, dv: f64, k_max: f64) -> f64 {
    if k_max > 0.0 {
        cfl * dv * dv / k_max
    } else {
        f64::INFINITY
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LandauConfig {
    pub t_end: f64,
    pub cfl_factor: f64,
    /// Upper bound on the step regardless of the CFL estimate.
    pub dt_max: f64,
    /// States are recorded at every multiple of this interval; steps are
    /// shortened to land on record times.
    pub record_interval: f64,
    pub blowup_factor: f64,
}

impl Default for LandauConfig {
    fn default() -> Self {
        Self { t_end: 0.5, cfl_factor: DEFAULT_CFL, dt_max: f64::INFINITY, record_interval: 0.025, blowup_factor: BLOWUP_FACTOR }
    }
}

impl LandauConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && !v.is_nan() {
                Ok(())
            } else {
                Err(Error::Config(format!("{name} must be positive, got {v}")))
            }
        };
        positive("t_end", self.t_end)?;
        positive("cfl_factor", self.cfl_factor)?;
        positive("dt_max", self.dt_max)?;
        positive("record_interval", self.record_interval)?;
        positive("blowup_factor", self.blowup_factor)?;
        if !self.t_end.is_finite() {
            return Err(Error::Config("t_end must be finite".into()));
        }
        Ok(())
    }
}

pub(crate) fn abort(time: f64, reason: String, state: &ScalarField, partial: &Trajectory) -> Error {
    Error::Abort { time, reason, snapshot: Some(Box::new(state.clone())), partial: Some(Box::new(partial.clone())) }
}

pub(crate) fn guard(t: f64, u: &ScalarField, initial_sup: f64, factor: f64, partial: &Trajectory) -> Result<()> {
    if !u.is_finite() {
        return Err(abort(t, "non-finite state".into(), u, partial));
    }
    let sup = u.max_abs();
    if sup > factor * initial_sup.max(f64::MIN_POSITIVE) {
        return Err(abort(t, format!("sup norm {sup:e} exceeds {factor}x the initial value {initial_sup:e}"), u, partial));
    }
    Ok(())
}

/// Integrates from `u0` with classical RK4 and a CFL step re-estimated from
/// `K[u]` at the start of every step.
pub fn run_landau(engine: &SpectralEngine, spec: &CutoffSpec, config: &LandauConfig, u0: &ScalarField) -> Result<Trajectory> {
    config.validate()?;
    if engine.grid() != u0.grid() {
        return Err(Error::GridMismatch);
    }
    let setup = Instant::now();
    let mut op = LandauOperator::new(engine, spec);
    let mut traj = Trajectory::start(u0);
    traj.info.setup_seconds = setup.elapsed().as_secs_f64();
    let stepping = Instant::now();
    let dv = engine.grid().dv();
    let initial_sup = u0.max_abs();
    let n_records = (config.t_end / config.record_interval - 1e-9).ceil().max(1.0) as usize;
    let mut u = u0.clone();
    let mut t = 0.0;
    for r in 1..=n_records {
        let t_rec = (r as f64 * config.record_interval).min(config.t_end);
        loop {
            let (k1, k_max) = op.rhs_with_bound(&u)?;
            let remaining = t_rec - t;
            let mut dt = cfl_step(config.cfl_factor, dv, k_max).min(config.dt_max);
            let last = dt >= remaining * (1.0 - 1e-12);
            if last {
                dt = remaining;
            } else if dt > 0.5 * remaining {
                // two near-equal steps instead of a long one and a sliver
                dt = 0.5 * remaining;
            }
            let mut stage = u.clone();
            stage.axpy(0.5 * dt, &k1);
            let k2 = op.rhs(&stage)?;
            stage = u.clone();
            stage.axpy(0.5 * dt, &k2);
            let k3 = op.rhs(&stage)?;
            stage = u.clone();
            stage.axpy(dt, &k3);
            let k4 = op.rhs(&stage)?;
            let vals = u.values_mut();
            for i in 0..vals.len() {
                vals[i] += dt / 6.0 * (k1.values()[i] + 2.0 * k2.values()[i] + 2.0 * k3.values()[i] + k4.values()[i]);
            }
            t = if last { t_rec } else { t + dt };
            traj.info.note_step(dt);
            guard(t, &u, initial_sup, config.blowup_factor, &traj)?;
            let m = traj.log_step(t, &u);
            if last {
                traj.record(t, &u, m);
                break;
            }
        }
    }
    traj.info.stepping_seconds = stepping.elapsed().as_secs_f64();
    Ok(traj)
}
