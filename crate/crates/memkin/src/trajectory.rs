//! Recorded solver output.

use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::norms::{l2_lambda_norm, moments, MomentsRecord};

/// Tolerance for matching record times of two runs.
pub const TIME_MATCH_TOL: f64 = 1e-9;

#[derive(Clone, Debug, Default, PartialEq, serde::Serialize)]
pub struct RunInfo {
    pub steps: usize,
    pub dt_min: f64,
    pub dt_max: f64,
    /// Certified history window and its tail bound (memory runs).
    pub window: Option<usize>,
    pub tail_bound: Option<f64>,
    pub stored_lags: Option<usize>,
    pub setup_seconds: f64,
    pub stepping_seconds: f64,
}

impl RunInfo {
    pub(crate) fn note_step(&mut self, dt: f64) {
        if self.steps == 0 {
            self.dt_min = dt;
            self.dt_max = dt;
        } else {
            self.dt_min = self.dt_min.min(dt);
            self.dt_max = self.dt_max.max(dt);
        }
        self.steps += 1;
    }
}

/// Worst deviations of the conserved moments from their initial values over
/// every accepted step.
#[derive(Clone, Copy, Debug, Default, PartialEq, serde::Serialize)]
pub struct ConservationDrift {
    /// `sup_t |M(t) - M(0)| / |M(0)|`
    pub mass: f64,
    /// `sup_t |p(t) - p(0)| / |p(0)|`, scaled by the thermal momentum
    /// `sqrt(M E)` instead when `|p(0)|` is below a thousandth of it.
    pub momentum: f64,
    /// `sup_t |E(t) - E(0)| / E(0)`
    pub energy: f64,
    /// Largest single-step entropy increase; negative when entropy fell at
    /// every step.
    pub entropy_increase: f64,
}

/// States at record times plus the moments after every step.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<ScalarField>,
    pub moments: Vec<MomentsRecord>,
    /// `(t, moments)` after each accepted step, starting at `t = 0`.
    pub step_log: Vec<(f64, MomentsRecord)>,
    pub info: RunInfo,
}

impl Trajectory {
    pub fn start(u0: &ScalarField) -> Self {
        let m = moments(u0);
        Self { times: vec![0.0], states: vec![u0.clone()], moments: vec![m], step_log: vec![(0.0, m)], info: RunInfo::default() }
    }

    pub(crate) fn log_step(&mut self, t: f64, u: &ScalarField) -> MomentsRecord {
        let m = moments(u);
        self.step_log.push((t, m));
        m
    }

    pub(crate) fn record(&mut self, t: f64, u: &ScalarField, m: MomentsRecord) {
        self.times.push(t);
        self.states.push(u.clone());
        self.moments.push(m);
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn final_state(&self) -> &ScalarField {
        self.states.last().expect("a trajectory holds at least its initial state")
    }

    /// Index of the recorded state at time `t`.
    pub fn find_time(&self, t: f64) -> Option<usize> {
        self.times.iter().position(|s| (s - t).abs() <= TIME_MATCH_TOL * t.abs().max(1.0))
    }

    /// `sup_t ||self(t) - other(t)||_{L^2_lambda}` over the record times of
    /// `self` up to `t_max`; every such time must also be recorded in `other`.
    pub fn sup_lambda_distance(&self, other: &Trajectory, t_max: f64) -> Result<f64> {
        let mut sup: f64 = 0.0;
        for (t, u) in self.times.iter().zip(&self.states) {
            if *t > t_max + TIME_MATCH_TOL {
                break;
            }
            let j = other
                .find_time(*t)
                .ok_or_else(|| Error::Internal(format!("time {t} is not recorded in the reference trajectory")))?;
            sup = sup.max(l2_lambda_norm(&u.sub(&other.states[j])?));
        }
        Ok(sup)
    }

    /// `sup_t ||u(t) - target||_{L^2_lambda}`.
    pub fn sup_lambda_distance_to(&self, target: &ScalarField) -> Result<f64> {
        let mut sup: f64 = 0.0;
        for u in &self.states {
            sup = sup.max(l2_lambda_norm(&u.sub(target)?));
        }
        Ok(sup)
    }

    pub fn conservation_drift(&self) -> ConservationDrift {
        let Some((_, first)) = self.step_log.first() else {
            return ConservationDrift::default();
        };
        let norm = |p: [f64; 3]| p.iter().map(|x| x * x).sum::<f64>().sqrt();
        let thermal = (first.mass.abs() * first.energy.abs()).sqrt();
        let p_scale = if norm(first.momentum) >= 1e-3 * thermal { norm(first.momentum) } else { thermal };
        let mut drift = ConservationDrift { entropy_increase: f64::NEG_INFINITY, ..Default::default() };
        for (_, m) in &self.step_log {
            drift.mass = drift.mass.max((m.mass - first.mass).abs() / first.mass.abs());
            drift.momentum = drift.momentum.max(norm([0, 1, 2].map(|d| m.momentum[d] - first.momentum[d])) / p_scale);
            drift.energy = drift.energy.max((m.energy - first.energy).abs() / first.energy.abs());
        }
        for w in self.step_log.windows(2) {
            drift.entropy_increase = drift.entropy_increase.max(w[1].1.entropy - w[0].1.entropy);
        }
        if self.step_log.len() < 2 {
            drift.entropy_increase = 0.0;
        }
        drift
    }

    /// `sup_t max_v |u(t, v) - target(v)|`.
    pub fn sup_abs_distance_to(&self, target: &ScalarField) -> f64 {
        self.states.iter().map(|u| u.max_abs_diff(target)).fold(0.0, f64::max)
    }
}
