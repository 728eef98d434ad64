//! Run configuration: a strict TOML schema with defaults and parse-time
//! validation of every solver precondition.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use memkin_core::CutoffSpec;
use serde::{Deserialize, Serialize};

use crate::diagnostics::{strictly_decreasing, SweepSetup};
use crate::error::{Error, Result};
use crate::field::Maxwellian;
use crate::grid::VelocityGrid;
use crate::memory::{HistoryMode, MemoryConfig, DEFAULT_MAX_WINDOW, MAX_T_END};
use crate::norms::{Weight, MAX_NORM_ORDER};
use crate::perturbation::PerturbationSpec;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    Memory,
    Landau,
    Converge,
    KernelCheck,
    Stationarity,
}

impl Scenario {
    pub const ALL: [Scenario; 5] = [Scenario::Memory, Scenario::Landau, Scenario::Converge, Scenario::KernelCheck, Scenario::Stationarity];

    pub fn name(self) -> &'static str {
        match self {
            Scenario::Memory => "memory",
            Scenario::Landau => "landau",
            Scenario::Converge => "converge",
            Scenario::KernelCheck => "kernel-check",
            Scenario::Stationarity => "stationarity",
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Scenario::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown scenario {s:?}")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub n: usize,
    #[serde(rename = "L")]
    pub half_width: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self { n: 32, half_width: 8.0 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaxwellianConfig {
    pub variance: f64,
    pub mass: f64,
}

impl Default for MaxwellianConfig {
    fn default() -> Self {
        Self { variance: 1.0, mass: 1.0 }
    }
}

/// Time-averaged weighted norm reported for each trajectory.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NormRequest {
    /// Decay rate `A`.
    pub decay: f64,
    #[serde(default)]
    pub order: usize,
    #[serde(default = "default_weight")]
    pub weight: Weight,
}

fn default_weight() -> Weight {
    Weight::Lambda
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct KernelCheckConfig {
    pub samples: usize,
    /// Lags `tau |w|` at which the closed-form memory kernel is compared
    /// with its Fourier-integral oracle.
    pub scaled_lags: Vec<f64>,
    /// Laplace variables `[Re z, Im z]`.
    pub laplace_points: Vec<[f64; 2]>,
    pub t_factor: f64,
}

impl Default for KernelCheckConfig {
    fn default() -> Self {
        Self {
            samples: 12,
            scaled_lags: vec![0.0, 0.1, 0.5, 1.0, 2.0, 5.0, 10.0],
            laplace_points: vec![[0.5, 0.0], [1.0, 1.0], [2.0, -3.0], [5.0, 0.5]],
            t_factor: 40.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimulationConfig {
    pub scenario: Option<Scenario>,
    pub grid: GridConfig,
    pub kappa: f64,
    pub eps: f64,
    pub eps_list: Vec<f64>,
    /// Memory step; derived from `record_interval` when absent.
    pub dt: Option<f64>,
    pub cfl_factor: f64,
    /// Final time `delta1`.
    pub t_end: f64,
    /// Perturbation size `delta2`.
    pub delta2: f64,
    pub maxwellian: MaxwellianConfig,
    pub perturbation: PerturbationSpec,
    /// Steps between records when `dt` is given.
    pub record_stride: Option<usize>,
    pub record_interval: f64,
    pub mode: HistoryMode,
    pub tail_tol: f64,
    pub max_window: usize,
    /// Memory scenario: rerun with the other history mode and report the
    /// deviation.
    pub cross_check: bool,
    /// Converge scenario: repeat the largest eps with `(2n, 2L)`.
    pub l_doubling: bool,
    pub norm: Option<NormRequest>,
    pub kernel_check: KernelCheckConfig,
    pub out: Option<PathBuf>,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        Self {
            scenario: None,
            grid: GridConfig::default(),
            kappa: 0.25,
            eps: 0.1,
            eps_list: vec![0.2, 0.1, 0.05],
            dt: None,
            cfl_factor: crate::landau::DEFAULT_CFL,
            t_end: 0.25,
            delta2: 0.05,
            maxwellian: MaxwellianConfig::default(),
            perturbation: PerturbationSpec::default(),
            record_stride: None,
            record_interval: 0.025,
            mode: HistoryMode::Windowed,
            tail_tol: 1e-10,
            max_window: DEFAULT_MAX_WINDOW,
            cross_check: false,
            l_doubling: true,
            norm: None,
            kernel_check: KernelCheckConfig::default(),
            out: None,
        }
    }
}

/// Parses and validates a TOML document; unknown keys are errors.
pub fn parse_config(text: &str) -> Result<SimulationConfig> {
    let config: SimulationConfig = toml::from_str(text).map_err(|e| Error::Config(e.message().to_string()))?;
    config.validate()?;
    Ok(config)
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::Config(format!("{name} must be positive and finite, got {v}")))
    }
}

impl SimulationConfig {
    pub fn for_scenario(scenario: Scenario) -> Self {
        Self { scenario: Some(scenario), ..Self::default() }
    }

    pub fn velocity_grid(&self) -> Result<VelocityGrid> {
        VelocityGrid::new(self.grid.n, self.grid.half_width)
    }

    pub fn cutoff(&self) -> Result<CutoffSpec> {
        Ok(CutoffSpec::new(self.kappa)?)
    }

    pub fn maxwellian(&self) -> Result<Maxwellian> {
        Maxwellian::new(self.maxwellian.variance, self.maxwellian.mass)
    }

    pub fn validate(&self) -> Result<()> {
        self.velocity_grid()?;
        self.cutoff()?;
        self.maxwellian()?;
        self.perturbation.validate()?;
        positive("eps", self.eps)?;
        positive("t_end", self.t_end)?;
        positive("cfl_factor", self.cfl_factor)?;
        positive("record_interval", self.record_interval)?;
        positive("tail_tol", self.tail_tol)?;
        positive("kernel_check.t_factor", self.kernel_check.t_factor)?;
        if self.t_end > MAX_T_END {
            return Err(Error::Config(format!(
                "t_end = {} exceeds {MAX_T_END}: existence and convergence are only guaranteed on short horizons",
                self.t_end
            )));
        }
        if !(self.delta2 >= 0.0) || !self.delta2.is_finite() {
            return Err(Error::Config(format!("delta2 must be nonnegative: the perturbation has to stay a nonnegative density, got {}", self.delta2)));
        }
        if self.eps_list.is_empty() || self.eps_list.iter().any(|e| !(*e > 0.0 && e.is_finite())) {
            return Err(Error::Config("eps_list must be a nonempty list of positive numbers".into()));
        }
        if !strictly_decreasing(&self.eps_list) {
            return Err(Error::Config(format!("eps_list must be strictly decreasing, got {:?}", self.eps_list)));
        }
        if let Some(dt) = self.dt {
            positive("dt", dt)?;
            let smallest = match self.scenario {
                Some(Scenario::Converge | Scenario::Stationarity) => *self.eps_list.last().unwrap(),
                _ => self.eps,
            };
            if dt > 0.25 * smallest {
                return Err(Error::Config(format!(
                    "dt = {dt} exceeds eps/4 = {}: the memory kernel varies on the time scale eps and must be resolved",
                    0.25 * smallest
                )));
            }
            self.memory_config(self.eps, 1.0, 0.0)?.steps()?;
        }
        if self.record_stride == Some(0) {
            return Err(Error::Config("record_stride must be at least 1".into()));
        }
        if let Some(norm) = self.norm {
            if !(norm.decay >= 1.0) {
                return Err(Error::Config(format!("norm.decay = {}: the time-weighted norms require A >= 1", norm.decay)));
            }
            if norm.order > MAX_NORM_ORDER {
                return Err(Error::Config(format!("norm.order must be at most {MAX_NORM_ORDER}, got {}", norm.order)));
            }
        }
        if self.kernel_check.t_factor < 20.0 {
            return Err(Error::Config(format!(
                "kernel_check.t_factor = {} must be >= 20 for the neglected tail e^-T to be negligible",
                self.kernel_check.t_factor
            )));
        }
        if self.kernel_check.samples < 10 {
            return Err(Error::Config(format!("kernel_check.samples must be at least 10, got {}", self.kernel_check.samples)));
        }
        if self.kernel_check.laplace_points.iter().any(|z| !(z[0] > 0.0) || !z[1].is_finite()) {
            return Err(Error::Config("kernel_check.laplace_points need Re z > 0".into()));
        }
        if self.kernel_check.scaled_lags.iter().any(|t| !(*t >= 0.0) || !t.is_finite()) {
            return Err(Error::Config("kernel_check.scaled_lags must be nonnegative".into()));
        }
        Ok(())
    }

    /// Memory-solver configuration for one eps; `k_max` bounds the diffusion
    /// matrix and only matters when `dt` is derived.
    pub fn memory_config(&self, eps: f64, dv: f64, k_max: f64) -> Result<MemoryConfig> {
        let base = match self.dt {
            Some(dt) => MemoryConfig { dt, record_stride: self.record_stride.unwrap_or(1), cfl_factor: self.cfl_factor, ..MemoryConfig::new(eps, self.t_end) },
            None => MemoryConfig::with_record_interval(eps, self.t_end, self.record_interval, self.cfl_factor, dv, k_max)?,
        };
        Ok(MemoryConfig { mode: self.mode, tail_tol: self.tail_tol, max_window: self.max_window, ..base })
    }

    pub fn landau_config(&self) -> crate::landau::LandauConfig {
        crate::landau::LandauConfig {
            t_end: self.t_end,
            cfl_factor: self.cfl_factor,
            record_interval: self.record_interval,
            ..Default::default()
        }
    }

    pub fn sweep(&self) -> SweepSetup {
        SweepSetup {
            eps_list: self.eps_list.clone(),
            t_end: self.t_end,
            record_interval: self.record_interval,
            tail_tol: self.tail_tol,
            mode: self.mode,
            cfl_factor: self.cfl_factor,
            max_window: self.max_window,
            fixed_step: self.dt.map(|dt| (dt, self.record_stride.unwrap_or(1))),
        }
    }
}
