//! Real-valued samples on a [`VelocityGrid`].

use std::f64::consts::PI;

use memkin_core::SymMat3;

use crate::error::{Error, Result};
use crate::grid::VelocityGrid;

#[derive(Clone, Debug, PartialEq)]
pub struct ScalarField {
    grid: VelocityGrid,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn zeros(grid: VelocityGrid) -> Self {
        Self { grid, values: vec![0.0; grid.len()] }
    }

    /// Wraps raw values; errors on a length mismatch or a non-finite entry.
    pub fn from_values(grid: VelocityGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch);
        }
        if let Some((index, &value)) = values.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(Error::NonFiniteSample { index, point: grid.point(index), value });
        }
        Ok(Self { grid, values })
    }

    pub(crate) fn from_values_unchecked(grid: VelocityGrid, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        Self { grid, values }
    }

    pub fn grid(&self) -> &VelocityGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `self + s * other`.
    pub fn axpy(&mut self, s: f64, other: &ScalarField) {
        for (a, b) in self.values.iter_mut().zip(&other.values) {
            *a += s * b;
        }
    }

    pub fn scaled(&self, s: f64) -> ScalarField {
        Self { grid: self.grid, values: self.values.iter().map(|v| v * s).collect() }
    }

    pub fn sub(&self, other: &ScalarField) -> Result<ScalarField> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        Ok(Self { grid: self.grid, values: self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect() })
    }

    pub fn max_abs_diff(&self, other: &ScalarField) -> f64 {
        self.values.iter().zip(&other.values).fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }
}

/// Samples `f` at every node. Non-finite samples are reported with their node.
pub fn sample(grid: &VelocityGrid, f: impl Fn([f64; 3]) -> f64) -> Result<ScalarField> {
    let values: Vec<f64> = (0..grid.len()).map(|i| f(grid.point(i))).collect();
    ScalarField::from_values(*grid, values)
}

#[derive(Clone, Debug, PartialEq)]
pub struct VectorField {
    grid: VelocityGrid,
    pub comps: [Vec<f64>; 3],
}

impl VectorField {
    pub fn zeros(grid: VelocityGrid) -> Self {
        let z = vec![0.0; grid.len()];
        Self { grid, comps: [z.clone(), z.clone(), z] }
    }

    pub fn from_comps(grid: VelocityGrid, comps: [Vec<f64>; 3]) -> Self {
        debug_assert!(comps.iter().all(|c| c.len() == grid.len()));
        Self { grid, comps }
    }

    pub fn grid(&self) -> &VelocityGrid {
        &self.grid
    }

    pub fn at(&self, idx: usize) -> [f64; 3] {
        [self.comps[0][idx], self.comps[1][idx], self.comps[2][idx]]
    }

    pub fn max_abs(&self) -> f64 {
        self.comps.iter().flatten().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn axpy(&mut self, s: f64, other: &VectorField) {
        for (a, b) in self.comps.iter_mut().zip(&other.comps) {
            for (x, y) in a.iter_mut().zip(b) {
                *x += s * y;
            }
        }
    }
}

/// Six component fields of a symmetric 3x3 tensor, ordered as
/// [`memkin_core::symmat::COMPONENTS`].
#[derive(Clone, Debug, PartialEq)]
pub struct SymTensorField {
    grid: VelocityGrid,
    pub comps: [Vec<f64>; 6],
}

impl SymTensorField {
    pub fn from_comps(grid: VelocityGrid, comps: [Vec<f64>; 6]) -> Self {
        debug_assert!(comps.iter().all(|c| c.len() == grid.len()));
        Self { grid, comps }
    }

    pub fn grid(&self) -> &VelocityGrid {
        &self.grid
    }

    pub fn at(&self, idx: usize) -> SymMat3<f64> {
        SymMat3::from_fn(|i, j| self.comps[memkin_core::symmat::component_index(i, j)][idx])
    }

    pub fn max_abs(&self) -> f64 {
        self.comps.iter().flatten().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// `m(v) = mass (2 pi sigma^2)^{-3/2} exp(-|v|^2 / (2 sigma^2))`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Maxwellian {
    pub variance: f64,
    pub mass: f64,
}

impl Default for Maxwellian {
    fn default() -> Self {
        Self { variance: 1.0, mass: 1.0 }
    }
}

impl Maxwellian {
    pub fn new(variance: f64, mass: f64) -> Result<Self> {
        if !(variance > 0.0) || !(mass > 0.0) || !variance.is_finite() || !mass.is_finite() {
            return Err(Error::Config(format!("Maxwellian needs positive variance and mass, got ({variance}, {mass})")));
        }
        Ok(Self { variance, mass })
    }

    pub fn value(&self, v: [f64; 3]) -> f64 {
        let r2 = v[0] * v[0] + v[1] * v[1] + v[2] * v[2];
        self.mass * (2.0 * PI * self.variance).powf(-1.5) * (-0.5 * r2 / self.variance).exp()
    }

    /// `∇m = -v m / sigma^2`.
    pub fn gradient(&self, v: [f64; 3]) -> [f64; 3] {
        let m = self.value(v) / self.variance;
        [-v[0] * m, -v[1] * m, -v[2] * m]
    }

    pub fn sample(&self, grid: &VelocityGrid) -> ScalarField {
        let values = (0..grid.len()).map(|i| self.value(grid.point(i))).collect();
        ScalarField::from_values_unchecked(*grid, values)
    }

    pub fn sample_gradient(&self, grid: &VelocityGrid) -> VectorField {
        let mut out = VectorField::zeros(*grid);
        for idx in 0..grid.len() {
            let g = self.gradient(grid.point(idx));
            for (c, gv) in out.comps.iter_mut().zip(g) {
                c[idx] = gv;
            }
        }
        out
    }
}
