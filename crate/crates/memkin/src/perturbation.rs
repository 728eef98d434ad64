//! Perturbations `v0` of the Maxwellian start, sums of Gaussian bumps.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{sample, Maxwellian, ScalarField};
use crate::grid::VelocityGrid;

/// `amplitude * exp(-|v - center|^2 / width^2)`
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaussianBump {
    #[serde(default = "unit")]
    pub amplitude: f64,
    #[serde(default)]
    pub center: [f64; 3],
    #[serde(default = "unit")]
    pub width: f64,
}

fn unit() -> f64 {
    1.0
}

impl GaussianBump {
    pub fn value(&self, v: [f64; 3]) -> f64 {
        let d2: f64 = (0..3).map(|i| (v[i] - self.center[i]).powi(2)).sum();
        self.amplitude * (-d2 / (self.width * self.width)).exp()
    }

    /// `sup_v value(v) e^{|v|/2}`, attained on the ray through the center at
    /// `|v| = |center| + width^2 / 4`.
    pub fn envelope(&self) -> f64 {
        let c = self.center.iter().map(|x| x * x).sum::<f64>().sqrt();
        self.amplitude * (0.5 * c + self.width * self.width / 16.0).exp()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PerturbationSpec {
    pub bumps: Vec<GaussianBump>,
}

impl Default for PerturbationSpec {
    /// `exp(-|v - (1, 0, 0)|^2)`
    fn default() -> Self {
        Self { bumps: vec![GaussianBump { amplitude: 1.0, center: [1.0, 0.0, 0.0], width: 1.0 }] }
    }
}

impl PerturbationSpec {
    /// `exp(-|v|^2 / width^2)`
    pub fn isotropic(width: f64) -> Self {
        Self { bumps: vec![GaussianBump { amplitude: 1.0, center: [0.0; 3], width }] }
    }

    /// Rejects anything that is not a nonnegative function with Gaussian
    /// decay.
    pub fn validate(&self) -> Result<()> {
        for (k, b) in self.bumps.iter().enumerate() {
            if !(b.amplitude >= 0.0) || !b.amplitude.is_finite() {
                return Err(Error::Config(format!(
                    "perturbation bump {k} has amplitude {}: the perturbation must be nonnegative",
                    b.amplitude
                )));
            }
            if !(b.width > 0.0) || !b.width.is_finite() {
                return Err(Error::Config(format!("perturbation bump {k} has width {}, expected a positive number", b.width)));
            }
            if b.center.iter().any(|c| !c.is_finite()) {
                return Err(Error::Config(format!("perturbation bump {k} has a non-finite center")));
            }
        }
        Ok(())
    }

    pub fn value(&self, v: [f64; 3]) -> f64 {
        self.bumps.iter().map(|b| b.value(v)).sum()
    }

    /// Upper bound on `sup_v v0(v) e^{|v|/2}`.
    pub fn envelope_bound(&self) -> f64 {
        self.bumps.iter().map(GaussianBump::envelope).sum()
    }
}

pub fn default_perturbation(spec: &PerturbationSpec, grid: &VelocityGrid) -> Result<ScalarField> {
    spec.validate()?;
    sample(grid, |v| spec.value(v))
}

/// `max_grid v0(v) e^{|v|/2}`
pub fn grid_envelope(v0: &ScalarField) -> f64 {
    let g = v0.grid();
    v0.values()
        .iter()
        .enumerate()
        .map(|(i, u)| {
            let v = g.point(i);
            u.abs() * (0.5 * (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()).exp()
        })
        .fold(0.0, f64::max)
}

/// `m + delta2 * v0`
pub fn perturbed_maxwellian(grid: &VelocityGrid, maxwellian: &Maxwellian, delta2: f64, spec: &PerturbationSpec) -> Result<ScalarField> {
    if !(delta2 >= 0.0) || !delta2.is_finite() {
        return Err(Error::Config(format!("delta2 must be a nonnegative number, got {delta2}")));
    }
    let mut u = maxwellian.sample(grid);
    if delta2 > 0.0 {
        u.axpy(delta2, &default_perturbation(spec, grid)?);
    } else {
        spec.validate()?;
    }
    Ok(u)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn default_satisfies_decay_bound() {
        let spec = PerturbationSpec::default();
        for (n, l) in [(16, 8.0), (32, 8.0), (48, 16.0)] {
            let g = VelocityGrid::new(n, l).unwrap();
            let v0 = default_perturbation(&spec, &g).unwrap();
            let on_grid = grid_envelope(&v0);
            assert!(on_grid <= spec.envelope_bound() * (1.0 + 1e-12));
            assert!(on_grid <= 25.0);
        }
        assert!((spec.envelope_bound() - (0.5f64 + 1.0 / 16.0).exp()).abs() < 1e-15);
        assert_eq!(spec.value([1.0, 0.0, 0.0]), 1.0);
    }

    #[test]
    fn zero_perturbation_is_maxwellian() {
        let g = VelocityGrid::new(16, 8.0).unwrap();
        let m = Maxwellian::default();
        assert_eq!(perturbed_maxwellian(&g, &m, 0.0, &PerturbationSpec::default()).unwrap(), m.sample(&g));
    }

    #[test]
    fn rejects_negative_specs() {
        let g = VelocityGrid::new(8, 4.0).unwrap();
        let neg = PerturbationSpec { bumps: vec![GaussianBump { amplitude: -0.1, center: [0.0; 3], width: 1.0 }] };
        assert!(default_perturbation(&neg, &g).is_err());
        assert!(perturbed_maxwellian(&g, &Maxwellian::default(), 0.0, &neg).is_err());
        let flat = PerturbationSpec { bumps: vec![GaussianBump { width: 0.0, ..GaussianBump::default_bump() }] };
        assert!(flat.validate().is_err());
        assert!(perturbed_maxwellian(&g, &Maxwellian::default(), -0.05, &PerturbationSpec::default()).is_err());
    }

    impl GaussianBump {
        fn default_bump() -> Self {
            PerturbationSpec::default().bumps[0]
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn envelope_bounds_the_weighted_supremum(
            a in 0.0f64..3.0,
            c in prop::array::uniform3(-2.0f64..2.0),
            w in 0.3f64..2.5,
            v in prop::array::uniform3(-10.0f64..10.0),
        ) {
            let b = GaussianBump { amplitude: a, center: c, width: w };
            let r = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
            prop_assert!(b.value(v) * (0.5 * r).exp() <= b.envelope() * (1.0 + 1e-12));
            prop_assert!(b.value(v) >= 0.0);
        }
    }
}
