//! Kinetic moments and exponentially weighted Sobolev norms.

use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::spectral::SpectralEngine;

pub const ENTROPY_FLOOR: f64 = 1e-300;
pub const MAX_NORM_ORDER: usize = 4;

/// Velocity weights of the diagnostic norms.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Weight {
    /// `e^{|v|}`
    Lambda,
    /// `e^{|v|} / (1 + |v|)`
    LambdaTilde,
}

impl Weight {
    pub fn at(self, v: [f64; 3]) -> f64 {
        let r = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        match self {
            Weight::Lambda => r.exp(),
            Weight::LambdaTilde => r.exp() / (1.0 + r),
        }
    }
}

/// All multi-indices with `|alpha| <= order`.
pub fn multi_indices(order: usize) -> Vec<[u32; 3]> {
    let mut out = Vec::new();
    for total in 0..=order as u32 {
        for a in (0..=total).rev() {
            for b in (0..=total - a).rev() {
                out.push([a, b, total - a - b]);
            }
        }
    }
    out
}

fn weighted_sum(field_values: &[f64], weights: &[f64]) -> f64 {
    field_values.iter().zip(weights).map(|(u, w)| w * u * u).sum()
}

fn weight_samples(field: &ScalarField, weight: Weight) -> Vec<f64> {
    let g = field.grid();
    (0..g.len()).map(|i| weight.at(g.point(i))).collect()
}

/// `sqrt(Σ_{|alpha| <= order} Σ_v nu(v) |D^alpha u(v)|^2 dv^3)` with periodic
/// spectral derivatives.
pub fn weighted_sobolev_norm(engine: &SpectralEngine, field: &ScalarField, order: usize, weight: Weight) -> Result<f64> {
    if order > MAX_NORM_ORDER {
        return Err(Error::Config(format!(
            "weighted norms support derivative order <= {MAX_NORM_ORDER}, got {order}: higher spectral derivatives amplify truncation noise"
        )));
    }
    if engine.grid() != field.grid() {
        return Err(Error::GridMismatch);
    }
    let weights = weight_samples(field, weight);
    let mut total = weighted_sum(field.values(), &weights);
    if order > 0 {
        let spectrum = engine.periodic_spectrum(field.values());
        for alpha in multi_indices(order).into_iter().skip(1) {
            total += weighted_sum(&engine.derivative_values(&spectrum, alpha), &weights);
        }
    }
    Ok((total * field.grid().cell_volume()).sqrt())
}

/// Order-zero norm with weight `e^{|v|}`.
pub fn l2_lambda_norm(field: &ScalarField) -> f64 {
    let g = field.grid();
    let s: f64 = field.values().iter().enumerate().map(|(i, u)| Weight::Lambda.at(g.point(i)) * u * u).sum();
    (s * g.cell_volume()).sqrt()
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct MomentsRecord {
    pub mass: f64,
    pub momentum: [f64; 3],
    pub energy: f64,
    pub entropy: f64,
    pub l2_lambda_norm: f64,
}

pub fn moments(field: &ScalarField) -> MomentsRecord {
    let g = field.grid();
    let mut rec = MomentsRecord::default();
    let mut weighted = 0.0;
    for (i, &u) in field.values().iter().enumerate() {
        let v = g.point(i);
        rec.mass += u;
        for d in 0..3 {
            rec.momentum[d] += v[d] * u;
        }
        let r2 = v[0] * v[0] + v[1] * v[1] + v[2] * v[2];
        rec.energy += r2 * u;
        rec.entropy += u * u.max(ENTROPY_FLOOR).ln();
        weighted += r2.sqrt().exp() * u * u;
    }
    let vol = g.cell_volume();
    rec.mass *= vol;
    rec.momentum = rec.momentum.map(|p| p * vol);
    rec.energy *= vol;
    rec.entropy *= vol;
    rec.l2_lambda_norm = (weighted * vol).sqrt();
    rec
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{sample, Maxwellian};
    use crate::grid::VelocityGrid;
    use memkin_core::quadrature::integrate;
    use proptest::prelude::*;

    fn engine(n: usize, l: f64) -> SpectralEngine {
        SpectralEngine::new(VelocityGrid::new(n, l).unwrap())
    }

    #[test]
    fn maxwellian_moments() {
        let e = engine(32, 8.0);
        let g = *e.grid();
        let m = moments(&Maxwellian::default().sample(&g));
        assert!((m.mass - 1.0).abs() < 1e-8);
        assert!((m.energy - 3.0).abs() < 1e-8);
        assert!(m.momentum.iter().all(|p| p.abs() < 1e-8));
        let m2 = moments(&Maxwellian::new(1.0, 2.0).unwrap().sample(&g));
        assert!((m2.mass - 2.0).abs() < 1e-8);
        assert!((m2.energy - 6.0).abs() < 1e-8);
    }

    #[test]
    fn shifted_maxwellian_momentum() {
        let g = VelocityGrid::new(32, 8.0).unwrap();
        let mx = Maxwellian::default();
        for axis in 0..3 {
            let shifted = sample(&g, |v| {
                let mut w = v;
                w[axis] -= g.dv();
                mx.value(w)
            })
            .unwrap();
            let m = moments(&shifted);
            assert!((m.mass - 1.0).abs() < 1e-8);
            assert!((m.momentum[axis] - g.dv() * m.mass).abs() < 1e-8);
        }
    }

    #[test]
    fn entropy_floor_handles_nonpositive_values() {
        let g = VelocityGrid::new(8, 4.0).unwrap();
        let f = sample(&g, |v| if v[0] < 0.0 { -1e-3 } else { 0.0 }).unwrap();
        let m = moments(&f);
        assert!(m.entropy.is_finite());
    }

    #[test]
    fn order_zero_norm_matches_radial_quadrature() {
        // ∫ e^{|v|} m^2 dv = 4 pi ∫ r^2 e^r (2 pi)^{-3} e^{-r^2} dr
        let radial = integrate(|r| r * r * (r - r * r).exp(), 0.0, 40.0, 1e-15, 1e-13).unwrap().value;
        let exact = (4.0 * std::f64::consts::PI * radial / (2.0 * std::f64::consts::PI).powi(3)).sqrt();
        let rel = |n: usize| {
            let e = engine(n, 8.0);
            let f = Maxwellian::default().sample(e.grid());
            let got = weighted_sobolev_norm(&e, &f, 0, Weight::Lambda).unwrap();
            assert_eq!(got, l2_lambda_norm(&f));
            (got - exact).abs() / exact
        };
        // the weight has a kink at the origin, so the lattice sum converges
        // algebraically rather than spectrally
        let coarse = rel(32);
        let fine = rel(64);
        assert!(coarse < 1e-3, "{coarse}");
        assert!(fine < coarse / 8.0, "{fine} vs {coarse}");
        let e = engine(8, 4.0);
        assert!(weighted_sobolev_norm(&e, &ScalarField::zeros(*e.grid()), 5, Weight::Lambda).is_err());
    }

    #[test]
    fn first_order_norm_adds_gradient() {
        let e = engine(32, 8.0);
        let mx = Maxwellian::default();
        let f = mx.sample(e.grid());
        let g = *e.grid();
        let mut exact = 0.0;
        for i in 0..g.len() {
            let v = g.point(i);
            let grad = mx.gradient(v);
            let w = Weight::Lambda.at(v);
            exact += w * (mx.value(v).powi(2) + grad.iter().map(|x| x * x).sum::<f64>());
        }
        let exact = (exact * g.cell_volume()).sqrt();
        let got = weighted_sobolev_norm(&e, &f, 1, Weight::Lambda).unwrap();
        assert!((got - exact).abs() < 1e-8 * exact);
    }

    #[test]
    fn zero_field_norm() {
        let e = engine(8, 4.0);
        let z = ScalarField::zeros(*e.grid());
        for order in 0..=MAX_NORM_ORDER {
            assert_eq!(weighted_sobolev_norm(&e, &z, order, Weight::LambdaTilde).unwrap(), 0.0);
        }
        assert_eq!(multi_indices(4).len(), 35);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]
        #[test]
        fn tilde_weight_is_smaller(c in prop::array::uniform3(-1.0f64..1.0), s in 0.3f64..2.0, order in 0usize..3) {
            let e = engine(8, 4.0);
            let f = sample(e.grid(), |v| (-((v[0] - c[0]).powi(2) + (v[1] - c[1]).powi(2) + (v[2] - c[2]).powi(2)) / s).exp()).unwrap();
            let lam = weighted_sobolev_norm(&e, &f, order, Weight::Lambda).unwrap();
            let tilde = weighted_sobolev_norm(&e, &f, order, Weight::LambdaTilde).unwrap();
            prop_assert!(tilde <= lam);
        }
    }
}
