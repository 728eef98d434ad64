//! Adaptive Gauss-Kronrod (7/15 point) quadrature.

use core::fmt;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
// Gauss weights for XGK[1], XGK[3], XGK[5], XGK[7]
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

const MAX_DEPTH: u32 = 48;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadratureError {
    /// Error estimate reached when the subdivision limit was hit.
    pub achieved: f64,
    pub requested: f64,
}

impl fmt::Display for QuadratureError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "quadrature did not converge: error estimate {:e} > tolerance {:e}", self.achieved, self.requested)
    }
}

impl core::error::Error for QuadratureError {}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

// Returns (estimate, error), the error floored at the rounding level of
// `∫ |f|`.
fn kronrod(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = WGK[7] * fc;
    let mut g = WG[3] * fc;
    let mut kabs = WGK[7] * fc.abs();
    for j in 0..7 {
        let x = h * XGK[j];
        let (fl, fr) = (f(c - x), f(c + x));
        k += WGK[j] * (fl + fr);
        kabs += WGK[j] * (fl.abs() + fr.abs());
        if j % 2 == 1 {
            g += WG[j / 2] * (fl + fr);
        }
    }
    let err = (k - g).abs() * h.abs();
    let round = 50.0 * f64::EPSILON * kabs * h.abs();
    (k * h, if err <= round { 0.0 } else { err })
}

fn adapt(f: &dyn Fn(f64) -> f64, a: f64, b: f64, whole: (f64, f64), tol: f64, depth: u32, worst: &mut f64) -> Estimate {
    let (value, error) = whole;
    if error <= tol || depth >= MAX_DEPTH || (b - a).abs() <= 1e-15 * a.abs().max(b.abs()) {
        if error > tol {
            *worst = worst.max(error);
        }
        return Estimate { value, error };
    }
    let m = 0.5 * (a + b);
    let left = kronrod(f, a, m);
    let right = kronrod(f, m, b);
    let l = adapt(f, a, m, left, 0.5 * tol, depth + 1, worst);
    let r = adapt(f, m, b, right, 0.5 * tol, depth + 1, worst);
    Estimate { value: l.value + r.value, error: l.error + r.error }
}

/// `∫_a^b f` to `max(abs_tol, rel_tol |∫ f|)`.
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, abs_tol: f64, rel_tol: f64) -> Result<Estimate, QuadratureError> {
    integrate_panels(f, &[a, b], abs_tol, rel_tol)
}

/// Like [`integrate`] over consecutive panels `[p_k, p_{k+1}]`.
///
/// Breakpoints keep the initial sampling from stepping over localized
/// features (peaks, oscillation lobes).
pub fn integrate_panels(
    f: impl Fn(f64) -> f64,
    breakpoints: &[f64],
    abs_tol: f64,
    rel_tol: f64,
) -> Result<Estimate, QuadratureError> {
    let f: &dyn Fn(f64) -> f64 = &f;
    let mut first = [(0.0, 0.0); 1];
    let mut scale = 0.0;
    let panels = breakpoints.len().saturating_sub(1);
    for k in 0..panels {
        let e = kronrod(f, breakpoints[k], breakpoints[k + 1]);
        scale += e.0.abs();
        if k == 0 {
            first[0] = e;
        }
    }
    let tol = abs_tol.max(rel_tol * scale);
    let mut total = Estimate { value: 0.0, error: 0.0 };
    let mut worst: f64 = 0.0;
    let share = tol / panels.max(1) as f64;
    for k in 0..panels {
        let (a, b) = (breakpoints[k], breakpoints[k + 1]);
        let whole = if k == 0 { first[0] } else { kronrod(f, a, b) };
        let e = adapt(f, a, b, whole, share, 0, &mut worst);
        total.value += e.value;
        total.error += e.error;
    }
    if total.error > tol && worst > 0.0 {
        return Err(QuadratureError { achieved: total.error, requested: tol });
    }
    Ok(total)
}
