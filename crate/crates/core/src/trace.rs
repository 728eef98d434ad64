//! Laplace transforms and discounted energies of sampled scalar time traces.
//!
//! A trace is a list of samples `values[k] = u(times[k])` with increasing
//! times starting at 0. The trace is taken to vanish after its last sample.

use core::f64::consts::PI;

use num_complex::Complex64;

use crate::kernels::KernelError;

fn check_trace(times: &[f64], values: &[f64]) {
    assert_eq!(times.len(), values.len(), "trace times and values differ in length");
}

/// Trapezoid quadrature of `∫ e^{-z t} u(t) dt` over the recorded times.
pub fn laplace_trapezoid(times: &[f64], values: &[f64], z: Complex64) -> Result<Complex64, KernelError> {
    check_re_z(z)?;
    check_trace(times, values);
    let mut acc = Complex64::new(0.0, 0.0);
    for k in 1..times.len() {
        let h = times[k] - times[k - 1];
        let a = (-z * times[k - 1]).exp() * values[k - 1];
        let b = (-z * times[k]).exp() * values[k];
        acc += (a + b) * (0.5 * h);
    }
    Ok(acc)
}

/// Bound on the part of the Laplace integral beyond the last sample `t_end`
/// for a trace bounded by `sup`: `sup e^{-Re z t_end} / Re z`.
pub fn laplace_truncation_bound(sup: f64, re_z: f64, t_end: f64) -> f64 {
    sup * libm::exp(-re_z * t_end) / re_z
}

fn check_re_z(z: Complex64) -> Result<(), KernelError> {
    if z.re > 0.0 && z.re.is_finite() && z.im.is_finite() {
        Ok(())
    } else {
        Err(KernelError::Domain { what: "Re z", value: z.re })
    }
}

// (1 - e^{-x}) / x and (1 - (1 + x) e^{-x}) / x^2
fn segment_moments(x: Complex64) -> (Complex64, Complex64) {
    if x.norm() < 0.1 {
        let mut e1 = Complex64::new(0.0, 0.0);
        let mut e2 = Complex64::new(0.0, 0.0);
        let mut pow = Complex64::new(1.0, 0.0);
        let mut fact = 1.0; // (k + 1)!
        for k in 0..12 {
            let kf = k as f64;
            fact *= kf + 1.0;
            e1 += pow / fact;
            e2 += pow * ((kf + 1.0) / (fact * (kf + 2.0)));
            pow *= -x;
        }
        (e1, e2)
    } else {
        let em = (-x).exp();
        ((Complex64::new(1.0, 0.0) - em) / x, (Complex64::new(1.0, 0.0) - (x + 1.0) * em) / (x * x))
    }
}

/// Exact Laplace transform of the piecewise-linear interpolant of the trace.
pub fn laplace_piecewise_linear(times: &[f64], values: &[f64], z: Complex64) -> Complex64 {
    check_trace(times, values);
    let mut acc = Complex64::new(0.0, 0.0);
    for k in 1..times.len() {
        let h = times[k] - times[k - 1];
        let slope = (values[k] - values[k - 1]) / h;
        let (e1, e2) = segment_moments(z * h);
        let seg = e1 * (values[k - 1] * h) + e2 * (slope * h * h);
        acc += (-z * times[k - 1]).exp() * seg;
    }
    acc
}

/// Trapezoid quadrature of `∫ e^{-A t} u(t) dt`.
pub fn discounted_integral(times: &[f64], values: &[f64], decay: f64) -> f64 {
    check_trace(times, values);
    let mut acc = 0.0;
    for k in 1..times.len() {
        let h = times[k] - times[k - 1];
        acc += 0.5 * h * (libm::exp(-decay * times[k - 1]) * values[k - 1] + libm::exp(-decay * times[k]) * values[k]);
    }
    acc
}

const GAUSS3_NODES: [f64; 3] = [-0.774_596_669_241_483_4, 0.0, 0.774_596_669_241_483_4];
const GAUSS3_WEIGHTS: [f64; 3] = [5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0];

/// Time side of the Parseval identity, `2 pi ∫ e^{-A t} |u(t)|^2 dt`, for the
/// piecewise-linear interpolant.
pub fn time_side_energy(times: &[f64], values: &[f64], decay: f64) -> f64 {
    check_trace(times, values);
    let mut acc = 0.0;
    for k in 1..times.len() {
        let h = times[k] - times[k - 1];
        let mid = 0.5 * (times[k - 1] + times[k]);
        for (x, w) in GAUSS3_NODES.iter().zip(GAUSS3_WEIGHTS) {
            let s = 0.5 * (1.0 + x);
            let u = values[k - 1] + s * (values[k] - values[k - 1]);
            acc += 0.5 * h * w * libm::exp(-decay * (mid + 0.5 * h * x)) * u * u;
        }
    }
    2.0 * PI * acc
}

/// Laplace side of the Parseval identity, `∫ |L u(A/2 + i w)|^2 dw` over the
/// real line.
///
/// Composite Simpson on `[-omega_max, omega_max]` with `intervals` panels,
/// plus the leading `1/w^2` tail `2 (u(0)^2 + e^{-A T} u(T)^2) / omega_max`.
pub fn laplace_side_energy(times: &[f64], values: &[f64], decay: f64, omega_max: f64, intervals: usize) -> f64 {
    check_trace(times, values);
    let n = intervals.max(2).div_ceil(2) * 2;
    let h = 2.0 * omega_max / n as f64;
    let f = |omega: f64| laplace_piecewise_linear(times, values, Complex64::new(0.5 * decay, omega)).norm_sqr();
    // integrand is even in omega
    let mut acc = f(0.0) + f(omega_max);
    let half = n / 2;
    for k in 1..half {
        let weight = if k % 2 == 1 { 4.0 } else { 2.0 };
        acc += weight * f(k as f64 * h);
    }
    let body = 2.0 * acc * h / 3.0;
    let (u0, ut) = match (values.first(), values.last(), times.last()) {
        (Some(&a), Some(&b), Some(&t)) => (a, b * libm::exp(-0.5 * decay * t)),
        _ => (0.0, 0.0),
    };
    body + 2.0 * (u0 * u0 + ut * ut) / omega_max
}
