//! Brute-force quadrature evaluations of the kernels from their integral
//! definitions. Slow; used to check the closed forms in [`crate::kernels`].
//!
//! The Fourier-side oracles leave out the cutoff `eta`; callers multiply by
//! `eta(|w|^2)` when comparing.

use core::f64::consts::PI;
use core::fmt;

use num_complex::Complex64;

use crate::bessel::bessel_k0;
use crate::kernels::{memory_kernel_unchecked, norm_sq, CutoffSpec, KernelError};
use crate::quadrature::{integrate, integrate_panels, QuadratureError};
use crate::symmat::SymMat3;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum OracleError {
    Domain(KernelError),
    Quadrature(QuadratureError),
}

impl fmt::Display for OracleError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OracleError::Domain(e) => write!(f, "{e}"),
            OracleError::Quadrature(e) => write!(f, "{e}"),
        }
    }
}

impl core::error::Error for OracleError {}

impl From<QuadratureError> for OracleError {
    fn from(e: QuadratureError) -> Self {
        OracleError::Quadrature(e)
    }
}

const REL_TOL: f64 = 1e-12;

// Maps [0, 1) onto [0, ∞) with r = s / (1 - s).
fn half_line(f: impl Fn(f64) -> f64) -> impl Fn(f64) -> f64 {
    move |s: f64| {
        if s >= 1.0 {
            return 0.0;
        }
        let q = 1.0 - s;
        f(s / q) / (q * q)
    }
}

fn unit_panels<const N: usize>(upper: f64) -> [f64; N] {
    core::array::from_fn(|k| upper * k as f64 / (N - 1) as f64)
}

/// `∫ k⊗k (1 + |k|^2)^{-3} cos(tau k·w) dk` over `R^3`.
///
/// In coordinates aligned with `w` the transverse integral is explicit:
/// the `P_w` block reduces to `∫ pi u^2 / (2 (1+u^2)^2) cos(a u) du` and each
/// transverse direction to `∫ pi / (4 (1+u^2)) cos(a u) du`, `a = tau |w|`.
/// Writing `1/(1+u^2)^p` as a Gaussian superposition turns both cosine
/// integrals into non-oscillatory ones:
///
/// * `∫ cos(a u) / (1+u^2) du = 2 sqrt(pi) ∫_0^∞ exp(-t^2 - a^2/(4t^2)) dt`,
/// * `∫ u^2 cos(a u) / (1+u^2)^2 du = 2 sqrt(pi) ∫_0^∞ (1 - t^2) exp(-t^2 - a^2/(4t^2)) dt`.
pub fn oracle_memory_kernel(tau: f64, w: [f64; 3]) -> Result<SymMat3<f64>, OracleError> {
    if !(tau >= 0.0) || !tau.is_finite() {
        return Err(OracleError::Domain(KernelError::Domain { what: "lag tau", value: tau }));
    }
    let speed = libm::sqrt(norm_sq(w));
    let a = tau * speed;
    let b = 0.25 * a * a;
    let gauss = move |t: f64| if t > 0.0 { libm::exp(-t * t - b / (t * t)) } else { 0.0 };
    let panels: [f64; 61] = unit_panels(30.0);
    let transverse = integrate_panels(gauss, &panels, 0.0, REL_TOL)?;
    let i1 = 2.0 * libm::sqrt(PI) * transverse.value;
    let axial = integrate_panels(move |t| (1.0 - t * t) * gauss(t), &panels, 1e-15 * transverse.value, REL_TOL)?;
    let ip = 2.0 * libm::sqrt(PI) * axial.value;
    if speed == 0.0 {
        return Ok(SymMat3::scaled_identity(0.25 * PI * i1));
    }
    let par = SymMat3::parallel_projection(w);
    let perp = SymMat3::identity() - par;
    Ok(perp * (0.25 * PI * i1) + par * (0.5 * PI * ip))
}

/// Diagonal entry of `∫ k⊗k (1 + |k|^2)^{-3} dk`: `(4 pi / 3) ∫ r^4 (1+r^2)^{-3} dr`.
pub fn oracle_radial_second_moment() -> Result<f64, OracleError> {
    let f = half_line(|r| {
        let s = 1.0 + r * r;
        r * r * r * r / (s * s * s)
    });
    let e = integrate(f, 0.0, 1.0, 0.0, REL_TOL)?;
    Ok(4.0 * PI / 3.0 * e.value)
}

/// `∫_0^∞ e^{-z tau} G(tau, w) dtau` with `G` the closed-form memory kernel.
///
/// Panels split at the zeros of the oscillating factor `e^{-i Im(z) tau}`;
/// the range stops where the exponential tail is below `1e-18` of the
/// kernel's size.
pub fn oracle_laplace(z: Complex64, w: [f64; 3], spec: &CutoffSpec) -> Result<SymMat3<Complex64>, OracleError> {
    if !(z.re > 0.0) || !z.re.is_finite() || !z.im.is_finite() {
        return Err(OracleError::Domain(KernelError::Domain { what: "Re z", value: z.re }));
    }
    let speed = libm::sqrt(norm_sq(w));
    let rate = z.re + speed;
    let mut upper = 1.0 / rate;
    while libm::exp(-rate * upper) * (1.0 + upper * speed) > 1e-18 {
        upper *= 1.25;
    }
    let step = if z.im != 0.0 { (PI / z.im.abs()).min(1.0 / rate) } else { 1.0 / rate };
    let count = libm::ceil(upper / step) as usize;
    let mut out = SymMat3::zero();
    for (k, entry) in out.c.iter_mut().enumerate() {
        let re = |tau: f64| (-z * tau).exp().re * memory_kernel_unchecked(tau, w, spec).c[k];
        let im = |tau: f64| (-z * tau).exp().im * memory_kernel_unchecked(tau, w, spec).c[k];
        let mut acc = Complex64::new(0.0, 0.0);
        for j in 0..count {
            let (a, b) = (j as f64 * step, ((j + 1) as f64 * step).min(upper));
            let r = integrate(re, a, b, 1e-17, REL_TOL)?;
            let i = integrate(im, a, b, 1e-17, REL_TOL)?;
            acc += Complex64::new(r.value, i.value);
        }
        *entry = acc;
    }
    Ok(out)
}

/// Landau diffusion matrix as a plane integral,
/// `pi ∫ k⊗k delta(k·w) (1 + |k|^2)^{-3} dk`, evaluated in polar coordinates
/// on the plane orthogonal to `w`.
pub fn oracle_landau_kernel(w: [f64; 3]) -> Result<SymMat3<f64>, OracleError> {
    let speed2 = norm_sq(w);
    if !(speed2 > 0.0) || !speed2.is_finite() {
        return Err(OracleError::Domain(KernelError::Domain { what: "|w|", value: libm::sqrt(speed2) }));
    }
    let speed = libm::sqrt(speed2);
    let (e1, e2) = orthonormal_pair(w);
    let radial = half_line(|r| {
        let s = 1.0 + r * r;
        r * r * r / (s * s * s)
    });
    let r3 = integrate(radial, 0.0, 1.0, 0.0, REL_TOL)?.value;
    const ANGLES: usize = 64;
    let mut acc = SymMat3::ZERO;
    for j in 0..ANGLES {
        let th = 2.0 * PI * j as f64 / ANGLES as f64;
        let (s, c) = libm::sincos(th);
        let d = [c * e1[0] + s * e2[0], c * e1[1] + s * e2[1], c * e1[2] + s * e2[2]];
        acc += SymMat3::from_fn(|i, k| d[i] * d[k]);
    }
    Ok(acc * (PI * r3 * 2.0 * PI / ANGLES as f64 / speed))
}

fn orthonormal_pair(w: [f64; 3]) -> ([f64; 3], [f64; 3]) {
    let n = libm::sqrt(norm_sq(w));
    let u = [w[0] / n, w[1] / n, w[2] / n];
    let seed = if u[0].abs() < 0.6 { [1.0, 0.0, 0.0] } else { [0.0, 1.0, 0.0] };
    let dot = seed[0] * u[0] + seed[1] * u[1] + seed[2] * u[2];
    let mut e1 = [seed[0] - dot * u[0], seed[1] - dot * u[1], seed[2] - dot * u[2]];
    let m = libm::sqrt(norm_sq(e1));
    e1 = [e1[0] / m, e1[1] / m, e1[2] / m];
    let e2 = [u[1] * e1[2] - u[2] * e1[1], u[2] * e1[0] - u[0] * e1[2], u[0] * e1[1] - u[1] * e1[0]];
    (e1, e2)
}

/// Radial Fourier transform of `sqrt(2/pi) K0(r)` in the unitary convention,
/// `(2 pi)^{-3/2} (4 pi / k) ∫ r sin(k r) phi(r) dr`.
pub fn oracle_potential_ft(k: f64) -> Result<f64, OracleError> {
    if !(k >= 0.0) || !k.is_finite() {
        return Err(OracleError::Domain(KernelError::Domain { what: "wavenumber", value: k }));
    }
    let phi = |r: f64| if r > 0.0 { libm::sqrt(2.0 / PI) * bessel_k0(r) } else { 0.0 };
    const UPPER: f64 = 60.0;
    let norm = libm::pow(2.0 * PI, -1.5) * 4.0 * PI;
    // panels: a refined start for the log singularity, then half-periods
    let half_period = if k > 0.0 { (PI / k).min(1.0) } else { 1.0 };
    let mut bps = [0.0f64; 512];
    let mut len = 0;
    for p in [0.0, 1e-6, 1e-4, 1e-2] {
        bps[len] = p;
        len += 1;
    }
    let mut x = half_period;
    while x < UPPER && len < bps.len() - 1 {
        if x > bps[len - 1] {
            bps[len] = x;
            len += 1;
        }
        x += half_period;
    }
    bps[len] = UPPER;
    len += 1;
    let value = if k == 0.0 {
        integrate_panels(|r| r * r * phi(r), &bps[..len], 1e-14, REL_TOL)?.value
    } else {
        integrate_panels(|r| r * libm::sin(k * r) * phi(r), &bps[..len], 1e-14, REL_TOL)?.value / k
    };
    Ok(norm * value)
}
