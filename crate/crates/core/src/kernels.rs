//! Closed-form interaction kernels.
//!
//! The interaction potential is `phi(x) = sqrt(2/pi) K0(|x|)`, whose Fourier
//! transform is `(1 + |k|^2)^{-3/2}`. With this potential the collision
//! kernels have explicit forms:
//!
//! * time-domain memory kernel
//!   `G(tau, w) = (pi^2/4) eta(|w|^2) e^{-tau|w|} (I - tau|w| P_w)`,
//! * its Laplace transform
//!   `(pi^2/4) eta(|w|^2) [ P_w^perp / (z + |w|) + z P_w / (z + |w|)^2 ]`,
//! * the Landau diffusion matrix `a(w) = (pi^2 / (4|w|)) eta(|w|^2) P_w^perp`,
//!   which is both the `z = 0` value of the Laplace transform and the
//!   time integral of `G`.
//!
//! `P_w = ŵ ⊗ ŵ` and `P_w^perp = I - P_w`. The memory kernel is not positive
//! semidefinite once `tau|w| > 1`: the `P_w` eigenvalue `1 - tau|w|` turns
//! negative.

use core::f64::consts::PI;
use core::fmt;

use num_complex::Complex64;

use crate::bessel::bessel_k0;
use crate::symmat::SymMat3;

/// Overall strength `pi^2 / 4` shared by every kernel.
pub const KERNEL_STRENGTH: f64 = PI * PI / 4.0;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum KernelError {
    /// The cutoff threshold must lie in `(0, 1/2)`.
    InvalidKappa(f64),
    /// Argument outside the operation's domain.
    Domain { what: &'static str, value: f64 },
}

impl fmt::Display for KernelError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KernelError::InvalidKappa(k) => write!(f, "cutoff threshold kappa = {k} outside (0, 1/2)"),
            KernelError::Domain { what, value } => write!(f, "{what} out of domain: {value}"),
        }
    }
}

impl core::error::Error for KernelError {}

/// Smooth cutoff removing small relative velocities.
///
/// The induced function `eta(r)` vanishes for `|r| <= kappa/2`, equals one for
/// `|r| >= kappa` and interpolates with the C^∞ partition bump
/// `psi(s) = E(s) / (E(s) + E(1 - s))`, `E(s) = exp(-1/s)`. Kernels evaluate
/// `eta` at `|w|^2`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CutoffSpec {
    kappa: f64,
}

impl CutoffSpec {
    pub const DEFAULT_KAPPA: f64 = 0.25;

    pub fn new(kappa: f64) -> Result<Self, KernelError> {
        if kappa.is_finite() && kappa > 0.0 && kappa < 0.5 {
            Ok(Self { kappa })
        } else {
            Err(KernelError::InvalidKappa(kappa))
        }
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn eta(&self, r: f64) -> f64 {
        cutoff(r, self)
    }

    /// Smallest `|w|` at which `eta(|w|^2)` is nonzero: `sqrt(kappa / 2)`.
    pub fn min_speed(&self) -> f64 {
        libm::sqrt(0.5 * self.kappa)
    }

    /// True when `w` lies in the dead zone `|w|^2 <= kappa/2`.
    pub fn in_dead_zone(&self, w: [f64; 3]) -> bool {
        norm_sq(w) <= 0.5 * self.kappa
    }
}

impl Default for CutoffSpec {
    fn default() -> Self {
        Self { kappa: Self::DEFAULT_KAPPA }
    }
}

#[inline]
fn bump_e(s: f64) -> f64 {
    if s > 0.0 {
        libm::exp(-1.0 / s)
    } else {
        0.0
    }
}

/// The cutoff function `eta(r)` with values in `[0, 1]`.
pub fn cutoff(r: f64, spec: &CutoffSpec) -> f64 {
    let r = r.abs();
    let half = 0.5 * spec.kappa;
    if r <= half {
        return 0.0;
    }
    if r >= spec.kappa {
        return 1.0;
    }
    let s = (r - half) / half;
    let a = bump_e(s);
    let b = bump_e(1.0 - s);
    a / (a + b)
}

/// `phi(r) = sqrt(2/pi) K0(r)` for `r > 0`.
pub fn potential(r: f64) -> Result<f64, KernelError> {
    if !(r > 0.0) || !r.is_finite() {
        return Err(KernelError::Domain { what: "distance", value: r });
    }
    Ok(libm::sqrt(2.0 / PI) * bessel_k0(r))
}

/// `phi_hat(k) = (1 + k^2)^{-3/2}`.
pub fn potential_ft(k: f64) -> f64 {
    let s = 1.0 + k * k;
    1.0 / (s * libm::sqrt(s))
}

#[inline]
pub(crate) fn norm_sq(w: [f64; 3]) -> f64 {
    w[0] * w[0] + w[1] * w[1] + w[2] * w[2]
}

/// Laplace transform of the memory kernel, `(M1 + M2)(z, w) eta(|w|^2)`.
///
/// Returns the zero matrix inside the cutoff dead zone (which contains `w = 0`).
pub fn laplace_kernel(z: Complex64, w: [f64; 3], spec: &CutoffSpec) -> Result<SymMat3<Complex64>, KernelError> {
    if !(z.re >= 0.0) || !z.im.is_finite() || !z.re.is_finite() {
        return Err(KernelError::Domain { what: "Re z", value: z.re });
    }
    let r2 = norm_sq(w);
    let eta = spec.eta(r2);
    if eta == 0.0 {
        return Ok(SymMat3::zero());
    }
    let r = libm::sqrt(r2);
    let s = z + r;
    let perp_coeff = s.inv() * (KERNEL_STRENGTH * eta);
    let par_coeff = z / (s * s) * (KERNEL_STRENGTH * eta);
    let par = SymMat3::parallel_projection(w);
    Ok(SymMat3::from_fn(|i, j| {
        let p = par.get(i, j);
        let delta = if i == j { 1.0 } else { 0.0 };
        perp_coeff * (delta - p) + par_coeff * p
    }))
}

/// Time-domain memory kernel `G_eta(tau, w)`.
pub fn memory_kernel(tau: f64, w: [f64; 3], spec: &CutoffSpec) -> Result<SymMat3<f64>, KernelError> {
    if !(tau >= 0.0) || !tau.is_finite() {
        return Err(KernelError::Domain { what: "lag tau", value: tau });
    }
    Ok(memory_kernel_unchecked(tau, w, spec))
}

/// [`memory_kernel`] without the lag check, for hot loops with `tau >= 0`.
#[inline]
pub fn memory_kernel_unchecked(tau: f64, w: [f64; 3], spec: &CutoffSpec) -> SymMat3<f64> {
    let r2 = norm_sq(w);
    let eta = spec.eta(r2);
    if eta == 0.0 {
        return SymMat3::ZERO;
    }
    let r = libm::sqrt(r2);
    let x = tau * r;
    let decay = KERNEL_STRENGTH * eta * libm::exp(-x);
    // decay * (I - x ŵŵ)
    let f = decay * x / r2;
    SymMat3::from_fn(|i, j| {
        let delta = if i == j { decay } else { 0.0 };
        delta - f * w[i] * w[j]
    })
}

/// Landau diffusion matrix `a_eta(w)`. Total: zero in the dead zone.
pub fn landau_kernel(w: [f64; 3], spec: &CutoffSpec) -> SymMat3<f64> {
    let r2 = norm_sq(w);
    let eta = spec.eta(r2);
    if eta == 0.0 {
        return SymMat3::ZERO;
    }
    let r = libm::sqrt(r2);
    let s = KERNEL_STRENGTH * eta / r;
    SymMat3::from_fn(|i, j| {
        let delta = if i == j { 1.0 } else { 0.0 };
        s * (delta - w[i] * w[j] / r2)
    })
}

/// Kernel of the boundary-layer flux,
/// `(pi^2/4) (b(t, |w|/eps) / eps) eta(|w|^2) P_w^perp`.
pub fn boundary_layer_kernel(t: f64, eps: f64, w: [f64; 3], spec: &CutoffSpec) -> SymMat3<f64> {
    let r2 = norm_sq(w);
    let eta = spec.eta(r2);
    if eta == 0.0 {
        return SymMat3::ZERO;
    }
    let r = libm::sqrt(r2);
    let b = crate::profile::b_profile_unchecked(t, r / eps);
    let s = KERNEL_STRENGTH * eta * b / eps;
    SymMat3::from_fn(|i, j| {
        let delta = if i == j { 1.0 } else { 0.0 };
        s * (delta - w[i] * w[j] / r2)
    })
}

/// Kernel on the right-hand side of the boundary-layer ODE,
/// `(pi^2/4) (e^{-t|w|/eps} / eps) eta(|w|^2) P_w^perp`.
pub fn boundary_layer_forcing_kernel(t: f64, eps: f64, w: [f64; 3], spec: &CutoffSpec) -> SymMat3<f64> {
    let r2 = norm_sq(w);
    let eta = spec.eta(r2);
    if eta == 0.0 {
        return SymMat3::ZERO;
    }
    let r = libm::sqrt(r2);
    let s = KERNEL_STRENGTH * eta * libm::exp(-t * r / eps) / eps;
    SymMat3::from_fn(|i, j| {
        let delta = if i == j { 1.0 } else { 0.0 };
        s * (delta - w[i] * w[j] / r2)
    })
}

/// Certified bound on the history tail `∫_T^∞ |G(tau, w)| dtau` for every
/// `|w| >= speed`: `(pi^2/4)(1 + T speed) e^{-T speed} / speed`.
pub fn memory_tail_bound(lag: f64, speed: f64) -> f64 {
    let x = lag * speed;
    KERNEL_STRENGTH * (1.0 + x) * libm::exp(-x) / speed
}

/// History window for lags `tau_k = k * lag_step`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MemoryWindow {
    /// Number of lag steps `W`: lags `0..=W` are kept.
    pub lags: usize,
    /// Tail bound at `tau_W`.
    pub tail_bound: f64,
}

/// Minimal `W` with `memory_tail_bound(W * lag_step, min_speed) <= tail_tol`.
///
/// The bound is monotone in the lag, so the crossing lag is bracketed and
/// bisected, then rounded up to the lag grid.
pub fn memory_window(lag_step: f64, tail_tol: f64, spec: &CutoffSpec) -> Result<MemoryWindow, KernelError> {
    if !(lag_step > 0.0) || !lag_step.is_finite() {
        return Err(KernelError::Domain { what: "lag step", value: lag_step });
    }
    if !(tail_tol > 0.0) || !tail_tol.is_finite() {
        return Err(KernelError::Domain { what: "tail tolerance", value: tail_tol });
    }
    let speed = spec.min_speed();
    let bound = |tau: f64| memory_tail_bound(tau, speed);
    if bound(0.0) <= tail_tol {
        return Ok(MemoryWindow { lags: 0, tail_bound: bound(0.0) });
    }
    let mut hi = 1.0 / speed;
    while bound(hi) > tail_tol {
        hi *= 2.0;
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if bound(mid) > tail_tol {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-14 * hi {
            break;
        }
    }
    let mut lags = libm::ceil(hi / lag_step) as usize;
    while lags > 0 && bound((lags - 1) as f64 * lag_step) <= tail_tol {
        lags -= 1;
    }
    while bound(lags as f64 * lag_step) > tail_tol {
        lags += 1;
    }
    Ok(MemoryWindow { lags, tail_bound: bound(lags as f64 * lag_step) })
}

/// `∫_0^upper G(tau, w) dtau` by composite Simpson with `intervals` (rounded up
/// to even) subintervals.
pub fn integrate_memory_kernel(w: [f64; 3], spec: &CutoffSpec, upper: f64, intervals: usize) -> SymMat3<f64> {
    let n = intervals.max(2).div_ceil(2) * 2;
    let h = upper / n as f64;
    let mut acc = memory_kernel_unchecked(0.0, w, spec) + memory_kernel_unchecked(upper, w, spec);
    for k in 1..n {
        let weight = if k % 2 == 1 { 4.0 } else { 2.0 };
        acc += memory_kernel_unchecked(k as f64 * h, w, spec) * weight;
    }
    acc * (h / 3.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symmat::relative_frobenius_error;
    use proptest::prelude::*;

    fn spec() -> CutoffSpec {
        CutoffSpec::default()
    }

    #[test]
    fn cutoff_spec_validation() {
        assert!(CutoffSpec::new(0.25).is_ok());
        assert!(CutoffSpec::new(0.0).is_err());
        assert!(CutoffSpec::new(0.5).is_err());
        assert!(CutoffSpec::new(f64::NAN).is_err());
    }

    #[test]
    fn cutoff_regions() {
        let s = spec();
        let k = s.kappa();
        assert_eq!(cutoff(k / 4.0, &s), 0.0);
        assert_eq!(cutoff(2.0 * k, &s), 1.0);
        let mid = cutoff(0.75 * k, &s);
        assert!(mid > 0.0 && mid < 1.0);
        assert!((mid - 0.5).abs() < 1e-15, "bump is symmetric about the midpoint");
    }

    #[test]
    fn cutoff_is_flat_at_junctions() {
        let s = spec();
        let k = s.kappa();
        for x in [0.5 * k, k] {
            for h in [1e-3, 1e-4] {
                let d = (cutoff(x + h, &s) - cutoff(x - h, &s)) / (2.0 * h);
                assert!(d.abs() < 1e-8, "eta'({x}) ~ {d:e} with h = {h}");
            }
        }
    }

    #[test]
    fn cutoff_monotone_on_transition() {
        let s = spec();
        let k = s.kappa();
        let mut prev = 0.0;
        for i in 0..=1000 {
            let r = 0.5 * k + 0.5 * k * i as f64 / 1000.0;
            let v = cutoff(r, &s);
            assert!((0.0..=1.0).contains(&v));
            assert!(v >= prev);
            prev = v;
        }
    }

    #[test]
    fn potential_values() {
        // sqrt(2/pi) K0(1), K0 from a 30-digit reference.
        let phi1 = potential(1.0).unwrap();
        assert!((phi1 - 0.335_928_898_992_960_68).abs() < 1e-12);
        assert!(potential(10.0).unwrap() < potential(5.0).unwrap());
        assert!(potential(5.0).unwrap() < potential(1.0).unwrap());
        assert!(potential(0.0).is_err());
        assert!(potential(-1.0).is_err());
        // logarithmic blow-up at the origin, exponential decay at infinity
        let ratio = potential(1e-8).unwrap() / potential(1e-4).unwrap();
        assert!((ratio - 2.0).abs() < 0.05);
        let decay = potential(30.0).unwrap() * libm::exp(30.0) * libm::sqrt(30.0);
        assert!((decay - 1.0).abs() < 0.01, "phi(r) ~ e^-r / sqrt(r): {decay}");
    }

    #[test]
    fn potential_ft_values() {
        assert_eq!(potential_ft(0.0), 1.0);
        assert!((potential_ft(1.0) - 2f64.powf(-1.5)).abs() < 1e-15);
        assert!((potential_ft(3.0) - 10f64.powf(-1.5)).abs() < 1e-15);
    }

    #[test]
    fn laplace_kernel_at_zero_frequency() {
        let m = laplace_kernel(Complex64::new(0.0, 0.0), [1.0, 0.0, 0.0], &spec()).unwrap();
        let want = SymMat3::from_components([0.0, 0.0, 0.0, KERNEL_STRENGTH, 0.0, KERNEL_STRENGTH]);
        assert!(relative_frobenius_error(&m.real_part(), &want) < 1e-15);
        assert_eq!(m.imag_part(), SymMat3::ZERO);
    }

    #[test]
    fn laplace_kernel_dead_zone_and_domain() {
        let s = spec();
        for z in [Complex64::new(0.0, 0.0), Complex64::new(1.0, 2.0)] {
            let m = laplace_kernel(z, [0.3, 0.0, 0.0], &s).unwrap();
            assert_eq!(m, SymMat3::zero());
            assert_eq!(laplace_kernel(z, [0.0; 3], &s).unwrap(), SymMat3::zero());
        }
        assert!(laplace_kernel(Complex64::new(-0.1, 0.0), [1.0, 0.0, 0.0], &s).is_err());
    }

    #[test]
    fn memory_kernel_values() {
        let s = spec();
        let g0 = memory_kernel(0.0, [0.2, 1.0, -0.7], &s).unwrap();
        assert!(relative_frobenius_error(&g0, &SymMat3::scaled_identity(KERNEL_STRENGTH)) < 1e-15);

        let g1 = memory_kernel(1.0, [1.0, 0.0, 0.0], &s).unwrap();
        let d = KERNEL_STRENGTH * libm::exp(-1.0);
        let want = SymMat3::from_components([0.0, 0.0, 0.0, d, 0.0, d]);
        assert!(relative_frobenius_error(&g1, &want) < 1e-15);
        assert!((d - 0.907_706_137_913_990_2).abs() < 1e-14);

        let w = [0.0, 2.0, 1.0];
        let r = libm::sqrt(5.0);
        assert!(memory_kernel(50.0 / r, w, &s).unwrap().frobenius_norm() < 1e-18);
        assert!(memory_kernel(-1e-3, w, &s).is_err());
    }

    #[test]
    fn memory_kernel_is_indefinite_past_unit_lag() {
        let w = [0.0, 0.0, 2.0];
        let g = memory_kernel(1.0, w, &spec()).unwrap();
        assert!(g.eigenvalues()[0] < 0.0);
        let g = memory_kernel(0.4, w, &spec()).unwrap();
        assert!(g.eigenvalues()[0] > 0.0);
    }

    #[test]
    fn landau_kernel_values() {
        let s = spec();
        assert_eq!(landau_kernel([0.1, 0.2, 0.1], &s), SymMat3::ZERO);
        assert_eq!(landau_kernel([0.0; 3], &s), SymMat3::ZERO);
        let a = landau_kernel([2.0, 0.0, 0.0], &s);
        let h = PI * PI / 8.0;
        let want = SymMat3::from_components([0.0, 0.0, 0.0, h, 0.0, h]);
        assert!(relative_frobenius_error(&a, &want) < 1e-15);
        assert!((h - 1.233_700_550_136_169_8).abs() < 1e-15);
    }

    #[test]
    fn window_is_minimal() {
        let s = spec();
        let h = 0.025 / 0.1;
        let win = memory_window(h, 1e-10, &s).unwrap();
        let v = s.min_speed();
        assert!(win.tail_bound <= 1e-10);
        assert!(memory_tail_bound((win.lags - 1) as f64 * h, v) > 1e-10);
        // (1 + x) e^{-x} = tol * v * 4 / pi^2 crosses near x = 28.9
        let x = win.lags as f64 * h * v;
        assert!(x > 28.0 && x < 30.0, "x = {x}");
        assert!(memory_window(0.0, 1e-10, &s).is_err());
        assert!(memory_window(0.25, 0.0, &s).is_err());
        assert_eq!(memory_window(0.25, 1e3, &s).unwrap().lags, 0);
    }

    #[test]
    fn kernel_integral_reaches_landau_kernel() {
        let s = spec();
        for w in [[1.0, 0.0, 0.0], [0.5, -0.3, 0.2], [3.0, 1.0, -2.0]] {
            let r = libm::sqrt(norm_sq(w));
            let int = integrate_memory_kernel(w, &s, 40.0 / r, 4000);
            let a = landau_kernel(w, &s);
            assert!(relative_frobenius_error(&int, &a) < 1e-8);
        }
    }

    fn vec3() -> impl Strategy<Value = [f64; 3]> {
        prop::array::uniform3(-6.0f64..6.0)
    }

    proptest! {
        #[test]
        fn landau_kernel_annihilates_w(w in vec3()) {
            let a = landau_kernel(w, &spec());
            let aw = a.mul_vec(w);
            let scale = a.frobenius_norm() * libm::sqrt(norm_sq(w)) + 1.0;
            prop_assert!(aw.iter().all(|x| x.abs() <= 1e-15 * scale));
            let e = a.eigenvalues();
            prop_assert!(e[0] >= -1e-14);
            let r = libm::sqrt(norm_sq(w));
            if r > 0.0 {
                let tr = PI * PI / (2.0 * r) * spec().eta(r * r);
                prop_assert!((a.trace() - tr).abs() <= 1e-13 * tr.max(1.0));
            }
        }

        #[test]
        fn kernels_are_even(w in vec3(), tau in 0.0f64..5.0, zr in 0.0f64..3.0, zi in -3.0f64..3.0) {
            let s = spec();
            let mw = [-w[0], -w[1], -w[2]];
            prop_assert_eq!(memory_kernel(tau, w, &s).unwrap(), memory_kernel(tau, mw, &s).unwrap());
            let z = Complex64::new(zr, zi);
            prop_assert_eq!(laplace_kernel(z, w, &s).unwrap(), laplace_kernel(z, mw, &s).unwrap());
        }

        #[test]
        fn laplace_kernel_psd_for_real_z(w in vec3(), z in 0.0f64..10.0) {
            let m = laplace_kernel(Complex64::new(z, 0.0), w, &spec()).unwrap();
            prop_assert_eq!(m.imag_part(), SymMat3::ZERO);
            prop_assert!(m.real_part().eigenvalues()[0] >= -1e-14);
        }

        #[test]
        fn landau_kernel_is_laplace_at_zero(w in vec3()) {
            let s = spec();
            let a = landau_kernel(w, &s);
            let m = laplace_kernel(Complex64::new(0.0, 0.0), w, &s).unwrap().real_part();
            prop_assert!((a - m).frobenius_norm() <= 1e-14 * (1.0 + a.frobenius_norm()));
        }
    }
}
