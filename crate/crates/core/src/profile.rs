//! Time profile `b(t, r) = e^{-tr}/r^2 + t/r - 1/r^2` of the boundary layer.
//!
//! `b(0, r) = 0`, `∂_t b = (1 - e^{-tr})/r` and `∂_tt b = e^{-tr}`.

use crate::kernels::KernelError;

/// Below this value of `t r` the closed form loses digits to cancellation.
pub const TAYLOR_THRESHOLD: f64 = 1e-4;

pub fn b_profile(t: f64, r: f64) -> Result<f64, KernelError> {
    if !(r > 0.0) || !r.is_finite() {
        return Err(KernelError::Domain { what: "rate", value: r });
    }
    if !(t >= 0.0) || !t.is_finite() {
        return Err(KernelError::Domain { what: "time", value: t });
    }
    Ok(b_profile_unchecked(t, r))
}

#[inline]
pub fn b_profile_unchecked(t: f64, r: f64) -> f64 {
    let x = t * r;
    if x < TAYLOR_THRESHOLD {
        t * t * (0.5 - x / 6.0 + x * x / 24.0 - x * x * x / 120.0)
    } else {
        // (e^{-x} - 1 + x) / r^2
        (libm::expm1(-x) + x) / (r * r)
    }
}

/// `∂_t b(t, r)`.
#[inline]
pub fn b_profile_dt(t: f64, r: f64) -> f64 {
    -libm::expm1(-t * r) / r
}

/// `∂_tt b(t, r)`.
#[inline]
pub fn b_profile_dtt(t: f64, r: f64) -> f64 {
    libm::exp(-t * r)
}
