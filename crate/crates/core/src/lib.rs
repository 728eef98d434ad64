//! Closed-form kernels for a velocity-space kinetic model with memory.
//!
//! Everything here is allocation-free scalar math: the interaction
//! potential, the smooth cutoff, the time-domain memory kernel with its
//! Laplace transform and Markovian limit, the boundary-layer time profile,
//! scalar time-trace transforms and the history-window selection rule.
//! With the `oracles` feature the crate also carries slow brute-force
//! quadrature evaluations of the same kernels.

#![cfg_attr(not(test), no_std)]

pub mod bessel;
pub mod kernels;
pub mod profile;
pub mod symmat;
pub mod trace;

#[cfg(any(test, feature = "oracles"))]
pub mod oracles;
#[cfg(any(test, feature = "oracles"))]
pub mod quadrature;

pub use kernels::{
    boundary_layer_forcing_kernel, boundary_layer_kernel, cutoff, integrate_memory_kernel, landau_kernel, laplace_kernel,
    memory_kernel, memory_kernel_unchecked, memory_tail_bound, memory_window, potential, potential_ft, CutoffSpec,
    KernelError, MemoryWindow, KERNEL_STRENGTH,
};
pub use num_complex::Complex64;
pub use profile::b_profile;
pub use symmat::SymMat3;
