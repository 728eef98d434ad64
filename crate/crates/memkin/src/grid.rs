//! Uniform velocity lattice on `[-L, L)^3` and its zero-padded companion.

use crate::error::{Error, Result};

pub const MIN_POINTS: usize = 8;

/// `n` points per axis at `v_i = -L + i dv`, `dv = 2L / n`.
///
/// Linear convolutions run on the padded lattice with `2n` points per axis.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VelocityGrid {
    n: usize,
    half_width: f64,
    dv: f64,
}

impl VelocityGrid {
    pub fn new(n: usize, half_width: f64) -> Result<Self> {
        if n < MIN_POINTS || n % 2 != 0 {
            return Err(Error::Config(format!("grid needs an even number of points per axis >= {MIN_POINTS}, got {n}")));
        }
        if !(half_width > 0.0) || !half_width.is_finite() {
            return Err(Error::Config(format!("grid half-width must be positive, got {half_width}")));
        }
        Ok(Self { n, half_width, dv: 2.0 * half_width / n as f64 })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn n_pad(&self) -> usize {
        2 * self.n
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn dv(&self) -> f64 {
        self.dv
    }

    /// Volume element `dv^3`.
    pub fn cell_volume(&self) -> f64 {
        self.dv * self.dv * self.dv
    }

    pub fn len(&self) -> usize {
        self.n * self.n * self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Coordinate of node `i` along any axis.
    #[inline]
    pub fn coord(&self, i: usize) -> f64 {
        -self.half_width + i as f64 * self.dv
    }

    /// Flat index, third axis fastest.
    #[inline]
    pub fn index(&self, a: usize, b: usize, c: usize) -> usize {
        (a * self.n + b) * self.n + c
    }

    #[inline]
    pub fn unflatten(&self, idx: usize) -> [usize; 3] {
        let c = idx % self.n;
        let b = (idx / self.n) % self.n;
        [idx / (self.n * self.n), b, c]
    }

    #[inline]
    pub fn point(&self, idx: usize) -> [f64; 3] {
        let [a, b, c] = self.unflatten(idx);
        [self.coord(a), self.coord(b), self.coord(c)]
    }

    /// Angular wavenumber of FFT bin `k` on a periodic lattice of `len` points
    /// with spacing `dv`. The Nyquist bin maps to zero.
    pub fn wavenumber(k: usize, len: usize, dv: f64) -> f64 {
        let shift = if 2 * k < len {
            k as f64
        } else if 2 * k == len {
            0.0
        } else {
            k as f64 - len as f64
        };
        2.0 * std::f64::consts::PI * shift / (len as f64 * dv)
    }
}

/// Alias matching the constructor naming used by the harness.
pub fn build_grid(n: usize, half_width: f64) -> Result<VelocityGrid> {
    VelocityGrid::new(n, half_width)
}
