//! Spectral images of the symmetric-tensor kernels on the padded lattice.

use memkin_core::{landau_kernel, memory_kernel_unchecked, memory_window, Complex64, CutoffSpec, MemoryWindow, SymMat3};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::VelocityGrid;
use crate::spectral::SpectralEngine;

/// Discrete Fourier transform of a real symmetric kernel `K(w)` sampled on
/// the padded difference lattice, scaled by `dv^3`.
///
/// `K(-w) = K(w)`, so every component transform is real. Diagonal
/// components are even in each wavenumber and the `(i, j)` off-diagonal
/// component is odd in `xi_i` and in `xi_j`; only the octant
/// `0 <= k <= n` is stored and the rest follows by reflection.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralMultiplier {
    grid: VelocityGrid,
    half: usize,
    comps: [Vec<f64>; 6],
}

impl SpectralMultiplier {
    pub fn grid(&self) -> &VelocityGrid {
        &self.grid
    }

    pub(crate) fn half(&self) -> usize {
        self.half
    }

    pub(crate) fn comps(&self) -> &[Vec<f64>; 6] {
        &self.comps
    }

    pub fn zero(grid: VelocityGrid) -> Self {
        let half = grid.n() + 1;
        Self { grid, half, comps: std::array::from_fn(|_| vec![0.0; half * half * half]) }
    }

    /// Samples `kernel` at `w = s dv`, `s` in `(-n, n)` per axis, and
    /// transforms. Lattice points with an axis index equal to `n` never enter
    /// a convolution of `n^3` fields and are set to zero.
    pub fn from_kernel(engine: &SpectralEngine, kernel: impl Fn([f64; 3]) -> SymMat3<f64>) -> Self {
        let grid = *engine.grid();
        let n = grid.n();
        let big = grid.n_pad();
        let dv = grid.dv();
        let offset = |m: usize| -> Option<f64> {
            if m < n {
                Some(m as f64 * dv)
            } else if m > n {
                Some((m as f64 - big as f64) * dv)
            } else {
                None
            }
        };
        let mut lanes = [engine.lane(big), engine.lane(big), engine.lane(big)];
        for a in 0..big {
            let Some(wa) = offset(a) else { continue };
            for b in 0..big {
                let Some(wb) = offset(b) else { continue };
                for c in 0..big {
                    let Some(wc) = offset(c) else { continue };
                    let k = kernel([wa, wb, wc]);
                    let idx = (a * big + b) * big + c;
                    for (p, lane) in lanes.iter_mut().enumerate() {
                        lane.data[idx] = Complex64::new(k.c[2 * p], k.c[2 * p + 1]);
                    }
                }
            }
        }
        lanes.par_iter_mut().for_each(|lane| engine.fft3_full(lane, big, false));
        let half = n + 1;
        let vol = grid.cell_volume();
        let mut comps: [Vec<f64>; 6] = std::array::from_fn(|_| vec![0.0; half * half * half]);
        for a in 0..half {
            for b in 0..half {
                for c in 0..half {
                    let o = (a * half + b) * half + c;
                    let idx = (a * big + b) * big + c;
                    for (p, lane) in lanes.iter().enumerate() {
                        comps[2 * p][o] = lane.data[idx].re * vol;
                        comps[2 * p + 1][o] = lane.data[idx].im * vol;
                    }
                }
            }
        }
        Self { grid, half, comps }
    }

    /// Component `c` at padded bin `k`, with the reflection signs applied.
    pub fn lookup(&self, engine: &SpectralEngine, c: usize, k: [usize; 3]) -> f64 {
        let (oa, ra) = engine.octant_index(k[0]);
        let (ob, rb) = engine.octant_index(k[1]);
        let (oc, rc) = engine.octant_index(k[2]);
        let v = self.comps[c][(oa * self.half + ob) * self.half + oc];
        let flip = match c {
            1 => ra != rb,
            2 => ra != rc,
            4 => rb != rc,
            _ => false,
        };
        if flip {
            -v
        } else {
            v
        }
    }

    /// The multiplier matrix at padded bin `k`.
    pub fn matrix(&self, engine: &SpectralEngine, k: [usize; 3]) -> SymMat3<f64> {
        SymMat3::from_components(std::array::from_fn(|c| self.lookup(engine, c, k)))
    }

    /// Largest Frobenius norm over all bins.
    pub fn max_frobenius(&self) -> f64 {
        let h3 = self.half * self.half * self.half;
        (0..h3)
            .map(|o| SymMat3::from_components(std::array::from_fn(|c| self.comps[c][o])).frobenius_norm())
            .fold(0.0, f64::max)
    }

    pub fn bytes(&self) -> usize {
        6 * self.comps[0].len() * std::mem::size_of::<f64>()
    }
}

pub fn build_landau_multiplier(engine: &SpectralEngine, spec: &CutoffSpec) -> SpectralMultiplier {
    SpectralMultiplier::from_kernel(engine, |w| landau_kernel(w, spec))
}

/// Memory-kernel multipliers at lags `tau_k = k dt / eps`.
#[derive(Clone, Debug)]
pub struct MemoryMultiplierTable {
    lag_step: f64,
    window: MemoryWindow,
    multipliers: Vec<SpectralMultiplier>,
}

impl MemoryMultiplierTable {
    pub fn lag_step(&self) -> f64 {
        self.lag_step
    }

    /// Certified window `W` (may exceed the number of stored lags).
    pub fn window(&self) -> usize {
        self.window.lags
    }

    pub fn tail_bound(&self) -> f64 {
        self.window.tail_bound
    }

    /// Number of stored lags (`0..len()`).
    pub fn len(&self) -> usize {
        self.multipliers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.multipliers.is_empty()
    }

    pub fn lags(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.len()).map(|k| k as f64 * self.lag_step)
    }

    pub fn multiplier(&self, lag: usize) -> &SpectralMultiplier {
        &self.multipliers[lag]
    }

    pub fn bytes(&self) -> usize {
        self.multipliers.iter().map(|m| m.bytes()).sum()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TableRequest {
    pub eps: f64,
    pub dt: f64,
    pub tail_tol: f64,
    /// Largest lag index any caller will request; `None` means `W`.
    pub horizon: Option<usize>,
    /// Store at most `W + 1` lags even if the horizon is longer.
    pub truncate_to_window: bool,
    /// Upper limit on the certified window `W`.
    pub max_window: usize,
}

pub fn build_memory_table(engine: &SpectralEngine, spec: &CutoffSpec, req: TableRequest) -> Result<MemoryMultiplierTable> {
    let TableRequest { eps, dt, tail_tol, horizon, truncate_to_window, max_window } = req;
    for (name, v) in [("eps", eps), ("dt", dt), ("tail_tol", tail_tol)] {
        if !(v > 0.0) || !v.is_finite() {
            return Err(Error::Config(format!("{name} must be positive, got {v}")));
        }
    }
    if dt > 0.25 * eps {
        return Err(Error::Config(format!(
            "dt = {dt} exceeds eps/4 = {}: the memory kernel decays on the time scale eps and must be resolved",
            0.25 * eps
        )));
    }
    let lag_step = dt / eps;
    let window = memory_window(lag_step, tail_tol, spec)?;
    if truncate_to_window && window.lags > max_window {
        return Err(Error::Config(format!(
            "history window of {} lags exceeds the cap of {max_window}; use a larger dt or a looser tail_tol",
            window.lags
        )));
    }
    let stored = match horizon {
        None => window.lags,
        Some(h) if truncate_to_window => h.min(window.lags),
        Some(h) => h,
    } + 1;
    let multipliers = (0..stored)
        .into_par_iter()
        .map(|k| {
            let tau = k as f64 * lag_step;
            SpectralMultiplier::from_kernel(engine, |w| memory_kernel_unchecked(tau, w, spec))
        })
        .collect();
    Ok(MemoryMultiplierTable { lag_step, window, multipliers })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{sample, ScalarField};
    use memkin_core::KERNEL_STRENGTH;

    fn setup(n: usize, l: f64) -> (SpectralEngine, CutoffSpec) {
        (SpectralEngine::new(VelocityGrid::new(n, l).unwrap()), CutoffSpec::default())
    }

    fn lattice_sum(engine: &SpectralEngine, kernel: impl Fn([f64; 3]) -> SymMat3<f64>) -> SymMat3<f64> {
        let g = engine.grid();
        let n = g.n() as i64;
        let mut acc = SymMat3::ZERO;
        for a in -(n - 1)..n {
            for b in -(n - 1)..n {
                for c in -(n - 1)..n {
                    acc += kernel([a as f64 * g.dv(), b as f64 * g.dv(), c as f64 * g.dv()]);
                }
            }
        }
        acc * g.cell_volume()
    }

    #[test]
    fn zero_frequency_is_lattice_sum() {
        let (e, s) = setup(8, 4.0);
        let m = build_landau_multiplier(&e, &s);
        let direct = lattice_sum(&e, |w| landau_kernel(w, &s));
        let got = m.matrix(&e, [0, 0, 0]);
        assert!((got - direct).frobenius_norm() < 1e-12 * direct.frobenius_norm());
        assert!(got.eigenvalues()[0] >= 0.0);
    }

    #[test]
    fn octant_matches_full_complex_transform() {
        let (e, s) = setup(8, 4.0);
        let g = *e.grid();
        let big = g.n_pad();
        let tau = 0.7;
        let m = SpectralMultiplier::from_kernel(&e, |w| memory_kernel_unchecked(tau, w, &s));
        // brute-force DFT of one off-diagonal component at a few bins
        let n = g.n() as i64;
        for k in [[1usize, 2, 3], [13, 2, 9], [15, 15, 1], [8, 3, 12]] {
            for c in [0usize, 1, 4] {
                let mut acc = Complex64::new(0.0, 0.0);
                for a in -(n - 1)..n {
                    for b in -(n - 1)..n {
                        for cc in -(n - 1)..n {
                            let w = [a as f64 * g.dv(), b as f64 * g.dv(), cc as f64 * g.dv()];
                            let phase = -2.0 * std::f64::consts::PI
                                * (k[0] as f64 * a as f64 + k[1] as f64 * b as f64 + k[2] as f64 * cc as f64)
                                / big as f64;
                            acc += Complex64::from_polar(memory_kernel_unchecked(tau, w, &s).c[c], phase);
                        }
                    }
                }
                acc *= g.cell_volume();
                assert!(acc.im.abs() < 1e-10, "transform must be real");
                assert!((m.lookup(&e, c, k) - acc.re).abs() < 1e-10, "bin {k:?} comp {c}");
                // Hermitian: value at -k is the conjugate (here: equal)
                let neg = [(big - k[0]) % big, (big - k[1]) % big, (big - k[2]) % big];
                assert!((m.lookup(&e, c, neg) - m.lookup(&e, c, k)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn delta_field_reproduces_kernel() {
        let (e, s) = setup(8, 4.0);
        let g = *e.grid();
        let m = build_landau_multiplier(&e, &s);
        let star = g.index(3, 5, 4);
        let mut values = vec![0.0; g.len()];
        values[star] = 1.0 / g.cell_volume();
        let delta = ScalarField::from_values(g, values).unwrap();
        let vs = g.point(star);
        for c in 0..6 {
            let conv = e.convolve(&m, c, &delta).unwrap();
            for idx in [0, 17, 200, 333, 511] {
                let v = g.point(idx);
                let k = landau_kernel([v[0] - vs[0], v[1] - vs[1], v[2] - vs[2]], &s);
                assert!((conv.values()[idx] - k.c[c]).abs() < 1e-12);
            }
        }
        let zero = SpectralMultiplier::zero(g);
        assert_eq!(e.convolve(&zero, 0, &delta).unwrap().max_abs(), 0.0);
    }

    #[test]
    fn convolution_matches_direct_sum() {
        let (e, s) = setup(16, 6.0);
        let g = *e.grid();
        let m = build_landau_multiplier(&e, &s);
        let f = sample(&g, |v| (-(v[0] - 0.5).powi(2) - 0.5 * v[1] * v[1] - 0.8 * v[2] * v[2]).exp() * (1.0 + 0.3 * v[1].sin()))
            .unwrap();
        let convs: Vec<_> = (0..6).map(|c| e.convolve(&m, c, &f).unwrap()).collect();
        for idx in [g.index(8, 8, 8), g.index(1, 2, 3), g.index(15, 0, 7), g.index(9, 11, 4), g.index(4, 12, 10)] {
            let v = g.point(idx);
            let mut direct = SymMat3::ZERO;
            for j in 0..g.len() {
                let p = g.point(j);
                direct += landau_kernel([v[0] - p[0], v[1] - p[1], v[2] - p[2]], &s) * f.values()[j];
            }
            direct = direct * g.cell_volume();
            for c in 0..6 {
                let got = convs[c].values()[idx];
                assert!((got - direct.c[c]).abs() <= 1e-10 * direct.frobenius_norm().max(1e-300));
            }
        }
    }

    #[test]
    fn memory_table_window_and_lags() {
        let (e, s) = setup(8, 4.0);
        let req = TableRequest { eps: 0.1, dt: 0.025, tail_tol: 1e-10, horizon: Some(5), truncate_to_window: true, max_window: 100_000 };
        let t = build_memory_table(&e, &s, req).unwrap();
        assert_eq!(t.len(), 6);
        assert!((t.lag_step() - 0.25).abs() < 1e-15);
        let w = memkin_core::memory_window(0.25, 1e-10, &s).unwrap();
        assert_eq!(t.window(), w.lags);
        let lag0 = SpectralMultiplier::from_kernel(&e, |w| SymMat3::scaled_identity(KERNEL_STRENGTH * s.eta(w[0] * w[0] + w[1] * w[1] + w[2] * w[2])));
        assert_eq!(t.multiplier(0), &lag0);

        assert!(build_memory_table(&e, &s, TableRequest { dt: 0.03, ..req }).is_err());
        assert!(build_memory_table(&e, &s, TableRequest { max_window: 10, ..req }).is_err());
    }

    #[test]
    fn last_lag_multiplier_is_below_tail_tolerance() {
        let (e, s) = setup(8, 4.0);
        let req = TableRequest { eps: 0.1, dt: 0.025, tail_tol: 1e-10, horizon: None, truncate_to_window: true, max_window: 100_000 };
        let t = build_memory_table(&e, &s, req).unwrap();
        assert_eq!(t.len(), t.window() + 1);
        assert!(t.multiplier(t.len() - 1).max_frobenius() <= 10.0 * 1e-10);
    }
}
