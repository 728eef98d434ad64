//! FFT engine: periodic spectral derivatives on the `n^3` grid and
//! zero-padded linear convolution on the `(2n)^3` lattice.
//!
//! Padded transforms are pruned. The forward transform of an `n^3` block
//! skips lines that are identically zero and the inverse transform only
//! finishes the lines that land in the cropped `n^3` output, so each costs
//! `7 n^2` one-dimensional transforms of length `2n` instead of `12 n^2`.
//!
//! Multipliers carry the volume element `dv^3`; inverse transforms divide
//! by the number of lattice points, so the result of a convolution is the
//! Riemann sum `Σ_{v'} K(v - v') u(v') dv^3`.

use std::sync::Arc;

use memkin_core::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::field::{ScalarField, SymTensorField, VectorField};
use crate::grid::VelocityGrid;
use crate::multiplier::SpectralMultiplier;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Per-lane scratch for one cube transform.
#[derive(Clone, Debug, Default)]
pub struct Lane {
    pub(crate) data: Vec<Complex64>,
    block: Vec<Complex64>,
    scratch: Vec<Complex64>,
}

/// Reusable buffers for [`SpectralEngine::apply_tensor`].
#[derive(Clone, Debug)]
pub struct Workspace {
    lanes: Vec<Lane>,
    outputs: Vec<(Vec<f64>, Vec<f64>)>,
}

impl Workspace {
    fn new(engine: &SpectralEngine) -> Self {
        let big = engine.big;
        let n3 = engine.grid.len();
        let lanes = (0..5)
            .map(|_| Lane {
                data: vec![ZERO; big * big * big],
                block: vec![ZERO; big * big],
                scratch: vec![ZERO; engine.scratch_len()],
            })
            .collect();
        let outputs = (0..5).map(|_| (vec![0.0; n3], vec![0.0; n3])).collect();
        Self { lanes, outputs }
    }
}

/// Padded spectra of a field `u` and of a gradient field `g`, two real
/// fields per complex transform: `u + i g_0` and `g_1 + i g_2`.
#[derive(Clone, Debug, PartialEq)]
pub struct PaddedState {
    packed: [Vec<Complex64>; 2],
}

impl PaddedState {
    pub fn bytes(&self) -> usize {
        2 * self.packed[0].len() * std::mem::size_of::<Complex64>()
    }
}

/// What a tensor multiplier acts on.
#[derive(Clone, Copy, Debug)]
pub enum Contraction<'a> {
    /// A padded field spectrum, contracted with its padded-lattice
    /// derivative `i xi_j û`.
    Gradient(&'a [Complex64]),
    /// A field together with an explicit gradient field. With the periodic
    /// gradient this is the form whose flux brackets cancel exactly under
    /// `v <-> v'`.
    State(&'a PaddedState),
}

/// Real-space response of a symmetric-tensor multiplier `M` to a field:
/// `tensor = M * u` (six components) and `contracted_i = Σ_j M_ij * g_j`.
#[derive(Clone, Debug)]
pub struct TensorResponse {
    pub tensor: SymTensorField,
    pub contracted: VectorField,
}

/// Borrowed form of [`TensorResponse`].
#[derive(Clone, Copy, Debug)]
pub struct TensorView<'w> {
    pub tensor: [&'w [f64]; 6],
    pub contracted: [&'w [f64]; 3],
}

impl TensorView<'_> {
    /// Adds `weight * (T grad - c u)` to `flux`, the bracket that turns a
    /// tensor response into a collision flux.
    pub fn accumulate_bracket(&self, u: &[f64], grad: &[Vec<f64>; 3], weight: f64, flux: &mut [Vec<f64>; 3]) {
        let [t0, t1, t2, t3, t4, t5] = self.tensor;
        let [c0, c1, c2] = self.contracted;
        let [g0, g1, g2] = grad;
        let [f0, f1, f2] = flux;
        for i in 0..u.len() {
            let (x, y, z) = (g0[i], g1[i], g2[i]);
            f0[i] += weight * (t0[i] * x + t1[i] * y + t2[i] * z - c0[i] * u[i]);
            f1[i] += weight * (t1[i] * x + t3[i] * y + t4[i] * z - c1[i] * u[i]);
            f2[i] += weight * (t2[i] * x + t4[i] * y + t5[i] * z - c2[i] * u[i]);
        }
    }
}

pub struct SpectralEngine {
    grid: VelocityGrid,
    big: usize,
    fwd_big: Arc<dyn Fft<f64>>,
    inv_big: Arc<dyn Fft<f64>>,
    fwd_small: Arc<dyn Fft<f64>>,
    inv_small: Arc<dyn Fft<f64>>,
    xi_pad: Vec<f64>,
    xi: Vec<f64>,
    mirror: Vec<usize>,
    reflected: Vec<bool>,
    neg_pad: Vec<usize>,
}

impl std::fmt::Debug for SpectralEngine {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SpectralEngine").field("grid", &self.grid).finish_non_exhaustive()
    }
}

impl SpectralEngine {
    pub fn new(grid: VelocityGrid) -> Self {
        let n = grid.n();
        let big = grid.n_pad();
        let mut planner = FftPlanner::new();
        let dv = grid.dv();
        Self {
            grid,
            big,
            fwd_big: planner.plan_fft_forward(big),
            inv_big: planner.plan_fft_inverse(big),
            fwd_small: planner.plan_fft_forward(n),
            inv_small: planner.plan_fft_inverse(n),
            xi_pad: (0..big).map(|k| VelocityGrid::wavenumber(k, big, dv)).collect(),
            xi: (0..n).map(|k| VelocityGrid::wavenumber(k, n, dv)).collect(),
            mirror: (0..big).map(|k| k.min(big - k)).collect(),
            reflected: (0..big).map(|k| k > n).collect(),
            neg_pad: (0..big).map(|k| (big - k) % big).collect(),
        }
    }

    pub fn grid(&self) -> &VelocityGrid {
        &self.grid
    }

    pub fn workspace(&self) -> Workspace {
        Workspace::new(self)
    }

    pub(crate) fn lane(&self, side: usize) -> Lane {
        Lane {
            data: vec![ZERO; side * side * side],
            block: vec![ZERO; side * side],
            scratch: vec![ZERO; self.scratch_len()],
        }
    }

    fn scratch_len(&self) -> usize {
        [&self.fwd_big, &self.inv_big, &self.fwd_small, &self.inv_small]
            .iter()
            .map(|f| f.get_inplace_scratch_len())
            .max()
            .unwrap_or(0)
    }

    /// Padded wavenumbers, Nyquist bin zeroed.
    #[cfg(test)]
    pub(crate) fn padded_wavenumbers(&self) -> &[f64] {
        &self.xi_pad
    }

    pub(crate) fn octant_index(&self, k: usize) -> (usize, bool) {
        (self.mirror[k], self.reflected[k])
    }

    fn check(&self, grid: &VelocityGrid) -> Result<()> {
        if *grid == self.grid {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }

    /// Full in-place 3D transform of a `side^3` cube.
    pub(crate) fn fft3_full(&self, lane: &mut Lane, side: usize, inverse: bool) {
        let fft = match (side == self.big, inverse) {
            (true, false) => &self.fwd_big,
            (true, true) => &self.inv_big,
            (false, false) => &self.fwd_small,
            (false, true) => &self.inv_small,
        };
        let Lane { data, block, scratch } = lane;
        fft.process_with_scratch(data, scratch);
        for a in 0..side {
            transform_middle_axis(fft.as_ref(), data, block, scratch, side, a, 0..side, 0..side);
        }
        for b in 0..side {
            transform_outer_axis(fft.as_ref(), data, block, scratch, side, b, 0..side, 0..side);
        }
    }

    /// Spectrum of the zero-padded field on the `(2n)^3` lattice.
    pub fn forward_padded(&self, field: &ScalarField) -> Result<Vec<Complex64>> {
        self.check(field.grid())?;
        let mut lane = self.lane(self.big);
        self.forward_padded_into(field.values(), &mut lane);
        Ok(lane.data)
    }

    /// Packs `u` and `gradient` for [`Contraction::State`].
    pub fn padded_state(&self, u: &[f64], gradient: &[Vec<f64>; 3]) -> Result<PaddedState> {
        let n3 = self.grid.len();
        if u.len() != n3 || gradient.iter().any(|g| g.len() != n3) {
            return Err(Error::GridMismatch);
        }
        let mut lanes = [self.lane(self.big), self.lane(self.big)];
        let sources = [(u, &gradient[0]), (&gradient[1][..], &gradient[2])];
        lanes.par_iter_mut().zip(sources).for_each(|(lane, (re, im))| self.forward_padded_pair_into(re, Some(im), lane));
        let [a, b] = lanes;
        Ok(PaddedState { packed: [a.data, b.data] })
    }

    pub(crate) fn forward_padded_into(&self, values: &[f64], lane: &mut Lane) {
        self.forward_padded_pair_into(values, None, lane);
    }

    /// Padded transform of `re + i im`.
    fn forward_padded_pair_into(&self, re: &[f64], im: Option<&[f64]>, lane: &mut Lane) {
        let n = self.grid.n();
        let big = self.big;
        let Lane { data, block, scratch } = lane;
        data.fill(ZERO);
        for a in 0..n {
            for b in 0..n {
                let line = &mut data[(a * big + b) * big..(a * big + b + 1) * big];
                let range = (a * n + b) * n..(a * n + b + 1) * n;
                match im {
                    Some(im) => {
                        for ((d, x), y) in line.iter_mut().zip(&re[range.clone()]).zip(&im[range]) {
                            *d = Complex64::new(*x, *y);
                        }
                    }
                    None => {
                        for (d, x) in line.iter_mut().zip(&re[range]) {
                            *d = Complex64::new(*x, 0.0);
                        }
                    }
                }
                self.fwd_big.process_with_scratch(line, scratch);
            }
        }
        for a in 0..n {
            transform_middle_axis(self.fwd_big.as_ref(), data, block, scratch, big, a, 0..n, 0..big);
        }
        for b in 0..big {
            transform_outer_axis(self.fwd_big.as_ref(), data, block, scratch, big, b, 0..n, 0..big);
        }
    }

    /// Inverse transform of a padded spectrum restricted to the `n^3` crop,
    /// normalized; real and imaginary parts go to `re` and `im`.
    pub(crate) fn inverse_crop_into(&self, lane: &mut Lane, re: &mut [f64], im: &mut [f64]) {
        let n = self.grid.n();
        let big = self.big;
        let Lane { data, block, scratch } = lane;
        for b in 0..big {
            transform_outer_axis(self.inv_big.as_ref(), data, block, scratch, big, b, 0..big, 0..n);
        }
        for a in 0..n {
            transform_middle_axis(self.inv_big.as_ref(), data, block, scratch, big, a, 0..big, 0..n);
        }
        let norm = 1.0 / (big * big * big) as f64;
        for a in 0..n {
            for b in 0..n {
                let line = &mut data[(a * big + b) * big..(a * big + b + 1) * big];
                self.inv_big.process_with_scratch(line, scratch);
                let o = (a * n + b) * n;
                for c in 0..n {
                    re[o + c] = line[c].re * norm;
                    im[o + c] = line[c].im * norm;
                }
            }
        }
    }

    /// Linear convolution of `field` with one component of `mult`.
    pub fn convolve(&self, mult: &SpectralMultiplier, component: usize, field: &ScalarField) -> Result<ScalarField> {
        self.check(field.grid())?;
        self.check(mult.grid())?;
        let mut lane = self.lane(self.big);
        self.forward_padded_into(field.values(), &mut lane);
        let big = self.big;
        for ka in 0..big {
            for kb in 0..big {
                for kc in 0..big {
                    let idx = (ka * big + kb) * big + kc;
                    lane.data[idx] *= mult.lookup(self, component, [ka, kb, kc]);
                }
            }
        }
        let n3 = self.grid.len();
        let (mut re, mut im) = (vec![0.0; n3], vec![0.0; n3]);
        self.inverse_crop_into(&mut lane, &mut re, &mut im);
        Ok(ScalarField::from_values_unchecked(self.grid, re))
    }

    /// Applies a symmetric tensor multiplier to a padded spectrum.
    ///
    /// Nine real outputs are packed pairwise into five complex inverse
    /// transforms, which run in parallel.
    pub fn apply_tensor(&self, mult: &SpectralMultiplier, contraction: Contraction<'_>, ws: &mut Workspace) -> TensorResponse {
        let view = self.apply_tensor_view(mult, contraction, ws);
        TensorResponse {
            tensor: SymTensorField::from_comps(self.grid, view.tensor.map(<[f64]>::to_vec)),
            contracted: VectorField::from_comps(self.grid, view.contracted.map(<[f64]>::to_vec)),
        }
    }

    /// As [`Self::apply_tensor`], borrowing the results from the workspace.
    pub fn apply_tensor_view<'w>(&self, mult: &SpectralMultiplier, contraction: Contraction<'_>, ws: &'w mut Workspace) -> TensorView<'w> {
        let big = self.big;
        let xi = &self.xi_pad;
        let [l0, l1, l2, l3, l4] = &mut ws.lanes[..] else { unreachable!() };
        let (d0, d1, d2, d3, d4) = (&mut l0.data, &mut l1.data, &mut l2.data, &mut l3.data, &mut l4.data);
        let half = mult.half();
        let comps = mult.comps();
        let neg = &self.neg_pad;
        for ka in 0..big {
            let (oa, ra) = self.octant_index(ka);
            for kb in 0..big {
                let (ob, rb) = self.octant_index(kb);
                let row = (ka * big + kb) * big;
                let orow = (oa * half + ob) * half;
                for kc in 0..big {
                    let (oc, rc) = self.octant_index(kc);
                    let o = orow + oc;
                    let idx = row + kc;
                    let (u, g) = match contraction {
                        Contraction::Gradient(spectrum) => {
                            let u = spectrum[idx];
                            let iu = Complex64::new(-u.im, u.re);
                            (u, [iu * xi[ka], iu * xi[kb], iu * xi[kc]])
                        }
                        Contraction::State(state) => {
                            let nidx = (neg[ka] * big + neg[kb]) * big + neg[kc];
                            let [p, q] = &state.packed;
                            let (pz, pn) = (p[idx], p[nidx].conj());
                            let (qz, qn) = (q[idx], q[nidx].conj());
                            (0.5 * (pz + pn), [minus_half_i(pz - pn), 0.5 * (qz + qn), minus_half_i(qz - qn)])
                        }
                    };
                    let s01 = if ra != rb { -1.0 } else { 1.0 };
                    let s02 = if ra != rc { -1.0 } else { 1.0 };
                    let s12 = if rb != rc { -1.0 } else { 1.0 };
                    let m = [comps[0][o], s01 * comps[1][o], s02 * comps[2][o], comps[3][o], s12 * comps[4][o], comps[5][o]];
                    let a: [Complex64; 6] = std::array::from_fn(|c| u * m[c]);
                    let b0 = g[0] * m[0] + g[1] * m[1] + g[2] * m[2];
                    let b1 = g[0] * m[1] + g[1] * m[3] + g[2] * m[4];
                    let b2 = g[0] * m[2] + g[1] * m[4] + g[2] * m[5];
                    d0[idx] = pack(a[0], a[1]);
                    d1[idx] = pack(a[2], a[3]);
                    d2[idx] = pack(a[4], a[5]);
                    d3[idx] = pack(b0, b1);
                    d4[idx] = b2;
                }
            }
        }
        ws.lanes.par_iter_mut().zip(ws.outputs.par_iter_mut()).for_each(|(lane, (re, im))| {
            self.inverse_crop_into(lane, re, im);
        });
        let o = &ws.outputs;
        TensorView {
            tensor: [&o[0].0, &o[0].1, &o[1].0, &o[1].1, &o[2].0, &o[2].1],
            contracted: [&o[3].0, &o[3].1, &o[4].0],
        }
    }

    /// Spectrum of a field on the periodic `n^3` grid.
    fn forward_periodic(&self, values: &[f64]) -> Lane {
        let n = self.grid.n();
        let mut lane = self.lane(n);
        for (d, v) in lane.data.iter_mut().zip(values) {
            *d = Complex64::new(*v, 0.0);
        }
        self.fft3_full(&mut lane, n, false);
        lane
    }

    /// Periodic spectral gradient on the unpadded grid, Nyquist modes zeroed.
    pub fn gradient(&self, field: &ScalarField) -> Result<VectorField> {
        self.check(field.grid())?;
        Ok(self.gradient_values(field.values()))
    }

    pub(crate) fn gradient_values(&self, values: &[f64]) -> VectorField {
        let n = self.grid.n();
        let spec = self.forward_periodic(values);
        let mut comps: [Vec<f64>; 3] = std::array::from_fn(|_| vec![0.0; n * n * n]);
        // components 0 and 1 share one inverse transform
        let mut lanes = [self.lane(n), self.lane(n)];
        for idx in 0..n * n * n {
            let [ka, kb, kc] = self.grid.unflatten(idx);
            let u = spec.data[idx];
            let iu = Complex64::new(-u.im, u.re);
            lanes[0].data[idx] = pack(iu * self.xi[ka], iu * self.xi[kb]);
            lanes[1].data[idx] = iu * self.xi[kc];
        }
        let norm = 1.0 / (n * n * n) as f64;
        lanes.par_iter_mut().for_each(|lane| self.fft3_full(lane, n, true));
        for idx in 0..n * n * n {
            comps[0][idx] = lanes[0].data[idx].re * norm;
            comps[1][idx] = lanes[0].data[idx].im * norm;
            comps[2][idx] = lanes[1].data[idx].re * norm;
        }
        VectorField::from_comps(self.grid, comps)
    }

    /// Periodic spectral divergence on the unpadded grid. The zero mode of
    /// the result vanishes identically.
    pub fn divergence(&self, flux: &VectorField) -> Result<ScalarField> {
        self.check(flux.grid())?;
        let n = self.grid.n();
        let n3 = n * n * n;
        let mut lane = self.lane(n);
        for idx in 0..n3 {
            lane.data[idx] = pack(Complex64::new(flux.comps[0][idx], 0.0), Complex64::new(flux.comps[1][idx], 0.0));
        }
        self.fft3_full(&mut lane, n, false);
        let third = self.forward_periodic(&flux.comps[2]);
        let mut out = self.lane(n);
        for idx in 0..n3 {
            let [ka, kb, kc] = self.grid.unflatten(idx);
            let z = lane.data[idx];
            let zc = lane.data[self.negate_index(ka, kb, kc)].conj();
            // unpack the two real-field spectra
            let f0 = (z + zc) * 0.5;
            let f1 = (z - zc) * Complex64::new(0.0, -0.5);
            let s = f0 * self.xi[ka] + f1 * self.xi[kb] + third.data[idx] * self.xi[kc];
            out.data[idx] = Complex64::new(-s.im, s.re);
        }
        out.data[0] = ZERO;
        self.fft3_full(&mut out, n, true);
        let norm = 1.0 / n3 as f64;
        let values = out.data.iter().map(|z| z.re * norm).collect();
        Ok(ScalarField::from_values_unchecked(self.grid, values))
    }

    fn negate_index(&self, ka: usize, kb: usize, kc: usize) -> usize {
        let n = self.grid.n();
        let neg = |k: usize| (n - k) % n;
        (neg(ka) * n + neg(kb)) * n + neg(kc)
    }

    /// `(i xi)^alpha` applied to a periodic spectrum and transformed back.
    pub(crate) fn derivative_values(&self, spectrum: &[Complex64], alpha: [u32; 3]) -> Vec<f64> {
        let n = self.grid.n();
        let mut lane = self.lane(n);
        for idx in 0..n * n * n {
            let k = self.grid.unflatten(idx);
            let mut factor = Complex64::new(1.0, 0.0);
            for d in 0..3 {
                for _ in 0..alpha[d] {
                    factor *= Complex64::new(0.0, self.xi[k[d]]);
                }
            }
            lane.data[idx] = spectrum[idx] * factor;
        }
        self.fft3_full(&mut lane, n, true);
        let norm = 1.0 / (n * n * n) as f64;
        lane.data.iter().map(|z| z.re * norm).collect()
    }

    pub(crate) fn periodic_spectrum(&self, values: &[f64]) -> Vec<Complex64> {
        self.forward_periodic(values).data
    }
}

/// `z / (2i)`
#[inline]
fn minus_half_i(z: Complex64) -> Complex64 {
    Complex64::new(0.5 * z.im, -0.5 * z.re)
}

#[inline]
fn pack(re_part: Complex64, im_part: Complex64) -> Complex64 {
    // re_part + i * im_part
    Complex64::new(re_part.re - im_part.im, re_part.im + im_part.re)
}

/// Transforms along the middle axis of the plane with outer index `a`,
/// reading rows `rows_in` and writing back rows `rows_out`; third-axis
/// columns are all processed.
#[allow(clippy::too_many_arguments)]
fn transform_middle_axis(
    fft: &dyn Fft<f64>,
    data: &mut [Complex64],
    block: &mut [Complex64],
    scratch: &mut [Complex64],
    side: usize,
    a: usize,
    rows_in: std::ops::Range<usize>,
    rows_out: std::ops::Range<usize>,
) {
    let plane = &mut data[a * side * side..(a + 1) * side * side];
    block.fill(ZERO);
    for b in rows_in {
        for c in 0..side {
            block[c * side + b] = plane[b * side + c];
        }
    }
    fft.process_with_scratch(&mut block[..side * side], scratch);
    for b in rows_out {
        for c in 0..side {
            plane[b * side + c] = block[c * side + b];
        }
    }
}

/// Transforms along the outer axis for fixed middle index `b`.
#[allow(clippy::too_many_arguments)]
fn transform_outer_axis(
    fft: &dyn Fft<f64>,
    data: &mut [Complex64],
    block: &mut [Complex64],
    scratch: &mut [Complex64],
    side: usize,
    b: usize,
    rows_in: std::ops::Range<usize>,
    rows_out: std::ops::Range<usize>,
) {
    block.fill(ZERO);
    for a in rows_in {
        let base = (a * side + b) * side;
        for c in 0..side {
            block[c * side + a] = data[base + c];
        }
    }
    fft.process_with_scratch(&mut block[..side * side], scratch);
    for a in rows_out {
        let base = (a * side + b) * side;
        for c in 0..side {
            data[base + c] = block[c * side + a];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{sample, Maxwellian};

    fn engine(n: usize, l: f64) -> SpectralEngine {
        SpectralEngine::new(VelocityGrid::new(n, l).unwrap())
    }

    #[test]
    fn pruned_forward_matches_full_transform() {
        let e = engine(8, 4.0);
        let g = *e.grid();
        let f = sample(&g, |v| (v[0] + 2.0 * v[1] * v[1] - v[2]).sin()).unwrap();
        let pruned = e.forward_padded(&f).unwrap();
        let big = g.n_pad();
        let mut lane = e.lane(big);
        for idx in 0..g.len() {
            let [a, b, c] = g.unflatten(idx);
            lane.data[(a * big + b) * big + c] = Complex64::new(f.values()[idx], 0.0);
        }
        e.fft3_full(&mut lane, big, false);
        let err = pruned.iter().zip(&lane.data).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        assert!(err < 1e-12, "{err}");
    }

    #[test]
    fn pruned_inverse_recovers_field() {
        let e = engine(8, 4.0);
        let g = *e.grid();
        let f = sample(&g, |v| (v[0] * v[2]).cos() + v[1]).unwrap();
        let mut lane = e.lane(g.n_pad());
        e.forward_padded_into(f.values(), &mut lane);
        let (mut re, mut im) = (vec![0.0; g.len()], vec![0.0; g.len()]);
        e.inverse_crop_into(&mut lane, &mut re, &mut im);
        let err = re.iter().zip(f.values()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(err < 1e-13);
        assert!(im.iter().all(|x| x.abs() < 1e-13));
    }

    #[test]
    fn gradient_of_constant_and_single_mode() {
        let e = engine(16, 8.0);
        let g = *e.grid();
        let c = sample(&g, |_| 2.5).unwrap();
        assert!(e.gradient(&c).unwrap().max_abs() < 1e-14);
        let l = g.half_width();
        let k = std::f64::consts::PI / l;
        let s = sample(&g, |v| (k * v[0]).sin()).unwrap();
        let grad = e.gradient(&s).unwrap();
        for idx in 0..g.len() {
            let v = g.point(idx);
            assert!((grad.comps[0][idx] - k * (k * v[0]).cos()).abs() < 1e-12);
            assert!(grad.comps[1][idx].abs() < 1e-12 && grad.comps[2][idx].abs() < 1e-12);
        }
    }

    #[test]
    fn maxwellian_gradient_is_spectrally_accurate() {
        let e = engine(32, 8.0);
        let g = *e.grid();
        let m = Maxwellian::default();
        let grad = e.gradient(&m.sample(&g)).unwrap();
        let mut err: f64 = 0.0;
        for idx in 0..g.len() {
            let exact = m.gradient(g.point(idx));
            for d in 0..3 {
                err = err.max((grad.comps[d][idx] - exact[d]).abs());
            }
        }
        assert!(err <= 1e-8, "{err:e}");
    }

    #[test]
    fn divergence_of_gradient_is_laplacian_on_modes() {
        let e = engine(16, 4.0);
        let g = *e.grid();
        let k1 = 2.0 * std::f64::consts::PI / 8.0;
        let k2 = 3.0 * k1;
        let f = sample(&g, |v| (k1 * v[0]).cos() * (k2 * v[2]).sin()).unwrap();
        let lap = e.divergence(&e.gradient(&f).unwrap()).unwrap();
        let want = f.scaled(-(k1 * k1 + k2 * k2));
        assert!(lap.max_abs_diff(&want) < 1e-11);
    }

    #[test]
    fn divergence_has_zero_mean() {
        let e = engine(16, 8.0);
        let g = *e.grid();
        let comps = std::array::from_fn(|d| {
            sample(&g, |v| (v[d] * 0.7 + v[(d + 1) % 3]).sin() * (-0.1 * v[0] * v[0]).exp() + 3.0).unwrap().into_values()
        });
        let div = e.divergence(&VectorField::from_comps(g, comps)).unwrap();
        let sum: f64 = div.values().iter().sum();
        assert!(sum.abs() < 1e-11 * div.max_abs().max(1.0));
    }
}
