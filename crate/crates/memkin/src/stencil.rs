//! Eighth-order central divergence in face-flux form with no flux through
//! the faces of the velocity box.
//!
//! Mass telescopes exactly. Against the moments `v` and `|v|²` the operator
//! satisfies `Σ_v v_i (D F)(v) = -Σ_v F_i` and `Σ_v |v|² (D F)(v) = -2 Σ_v v·F`
//! up to terms in `F` within four cells of the box faces, so momentum and
//! energy of a flux-form update are those of the flux.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::field::{ScalarField, VectorField};
use crate::grid::VelocityGrid;

/// Central first-derivative weights for offsets 1..=4.
pub const CENTRAL_WEIGHTS: [f64; 4] = [4.0 / 5.0, -1.0 / 5.0, 4.0 / 105.0, -1.0 / 280.0];

/// Flux through the faces `0..=n` of one grid line, zero outside the box and
/// on the two outer faces.
fn face_fluxes(line: &[f64], faces: &mut [f64]) {
    let n = line.len();
    faces[0] = 0.0;
    faces[n] = 0.0;
    for (m, g) in faces.iter_mut().enumerate().take(n).skip(1) {
        let mut s = 0.0;
        for (k, w) in CENTRAL_WEIGHTS.iter().enumerate() {
            // cells m-k-1 ..= m+k straddle face m
            let lo = m.saturating_sub(k + 1);
            let hi = (m + k + 1).min(n);
            s += w * line[lo..hi].iter().sum::<f64>();
        }
        *g = s;
    }
}

/// `∇·F` on the grid, see the module docs.
pub fn stencil_divergence(grid: &VelocityGrid, flux: &VectorField) -> Result<ScalarField> {
    if flux.grid() != grid {
        return Err(Error::GridMismatch);
    }
    let n = grid.n();
    let inv_h = 1.0 / grid.dv();
    let strides = [n * n, n, 1];
    let mut out = vec![0.0; grid.len()];
    for (d, &stride) in strides.iter().enumerate() {
        let f = &flux.comps[d];
        // one task per line along axis d, identified by its base index
        let lines: Vec<(usize, Vec<f64>)> = (0..n * n)
            .into_par_iter()
            .map(|l| {
                let (hi, lo) = (l / n, l % n);
                let base = match d {
                    0 => hi * n + lo,
                    1 => hi * n * n + lo,
                    _ => (hi * n + lo) * n,
                };
                let line: Vec<f64> = (0..n).map(|j| f[base + j * stride]).collect();
                let mut faces = vec![0.0; n + 1];
                face_fluxes(&line, &mut faces);
                (base, faces.windows(2).map(|g| (g[1] - g[0]) * inv_h).collect())
            })
            .collect();
        for (base, div) in lines {
            for (j, x) in div.into_iter().enumerate() {
                out[base + j * stride] += x;
            }
        }
    }
    Ok(ScalarField::from_values_unchecked(*grid, out))
}
