//! Point evaluation of grid densities between nodes.
//!
//! Off-node values use 8-point Lagrange interpolation with the density taken
//! as zero outside its window. On-node targets (within `ALIGN_TOL` of a node)
//! are copied exactly, so aligned resampling is lossless.

use super::GridSpec1D;

const STENCIL: usize = 8;
const ALIGN_TOL: f64 = 1e-9;

/// Value of the sampled function at fractional index `u`.
pub(crate) fn value_at_index(values: &[f64], u: f64) -> f64 {
    let n = values.len() as isize;
    let nearest = u.round();
    if (u - nearest).abs() < ALIGN_TOL {
        let k = nearest as isize;
        return if (0..n).contains(&k) {
            values[k as usize]
        } else {
            0.0
        };
    }
    let base = u.floor() as isize - (STENCIL as isize / 2 - 1);
    if base + STENCIL as isize <= 0 || base >= n {
        return 0.0;
    }
    let s = u - base as f64;
    let mut acc = 0.0;
    for j in 0..STENCIL {
        let k = base + j as isize;
        if !(0..n).contains(&k) {
            continue;
        }
        let v = values[k as usize];
        if v == 0.0 {
            continue;
        }
        let mut w = 1.0;
        for m in 0..STENCIL {
            if m != j {
                w *= (s - m as f64) / (j as f64 - m as f64);
            }
        }
        acc += w * v;
    }
    acc
}

/// Samples `values` (living on `src`) at every node of `target`.
/// Negative interpolation overshoot is clipped to zero.
pub(crate) fn sample_onto(values: &[f64], src: &GridSpec1D, target: &GridSpec1D) -> Vec<f64> {
    let ratio = target.dx() / src.dx();
    let offset = (target.x_min() - src.x_min()) / src.dx();
    (0..target.n())
        .map(|k| value_at_index(values, offset + k as f64 * ratio).max(0.0))
        .collect()
}
