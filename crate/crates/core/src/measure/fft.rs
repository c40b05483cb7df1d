//! FFT helpers. Plans are cached in a thread-local planner so concurrent
//! callers never share mutable planner state.

use std::cell::RefCell;

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};

/// Largest transform length accepted for a 1D convolution.
pub const MAX_FFT_LEN: usize = 1 << 22;
/// Largest total transform size accepted for a 2D convolution.
pub const MAX_FFT_LEN_2D: usize = 1 << 24;

// below this many multiply-adds a direct convolution is cheaper and exact
const DIRECT_LIMIT: usize = 1 << 14;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

/// Unnormalized forward (`e^{-2πi jk/n}`) or inverse transform, in place.
pub(crate) fn fft_in_place(buf: &mut [Complex64], inverse: bool) {
    if buf.len() <= 1 {
        return;
    }
    let plan = PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        if inverse {
            p.plan_fft_inverse(buf.len())
        } else {
            p.plan_fft_forward(buf.len())
        }
    });
    plan.process(buf);
}

/// Linear (non-circular) convolution of two real sequences; output length
/// `a.len() + b.len() - 1`.
pub(crate) fn convolve_real(a: &[f64], b: &[f64]) -> Result<Vec<f64>> {
    if a.is_empty() || b.is_empty() {
        return Ok(Vec::new());
    }
    let out_len = a.len() + b.len() - 1;
    if a.len() * b.len() <= DIRECT_LIMIT {
        let mut out = vec![0.0; out_len];
        for (i, &x) in a.iter().enumerate() {
            if x == 0.0 {
                continue;
            }
            for (j, &y) in b.iter().enumerate() {
                out[i + j] += x * y;
            }
        }
        return Ok(out);
    }
    let len = out_len.next_power_of_two();
    if len > MAX_FFT_LEN {
        return Err(Error::SupportOverflow {
            required: len,
            limit: MAX_FFT_LEN,
        });
    }
    // pack a into the real part and b into the imaginary part, one forward transform
    let mut buf = vec![Complex64::new(0.0, 0.0); len];
    for (slot, &x) in buf.iter_mut().zip(a) {
        slot.re = x;
    }
    for (slot, &y) in buf.iter_mut().zip(b) {
        slot.im = y;
    }
    fft_in_place(&mut buf, false);
    let mut prod = vec![Complex64::new(0.0, 0.0); len];
    for k in 0..len {
        let z = buf[k];
        let zc = buf[(len - k) % len].conj();
        let fa = (z + zc) * 0.5;
        let fb = (z - zc) * Complex64::new(0.0, -0.5);
        prod[k] = fa * fb;
    }
    fft_in_place(&mut prod, true);
    let scale = 1.0 / len as f64;
    Ok(prod[..out_len].iter().map(|z| z.re * scale).collect())
}

/// Linear convolution of two row-major real arrays (`values[ix * ny + iy]`).
pub(crate) fn convolve_real_2d(
    a: &[f64],
    a_shape: (usize, usize),
    b: &[f64],
    b_shape: (usize, usize),
) -> Result<(Vec<f64>, (usize, usize))> {
    let (anx, any) = a_shape;
    let (bnx, bny) = b_shape;
    let onx = anx + bnx - 1;
    let ony = any + bny - 1;
    if anx * any * bnx * bny <= DIRECT_LIMIT {
        let mut out = vec![0.0; onx * ony];
        for i in 0..anx {
            for j in 0..any {
                let x = a[i * any + j];
                if x == 0.0 {
                    continue;
                }
                for k in 0..bnx {
                    for l in 0..bny {
                        out[(i + k) * ony + (j + l)] += x * b[k * bny + l];
                    }
                }
            }
        }
        return Ok((out, (onx, ony)));
    }
    let lx = onx.next_power_of_two();
    let ly = ony.next_power_of_two();
    if lx * ly > MAX_FFT_LEN_2D {
        return Err(Error::SupportOverflow {
            required: lx * ly,
            limit: MAX_FFT_LEN_2D,
        });
    }
    let fa = transform_2d(a, a_shape, (lx, ly), false);
    let fb = transform_2d(b, b_shape, (lx, ly), false);
    let mut prod: Vec<Complex64> = fa.iter().zip(&fb).map(|(x, y)| x * y).collect();
    inverse_2d(&mut prod, (lx, ly));
    let scale = 1.0 / (lx * ly) as f64;
    let mut out = vec![0.0; onx * ony];
    for i in 0..onx {
        for j in 0..ony {
            out[i * ony + j] = prod[i * ly + j].re * scale;
        }
    }
    Ok((out, (onx, ony)))
}

fn transform_2d(
    values: &[f64],
    shape: (usize, usize),
    padded: (usize, usize),
    inverse: bool,
) -> Vec<Complex64> {
    let (nx, ny) = shape;
    let (lx, ly) = padded;
    let mut buf = vec![Complex64::new(0.0, 0.0); lx * ly];
    for i in 0..nx {
        for j in 0..ny {
            buf[i * ly + j].re = values[i * ny + j];
        }
    }
    for row in buf.chunks_mut(ly).take(nx) {
        fft_in_place(row, inverse);
    }
    columns_in_place(&mut buf, (lx, ly), inverse);
    buf
}

fn inverse_2d(buf: &mut [Complex64], padded: (usize, usize)) {
    let (_, ly) = padded;
    for row in buf.chunks_mut(ly) {
        fft_in_place(row, true);
    }
    columns_in_place(buf, padded, true);
}

fn columns_in_place(buf: &mut [Complex64], padded: (usize, usize), inverse: bool) {
    let (lx, ly) = padded;
    let mut col = vec![Complex64::new(0.0, 0.0); lx];
    for j in 0..ly {
        for i in 0..lx {
            col[i] = buf[i * ly + j];
        }
        fft_in_place(&mut col, inverse);
        for i in 0..lx {
            buf[i * ly + j] = col[i];
        }
    }
}
