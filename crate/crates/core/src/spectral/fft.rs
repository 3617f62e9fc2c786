use std::cell::RefCell;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn plan(n: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        if inverse {
            p.plan_fft_inverse(n)
        } else {
            p.plan_fft_forward(n)
        }
    })
}

/// In-place unnormalized FFT of every contiguous row of length `nx`.
pub(crate) fn rows(data: &mut [Complex64], nx: usize, inverse: bool) {
    plan(nx, inverse).process(data);
}

/// In-place unnormalized FFT along the strided axis (rows of length `nx`, `ny` of them).
pub(crate) fn cols(data: &mut [Complex64], nx: usize, ny: usize, inverse: bool) {
    let mut t = transpose(data, nx, ny);
    plan(ny, inverse).process(&mut t);
    let back = transpose(&t, ny, nx);
    data.copy_from_slice(&back);
}

/// Transpose a row-major `rows × cols` array (`cols` contiguous) into `cols × rows`.
pub(crate) fn transpose<T: Copy + Default>(data: &[T], cols: usize, rows: usize) -> Vec<T> {
    let mut out = vec![T::default(); data.len()];
    for r in 0..rows {
        for c in 0..cols {
            out[c * rows + r] = data[r * cols + c];
        }
    }
    out
}

/// Signed wavenumber of FFT slot `j` for an axis of `n` samples.
#[inline]
pub fn wavenumber(j: usize, n: usize) -> i64 {
    if j < n / 2 {
        j as i64
    } else {
        j as i64 - n as i64
    }
}

/// FFT slot of signed wavenumber `k`, if representable.
#[inline]
pub fn slot(k: i64, n: usize) -> Option<usize> {
    let half = (n / 2) as i64;
    if k < -half || k >= half {
        None
    } else if k >= 0 {
        Some(k as usize)
    } else {
        Some((k + n as i64) as usize)
    }
}
