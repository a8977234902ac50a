//! Centered unitary 2D DFT and FFT convolution helpers.

use num_complex::Complex64;
use rustfft::{Fft, FftDirection, FftPlanner};
use std::sync::Arc;

use crate::grid::ComplexField2D;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Inverse,
}

/// Unitary (1/n-scaled) 2D DFT with the DC sample at index `n/2` on input and
/// output. Forward uses the `exp(-i q·x)` kernel. The result lives on the
/// conjugate grid.
pub fn dft2_centered(f: &ComplexField2D, direction: Direction) -> ComplexField2D {
    let grid = *f.grid();
    let n = grid.n();
    let mut data = f.values().to_vec();
    shift_half(&mut data, n);
    fft2_in_place(&mut data, n, n, direction);
    shift_half(&mut data, n);
    let scale = 1.0 / n as f64;
    data.iter_mut().for_each(|v| *v *= scale);
    ComplexField2D::new(grid.conjugate(), data).expect("same size")
}

/// Swaps quadrants (roll by n/2 on both axes); for even n this is its own inverse.
pub(crate) fn shift_half(data: &mut [Complex64], n: usize) {
    let h = n / 2;
    for row in 0..h {
        for col in 0..n {
            let a = row * n + col;
            let b = (row + h) * n + (col + h) % n;
            data.swap(a, b);
        }
    }
}

fn plan(len: usize, direction: Direction) -> Arc<dyn Fft<f64>> {
    let dir = match direction {
        Direction::Forward => FftDirection::Forward,
        Direction::Inverse => FftDirection::Inverse,
    };
    FftPlanner::new().plan_fft(len, dir)
}

/// Unnormalized 2D FFT of a `rows × cols` row-major buffer.
pub(crate) fn fft2_in_place(data: &mut [Complex64], rows: usize, cols: usize, direction: Direction) {
    let row_fft = plan(cols, direction);
    for chunk in data.chunks_exact_mut(cols) {
        row_fft.process(chunk);
    }
    let col_fft = plan(rows, direction);
    let mut column = vec![Complex64::new(0.0, 0.0); rows];
    for c in 0..cols {
        for r in 0..rows {
            column[r] = data[r * cols + c];
        }
        col_fft.process(&mut column);
        for r in 0..rows {
            data[r * cols + c] = column[r];
        }
    }
}

/// Full linear 2D convolution of two `n × n` real arrays. Output is
/// `(2n-1) × (2n-1)`, row-major, index `i + j` for input indices `i`, `j`.
pub(crate) fn convolve_full(a: &[f64], b: &[f64], n: usize) -> Vec<f64> {
    let m = 2 * n;
    let pad = |src: &[f64]| {
        let mut out = vec![Complex64::new(0.0, 0.0); m * m];
        for r in 0..n {
            for c in 0..n {
                out[r * m + c] = Complex64::new(src[r * n + c], 0.0);
            }
        }
        out
    };
    let mut fa = pad(a);
    let mut fb = pad(b);
    fft2_in_place(&mut fa, m, m, Direction::Forward);
    fft2_in_place(&mut fb, m, m, Direction::Forward);
    for (x, y) in fa.iter_mut().zip(&fb) {
        *x *= y;
    }
    fft2_in_place(&mut fa, m, m, Direction::Inverse);
    let scale = 1.0 / (m * m) as f64;
    let w = 2 * n - 1;
    let mut out = vec![0.0; w * w];
    for r in 0..w {
        for c in 0..w {
            out[r * w + c] = fa[r * m + c].re * scale;
        }
    }
    out
}
