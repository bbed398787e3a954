use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::grid::Grid;
use crate::par;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Unnormalized d-dimensional complex FFT built from 1D passes along each
/// axis. Lines along strided axes are gathered into a contiguous buffer,
/// transformed, and scattered back.
pub(crate) struct FftPlan {
    grid: Grid,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl FftPlan {
    pub(crate) fn new(grid: Grid) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            grid,
            forward: planner.plan_fft_forward(grid.n()),
            inverse: planner.plan_fft_inverse(grid.n()),
        }
    }

    pub(crate) fn forward(&self, data: &mut [Complex64]) {
        self.run(data, &self.forward);
    }

    pub(crate) fn inverse(&self, data: &mut [Complex64]) {
        self.run(data, &self.inverse);
    }

    fn run(&self, data: &mut [Complex64], fft: &Arc<dyn Fft<f64>>) {
        debug_assert_eq!(data.len(), self.grid.points());
        for axis in 0..self.grid.dim() {
            self.axis_pass(data, axis, fft);
        }
    }

    fn lines(&self, buf: &mut [Complex64], fft: &Arc<dyn Fft<f64>>) {
        let n = self.grid.n();
        // a few lines per task keeps scratch allocation off the hot path
        let batch = n * (par::REDUCE_BLOCK / n).max(1);
        par::for_each_chunk_mut(buf, batch, |_, chunk| {
            let mut scratch = vec![ZERO; fft.get_inplace_scratch_len()];
            fft.process_with_scratch(chunk, &mut scratch);
        });
    }

    fn axis_pass(&self, data: &mut [Complex64], axis: usize, fft: &Arc<dyn Fft<f64>>) {
        let n = self.grid.n();
        let stride = self.grid.stride(axis);
        if stride == 1 {
            self.lines(data, fft);
            return;
        }
        // line l = outer * stride + inner holds data[outer*n*stride + m*stride + inner]
        let mut buf = vec![ZERO; data.len()];
        {
            let src: &[Complex64] = data;
            par::for_each_chunk_mut(&mut buf, n, |line, out| {
                let (outer, inner) = (line / stride, line % stride);
                let base = outer * n * stride + inner;
                for (m, v) in out.iter_mut().enumerate() {
                    *v = src[base + m * stride];
                }
            });
        }
        self.lines(&mut buf, fft);
        let src: &[Complex64] = &buf;
        par::for_each_chunk_mut(data, stride, |q, out| {
            let (outer, m) = (q / n, q % n);
            let base = outer * stride * n + m;
            for (inner, v) in out.iter_mut().enumerate() {
                *v = src[base + inner * n];
            }
        });
    }
}
