//! Periodic Poisson solves with the exact symbol of the second-difference
//! Laplacian, via separable FFTs along each axis.

use std::f64::consts::PI;

use num_complex::Complex64;
use std::sync::Arc;

use rustfft::{Fft, FftPlanner};

/// Cached separable FFT plans for a row-major periodic array.
#[derive(Clone)]
pub struct PeriodicFft {
    sizes: Vec<usize>,
    forward: Vec<Arc<dyn Fft<f64>>>,
    inverse: Vec<Arc<dyn Fft<f64>>>,
    /// Eigenvalues `4 sin²(π m / N)` of the unit second difference, per axis.
    eigen: Vec<Vec<f64>>,
}

impl PeriodicFft {
    pub fn new(sizes: &[usize]) -> Self {
        let mut planner = FftPlanner::<f64>::new();
        let forward = sizes.iter().map(|&n| planner.plan_fft_forward(n)).collect();
        let inverse = sizes.iter().map(|&n| planner.plan_fft_inverse(n)).collect();
        let eigen = sizes
            .iter()
            .map(|&n| {
                (0..n)
                    .map(|m| {
                        let s = (PI * m as f64 / n as f64).sin();
                        4.0 * s * s
                    })
                    .collect()
            })
            .collect();
        Self { sizes: sizes.to_vec(), forward, inverse, eigen }
    }

    fn transform(&self, data: &mut [Complex64], inverse: bool) {
        let total: usize = self.sizes.iter().product();
        debug_assert_eq!(total, data.len());
        let mut stride = total;
        for (axis, &n) in self.sizes.iter().enumerate() {
            stride /= n;
            let fft = if inverse { &self.inverse[axis] } else { &self.forward[axis] };
            let mut line = vec![Complex64::new(0.0, 0.0); n];
            let mut scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
            let block = n * stride;
            for outer in 0..total / block {
                for inner in 0..stride {
                    let base = outer * block + inner;
                    for (i, z) in line.iter_mut().enumerate() {
                        *z = data[base + i * stride];
                    }
                    fft.process_with_scratch(&mut line, &mut scratch);
                    for (i, z) in line.iter().enumerate() {
                        data[base + i * stride] = *z;
                    }
                }
            }
        }
    }

    /// Multiply by a real Fourier symbol built from the per-axis difference
    /// eigenvalues: `symbol(λ)` receives `λ_j = 4 sin²(π m_j / N_j)`.
    pub fn apply_symbol<F>(&self, data: &mut [Complex64], symbol: F)
    where
        F: Fn(&[f64]) -> f64,
    {
        self.transform(data, false);
        let dim = self.sizes.len();
        let scale = 1.0 / data.len() as f64;
        let mut lam = vec![0.0; dim];
        for (idx, z) in data.iter_mut().enumerate() {
            let mut rem = idx;
            for axis in (0..dim).rev() {
                lam[axis] = self.eigen[axis][rem % self.sizes[axis]];
                rem /= self.sizes[axis];
            }
            *z *= symbol(&lam) * scale;
        }
        self.transform(data, true);
    }
}

/// Solve `∑_j w_j (θ(x+e_j) − 2θ(x) + θ(x−e_j)) = rhs` on the periodic grid
/// with zero-mean `θ`. The mean of `rhs` is discarded (it is zero whenever the
/// problem is solvable).
pub fn solve_periodic_laplacian(sizes: &[usize], weights: &[f64], rhs: &[f64]) -> Vec<f64> {
    let total: usize = sizes.iter().product();
    assert_eq!(rhs.len(), total);
    assert_eq!(weights.len(), sizes.len());
    let mut data: Vec<Complex64> = rhs.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    PeriodicFft::new(sizes).apply_symbol(&mut data, |lam| {
        let symbol: f64 = lam.iter().zip(weights).map(|(l, w)| -l * w).sum();
        if symbol == 0.0 {
            0.0
        } else {
            1.0 / symbol
        }
    });
    data.iter().map(|z| z.re).collect()
}
