//! Uniform sampling of the unit circle and FFT coefficient extraction.

use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;

use super::rational::LaurentSlice;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct CircleGrid {
    nodes: Vec<Complex64>,
}

impl CircleGrid {
    /// `size` must be a power of two, at least 4.
    pub fn new(size: usize) -> Result<Self> {
        if size < 4 || !size.is_power_of_two() {
            return Err(Error::Parameter(format!(
                "circle grid size must be a power of two >= 4, got {size}"
            )));
        }
        let nodes = (0..size)
            .map(|k| Complex64::from_polar(1.0, 2.0 * PI * k as f64 / size as f64))
            .collect();
        Ok(Self { nodes })
    }

    /// Smallest admissible grid resolving a function of the given polynomial degree.
    pub fn for_degree(degree: usize) -> Self {
        let size = (4 * degree.max(1)).next_power_of_two().max(4);
        Self::new(size).expect("power of two")
    }

    pub fn size(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[Complex64] {
        &self.nodes
    }

    pub fn sample<F: Fn(Complex64) -> Complex64>(&self, f: F) -> Vec<Complex64> {
        self.nodes.iter().map(|&z| f(z)).collect()
    }

    /// Discrete Fourier coefficients `c_j = (1/N) sum_k s_k z_k^{-j}`, `j = 0..N-1`.
    /// Index `j` aliases exponent `j - N` for `j > N/2`.
    pub fn coefficients(&self, samples: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(samples.len(), self.size(), "sample count must match the grid");
        let mut buf = samples.to_vec();
        FftPlanner::new().plan_fft_forward(buf.len()).process(&mut buf);
        let scale = 1.0 / self.size() as f64;
        buf.iter_mut().for_each(|c| *c *= scale);
        buf
    }

    /// Laurent coefficients `min_exp ..= max_exp` of the sampled function.
    /// The window must fit inside one period (`max_exp - min_exp < N`).
    pub fn laurent(&self, samples: &[Complex64], min_exp: i32, max_exp: i32) -> LaurentSlice {
        let n = self.size() as i32;
        assert!(max_exp - min_exp < n, "Laurent window wider than the grid");
        let c = self.coefficients(samples);
        let coeffs = (min_exp..=max_exp).map(|e| c[e.rem_euclid(n) as usize]).collect();
        LaurentSlice { min_exp, coeffs }
    }

    /// Values at the nodes of `sum_j c_j z^j` for a dense coefficient list
    /// (the inverse of [`coefficients`](Self::coefficients) for `len <= N`).
    pub fn synthesize(&self, coeffs: &[Complex64]) -> Vec<Complex64> {
        let n = self.size();
        let mut buf = vec![Complex64::new(0.0, 0.0); n];
        for (j, &c) in coeffs.iter().enumerate() {
            buf[j % n] += c;
        }
        FftPlanner::new().plan_fft_inverse(n).process(&mut buf);
        buf
    }
}
