//! Portable random streams.
//!
//! Every random quantity in the crate is derived from a SplitMix64 stream
//! (increment `0x9e3779b97f4a7c15`, finalizer multipliers `0xbf58476d1ce4e5b9`
//! and `0x94d049bb133111eb`). Uniforms use the top 53 bits of each output,
//! `u = (x >> 11) * 2^-53`. Gaussians come from Box–Muller on two consecutive
//! uniforms `u1, u2`: `r = sqrt(-2 ln(1 - u1))`, giving `r cos(2π u2)` then
//! `r sin(2π u2)`. A standard complex Gaussian uses the pair as `(re, im)`
//! scaled by `1/√2`. Matrices are filled in row-major order.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use rand_core::{Rng, SeedableRng};
use rand_xoshiro::SplitMix64;

use crate::qcore::{CMatrix, CVector, C64};

const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;

/// One step of the SplitMix64 output function; used to hash seeds.
pub fn mix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of the `index`-th independent substream of `seed` (restarts, trials).
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    mix64(seed ^ mix64(index.wrapping_mul(GOLDEN)))
}

pub struct StreamRng {
    inner: SplitMix64,
}

impl StreamRng {
    pub fn new(seed: u64) -> Self {
        Self {
            inner: SplitMix64::seed_from_u64(seed),
        }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    /// Uniform in [0, 1).
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// A pair of independent standard normals.
    pub fn normal_pair(&mut self) -> (f64, f64) {
        let u1 = self.uniform();
        let u2 = self.uniform();
        let r = (-2.0 * (1.0 - u1).ln()).sqrt();
        let (s, c) = (2.0 * PI * u2).sin_cos();
        (r * c, r * s)
    }

    /// Standard complex Gaussian, E|z|² = 1.
    pub fn complex_normal(&mut self) -> C64 {
        let (x, y) = self.normal_pair();
        C64::new(x * FRAC_1_SQRT_2, y * FRAC_1_SQRT_2)
    }

    pub fn ginibre(&mut self, rows: usize, cols: usize) -> CMatrix {
        let mut data = Vec::with_capacity(rows * cols);
        for _ in 0..rows * cols {
            data.push(self.complex_normal());
        }
        CMatrix::from_row_slice(rows, cols, &data)
    }

    pub fn complex_vector(&mut self, len: usize) -> CVector {
        CVector::from_iterator(len, (0..len).map(|_| self.complex_normal()))
    }

    pub fn unit_vector(&mut self, len: usize) -> CVector {
        loop {
            let v = self.complex_vector(len);
            let n = v.norm();
            if n > 1e-12 {
                return v / C64::from(n);
            }
        }
    }

    /// Haar-random unitary: QR of a Ginibre matrix with the phases of R's
    /// diagonal absorbed into Q.
    pub fn unitary(&mut self, dim: usize) -> CMatrix {
        let g = self.ginibre(dim, dim);
        let qr = g.qr();
        let (mut q, r) = qr.unpack();
        for j in 0..dim {
            let d = r[(j, j)];
            let phase = if d.norm() > 0.0 {
                d / C64::from(d.norm())
            } else {
                C64::from(1.0)
            };
            for i in 0..dim {
                q[(i, j)] *= phase;
            }
        }
        q
    }
}
