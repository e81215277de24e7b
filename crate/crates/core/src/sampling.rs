//! Deterministic sample points and random matrices.

use alloc::vec::Vec;
use core::f64::consts::TAU;
#[allow(unused_imports)]
use num_traits::Float;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::numerics::{cx, ComplexMatrix};

pub type SampleRng = ChaCha8Rng;

pub fn rng(seed: u64) -> SampleRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Entries with real and imaginary parts uniform on `[-1, 1]`.
pub fn random_matrix(rng: &mut SampleRng, rows: usize, cols: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| cx(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
}

/// Uniform in the disk of the given radius.
pub fn random_disk_point(rng: &mut SampleRng, radius: f64) -> Complex64 {
    let r = radius * rng.random::<f64>().sqrt();
    Complex64::from_polar(r, TAU * rng.random::<f64>())
}

pub fn random_unimodular(rng: &mut SampleRng) -> Complex64 {
    Complex64::from_polar(1.0, TAU * rng.random::<f64>())
}

pub fn halton(mut index: usize, base: usize) -> f64 {
    let mut f = 1.0;
    let mut r = 0.0;
    while index > 0 {
        f /= base as f64;
        r += f * (index % base) as f64;
        index /= base;
    }
    r
}

/// Quasi-random points filling the open disk (area-uniform Halton radii).
pub fn interior_grid(count: usize) -> Vec<Complex64> {
    (1..=count).map(|k| Complex64::from_polar(halton(k, 2).sqrt() * (1.0 - 1e-6), TAU * halton(k, 3))).collect()
}

pub fn circle_points(count: usize, radius: f64) -> Vec<Complex64> {
    (0..count).map(|k| Complex64::from_polar(radius, TAU * (k as f64 + 0.5) / count as f64)).collect()
}

pub fn point_tuples(seed: u64, count: usize, size: usize, radius: f64) -> Vec<Vec<Complex64>> {
    let mut g = rng(seed);
    (0..count).map(|_| (0..size).map(|_| random_disk_point(&mut g, radius)).collect()).collect()
}
