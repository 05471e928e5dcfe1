//! Reference computations that do not go through the library's fast paths.
#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use quincunx::linalg::expm;

/// Wrapped Binomial(n, 1/2) over ±1 steps on Z_d, by Pascal's triangle.
pub fn wrapped_binomial(n: usize, d: usize) -> Vec<f64> {
    let mut row = vec![1.0f64];
    for _ in 0..n {
        let mut next = vec![0.0; row.len() + 1];
        for (i, v) in row.iter().enumerate() {
            next[i] += 0.5 * v;
            next[i + 1] += 0.5 * v;
        }
        row = next;
    }
    let mut out = vec![0.0; d];
    for (ups, p) in row.iter().enumerate() {
        let shift = 2 * ups as i64 - n as i64;
        out[shift.rem_euclid(d as i64) as usize] += p;
    }
    out
}

/// Dense `U = exp((2πi/d) N̂⊗σ_z) · (1⊗H)` on `levels` Fock levels, built
/// from the matrix exponential of the generator.
pub fn dense_step(d: usize, levels: usize) -> DMatrix<C64> {
    let dim = 2 * levels;
    let generator = DMatrix::from_fn(dim, dim, |i, j| {
        if i == j {
            let n = (i / 2) as f64;
            let s = if i % 2 == 0 { 1.0 } else { -1.0 };
            C64::new(0.0, 2.0 * std::f64::consts::PI / d as f64 * n * s)
        } else {
            C64::from(0.0)
        }
    });
    let f = expm(&generator);
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let coin = DMatrix::from_fn(dim, dim, |i, j| {
        if i / 2 != j / 2 {
            return C64::from(0.0);
        }
        let sign = if i % 2 == 1 && j % 2 == 1 { -1.0 } else { 1.0 };
        C64::from(sign * h)
    });
    f * coin
}

/// Lattice probabilities straight from the definition of the phase states.
pub fn phase_probabilities(psi: &DVector<C64>, d: usize) -> Vec<f64> {
    let levels = psi.len() / 2;
    (0..d)
        .map(|k| {
            let mut p = 0.0;
            for c in 0..2 {
                let mut amp = C64::from(0.0);
                for j in 0..d.min(levels) {
                    let phase = C64::new(0.0, -(j as f64) * 2.0 * std::f64::consts::PI * k as f64 / d as f64);
                    amp += phase.exp() * psi[2 * j + c];
                }
                p += amp.norm_sqr() / d as f64;
            }
            p
        })
        .collect()
}

pub fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

pub fn rel_diff(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}
