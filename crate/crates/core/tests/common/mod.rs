#![allow(dead_code)]

use disdel::linalg::{assemble, ChainBlock, StructuredMatrix};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;

/// Random well-conditioned bordered system: diagonally dominant leading
/// block, singular or regular mass, chains with exponents in `[1e-2, 1e12]`.
pub fn random_structured(rng: &mut impl Rng, d_max: usize, n_z_max: usize) -> StructuredMatrix {
    let d = rng.gen_range(1..=d_max);
    let mut jac = DMatrix::from_fn(d, d, |_, _| rng.gen_range(-1.0..1.0));
    for i in 0..d {
        jac[(i, i)] -= d as f64 + 1.0;
    }
    let mass = DMatrix::from_diagonal(&DVector::from_fn(d, |_, _| if rng.gen_bool(0.7) { 1.0 } else { 0.0 }));
    let n_z = rng.gen_range(0..=n_z_max);
    let mut blocks = Vec::new();
    let mut used = 0;
    while used < n_z {
        let m = rng.gen_range(0..=2usize).min(n_z - used - 1);
        let gamma = 10f64.powf(rng.gen_range(-2.0..12.0));
        let c = (0..=m).map(|_| rng.gen_range(-1.0..1.0) / (n_z as f64)).collect();
        blocks.push(ChainBlock { gamma, c });
        used += m + 1;
    }
    StructuredMatrix {
        mass,
        jac,
        f_i: DVector::from_fn(d, |_, _| rng.gen_range(-1.0..1.0)),
        g_y: DVector::from_fn(d, |_, _| rng.gen_range(-1.0..1.0)),
        blocks,
    }
}

pub fn random_shift_real(rng: &mut impl Rng) -> f64 {
    10f64.powf(rng.gen_range(-0.5..1.5))
}

pub fn random_shift_complex(rng: &mut impl Rng) -> Complex64 {
    Complex64::new(10f64.powf(rng.gen_range(-0.5..1.5)), rng.gen_range(-10.0..10.0))
}

pub fn dense_solve_real(sys: &StructuredMatrix, shift: f64, rhs: &[f64]) -> Vec<f64> {
    let x = assemble(sys, shift).lu().solve(&DVector::from_column_slice(rhs)).expect("dense solve");
    x.iter().copied().collect()
}

pub fn dense_solve_complex(sys: &StructuredMatrix, shift: Complex64, rhs: &[Complex64]) -> Vec<Complex64> {
    let x = assemble(sys, shift).lu().solve(&DVector::from_column_slice(rhs)).expect("dense solve");
    x.iter().copied().collect()
}

/// `max |a − b| / max |b|`.
pub fn rel_diff<T: nalgebra::ComplexField<RealField = f64> + Copy>(a: &[T], b: &[T]) -> f64 {
    let scale = b.iter().map(|v| v.modulus()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    a.iter().zip(b).map(|(x, y)| (*x - *y).modulus()).fold(0.0, f64::max) / scale
}
