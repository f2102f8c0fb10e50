use super::{Field, StructuredMatrix};
use crate::error::{Error, Result};
use nalgebra::{DMatrix, DVector, Dyn, LU};

/// Factorization of `shift·𝓜 − 𝓙` exploiting the bordered bidiagonal structure.
///
/// Only the leading `d_y × d_y` block is LU-factored, after a rank-one
/// update that absorbs the eliminated chains. Each solve then costs
/// `O(d_y²) + O(N_z)`.
#[derive(Debug, Clone)]
pub struct StructuredFactorization<T: Field> {
    shift: T,
    lu: LU<T, Dyn, Dyn>,
    f_i: Vec<f64>,
    g_y: Vec<f64>,
    gammas: Vec<f64>,
    coeffs: Vec<f64>,
    sizes: Vec<usize>,
    /// `v_i = (shift I − J_i)^{-1} e_i`, concatenated.
    v: Vec<T>,
    /// `s = Σ c_iᵀ v_i`.
    coupling: T,
}

/// Forward substitution with `shift·I − J_i`: diagonal `shift + γ`, subdiagonal `−1, −2, …`.
#[inline]
fn bidiagonal_solve<T: Field>(shift: T, gamma: f64, x: &mut [T]) {
    let inv = T::one() / (shift + T::from_real(gamma));
    let mut prev = T::zero();
    for (j, xj) in x.iter_mut().enumerate() {
        let v = if j == 0 { *xj } else { *xj + T::from_real(j as f64) * prev };
        *xj = v * inv;
        prev = *xj;
    }
}

impl<T: Field> StructuredFactorization<T> {
    pub fn new(sys: &StructuredMatrix, shift: T) -> Result<Self> {
        let d = sys.dense_dim();
        let nz = sys.chain_dim();
        let mut v = vec![T::zero(); nz];
        let mut coupling = T::zero();
        let mut gammas = Vec::with_capacity(sys.blocks.len());
        let mut coeffs = Vec::with_capacity(nz);
        let mut sizes = Vec::with_capacity(sys.blocks.len());
        let mut off = 0;
        for b in &sys.blocks {
            let m = b.size();
            let vi = &mut v[off..off + m];
            vi[0] = T::one();
            bidiagonal_solve(shift, b.gamma, vi);
            for (c, x) in b.c.iter().zip(vi.iter()) {
                coupling += T::from_real(*c) * *x;
            }
            gammas.push(b.gamma);
            coeffs.extend_from_slice(&b.c);
            sizes.push(m);
            off += m;
        }
        let a = DMatrix::<T>::from_fn(d, d, |i, j| {
            shift * T::from_real(sys.mass[(i, j)])
                - T::from_real(sys.jac[(i, j)])
                - T::from_real(sys.f_i[i] * sys.g_y[j]) * coupling
        });
        let lu = a.lu();
        if !lu.is_invertible() {
            return Err(Error::Singular);
        }
        Ok(Self {
            shift,
            lu,
            f_i: sys.f_i.iter().copied().collect(),
            g_y: sys.g_y.iter().copied().collect(),
            gammas,
            coeffs,
            sizes,
            v,
            coupling,
        })
    }

    pub fn shift(&self) -> T {
        self.shift
    }

    /// The rank-one weight `s = Σ c_iᵀ (shift I − J_i)^{-1} e_i`.
    pub fn coupling(&self) -> T {
        self.coupling
    }

    /// Cached `v_i` vectors, concatenated in block order.
    pub fn chain_vectors(&self) -> &[T] {
        &self.v
    }

    pub fn dim(&self) -> usize {
        self.f_i.len() + self.v.len()
    }

    /// Solves in place; `rhs` has length `d_y + N_z`.
    pub fn solve_in_place(&self, rhs: &mut [T]) {
        let d = self.f_i.len();
        let (a0, az) = rhs.split_at_mut(d);
        let mut acc = T::zero();
        let mut off = 0;
        let mut k = 0;
        for (&gamma, &m) in self.gammas.iter().zip(&self.sizes) {
            let w = &mut az[off..off + m];
            bidiagonal_solve(self.shift, gamma, w);
            for x in w.iter() {
                acc += T::from_real(self.coeffs[k]) * *x;
                k += 1;
            }
            off += m;
        }
        let mut u0 = DVector::<T>::from_fn(d, |i, _| a0[i] + T::from_real(self.f_i[i]) * acc);
        self.lu.solve_mut(&mut u0);
        let mut gu = T::zero();
        for i in 0..d {
            a0[i] = u0[i];
            gu += T::from_real(self.g_y[i]) * u0[i];
        }
        for (x, v) in az.iter_mut().zip(&self.v) {
            *x += *v * gu;
        }
    }

    pub fn solve(&self, rhs: &[T]) -> Vec<T> {
        let mut u = rhs.to_vec();
        self.solve_in_place(&mut u);
        u
    }
}

/// Operation-count model `(factor_flops, solve_flops)` for a `d_y`-dense block and `N_z` chain variables.
pub fn cost_model(d_y: usize, n_z: usize) -> (u64, u64) {
    let d = d_y as u64;
    let n = n_z as u64;
    let factor = 2 * d * d * d / 3 + 2 * d * d + 4 * n;
    let solve = 2 * d * d + 6 * n;
    (factor, solve)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{assemble, ChainBlock};
    use approx::assert_relative_eq;
    use num_complex::Complex64;

    fn small_system() -> StructuredMatrix {
        StructuredMatrix {
            mass: DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0]),
            jac: DMatrix::from_row_slice(2, 2, &[-1.0, 0.5, 0.0, -1.0]),
            f_i: DVector::from_vec(vec![0.0, 1.0]),
            g_y: DVector::from_vec(vec![1.0, 0.0]),
            blocks: vec![
                ChainBlock { gamma: 2.0, c: vec![0.7] },
                ChainBlock { gamma: 1e6, c: vec![0.0, 3.0] },
                ChainBlock { gamma: 0.3, c: vec![1.0, -1.0, 0.5] },
            ],
        }
    }

    #[test]
    fn single_block_coupling() {
        let sys = StructuredMatrix {
            mass: DMatrix::identity(1, 1),
            jac: DMatrix::zeros(1, 1),
            f_i: DVector::from_vec(vec![1.0]),
            g_y: DVector::from_vec(vec![1.0]),
            blocks: vec![ChainBlock { gamma: 3.0, c: vec![1.0] }],
        };
        let f = StructuredFactorization::new(&sys, 2.0).unwrap();
        assert_relative_eq!(f.coupling(), 1.0 / 5.0, max_relative = 1e-15);
    }

    #[test]
    fn matches_dense_real_and_complex() {
        let sys = small_system();
        let a: Vec<f64> = (0..sys.dim()).map(|i| (i as f64 * 0.37).sin() + 0.1).collect();
        let f = StructuredFactorization::new(&sys, 1.7).unwrap();
        let u = f.solve(&a);
        let dense = assemble(&sys, 1.7).lu().solve(&DVector::from_vec(a.clone())).unwrap();
        for (x, y) in u.iter().zip(dense.iter()) {
            assert_relative_eq!(*x, *y, max_relative = 1e-10, epsilon = 1e-14);
        }

        let shift = Complex64::new(1.2, 0.8);
        let ac: Vec<Complex64> = a.iter().map(|&x| Complex64::new(x, -0.5 * x)).collect();
        let f = StructuredFactorization::new(&sys, shift).unwrap();
        let u = f.solve(&ac);
        let mut r = vec![Complex64::new(0.0, 0.0); sys.dim()];
        sys.apply(shift, &u, &mut r);
        for (x, y) in r.iter().zip(&ac) {
            assert!((x - y).norm() <= 1e-12 * (1.0 + y.norm()));
        }
    }

    #[test]
    fn no_blocks_reduces_to_dense() {
        let mut sys = small_system();
        sys.blocks.clear();
        let f = StructuredFactorization::new(&sys, 2.0).unwrap();
        assert_eq!(f.coupling(), 0.0);
        let u = f.solve(&[1.0, 2.0]);
        let expect = (DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 0.0]) - &sys.jac)
            .lu()
            .solve(&DVector::from_vec(vec![1.0, 2.0]))
            .unwrap();
        assert_relative_eq!(u[0], expect[0], max_relative = 1e-14);
        assert_relative_eq!(u[1], expect[1], max_relative = 1e-14);
    }

    #[test]
    fn decoupled_when_f_i_vanishes() {
        let mut sys = small_system();
        sys.f_i.fill(0.0);
        let a: Vec<f64> = (0..sys.dim()).map(|i| 1.0 + i as f64).collect();
        let f = StructuredFactorization::new(&sys, 1.0).unwrap();
        let u = f.solve(&a);
        let u0 = (&sys.mass - &sys.jac).lu().solve(&DVector::from_vec(a[..2].to_vec())).unwrap();
        assert_relative_eq!(u[0], u0[0], max_relative = 1e-14);
        assert_relative_eq!(u[1], u0[1], max_relative = 1e-14);
    }

    #[test]
    fn singular_leading_block() {
        let sys = StructuredMatrix {
            mass: DMatrix::zeros(1, 1),
            jac: DMatrix::zeros(1, 1),
            f_i: DVector::zeros(1),
            g_y: DVector::zeros(1),
            blocks: vec![],
        };
        assert!(matches!(StructuredFactorization::new(&sys, 1.0), Err(Error::Singular)));
    }

    #[test]
    fn large_exponent_decay() {
        let sys = StructuredMatrix {
            mass: DMatrix::identity(1, 1),
            jac: DMatrix::zeros(1, 1),
            f_i: DVector::from_vec(vec![1.0]),
            g_y: DVector::from_vec(vec![1.0]),
            blocks: vec![ChainBlock { gamma: 1e12, c: vec![1.0, 1.0, 1.0] }],
        };
        let f = StructuredFactorization::new(&sys, Complex64::new(0.5, 2.0)).unwrap();
        let v = f.chain_vectors();
        let s = Complex64::new(0.5, 2.0) + 1e12;
        assert!((v[0] - 1.0 / s).norm() <= 1e-15 / 1e12);
        assert!((v[1] - 1.0 / (s * s)).norm() <= 1e-15 / 1e24);
        assert!((v[2] - 2.0 / (s * s * s)).norm() <= 1e-15 / 1e36);
    }

    #[test]
    fn cost_model_linear_in_chain() {
        let (f1, s1) = cost_model(4, 1000);
        let (f2, s2) = cost_model(4, 2000);
        let (f0, s0) = cost_model(4, 0);
        assert_eq!(f2 - f1, f1 - f0);
        assert_eq!(s2 - s1, s1 - s0);
    }
}
