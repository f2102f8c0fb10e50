use super::{Field, StructuredMatrix};
use crate::error::{Error, Result};
use nalgebra::{DMatrix, DVector, Dyn, LU};

/// Assembles `shift·𝓜 − 𝓙` as a full `(d_y + N_z)²` matrix.
pub fn assemble<T: Field>(sys: &StructuredMatrix, shift: T) -> DMatrix<T> {
    let d = sys.dense_dim();
    let n = sys.dim();
    let mut a = DMatrix::<T>::zeros(n, n);
    for i in 0..d {
        for j in 0..d {
            a[(i, j)] = shift * T::from_real(sys.mass[(i, j)]) - T::from_real(sys.jac[(i, j)]);
        }
    }
    let mut off = d;
    for b in &sys.blocks {
        for (j, c) in b.c.iter().enumerate() {
            let col = off + j;
            for i in 0..d {
                a[(i, col)] = -T::from_real(sys.f_i[i] * c);
            }
            a[(col, col)] = shift + T::from_real(b.gamma);
            if j == 0 {
                for k in 0..d {
                    a[(col, k)] = -T::from_real(sys.g_y[k]);
                }
            } else {
                a[(col, col - 1)] = -T::from_real(j as f64);
            }
        }
        off += b.size();
    }
    a
}

/// Partial-pivoting LU of the assembled matrix.
#[derive(Debug, Clone)]
pub struct DenseFactorization<T: Field> {
    lu: LU<T, Dyn, Dyn>,
}

impl<T: Field> DenseFactorization<T> {
    pub fn new(sys: &StructuredMatrix, shift: T) -> Result<Self> {
        let lu = assemble(sys, shift).lu();
        if !lu.is_invertible() {
            return Err(Error::Singular);
        }
        Ok(Self { lu })
    }

    pub fn solve_in_place(&self, rhs: &mut [T]) {
        let mut b = DVector::from_column_slice(rhs);
        self.lu.solve_mut(&mut b);
        rhs.copy_from_slice(b.as_slice());
    }
}
