//! Linear algebra for the Radau stage systems `(shift·𝓜 − 𝓙) u = a`.
//!
//! The augmented Jacobian has a dense leading block coupled by rank-one
//! terms to many small lower-bidiagonal blocks. [`structured`] eliminates
//! the blocks and factors only the leading block; [`dense`] assembles the
//! full matrix and is kept as a comparator.

pub mod dense;
pub mod structured;

use nalgebra::{ComplexField, DMatrix, DVector};

pub use dense::{assemble, DenseFactorization};
pub use structured::{cost_model, StructuredFactorization};

/// Scalars the stage systems are solved over (`f64` and `Complex<f64>`).
pub trait Field: ComplexField<RealField = f64> + Copy {}

impl<T: ComplexField<RealField = f64> + Copy> Field for T {}

/// One bidiagonal block `J_i` (diagonal `-gamma`, subdiagonal `1…m`) with its coupling row `c_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainBlock {
    pub gamma: f64,
    /// `c_{i,0} … c_{i,m}`; the block size is `c.len()`.
    pub c: Vec<f64>,
}

impl ChainBlock {
    pub fn from_term(t: &crate::kernel::ExpTerm) -> Self {
        Self { gamma: t.exponent, c: t.coeffs() }
    }

    pub fn size(&self) -> usize {
        self.c.len()
    }
}

/// Augmented Jacobian in bordered form (mass matrix included for the leading block).
///
/// ```text
/// 𝓙 = [ J        f_I c_1ᵀ  …  f_I c_nᵀ ]      𝓜 = diag(M, I, …, I)
///     [ e_1 g_yᵀ  J_1                  ]
///     [ …                   ⋱          ]
///     [ e_n g_yᵀ               J_n     ]
/// ```
#[derive(Debug, Clone, PartialEq)]
pub struct StructuredMatrix {
    pub mass: DMatrix<f64>,
    pub jac: DMatrix<f64>,
    pub f_i: DVector<f64>,
    pub g_y: DVector<f64>,
    pub blocks: Vec<ChainBlock>,
}

impl StructuredMatrix {
    pub fn dense_dim(&self) -> usize {
        self.jac.nrows()
    }

    pub fn chain_dim(&self) -> usize {
        self.blocks.iter().map(ChainBlock::size).sum()
    }

    pub fn dim(&self) -> usize {
        self.dense_dim() + self.chain_dim()
    }

    /// Applies `shift·𝓜 − 𝓙` to `x` without assembling it.
    pub fn apply<T: Field>(&self, shift: T, x: &[T], out: &mut [T]) {
        let d = self.dense_dim();
        let (x0, xz) = x.split_at(d);
        let (o0, oz) = out.split_at_mut(d);
        let mut coupling = T::zero();
        let mut gy = T::zero();
        for j in 0..d {
            gy += T::from_real(self.g_y[j]) * x0[j];
        }
        let mut off = 0;
        for b in &self.blocks {
            let s = shift + T::from_real(b.gamma);
            for j in 0..b.size() {
                coupling += T::from_real(b.c[j]) * xz[off + j];
                let mut v = s * xz[off + j];
                if j == 0 {
                    v -= gy;
                } else {
                    v -= T::from_real(j as f64) * xz[off + j - 1];
                }
                oz[off + j] = v;
            }
            off += b.size();
        }
        for i in 0..d {
            let mut v = -T::from_real(self.f_i[i]) * coupling;
            for j in 0..d {
                v += (shift * T::from_real(self.mass[(i, j)]) - T::from_real(self.jac[(i, j)])) * x0[j];
            }
            o0[i] = v;
        }
    }
}

/// Either factorization behind one interface, chosen by the integrator.
#[derive(Debug, Clone)]
pub enum StageFactorization<T: Field> {
    Structured(StructuredFactorization<T>),
    Dense(DenseFactorization<T>),
}

impl<T: Field> StageFactorization<T> {
    pub fn solve_in_place(&self, rhs: &mut [T]) {
        match self {
            StageFactorization::Structured(f) => f.solve_in_place(rhs),
            StageFactorization::Dense(f) => f.solve_in_place(rhs),
        }
    }
}

/// Which linear algebra the integrator uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LinearAlgebra {
    #[default]
    Structured,
    Dense,
}

impl LinearAlgebra {
    pub fn factor<T: Field>(self, sys: &StructuredMatrix, shift: T) -> crate::Result<StageFactorization<T>> {
        Ok(match self {
            LinearAlgebra::Structured => StageFactorization::Structured(StructuredFactorization::new(sys, shift)?),
            LinearAlgebra::Dense => StageFactorization::Dense(DenseFactorization::new(sys, shift)?),
        })
    }
}
