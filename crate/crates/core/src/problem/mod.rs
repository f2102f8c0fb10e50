//! Problem definitions and their augmented exponential-sum form.

mod augment;
mod breaking;
pub mod builtin;
mod ledger;
mod lift;

use crate::error::{Error, Result};
use crate::kernel::{ExponentialSumKernel, KernelSpec};
use nalgebra::{DMatrix, DVector};
use std::fmt;
use std::sync::Arc;

pub use augment::AugmentedSystem;
pub use breaking::{breaking_points, lattice_points};
pub use builtin::{builtin_problem, Builtin, ChemoParams, Formulation};
pub use ledger::ToleranceLedger;
pub use lift::pareto_alpha_lift;

/// Right-hand side of `M ẏ = f(t, y, y(t−τ_1), …, I)` with `I = ∫ k(t−s) g(s, y(s)) ds`.
///
/// `delayed` holds `y(t − τ_k)` for every delay, `dim()` values per delay.
/// Jacobian methods default to forward differences.
pub trait DelayModel: Send + Sync {
    fn dim(&self) -> usize;

    fn mass(&self) -> DMatrix<f64> {
        DMatrix::identity(self.dim(), self.dim())
    }

    fn rhs(&self, t: f64, y: &[f64], delayed: &[f64], integral: f64, out: &mut [f64]);

    /// Scalar integrand `g(t, y)`.
    fn integrand(&self, t: f64, y: &[f64]) -> f64;

    /// History `η(t)` for `t < t0`.
    fn history(&self, _t: f64, _comp: usize) -> f64 {
        f64::NAN
    }

    fn jac_y(&self, t: f64, y: &[f64], delayed: &[f64], integral: f64) -> DMatrix<f64> {
        fd_jacobian(self.dim(), y, |yy, out| self.rhs(t, yy, delayed, integral, out))
    }

    fn jac_integral(&self, t: f64, y: &[f64], delayed: &[f64], integral: f64) -> DVector<f64> {
        let n = self.dim();
        let del = (f64::EPSILON * integral.abs().max(1e-5)).sqrt();
        let mut f0 = vec![0.0; n];
        let mut f1 = vec![0.0; n];
        self.rhs(t, y, delayed, integral, &mut f0);
        self.rhs(t, y, delayed, integral + del, &mut f1);
        DVector::from_fn(n, |i, _| (f1[i] - f0[i]) / del)
    }

    fn integrand_grad(&self, t: f64, y: &[f64]) -> DVector<f64> {
        let g0 = self.integrand(t, y);
        let mut yy = y.to_vec();
        DVector::from_fn(y.len(), |i, _| {
            let del = (f64::EPSILON * y[i].abs().max(1e-5)).sqrt();
            yy[i] = y[i] + del;
            let d = (self.integrand(t, &yy) - g0) / del;
            yy[i] = y[i];
            d
        })
    }
}

/// Forward-difference Jacobian of `f: R^n → R^n` at `x`.
pub fn fd_jacobian(n: usize, x: &[f64], mut f: impl FnMut(&[f64], &mut [f64])) -> DMatrix<f64> {
    let mut f0 = vec![0.0; n];
    let mut f1 = vec![0.0; n];
    f(x, &mut f0);
    let mut xx = x.to_vec();
    let mut jac = DMatrix::zeros(n, x.len());
    for j in 0..x.len() {
        let del = (f64::EPSILON * x[j].abs().max(1e-5)).sqrt();
        xx[j] = x[j] + del;
        f(&xx, &mut f1);
        xx[j] = x[j];
        for i in 0..n {
            jac[(i, j)] = (f1[i] - f0[i]) / del;
        }
    }
    jac
}

/// Kernel of the distributed delay term.
#[derive(Debug, Clone, PartialEq)]
pub enum KernelSource {
    /// Approximated on demand for a requested accuracy.
    Spec(KernelSpec),
    Explicit(ExponentialSumKernel),
}

/// `M ẏ = f(t, y, y(t−τ), I(y)(t))`, `y(t0) = y0`, `y = η` before `t0`.
#[derive(Clone)]
pub struct DistributedDelayProblem {
    pub model: Arc<dyn DelayModel>,
    pub y0: Vec<f64>,
    pub t0: f64,
    pub t_f: f64,
    /// Discrete delays (zeros are dropped).
    pub delays: Vec<f64>,
    pub kernel: KernelSource,
}

impl fmt::Debug for DistributedDelayProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DistributedDelayProblem")
            .field("dim", &self.model.dim())
            .field("y0", &self.y0)
            .field("t0", &self.t0)
            .field("t_f", &self.t_f)
            .field("delays", &self.delays)
            .field("kernel", &self.kernel)
            .finish()
    }
}

impl DistributedDelayProblem {
    pub fn new(
        model: Arc<dyn DelayModel>,
        y0: Vec<f64>,
        t_span: (f64, f64),
        delays: Vec<f64>,
        kernel: KernelSource,
    ) -> Result<Self> {
        let p = Self {
            model,
            y0,
            t0: t_span.0,
            t_f: t_span.1,
            delays: delays.into_iter().filter(|&d| d != 0.0).collect(),
            kernel,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn dim(&self) -> usize {
        self.model.dim()
    }

    pub fn validate(&self) -> Result<()> {
        let d = self.model.dim();
        let bad = |m: &str| Err(Error::InvalidProblem(m.to_string()));
        if d == 0 {
            return bad("dimension must be at least 1");
        }
        if self.y0.len() != d {
            return bad("y0 length differs from the model dimension");
        }
        if !(self.t0 < self.t_f) {
            return bad("need t0 < t_f");
        }
        if self.delays.iter().any(|&tau| !(tau >= 0.0) || !tau.is_finite()) {
            return bad("delays must be nonnegative and finite");
        }
        let m = self.model.mass();
        if m.nrows() != d || m.ncols() != d {
            return bad("mass matrix has the wrong shape");
        }
        let tau = self.delays.iter().copied().fold(0.0, f64::max);
        if tau > 0.0 && (0..d).any(|c| !self.model.history(self.t0 - tau, c).is_finite()) {
            return bad("history must be defined on [t0 - tau, t0)");
        }
        match &self.kernel {
            KernelSource::Spec(s) => s.validate()?,
            KernelSource::Explicit(k) => k.validate()?,
        }
        Ok(())
    }
}
