//! Three-stage Radau IIA integrator (order 5) for stiff ODE/DAE/DDE systems
//! whose Jacobian has the bordered bidiagonal structure of the augmented
//! distributed-delay system.

mod chemo;
mod dense;
mod integrator;
pub mod tableau;

use crate::linalg::{ChainBlock, LinearAlgebra, StructuredMatrix};
use crate::problem::ToleranceLedger;
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

pub use chemo::solve_algebraic_chemo;
pub use dense::{DenseOutput, StepRecord};
pub use integrator::integrate;

/// Access to the solution at earlier times (history function before `t0`).
pub trait PastState {
    fn value(&self, t: f64, comp: usize) -> f64;
}

/// A system `𝓜 ẋ = F(t, x, x(t − lags))` the integrator can advance.
///
/// Implementations must be pure: the integrator may call any method with
/// trial states that are later discarded.
pub trait ImplicitSystem: Sync {
    fn dim(&self) -> usize;

    fn t0(&self) -> f64;

    fn initial_state(&self) -> Vec<f64>;

    /// Largest lag of any delayed lookup, 0 for non-delay systems.
    fn max_lag(&self) -> f64 {
        0.0
    }

    /// Delayed lookups only touch components `0..lookup_dim()`.
    fn lookup_dim(&self) -> usize {
        0
    }

    /// Solution before `t0`.
    fn history(&self, _t: f64, _comp: usize) -> f64 {
        0.0
    }

    fn rhs(&self, t: f64, x: &[f64], past: &dyn PastState, out: &mut [f64]);

    /// Jacobian blocks at `(t, x)`, ignoring dependencies through delayed arguments.
    /// The mass matrix is the `mass` block on the leading components and the identity on the chains.
    fn jacobian(&self, t: f64, x: &[f64], past: &dyn PastState) -> StructuredMatrix;

    /// Times the mesh has to contain (sorted, strictly inside the integration interval).
    fn breaking_points(&self) -> Vec<f64> {
        Vec::new()
    }
}

/// Settings of one integration run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntegratorConfig {
    pub ledger: ToleranceLedger,
    pub t_end: f64,
    pub h_init: f64,
    /// Maximal step size; non-positive means the interval length.
    pub h_max: f64,
    pub max_steps: usize,
    pub newton_max_iters: usize,
    /// Newton stopping tolerance; `None` derives it from the relative tolerance.
    pub newton_tol_factor: Option<f64>,
    pub safety: f64,
    /// Bounds on `h_new / h`.
    pub step_growth_bounds: (f64, f64),
    /// Contraction rate below which the Jacobian is kept for the next step.
    pub jacobian_refresh: f64,
    /// Predictive (Gustafsson) step-size control.
    pub predictive: bool,
    pub linear_algebra: LinearAlgebra,
    /// Constant step size without error control.
    pub fixed_step: Option<f64>,
    /// Keep the collocation polynomials of every step for all components.
    pub dense_output: bool,
    /// Times at which the solution is sampled.
    pub sample_times: Vec<f64>,
    /// Components reported in the samples; empty means all.
    pub sample_components: Vec<usize>,
}

impl IntegratorConfig {
    pub fn new(ledger: ToleranceLedger, t_end: f64, h_init: f64) -> Self {
        Self {
            ledger,
            t_end,
            h_init,
            h_max: 0.0,
            max_steps: 100_000,
            newton_max_iters: 7,
            newton_tol_factor: None,
            safety: 0.9,
            step_growth_bounds: (0.2, 8.0),
            jacobian_refresh: 0.001,
            predictive: true,
            linear_algebra: LinearAlgebra::Structured,
            fixed_step: None,
            dense_output: false,
            sample_times: Vec::new(),
            sample_components: Vec::new(),
        }
    }

    pub fn validate(&self, dim: usize, t0: f64) -> crate::Result<()> {
        use crate::error::domain;
        if self.ledger.atol.len() != dim || self.ledger.rtol.len() != dim {
            return Err(domain(format!("tolerance vectors must have length {dim}")));
        }
        if self.ledger.atol.iter().chain(&self.ledger.rtol).any(|&v| !(v > 0.0)) {
            return Err(domain("tolerances must be positive"));
        }
        if !(self.t_end > t0) {
            return Err(domain("t_end must exceed t0"));
        }
        if !(self.h_init > 0.0) {
            return Err(domain("h_init must be positive"));
        }
        if self.max_steps == 0 || self.newton_max_iters == 0 {
            return Err(domain("max_steps and newton_max_iters must be positive"));
        }
        if !(self.safety > 0.0 && self.safety < 1.0) {
            return Err(domain("safety must lie in (0,1)"));
        }
        let (lo, hi) = self.step_growth_bounds;
        if !(lo > 0.0 && lo < 1.0 && hi > 1.0) {
            return Err(domain("step growth bounds must satisfy 0 < lo < 1 < hi"));
        }
        if let Some(h) = self.fixed_step {
            if !(h > 0.0) {
                return Err(domain("fixed step must be positive"));
            }
        }
        Ok(())
    }
}

/// Run counters.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Stats {
    /// Accepted steps.
    pub n_steps: usize,
    /// Rejected attempts (error test failures, Newton failures, singular matrices).
    pub n_rejected: usize,
    pub n_fevals: usize,
    pub n_jac_evals: usize,
    /// Decompositions; the real matrix and the complex one count as one.
    pub n_lu: usize,
    /// Linear solves; a Newton iteration counts 3 (the complex solve counts twice), an error estimate 1.
    pub n_solves: usize,
    pub n_newton: usize,
}

/// Result of [`integrate`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntegrationReport {
    pub t_end: f64,
    pub y_end: Vec<f64>,
    pub samples: Vec<(f64, Vec<f64>)>,
    pub stats: Stats,
    /// Accepted mesh points including `t0`.
    pub mesh: Vec<f64>,
    /// Breaking points that were hit as mesh points.
    pub breaking_points_hit: Vec<f64>,
    #[serde(skip)]
    pub dense: Option<DenseOutput>,
}

/// Plain ODE `M ẏ = f(t, y)` with a finite-difference Jacobian.
pub struct DenseOde<F> {
    f: F,
    y0: Vec<f64>,
    t0: f64,
    mass: DMatrix<f64>,
}

impl<F> DenseOde<F>
where
    F: Fn(f64, &[f64], &mut [f64]) + Sync,
{
    pub fn new(f: F, t0: f64, y0: Vec<f64>) -> Self {
        let n = y0.len();
        Self { f, y0, t0, mass: DMatrix::identity(n, n) }
    }

    pub fn with_mass(mut self, mass: DMatrix<f64>) -> Self {
        self.mass = mass;
        self
    }
}

impl<F> ImplicitSystem for DenseOde<F>
where
    F: Fn(f64, &[f64], &mut [f64]) + Sync,
{
    fn dim(&self) -> usize {
        self.y0.len()
    }

    fn t0(&self) -> f64 {
        self.t0
    }

    fn initial_state(&self) -> Vec<f64> {
        self.y0.clone()
    }

    fn rhs(&self, t: f64, x: &[f64], _past: &dyn PastState, out: &mut [f64]) {
        (self.f)(t, x, out)
    }

    fn jacobian(&self, t: f64, x: &[f64], _past: &dyn PastState) -> StructuredMatrix {
        let n = x.len();
        let jac = crate::problem::fd_jacobian(n, x, |y, out| (self.f)(t, y, out));
        StructuredMatrix {
            mass: self.mass.clone(),
            jac,
            f_i: DVector::zeros(n),
            g_y: DVector::zeros(n),
            blocks: Vec::<ChainBlock>::new(),
        }
    }
}
