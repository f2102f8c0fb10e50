use super::{lattice_points, DistributedDelayProblem, KernelSource};
use crate::error::{Error, Result};
use crate::kernel::{ApproximationParams, ExponentialSumKernel, KernelSpec};
use crate::linalg::{ChainBlock, StructuredMatrix};
use crate::radau::{ImplicitSystem, PastState};
use nalgebra::{DMatrix, DVector};
use std::ops::Range;

/// The augmented system: `[y, y_aux, z_1, …, z_n]` with
///
/// ```text
/// M ẏ   = f(t, y, y(t−τ), I)        I = y_aux (or y_aux(t−β) for a shifted kernel)
/// 0     = Σ c_{i,j} z_{i,j} − y_aux
/// ż_i   = J_i z_i + e_i g(t, y)
/// ```
#[derive(Debug, Clone)]
pub struct AugmentedSystem {
    pub base: DistributedDelayProblem,
    pub kernel: ExponentialSumKernel,
    pub params: Option<ApproximationParams>,
    d: usize,
    mass: DMatrix<f64>,
    blocks: Vec<ChainBlock>,
    n_z: usize,
    breaking_points: Vec<f64>,
}

impl AugmentedSystem {
    /// Builds the kernel from the problem's spec with the given parameters.
    pub fn new(problem: DistributedDelayProblem, params: &ApproximationParams) -> Result<Self> {
        let spec = match &problem.kernel {
            KernelSource::Spec(s) => *s,
            KernelSource::Explicit(_) => {
                return Err(Error::InvalidProblem("explicit kernels take no approximation parameters".into()))
            }
        };
        params.validate()?;
        let kernel = spec.build(params)?;
        let mut s = Self::with_kernel(problem, kernel)?;
        s.params = Some(*params);
        Ok(s)
    }

    /// Chooses the approximation parameters for accuracy `eps` on the problem's interval.
    pub fn with_eps(problem: DistributedDelayProblem, eps: f64, delta_min: f64) -> Result<Self> {
        let spec: KernelSpec = match &problem.kernel {
            KernelSource::Spec(s) => *s,
            KernelSource::Explicit(k) => {
                let k = k.clone();
                return Self::with_kernel(problem, k);
            }
        };
        let params = spec.approximation_params(eps, delta_min, problem.t_f - problem.t0)?;
        Self::new(problem, &params)
    }

    /// Uses `kernel` as is (its offset acts as the lag `β`).
    pub fn with_kernel(problem: DistributedDelayProblem, kernel: ExponentialSumKernel) -> Result<Self> {
        problem.validate()?;
        kernel.validate()?;
        if !(kernel.offset >= 0.0) {
            return Err(Error::InvalidKernel("negative offset".into()));
        }
        let d = problem.dim();
        let mut mass = DMatrix::zeros(d + 1, d + 1);
        mass.view_mut((0, 0), (d, d)).copy_from(&problem.model.mass());
        let blocks: Vec<ChainBlock> =
            kernel.terms.iter().map(ChainBlock::from_term).collect();
        if blocks.iter().flat_map(|b| &b.c).any(|c| !c.is_finite()) {
            return Err(Error::InvalidKernel("coefficients overflow".into()));
        }
        let n_z = blocks.iter().map(ChainBlock::size).sum();
        let mut s = Self { base: problem, kernel, params: None, d, mass, blocks, n_z, breaking_points: Vec::new() };
        s.breaking_points = s.default_breaking_points(usize::MAX);
        Ok(s)
    }

    fn default_breaking_points(&self, max_count: usize) -> Vec<f64> {
        let span = self.base.t_f - self.base.t0;
        lattice_points(&self.lags(), span, max_count)
            .into_iter()
            .map(|v| self.base.t0 + v)
            .filter(|&v| v < self.base.t_f)
            .collect()
    }

    /// Keeps only the first `max_count` breaking points.
    pub fn with_breaking_points(mut self, max_count: usize) -> Self {
        self.breaking_points = self.default_breaking_points(max_count);
        self
    }

    /// Lag of the integral variable (0 for unshifted kernels).
    pub fn pareto_shift(&self) -> f64 {
        self.kernel.offset
    }

    /// All lags: the discrete delays and the kernel shift.
    pub fn lags(&self) -> Vec<f64> {
        let mut l = self.base.delays.clone();
        if self.kernel.offset > 0.0 {
            l.push(self.kernel.offset);
        }
        l
    }

    /// Dimension `d` of the original state.
    pub fn state_dim(&self) -> usize {
        self.d
    }

    pub fn aux_index(&self) -> usize {
        self.d
    }

    pub fn y_range(&self) -> Range<usize> {
        0..self.d
    }

    pub fn z_range(&self) -> Range<usize> {
        self.d + 1..self.d + 1 + self.n_z
    }

    pub fn chain_dim(&self) -> usize {
        self.n_z
    }

    pub fn total_dim(&self) -> usize {
        self.d + 1 + self.n_z
    }

    /// Mass matrix of the `(y, y_aux)` block.
    pub fn dense_mass(&self) -> &DMatrix<f64> {
        &self.mass
    }

    pub fn blocks(&self) -> &[ChainBlock] {
        &self.blocks
    }

    /// Number of algebraic rows (zero rows of the mass matrix).
    pub fn algebraic_rows(&self) -> usize {
        (0..=self.d).filter(|&i| self.mass.row(i).iter().all(|&v| v == 0.0)).count()
    }

    fn delayed_values(&self, t: f64, past: &dyn PastState) -> Vec<f64> {
        let d = self.d;
        let mut v = Vec::with_capacity(d * self.base.delays.len());
        for &tau in &self.base.delays {
            for c in 0..d {
                v.push(past.value(t - tau, c));
            }
        }
        v
    }

    fn integral(&self, t: f64, x: &[f64], past: &dyn PastState) -> f64 {
        let beta = self.kernel.offset;
        if beta > 0.0 {
            if t - beta <= self.base.t0 {
                0.0
            } else {
                past.value(t - beta, self.d)
            }
        } else {
            x[self.d]
        }
    }
}

impl ImplicitSystem for AugmentedSystem {
    fn dim(&self) -> usize {
        self.total_dim()
    }

    fn t0(&self) -> f64 {
        self.base.t0
    }

    fn initial_state(&self) -> Vec<f64> {
        let mut x = vec![0.0; self.total_dim()];
        x[..self.d].copy_from_slice(&self.base.y0);
        x
    }

    fn max_lag(&self) -> f64 {
        self.lags().into_iter().fold(0.0, f64::max)
    }

    fn lookup_dim(&self) -> usize {
        if self.max_lag() > 0.0 {
            self.d + 1
        } else {
            0
        }
    }

    fn history(&self, t: f64, comp: usize) -> f64 {
        if comp < self.d {
            self.base.model.history(t, comp)
        } else {
            0.0
        }
    }

    fn rhs(&self, t: f64, x: &[f64], past: &dyn PastState, out: &mut [f64]) {
        let d = self.d;
        let delayed = self.delayed_values(t, past);
        let integral = self.integral(t, x, past);
        let y = &x[..d];
        self.base.model.rhs(t, y, &delayed, integral, &mut out[..d]);
        let g = self.base.model.integrand(t, y);
        let z = &x[d + 1..];
        let dz = &mut out[d + 1..];
        let mut sum = 0.0;
        let mut off = 0;
        for b in &self.blocks {
            for j in 0..b.size() {
                let zj = z[off + j];
                sum += b.c[j] * zj;
                let src = if j == 0 { g } else { j as f64 * z[off + j - 1] };
                dz[off + j] = src - b.gamma * zj;
            }
            off += b.size();
        }
        out[d] = sum - x[d];
    }

    fn jacobian(&self, t: f64, x: &[f64], past: &dyn PastState) -> StructuredMatrix {
        let d = self.d;
        let delayed = self.delayed_values(t, past);
        let integral = self.integral(t, x, past);
        let y = &x[..d];
        let model = &self.base.model;
        let mut jac = DMatrix::zeros(d + 1, d + 1);
        jac.view_mut((0, 0), (d, d)).copy_from(&model.jac_y(t, y, &delayed, integral));
        if self.kernel.offset == 0.0 {
            let fi = model.jac_integral(t, y, &delayed, integral);
            jac.view_mut((0, d), (d, 1)).copy_from(&fi);
        }
        jac[(d, d)] = -1.0;
        let mut f_i = DVector::zeros(d + 1);
        f_i[d] = 1.0;
        let mut g_y = DVector::zeros(d + 1);
        g_y.rows_mut(0, d).copy_from(&model.integrand_grad(t, y));
        StructuredMatrix { mass: self.mass.clone(), jac, f_i, g_y, blocks: self.blocks.clone() }
    }

    fn breaking_points(&self) -> Vec<f64> {
        self.breaking_points.clone()
    }
}
