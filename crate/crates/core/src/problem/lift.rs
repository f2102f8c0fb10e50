use super::{DelayModel, DistributedDelayProblem, KernelSource};
use crate::error::{Error, Result};
use crate::kernel::KernelSpec;
use nalgebra::{DMatrix, DVector};
use std::sync::Arc;

/// Replaces a Pareto(α, β) distributed delay by `levels` delay equations and a
/// Pareto(α + levels, β) remainder.
///
/// With `I_k` the Pareto(α+k−1, β) integral, `k'(t) = −(α/β) k_{α+1}(t)` gives
/// `İ_k = (α_k/β)(g(t−β, y(t−β)) − I_{k+1})` for `t − β > t0`, `α_k = α + k − 1`.
/// The lifted variables sit after `y`; the remaining integral enters as `I_{levels+1}`.
pub fn pareto_alpha_lift(problem: &DistributedDelayProblem, levels: usize) -> Result<DistributedDelayProblem> {
    let (alpha, beta) = match problem.kernel {
        KernelSource::Spec(KernelSpec::Pareto { alpha, beta }) => (alpha, beta),
        _ => return Err(Error::InvalidProblem("alpha lift needs a Pareto kernel".into())),
    };
    if levels == 0 {
        return Err(Error::InvalidProblem("levels must be at least 1".into()));
    }
    let mut delays = problem.delays.clone();
    delays.push(beta);
    let model = Lifted {
        base: problem.model.clone(),
        d: problem.dim(),
        levels,
        alpha,
        beta,
        t0: problem.t0,
        base_delays: problem.delays.len(),
    };
    let mut y0 = problem.y0.clone();
    y0.resize(problem.dim() + levels, 0.0);
    DistributedDelayProblem::new(
        Arc::new(model),
        y0,
        (problem.t0, problem.t_f),
        delays,
        KernelSource::Spec(KernelSpec::Pareto { alpha: alpha + levels as f64, beta }),
    )
}

struct Lifted {
    base: Arc<dyn DelayModel>,
    d: usize,
    levels: usize,
    alpha: f64,
    beta: f64,
    t0: f64,
    base_delays: usize,
}

impl Lifted {
    fn n(&self) -> usize {
        self.d + self.levels
    }

    /// Base-model view of the delayed values (first `d` components of each base delay).
    fn base_delayed(&self, delayed: &[f64]) -> Vec<f64> {
        let n = self.n();
        (0..self.base_delays).flat_map(|k| delayed[k * n..k * n + self.d].iter().copied()).collect()
    }

    fn rate(&self, k: usize) -> f64 {
        (self.alpha + k as f64) / self.beta
    }
}

impl DelayModel for Lifted {
    fn dim(&self) -> usize {
        self.n()
    }

    fn mass(&self) -> DMatrix<f64> {
        let mut m = DMatrix::identity(self.n(), self.n());
        m.view_mut((0, 0), (self.d, self.d)).copy_from(&self.base.mass());
        m
    }

    fn rhs(&self, t: f64, y: &[f64], delayed: &[f64], integral: f64, out: &mut [f64]) {
        let d = self.d;
        let bd = self.base_delayed(delayed);
        self.base.rhs(t, &y[..d], &bd, y[d], &mut out[..d]);
        let g_lag = if t - self.beta > self.t0 {
            let off = self.base_delays * self.n();
            self.base.integrand(t - self.beta, &delayed[off..off + d])
        } else {
            0.0
        };
        for k in 0..self.levels {
            let next = if k + 1 < self.levels { y[d + k + 1] } else { integral };
            out[d + k] = self.rate(k) * (g_lag - next);
        }
    }

    fn integrand(&self, t: f64, y: &[f64]) -> f64 {
        self.base.integrand(t, &y[..self.d])
    }

    fn history(&self, t: f64, comp: usize) -> f64 {
        if comp < self.d {
            self.base.history(t, comp)
        } else {
            0.0
        }
    }

    fn jac_y(&self, t: f64, y: &[f64], delayed: &[f64], _integral: f64) -> DMatrix<f64> {
        let d = self.d;
        let bd = self.base_delayed(delayed);
        let mut j = DMatrix::zeros(self.n(), self.n());
        j.view_mut((0, 0), (d, d)).copy_from(&self.base.jac_y(t, &y[..d], &bd, y[d]));
        j.view_mut((0, d), (d, 1)).copy_from(&self.base.jac_integral(t, &y[..d], &bd, y[d]));
        for k in 0..self.levels - 1 {
            j[(d + k, d + k + 1)] = -self.rate(k);
        }
        j
    }

    fn jac_integral(&self, _t: f64, _y: &[f64], _delayed: &[f64], _integral: f64) -> DVector<f64> {
        let mut v = DVector::zeros(self.n());
        v[self.n() - 1] = -self.rate(self.levels - 1);
        v
    }

    fn integrand_grad(&self, t: f64, y: &[f64]) -> DVector<f64> {
        let mut v = DVector::zeros(self.n());
        v.rows_mut(0, self.d).copy_from(&self.base.integrand_grad(t, &y[..self.d]));
        v
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::{builtin_problem, Builtin};

    #[test]
    fn lift_shifts_exponent_and_dimension() {
        let p = builtin_problem(Builtin::Example2, 1).unwrap();
        let l = pareto_alpha_lift(&p, 2).unwrap();
        assert_eq!(l.dim(), 3);
        assert_eq!(l.y0, vec![p.y0[0], 0.0, 0.0]);
        assert_eq!(l.kernel, KernelSource::Spec(KernelSpec::Pareto { alpha: 2.5, beta: 1.0 }));
        assert_eq!(l.delays.len(), 2);
    }

    #[test]
    fn lifted_rows_vanish_before_beta() {
        let p = builtin_problem(Builtin::Example2, 1).unwrap();
        let l = pareto_alpha_lift(&p, 1).unwrap();
        let y = [0.3, 0.0];
        let delayed = [-0.2, 0.0, -0.5, 0.0];
        let mut out = [0.0; 2];
        l.model.rhs(0.5, &y, &delayed, 0.0, &mut out);
        assert_eq!(out[1], 0.0);
        l.model.rhs(1.5, &y, &delayed, 0.1, &mut out);
        assert!((out[1] - 0.5 * (-0.5 - 0.1)).abs() < 1e-15);
    }

    #[test]
    fn rejects_gamma() {
        let p = builtin_problem(Builtin::Example1, 1).unwrap();
        assert!(pareto_alpha_lift(&p, 1).is_err());
    }
}
