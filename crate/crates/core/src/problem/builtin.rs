//! The three test problems: a gamma-kernel equation with known solution, a
//! Pareto-kernel equation with a discrete delay, and a chemotherapy model.

use super::{DelayModel, DistributedDelayProblem, KernelSource};
use crate::error::{Error, Result};
use crate::kernel::KernelSpec;
use crate::radau::solve_algebraic_chemo;
use crate::specfun::erf;
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_4, PI};
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Builtin {
    Example1,
    Example2,
    Example3Ode,
    Example3Dae,
}

impl Builtin {
    pub const ALL: [Builtin; 4] = [Builtin::Example1, Builtin::Example2, Builtin::Example3Ode, Builtin::Example3Dae];

    pub fn name(self) -> &'static str {
        match self {
            Builtin::Example1 => "example1",
            Builtin::Example2 => "example2",
            Builtin::Example3Ode => "example3_ode",
            Builtin::Example3Dae => "example3_dae",
        }
    }

    pub fn chemo(formulation: Formulation) -> Self {
        match formulation {
            Formulation::Ode => Builtin::Example3Ode,
            Formulation::Dae => Builtin::Example3Dae,
        }
    }

    /// Default first step for accuracy `eps` and tolerance `tol`.
    pub fn default_h_init(self, eps: f64, tol: f64) -> f64 {
        match self {
            Builtin::Example1 => eps,
            Builtin::Example2 => tol,
            Builtin::Example3Ode | Builtin::Example3Dae => eps.max(1e-5),
        }
    }

    /// Number of breaking points scheduled by default (`None`: all up to `t_f`).
    pub fn default_breaking_points(self) -> Option<usize> {
        match self {
            Builtin::Example2 => Some(10),
            _ => None,
        }
    }
}

impl fmt::Display for Builtin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Builtin {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Builtin::ALL
            .into_iter()
            .find(|b| b.name() == s)
            .ok_or_else(|| Error::InvalidProblem(format!("unknown problem {s:?}")))
    }
}

/// How the drug amount `A` of the chemotherapy model is represented.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Formulation {
    /// `Ȧ = −V_max A / (K_m + A/V)`.
    #[default]
    Ode,
    /// `0 = A_0 exp(−(A − A_0)/(K_m V) − V_max (t − t_0)/K_m) − A`.
    Dae,
}

impl FromStr for Formulation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ode" => Ok(Formulation::Ode),
            "dae" => Ok(Formulation::Dae),
            _ => Err(Error::InvalidProblem(format!("unknown formulation {s:?}"))),
        }
    }
}

/// Parameters of the chemotherapy model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChemoParams {
    pub nu: f64,
    pub kappa: f64,
    pub w0: f64,
    pub gamma: f64,
    pub ks: f64,
    pub vmax: f64,
    pub km: f64,
    pub v: f64,
    pub a0: f64,
    pub t_f: f64,
}

impl ChemoParams {
    pub fn set(n: u32) -> Result<Self> {
        let (nu, scale, gamma, ks, vmax, km, v) = match n {
            1 => (0.964, 47.5, 0.664, 0.0328, 77.2, 16.9, 1.35),
            2 => (1.46, 55.6, 0.507, 0.0213, 100.0, 22.0, 1.03),
            _ => return Err(Error::InvalidProblem(format!("parameter set {n} does not exist"))),
        };
        Ok(Self { nu, kappa: nu / scale, w0: 14.4, gamma, ks, vmax, km, v, a0: 127.0, t_f: 100.0 })
    }

    /// Exponent of the gamma kernel.
    pub fn alpha(&self) -> f64 {
        1.0 - self.nu
    }

    pub fn kernel(&self) -> KernelSpec {
        KernelSpec::Gamma { kappa: self.kappa, alpha: self.alpha() }
    }

    /// Exact drug amount at time `t` (starting at `t = 0`).
    pub fn drug(&self, t: f64) -> Result<f64> {
        solve_algebraic_chemo(self.a0, self.km, self.v, self.vmax, t, 0.0, self.a0)
    }
}

/// Builds one of the test problems. `param_set` selects the chemotherapy row
/// and must be 1 for the other problems.
pub fn builtin_problem(name: Builtin, param_set: u32) -> Result<DistributedDelayProblem> {
    if !matches!(name, Builtin::Example3Ode | Builtin::Example3Dae) && param_set != 1 {
        return Err(Error::InvalidProblem(format!("{name} has a single parameter set")));
    }
    match name {
        Builtin::Example1 => DistributedDelayProblem::new(
            Arc::new(Example1),
            vec![0.0],
            (0.0, 50.0),
            vec![],
            KernelSource::Spec(KernelSpec::Gamma { kappa: 0.25, alpha: 0.5 }),
        ),
        Builtin::Example2 => DistributedDelayProblem::new(
            Arc::new(Example2),
            vec![0.0],
            (0.0, 10.0),
            vec![FRAC_PI_4],
            KernelSource::Spec(KernelSpec::Pareto { alpha: 0.5, beta: 1.0 }),
        ),
        Builtin::Example3Ode | Builtin::Example3Dae => {
            let p = ChemoParams::set(param_set)?;
            let formulation = if name == Builtin::Example3Dae { Formulation::Dae } else { Formulation::Ode };
            DistributedDelayProblem::new(
                Arc::new(Chemo { p, formulation }),
                vec![p.w0, p.w0, p.a0],
                (0.0, p.t_f),
                vec![],
                KernelSource::Spec(p.kernel()),
            )
        }
    }
}

/// `ẏ = (1−y) erf(√t/2) − e^{−t/4}√t/√π + I + 1/2`, exact solution `y = t/2`.
struct Example1;

impl DelayModel for Example1 {
    fn dim(&self) -> usize {
        1
    }

    fn rhs(&self, t: f64, y: &[f64], _delayed: &[f64], integral: f64, out: &mut [f64]) {
        let st = t.max(0.0).sqrt();
        out[0] = (1.0 - y[0]) * erf(st / 2.0) - (-t / 4.0).exp() * st / PI.sqrt() + integral + 0.5;
    }

    fn integrand(&self, _t: f64, y: &[f64]) -> f64 {
        y[0]
    }

    fn jac_y(&self, t: f64, _y: &[f64], _delayed: &[f64], _integral: f64) -> DMatrix<f64> {
        DMatrix::from_element(1, 1, -erf(t.max(0.0).sqrt() / 2.0))
    }

    fn jac_integral(&self, _t: f64, _y: &[f64], _delayed: &[f64], _integral: f64) -> DVector<f64> {
        DVector::from_element(1, 1.0)
    }

    fn integrand_grad(&self, _t: f64, _y: &[f64]) -> DVector<f64> {
        DVector::from_element(1, 1.0)
    }
}

/// `ẏ = −5 I − (y(t−τ) − 2)/(y + 1)`, `y(t) = t` for `t ≤ 0`.
struct Example2;

impl DelayModel for Example2 {
    fn dim(&self) -> usize {
        1
    }

    fn rhs(&self, _t: f64, y: &[f64], delayed: &[f64], integral: f64, out: &mut [f64]) {
        out[0] = -5.0 * integral - (delayed[0] - 2.0) / (y[0] + 1.0);
    }

    fn integrand(&self, _t: f64, y: &[f64]) -> f64 {
        y[0]
    }

    fn history(&self, t: f64, _comp: usize) -> f64 {
        t
    }

    fn jac_y(&self, _t: f64, y: &[f64], delayed: &[f64], _integral: f64) -> DMatrix<f64> {
        DMatrix::from_element(1, 1, (delayed[0] - 2.0) / (y[0] + 1.0).powi(2))
    }

    fn jac_integral(&self, _t: f64, _y: &[f64], _delayed: &[f64], _integral: f64) -> DVector<f64> {
        DVector::from_element(1, -5.0)
    }

    fn integrand_grad(&self, _t: f64, _y: &[f64]) -> DVector<f64> {
        DVector::from_element(1, 1.0)
    }
}

/// State `(y, w, A)`: precursor cells, circulating cells, drug amount.
struct Chemo {
    p: ChemoParams,
    formulation: Formulation,
}

impl Chemo {
    fn drug_residual(&self, t: f64, a: f64) -> (f64, f64) {
        let p = &self.p;
        let e = p.a0 * (-(a - p.a0) / (p.km * p.v) - p.vmax * t / p.km).exp();
        (e - a, -e / (p.km * p.v) - 1.0)
    }
}

impl DelayModel for Chemo {
    fn dim(&self) -> usize {
        3
    }

    fn mass(&self) -> DMatrix<f64> {
        let a = if self.formulation == Formulation::Dae { 0.0 } else { 1.0 };
        DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 1.0, a]))
    }

    fn rhs(&self, t: f64, x: &[f64], _delayed: &[f64], integral: f64, out: &mut [f64]) {
        let p = &self.p;
        let (y, w, a) = (x[0], x[1], x[2]);
        out[0] = (p.kappa * (p.w0 / w).powf(p.gamma) - p.ks * a / p.v - p.kappa) * y;
        out[1] = p.kappa * (integral - w);
        out[2] = match self.formulation {
            Formulation::Ode => -p.vmax * a / (p.km + a / p.v),
            Formulation::Dae => self.drug_residual(t, a).0,
        };
    }

    fn integrand(&self, _t: f64, x: &[f64]) -> f64 {
        x[0]
    }

    fn jac_y(&self, t: f64, x: &[f64], _delayed: &[f64], _integral: f64) -> DMatrix<f64> {
        let p = &self.p;
        let (y, w, a) = (x[0], x[1], x[2]);
        let r = (p.w0 / w).powf(p.gamma);
        let mut j = DMatrix::zeros(3, 3);
        j[(0, 0)] = p.kappa * r - p.ks * a / p.v - p.kappa;
        j[(0, 1)] = -p.kappa * p.gamma * r / w * y;
        j[(0, 2)] = -p.ks * y / p.v;
        j[(1, 1)] = -p.kappa;
        j[(2, 2)] = match self.formulation {
            Formulation::Ode => -p.vmax * p.km / (p.km + a / p.v).powi(2),
            Formulation::Dae => self.drug_residual(t, a).1,
        };
        j
    }

    fn jac_integral(&self, _t: f64, _y: &[f64], _delayed: &[f64], _integral: f64) -> DVector<f64> {
        DVector::from_vec(vec![0.0, self.p.kappa, 0.0])
    }

    fn integrand_grad(&self, _t: f64, _y: &[f64]) -> DVector<f64> {
        DVector::from_vec(vec![1.0, 0.0, 0.0])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::fd_jacobian;

    #[test]
    fn names_round_trip() {
        for b in Builtin::ALL {
            assert_eq!(b.name().parse::<Builtin>().unwrap(), b);
        }
        assert!("example4".parse::<Builtin>().is_err());
        assert!(builtin_problem(Builtin::Example3Ode, 3).is_err());
        assert!(builtin_problem(Builtin::Example1, 2).is_err());
    }

    #[test]
    fn example1_exact_solution_satisfies_equation() {
        let p = builtin_problem(Builtin::Example1, 1).unwrap();
        for &t in &[0.5, 3.0, 20.0, 50.0] {
            let st: f64 = (t as f64).sqrt();
            let integral = (t - 2.0) / 2.0 * erf(st / 2.0) + (-t / 4.0f64).exp() * st / PI.sqrt();
            let mut out = [0.0];
            p.model.rhs(t, &[t / 2.0], &[], integral, &mut out);
            assert!((out[0] - 0.5).abs() < 1e-14, "{t}: {}", out[0]);
        }
    }

    #[test]
    fn chemo_parameters() {
        let p = ChemoParams::set(1).unwrap();
        assert_eq!((p.nu, p.w0, p.gamma, p.ks, p.vmax, p.km, p.v), (0.964, 14.4, 0.664, 0.0328, 77.2, 16.9, 1.35));
        assert!((p.kappa - 0.964 / 47.5).abs() < 1e-16);
        let p2 = ChemoParams::set(2).unwrap();
        assert!((p2.alpha() + 0.46).abs() < 1e-12);
    }

    #[test]
    fn analytic_jacobians_match_differences() {
        for b in Builtin::ALL {
            let p = builtin_problem(b, 1).unwrap();
            let m = &p.model;
            let y: Vec<f64> = match b {
                Builtin::Example3Ode | Builtin::Example3Dae => vec![3.0, 12.0, 40.0],
                _ => vec![0.7],
            };
            let delayed = vec![0.3; y.len() * p.delays.len()];
            let (t, i) = (1.7, 0.4);
            let fd = fd_jacobian(y.len(), &y, |yy, out| m.rhs(t, yy, &delayed, i, out));
            let an = m.jac_y(t, &y, &delayed, i);
            assert!((fd - an).abs().max() < 1e-6, "{b}");
        }
    }

    #[test]
    fn dae_initial_state_is_consistent() {
        let p = builtin_problem(Builtin::Example3Dae, 2).unwrap();
        let mut out = [0.0; 3];
        p.model.rhs(0.0, &p.y0, &[], 0.0, &mut out);
        assert_eq!(out[2], 0.0);
        assert_eq!(p.model.mass()[(2, 2)], 0.0);
    }
}
