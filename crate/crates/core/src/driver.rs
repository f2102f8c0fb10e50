//! One-call runs of the built-in problems: kernel construction, augmentation,
//! tolerance ledger, integration and error against the known reference.

use crate::error::Result;
use crate::kernel::ApproximationParams;
use crate::linalg::LinearAlgebra;
use crate::oracle::{ClosedForm, CHEMO_SET2_REFERENCE, EXAMPLE2_REFERENCE};
use crate::problem::{builtin_problem, pareto_alpha_lift, AugmentedSystem, Builtin, ToleranceLedger};
use crate::radau::{integrate, IntegrationReport, IntegratorConfig};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSettings {
    pub problem: Builtin,
    pub param_set: u32,
    /// Kernel approximation accuracy.
    pub eps: f64,
    pub tol: f64,
    pub omega: f64,
    pub aux_scale: f64,
    /// `None` picks the problem's default.
    pub h_init: Option<f64>,
    pub delta_min: f64,
    /// `None` picks the problem's default.
    pub breaking_points: Option<usize>,
    /// Pareto lift levels (0: none).
    pub lift_levels: usize,
    pub linear_algebra: LinearAlgebra,
    pub sample_times: Vec<f64>,
    pub max_steps: usize,
}

impl RunSettings {
    pub fn new(problem: Builtin, eps: f64, tol: f64) -> Self {
        Self {
            problem,
            param_set: 1,
            eps,
            tol,
            omega: 1.0,
            aux_scale: 1.0,
            h_init: None,
            delta_min: 0.0,
            breaking_points: None,
            lift_levels: 0,
            linear_algebra: LinearAlgebra::Structured,
            sample_times: Vec::new(),
            max_steps: 100_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunOutcome {
    pub settings: RunSettings,
    pub params: Option<ApproximationParams>,
    pub state_dim: usize,
    pub chain_dim: usize,
    pub total_dim: usize,
    pub breaking_points: Vec<f64>,
    pub report: IntegrationReport,
    /// Relative error against the reference, where one is known.
    pub error: Option<f64>,
}

/// Builds the augmented system described by `s`.
pub fn build_system(s: &RunSettings) -> Result<AugmentedSystem> {
    let mut problem = builtin_problem(s.problem, s.param_set)?;
    if s.lift_levels > 0 {
        problem = pareto_alpha_lift(&problem, s.lift_levels)?;
    }
    let sys = AugmentedSystem::with_eps(problem, s.eps, s.delta_min)?;
    Ok(match s.breaking_points.or(s.problem.default_breaking_points()) {
        Some(k) => sys.with_breaking_points(k),
        None => sys,
    })
}

pub fn run(s: &RunSettings) -> Result<RunOutcome> {
    let sys = build_system(s)?;
    let ledger = ToleranceLedger::new(&sys, s.tol, s.omega, s.aux_scale)?;
    let h0 = s.h_init.unwrap_or_else(|| s.problem.default_h_init(s.eps, s.tol));
    let mut cfg = IntegratorConfig::new(ledger, sys.base.t_f, h0);
    cfg.linear_algebra = s.linear_algebra;
    cfg.sample_times = s.sample_times.clone();
    cfg.max_steps = s.max_steps;
    let report = integrate(&sys, &cfg)?;
    let error = reference_error(s.problem, s.param_set, &report.y_end);
    Ok(RunOutcome {
        settings: s.clone(),
        params: sys.params,
        state_dim: sys.state_dim(),
        chain_dim: sys.chain_dim(),
        total_dim: sys.total_dim(),
        breaking_points: crate::radau::ImplicitSystem::breaking_points(&sys),
        report,
        error,
    })
}

/// Relative error of the final state: `y` for the first two problems, the
/// larger of the `y` and `w` errors for the chemotherapy model (set 2 only).
pub fn reference_error(problem: Builtin, param_set: u32, y_end: &[f64]) -> Option<f64> {
    let rel = |v: f64, r: f64| (v - r).abs() / r.abs();
    match problem {
        Builtin::Example1 => {
            let r = ClosedForm::Example1Solution.eval(50.0).ok()?;
            Some(rel(y_end[0], r))
        }
        Builtin::Example2 => Some(rel(y_end[0], EXAMPLE2_REFERENCE)),
        Builtin::Example3Ode | Builtin::Example3Dae if param_set == 2 => {
            let (y, w) = CHEMO_SET2_REFERENCE;
            Some(rel(y_end[0], y).max(rel(y_end[1], w)))
        }
        _ => None,
    }
}
