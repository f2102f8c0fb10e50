//! `disdel sweep`: ε-ladders of the predefined experiments.

use crate::error::{unit_interval, usage, CliError, CliResult};
use crate::table::{float_list, Cell, Table};
use clap::{Args, ValueEnum};
use disdel::driver::{run, RunOutcome, RunSettings};
use disdel::kernel::gamma_sum_terms;
use disdel::linalg::{ChainBlock, LinearAlgebra, StructuredMatrix};
use disdel::problem::{builtin_problem, AugmentedSystem, Builtin, ChemoParams, Formulation};
use disdel::radau::{ImplicitSystem, PastState};
use rayon::prelude::*;
use std::time::Instant;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SweepTable {
    /// Example 1, Tol = 1e-8, ε from 1e-4 to 1e-11.
    T2,
    /// Example 1, Tol = ε, h0 = 0.1, ω ∈ {1, 10, 100}.
    T3,
    /// Example 2, Tol = 1e-8, h0 = Tol, ε from 1e-1 to 1e-11.
    T4,
    /// Chemotherapy model (set 2) as an ODE, Tol = ε.
    T7,
    /// Chemotherapy model (set 2), ODE against DAE.
    T8,
    /// Dense against structured factor-and-solve for set 1, run sequentially.
    #[value(name = "t6_timing")]
    T6Timing,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[arg(long, value_enum)]
    pub table: SweepTable,
    /// Replaces the table's ε ladder.
    #[arg(long, value_delimiter = ',')]
    pub eps: Option<Vec<f64>>,
    /// Replaces the table's tolerance (default: fixed per table, or ε).
    #[arg(long)]
    pub tol: Option<f64>,
    /// Replaces the table's ω values.
    #[arg(long, value_delimiter = ',')]
    pub omega: Option<Vec<f64>>,
    #[arg(long)]
    pub aux_scale: Option<f64>,
    /// Repetitions of the structured solve in `t6_timing` (the minimum time is kept).
    #[arg(long, default_value_t = 51)]
    pub reps: usize,
}

const RUN_HEADER: [&str; 20] = [
    "table",
    "problem",
    "formulation",
    "eps",
    "tol",
    "omega",
    "h_init",
    "h",
    "M",
    "N",
    "chain_dim",
    "error",
    "n_steps",
    "n_rejected",
    "n_fevals",
    "n_jac_evals",
    "n_lu",
    "n_solves",
    "n_newton",
    "breaking_points_hit",
];

fn ladder(lo_exp: i32, hi_exp: i32) -> Vec<f64> {
    (lo_exp..=hi_exp).map(|k| 10f64.powi(-k)).collect()
}

/// Thread pool honoring `DISDEL_THREADS`.
fn pool() -> CliResult<rayon::ThreadPool> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var("DISDEL_THREADS") {
        let n: usize = v.trim().parse().map_err(|_| usage(format!("DISDEL_THREADS must be a positive integer, got {v:?}")))?;
        if n == 0 {
            return Err(usage("DISDEL_THREADS must be positive"));
        }
        b = b.num_threads(n);
    }
    b.build().map_err(|e| CliError::Numerical(e.to_string()))
}

/// The settings of each row, in output order.
pub fn jobs(a: &SweepArgs) -> CliResult<Vec<RunSettings>> {
    let eps_or = |default: Vec<f64>| a.eps.clone().unwrap_or(default);
    let omegas = |default: Vec<f64>| a.omega.clone().unwrap_or(default);
    let mut out = Vec::new();
    match a.table {
        SweepTable::T2 => {
            for eps in eps_or(ladder(4, 11)) {
                for omega in omegas(vec![1.0]) {
                    let mut s = RunSettings::new(Builtin::Example1, eps, a.tol.unwrap_or(1e-8));
                    s.omega = omega;
                    out.push(s);
                }
            }
        }
        SweepTable::T3 => {
            for eps in eps_or(vec![1e-4, 1e-6, 1e-8, 1e-10]) {
                for omega in omegas(vec![1.0, 10.0, 100.0]) {
                    let mut s = RunSettings::new(Builtin::Example1, eps, a.tol.unwrap_or(eps));
                    s.omega = omega;
                    s.h_init = Some(0.1);
                    out.push(s);
                }
            }
        }
        SweepTable::T4 => {
            for eps in eps_or(ladder(1, 11)) {
                for omega in omegas(vec![1.0]) {
                    let tol = a.tol.unwrap_or(1e-8);
                    let mut s = RunSettings::new(Builtin::Example2, eps, tol);
                    s.omega = omega;
                    s.h_init = Some(tol);
                    out.push(s);
                }
            }
        }
        SweepTable::T7 | SweepTable::T8 => {
            let forms: &[Formulation] =
                if a.table == SweepTable::T7 { &[Formulation::Ode] } else { &[Formulation::Ode, Formulation::Dae] };
            for eps in eps_or(vec![1e-3, 1e-5, 1e-7, 1e-9, 1e-11]) {
                for &f in forms {
                    for omega in omegas(vec![100.0]) {
                        let mut s = RunSettings::new(Builtin::chemo(f), eps, a.tol.unwrap_or(eps));
                        s.param_set = 2;
                        s.omega = omega;
                        s.aux_scale = a.aux_scale.unwrap_or(1e-2);
                        out.push(s);
                    }
                }
            }
        }
        SweepTable::T6Timing => unreachable!("timing rows are not integration runs"),
    }
    if a.table != SweepTable::T7 && a.table != SweepTable::T8 {
        if let Some(x) = a.aux_scale {
            out.iter_mut().for_each(|s| s.aux_scale = x);
        }
    }
    for s in &out {
        unit_interval("eps", s.eps)?;
        unit_interval("tol", s.tol)?;
        if !(s.omega >= 1.0) {
            return Err(usage(format!("--omega must be at least 1, got {}", s.omega)));
        }
        if !(s.aux_scale > 0.0) {
            return Err(usage("--aux-scale must be positive"));
        }
    }
    Ok(out)
}

fn run_row(table: &str, o: &RunOutcome) -> Vec<Cell> {
    let s = &o.settings;
    let st = &o.report.stats;
    let p = o.params.as_ref();
    vec![
        table.into(),
        s.problem.name().into(),
        crate::report::formulation(s.problem).map_or(Cell::Empty, Cell::from),
        s.eps.into(),
        s.tol.into(),
        s.omega.into(),
        s.h_init.unwrap_or_else(|| s.problem.default_h_init(s.eps, s.tol)).into(),
        p.map(|p| p.h_quad).into(),
        p.map_or(Cell::Empty, |p| p.m_lo.into()),
        p.map_or(Cell::Empty, |p| p.n_hi.into()),
        o.chain_dim.into(),
        o.error.into(),
        st.n_steps.into(),
        st.n_rejected.into(),
        st.n_fevals.into(),
        st.n_jac_evals.into(),
        st.n_lu.into(),
        st.n_solves.into(),
        st.n_newton.into(),
        float_list(&o.report.breaking_points_hit).into(),
    ]
}

pub fn cmd_sweep(a: &SweepArgs) -> CliResult<Table> {
    if a.table == SweepTable::T6Timing {
        return timing(a);
    }
    let name = a.table.to_possible_value().expect("named").get_name().to_string();
    let jobs = jobs(a)?;
    // rows are collected by index, so completion order does not matter
    let results: Vec<_> = pool()?.install(|| jobs.par_iter().map(run).collect());
    let mut t = Table::new(&RUN_HEADER);
    for r in results {
        t.push(run_row(&name, &r?));
    }
    Ok(t)
}

struct Frozen;

impl PastState for Frozen {
    fn value(&self, _t: f64, _comp: usize) -> f64 {
        0.0
    }
}

/// Best-of-`reps` wall time of one factorization and solve at a real shift.
fn time_cycle(sys: &StructuredMatrix, la: LinearAlgebra, reps: usize) -> CliResult<f64> {
    let rhs: Vec<f64> = (0..sys.dim()).map(|i| (i as f64 * 0.37).sin()).collect();
    let mut best = f64::INFINITY;
    for _ in 0..reps.max(1) {
        let mut b = rhs.clone();
        let start = Instant::now();
        la.factor(sys, 36.0)?.solve_in_place(&mut b);
        std::hint::black_box(&b);
        best = best.min(start.elapsed().as_secs_f64());
    }
    Ok(best)
}

fn timing(a: &SweepArgs) -> CliResult<Table> {
    let c = ChemoParams::set(1)?;
    let mut t = Table::new(&["table", "eps", "M", "N", "n_z", "n_z_merged", "dense_over_structured"]);
    for eps in a.eps.clone().unwrap_or(vec![1e-3, 1e-4, 1e-6, 1e-7, 1e-9, 1e-10]) {
        unit_interval("eps", eps)?;
        let aug = AugmentedSystem::with_eps(builtin_problem(Builtin::Example3Ode, 1)?, eps, 0.0)?;
        let params = aug.params.ok_or_else(|| CliError::Numerical("no kernel parameters".into()))?;
        let mut sys = aug.jacobian(0.0, &aug.initial_state(), &Frozen);
        // one chain per index M ≤ n < N, as before merging equal exponents
        sys.blocks = gamma_sum_terms(c.kappa, c.alpha(), &params)?.iter().map(ChainBlock::from_term).collect();
        let dense = time_cycle(&sys, LinearAlgebra::Dense, 3)?;
        let structured = time_cycle(&sys, LinearAlgebra::Structured, a.reps)?;
        t.push(vec![
            "t6_timing".into(),
            eps.into(),
            params.m_lo.into(),
            params.n_hi.into(),
            sys.chain_dim().into(),
            aug.chain_dim().into(),
            (dense / structured).into(),
        ]);
    }
    Ok(t)
}
