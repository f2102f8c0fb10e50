//! `disdel run` report: one-row CSV summary or JSON with samples.

use crate::config::RunConfig;
use crate::error::CliResult;
use crate::table::{float_list, Cell, Table};
use disdel::driver::{run, RunOutcome};
use disdel::linalg::LinearAlgebra;
use disdel::problem::Builtin;
use disdel::radau::Stats;
use serde::Serialize;

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub problem: String,
    pub param_set: u32,
    pub formulation: Option<&'static str>,
    pub settings: SettingsEcho,
    pub approximation: Option<Approximation>,
    pub state_dim: usize,
    pub chain_dim: usize,
    pub total_dim: usize,
    pub t_end: f64,
    pub y_end: Vec<f64>,
    /// Relative error against the reference, where one is known.
    pub error: Option<f64>,
    pub stats: Stats,
    pub breaking_points: Vec<f64>,
    pub breaking_points_hit: Vec<f64>,
    pub samples: Vec<Sample>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SettingsEcho {
    pub eps: f64,
    pub tol: f64,
    pub omega: f64,
    pub aux_scale: f64,
    pub h_init: f64,
    pub delta_min: f64,
    pub lift_levels: usize,
    pub max_steps: usize,
    pub linear_algebra: &'static str,
}

#[derive(Debug, Clone, Serialize)]
pub struct Approximation {
    pub alpha: f64,
    pub h: f64,
    #[serde(rename = "T")]
    pub t_max: f64,
    pub delta: f64,
    #[serde(rename = "M")]
    pub m: i64,
    #[serde(rename = "N")]
    pub n: i64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Sample {
    pub t: f64,
    /// Components of `y` (the auxiliary variables are omitted).
    pub y: Vec<f64>,
}

pub fn formulation(b: Builtin) -> Option<&'static str> {
    match b {
        Builtin::Example3Ode => Some("ode"),
        Builtin::Example3Dae => Some("dae"),
        _ => None,
    }
}

impl Report {
    pub fn from_outcome(o: &RunOutcome) -> Self {
        let s = &o.settings;
        let d = o.state_dim;
        Report {
            problem: s.problem.name().to_string(),
            param_set: s.param_set,
            formulation: formulation(s.problem),
            settings: SettingsEcho {
                eps: s.eps,
                tol: s.tol,
                omega: s.omega,
                aux_scale: s.aux_scale,
                h_init: s.h_init.unwrap_or_else(|| s.problem.default_h_init(s.eps, s.tol)),
                delta_min: s.delta_min,
                lift_levels: s.lift_levels,
                max_steps: s.max_steps,
                linear_algebra: match s.linear_algebra {
                    LinearAlgebra::Structured => "structured",
                    LinearAlgebra::Dense => "dense",
                },
            },
            approximation: o.params.map(|p| Approximation {
                alpha: p.alpha,
                h: p.h_quad,
                t_max: p.t_max,
                delta: p.delta,
                m: p.m_lo,
                n: p.n_hi,
            }),
            state_dim: d,
            chain_dim: o.chain_dim,
            total_dim: o.total_dim,
            t_end: o.report.t_end,
            y_end: o.report.y_end[..d].to_vec(),
            error: o.error,
            stats: o.report.stats.clone(),
            breaking_points: o.breaking_points.clone(),
            breaking_points_hit: o.report.breaking_points_hit.clone(),
            samples: o.report.samples.iter().map(|(t, y)| Sample { t: *t, y: y[..d].to_vec() }).collect(),
        }
    }

    pub const CSV_HEADER: [&'static str; 26] = [
        "problem",
        "param_set",
        "formulation",
        "eps",
        "tol",
        "omega",
        "aux_scale",
        "h_init",
        "h",
        "T",
        "M",
        "N",
        "state_dim",
        "chain_dim",
        "t_end",
        "y_end",
        "error",
        "n_steps",
        "n_rejected",
        "n_fevals",
        "n_jac_evals",
        "n_lu",
        "n_solves",
        "n_newton",
        "n_breaking_points",
        "breaking_points_hit",
    ];

    pub fn csv_row(&self) -> Vec<Cell> {
        let a = self.approximation.as_ref();
        let st = &self.stats;
        vec![
            self.problem.as_str().into(),
            (self.param_set as usize).into(),
            self.formulation.map_or(Cell::Empty, Cell::from),
            self.settings.eps.into(),
            self.settings.tol.into(),
            self.settings.omega.into(),
            self.settings.aux_scale.into(),
            self.settings.h_init.into(),
            a.map(|a| a.h).into(),
            a.map(|a| a.t_max).into(),
            a.map_or(Cell::Empty, |a| a.m.into()),
            a.map_or(Cell::Empty, |a| a.n.into()),
            self.state_dim.into(),
            self.chain_dim.into(),
            self.t_end.into(),
            float_list(&self.y_end).into(),
            self.error.into(),
            st.n_steps.into(),
            st.n_rejected.into(),
            st.n_fevals.into(),
            st.n_jac_evals.into(),
            st.n_lu.into(),
            st.n_solves.into(),
            st.n_newton.into(),
            self.breaking_points.len().into(),
            float_list(&self.breaking_points_hit).into(),
        ]
    }
}

pub fn cmd_run(cfg: &RunConfig) -> CliResult<Report> {
    Ok(Report::from_outcome(&run(&cfg.settings)?))
}

pub fn render(report: &Report, format: crate::config::OutputFormat) -> String {
    match format {
        crate::config::OutputFormat::Csv => {
            let mut t = Table::new(&Report::CSV_HEADER);
            t.push(report.csv_row());
            t.to_csv()
        }
        crate::config::OutputFormat::Json => {
            let mut s = serde_json::to_string_pretty(report).expect("report serializes");
            s.push('\n');
            s
        }
    }
}
