//! `disdel run` settings: TOML config file overlaid by command-line flags.

use crate::error::{unit_interval, usage, CliResult};
use clap::{Args, ValueEnum};
use disdel::driver::RunSettings;
use disdel::linalg::LinearAlgebra;
use disdel::problem::{builtin_problem, Builtin, Formulation};
use serde::Deserialize;
use std::path::PathBuf;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FormulationArg {
    Ode,
    Dae,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LinearAlgebraArg {
    Structured,
    Dense,
}

/// Initial step: `auto` or a positive number.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum HInit {
    Auto,
    Fixed(f64),
}

impl FromStr for HInit {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if s == "auto" {
            return Ok(HInit::Auto);
        }
        s.parse::<f64>().map(HInit::Fixed).map_err(|_| format!("expected `auto` or a number, got {s:?}"))
    }
}

impl<'de> Deserialize<'de> for HInit {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(v) => Ok(HInit::Fixed(v)),
            Raw::Text(s) => s.parse().map_err(serde::de::Error::custom),
        }
    }
}

/// Output sample times: a count of equispaced points on `[t0, t_f]`, or explicit times.
#[derive(Debug, Clone, PartialEq)]
pub enum SampleGrid {
    Count(usize),
    Times(Vec<f64>),
}

impl FromStr for SampleGrid {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if let Ok(n) = s.parse::<usize>() {
            return Ok(SampleGrid::Count(n));
        }
        s.split(',')
            .map(|p| p.trim().parse::<f64>().map_err(|_| format!("bad sample time {p:?}")))
            .collect::<Result<_, _>>()
            .map(SampleGrid::Times)
    }
}

impl<'de> Deserialize<'de> for SampleGrid {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Count(usize),
            Times(Vec<f64>),
        }
        Ok(match Raw::deserialize(d)? {
            Raw::Count(n) => SampleGrid::Count(n),
            Raw::Times(v) => SampleGrid::Times(v),
        })
    }
}

impl SampleGrid {
    pub fn times(&self, t0: f64, t_f: f64) -> Vec<f64> {
        match self {
            SampleGrid::Count(0) => Vec::new(),
            SampleGrid::Count(1) => vec![t_f],
            SampleGrid::Count(n) => {
                (0..*n).map(|i| if i == n - 1 { t_f } else { t0 + (t_f - t0) * i as f64 / (n - 1) as f64 }).collect()
            }
            SampleGrid::Times(v) => v.clone(),
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    #[serde(default)]
    pub problem: ProblemSection,
    #[serde(default)]
    pub kernel: KernelSection,
    #[serde(default)]
    pub integrator: IntegratorSection,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSection {
    pub name: Option<String>,
    pub formulation: Option<FormulationArg>,
    pub param_set: Option<u32>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelSection {
    pub eps: Option<f64>,
    pub delta_min: Option<f64>,
    pub lift_levels: Option<usize>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegratorSection {
    pub tol: Option<f64>,
    pub omega: Option<f64>,
    pub aux_scale: Option<f64>,
    pub h_init: Option<HInit>,
    pub max_steps: Option<usize>,
    pub breaking_points: Option<usize>,
    pub linear_algebra: Option<LinearAlgebraArg>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub format: Option<OutputFormat>,
    pub sample_grid: Option<SampleGrid>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct RunArgs {
    /// example1, example2, example3, example3_ode or example3_dae.
    #[arg(long)]
    pub problem: Option<String>,
    /// TOML file with [problem], [kernel], [integrator] and [output] sections.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub eps: Option<f64>,
    /// Defaults to `--eps`.
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub omega: Option<f64>,
    #[arg(long)]
    pub aux_scale: Option<f64>,
    /// `auto` or a positive number.
    #[arg(long)]
    pub h_init: Option<HInit>,
    #[arg(long, value_enum)]
    pub formulation: Option<FormulationArg>,
    #[arg(long)]
    pub param_set: Option<u32>,
    #[arg(long)]
    pub delta_min: Option<f64>,
    /// Pareto lift levels.
    #[arg(long)]
    pub lift_levels: Option<usize>,
    /// Breaking points to schedule (default: the problem's own choice).
    #[arg(long)]
    pub breaking_points: Option<usize>,
    #[arg(long)]
    pub max_steps: Option<usize>,
    #[arg(long, value_enum)]
    pub linear_algebra: Option<LinearAlgebraArg>,
    /// A count of equispaced times, or a comma-separated list.
    #[arg(long)]
    pub sample_grid: Option<SampleGrid>,
    #[arg(long, value_enum)]
    pub output: Option<OutputFormat>,
    #[arg(long)]
    pub out_file: Option<PathBuf>,
}

/// Fully resolved run request.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub settings: RunSettings,
    pub output: OutputFormat,
}

pub fn load_config(path: &PathBuf) -> CliResult<ConfigFile> {
    let text = std::fs::read_to_string(path).map_err(|e| usage(format!("cannot read {}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| usage(format!("{}: {e}", path.display())))
}

pub fn parse_problem(name: &str, formulation: Option<FormulationArg>) -> CliResult<Builtin> {
    let chemo = |f: Option<FormulationArg>| match f.unwrap_or(FormulationArg::Ode) {
        FormulationArg::Ode => Formulation::Ode,
        FormulationArg::Dae => Formulation::Dae,
    };
    let b = match name {
        "example3" => Builtin::chemo(chemo(formulation)),
        other => other.parse::<Builtin>().map_err(|e| usage(e.to_string()))?,
    };
    match (b, formulation) {
        (_, None) | (Builtin::Example3Ode, Some(FormulationArg::Ode)) | (Builtin::Example3Dae, Some(FormulationArg::Dae)) => {
            Ok(b)
        }
        (Builtin::Example3Ode | Builtin::Example3Dae, Some(_)) => {
            Err(usage(format!("--formulation conflicts with problem {name}")))
        }
        _ => Err(usage("--formulation applies to example3 only")),
    }
}

/// Merges flags over the config file over defaults and validates the result.
pub fn resolve(args: &RunArgs) -> CliResult<RunConfig> {
    let file = match &args.config {
        Some(p) => load_config(p)?,
        None => ConfigFile::default(),
    };
    let name = args.problem.clone().or(file.problem.name).ok_or_else(|| usage("no problem given (--problem)"))?;
    let formulation = args.formulation.or(file.problem.formulation);
    let problem = parse_problem(&name, formulation)?;
    let eps = args.eps.or(file.kernel.eps).unwrap_or(1e-8);
    let tol = args.tol.or(file.integrator.tol).unwrap_or(eps);
    unit_interval("eps", eps)?;
    unit_interval("tol", tol)?;

    let mut s = RunSettings::new(problem, eps, tol);
    s.param_set = args.param_set.or(file.problem.param_set).unwrap_or(1);
    s.omega = args.omega.or(file.integrator.omega).unwrap_or(1.0);
    if !(s.omega >= 1.0) {
        return Err(usage(format!("--omega must be at least 1, got {}", s.omega)));
    }
    s.aux_scale = args.aux_scale.or(file.integrator.aux_scale).unwrap_or(1.0);
    if !(s.aux_scale > 0.0) {
        return Err(usage("--aux-scale must be positive"));
    }
    let h_init = args.h_init.or(file.integrator.h_init).unwrap_or(HInit::Auto);
    s.h_init = match h_init {
        HInit::Auto => None,
        HInit::Fixed(h) if h > 0.0 => Some(h),
        HInit::Fixed(h) => return Err(usage(format!("--h-init must be positive, got {h}"))),
    };
    s.delta_min = args.delta_min.or(file.kernel.delta_min).unwrap_or(0.0);
    s.lift_levels = args.lift_levels.or(file.kernel.lift_levels).unwrap_or(0);
    s.breaking_points = args.breaking_points.or(file.integrator.breaking_points);
    s.max_steps = args.max_steps.or(file.integrator.max_steps).unwrap_or(s.max_steps);
    s.linear_algebra = match args.linear_algebra.or(file.integrator.linear_algebra) {
        Some(LinearAlgebraArg::Dense) => LinearAlgebra::Dense,
        _ => LinearAlgebra::Structured,
    };
    if let Some(grid) = args.sample_grid.clone().or(file.output.sample_grid) {
        let base = builtin_problem(problem, s.param_set)?;
        s.sample_times = grid.times(base.t0, base.t_f);
    }
    let output = args.output.or(file.output.format).unwrap_or_default();
    Ok(RunConfig { settings: s, output })
}
