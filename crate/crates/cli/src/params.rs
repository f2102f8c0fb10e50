//! `disdel params`: quadrature parameters for the gamma and Pareto kernels.

use crate::error::{unit_interval, usage, CliResult};
use crate::table::{Cell, Table};
use clap::{Args, ValueEnum};
use disdel::kernel::{gamma_params, pareto_params};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Distribution {
    Gamma,
    Pareto,
}

#[derive(Debug, Clone, Args)]
pub struct ParamsArgs {
    pub distribution: Distribution,
    #[arg(long)]
    pub alpha: f64,
    /// Gamma rate κ.
    #[arg(long)]
    pub kappa: Option<f64>,
    /// Pareto scale β.
    #[arg(long)]
    pub beta: Option<f64>,
    /// Kernel accuracies, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    pub eps: Vec<f64>,
    /// Smallest delay argument that must be covered (gamma only).
    #[arg(long, default_value_t = 0.0)]
    pub delta_min: f64,
    #[arg(long)]
    pub tf: f64,
}

pub fn cmd_params(a: &ParamsArgs) -> CliResult<Table> {
    for &e in &a.eps {
        unit_interval("eps", e)?;
    }
    if !(a.tf > 0.0) {
        return Err(usage("--tf must be positive"));
    }
    let mut t = Table::new(&["eps", "h", "T", "delta", "M", "N"]);
    for &eps in &a.eps {
        let p = match a.distribution {
            Distribution::Gamma => {
                if a.beta.is_some() {
                    return Err(usage("--beta applies to the Pareto kernel"));
                }
                let kappa = a.kappa.ok_or_else(|| usage("gamma needs --kappa"))?;
                gamma_params(a.alpha, kappa, eps, a.delta_min, a.tf)?
            }
            Distribution::Pareto => {
                if a.kappa.is_some() {
                    return Err(usage("--kappa applies to the gamma kernel"));
                }
                let beta = a.beta.ok_or_else(|| usage("pareto needs --beta"))?;
                pareto_params(a.alpha, beta, eps, a.tf)?
            }
        };
        t.push(vec![eps.into(), p.h_quad.into(), p.t_max.into(), p.delta.into(), p.m_lo.into(), Cell::Int(p.n_hi)]);
    }
    Ok(t)
}
