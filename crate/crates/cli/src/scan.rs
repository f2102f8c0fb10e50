//! `disdel approx-scan`: error of the exponential-sum approximation of `t^{-α}`.

use crate::error::{unit_interval, usage, CliResult};
use crate::table::{float, Table};
use clap::{Args, ValueEnum};
use disdel::kernel::{
    error_report, log_grid, lower_truncation_error, power_law_params, trapezoid_step_and_angle, trapezoid_sum,
    trapezoid_sup_error, upper_truncation_error,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ScanMode {
    /// Sup relative trapezoidal error against the step `h`.
    Step,
    /// Lower-tail truncation error against `M`, one curve per `T`.
    TruncLow,
    /// Upper-tail truncation error against `N`, one curve per `δ`.
    TruncHigh,
    /// Exact and approximate values with a-priori bounds over `t`.
    TScan,
}

#[derive(Debug, Clone, Args)]
pub struct ScanArgs {
    #[arg(long, value_enum, default_value = "step")]
    pub mode: ScanMode,
    /// Exponents α (default 0.1,…,0.9 for `step`, 0.5 otherwise).
    #[arg(long, value_delimiter = ',')]
    pub alpha: Option<Vec<f64>>,
    /// Accuracy that fixes `h` (and `M`, `N` for `t-scan`).
    #[arg(long, default_value_t = 1e-8)]
    pub eps: f64,
    /// Trapezoidal step, overriding the one derived from `--eps`.
    #[arg(long)]
    pub h: Option<f64>,
    #[arg(long, default_value_t = 0.05)]
    pub h_min: f64,
    #[arg(long, default_value_t = 2.0)]
    pub h_max: f64,
    #[arg(long, default_value_t = 391)]
    pub h_count: usize,
    /// Error level reported on stderr by the `step` scan.
    #[arg(long, default_value_t = 1e-5)]
    pub threshold: f64,
    /// Right interval ends `T` (`trunc-low`; first value for `t-scan`).
    #[arg(long, value_delimiter = ',')]
    pub t_max: Option<Vec<f64>>,
    /// Left interval ends `δ` (`trunc-high`; first value for `t-scan`).
    #[arg(long, value_delimiter = ',')]
    pub delta: Option<Vec<f64>>,
    #[arg(long, default_value_t = -200, allow_hyphen_values = true)]
    pub m_min: i64,
    #[arg(long, default_value_t = 200)]
    pub n_max: i64,
    /// Explicit evaluation points for `t-scan`.
    #[arg(long, value_delimiter = ',')]
    pub t: Option<Vec<f64>>,
    /// Number of log-spaced points for `t-scan`.
    #[arg(long, default_value_t = 201)]
    pub count: usize,
}

/// The table, plus summary lines for stderr.
pub fn cmd_approx_scan(a: &ScanArgs) -> CliResult<(Table, Vec<String>)> {
    unit_interval("eps", a.eps)?;
    let default_alpha = match a.mode {
        ScanMode::Step => (1..=9).map(|k| k as f64 / 10.0).collect(),
        _ => vec![0.5],
    };
    let alphas = a.alpha.clone().unwrap_or(default_alpha);
    for &al in &alphas {
        if !(al > 0.0 && al < 2.0) {
            return Err(usage(format!("--alpha must lie in (0, 2), got {al}")));
        }
    }
    let step = |alpha: f64| -> CliResult<f64> {
        match a.h {
            Some(h) if h > 0.0 => Ok(h),
            Some(h) => Err(usage(format!("--h must be positive, got {h}"))),
            None => Ok(trapezoid_step_and_angle(alpha, a.eps)?.0),
        }
    };
    match a.mode {
        ScanMode::Step => step_scan(a, &alphas),
        ScanMode::TruncLow => {
            let ts = positive_list("t-max", a.t_max.clone().unwrap_or(vec![1e-2, 1.0, 1e2]))?;
            if a.m_min > 0 {
                return Err(usage("--m-min must not be positive"));
            }
            let mut t = Table::new(&["alpha", "h", "T", "M", "error"]);
            for &alpha in &alphas {
                let h = step(alpha)?;
                for &big_t in &ts {
                    for m in a.m_min..=0 {
                        let e = lower_truncation_error(alpha, h, m, big_t / 10.0, big_t);
                        t.push(vec![alpha.into(), h.into(), big_t.into(), m.into(), e.into()]);
                    }
                }
            }
            Ok((t, Vec::new()))
        }
        ScanMode::TruncHigh => {
            let ds = positive_list("delta", a.delta.clone().unwrap_or(vec![1e-10, 1e-5, 1.0, 1e2]))?;
            if a.n_max < 0 {
                return Err(usage("--n-max must not be negative"));
            }
            let mut t = Table::new(&["alpha", "h", "delta", "N", "error"]);
            for &alpha in &alphas {
                let h = step(alpha)?;
                for &d in &ds {
                    for n in 0..=a.n_max {
                        let e = upper_truncation_error(alpha, h, n, d, 10.0 * d);
                        t.push(vec![alpha.into(), h.into(), d.into(), n.into(), e.into()]);
                    }
                }
            }
            Ok((t, Vec::new()))
        }
        ScanMode::TScan => {
            let delta = single("delta", &a.delta, 1e-6)?;
            let t_max = single("t-max", &a.t_max, 1e4)?;
            let grid = match &a.t {
                Some(ts) => positive_list("t", ts.clone())?,
                None if a.count >= 1 => log_grid(delta, t_max, a.count),
                None => return Err(usage("--count must be at least 1")),
            };
            let mut t = Table::new(&[
                "alpha",
                "t",
                "exact",
                "approx",
                "rel_error",
                "trapezoid_bound",
                "low_bound",
                "high_bound",
            ]);
            for &alpha in &alphas {
                let mut p = power_law_params(alpha, a.eps, delta, t_max)?;
                if a.h.is_some() {
                    p.h_quad = step(alpha)?;
                }
                for pt in error_report(alpha, &p, &grid)? {
                    let approx = trapezoid_sum(alpha, p.h_quad, p.m_lo, p.n_hi, pt.t);
                    t.push(vec![
                        alpha.into(),
                        pt.t.into(),
                        pt.t.powf(-alpha).into(),
                        approx.into(),
                        pt.measured.into(),
                        pt.trapezoid_bound.into(),
                        pt.low_bound.into(),
                        pt.high_bound.into(),
                    ]);
                }
            }
            Ok((t, Vec::new()))
        }
    }
}

fn step_scan(a: &ScanArgs, alphas: &[f64]) -> CliResult<(Table, Vec<String>)> {
    if !(a.h_min > 0.0 && a.h_max > a.h_min && a.h_count >= 2) {
        return Err(usage("need 0 < --h-min < --h-max and --h-count >= 2"));
    }
    let hs: Vec<f64> = (0..a.h_count)
        .map(|i| a.h_min + (a.h_max - a.h_min) * i as f64 / (a.h_count - 1) as f64)
        .collect();
    let mut t = Table::new(&["alpha", "h", "sup_error"]);
    let mut notes = Vec::new();
    for &alpha in alphas {
        let mut crossing = None;
        for &h in &hs {
            let e = trapezoid_sup_error(alpha, h);
            if crossing.is_none() && e > a.threshold {
                crossing = Some(h);
            }
            t.push(vec![alpha.into(), h.into(), e.into()]);
        }
        notes.push(match crossing {
            Some(h) => format!("alpha {alpha}: error first exceeds {:e} at h = {}", a.threshold, float(h)),
            None => format!("alpha {alpha}: error stays below {:e} on the scanned range", a.threshold),
        });
    }
    Ok((t, notes))
}

fn positive_list(name: &str, vs: Vec<f64>) -> CliResult<Vec<f64>> {
    match vs.iter().find(|&&v| !(v > 0.0)) {
        Some(v) => Err(usage(format!("--{name} values must be positive, got {v}"))),
        None => Ok(vs),
    }
}

fn single(name: &str, v: &Option<Vec<f64>>, default: f64) -> CliResult<f64> {
    match v.as_deref() {
        None => Ok(default),
        Some([x]) if *x > 0.0 => Ok(*x),
        Some(_) => Err(usage(format!("t-scan takes one positive --{name}"))),
    }
}
