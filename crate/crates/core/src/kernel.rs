//! Sums of exponentials (times monomials) approximating power-law based
//! convolution kernels.
//!
//! The building block is the trapezoidal discretization of
//! `t^{-α} = Γ(α)^{-1} ∫ exp(-t e^s + α s) ds`, truncated to `n = M … N-1`:
//!
//! ```text
//! T_M^N(t, h) = h/Γ(α) · Σ_{n=M}^{N-1} e^{α n h} e^{-e^{n h} t}
//! ```
//!
//! with `h`, `M`, `N` chosen so the relative error on `[δ, T]` stays below
//! `3ε`. Gamma densities multiply this by `e^{-κt}` (exponents shift by `κ`),
//! negative gamma exponents factor out `t` or `t²`, and Pareto densities use
//! the sum for `t^{-α-1}` on `[β, T]`, pre-compensated for a lag of `β`.

use crate::error::{domain, Error, Result};
use crate::specfun::{gamma_fn, ln_gamma, regularized_lower_gamma, regularized_upper_gamma, solve_scalar_root};
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_2, PI};

/// Largest `α n h` for which `e^{α n h}` is still safely representable.
const MAX_GROWTH_EXPONENT: f64 = 354.0;

/// Parameters of a truncated trapezoidal exponential sum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ApproximationParams {
    /// Exponent of the power `t^{-alpha}` the sum approximates.
    pub alpha: f64,
    pub eps: f64,
    /// Trapezoidal step `h`.
    pub h_quad: f64,
    /// First index `M`.
    pub m_lo: i64,
    /// One past the last index `N`.
    pub n_hi: i64,
    /// Left end of the validity interval.
    pub delta: f64,
    /// Right end of the validity interval.
    pub t_max: f64,
    /// Contour half-width `a` used to choose `h`.
    pub angle_a: f64,
}

impl ApproximationParams {
    pub fn term_count(&self) -> usize {
        (self.n_hi - self.m_lo).max(0) as usize
    }

    pub fn indices(&self) -> impl Iterator<Item = i64> {
        self.m_lo..self.n_hi
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.h_quad > 0.0) {
            return Err(domain("h_quad must be positive"));
        }
        if self.m_lo >= self.n_hi {
            return Err(domain("need m_lo < n_hi"));
        }
        if !(self.delta > 0.0 && self.delta < self.t_max) {
            return Err(domain("need 0 < delta < t_max"));
        }
        if !(self.angle_a > 0.0 && self.angle_a < FRAC_PI_2) {
            return Err(domain("need 0 < angle_a < pi/2"));
        }
        Ok(())
    }
}

/// One summand `p(t) e^{-γ t}` with `p(t) = e^{log_scale} Σ_j poly[j] t^j`.
///
/// Kept in factored form so that huge `e^{αnh}` weights combine with the
/// decaying exponential in log space before being materialized.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpTerm {
    pub exponent: f64,
    pub log_scale: f64,
    pub poly: Vec<f64>,
}

impl ExpTerm {
    pub fn new(exponent: f64, coeffs: Vec<f64>) -> Self {
        Self { exponent, log_scale: 0.0, poly: coeffs }
    }

    /// Monomial `e^{log_scale} t^degree e^{-γ t}`.
    pub fn monomial(exponent: f64, log_scale: f64, degree: usize) -> Self {
        let mut poly = vec![0.0; degree + 1];
        poly[degree] = 1.0;
        Self { exponent, log_scale, poly }
    }

    pub fn degree(&self) -> usize {
        self.poly.len().saturating_sub(1)
    }

    /// Materialized coefficients `c_j`.
    pub fn coeffs(&self) -> Vec<f64> {
        let s = self.log_scale.exp();
        self.poly.iter().map(|p| p * s).collect()
    }

    pub fn eval(&self, t: f64) -> f64 {
        let mut p = 0.0;
        for c in self.poly.iter().rev() {
            p = p * t + c;
        }
        if p == 0.0 {
            return 0.0;
        }
        p * (self.log_scale - self.exponent * t).exp()
    }
}

/// `k̃(u) = Σ_i p_i(u) e^{-γ_i u}`, used at `u = t - offset`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExponentialSumKernel {
    pub terms: Vec<ExpTerm>,
    /// Support offset: the density at `t` is `k̃(t - offset)` for `t >= offset`, zero before.
    pub offset: f64,
}

impl ExponentialSumKernel {
    pub fn new(terms: Vec<ExpTerm>) -> Result<Self> {
        let k = Self { terms, offset: 0.0 };
        k.validate()?;
        Ok(k)
    }

    pub fn with_offset(mut self, offset: f64) -> Self {
        self.offset = offset;
        self
    }

    pub fn validate(&self) -> Result<()> {
        for t in &self.terms {
            if !t.exponent.is_finite() || !t.log_scale.is_finite() && t.log_scale != f64::NEG_INFINITY {
                return Err(Error::InvalidKernel("non-finite exponent or scale".into()));
            }
            if t.poly.is_empty() {
                return Err(Error::InvalidKernel("empty polynomial".into()));
            }
            if t.degree() > 2 {
                return Err(Error::InvalidKernel(format!("polynomial degree {} exceeds 2", t.degree())));
            }
        }
        let mut ex: Vec<f64> = self.terms.iter().map(|t| t.exponent).collect();
        ex.sort_by(f64::total_cmp);
        if ex.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidKernel("duplicate exponents".into()));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Number of auxiliary chain variables `Σ (m_i + 1)`.
    pub fn chain_len(&self) -> usize {
        self.terms.iter().map(|t| t.poly.len()).sum()
    }

    /// Evaluates the sum at `u` (no offset applied).
    pub fn eval(&self, u: f64) -> f64 {
        self.terms.iter().map(|t| t.eval(u)).sum()
    }

    /// Approximated density at `t`, honoring the support offset.
    pub fn density(&self, t: f64) -> f64 {
        if t < self.offset {
            0.0
        } else {
            self.eval(t - self.offset)
        }
    }
}

/// Kernels the library knows how to approximate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum KernelSpec {
    /// `κ^{1-α} t^{-α} e^{-κt} / Γ(1-α)`, `α ∈ (-2, 1)` non-integer.
    Gamma { kappa: f64, alpha: f64 },
    /// `α β^α t^{-α-1}` for `t >= β`, zero before.
    Pareto { alpha: f64, beta: f64 },
    /// Bare `t^{-α}`.
    PowerLaw { alpha: f64 },
}

impl KernelSpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            KernelSpec::Gamma { kappa, alpha } => {
                if !(kappa > 0.0) {
                    return Err(domain("gamma kernel needs kappa > 0"));
                }
                if !(alpha > -2.0 && alpha < 1.0) || alpha == 0.0 || alpha == -1.0 {
                    return Err(domain(format!("gamma kernel alpha {alpha} outside (-2,1) or integer")));
                }
            }
            KernelSpec::Pareto { alpha, beta } => {
                if !(alpha > 0.0 && beta > 0.0) {
                    return Err(domain("Pareto kernel needs alpha > 0 and beta > 0"));
                }
            }
            KernelSpec::PowerLaw { alpha } => {
                if !(alpha > 0.0 && alpha < 2.0) {
                    return Err(domain("power law needs alpha in (0,2)"));
                }
            }
        }
        Ok(())
    }

    /// Exact density.
    pub fn density(&self, t: f64) -> f64 {
        match *self {
            KernelSpec::Gamma { kappa, alpha } => {
                if t <= 0.0 {
                    return if alpha < 0.0 { 0.0 } else { f64::INFINITY };
                }
                let log_norm = (1.0 - alpha) * kappa.ln() - ln_gamma(1.0 - alpha).unwrap_or(f64::NAN);
                (log_norm - alpha * t.ln() - kappa * t).exp()
            }
            KernelSpec::Pareto { alpha, beta } => {
                if t < beta {
                    0.0
                } else {
                    alpha * beta.powf(alpha) * t.powf(-alpha - 1.0)
                }
            }
            KernelSpec::PowerLaw { alpha } => t.powf(-alpha),
        }
    }

    /// Start of the support (`β` for Pareto, 0 otherwise).
    pub fn support_start(&self) -> f64 {
        match *self {
            KernelSpec::Pareto { beta, .. } => beta,
            _ => 0.0,
        }
    }

    /// Exponent of the power the exponential sum has to approximate.
    pub fn approximated_exponent(&self) -> f64 {
        match *self {
            KernelSpec::Gamma { alpha, .. } if alpha < -1.0 => alpha + 2.0,
            KernelSpec::Gamma { alpha, .. } if alpha < 0.0 => alpha + 1.0,
            KernelSpec::Gamma { alpha, .. } => alpha,
            KernelSpec::Pareto { alpha, .. } => alpha + 1.0,
            KernelSpec::PowerLaw { alpha } => alpha,
        }
    }

    /// Parameter selection for accuracy `eps` on `[0, t_f]`.
    ///
    /// Power laws have no natural validity interval; they use `[delta_min, t_f]`.
    pub fn approximation_params(&self, eps: f64, delta_min: f64, t_f: f64) -> Result<ApproximationParams> {
        self.validate()?;
        match *self {
            KernelSpec::Gamma { kappa, .. } => {
                gamma_params(self.approximated_exponent(), kappa, eps, delta_min, t_f)
            }
            KernelSpec::Pareto { alpha, beta } => pareto_params(alpha, beta, eps, t_f),
            KernelSpec::PowerLaw { alpha } => power_law_params(alpha, eps, delta_min, t_f),
        }
    }

    pub fn build(&self, params: &ApproximationParams) -> Result<ExponentialSumKernel> {
        self.validate()?;
        match *self {
            KernelSpec::Gamma { kappa, alpha } if alpha > 0.0 => build_gamma_kernel_sum(kappa, alpha, params),
            KernelSpec::Gamma { kappa, alpha } => build_gamma_kernel_negative_alpha(kappa, alpha, params),
            KernelSpec::Pareto { alpha, beta } => build_pareto_kernel_sum(alpha, beta, params),
            KernelSpec::PowerLaw { alpha } => build_power_law_sum(alpha, params),
        }
    }
}

fn check_eps(eps: f64) -> Result<()> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(domain(format!("eps must lie in (0,1), got {eps}")));
    }
    Ok(())
}

/// Contour half-width `a` and trapezoidal step `h` giving a trapezoidal
/// relative error of at most `eps` for `t^{-alpha}`.
pub fn trapezoid_step_and_angle(alpha: f64, eps: f64) -> Result<(f64, f64)> {
    check_eps(eps)?;
    if !(alpha > 0.0 && alpha < 2.0) {
        return Err(domain(format!("alpha must lie in (0,2), got {alpha}")));
    }
    let ln_inv_eps = -eps.ln();
    let a = FRAC_PI_2 * (1.0 - alpha / ((alpha + 1.0) * ln_inv_eps));
    let h = 2.0 * PI * a / (1.0 + (2.0 / eps) * a.cos().powf(-alpha)).ln();
    Ok((h, a))
}

/// A-priori trapezoidal bound `c_α = 2 (cos a)^{-α} / (e^{2πa/h} - 1)`.
pub fn trapezoid_bound(alpha: f64, h: f64, a: f64) -> f64 {
    2.0 * a.cos().powf(-alpha) / ((2.0 * PI * a / h).exp_m1())
}

/// Truncation indices on `[delta, t_max]` for step `h`.
fn truncation_indices(alpha: f64, eps: f64, h: f64, delta: f64, t_max: f64) -> Result<(i64, i64)> {
    let x_lo = ((gamma_fn(alpha + 1.0)? * eps).ln() / alpha).exp();
    let x_hi = -(gamma_fn(alpha)? * eps).ln();
    if !(x_hi > 0.0) {
        return Err(domain("eps too large for the truncation estimate"));
    }
    let m = ((x_lo / t_max).ln() / h).floor() as i64;
    let n = ((x_hi / delta).ln() / h).ceil() as i64;
    Ok((m, n))
}

/// Parameters for `t^{-alpha}` on a caller-chosen interval `[delta, t_max]`.
pub fn power_law_params(alpha: f64, eps: f64, delta: f64, t_max: f64) -> Result<ApproximationParams> {
    if !(delta > 0.0 && delta < t_max) {
        return Err(domain("power law parameters need 0 < delta < t_max"));
    }
    let (h, a) = trapezoid_step_and_angle(alpha, eps)?;
    let (m, n) = truncation_indices(alpha, eps, h, delta, t_max)?;
    Ok(ApproximationParams { alpha, eps, h_quad: h, m_lo: m, n_hi: n, delta, t_max, angle_a: a })
}

/// Parameter choice for the gamma density with exponent `alpha ∈ (0,1)`.
pub fn gamma_params(alpha: f64, kappa: f64, eps: f64, delta_min: f64, t_f: f64) -> Result<ApproximationParams> {
    check_eps(eps)?;
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(domain(format!("gamma parameters need alpha in (0,1), got {alpha}")));
    }
    if !(kappa > 0.0 && t_f > 0.0 && delta_min >= 0.0) {
        return Err(domain("gamma parameters need kappa > 0, t_f > 0, delta_min >= 0"));
    }
    let (h, a) = trapezoid_step_and_angle(alpha, eps)?;

    // tail condition (κT)^{-α} e^{-κT} / Γ(1-α) = ε, solved in log form
    let log_g = ln_gamma(1.0 - alpha)?;
    let ln_eps = eps.ln();
    let phi = |u: f64| -alpha * u.ln() - u - log_g - ln_eps;
    let mut hi = 1.0;
    while phi(hi) > 0.0 {
        hi *= 2.0;
        if hi > 1e6 {
            return Err(Error::NoConvergence("cannot bracket the tail equation".into()));
        }
    }
    let mut lo = hi * 0.5;
    while phi(lo) < 0.0 {
        lo *= 0.5;
        if lo < 1e-300 {
            return Err(Error::NoConvergence("cannot bracket the tail equation".into()));
        }
    }
    let u = solve_scalar_root(phi, lo, hi, 1e-14)?;
    let t_max = (u / kappa).min(t_f);

    let delta = ((eps * gamma_fn(2.0 - alpha)?).ln() / (1.0 - alpha)).exp() / kappa;
    let delta = delta.max(delta_min);
    let (m, n) = truncation_indices(alpha, eps, h, delta, t_max)?;
    Ok(ApproximationParams { alpha, eps, h_quad: h, m_lo: m, n_hi: n, delta, t_max, angle_a: a })
}

/// Parameter choice for the type I Pareto density (approximating `t^{-alpha-1}` on `[beta, T]`).
pub fn pareto_params(alpha: f64, beta: f64, eps: f64, t_f: f64) -> Result<ApproximationParams> {
    check_eps(eps)?;
    if !(alpha > 0.0 && beta > 0.0 && t_f > 0.0) {
        return Err(domain("Pareto parameters need alpha, beta, t_f > 0"));
    }
    let t_max = (beta * eps.powf(-1.0 / alpha)).min(t_f);
    let s = alpha + 1.0;
    let (h, a) = if s < 2.0 {
        trapezoid_step_and_angle(s, eps)?
    } else {
        // same formulas, outside the range the helper accepts
        let ln_inv_eps = -eps.ln();
        let a = FRAC_PI_2 * (1.0 - s / ((s + 1.0) * ln_inv_eps));
        (2.0 * PI * a / (1.0 + (2.0 / eps) * a.cos().powf(-s)).ln(), a)
    };
    let x_lo = gamma_fn(alpha + 2.0)? * eps;
    let g1 = gamma_fn(alpha + 1.0)?;
    let mut x_hi = -(g1 * eps).ln();
    if alpha > 1.0 {
        // the tail α x^α e^{-x} / Γ(α+1) is no longer dominated by e^{-x}
        for _ in 0..50 {
            x_hi = (alpha * x_hi.powf(alpha) / (g1 * eps)).ln();
        }
    }
    let m = ((x_lo / t_max).ln() / h).floor() as i64;
    let n = ((x_hi / beta).ln() / h).ceil() as i64;
    Ok(ApproximationParams { alpha: s, eps, h_quad: h, m_lo: m, n_hi: n, delta: beta, t_max, angle_a: a })
}

/// Appends a monomial term, folding it into the previous one when the
/// floating-point exponents coincide (`e^{nh} + κ` rounds to `κ` for very negative `n`).
fn push_merging(terms: &mut Vec<ExpTerm>, term: ExpTerm) {
    if let Some(last) = terms.last_mut() {
        if last.exponent == term.exponent && last.poly == term.poly {
            let (a, b) = (last.log_scale.max(term.log_scale), last.log_scale.min(term.log_scale));
            last.log_scale = a + (b - a).exp().ln_1p();
            return;
        }
    }
    terms.push(term);
}

fn growth_guard(rate: f64, n: i64, h: f64) -> Result<()> {
    let e = rate * n as f64 * h;
    if e > MAX_GROWTH_EXPONENT {
        return Err(Error::CoefficientOverflow { n, exponent: e });
    }
    Ok(())
}

/// Truncated trapezoidal sum `T_M^N(t,h)` for `t^{-alpha}`.
pub fn build_power_law_sum(alpha: f64, params: &ApproximationParams) -> Result<ExponentialSumKernel> {
    if !(alpha > 0.0 && alpha < 2.0) {
        return Err(domain(format!("power law alpha must lie in (0,2), got {alpha}")));
    }
    let h = params.h_quad;
    let base = h.ln() - ln_gamma(alpha)?;
    let mut terms = Vec::with_capacity(params.term_count());
    for n in params.indices() {
        growth_guard(alpha, n, h)?;
        let nh = n as f64 * h;
        terms.push(ExpTerm::monomial(nh.exp(), base + alpha * nh, 0));
    }
    ExponentialSumKernel::new(terms)
}

/// Gamma density with `alpha ∈ (0,1)`: exponents `e^{nh} + κ`.
pub fn build_gamma_kernel_sum(kappa: f64, alpha: f64, params: &ApproximationParams) -> Result<ExponentialSumKernel> {
    let mut terms = Vec::with_capacity(params.term_count());
    for t in gamma_sum_terms(kappa, alpha, params)? {
        push_merging(&mut terms, t);
    }
    ExponentialSumKernel::new(terms)
}

/// All `N − M` terms of the gamma sum, one per index, before equal exponents are merged.
pub fn gamma_sum_terms(kappa: f64, alpha: f64, params: &ApproximationParams) -> Result<Vec<ExpTerm>> {
    if !(alpha > 0.0 && alpha < 1.0 && kappa > 0.0) {
        return Err(domain("gamma kernel sum needs alpha in (0,1) and kappa > 0"));
    }
    let h = params.h_quad;
    let base = (1.0 - alpha) * kappa.ln() - ln_gamma(1.0 - alpha)? + h.ln() - ln_gamma(alpha)?;
    params
        .indices()
        .map(|n| {
            growth_guard(alpha, n, h)?;
            let nh = n as f64 * h;
            Ok(ExpTerm::monomial(nh.exp() + kappa, base + alpha * nh, 0))
        })
        .collect()
}

/// Gamma density with `alpha ∈ (-1,0)` or `(-2,-1)`: `t^{-α} = t^k · t^{-(α+k)}`.
///
/// `params` must have been computed for the shifted exponent `α + k`.
pub fn build_gamma_kernel_negative_alpha(
    kappa: f64,
    alpha: f64,
    params: &ApproximationParams,
) -> Result<ExponentialSumKernel> {
    let degree = if alpha > -1.0 && alpha < 0.0 {
        1
    } else if alpha > -2.0 && alpha < -1.0 {
        2
    } else {
        return Err(domain(format!("negative-alpha path needs alpha in (-2,-1) or (-1,0), got {alpha}")));
    };
    if !(kappa > 0.0) {
        return Err(domain("gamma kernel needs kappa > 0"));
    }
    let shifted = alpha + degree as f64;
    let h = params.h_quad;
    let base = (1.0 - alpha) * kappa.ln() - ln_gamma(1.0 - alpha)? + h.ln() - ln_gamma(shifted)?;
    let mut terms = Vec::with_capacity(params.term_count());
    for n in params.indices() {
        growth_guard(shifted, n, h)?;
        let nh = n as f64 * h;
        push_merging(&mut terms, ExpTerm::monomial(nh.exp() + kappa, base + shifted * nh, degree));
    }
    ExponentialSumKernel::new(terms)
}

/// Pareto density; the sum is meant to be evaluated at `t - β`.
pub fn build_pareto_kernel_sum(alpha: f64, beta: f64, params: &ApproximationParams) -> Result<ExponentialSumKernel> {
    if !(alpha > 0.0 && beta > 0.0) {
        return Err(domain("Pareto kernel needs alpha > 0 and beta > 0"));
    }
    let s = alpha + 1.0;
    let h = params.h_quad;
    let base = alpha.ln() + alpha * beta.ln() + h.ln() - ln_gamma(s)?;
    let mut terms = Vec::with_capacity(params.term_count());
    for n in params.indices() {
        growth_guard(s, n, h)?;
        let nh = n as f64 * h;
        let gamma = nh.exp();
        terms.push(ExpTerm::monomial(gamma, base + s * nh - gamma * beta, 0));
    }
    Ok(ExponentialSumKernel::new(terms)?.with_offset(beta))
}

/// Evaluates `T_M^N(t,h)` for `t^{-alpha}` directly from `(h, M, N)`.
pub fn trapezoid_sum(alpha: f64, h: f64, m: i64, n: i64, t: f64) -> f64 {
    let base = h.ln() - ln_gamma(alpha).unwrap_or(f64::NAN);
    (m..n)
        .map(|k| {
            let kh = k as f64 * h;
            (base + alpha * kh - kh.exp() * t).exp()
        })
        .sum()
}

/// Relative error of the untruncated trapezoidal sum at `t`.
pub fn trapezoid_error(alpha: f64, h: f64, t: f64) -> f64 {
    // terms below e^{-40} relative to the peak are negligible on both sides
    let peak = (alpha / t).ln() / h;
    let lo = (peak - (60.0 / alpha) / h).floor() as i64;
    let hi = (peak + ((200.0f64).ln() + 4.0) / h).ceil() as i64 + 4;
    let approx = trapezoid_sum(alpha, h, lo, hi, t);
    (approx * t.powf(alpha) - 1.0).abs()
}

/// Sup over `t` of the trapezoidal relative error (periodic in `ln t` with period `h`).
pub fn trapezoid_sup_error(alpha: f64, h: f64) -> f64 {
    const SAMPLES: usize = 64;
    (0..SAMPLES)
        .map(|i| trapezoid_error(alpha, h, (h * i as f64 / SAMPLES as f64).exp()))
        .fold(0.0, f64::max)
}

/// Logarithmically uniform grid of `count` points on `[lo, hi]`.
pub fn log_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..count)
        .map(|i| {
            if i == count - 1 {
                hi
            } else {
                (a + (b - a) * i as f64 / (count - 1) as f64).exp()
            }
        })
        .collect()
}

/// Bounds and measured error of `T_M^N` at one point, all relative to `t^{-α}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ErrorPoint {
    pub t: f64,
    pub trapezoid_bound: f64,
    /// Bound on the tail `n < M`; infinite where the monotonicity argument does not apply.
    pub low_bound: f64,
    /// Bound on the tail `n >= N`; infinite where the monotonicity argument does not apply.
    pub high_bound: f64,
    pub measured: f64,
}

impl ErrorPoint {
    pub fn bound_total(&self) -> f64 {
        self.trapezoid_bound + self.low_bound + self.high_bound
    }
}

/// A-priori error bounds next to the measured error of `T_M^N` on `grid`.
pub fn error_report(alpha: f64, params: &ApproximationParams, grid: &[f64]) -> Result<Vec<ErrorPoint>> {
    if !(alpha > 0.0) {
        return Err(domain("error report needs alpha > 0"));
    }
    let h = params.h_quad;
    let c_alpha = trapezoid_bound(alpha, h, params.angle_a);
    grid.iter()
        .map(|&t| {
            if !(t > 0.0) {
                return Err(domain("grid points must be positive"));
            }
            let s_peak = (alpha / t).ln();
            let mh = params.m_lo as f64 * h;
            let nh = params.n_hi as f64 * h;
            let low_bound = if mh <= s_peak {
                regularized_lower_gamma(alpha, t * mh.exp())?
            } else {
                f64::INFINITY
            };
            // h f(nh) <= ∫_{(n-1)h}^{nh} f on the decreasing side, so the tail from N
            // is dominated by the integral from (N-1)h
            let high_bound = if nh - h >= s_peak {
                regularized_upper_gamma(alpha, t * (nh - h).exp())?
            } else {
                f64::INFINITY
            };
            let approx = trapezoid_sum(alpha, h, params.m_lo, params.n_hi, t);
            Ok(ErrorPoint {
                t,
                trapezoid_bound: c_alpha,
                low_bound,
                high_bound,
                measured: (approx * t.powf(alpha) - 1.0).abs(),
            })
        })
        .collect()
}

/// Largest relative error of the lower tail `n < M` over `t ∈ [t_lo, t_hi]` (measured by summation).
pub fn lower_truncation_error(alpha: f64, h: f64, m: i64, t_lo: f64, t_hi: f64) -> f64 {
    // the tail relative error t^α E_M(t) grows with t, so the right end dominates;
    // scan a few points anyway to stay robust
    log_grid(t_lo, t_hi, 32)
        .into_iter()
        .map(|t| {
            let lo = m - (80.0 / (alpha * h)).ceil() as i64;
            trapezoid_sum(alpha, h, lo, m, t) * t.powf(alpha)
        })
        .fold(0.0, f64::max)
}

/// Largest relative error of the upper tail `n >= N` over `t ∈ [t_lo, t_hi]` (measured by summation).
pub fn upper_truncation_error(alpha: f64, h: f64, n: i64, t_lo: f64, t_hi: f64) -> f64 {
    log_grid(t_lo, t_hi, 32)
        .into_iter()
        .map(|t| {
            // beyond e^{kh} t > 800 the terms vanish
            let stop = ((800.0 / t).ln() / h).ceil() as i64 + 1;
            if stop <= n {
                return 0.0;
            }
            trapezoid_sum(alpha, h, n, stop, t) * t.powf(alpha)
        })
        .fold(0.0, f64::max)
}
