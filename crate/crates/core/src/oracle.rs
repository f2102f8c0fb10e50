//! Brute-force references used to check the fast paths: composite Gauss
//! quadrature of convolution integrals, closed-form solutions of the test
//! problems, and a harness for the θ-method recursion of the auxiliary chains.

use crate::error::{domain, Error, Result};
use crate::problem::ChemoParams;
use crate::specfun::erf;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Composite Gauss–Legendre rule on `[u_lo, t]` with a geometrically graded first panel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    /// Uniform panels on the whole interval.
    pub panels: usize,
    /// Ratio between consecutive subintervals of the first panel.
    pub grading_ratio: f64,
    /// Number of geometric subintervals toward the singular endpoint.
    pub grading_levels: usize,
    pub gauss_order: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self { panels: 32, grading_ratio: 0.5, grading_levels: 600, gauss_order: 8 }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<()> {
        if self.panels == 0 || self.gauss_order < 2 {
            return Err(domain("need panels >= 1 and gauss_order >= 2"));
        }
        if !(self.grading_ratio > 0.0 && self.grading_ratio < 1.0) {
            return Err(domain("grading ratio must lie in (0,1)"));
        }
        Ok(())
    }
}

/// Nodes and weights of the `order`-point Gauss–Legendre rule on `[-1, 1]`.
pub fn gauss_legendre(order: usize) -> (Vec<f64>, Vec<f64>) {
    let n = order;
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut r = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, r);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * r * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let p = if n == 1 { r } else { p1 };
            let pm = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (r * p - pm) / (r * r - 1.0);
            let dr = p / dp;
            r -= dr;
            if dr.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -r;
        x[n - 1 - i] = r;
        w[i] = 2.0 / ((1.0 - r * r) * dp * dp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

fn rule_sum(nodes: &(Vec<f64>, Vec<f64>), a: f64, b: f64, f: &impl Fn(f64) -> f64) -> f64 {
    let (m, r) = (0.5 * (a + b), 0.5 * (b - a));
    nodes.0.iter().zip(&nodes.1).map(|(x, w)| w * f(m + r * x)).sum::<f64>() * r
}

fn graded_integral(f: &impl Fn(f64) -> f64, lo: f64, hi: f64, spec: &QuadratureSpec) -> f64 {
    let rule = gauss_legendre(spec.gauss_order);
    let width = (hi - lo) / spec.panels as f64;
    let mut sum = 0.0;
    for p in 1..spec.panels {
        sum += rule_sum(&rule, lo + p as f64 * width, lo + (p + 1) as f64 * width, f);
    }
    let mut right = width;
    for _ in 0..spec.grading_levels {
        let left = right * spec.grading_ratio;
        sum += rule_sum(&rule, lo + left, lo + right, f);
        right = left;
    }
    sum
}

/// `∫ k(t − s) g(s) ds` over `s ∈ [0, t − u_lo]`, where `u_lo` is the start of the kernel's support.
///
/// The integral is computed in the lag variable `u = t − s` with the mesh
/// graded toward `u_lo`; the result is accepted only if doubling the panels
/// changes it by less than 1e-10 relative.
pub fn convolve_direct(
    kernel: impl Fn(f64) -> f64,
    support_start: f64,
    g: impl Fn(f64) -> f64,
    t: f64,
    spec: &QuadratureSpec,
) -> Result<f64> {
    spec.validate()?;
    if t <= support_start {
        return Ok(0.0);
    }
    let f = |u: f64| kernel(u) * g(t - u);
    let coarse = graded_integral(&f, support_start, t, spec);
    let fine_spec = QuadratureSpec { panels: 2 * spec.panels, grading_levels: spec.grading_levels + 1, ..*spec };
    let fine = graded_integral(&f, support_start, t, &fine_spec);
    if !fine.is_finite() || (fine - coarse).abs() > 1e-10 * fine.abs().max(1e-300) {
        return Err(Error::NoConvergence(format!(
            "quadrature at t = {t}: {coarse:e} vs {fine:e} after doubling the panels"
        )));
    }
    Ok(fine)
}

/// Exact or reference values of the test problems.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ClosedForm {
    /// `y(t) = t/2`.
    Example1Solution,
    /// `I(y)(t) = ((t−2)/2) erf(√t/2) + e^{−t/4} √t/√π`.
    Example1Integral,
    /// `y(10)` of the Pareto example.
    Example2Reference,
    /// Drug amount of the chemotherapy model.
    ChemoA(ChemoParams),
}

pub const EXAMPLE2_REFERENCE: f64 = 0.570_525_788_119;
pub const EXAMPLE2_T: f64 = 10.0;

/// `(y(100), w(100))` of the chemotherapy model with parameter set 2, computed
/// by `scripts/chemo_reference.py` (two independent discretizations agree to 2e-11).
pub const CHEMO_SET2_REFERENCE: (f64, f64) = (12.199_805_471_975_722, 2.960_709_808_218_082_7);

impl ClosedForm {
    /// Looks up `example1_solution`, `example1_integral`, `example2_reference`
    /// or `chemo_a_of_t` (parameter set 1).
    pub fn by_name(name: &str) -> Result<Self> {
        Ok(match name {
            "example1_solution" => ClosedForm::Example1Solution,
            "example1_integral" => ClosedForm::Example1Integral,
            "example2_reference" => ClosedForm::Example2Reference,
            "chemo_a_of_t" => ClosedForm::ChemoA(ChemoParams::set(1)?),
            _ => return Err(domain(format!("unknown closed form {name:?}"))),
        })
    }

    pub fn eval(&self, t: f64) -> Result<f64> {
        match self {
            ClosedForm::Example1Solution => Ok(t / 2.0),
            ClosedForm::Example1Integral => {
                if t <= 0.0 {
                    return Ok(0.0);
                }
                let s = t.sqrt();
                Ok((t - 2.0) / 2.0 * erf(s / 2.0) + (-t / 4.0).exp() * s / PI.sqrt())
            }
            ClosedForm::Example2Reference => {
                if t == EXAMPLE2_T {
                    Ok(EXAMPLE2_REFERENCE)
                } else {
                    Err(Error::OutOfRange { t, lo: EXAMPLE2_T, hi: EXAMPLE2_T })
                }
            }
            ClosedForm::ChemoA(p) => p.drug(t),
        }
    }
}

/// Outcome of [`theta_recursion_bound_check`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThetaCheck {
    /// `max_k |z_l^k|` per chain component.
    pub max_magnitude: Vec<f64>,
    pub bounds: Vec<f64>,
    pub pass: bool,
}

/// Stability function `R(μ)` of the θ-method.
pub fn theta_r(theta: f64, mu: f64) -> f64 {
    (1.0 + (1.0 - theta) * mu) / (1.0 - theta * mu)
}

/// Runs `(I − θΔtJ) z^{k+1} = (I + (1−θ)ΔtJ) z^k + Δt e_0 g^{k+1}` for the chain
/// `J` (diagonal −γ, subdiagonal 1…m) from `z = 0` and compares each component
/// with its a-priori bound. `g` returns the sample at step `k`.
pub fn theta_recursion_bound_check(
    theta: f64,
    gamma: f64,
    dt: f64,
    m: usize,
    steps: usize,
    g: impl Fn(usize) -> f64,
) -> Result<ThetaCheck> {
    if !(theta > 0.0 && theta <= 1.0 && gamma > 0.0 && dt > 0.0) || m > 2 {
        return Err(domain("need theta in (0,1], gamma > 0, dt > 0 and m <= 2"));
    }
    let mu = -gamma * dt;
    let r = theta_r(theta, mu).abs();
    if r >= 1.0 {
        return Err(domain(format!("|R(mu)| = {r} >= 1")));
    }
    let q = 1.0 - theta * mu;
    let s = 1.0 / q;
    let (r1, r2) = (1.0 / (q * q), 2.0 * theta / (q * q * q));
    let (s1, s2) = (theta / (q * q), 2.0 * theta * theta / (q * q * q));
    let big_g = (0..steps).map(|k| g(k + 1).abs()).fold(0.0, f64::max);
    let om = 1.0 - r;
    let all = [
        dt * s * big_g / om,
        dt.powi(2) * big_g * (r1 * s / (om * om) + s1 / om),
        dt.powi(3)
            * big_g
            * ((2.0 * r1 * r1 / om.powi(3) + r2 / (om * om)) * s + 2.0 * r1 * s1 / (om * om) + s2 / om),
    ];
    let bounds = all[..=m].to_vec();

    let mut z = vec![0.0; m + 1];
    let mut max_magnitude = vec![0.0f64; m + 1];
    let mut rhs = vec![0.0; m + 1];
    for k in 0..steps {
        for l in 0..=m {
            let mut v = (1.0 - (1.0 - theta) * gamma * dt) * z[l];
            if l > 0 {
                v += (1.0 - theta) * dt * l as f64 * z[l - 1];
            }
            rhs[l] = v;
        }
        rhs[0] += dt * g(k + 1);
        for l in 0..=m {
            let mut v = rhs[l];
            if l > 0 {
                v += theta * dt * l as f64 * z[l - 1];
            }
            z[l] = v / q;
        }
        for l in 0..=m {
            max_magnitude[l] = max_magnitude[l].max(z[l].abs());
        }
    }
    let pass = max_magnitude.iter().zip(&bounds).all(|(v, b)| *v <= b * (1.0 + 1e-10));
    Ok(ThetaCheck { max_magnitude, bounds, pass })
}

/// Least-squares slope of `log max|z_l|` against `log γ`, one per component.
pub fn theta_decay_exponents(theta: f64, dt: f64, m: usize, gammas: &[f64], steps: usize) -> Result<Vec<f64>> {
    if gammas.len() < 2 {
        return Err(domain("need at least two gamma values"));
    }
    let runs = gammas
        .iter()
        .map(|&gm| theta_recursion_bound_check(theta, gm, dt, m, steps, |_| 1.0))
        .collect::<Result<Vec<_>>>()?;
    let xs: Vec<f64> = gammas.iter().map(|g| g.ln()).collect();
    let xm = xs.iter().sum::<f64>() / xs.len() as f64;
    Ok((0..=m)
        .map(|l| {
            let ys: Vec<f64> = runs.iter().map(|r| r.max_magnitude[l].ln()).collect();
            let ym = ys.iter().sum::<f64>() / ys.len() as f64;
            let num: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - xm) * (y - ym)).sum();
            let den: f64 = xs.iter().map(|x| (x - xm).powi(2)).sum();
            num / den
        })
        .collect())
}
