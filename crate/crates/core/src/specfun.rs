//! Scalar special functions and a bracketed root finder.
//!
//! Everything here is pure and works on `f64`. Accuracy targets are
//! relative: ~1e-15 for `gamma_fn`, ~1e-13 for the incomplete gamma
//! functions and `erf`.

use crate::error::{domain, Error, Result};
use std::f64::consts::PI;

const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEFFS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

const SQRT_2PI: f64 = 2.506_628_274_631_000_5;
const FRAC_2_SQRT_PI: f64 = std::f64::consts::FRAC_2_SQRT_PI;
const MAX_SERIES_TERMS: usize = 10_000;

fn lanczos_sum(z: f64) -> f64 {
    // z is the argument shifted by -1
    let mut acc = LANCZOS_COEFFS[0];
    for (i, c) in LANCZOS_COEFFS.iter().enumerate().skip(1) {
        acc += c / (z + i as f64);
    }
    acc
}

/// Gamma function for `x > 0`.
pub fn gamma_fn(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(domain(format!("gamma_fn requires x > 0, got {x}")));
    }
    if x < 0.5 {
        // reflection keeps the Lanczos sum in its accurate range
        return Ok(PI / ((PI * x).sin() * gamma_fn(1.0 - x)?));
    }
    if x > 171.7 {
        return Ok(f64::INFINITY);
    }
    let z = x - 1.0;
    let t = z + LANCZOS_G + 0.5;
    let half = t.powf(0.5 * (z + 0.5));
    Ok(SQRT_2PI * half * (-t).exp() * half * lanczos_sum(z))
}

/// Natural logarithm of the gamma function for `x > 0`.
pub fn ln_gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(domain(format!("ln_gamma requires x > 0, got {x}")));
    }
    if x < 0.5 {
        return Ok((PI / (PI * x).sin()).ln() - ln_gamma(1.0 - x)?);
    }
    if x < 20.0 {
        return Ok(gamma_fn(x)?.ln());
    }
    let z = x - 1.0;
    let t = z + LANCZOS_G + 0.5;
    Ok(0.5 * (2.0 * PI).ln() + (z + 0.5) * t.ln() - t + lanczos_sum(z).ln())
}

fn check_incomplete_args(a: f64, x: f64) -> Result<()> {
    if !(a > 0.0) || !a.is_finite() {
        return Err(domain(format!("incomplete gamma requires a > 0, got {a}")));
    }
    if !(x >= 0.0) {
        return Err(domain(format!("incomplete gamma requires x >= 0, got {x}")));
    }
    Ok(())
}

/// Series for the lower incomplete gamma, returned as `ln(e^{-x} x^a)` and the series sum.
fn lower_series(a: f64, x: f64) -> Result<f64> {
    let mut term = 1.0 / a;
    let mut sum = term;
    let mut ap = a;
    for _ in 0..MAX_SERIES_TERMS {
        ap += 1.0;
        term *= x / ap;
        sum += term;
        if term.abs() < sum.abs() * 1e-17 {
            return Ok(sum);
        }
    }
    Err(Error::NoConvergence(format!("incomplete gamma series a={a} x={x}")))
}

/// Continued fraction for `Γ(a,x) e^{x} x^{-a}` (modified Lentz).
fn upper_fraction(a: f64, x: f64) -> Result<f64> {
    const TINY: f64 = 1e-300;
    let mut b = x + 1.0 - a;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..MAX_SERIES_TERMS {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if d.abs() < TINY {
            d = TINY;
        }
        c = b + an / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < 1e-16 {
            return Ok(h);
        }
    }
    Err(Error::NoConvergence(format!("incomplete gamma fraction a={a} x={x}")))
}

/// Lower incomplete gamma `γ(a,x) = ∫₀ˣ e^{-σ} σ^{a-1} dσ`.
pub fn lower_incomplete_gamma(a: f64, x: f64) -> Result<f64> {
    check_incomplete_args(a, x)?;
    if x == 0.0 {
        return Ok(0.0);
    }
    if x < a + 1.0 {
        let pref = (-x + a * x.ln()).exp();
        Ok(pref * lower_series(a, x)?)
    } else {
        Ok(gamma_fn(a)? - upper_incomplete_gamma(a, x)?)
    }
}

/// Upper incomplete gamma `Γ(a,x) = ∫ₓ^∞ e^{-σ} σ^{a-1} dσ`.
pub fn upper_incomplete_gamma(a: f64, x: f64) -> Result<f64> {
    check_incomplete_args(a, x)?;
    if x == 0.0 {
        return gamma_fn(a);
    }
    if x.is_infinite() {
        return Ok(0.0);
    }
    if x < a + 1.0 {
        let pref = (-x + a * x.ln()).exp();
        Ok(gamma_fn(a)? - pref * lower_series(a, x)?)
    } else {
        let log_pref = -x + a * x.ln();
        Ok((log_pref + upper_fraction(a, x)?.ln()).exp())
    }
}

/// Regularized lower incomplete gamma `P(a,x) = γ(a,x)/Γ(a)`.
pub fn regularized_lower_gamma(a: f64, x: f64) -> Result<f64> {
    check_incomplete_args(a, x)?;
    if x == 0.0 {
        return Ok(0.0);
    }
    if x < a + 1.0 {
        let log_pref = -x + a * x.ln() - ln_gamma(a)?;
        Ok((log_pref + lower_series(a, x)?.ln()).exp())
    } else {
        Ok(1.0 - regularized_upper_gamma(a, x)?)
    }
}

/// Regularized upper incomplete gamma `Q(a,x) = Γ(a,x)/Γ(a)`.
pub fn regularized_upper_gamma(a: f64, x: f64) -> Result<f64> {
    check_incomplete_args(a, x)?;
    if x == 0.0 {
        return Ok(1.0);
    }
    if x.is_infinite() {
        return Ok(0.0);
    }
    if x < a + 1.0 {
        Ok(1.0 - regularized_lower_gamma(a, x)?)
    } else {
        let log_pref = -x + a * x.ln() - ln_gamma(a)?;
        Ok((log_pref + upper_fraction(a, x)?.ln()).exp())
    }
}

/// Crossover between the series and the continued-fraction routes of [`erf`].
pub const ERF_CROSSOVER: f64 = 2.0;

/// `erf` by the positive-term series `2/√π e^{-x²} Σ 2ⁿ x^{2n+1}/(2n+1)!!`.
pub fn erf_series(x: f64) -> f64 {
    let x2 = x * x;
    let mut term = x;
    let mut sum = x;
    let mut k = 1.0;
    for _ in 0..MAX_SERIES_TERMS {
        k += 2.0;
        term *= 2.0 * x2 / k;
        sum += term;
        if term.abs() <= sum.abs() * 1e-17 {
            break;
        }
    }
    FRAC_2_SQRT_PI * (-x2).exp() * sum
}

/// `erfc` for `x > 0` by the continued fraction `1/(x+ (1/2)/(x+ 1/(x+ (3/2)/(x+ ...))))`.
pub fn erfc_fraction(x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    let mut f = x;
    let mut c = x;
    let mut d = 0.0;
    for n in 1..MAX_SERIES_TERMS {
        let an = 0.5 * n as f64;
        d = x + an * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = x + an / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = c * d;
        f *= del;
        if (del - 1.0).abs() < 1e-16 {
            break;
        }
    }
    (-x * x).exp() / (f * PI.sqrt())
}

/// Error function.
pub fn erf(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    let ax = x.abs();
    let v = if ax < ERF_CROSSOVER {
        erf_series(ax)
    } else if ax > 6.0 {
        1.0
    } else {
        1.0 - erfc_fraction(ax)
    };
    v.copysign(x)
}

/// Complementary error function.
pub fn erfc(x: f64) -> f64 {
    if x < ERF_CROSSOVER {
        1.0 - erf(x)
    } else {
        erfc_fraction(x)
    }
}

/// Bracketed root of a monotone function, bisection-safeguarded.
///
/// Takes secant (derivative-free Newton) steps inside the bracket and falls
/// back to bisection whenever a step leaves the bracket or fails to halve
/// it. Returns `x` with `|f(x)| <= tol` or bracket width `<= tol * max(1, |x|)`.
pub fn solve_scalar_root<F>(mut f: F, lo: f64, hi: f64, tol: f64) -> Result<f64>
where
    F: FnMut(f64) -> f64,
{
    let (mut a, mut b) = (lo.min(hi), lo.max(hi));
    let mut fa = f(a);
    let fb = f(b);
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() || fa.is_nan() || fb.is_nan() {
        return Err(Error::NoBracket { lo: a, hi: b, f_lo: fa, f_hi: fb });
    }
    // previous iterate for the secant slope
    let (mut xp, mut fp) = (a, fa);
    let (mut x, mut fx) = (b, fb);
    let mut width = b - a;
    for _ in 0..500 {
        let mut cand = if fx != fp { x - fx * (x - xp) / (fx - fp) } else { f64::NAN };
        if !(cand > a && cand < b) {
            cand = 0.5 * (a + b);
        }
        let fc = f(cand);
        xp = x;
        fp = fx;
        x = cand;
        fx = fc;
        if fc == 0.0 || fc.abs() <= tol {
            return Ok(x);
        }
        if fc.signum() == fa.signum() {
            a = cand;
            fa = fc;
        } else {
            b = cand;
        }
        let new_width = b - a;
        if new_width <= tol * x.abs().max(1.0) {
            return Ok(x);
        }
        if new_width > 0.5 * width {
            // slow progress: force a bisection
            let mid = 0.5 * (a + b);
            let fm = f(mid);
            if fm == 0.0 || fm.abs() <= tol {
                return Ok(mid);
            }
            if fm.signum() == fa.signum() {
                a = mid;
                fa = fm;
            } else {
                b = mid;
            }
            xp = x;
            fp = fx;
            x = mid;
            fx = fm;
        }
        width = b - a;
        if width <= tol * x.abs().max(1.0) {
            return Ok(x);
        }
    }
    Err(Error::NoConvergence(format!("root finder on [{lo}, {hi}]")))
}

/// Newton iteration with derivative, kept inside `[lo, hi]` by bisection.
pub fn solve_scalar_root_newton<F>(mut f: F, lo: f64, hi: f64, guess: f64, tol: f64) -> Result<f64>
where
    F: FnMut(f64) -> (f64, f64),
{
    let (mut a, mut b) = (lo.min(hi), lo.max(hi));
    let (fa, _) = f(a);
    let (fb, _) = f(b);
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(Error::NoBracket { lo: a, hi: b, f_lo: fa, f_hi: fb });
    }
    let sign_a = fa.signum();
    let mut x = if guess > a && guess < b { guess } else { 0.5 * (a + b) };
    for _ in 0..200 {
        let (fx, dfx) = f(x);
        if fx == 0.0 {
            return Ok(x);
        }
        if fx.signum() == sign_a {
            a = x;
        } else {
            b = x;
        }
        let mut next = x - fx / dfx;
        if !(next > a && next < b) || !next.is_finite() {
            next = 0.5 * (a + b);
        }
        let step = (next - x).abs();
        x = next;
        if step <= tol * x.abs().max(f64::MIN_POSITIVE) || b - a <= tol * x.abs() {
            return Ok(x);
        }
    }
    Err(Error::NoConvergence(format!("Newton root finder on [{lo}, {hi}]")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};

    #[test]
    fn gamma_special_values() {
        assert_relative_eq!(gamma_fn(0.5).unwrap(), 1.772_453_850_905_516, max_relative = 1e-14);
        assert_relative_eq!(gamma_fn(1.0).unwrap(), 1.0, max_relative = 1e-14);
        assert_relative_eq!(gamma_fn(1.5).unwrap(), 0.886_226_925_452_758, max_relative = 1e-14);
        assert_relative_eq!(gamma_fn(5.0).unwrap(), 24.0, max_relative = 1e-14);
        assert!(gamma_fn(0.0).is_err());
        assert!(gamma_fn(-1.5).is_err());
    }

    #[test]
    fn gamma_recurrence() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(7);
        for _ in 0..1000 {
            let x: f64 = rng.gen_range(0.1..10.0);
            let lhs = gamma_fn(x + 1.0).unwrap();
            let rhs = x * gamma_fn(x).unwrap();
            assert_relative_eq!(lhs, rhs, max_relative = 1e-12);
            assert_relative_eq!(ln_gamma(x).unwrap(), gamma_fn(x).unwrap().ln(), epsilon = 1e-13);
        }
    }

    #[test]
    fn ln_gamma_large() {
        // ln Γ(101) = ln(100!)
        assert_relative_eq!(ln_gamma(101.0).unwrap(), 363.739_375_555_563_5, max_relative = 1e-14);
    }

    #[test]
    fn incomplete_gamma_closed_forms() {
        for &x in &[0.0, 0.1, 0.7, 1.0, 2.5, 10.0, 40.0] {
            assert_relative_eq!(upper_incomplete_gamma(1.0, x).unwrap(), (-x).exp(), max_relative = 1e-13);
        }
        assert_relative_eq!(upper_incomplete_gamma(0.5, 0.0).unwrap(), PI.sqrt(), max_relative = 1e-14);
        // Γ(1/2, x²) = √π erfc(x)
        for &x in &[0.3, 1.0, 1.9, 2.5, 4.0] {
            assert_relative_eq!(
                upper_incomplete_gamma(0.5, x * x).unwrap(),
                PI.sqrt() * erfc(x),
                max_relative = 1e-12
            );
        }
        assert!(upper_incomplete_gamma(0.0, 1.0).is_err());
        assert!(upper_incomplete_gamma(1.0, -1.0).is_err());
    }

    #[test]
    fn incomplete_gamma_monotone() {
        let mut prev = f64::INFINITY;
        for i in 0..200 {
            let x = i as f64 * 0.1;
            let v = upper_incomplete_gamma(0.3, x).unwrap();
            assert!(v <= prev);
            prev = v;
        }
    }

    #[test]
    fn regularized_pair_sums_to_one() {
        for &(a, x) in &[(0.5, 0.01), (0.5, 3.0), (2.5, 1.0), (0.1, 1e-6), (7.0, 12.0)] {
            let p = regularized_lower_gamma(a, x).unwrap();
            let q = regularized_upper_gamma(a, x).unwrap();
            assert_relative_eq!(p + q, 1.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn erf_values() {
        assert_eq!(erf(0.0), 0.0);
        assert_relative_eq!(erf(1.0), 0.842_700_792_949_714_9, max_relative = 1e-14);
        assert!((erf(10.0) - 1.0).abs() <= 1e-15);
        assert_relative_eq!(erf(-0.7), -erf(0.7), max_relative = 1e-16);
        for i in 1..200 {
            let x = i as f64 * 0.05;
            assert!(erf(x).abs() < 1.0 || x > 5.8);
        }
    }

    #[test]
    fn erf_routes_agree_at_crossover() {
        for &x in &[1.8, 1.9, 2.0, 2.1, 2.3] {
            let a = erf_series(x);
            let b = 1.0 - erfc_fraction(x);
            assert_relative_eq!(a, b, max_relative = 1e-13);
        }
    }

    #[test]
    fn roots() {
        let r = solve_scalar_root(|x| x - 2.0, 0.0, 5.0, 1e-14).unwrap();
        assert_relative_eq!(r, 2.0, max_relative = 1e-13);
        let r = solve_scalar_root(|x| x * x * x - 8.0, 0.0, 10.0, 1e-14).unwrap();
        assert_relative_eq!(r, 2.0, max_relative = 1e-12);
        assert!(matches!(
            solve_scalar_root(|x| x * x + 1.0, -1.0, 1.0, 1e-12),
            Err(Error::NoBracket { .. })
        ));
        let r = solve_scalar_root_newton(|x| (x * x - 2.0, 2.0 * x), 0.0, 2.0, 1.0, 1e-15).unwrap();
        assert_relative_eq!(r, 2f64.sqrt(), max_relative = 1e-14);
    }
}
