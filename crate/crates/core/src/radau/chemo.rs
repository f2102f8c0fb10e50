use crate::error::{domain, Error, Result};

/// Solves `A = A0 exp(−(A − A0)/(Km V) − Vmax (t − t0)/Km)` for `A ∈ [0, A0]`.
///
/// Newton on `ln A` to 1e-14 relative, starting from `guess`.
/// Working with the logarithm keeps the root well defined after `A` underflows.
pub fn solve_algebraic_chemo(a0: f64, km: f64, v: f64, vmax: f64, t: f64, t0: f64, guess: f64) -> Result<f64> {
    if !(a0 > 0.0 && km > 0.0 && v > 0.0 && vmax > 0.0) {
        return Err(domain("chemo parameters must be positive"));
    }
    if !(t >= t0) {
        return Err(domain("need t >= t0"));
    }
    if t == t0 {
        return Ok(a0);
    }
    let kv = km * v;
    let shift = vmax * (t - t0) / km;
    let la0 = a0.ln();
    // ln A = ln A0 + (A0 − A)/(Km V) − shift, with A ∈ [0, A0]
    let (lo, hi) = (la0 - shift, (la0 + a0 / kv - shift).min(la0));
    // the residual is convex and increasing in ln A, so Newton from a point
    // right of the root decreases monotonically onto it
    let r = |l: f64| l - la0 + (l.exp() - a0) / kv + shift;
    let mut l = if guess > 0.0 { guess.ln().clamp(lo, hi) } else { hi };
    if r(l) < 0.0 {
        l = hi;
    }
    for _ in 0..100 {
        let step = r(l) / (1.0 + l.exp() / kv);
        l = (l - step).max(lo);
        if step.abs() <= 1e-14 * l.abs().max(1.0) {
            return Ok(l.exp());
        }
    }
    Err(Error::NoConvergence(format!("chemo algebraic relation at t = {t}")))
}
