use super::dense::{locate, DenseOutput, StepRecord};
use super::tableau::{eigenvalues, C1, C1M1, C2, C2M1, DD1, DD2, DD3, T, TI};
use super::{ImplicitSystem, IntegrationReport, IntegratorConfig, PastState, Stats};
use crate::error::{domain, Error, Result};
use crate::linalg::{StageFactorization, StructuredMatrix};
use nalgebra::DMatrix;
use num_complex::Complex64;
use std::collections::VecDeque;

const UROUND: f64 = 1e-16;
const QUOT1: f64 = 1.0;
const QUOT2: f64 = 1.2;
/// Relative stretch allowed to land on a breaking point instead of just before it.
const TARGET_STRETCH: f64 = 0.01;
const MAX_SINGULAR: usize = 5;

/// Solution access during a step: history before `t0`, stored steps, and the
/// collocation polynomial of the step in progress.
struct Past<'a, S: ?Sized> {
    sys: &'a S,
    t0: f64,
    y0: &'a [f64],
    records: &'a VecDeque<StepRecord>,
    current: Option<&'a StepRecord>,
}

impl<S: ImplicitSystem + ?Sized> PastState for Past<'_, S> {
    fn value(&self, t: f64, comp: usize) -> f64 {
        if t < self.t0 {
            return self.sys.history(t, comp);
        }
        if let Some(cur) = self.current {
            if t > cur.t_left {
                return cur.eval(t, comp);
            }
        }
        let n = self.records.len();
        match locate(n, |k| &self.records[k], t) {
            Some(r) => r.eval(t, comp),
            None if n == 0 => self.y0[comp],
            // beyond the last step: only reachable through extrapolated lookups
            None if t > self.records[n - 1].t_right() => self.records[n - 1].eval(t, comp),
            None => f64::NAN,
        }
    }
}

fn mass_mul(mass: &DMatrix<f64>, identity: bool, v: &[f64], out: &mut [f64]) {
    if identity {
        out.copy_from_slice(v);
        return;
    }
    let d = mass.nrows();
    for i in 0..d {
        out[i] = (0..d).map(|j| mass[(i, j)] * v[j]).sum();
    }
    out[d..].copy_from_slice(&v[d..]);
}

fn rms(a: &[f64], scal: &[f64]) -> f64 {
    (a.iter().zip(scal).map(|(v, s)| (v / s).powi(2)).sum::<f64>() / a.len() as f64).sqrt()
}

enum Newton {
    Converged,
    /// Abandon the attempt and multiply `h` by the factor.
    Failed(f64),
}

/// Integrates `sys` from its initial time to `cfg.t_end`.
pub fn integrate<S: ImplicitSystem + ?Sized>(sys: &S, cfg: &IntegratorConfig) -> Result<IntegrationReport> {
    let n = sys.dim();
    let t0 = sys.t0();
    cfg.validate(n, t0)?;
    let y_init = sys.initial_state();
    if y_init.len() != n {
        return Err(domain("initial state has the wrong length"));
    }
    let mut sample_times = cfg.sample_times.clone();
    sample_times.sort_by(f64::total_cmp);
    if sample_times.iter().any(|&t| !(t >= t0 && t <= cfg.t_end)) {
        return Err(domain("sample times must lie in [t0, t_end]"));
    }
    let sample_comps: Vec<usize> =
        if cfg.sample_components.is_empty() { (0..n).collect() } else { cfg.sample_components.clone() };
    if sample_comps.iter().any(|&c| c >= n) {
        return Err(domain("sample component out of range"));
    }

    let eig = eigenvalues();
    let rtol: Vec<f64> = cfg.ledger.rtol.iter().map(|r| 0.1 * r.powf(2.0 / 3.0)).collect();
    let atol: Vec<f64> = cfg.ledger.atol.iter().zip(&cfg.ledger.rtol).zip(&rtol).map(|((a, r), rn)| rn * a / r).collect();
    let fnewt = cfg.newton_tol_factor.unwrap_or((10.0 * UROUND / rtol[0]).max(0.03f64.min(rtol[0].sqrt())));
    let nit = cfg.newton_max_iters;
    let safe = cfg.safety;
    let thet = cfg.jacobian_refresh;
    let (facr, facl) = (1.0 / cfg.step_growth_bounds.1, 1.0 / cfg.step_growth_bounds.0);
    let cfac = safe * (1 + 2 * nit) as f64;
    let hmax = if cfg.h_max > 0.0 { cfg.h_max } else { cfg.t_end - t0 };
    let fixed = cfg.fixed_step;

    let mut targets: Vec<f64> = sys.breaking_points().into_iter().filter(|&b| b > t0 && b < cfg.t_end).collect();
    targets.sort_by(f64::total_cmp);
    targets.dedup();
    targets.push(cfg.t_end);
    let mut next_target = 0;

    let keep_all = cfg.dense_output;
    let lookup_n = if keep_all { n } else { sys.lookup_dim().min(n) };
    let max_lag = sys.max_lag();
    let delayed = max_lag > 0.0 && lookup_n > 0;
    let mut records: VecDeque<StepRecord> = VecDeque::new();
    let mut dense = DenseOutput::default();

    let mut stats = Stats::default();
    let mut x = t0;
    let mut y = y_init.clone();
    let mut h = fixed.unwrap_or(cfg.h_init).min(hmax);
    let mut hold = h;
    let (mut hacc, mut erracc) = (h, 1e-2);
    let mut first = true;
    let mut reject = false;
    let mut need_lu = true;
    let mut faccon = 1.0f64;
    let mut theta;
    let mut nsing = 0;
    let mut h_lu = f64::NAN;

    let mut z = [vec![0.0; n], vec![0.0; n], vec![0.0; n]];
    let mut f = [vec![0.0; n], vec![0.0; n], vec![0.0; n]];
    let mut fz = [vec![0.0; n], vec![0.0; n], vec![0.0; n]];
    let mut mf = [vec![0.0; n], vec![0.0; n], vec![0.0; n]];
    let mut tmp = vec![0.0; n];
    let mut cont = vec![0.0; n];
    let mut cbuf = vec![Complex64::new(0.0, 0.0); n];
    let mut y0f = vec![0.0; n];
    let mut last_full: Option<StepRecord> = None;

    let mut mesh = vec![t0];
    let mut bp_hit = Vec::new();
    let mut samples = Vec::new();
    let mut si = 0;
    while si < sample_times.len() && sample_times[si] == t0 {
        samples.push((t0, sample_comps.iter().map(|&c| y[c]).collect::<Vec<_>>()));
        si += 1;
    }

    macro_rules! past {
        ($cur:expr) => {
            Past { sys, t0, y0: &y_init, records: &records, current: $cur }
        };
    }

    sys.rhs(x, &y, &past!(None), &mut y0f);
    stats.n_fevals += 1;
    let mut scal: Vec<f64> = (0..n).map(|i| atol[i] + rtol[i] * y[i].abs()).collect();

    let mut jm: StructuredMatrix = sys.jacobian(x, &y, &past!(None));
    let mass = jm.mass.clone();
    let mass_identity = mass == DMatrix::identity(mass.nrows(), mass.ncols());
    let mut e1: Option<StageFactorization<f64>> = None;
    let mut e2: Option<StageFactorization<Complex64>> = None;
    stats.n_jac_evals += 1;
    let mut caljac = true;
    let mut need_jac = false;

    loop {
        if need_jac {
            jm = sys.jacobian(x, &y, &past!(None));
            stats.n_jac_evals += 1;
            caljac = true;
            need_jac = false;
            need_lu = true;
        }

        // land exactly on the next breaking point or the final time
        while targets[next_target] <= x {
            next_target += 1;
        }
        let target = targets[next_target];
        let hits_target = x + h * (1.0 + TARGET_STRETCH) >= target;
        if hits_target {
            h = target - x;
        }
        if 0.1 * h <= x.abs() * UROUND || h <= 0.0 {
            return Err(Error::StepSizeTooSmall { t: x, h });
        }
        if stats.n_steps + stats.n_rejected >= cfg.max_steps {
            return Err(Error::MaxStepsExceeded(cfg.max_steps));
        }

        if need_lu || h != h_lu {
            let fac1 = eig.u1 / h;
            let shift2 = Complex64::new(eig.alph / h, eig.beta / h);
            match (cfg.linear_algebra.factor(&jm, fac1), cfg.linear_algebra.factor(&jm, shift2)) {
                (Ok(a), Ok(b)) => {
                    e1 = Some(a);
                    e2 = Some(b);
                    h_lu = h;
                    need_lu = false;
                    stats.n_lu += 1;
                }
                _ => {
                    nsing += 1;
                    if nsing >= MAX_SINGULAR {
                        return Err(Error::Singular);
                    }
                    h *= 0.5;
                    reject = true;
                    stats.n_rejected += 1;
                    need_lu = true;
                    need_jac = !caljac;
                    continue;
                }
            }
        }
        let (lu1, lu2) = (e1.as_ref().unwrap(), e2.as_ref().unwrap());
        let fac1 = eig.u1 / h;
        let alphn = eig.alph / h;
        let betan = eig.beta / h;
        let xph = if hits_target { target } else { x + h };

        // starting values from the previous collocation polynomial
        match (&last_full, first) {
            (Some(prev), false) => {
                let c3q = h / hold;
                let c1q = C1 * c3q;
                let c2q = C2 * c3q;
                for i in 0..n {
                    let [ak1, ak2, ak3] = prev.cont[i];
                    let poly = |cq: f64| cq * (ak1 + (cq - C2M1) * (ak2 + (cq - C1M1) * ak3));
                    let (z1, z2, z3) = (poly(c1q), poly(c2q), poly(c3q));
                    z[0][i] = z1;
                    z[1][i] = z2;
                    z[2][i] = z3;
                    for k in 0..3 {
                        f[k][i] = TI[k][0] * z1 + TI[k][1] * z2 + TI[k][2] * z3;
                    }
                }
            }
            _ => {
                for k in 0..3 {
                    z[k].fill(0.0);
                    f[k].fill(0.0);
                }
            }
        }

        // simplified Newton iteration
        faccon = faccon.max(UROUND).powf(0.8);
        theta = thet.abs();
        let mut newt = 0;
        let mut dynold = 0.0;
        let mut thqold = 0.0;
        let outcome = loop {
            if newt >= nit {
                break Newton::Failed(0.5);
            }
            let tentative = if delayed {
                Some(StepRecord::from_stages(x, h, &y, [&z[0], &z[1], &z[2]], lookup_n))
            } else {
                None
            };
            {
                let past = past!(tentative.as_ref());
                for (k, c) in [C1, C2, 1.0].into_iter().enumerate() {
                    for i in 0..n {
                        tmp[i] = y[i] + z[k][i];
                    }
                    sys.rhs(x + c * h, &tmp, &past, &mut fz[k]);
                }
            }
            stats.n_fevals += 3;
            for i in 0..n {
                let (a1, a2, a3) = (fz[0][i], fz[1][i], fz[2][i]);
                for k in 0..3 {
                    z[k][i] = TI[k][0] * a1 + TI[k][1] * a2 + TI[k][2] * a3;
                }
            }
            for k in 0..3 {
                mass_mul(&mass, mass_identity, &f[k], &mut mf[k]);
            }
            for i in 0..n {
                z[0][i] -= fac1 * mf[0][i];
                let (s2, s3) = (mf[1][i], mf[2][i]);
                z[1][i] += -alphn * s2 + betan * s3;
                z[2][i] += -alphn * s3 - betan * s2;
            }
            lu1.solve_in_place(&mut z[0]);
            for i in 0..n {
                cbuf[i] = Complex64::new(z[1][i], z[2][i]);
            }
            lu2.solve_in_place(&mut cbuf);
            for i in 0..n {
                z[1][i] = cbuf[i].re;
                z[2][i] = cbuf[i].im;
            }
            stats.n_solves += 3;
            stats.n_newton += 1;
            newt += 1;
            let dyno = ((0..3).map(|k| rms(&z[k], &scal).powi(2)).sum::<f64>() / 3.0).sqrt();
            if !dyno.is_finite() {
                break Newton::Failed(0.5);
            }
            if newt > 1 && newt < nit {
                let thq = dyno / dynold;
                theta = if newt == 2 { thq } else { (thq * thqold).sqrt() };
                thqold = thq;
                if theta < 0.99 {
                    faccon = theta / (1.0 - theta);
                    let left = (nit - 1 - newt) as f64;
                    let dyth = faccon * dyno * theta.powf(left) / fnewt;
                    if dyth >= 1.0 {
                        let qnewt = dyth.clamp(1e-4, 20.0);
                        break Newton::Failed(0.8 * qnewt.powf(-1.0 / (4.0 + left)));
                    }
                } else {
                    break Newton::Failed(0.5);
                }
            }
            dynold = dyno.max(UROUND);
            for i in 0..n {
                let f1 = f[0][i] + z[0][i];
                let f2 = f[1][i] + z[1][i];
                let f3 = f[2][i] + z[2][i];
                f[0][i] = f1;
                f[1][i] = f2;
                f[2][i] = f3;
                z[0][i] = T[0][0] * f1 + T[0][1] * f2 + T[0][2] * f3;
                z[1][i] = T[1][0] * f1 + T[1][1] * f2 + T[1][2] * f3;
                z[2][i] = T[2][0] * f1 + f2;
            }
            if faccon * dyno <= fnewt {
                break Newton::Converged;
            }
        };

        if let Newton::Failed(factor) = outcome {
            if fixed.is_some() {
                return Err(Error::NewtonFailure { t: x });
            }
            h *= factor;
            reject = true;
            stats.n_rejected += 1;
            need_lu = true;
            need_jac = !caljac;
            continue;
        }

        // embedded error estimate
        let err = if fixed.is_some() {
            0.0
        } else {
            for i in 0..n {
                tmp[i] = (DD1 * z[0][i] + DD2 * z[1][i] + DD3 * z[2][i]) / h;
            }
            mass_mul(&mass, mass_identity, &tmp, &mut mf[0]);
            for i in 0..n {
                cont[i] = mf[0][i] + y0f[i];
            }
            lu1.solve_in_place(&mut cont);
            stats.n_solves += 1;
            let mut err = rms(&cont, &scal).max(1e-10);
            if err >= 1.0 && (first || reject) {
                for i in 0..n {
                    tmp[i] = y[i] + cont[i];
                }
                sys.rhs(x, &tmp, &past!(None), &mut fz[0]);
                stats.n_fevals += 1;
                for i in 0..n {
                    cont[i] = fz[0][i] + mf[0][i];
                }
                lu1.solve_in_place(&mut cont);
                stats.n_solves += 1;
                err = rms(&cont, &scal).max(1e-10);
            }
            err
        };

        let fac = safe.min(cfac / (newt + 2 * nit) as f64);
        let mut quot = (err.powf(0.25) / fac).clamp(facr, facl);
        let mut hnew = h / quot;

        if err < 1.0 {
            first = false;
            stats.n_steps += 1;
            if cfg.predictive && fixed.is_none() {
                if stats.n_steps > 1 {
                    let facgus = ((hacc / h) * (err * err / erracc).powf(0.25) / safe).clamp(facr, facl);
                    quot = quot.max(facgus);
                    hnew = h / quot;
                }
                hacc = h;
                erracc = err.max(1e-2);
            }
            let record = StepRecord::from_stages(x, h, &y, [&z[0], &z[1], &z[2]], n);
            hold = h;
            let xold = x;
            x = xph;
            let mut rec = record;
            // pin the right end to the exact target time
            rec.h = x - xold;
            y.copy_from_slice(&rec.y);
            if y.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite { t: x });
            }
            while si < sample_times.len() && sample_times[si] <= x {
                let ts = sample_times[si];
                samples.push((ts, sample_comps.iter().map(|&c| rec.eval(ts, c)).collect()));
                si += 1;
            }
            mesh.push(x);
            if hits_target && x < cfg.t_end {
                bp_hit.push(x);
            }
            if delayed || keep_all {
                let stored = if lookup_n == n {
                    rec.clone()
                } else {
                    StepRecord { t_left: rec.t_left, h: rec.h, y: rec.y[..lookup_n].to_vec(), cont: rec.cont[..lookup_n].to_vec() }
                };
                if keep_all {
                    dense.records.push(stored.clone());
                }
                if delayed {
                    records.push_back(stored);
                    while records.len() > 1 && records[0].t_right() < x - max_lag * (1.0 + 1e-10) {
                        records.pop_front();
                    }
                }
            }
            last_full = Some(rec);
            for i in 0..n {
                scal[i] = atol[i] + rtol[i] * y[i].abs();
            }
            caljac = false;
            if x >= cfg.t_end {
                break;
            }
            sys.rhs(x, &y, &past!(None), &mut y0f);
            stats.n_fevals += 1;
            if let Some(hf) = fixed {
                h = hf;
                need_jac = theta > thet;
                continue;
            }
            hnew = hnew.min(hmax);
            if reject {
                hnew = hnew.min(h);
            }
            reject = false;
            let qt = hnew / h;
            if theta <= thet && (QUOT1..=QUOT2).contains(&qt) {
                continue;
            }
            h = hnew;
            if theta <= thet {
                need_lu = true;
            } else {
                need_jac = true;
            }
        } else {
            reject = true;
            stats.n_rejected += 1;
            if first {
                h *= 0.1;
            } else {
                h = hnew;
            }
            need_lu = true;
            need_jac = !caljac;
        }
    }

    Ok(IntegrationReport {
        t_end: x,
        y_end: y,
        samples,
        stats,
        mesh,
        breaking_points_hit: bp_hit,
        dense: if keep_all { Some(dense) } else { None },
    })
}
