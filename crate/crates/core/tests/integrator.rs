use disdel::driver::{run, RunSettings};
use disdel::kernel::{ExpTerm, ExponentialSumKernel};
use disdel::problem::*;
use disdel::radau::*;
use disdel::Error;
use nalgebra::DMatrix;
use std::f64::consts::FRAC_PI_4;
use std::sync::Arc;

fn decay(tol: f64) -> (DenseOde<impl Fn(f64, &[f64], &mut [f64]) + Sync>, IntegratorConfig) {
    let sys = DenseOde::new(|_t, y: &[f64], o: &mut [f64]| o[0] = -y[0], 0.0, vec![1.0]);
    let cfg = IntegratorConfig::new(ToleranceLedger::uniform(1, tol), 1.0, 1e-6);
    (sys, cfg)
}

#[test]
fn scalar_decay() {
    let (sys, cfg) = decay(1e-10);
    let r = integrate(&sys, &cfg).unwrap();
    assert_eq!(r.t_end, 1.0);
    assert!((r.y_end[0] - (-1f64).exp()).abs() < 1e-9);
}

#[test]
fn fixed_step_order_five() {
    let (sys, mut cfg) = decay(1e-14);
    let errs: Vec<f64> = [0.1, 0.05, 0.025]
        .iter()
        .map(|&h| {
            cfg.fixed_step = Some(h);
            let r = integrate(&sys, &cfg).unwrap();
            (r.y_end[0] - (-1f64).exp()).abs()
        })
        .collect();
    for w in errs.windows(2) {
        let ratio = w[0] / w[1];
        assert!((ratio - 32.0).abs() < 0.2 * 32.0, "{errs:?}");
    }
}

#[test]
fn cubic_solution_is_exact_in_dense_output() {
    // y = t³ solves ẏ = 3t² exactly for a degree-3 collocation polynomial
    let sys = DenseOde::new(|t, _y: &[f64], o: &mut [f64]| o[0] = 3.0 * t * t, 0.0, vec![0.0]);
    let mut cfg = IntegratorConfig::new(ToleranceLedger::uniform(1, 1e-8), 2.0, 0.3);
    cfg.dense_output = true;
    let r = integrate(&sys, &cfg).unwrap();
    let d = r.dense.unwrap();
    for rec in &d.records {
        let mid = rec.t_left + 0.5 * rec.h;
        assert!((d.eval(mid, 0).unwrap() - mid.powi(3)).abs() < 1e-12 * (1.0 + mid.powi(3)));
        assert!((d.eval(rec.t_left, 0).unwrap() - rec.t_left.powi(3)).abs() < 1e-12 * (1.0 + rec.t_left.powi(3)));
    }
    assert!(d.eval(2.5, 0).is_err());
}

#[test]
fn samples_follow_the_solution() {
    let (sys, mut cfg) = decay(1e-10);
    cfg.sample_times = vec![0.0, 0.25, 0.5, 1.0];
    let r = integrate(&sys, &cfg).unwrap();
    assert_eq!(r.samples.len(), 4);
    for (t, v) in &r.samples {
        assert!((v[0] - (-t).exp()).abs() < 1e-8, "{t}");
    }
    cfg.sample_times = vec![1.5];
    assert!(integrate(&sys, &cfg).is_err());
}

#[test]
fn linear_dae_with_mass() {
    // y1' = -y1, 0 = y1 - y2
    let sys = DenseOde::new(
        |_t, y: &[f64], o: &mut [f64]| {
            o[0] = -y[0];
            o[1] = y[0] - y[1];
        },
        0.0,
        vec![1.0, 1.0],
    )
    .with_mass(DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![1.0, 0.0])));
    let cfg = IntegratorConfig::new(ToleranceLedger::uniform(2, 1e-10), 2.0, 1e-4);
    let r = integrate(&sys, &cfg).unwrap();
    let e = (-2f64).exp();
    assert!((r.y_end[0] - e).abs() < 1e-9 && (r.y_end[1] - e).abs() < 1e-9);
}

#[test]
fn max_steps_is_enforced() {
    let (sys, mut cfg) = decay(1e-12);
    cfg.max_steps = 3;
    assert_eq!(integrate(&sys, &cfg).unwrap_err(), Error::MaxStepsExceeded(3));
}

#[test]
fn invalid_config_is_rejected() {
    let (sys, mut cfg) = decay(1e-8);
    cfg.h_init = -1.0;
    assert!(integrate(&sys, &cfg).is_err());
    let (sys, mut cfg) = decay(1e-8);
    cfg.ledger = ToleranceLedger::uniform(2, 1e-8);
    assert!(integrate(&sys, &cfg).is_err());
}

struct ExactKernelModel;

impl DelayModel for ExactKernelModel {
    fn dim(&self) -> usize {
        1
    }
    fn rhs(&self, _t: f64, _y: &[f64], _d: &[f64], i: f64, out: &mut [f64]) {
        out[0] = i;
    }
    fn integrand(&self, _t: f64, _y: &[f64]) -> f64 {
        1.0
    }
}

#[test]
fn exact_exponential_kernel_has_no_approximation_error() {
    let k = ExponentialSumKernel::new(vec![ExpTerm::new(1.0, vec![1.0])]).unwrap();
    let p = DistributedDelayProblem::new(Arc::new(ExactKernelModel), vec![0.0], (0.0, 3.0), vec![], KernelSource::Explicit(k.clone()))
        .unwrap();
    let sys = AugmentedSystem::with_kernel(p, k).unwrap();
    let mut cfg = IntegratorConfig::new(ToleranceLedger::uniform(3, 1e-10), 3.0, 1e-4);
    cfg.sample_times = vec![0.5, 1.0, 2.0, 3.0];
    let r = integrate(&sys, &cfg).unwrap();
    for (t, v) in &r.samples {
        assert!((v[1] - (1.0 - (-t).exp())).abs() < 1e-8, "{t}: {}", v[1]);
        // y = ∫ (1 - e^{-s}) ds
        assert!((v[0] - (t - 1.0 + (-t).exp())).abs() < 1e-8);
    }
}

#[test]
fn example1_tolerance_proportionality() {
    let errs: Vec<f64> = [1e-4, 1e-5, 1e-6, 1e-7, 1e-8]
        .iter()
        .map(|&tol| run(&RunSettings::new(Builtin::Example1, 1e-10, tol)).unwrap().error.unwrap())
        .collect();
    for (tol, e) in [1e-4, 1e-5, 1e-6, 1e-7, 1e-8].iter().zip(&errs) {
        assert!(*e < 10.0 * tol && *e > tol / 100.0, "{tol}: {e}");
    }
}

#[test]
fn example1_eps_proportionality() {
    for eps in [1e-4, 1e-5, 1e-6, 1e-7] {
        let e = run(&RunSettings::new(Builtin::Example1, eps, 1e-8)).unwrap().error.unwrap();
        assert!(e < 10.0 * eps && e > eps / 10.0, "{eps}: {e}");
    }
}

#[test]
fn example1_omega_reduces_work() {
    for eps in [1e-4, 1e-6] {
        let go = |omega| {
            let mut s = RunSettings::new(Builtin::Example1, eps, eps);
            s.omega = omega;
            s.h_init = Some(0.1);
            run(&s).unwrap()
        };
        let (a, b) = (go(1.0), go(100.0));
        let ratio = a.error.unwrap() / b.error.unwrap();
        assert!((1.0 / 3.0..=3.0).contains(&ratio), "{eps}: {ratio}");
        assert!(b.report.stats.n_fevals < a.report.stats.n_fevals);
    }
}

#[test]
fn example2_breaking_points_are_mesh_points() {
    let out = run(&RunSettings::new(Builtin::Example2, 1e-6, 1e-6)).unwrap();
    assert_eq!(out.breaking_points.len(), 10);
    for b in &out.breaking_points {
        assert!(out.report.mesh.iter().any(|m| m == b), "{b}");
    }
    assert_eq!(out.report.breaking_points_hit, out.breaking_points);
    let bp = breaking_points(FRAC_PI_4, 1.0, 10.0, 10);
    assert_eq!(out.breaking_points, bp);
}

#[test]
fn example2_lift_agrees_with_direct_formulation() {
    let direct = run(&RunSettings::new(Builtin::Example2, 1e-8, 1e-8)).unwrap();
    let mut s = RunSettings::new(Builtin::Example2, 1e-8, 1e-8);
    s.lift_levels = 1;
    let lifted = run(&s).unwrap();
    assert_eq!(lifted.state_dim, 2);
    let diff = (lifted.report.y_end[0] - direct.report.y_end[0]).abs();
    assert!(diff < 1e-7, "{diff}");
    assert!(lifted.error.unwrap() < 1e-6);
}

#[test]
fn lifted_variable_is_zero_before_beta() {
    let p = pareto_alpha_lift(&builtin_problem(Builtin::Example2, 1).unwrap(), 1).unwrap();
    let sys = AugmentedSystem::with_eps(p, 1e-6, 0.0).unwrap();
    let ledger = ToleranceLedger::new(&sys, 1e-8, 1.0, 1.0).unwrap();
    let mut cfg = IntegratorConfig::new(ledger, 3.0, 1e-6);
    cfg.sample_times = (1..=10).map(|k| 0.1 * k as f64).collect();
    let r = integrate(&sys, &cfg).unwrap();
    for (_, v) in &r.samples {
        assert_eq!(v[1], 0.0);
    }
}

#[test]
fn example2_early_history() {
    // before β the integral vanishes and y(t−τ) = t−τ, so ẏ(0) = −(−τ − 2)/1
    let p = builtin_problem(Builtin::Example2, 1).unwrap();
    let mut out = [0.0];
    p.model.rhs(0.0, &[0.0], &[-FRAC_PI_4], 0.0, &mut out);
    assert!((out[0] - (FRAC_PI_4 + 2.0)).abs() < 1e-15);
}

#[test]
fn chemo_ode_matches_algebraic_drug_amount() {
    let p = builtin_problem(Builtin::Example3Ode, 1).unwrap();
    let params = ChemoParams::set(1).unwrap();
    let sys = AugmentedSystem::with_eps(p, 1e-8, 0.0).unwrap();
    let ledger = ToleranceLedger::new(&sys, 1e-12, 1.0, 1.0).unwrap();
    let mut cfg = IntegratorConfig::new(ledger, 1.0, 1e-6);
    cfg.h_init = 1e-6;
    let r = integrate(&sys, &cfg).unwrap();
    let a = params.drug(1.0).unwrap();
    assert!((r.y_end[2] - a).abs() < 1e-9 * a.max(1.0), "{} vs {a}", r.y_end[2]);
}

#[test]
fn chemo_dae_algebraic_error_within_enforced_tolerance() {
    let c = ChemoParams::set(2).unwrap();
    for tol in [1e-5, 1e-9] {
        let p = builtin_problem(Builtin::Example3Dae, 2).unwrap();
        let sys = AugmentedSystem::with_eps(p, tol, 0.0).unwrap();
        let ledger = ToleranceLedger::new(&sys, tol, 100.0, 1e-2).unwrap();
        let mut cfg = IntegratorConfig::new(ledger, 100.0, tol.max(1e-5));
        cfg.dense_output = true;
        let r = integrate(&sys, &cfg).unwrap();
        // the stage equations are controlled at the transformed tolerance
        let inner = 0.1 * tol.powf(2.0 / 3.0);
        for rec in &r.dense.unwrap().records {
            let (t, a) = (rec.t_right(), rec.y[2]);
            let err = (a - c.drug(t).unwrap()).abs();
            assert!(err <= 10.0 * inner * (1.0 + a.abs()), "{tol} {t}: {err}");
        }
    }
}

#[test]
fn statistics_are_consistent() {
    for b in [Builtin::Example1, Builtin::Example2, Builtin::Example3Ode] {
        let mut s = RunSettings::new(b, 1e-6, 1e-6);
        s.param_set = 1;
        let st = run(&s).unwrap().report.stats;
        assert!(st.n_lu <= st.n_steps + st.n_rejected, "{b}: {st:?}");
        assert!(st.n_solves >= 3 * st.n_newton);
        assert!(st.n_fevals >= 3 * st.n_newton + st.n_steps);
        assert!(st.n_jac_evals >= 1);
    }
}

#[test]
fn dense_linear_algebra_gives_the_same_run() {
    let mut s = RunSettings::new(Builtin::Example3Dae, 1e-5, 1e-5);
    s.param_set = 2;
    s.omega = 100.0;
    s.aux_scale = 1e-2;
    let a = run(&s).unwrap();
    s.linear_algebra = disdel::linalg::LinearAlgebra::Dense;
    let b = run(&s).unwrap();
    assert_eq!(a.report.stats.n_steps, b.report.stats.n_steps);
    assert!((a.report.y_end[0] - b.report.y_end[0]).abs() < 1e-9 * a.report.y_end[0].abs());
}
