mod common;

use common::*;
use disdel::kernel::*;
use disdel::linalg::{assemble, StructuredFactorization};
use disdel::oracle::*;
use disdel::problem::*;
use disdel::radau::{ImplicitSystem, PastState};
use disdel::specfun::*;
use num_complex::Complex64;
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

fn log_uniform(lo: f64, hi: f64) -> impl Strategy<Value = f64> {
    (lo.ln()..hi.ln()).prop_map(f64::exp)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn gamma_recurrence(x in 0.1f64..10.0) {
        let lhs = gamma_fn(x + 1.0).unwrap();
        let rhs = x * gamma_fn(x).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-12 * rhs.abs());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn incomplete_gamma_split(a in 0.2f64..5.0, x in 0.1f64..20.0) {
        // γ(a,x) = ∫_0^x u^{a-1} e^{-u} du as a convolution with g(s) = e^{-(x-s)}
        let lower = convolve_direct(|u| u.powf(a - 1.0), 0.0, |s| (s - x).exp(), x, &QuadratureSpec::default()).unwrap();
        let total = lower + upper_incomplete_gamma(a, x).unwrap();
        prop_assert!((total / gamma_fn(a).unwrap() - 1.0).abs() <= 1e-10);
    }

    #[test]
    fn erf_routes_agree(x in 1.9f64..2.1) {
        prop_assert!((erf_series(x) - (1.0 - erfc_fraction(x))).abs() <= 1e-13);
    }

    #[test]
    fn power_law_error_within_bounds(alpha in 0.1f64..0.95, eps in log_uniform(1e-9, 1e-3)) {
        let p = power_law_params(alpha, eps, 1e-4, 1e3).unwrap();
        for e in error_report(alpha, &p, &log_grid(p.delta, p.t_max, 2000)).unwrap() {
            prop_assert!(e.measured <= e.bound_total() * (1.0 + 1e-9), "{e:?}");
        }
    }
}

#[test]
fn halving_eps_never_increases_error() {
    let ladder = [1e-4, 1e-5, 1e-6, 1e-7, 1e-8, 1e-9, 1e-10, 1e-11];
    let spec = KernelSpec::Gamma { kappa: 0.25, alpha: 0.5 };
    let errs: Vec<f64> = ladder
        .iter()
        .map(|&eps| {
            let p = spec.approximation_params(eps, 0.0, 50.0).unwrap();
            let k = spec.build(&p).unwrap();
            log_grid(p.delta, p.t_max, 2000)
                .iter()
                .map(|&t| ((k.density(t) - spec.density(t)) / spec.density(t)).abs())
                .fold(0.0, f64::max)
        })
        .collect();
    assert!(errs.windows(2).all(|w| w[1] <= w[0]), "{errs:?}");
}

#[test]
fn negative_alpha_kernel_shape() {
    let c = ChemoParams::set(2).unwrap();
    let spec = c.kernel();
    let p = spec.approximation_params(1e-7, 0.0, c.t_f).unwrap();
    let k = spec.build(&p).unwrap();
    assert!(k.density(0.0).abs() <= 1e-12);
    for t in log_grid(1e-8, c.t_f, 500) {
        assert!(k.density(t) >= -1e-7, "{t}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn structured_matches_dense(seed in any::<u64>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        let sys = random_structured(&mut rng, 6, 60);
        let n = sys.dim();
        let a: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let s = random_shift_real(&mut rng);
        let u = StructuredFactorization::new(&sys, s).unwrap().solve(&a);
        prop_assert!(rel_diff(&u, &dense_solve_real(&sys, s, &a)) <= 1e-10);

        let b: Vec<Complex64> = (0..n).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
        let s = random_shift_complex(&mut rng);
        let u = StructuredFactorization::new(&sys, s).unwrap().solve(&b);
        prop_assert!(rel_diff(&u, &dense_solve_complex(&sys, s, &b)) <= 1e-10);
    }

    #[test]
    fn conjugate_symmetry(seed in any::<u64>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        let sys = random_structured(&mut rng, 6, 40);
        let b: Vec<Complex64> = (0..sys.dim()).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
        let s = random_shift_complex(&mut rng);
        let u = StructuredFactorization::new(&sys, s).unwrap().solve(&b);
        let bc: Vec<Complex64> = b.iter().map(|v| v.conj()).collect();
        let uc = StructuredFactorization::new(&sys, s.conj()).unwrap().solve(&bc);
        let back: Vec<Complex64> = uc.iter().map(|v| v.conj()).collect();
        prop_assert!(rel_diff(&back, &u) <= 1e-13);
    }

    #[test]
    fn linearity(seed in any::<u64>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        let sys = random_structured(&mut rng, 6, 40);
        let n = sys.dim();
        let a: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let b: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let f = StructuredFactorization::new(&sys, random_shift_real(&mut rng)).unwrap();
        let ab: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x + y).collect();
        let sum: Vec<f64> = f.solve(&a).iter().zip(f.solve(&b)).map(|(x, y)| x + y).collect();
        prop_assert!(rel_diff(&f.solve(&ab), &sum) <= 1e-13);
    }

    #[test]
    fn breaking_points_on_lattice(tau in 0.05f64..3.0, beta in 0.05f64..3.0, t_f in 1.0f64..20.0) {
        let bp = breaking_points(tau, beta, t_f, 20);
        prop_assert!(bp.windows(2).all(|w| w[0] < w[1]));
        for &b in &bp {
            let found = (0..=20).any(|i| (0..=20).any(|j| {
                let v = i as f64 * tau + j as f64 * beta;
                (v - b).abs() <= 1e-12 * b.max(1.0)
            }));
            prop_assert!(found, "{b}");
        }
    }
}

struct Frozen;

impl PastState for Frozen {
    fn value(&self, t: f64, comp: usize) -> f64 {
        0.3 + 0.1 * comp as f64 + 0.01 * t.abs()
    }
}

fn random_state(sys: &AugmentedSystem, b: Builtin, rng: &mut StdRng) -> Vec<f64> {
    let mut x = vec![0.0; sys.total_dim()];
    for (i, v) in x.iter_mut().enumerate().take(sys.state_dim()) {
        *v = match b {
            Builtin::Example1 => rng.gen_range(0.0..25.0),
            Builtin::Example2 => rng.gen_range(0.0..2.0),
            _ if i == 2 => rng.gen_range(1.0..127.0),
            _ => rng.gen_range(1.0..20.0),
        };
    }
    x[sys.aux_index()] = rng.gen_range(-1.0..1.0);
    for v in &mut x[sys.z_range()] {
        *v = rng.gen_range(-1.0..1.0);
    }
    x
}

#[test]
fn analytic_layout_matches_differences() {
    let mut rng = StdRng::seed_from_u64(7);
    for b in Builtin::ALL {
        let set = if matches!(b, Builtin::Example3Ode | Builtin::Example3Dae) { 2 } else { 1 };
        let sys = AugmentedSystem::with_eps(builtin_problem(b, set).unwrap(), 1e-3, 0.0).unwrap();
        let n = sys.total_dim();
        for _ in 0..20 {
            let x = random_state(&sys, b, &mut rng);
            let t = rng.gen_range(0.5..5.0);
            let jac: nalgebra::DMatrix<f64> = -assemble(&sys.jacobian(t, &x, &Frozen), 0.0);
            let (mut fp, mut fm) = (vec![0.0; n], vec![0.0; n]);
            let mut fd = nalgebra::DMatrix::<f64>::zeros(n, n);
            for j in 0..n {
                let h = 1e-6 * x[j].abs().max(1.0);
                let (mut xp, mut xm) = (x.clone(), x.clone());
                xp[j] += h;
                xm[j] -= h;
                sys.rhs(t, &xp, &Frozen, &mut fp);
                sys.rhs(t, &xm, &Frozen, &mut fm);
                for i in 0..n {
                    fd[(i, j)] = (fp[i] - fm[i]) / (2.0 * h);
                }
            }
            for i in 0..n {
                let scale = jac.row(i).amax().max(1.0);
                for j in 0..n {
                    let diff = (fd[(i, j)] - jac[(i, j)]).abs();
                    assert!(diff <= 1e-6 * scale, "{b} ({i},{j}): {} vs {}", fd[(i, j)], jac[(i, j)]);
                }
            }
        }
    }
}

#[test]
fn algebraic_row_count() {
    for (b, want) in [(Builtin::Example1, 1), (Builtin::Example2, 1), (Builtin::Example3Ode, 1), (Builtin::Example3Dae, 2)] {
        let sys = AugmentedSystem::with_eps(builtin_problem(b, 1).unwrap(), 1e-4, 0.0).unwrap();
        assert_eq!(sys.algebraic_rows(), want, "{b}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(20))]

    #[test]
    fn quadrature_self_consistent(alpha in 0.05f64..0.95, kappa in 0.1f64..5.0, w in 0.1f64..3.0, t in 0.1f64..20.0) {
        let spec = KernelSpec::Gamma { kappa, alpha };
        let g = |s: f64| (w * s).cos() + 2.0;
        let q = QuadratureSpec::default();
        let q2 = QuadratureSpec { panels: 2 * q.panels, ..q };
        let a = convolve_direct(|u| spec.density(u), 0.0, g, t, &q).unwrap();
        let b = convolve_direct(|u| spec.density(u), 0.0, g, t, &q2).unwrap();
        prop_assert!((a - b).abs() <= 1e-9 * b.abs());
    }
}

#[test]
fn kernel_sums_convolve_like_exact_densities() {
    let c1 = ChemoParams::set(1).unwrap();
    let c2 = ChemoParams::set(2).unwrap();
    let cases = [
        (KernelSpec::Gamma { kappa: 0.25, alpha: 0.5 }, 50.0),
        (KernelSpec::Pareto { alpha: 0.5, beta: 1.0 }, 10.0),
        (c1.kernel(), c1.t_f),
        (c2.kernel(), c2.t_f),
    ];
    let q = QuadratureSpec::default();
    for (spec, t_f) in cases {
        for eps in [1e-3, 1e-5, 1e-8] {
            let p = spec.approximation_params(eps, 0.0, t_f).unwrap();
            let k = spec.build(&p).unwrap();
            for t in [10.0 * p.delta, p.t_max / 10.0, p.t_max] {
                let exact = convolve_direct(|u| spec.density(u), spec.support_start(), |_| 1.0, t, &q).unwrap();
                let approx = convolve_direct(|u| k.density(u), spec.support_start(), |_| 1.0, t, &q).unwrap();
                assert!((exact - approx).abs() <= 5.0 * eps, "{spec:?} {eps} {t}: {exact} {approx}");
            }
        }
    }
}

#[test]
fn stability_matrix() {
    for theta in [0.5, 0.51, 1.0] {
        for gamma in [1.0, 1e3, 1e6, 1e9, 1e12] {
            for m in 0..=2 {
                let r = theta_recursion_bound_check(theta, gamma, 0.1, m, 400, |_| 1.0).unwrap();
                assert!(r.pass, "θ={theta} γ={gamma} m={m}: {:?} vs {:?}", r.max_magnitude, r.bounds);
            }
        }
    }
}
