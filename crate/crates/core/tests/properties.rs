use std::sync::Arc;

use proptest::prelude::*;
use varcrit::app::{check_grid, grid_form_residual};
use varcrit::asymptotics::interval_constant;
use varcrit::energy::{EnergyFunctional, ProblemInstance};
use varcrit::matrix::{assemble_grid_laplacian, assemble_second_difference, sup_norm, GridIndexMap, SpdMatrix};
use varcrit::nonlinearity::{
    estimate_lipschitz, ComponentFunction, FnScalar, Nonlinearity, Perturbation, Polynomial, Sine,
};
use varcrit::solver::{dedupe, distinct, multistart_solve, SolutionRecord, SolveConfig, StartRecipe};

fn sine(amplitude: f64) -> ComponentFunction {
    ComponentFunction::new(Sine { amplitude, frequency: 1.0, phase: 0.0 })
}

fn cubic_energy(a: SpdMatrix, lambda: f64, l: f64) -> EnergyFunctional {
    let n = a.order();
    let f = Nonlinearity::broadcast(ComponentFunction::new(Polynomial::new(vec![0.5, -1.0, 0.0, 1.0])), n).unwrap();
    let h = Perturbation::broadcast(sine(l), l, n).unwrap();
    EnergyFunctional::new(Arc::new(ProblemInstance::new(Arc::new(a), f, h, lambda).unwrap()))
}

fn vector(n: usize, scale: f64) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-scale..scale, n)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn hessian_matches_gradient_differences(u in vector(5, 3.0), lambda in 0.1f64..4.0, frac in 0.0f64..0.9) {
        let a = assemble_second_difference(5).unwrap();
        let l = frac * a.lambda_min().unwrap();
        let e = cubic_energy(a, lambda, l);
        let hess = e.hessian(&u).unwrap();
        for k in 0..5 {
            let step = 1e-6;
            let mut up = u.clone();
            let mut dn = u.clone();
            up[k] += step;
            dn[k] -= step;
            let gu = e.gradient(&up).unwrap();
            let gd = e.gradient(&dn).unwrap();
            for i in 0..5 {
                let fd = (gu[i] - gd[i]) / (2.0 * step);
                prop_assert!((fd - hess[i * 5 + k]).abs() <= 1e-5 * hess[i * 5 + k].abs().max(1.0));
            }
        }
    }

    #[test]
    fn j_splits_into_phi_and_psi(u in vector(4, 5.0), lambda in 0.1f64..4.0) {
        let e = cubic_energy(assemble_second_difference(4).unwrap(), lambda, 0.2);
        let j = e.j_lambda(&u).unwrap();
        let split = e.phi(&u).unwrap() - lambda * e.psi(&u).unwrap();
        prop_assert!((j - split).abs() <= 1e-12 * j.abs().max(1.0));
    }

    #[test]
    fn quadrature_matches_closed_primitive(c0 in -2.0f64..2.0, c1 in -2.0f64..2.0, c3 in -1.0f64..1.0, t in -20.0f64..20.0) {
        let closed = ComponentFunction::new(Polynomial::new(vec![c0, c1, 0.0, c3]));
        let quad = ComponentFunction::new(FnScalar::new("poly", move |x| c0 + c1 * x + c3 * x * x * x));
        prop_assert!(!quad.has_closed_primitive());
        let exact = c0 * t + c1 * t * t / 2.0 + c3 * t.powi(4) / 4.0;
        let a = closed.primitive_value(t).unwrap();
        let b = quad.primitive_value(t).unwrap();
        prop_assert!((a - exact).abs() <= 1e-12 * exact.abs().max(1.0));
        prop_assert!((b - exact).abs() <= 1e-8 * exact.abs().max(1.0));
    }

    #[test]
    fn lipschitz_estimate_grows_with_samples(amp in 0.01f64..2.0, freq in 0.1f64..5.0, seed in any::<u64>()) {
        let h = ComponentFunction::new(Sine { amplitude: amp, frequency: freq, phase: 0.0 });
        let p = Perturbation::broadcast(h, amp * freq, 1).unwrap();
        let mut last = 0.0;
        for samples in [2, 10, 100, 1000] {
            let est = estimate_lipschitz(&p, 10.0, samples, seed).unwrap();
            prop_assert!(est.estimates[0] >= last);
            prop_assert!(!est.any_falsified());
            last = est.estimates[0];
        }
        prop_assert!(last <= amp * freq * (1.0 + 1e-12));
    }

    #[test]
    fn grid_index_round_trip(m in 1usize..12, n in 1usize..12) {
        let map = GridIndexMap::new(m, n).unwrap();
        for k in 1..=m * n {
            let (i, j) = map.inverse(k).unwrap();
            prop_assert_eq!(map.forward(i, j).unwrap(), k);
            prop_assert_eq!(k, i + m * (j - 1));
        }
    }

    #[test]
    fn grid_form_equals_negative_gradient(m in 1usize..6, n in 1usize..6, seed in any::<u64>(), lambda in 0.1f64..3.0) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let (a, map) = assemble_grid_laplacian(m, n).unwrap();
        let e = cubic_energy(a, lambda, 0.05);
        let w: Vec<f64> = (0..m * n).map(|_| rng.gen_range(-4.0..4.0)).collect();
        let grid = grid_form_residual(e.problem(), map, &w).unwrap();
        let grad = e.gradient(&w).unwrap();
        for (x, y) in grid.iter().zip(&grad) {
            prop_assert!((x + y).abs() <= 1e-10);
        }
        prop_assert!(check_grid(&e, map, &w, 1e-10).unwrap().agrees);
    }

    #[test]
    fn grid_constant_matches_general_formula(m in 1usize..11, n in 1usize..11, l in 0.0f64..1.0) {
        let (a, _) = assemble_grid_laplacian(m, n).unwrap();
        let t = interval_constant(&a, l);
        let expected = 2.0 * (m + n) as f64 + (m * n) as f64 * l;
        prop_assert!((t - expected).abs() <= 1e-12 * expected);
    }

    #[test]
    fn sublevel_sets_fit_in_the_sup_norm_box(u in vector(6, 50.0), frac in 0.0f64..0.95) {
        let a = assemble_second_difference(6).unwrap();
        let l = frac * a.lambda_min().unwrap();
        let e = cubic_energy(a, 1.0, l);
        let phi = e.phi(&u).unwrap();
        prop_assume!(phi > 0.0);
        let rho = (2.0 * phi / (a_lambda1(&e) - l)).sqrt();
        prop_assert!(sup_norm(&u) <= rho * (1.0 + 1e-12));
        let cert = e.coercivity_certificate(&u, 1e-9).unwrap();
        prop_assert!(cert.holds());
    }

    #[test]
    fn dedupe_is_sound(points in prop::collection::vec(vector(3, 2.0), 1..20), dup in prop::collection::vec(0usize..20, 0..20)) {
        let e = cubic_energy(assemble_second_difference(3).unwrap(), 1.0, 0.0);
        let mut us = points.clone();
        for d in dup {
            let base = points[d % points.len()].clone();
            us.push(base.iter().map(|x| x * (1.0 + 1e-9)).collect());
        }
        let recs: Vec<SolutionRecord> = us.iter().map(|u| fake_record(&e, u.clone())).collect();
        let kept = dedupe(recs, 1e-6, 1e-12);
        for (i, a) in kept.iter().enumerate() {
            for b in &kept[i + 1..] {
                prop_assert!(distinct(&a.u, &b.u, 1e-6, 1e-12));
            }
        }
        for u in &us {
            prop_assert!(kept.iter().any(|k| !distinct(&k.u, u, 1e-6, 1e-12)));
        }
        prop_assert!(kept.windows(2).all(|w| w[0].phi <= w[1].phi));
    }
}

fn a_lambda1(e: &EnergyFunctional) -> f64 {
    e.problem().matrix().lambda_min().unwrap()
}

fn fake_record(e: &EnergyFunctional, u: Vec<f64>) -> SolutionRecord {
    SolutionRecord::certify(e, u, varcrit::solver::Origin::Multistart { start: 0 }, 0, f64::INFINITY).unwrap()
}

#[test]
fn multistart_is_deterministic() {
    let e = cubic_energy(assemble_second_difference(3).unwrap(), 1.5, 0.1);
    let cfg = SolveConfig {
        starts: StartRecipe { random: 24, ..StartRecipe::default() },
        seed: 11,
        ..SolveConfig::default()
    };
    let a = multistart_solve(&e, &cfg).unwrap();
    let b = multistart_solve(&e, &cfg).unwrap();
    assert_eq!(a.records, b.records);
    assert_eq!(a.failures, b.failures);
    for r in &a.records {
        assert!(r.residual <= cfg.residual_tol);
        assert!(r.verify(&e, 1e-12, cfg.residual_tol).unwrap());
    }
}
