mod common;

use approx::assert_relative_eq;
use ekpme::ek::{ek_weights, EkParams, Rule};
use ekpme::solver::{
    apriori_bound, kernel_weights, kernel_weights_rect, kernel_weights_trap, reconstruct_pde_solution, scheme_rhs,
    shoot_front, step_profile, terminal_value, Regularization, SolverConfig,
};
use ekpme::{Diffusivity, DiffusivityModel, Error};
use proptest::prelude::*;

fn power(m: f64) -> DiffusivityModel {
    DiffusivityModel::power_law(m).unwrap()
}

/// Simpson's rule on one cell; exact for the quadratic integrands used here.
fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64) -> f64 {
    (b - a) / 6.0 * (f(a) + 4.0 * f(0.5 * (a + b)) + f(b))
}

fn kernel(eta: f64, z: f64, a: f64, b: f64) -> f64 {
    (a + b) * (z - eta) + b * z
}

#[test]
fn rectangle_kernel_examples() {
    let row = kernel_weights_rect(0, 4, 0.1, 0.5, 0.25).unwrap();
    assert_eq!(row.get(0), 0.0);
    assert_relative_eq!(row.get(1), 0.005, max_relative = 1e-14);
    let row = kernel_weights_rect(1, 4, 0.1, 0.5, 0.25).unwrap();
    assert_eq!(row.get(1), 0.0);
    assert_relative_eq!(row.get(2), 0.0075, max_relative = 1e-14);
    assert!(matches!(kernel_weights_rect(5, 4, 0.1, 0.5, 0.25), Err(Error::Index { .. })));
    assert!(kernel_weights_trap(0, 4, 0.0, 0.5, 0.25).is_err());
}

#[test]
fn trapezoid_kernel_examples() {
    // b_nn = b^{(r)}_{(n+1)n} - d̂_nn, with d̂_00 = (0.01/6)(1·2) ≈ 0.003333
    let row = kernel_weights_trap(0, 2, 0.1, 0.5, 0.25).unwrap();
    assert_relative_eq!(0.005 - row.get(0), 0.01 / 3.0, max_relative = 1e-13);
    for &(alpha, h) in &[(0.5, 0.1), (0.2, 0.03), (0.9, 0.7)] {
        let (a, b) = (1.0 - alpha, alpha / 2.0);
        for n in 0..10 {
            let row = kernel_weights_trap(n, 10, h, a, b).unwrap();
            let expect = h * h * (a + 2.0 * b + 3.0 * b * n as f64) / 6.0;
            assert_relative_eq!(row.get(n), expect, max_relative = 1e-12);
            assert!(row.weights().iter().all(|&w| w >= 0.0));
        }
    }
}

#[test]
fn kernel_rows_are_exact_cell_integrals() {
    for &alpha in &[0.25, 0.5, 0.9] {
        let (a, b, h) = (1.0 - alpha, alpha / 2.0, 0.13);
        let big_n = 7;
        for n in 0..big_n {
            let eta_n = n as f64 * h;
            let rect = kernel_weights_rect(n, big_n, h, a, b).unwrap();
            let trap = kernel_weights_trap(n, big_n, h, a, b).unwrap();
            for j in n..=big_n {
                let eta_j = j as f64 * h;
                let r = if j > n {
                    simpson(|z| kernel(eta_n, z, a, b), eta_j - h, eta_j)
                } else {
                    0.0
                };
                assert!((rect.get(j) - r).abs() <= 1e-15, "rect n {n} j {j}");
                // hat function centred at η_j, restricted to [η_n, η_N]
                let left = if j > n {
                    simpson(|z| kernel(eta_n, z, a, b) * (z - eta_j + h) / h, eta_j - h, eta_j)
                } else {
                    0.0
                };
                let right = if j < big_n {
                    simpson(|z| kernel(eta_n, z, a, b) * (eta_j + h - z) / h, eta_j, eta_j + h)
                } else {
                    0.0
                };
                assert!((trap.get(j) - left - right).abs() <= 1e-15, "trap n {n} j {j}");
            }
            let total: f64 = (n..big_n)
                .map(|k| simpson(|z| kernel(eta_n, z, a, b), k as f64 * h, (k + 1) as f64 * h))
                .sum();
            assert!((rect.weights().iter().sum::<f64>() - total).abs() <= 1e-14);
            assert!((trap.weights().iter().sum::<f64>() - total).abs() <= 1e-14);
        }
    }
}

/// `F̂U(η_j)` for `j = n+1..=N` from a dense operator matrix.
fn f_hat_suffix(a: &[Vec<f64>], u: &[f64], n: usize) -> Vec<f64> {
    let big_n = u.len() - 1;
    (n + 1..=big_n).map(|j| (j..=big_n).map(|i| a[i][j] * u[i]).sum()).collect()
}

#[test]
fn scheme_rhs_vanishes_on_zero_suffix() {
    for rule in [Rule::Rectangle, Rule::Trapezoid] {
        let p = EkParams::new(0.5, rule).unwrap();
        let ek = ek_weights(2, 8, &p).unwrap();
        let kern = kernel_weights(rule, 2, 8, 0.1, 0.5, 0.25).unwrap();
        let rhs = scheme_rhs(2, &[0.0; 7], &[0.0; 6], &ek, &kern).unwrap();
        assert_eq!(rhs.known, 0.0);
    }
}

#[test]
fn scheme_rhs_terminal_row_is_zero_for_rectangle() {
    // U_N = 0 leaves nothing on the right at n = N-1, hence the special seed
    let p = EkParams::new(0.5, Rule::Rectangle).unwrap();
    let ek = ek_weights(3, 4, &p).unwrap();
    let kern = kernel_weights(Rule::Rectangle, 3, 4, 0.1, 0.5, 0.25).unwrap();
    let rhs = scheme_rhs(3, &[0.7, 0.0], &[0.0], &ek, &kern).unwrap();
    assert_eq!(rhs.known, 0.0);
    assert_eq!(rhs.coefficient, 0.0);
}

#[test]
fn scheme_rhs_rejects_mismatched_rows() {
    let p = EkParams::new(0.5, Rule::Rectangle).unwrap();
    let ek = ek_weights(2, 8, &p).unwrap();
    let kern = kernel_weights(Rule::Rectangle, 3, 8, 0.1, 0.5, 0.25).unwrap();
    assert!(scheme_rhs(2, &[0.0; 7], &[0.0; 6], &ek, &kern).is_err());
    let kern = kernel_weights(Rule::Rectangle, 2, 8, 0.1, 0.5, 0.25).unwrap();
    assert!(matches!(
        scheme_rhs(2, &[0.0; 6], &[0.0; 6], &ek, &kern),
        Err(Error::LengthMismatch { .. })
    ));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// Two-stage summation against the direct triple sum `Σ_i c_{in} U_i`.
    #[test]
    fn two_stage_summation_matches_direct_assembly(
        seeds in prop::collection::vec(0.0f64..1.0, 3..16),
        alpha in 0.05f64..0.95,
        h in 0.01f64..0.5,
        trap in any::<bool>(),
    ) {
        let rule = if trap { Rule::Trapezoid } else { Rule::Rectangle };
        let p = EkParams::new(alpha, rule).unwrap();
        let (a_c, b_c) = (1.0 - alpha, alpha / 2.0);
        let mut u = common::monotone_samples(&seeds);
        u.push(0.0);
        let big_n = u.len() - 1;
        let a = common::ek_matrix(&p, big_n);
        let b = common::kernel_matrix(rule, big_n, h, a_c, b_c);
        let c = common::c_matrix(rule, &a, &b);
        for n in 0..big_n {
            let ek = ek_weights(n, big_n, &p).unwrap();
            let kern = kernel_weights(rule, n, big_n, h, a_c, b_c).unwrap();
            let rhs = scheme_rhs(n, &u[n..], &f_hat_suffix(&a, &u, n), &ek, &kern).unwrap();
            let got = rhs.known + rhs.coefficient * u[n];
            let direct: f64 = (n..=big_n).map(|i| c[i][n] * u[i]).sum();
            prop_assert!((got - direct).abs() <= 1e-12 * direct.abs().max(1e-300) + 1e-300, "n {}: {} vs {}", n, got, direct);
            prop_assert!((rhs.coefficient - c[n][n]).abs() <= 1e-15);
        }
    }
}

#[test]
fn profile_matches_direct_assembly() {
    // D(u) = u lets the oracle solve each node in closed form
    let model = power(1.0);
    for rule in [Rule::Rectangle, Rule::Trapezoid] {
        for &alpha in &[0.2, 0.5, 0.8] {
            for big_n in [4, 8, 16] {
                let eta_star = 1.3;
                let cfg = SolverConfig::new(alpha, big_n, rule).unwrap();
                let profile = step_profile(eta_star, &cfg, &model).unwrap();
                let p = cfg.ek_params().unwrap();
                let h = eta_star / big_n as f64;
                let a = common::ek_matrix(&p, big_n);
                let b = common::kernel_matrix(rule, big_n, h, cfg.a, cfg.b);
                let c = common::c_matrix(rule, &a, &b);
                let q = match rule {
                    Rule::Rectangle => c[big_n][big_n - 1],
                    Rule::Trapezoid => c[big_n - 1][big_n - 1],
                };
                let oracle = common::linear_diffusivity_profile(&c, 2.0 * q);
                for (n, (&got, &want)) in profile.values.iter().zip(&oracle).enumerate() {
                    assert!(
                        (got - want).abs() <= 1e-12 * want.abs().max(1e-300),
                        "{rule:?} alpha {alpha} N {big_n} n {n}: {got} vs {want}"
                    );
                }
            }
        }
    }
}

#[test]
fn profile_matches_direct_assembly_in_classical_limit() {
    let model = power(1.0);
    let cfg = SolverConfig::new(1.0, 8, Rule::Rectangle).unwrap();
    let profile = step_profile(1.5, &cfg, &model).unwrap();
    let p = cfg.ek_params().unwrap();
    let a = common::ek_matrix(&p, 8);
    let b = common::kernel_matrix(Rule::Rectangle, 8, 1.5 / 8.0, cfg.a, cfg.b);
    let c = common::c_matrix(Rule::Rectangle, &a, &b);
    let oracle = common::linear_diffusivity_profile(&c, 2.0 * c[8][7]);
    for (&got, &want) in profile.values.iter().zip(&oracle) {
        assert!((got - want).abs() <= 1e-12 * want.max(1e-300));
    }
}

#[test]
fn terminal_examples() {
    assert_relative_eq!(terminal_value(&power(1.0), 0.01, 1e-14).unwrap(), 0.02, max_relative = 1e-14);
    assert_relative_eq!(terminal_value(&power(2.0), 0.5, 1e-14).unwrap(), 1.224_744_9, max_relative = 1e-7);
    assert_relative_eq!(terminal_value(&power(2.0), 0.5, 1e-14).unwrap(), 1.5f64.sqrt(), max_relative = 1e-14);

    let exp = DiffusivityModel::exponential();
    let oracle = common::bisect(|x| x + (-x).exp() - 1.0 - 0.1 * x, 1e-12, 10.0);
    assert_relative_eq!(terminal_value(&exp, 0.1, 1e-14).unwrap(), oracle, max_relative = 1e-12);

    assert_eq!(terminal_value(&power(1.0), 0.0, 1e-14).unwrap(), 0.0);
    assert_eq!(terminal_value(&exp, -1.0, 1e-14).unwrap(), 0.0);
}

#[test]
fn apriori_examples() {
    let cfg = SolverConfig::new(0.5, 64, Rule::Rectangle).unwrap();
    let gamma_15 = statrs::function::gamma::gamma(1.5);
    let lambda = (cfg.a + 2.0 * cfg.b) * 0.8 * 0.8 / gamma_15;
    assert_relative_eq!(apriori_bound(0.8, &cfg, &power(1.0)).unwrap(), 2.0 * lambda, max_relative = 1e-12);
    assert_relative_eq!(
        apriori_bound(0.8, &cfg, &power(2.0)).unwrap(),
        (3.0 * lambda).sqrt(),
        max_relative = 1e-12
    );
    assert!(apriori_bound(0.0, &cfg, &power(1.0)).is_err());
    // K(x) = x + e^{-x} - 1 stays below λx for λ ≥ 1
    let exp = DiffusivityModel::exponential();
    assert_eq!(apriori_bound(3.0, &cfg, &exp).unwrap(), f64::INFINITY);
    let small = apriori_bound(0.3, &cfg, &exp).unwrap();
    let lambda = (cfg.a + 2.0 * cfg.b) * 0.09 / gamma_15;
    assert_relative_eq!(exp.k(small), lambda * small, max_relative = 1e-10);
}

#[test]
fn config_validation() {
    assert!(SolverConfig::new(0.5, 3, Rule::Rectangle).is_err());
    assert!(SolverConfig::new(1.0, 64, Rule::Trapezoid).is_err());
    assert!(SolverConfig::new(1.0, 64, Rule::Rectangle).is_ok());
    let cfg = SolverConfig::new(0.5, 64, Rule::Rectangle).unwrap();
    assert!(cfg.clone().with_eps(1.0).is_err());
    assert!(cfg.clone().with_eps(0.0).is_err());
    assert!(cfg
        .clone()
        .with_regularization(Some(Regularization { c: 1.0, delta: 1.5 }))
        .is_err());
    assert!(shoot_front(0.0, &cfg, &power(1.0)).is_err());
}

#[test]
fn vanishing_support_limit() {
    for model in [power(1.0), power(2.0), DiffusivityModel::exponential()] {
        for rule in [Rule::Rectangle, Rule::Trapezoid] {
            for &alpha in &[0.25, 0.5, 0.9] {
                let cfg = SolverConfig::new(alpha, 64, rule).unwrap();
                let u0 = step_profile(1e-3, &cfg, &model).unwrap().u0();
                assert!((0.0..1e-2).contains(&u0), "{model} {rule:?} alpha {alpha}: {u0}");
            }
        }
    }
}

#[test]
fn shooting_reproduces_a_tiny_front() {
    let model = power(1.0);
    let cfg = SolverConfig::new(0.5, 64, Rule::Rectangle).unwrap().with_eps(1e-12).unwrap();
    let mass = step_profile(1e-3, &cfg, &model).unwrap().u0();
    let out = shoot_front(mass, &cfg, &model).unwrap();
    assert!(out.residual < cfg.eps);
    assert_relative_eq!(out.eta_star, 1e-3, max_relative = 1e-6);
}

#[test]
fn classical_front_within_table_error() {
    let reference = common::classical_front();
    assert_relative_eq!(reference, 1.616_125_446_8, max_relative = 1e-8);
    let cfg = SolverConfig::new(1.0, 100, Rule::Rectangle).unwrap();
    let out = shoot_front(1.0, &cfg, &power(1.0)).unwrap();
    assert!(out.residual < 1e-8);
    let err = (out.eta_star - reference).abs();
    assert!((2.2e-2 / 1.5..=1.5 * 2.2e-2).contains(&err), "error {err}");
}

#[test]
fn golden_fractional_fronts() {
    let model = power(2.0);
    let mut fronts = Vec::new();
    for (rule, golden) in [(Rule::Rectangle, 1.348_281_865_186_187), (Rule::Trapezoid, 1.349_368_937_464_125)] {
        let cfg = SolverConfig::new(0.5, 256, rule).unwrap();
        let out = shoot_front(1.0, &cfg, &model).unwrap();
        assert!(out.residual < 1e-8);
        assert!((out.profile.u0() - 1.0).abs() < 1e-8);
        assert_relative_eq!(out.eta_star, golden, max_relative = 1e-8);
        fronts.push(out.eta_star);
    }
    let h = fronts[0] / 256.0;
    assert!((fronts[0] - fronts[1]).abs() < h);
}

#[test]
fn reconstruction() {
    let cfg = SolverConfig::new(0.6, 64, Rule::Rectangle).unwrap();
    let out = shoot_front(1.0, &cfg, &power(1.0)).unwrap();
    let p = &out.profile;
    for &t in &[0.1, 1.0, 7.0] {
        assert_eq!(reconstruct_pde_solution(p, 0.0, t).unwrap(), p.u0());
        let x_front = out.eta_star * t.powf(0.3);
        assert_eq!(reconstruct_pde_solution(p, x_front, t).unwrap(), 0.0);
        assert_eq!(reconstruct_pde_solution(p, 2.0 * x_front, t).unwrap(), 0.0);
        // midway between two nodes the value is the average
        let eta = 2.5 * p.grid.h();
        let mid = reconstruct_pde_solution(p, eta * t.powf(0.3), t).unwrap();
        assert_relative_eq!(mid, 0.5 * (p.values[2] + p.values[3]), max_relative = 1e-10);
    }
    assert!(reconstruct_pde_solution(p, 0.5, 0.0).is_err());
    assert!(reconstruct_pde_solution(p, -0.5, 1.0).is_err());
}

fn sweep_models() -> Vec<DiffusivityModel> {
    vec![power(1.0), power(2.0), DiffusivityModel::exponential()]
}

#[test]
fn converged_profiles_are_positive_monotone_and_bounded() {
    for model in sweep_models() {
        for rule in [Rule::Rectangle, Rule::Trapezoid] {
            for &alpha in &[0.1, 0.5, 0.9] {
                let cfg = SolverConfig::new(alpha, 128, rule).unwrap();
                let out = shoot_front(1.0, &cfg, &model).unwrap();
                let p = &out.profile;
                assert!(out.residual < cfg.eps);
                assert_eq!(p.values[128], 0.0);
                assert!(p.values[127] > 0.0);
                assert!(p.values.iter().all(|&v| v >= 0.0));
                // the rectangle seed sits slightly above its neighbour, see below
                let end = if rule == Rule::Rectangle { 127 } else { 128 };
                assert!(
                    p.values[..end].windows(2).all(|w| w[1] <= w[0] + 1e-12),
                    "{model} {rule:?} alpha {alpha}"
                );
                assert_eq!(p.clamped, 0);
                let bound = apriori_bound(out.eta_star, &cfg, &model).unwrap();
                assert!(p.max() <= bound, "{model} {rule:?} alpha {alpha}: {} > {bound}", p.max());
            }
        }
    }
}

/// With the rectangle rule the terminal seed `U_{N-1}` exceeds `U_{N-2}`
/// by a relative amount close to `α/(2N)`: the only place where the discrete
/// profile is not monotone, and it disappears under refinement.
#[test]
fn rectangle_terminal_bump_is_first_order() {
    for model in sweep_models() {
        for &alpha in &[0.1, 0.5, 0.9] {
            let mut last = f64::INFINITY;
            for big_n in [32, 64, 128, 256] {
                let cfg = SolverConfig::new(alpha, big_n, Rule::Rectangle).unwrap();
                let v = shoot_front(1.0, &cfg, &model).unwrap().profile.values;
                assert!(v[..big_n - 1].windows(2).all(|w| w[1] <= w[0] + 1e-12));
                let bump = (v[big_n - 1] - v[big_n - 2]) / v[big_n - 2];
                assert!(bump < alpha / big_n as f64, "{model} alpha {alpha} N {big_n}: {bump}");
                assert!(bump < last);
                last = bump;
            }
        }
    }
}

#[test]
fn trapezoid_profiles_are_strictly_monotone() {
    for model in sweep_models() {
        for &alpha in &[0.1, 0.5, 0.9] {
            for big_n in [16, 64, 256] {
                let cfg = SolverConfig::new(alpha, big_n, Rule::Trapezoid).unwrap();
                let p = shoot_front(1.0, &cfg, &model).unwrap().profile;
                assert!(p.is_monotone(1e-12), "{model} alpha {alpha} N {big_n}");
            }
        }
    }
}

#[test]
fn front_flux_decreases_with_refinement() {
    for model in sweep_models() {
        for rule in [Rule::Rectangle, Rule::Trapezoid] {
            let mut last = f64::INFINITY;
            for big_n in [64, 128, 256, 512] {
                let cfg = SolverConfig::new(0.5, big_n, rule).unwrap();
                let flux = step_profile(1.2, &cfg, &model).unwrap().front_flux(&model);
                assert!(flux >= 0.0 && flux < last, "{model} {rule:?} N {big_n}: {flux} vs {last}");
                last = flux;
            }
        }
    }
}

#[test]
fn shooting_map_is_increasing() {
    for model in sweep_models() {
        for rule in [Rule::Rectangle, Rule::Trapezoid] {
            let cfg = SolverConfig::new(0.5, 64, rule).unwrap();
            let ladder: Vec<f64> = (0..10).map(|k| 0.03 * 10f64.powf(2.0 * k as f64 / 9.0)).collect();
            let values: Vec<f64> = ladder.iter().map(|&e| step_profile(e, &cfg, &model).unwrap().u0()).collect();
            assert!(values.windows(2).all(|w| w[1] > w[0]), "{model} {rule:?}: {values:?}");
        }
    }
}

#[test]
fn grid_convergence_is_first_order() {
    let model = power(1.0);
    for &alpha in &[0.25, 0.5, 0.75] {
        let u0: Vec<f64> = [64, 128, 256, 512]
            .iter()
            .map(|&n| {
                let cfg = SolverConfig::new(alpha, n, Rule::Rectangle).unwrap();
                step_profile(1.0, &cfg, &model).unwrap().u0()
            })
            .collect();
        let diffs: Vec<f64> = u0.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
        for d in diffs.windows(2) {
            assert!(d[0] / d[1] >= 1.7, "alpha {alpha}: differences {diffs:?}");
        }
    }
}

#[test]
fn regularized_run_converges() {
    let reg = Some(Regularization { c: 0.01, delta: 0.5 });
    for model in sweep_models() {
        for rule in [Rule::Rectangle, Rule::Trapezoid] {
            let cfg = SolverConfig::new(0.5, 128, rule).unwrap().with_regularization(reg).unwrap();
            let out = shoot_front(1.0, &cfg, &model).unwrap();
            assert!(out.residual < cfg.eps);
            assert!(out.profile.values.iter().all(|&v| v >= 0.0));
            let plain = shoot_front(1.0, &SolverConfig::new(0.5, 128, rule).unwrap(), &model).unwrap();
            // the floor adds diffusion, so the front moves out
            assert!(out.eta_star > plain.eta_star, "{model} {rule:?}");
            assert!(out.eta_star < 1.5 * plain.eta_star, "{model} {rule:?}");
        }
    }
}

#[test]
fn weaker_floor_approaches_the_plain_front() {
    let model = power(2.0);
    let plain = shoot_front(1.0, &SolverConfig::new(0.5, 128, Rule::Rectangle).unwrap(), &model).unwrap();
    let mut last = f64::INFINITY;
    for c in [0.1, 0.01, 0.001] {
        let cfg = SolverConfig::new(0.5, 128, Rule::Rectangle)
            .unwrap()
            .with_regularization(Some(Regularization { c, delta: 0.5 }))
            .unwrap();
        let gap = shoot_front(1.0, &cfg, &model).unwrap().eta_star - plain.eta_star;
        assert!(gap > 0.0 && gap < last, "C {c}: {gap}");
        last = gap;
    }
    assert!(last < 0.01);
}

#[test]
fn streaming_rows_give_identical_profiles() {
    let model = DiffusivityModel::exponential();
    let cfg = SolverConfig::new(0.4, 96, Rule::Trapezoid).unwrap();
    let cached = step_profile(0.9, &cfg.clone().with_storage(ekpme::RowStorage::Cached), &model).unwrap();
    let streamed = step_profile(0.9, &cfg.with_storage(ekpme::RowStorage::Streaming), &model).unwrap();
    assert_eq!(cached.values, streamed.values);
}

#[test]
fn general_constants_are_honoured() {
    let cfg = SolverConfig::new(0.5, 64, Rule::Rectangle)
        .unwrap()
        .with_constants(0.8, 0.4)
        .unwrap();
    assert!(cfg.clone().with_constants(0.8, 0.0).is_err());
    let model = power(1.0);
    let out = shoot_front(1.0, &cfg, &model).unwrap();
    let base = shoot_front(1.0, &SolverConfig::new(0.5, 64, Rule::Rectangle).unwrap(), &model).unwrap();
    assert!(out.residual < cfg.eps);
    assert!((out.eta_star - base.eta_star).abs() > 1e-3);
    assert!(model.k(out.profile.u0()) > 0.0);
}
