//! Cross-validation sweeps tying the four routes to the price of anarchy
//! together: primal vs dual programs, reduced vs full dual, closed forms vs
//! programs, reconstructed worst cases vs the game primitives, and the
//! exhaustive oracle as a lower-bound check.

mod common;

use gmmc_core::lp::{solve, SolveStatus};
use gmmc_core::oracle::Oracle;
use gmmc_core::poa::{
    compute_poa, dual_lp, optimal_theta, primal_lp, reconstruct_worst_case, reduced_dual_lp,
    Method,
};
use gmmc_core::rules::{gairing, marginal_contribution, shapley};
use gmmc_core::{closed_form, WelfareBasis};

#[test]
fn primal_and_dual_values_agree() {
    let mut rng = common::rng(0xabcd);
    for n in 2..=6 {
        for trial in 0..10 {
            let f = common::random_rule(&mut rng, n);
            let w = common::random_basis(&mut rng, n);
            let p = solve(&primal_lp(&f, &w).unwrap()).unwrap();
            let d = solve(&dual_lp(&f, &w).unwrap()).unwrap();
            assert_eq!(p.status, SolveStatus::Optimal);
            assert_eq!(d.status, SolveStatus::Optimal);
            assert!(
                (p.objective - d.objective).abs() <= 1e-7,
                "n = {n}, trial {trial}: primal {} vs dual {}",
                p.objective,
                d.objective
            );
        }
    }
}

#[test]
fn reduced_dual_agrees_with_full_dual_on_concave_draws() {
    let mut rng = common::rng(0xbeef);
    for trial in 0..50 {
        let n = 2 + (trial % 5);
        let w = common::concave_basis(&mut rng, n);
        let f = common::submodular_rule(&mut rng, &w);
        let full = solve(&dual_lp(&f, &w).unwrap()).unwrap();
        let reduced = solve(&reduced_dual_lp(&f, &w).unwrap()).unwrap();
        assert!(
            (full.objective - reduced.objective).abs() <= 1e-7,
            "trial {trial}: full {} vs reduced {}",
            full.objective,
            reduced.objective
        );
    }
}

/// The reduction needs only f(j)w(j) non-increasing, not a monotone basis:
/// draw arbitrary positive bases and shrink f to keep the product falling.
#[test]
fn reduced_dual_agrees_beyond_concave_bases() {
    let mut rng = common::rng(0x1dea);
    for trial in 0..50 {
        let n = 2 + (trial % 5);
        let w = common::random_basis(&mut rng, n);
        let mut f = vec![rand::Rng::random_range(&mut rng, 1.0..2.0)];
        let mut product = f[0] * w.get(1);
        for j in 2..=n {
            product *= rand::Rng::random_range(&mut rng, 0.0..1.0);
            f.push(product / w.get(j));
        }
        let f = gmmc_core::DistributionRule::new(f).unwrap();
        let full = solve(&dual_lp(&f, &w).unwrap()).unwrap();
        let reduced = solve(&reduced_dual_lp(&f, &w).unwrap()).unwrap();
        assert!(
            (full.objective - reduced.objective).abs() <= 1e-7,
            "trial {trial}: full {} vs reduced {}",
            full.objective,
            reduced.objective
        );
    }
}

#[test]
fn submodular_closed_form_agrees_with_dual() {
    let mut rng = common::rng(0xcafe);
    for trial in 0..30 {
        let n = 2 + (trial % 7);
        let w = common::concave_basis(&mut rng, n);
        let f = common::submodular_rule(&mut rng, &w);
        let closed = closed_form::submodular_wstar(&f, &w).unwrap().value;
        let lp_value = compute_poa(&f, &w, Method::Dual).unwrap().w_star;
        assert!(
            (closed - lp_value).abs() <= 1e-7,
            "trial {trial}, n = {n}: closed {closed} vs dual {lp_value}"
        );
    }
}

#[test]
fn covering_closed_form_agrees_with_dual_for_any_admissible_rule() {
    let mut rng = common::rng(0xfeed);
    for trial in 0..40 {
        let n = 2 + (trial % 6);
        let w = WelfareBasis::covering(n);
        // normalized but otherwise arbitrary rule, monotone or not
        let mut f = vec![1.0];
        for _ in 1..n {
            f.push(rand::Rng::random_range(&mut rng, 0.0..1.6));
        }
        let f = gmmc_core::DistributionRule::new(f).unwrap();
        let closed = closed_form::covering_wstar(&f).unwrap().value;
        let lp_value = compute_poa(&f, &w, Method::Dual).unwrap().w_star;
        assert!(
            (closed - lp_value).abs() <= 1e-7,
            "trial {trial}, n = {n}: closed {closed} vs dual {lp_value}"
        );
    }
}

#[test]
fn reconstruction_is_tight_on_random_draws() {
    let mut rng = common::rng(0x7157);
    for trial in 0..10 {
        let n = 2 + (trial % 4);
        let f = common::random_rule(&mut rng, n);
        let w = common::random_basis(&mut rng, n);
        let report = compute_poa(&f, &w, Method::Primal).unwrap();
        let theta = optimal_theta(&f, &w).unwrap();
        let (inst, eq, opt) = reconstruct_worst_case(&theta, &f, &w).unwrap();
        assert!(inst.is_nash_with_tol(&eq, 1e-9).is_equilibrium, "trial {trial}");
        let ratio = inst.welfare(&opt) / inst.welfare(&eq);
        assert!(
            (ratio - report.w_star).abs() <= 1e-6,
            "trial {trial}: ratio {ratio} vs W* {}",
            report.w_star
        );
    }
}

/// The program is a lower bound for every concrete instance: no sampled
/// game may be less efficient than the certified price of anarchy.
#[test]
fn oracle_efficiency_never_beats_certificate() {
    let mut rng = common::rng(0x50da);
    let oracle = Oracle::new();
    for n in 2..=4usize {
        let w = WelfareBasis::covering(n);
        let rules: Vec<(&str, gmmc_core::DistributionRule)> = vec![
            ("sv", shapley(n).unwrap()),
            ("mc", marginal_contribution(&w).unwrap()),
            ("gairing", gairing(n).unwrap()),
        ];
        for (name, f) in rules {
            let poa = compute_poa(&f, &w, Method::Auto).unwrap().poa;
            for trial in 0..30 {
                let inst = common::random_singleton_instance(
                    &mut rng,
                    n,
                    2 + (trial % 4),
                    w.clone(),
                    f.clone(),
                );
                if inst.validate_standing_assumptions().is_empty() {
                    let eff = oracle.instance_efficiency(&inst).unwrap();
                    assert!(
                        eff >= poa - 1e-9,
                        "rule {name}, n = {n}, trial {trial}: eff {eff} < poa {poa}"
                    );
                }
            }
        }
    }
}
