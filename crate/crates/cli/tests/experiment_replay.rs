//! Harness-level guarantees: byte-identical replay, validity of generated
//! instances, and the certificate as a lower bound on observed ratios.

use gmmc_cli::experiment::{run_experiment, table_to_csv, ExperimentConfig, Scenario};
use gmmc_cli::gen::RuleChoice;
use gmmc_core::poa::{compute_poa, Method};
use gmmc_core::rules::shapley;
use gmmc_core::WelfareBasis;

fn vt_config(samples: usize, seed: u64) -> ExperimentConfig {
    let mut config = ExperimentConfig::new(
        Scenario::VehicleTarget {
            n_agents: 5,
            n_targets: 6,
            p: 0.8,
        },
        RuleChoice::EqualSplit,
        seed,
        samples,
    );
    config.with_oracle = true;
    config
}

#[test]
fn replay_is_byte_identical() {
    let a = table_to_csv(&run_experiment(&vt_config(40, 123)).unwrap());
    let b = table_to_csv(&run_experiment(&vt_config(40, 123)).unwrap());
    assert_eq!(a, b);
    let c = table_to_csv(&run_experiment(&vt_config(40, 124)).unwrap());
    assert_ne!(a, c);
}

#[test]
fn empty_sample_count_gives_header_only_data() {
    let table = run_experiment(&vt_config(0, 5)).unwrap();
    let csv = table_to_csv(&table);
    let data_rows: Vec<&str> = csv
        .lines()
        .filter(|l| !l.starts_with('#') && !l.starts_with("sample,"))
        .collect();
    assert!(data_rows.is_empty());
    assert!(csv.starts_with("sample,seed,scenario,rule,"));
}

#[test]
fn observed_ratios_respect_the_certificate() {
    let table = run_experiment(&vt_config(150, 777)).unwrap();
    let w = WelfareBasis::success_probability(5, 0.8).unwrap();
    let poa = compute_poa(&shapley(5).unwrap(), &w, Method::Auto)
        .unwrap()
        .poa;
    assert!(table.summary.all_converged);
    for row in &table.rows {
        let ratio = row.ratio.expect("oracle feasible at this scale");
        assert!(
            ratio >= poa - 1e-9,
            "sample {}: ratio {ratio} below certificate {poa}",
            row.index
        );
    }
    assert!(table.summary.worst_ratio.unwrap() >= poa - 1e-9);
}

#[test]
fn caching_surrogate_ratio_is_reported() {
    let mut config = ExperimentConfig::new(
        Scenario::Caching(gmmc_cli::gen::CachingParams::desk_scale(0.8)),
        RuleChoice::FactorialOptimal,
        9,
        3,
    );
    config.surrogate_ratio = true;
    let table = run_experiment(&config).unwrap();
    assert!(table.summary.all_converged);
    for row in &table.rows {
        assert!(row.ratio.is_some());
        assert!(row.note.contains("surrogate"));
        assert!(row.optimum.is_none());
    }
}

/// Designed-rule sampling stays above the theoretical floor of 0.688; the
/// observed worst case sits visibly higher (the crafted tight instance is
/// not in the sampled family).
#[test]
fn vehicle_target_designed_rule_floor() {
    let w = WelfareBasis::success_probability(10, 0.8).unwrap();
    let (designed, report) = gmmc_core::design::optimal_rule(&w).unwrap();
    assert!((report.poa - 0.688).abs() < 0.005);

    let mut config = ExperimentConfig::new(
        Scenario::VehicleTarget {
            n_agents: 10,
            n_targets: 11,
            p: 0.8,
        },
        RuleChoice::Fixed(designed),
        2024,
        400,
    );
    config.with_oracle = true;
    let table = run_experiment(&config).unwrap();
    let worst = table.summary.worst_ratio.unwrap();
    assert!(
        worst >= report.poa - 1e-9,
        "worst sampled ratio {worst} below the certificate {}",
        report.poa
    );
    println!(
        "worst sampled ratio {worst:.4} vs certificate {:.4} (paper saw ~+0.15)",
        report.poa
    );
}

/// At the large caching scale the factorial rule dominates the equal split
/// in both the worst and the mean surrogate ratio.
#[test]
fn caching_factorial_rule_dominates_equal_split() {
    let run = |choice: RuleChoice| {
        let mut config = ExperimentConfig::new(
            Scenario::Caching(gmmc_cli::gen::CachingParams::paper_scale(0.7)),
            choice,
            31,
            30,
        );
        config.surrogate_ratio = true;
        config.max_rounds = 50;
        run_experiment(&config).unwrap().summary
    };
    let sv = run(RuleChoice::EqualSplit);
    let fg = run(RuleChoice::FactorialOptimal);
    assert!(sv.all_converged && fg.all_converged);
    assert!(
        fg.worst_ratio.unwrap() > sv.worst_ratio.unwrap(),
        "worst: fg {} vs sv {}",
        fg.worst_ratio.unwrap(),
        sv.worst_ratio.unwrap()
    );
    assert!(
        fg.mean_ratio.unwrap() > sv.mean_ratio.unwrap(),
        "mean: fg {} vs sv {}",
        fg.mean_ratio.unwrap(),
        sv.mean_ratio.unwrap()
    );
}

#[test]
fn file_scenario_varies_only_the_start() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("instance.json");
    let inst =
        gmmc_cli::gen::vehicle_target(4, 5, 0.7, &RuleChoice::EqualSplit, 3).unwrap();
    gmmc_cli::io::save_instance(&path, &inst).unwrap();

    let mut config = ExperimentConfig::new(
        Scenario::File { path },
        RuleChoice::EqualSplit,
        1,
        20,
    );
    config.with_oracle = true;
    let table = run_experiment(&config).unwrap();
    // one fixed instance: a single optimum value across samples
    let mut optima: Vec<f64> = table.rows.iter().filter_map(|r| r.optimum).collect();
    optima.dedup();
    assert_eq!(optima.len(), 1);
    assert!(table.summary.all_converged);
}
