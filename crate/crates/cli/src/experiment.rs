//! Seeded experiment sweeps: generate instances, run best response, and
//! collect per-sample efficiency rows plus a summary.
//!
//! Samples are evaluated in parallel; sample `i` derives its generator state
//! from `splitmix(seed, i)` alone and rows are emitted in sample order, so
//! replaying a config reproduces the result table byte for byte.

use std::path::PathBuf;

use gmmc_core::dynamics::run_best_response;
use gmmc_core::oracle::Oracle;
use gmmc_core::{fmt_g12, Allocation, Error, GameInstance, Result};
use rand::Rng;
use rayon::prelude::*;

use crate::gen::{self, CachingParams, RuleChoice};
use crate::io;

/// What to generate (or load) per sample.
#[derive(Debug, Clone)]
pub enum Scenario {
    VehicleTarget {
        n_agents: usize,
        n_targets: usize,
        p: f64,
    },
    Caching(CachingParams),
    RandomSingleton {
        n_agents: usize,
        n_resources: usize,
    },
    /// A fixed instance from disk; samples differ in their initial profile.
    File { path: PathBuf },
}

impl Scenario {
    pub fn label(&self) -> String {
        match self {
            Scenario::VehicleTarget { n_agents, n_targets, p } => {
                format!("vehicle-target(n={n_agents};targets={n_targets};p={p})")
            }
            Scenario::Caching(p) => format!(
                "caching(grid={}x{};nodes={};items={};alpha={};radius={};capacity={})",
                p.grid_x, p.grid_y, p.n_nodes, p.n_items, p.alpha, p.radius, p.capacity
            ),
            Scenario::RandomSingleton { n_agents, n_resources } => {
                format!("random-singleton(n={n_agents};m={n_resources})")
            }
            Scenario::File { path } => format!("file({})", path.display()),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub scenario: Scenario,
    pub rule: RuleChoice,
    pub seed: u64,
    pub samples: usize,
    pub max_rounds: usize,
    /// Exhaustively certify each sample when the profile space fits the cap.
    pub with_oracle: bool,
    pub oracle_cap: u64,
    /// For caching runs too large for the oracle: report
    /// `W(eq) / total query rate` instead of a true ratio.
    pub surrogate_ratio: bool,
}

impl ExperimentConfig {
    pub fn new(scenario: Scenario, rule: RuleChoice, seed: u64, samples: usize) -> Self {
        Self {
            scenario,
            rule,
            seed,
            samples,
            max_rounds: 10_000,
            with_oracle: false,
            oracle_cap: gmmc_core::oracle::DEFAULT_PROFILE_CAP,
            surrogate_ratio: false,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SampleRow {
    pub index: usize,
    pub nash_welfare: f64,
    pub rounds: usize,
    pub converged: bool,
    pub optimum: Option<f64>,
    pub ratio: Option<f64>,
    pub note: String,
}

#[derive(Debug, Clone, Default)]
pub struct Summary {
    pub samples: usize,
    pub worst_ratio: Option<f64>,
    pub mean_ratio: Option<f64>,
    pub p05_ratio: Option<f64>,
    pub p50_ratio: Option<f64>,
    pub p95_ratio: Option<f64>,
    pub mean_welfare: f64,
    pub max_rounds_used: usize,
    pub all_converged: bool,
}

#[derive(Debug, Clone)]
pub struct ResultTable {
    pub scenario: String,
    pub rule: String,
    pub seed: u64,
    pub rows: Vec<SampleRow>,
    pub summary: Summary,
}

/// Derives the per-sample seed: splitmix-style bijective mixing so
/// neighboring indices decorrelate.
pub fn sample_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed ^ index.wrapping_mul(0x9e3779b97f4a7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

fn percentile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    sorted[lo] * (1.0 - frac) + sorted[hi] * frac
}

fn random_initial(instance: &GameInstance, rng: &mut impl Rng) -> Allocation {
    let choices = (0..instance.num_agents())
        .map(|i| rng.random_range(0..instance.actions(i).len()))
        .collect();
    Allocation::new(instance, choices).expect("choices drawn in range")
}

/// Instance for one sample plus the surrogate welfare denominator (caching
/// only) and any generator note.
fn sample_instance(
    config: &ExperimentConfig,
    fixed: &Option<GameInstance>,
    seed: u64,
) -> Result<(GameInstance, Option<f64>, String)> {
    match &config.scenario {
        Scenario::VehicleTarget { n_agents, n_targets, p } => Ok((
            gen::vehicle_target(*n_agents, *n_targets, *p, &config.rule, seed)?,
            None,
            String::new(),
        )),
        Scenario::Caching(params) => {
            let out = gen::caching(params, &config.rule, seed)?;
            let note = if out.dropped_nodes.is_empty() {
                String::new()
            } else {
                format!("dropped {} unreachable nodes", out.dropped_nodes.len())
            };
            Ok((out.instance, Some(out.total_query_rate), note))
        }
        Scenario::RandomSingleton { n_agents, n_resources } => Ok((
            gen::random_singleton(*n_agents, *n_resources, &config.rule, seed)?,
            None,
            String::new(),
        )),
        Scenario::File { .. } => Ok((
            fixed.clone().expect("fixed instance preloaded"),
            None,
            String::new(),
        )),
    }
}

fn run_sample(
    config: &ExperimentConfig,
    fixed: &Option<GameInstance>,
    index: usize,
) -> Result<SampleRow> {
    let seed = sample_seed(config.seed, index as u64);
    let (instance, surrogate_denominator, mut note) = sample_instance(config, fixed, seed)?;

    // stream 1 is reserved for the initial profile; generators use stream 0
    let mut rng = gen::sample_rng(seed, 1);
    let init = random_initial(&instance, &mut rng);
    let (terminal, trace) = run_best_response(&instance, &init, config.max_rounds)?;
    let nash_welfare = instance.welfare(&terminal);

    let mut optimum = None;
    let mut ratio = None;
    if config.with_oracle {
        match Oracle::with_cap(config.oracle_cap).exact_optimum(&instance) {
            Ok((_, opt)) => {
                optimum = Some(opt);
                if opt > 0.0 {
                    ratio = Some(nash_welfare / opt);
                }
            }
            Err(Error::Capacity(msg)) => {
                let skip = format!("oracle skipped: {msg}");
                note = if note.is_empty() { skip } else { format!("{note}; {skip}") };
            }
            Err(e) => return Err(e),
        }
    }
    if ratio.is_none() && config.surrogate_ratio {
        if let Some(denominator) = surrogate_denominator {
            ratio = Some(nash_welfare / denominator);
            let tag = "surrogate denominator";
            note = if note.is_empty() { tag.into() } else { format!("{note}; {tag}") };
        }
    }

    Ok(SampleRow {
        index,
        nash_welfare,
        rounds: trace.rounds,
        converged: trace.converged,
        optimum,
        ratio,
        note,
    })
}

/// Runs every sample (in parallel) and assembles the ordered result table.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ResultTable> {
    let fixed = match &config.scenario {
        Scenario::File { path } => Some(
            io::load_instance(path)
                .map_err(|e| Error::Structural(format!("read {}: {e}", path.display())))??,
        ),
        _ => None,
    };

    let rows: Vec<SampleRow> = (0..config.samples)
        .into_par_iter()
        .map(|index| run_sample(config, &fixed, index))
        .collect::<Result<Vec<_>>>()?;

    let mut ratios: Vec<f64> = rows.iter().filter_map(|r| r.ratio).collect();
    ratios.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let summary = Summary {
        samples: rows.len(),
        worst_ratio: ratios.first().copied(),
        mean_ratio: (!ratios.is_empty())
            .then(|| ratios.iter().sum::<f64>() / ratios.len() as f64),
        p05_ratio: (!ratios.is_empty()).then(|| percentile(&ratios, 0.05)),
        p50_ratio: (!ratios.is_empty()).then(|| percentile(&ratios, 0.50)),
        p95_ratio: (!ratios.is_empty()).then(|| percentile(&ratios, 0.95)),
        mean_welfare: if rows.is_empty() {
            0.0
        } else {
            rows.iter().map(|r| r.nash_welfare).sum::<f64>() / rows.len() as f64
        },
        max_rounds_used: rows.iter().map(|r| r.rounds).max().unwrap_or(0),
        all_converged: rows.iter().all(|r| r.converged),
    };

    Ok(ResultTable {
        scenario: config.scenario.label(),
        rule: config.rule.label().to_string(),
        seed: config.seed,
        rows,
        summary,
    })
}

fn opt_g12(x: Option<f64>) -> String {
    x.map(fmt_g12).unwrap_or_default()
}

/// CSV serialization: one data row per sample, then `#`-prefixed summary
/// lines. Floats carry 12 significant digits.
pub fn table_to_csv(table: &ResultTable) -> String {
    let mut out = String::new();
    out.push_str("sample,seed,scenario,rule,nash_welfare,rounds,converged,optimum,ratio,note\n");
    for row in &table.rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{}\n",
            row.index,
            table.seed,
            table.scenario,
            table.rule,
            fmt_g12(row.nash_welfare),
            row.rounds,
            row.converged,
            opt_g12(row.optimum),
            opt_g12(row.ratio),
            row.note
        ));
    }
    let s = &table.summary;
    out.push_str(&format!("# samples,{}\n", s.samples));
    out.push_str(&format!("# mean_welfare,{}\n", fmt_g12(s.mean_welfare)));
    out.push_str(&format!("# max_rounds,{}\n", s.max_rounds_used));
    out.push_str(&format!("# all_converged,{}\n", s.all_converged));
    out.push_str(&format!("# worst_ratio,{}\n", opt_g12(s.worst_ratio)));
    out.push_str(&format!("# mean_ratio,{}\n", opt_g12(s.mean_ratio)));
    out.push_str(&format!("# p05_ratio,{}\n", opt_g12(s.p05_ratio)));
    out.push_str(&format!("# p50_ratio,{}\n", opt_g12(s.p50_ratio)));
    out.push_str(&format!("# p95_ratio,{}\n", opt_g12(s.p95_ratio)));
    out
}
