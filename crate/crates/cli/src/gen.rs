//! Benchmark instance generators.
//!
//! All randomness flows through [`sample_rng`], a counter-based stream
//! cipher generator keyed by `(experiment seed, sample index)`, so samples
//! are independent, order-insensitive and exactly replayable.

use gmmc_core::rules;
use gmmc_core::{design, DistributionRule, Error, GameInstance, Result, WelfareBasis};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Largest action set a caching node may enumerate before the generator
/// refuses with a capacity error.
const MAX_ACTIONS_PER_NODE: usize = 200_000;

/// Deterministic per-sample generator: ChaCha8 keyed with the experiment
/// seed in the first word and the sample index in the second.
pub fn sample_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&index.to_le_bytes());
    ChaCha8Rng::from_seed(key)
}

/// How the distribution rule of a generated instance is chosen.
#[derive(Debug, Clone)]
pub enum RuleChoice {
    /// Equal split `1/j`.
    EqualSplit,
    /// Marginal contribution against the instance basis.
    MarginalContribution,
    /// The factorial-sum covering-optimal rule.
    FactorialOptimal,
    /// Solve the design program for the instance basis.
    DesignedOptimal,
    /// A fixed, pre-built rule (must match the basis size).
    Fixed(DistributionRule),
}

impl RuleChoice {
    pub fn build(&self, w: &WelfareBasis) -> Result<DistributionRule> {
        let n = w.n();
        match self {
            RuleChoice::EqualSplit => rules::shapley(n),
            RuleChoice::MarginalContribution => rules::marginal_contribution(w),
            RuleChoice::FactorialOptimal => rules::gairing(n),
            RuleChoice::DesignedOptimal => Ok(design::optimal_rule(w)?.0),
            RuleChoice::Fixed(rule) => {
                if rule.n() != n {
                    return Err(Error::InvalidArgument(format!(
                        "fixed rule has n = {}, instance needs n = {n}",
                        rule.n()
                    )));
                }
                Ok(rule.clone())
            }
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            RuleChoice::EqualSplit => "sv",
            RuleChoice::MarginalContribution => "mc",
            RuleChoice::FactorialOptimal => "gairing",
            RuleChoice::DesignedOptimal => "optimal",
            RuleChoice::Fixed(_) => "file",
        }
    }
}

/// Vehicle-target style instance: the basis is the normalized joint success
/// probability `w(j) = (1 - (1-p)^j)/p`, target values are uniform on
/// `[0, 1)`, and every agent's menu is two distinct singleton targets.
pub fn vehicle_target(
    n_agents: usize,
    n_targets: usize,
    p: f64,
    rule: &RuleChoice,
    seed: u64,
) -> Result<GameInstance> {
    if n_agents == 0 {
        return Err(Error::InvalidArgument("need at least one agent".into()));
    }
    if n_targets < 2 {
        return Err(Error::InvalidArgument(
            "need at least two targets to sample distinct pairs".into(),
        ));
    }
    let basis = WelfareBasis::success_probability(n_agents, p)?;
    let f = rule.build(&basis)?;
    let mut rng = sample_rng(seed, 0);
    let values: Vec<f64> = (0..n_targets).map(|_| rng.random_range(0.0..1.0)).collect();
    let mut action_sets = Vec::with_capacity(n_agents);
    for _ in 0..n_agents {
        let first = rng.random_range(0..n_targets);
        let mut second = rng.random_range(0..n_targets - 1);
        if second >= first {
            second += 1;
        }
        action_sets.push(vec![vec![first], vec![second]]);
    }
    GameInstance::new(values, action_sets, basis, f)
}

/// Random covering instances with small singleton menus, used for the
/// desk-scale soundness sweeps.
pub fn random_singleton(
    n_agents: usize,
    n_resources: usize,
    rule: &RuleChoice,
    seed: u64,
) -> Result<GameInstance> {
    if n_agents == 0 || n_resources == 0 {
        return Err(Error::InvalidArgument(
            "need at least one agent and one resource".into(),
        ));
    }
    let basis = WelfareBasis::covering(n_agents);
    let f = rule.build(&basis)?;
    let mut rng = sample_rng(seed, 0);
    let values: Vec<f64> = (0..n_resources).map(|_| rng.random_range(0.0..1.0)).collect();
    let mut action_sets = Vec::with_capacity(n_agents);
    for _ in 0..n_agents {
        let menu = rng.random_range(1..=n_resources.min(3));
        let mut ids: Vec<usize> = (0..n_resources).collect();
        for i in (1..ids.len()).rev() {
            let j = rng.random_range(0..=i);
            ids.swap(i, j);
        }
        action_sets.push(ids[..menu].iter().map(|&r| vec![r]).collect());
    }
    GameInstance::new(values, action_sets, basis, f)
}

/// Parameters of the distributed-caching benchmark.
#[derive(Debug, Clone, Copy)]
pub struct CachingParams {
    pub grid_x: f64,
    pub grid_y: f64,
    pub n_nodes: usize,
    pub n_items: usize,
    /// Power-law exponent of the query rates `q_r = 1/r^alpha`.
    pub alpha: f64,
    /// A node may cache an item iff their distance is at most this radius.
    pub radius: f64,
    /// Maximum number of items a node stores.
    pub capacity: usize,
}

impl CachingParams {
    /// The scale used in the large-network experiment: 800x800 grid,
    /// 100 nodes, 1000 items, radius 200, unit capacity.
    pub fn paper_scale(alpha: f64) -> Self {
        Self {
            grid_x: 800.0,
            grid_y: 800.0,
            n_nodes: 100,
            n_items: 1000,
            alpha,
            radius: 200.0,
            capacity: 1,
        }
    }

    /// A shrunk variant whose dynamics stay fast on a laptop: 200x200 grid,
    /// 20 nodes, 200 items.
    pub fn desk_scale(alpha: f64) -> Self {
        Self {
            grid_x: 200.0,
            grid_y: 200.0,
            n_nodes: 20,
            n_items: 200,
            alpha,
            radius: 200.0,
            capacity: 1,
        }
    }
}

/// A generated caching instance plus the nodes that were dropped because no
/// item was within reach (they would violate the nonempty-action
/// assumption).
#[derive(Debug, Clone)]
pub struct CachingInstance {
    pub instance: GameInstance,
    pub dropped_nodes: Vec<usize>,
    /// Total query rate, the welfare denominator surrogate at scales where
    /// the exact optimum is out of reach.
    pub total_query_rate: f64,
}

/// Distributed-caching instance: items and nodes uniformly placed on the
/// grid, query rates Zipf-distributed, covering welfare, and per-node
/// action sets of all reachable-item subsets up to the capacity.
pub fn caching(params: &CachingParams, rule: &RuleChoice, seed: u64) -> Result<CachingInstance> {
    if params.grid_x <= 0.0 || params.grid_y <= 0.0 {
        return Err(Error::InvalidArgument("grid dimensions must be positive".into()));
    }
    if params.alpha <= 0.0 {
        return Err(Error::InvalidArgument("alpha must be positive".into()));
    }
    if params.n_nodes == 0 || params.n_items == 0 || params.capacity == 0 {
        return Err(Error::InvalidArgument(
            "nodes, items and capacity must be positive".into(),
        ));
    }

    let mut rng = sample_rng(seed, 0);
    let items: Vec<(f64, f64)> = (0..params.n_items)
        .map(|_| {
            (
                rng.random_range(0.0..params.grid_x),
                rng.random_range(0.0..params.grid_y),
            )
        })
        .collect();
    let nodes: Vec<(f64, f64)> = (0..params.n_nodes)
        .map(|_| {
            (
                rng.random_range(0.0..params.grid_x),
                rng.random_range(0.0..params.grid_y),
            )
        })
        .collect();
    let values: Vec<f64> = (1..=params.n_items)
        .map(|r| 1.0 / (r as f64).powf(params.alpha))
        .collect();
    let total_query_rate: f64 = values.iter().sum();

    let radius_sq = params.radius * params.radius;
    let mut dropped_nodes = Vec::new();
    let mut action_sets = Vec::new();
    for (i, &(nx, ny)) in nodes.iter().enumerate() {
        let reachable: Vec<usize> = items
            .iter()
            .enumerate()
            .filter(|(_, &(ix, iy))| {
                let dx = ix - nx;
                let dy = iy - ny;
                dx * dx + dy * dy <= radius_sq
            })
            .map(|(r, _)| r)
            .collect();
        if reachable.is_empty() {
            dropped_nodes.push(i);
            continue;
        }
        action_sets.push(subsets_up_to(&reachable, params.capacity)?);
    }
    if action_sets.is_empty() {
        return Err(Error::InvalidArgument(
            "every node was dropped; enlarge the radius or the node count".into(),
        ));
    }

    let basis = WelfareBasis::covering(action_sets.len());
    let f = rule.build(&basis)?;
    let instance = GameInstance::new(values, action_sets, basis, f)?;
    Ok(CachingInstance {
        instance,
        dropped_nodes,
        total_query_rate,
    })
}

/// All subsets of `items` with size at most `k`, ordered by size then
/// lexicographically. Errors out rather than materializing a combinatorial
/// explosion.
fn subsets_up_to(items: &[usize], k: usize) -> Result<Vec<Vec<usize>>> {
    let mut count: u128 = 1;
    let mut binom: u128 = 1;
    for s in 1..=k.min(items.len()) {
        binom = binom * (items.len() - s + 1) as u128 / s as u128;
        count += binom;
        if count > MAX_ACTIONS_PER_NODE as u128 {
            return Err(Error::Capacity(format!(
                "a node would enumerate more than {MAX_ACTIONS_PER_NODE} actions; \
                 lower the capacity or radius"
            )));
        }
    }
    let mut out = vec![Vec::new()];
    let mut frontier: Vec<Vec<usize>> = vec![Vec::new()];
    for _ in 1..=k.min(items.len()) {
        let mut next = Vec::new();
        for prefix in &frontier {
            let start = prefix
                .last()
                .map(|&last| items.iter().position(|&x| x == last).unwrap() + 1)
                .unwrap_or(0);
            for &item in &items[start..] {
                let mut subset = prefix.clone();
                subset.push(item);
                next.push(subset);
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    Ok(out)
}
