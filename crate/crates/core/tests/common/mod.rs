//! Shared random generators for the integration sweeps. Everything is
//! seeded so failures replay exactly.
#![allow(dead_code)] // each test binary uses a different subset

use gmmc_core::{DistributionRule, GameInstance, WelfareBasis};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Any admissible rule: f(1) in [1, 2], the rest in [0, 2].
pub fn random_rule(rng: &mut ChaCha8Rng, n: usize) -> DistributionRule {
    let mut f = vec![rng.random_range(1.0..2.0)];
    for _ in 1..n {
        f.push(rng.random_range(0.0..2.0));
    }
    DistributionRule::new(f).unwrap()
}

/// Any positive basis, no shape constraint.
pub fn random_basis(rng: &mut ChaCha8Rng, n: usize) -> WelfareBasis {
    WelfareBasis::new((0..n).map(|_| rng.random_range(0.2..3.0)).collect()).unwrap()
}

/// Non-decreasing concave basis with w(1) = 1, built from shrinking
/// increments (the first increment w(1) - w(0) = 1 caps them all).
pub fn concave_basis(rng: &mut ChaCha8Rng, n: usize) -> WelfareBasis {
    let mut values = vec![1.0];
    let mut inc = 1.0;
    for _ in 1..n {
        inc *= rng.random_range(0.0..1.0);
        let prev = *values.last().unwrap();
        values.push(prev + inc);
    }
    WelfareBasis::new(values).unwrap()
}

/// A rule satisfying the submodular-regime preconditions against `w`:
/// f(1) = 1, f >= f_MC pointwise, f(j)w(j) non-increasing.
pub fn submodular_rule(rng: &mut ChaCha8Rng, w: &WelfareBasis) -> DistributionRule {
    let n = w.n();
    let mut f = vec![1.0];
    for j in 2..=n {
        let lo = 1.0 - w.get(j - 1) / w.get(j);
        let hi = f[j - 2] * w.get(j - 1) / w.get(j);
        f.push(rng.random_range(lo..=hi.max(lo)));
    }
    DistributionRule::new(f).unwrap()
}

/// A random instance whose actions are singletons: every agent gets a
/// distinct-target menu of `k` single-resource actions.
pub fn random_singleton_instance(
    rng: &mut ChaCha8Rng,
    n_agents: usize,
    n_resources: usize,
    basis: WelfareBasis,
    rule: DistributionRule,
) -> GameInstance {
    let values: Vec<f64> = (0..n_resources).map(|_| rng.random_range(0.0..1.0)).collect();
    let mut action_sets = Vec::with_capacity(n_agents);
    for _ in 0..n_agents {
        let k = rng.random_range(1..=n_resources.min(3));
        let mut targets: Vec<usize> = (0..n_resources).collect();
        for i in (1..targets.len()).rev() {
            let j = rng.random_range(0..=i);
            targets.swap(i, j);
        }
        action_sets.push(targets[..k].iter().map(|&r| vec![r]).collect());
    }
    GameInstance::new(values, action_sets, basis, rule).unwrap()
}
