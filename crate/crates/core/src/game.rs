//! Game instances for multiagent resource allocation and the primitive
//! quantities defined on them: welfare, utilities, the exact potential and
//! the pure-Nash test.
//!
//! A game is described by a set of valued resources, one action set per
//! agent (each action a subset of resources), a welfare basis `w` scaling a
//! resource's value by how many agents cover it, and a distribution rule `f`
//! deciding the fraction of `v_r * w(j)` credited to each of the `j` agents
//! on the resource.

use crate::error::{Error, Result};

/// Slack used when classifying the shape of a basis (monotone / concave /
/// convex). Keeps borderline float noise from flipping a flag.
const SHAPE_TOL: f64 = 1e-12;

/// Welfare basis function `w` on `{0, ..., n+1}`.
///
/// Stored in extended form: `w(0) = w(n+1) = 0` and `w(j) > 0` on `[1, n]`.
#[derive(Debug, Clone, PartialEq)]
pub struct WelfareBasis {
    /// Extended values, length `n + 2`.
    values: Vec<f64>,
}

impl WelfareBasis {
    /// Builds a basis from the interior values `w(1), ..., w(n)`.
    pub fn new(interior: Vec<f64>) -> Result<Self> {
        if interior.is_empty() {
            return Err(Error::InvalidArgument("welfare basis needs n >= 1".into()));
        }
        for (j, &v) in interior.iter().enumerate() {
            if !v.is_finite() || v <= 0.0 {
                return Err(Error::Structural(format!(
                    "w({}) = {} must be finite and > 0",
                    j + 1,
                    v
                )));
            }
        }
        let mut values = Vec::with_capacity(interior.len() + 2);
        values.push(0.0);
        values.extend_from_slice(&interior);
        values.push(0.0);
        Ok(Self { values })
    }

    /// Covering basis `w = 1` on `[1, n]`.
    pub fn covering(n: usize) -> Self {
        Self::new(vec![1.0; n]).expect("constant basis is valid")
    }

    /// Power basis `w(j) = j^d`.
    pub fn power(n: usize, d: f64) -> Result<Self> {
        if !d.is_finite() {
            return Err(Error::InvalidArgument("exponent must be finite".into()));
        }
        Self::new((1..=n).map(|j| (j as f64).powf(d)).collect())
    }

    /// Basis `w(j) = (1 - (1-p)^j) / (1 - (1-p))`: the normalized probability
    /// that at least one of `j` independent trials with success probability
    /// `p` succeeds. Requires `0 < p <= 1`.
    pub fn success_probability(n: usize, p: f64) -> Result<Self> {
        if !(p > 0.0 && p <= 1.0) {
            return Err(Error::InvalidArgument(format!(
                "success probability p = {p} must lie in (0, 1]"
            )));
        }
        let q = 1.0 - p;
        Self::new((1..=n).map(|j| (1.0 - q.powi(j as i32)) / p).collect())
    }

    /// Maximum number of agents this basis supports.
    pub fn n(&self) -> usize {
        self.values.len() - 2
    }

    /// `w(j)` for `j` in `{0, ..., n+1}`.
    pub fn get(&self, j: usize) -> f64 {
        self.values[j]
    }

    /// Interior values `w(1), ..., w(n)`.
    pub fn interior(&self) -> &[f64] {
        &self.values[1..self.values.len() - 1]
    }

    /// Returns a copy with every value divided by `w(1)`.
    ///
    /// The basis is stored as given; normalization is the caller's choice.
    pub fn normalized(&self) -> Self {
        let w1 = self.get(1);
        Self::new(self.interior().iter().map(|v| v / w1).collect())
            .expect("rescaling preserves validity")
    }

    /// Whether `w` is non-decreasing and discretely concave on `[1, n]`,
    /// with the extension `w(0) = 0` entering the second difference at `j = 1`.
    pub fn is_nondecreasing_concave(&self) -> bool {
        let n = self.n();
        let tol = |x: f64| SHAPE_TOL * x.abs().max(1.0);
        for j in 1..n {
            if self.get(j + 1) < self.get(j) - tol(self.get(j)) {
                return false;
            }
            let ahead = self.get(j + 1) - self.get(j);
            let behind = self.get(j) - self.get(j - 1);
            if ahead > behind + tol(behind) {
                return false;
            }
        }
        true
    }

    /// Whether `w` is non-decreasing and discretely convex on `[1, n]`,
    /// with the extension `w(0) = 0` entering the second difference at `j = 1`.
    pub fn is_nondecreasing_convex(&self) -> bool {
        let n = self.n();
        let tol = |x: f64| SHAPE_TOL * x.abs().max(1.0);
        for j in 1..n {
            if self.get(j + 1) < self.get(j) - tol(self.get(j)) {
                return false;
            }
            let ahead = self.get(j + 1) - self.get(j);
            let behind = self.get(j) - self.get(j - 1);
            if ahead < behind - tol(behind) {
                return false;
            }
        }
        true
    }
}

/// Distribution rule `f` on `{0, ..., n+1}`: the designable fraction of
/// `v_r * w(j)` credited to each of the `j` agents covering a resource.
///
/// Stored in extended form with `f(0) = f(n+1) = 0`. Values must be
/// nonnegative; membership in the admissible class (`f(1) >= 1`) is a
/// separate predicate so that out-of-class rules can still be represented
/// and reported by validation.
#[derive(Debug, Clone, PartialEq)]
pub struct DistributionRule {
    /// Extended values, length `n + 2`.
    values: Vec<f64>,
}

impl DistributionRule {
    /// Builds a rule from the interior values `f(1), ..., f(n)`.
    pub fn new(interior: Vec<f64>) -> Result<Self> {
        if interior.is_empty() {
            return Err(Error::InvalidArgument(
                "distribution rule needs n >= 1".into(),
            ));
        }
        for (j, &v) in interior.iter().enumerate() {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::Structural(format!(
                    "f({}) = {} must be finite and >= 0",
                    j + 1,
                    v
                )));
            }
        }
        let mut values = Vec::with_capacity(interior.len() + 2);
        values.push(0.0);
        values.extend_from_slice(&interior);
        values.push(0.0);
        Ok(Self { values })
    }

    /// Maximum number of agents this rule supports.
    pub fn n(&self) -> usize {
        self.values.len() - 2
    }

    /// `f(j)` for `j` in `{0, ..., n+1}`.
    pub fn get(&self, j: usize) -> f64 {
        self.values[j]
    }

    /// Interior values `f(1), ..., f(n)`.
    pub fn interior(&self) -> &[f64] {
        &self.values[1..self.values.len() - 1]
    }

    /// Class membership: `f(1) >= 1` (nonnegativity holds by construction).
    pub fn is_class_f(&self) -> bool {
        self.get(1) >= 1.0
    }
}

/// A pure strategy profile: one chosen action index per agent, plus the
/// derived per-resource coverage counts.
#[derive(Debug, Clone, PartialEq)]
pub struct Allocation {
    choices: Vec<usize>,
    coverage: Vec<u32>,
}

impl Allocation {
    /// Validates the choice indices against `instance` and derives coverage.
    pub fn new(instance: &GameInstance, choices: Vec<usize>) -> Result<Self> {
        if choices.len() != instance.num_agents() {
            return Err(Error::Structural(format!(
                "allocation has {} choices for {} agents",
                choices.len(),
                instance.num_agents()
            )));
        }
        let mut coverage = vec![0u32; instance.num_resources()];
        for (i, &c) in choices.iter().enumerate() {
            let actions = &instance.action_sets[i];
            if c >= actions.len() {
                return Err(Error::Structural(format!(
                    "agent {i} choice {c} out of range ({} actions)",
                    actions.len()
                )));
            }
            for &r in &actions[c] {
                coverage[r] += 1;
            }
        }
        Ok(Self { choices, coverage })
    }

    pub fn choices(&self) -> &[usize] {
        &self.choices
    }

    /// Coverage count `|a|_r` per resource id.
    pub fn coverage(&self) -> &[u32] {
        &self.coverage
    }

    /// Moves `agent` to `new_choice`, updating coverage incrementally.
    pub(crate) fn set_choice(&mut self, instance: &GameInstance, agent: usize, new_choice: usize) {
        let old = self.choices[agent];
        if old == new_choice {
            return;
        }
        for &r in &instance.action_sets[agent][old] {
            self.coverage[r] -= 1;
        }
        for &r in &instance.action_sets[agent][new_choice] {
            self.coverage[r] += 1;
        }
        self.choices[agent] = new_choice;
    }
}

/// Outcome of the pure-Nash test: either an equilibrium, or one strictly
/// improving unilateral deviation as witness.
#[derive(Debug, Clone, PartialEq)]
pub struct NashCheck {
    pub is_equilibrium: bool,
    pub witness: Option<Deviation>,
}

/// A strictly improving unilateral deviation.
#[derive(Debug, Clone, PartialEq)]
pub struct Deviation {
    pub agent: usize,
    pub action_index: usize,
    pub gain: f64,
}

/// One instance of the resource-allocation game: valued resources, one
/// action set per agent, a welfare basis and a distribution rule.
///
/// Instances are immutable after construction; all operations are pure.
#[derive(Debug, Clone)]
pub struct GameInstance {
    values: Vec<f64>,
    /// `action_sets[i][k]` is the k-th action of agent `i`: a sorted,
    /// duplicate-free list of resource ids.
    action_sets: Vec<Vec<Vec<usize>>>,
    basis: WelfareBasis,
    rule: DistributionRule,
}

impl GameInstance {
    /// Builds an instance, sorting and deduplicating each action.
    ///
    /// Structural requirements enforced here: resource values finite and
    /// nonnegative, action ids in range, at least one action per agent, at
    /// most `n` agents, and `basis.n() == rule.n()`. Softer game assumptions
    /// (a nonempty action per agent, a reachable positive resource, class
    /// membership of `f`) are reported by [`validate_standing_assumptions`]
    /// instead of being rejected.
    ///
    /// [`validate_standing_assumptions`]: GameInstance::validate_standing_assumptions
    pub fn new(
        values: Vec<f64>,
        action_sets: Vec<Vec<Vec<usize>>>,
        basis: WelfareBasis,
        rule: DistributionRule,
    ) -> Result<Self> {
        if basis.n() != rule.n() {
            return Err(Error::Structural(format!(
                "basis n = {} does not match rule n = {}",
                basis.n(),
                rule.n()
            )));
        }
        if action_sets.is_empty() {
            return Err(Error::Structural("instance has no agents".into()));
        }
        if action_sets.len() > basis.n() {
            return Err(Error::Structural(format!(
                "{} agents exceed basis capacity n = {}",
                action_sets.len(),
                basis.n()
            )));
        }
        for (r, &v) in values.iter().enumerate() {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::Structural(format!(
                    "resource {r} value {v} must be finite and >= 0"
                )));
            }
        }
        let mut action_sets = action_sets;
        for (i, actions) in action_sets.iter_mut().enumerate() {
            if actions.is_empty() {
                return Err(Error::Structural(format!("agent {i} has an empty action set")));
            }
            for action in actions.iter_mut() {
                action.sort_unstable();
                action.dedup();
                if let Some(&r) = action.last() {
                    if r >= values.len() {
                        return Err(Error::Structural(format!(
                            "agent {i} references resource {r} but only {} exist",
                            values.len()
                        )));
                    }
                }
            }
        }
        Ok(Self {
            values,
            action_sets,
            basis,
            rule,
        })
    }

    pub fn num_agents(&self) -> usize {
        self.action_sets.len()
    }

    pub fn num_resources(&self) -> usize {
        self.values.len()
    }

    pub fn value(&self, r: usize) -> f64 {
        self.values[r]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn actions(&self, agent: usize) -> &[Vec<usize>] {
        &self.action_sets[agent]
    }

    pub fn action_sets(&self) -> &[Vec<Vec<usize>>] {
        &self.action_sets
    }

    pub fn basis(&self) -> &WelfareBasis {
        &self.basis
    }

    pub fn rule(&self) -> &DistributionRule {
        &self.rule
    }

    /// Total welfare `W(a) = sum over covered r of v_r * w(|a|_r)`.
    ///
    /// Summation runs in ascending resource id for reproducibility.
    pub fn welfare(&self, a: &Allocation) -> f64 {
        debug_assert_eq!(a.coverage.len(), self.values.len());
        let mut total = 0.0;
        for (r, &c) in a.coverage.iter().enumerate() {
            if c > 0 {
                total += self.values[r] * self.basis.get(c as usize);
            }
        }
        total
    }

    /// Agent utility `u_i(a) = sum over r in a_i of v_r * w(|a|_r) * f(|a|_r)`.
    pub fn utility(&self, a: &Allocation, agent: usize) -> Result<f64> {
        if agent >= self.num_agents() {
            return Err(Error::Structural(format!(
                "agent index {agent} out of range ({} agents)",
                self.num_agents()
            )));
        }
        Ok(self.utility_unchecked(a, agent))
    }

    fn utility_unchecked(&self, a: &Allocation, agent: usize) -> f64 {
        let mut total = 0.0;
        for &r in &self.action_sets[agent][a.choices[agent]] {
            let c = a.coverage[r] as usize;
            total += self.values[r] * self.basis.get(c) * self.rule.get(c);
        }
        total
    }

    /// Utility agent `i` would get by unilaterally switching to its action
    /// `action_index`, everyone else unchanged. No allocation is built.
    pub(crate) fn deviation_utility(
        &self,
        a: &Allocation,
        agent: usize,
        action_index: usize,
    ) -> f64 {
        let current = &self.action_sets[agent][a.choices[agent]];
        let mut total = 0.0;
        for &r in &self.action_sets[agent][action_index] {
            let occupied = a.coverage[r] as usize;
            let c = if current.binary_search(&r).is_ok() {
                occupied
            } else {
                occupied + 1
            };
            total += self.values[r] * self.basis.get(c) * self.rule.get(c);
        }
        total
    }

    /// Exact potential `phi(a) = sum_r sum_{j=1}^{|a|_r} v_r * w(j) * f(j)`.
    ///
    /// Unilateral utility changes equal potential changes exactly.
    pub fn potential(&self, a: &Allocation) -> f64 {
        let mut total = 0.0;
        for (r, &c) in a.coverage.iter().enumerate() {
            for j in 1..=(c as usize) {
                total += self.values[r] * self.basis.get(j) * self.rule.get(j);
            }
        }
        total
    }

    /// Pure-Nash test with strict improvement (`gain > 0`).
    pub fn is_nash(&self, a: &Allocation) -> NashCheck {
        self.is_nash_with_tol(a, 0.0)
    }

    /// Pure-Nash test treating gains of at most `tol` as non-improving.
    ///
    /// Scans agents and actions in index order, so the witness (the first
    /// strictly improving deviation) is deterministic.
    pub fn is_nash_with_tol(&self, a: &Allocation, tol: f64) -> NashCheck {
        for agent in 0..self.num_agents() {
            let current = self.utility_unchecked(a, agent);
            for action_index in 0..self.action_sets[agent].len() {
                if action_index == a.choices[agent] {
                    continue;
                }
                let gain = self.deviation_utility(a, agent, action_index) - current;
                if gain > tol {
                    return NashCheck {
                        is_equilibrium: false,
                        witness: Some(Deviation {
                            agent,
                            action_index,
                            gain,
                        }),
                    };
                }
            }
        }
        NashCheck {
            is_equilibrium: true,
            witness: None,
        }
    }

    /// Checks the game-level assumptions that construction does not enforce.
    /// Returns an empty list iff the instance, basis and rule satisfy all of
    /// them. Violations are data, not errors.
    pub fn validate_standing_assumptions(&self) -> Vec<String> {
        let mut violations = Vec::new();
        for (i, actions) in self.action_sets.iter().enumerate() {
            if actions.iter().all(|action| action.is_empty()) {
                violations.push(format!("agent {i} has no nonempty action"));
            }
        }
        let reachable_positive = self.action_sets.iter().flatten().flatten().any(|&r| self.values[r] > 0.0);
        if !reachable_positive {
            violations.push("no positively valued reachable resource".into());
        }
        if !self.rule.is_class_f() {
            violations.push("f not in class F".into());
        }
        violations
    }
}

#[cfg(test)]
pub(crate) mod fixtures {
    use super::*;
    use crate::rules;

    /// Two agents, resources {r0: 1.0, r1: 0.4}, both agents choose one of
    /// the two singletons, covering basis, Shapley rule.
    pub fn two_resource_instance() -> GameInstance {
        let basis = WelfareBasis::covering(2);
        let rule = rules::shapley(2).unwrap();
        GameInstance::new(
            vec![1.0, 0.4],
            vec![
                vec![vec![0], vec![1]],
                vec![vec![0], vec![1]],
            ],
            basis,
            rule,
        )
        .unwrap()
    }

    pub fn alloc(inst: &GameInstance, choices: &[usize]) -> Allocation {
        Allocation::new(inst, choices.to_vec()).unwrap()
    }
}
