//! Round-robin best-response dynamics with potential monitoring.
//!
//! The games here are congestion games, so the exact potential acts as a
//! Lyapunov function: every improving step raises it strictly and the
//! dynamics reaches a pure equilibrium in finitely many steps.

use crate::error::{Error, Result};
use crate::game::{Allocation, GameInstance};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// A deviation below this absolute gain does not count as improving,
/// preventing float-noise cycles.
pub const IMPROVEMENT_TOL: f64 = 1e-12;

/// One best-response invocation: the agent polled, the action it holds
/// afterwards, and the potential after the step.
#[derive(Debug, Clone, PartialEq)]
pub struct BRStep {
    pub step: usize,
    pub agent: usize,
    pub action: usize,
    pub potential: f64,
}

/// Full record of a dynamics run.
#[derive(Debug, Clone, PartialEq)]
pub struct BRTrace {
    pub initial_potential: f64,
    pub steps: Vec<BRStep>,
    /// Full rounds executed, including the final confirming round.
    pub rounds: usize,
    pub converged: bool,
}

impl BRTrace {
    /// CSV rows `step,agent,action,potential` with a header line.
    /// Floats carry 12 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("step,agent,action,potential\n");
        for s in &self.steps {
            out.push_str(&format!(
                "{},{},{},{}\n",
                s.step,
                s.agent,
                s.action,
                crate::fmt_g12(s.potential)
            ));
        }
        out
    }
}

/// Agent polling order within a round.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Schedule {
    /// Agents in index order. The variant all guarantees are stated for.
    RoundRobin,
    /// A fresh seeded permutation per round.
    Random { seed: u64 },
}

/// Best response of `agent` against the rest of `a`: the utility-maximizing
/// action index, ties broken toward the smallest index.
pub fn best_response(instance: &GameInstance, a: &Allocation, agent: usize) -> usize {
    let mut best_index = 0;
    let mut best_utility = f64::NEG_INFINITY;
    for k in 0..instance.actions(agent).len() {
        let u = instance.deviation_utility(a, agent, k);
        if u > best_utility {
            best_utility = u;
            best_index = k;
        }
    }
    best_index
}

/// Runs round-robin best response from `init` until a full round changes
/// nothing or `max_rounds` is exhausted (reported as `converged = false`,
/// not an error).
pub fn run_best_response(
    instance: &GameInstance,
    init: &Allocation,
    max_rounds: usize,
) -> Result<(Allocation, BRTrace)> {
    run_best_response_with_schedule(instance, init, max_rounds, Schedule::RoundRobin)
}

/// Variant with a pluggable polling order.
pub fn run_best_response_with_schedule(
    instance: &GameInstance,
    init: &Allocation,
    max_rounds: usize,
    schedule: Schedule,
) -> Result<(Allocation, BRTrace)> {
    if max_rounds == 0 {
        return Err(Error::InvalidArgument("max_rounds must be >= 1".into()));
    }
    let n = instance.num_agents();
    let mut rng = match schedule {
        Schedule::RoundRobin => None,
        Schedule::Random { seed } => Some(ChaCha8Rng::seed_from_u64(seed)),
    };

    let mut current = init.clone();
    let mut potential = instance.potential(&current);
    let trace_initial = potential;
    let mut steps = Vec::new();
    let mut rounds = 0;
    let mut converged = false;
    let mut order: Vec<usize> = (0..n).collect();

    while rounds < max_rounds {
        rounds += 1;
        if let Some(rng) = rng.as_mut() {
            order.shuffle(rng);
        }
        let mut changed = false;
        for &agent in &order {
            let here = instance.deviation_utility(&current, agent, current.choices()[agent]);
            let candidate = best_response(instance, &current, agent);
            let gain = instance.deviation_utility(&current, agent, candidate) - here;
            if candidate != current.choices()[agent] && gain > IMPROVEMENT_TOL {
                current.set_choice(instance, agent, candidate);
                potential = instance.potential(&current);
                changed = true;
            }
            steps.push(BRStep {
                step: steps.len(),
                agent,
                action: current.choices()[agent],
                potential,
            });
        }
        if !changed {
            converged = true;
            break;
        }
    }

    Ok((
        current,
        BRTrace {
            initial_potential: trace_initial,
            steps,
            rounds,
            converged,
        },
    ))
}

/// Best-response count bound for matroid-basis action sets:
/// `n^2 * m * max_rank`.
pub fn matroid_round_bound(n: usize, m: usize, max_rank: usize) -> u64 {
    n as u64 * n as u64 * m as u64 * max_rank as u64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::fixtures::{alloc, two_resource_instance};
    use crate::game::WelfareBasis;
    use crate::rules;

    #[test]
    fn best_response_prefers_sharing_when_valuable() {
        // other agent on r0 (v = 1): sharing yields 0.5 > 0.4 alone
        let inst = two_resource_instance();
        let a = alloc(&inst, &[0, 1]);
        assert_eq!(best_response(&inst, &a, 1), 0);
    }

    #[test]
    fn best_response_single_agent_picks_max_value() {
        let basis = WelfareBasis::covering(1);
        let rule = rules::shapley(1).unwrap();
        let inst = crate::game::GameInstance::new(
            vec![0.3, 0.9, 0.5],
            vec![vec![vec![0], vec![1], vec![2]]],
            basis,
            rule,
        )
        .unwrap();
        let a = alloc(&inst, &[0]);
        assert_eq!(best_response(&inst, &a, 0), 1);
    }

    #[test]
    fn best_response_tie_takes_lower_index() {
        let basis = WelfareBasis::covering(1);
        let rule = rules::shapley(1).unwrap();
        let inst = crate::game::GameInstance::new(
            vec![0.7, 0.7],
            vec![vec![vec![0], vec![1]]],
            basis,
            rule,
        )
        .unwrap();
        let a = alloc(&inst, &[1]);
        assert_eq!(best_response(&inst, &a, 0), 0);
    }

    #[test]
    fn converges_with_expected_potential_trace() {
        let inst = two_resource_instance();
        let init = alloc(&inst, &[1, 1]);
        let (terminal, trace) = run_best_response(&inst, &init, 100).unwrap();
        assert!(trace.converged);
        assert_eq!(terminal.choices(), &[0, 0]);
        assert!((trace.initial_potential - 0.6).abs() < 1e-12);
        assert!((trace.steps[0].potential - 1.4).abs() < 1e-12);
        assert!((trace.steps[1].potential - 1.5).abs() < 1e-12);
        assert_eq!(trace.rounds, 2);
        assert!(inst.is_nash(&terminal).is_equilibrium);
    }

    #[test]
    fn single_agent_converges_in_one_improving_round() {
        let basis = WelfareBasis::covering(1);
        let rule = rules::shapley(1).unwrap();
        let inst = crate::game::GameInstance::new(
            vec![0.2, 0.8],
            vec![vec![vec![0], vec![1]]],
            basis,
            rule,
        )
        .unwrap();
        let (terminal, trace) = run_best_response(&inst, &alloc(&inst, &[0]), 10).unwrap();
        assert_eq!(terminal.choices(), &[1]);
        assert!(trace.converged);
        assert_eq!(trace.rounds, 2);
    }

    #[test]
    fn max_rounds_exhaustion_is_reported_not_raised() {
        let inst = two_resource_instance();
        let init = alloc(&inst, &[1, 1]);
        let (_, trace) = run_best_response(&inst, &init, 1).unwrap();
        assert!(!trace.converged);
        assert_eq!(trace.rounds, 1);
        assert!(run_best_response(&inst, &init, 0).is_err());
    }

    #[test]
    fn potential_never_decreases_along_trace() {
        let inst = two_resource_instance();
        for init in [[0, 0], [0, 1], [1, 0], [1, 1]] {
            let (_, trace) = run_best_response(&inst, &alloc(&inst, &init), 50).unwrap();
            let mut prev = trace.initial_potential;
            for s in &trace.steps {
                assert!(s.potential >= prev - 1e-15);
                prev = s.potential;
            }
        }
    }

    #[test]
    fn deterministic_traces() {
        let inst = two_resource_instance();
        let init = alloc(&inst, &[1, 1]);
        let (a1, t1) = run_best_response(&inst, &init, 50).unwrap();
        let (a2, t2) = run_best_response(&inst, &init, 50).unwrap();
        assert_eq!(a1, a2);
        assert_eq!(t1, t2);

        let s = Schedule::Random { seed: 7 };
        let (b1, u1) = run_best_response_with_schedule(&inst, &init, 50, s).unwrap();
        let (b2, u2) = run_best_response_with_schedule(&inst, &init, 50, s).unwrap();
        assert_eq!(b1, b2);
        assert_eq!(u1, u2);
        assert!(u1.converged);
        assert!(inst.is_nash(&b1).is_equilibrium);
    }

    #[test]
    fn matroid_bound_product() {
        assert_eq!(matroid_round_bound(2, 3, 1), 12);
        assert_eq!(matroid_round_bound(10, 100, 3), 30_000);
    }

    #[test]
    fn trace_csv_shape() {
        let inst = two_resource_instance();
        let (_, trace) = run_best_response(&inst, &alloc(&inst, &[1, 1]), 50).unwrap();
        let csv = trace.to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("step,agent,action,potential"));
        assert_eq!(csv.lines().count(), trace.steps.len() + 1);
    }
}
