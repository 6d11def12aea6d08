//! Exhaustive ground truth on desk-scale instances: global optimum, the
//! complete set of pure equilibria, and instance-level efficiency.
//!
//! Brute force is the point here; these routines exist to validate the
//! analytic machinery, not to scale. Enumeration is mixed-radix counting
//! over action indices in lexicographic order, and welfare comparisons use
//! exact floats over the stable (ascending resource id) summation order so
//! that ties resolve reproducibly.

use crate::error::{Error, Result};
use crate::game::{Allocation, GameInstance};

/// Default cap on the profile-space size.
pub const DEFAULT_PROFILE_CAP: u64 = 1_000_000;

/// Exhaustive analyzer with a configurable profile-space cap.
#[derive(Debug, Clone, Copy)]
pub struct Oracle {
    cap: u64,
}

impl Default for Oracle {
    fn default() -> Self {
        Self {
            cap: DEFAULT_PROFILE_CAP,
        }
    }
}

impl Oracle {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_cap(cap: u64) -> Self {
        Self { cap }
    }

    fn guard(&self, instance: &GameInstance) -> Result<()> {
        let mut product: u128 = 1;
        for i in 0..instance.num_agents() {
            product = product.saturating_mul(instance.actions(i).len() as u128);
            if product > self.cap as u128 {
                return Err(Error::Capacity(format!(
                    "profile space exceeds cap {} (at least {product} profiles)",
                    self.cap
                )));
            }
        }
        Ok(())
    }

    fn for_each_profile<F: FnMut(&Allocation)>(
        &self,
        instance: &GameInstance,
        mut visit: F,
    ) -> Result<()> {
        self.guard(instance)?;
        let n = instance.num_agents();
        let radix: Vec<usize> = (0..n).map(|i| instance.actions(i).len()).collect();
        let mut choices = vec![0usize; n];
        loop {
            let a = Allocation::new(instance, choices.clone())
                .expect("odometer stays within action bounds");
            visit(&a);
            // increment with the last agent fastest: lexicographic order
            let mut pos = n;
            while pos > 0 {
                pos -= 1;
                choices[pos] += 1;
                if choices[pos] < radix[pos] {
                    break;
                }
                choices[pos] = 0;
                if pos == 0 {
                    return Ok(());
                }
            }
        }
    }

    /// Global welfare maximizer; first profile in lexicographic order on
    /// ties.
    pub fn exact_optimum(&self, instance: &GameInstance) -> Result<(Allocation, f64)> {
        let mut best: Option<(Allocation, f64)> = None;
        self.for_each_profile(instance, |a| {
            let w = instance.welfare(a);
            if best.as_ref().is_none_or(|(_, bw)| w > *bw) {
                best = Some((a.clone(), w));
            }
        })?;
        Ok(best.expect("action sets are nonempty"))
    }

    /// Every pure Nash equilibrium, in lexicographic profile order.
    /// Nonempty for any valid instance: the potential maximizer is one.
    pub fn all_nash(&self, instance: &GameInstance) -> Result<Vec<Allocation>> {
        let mut out = Vec::new();
        self.for_each_profile(instance, |a| {
            if instance.is_nash(a).is_equilibrium {
                out.push(a.clone());
            }
        })?;
        Ok(out)
    }

    /// The welfare-minimizing equilibrium.
    pub fn worst_nash(&self, instance: &GameInstance) -> Result<(Allocation, f64)> {
        let mut worst: Option<(Allocation, f64)> = None;
        self.for_each_profile(instance, |a| {
            if instance.is_nash(a).is_equilibrium {
                let w = instance.welfare(a);
                if worst.as_ref().is_none_or(|(_, bw)| w < *bw) {
                    worst = Some((a.clone(), w));
                }
            }
        })?;
        worst.ok_or_else(|| {
            Error::Internal("no pure equilibrium found; the potential maximizer must be one".into())
        })
    }

    /// Worst-equilibrium welfare over the optimum, in `(0, 1]` for any
    /// instance satisfying the standing assumptions.
    pub fn instance_efficiency(&self, instance: &GameInstance) -> Result<f64> {
        let (_, opt) = self.exact_optimum(instance)?;
        if opt <= 0.0 {
            return Err(Error::Precondition(
                "optimal welfare is zero; instance violates the standing assumptions".into(),
            ));
        }
        let (_, worst) = self.worst_nash(instance)?;
        Ok(worst / opt)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::fixtures::{alloc, two_resource_instance};
    use crate::game::WelfareBasis;
    use crate::rules;

    #[test]
    fn optimum_splits_agents_across_resources() {
        let inst = two_resource_instance();
        let (a, w) = Oracle::new().exact_optimum(&inst).unwrap();
        assert_eq!(a.choices(), &[0, 1]); // lexicographic winner among the two splits
        assert!((w - 1.4).abs() < 1e-15);
    }

    #[test]
    fn single_agent_optimum_is_best_action() {
        let basis = WelfareBasis::covering(1);
        let rule = rules::shapley(1).unwrap();
        let inst = crate::game::GameInstance::new(
            vec![0.3, 0.9],
            vec![vec![vec![0], vec![1]]],
            basis,
            rule,
        )
        .unwrap();
        let (a, w) = Oracle::new().exact_optimum(&inst).unwrap();
        assert_eq!(a.choices(), &[1]);
        assert!((w - 0.9).abs() < 1e-15);
        assert!((Oracle::new().instance_efficiency(&inst).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn zero_values_except_one_reachable() {
        let basis = WelfareBasis::covering(2);
        let rule = rules::shapley(2).unwrap();
        let inst = crate::game::GameInstance::new(
            vec![0.0, 0.6, 0.0],
            vec![vec![vec![0], vec![1]], vec![vec![2]]],
            basis,
            rule,
        )
        .unwrap();
        let (a, w) = Oracle::new().exact_optimum(&inst).unwrap();
        assert!((w - 0.6).abs() < 1e-15);
        assert!(a.coverage()[1] > 0);
    }

    #[test]
    fn unique_equilibrium_on_fixture() {
        let inst = two_resource_instance();
        let oracle = Oracle::new();
        let nash = oracle.all_nash(&inst).unwrap();
        assert_eq!(nash.len(), 1);
        assert_eq!(nash[0].choices(), &[0, 0]);
        let (worst, w) = oracle.worst_nash(&inst).unwrap();
        assert_eq!(worst.choices(), &[0, 0]);
        assert!((w - 1.0).abs() < 1e-15);
        let eff = oracle.instance_efficiency(&inst).unwrap();
        assert!((eff - 5.0 / 7.0).abs() < 1e-12);
    }

    #[test]
    fn potential_maximizer_is_listed() {
        let inst = two_resource_instance();
        let oracle = Oracle::new();
        // enumerate potentials by hand over the four profiles
        let mut best: Option<(Vec<usize>, f64)> = None;
        for p in [[0, 0], [0, 1], [1, 0], [1, 1]] {
            let phi = inst.potential(&alloc(&inst, &p));
            if best.as_ref().is_none_or(|(_, b)| phi > *b) {
                best = Some((p.to_vec(), phi));
            }
        }
        let (argmax, _) = best.unwrap();
        let nash = oracle.all_nash(&inst).unwrap();
        assert!(nash.iter().any(|a| a.choices() == argmax.as_slice()));
    }

    #[test]
    fn worst_case_family_ratio() {
        // two agents, shared high-value resource vs private alternative:
        // the equilibrium piles both on the shared one
        let inst = two_resource_instance();
        let eff = Oracle::new().instance_efficiency(&inst).unwrap();
        assert!(eff <= 1.0);
        assert!(eff > 0.0);
    }

    #[test]
    fn cap_is_enforced() {
        let inst = two_resource_instance(); // 4 profiles
        let small = Oracle::with_cap(3);
        assert!(matches!(
            small.exact_optimum(&inst),
            Err(Error::Capacity(_))
        ));
        assert!(Oracle::with_cap(4).exact_optimum(&inst).is_ok());
    }
}
