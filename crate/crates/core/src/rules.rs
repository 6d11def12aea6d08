//! Constructors for the named distribution rules and structural predicates
//! used to route price-of-anarchy computations.

use crate::error::{Error, Result};
use crate::game::{DistributionRule, WelfareBasis};

const CLASSIFY_TOL: f64 = 1e-12;

/// Equal-split rule `f(j) = 1/j`. Budget balanced: utilities sum to welfare.
pub fn shapley(n: usize) -> Result<DistributionRule> {
    if n == 0 {
        return Err(Error::InvalidArgument("shapley requires n >= 1".into()));
    }
    DistributionRule::new((1..=n).map(|j| 1.0 / j as f64).collect())
}

/// Marginal-contribution rule `f(j) = 1 - w(j-1)/w(j)`.
///
/// With this rule an agent's utility equals the welfare increment its
/// presence creates. Representable (nonnegative) exactly when `w` is
/// non-decreasing.
pub fn marginal_contribution(w: &WelfareBasis) -> Result<DistributionRule> {
    let n = w.n();
    DistributionRule::new((1..=n).map(|j| 1.0 - w.get(j - 1) / w.get(j)).collect()).map_err(
        |_| {
            Error::Precondition(
                "marginal contribution needs a non-decreasing basis (else some share is \
                 negative)"
                    .into(),
            )
        },
    )
}

/// Backward recursion shared by the Gairing rule and its closed-form
/// price of anarchy. Returns `q[0..n]` with `q[n-1] = 1/(n-1)` and
/// `q[j-1] = (q[j] + 1)/j`; every `q[j]` equals `j! * (kappa + S_{j+1})`
/// where `kappa = 1/((n-1)(n-1)!)` and `S_j = sum_{i=j}^{n-1} 1/i!`.
///
/// All intermediates stay O(1), so the evaluation neither overflows nor
/// underflows for large `n` where raw factorials would.
pub(crate) fn gairing_terms(n: usize) -> Vec<f64> {
    debug_assert!(n >= 2);
    let mut q = vec![0.0; n];
    q[n - 1] = 1.0 / (n - 1) as f64;
    for j in (1..n).rev() {
        q[j - 1] = (q[j] + 1.0) / j as f64;
    }
    q
}

/// The factorial-sum rule that is optimal for covering welfare:
///
/// `f_G(j) = (j-1)! * (1/((n-1)(n-1)!) + sum_{i=j}^{n-1} 1/i!)
///         / (1/((n-1)(n-1)!) + sum_{i=1}^{n-1} 1/i!)`.
///
/// Evaluated through the ratio recursion of [`gairing_terms`], never through
/// raw factorials.
pub fn gairing(n: usize) -> Result<DistributionRule> {
    if n < 2 {
        return Err(Error::InvalidArgument("gairing requires n >= 2".into()));
    }
    let q = gairing_terms(n);
    let mut f = Vec::with_capacity(n);
    f.push(1.0);
    for j in 1..n {
        let prev = f[j - 1];
        f.push(prev * q[j] / q[j - 1]);
    }
    DistributionRule::new(f)
}

/// Structural predicates of a rule relative to a basis. These gate the
/// reduced dual program and the explicit submodular / supermodular formulas.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RuleClassification {
    /// `f(j)w(j)` non-increasing on `[1, n]`.
    pub fw_nonincreasing: bool,
    /// `f(j) >= f_MC(j)` pointwise on `[1, n]`.
    pub dominates_marginal_contribution: bool,
    /// `f(j)` non-increasing on `[1, n]`.
    pub f_nonincreasing: bool,
    /// `f(j)w(j) >= 1` pointwise on `[1, n]`.
    pub fw_at_least_one: bool,
}

/// Computes the predicate record for `f` against `w`.
pub fn classify_rule(f: &DistributionRule, w: &WelfareBasis) -> Result<RuleClassification> {
    if f.n() != w.n() {
        return Err(Error::InvalidArgument(format!(
            "rule n = {} does not match basis n = {}",
            f.n(),
            w.n()
        )));
    }
    let n = f.n();
    let tol = |x: f64| CLASSIFY_TOL * x.abs().max(1.0);

    let mut fw_nonincreasing = true;
    let mut f_nonincreasing = true;
    for j in 1..n {
        let cur = f.get(j) * w.get(j);
        let next = f.get(j + 1) * w.get(j + 1);
        if next > cur + tol(cur) {
            fw_nonincreasing = false;
        }
        if f.get(j + 1) > f.get(j) + tol(f.get(j)) {
            f_nonincreasing = false;
        }
    }
    // f(j) >= 1 - w(j-1)/w(j), compared in product form so the predicate
    // stays meaningful (and panic-free) for non-monotone bases too
    let dominates_marginal_contribution = (1..=n).all(|j| {
        let increment = w.get(j) - w.get(j - 1);
        f.get(j) * w.get(j) >= increment - tol(increment)
    });
    let fw_at_least_one = (1..=n).all(|j| f.get(j) * w.get(j) >= 1.0 - CLASSIFY_TOL);

    Ok(RuleClassification {
        fw_nonincreasing,
        dominates_marginal_contribution,
        f_nonincreasing,
        fw_at_least_one,
    })
}
