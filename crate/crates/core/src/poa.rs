//! Exact price-of-anarchy programs and reconstruction of tight worst-case
//! instances.
//!
//! The price of anarchy of a distribution rule `f` against a basis `w` over
//! all games with at most `n` agents equals `1/W*`, where `W*` is the value
//! of a linear program over variables indexed by integer triples `(a, x, b)`:
//! for a resource, `a` counts agents covering it only at equilibrium, `b`
//! only at the optimum, and `x` at both. The primal maximizes the optimal
//! welfare subject to an aggregated equilibrium inequality and a unit
//! equilibrium-welfare normalization; the dual certifies the same value with
//! two scalars `(lambda, mu)` and one constraint per boundary triple.

use crate::error::{Error, Result};
use crate::game::{Allocation, DistributionRule, GameInstance, WelfareBasis};
use crate::lp::{self, LinearProgram, Relation, Sense, SolveStatus};
use crate::rules;

/// Tolerance used when checking a theta vector against the primal rows.
const THETA_FEAS_TOL: f64 = 1e-7;

/// Index triple `(a, x, b)`: per-resource counts of equilibrium-only,
/// shared, and optimum-only covering agents.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct IndexTriple {
    pub a: usize,
    pub x: usize,
    pub b: usize,
}

impl IndexTriple {
    pub fn sum(&self) -> usize {
        self.a + self.x + self.b
    }

    /// Membership in the reduced set: on a boundary plane of the pyramid.
    pub fn on_boundary(&self, n: usize) -> bool {
        self.a * self.x * self.b == 0 || self.sum() == n
    }
}

/// Enumerates `I = {(a,x,b) : 1 <= a+x+b <= n}` in lexicographic order
/// `(a, then x, then b)`. The order is part of the contract: theta vectors
/// are reproducible across runs.
pub fn index_set_i(n: usize) -> Vec<IndexTriple> {
    let mut out = Vec::new();
    for a in 0..=n {
        for x in 0..=(n - a) {
            for b in 0..=(n - a - x) {
                if a + x + b >= 1 {
                    out.push(IndexTriple { a, x, b });
                }
            }
        }
    }
    out
}

/// Enumerates `I_R`, the triples of `I` lying on the planes `a = 0`,
/// `x = 0`, `b = 0` or `a + x + b = n`, in the same lexicographic order.
pub fn index_set_i_r(n: usize) -> Vec<IndexTriple> {
    index_set_i(n)
        .into_iter()
        .filter(|t| t.on_boundary(n))
        .collect()
}

/// Per-triple coefficients of the primal program:
/// objective `c`, equilibrium row `d`, normalization row `e`.
fn triple_coeffs(t: IndexTriple, f: &DistributionRule, w: &WelfareBasis) -> (f64, f64, f64) {
    let c = if t.b + t.x >= 1 { w.get(t.b + t.x) } else { 0.0 };
    let d = t.a as f64 * f.get(t.a + t.x) * w.get(t.a + t.x)
        - t.b as f64 * f.get(t.a + t.x + 1) * w.get(t.a + t.x + 1);
    let e = if t.a + t.x >= 1 { w.get(t.a + t.x) } else { 0.0 };
    (c, d, e)
}

fn check_inputs(f: &DistributionRule, w: &WelfareBasis) -> Result<usize> {
    if f.n() != w.n() {
        return Err(Error::Structural(format!(
            "rule n = {} does not match basis n = {}",
            f.n(),
            w.n()
        )));
    }
    if !f.is_class_f() {
        return Err(Error::Precondition(format!(
            "f(1) = {} < 1: rule is not in the admissible class",
            f.get(1)
        )));
    }
    Ok(f.n())
}

/// A candidate solution of the primal program: one value per triple of `I`,
/// in enumeration order.
#[derive(Debug, Clone)]
pub struct ThetaSolution {
    n: usize,
    triples: Vec<IndexTriple>,
    values: Vec<f64>,
}

impl ThetaSolution {
    pub fn new(n: usize, values: Vec<f64>) -> Result<Self> {
        let triples = index_set_i(n);
        if values.len() != triples.len() {
            return Err(Error::Structural(format!(
                "theta has {} entries, |I| = {} for n = {}",
                values.len(),
                triples.len(),
                n
            )));
        }
        if values.iter().any(|&v| !v.is_finite() || v < -1e-12) {
            return Err(Error::Structural("theta entries must be nonnegative".into()));
        }
        Ok(Self { n, triples, values })
    }

    /// Builds a theta vector from sparse `(triple, value)` pairs.
    pub fn from_entries(n: usize, entries: &[(IndexTriple, f64)]) -> Result<Self> {
        let triples = index_set_i(n);
        let mut values = vec![0.0; triples.len()];
        for &(t, v) in entries {
            let pos = triples
                .binary_search(&t)
                .map_err(|_| Error::Structural(format!("triple {t:?} not in I for n = {n}")))?;
            values[pos] = v;
        }
        Self::new(n, values)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, t: IndexTriple) -> f64 {
        match self.triples.binary_search(&t) {
            Ok(pos) => self.values[pos],
            Err(_) => 0.0,
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (IndexTriple, f64)> + '_ {
        self.triples.iter().copied().zip(self.values.iter().copied())
    }

    /// Objective value and the two row values against `(f, w)`.
    /// Returns `(objective, equilibrium_lhs, normalization_lhs)`.
    pub fn evaluate(&self, f: &DistributionRule, w: &WelfareBasis) -> (f64, f64, f64) {
        let mut obj = 0.0;
        let mut eq = 0.0;
        let mut norm = 0.0;
        for (t, v) in self.iter() {
            let (c, d, e) = triple_coeffs(t, f, w);
            obj += c * v;
            eq += d * v;
            norm += e * v;
        }
        (obj, eq, norm)
    }

    /// Whether the vector satisfies both primal rows within tolerance.
    pub fn is_feasible(&self, f: &DistributionRule, w: &WelfareBasis) -> bool {
        let (_, eq, norm) = self.evaluate(f, w);
        eq >= -THETA_FEAS_TOL && (norm - 1.0).abs() <= THETA_FEAS_TOL
    }
}

/// Primal program: maximize optimal welfare over theta, subject to the
/// aggregated equilibrium inequality and unit equilibrium welfare.
/// One variable per triple of `I`, two rows.
pub fn primal_lp(f: &DistributionRule, w: &WelfareBasis) -> Result<LinearProgram> {
    let n = check_inputs(f, w)?;
    let triples = index_set_i(n);
    let mut lp = LinearProgram::new(triples.len(), Sense::Maximize);
    let mut eq_row = vec![0.0; triples.len()];
    let mut norm_row = vec![0.0; triples.len()];
    for (col, &t) in triples.iter().enumerate() {
        let (c, d, e) = triple_coeffs(t, f, w);
        lp.set_objective(col, c);
        eq_row[col] = d;
        norm_row[col] = e;
    }
    lp.add_constraint(eq_row, Relation::Ge, 0.0);
    lp.add_constraint(norm_row, Relation::Eq, 1.0);
    Ok(lp)
}

/// Dual program: minimize `mu` over `(lambda >= 0, mu free)` subject to one
/// constraint per triple of `I_R`. Variable order is `[lambda, mu]`.
pub fn dual_lp(f: &DistributionRule, w: &WelfareBasis) -> Result<LinearProgram> {
    let n = check_inputs(f, w)?;
    let mut lp = LinearProgram::new(2, Sense::Minimize);
    lp.set_objective(1, 1.0);
    lp.set_free(1);
    for t in index_set_i_r(n) {
        let (c, d, e) = triple_coeffs(t, f, w);
        // c - mu*e + lambda*d <= 0
        lp.add_constraint(vec![d, -e], Relation::Le, -c);
    }
    Ok(lp)
}

/// Reduced dual for `f(j)w(j)` non-increasing: the boundary-triple rows
/// collapse onto pairs `(j, l)` with `j = a+x`, `l = b+x`. Rows with `j = 0`
/// are pure lower bounds on `lambda` and are folded into the variable bound,
/// leaving `n^2 + n` constraint rows (`j` in `[1,n]`, `l` in `[0,n]`).
pub fn reduced_dual_lp(f: &DistributionRule, w: &WelfareBasis) -> Result<LinearProgram> {
    let n = check_inputs(f, w)?;
    let class = rules::classify_rule(f, w)?;
    if !class.fw_nonincreasing {
        return Err(Error::Precondition(
            "reduced dual requires f(j)w(j) non-increasing on [1, n]".into(),
        ));
    }
    let mut lp = LinearProgram::new(2, Sense::Minimize);
    lp.set_objective(1, 1.0);
    lp.set_free(1);
    // j = 0 rows: lambda >= w(l) / (l f(1) w(1)) for l in [1, n].
    let lambda_lower = (1..=n)
        .map(|l| w.get(l) / (l as f64 * f.get(1) * w.get(1)))
        .fold(f64::NEG_INFINITY, f64::max);
    lp.set_bounds(0, lambda_lower, f64::INFINITY);
    for j in 1..=n {
        for l in 0..=n {
            let kick = if j + l <= n {
                j as f64 * f.get(j) * w.get(j) - l as f64 * f.get(j + 1) * w.get(j + 1)
            } else {
                (n - l) as f64 * f.get(j) * w.get(j)
                    - (n - j) as f64 * f.get(j + 1) * w.get(j + 1)
            };
            // mu*w(j) - lambda*kick >= w(l)
            lp.add_constraint(vec![-kick, w.get(j)], Relation::Ge, w.get(l));
        }
    }
    Ok(lp)
}

/// Closed form for the optimal dual `lambda` when `f(j)w(j)` is
/// non-increasing and `f(j) >= f(1)w(1) min_l(l/w(l)) / j` for all `j`:
/// `lambda* = max_l w(l) / (l f(1) w(1))`.
pub fn lambda_star(f: &DistributionRule, w: &WelfareBasis) -> Result<f64> {
    let n = check_inputs(f, w)?;
    let class = rules::classify_rule(f, w)?;
    if !class.fw_nonincreasing {
        return Err(Error::Precondition(
            "lambda* requires f(j)w(j) non-increasing on [1, n]".into(),
        ));
    }
    let min_ratio = (1..=n)
        .map(|l| l as f64 / w.get(l))
        .fold(f64::INFINITY, f64::min);
    for j in 1..=n {
        if f.get(j) < f.get(1) * w.get(1) * min_ratio / j as f64 - 1e-12 {
            return Err(Error::Precondition(format!(
                "lambda* requires f(j) >= f(1)w(1) min_l(l/w(l))/j; fails at j = {j}"
            )));
        }
    }
    Ok((1..=n)
        .map(|l| w.get(l) / (l as f64 * f.get(1) * w.get(1)))
        .fold(f64::NEG_INFINITY, f64::max))
}

/// Which program to run for a price-of-anarchy value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Primal,
    Dual,
    ReducedDual,
    /// Reduced dual when its precondition holds, otherwise the full dual.
    Auto,
}

/// Tag recording how a report's value was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MethodTag {
    Primal,
    Dual,
    ReducedDual,
    ClosedForm,
}

impl std::fmt::Display for MethodTag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            MethodTag::Primal => "primal",
            MethodTag::Dual => "dual",
            MethodTag::ReducedDual => "reduced-dual",
            MethodTag::ClosedForm => "closed-form",
        };
        f.write_str(s)
    }
}

/// A worst-case certificate: a game instance whose equilibrium attains the
/// price of anarchy exactly.
#[derive(Debug, Clone)]
pub struct WorstCaseWitness {
    pub instance: GameInstance,
    pub equilibrium: Allocation,
    pub optimal: Allocation,
}

/// Certified price of anarchy for a `(rule, basis, n)` triple.
#[derive(Debug, Clone)]
pub struct PoAReport {
    pub n: usize,
    pub rule: DistributionRule,
    pub basis: WelfareBasis,
    pub w_star: f64,
    pub poa: f64,
    pub method: MethodTag,
    pub lambda: Option<f64>,
    pub mu: Option<f64>,
    pub witness: Option<WorstCaseWitness>,
}

impl PoAReport {
    pub(crate) fn new(
        rule: &DistributionRule,
        basis: &WelfareBasis,
        w_star: f64,
        method: MethodTag,
        lambda: Option<f64>,
        mu: Option<f64>,
    ) -> Result<Self> {
        if !w_star.is_finite() || w_star < 1.0 - 1e-7 {
            return Err(Error::Internal(format!(
                "computed W* = {w_star}; the unit-welfare feasible point forces W* >= 1"
            )));
        }
        Ok(Self {
            n: rule.n(),
            rule: rule.clone(),
            basis: basis.clone(),
            w_star,
            poa: 1.0 / w_star,
            method,
            lambda,
            mu,
            witness: None,
        })
    }
}

fn solve_expect_optimal(program: &LinearProgram, what: &str) -> Result<lp::SolveResult> {
    let r = lp::solve(program)?;
    if r.status != SolveStatus::Optimal {
        return Err(Error::Internal(format!(
            "{what} solved to {:?}; it must be feasible and bounded for valid inputs",
            r.status
        )));
    }
    Ok(r)
}

/// Computes the price of anarchy of `f` against `w` with the selected
/// program. `Auto` picks the reduced dual when `f(j)w(j)` is non-increasing
/// and the full dual otherwise.
pub fn compute_poa(f: &DistributionRule, w: &WelfareBasis, method: Method) -> Result<PoAReport> {
    let resolved = match method {
        Method::Auto => {
            if rules::classify_rule(f, w)?.fw_nonincreasing {
                Method::ReducedDual
            } else {
                Method::Dual
            }
        }
        m => m,
    };
    match resolved {
        Method::Primal => {
            let r = solve_expect_optimal(&primal_lp(f, w)?, "primal program")?;
            let duals = r.duals.as_ref().expect("optimal solve carries duals");
            // The equilibrium row is a >= row of a maximization, so its
            // multiplier is -lambda; the normalization multiplier is mu.
            PoAReport::new(
                f,
                w,
                r.objective,
                MethodTag::Primal,
                Some(-duals[0]),
                Some(duals[1]),
            )
        }
        Method::Dual => {
            let r = solve_expect_optimal(&dual_lp(f, w)?, "dual program")?;
            PoAReport::new(
                f,
                w,
                r.objective,
                MethodTag::Dual,
                Some(r.primal[0]),
                Some(r.primal[1]),
            )
        }
        Method::ReducedDual => {
            let r = solve_expect_optimal(&reduced_dual_lp(f, w)?, "reduced dual program")?;
            PoAReport::new(
                f,
                w,
                r.objective,
                MethodTag::ReducedDual,
                Some(r.primal[0]),
                Some(r.primal[1]),
            )
        }
        Method::Auto => unreachable!(),
    }
}

/// Like [`compute_poa`], but additionally solves the primal for a theta
/// vector and attaches the reconstructed worst-case instance.
pub fn compute_poa_with_witness(
    f: &DistributionRule,
    w: &WelfareBasis,
    method: Method,
) -> Result<PoAReport> {
    let mut report = compute_poa(f, w, method)?;
    let theta = optimal_theta(f, w)?;
    let (instance, equilibrium, optimal) = reconstruct_worst_case(&theta, f, w)?;
    report.witness = Some(WorstCaseWitness {
        instance,
        equilibrium,
        optimal,
    });
    Ok(report)
}

/// Solves the primal program and returns the maximizing theta vector.
pub fn optimal_theta(f: &DistributionRule, w: &WelfareBasis) -> Result<ThetaSolution> {
    let n = check_inputs(f, w)?;
    let r = solve_expect_optimal(&primal_lp(f, w)?, "primal program")?;
    ThetaSolution::new(n, r.primal)
}

/// Builds the game instance encoded by a feasible theta vector, together
/// with its equilibrium and optimal allocations.
///
/// For every triple with positive mass and every agent slot `j` a resource
/// `r(a,x,b,j)` valued `theta/n` is created. In the cyclic coordinate
/// `s = (j - i) mod n`, agent `i`'s equilibrium action takes the window
/// `s < a + x` and its optimal action the window `a <= s < a + x + b`
/// (no wraparound since `a + x + b <= n`). Each resource is then covered by
/// exactly `a+x` agents at equilibrium and `b+x` at the optimum, and a
/// unilateral switch moves exactly `a` resources down one coverer and `b`
/// resources up one, so the potential drop of any deviation equals the
/// equilibrium row of `theta` divided by `n` and is nonnegative: the
/// equilibrium allocation is a pure Nash equilibrium by construction.
/// The equilibrium welfare equals the normalization row (= 1) and the
/// optimal welfare equals the primal objective of `theta`.
pub fn reconstruct_worst_case(
    theta: &ThetaSolution,
    f: &DistributionRule,
    w: &WelfareBasis,
) -> Result<(GameInstance, Allocation, Allocation)> {
    let n = check_inputs(f, w)?;
    if theta.n() != n {
        return Err(Error::Structural(format!(
            "theta has n = {}, rule/basis have n = {n}",
            theta.n()
        )));
    }
    if !theta.is_feasible(f, w) {
        let (_, eq, norm) = theta.evaluate(f, w);
        return Err(Error::Precondition(format!(
            "theta is not primal-feasible: equilibrium row = {eq}, normalization = {norm}"
        )));
    }

    let positive: Vec<(IndexTriple, f64)> = theta.iter().filter(|&(_, v)| v > 0.0).collect();
    let mut values = Vec::with_capacity(positive.len() * n);
    for &(_, v) in &positive {
        for _ in 0..n {
            values.push(v / n as f64);
        }
    }

    let mut action_sets = Vec::with_capacity(n);
    for i in 0..n {
        let mut eq_action = Vec::new();
        let mut opt_action = Vec::new();
        for (k, &(t, _)) in positive.iter().enumerate() {
            for j in 0..n {
                let r = k * n + j;
                let s = (n + j - i) % n;
                if s < t.a + t.x {
                    eq_action.push(r);
                }
                if s >= t.a && s < t.a + t.x + t.b {
                    opt_action.push(r);
                }
            }
        }
        action_sets.push(vec![eq_action, opt_action]);
    }

    let instance = GameInstance::new(values, action_sets, w.clone(), f.clone())?;
    let equilibrium = Allocation::new(&instance, vec![0; n])?;
    let optimal = Allocation::new(&instance, vec![1; n])?;
    Ok((instance, equilibrium, optimal))
}

/// Best efficiency bound the smoothness framework can certify for covering
/// welfare: `b(n) = 1 / (2 - 1/n)`.
pub fn smoothness_bound(n: usize) -> f64 {
    assert!(n >= 1);
    1.0 / (2.0 - 1.0 / n as f64)
}

/// Outcome of a pointwise smoothness check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmoothnessCheck {
    /// `sum_i u_i(a'_i, a_{-i}) >= lambda W(a') - mu W(a)` for this pair.
    pub holds: bool,
    pub deviation_utility_sum: f64,
    pub bound: f64,
    /// Whether `j f(j) <= 1` on `[1, n]`; without it the smoothness
    /// efficiency bound `lambda/(1+mu)` is not meaningful.
    pub sub_budget_balanced: bool,
}

/// Checks the smoothness inequality for one profile pair.
pub fn smoothness_check(
    instance: &GameInstance,
    deviation: &Allocation,
    base: &Allocation,
    lambda: f64,
    mu: f64,
) -> SmoothnessCheck {
    let f = instance.rule();
    let sub_budget_balanced = (1..=f.n()).all(|j| j as f64 * f.get(j) <= 1.0 + 1e-12);

    let mut sum = 0.0;
    for i in 0..instance.num_agents() {
        sum += instance.deviation_utility(base, i, deviation.choices()[i]);
    }
    let bound = lambda * instance.welfare(deviation) - mu * instance.welfare(base);
    let tol = 1e-12 * sum.abs().max(bound.abs()).max(1.0);
    SmoothnessCheck {
        holds: sum >= bound - tol,
        deviation_utility_sum: sum,
        bound,
        sub_budget_balanced,
    }
}
