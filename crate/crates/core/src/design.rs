//! Synthesis of the distribution rule maximizing the price of anarchy.
//!
//! The design problem `argmax_f PoA(f)` is linear once the dual multiplier
//! is folded into the rule: substituting `g = lambda * f` turns the dual
//! constraints into rows that are jointly linear in `(g, mu)`, and the
//! boundary row for a lone optimum agent pins `g(1) >= 1`. The returned rule
//! is the folded one; since equilibria are invariant to positive rescaling
//! of utilities, it is itself admissible and attains `PoA = 1/mu*`.

use crate::error::{Error, Result};
use crate::game::{DistributionRule, WelfareBasis};
use crate::lp::{self, LinearProgram, Relation, Sense, SolveStatus};
use crate::poa::{index_set_i_r, MethodTag, PoAReport};
use crate::rules::marginal_contribution;

fn solve_design(program: &LinearProgram, what: &str) -> Result<lp::SolveResult> {
    let r = lp::solve(program)?;
    if r.status != SolveStatus::Optimal {
        return Err(Error::Internal(format!(
            "{what} design program solved to {:?}; it is feasible and bounded for any valid basis",
            r.status
        )));
    }
    Ok(r)
}

fn rule_from_primal(primal: &[f64], n: usize) -> Result<DistributionRule> {
    DistributionRule::new(primal[..n].to_vec())
}

/// Optimal rule over the whole admissible class, for any valid basis.
///
/// Minimizes `mu` over `(g, mu)` with `g(1) >= 1, g >= 0` subject to the
/// boundary-triple rows
/// `c - mu*e + a g(a+x) w(a+x) - b g(a+x+1) w(a+x+1) <= 0`.
pub fn optimal_rule(w: &WelfareBasis) -> Result<(DistributionRule, PoAReport)> {
    let n = w.n();
    // variables: g(1)..g(n), mu
    let mut program = LinearProgram::new(n + 1, Sense::Minimize);
    program.set_objective(n, 1.0);
    program.set_free(n);
    program.set_bounds(0, 1.0, f64::INFINITY);
    for t in index_set_i_r(n) {
        let mut coeffs = vec![0.0; n + 1];
        let eq_cov = t.a + t.x;
        if (1..=n).contains(&eq_cov) {
            coeffs[eq_cov - 1] += t.a as f64 * w.get(eq_cov);
        }
        if eq_cov < n {
            coeffs[eq_cov] -= t.b as f64 * w.get(eq_cov + 1);
        }
        let c = if t.b + t.x >= 1 { w.get(t.b + t.x) } else { 0.0 };
        let e = if eq_cov >= 1 { w.get(eq_cov) } else { 0.0 };
        coeffs[n] = -e;
        program.add_constraint(coeffs, Relation::Le, -c);
    }
    let r = solve_design(&program, "general")?;
    let rule = rule_from_primal(&r.primal, n)?;
    let mut report = PoAReport::new(&rule, w, r.objective, MethodTag::Dual, Some(1.0), None)?;
    report.mu = Some(r.objective);
    Ok((rule, report))
}

/// Optimal rule restricted to the submodular-friendly class (`f >= f_MC`,
/// `f(j)w(j)` non-increasing), for non-decreasing concave `w` with
/// `w(1) = 1`. Uses the pair-indexed constraint families with the dual
/// multiplier pinned at one.
pub fn optimal_rule_submodular(w: &WelfareBasis) -> Result<(DistributionRule, PoAReport)> {
    if !w.is_nondecreasing_concave() {
        return Err(Error::Precondition(
            "submodular design requires a non-decreasing concave basis".into(),
        ));
    }
    if (w.get(1) - 1.0).abs() > 1e-9 {
        return Err(Error::Precondition(
            "submodular design requires w(1) = 1; use WelfareBasis::normalized".into(),
        ));
    }
    let n = w.n();
    let mc = marginal_contribution(w).expect("concave bases are non-decreasing");
    // variables: f(1)..f(n), mu
    let mut program = LinearProgram::new(n + 1, Sense::Minimize);
    program.set_objective(n, 1.0);
    program.set_free(n);
    for j in 1..=n {
        program.set_bounds(j - 1, mc.get(j), f64::INFINITY);
    }
    // f(j+1)w(j+1) <= f(j)w(j); the j = n case is trivial by extension
    for j in 1..n {
        let mut coeffs = vec![0.0; n + 1];
        coeffs[j] = w.get(j + 1);
        coeffs[j - 1] = -w.get(j);
        program.add_constraint(coeffs, Relation::Le, 0.0);
    }
    // mu w(j) >= w(l) + min(j, n-l) f(j) w(j) - min(l, n-j) f(j+1) w(j+1)
    for j in 1..=n {
        for l in 0..=j {
            let mut coeffs = vec![0.0; n + 1];
            coeffs[n] = w.get(j);
            coeffs[j - 1] -= j.min(n - l) as f64 * w.get(j);
            if j < n {
                coeffs[j] += l.min(n - j) as f64 * w.get(j + 1);
            }
            program.add_constraint(coeffs, Relation::Ge, w.get(l));
        }
    }
    let r = solve_design(&program, "submodular")?;
    let rule = rule_from_primal(&r.primal, n)?;
    let mut report =
        PoAReport::new(&rule, w, r.objective, MethodTag::ReducedDual, Some(1.0), None)?;
    report.mu = Some(r.objective);
    Ok((rule, report))
}

/// Optimal rule for covering welfare (`w = 1`): the `3(n-1)`-row program
///
/// `min mu  s.t.  mu >= (j+1)f(j+1),  mu >= 1 + j f(j) - f(j+1),
///  mu >= 1 + j f(j+1)` for `j in [n-1]`.
pub fn optimal_rule_covering(n: usize) -> Result<(DistributionRule, PoAReport)> {
    if n < 2 {
        return Err(Error::InvalidArgument(
            "covering design requires n >= 2".into(),
        ));
    }
    // variables: f(1)..f(n), mu
    let mut program = LinearProgram::new(n + 1, Sense::Minimize);
    program.set_objective(n, 1.0);
    program.set_free(n);
    program.set_bounds(0, 1.0, f64::INFINITY);
    for j in 1..n {
        let jf = j as f64;
        let mut c1 = vec![0.0; n + 1];
        c1[n] = 1.0;
        c1[j] = -(jf + 1.0);
        program.add_constraint(c1, Relation::Ge, 0.0);

        let mut c2 = vec![0.0; n + 1];
        c2[n] = 1.0;
        c2[j - 1] = -jf;
        c2[j] = 1.0;
        program.add_constraint(c2, Relation::Ge, 1.0);

        let mut c3 = vec![0.0; n + 1];
        c3[n] = 1.0;
        c3[j] = -jf;
        program.add_constraint(c3, Relation::Ge, 1.0);
    }
    let r = solve_design(&program, "covering")?;
    let rule = rule_from_primal(&r.primal, n)?;
    let w = WelfareBasis::covering(n);
    let mut report =
        PoAReport::new(&rule, &w, r.objective, MethodTag::ReducedDual, Some(1.0), None)?;
    report.mu = Some(r.objective);
    Ok((rule, report))
}
