//! Dense two-phase simplex for the small linear programs built by the
//! price-of-anarchy and design modules.
//!
//! Problem sizes here are tiny but lopsided: either a couple of rows
//! against thousands of columns (the primal efficiency program) or hundreds
//! of rows against a handful of variables (the dual and design programs).
//! A dense tableau is the right tool for the wide case; tall programs are
//! transposed internally and solved through their LP dual, which lands back
//! in the wide case. Pivoting is deterministic throughout: identical input
//! yields identical output bits across runs.

use crate::error::{Error, Result};

/// Feasibility tolerance on constraint residuals.
pub const FEASIBILITY_TOL: f64 = 1e-8;
/// Optimality (reduced-cost) tolerance.
pub const OPTIMALITY_TOL: f64 = 1e-9;
/// Smallest acceptable pivot element.
const PIVOT_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Minimize,
    Maximize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

#[derive(Debug, Clone)]
pub struct Constraint {
    pub coeffs: Vec<f64>,
    pub relation: Relation,
    pub rhs: f64,
}

/// A dense LP: objective, constraint rows and per-variable bounds.
///
/// Variables default to `[0, +inf)`; a lower bound of `-inf` marks a free or
/// upper-bounded variable.
#[derive(Debug, Clone)]
pub struct LinearProgram {
    pub num_vars: usize,
    pub sense: Sense,
    pub objective: Vec<f64>,
    pub constraints: Vec<Constraint>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl LinearProgram {
    pub fn new(num_vars: usize, sense: Sense) -> Self {
        Self {
            num_vars,
            sense,
            objective: vec![0.0; num_vars],
            constraints: Vec::new(),
            lower: vec![0.0; num_vars],
            upper: vec![f64::INFINITY; num_vars],
        }
    }

    pub fn set_objective(&mut self, var: usize, coeff: f64) {
        self.objective[var] = coeff;
    }

    pub fn add_constraint(&mut self, coeffs: Vec<f64>, relation: Relation, rhs: f64) {
        self.constraints.push(Constraint {
            coeffs,
            relation,
            rhs,
        });
    }

    /// Declares `var` free (no sign restriction).
    pub fn set_free(&mut self, var: usize) {
        self.lower[var] = f64::NEG_INFINITY;
        self.upper[var] = f64::INFINITY;
    }

    pub fn set_bounds(&mut self, var: usize, lower: f64, upper: f64) {
        self.lower[var] = lower;
        self.upper[var] = upper;
    }

    fn validate(&self) -> Result<()> {
        if self.objective.len() != self.num_vars
            || self.lower.len() != self.num_vars
            || self.upper.len() != self.num_vars
        {
            return Err(Error::Structural("objective/bounds length mismatch".into()));
        }
        for (i, c) in self.constraints.iter().enumerate() {
            if c.coeffs.len() != self.num_vars {
                return Err(Error::Structural(format!(
                    "constraint {i} has {} coefficients for {} variables",
                    c.coeffs.len(),
                    self.num_vars
                )));
            }
            if !c.rhs.is_finite() || c.coeffs.iter().any(|v| !v.is_finite()) {
                return Err(Error::Structural(format!(
                    "constraint {i} contains a non-finite value"
                )));
            }
        }
        if self.objective.iter().any(|v| !v.is_finite()) {
            return Err(Error::Structural(
                "objective contains a non-finite value".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone)]
pub struct SolveResult {
    pub status: SolveStatus,
    /// Objective value in the caller's sense; NaN unless optimal.
    pub objective: f64,
    /// Values of the caller's variables; empty unless optimal.
    pub primal: Vec<f64>,
    /// One multiplier per caller constraint, signed so that for a problem
    /// with default bounds the dual objective `sum_i duals[i] * rhs[i]`
    /// equals the primal objective. Present iff optimal.
    pub duals: Option<Vec<f64>>,
}

/// How one caller variable maps onto internal nonnegative columns.
#[derive(Debug, Clone, Copy)]
enum VarMap {
    /// `x = lower + y[col]`
    Shifted { col: usize, lower: f64 },
    /// `x = upper - y[col]`
    Mirrored { col: usize, upper: f64 },
    /// `x = y[pos] - y[neg]`
    Split { pos: usize, neg: usize },
}

/// The caller's program rewritten over nonnegative variables as a
/// maximization with rhs-nonnegative rows.
struct InternalForm {
    maps: Vec<VarMap>,
    num_cols: usize,
    /// +1 for a caller maximization, -1 for a minimization.
    sign: f64,
    objective: Vec<f64>,
    obj_const: f64,
    rows: Vec<(Vec<f64>, Relation, f64)>,
    /// -1 where a row was negated to make its rhs nonnegative.
    row_sign: Vec<f64>,
}

enum BuildOutcome {
    Ok(InternalForm),
    /// Crossed variable bounds: trivially infeasible.
    Infeasible,
}

impl InternalForm {
    fn build(lp: &LinearProgram) -> BuildOutcome {
        let mut maps = Vec::with_capacity(lp.num_vars);
        let mut num_cols = 0usize;
        for v in 0..lp.num_vars {
            let (lo, hi) = (lp.lower[v], lp.upper[v]);
            if lo > hi {
                return BuildOutcome::Infeasible;
            }
            if lo.is_finite() {
                maps.push(VarMap::Shifted { col: num_cols, lower: lo });
                num_cols += 1;
            } else if hi.is_finite() {
                maps.push(VarMap::Mirrored { col: num_cols, upper: hi });
                num_cols += 1;
            } else {
                maps.push(VarMap::Split {
                    pos: num_cols,
                    neg: num_cols + 1,
                });
                num_cols += 2;
            }
        }

        let sign = match lp.sense {
            Sense::Maximize => 1.0,
            Sense::Minimize => -1.0,
        };
        let mut objective = vec![0.0; num_cols];
        let mut obj_const = 0.0;
        for (v, map) in maps.iter().enumerate() {
            let c = sign * lp.objective[v];
            match *map {
                VarMap::Shifted { col, lower } => {
                    objective[col] = c;
                    obj_const += c * lower;
                }
                VarMap::Mirrored { col, upper } => {
                    objective[col] = -c;
                    obj_const += c * upper;
                }
                VarMap::Split { pos, neg } => {
                    objective[pos] = c;
                    objective[neg] = -c;
                }
            }
        }

        let mut rows: Vec<(Vec<f64>, Relation, f64)> = Vec::new();
        for c in &lp.constraints {
            let mut coeffs = vec![0.0; num_cols];
            let mut rhs = c.rhs;
            for (v, map) in maps.iter().enumerate() {
                let a = c.coeffs[v];
                if a == 0.0 {
                    continue;
                }
                match *map {
                    VarMap::Shifted { col, lower } => {
                        coeffs[col] = a;
                        rhs -= a * lower;
                    }
                    VarMap::Mirrored { col, upper } => {
                        coeffs[col] = -a;
                        rhs -= a * upper;
                    }
                    VarMap::Split { pos, neg } => {
                        coeffs[pos] = a;
                        coeffs[neg] = -a;
                    }
                }
            }
            rows.push((coeffs, c.relation, rhs));
        }
        // two-sided bounds become explicit upper rows
        for (v, map) in maps.iter().enumerate() {
            if let VarMap::Shifted { col, lower } = *map {
                let hi = lp.upper[v];
                if hi.is_finite() {
                    let mut coeffs = vec![0.0; num_cols];
                    coeffs[col] = 1.0;
                    rows.push((coeffs, Relation::Le, hi - lower));
                }
            }
        }

        let mut row_sign = vec![1.0; rows.len()];
        for (i, (coeffs, relation, rhs)) in rows.iter_mut().enumerate() {
            if *rhs < 0.0 {
                row_sign[i] = -1.0;
                *rhs = -*rhs;
                for a in coeffs.iter_mut() {
                    *a = -*a;
                }
                *relation = match *relation {
                    Relation::Le => Relation::Ge,
                    Relation::Ge => Relation::Le,
                    Relation::Eq => Relation::Eq,
                };
            }
        }

        BuildOutcome::Ok(InternalForm {
            maps,
            num_cols,
            sign,
            objective,
            obj_const,
            rows,
            row_sign,
        })
    }

    /// A tall program (many rows, few columns) is better solved through its
    /// transpose.
    fn is_tall(&self) -> bool {
        self.rows.len() >= 16 && self.rows.len() > 2 * self.num_cols
    }

    /// The LP dual of the internal maximization, as a caller-level program:
    /// `min b'w  s.t.  A'w >= c`, with `w_i >= 0` for `Le` rows, `w_i <= 0`
    /// for `Ge` rows and `w_i` free for `Eq` rows. Its optimal variables are
    /// this program's row multipliers and its row multipliers are this
    /// program's variables.
    fn transposed(&self) -> LinearProgram {
        let m = self.rows.len();
        let mut dual = LinearProgram::new(m, Sense::Minimize);
        for (i, (_, relation, rhs)) in self.rows.iter().enumerate() {
            dual.set_objective(i, *rhs);
            match relation {
                Relation::Le => {}
                Relation::Ge => dual.set_bounds(i, f64::NEG_INFINITY, 0.0),
                Relation::Eq => dual.set_free(i),
            }
        }
        for j in 0..self.num_cols {
            let coeffs: Vec<f64> = self.rows.iter().map(|(a, _, _)| a[j]).collect();
            dual.add_constraint(coeffs, Relation::Ge, self.objective[j]);
        }
        dual
    }
}

/// Outcome of solving the internal form: column values, objective value of
/// the internal maximization, and one multiplier per internal row.
struct InternalOutcome {
    y: Vec<f64>,
    value: f64,
    multipliers: Vec<f64>,
}

/// Solves the program with a deterministic dense two-phase simplex,
/// transposing tall programs internally.
///
/// Infeasible and unbounded are reported as statuses; errors are reserved
/// for malformed input and iteration-cap overruns.
pub fn solve(lp: &LinearProgram) -> Result<SolveResult> {
    solve_with(lp, false)
}

fn solve_with(lp: &LinearProgram, force_direct: bool) -> Result<SolveResult> {
    lp.validate()?;
    let internal = match InternalForm::build(lp) {
        BuildOutcome::Ok(internal) => internal,
        BuildOutcome::Infeasible => return Ok(status_only(SolveStatus::Infeasible)),
    };

    let outcome = if !force_direct && internal.is_tall() {
        match solve_transposed(&internal)? {
            TransposedOutcome::Solved(out) => Some(out),
            TransposedOutcome::PrimalInfeasible => {
                return Ok(status_only(SolveStatus::Infeasible))
            }
            // the transpose cannot tell unbounded from infeasible on this
            // side; fall through to the direct method
            TransposedOutcome::Ambiguous => None,
        }
    } else {
        None
    };
    let outcome = match outcome {
        Some(out) => Some(out),
        None => match solve_direct(&internal)? {
            DirectOutcome::Solved(out) => Some(out),
            DirectOutcome::Status(s) => return Ok(status_only(s)),
        },
    };
    let outcome = outcome.expect("solved outcome present");

    // Recover caller variables.
    let mut primal = Vec::with_capacity(lp.num_vars);
    for map in &internal.maps {
        primal.push(match *map {
            VarMap::Shifted { col, lower } => lower + outcome.y[col],
            VarMap::Mirrored { col, upper } => upper - outcome.y[col],
            VarMap::Split { pos, neg } => outcome.y[pos] - outcome.y[neg],
        });
    }
    let objective_value = internal.sign * (outcome.value + internal.obj_const);

    // Caller duals: multipliers through the row-sign and sense flips.
    let duals = (0..lp.constraints.len())
        .map(|i| internal.sign * internal.row_sign[i] * outcome.multipliers[i])
        .collect::<Vec<_>>();

    // Self-check: an optimal vertex must satisfy every caller constraint.
    for (i, c) in lp.constraints.iter().enumerate() {
        let lhs: f64 = c.coeffs.iter().zip(&primal).map(|(a, x)| a * x).sum();
        let scale = 1.0_f64.max(c.rhs.abs()).max(
            c.coeffs
                .iter()
                .zip(&primal)
                .map(|(a, x)| (a * x).abs())
                .sum(),
        );
        let violated = match c.relation {
            Relation::Le => lhs - c.rhs > FEASIBILITY_TOL * scale,
            Relation::Ge => c.rhs - lhs > FEASIBILITY_TOL * scale,
            Relation::Eq => (lhs - c.rhs).abs() > FEASIBILITY_TOL * scale,
        };
        if violated {
            return Err(Error::Internal(format!(
                "optimal vertex violates constraint {i}: lhs = {lhs}, rhs = {}",
                c.rhs
            )));
        }
    }

    Ok(SolveResult {
        status: SolveStatus::Optimal,
        objective: objective_value,
        primal,
        duals: Some(duals),
    })
}

fn status_only(status: SolveStatus) -> SolveResult {
    SolveResult {
        status,
        objective: f64::NAN,
        primal: Vec::new(),
        duals: None,
    }
}

enum DirectOutcome {
    Solved(InternalOutcome),
    Status(SolveStatus),
}

fn solve_direct(internal: &InternalForm) -> Result<DirectOutcome> {
    let mut tab = Tableau::build(internal.num_cols, &internal.rows, &internal.objective);
    match tab.run(internal.num_cols + internal.rows.len())? {
        SolveStatus::Optimal => Ok(DirectOutcome::Solved(InternalOutcome {
            y: tab.primal(),
            value: tab.objective_value(),
            multipliers: tab.multipliers(),
        })),
        s => Ok(DirectOutcome::Status(s)),
    }
}

enum TransposedOutcome {
    Solved(InternalOutcome),
    PrimalInfeasible,
    Ambiguous,
}

/// Solves the internal maximization through its LP dual (a wide program),
/// recovering columns from the dual's row multipliers and multipliers from
/// the dual's columns.
fn solve_transposed(internal: &InternalForm) -> Result<TransposedOutcome> {
    let dual = internal.transposed();
    let r = solve_with(&dual, true)?;
    match r.status {
        SolveStatus::Optimal => {
            let y: Vec<f64> = r
                .duals
                .as_ref()
                .expect("optimal solve carries duals")
                .iter()
                .map(|&v| v.max(0.0))
                .collect();
            Ok(TransposedOutcome::Solved(InternalOutcome {
                y,
                value: r.objective,
                multipliers: r.primal,
            }))
        }
        // dual unbounded means no feasible primal point exists
        SolveStatus::Unbounded => Ok(TransposedOutcome::PrimalInfeasible),
        SolveStatus::Infeasible => Ok(TransposedOutcome::Ambiguous),
    }
}

struct Tableau {
    /// `m + 1` rows by `total + 1` columns; last row is reduced costs,
    /// last column the rhs.
    t: Vec<Vec<f64>>,
    basis: Vec<usize>,
    num_structural: usize,
    /// First artificial column; artificials never re-enter in phase II.
    artificial_start: usize,
    total: usize,
    /// Initial identity column of each row, for dual recovery.
    id_cols: Vec<usize>,
    objective: Vec<f64>,
}

impl Tableau {
    fn build(num_cols: usize, rows: &[(Vec<f64>, Relation, f64)], objective: &[f64]) -> Self {
        let m = rows.len();
        let n_slack = rows.iter().filter(|r| r.1 == Relation::Le).count();
        let n_surplus = rows.iter().filter(|r| r.1 == Relation::Ge).count();
        let n_artificial = rows.iter().filter(|r| r.1 != Relation::Le).count();
        let total = num_cols + n_slack + n_surplus + n_artificial;
        let artificial_start = num_cols + n_slack + n_surplus;

        let mut t = vec![vec![0.0; total + 1]; m + 1];
        let mut basis = vec![0usize; m];
        let mut id_cols = vec![0usize; m];
        let mut slack = num_cols;
        let mut surplus = num_cols + n_slack;
        let mut artificial = artificial_start;

        for (i, (coeffs, relation, rhs)) in rows.iter().enumerate() {
            t[i][..num_cols].copy_from_slice(coeffs);
            t[i][total] = *rhs;
            match relation {
                Relation::Le => {
                    t[i][slack] = 1.0;
                    basis[i] = slack;
                    id_cols[i] = slack;
                    slack += 1;
                }
                Relation::Ge => {
                    t[i][surplus] = -1.0;
                    surplus += 1;
                    t[i][artificial] = 1.0;
                    basis[i] = artificial;
                    id_cols[i] = artificial;
                    artificial += 1;
                }
                Relation::Eq => {
                    t[i][artificial] = 1.0;
                    basis[i] = artificial;
                    id_cols[i] = artificial;
                    artificial += 1;
                }
            }
        }

        Self {
            t,
            basis,
            num_structural: num_cols,
            artificial_start,
            total,
            id_cols,
            objective: objective.to_vec(),
        }
    }

    fn run(&mut self, problem_size: usize) -> Result<SolveStatus> {
        let m = self.basis.len();
        let bland_after = 10 * problem_size.max(1);

        // Phase I: maximize minus the sum of artificials.
        if self.artificial_start < self.total {
            for col in self.artificial_start..self.total {
                self.t[m][col] = -1.0;
            }
            for i in 0..m {
                if self.basis[i] >= self.artificial_start {
                    let row = self.t[i].clone();
                    for (z, r) in self.t[m].iter_mut().zip(row.iter()) {
                        *z += r;
                    }
                }
            }
            if self.iterate(self.total, bland_after)? == SolveStatus::Unbounded {
                return Err(Error::Internal("phase one cannot be unbounded".into()));
            }
            if -self.t[m][self.total] < -FEASIBILITY_TOL {
                return Ok(SolveStatus::Infeasible);
            }
            self.evict_basic_artificials();
        }

        // Phase II: restore the true objective in canonical form.
        self.t[m].fill(0.0);
        self.t[m][..self.num_structural].copy_from_slice(&self.objective);
        for i in 0..m {
            let b = self.basis[i];
            let c_b = if b < self.num_structural {
                self.objective[b]
            } else {
                0.0
            };
            if c_b != 0.0 {
                let row = self.t[i].clone();
                for (z, r) in self.t[m].iter_mut().zip(row.iter()) {
                    *z -= c_b * r;
                }
            }
        }
        self.iterate(self.artificial_start, bland_after)
    }

    /// Primal simplex sweep over columns `0..allowed`.
    fn iterate(&mut self, allowed: usize, bland_after: usize) -> Result<SolveStatus> {
        let m = self.basis.len();
        let mut degenerate = 0usize;
        let max_iterations = 200_000 + 200 * (m + self.total);

        for _ in 0..max_iterations {
            let bland = degenerate > bland_after;
            let entering = if bland {
                (0..allowed).find(|&j| self.t[m][j] > OPTIMALITY_TOL)
            } else {
                let mut best: Option<(usize, f64)> = None;
                for j in 0..allowed {
                    let rc = self.t[m][j];
                    if rc > OPTIMALITY_TOL && best.is_none_or(|(_, b)| rc > b) {
                        best = Some((j, rc));
                    }
                }
                best.map(|(j, _)| j)
            };
            let Some(col) = entering else {
                return Ok(SolveStatus::Optimal);
            };

            let Some((row, ratio)) = self.choose_leaving(col, bland) else {
                return Ok(SolveStatus::Unbounded);
            };
            if ratio < 1e-12 {
                degenerate += 1;
            }
            self.pivot(row, col);
        }
        Err(Error::Internal("simplex iteration cap exceeded".into()))
    }

    /// Two-pass ratio test: find the minimum ratio, then among rows within
    /// a small relative window prefer the numerically largest pivot (ties
    /// to the smallest row index). In Bland mode the window collapses and
    /// ties resolve to the smallest basic variable.
    fn choose_leaving(&self, col: usize, bland: bool) -> Option<(usize, f64)> {
        let m = self.basis.len();
        let mut min_ratio = f64::INFINITY;
        for i in 0..m {
            let a = self.t[i][col];
            if a > PIVOT_TOL {
                min_ratio = min_ratio.min(self.t[i][self.total] / a);
            }
        }
        if !min_ratio.is_finite() {
            return None;
        }
        let window = if bland {
            min_ratio + 1e-12
        } else {
            min_ratio + 1e-9 * (1.0 + min_ratio.abs())
        };
        let mut choice: Option<(usize, f64)> = None;
        for i in 0..m {
            let a = self.t[i][col];
            if a > PIVOT_TOL && self.t[i][self.total] / a <= window {
                let better = match choice {
                    None => true,
                    Some((cur, best_pivot)) => {
                        if bland {
                            self.basis[i] < self.basis[cur]
                        } else {
                            a > best_pivot
                        }
                    }
                };
                if better {
                    choice = Some((i, a));
                }
            }
        }
        choice.map(|(i, _)| (i, self.t[i][self.total] / self.t[i][col]))
    }

    fn pivot(&mut self, row: usize, col: usize) {
        let m = self.basis.len();
        let p = self.t[row][col];
        for v in self.t[row].iter_mut() {
            *v /= p;
        }
        let pivot_row = self.t[row].clone();
        for i in 0..=m {
            if i == row {
                continue;
            }
            let factor = self.t[i][col];
            if factor != 0.0 {
                for (v, r) in self.t[i].iter_mut().zip(pivot_row.iter()) {
                    *v -= factor * r;
                }
                self.t[i][col] = 0.0;
            }
        }
        self.basis[row] = col;
    }

    /// After phase I, pivot artificials out of the basis where a usable
    /// coefficient exists; rows that stay artificial are redundant. The
    /// pivot goes to the largest-magnitude eligible coefficient so the row
    /// is not rescaled by a near-zero value.
    fn evict_basic_artificials(&mut self) {
        let m = self.basis.len();
        for i in 0..m {
            if self.basis[i] >= self.artificial_start {
                let mut best: Option<(usize, f64)> = None;
                for j in 0..self.artificial_start {
                    let a = self.t[i][j].abs();
                    if a > 1e-7 && best.is_none_or(|(_, b)| a > b) {
                        best = Some((j, a));
                    }
                }
                if let Some((col, _)) = best {
                    self.pivot(i, col);
                }
            }
        }
    }

    fn primal(&self) -> Vec<f64> {
        let m = self.basis.len();
        let mut y = vec![0.0; self.num_structural];
        for i in 0..m {
            let b = self.basis[i];
            if b < self.num_structural {
                y[b] = self.t[i][self.total];
            }
        }
        y
    }

    fn objective_value(&self) -> f64 {
        -self.t[self.basis.len()][self.total]
    }

    /// Simplex multipliers `pi = c_B B^{-1}`, one per row, read from the
    /// reduced costs under each row's initial identity column.
    fn multipliers(&self) -> Vec<f64> {
        let m = self.basis.len();
        (0..m).map(|i| -self.t[m][self.id_cols[i]]).collect()
    }
}
