//! Bounded-variable simplex on a dense tableau.
//!
//! Rows are equilibrated, `>=` rows negated, and every row gets one slack
//! column, so the identity is always a valid basis and a basis from an
//! earlier solve stays usable after bounds change. A start that can be made
//! dual feasible runs the dual simplex on slightly perturbed costs; any
//! other start runs primal phase one on the sum of infeasibilities. Primal
//! phase two on the true costs always has the last word. The tableau is
//! rebuilt from the original columns every `refactor_interval` pivots and
//! before any verdict.

use crate::error::{Result, SolverError};
use crate::problem::{merge_terms, MilpProblem, Relation};

const PRIMAL_TOL: f64 = 1e-9;
const DUAL_TOL: f64 = 1e-9;
const PIVOT_TOL: f64 = 1e-7;
const DROP_TOL: f64 = 1e-13;
const DEGENERATE_STEP: f64 = 1e-12;
/// Infeasibility below this counts as drift rather than a verdict.
const FEAS_TOL: f64 = 1e-7;
const COST_PERTURBATION: f64 = 5e-7;
/// Outer rounds allowed when refactorization keeps undoing a verdict.
const MAX_ROUNDS: usize = 8;
/// Absolute residual a returned optimal point may carry, in original units.
pub const RESIDUAL_TOL: f64 = 1e-7;

#[derive(Debug, Clone)]
pub struct LpOptions {
    /// Pivots between two rebuilds of the tableau from the original rows.
    pub refactor_interval: usize,
    /// Consecutive degenerate pivots that switch pricing to Bland's rule.
    pub degenerate_trigger: usize,
    pub max_iterations: usize,
    /// Upper limit on `rows * columns` of the dense tableau.
    pub max_cells: usize,
    /// Use the dual simplex when the start allows it.
    pub dual: bool,
}

impl Default for LpOptions {
    fn default() -> Self {
        Self {
            refactor_interval: 100,
            degenerate_trigger: 50,
            max_iterations: 1_000_000,
            max_cells: 60_000_000,
            dual: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub status: LpStatus,
    /// Point in original variable space. Empty unless `Optimal`.
    pub x: Vec<f64>,
    pub objective: f64,
    /// Improving direction along which the objective decreases without
    /// bound. Present only for `Unbounded`.
    pub ray: Option<Vec<f64>>,
    pub iterations: usize,
}

impl LpSolution {
    fn infeasible(iterations: usize) -> Self {
        Self {
            status: LpStatus::Infeasible,
            x: Vec::new(),
            objective: f64::INFINITY,
            ray: None,
            iterations,
        }
    }
}

/// Solves the continuous relaxation of `problem` (integrality is ignored).
pub fn solve_lp(problem: &MilpProblem, opts: &LpOptions) -> Result<LpSolution> {
    problem.validate()?;
    solve_with_bounds(problem, &problem.lower, &problem.upper, opts)
}

/// Same as [`solve_lp`] with the variable bounds replaced. The caller
/// guarantees the problem itself has been validated.
pub(crate) fn solve_with_bounds(
    problem: &MilpProblem,
    lower: &[f64],
    upper: &[f64],
    opts: &LpOptions,
) -> Result<LpSolution> {
    Ok(solve_from(problem, lower, upper, opts, None)?.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum State {
    Basic,
    AtLower,
    AtUpper,
}

/// Final basis of a solve, reusable as the start of a solve of the same
/// problem under other bounds.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Basis {
    basis: Vec<usize>,
    state: Vec<State>,
}

/// Like [`solve_with_bounds`], starting from `start` when given. Also
/// returns the final basis when the result is `Optimal`.
pub(crate) fn solve_from(
    problem: &MilpProblem,
    lower: &[f64],
    upper: &[f64],
    opts: &LpOptions,
    start: Option<&Basis>,
) -> Result<(LpSolution, Option<Basis>)> {
    let Some(mut tab) = Tableau::build(problem, lower, upper, opts)? else {
        return Ok((LpSolution::infeasible(0), None));
    };
    tab.install_objective(problem);
    match start {
        Some(b) if tab.install_basis(b) => {}
        _ => tab.refactor()?,
    }
    match tab.solve(opts)? {
        Verdict::Infeasible => Ok((LpSolution::infeasible(tab.iterations), None)),
        Verdict::Unbounded { entering } => Ok((
            LpSolution {
                status: LpStatus::Unbounded,
                x: Vec::new(),
                objective: f64::NEG_INFINITY,
                ray: Some(tab.ray(entering)),
                iterations: tab.iterations,
            },
            None,
        )),
        Verdict::Optimal => {
            let x = tab.point();
            let residual = problem.max_residual(&x);
            let bound_violation = x
                .iter()
                .enumerate()
                .map(|(j, &v)| (lower[j] - v).max(v - upper[j]).max(0.0))
                .fold(0.0, f64::max);
            if residual > RESIDUAL_TOL || bound_violation > RESIDUAL_TOL {
                return Err(SolverError::SolverNumerics(format!(
                    "optimal basis reproduces the rows only to {residual:.3e} (bounds {bound_violation:.3e})"
                )));
            }
            let basis = Basis {
                basis: tab.basis.clone(),
                state: tab.state.clone(),
            };
            Ok((
                LpSolution {
                    status: LpStatus::Optimal,
                    objective: problem.objective_value(&x),
                    x,
                    ray: None,
                    iterations: tab.iterations,
                },
                Some(basis),
            ))
        }
    }
}

enum Verdict {
    Optimal,
    Infeasible,
    Unbounded { entering: usize },
}

enum Phase {
    Done,
    Infeasible,
    Unbounded { entering: usize },
    /// A rebuild broke the invariant the phase relies on.
    Lost,
}

enum Step {
    Unbounded,
    Flip,
    Pivot { row: usize, theta: f64, leaves_at: State },
}

/// Degeneracy bookkeeping shared by the pricing loops.
#[derive(Default)]
struct Stall {
    degenerate: usize,
    bland: bool,
    episodes: usize,
}

impl Stall {
    fn record(&mut self, step: f64, trigger: usize) {
        if step <= DEGENERATE_STEP {
            self.degenerate += 1;
            if !self.bland && self.degenerate >= trigger {
                self.bland = true;
                self.episodes += 1;
            }
        } else {
            self.degenerate = 0;
            // after repeated episodes keep Bland for good
            if self.episodes < 10 {
                self.bland = false;
            }
        }
    }
}

struct Tableau {
    m: usize,
    n: usize,
    n_struct: usize,
    /// Row-major `m x n` tableau `B^-1 A`.
    a: Vec<f64>,
    /// Original (scaled, sign-normalized) columns, for refactorization.
    cols: Vec<Vec<(usize, f64)>>,
    rhs: Vec<f64>,
    lb: Vec<f64>,
    ub: Vec<f64>,
    /// Objective in use; phase one and perturbation swap it out.
    cost: Vec<f64>,
    /// True objective divided by its largest coefficient.
    true_cost: Vec<f64>,
    d: Vec<f64>,
    beta: Vec<f64>,
    basis: Vec<usize>,
    state: Vec<State>,
    pivots_since_refactor: usize,
    iterations: usize,
}

impl Tableau {
    /// Returns `None` when an empty row is already violated.
    fn build(problem: &MilpProblem, lower: &[f64], upper: &[f64], opts: &LpOptions) -> Result<Option<Self>> {
        let n_struct = problem.n_vars();
        // (coefficients, rhs, equality)
        let mut rows: Vec<(Vec<(usize, f64)>, f64, bool)> = Vec::new();
        for row in &problem.constraints {
            let coeffs: Vec<(usize, f64)> = merge_terms(row.coeffs.clone())
                .into_iter()
                .filter(|&(_, a)| a != 0.0)
                .collect();
            if coeffs.is_empty() {
                let ok = match row.relation {
                    Relation::Le => row.rhs >= -RESIDUAL_TOL,
                    Relation::Ge => row.rhs <= RESIDUAL_TOL,
                    Relation::Eq => row.rhs.abs() <= RESIDUAL_TOL,
                };
                if !ok {
                    return Ok(None);
                }
                continue;
            }
            let mut scale = 1.0 / coeffs.iter().map(|&(_, a)| a.abs()).fold(0.0, f64::max);
            if row.relation == Relation::Ge {
                scale = -scale;
            }
            let coeffs = coeffs.into_iter().map(|(j, a)| (j, a * scale)).collect();
            rows.push((coeffs, row.rhs * scale, row.relation == Relation::Eq));
        }

        let m = rows.len();
        let n = n_struct + m;
        if m.saturating_mul(n) > opts.max_cells {
            return Err(SolverError::TooLarge {
                rows: m,
                cols: n,
                budget: opts.max_cells,
            });
        }

        let mut cols: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        let mut rhs = vec![0.0; m];
        let mut lb = lower.to_vec();
        let mut ub = upper.to_vec();
        lb.resize(n, 0.0);
        ub.resize(n, f64::INFINITY);
        for (i, (coeffs, b, equality)) in rows.into_iter().enumerate() {
            for (j, a) in coeffs {
                cols[j].push((i, a));
            }
            cols[n_struct + i].push((i, 1.0));
            rhs[i] = b;
            if equality {
                ub[n_struct + i] = 0.0;
            }
        }
        let mut state = vec![State::AtLower; n];
        let basis: Vec<usize> = (n_struct..n).collect();
        for &j in &basis {
            state[j] = State::Basic;
        }
        Ok(Some(Self {
            m,
            n,
            n_struct,
            a: vec![0.0; m * n],
            cols,
            rhs,
            lb,
            ub,
            cost: vec![0.0; n],
            true_cost: vec![0.0; n],
            d: vec![0.0; n],
            beta: vec![0.0; m],
            basis,
            state,
            pivots_since_refactor: 0,
            iterations: 0,
        }))
    }

    fn install_objective(&mut self, problem: &MilpProblem) {
        let scale = problem.objective.iter().fold(0.0f64, |s, c| s.max(c.abs()));
        let scale = if scale > 0.0 { scale } else { 1.0 };
        for (j, &c) in problem.objective.iter().enumerate() {
            self.true_cost[j] = c / scale;
        }
        self.cost.copy_from_slice(&self.true_cost);
    }

    /// Adopts an earlier basis. Returns false, with the slack basis
    /// factored instead, if it does not fit or is singular here.
    fn install_basis(&mut self, start: &Basis) -> bool {
        let fits = start.basis.len() == self.m
            && start.state.len() == self.n
            && start.basis.iter().all(|&j| j < self.n && start.state[j] == State::Basic)
            && start.state.iter().filter(|&&s| s == State::Basic).count() == self.m;
        if !fits {
            return false;
        }
        let (basis, state) = (self.basis.clone(), self.state.clone());
        self.basis.copy_from_slice(&start.basis);
        self.state.copy_from_slice(&start.state);
        for j in 0..self.n {
            if self.state[j] == State::AtUpper && !self.ub[j].is_finite() {
                self.state[j] = State::AtLower;
            }
        }
        if self.refactor().is_ok() {
            return true;
        }
        self.basis = basis;
        self.state = state;
        false
    }

    fn value(&self, j: usize) -> f64 {
        match self.state[j] {
            State::AtUpper => self.ub[j],
            _ => self.lb[j],
        }
    }

    /// Distance of basic row `i` outside its bounds (0 when inside).
    fn infeasibility(&self, i: usize) -> f64 {
        let j = self.basis[i];
        (self.lb[j] - self.beta[i]).max(self.beta[i] - self.ub[j]).max(0.0)
    }

    fn max_infeasibility(&self) -> f64 {
        (0..self.m).map(|i| self.infeasibility(i)).fold(0.0, f64::max)
    }

    fn movable(&self, j: usize) -> bool {
        self.state[j] != State::Basic && self.ub[j] > self.lb[j]
    }

    /// Recomputes reduced costs from the current tableau.
    fn reprice(&mut self) {
        let n = self.n;
        self.d.copy_from_slice(&self.cost);
        for i in 0..self.m {
            let cb = self.cost[self.basis[i]];
            if cb == 0.0 {
                continue;
            }
            let row = &self.a[i * n..(i + 1) * n];
            for (dj, &aij) in self.d.iter_mut().zip(row) {
                *dj -= cb * aij;
            }
        }
        for &j in &self.basis {
            self.d[j] = 0.0;
        }
    }

    /// Rebuilds `B^-1 A`, the basic values and the reduced costs from the
    /// original columns.
    fn refactor(&mut self) -> Result<()> {
        let (m, n) = (self.m, self.n);
        self.pivots_since_refactor = 0;
        if m == 0 {
            self.reprice();
            return Ok(());
        }
        let mut bmat = vec![0.0; m * m];
        for (r, &j) in self.basis.iter().enumerate() {
            for &(i, v) in &self.cols[j] {
                bmat[i * m + r] = v;
            }
        }
        let binv = invert(bmat, m)?;

        self.a.iter_mut().for_each(|v| *v = 0.0);
        for j in 0..n {
            for &(k, v) in &self.cols[j] {
                for i in 0..m {
                    let f = binv[i * m + k];
                    if f != 0.0 {
                        self.a[i * n + j] += f * v;
                    }
                }
            }
        }
        for v in self.a.iter_mut() {
            if v.abs() < DROP_TOL {
                *v = 0.0;
            }
        }
        for (r, &j) in self.basis.iter().enumerate() {
            for i in 0..m {
                self.a[i * n + j] = if i == r { 1.0 } else { 0.0 };
            }
        }

        let mut b = self.rhs.clone();
        for j in 0..n {
            if self.state[j] != State::Basic {
                let v = self.value(j);
                if v != 0.0 {
                    for &(i, c) in &self.cols[j] {
                        b[i] -= c * v;
                    }
                }
            }
        }
        for i in 0..m {
            self.beta[i] = (0..m).map(|k| binv[i * m + k] * b[k]).sum();
        }
        self.reprice();
        Ok(())
    }

    fn solve(&mut self, opts: &LpOptions) -> Result<Verdict> {
        for _ in 0..MAX_ROUNDS {
            if self.max_infeasibility() > PRIMAL_TOL {
                if opts.dual && self.make_dual_feasible() {
                    match self.dual(opts)? {
                        Phase::Infeasible => return Ok(Verdict::Infeasible),
                        Phase::Done | Phase::Lost => {}
                        Phase::Unbounded { .. } => unreachable!("the dual simplex never reports a ray"),
                    }
                }
                if self.max_infeasibility() > PRIMAL_TOL {
                    match self.phase_one(opts)? {
                        Phase::Infeasible => return Ok(Verdict::Infeasible),
                        Phase::Done => {}
                        Phase::Lost | Phase::Unbounded { .. } => continue,
                    }
                }
            }
            match self.phase_two(opts)? {
                Phase::Done => return Ok(Verdict::Optimal),
                Phase::Unbounded { entering } => return Ok(Verdict::Unbounded { entering }),
                Phase::Lost => continue,
                Phase::Infeasible => unreachable!("phase two starts feasible"),
            }
        }
        Err(SolverError::SolverNumerics(format!(
            "no stable verdict after {MAX_ROUNDS} rounds of refactorization"
        )))
    }

    /// Moves nonbasic columns to the bound their reduced cost prefers.
    /// False when some column would have to sit at an infinite bound.
    fn make_dual_feasible(&mut self) -> bool {
        for j in 0..self.n {
            if !self.movable(j) {
                continue;
            }
            let target = match self.state[j] {
                State::AtLower if self.d[j] < -DUAL_TOL => State::AtUpper,
                State::AtUpper if self.d[j] > DUAL_TOL => State::AtLower,
                _ => continue,
            };
            if target == State::AtUpper && !self.ub[j].is_finite() {
                return false;
            }
            self.flip(j, target);
        }
        true
    }

    /// Moves nonbasic `j` to its other bound, updating the basic values.
    fn flip(&mut self, j: usize, target: State) {
        let old = self.value(j);
        self.state[j] = target;
        let delta = self.value(j) - old;
        for i in 0..self.m {
            let a = self.a[i * self.n + j];
            if a != 0.0 {
                self.beta[i] -= a * delta;
            }
        }
    }

    fn check_budget(&self, opts: &LpOptions) -> Result<()> {
        if self.iterations >= opts.max_iterations {
            return Err(SolverError::SolverNumerics(format!(
                "no convergence after {} iterations",
                self.iterations
            )));
        }
        Ok(())
    }

    /// Pushes nonbasic costs away from zero in the direction that keeps the
    /// basis dual feasible.
    fn perturb_costs(&mut self) {
        for j in 0..self.n {
            self.cost[j] = self.true_cost[j];
            if !self.movable(j) {
                continue;
            }
            // golden-ratio sequence in [0.5, 1.5)
            let u = 0.5 + (j as f64 * 0.618_033_988_749_895).fract();
            let eps = COST_PERTURBATION * u * (1.0 + self.true_cost[j].abs());
            self.cost[j] += if self.state[j] == State::AtUpper { -eps } else { eps };
        }
        self.reprice();
    }

    /// Dual simplex from a dual feasible basis, on perturbed costs. Ends
    /// with the true costs restored and a fresh tableau.
    fn dual(&mut self, opts: &LpOptions) -> Result<Phase> {
        self.perturb_costs();
        let outcome = self.dual_loop(opts);
        self.cost.copy_from_slice(&self.true_cost);
        self.refactor()?;
        outcome
    }

    fn dual_loop(&mut self, opts: &LpOptions) -> Result<Phase> {
        let n = self.n;
        let mut stall = Stall::default();
        loop {
            self.check_budget(opts)?;
            if self.pivots_since_refactor >= opts.refactor_interval {
                self.refactor()?;
                if self.dual_infeasibility() > FEAS_TOL {
                    return Ok(Phase::Lost);
                }
            }
            let Some(r) = self.dual_leaving(stall.bland) else {
                if self.pivots_since_refactor == 0 {
                    return Ok(Phase::Done);
                }
                self.refactor()?;
                if self.dual_infeasibility() > FEAS_TOL {
                    return Ok(Phase::Lost);
                }
                continue;
            };
            let leaving = self.basis[r];
            let below = self.beta[r] < self.lb[leaving];
            let target = if below { self.lb[leaving] } else { self.ub[leaving] };
            let Some(q) = self.dual_entering(r, below, stall.bland) else {
                if self.pivots_since_refactor == 0 {
                    return Ok(Phase::Infeasible);
                }
                self.refactor()?;
                continue;
            };
            self.iterations += 1;
            let arq = self.a[r * n + q];
            let step = self.d[q].abs() / arq.abs();
            let dx = (self.beta[r] - target) / arq;
            let entering_value = self.value(q) + dx;
            for i in 0..self.m {
                let aiq = self.a[i * n + q];
                if aiq != 0.0 {
                    self.beta[i] -= aiq * dx;
                }
            }
            self.beta[r] = entering_value;
            self.basis[r] = q;
            self.state[q] = State::Basic;
            self.state[leaving] = if below { State::AtLower } else { State::AtUpper };
            self.pivot(r, q);
            stall.record(step, opts.degenerate_trigger);
        }
    }

    /// Largest amount by which a reduced cost favours leaving its bound.
    fn dual_infeasibility(&self) -> f64 {
        (0..self.n)
            .filter(|&j| self.movable(j))
            .map(|j| match self.state[j] {
                State::AtLower => -self.d[j],
                _ => self.d[j],
            })
            .fold(0.0, f64::max)
    }

    fn dual_leaving(&self, bland: bool) -> Option<usize> {
        let mut best: Option<(usize, f64)> = None;
        for i in 0..self.m {
            let v = self.infeasibility(i);
            if v <= PRIMAL_TOL {
                continue;
            }
            let better = match best {
                None => true,
                Some((bi, _)) if bland => self.basis[i] < self.basis[bi],
                Some((_, bv)) => v > bv,
            };
            if better {
                best = Some((i, v));
            }
        }
        best.map(|(i, _)| i)
    }

    /// Harris ratio test along row `r`.
    fn dual_entering(&self, r: usize, below: bool, bland: bool) -> Option<usize> {
        let n = self.n;
        let row = &self.a[r * n..(r + 1) * n];
        // the basic value moves by -a_rj per unit of x_j; it has to rise when below
        let eligible = |j: usize| -> Option<f64> {
            if !self.movable(j) {
                return None;
            }
            let a = row[j];
            if a.abs() <= PIVOT_TOL {
                return None;
            }
            let up = self.state[j] == State::AtLower;
            let ok = if below { (a < 0.0) == up } else { (a > 0.0) == up };
            ok.then_some(a.abs())
        };
        let slack = |j: usize| -> f64 {
            match self.state[j] {
                State::AtLower => self.d[j],
                _ => -self.d[j],
            }
        };

        if bland {
            let mut best: Option<(usize, f64)> = None;
            for j in 0..n {
                let Some(a) = eligible(j) else { continue };
                let t = slack(j).max(0.0) / a;
                if best.is_none_or(|(_, bt)| t < bt - 1e-12) {
                    best = Some((j, t));
                }
            }
            return best.map(|(j, _)| j);
        }

        let mut relaxed = f64::INFINITY;
        for j in 0..n {
            if let Some(a) = eligible(j) {
                relaxed = relaxed.min(((slack(j) + DUAL_TOL) / a).max(0.0));
            }
        }
        if relaxed == f64::INFINITY {
            return None;
        }
        let mut best: Option<(usize, f64)> = None;
        for j in 0..n {
            let Some(a) = eligible(j) else { continue };
            if slack(j).max(0.0) / a <= relaxed && best.is_none_or(|(_, ba)| a > ba) {
                best = Some((j, a));
            }
        }
        best.map(|(j, _)| j)
    }

    /// Primal phase one: minimizes the sum of bound violations of the basic
    /// columns. Leaves the true costs installed.
    fn phase_one(&mut self, opts: &LpOptions) -> Result<Phase> {
        let outcome = self.phase_one_loop(opts);
        self.cost.copy_from_slice(&self.true_cost);
        self.reprice();
        outcome
    }

    fn phase_one_loop(&mut self, opts: &LpOptions) -> Result<Phase> {
        let n = self.n;
        let mut stall = Stall::default();
        loop {
            self.check_budget(opts)?;
            if self.pivots_since_refactor >= opts.refactor_interval {
                self.refactor()?;
            }
            // gradient of the violation sum: +row below the lower bound, -row above the upper
            let mut any = false;
            self.d.iter_mut().for_each(|v| *v = 0.0);
            for i in 0..self.m {
                let j = self.basis[i];
                let sign = if self.beta[i] < self.lb[j] - PRIMAL_TOL {
                    1.0
                } else if self.beta[i] > self.ub[j] + PRIMAL_TOL {
                    -1.0
                } else {
                    continue;
                };
                any = true;
                let row = &self.a[i * n..(i + 1) * n];
                for (dj, &aij) in self.d.iter_mut().zip(row) {
                    *dj += sign * aij;
                }
            }
            if !any {
                return Ok(Phase::Done);
            }
            for &j in &self.basis {
                self.d[j] = 0.0;
            }
            let Some(q) = self.price(stall.bland) else {
                if self.pivots_since_refactor > 0 {
                    self.refactor()?;
                    continue;
                }
                return Ok(if self.max_infeasibility() > FEAS_TOL {
                    Phase::Infeasible
                } else {
                    Phase::Done
                });
            };
            self.iterations += 1;
            match self.primal_ratio(q, stall.bland, true) {
                Step::Unbounded => {
                    // a descent direction of a measure bounded below always blocks
                    self.refactor()?;
                    return Ok(Phase::Lost);
                }
                Step::Flip => {
                    self.step_flip(q);
                    stall.record(1.0, opts.degenerate_trigger);
                }
                Step::Pivot { row, theta, leaves_at } => {
                    self.step_pivot(row, q, theta, leaves_at);
                    stall.record(theta, opts.degenerate_trigger);
                }
            }
        }
    }

    fn phase_two(&mut self, opts: &LpOptions) -> Result<Phase> {
        let mut stall = Stall::default();
        loop {
            self.check_budget(opts)?;
            if self.pivots_since_refactor >= opts.refactor_interval {
                self.refactor()?;
                if self.max_infeasibility() > FEAS_TOL {
                    return Ok(Phase::Lost);
                }
            }
            let Some(q) = self.price(stall.bland) else {
                if self.pivots_since_refactor == 0 {
                    return Ok(Phase::Done);
                }
                // confirm against freshly computed reduced costs
                self.refactor()?;
                if self.max_infeasibility() > FEAS_TOL {
                    return Ok(Phase::Lost);
                }
                continue;
            };
            self.iterations += 1;
            match self.primal_ratio(q, stall.bland, false) {
                Step::Unbounded => {
                    if self.pivots_since_refactor > 0 {
                        self.refactor()?;
                        if self.max_infeasibility() > FEAS_TOL {
                            return Ok(Phase::Lost);
                        }
                        continue;
                    }
                    return Ok(Phase::Unbounded { entering: q });
                }
                Step::Flip => {
                    self.step_flip(q);
                    stall.record(1.0, opts.degenerate_trigger);
                }
                Step::Pivot { row, theta, leaves_at } => {
                    self.step_pivot(row, q, theta, leaves_at);
                    stall.record(theta, opts.degenerate_trigger);
                }
            }
        }
    }

    fn price(&self, bland: bool) -> Option<usize> {
        let mut best = None;
        let mut best_score = 0.0;
        for j in 0..self.n {
            if !self.movable(j) {
                continue;
            }
            let score = match self.state[j] {
                State::AtLower if self.d[j] < -DUAL_TOL => -self.d[j],
                State::AtUpper if self.d[j] > DUAL_TOL => self.d[j],
                _ => continue,
            };
            if bland {
                return Some(j);
            }
            if score > best_score {
                best_score = score;
                best = Some(j);
            }
        }
        best
    }

    fn direction(&self, q: usize) -> f64 {
        if self.state[q] == State::AtUpper {
            -1.0
        } else {
            1.0
        }
    }

    /// Ratio test for entering column `q`. In phase one a basic value
    /// outside its bounds blocks where it regains feasibility.
    fn primal_ratio(&self, q: usize, bland: bool, phase_one: bool) -> Step {
        let n = self.n;
        let dir = self.direction(q);
        // (row, rate, gap to the blocking bound, bound reached)
        let mut limits: Vec<(usize, f64, f64, State)> = Vec::new();
        for i in 0..self.m {
            // basic value i moves by `rate * theta`
            let rate = -dir * self.a[i * n + q];
            if rate.abs() <= PIVOT_TOL {
                continue;
            }
            let j = self.basis[i];
            let (lo, hi, v) = (self.lb[j], self.ub[j], self.beta[i]);
            let limit = if phase_one && v < lo - PRIMAL_TOL {
                (rate > 0.0).then(|| (lo - v, State::AtLower))
            } else if phase_one && v > hi + PRIMAL_TOL {
                (rate < 0.0).then(|| (v - hi, State::AtUpper))
            } else if rate < 0.0 {
                lo.is_finite().then(|| (v - lo, State::AtLower))
            } else {
                hi.is_finite().then(|| (hi - v, State::AtUpper))
            };
            if let Some((gap, at)) = limit {
                limits.push((i, rate.abs(), gap, at));
            }
        }
        let range = self.ub[q] - self.lb[q];

        if bland {
            let mut best: Option<(usize, f64)> = None;
            for (k, &(i, rate, gap, _)) in limits.iter().enumerate() {
                let t = gap.max(0.0) / rate;
                let better = match best {
                    None => true,
                    Some((bk, bt)) => {
                        t < bt - 1e-12 || (t <= bt + 1e-12 && self.basis[i] < self.basis[limits[bk].0])
                    }
                };
                if better {
                    best = Some((k, t));
                }
            }
            return match best {
                Some((_, t)) if range <= t => Step::Flip,
                Some((k, t)) => Step::Pivot {
                    row: limits[k].0,
                    theta: t,
                    leaves_at: limits[k].3,
                },
                None if range.is_finite() => Step::Flip,
                None => Step::Unbounded,
            };
        }

        // Harris two-pass ratio test
        let relaxed = limits
            .iter()
            .map(|&(_, rate, gap, _)| ((gap + PRIMAL_TOL) / rate).max(0.0))
            .fold(f64::INFINITY, f64::min);
        if relaxed == f64::INFINITY && !range.is_finite() {
            return Step::Unbounded;
        }
        if range <= relaxed {
            return Step::Flip;
        }
        let mut best: Option<(usize, f64)> = None;
        for (k, &(_, rate, gap, _)) in limits.iter().enumerate() {
            let t = gap.max(0.0) / rate;
            if t <= relaxed && best.is_none_or(|(bk, _)| rate > limits[bk].1) {
                best = Some((k, t));
            }
        }
        let (k, theta) = best.expect("a finite relaxed ratio has a row");
        Step::Pivot {
            row: limits[k].0,
            theta,
            leaves_at: limits[k].3,
        }
    }

    fn step_flip(&mut self, q: usize) {
        let target = if self.state[q] == State::AtUpper {
            State::AtLower
        } else {
            State::AtUpper
        };
        self.flip(q, target);
        // drifts like a pivot does
        self.pivots_since_refactor += 1;
    }

    fn step_pivot(&mut self, r: usize, q: usize, theta: f64, leaves_at: State) {
        let n = self.n;
        let dir = self.direction(q);
        let entering_value = self.value(q) + dir * theta;
        if theta != 0.0 {
            for i in 0..self.m {
                let aiq = self.a[i * n + q];
                if aiq != 0.0 {
                    self.beta[i] -= dir * theta * aiq;
                }
            }
        }
        let leaving = self.basis[r];
        self.state[leaving] = leaves_at;
        self.beta[r] = entering_value;
        self.basis[r] = q;
        self.state[q] = State::Basic;
        self.pivot(r, q);
    }

    /// Eliminates column `q` from every row but `r` and from the reduced
    /// costs. Basic values are the caller's business.
    fn pivot(&mut self, r: usize, q: usize) {
        let n = self.n;
        let piv = self.a[r * n + q];
        let mut pivot_row: Vec<(usize, f64)> = Vec::new();
        for j in 0..n {
            let v = self.a[r * n + j] / piv;
            if v.abs() > DROP_TOL {
                pivot_row.push((j, v));
            }
        }
        let row_r = &mut self.a[r * n..(r + 1) * n];
        row_r.iter_mut().for_each(|v| *v = 0.0);
        for &(j, v) in &pivot_row {
            row_r[j] = v;
        }
        row_r[q] = 1.0;

        for i in 0..self.m {
            if i == r {
                continue;
            }
            let f = self.a[i * n + q];
            if f == 0.0 {
                continue;
            }
            let row = &mut self.a[i * n..(i + 1) * n];
            for &(j, v) in &pivot_row {
                let updated = row[j] - f * v;
                row[j] = if updated.abs() < DROP_TOL { 0.0 } else { updated };
            }
            row[q] = 0.0;
        }
        let f = self.d[q];
        if f != 0.0 {
            for &(j, v) in &pivot_row {
                self.d[j] -= f * v;
            }
        }
        self.d[q] = 0.0;
        self.pivots_since_refactor += 1;
    }

    fn point(&self) -> Vec<f64> {
        let mut x: Vec<f64> = (0..self.n_struct).map(|j| self.value(j)).collect();
        for (i, &j) in self.basis.iter().enumerate() {
            if j < self.n_struct {
                x[j] = self.beta[i];
            }
        }
        x
    }

    fn ray(&self, q: usize) -> Vec<f64> {
        let dir = self.direction(q);
        let mut ray = vec![0.0; self.n_struct];
        if q < self.n_struct {
            ray[q] = dir;
        }
        for (i, &j) in self.basis.iter().enumerate() {
            if j < self.n_struct {
                ray[j] = -dir * self.a[i * self.n + q];
            }
        }
        ray
    }
}

/// Gauss-Jordan inverse with partial pivoting.
fn invert(mut mat: Vec<f64>, m: usize) -> Result<Vec<f64>> {
    let mut inv = vec![0.0; m * m];
    for i in 0..m {
        inv[i * m + i] = 1.0;
    }
    let scale = mat.iter().fold(0.0f64, |s, v| s.max(v.abs())).max(1.0);
    for col in 0..m {
        let (p, pv) = (col..m)
            .map(|r| (r, mat[r * m + col].abs()))
            .fold((col, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
        if pv < 1e-11 * scale {
            return Err(SolverError::SolverNumerics(format!(
                "basis matrix is singular at column {col} (pivot {pv:.3e})"
            )));
        }
        if p != col {
            for k in 0..m {
                mat.swap(p * m + k, col * m + k);
                inv.swap(p * m + k, col * m + k);
            }
        }
        let d = mat[col * m + col];
        for k in 0..m {
            mat[col * m + k] /= d;
            inv[col * m + k] /= d;
        }
        for r in 0..m {
            if r == col {
                continue;
            }
            let f = mat[r * m + col];
            if f == 0.0 {
                continue;
            }
            for k in 0..m {
                mat[r * m + k] -= f * mat[col * m + k];
                inv[r * m + k] -= f * inv[col * m + k];
            }
        }
    }
    Ok(inv)
}
