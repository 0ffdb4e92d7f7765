//! Best-first branch-and-bound over the binary columns.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{PartialResult, Result, SolverError};
use crate::lp::{solve_from, Basis, LpOptions, LpSolution, LpStatus};
use crate::problem::MilpProblem;

#[derive(Debug, Clone)]
pub struct MilpOptions {
    /// Maximum number of LP relaxations evaluated.
    pub node_budget: usize,
    pub int_tol: f64,
    /// A node is discarded when its bound is within this of the incumbent.
    pub prune_tol: f64,
    pub lp: LpOptions,
}

impl Default for MilpOptions {
    fn default() -> Self {
        Self {
            node_budget: 100_000,
            int_tol: 1e-6,
            prune_tol: 1e-9,
            lp: LpOptions::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MilpStatus {
    Optimal,
    Infeasible,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MilpSolution {
    pub status: MilpStatus,
    pub x: Vec<f64>,
    pub objective: f64,
    pub node_count: usize,
    /// Always 0: the search only stops when the optimum is proven.
    pub gap: f64,
    /// Bound of every node taken off the queue, in processing order.
    pub bound_trace: Vec<f64>,
}

impl MilpSolution {
    pub(crate) fn infeasible(node_count: usize, bound_trace: Vec<f64>) -> Self {
        Self {
            status: MilpStatus::Infeasible,
            x: Vec::new(),
            objective: f64::INFINITY,
            node_count,
            gap: 0.0,
            bound_trace,
        }
    }
}

struct Node {
    bound: f64,
    id: u64,
    fixings: Vec<(usize, bool)>,
    branch_var: usize,
    /// Optimal basis of the node's relaxation, the children's start.
    start: Option<Basis>,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Node {}
impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Node {
    // BinaryHeap is a max-heap: smallest bound first, then oldest node
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .bound
            .total_cmp(&self.bound)
            .then_with(|| other.id.cmp(&self.id))
    }
}

struct Search<'a> {
    problem: &'a MilpProblem,
    opts: &'a MilpOptions,
    binaries: Vec<usize>,
    nodes: usize,
    next_id: u64,
    incumbent: Option<(f64, Vec<f64>)>,
}

impl Search<'_> {
    fn bounds(&self, fixings: &[(usize, bool)]) -> (Vec<f64>, Vec<f64>) {
        let mut lower = self.problem.lower.clone();
        let mut upper = self.problem.upper.clone();
        for &(j, v) in fixings {
            let v = if v { 1.0 } else { 0.0 };
            lower[j] = v;
            upper[j] = v;
        }
        (lower, upper)
    }

    fn relax(
        &mut self,
        fixings: &[(usize, bool)],
        start: Option<&Basis>,
        open_bound: f64,
    ) -> Result<(LpSolution, Option<Basis>)> {
        if self.nodes >= self.opts.node_budget {
            return Err(SolverError::BudgetExhausted {
                budget: self.opts.node_budget,
                partial: PartialResult {
                    incumbent: self.incumbent.clone(),
                    bound: open_bound,
                    nodes: self.nodes,
                },
            });
        }
        self.nodes += 1;
        let (lower, upper) = self.bounds(fixings);
        solve_from(self.problem, &lower, &upper, &self.opts.lp, start)
    }

    /// Most fractional binary, lowest index on ties. `None` if integral.
    fn branching_var(&self, x: &[f64]) -> Option<usize> {
        let mut best: Option<(usize, f64)> = None;
        for &j in &self.binaries {
            let frac = (x[j] - x[j].floor()).min(x[j].ceil() - x[j]);
            if frac <= self.opts.int_tol {
                continue;
            }
            if best.is_none_or(|(_, f)| frac > f) {
                best = Some((j, frac));
            }
        }
        best.map(|(j, _)| j)
    }

    /// Re-solves with every binary pinned to its rounded value and keeps the
    /// result if it improves on the incumbent.
    fn offer(&mut self, x: &[f64], start: Option<&Basis>, open_bound: f64) -> Result<()> {
        let fixings: Vec<(usize, bool)> = self.binaries.iter().map(|&j| (j, x[j] > 0.5)).collect();
        let (clean, _) = self.relax(&fixings, start, open_bound)?;
        if clean.status != LpStatus::Optimal {
            return Ok(());
        }
        if self.incumbent.as_ref().is_none_or(|(obj, _)| clean.objective < *obj) {
            self.incumbent = Some((clean.objective, clean.x));
        }
        Ok(())
    }

    fn prunable(&self, bound: f64) -> bool {
        self.incumbent
            .as_ref()
            .is_some_and(|(obj, _)| bound >= obj - self.opts.prune_tol)
    }

    /// Evaluates a node; returns it if it has to be branched on.
    fn evaluate(
        &mut self,
        fixings: Vec<(usize, bool)>,
        start: Option<&Basis>,
        parent_bound: f64,
        open_bound: f64,
    ) -> Result<Option<Node>> {
        let (lp, basis) = self.relax(&fixings, start, open_bound)?;
        match lp.status {
            LpStatus::Infeasible => return Ok(None),
            LpStatus::Unbounded => return Err(SolverError::Unbounded),
            LpStatus::Optimal => {}
        }
        let bound = lp.objective.max(parent_bound);
        if self.prunable(bound) {
            return Ok(None);
        }
        match self.branching_var(&lp.x) {
            None => {
                self.offer(&lp.x, basis.as_ref(), open_bound)?;
                Ok(None)
            }
            Some(branch_var) => {
                let id = self.next_id;
                self.next_id += 1;
                Ok(Some(Node {
                    bound,
                    id,
                    fixings,
                    branch_var,
                    start: basis,
                }))
            }
        }
    }
}

/// Exact minimization by best-first branch-and-bound.
///
/// Children are created floor-first; the queue is ordered by LP bound with
/// ties going to the older node, so the search is deterministic.
pub fn solve_milp(problem: &MilpProblem, opts: &MilpOptions) -> Result<MilpSolution> {
    problem.validate()?;
    let binaries: Vec<usize> = (0..problem.n_vars()).filter(|&j| problem.binary[j]).collect();
    let mut search = Search {
        problem,
        opts,
        binaries,
        nodes: 0,
        next_id: 0,
        incumbent: None,
    };
    let mut trace = Vec::new();
    let mut queue = BinaryHeap::new();
    if let Some(root) = search.evaluate(Vec::new(), None, f64::NEG_INFINITY, f64::NEG_INFINITY)? {
        queue.push(root);
    }

    while let Some(node) = queue.pop() {
        trace.push(node.bound);
        if search.prunable(node.bound) {
            continue;
        }
        for value in [false, true] {
            let mut fixings = node.fixings.clone();
            fixings.push((node.branch_var, value));
            if let Some(child) = search.evaluate(fixings, node.start.as_ref(), node.bound, node.bound)? {
                queue.push(child);
            }
        }
    }

    Ok(match search.incumbent {
        Some((objective, x)) => MilpSolution {
            status: MilpStatus::Optimal,
            x,
            objective,
            node_count: search.nodes,
            gap: 0.0,
            bound_trace: trace,
        },
        None => MilpSolution::infeasible(search.nodes, trace),
    })
}
