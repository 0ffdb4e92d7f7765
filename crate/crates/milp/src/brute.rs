use crate::bnb::{MilpSolution, MilpStatus};
use crate::error::{Result, SolverError};
use crate::lp::{solve_with_bounds, LpOptions, LpStatus};
use crate::problem::MilpProblem;

pub const MAX_BRUTE_FORCE_BINARIES: usize = 20;

/// Enumerates every assignment of the binaries and solves the remaining LP.
///
/// Assignments are visited in counting order (binary `k` is bit `k`); the
/// first strictly best one is kept.
pub fn brute_force(problem: &MilpProblem, lp: &LpOptions) -> Result<MilpSolution> {
    problem.validate()?;
    let binaries: Vec<usize> = (0..problem.n_vars()).filter(|&j| problem.binary[j]).collect();
    if binaries.len() > MAX_BRUTE_FORCE_BINARIES {
        return Err(SolverError::TooManyBinaries(binaries.len(), MAX_BRUTE_FORCE_BINARIES));
    }
    let mut best: Option<(f64, Vec<f64>)> = None;
    let combos = 1usize << binaries.len();
    for mask in 0..combos {
        let mut lower = problem.lower.clone();
        let mut upper = problem.upper.clone();
        for (k, &j) in binaries.iter().enumerate() {
            let v = ((mask >> k) & 1) as f64;
            lower[j] = v;
            upper[j] = v;
        }
        let sol = solve_with_bounds(problem, &lower, &upper, lp)?;
        match sol.status {
            LpStatus::Optimal => {
                if best.as_ref().is_none_or(|(obj, _)| sol.objective < *obj) {
                    best = Some((sol.objective, sol.x));
                }
            }
            LpStatus::Infeasible => {}
            LpStatus::Unbounded => return Err(SolverError::Unbounded),
        }
    }
    Ok(match best {
        Some((objective, x)) => MilpSolution {
            status: MilpStatus::Optimal,
            x,
            objective,
            node_count: combos,
            gap: 0.0,
            bound_trace: Vec::new(),
        },
        None => MilpSolution::infeasible(combos, Vec::new()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::Relation;

    #[test]
    fn tiny_cover() {
        let mut p = MilpProblem::new();
        let a = p.add_binary("a", 5.0);
        let b = p.add_binary("b", 3.0);
        p.add_constraint("cover", vec![(a, 1.0), (b, 1.0)], Relation::Ge, 1.0);
        let s = brute_force(&p, &LpOptions::default()).unwrap();
        assert!((s.objective - 3.0).abs() < 1e-12);
        assert_eq!(s.node_count, 4);
    }

    #[test]
    fn contradictory_rows() {
        let mut p = MilpProblem::new();
        let x = p.add_var("x", 0.0, f64::INFINITY, 1.0);
        p.add_binary("b", 0.0);
        p.add_constraint("lo", vec![(x, 1.0)], Relation::Ge, 1.0);
        p.add_constraint("hi", vec![(x, 1.0)], Relation::Le, 0.0);
        let s = brute_force(&p, &LpOptions::default()).unwrap();
        assert_eq!(s.status, MilpStatus::Infeasible);
    }

    #[test]
    fn refuses_large_enumerations() {
        let mut p = MilpProblem::new();
        for i in 0..21 {
            p.add_binary(format!("b{i}"), 1.0);
        }
        assert!(matches!(
            brute_force(&p, &LpOptions::default()),
            Err(SolverError::TooManyBinaries(21, 20))
        ));
    }
}
