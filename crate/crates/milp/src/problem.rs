use crate::error::{Result, SolverError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

impl Relation {
    pub fn symbol(self) -> &'static str {
        match self {
            Relation::Le => "<=",
            Relation::Eq => "=",
            Relation::Ge => ">=",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub name: String,
    pub coeffs: Vec<(usize, f64)>,
    pub relation: Relation,
    pub rhs: f64,
}

impl Constraint {
    pub fn activity(&self, x: &[f64]) -> f64 {
        self.coeffs.iter().map(|&(j, a)| a * x[j]).sum()
    }

    /// Amount by which `x` violates this row (0 when satisfied).
    pub fn violation(&self, x: &[f64]) -> f64 {
        let act = self.activity(x);
        match self.relation {
            Relation::Le => (act - self.rhs).max(0.0),
            Relation::Ge => (self.rhs - act).max(0.0),
            Relation::Eq => (act - self.rhs).abs(),
        }
    }
}

/// A minimization program over continuous and binary variables.
///
/// Lower bounds must be finite; upper bounds may be `f64::INFINITY`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct MilpProblem {
    pub names: Vec<String>,
    pub objective: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub binary: Vec<bool>,
    pub constraints: Vec<Constraint>,
}

impl MilpProblem {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn n_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn n_constraints(&self) -> usize {
        self.constraints.len()
    }

    pub fn n_binaries(&self) -> usize {
        self.binary.iter().filter(|&&b| b).count()
    }

    pub fn add_var(&mut self, name: impl Into<String>, lower: f64, upper: f64, cost: f64) -> usize {
        self.names.push(name.into());
        self.objective.push(cost);
        self.lower.push(lower);
        self.upper.push(upper);
        self.binary.push(false);
        self.objective.len() - 1
    }

    pub fn add_binary(&mut self, name: impl Into<String>, cost: f64) -> usize {
        let j = self.add_var(name, 0.0, 1.0, cost);
        self.binary[j] = true;
        j
    }

    /// Appends a row. Repeated variable indices are summed.
    pub fn add_constraint(
        &mut self,
        name: impl Into<String>,
        coeffs: Vec<(usize, f64)>,
        relation: Relation,
        rhs: f64,
    ) -> usize {
        self.constraints.push(Constraint {
            name: name.into(),
            coeffs: merge_terms(coeffs),
            relation,
            rhs,
        });
        self.constraints.len() - 1
    }

    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.objective.iter().zip(x).map(|(c, v)| c * v).sum()
    }

    pub fn max_residual(&self, x: &[f64]) -> f64 {
        self.constraints
            .iter()
            .map(|c| c.violation(x))
            .fold(0.0, f64::max)
    }

    pub fn max_bound_violation(&self, x: &[f64]) -> f64 {
        x.iter()
            .enumerate()
            .map(|(j, &v)| (self.lower[j] - v).max(v - self.upper[j]).max(0.0))
            .fold(0.0, f64::max)
    }

    /// Checks the structural invariants the solvers rely on.
    pub fn validate(&self) -> Result<()> {
        let n = self.n_vars();
        if self.names.len() != n || self.lower.len() != n || self.upper.len() != n || self.binary.len() != n
        {
            return Err(SolverError::InvalidProblem("per-variable vectors differ in length".into()));
        }
        for j in 0..n {
            if !self.objective[j].is_finite() {
                return Err(invalid(format!("objective coefficient of {} is not finite", self.names[j])));
            }
            if !self.lower[j].is_finite() {
                return Err(invalid(format!("lower bound of {} is not finite", self.names[j])));
            }
            if self.upper[j].is_nan() || self.upper[j] < self.lower[j] {
                return Err(invalid(format!("bounds of {} are empty", self.names[j])));
            }
            if self.binary[j] && (self.lower[j] != 0.0 || self.upper[j] != 1.0) {
                return Err(invalid(format!("binary {} must have bounds [0, 1]", self.names[j])));
            }
        }
        for row in &self.constraints {
            if !row.rhs.is_finite() {
                return Err(invalid(format!("rhs of {} is not finite", row.name)));
            }
            for &(j, a) in &row.coeffs {
                if j >= n {
                    return Err(invalid(format!("{} references variable {j} of {n}", row.name)));
                }
                if !a.is_finite() {
                    return Err(invalid(format!("coefficient in {} is not finite", row.name)));
                }
            }
        }
        Ok(())
    }
}

fn invalid(msg: String) -> SolverError {
    SolverError::InvalidProblem(msg)
}

pub(crate) fn merge_terms(mut coeffs: Vec<(usize, f64)>) -> Vec<(usize, f64)> {
    coeffs.sort_by_key(|&(j, _)| j);
    let mut out: Vec<(usize, f64)> = Vec::with_capacity(coeffs.len());
    for (j, a) in coeffs {
        match out.last_mut() {
            Some((k, b)) if *k == j => *b += a,
            _ => out.push((j, a)),
        }
    }
    out
}
