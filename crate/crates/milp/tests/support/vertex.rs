//! Reference LP solver by vertex enumeration, plus a seeded generator of
//! small feasible, bounded LPs. Shared with the acceptance suite of the
//! core crate.

#![allow(dead_code)]

use nfvplan_milp::{MilpProblem, Relation};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// One hyperplane `a . x = b` that can be made active.
struct Plane {
    a: Vec<f64>,
    b: f64,
}

fn solve_square(mut m: Vec<Vec<f64>>, mut rhs: Vec<f64>) -> Option<Vec<f64>> {
    let n = rhs.len();
    for col in 0..n {
        let p = (col..n).max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))?;
        if m[p][col].abs() < 1e-10 {
            return None;
        }
        m.swap(p, col);
        rhs.swap(p, col);
        for r in 0..n {
            if r != col {
                let f = m[r][col] / m[col][col];
                if f != 0.0 {
                    for k in col..n {
                        m[r][k] -= f * m[col][k];
                    }
                    rhs[r] -= f * rhs[col];
                }
            }
        }
    }
    Some((0..n).map(|i| rhs[i] / m[i][i]).collect())
}

fn combinations(n: usize, k: usize, f: &mut impl FnMut(&[usize])) {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, f: &mut impl FnMut(&[usize])) {
        if cur.len() == k {
            f(cur);
            return;
        }
        for i in start..n {
            if n - i < k - cur.len() {
                break;
            }
            cur.push(i);
            rec(i + 1, n, k, cur, f);
            cur.pop();
        }
    }
    rec(0, n, k, &mut Vec::with_capacity(k), f);
}

/// Minimum objective over all feasible vertices, `None` if no vertex is
/// feasible. Requires finite bounds on every variable.
pub fn vertex_enumeration(p: &MilpProblem) -> Option<f64> {
    let n = p.n_vars();
    assert!(p.upper.iter().all(|u| u.is_finite()), "oracle needs a bounded box");
    let dense = |coeffs: &[(usize, f64)]| {
        let mut a = vec![0.0; n];
        for &(j, v) in coeffs {
            a[j] += v;
        }
        a
    };
    let mut equalities = Vec::new();
    let mut planes = Vec::new();
    for row in &p.constraints {
        let plane = Plane {
            a: dense(&row.coeffs),
            b: row.rhs,
        };
        if row.relation == Relation::Eq {
            equalities.push(plane);
        } else {
            planes.push(plane);
        }
    }
    for j in 0..n {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        planes.push(Plane { a: e.clone(), b: p.lower[j] });
        planes.push(Plane { a: e, b: p.upper[j] });
    }
    if equalities.len() > n {
        return None;
    }
    let feasible = |x: &[f64]| {
        let tol = 1e-8;
        p.constraints.iter().all(|r| r.violation(x) <= tol * (1.0 + r.rhs.abs()))
            && (0..n).all(|j| x[j] >= p.lower[j] - tol && x[j] <= p.upper[j] + tol)
    };
    let mut best: Option<f64> = None;
    combinations(planes.len(), n - equalities.len(), &mut |pick| {
        let mut rows: Vec<Vec<f64>> = equalities.iter().map(|e| e.a.clone()).collect();
        let mut rhs: Vec<f64> = equalities.iter().map(|e| e.b).collect();
        for &k in pick {
            rows.push(planes[k].a.clone());
            rhs.push(planes[k].b);
        }
        if let Some(x) = solve_square(rows, rhs) {
            if feasible(&x) {
                let obj = p.objective_value(&x);
                if best.is_none_or(|b| obj < b) {
                    best = Some(obj);
                }
            }
        }
    });
    best
}

/// A random LP with `n` variables in a box and `m` rows, feasible by
/// construction (every row is satisfied by a hidden interior point).
pub fn random_lp(seed: u64, n: usize, m: usize) -> MilpProblem {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut p = MilpProblem::new();
    let mut hidden = Vec::with_capacity(n);
    for j in 0..n {
        let lo = if rng.random_bool(0.3) { rng.random_range(-3.0..0.0) } else { 0.0 };
        let hi = lo + rng.random_range(1.0..10.0);
        let c = rng.random_range(-5.0..5.0);
        p.add_var(format!("x{j}"), lo, hi, c);
        hidden.push(rng.random_range(lo..hi));
    }
    for i in 0..m {
        let mut coeffs = Vec::new();
        for j in 0..n {
            if rng.random_bool(0.7) {
                coeffs.push((j, rng.random_range(-4.0..4.0)));
            }
        }
        if coeffs.is_empty() {
            coeffs.push((rng.random_range(0..n), 1.0));
        }
        let act: f64 = coeffs.iter().map(|&(j, a)| a * hidden[j]).sum();
        let (relation, rhs) = match rng.random_range(0..10) {
            0 => (Relation::Eq, act),
            1..=5 => (Relation::Le, act + rng.random_range(0.0..3.0)),
            _ => (Relation::Ge, act - rng.random_range(0.0..3.0)),
        };
        p.add_constraint(format!("r{i}"), coeffs, relation, rhs);
    }
    p
}

/// Shape of the `k`-th seeded LP: `n` in 2..=6, `m` in 1..=12, at most two
/// equality rows being likely.
pub fn random_lp_shape(seed: u64) -> (usize, usize) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    (rng.random_range(2..=6), rng.random_range(1..=12))
}
