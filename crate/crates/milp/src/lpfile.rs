//! CPLEX-LP text form of a [`MilpProblem`].
//!
//! The writer lists every variable in the `Bounds` section in index order so
//! that [`read_lp`] restores the original column order.

use std::collections::HashMap;
use std::fmt::Write as _;

use crate::error::{Result, SolverError};
use crate::problem::{MilpProblem, Relation};

const MAX_TERMS_PER_LINE: usize = 8;

/// True if `name` can appear as an identifier in LP text.
pub fn is_valid_name(name: &str) -> bool {
    let Some(first) = name.chars().next() else {
        return false;
    };
    !first.is_ascii_digit()
        && first != '.'
        && name.chars().all(valid_char)
        && !is_number(name)
        && !name.eq_ignore_ascii_case("nan")
        && section_of(name).is_none()
        && !name.eq_ignore_ascii_case("free")
}

fn valid_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || "_.!\"#$%&()/,;?@`'{}|~".contains(c)
}

fn push_terms(out: &mut String, terms: &[(usize, f64)], names: &[String]) {
    for (k, &(j, a)) in terms.iter().enumerate() {
        if k > 0 && k % MAX_TERMS_PER_LINE == 0 {
            out.push_str("\n   ");
        }
        if a < 0.0 || (a == 0.0 && a.is_sign_negative()) {
            let _ = write!(out, " - {} {}", -a, names[j]);
        } else {
            let _ = write!(out, " + {} {}", a, names[j]);
        }
    }
}

pub fn write_lp(problem: &MilpProblem) -> Result<String> {
    problem.validate()?;
    for name in problem
        .names
        .iter()
        .chain(problem.constraints.iter().map(|c| &c.name))
    {
        if !is_valid_name(name) {
            return Err(SolverError::InvalidProblem(format!("`{name}` is not a valid LP identifier")));
        }
    }
    let mut out = String::new();
    out.push_str("\\ written by nfvplan-milp\n");
    out.push_str("Minimize\n obj:");
    let obj: Vec<(usize, f64)> = problem
        .objective
        .iter()
        .enumerate()
        .filter(|(_, &c)| c != 0.0)
        .map(|(j, &c)| (j, c))
        .collect();
    push_terms(&mut out, &obj, &problem.names);
    out.push_str("\nSubject To\n");
    for row in &problem.constraints {
        let _ = write!(out, " {}:", row.name);
        if row.coeffs.is_empty() {
            // keep the row; an LP reader needs at least one term
            let _ = write!(out, " + 0 {}", problem.names.first().map(String::as_str).unwrap_or("x"));
        } else {
            push_terms(&mut out, &row.coeffs, &problem.names);
        }
        let _ = writeln!(out, " {} {}", row.relation.symbol(), row.rhs);
    }
    out.push_str("Bounds\n");
    for j in 0..problem.n_vars() {
        let (lo, hi, name) = (problem.lower[j], problem.upper[j], &problem.names[j]);
        if hi == f64::INFINITY {
            let _ = writeln!(out, " {name} >= {lo}");
        } else if lo == hi {
            let _ = writeln!(out, " {name} = {lo}");
        } else {
            let _ = writeln!(out, " {lo} <= {name} <= {hi}");
        }
    }
    if problem.binary.iter().any(|&b| b) {
        out.push_str("Binaries\n");
        for j in (0..problem.n_vars()).filter(|&j| problem.binary[j]) {
            let _ = writeln!(out, " {}", problem.names[j]);
        }
    }
    out.push_str("End\n");
    Ok(out)
}

#[derive(Clone, Copy, PartialEq)]
enum Section {
    None,
    Objective,
    Constraints,
    Bounds,
    Binaries,
    End,
}

fn section_of(line: &str) -> Option<Section> {
    match line.to_ascii_lowercase().as_str() {
        "minimize" | "minimise" | "min" => Some(Section::Objective),
        "subject to" | "st" | "s.t." | "such that" => Some(Section::Constraints),
        "bounds" => Some(Section::Bounds),
        "binaries" | "binary" | "bin" => Some(Section::Binaries),
        "end" => Some(Section::End),
        _ => None,
    }
}

fn parse_err(line: usize, msg: impl Into<String>) -> SolverError {
    SolverError::LpParse { line, msg: msg.into() }
}

fn parse_num(tok: &str, line: usize) -> Result<f64> {
    match tok.to_ascii_lowercase().as_str() {
        "inf" | "+inf" | "infinity" | "+infinity" => Ok(f64::INFINITY),
        "-inf" | "-infinity" => Ok(f64::NEG_INFINITY),
        _ => tok.parse().map_err(|_| parse_err(line, format!("expected a number, found `{tok}`"))),
    }
}

fn is_number(tok: &str) -> bool {
    tok.parse::<f64>().is_ok() || matches!(tok.to_ascii_lowercase().as_str(), "inf" | "+inf" | "-inf" | "infinity" | "-infinity")
}

/// Parses `[+|-] [coef] name ...` into (name, coefficient) pairs.
fn parse_terms(tokens: &[&str], line: usize) -> Result<Vec<(String, f64)>> {
    let mut terms = Vec::new();
    let mut sign = 1.0;
    let mut coef: Option<f64> = None;
    for &tok in tokens {
        match tok {
            "+" => {}
            "-" => sign = -sign,
            t if is_number(t) => {
                if coef.is_some() {
                    return Err(parse_err(line, "two coefficients in a row"));
                }
                coef = Some(parse_num(t, line)?);
            }
            name => {
                terms.push((name.to_string(), sign * coef.unwrap_or(1.0)));
                sign = 1.0;
                coef = None;
            }
        }
    }
    if coef.is_some() {
        return Err(parse_err(line, "dangling coefficient"));
    }
    Ok(terms)
}

fn tokenize(s: &str) -> Vec<String> {
    let mut spaced = String::with_capacity(s.len() + 8);
    let chars: Vec<char> = s.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        match c {
            '<' | '>' | '=' => {
                spaced.push(' ');
                spaced.push(c);
                if i + 1 < chars.len() && chars[i + 1] == '=' {
                    spaced.push('=');
                    i += 1;
                }
                spaced.push(' ');
            }
            '+' | '-' => {
                // exponent sign stays attached to its number
                let prev = spaced.chars().last();
                if matches!(prev, Some('e') | Some('E')) && spaced.trim_end().split_whitespace().last().is_some_and(|t| t[..t.len() - 1].parse::<f64>().is_ok()) {
                    spaced.push(c);
                } else {
                    spaced.push(' ');
                    spaced.push(c);
                    spaced.push(' ');
                }
            }
            _ => spaced.push(c),
        }
        i += 1;
    }
    spaced.split_whitespace().map(str::to_string).collect()
}

struct Builder {
    problem: MilpProblem,
    index: HashMap<String, usize>,
}

impl Builder {
    fn var(&mut self, name: &str) -> usize {
        if let Some(&j) = self.index.get(name) {
            return j;
        }
        let j = self.problem.add_var(name, 0.0, f64::INFINITY, 0.0);
        self.index.insert(name.to_string(), j);
        j
    }
}

/// Reads the subset of CPLEX-LP emitted by [`write_lp`] (minimization,
/// linear rows, bounds, binaries).
pub fn read_lp(text: &str) -> Result<MilpProblem> {
    // statements may span lines; gather them per section first
    let mut statements: Vec<(Section, usize, String)> = Vec::new();
    let mut section = Section::None;
    for (k, raw) in text.lines().enumerate() {
        let line_no = k + 1;
        let line = raw.split('\\').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if let Some(s) = section_of(line) {
            section = s;
            continue;
        }
        match section {
            Section::None => return Err(parse_err(line_no, "content before `Minimize`")),
            Section::End => return Err(parse_err(line_no, "content after `End`")),
            Section::Objective | Section::Constraints => {
                let starts_new = line.contains(':');
                match statements.last_mut() {
                    Some((s, _, stmt)) if *s == section && !starts_new => {
                        stmt.push(' ');
                        stmt.push_str(line);
                    }
                    _ => statements.push((section, line_no, line.to_string())),
                }
            }
            _ => statements.push((section, line_no, line.to_string())),
        }
    }

    // bounds lines fix the column order
    let mut b = Builder {
        problem: MilpProblem::new(),
        index: HashMap::new(),
    };
    for (s, line, stmt) in &statements {
        if *s == Section::Bounds {
            let toks = tokenize(stmt);
            if let Some(name) = toks.iter().find(|t| !is_number(t) && !matches!(t.as_str(), "<=" | ">=" | "=" | "<" | ">" | "+" | "-")) {
                b.var(name);
            } else {
                return Err(parse_err(*line, "bound without a variable"));
            }
        }
    }

    let mut objective_seen = false;
    for (s, line, stmt) in &statements {
        let line = *line;
        match s {
            Section::Objective => {
                if objective_seen {
                    return Err(parse_err(line, "second objective"));
                }
                objective_seen = true;
                let body = stmt.split_once(':').map_or(stmt.as_str(), |(_, r)| r);
                let toks = tokenize(body);
                let toks: Vec<&str> = toks.iter().map(String::as_str).collect();
                for (name, c) in parse_terms(&toks, line)? {
                    let j = b.var(&name);
                    b.problem.objective[j] += c;
                }
            }
            Section::Constraints => {
                let (name, body) = stmt
                    .split_once(':')
                    .map(|(n, r)| (n.trim().to_string(), r))
                    .unwrap_or_else(|| (format!("r{}", b.problem.n_constraints()), stmt.as_str()));
                let toks = tokenize(body);
                let pos = toks
                    .iter()
                    .position(|t| matches!(t.as_str(), "<=" | ">=" | "=" | "<" | ">" | "=<" | "=>"))
                    .ok_or_else(|| parse_err(line, "row without a relation"))?;
                let relation = match toks[pos].as_str() {
                    "<=" | "<" | "=<" => Relation::Le,
                    ">=" | ">" | "=>" => Relation::Ge,
                    _ => Relation::Eq,
                };
                let rhs_toks = &toks[pos + 1..];
                let rhs = match rhs_toks {
                    [v] => parse_num(v, line)?,
                    [sign, v] if sign == "-" => -parse_num(v, line)?,
                    [sign, v] if sign == "+" => parse_num(v, line)?,
                    _ => return Err(parse_err(line, "right-hand side must be a single number")),
                };
                let lhs: Vec<&str> = toks[..pos].iter().map(String::as_str).collect();
                let mut coeffs = Vec::new();
                for (vname, c) in parse_terms(&lhs, line)? {
                    coeffs.push((b.var(&vname), c));
                }
                b.problem.constraints.push(crate::problem::Constraint {
                    name,
                    coeffs,
                    relation,
                    rhs,
                });
            }
            Section::Bounds => {
                let toks = tokenize(stmt);
                let toks = join_signs(&toks);
                match toks.as_slice() {
                    [lo, op1, name, op2, hi] if op1 == "<=" && op2 == "<=" => {
                        let j = b.var(name);
                        b.problem.lower[j] = parse_num(lo, line)?;
                        b.problem.upper[j] = parse_num(hi, line)?;
                    }
                    [name, op, v] if !is_number(name) => {
                        let j = b.var(name);
                        let v = parse_num(v, line)?;
                        match op.as_str() {
                            ">=" => b.problem.lower[j] = v,
                            "<=" => b.problem.upper[j] = v,
                            "=" => {
                                b.problem.lower[j] = v;
                                b.problem.upper[j] = v;
                            }
                            _ => return Err(parse_err(line, format!("unknown bound operator `{op}`"))),
                        }
                    }
                    [name, free] if free.eq_ignore_ascii_case("free") => {
                        return Err(parse_err(line, format!("free variable `{name}` is not supported")));
                    }
                    _ => return Err(parse_err(line, "unrecognized bound")),
                }
            }
            Section::Binaries => {
                for name in stmt.split_whitespace() {
                    let j = b.var(name);
                    b.problem.binary[j] = true;
                    b.problem.lower[j] = 0.0;
                    b.problem.upper[j] = 1.0;
                }
            }
            Section::None | Section::End => unreachable!(),
        }
    }
    b.problem.validate()?;
    Ok(b.problem)
}

/// Glues a leading sign token onto the number that follows it.
fn join_signs(toks: &[String]) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    let mut pending: Option<&str> = None;
    for t in toks {
        if t == "-" || t == "+" {
            pending = Some(t);
            continue;
        }
        match pending.take() {
            Some("-") => out.push(format!("-{t}")),
            _ => out.push(t.clone()),
        }
    }
    out
}
