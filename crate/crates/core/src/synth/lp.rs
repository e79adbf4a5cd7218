//! Small modeling layer over the simplex solver with LP-format export.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use microlp::{ComparisonOp, OptimizationDirection, Problem};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RowKind {
    Eq,
    Ge,
    Le,
}

#[derive(Clone, Debug)]
pub struct Row {
    pub name: String,
    pub terms: Vec<(usize, f64)>,
    pub kind: RowKind,
    pub rhs: f64,
}

/// A minimization LP over non-negative variables.
#[derive(Clone, Debug, Default)]
pub struct LinearProgram {
    names: Vec<String>,
    objective: Vec<f64>,
    rows: Vec<Row>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum LpOutcome {
    Optimal(LpSolution),
    Infeasible,
    Unbounded,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LpSolution {
    pub objective: f64,
    pub values: Vec<f64>,
}

impl LinearProgram {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_var(&mut self, name: impl Into<String>, cost: f64) -> usize {
        self.names.push(name.into());
        self.objective.push(cost);
        self.names.len() - 1
    }

    /// Adds a row; repeated variables in `terms` are summed.
    pub fn add_row(&mut self, name: impl Into<String>, terms: Vec<(usize, f64)>, kind: RowKind, rhs: f64) {
        let mut merged: BTreeMap<usize, f64> = BTreeMap::new();
        for (v, c) in terms {
            *merged.entry(v).or_insert(0.0) += c;
        }
        let terms = merged.into_iter().filter(|(_, c)| *c != 0.0).collect();
        self.rows.push(Row { name: name.into(), terms, kind, rhs });
    }

    pub fn num_vars(&self) -> usize {
        self.names.len()
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn rows(&self) -> &[Row] {
        &self.rows
    }

    /// Copy without the rows rejected by `keep`.
    pub fn filtered(&self, keep: impl Fn(&Row) -> bool) -> LinearProgram {
        LinearProgram {
            names: self.names.clone(),
            objective: self.objective.clone(),
            rows: self.rows.iter().filter(|r| keep(r)).cloned().collect(),
        }
    }

    pub fn activity(&self, row: &Row, values: &[f64]) -> f64 {
        row.terms.iter().map(|&(v, c)| c * values[v]).sum()
    }

    /// Solves the program. A numerical breakdown of the simplex is retried
    /// on a cleaned copy with tiny coefficients dropped and the rows reversed.
    pub fn solve(&self) -> Result<LpOutcome, String> {
        match self.solve_once() {
            Err(first) => {
                let mut cleaned = self.clone();
                for row in &mut cleaned.rows {
                    row.terms.retain(|&(_, c)| c.abs() > 1e-11);
                }
                for c in &mut cleaned.objective {
                    if c.abs() <= 1e-11 {
                        *c = 0.0;
                    }
                }
                cleaned.rows.reverse();
                cleaned.solve_once().map_err(|second| format!("{first}; retry: {second}"))
            }
            ok => ok,
        }
    }

    fn solve_once(&self) -> Result<LpOutcome, String> {
        let mut problem = Problem::new(OptimizationDirection::Minimize);
        let vars: Vec<_> = self.objective.iter().map(|&c| problem.add_var(c, (0.0, f64::INFINITY))).collect();
        for row in &self.rows {
            let expr: Vec<_> = row.terms.iter().map(|&(v, c)| (vars[v], c)).collect();
            let op = match row.kind {
                RowKind::Eq => ComparisonOp::Eq,
                RowKind::Ge => ComparisonOp::Ge,
                RowKind::Le => ComparisonOp::Le,
            };
            problem.add_constraint(expr.as_slice(), op, row.rhs);
        }
        match problem.solve() {
            Ok(outcome) => {
                let solution = outcome.into_solution().map_err(|e| format!("{e:?}"))?;
                let values = vars.iter().map(|&v| solution.var_value(v).max(0.0)).collect();
                Ok(LpOutcome::Optimal(LpSolution { objective: solution.objective(), values }))
            }
            Err(microlp::Error::Infeasible) => Ok(LpOutcome::Infeasible),
            Err(microlp::Error::Unbounded) => Ok(LpOutcome::Unbounded),
            Err(e) => Err(e.to_string()),
        }
    }

    /// CPLEX LP text format.
    pub fn to_lp_format(&self) -> String {
        let mut out = String::from("\\ generated by safeplan\nMinimize\n obj:");
        let mut line_len = 0;
        let push_term = |out: &mut String, coeff: f64, name: &str, first: bool, line_len: &mut usize| {
            let piece = match (coeff < 0.0, first) {
                (true, _) => format!(" - {} {name}", fmt_num(-coeff)),
                (false, true) => format!(" {} {name}", fmt_num(coeff)),
                (false, false) => format!(" + {} {name}", fmt_num(coeff)),
            };
            if *line_len > 200 {
                out.push_str("\n  ");
                *line_len = 0;
            }
            *line_len += piece.len();
            out.push_str(&piece);
        };
        let mut first = true;
        for (v, &c) in self.objective.iter().enumerate() {
            if c != 0.0 {
                push_term(&mut out, c, &self.names[v], first, &mut line_len);
                first = false;
            }
        }
        if first {
            write!(out, " 0 {}", self.names.first().map_or("x", |s| s.as_str())).unwrap();
        }
        out.push_str("\nSubject To\n");
        for row in &self.rows {
            write!(out, " {}:", row.name).unwrap();
            line_len = 0;
            let mut first = true;
            for &(v, c) in &row.terms {
                push_term(&mut out, c, &self.names[v], first, &mut line_len);
                first = false;
            }
            if first {
                write!(out, " 0 {}", self.names.first().map_or("x", |s| s.as_str())).unwrap();
            }
            let op = match row.kind {
                RowKind::Eq => "=",
                RowKind::Ge => ">=",
                RowKind::Le => "<=",
            };
            writeln!(out, " {op} {}", fmt_num(row.rhs)).unwrap();
        }
        out.push_str("End\n");
        out
    }
}

fn fmt_num(v: f64) -> String {
    let s = format!("{v}");
    if s.contains('e') || s.contains('.') {
        s
    } else {
        format!("{s}.0")
    }
}
