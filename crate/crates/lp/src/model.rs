use std::fmt::Write as _;

use crate::LpError;

/// Sense of a linear constraint row.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

impl Relation {
    fn symbol(self) -> &'static str {
        match self {
            Relation::Le => "<=",
            Relation::Eq => "=",
            Relation::Ge => ">=",
        }
    }
}

/// One row `Σ coeffs · x  rel  rhs`, stored sparsely.
#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub coeffs: Vec<(usize, f64)>,
    pub relation: Relation,
    pub rhs: f64,
}

impl Constraint {
    pub fn activity(&self, values: &[f64]) -> f64 {
        self.coeffs.iter().map(|&(j, a)| a * values[j]).sum()
    }
}

/// A maximization problem over variables with finite box bounds.
///
/// Variables are created with [`LinearProgram::add_var`], rows with
/// [`LinearProgram::add_constraint`]. Repeated indices inside one row are
/// summed.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LinearProgram {
    objective: Vec<f64>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    names: Vec<Option<String>>,
    constraints: Vec<Constraint>,
}

impl LinearProgram {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds a variable with objective coefficient `obj` and bounds `[lo, hi]`.
    pub fn add_var(&mut self, obj: f64, lo: f64, hi: f64) -> usize {
        self.objective.push(obj);
        self.lower.push(lo);
        self.upper.push(hi);
        self.names.push(None);
        self.objective.len() - 1
    }

    pub fn add_named_var(&mut self, name: impl Into<String>, obj: f64, lo: f64, hi: f64) -> usize {
        let j = self.add_var(obj, lo, hi);
        self.names[j] = Some(name.into());
        j
    }

    pub fn add_constraint<I>(&mut self, coeffs: I, relation: Relation, rhs: f64) -> usize
    where
        I: IntoIterator<Item = (usize, f64)>,
    {
        let mut row: Vec<(usize, f64)> = Vec::new();
        for (j, a) in coeffs {
            match row.iter_mut().find(|(k, _)| *k == j) {
                Some(entry) => entry.1 += a,
                None => row.push((j, a)),
            }
        }
        row.retain(|&(_, a)| a != 0.0);
        row.sort_by_key(|&(j, _)| j);
        self.constraints.push(Constraint { coeffs: row, relation, rhs });
        self.constraints.len() - 1
    }

    /// Adds a row given as a dense coefficient vector of full width.
    pub fn add_dense_constraint(&mut self, coeffs: &[f64], relation: Relation, rhs: f64) -> usize {
        self.add_constraint(coeffs.iter().copied().enumerate(), relation, rhs)
    }

    pub fn set_bounds(&mut self, j: usize, lo: f64, hi: f64) {
        self.lower[j] = lo;
        self.upper[j] = hi;
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn num_constraints(&self) -> usize {
        self.constraints.len()
    }

    pub fn objective(&self) -> &[f64] {
        &self.objective
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn var_name(&self, j: usize) -> String {
        self.names[j].clone().unwrap_or_else(|| format!("v{j}"))
    }

    pub fn objective_value(&self, values: &[f64]) -> f64 {
        self.objective.iter().zip(values).map(|(c, v)| c * v).sum()
    }

    /// Largest violation of any row or bound at `values`, scaled by `1 + |rhs|`.
    pub fn max_violation(&self, values: &[f64]) -> f64 {
        let mut worst: f64 = 0.0;
        for (j, &v) in values.iter().enumerate() {
            worst = worst.max(self.lower[j] - v).max(v - self.upper[j]);
        }
        for c in &self.constraints {
            let act = c.activity(values);
            let gap = match c.relation {
                Relation::Le => act - c.rhs,
                Relation::Ge => c.rhs - act,
                Relation::Eq => (act - c.rhs).abs(),
            };
            worst = worst.max(gap / (1.0 + c.rhs.abs()));
        }
        worst
    }

    pub(crate) fn check_well_formed(&self) -> Result<(), LpError> {
        let n = self.num_vars();
        for j in 0..n {
            let (lo, hi) = (self.lower[j], self.upper[j]);
            if !lo.is_finite() || !hi.is_finite() || lo > hi || !self.objective[j].is_finite() {
                return Err(LpError::Malformed(format!(
                    "variable {} has bounds [{lo}, {hi}] and cost {}",
                    self.var_name(j),
                    self.objective[j]
                )));
            }
        }
        for (r, c) in self.constraints.iter().enumerate() {
            if !c.rhs.is_finite() {
                return Err(LpError::Malformed(format!("row {r} has non-finite rhs")));
            }
            if let Some(&(j, a)) = c.coeffs.iter().find(|&&(j, a)| j >= n || !a.is_finite()) {
                return Err(LpError::Malformed(format!("row {r} has entry ({j}, {a})")));
            }
        }
        Ok(())
    }

    /// Renders the model in CPLEX LP text format, declaring `binaries` in a
    /// `Binaries` section.
    pub fn to_lp_format(&self, binaries: &[usize]) -> String {
        let mut out = String::from("\\ matchplan model\nMaximize\n obj:");
        let term = |out: &mut String, a: f64, name: &str| {
            let sign = if a < 0.0 { '-' } else { '+' };
            let _ = write!(out, " {sign} {} {name}", a.abs());
        };
        let mut any = false;
        for (j, &c) in self.objective.iter().enumerate() {
            if c != 0.0 {
                term(&mut out, c, &self.var_name(j));
                any = true;
            }
        }
        if !any {
            out.push_str(" 0");
        }
        out.push_str("\nSubject To\n");
        for (r, c) in self.constraints.iter().enumerate() {
            let _ = write!(out, " c{r}:");
            if c.coeffs.is_empty() {
                out.push_str(" 0");
            }
            for &(j, a) in &c.coeffs {
                term(&mut out, a, &self.var_name(j));
            }
            let _ = writeln!(out, " {} {}", c.relation.symbol(), c.rhs);
        }
        out.push_str("Bounds\n");
        for j in 0..self.num_vars() {
            let _ = writeln!(out, " {} <= {} <= {}", self.lower[j], self.var_name(j), self.upper[j]);
        }
        if !binaries.is_empty() {
            out.push_str("Binaries\n");
            for &j in binaries {
                let _ = writeln!(out, " {}", self.var_name(j));
            }
        }
        out.push_str("End\n");
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Optimal,
    Infeasible,
    Unbounded,
}

/// Result of an LP or MIP solve. `values` is empty unless the status is optimal.
#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub values: Vec<f64>,
    pub objective_value: f64,
    pub status: Status,
}

impl Solution {
    pub fn is_optimal(&self) -> bool {
        self.status == Status::Optimal
    }

    pub(crate) fn infeasible() -> Self {
        Solution { values: Vec::new(), objective_value: f64::NEG_INFINITY, status: Status::Infeasible }
    }

    pub(crate) fn unbounded() -> Self {
        Solution { values: Vec::new(), objective_value: f64::INFINITY, status: Status::Unbounded }
    }
}

/// A linear program in which some variables must take values in {0, 1}.
#[derive(Debug, Clone, PartialEq)]
pub struct MipProblem {
    pub lp: LinearProgram,
    pub binaries: Vec<usize>,
}

impl MipProblem {
    pub fn new(lp: LinearProgram, mut binaries: Vec<usize>) -> Result<Self, LpError> {
        binaries.sort_unstable();
        binaries.dedup();
        for &j in &binaries {
            if j >= lp.num_vars() {
                return Err(LpError::Malformed(format!("binary index {j} out of range")));
            }
            if lp.lower()[j] < 0.0 || lp.upper()[j] > 1.0 {
                return Err(LpError::Malformed(format!(
                    "binary variable {} must have bounds inside [0, 1]",
                    lp.var_name(j)
                )));
            }
        }
        Ok(MipProblem { lp, binaries })
    }

    pub fn to_lp_format(&self) -> String {
        self.lp.to_lp_format(&self.binaries)
    }
}
