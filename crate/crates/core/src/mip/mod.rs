//! A small LP-based branch-and-cut engine with lazy-constraint and
//! separation callbacks, node-local rows, a lower cutoff and a solution
//! limit. It stands in for a commercial MIP solver in both the master
//! problem and the separation problem.

mod bnc;
pub mod lp;

pub use bnc::{
    branch_and_cut, Branching, CandidateVerdict, CutRow, MipCallbacks, MipControls, MipResult, MipStatus, NoCallbacks,
    NodeContext, NodeSelection,
};
pub use lp::{LpEngine, LpStatus};

pub const INTEGRALITY_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ObjSense {
    Minimize,
    Maximize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Variable {
    pub lower: f64,
    pub upper: f64,
    pub integer: bool,
}

impl Variable {
    pub fn binary() -> Self {
        Variable {
            lower: 0.0,
            upper: 1.0,
            integer: true,
        }
    }

    pub fn continuous(lower: f64, upper: f64) -> Self {
        Variable {
            lower,
            upper,
            integer: false,
        }
    }
}

/// `lower ≤ Σ coeffs ≤ upper`.
#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub coeffs: Vec<(usize, f64)>,
    pub lower: f64,
    pub upper: f64,
}

impl Row {
    pub fn new(coeffs: Vec<(usize, f64)>, lower: f64, upper: f64) -> Self {
        Row { coeffs, lower, upper }
    }

    pub fn activity(&self, x: &[f64]) -> f64 {
        self.coeffs.iter().map(|&(j, a)| a * x[j]).sum()
    }

    /// Amount by which `x` violates the row (0 when satisfied).
    pub fn violation(&self, x: &[f64]) -> f64 {
        let v = self.activity(x);
        (self.lower - v).max(v - self.upper).max(0.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MipModel {
    pub variables: Vec<Variable>,
    pub objective: Vec<f64>,
    pub sense: ObjSense,
    pub rows: Vec<Row>,
    /// Every feasible point has an integral objective value, which lets the
    /// search prune nodes that cannot improve by at least one.
    pub integral_objective: bool,
}

impl MipModel {
    pub fn new(sense: ObjSense) -> Self {
        MipModel {
            variables: Vec::new(),
            objective: Vec::new(),
            sense,
            rows: Vec::new(),
            integral_objective: false,
        }
    }

    pub fn add_variable(&mut self, var: Variable, objective: f64) -> usize {
        self.variables.push(var);
        self.objective.push(objective);
        self.variables.len() - 1
    }

    pub fn add_row(&mut self, row: Row) {
        debug_assert!(row.coeffs.iter().all(|&(j, _)| j < self.variables.len()));
        self.rows.push(row);
    }

    pub fn num_vars(&self) -> usize {
        self.variables.len()
    }

    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.objective.iter().zip(x).map(|(c, v)| c * v).sum()
    }

    /// Feasibility of `x` against bounds, rows and integrality.
    pub fn is_feasible(&self, x: &[f64], tol: f64) -> bool {
        x.len() == self.num_vars()
            && self.variables.iter().zip(x).all(|(v, &xv)| {
                xv >= v.lower - tol && xv <= v.upper + tol && (!v.integer || (xv - xv.round()).abs() <= tol)
            })
            && self.rows.iter().all(|r| r.violation(x) <= tol)
    }

    pub(crate) fn engine(&self) -> LpEngine {
        let sign = match self.sense {
            ObjSense::Minimize => 1.0,
            ObjSense::Maximize => -1.0,
        };
        let mut lp = LpEngine::new(
            self.objective.iter().map(|c| sign * c).collect(),
            self.variables.iter().map(|v| v.lower).collect(),
            self.variables.iter().map(|v| v.upper).collect(),
        );
        for r in &self.rows {
            lp.add_row(&r.coeffs, r.lower, r.upper);
        }
        lp
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum LpResult {
    Optimal { values: Vec<f64>, objective: f64 },
    Infeasible,
    Unbounded,
}

/// Solves the continuous relaxation of `model`.
///
/// # Panics
/// If the model has no variables or the simplex hits its iteration cap.
pub fn solve_lp(model: &MipModel) -> LpResult {
    assert!(model.num_vars() > 0, "model has no variables");
    let mut lp = model.engine();
    match lp.solve() {
        LpStatus::Optimal => {
            let values = lp.values().to_vec();
            let objective = model.objective_value(&values);
            LpResult::Optimal { values, objective }
        }
        LpStatus::Infeasible => LpResult::Infeasible,
        LpStatus::Unbounded => LpResult::Unbounded,
        LpStatus::IterationLimit => panic!("simplex iteration limit reached"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lp_examples() {
        let mut m = MipModel::new(ObjSense::Maximize);
        let t = m.add_variable(Variable::continuous(-f64::INFINITY, f64::INFINITY), 1.0);
        m.add_row(Row::new(vec![(t, 1.0)], -f64::INFINITY, 5.0));
        assert!(matches!(solve_lp(&m), LpResult::Optimal { objective, .. } if (objective - 5.0).abs() < 1e-9));

        let mut m = MipModel::new(ObjSense::Maximize);
        m.add_variable(Variable::continuous(0.0, 1.0), 1.0);
        m.add_variable(Variable::continuous(0.0, 1.0), 1.0);
        m.add_row(Row::new(vec![(0, 1.0), (1, 1.0)], -f64::INFINITY, 1.0));
        assert!(matches!(solve_lp(&m), LpResult::Optimal { objective, .. } if (objective - 1.0).abs() < 1e-9));

        let mut m = MipModel::new(ObjSense::Maximize);
        m.add_variable(Variable::continuous(-f64::INFINITY, f64::INFINITY), 1.0);
        m.add_row(Row::new(vec![(0, 1.0)], -f64::INFINITY, 3.0));
        m.add_row(Row::new(vec![(0, 1.0)], 4.0, f64::INFINITY));
        assert_eq!(solve_lp(&m), LpResult::Infeasible);

        let mut m = MipModel::new(ObjSense::Maximize);
        m.add_variable(Variable::continuous(0.0, f64::INFINITY), 1.0);
        assert_eq!(solve_lp(&m), LpResult::Unbounded);
    }
}
