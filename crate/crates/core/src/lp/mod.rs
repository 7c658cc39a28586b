//! Small dense linear programs.
//!
//! [`LinearProgram`] is a general form (objective sense, `<=`/`>=`/`=` rows,
//! nonnegative or free variables). It is solved either directly or through
//! its dual; the dual route keeps the basis small when there are far more
//! rows than variables, as in the screening oracle.

mod simplex;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use simplex::{SparseColumn, StandardForm};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LpError {
    #[error("problem is infeasible")]
    Infeasible,
    #[error("problem is unbounded")]
    Unbounded,
    #[error("problem is infeasible or unbounded")]
    InfeasibleOrUnbounded,
    #[error("iteration limit reached after {0} pivots")]
    IterationLimit(usize),
    #[error("basis became singular")]
    Singular,
    #[error("dimension mismatch: {0}")]
    Dimension(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sense {
    Maximize,
    Minimize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Bound {
    NonNegative,
    Free,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Constraint {
    pub coeffs: Vec<(usize, f64)>,
    pub relation: Relation,
    pub rhs: f64,
}

/// Which problem the simplex method is run on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Route {
    Primal,
    Dual,
    /// Dual when rows outnumber variables two to one.
    Auto,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearProgram {
    pub sense: Sense,
    pub objective: Vec<f64>,
    pub bounds: Vec<Bound>,
    pub constraints: Vec<Constraint>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LpSolution {
    pub x: Vec<f64>,
    pub objective: f64,
    pub iterations: usize,
}

impl LinearProgram {
    pub fn new(sense: Sense, variables: usize) -> Self {
        LinearProgram {
            sense,
            objective: vec![0.0; variables],
            bounds: vec![Bound::NonNegative; variables],
            constraints: Vec::new(),
        }
    }

    pub fn variables(&self) -> usize {
        self.objective.len()
    }

    pub fn set_free(&mut self, var: usize) {
        self.bounds[var] = Bound::Free;
    }

    pub fn add_constraint(&mut self, coeffs: Vec<(usize, f64)>, relation: Relation, rhs: f64) {
        self.constraints.push(Constraint {
            coeffs,
            relation,
            rhs,
        });
    }

    fn check(&self) -> Result<(), LpError> {
        let n = self.variables();
        if self.bounds.len() != n {
            return Err(LpError::Dimension(
                "bounds and objective differ in length".into(),
            ));
        }
        for (k, c) in self.constraints.iter().enumerate() {
            if !c.rhs.is_finite() {
                return Err(LpError::Dimension(format!("row {k} has non-finite rhs")));
            }
            if let Some(&(j, _)) = c.coeffs.iter().find(|(j, v)| *j >= n || !v.is_finite()) {
                return Err(LpError::Dimension(format!(
                    "row {k} references variable {j}"
                )));
            }
        }
        if self.objective.iter().any(|c| !c.is_finite()) {
            return Err(LpError::Dimension("non-finite objective".into()));
        }
        Ok(())
    }

    /// Largest violation of any row or bound by `x`.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let mut worst: f64 = 0.0;
        for (v, b) in x.iter().zip(&self.bounds) {
            if *b == Bound::NonNegative {
                worst = worst.max(-v);
            }
        }
        for c in &self.constraints {
            let lhs: f64 = c.coeffs.iter().map(|&(j, a)| a * x[j]).sum();
            let v = match c.relation {
                Relation::Le => lhs - c.rhs,
                Relation::Ge => c.rhs - lhs,
                Relation::Eq => (lhs - c.rhs).abs(),
            };
            worst = worst.max(v);
        }
        worst
    }

    pub fn solve(&self) -> Result<LpSolution, LpError> {
        self.solve_via(Route::Auto)
    }

    pub fn solve_via(&self, route: Route) -> Result<LpSolution, LpError> {
        self.check()?;
        let use_dual = match route {
            Route::Primal => false,
            Route::Dual => true,
            Route::Auto => self.constraints.len() > 2 * self.variables().max(1),
        };
        let Solved(x, iterations) = if use_dual {
            self.solve_dual()?
        } else {
            self.solve_primal()?
        };
        let objective = x.iter().zip(&self.objective).map(|(a, b)| a * b).sum();
        Ok(LpSolution {
            x,
            objective,
            iterations,
        })
    }

    fn iteration_cap(&self) -> usize {
        50 * (self.constraints.len() + self.variables()) + 1000
    }

    /// Slack/surplus columns for inequalities, free variables split in two.
    fn solve_primal(&self) -> Result<Solved, LpError> {
        let n = self.variables();
        let m = self.constraints.len();
        let flip = if self.sense == Sense::Maximize {
            -1.0
        } else {
            1.0
        };
        let mut columns: Vec<SparseColumn> = vec![Vec::new(); n];
        for (i, c) in self.constraints.iter().enumerate() {
            for &(j, a) in &c.coeffs {
                push_entry(&mut columns[j], i, a);
            }
        }
        let mut cost: Vec<f64> = self.objective.iter().map(|c| flip * c).collect();
        let mut negative_part = vec![None; n];
        for j in 0..n {
            if self.bounds[j] == Bound::Free {
                negative_part[j] = Some(columns.len());
                let col = columns[j].iter().map(|&(i, a)| (i, -a)).collect();
                columns.push(col);
                cost.push(-cost[j]);
            }
        }
        for (i, c) in self.constraints.iter().enumerate() {
            match c.relation {
                Relation::Le => columns.push(vec![(i, 1.0)]),
                Relation::Ge => columns.push(vec![(i, -1.0)]),
                Relation::Eq => continue,
            }
            cost.push(0.0);
        }
        let problem = StandardForm {
            rows: m,
            columns,
            rhs: self.constraints.iter().map(|c| c.rhs).collect(),
            cost,
        };
        let sol = simplex::solve(&problem, self.iteration_cap())?;
        let x = (0..n)
            .map(|j| sol.x[j] - negative_part[j].map_or(0.0, |k| sol.x[k]))
            .collect();
        Ok(Solved(x, sol.iterations))
    }

    /// Solves `min b'y` over the dual and reads the primal point off the
    /// simplex multipliers.
    fn solve_dual(&self) -> Result<Solved, LpError> {
        let n = self.variables();
        // Primal as `max c'x` with rows `a'x <= b` or `a'x = b`.
        let flip = if self.sense == Sense::Maximize {
            1.0
        } else {
            -1.0
        };
        let mut columns: Vec<SparseColumn> = Vec::new();
        let mut cost = Vec::new();
        for c in &self.constraints {
            let s = if c.relation == Relation::Ge {
                -1.0
            } else {
                1.0
            };
            let mut col: SparseColumn = Vec::with_capacity(c.coeffs.len());
            for &(j, a) in &c.coeffs {
                push_entry(&mut col, j, s * a);
            }
            if c.relation == Relation::Eq {
                columns.push(col.iter().map(|&(j, a)| (j, -a)).collect());
                cost.push(-s * c.rhs);
            }
            columns.push(col);
            cost.push(s * c.rhs);
        }
        for j in 0..n {
            if self.bounds[j] == Bound::NonNegative {
                columns.push(vec![(j, -1.0)]);
                cost.push(0.0);
            }
        }
        let problem = StandardForm {
            rows: n,
            columns,
            rhs: self.objective.iter().map(|c| flip * c).collect(),
            cost,
        };
        let sol = match simplex::solve(&problem, self.iteration_cap()) {
            Ok(sol) => sol,
            Err(LpError::Infeasible) => return Err(LpError::InfeasibleOrUnbounded),
            Err(LpError::Unbounded) => return Err(LpError::Infeasible),
            Err(e) => return Err(e),
        };
        Ok(Solved(sol.duals, sol.iterations))
    }
}

struct Solved(Vec<f64>, usize);

fn push_entry(col: &mut SparseColumn, row: usize, value: f64) {
    if value == 0.0 {
        return;
    }
    match col.iter_mut().find(|(r, _)| *r == row) {
        Some(entry) => entry.1 += value,
        None => col.push((row, value)),
    }
}
