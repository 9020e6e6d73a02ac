//! Problem containers for the bundled optimization backends.

use crate::error::{Error, Result};
use crate::matrix::RealMatrix;

/// Variable integrality class.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarKind {
    Continuous,
    Binary,
}

/// One decision variable.
#[derive(Debug, Clone)]
pub struct Variable {
    pub name: String,
    pub kind: VarKind,
    pub lo: f64,
    pub up: f64,
    pub obj: f64,
}

/// One linear row with two-sided bounds `lo <= a'x <= up`. Equalities use
/// `lo == up`; one-sided rows use infinities.
#[derive(Debug, Clone)]
pub struct LinearRow {
    pub name: String,
    pub coeffs: Vec<(usize, f64)>,
    pub lo: f64,
    pub up: f64,
}

/// A mixed-integer linear program in minimization form.
#[derive(Debug, Clone, Default)]
pub struct MilpModel {
    pub vars: Vec<Variable>,
    pub rows: Vec<LinearRow>,
}

impl MilpModel {
    pub fn new() -> Self {
        MilpModel::default()
    }

    pub fn add_var(&mut self, name: impl Into<String>, kind: VarKind, lo: f64, up: f64, obj: f64) -> usize {
        self.vars.push(Variable {
            name: name.into(),
            kind,
            lo,
            up,
            obj,
        });
        self.vars.len() - 1
    }

    pub fn add_binary(&mut self, name: impl Into<String>, obj: f64) -> usize {
        self.add_var(name, VarKind::Binary, 0.0, 1.0, obj)
    }

    pub fn add_row(&mut self, name: impl Into<String>, coeffs: Vec<(usize, f64)>, lo: f64, up: f64) -> usize {
        self.rows.push(LinearRow {
            name: name.into(),
            coeffs,
            lo,
            up,
        });
        self.rows.len() - 1
    }

    pub fn num_binaries(&self) -> usize {
        self.vars.iter().filter(|v| v.kind == VarKind::Binary).count()
    }

    /// Structural validation: indices in range, finite coefficients, ordered
    /// bounds, binaries confined to [0, 1].
    pub fn validate(&self) -> Result<()> {
        for v in &self.vars {
            if !v.obj.is_finite() {
                return Err(Error::invalid("MilpModel", format!("non-finite objective on {}", v.name)));
            }
            if v.lo > v.up {
                return Err(Error::invalid(
                    "MilpModel",
                    format!("reversed bounds on {}: [{}, {}]", v.name, v.lo, v.up),
                ));
            }
            if v.kind == VarKind::Binary && (v.lo < -1e-12 || v.up > 1.0 + 1e-12) {
                return Err(Error::invalid("MilpModel", format!("binary {} outside [0,1]", v.name)));
            }
        }
        for r in &self.rows {
            if r.lo > r.up {
                return Err(Error::invalid("MilpModel", format!("reversed row bounds on {}", r.name)));
            }
            if r.lo == f64::NEG_INFINITY && r.up == f64::INFINITY {
                return Err(Error::invalid("MilpModel", format!("vacuous row {}", r.name)));
            }
            for &(j, a) in &r.coeffs {
                if j >= self.vars.len() {
                    return Err(Error::invalid(
                        "MilpModel",
                        format!("row {} references unknown variable {j}", r.name),
                    ));
                }
                if !a.is_finite() {
                    return Err(Error::invalid("MilpModel", format!("non-finite coefficient in {}", r.name)));
                }
            }
        }
        Ok(())
    }

    /// Objective value of a point.
    pub fn objective(&self, x: &[f64]) -> f64 {
        self.vars.iter().zip(x).map(|(v, xi)| v.obj * xi).sum()
    }
}

/// Convex quadratic program: minimize `1/2 x'Qx + c'x` subject to
/// `G x <= h` and `E x = e`. `q` must be positive semidefinite.
#[derive(Debug, Clone)]
pub struct QpProblem {
    pub q: RealMatrix,
    pub c: Vec<f64>,
    pub ineq: Vec<(Vec<f64>, f64)>,
    pub eq: Vec<(Vec<f64>, f64)>,
}

impl QpProblem {
    pub fn num_vars(&self) -> usize {
        self.c.len()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.c.len();
        if !self.q.is_square() || self.q.rows() != n {
            return Err(Error::Dimension {
                context: "QpProblem.q",
                expected: n,
                got: self.q.rows(),
            });
        }
        if self.q.asymmetry() > 1e-8 {
            return Err(Error::invalid("QpProblem", "objective matrix not symmetric"));
        }
        for (g, _) in self.ineq.iter().chain(&self.eq) {
            if g.len() != n {
                return Err(Error::Dimension {
                    context: "QpProblem constraint",
                    expected: n,
                    got: g.len(),
                });
            }
        }
        Ok(())
    }

    pub fn objective(&self, x: &[f64]) -> f64 {
        let n = self.num_vars();
        let mut val = 0.0;
        for i in 0..n {
            val += self.c[i] * x[i];
            for j in 0..n {
                val += 0.5 * x[i] * self.q[(i, j)] * x[j];
            }
        }
        val
    }
}

/// Solve controls shared by both problem classes.
#[derive(Debug, Clone)]
pub struct SolveRequest {
    /// Relative MIP gap target.
    pub gap: f64,
    /// KKT residual tolerance for QPs.
    pub kkt_tol: f64,
    pub time_limit: Option<std::time::Duration>,
    /// Node budget for branch and bound.
    pub max_nodes: usize,
    /// Recorded for reproducibility; the bundled backends are deterministic
    /// and take no random decisions.
    pub seed: u64,
}

impl Default for SolveRequest {
    fn default() -> Self {
        SolveRequest {
            gap: 0.005,
            kkt_tol: 1e-8,
            time_limit: None,
            max_nodes: 2_000_000,
            seed: 0,
        }
    }
}

/// Outcome class of a solve.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Optimal,
    /// Feasible with the relative gap target met but not proven optimal.
    GapFeasible,
    Infeasible,
    /// Budget exhausted; best incumbent returned if any.
    Timeout,
}

/// Result of a MILP or QP solve.
#[derive(Debug, Clone)]
pub struct SolveResult {
    pub status: SolveStatus,
    pub x: Vec<f64>,
    pub objective: f64,
    /// Proven lower bound (MILP) or the objective itself (QP/LP).
    pub best_bound: f64,
    /// Achieved relative gap.
    pub gap: f64,
    pub nodes: usize,
    pub simplex_iterations: usize,
    pub wall: std::time::Duration,
}
