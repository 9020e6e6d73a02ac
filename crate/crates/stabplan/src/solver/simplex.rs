//! Bounded-variable revised simplex with a dense basis inverse.
//!
//! Works on the computational form `A x - s = 0` with structural variables
//! `x` and one slack `s` per row carrying the row bounds, so the initial
//! slack basis is always available. Primal phases one and two drive the
//! branch-and-bound root solves; the dual iteration re-optimizes after bound
//! changes, which is all branching ever does.
//!
//! The basis inverse is kept as a dense matrix and updated by the standard
//! pivot transformation, with periodic refactorization from scratch. Sized
//! for the bundled fixtures (a few thousand rows at most).

use crate::solver::model::MilpModel;

const FEAS_TOL: f64 = 1e-7;
const OPT_TOL: f64 = 1e-7;
const PIVOT_TOL: f64 = 1e-9;
const RATIO_PIVOT_TOL: f64 = 1e-8;
const REFACTOR_EVERY: usize = 400;
const BLAND_AFTER: usize = 300;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    IterationLimit,
    Numerical,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum VarStatus {
    Basic(usize),
    AtLower,
    AtUpper,
    /// Free nonbasic pinned at zero.
    FreeZero,
}

/// Sparse column access for the extended matrix `[A | -I]`.
struct Columns {
    /// Structural columns: (row, coeff) pairs.
    cols: Vec<Vec<(usize, f64)>>,
    n_struct: usize,
    m: usize,
}

impl Columns {
    fn col(&self, j: usize) -> ColIter<'_> {
        if j < self.n_struct {
            ColIter::Struct(self.cols[j].iter())
        } else {
            ColIter::Slack(Some(j - self.n_struct))
        }
    }
}

enum ColIter<'a> {
    Struct(std::slice::Iter<'a, (usize, f64)>),
    Slack(Option<usize>),
}

impl Iterator for ColIter<'_> {
    type Item = (usize, f64);
    fn next(&mut self) -> Option<(usize, f64)> {
        match self {
            ColIter::Struct(it) => it.next().copied(),
            ColIter::Slack(row) => row.take().map(|r| (r, -1.0)),
        }
    }
}

/// Revised simplex state over one model's constraint matrix. Bounds can be
/// tightened or relaxed between solves; the basis persists.
pub struct Simplex {
    cols: Columns,
    /// Objective per variable (slacks cost zero).
    cost: Vec<f64>,
    /// Current bounds per variable (structural + slack).
    lo: Vec<f64>,
    up: Vec<f64>,
    status: Vec<VarStatus>,
    basis: Vec<usize>,
    binv: Vec<f64>,
    x: Vec<f64>,
    pivots_since_refactor: usize,
    pub iterations: usize,
}

impl Simplex {
    pub fn new(model: &MilpModel) -> Self {
        let n = model.vars.len();
        let m = model.rows.len();
        let mut cols = vec![Vec::new(); n];
        for (i, row) in model.rows.iter().enumerate() {
            for &(j, a) in &row.coeffs {
                if a != 0.0 {
                    cols[j].push((i, a));
                }
            }
        }
        let mut cost = Vec::with_capacity(n + m);
        let mut lo = Vec::with_capacity(n + m);
        let mut up = Vec::with_capacity(n + m);
        for v in &model.vars {
            cost.push(v.obj);
            lo.push(v.lo);
            up.push(v.up);
        }
        for r in &model.rows {
            cost.push(0.0);
            lo.push(r.lo);
            up.push(r.up);
        }
        let mut s = Simplex {
            cols: Columns {
                cols,
                n_struct: n,
                m,
            },
            cost,
            lo,
            up,
            status: vec![VarStatus::AtLower; n + m],
            basis: (n..n + m).collect(),
            binv: vec![0.0; m * m],
            x: vec![0.0; n + m],
            pivots_since_refactor: 0,
            iterations: 0,
        };
        s.reset_to_slack_basis();
        s
    }

    pub fn num_rows(&self) -> usize {
        self.cols.m
    }

    /// Structural solution values.
    pub fn solution(&self) -> &[f64] {
        &self.x[..self.cols.n_struct]
    }

    pub fn objective(&self) -> f64 {
        (0..self.cols.n_struct).map(|j| self.cost[j] * self.x[j]).sum()
    }

    /// Replace the bounds of one structural variable.
    pub fn set_var_bounds(&mut self, j: usize, lo: f64, up: f64) {
        self.lo[j] = lo;
        self.up[j] = up;
    }

    pub fn var_bounds(&self, j: usize) -> (f64, f64) {
        (self.lo[j], self.up[j])
    }

    /// Snap nonbasic variables onto their current bounds and recompute the
    /// basic values. Required after bound edits before a dual solve.
    pub fn resync_nonbasic(&mut self) {
        let total = self.cols.n_struct + self.cols.m;
        for j in 0..total {
            match self.status[j] {
                VarStatus::AtLower => {
                    if self.lo[j].is_finite() {
                        self.x[j] = self.lo[j];
                    } else if self.up[j].is_finite() {
                        self.status[j] = VarStatus::AtUpper;
                        self.x[j] = self.up[j];
                    } else {
                        self.status[j] = VarStatus::FreeZero;
                        self.x[j] = 0.0;
                    }
                }
                VarStatus::AtUpper => {
                    if self.up[j].is_finite() {
                        self.x[j] = self.up[j];
                    } else if self.lo[j].is_finite() {
                        self.status[j] = VarStatus::AtLower;
                        self.x[j] = self.lo[j];
                    } else {
                        self.status[j] = VarStatus::FreeZero;
                        self.x[j] = 0.0;
                    }
                }
                _ => {}
            }
        }
        self.recompute_basics();
    }

    fn reset_to_slack_basis(&mut self) {
        let n = self.cols.n_struct;
        let m = self.cols.m;
        self.basis = (n..n + m).collect();
        for j in 0..n {
            self.status[j] = if self.lo[j].is_finite() {
                VarStatus::AtLower
            } else if self.up[j].is_finite() {
                VarStatus::AtUpper
            } else {
                VarStatus::FreeZero
            };
            self.x[j] = match self.status[j] {
                VarStatus::AtLower => self.lo[j],
                VarStatus::AtUpper => self.up[j],
                _ => 0.0,
            };
        }
        for (p, j) in (n..n + m).enumerate() {
            self.status[j] = VarStatus::Basic(p);
        }
        // Slack basis: B = -I, so B^-1 = -I.
        self.binv.iter_mut().for_each(|v| *v = 0.0);
        for p in 0..m {
            self.binv[p * m + p] = -1.0;
        }
        self.pivots_since_refactor = 0;
        self.recompute_basics();
    }

    /// x_B = -B^-1 * (sum of nonbasic columns times their values).
    fn recompute_basics(&mut self) {
        let m = self.cols.m;
        let n = self.cols.n_struct;
        let mut rhs = vec![0.0; m];
        for j in 0..n + m {
            if matches!(self.status[j], VarStatus::Basic(_)) {
                continue;
            }
            let xj = self.x[j];
            if xj == 0.0 {
                continue;
            }
            for (i, a) in self.cols.col(j) {
                rhs[i] -= a * xj;
            }
        }
        for p in 0..m {
            let mut acc = 0.0;
            for i in 0..m {
                acc += self.binv[p * m + i] * rhs[i];
            }
            let jb = self.basis[p];
            self.x[jb] = acc;
        }
    }

    /// Rebuild the basis inverse from scratch by Gauss-Jordan elimination.
    fn refactor(&mut self) -> bool {
        let m = self.cols.m;
        let mut b = vec![0.0; m * m];
        for (p, &j) in self.basis.iter().enumerate() {
            for (i, a) in self.cols.col(j) {
                b[i * m + p] = a;
            }
        }
        let mut inv = vec![0.0; m * m];
        for i in 0..m {
            inv[i * m + i] = 1.0;
        }
        for k in 0..m {
            let mut piv = k;
            let mut best = b[k * m + k].abs();
            for i in (k + 1)..m {
                let v = b[i * m + k].abs();
                if v > best {
                    best = v;
                    piv = i;
                }
            }
            if best < 1e-12 {
                return false;
            }
            if piv != k {
                for j in 0..m {
                    b.swap(k * m + j, piv * m + j);
                    inv.swap(k * m + j, piv * m + j);
                }
            }
            let d = b[k * m + k];
            for j in 0..m {
                b[k * m + j] /= d;
                inv[k * m + j] /= d;
            }
            for i in 0..m {
                if i == k {
                    continue;
                }
                let f = b[i * m + k];
                if f == 0.0 {
                    continue;
                }
                for j in 0..m {
                    b[i * m + j] -= f * b[k * m + j];
                    inv[i * m + j] -= f * inv[k * m + j];
                }
            }
        }
        self.binv = inv;
        self.pivots_since_refactor = 0;
        true
    }

    /// alpha = B^-1 * A_j.
    fn ftran(&self, j: usize) -> Vec<f64> {
        let m = self.cols.m;
        let mut alpha = vec![0.0; m];
        for (i, a) in self.cols.col(j) {
            if a == 0.0 {
                continue;
            }
            for p in 0..m {
                alpha[p] += self.binv[p * m + i] * a;
            }
        }
        alpha
    }

    /// Dual prices for an arbitrary basic cost vector: y = cB' * B^-1.
    fn duals_for(&self, cb: &[f64]) -> Vec<f64> {
        let m = self.cols.m;
        let mut y = vec![0.0; m];
        for p in 0..m {
            let c = cb[p];
            if c == 0.0 {
                continue;
            }
            for i in 0..m {
                y[i] += c * self.binv[p * m + i];
            }
        }
        y
    }

    fn reduced_cost(&self, j: usize, y: &[f64], cost: impl Fn(usize) -> f64) -> f64 {
        let mut r = cost(j);
        for (i, a) in self.cols.col(j) {
            r -= y[i] * a;
        }
        r
    }

    fn primal_infeasibility(&self) -> f64 {
        self.basis
            .iter()
            .map(|&j| {
                let v = self.x[j];
                (self.lo[j] - v).max(0.0) + (v - self.up[j]).max(0.0)
            })
            .sum()
    }

    /// Primal simplex: phase one clears bound violations, phase two
    /// optimizes. Returns the terminal status.
    pub fn solve_primal(&mut self, max_iter: usize) -> LpStatus {
        if !self.refactor() {
            self.reset_to_slack_basis();
        } else {
            self.recompute_basics();
        }
        if self.primal_infeasibility() > FEAS_TOL {
            match self.primal_loop(max_iter, true) {
                LpStatus::Optimal => {}
                other => return other,
            }
            if self.primal_infeasibility() > FEAS_TOL {
                return LpStatus::Infeasible;
            }
        }
        self.primal_loop(max_iter, false)
    }

    /// One primal phase. In phase one the cost is the (piecewise linear)
    /// infeasibility; entering variables are priced against it and the ratio
    /// test lets violating basics run exactly to their violated bound.
    fn primal_loop(&mut self, max_iter: usize, phase_one: bool) -> LpStatus {
        let n_total = self.cols.n_struct + self.cols.m;
        let mut degenerate_run = 0usize;
        for _ in 0..max_iter {
            self.iterations += 1;
            if self.pivots_since_refactor >= REFACTOR_EVERY && !self.refactor() {
                return LpStatus::Numerical;
            }
            if phase_one && self.primal_infeasibility() <= FEAS_TOL {
                return LpStatus::Optimal;
            }

            // Basic cost vector for this phase.
            let cb: Vec<f64> = self
                .basis
                .iter()
                .map(|&j| {
                    if phase_one {
                        if self.x[j] < self.lo[j] - FEAS_TOL {
                            -1.0
                        } else if self.x[j] > self.up[j] + FEAS_TOL {
                            1.0
                        } else {
                            0.0
                        }
                    } else {
                        self.cost[j]
                    }
                })
                .collect();
            let y = self.duals_for(&cb);
            let phase_cost = |j: usize| if phase_one { 0.0 } else { self.cost[j] };

            let bland = degenerate_run > BLAND_AFTER;
            let mut entering: Option<(usize, f64, f64)> = None; // (var, score, direction)
            for j in 0..n_total {
                let (dir, score) = match self.status[j] {
                    VarStatus::Basic(_) => continue,
                    VarStatus::AtLower => {
                        let r = self.reduced_cost(j, &y, phase_cost);
                        if r < -OPT_TOL {
                            (1.0, -r)
                        } else {
                            continue;
                        }
                    }
                    VarStatus::AtUpper => {
                        let r = self.reduced_cost(j, &y, phase_cost);
                        if r > OPT_TOL {
                            (-1.0, r)
                        } else {
                            continue;
                        }
                    }
                    VarStatus::FreeZero => {
                        let r = self.reduced_cost(j, &y, phase_cost);
                        if r < -OPT_TOL {
                            (1.0, -r)
                        } else if r > OPT_TOL {
                            (-1.0, r)
                        } else {
                            continue;
                        }
                    }
                };
                if bland {
                    entering = Some((j, score, dir));
                    break;
                }
                if entering.as_ref().map_or(true, |&(_, s, _)| score > s) {
                    entering = Some((j, score, dir));
                }
            }
            let Some((j_in, _, dir)) = entering else {
                return if phase_one && self.primal_infeasibility() > FEAS_TOL {
                    LpStatus::Infeasible
                } else {
                    LpStatus::Optimal
                };
            };

            let alpha = self.ftran(j_in);
            // Ratio test: entering moves by dir * t, basics by -dir * alpha.
            let mut t_max = if self.lo[j_in].is_finite() && self.up[j_in].is_finite() {
                self.up[j_in] - self.lo[j_in]
            } else {
                f64::INFINITY
            };
            let mut leaving: Option<(usize, f64)> = None; // (basis pos, hit bound)
            for p in 0..self.cols.m {
                let g = -dir * alpha[p];
                if g.abs() <= RATIO_PIVOT_TOL {
                    continue;
                }
                let jb = self.basis[p];
                let v = self.x[jb];
                // A basic moving away from a bound it already violates has no
                // breakpoint; the phase-one pricing already weighed that cost.
                let (target, t) = if g > 0.0 {
                    if v < self.lo[jb] - FEAS_TOL {
                        (self.lo[jb], (self.lo[jb] - v) / g)
                    } else if v > self.up[jb] + FEAS_TOL {
                        continue;
                    } else if self.up[jb].is_finite() {
                        (self.up[jb], (self.up[jb] - v) / g)
                    } else {
                        continue;
                    }
                } else if v > self.up[jb] + FEAS_TOL {
                    (self.up[jb], (self.up[jb] - v) / g)
                } else if v < self.lo[jb] - FEAS_TOL {
                    continue;
                } else if self.lo[jb].is_finite() {
                    (self.lo[jb], (self.lo[jb] - v) / g)
                } else {
                    continue;
                };
                let t = t.max(0.0);
                let better = match leaving {
                    None => t < t_max - 1e-12,
                    Some((lp, _)) => {
                        t < t_max - 1e-12
                            || (t <= t_max + 1e-12 && alpha[p].abs() > alpha[lp].abs() + 1e-12)
                    }
                };
                if t <= t_max + 1e-12 && better {
                    t_max = t.min(t_max);
                    leaving = Some((p, target));
                }
            }

            if t_max.is_infinite() {
                return if phase_one {
                    LpStatus::Numerical
                } else {
                    LpStatus::Unbounded
                };
            }
            degenerate_run = if t_max <= 1e-10 { degenerate_run + 1 } else { 0 };

            match leaving {
                None => {
                    // Bound flip of the entering variable.
                    let t = t_max;
                    for p in 0..self.cols.m {
                        let jb = self.basis[p];
                        self.x[jb] -= dir * t * alpha[p];
                    }
                    self.x[j_in] += dir * t;
                    self.status[j_in] = if dir > 0.0 {
                        VarStatus::AtUpper
                    } else {
                        VarStatus::AtLower
                    };
                }
                Some((p, target)) => {
                    if alpha[p].abs() <= PIVOT_TOL {
                        if !self.refactor() {
                            return LpStatus::Numerical;
                        }
                        continue;
                    }
                    let t = t_max;
                    let j_out = self.basis[p];
                    for q in 0..self.cols.m {
                        let jb = self.basis[q];
                        self.x[jb] -= dir * t * alpha[q];
                    }
                    self.x[j_in] += dir * t;
                    self.x[j_out] = target;
                    self.status[j_out] = if (target - self.lo[j_out]).abs() <= (target - self.up[j_out]).abs() {
                        VarStatus::AtLower
                    } else {
                        VarStatus::AtUpper
                    };
                    self.status[j_in] = VarStatus::Basic(p);
                    self.basis[p] = j_in;
                    self.update_binv(p, &alpha);
                }
            }
        }
        LpStatus::IterationLimit
    }

    fn update_binv(&mut self, p: usize, alpha: &[f64]) {
        let m = self.cols.m;
        let piv = alpha[p];
        let row_start = p * m;
        for i in 0..m {
            self.binv[row_start + i] /= piv;
        }
        for q in 0..m {
            if q == p {
                continue;
            }
            let f = alpha[q];
            if f == 0.0 {
                continue;
            }
            let qs = q * m;
            for i in 0..m {
                self.binv[qs + i] -= f * self.binv[row_start + i];
            }
        }
        self.pivots_since_refactor += 1;
    }

    /// Dual simplex from the current (dual-feasible) basis after bound
    /// changes. Reduced costs depend only on the basis, so any optimal basis
    /// remains dual feasible when bounds move.
    pub fn solve_dual(&mut self, max_iter: usize) -> LpStatus {
        let m = self.cols.m;
        let n_total = self.cols.n_struct + m;
        for _ in 0..max_iter {
            self.iterations += 1;
            if self.pivots_since_refactor >= REFACTOR_EVERY && !self.refactor() {
                return LpStatus::Numerical;
            }

            // Most violating basic leaves.
            let mut leave: Option<(usize, f64, bool)> = None; // (pos, violation, below)
            for p in 0..m {
                let jb = self.basis[p];
                let v = self.x[jb];
                if v < self.lo[jb] - FEAS_TOL {
                    let viol = self.lo[jb] - v;
                    if leave.as_ref().map_or(true, |&(_, w, _)| viol > w) {
                        leave = Some((p, viol, true));
                    }
                } else if v > self.up[jb] + FEAS_TOL {
                    let viol = v - self.up[jb];
                    if leave.as_ref().map_or(true, |&(_, w, _)| viol > w) {
                        leave = Some((p, viol, false));
                    }
                }
            }
            let Some((p, _, below)) = leave else {
                return LpStatus::Optimal;
            };

            // Row p of B^-1, then the pivot row over nonbasic columns.
            let brow = &self.binv[p * m..(p + 1) * m];
            let y = self.duals_for(&self.basis.iter().map(|&j| self.cost[j]).collect::<Vec<_>>());

            let mut entering: Option<(usize, f64, f64)> = None; // (var, ratio, rho)
            for j in 0..n_total {
                if matches!(self.status[j], VarStatus::Basic(_)) {
                    continue;
                }
                let mut rho = 0.0;
                for (i, a) in self.cols.col(j) {
                    rho += brow[i] * a;
                }
                if rho.abs() <= RATIO_PIVOT_TOL {
                    continue;
                }
                // Moving j by sigma*t changes x_Bp by -sigma*rho*t; it must
                // move toward the violated bound.
                let ok = if below {
                    // need x_Bp to increase
                    match self.status[j] {
                        VarStatus::AtLower => rho < 0.0,
                        VarStatus::AtUpper => rho > 0.0,
                        VarStatus::FreeZero => true,
                        VarStatus::Basic(_) => false,
                    }
                } else {
                    match self.status[j] {
                        VarStatus::AtLower => rho > 0.0,
                        VarStatus::AtUpper => rho < 0.0,
                        VarStatus::FreeZero => true,
                        VarStatus::Basic(_) => false,
                    }
                };
                if !ok {
                    continue;
                }
                let r = self.reduced_cost(j, &y, |k| self.cost[k]);
                let ratio = (r / rho).abs();
                let better = match entering {
                    None => true,
                    Some((je, re, rhoe)) => {
                        ratio < re - 1e-12
                            || (ratio <= re + 1e-12 && rho.abs() > rhoe.abs() + 1e-12)
                            || (ratio <= re + 1e-12 && (rho.abs() - rhoe.abs()).abs() <= 1e-12 && j < je)
                    }
                };
                if better {
                    entering = Some((j, ratio, rho));
                }
            }
            let Some((j_in, _, rho)) = entering else {
                return LpStatus::Infeasible;
            };

            let jb_out = self.basis[p];
            let target = if below { self.lo[jb_out] } else { self.up[jb_out] };
            let t = (self.x[jb_out] - target) / rho;
            let alpha = self.ftran(j_in);
            if alpha[p].abs() <= PIVOT_TOL {
                if !self.refactor() {
                    return LpStatus::Numerical;
                }
                continue;
            }
            for q in 0..m {
                let jb = self.basis[q];
                self.x[jb] -= t * alpha[q];
            }
            self.x[j_in] += t;
            self.x[jb_out] = target;
            self.status[jb_out] = if below { VarStatus::AtLower } else { VarStatus::AtUpper };
            self.status[j_in] = VarStatus::Basic(p);
            self.basis[p] = j_in;
            self.update_binv(p, &alpha);
        }
        LpStatus::IterationLimit
    }

    /// Maximum bound violation over all variables (diagnostic).
    pub fn max_violation(&self) -> f64 {
        let n_total = self.cols.n_struct + self.cols.m;
        (0..n_total)
            .map(|j| (self.lo[j] - self.x[j]).max(0.0).max(self.x[j] - self.up[j]))
            .fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::model::{MilpModel, VarKind};
    use approx::assert_abs_diff_eq;

    #[test]
    fn two_var_lp() {
        // min -x - 2y s.t. x + y <= 4, x <= 3, y <= 2
        let mut m = MilpModel::new();
        let x = m.add_var("x", VarKind::Continuous, 0.0, 3.0, -1.0);
        let y = m.add_var("y", VarKind::Continuous, 0.0, 2.0, -2.0);
        m.add_row("cap", vec![(x, 1.0), (y, 1.0)], f64::NEG_INFINITY, 4.0);
        let mut s = Simplex::new(&m);
        assert_eq!(s.solve_primal(1000), LpStatus::Optimal);
        assert_abs_diff_eq!(s.solution()[x], 2.0, epsilon = 1e-8);
        assert_abs_diff_eq!(s.solution()[y], 2.0, epsilon = 1e-8);
        assert_abs_diff_eq!(s.objective(), -6.0, epsilon = 1e-8);
    }

    #[test]
    fn equality_rows_and_free_vars() {
        // min x^+ cost with free angle-like variable: min 2a + 3b
        // s.t. a + b = 5, a - b + f = 1, f free in [-10, 10].
        let mut m = MilpModel::new();
        let a = m.add_var("a", VarKind::Continuous, 0.0, 10.0, 2.0);
        let b = m.add_var("b", VarKind::Continuous, 0.0, 10.0, 3.0);
        let f = m.add_var("f", VarKind::Continuous, -10.0, 10.0, 0.0);
        m.add_row("sum", vec![(a, 1.0), (b, 1.0)], 5.0, 5.0);
        m.add_row("link", vec![(a, 1.0), (b, -1.0), (f, 1.0)], 1.0, 1.0);
        let mut s = Simplex::new(&m);
        assert_eq!(s.solve_primal(1000), LpStatus::Optimal);
        assert_abs_diff_eq!(s.solution()[a], 5.0, epsilon = 1e-8);
        assert_abs_diff_eq!(s.solution()[b], 0.0, epsilon = 1e-8);
        assert_abs_diff_eq!(s.solution()[f], -4.0, epsilon = 1e-8);
    }

    #[test]
    fn infeasible_bounds_detected() {
        let mut m = MilpModel::new();
        let x = m.add_var("x", VarKind::Continuous, 0.0, 1.0, 1.0);
        m.add_row("ge2", vec![(x, 1.0)], 2.0, f64::INFINITY);
        let mut s = Simplex::new(&m);
        assert_eq!(s.solve_primal(1000), LpStatus::Infeasible);
    }

    #[test]
    fn unbounded_detected() {
        let mut m = MilpModel::new();
        let x = m.add_var("x", VarKind::Continuous, 0.0, f64::INFINITY, -1.0);
        m.add_row("ok", vec![(x, -1.0)], f64::NEG_INFINITY, 0.0);
        let mut s = Simplex::new(&m);
        assert_eq!(s.solve_primal(1000), LpStatus::Unbounded);
    }

    #[test]
    fn dual_reoptimizes_after_bound_change() {
        let mut m = MilpModel::new();
        let x = m.add_var("x", VarKind::Continuous, 0.0, 3.0, -1.0);
        let y = m.add_var("y", VarKind::Continuous, 0.0, 2.0, -2.0);
        m.add_row("cap", vec![(x, 1.0), (y, 1.0)], f64::NEG_INFINITY, 4.0);
        let mut s = Simplex::new(&m);
        assert_eq!(s.solve_primal(1000), LpStatus::Optimal);
        // Force y <= 1 and re-optimize dually.
        s.set_var_bounds(y, 0.0, 1.0);
        s.resync_nonbasic();
        assert_eq!(s.solve_dual(1000), LpStatus::Optimal);
        assert_abs_diff_eq!(s.solution()[x], 3.0, epsilon = 1e-8);
        assert_abs_diff_eq!(s.solution()[y], 1.0, epsilon = 1e-8);
    }
}
