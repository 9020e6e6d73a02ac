//! Branch and bound over the LP relaxation.
//!
//! Best-bound node selection, branching on the most fractional binary
//! (cost-weighted, so expensive commitment decisions are pinned first), and
//! warm-started dual simplex re-optimization at every node — branching only
//! moves variable bounds, which preserves dual feasibility of whatever basis
//! the simplex currently holds. A fix-and-dive heuristic hunts for
//! incumbents at every node: binaries with fractional value are rounded
//! (upward bias, which is safe for commitment-style models), re-solved, and
//! the dive is repeated while new fractionality appears. Deterministic: all
//! ties break on indices.

use std::cmp::Reverse;
use std::collections::BinaryHeap;
use std::time::Instant;

use crate::error::{Error, Result};
use crate::solver::model::{MilpModel, SolveRequest, SolveResult, SolveStatus, VarKind};
use crate::solver::simplex::{LpStatus, Simplex};

const INT_TOL: f64 = 1e-6;

struct Node {
    /// Fixed binaries along the path from the root: (var, value).
    fixes: Vec<(usize, u8)>,
    /// Parent LP bound.
    bound: f64,
    seq: usize,
}

struct NodeOrd(f64, usize);

impl PartialEq for NodeOrd {
    fn eq(&self, other: &Self) -> bool {
        self.0.total_cmp(&other.0).is_eq() && self.1 == other.1
    }
}
impl Eq for NodeOrd {}
impl PartialOrd for NodeOrd {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for NodeOrd {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0).then(self.1.cmp(&other.1))
    }
}

struct Tree {
    queue: BinaryHeap<Reverse<NodeOrd>>,
    store: Vec<Option<Node>>,
    seq: usize,
}

impl Tree {
    fn push(&mut self, fixes: Vec<(usize, u8)>, bound: f64) {
        let seq = self.seq;
        self.seq += 1;
        self.queue.push(Reverse(NodeOrd(bound, seq)));
        if self.store.len() <= seq {
            self.store.resize_with(seq + 1, || None);
        }
        self.store[seq] = Some(Node { fixes, bound, seq });
    }

    fn pop(&mut self) -> Option<Node> {
        let Reverse(NodeOrd(_, seq)) = self.queue.pop()?;
        Some(self.store[seq].take().expect("queued node must be stored"))
    }
}

/// Solve a mixed-integer linear program with the bundled reference backend.
pub fn solve_milp(model: &MilpModel, req: &SolveRequest) -> Result<SolveResult> {
    model.validate()?;
    let start = Instant::now();
    let binaries: Vec<usize> = model
        .vars
        .iter()
        .enumerate()
        .filter(|(_, v)| v.kind == VarKind::Binary)
        .map(|(j, _)| j)
        .collect();
    let root_bounds: Vec<(usize, f64, f64)> = binaries
        .iter()
        .map(|&j| (j, model.vars[j].lo, model.vars[j].up))
        .collect();
    // Branching priority: fractional value distance times cost weight.
    let obj_scale = model
        .vars
        .iter()
        .map(|v| v.obj.abs())
        .fold(0.0f64, f64::max)
        .max(1e-9);
    let weight: Vec<f64> = binaries
        .iter()
        .map(|&j| 1.0 + 9.0 * model.vars[j].obj.abs() / obj_scale)
        .collect();

    let mut sx = Simplex::new(model);
    let lp_budget = 200 * (model.rows.len() + model.vars.len()) + 2000;
    let root_status = sx.solve_primal(lp_budget);
    match root_status {
        LpStatus::Optimal => {}
        LpStatus::Infeasible => {
            return Ok(SolveResult {
                status: SolveStatus::Infeasible,
                x: Vec::new(),
                objective: f64::INFINITY,
                best_bound: f64::INFINITY,
                gap: f64::INFINITY,
                nodes: 0,
                simplex_iterations: sx.iterations,
                wall: start.elapsed(),
            });
        }
        LpStatus::Unbounded => return Err(Error::Solver("LP relaxation unbounded".into())),
        other => return Err(Error::Solver(format!("root LP failed: {other:?}"))),
    }
    let root_obj = sx.objective();

    // Pure LP: done at the root.
    if binaries.is_empty() {
        return Ok(SolveResult {
            status: SolveStatus::Optimal,
            x: sx.solution().to_vec(),
            objective: root_obj,
            best_bound: root_obj,
            gap: 0.0,
            nodes: 1,
            simplex_iterations: sx.iterations,
            wall: start.elapsed(),
        });
    }

    let mut incumbent: Option<(f64, Vec<f64>)> = None;
    let mut tree = Tree {
        queue: BinaryHeap::new(),
        store: Vec::new(),
        seq: 0,
    };
    tree.push(Vec::new(), root_obj);
    let mut nodes_processed = 0usize;

    let gap_ok = |inc: f64, bound: f64, gap: f64| -> bool {
        inc - bound <= gap * inc.abs().max(1e-9) + 1e-12
    };

    let mut status = SolveStatus::Optimal;
    let mut best_bound_final = root_obj;

    while let Some(node) = tree.pop() {
        best_bound_final = node.bound;
        if let Some((inc_obj, _)) = &incumbent {
            if gap_ok(*inc_obj, node.bound, req.gap) {
                status = if req.gap > 0.0 && node.bound < *inc_obj - 1e-12 {
                    SolveStatus::GapFeasible
                } else {
                    SolveStatus::Optimal
                };
                break;
            }
        }
        if nodes_processed >= req.max_nodes {
            status = SolveStatus::Timeout;
            break;
        }
        if let Some(limit) = req.time_limit {
            if start.elapsed() > limit {
                status = SolveStatus::Timeout;
                break;
            }
        }
        nodes_processed += 1;

        // Node bounds: root bounds first, then the path fixes.
        apply_bounds(&mut sx, &root_bounds, &node.fixes);
        let lp = reoptimize(&mut sx, lp_budget)?;
        let obj = match lp {
            LpStatus::Infeasible => continue,
            LpStatus::Optimal => sx.objective(),
            other => return Err(Error::Solver(format!("node LP failed: {other:?}"))),
        };
        if let Some((inc_obj, _)) = &incumbent {
            if obj >= *inc_obj - 1e-12 {
                continue;
            }
        }

        // Most fractional binary, cost-weighted.
        let mut branch: Option<(usize, f64)> = None;
        for (bi, &j) in binaries.iter().enumerate() {
            let v = sx.solution()[j];
            let frac = (v - v.round()).abs();
            if frac > INT_TOL {
                let score = (0.5 - (v - 0.5).abs()) * weight[bi];
                if branch.as_ref().map_or(true, |&(_, s)| score > s + 1e-15) {
                    branch = Some((j, score));
                }
            }
        }

        match branch {
            None => {
                if incumbent.as_ref().map_or(true, |(io, _)| obj < *io - 1e-12) {
                    incumbent = Some((obj, sx.solution().to_vec()));
                }
            }
            Some((j, _)) => {
                for v in [1u8, 0u8] {
                    let mut fixes = node.fixes.clone();
                    fixes.push((j, v));
                    tree.push(fixes, obj);
                }
                // Fix-and-dive for an incumbent, reusing the node's basis.
                if let Some((hobj, hx)) =
                    dive(&mut sx, &binaries, &root_bounds, &node.fixes, lp_budget)
                {
                    if incumbent.as_ref().map_or(true, |(io, _)| hobj < *io - 1e-12) {
                        incumbent = Some((hobj, hx));
                    }
                }
            }
        }
    }

    if tree.queue.is_empty() && status == SolveStatus::Optimal {
        best_bound_final = incumbent.as_ref().map_or(best_bound_final, |(o, _)| *o);
    }

    match incumbent {
        None => Ok(SolveResult {
            status: if status == SolveStatus::Timeout {
                SolveStatus::Timeout
            } else {
                SolveStatus::Infeasible
            },
            x: Vec::new(),
            objective: f64::INFINITY,
            best_bound: best_bound_final,
            gap: f64::INFINITY,
            nodes: nodes_processed,
            simplex_iterations: sx.iterations,
            wall: start.elapsed(),
        }),
        Some((obj, x)) => {
            let gap = ((obj - best_bound_final) / obj.abs().max(1e-9)).max(0.0);
            Ok(SolveResult {
                status,
                x,
                objective: obj,
                best_bound: best_bound_final,
                gap,
                nodes: nodes_processed,
                simplex_iterations: sx.iterations,
                wall: start.elapsed(),
            })
        }
    }
}

fn apply_bounds(sx: &mut Simplex, root_bounds: &[(usize, f64, f64)], fixes: &[(usize, u8)]) {
    for &(j, lo, up) in root_bounds {
        sx.set_var_bounds(j, lo, up);
    }
    for &(j, v) in fixes {
        sx.set_var_bounds(j, v as f64, v as f64);
    }
    sx.resync_nonbasic();
}

fn reoptimize(sx: &mut Simplex, budget: usize) -> Result<LpStatus> {
    let mut lp = sx.solve_dual(budget);
    if lp == LpStatus::IterationLimit || lp == LpStatus::Numerical {
        lp = sx.solve_primal(budget);
    }
    Ok(lp)
}

/// Round-and-refine dive from the current LP solution. Fractional binaries
/// round with an upward bias (>= 0.3 rounds to one); the LP is re-solved and
/// the rounding repeated until everything is integral or the subproblem goes
/// infeasible. Bounds are left dirty for the caller to reset.
fn dive(
    sx: &mut Simplex,
    binaries: &[usize],
    root_bounds: &[(usize, f64, f64)],
    fixes: &[(usize, u8)],
    budget: usize,
) -> Option<(f64, Vec<f64>)> {
    for _round in 0..4 {
        let mut all_integral = true;
        let mut to_fix: Vec<(usize, f64)> = Vec::new();
        for &j in binaries {
            let v = sx.solution()[j];
            let (lo, up) = sx.var_bounds(j);
            if lo == up {
                continue;
            }
            if (v - v.round()).abs() > INT_TOL {
                all_integral = false;
                let target = if v >= 0.3 { up.min(1.0) } else { lo.max(0.0) };
                to_fix.push((j, target));
            }
        }
        if all_integral {
            let obj = sx.objective();
            let x = sx.solution().to_vec();
            apply_bounds(sx, root_bounds, fixes);
            if reoptimize(sx, budget).ok()? != LpStatus::Optimal {
                // Restore failed; the caller's next pop will reset anyway.
            }
            return Some((obj, x));
        }
        for (j, v) in to_fix {
            sx.set_var_bounds(j, v, v);
        }
        sx.resync_nonbasic();
        match sx.solve_dual(budget) {
            LpStatus::Optimal => {}
            _ => {
                apply_bounds(sx, root_bounds, fixes);
                let _ = reoptimize(sx, budget);
                return None;
            }
        }
    }
    apply_bounds(sx, root_bounds, fixes);
    let _ = reoptimize(sx, budget);
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::model::VarKind;
    use approx::assert_abs_diff_eq;

    #[test]
    fn knapsack_matches_enumeration() {
        let values = [5.0, 4.0, 3.0, 7.0, 6.0];
        let weights = [3.0, 2.0, 4.0, 5.0, 6.0];
        let mut m = MilpModel::new();
        let vars: Vec<usize> = values
            .iter()
            .enumerate()
            .map(|(i, &v)| m.add_binary(format!("b{i}"), -v))
            .collect();
        m.add_row(
            "cap",
            vars.iter().zip(weights.iter()).map(|(&j, &w)| (j, w)).collect(),
            f64::NEG_INFINITY,
            11.0,
        );
        let req = SolveRequest {
            gap: 0.0,
            ..SolveRequest::default()
        };
        let r = solve_milp(&m, &req).unwrap();

        let mut best = 0.0f64;
        for mask in 0..32u32 {
            let w: f64 = (0..5).filter(|i| mask >> i & 1 == 1).map(|i| weights[i]).sum();
            if w <= 11.0 {
                let v: f64 = (0..5).filter(|i| mask >> i & 1 == 1).map(|i| values[i]).sum();
                best = best.max(v);
            }
        }
        assert_abs_diff_eq!(-r.objective, best, epsilon = 1e-8);
        assert_eq!(r.status, SolveStatus::Optimal);
    }

    #[test]
    fn infeasible_integer_model() {
        let mut m = MilpModel::new();
        let x = m.add_var("x", VarKind::Continuous, 2.0, f64::INFINITY, 1.0);
        m.add_row("le1", vec![(x, 1.0)], f64::NEG_INFINITY, 1.0);
        let b = m.add_binary("b", 0.0);
        m.add_row("use_b", vec![(b, 1.0)], 0.0, 1.0);
        let r = solve_milp(&m, &SolveRequest::default()).unwrap();
        assert_eq!(r.status, SolveStatus::Infeasible);
    }

    #[test]
    fn pure_lp_passthrough() {
        let mut m = MilpModel::new();
        let x = m.add_var("x", VarKind::Continuous, 0.0, 10.0, -1.0);
        m.add_row("cap", vec![(x, 2.0)], f64::NEG_INFINITY, 10.0);
        let r = solve_milp(&m, &SolveRequest::default()).unwrap();
        assert_eq!(r.status, SolveStatus::Optimal);
        assert_abs_diff_eq!(r.x[0], 5.0, epsilon = 1e-8);
        assert_eq!(r.nodes, 1);
    }
}
