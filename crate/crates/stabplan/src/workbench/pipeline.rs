//! End-to-end orchestration: exact evaluators, planner-in-the-loop
//! linearization, planning runs, exact audits and the comparison studies the
//! report command emits.

use std::collections::HashMap;

use crate::error::Result;
use crate::linearize::{
    active_sampling, default_nu_grid, FeatureDims, LinearCoefficients, MetricSpec, MetricTag,
    OperatingPoint, SamplingOutcome,
};
use crate::network::{PowerSystem, UnitState};
use crate::planning::{
    build_planning_model, operating_points, solve_planning, validate_solution, CostConfig,
    PlanningOptions, PlanningSolution, ScenarioTree, ViolationReport,
};
use crate::shortcircuit::{scc_iterative, SccState};
use crate::strength::gscr;

/// Defaults shared by the CLI verbs and the studies.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub eps: f64,
    pub k_max: usize,
    pub m_max: usize,
    pub gap: f64,
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            eps: 1e-6,
            k_max: 60,
            m_max: 10,
            gap: 0.005,
            seed: 0,
        }
    }
}

/// Feature dimensions of a system, in the order the surrogates expect.
pub fn feature_dims(system: &PowerSystem) -> FeatureDims {
    FeatureDims {
        n_gen: system.generators().count(),
        n_sc: system.sc_candidates().count(),
        n_gfm: system.gfm_units().count(),
        n_gfl: system.gfl_units().count(),
    }
}

/// One metric spec per monitored fault bus plus one for grid strength.
pub fn metric_specs(system: &PowerSystem) -> Vec<MetricSpec> {
    let mut specs: Vec<MetricSpec> = system
        .limits
        .scc
        .iter()
        .map(|&(bus, limit)| MetricSpec {
            tag: MetricTag::Scc { bus },
            limit,
            nu_grid: default_nu_grid(limit),
        })
        .collect();
    if system.limits.gscr > 0.0 {
        specs.push(MetricSpec {
            tag: MetricTag::Gscr,
            limit: system.limits.gscr,
            nu_grid: default_nu_grid(system.limits.gscr),
        });
    }
    specs
}

fn unit_state_of(point: &OperatingPoint) -> UnitState {
    UnitState {
        committed: point.x_g.iter().map(|&v| v > 0.5).collect(),
        sc_mva: point.s_s.clone(),
        gfm_mva: point.s_cm.clone(),
        gfm_overload_mva: point.s_cm_prime.clone(),
    }
}

/// Exact metric evaluator with fault-state memoization across hours that
/// share a commitment pattern. Returns `None` for strength evaluations in
/// hours where no grid-following unit produces.
pub struct ExactEvaluator<'a> {
    system: &'a PowerSystem,
    cfg: RunConfig,
    scc_cache: HashMap<Vec<u64>, SccState>,
}

impl<'a> ExactEvaluator<'a> {
    pub fn new(system: &'a PowerSystem, cfg: RunConfig) -> Self {
        ExactEvaluator {
            system,
            cfg,
            scc_cache: HashMap::new(),
        }
    }

    fn state_key(point: &OperatingPoint) -> Vec<u64> {
        point
            .x_g
            .iter()
            .map(|v| (*v > 0.5) as u64)
            .chain(point.s_s.iter().map(|v| v.to_bits()))
            .chain(point.s_cm.iter().map(|v| v.to_bits()))
            .chain(point.s_cm_prime.iter().map(|v| v.to_bits()))
            .collect()
    }

    pub fn evaluate(&mut self, tag: MetricTag, point: &OperatingPoint) -> Result<Option<f64>> {
        let state = unit_state_of(point);
        match tag {
            MetricTag::Scc { bus } => {
                let key = Self::state_key(point);
                let scc_state = match self.scc_cache.get(&key) {
                    Some(s) => s.clone(),
                    None => {
                        let s = SccState::from_system(self.system, &state)?;
                        self.scc_cache.insert(key, s.clone());
                        s
                    }
                };
                let r = scc_iterative(&scc_state, bus, self.cfg.eps, self.cfg.k_max)?;
                Ok(Some(r.magnitude))
            }
            MetricTag::Gscr => {
                let powers_pu: Vec<f64> =
                    point.p_cl.iter().map(|p| p / self.system.s_base).collect();
                if powers_pu.iter().all(|&p| p <= 0.0) {
                    return Ok(None);
                }
                Ok(Some(gscr(self.system, &state, &powers_pu)?))
            }
        }
    }
}

/// Build and solve one planning problem.
pub fn plan_once(
    system: &PowerSystem,
    tree: &ScenarioTree,
    coeffs: &[LinearCoefficients],
    costs: &CostConfig,
    options: &PlanningOptions,
    gap: f64,
) -> Result<PlanningSolution> {
    let model = build_planning_model(system, tree, coeffs, costs, options)?;
    solve_planning(system, tree, &model, gap)
}

/// Planner-in-the-loop linearization over a list of planning horizons
/// (solved independently per iteration, concatenating their hours).
pub fn run_active_sampling(
    system: &PowerSystem,
    trees: &[ScenarioTree],
    costs: &CostConfig,
    options: &PlanningOptions,
    cfg: &RunConfig,
) -> Result<SamplingOutcome> {
    let specs = metric_specs(system);
    let dims = feature_dims(system);
    let mut evaluator = ExactEvaluator::new(system, cfg.clone());
    let gap = cfg.gap;
    active_sampling(
        &specs,
        dims,
        cfg.m_max,
        |coeffs| {
            let mut points = Vec::new();
            for tree in trees {
                let solution = plan_once(system, tree, coeffs, costs, options, gap)?;
                points.extend(operating_points(&solution));
            }
            Ok(points)
        },
        |tag, point| evaluator.evaluate(tag, point),
    )
}

/// One row of the investment/operation comparison table.
#[derive(Debug, Clone)]
pub struct CaseRow {
    pub label: String,
    pub bess_gw: f64,
    pub bess_cost_m_per_yr: f64,
    pub sc_gw: f64,
    pub sc_cost_m_per_yr: f64,
    pub operation_k_per_h: f64,
    pub total_m_per_yr: f64,
    pub scc_violation_pct: f64,
    pub gscr_violation_pct: f64,
}

fn investment_costs(system: &PowerSystem, solution: &PlanningSolution, costs: &CostConfig) -> (f64, f64) {
    let mut bess = 0.0;
    for (u, (&cap, &over)) in system.gfm_units().zip(
        solution
            .investments
            .gfm_mva
            .iter()
            .zip(&solution.investments.gfm_overload_mva),
    ) {
        let conv = costs.gfm_cost_per_mva_yr.unwrap_or(u.invest_cost);
        let ratio = costs.overload_cost_ratio.unwrap_or(u.overload_cost_ratio);
        bess += conv * cap + ratio * conv * (over - cap);
    }
    let mut sc = 0.0;
    for (u, &cap) in system.sc_candidates().zip(&solution.investments.sc_mva) {
        sc += costs.sc_cost_per_mva_yr.unwrap_or(u.invest_cost) * cap;
    }
    (bess, sc)
}

/// Audit a solution and flatten it into a comparison row.
pub fn case_row(
    label: &str,
    system: &PowerSystem,
    tree: &ScenarioTree,
    solution: &PlanningSolution,
    costs: &CostConfig,
) -> Result<(CaseRow, ViolationReport)> {
    let report = validate_solution(system, tree, solution)?;
    let (bess_cost, sc_cost) = investment_costs(system, solution, costs);
    let row = CaseRow {
        label: label.to_string(),
        bess_gw: solution.investments.gfm_mva.iter().sum::<f64>() / 1000.0,
        bess_cost_m_per_yr: bess_cost / 1e6,
        sc_gw: solution.investments.sc_mva.iter().sum::<f64>() / 1000.0,
        sc_cost_m_per_yr: sc_cost / 1e6,
        operation_k_per_h: solution.costs.operation_per_hour / 1e3,
        total_m_per_yr: solution.costs.total_per_year / 1e6,
        scc_violation_pct: report.scc_violation_rate * 100.0,
        gscr_violation_pct: report.gscr_violation_rate * 100.0,
    };
    Ok((row, report))
}

/// Outcome of the four-way planning study.
pub struct ComparisonStudy {
    pub rows: Vec<CaseRow>,
    pub solutions: Vec<(String, PlanningSolution)>,
}

/// Coordinated vs. storage-only vs. SC-only vs. decoupled two-stage
/// planning, all audited against the exact engines.
pub fn case_comparison(
    system: &PowerSystem,
    tree: &ScenarioTree,
    coeffs: &[LinearCoefficients],
    costs: &CostConfig,
    gap: f64,
) -> Result<ComparisonStudy> {
    let mut rows = Vec::new();
    let mut solutions = Vec::new();

    let coordinated = plan_once(system, tree, coeffs, costs, &PlanningOptions::default(), gap)?;
    rows.push(case_row("coordinated", system, tree, &coordinated, costs)?.0);
    solutions.push(("coordinated".to_string(), coordinated));

    let bess_only_opts = PlanningOptions {
        sc_allowed: false,
        ..PlanningOptions::default()
    };
    let bess_only = plan_once(system, tree, coeffs, costs, &bess_only_opts, gap)?;
    rows.push(case_row("bess_only", system, tree, &bess_only, costs)?.0);
    solutions.push(("bess_only".to_string(), bess_only));

    let sc_only_opts = PlanningOptions {
        gfm_allowed: false,
        ..PlanningOptions::default()
    };
    let sc_only = plan_once(system, tree, coeffs, costs, &sc_only_opts, gap)?;
    rows.push(case_row("sc_only", system, tree, &sc_only, costs)?.0);
    solutions.push(("sc_only".to_string(), sc_only));

    let two_stage = two_stage_plan(system, tree, coeffs, costs, gap)?;
    rows.push(case_row("two_stage", system, tree, &two_stage, costs)?.0);
    solutions.push(("two_stage".to_string(), two_stage));

    Ok(ComparisonStudy { rows, solutions })
}

/// Decoupled scheme: place storage for energy value only (stability rows
/// off), then freeze it and let a second run add SCs under the full
/// constraint set.
pub fn two_stage_plan(
    system: &PowerSystem,
    tree: &ScenarioTree,
    coeffs: &[LinearCoefficients],
    costs: &CostConfig,
    gap: f64,
) -> Result<PlanningSolution> {
    let stage1_opts = PlanningOptions {
        scc_enabled: false,
        gscr_enabled: false,
        sc_allowed: false,
        ..PlanningOptions::default()
    };
    let stage1 = plan_once(system, tree, coeffs, costs, &stage1_opts, gap)?;
    let fixed: Vec<(f64, f64)> = stage1
        .investments
        .gfm_mva
        .iter()
        .zip(&stage1.investments.gfm_overload_mva)
        .map(|(&c, &o)| (c, o.max(c)))
        .collect();
    let stage2_opts = PlanningOptions {
        fixed_gfm: Some(fixed),
        ..PlanningOptions::default()
    };
    plan_once(system, tree, coeffs, costs, &stage2_opts, gap)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::workbench::fixtures;

    #[test]
    fn evaluator_skips_windless_strength_hours() {
        let system = fixtures::five_bus();
        let mut ev = ExactEvaluator::new(&system, RunConfig::default());
        let dims = feature_dims(&system);
        let point = OperatingPoint {
            x_g: vec![1.0; dims.n_gen],
            s_s: vec![0.0; dims.n_sc],
            s_cm: vec![0.0; dims.n_gfm],
            s_cm_prime: vec![0.0; dims.n_gfm],
            p_cl: vec![0.0; dims.n_gfl],
        };
        assert!(ev.evaluate(MetricTag::Gscr, &point).unwrap().is_none());
        let scc = ev
            .evaluate(MetricTag::Scc { bus: 3 }, &point)
            .unwrap()
            .unwrap();
        assert!(scc > 0.0);
    }

    #[test]
    fn metric_specs_cover_limits() {
        let system = fixtures::five_bus();
        let specs = metric_specs(&system);
        assert_eq!(specs.len(), system.limits.scc.len() + 1);
    }
}
