//! Scenario-tree investment-plus-operation MILP and its exact-metric audit.
//!
//! Decisions: SC capacities and build flags, GFM converter capacities with a
//! separate temporary-overloading capacity, hourly unit commitment with
//! start-up lead times and minimum up/down logic, DC power flow with line
//! ratings, battery dispatch with charge/discharge exclusivity and a
//! terminal state-of-charge equality, load shedding priced at the value of
//! lost load, and per-hour linear stability rows for fault current and grid
//! strength.
//!
//! Battery energy is tracked as absolute stored energy rather than
//! state-of-charge: the SoC-times-capacity product would be bilinear, while
//! the stored-energy bounds scale linearly with the capacity variable.
//!
//! Costs: investments are annualized and scaled by the fraction of the year
//! the horizon covers, so one objective mixes both time scales coherently.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linearize::{LinearCoefficients, MetricTag, OperatingPoint};
use crate::network::{PowerSystem, SyncUnit, UnitState};
use crate::shortcircuit::{scc_iterative, SccState};
use crate::solver::{solve_milp, MilpModel, SolveRequest, SolveResult, SolveStatus, VarKind};
use crate::strength::gscr;

pub const HOURS_PER_YEAR: f64 = 8760.0;

/// One node of the scenario tree: probability plus per-step bus loads and
/// grid-following availability, both in MW.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TreeNode {
    pub probability: f64,
    /// `[step][bus]`
    pub load: Vec<Vec<f64>>,
    /// `[step][gfl unit]`
    pub gfl_available: Vec<Vec<f64>>,
}

/// Probability-weighted operating scenarios over the planning horizon.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScenarioTree {
    pub nodes: Vec<TreeNode>,
    pub delta_t_hours: f64,
    pub steps: usize,
}

impl ScenarioTree {
    pub fn validate(&self, system: &PowerSystem) -> Result<()> {
        if self.nodes.is_empty() {
            return Err(Error::invalid("tree", "no scenario nodes"));
        }
        if self.delta_t_hours <= 0.0 {
            return Err(Error::invalid("tree", "delta_t must be positive"));
        }
        let total: f64 = self.nodes.iter().map(|n| n.probability).sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::invalid(
                "tree",
                format!("probabilities sum to {total}, expected 1"),
            ));
        }
        let n_gfl = system.gfl_units().count();
        for (i, node) in self.nodes.iter().enumerate() {
            if node.probability <= 0.0 {
                return Err(Error::invalid("tree", format!("node {i} has nonpositive probability")));
            }
            if node.load.len() != self.steps || node.gfl_available.len() != self.steps {
                return Err(Error::invalid(
                    "tree",
                    format!("node {i} profiles do not span {} steps", self.steps),
                ));
            }
            for row in &node.load {
                if row.len() != system.buses.len() {
                    return Err(Error::invalid("tree", format!("node {i} load width mismatch")));
                }
            }
            for row in &node.gfl_available {
                if row.len() != n_gfl {
                    return Err(Error::invalid("tree", format!("node {i} wind width mismatch")));
                }
            }
        }
        Ok(())
    }

    pub fn horizon_hours(&self) -> f64 {
        self.steps as f64 * self.delta_t_hours
    }
}

/// Cost configuration. Unit-level investment costs can be overridden
/// globally; shedding and the MIP gap live here.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CostConfig {
    /// Override for SC investment cost, pounds per MVA-year.
    pub sc_cost_per_mva_yr: Option<f64>,
    /// Override for GFM converter cost, pounds per MVA-year.
    pub gfm_cost_per_mva_yr: Option<f64>,
    /// Override for the overload-to-converter cost ratio.
    pub overload_cost_ratio: Option<f64>,
    /// Value of lost load, pounds per MWh.
    pub voll_per_mwh: f64,
    /// Relative MIP gap target.
    pub mip_gap: f64,
}

impl Default for CostConfig {
    fn default() -> Self {
        CostConfig {
            sc_cost_per_mva_yr: None,
            gfm_cost_per_mva_yr: None,
            overload_cost_ratio: None,
            voll_per_mwh: 30_000.0,
            mip_gap: 0.005,
        }
    }
}

impl CostConfig {
    pub fn validate(&self) -> Result<()> {
        if self.voll_per_mwh < 0.0 {
            return Err(Error::invalid("voll_per_mwh", "must be nonnegative"));
        }
        if !(self.mip_gap > 0.0 && self.mip_gap < 1.0) && self.mip_gap != 0.0 {
            return Err(Error::invalid("mip_gap", "must be in [0, 1)"));
        }
        Ok(())
    }
}

/// Which constraint families and investment options are active.
#[derive(Debug, Clone)]
pub struct PlanningOptions {
    pub scc_enabled: bool,
    pub gscr_enabled: bool,
    pub sc_allowed: bool,
    pub gfm_allowed: bool,
    /// Freeze GFM investments at the given (capacity, overload) pairs.
    pub fixed_gfm: Option<Vec<(f64, f64)>>,
    /// Freeze SC investments at the given capacities.
    pub fixed_sc: Option<Vec<f64>>,
    /// Commitment state before the horizon, per UC generator.
    pub initial_on: Option<Vec<bool>>,
}

impl Default for PlanningOptions {
    fn default() -> Self {
        PlanningOptions {
            scc_enabled: true,
            gscr_enabled: true,
            sc_allowed: true,
            gfm_allowed: true,
            fixed_gfm: None,
            fixed_sc: None,
            initial_on: None,
        }
    }
}

/// Grid of variable ids over `[node][step]`.
type Grid = Vec<Vec<usize>>;

#[derive(Debug, Clone)]
struct GenVars {
    y: Option<Grid>,
    ysg: Option<Grid>,
    ysd: Option<Grid>,
    p: Grid,
}

#[derive(Debug, Clone)]
struct GfmVars {
    charge: Grid,
    discharge: Grid,
    energy: Grid,
    indicator: Grid,
    e_init: Vec<usize>,
}

#[derive(Debug, Clone)]
struct VarMap {
    sc_cap: Vec<usize>,
    sc_build: Vec<usize>,
    gfm_cap: Vec<usize>,
    gfm_over: Vec<usize>,
    gfm_build: Vec<usize>,
    gens: Vec<GenVars>,
    gfl: Vec<Grid>,
    gfm: Vec<GfmVars>,
    theta: Vec<Grid>,
    shed: Vec<Grid>,
}

/// The assembled MILP plus everything needed to decode a solution.
#[derive(Debug, Clone)]
pub struct PlanningModel {
    pub milp: MilpModel,
    vars: VarMap,
    /// Objective constant from must-run no-load cost.
    obj_constant: f64,
    year_fraction: f64,
    slack_bus: usize,
    n_nodes: usize,
    n_steps: usize,
}

impl PlanningModel {
    pub fn year_fraction(&self) -> f64 {
        self.year_fraction
    }

    /// Bus whose angle is pinned to zero.
    pub fn slack_bus(&self) -> usize {
        self.slack_bus
    }
}

fn grid(milp: &mut MilpModel, name: &str, nodes: usize, steps: usize, kind: VarKind, lo: f64, up: f64, obj: impl Fn(usize, usize) -> f64) -> Grid {
    (0..nodes)
        .map(|n| {
            (0..steps)
                .map(|t| milp.add_var(format!("{name}_n{n}t{t}"), kind, lo, up, obj(n, t)))
                .collect()
        })
        .collect()
}

/// Assemble the planning MILP for one system, tree and coefficient set.
///
/// `coeffs` carries one fitted set per monitored fault bus plus one for grid
/// strength; families toggled off in `options` are skipped. Dimension
/// mismatches between coefficients and the system are rejected.
pub fn build_planning_model(
    system: &PowerSystem,
    tree: &ScenarioTree,
    coeffs: &[LinearCoefficients],
    costs: &CostConfig,
    options: &PlanningOptions,
) -> Result<PlanningModel> {
    system.validate()?;
    tree.validate(system)?;
    costs.validate()?;

    let gens: Vec<&SyncUnit> = system.generators().collect();
    let n_gen = gens.len();
    let scs: Vec<&SyncUnit> = system.sc_candidates().collect();
    let gfls: Vec<_> = system.gfl_units().collect();
    let gfms: Vec<_> = system.gfm_units().collect();
    for u in &gfms {
        if u.bess.is_none() {
            return Err(Error::invalid(
                "ibr_units",
                format!("GFM candidate {} lacks battery data", u.id),
            ));
        }
    }
    let dims_expected = crate::linearize::FeatureDims {
        n_gen,
        n_sc: scs.len(),
        n_gfm: gfms.len(),
        n_gfl: gfls.len(),
    };
    for k in coeffs {
        if k.dims() != dims_expected {
            return Err(Error::Dimension {
                context: "planning coefficients",
                expected: dims_expected.flat_len(),
                got: k.dims().flat_len(),
            });
        }
    }
    let initial_on = match &options.initial_on {
        Some(v) => {
            let n_uc = gens.iter().filter(|g| g.uc.is_some()).count();
            if v.len() != n_uc {
                return Err(Error::Dimension {
                    context: "initial_on",
                    expected: n_uc,
                    got: v.len(),
                });
            }
            v.clone()
        }
        None => vec![true; gens.iter().filter(|g| g.uc.is_some()).count()],
    };

    let n_nodes = tree.nodes.len();
    let steps = tree.steps;
    let dt = tree.delta_t_hours;
    let year_fraction = tree.horizon_hours() / HOURS_PER_YEAR;
    let mut milp = MilpModel::new();

    // ---- investment variables ----
    let mut sc_cap = Vec::new();
    let mut sc_build = Vec::new();
    for (s_idx, s) in scs.iter().enumerate() {
        let cost = costs.sc_cost_per_mva_yr.unwrap_or(s.invest_cost) * year_fraction;
        let cap = milp.add_var(format!("sc_cap{s_idx}"), VarKind::Continuous, 0.0, s.capacity_max_mva, cost);
        let build = milp.add_binary(format!("sc_build{s_idx}"), 0.0);
        sc_cap.push(cap);
        sc_build.push(build);
    }
    let mut gfm_cap = Vec::new();
    let mut gfm_over = Vec::new();
    let mut gfm_build = Vec::new();
    for (m_idx, m) in gfms.iter().enumerate() {
        let conv = costs.gfm_cost_per_mva_yr.unwrap_or(m.invest_cost);
        let ratio = costs.overload_cost_ratio.unwrap_or(m.overload_cost_ratio);
        let cap = milp.add_var(
            format!("gfm_cap{m_idx}"),
            VarKind::Continuous,
            0.0,
            m.capacity_max_mva,
            (1.0 - ratio) * conv * year_fraction,
        );
        let over = milp.add_var(
            format!("gfm_over{m_idx}"),
            VarKind::Continuous,
            0.0,
            m.capacity_max_mva * m.overload_factor,
            ratio * conv * year_fraction,
        );
        let build = milp.add_binary(format!("gfm_build{m_idx}"), 0.0);
        gfm_cap.push(cap);
        gfm_over.push(over);
        gfm_build.push(build);
    }

    // ---- operation variables ----
    let mut gen_vars = Vec::new();
    let mut obj_constant = 0.0;
    for g in &gens {
        let pi = |n: usize| tree.nodes[n].probability;
        match &g.uc {
            Some(uc) => {
                let nl = g.no_load_cost;
                let mc = g.marginal_cost;
                let st = uc.startup_cost;
                let y = grid(&mut milp, &format!("y_g{}", g.id), n_nodes, steps, VarKind::Binary, 0.0, 1.0, |n, _| pi(n) * nl * dt);
                let ysg = grid(&mut milp, &format!("ysg_g{}", g.id), n_nodes, steps, VarKind::Binary, 0.0, 1.0, |n, _| pi(n) * st);
                let ysd = grid(&mut milp, &format!("ysd_g{}", g.id), n_nodes, steps, VarKind::Binary, 0.0, 1.0, |_, _| 0.0);
                let p = grid(&mut milp, &format!("p_g{}", g.id), n_nodes, steps, VarKind::Continuous, 0.0, g.p_max, |n, _| pi(n) * mc * dt);
                gen_vars.push(GenVars {
                    y: Some(y),
                    ysg: Some(ysg),
                    ysd: Some(ysd),
                    p,
                });
            }
            None => {
                // Must-run flexible unit: always online, dispatch only.
                for n in 0..n_nodes {
                    obj_constant += pi(n) * g.no_load_cost * dt * steps as f64;
                }
                let mc = g.marginal_cost;
                let p = grid(&mut milp, &format!("p_g{}", g.id), n_nodes, steps, VarKind::Continuous, g.p_min, g.p_max, |n, _| pi(n) * mc * dt);
                gen_vars.push(GenVars {
                    y: None,
                    ysg: None,
                    ysd: None,
                    p,
                });
            }
        }
    }
    let gfl_vars: Vec<Grid> = gfls
        .iter()
        .map(|u| grid(&mut milp, &format!("p_w{}", u.id), n_nodes, steps, VarKind::Continuous, 0.0, f64::INFINITY, |_, _| 0.0))
        .collect();
    // Availability enters as per-variable upper bounds.
    for (w, g) in gfl_vars.iter().enumerate() {
        for n in 0..n_nodes {
            for t in 0..steps {
                let avail = tree.nodes[n].gfl_available[t][w].max(0.0);
                let j = g[n][t];
                milp.vars[j].up = avail;
            }
        }
    }

    let mut gfm_vars = Vec::new();
    for m in &gfms {
        let charge = grid(&mut milp, &format!("pch_m{}", m.id), n_nodes, steps, VarKind::Continuous, 0.0, f64::INFINITY, |_, _| 0.0);
        let discharge = grid(&mut milp, &format!("pdch_m{}", m.id), n_nodes, steps, VarKind::Continuous, 0.0, f64::INFINITY, |_, _| 0.0);
        let energy = grid(&mut milp, &format!("e_m{}", m.id), n_nodes, steps, VarKind::Continuous, 0.0, f64::INFINITY, |_, _| 0.0);
        let indicator = grid(&mut milp, &format!("v_m{}", m.id), n_nodes, steps, VarKind::Binary, 0.0, 1.0, |_, _| 0.0);
        let e_init = (0..n_nodes)
            .map(|n| milp.add_var(format!("e0_m{}n{n}", m.id), VarKind::Continuous, 0.0, f64::INFINITY, 0.0))
            .collect();
        gfm_vars.push(GfmVars {
            charge,
            discharge,
            energy,
            indicator,
            e_init,
        });
    }

    let theta: Vec<Grid> = system
        .buses
        .iter()
        .map(|b| grid(&mut milp, &format!("th_b{}", b.id), n_nodes, steps, VarKind::Continuous, f64::NEG_INFINITY, f64::INFINITY, |_, _| 0.0))
        .collect();
    let voll = costs.voll_per_mwh;
    let shed: Vec<Grid> = system
        .buses
        .iter()
        .map(|b| {
            let g = grid(&mut milp, &format!("shed_b{}", b.id), n_nodes, steps, VarKind::Continuous, 0.0, 0.0, {
                let pi: Vec<f64> = tree.nodes.iter().map(|n| n.probability).collect();
                move |n, _| pi[n] * voll * dt
            });
            for n in 0..n_nodes {
                for t in 0..steps {
                    let j = g[n][t];
                    milp.vars[j].up = tree.nodes[n].load[t][b.id].max(0.0);
                }
            }
            g
        })
        .collect();

    // Angle reference: the first synchronous-unit bus (arbitrary but fixed).
    let slack_bus = system.sync_units.first().map(|u| u.bus).unwrap_or(0);
    for n in 0..n_nodes {
        for t in 0..steps {
            let j = theta[slack_bus][n][t];
            milp.vars[j].lo = 0.0;
            milp.vars[j].up = 0.0;
        }
    }

    // ---- investment coupling ----
    for (s_idx, s) in scs.iter().enumerate() {
        milp.add_row(
            format!("sc_ub{s_idx}"),
            vec![(sc_cap[s_idx], 1.0), (sc_build[s_idx], -s.capacity_max_mva)],
            f64::NEG_INFINITY,
            0.0,
        );
        milp.add_row(
            format!("sc_lb{s_idx}"),
            vec![(sc_cap[s_idx], 1.0), (sc_build[s_idx], -s.capacity_min_mva)],
            0.0,
            f64::INFINITY,
        );
    }
    if !scs.is_empty() {
        milp.add_row(
            "sc_count",
            sc_build.iter().map(|&j| (j, 1.0)).collect(),
            f64::NEG_INFINITY,
            system.max_sc_count as f64,
        );
    }
    for (m_idx, m) in gfms.iter().enumerate() {
        milp.add_row(
            format!("gfm_ub{m_idx}"),
            vec![(gfm_cap[m_idx], 1.0), (gfm_build[m_idx], -m.capacity_max_mva)],
            f64::NEG_INFINITY,
            0.0,
        );
        milp.add_row(
            format!("gfm_lb{m_idx}"),
            vec![(gfm_cap[m_idx], 1.0), (gfm_build[m_idx], -m.capacity_min_mva)],
            0.0,
            f64::INFINITY,
        );
        // Overloading band: S_cm <= S'_cm <= beta * S_cm.
        milp.add_row(
            format!("gfm_over_lb{m_idx}"),
            vec![(gfm_over[m_idx], 1.0), (gfm_cap[m_idx], -1.0)],
            0.0,
            f64::INFINITY,
        );
        milp.add_row(
            format!("gfm_over_ub{m_idx}"),
            vec![(gfm_over[m_idx], 1.0), (gfm_cap[m_idx], -m.overload_factor)],
            f64::NEG_INFINITY,
            0.0,
        );
    }
    if !gfms.is_empty() {
        milp.add_row(
            "gfm_count",
            gfm_build.iter().map(|&j| (j, 1.0)).collect(),
            f64::NEG_INFINITY,
            system.max_gfm_count as f64,
        );
    }

    // Case-study toggles: disallow or freeze investments.
    if !options.sc_allowed {
        for (&cap, &build) in sc_cap.iter().zip(&sc_build) {
            milp.vars[cap].up = 0.0;
            milp.vars[build].up = 0.0;
        }
    }
    if let Some(fixed) = &options.fixed_sc {
        if fixed.len() != scs.len() {
            return Err(Error::Dimension {
                context: "fixed_sc",
                expected: scs.len(),
                got: fixed.len(),
            });
        }
        for ((&cap, &build), &v) in sc_cap.iter().zip(&sc_build).zip(fixed) {
            milp.vars[cap].lo = v;
            milp.vars[cap].up = v;
            let b = if v > 0.0 { 1.0 } else { 0.0 };
            milp.vars[build].lo = b;
            milp.vars[build].up = b;
        }
    }
    if !options.gfm_allowed {
        for ((&cap, &over), &build) in gfm_cap.iter().zip(&gfm_over).zip(&gfm_build) {
            milp.vars[cap].up = 0.0;
            milp.vars[over].up = 0.0;
            milp.vars[build].up = 0.0;
        }
    }
    if let Some(fixed) = &options.fixed_gfm {
        if fixed.len() != gfms.len() {
            return Err(Error::Dimension {
                context: "fixed_gfm",
                expected: gfms.len(),
                got: fixed.len(),
            });
        }
        for (m_idx, &(cap_v, over_v)) in fixed.iter().enumerate() {
            milp.vars[gfm_cap[m_idx]].lo = cap_v;
            milp.vars[gfm_cap[m_idx]].up = cap_v;
            milp.vars[gfm_over[m_idx]].lo = over_v;
            milp.vars[gfm_over[m_idx]].up = over_v;
            let b = if cap_v > 0.0 { 1.0 } else { 0.0 };
            milp.vars[gfm_build[m_idx]].lo = b;
            milp.vars[gfm_build[m_idx]].up = b;
        }
    }

    // ---- per node/step structure ----
    for n in 0..n_nodes {
        for t in 0..steps {
            // Bus balance with inline DC flow terms.
            for bus in &system.buses {
                let i = bus.id;
                let mut coeffs_row: Vec<(usize, f64)> = Vec::new();
                for (g_idx, g) in gens.iter().enumerate() {
                    if g.bus == i {
                        coeffs_row.push((gen_vars[g_idx].p[n][t], 1.0));
                    }
                }
                for (w_idx, u) in gfls.iter().enumerate() {
                    if u.bus == i {
                        coeffs_row.push((gfl_vars[w_idx][n][t], 1.0));
                    }
                }
                for (m_idx, u) in gfms.iter().enumerate() {
                    if u.bus == i {
                        coeffs_row.push((gfm_vars[m_idx].discharge[n][t], 1.0));
                        coeffs_row.push((gfm_vars[m_idx].charge[n][t], -1.0));
                    }
                }
                coeffs_row.push((shed[i][n][t], 1.0));
                for br in &system.branches {
                    let b = 1.0 / br.reactance;
                    if br.from_bus == i {
                        coeffs_row.push((theta[br.from_bus][n][t], -b));
                        coeffs_row.push((theta[br.to_bus][n][t], b));
                    } else if br.to_bus == i {
                        coeffs_row.push((theta[br.to_bus][n][t], -b));
                        coeffs_row.push((theta[br.from_bus][n][t], b));
                    }
                }
                let load = tree.nodes[n].load[t][i];
                milp.add_row(format!("bal_b{i}_n{n}t{t}"), coeffs_row, load, load);
            }
            // Line ratings on the angle difference.
            for (e, br) in system.branches.iter().enumerate() {
                let b = 1.0 / br.reactance;
                milp.add_row(
                    format!("rate_e{e}_n{n}t{t}"),
                    vec![(theta[br.from_bus][n][t], b), (theta[br.to_bus][n][t], -b)],
                    -br.rating,
                    br.rating,
                );
            }
        }
    }

    // ---- unit commitment logic ----
    let mut uc_idx = 0usize;
    for (g_idx, g) in gens.iter().enumerate() {
        let Some(uc) = &g.uc else { continue };
        let y = gen_vars[g_idx].y.as_ref().unwrap();
        let ysg = gen_vars[g_idx].ysg.as_ref().unwrap();
        let ysd = gen_vars[g_idx].ysd.as_ref().unwrap();
        let p = &gen_vars[g_idx].p;
        let y0 = if initial_on[uc_idx] { 1.0 } else { 0.0 };
        uc_idx += 1;
        for n in 0..n_nodes {
            for t in 0..steps {
                // State closure y_t = y_{t-1} + ysg_t - ysd_t.
                let mut row = vec![(y[n][t], 1.0), (ysg[n][t], -1.0), (ysd[n][t], 1.0)];
                let rhs = if t == 0 {
                    y0
                } else {
                    row.push((y[n][t - 1], -1.0));
                    0.0
                };
                milp.add_row(format!("clo_g{}_n{n}t{t}", g.id), row, rhs, rhs);

                // A unit cannot start and stop in the same step.
                milp.add_row(
                    format!("pair_g{}_n{n}t{t}", g.id),
                    vec![(ysg[n][t], 1.0), (ysd[n][t], 1.0)],
                    f64::NEG_INFINITY,
                    1.0,
                );

                // Start-up lead: generation starts T_st after the start
                // decision, which itself needs the unit off in the previous
                // step and no shutdown within the last T_mdt steps. The
                // shutdown window stops before the decision step itself,
                // otherwise no shutdown could ever take the value one.
                if t < uc.startup_time {
                    let j = ysg[n][t];
                    milp.vars[j].up = 0.0;
                } else {
                    let tau = t - uc.startup_time;
                    let mut row = vec![(ysg[n][t], 1.0)];
                    let mut rhs = 1.0;
                    if tau == 0 {
                        rhs -= y0;
                    } else {
                        row.push((y[n][tau - 1], 1.0));
                    }
                    let lo_j = tau.saturating_sub(uc.min_down_time);
                    for j in lo_j..tau {
                        row.push((ysd[n][j], 1.0));
                    }
                    milp.add_row(format!("mdt_g{}_n{n}t{t}", g.id), row, f64::NEG_INFINITY, rhs);
                }

                // Shutdown needs the unit online and no start within T_mut.
                let mut row = vec![(ysd[n][t], 1.0)];
                let mut rhs = 0.0;
                if t == 0 {
                    rhs += y0;
                } else {
                    row.push((y[n][t - 1], -1.0));
                }
                let lo_j = t.saturating_sub(uc.min_up_time);
                for j in lo_j..=t {
                    row.push((ysg[n][j], 1.0));
                }
                milp.add_row(format!("mut_g{}_n{n}t{t}", g.id), row, f64::NEG_INFINITY, rhs);

                // Dispatch inside commitment-scaled limits.
                milp.add_row(
                    format!("pmax_g{}_n{n}t{t}", g.id),
                    vec![(p[n][t], 1.0), (y[n][t], -g.p_max)],
                    f64::NEG_INFINITY,
                    0.0,
                );
                milp.add_row(
                    format!("pmin_g{}_n{n}t{t}", g.id),
                    vec![(p[n][t], 1.0), (y[n][t], -g.p_min)],
                    0.0,
                    f64::INFINITY,
                );
                // Ramping between consecutive steps.
                if t > 0 {
                    milp.add_row(
                        format!("ramp_g{}_n{n}t{t}", g.id),
                        vec![(p[n][t], 1.0), (p[n][t - 1], -1.0)],
                        -uc.ramp_down,
                        uc.ramp_up,
                    );
                }
            }
        }
    }

    // ---- battery dispatch ----
    for (m_idx, m) in gfms.iter().enumerate() {
        let b = m.bess.as_ref().unwrap();
        let vars = &gfm_vars[m_idx];
        let big_dch = b.discharge_rate * m.capacity_max_mva;
        let big_ch = b.charge_rate * m.capacity_max_mva;
        for n in 0..n_nodes {
            for t in 0..steps {
                // Rates scale with installed capacity and the exclusivity binary.
                milp.add_row(
                    format!("dchcap_m{}_n{n}t{t}", m.id),
                    vec![(vars.discharge[n][t], 1.0), (gfm_cap[m_idx], -b.discharge_rate)],
                    f64::NEG_INFINITY,
                    0.0,
                );
                milp.add_row(
                    format!("dchind_m{}_n{n}t{t}", m.id),
                    vec![(vars.discharge[n][t], 1.0), (vars.indicator[n][t], -big_dch)],
                    f64::NEG_INFINITY,
                    0.0,
                );
                milp.add_row(
                    format!("chcap_m{}_n{n}t{t}", m.id),
                    vec![(vars.charge[n][t], 1.0), (gfm_cap[m_idx], -b.charge_rate)],
                    f64::NEG_INFINITY,
                    0.0,
                );
                milp.add_row(
                    format!("chind_m{}_n{n}t{t}", m.id),
                    vec![(vars.charge[n][t], 1.0), (vars.indicator[n][t], big_ch)],
                    f64::NEG_INFINITY,
                    big_ch,
                );

                // Stored energy balance.
                let mut row = vec![
                    (vars.energy[n][t], 1.0),
                    (vars.charge[n][t], -b.efficiency * dt),
                    (vars.discharge[n][t], dt / b.efficiency),
                ];
                if t == 0 {
                    row.push((vars.e_init[n], -1.0));
                } else {
                    row.push((vars.energy[n][t - 1], -1.0));
                }
                milp.add_row(format!("soc_m{}_n{n}t{t}", m.id), row, 0.0, 0.0);

                // Stored energy inside SoC band, which scales with capacity.
                milp.add_row(
                    format!("emax_m{}_n{n}t{t}", m.id),
                    vec![(vars.energy[n][t], 1.0), (gfm_cap[m_idx], -b.soc_max * b.duration_h)],
                    f64::NEG_INFINITY,
                    0.0,
                );
                milp.add_row(
                    format!("emin_m{}_n{n}t{t}", m.id),
                    vec![(vars.energy[n][t], 1.0), (gfm_cap[m_idx], -b.soc_min * b.duration_h)],
                    0.0,
                    f64::INFINITY,
                );
            }
            // Initial stored energy inside the band; terminal equals initial.
            milp.add_row(
                format!("e0max_m{}_n{n}", m.id),
                vec![(vars.e_init[n], 1.0), (gfm_cap[m_idx], -b.soc_max * b.duration_h)],
                f64::NEG_INFINITY,
                0.0,
            );
            milp.add_row(
                format!("e0min_m{}_n{n}", m.id),
                vec![(vars.e_init[n], 1.0), (gfm_cap[m_idx], -b.soc_min * b.duration_h)],
                0.0,
                f64::INFINITY,
            );
            milp.add_row(
                format!("eterm_m{}_n{n}", m.id),
                vec![(vars.energy[n][steps - 1], 1.0), (vars.e_init[n], -1.0)],
                0.0,
                0.0,
            );
        }
    }

    // ---- linear stability rows ----
    for k in coeffs {
        let enabled = match k.tag {
            MetricTag::Scc { .. } => options.scc_enabled,
            MetricTag::Gscr => options.gscr_enabled,
        };
        if !enabled {
            continue;
        }
        for n in 0..n_nodes {
            for t in 0..steps {
                let mut row: Vec<(usize, f64)> = Vec::new();
                let mut rhs = k.limit - k.k_0;
                for (g_idx, _) in gens.iter().enumerate() {
                    let kg = k.k_g[g_idx];
                    match &gen_vars[g_idx].y {
                        Some(y) => {
                            if kg != 0.0 {
                                row.push((y[n][t], kg));
                            }
                        }
                        None => rhs -= kg, // must-run commitment is constant 1
                    }
                }
                for (s_idx, &ks) in k.k_s.iter().enumerate() {
                    if ks != 0.0 {
                        row.push((sc_cap[s_idx], ks));
                    }
                }
                for (m_idx, &kcm) in k.k_cm.iter().enumerate() {
                    if kcm != 0.0 {
                        let var = match k.tag {
                            MetricTag::Scc { .. } => gfm_over[m_idx],
                            MetricTag::Gscr => gfm_cap[m_idx],
                        };
                        row.push((var, kcm));
                    }
                }
                for (w_idx, &kcl) in k.k_cl.iter().enumerate() {
                    if kcl != 0.0 {
                        row.push((gfl_vars[w_idx][n][t], kcl));
                    }
                }
                milp.add_row(format!("stab_{}_n{n}t{t}", k.tag), row, rhs, f64::INFINITY);
            }
        }
    }

    let model = PlanningModel {
        milp,
        vars: VarMap {
            sc_cap,
            sc_build,
            gfm_cap,
            gfm_over,
            gfm_build,
            gens: gen_vars,
            gfl: gfl_vars,
            gfm: gfm_vars,
            theta,
            shed,
        },
        obj_constant,
        year_fraction,
        slack_bus,
        n_nodes,
        n_steps: steps,
    };
    model.milp.validate()?;
    Ok(model)
}

/// Investment part of a solution.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Investments {
    pub sc_mva: Vec<f64>,
    pub sc_built: Vec<bool>,
    pub gfm_mva: Vec<f64>,
    pub gfm_overload_mva: Vec<f64>,
    pub gfm_built: Vec<bool>,
}

/// Operating schedules of one scenario node, `[unit][step]`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NodeSchedule {
    pub commitment: Vec<Vec<f64>>,
    pub startup: Vec<Vec<f64>>,
    pub shutdown: Vec<Vec<f64>>,
    pub dispatch: Vec<Vec<f64>>,
    pub gfl_dispatch: Vec<Vec<f64>>,
    pub charge: Vec<Vec<f64>>,
    pub discharge: Vec<Vec<f64>>,
    pub stored_energy: Vec<Vec<f64>>,
    pub initial_energy: Vec<f64>,
    pub charge_indicator: Vec<Vec<f64>>,
    pub shed: Vec<Vec<f64>>,
    pub angles: Vec<Vec<f64>>,
    pub flows: Vec<Vec<f64>>,
}

/// Cost decomposition of a solution.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CostBreakdown {
    /// Annualized investment cost, pounds per year.
    pub investment_per_year: f64,
    /// Expected operating cost, pounds per hour.
    pub operation_per_hour: f64,
    /// Investment plus a year of expected operation, pounds per year.
    pub total_per_year: f64,
    /// Raw solver objective over the horizon (investment scaled down).
    pub objective: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolverStats {
    pub gap: f64,
    pub nodes: usize,
    pub simplex_iterations: usize,
    pub wall_seconds: f64,
    pub optimal: bool,
}

/// Full planning outcome.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PlanningSolution {
    pub investments: Investments,
    pub schedules: Vec<NodeSchedule>,
    pub costs: CostBreakdown,
    pub stats: SolverStats,
}

/// Solve an assembled planning model.
pub fn solve_planning(
    system: &PowerSystem,
    tree: &ScenarioTree,
    model: &PlanningModel,
    gap: f64,
) -> Result<PlanningSolution> {
    let req = SolveRequest {
        gap,
        ..SolveRequest::default()
    };
    let res = solve_milp(&model.milp, &req)?;
    match res.status {
        SolveStatus::Optimal | SolveStatus::GapFeasible => {}
        SolveStatus::Infeasible => {
            return Err(Error::Infeasible {
                hint: Some("planning model has no feasible schedule".into()),
            })
        }
        SolveStatus::Timeout => {
            if res.x.is_empty() {
                return Err(Error::Solver("planning solve hit budget with no incumbent".into()));
            }
        }
    }
    Ok(extract_solution(system, tree, model, &res))
}

fn extract_solution(
    system: &PowerSystem,
    tree: &ScenarioTree,
    model: &PlanningModel,
    res: &SolveResult,
) -> PlanningSolution {
    let x = &res.x;
    let v = &model.vars;
    let investments = Investments {
        sc_mva: v.sc_cap.iter().map(|&j| x[j].max(0.0)).collect(),
        sc_built: v.sc_build.iter().map(|&j| x[j] > 0.5).collect(),
        gfm_mva: v.gfm_cap.iter().map(|&j| x[j].max(0.0)).collect(),
        gfm_overload_mva: v.gfm_over.iter().map(|&j| x[j].max(0.0)).collect(),
        gfm_built: v.gfm_build.iter().map(|&j| x[j] > 0.5).collect(),
    };

    let mut schedules = Vec::new();
    for n in 0..model.n_nodes {
        let steps = model.n_steps;
        let take = |g: &Grid| -> Vec<f64> { (0..steps).map(|t| g[n][t]).map(|j| x[j]).collect() };
        let commitment: Vec<Vec<f64>> = v
            .gens
            .iter()
            .map(|gv| match &gv.y {
                Some(y) => take(y),
                None => vec![1.0; steps],
            })
            .collect();
        let startup: Vec<Vec<f64>> = v
            .gens
            .iter()
            .map(|gv| match &gv.ysg {
                Some(g) => take(g),
                None => vec![0.0; steps],
            })
            .collect();
        let shutdown: Vec<Vec<f64>> = v
            .gens
            .iter()
            .map(|gv| match &gv.ysd {
                Some(g) => take(g),
                None => vec![0.0; steps],
            })
            .collect();
        let dispatch: Vec<Vec<f64>> = v.gens.iter().map(|gv| take(&gv.p)).collect();
        let gfl_dispatch: Vec<Vec<f64>> = v.gfl.iter().map(take).collect();
        let charge: Vec<Vec<f64>> = v.gfm.iter().map(|m| take(&m.charge)).collect();
        let discharge: Vec<Vec<f64>> = v.gfm.iter().map(|m| take(&m.discharge)).collect();
        let stored: Vec<Vec<f64>> = v.gfm.iter().map(|m| take(&m.energy)).collect();
        let e_init: Vec<f64> = v.gfm.iter().map(|m| x[m.e_init[n]]).collect();
        let indicator: Vec<Vec<f64>> = v.gfm.iter().map(|m| take(&m.indicator)).collect();
        let shed: Vec<Vec<f64>> = v.shed.iter().map(take).collect();
        let angles: Vec<Vec<f64>> = v.theta.iter().map(take).collect();
        let flows: Vec<Vec<f64>> = system
            .branches
            .iter()
            .map(|br| {
                (0..steps)
                    .map(|t| (x[v.theta[br.from_bus][n][t]] - x[v.theta[br.to_bus][n][t]]) / br.reactance)
                    .collect()
            })
            .collect();
        schedules.push(NodeSchedule {
            commitment,
            startup,
            shutdown,
            dispatch,
            gfl_dispatch,
            charge,
            discharge,
            stored_energy: stored,
            initial_energy: e_init,
            charge_indicator: indicator,
            shed,
            angles,
            flows,
        });
    }

    let objective = res.objective + model.obj_constant;
    let investment_horizon: f64 = v
        .sc_cap
        .iter()
        .chain(&v.gfm_cap)
        .chain(&v.gfm_over)
        .map(|&j| model.milp.vars[j].obj * x[j])
        .sum();
    let operation_horizon = objective - investment_horizon;
    let horizon_hours = tree.horizon_hours();
    let investment_per_year = investment_horizon / model.year_fraction;
    let operation_per_hour = operation_horizon / horizon_hours;
    let costs = CostBreakdown {
        investment_per_year,
        operation_per_hour,
        total_per_year: investment_per_year + operation_per_hour * HOURS_PER_YEAR,
        objective,
    };
    PlanningSolution {
        investments,
        schedules,
        costs,
        stats: SolverStats {
            gap: res.gap,
            nodes: res.nodes,
            simplex_iterations: res.simplex_iterations,
            wall_seconds: res.wall.as_secs_f64(),
            optimal: res.status == SolveStatus::Optimal,
        },
    }
}

/// Expected operating cost recomputed from the schedules, pounds per hour.
pub fn evaluate_operation_cost(
    system: &PowerSystem,
    tree: &ScenarioTree,
    solution: &PlanningSolution,
    costs: &CostConfig,
) -> f64 {
    let gens: Vec<&SyncUnit> = system.generators().collect();
    let dt = tree.delta_t_hours;
    let mut total = 0.0;
    for (n, node) in tree.nodes.iter().enumerate() {
        let sched = &solution.schedules[n];
        let mut node_cost = 0.0;
        for (g_idx, g) in gens.iter().enumerate() {
            for t in 0..tree.steps {
                let y = sched.commitment[g_idx][t];
                let p = sched.dispatch[g_idx][t];
                let start = sched.startup[g_idx][t];
                let st_cost = g.uc.as_ref().map(|u| u.startup_cost).unwrap_or(0.0);
                node_cost += st_cost * start + g.no_load_cost * y * dt + g.marginal_cost * p * dt;
            }
        }
        for bus_shed in &sched.shed {
            for &s in bus_shed {
                node_cost += costs.voll_per_mwh * s * dt;
            }
        }
        total += node.probability * node_cost;
    }
    total / tree.horizon_hours()
}

/// Hourly operating points of a solution, in the shape the surrogates train
/// on.
pub fn operating_points(solution: &PlanningSolution) -> Vec<OperatingPoint> {
    let mut points = Vec::new();
    for sched in &solution.schedules {
        let steps = sched.dispatch.first().map_or(0, |d| d.len());
        for t in 0..steps {
            let x_g: Vec<f64> = sched.commitment.iter().map(|row| row[t].round()).collect();
            let p_cl: Vec<f64> = sched.gfl_dispatch.iter().map(|row| row[t]).collect();
            points.push(OperatingPoint {
                x_g,
                s_s: solution.investments.sc_mva.clone(),
                s_cm: solution.investments.gfm_mva.clone(),
                s_cm_prime: solution.investments.gfm_overload_mva.clone(),
                p_cl,
            });
        }
    }
    points
}

/// Exact-metric audit of one hour.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HourAudit {
    pub node: usize,
    pub step: usize,
    /// Worst fault-current margin over monitored buses (value minus limit).
    pub scc_margin: f64,
    pub scc_ok: bool,
    /// Strength margin (value minus limit); `None` when no grid-following
    /// unit produced that hour.
    pub gscr_margin: Option<f64>,
    pub gscr_ok: bool,
}

/// Violation summary across the whole horizon.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ViolationReport {
    pub hours: Vec<HourAudit>,
    pub scc_violation_rate: f64,
    pub gscr_violation_rate: f64,
    pub worst_scc_margin: f64,
    pub worst_gscr_margin: f64,
}

/// Recompute the exact metrics at every dispatched hour and report the
/// fraction violating each requirement.
pub fn validate_solution(
    system: &PowerSystem,
    tree: &ScenarioTree,
    solution: &PlanningSolution,
) -> Result<ViolationReport> {
    let eps = 1e-6;
    let k_max = 60;
    let tol = 1e-6;
    let mut hours = Vec::new();
    let mut scc_viol = 0usize;
    let mut gscr_viol = 0usize;
    let mut gscr_counted = 0usize;
    let mut worst_scc = f64::INFINITY;
    let mut worst_gscr = f64::INFINITY;

    // The fault/strength state depends only on commitments and investments,
    // so cache per commitment pattern.
    let mut scc_cache: std::collections::HashMap<Vec<bool>, SccState> =
        std::collections::HashMap::new();

    for (n, _) in tree.nodes.iter().enumerate() {
        let sched = &solution.schedules[n];
        for t in 0..tree.steps {
            let committed: Vec<bool> = sched.commitment.iter().map(|row| row[t] > 0.5).collect();
            let state = UnitState {
                committed: committed.clone(),
                sc_mva: solution.investments.sc_mva.clone(),
                gfm_mva: solution.investments.gfm_mva.clone(),
                gfm_overload_mva: solution.investments.gfm_overload_mva.clone(),
            };
            let p_cl: Vec<f64> = sched.gfl_dispatch.iter().map(|row| row[t]).collect();

            let mut scc_margin = f64::INFINITY;
            if !system.limits.scc.is_empty() {
                let scc_state = match scc_cache.get(&committed) {
                    Some(s) => s.clone(),
                    None => {
                        let s = SccState::from_system(system, &state)?;
                        scc_cache.insert(committed.clone(), s.clone());
                        s
                    }
                };
                for &(bus, lim) in &system.limits.scc {
                    let r = scc_iterative(&scc_state, bus, eps, k_max)?;
                    scc_margin = scc_margin.min(r.magnitude - lim);
                }
            }
            let scc_ok = scc_margin >= -tol;
            if !scc_ok {
                scc_viol += 1;
            }
            worst_scc = worst_scc.min(scc_margin);

            let p_cl_pu: Vec<f64> = p_cl.iter().map(|p| p / system.s_base).collect();
            let (gscr_margin, gscr_ok) = if p_cl_pu.iter().any(|&p| p > 0.0) {
                let g = gscr(system, &state, &p_cl_pu)?;
                let margin = g - system.limits.gscr;
                gscr_counted += 1;
                if margin < -tol {
                    gscr_viol += 1;
                }
                worst_gscr = worst_gscr.min(margin);
                (Some(margin), margin >= -tol)
            } else {
                (None, true)
            };

            hours.push(HourAudit {
                node: n,
                step: t,
                scc_margin,
                scc_ok,
                gscr_margin,
                gscr_ok,
            });
        }
    }

    let total_hours = hours.len().max(1);
    Ok(ViolationReport {
        hours,
        scc_violation_rate: scc_viol as f64 / total_hours as f64,
        gscr_violation_rate: gscr_viol as f64 / gscr_counted.max(1) as f64,
        worst_scc_margin: worst_scc,
        worst_gscr_margin: worst_gscr,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::workbench::fixtures;
    use approx::assert_abs_diff_eq;

    fn singleton_tree(system: &PowerSystem, steps: usize, load_mw: f64, wind_mw: f64) -> ScenarioTree {
        let n_bus = system.buses.len();
        let n_gfl = system.gfl_units().count();
        // All load on one load-carrying bus of the fixture.
        let mut load = vec![vec![0.0; n_bus]; steps];
        let load_bus = if n_bus > 1 { 1 } else { 0 };
        for row in &mut load {
            row[load_bus] = load_mw;
        }
        ScenarioTree {
            nodes: vec![TreeNode {
                probability: 1.0,
                load,
                gfl_available: vec![vec![wind_mw; n_gfl]; steps],
            }],
            delta_t_hours: 1.0,
            steps,
        }
    }

    #[test]
    fn single_generator_single_hour() {
        let system = fixtures::one_bus();
        let tree = singleton_tree(&system, 1, 0.0, 0.0);
        // Put 100 MW on bus 0 (the only bus).
        let mut tree = tree;
        tree.nodes[0].load[0] = vec![100.0];
        let costs = CostConfig {
            voll_per_mwh: 30000.0,
            ..CostConfig::default()
        };
        let options = PlanningOptions {
            scc_enabled: false,
            gscr_enabled: false,
            ..PlanningOptions::default()
        };
        let model = build_planning_model(&system, &tree, &[], &costs, &options).unwrap();
        let sol = solve_planning(&system, &tree, &model, 0.0).unwrap();
        let g = &system.generators().next().unwrap();
        assert_abs_diff_eq!(sol.schedules[0].dispatch[0][0], 100.0, epsilon = 1e-6);
        let want = g.no_load_cost + 100.0 * g.marginal_cost;
        assert_abs_diff_eq!(sol.costs.objective, want, epsilon = 1e-6);
        assert_abs_diff_eq!(
            evaluate_operation_cost(&system, &tree, &sol, &costs),
            want,
            epsilon = 1e-6
        );
    }

    #[test]
    fn zero_demand_shuts_everything_down() {
        let system = fixtures::one_bus();
        let mut tree = singleton_tree(&system, 4, 0.0, 0.0);
        for t in 0..4 {
            tree.nodes[0].load[t] = vec![0.0];
        }
        let costs = CostConfig::default();
        let options = PlanningOptions {
            scc_enabled: false,
            gscr_enabled: false,
            ..PlanningOptions::default()
        };
        let model = build_planning_model(&system, &tree, &[], &costs, &options).unwrap();
        let sol = solve_planning(&system, &tree, &model, 0.0).unwrap();
        assert_abs_diff_eq!(sol.costs.objective, 0.0, epsilon = 1e-9);
        for t in 0..4 {
            assert!(sol.schedules[0].commitment[0][t] < 0.5);
            assert_abs_diff_eq!(sol.schedules[0].dispatch[0][t], 0.0, epsilon = 1e-9);
        }
    }

    #[test]
    fn infeasible_when_demand_exceeds_capacity_without_shedding() {
        let mut system = fixtures::one_bus();
        // VOLL shedding would absorb any deficit; emulate "VOLL disabled" by
        // zeroing the load bound path: demand above p_max with shedding
        // capped at zero load is impossible, so instead verify the solver
        // reports the deficit through full shedding cost.
        system.generators().next().unwrap();
        let mut tree = singleton_tree(&system, 1, 0.0, 0.0);
        tree.nodes[0].load[0] = vec![500.0]; // p_max is 320
        let costs = CostConfig::default();
        let options = PlanningOptions {
            scc_enabled: false,
            gscr_enabled: false,
            ..PlanningOptions::default()
        };
        let model = build_planning_model(&system, &tree, &[], &costs, &options).unwrap();
        let sol = solve_planning(&system, &tree, &model, 0.0).unwrap();
        assert_abs_diff_eq!(sol.schedules[0].shed[0][0], 180.0, epsilon = 1e-5);
    }

    #[test]
    fn tree_probability_must_sum_to_one() {
        let system = fixtures::one_bus();
        let mut tree = singleton_tree(&system, 1, 0.0, 0.0);
        tree.nodes[0].probability = 0.7;
        assert!(tree.validate(&system).is_err());
    }
}
