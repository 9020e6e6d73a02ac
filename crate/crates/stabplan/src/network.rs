//! Grid data model and per-unit admittance/impedance assembly.
//!
//! The network is lossless: line resistance and pre-fault load flow are
//! dropped, so every admittance is purely imaginary. Matrices are stored as
//! general complex values to leave the door open, but all bundled fixtures
//! are purely reactive.
//!
//! Two admittance variants are assembled from the same base matrix:
//!
//! - *fault mode* adds the committed synchronous machines and installed
//!   synchronous condensers as shunts (inverters act as current sources and
//!   contribute no admittance), and
//! - *strength mode* additionally adds installed grid-forming converters,
//!   which behave as voltage sources behind a reactance for small signals.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::ComplexMatrix;

/// Condition-estimate threshold above which an admittance matrix is treated
/// as singular (no synchronous source grounding the network).
pub const CONDITION_LIMIT: f64 = 1e12;

/// A network node. `base_kv` is carried as metadata only; all electrical
/// quantities are per unit on the system base.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Bus {
    pub id: usize,
    pub name: String,
    pub base_kv: f64,
}

/// A transmission branch with series reactance (per unit on the system base)
/// and an MW flow rating used by the planning model.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Branch {
    pub from_bus: usize,
    pub to_bus: usize,
    pub reactance: f64,
    pub rating: f64,
}

/// Synchronous unit kind: an operating generator or a condenser candidate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SyncKind {
    Sg,
    ScCandidate,
}

/// Unit-commitment data for a thermal generator. Times are in steps.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct UcData {
    pub startup_cost: f64,
    pub startup_time: usize,
    pub min_up_time: usize,
    pub min_down_time: usize,
    pub ramp_up: f64,
    pub ramp_down: f64,
}

/// A synchronous generator or a synchronous-condenser candidate.
///
/// `reactance` is the fault-calculation reactance on the unit's own MVA base;
/// whether that is the transient or subtransient value is a data question —
/// the case file stores a single number per unit.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SyncUnit {
    pub id: usize,
    pub bus: usize,
    pub kind: SyncKind,
    /// Installed capacity for generators (MVA). Unused for SC candidates.
    pub capacity_mva: f64,
    /// Capacity bounds for SC candidates (MVA). Unused for generators.
    pub capacity_min_mva: f64,
    pub capacity_max_mva: f64,
    /// Per-unit reactance on own capacity base.
    pub reactance: f64,
    /// Internal emf, per unit; flat 1.0 pre-fault profile by default.
    pub emf: f64,
    /// No-load cost, pounds per hour online (generators).
    pub no_load_cost: f64,
    /// Marginal cost, pounds per MWh (generators).
    pub marginal_cost: f64,
    /// Annualized investment cost, pounds per MVA per year (SC candidates).
    pub invest_cost: f64,
    /// Dispatch limits in MW (generators).
    pub p_min: f64,
    pub p_max: f64,
    /// Commitment logic data; `None` marks a must-run flexible unit that is
    /// always online and carries no commitment integers.
    pub uc: Option<UcData>,
}

impl SyncUnit {
    pub fn is_sc(&self) -> bool {
        self.kind == SyncKind::ScCandidate
    }
}

/// Inverter kind: grid-following (wind/PV, fixed install) or a grid-forming
/// storage candidate whose capacity and location are planning decisions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IbrKind {
    Gfl,
    GfmCandidate,
}

/// Battery parameters attached to a grid-forming candidate. Rates are per MVA
/// of installed converter capacity; `duration_h` ties energy capacity to
/// power (MWh per MVA).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BessData {
    pub efficiency: f64,
    pub charge_rate: f64,
    pub discharge_rate: f64,
    pub soc_min: f64,
    pub soc_max: f64,
    pub duration_h: f64,
}

/// An inverter-based resource.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IbrUnit {
    pub id: usize,
    pub bus: usize,
    pub kind: IbrKind,
    /// Installed capacity for GFL units (MVA).
    pub capacity_mva: f64,
    /// Capacity bounds for GFM candidates (MVA).
    pub capacity_min_mva: f64,
    pub capacity_max_mva: f64,
    /// Temporary overloading factor (GFM), at least 1.
    pub overload_factor: f64,
    /// Small-signal reactance on own base (GFM only).
    pub reactance: f64,
    /// Reactive-current droop gain on the unit's own capacity base.
    pub droop_gain: f64,
    /// Converter investment cost, pounds per MVA per year (GFM).
    pub invest_cost: f64,
    /// Ratio of temporary-overload investment cost to converter cost (GFM).
    pub overload_cost_ratio: f64,
    pub bess: Option<BessData>,
}

impl IbrUnit {
    pub fn is_gfm(&self) -> bool {
        self.kind == IbrKind::GfmCandidate
    }
}

/// Per-bus stability limits and the monitored-bus list.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct StabilityLimits {
    /// Buses whose fault current is checked, with per-unit limits.
    pub scc: Vec<(usize, f64)>,
    /// Grid-strength limit (dimensionless).
    pub gscr: f64,
}

/// Static description of the grid under study.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PowerSystem {
    pub buses: Vec<Bus>,
    pub branches: Vec<Branch>,
    pub sync_units: Vec<SyncUnit>,
    pub ibr_units: Vec<IbrUnit>,
    /// System base power, MVA.
    pub s_base: f64,
    /// Maximum number of SCs that may be installed.
    pub max_sc_count: usize,
    /// Maximum number of GFM converters that may be installed.
    pub max_gfm_count: usize,
    pub limits: StabilityLimits,
}

impl PowerSystem {
    /// Validate structural invariants: dense unique bus ids, valid branch and
    /// unit references, positive reactances, ordered bounds.
    pub fn validate(&self) -> Result<()> {
        let n = self.buses.len();
        if n == 0 {
            return Err(Error::invalid("buses", "empty bus list"));
        }
        for (i, b) in self.buses.iter().enumerate() {
            if b.id != i {
                return Err(Error::invalid(
                    "buses",
                    format!("bus ids must be dense 0..N-1, found {} at position {i}", b.id),
                ));
            }
        }
        if self.s_base <= 0.0 {
            return Err(Error::invalid("s_base", "must be positive"));
        }
        for br in &self.branches {
            if br.from_bus >= n || br.to_bus >= n {
                return Err(Error::invalid(
                    "branches",
                    format!("branch {}-{} references an unknown bus", br.from_bus, br.to_bus),
                ));
            }
            if br.from_bus == br.to_bus {
                return Err(Error::invalid("branches", "self-loop branch"));
            }
            if br.reactance <= 0.0 {
                return Err(Error::invalid("branches", "reactance must be positive"));
            }
            if br.rating <= 0.0 {
                return Err(Error::invalid("branches", "rating must be positive"));
            }
        }
        for u in &self.sync_units {
            if u.bus >= n {
                return Err(Error::invalid(
                    "sync_units",
                    format!("unit {} references unknown bus {}", u.id, u.bus),
                ));
            }
            if u.reactance <= 0.0 {
                return Err(Error::invalid("sync_units", "reactance must be positive"));
            }
            if u.p_min > u.p_max {
                return Err(Error::invalid("sync_units", "p_min above p_max"));
            }
            if u.is_sc() && u.capacity_min_mva > u.capacity_max_mva {
                return Err(Error::invalid("sync_units", "capacity bounds reversed"));
            }
        }
        for u in &self.ibr_units {
            if u.bus >= n {
                return Err(Error::invalid(
                    "ibr_units",
                    format!("IBR {} references unknown bus {}", u.id, u.bus),
                ));
            }
            if u.overload_factor < 1.0 {
                return Err(Error::invalid("ibr_units", "overload factor below 1"));
            }
            if u.is_gfm() {
                if u.capacity_min_mva > u.capacity_max_mva {
                    return Err(Error::invalid("ibr_units", "capacity bounds reversed"));
                }
                if u.reactance <= 0.0 {
                    return Err(Error::invalid("ibr_units", "GFM reactance must be positive"));
                }
                if let Some(b) = &u.bess {
                    if !(b.efficiency > 0.0 && b.efficiency <= 1.0) {
                        return Err(Error::invalid("bess", "efficiency outside (0, 1]"));
                    }
                    if !(0.0 <= b.soc_min && b.soc_min < b.soc_max && b.soc_max <= 1.0) {
                        return Err(Error::invalid("bess", "SoC bounds outside [0, 1] or reversed"));
                    }
                }
            }
            if u.droop_gain < 0.0 {
                return Err(Error::invalid("ibr_units", "droop gain must be nonnegative"));
            }
        }
        for &(bus, lim) in &self.limits.scc {
            if bus >= n {
                return Err(Error::invalid("limits.scc", format!("unknown bus {bus}")));
            }
            if lim < 0.0 {
                return Err(Error::invalid("limits.scc", "negative limit"));
            }
        }
        Ok(())
    }

    pub fn generators(&self) -> impl Iterator<Item = &SyncUnit> {
        self.sync_units.iter().filter(|u| !u.is_sc())
    }

    pub fn sc_candidates(&self) -> impl Iterator<Item = &SyncUnit> {
        self.sync_units.iter().filter(|u| u.is_sc())
    }

    pub fn gfl_units(&self) -> impl Iterator<Item = &IbrUnit> {
        self.ibr_units.iter().filter(|u| !u.is_gfm())
    }

    pub fn gfm_units(&self) -> impl Iterator<Item = &IbrUnit> {
        self.ibr_units.iter().filter(|u| u.is_gfm())
    }

    /// Generators that carry commitment integers (the `x_g` decision set).
    pub fn uc_generators(&self) -> impl Iterator<Item = &SyncUnit> {
        self.generators().filter(|u| u.uc.is_some())
    }
}

/// One resolved operating/investment point: everything that shapes the
/// admittance matrices.
///
/// Vectors align with, respectively, `generators()`, `sc_candidates()` and
/// `gfm_units()` iteration order. SC and GFM capacities are in MVA;
/// `gfm_overload_mva` is the temporary overloading capacity backing fault
/// in-feed (bounded by the overload factor times the installed capacity).
#[derive(Debug, Clone, PartialEq)]
pub struct UnitState {
    pub committed: Vec<bool>,
    pub sc_mva: Vec<f64>,
    pub gfm_mva: Vec<f64>,
    pub gfm_overload_mva: Vec<f64>,
}

impl UnitState {
    /// All generators online, no SC or GFM investment.
    pub fn all_on(system: &PowerSystem) -> Self {
        UnitState {
            committed: system.generators().map(|_| true).collect(),
            sc_mva: system.sc_candidates().map(|_| 0.0).collect(),
            gfm_mva: system.gfm_units().map(|_| 0.0).collect(),
            gfm_overload_mva: system.gfm_units().map(|_| 0.0).collect(),
        }
    }

    fn check(&self, system: &PowerSystem) -> Result<()> {
        let n_g = system.generators().count();
        let n_s = system.sc_candidates().count();
        let n_m = system.gfm_units().count();
        if self.committed.len() != n_g {
            return Err(Error::Dimension {
                context: "UnitState.committed",
                expected: n_g,
                got: self.committed.len(),
            });
        }
        if self.sc_mva.len() != n_s {
            return Err(Error::Dimension {
                context: "UnitState.sc_mva",
                expected: n_s,
                got: self.sc_mva.len(),
            });
        }
        if self.gfm_mva.len() != n_m || self.gfm_overload_mva.len() != n_m {
            return Err(Error::Dimension {
                context: "UnitState.gfm_mva",
                expected: n_m,
                got: self.gfm_mva.len(),
            });
        }
        for v in self.sc_mva.iter().chain(&self.gfm_mva).chain(&self.gfm_overload_mva) {
            if *v < 0.0 {
                return Err(Error::invalid("UnitState", "negative capacity"));
            }
        }
        Ok(())
    }
}

/// Branch-only admittance matrix.
///
/// Diagonal entries sum `1/(jx)` over incident branches; off-diagonals hold
/// `-1/(jx)`. Fails on a disconnected branch graph, which would make every
/// later inversion singular.
pub fn build_base_admittance(system: &PowerSystem) -> Result<ComplexMatrix> {
    system.validate()?;
    let n = system.buses.len();
    // Connectivity check over the branch graph.
    let mut reach = vec![false; n];
    let mut stack = vec![0usize];
    reach[0] = true;
    while let Some(i) = stack.pop() {
        for br in &system.branches {
            let other = if br.from_bus == i {
                br.to_bus
            } else if br.to_bus == i {
                br.from_bus
            } else {
                continue;
            };
            if !reach[other] {
                reach[other] = true;
                stack.push(other);
            }
        }
    }
    if let Some(missing) = reach.iter().position(|r| !r) {
        return Err(Error::Disconnected(missing));
    }

    let mut y = ComplexMatrix::zeros(n);
    for br in &system.branches {
        // 1/(jx) = -j/x
        let series = Complex64::new(0.0, -1.0 / br.reactance);
        y[(br.from_bus, br.from_bus)] += series;
        y[(br.to_bus, br.to_bus)] += series;
        y[(br.from_bus, br.to_bus)] -= series;
        y[(br.to_bus, br.from_bus)] -= series;
    }
    Ok(y)
}

/// Which shunt sources enter the admittance increment.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AdmittanceMode {
    /// Fault calculation: synchronous machines and condensers only.
    Fault,
    /// Small-signal strength: grid-forming converters included as well.
    Strength,
}

/// Add unit shunts to a base admittance matrix.
///
/// Each committed generator adds `S_g/(j X_g S_base)` to its bus diagonal,
/// each installed SC adds `S_s/(j X_s S_base)`, and in strength mode each
/// installed GFM converter adds `S_cm/(j X_cm S_base)`. Off-diagonals are
/// untouched, so symmetry is preserved.
pub fn apply_unit_increments(
    y0: &ComplexMatrix,
    system: &PowerSystem,
    state: &UnitState,
    mode: AdmittanceMode,
) -> Result<ComplexMatrix> {
    state.check(system)?;
    if y0.dim() != system.buses.len() {
        return Err(Error::Dimension {
            context: "apply_unit_increments",
            expected: system.buses.len(),
            got: y0.dim(),
        });
    }
    let mut y = y0.clone();
    let tol = 1e-6;
    for (g, on) in system.generators().zip(&state.committed) {
        if *on {
            y[(g.bus, g.bus)] += shunt(g.capacity_mva, g.reactance, system.s_base);
        }
    }
    for (s, &mva) in system.sc_candidates().zip(&state.sc_mva) {
        if mva > 0.0 {
            if mva > s.capacity_max_mva * (1.0 + tol) {
                return Err(Error::invalid(
                    "sc_mva",
                    format!("capacity {mva} above bound {}", s.capacity_max_mva),
                ));
            }
            y[(s.bus, s.bus)] += shunt(mva, s.reactance, system.s_base);
        }
    }
    if mode == AdmittanceMode::Strength {
        for (m, &mva) in system.gfm_units().zip(&state.gfm_mva) {
            if mva > 0.0 {
                if mva > m.capacity_max_mva * (1.0 + tol) {
                    return Err(Error::invalid(
                        "gfm_mva",
                        format!("capacity {mva} above bound {}", m.capacity_max_mva),
                    ));
                }
                y[(m.bus, m.bus)] += shunt(mva, m.reactance, system.s_base);
            }
        }
    }
    Ok(y)
}

/// `S/(j X S_base)`, the Norton shunt of a voltage source behind a reactance.
fn shunt(capacity_mva: f64, reactance: f64, s_base: f64) -> Complex64 {
    Complex64::new(0.0, -capacity_mva / (reactance * s_base))
}

/// Invert an admittance matrix into an impedance matrix.
///
/// Fails with `NoSynchronousSource` when the matrix is singular or its
/// 1-norm condition estimate exceeds [`CONDITION_LIMIT`] — the signature of a
/// network with no committed synchronous shunt.
pub fn invert_to_impedance(y: &ComplexMatrix) -> Result<ComplexMatrix> {
    let (z, _cond) = y.inverse_with_cond(CONDITION_LIMIT)?;
    Ok(z)
}

/// Kron reduction: eliminate every bus not in `retained` by taking the Schur
/// complement `Y_rr - Y_re Y_ee^-1 Y_er`. Output dimension and row order
/// follow `retained`.
pub fn kron_reduce(y: &ComplexMatrix, retained: &[usize]) -> Result<ComplexMatrix> {
    let n = y.dim();
    for &r in retained {
        if r >= n {
            return Err(Error::invalid("retained", format!("bus {r} out of range")));
        }
    }
    let mut keep = vec![false; n];
    for &r in retained {
        if keep[r] {
            return Err(Error::invalid("retained", format!("bus {r} listed twice")));
        }
        keep[r] = true;
    }
    let eliminated: Vec<usize> = (0..n).filter(|i| !keep[*i]).collect();
    if eliminated.is_empty() {
        return Ok(y.principal_submatrix(retained));
    }

    let yee = y.principal_submatrix(&eliminated);
    let lu = yee.lu().map_err(|_| Error::Singular {
        context: "kron eliminated block",
    })?;
    let ne = eliminated.len();
    // Columns of Y_ee^-1 * Y_er, one retained bus at a time.
    let mut reduced = y.principal_submatrix(retained);
    let mut col = vec![Complex64::new(0.0, 0.0); ne];
    for (cj, &rj) in retained.iter().enumerate() {
        for (i, &e) in eliminated.iter().enumerate() {
            col[i] = y[(e, rj)];
        }
        lu.solve_in_place(&mut col);
        if col.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Singular {
                context: "kron eliminated block",
            });
        }
        for (ci, &ri) in retained.iter().enumerate() {
            let mut acc = Complex64::new(0.0, 0.0);
            for (k, &e) in eliminated.iter().enumerate() {
                acc += y[(ri, e)] * col[k];
            }
            reduced[(ci, cj)] -= acc;
        }
    }
    Ok(reduced)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::workbench::fixtures;
    use approx::assert_abs_diff_eq;

    #[test]
    fn two_bus_base_admittance() {
        let system = fixtures::two_bus();
        let y = build_base_admittance(&system).unwrap();
        assert_abs_diff_eq!(y[(0, 0)].im, -10.0, epsilon = 1e-12);
        assert_abs_diff_eq!(y[(0, 1)].im, 10.0, epsilon = 1e-12);
        assert_abs_diff_eq!(y[(1, 0)].im, 10.0, epsilon = 1e-12);
        assert_abs_diff_eq!(y[(1, 1)].im, -10.0, epsilon = 1e-12);
        assert_eq!(y.asymmetry(), 0.0);
    }

    #[test]
    fn empty_branch_list_is_disconnected() {
        let mut system = fixtures::two_bus();
        system.branches.clear();
        match build_base_admittance(&system) {
            Err(Error::Disconnected(_)) => {}
            other => panic!("expected disconnected error, got {other:?}"),
        }
    }

    #[test]
    fn sg_increment_hits_diagonal_only() {
        let system = fixtures::two_bus();
        let y0 = build_base_admittance(&system).unwrap();
        let state = UnitState::all_on(&system);
        let y = apply_unit_increments(&y0, &system, &state, AdmittanceMode::Fault).unwrap();
        // SG at bus 0: 100 MVA at X=0.2 on 100 MVA base -> -j5.
        assert_abs_diff_eq!(y[(0, 0)].im - y0[(0, 0)].im, -5.0, epsilon = 1e-12);
        assert_abs_diff_eq!(y[(0, 1)].im, y0[(0, 1)].im, epsilon = 1e-12);
        assert_abs_diff_eq!(y[(1, 1)].im, y0[(1, 1)].im, epsilon = 1e-12);
    }

    #[test]
    fn zero_state_is_identity_increment() {
        let system = fixtures::two_bus();
        let y0 = build_base_admittance(&system).unwrap();
        let mut state = UnitState::all_on(&system);
        state.committed.iter_mut().for_each(|c| *c = false);
        let y = apply_unit_increments(&y0, &system, &state, AdmittanceMode::Fault).unwrap();
        assert_eq!(y, y0);
    }

    #[test]
    fn negative_capacity_rejected() {
        let system = fixtures::five_bus();
        let y0 = build_base_admittance(&system).unwrap();
        let mut state = UnitState::all_on(&system);
        state.sc_mva[0] = -1.0;
        assert!(apply_unit_increments(&y0, &system, &state, AdmittanceMode::Fault).is_err());
    }

    #[test]
    fn uncommitted_network_has_no_impedance() {
        let system = fixtures::two_bus();
        let y0 = build_base_admittance(&system).unwrap();
        let mut state = UnitState::all_on(&system);
        state.committed.iter_mut().for_each(|c| *c = false);
        let y = apply_unit_increments(&y0, &system, &state, AdmittanceMode::Fault).unwrap();
        assert!(matches!(
            invert_to_impedance(&y),
            Err(Error::NoSynchronousSource { .. })
        ));
    }

    #[test]
    fn kron_retain_all_is_identity() {
        let system = fixtures::five_bus();
        let y0 = build_base_admittance(&system).unwrap();
        let all: Vec<usize> = (0..system.buses.len()).collect();
        let r = kron_reduce(&y0, &all).unwrap();
        assert_eq!(r, y0);
    }

    #[test]
    fn kron_three_bus_chain_matches_series_combination() {
        // 0 -x1- 1 -x2- 2 with a shunt at bus 1; retain the ends.
        let x1 = 0.1;
        let x2 = 0.25;
        let shunt1 = 4.0; // susceptance magnitude at bus 1
        let mut y = ComplexMatrix::zeros(3);
        let b1 = 1.0 / x1;
        let b2 = 1.0 / x2;
        y[(0, 0)] = Complex64::new(0.0, -b1);
        y[(0, 1)] = Complex64::new(0.0, b1);
        y[(1, 0)] = Complex64::new(0.0, b1);
        y[(1, 1)] = Complex64::new(0.0, -(b1 + b2 + shunt1));
        y[(1, 2)] = Complex64::new(0.0, b2);
        y[(2, 1)] = Complex64::new(0.0, b2);
        y[(2, 2)] = Complex64::new(0.0, -b2);
        let r = kron_reduce(&y, &[0, 2]).unwrap();
        // Hand Schur complement on the signed susceptance Laplacian.
        let denom = b1 + b2 + shunt1;
        let r00 = -b1 + b1 * b1 / denom;
        let r02 = b1 * b2 / denom;
        let r22 = -b2 + b2 * b2 / denom;
        assert_abs_diff_eq!(r[(0, 0)].im, r00, epsilon = 1e-12);
        assert_abs_diff_eq!(r[(0, 1)].im, r02, epsilon = 1e-12);
        assert_abs_diff_eq!(r[(1, 1)].im, r22, epsilon = 1e-12);
    }

    #[test]
    fn kron_singular_eliminated_block_rejected() {
        // Two isolated buses (no shunts) eliminated together: singular block.
        let mut y = ComplexMatrix::zeros(3);
        y[(0, 0)] = Complex64::new(0.0, -5.0);
        assert!(kron_reduce(&y, &[0]).is_err());
    }
}
