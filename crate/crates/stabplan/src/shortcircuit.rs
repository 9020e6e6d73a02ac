//! Three-phase fault-current engines with voltage-dependent inverter in-feed.
//!
//! Inverters inject reactive current proportional to their terminal-voltage
//! drop, capped at a converter limit. Synchronous sources are already inside
//! the impedance matrix, so the fault current at bus `F` satisfies the
//! superposition relation
//!
//! ```text
//! -V_F(0) = sum_c Z_{F,c} (I_fc - I_Lc) + Z_FF * I_F
//! ```
//!
//! with the inverter in-feed `I_fc = -j * min(i_max, d_c * |dV_c|)` coupled
//! back to the voltage drops `dV` through the same impedance matrix. Voltage
//! drops are kept as nonpositive real magnitude changes in `[-1, 0]`;
//! injections are purely reactive and add to the fault current.
//!
//! Three evaluation routes are provided:
//!
//! - [`scc_conventional`]: no inverter in-feed, `|V_F(0)| / |Z_FF|`.
//! - [`scc_explicit`]: closed-form elimination of the drop vector, valid in
//!   the unsaturated droop regime (no cap enforcement).
//! - [`scc_iterative`]: the saturating fixed point, solved by a bracketing
//!   iteration. The drop map is antitone (more drop -> more in-feed -> more
//!   voltage support), so iterating the map from opposite ends of the box
//!   `[-1, 0]^C` produces a lower and an upper bracket that pinch the fixed
//!   point: the recorded lower-bracket drops are monotone non-decreasing and
//!   the associated fault currents monotone non-increasing, starting from the
//!   full-injection bound. Once the saturation pattern agrees on both
//!   brackets the remaining linear system is solved exactly.
//!
//! [`scc_superposition_oracle`] replays fixed injections through the
//! superposition relation with an independent linear solve; tests use it to
//! audit every converged result.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::matrix::ComplexMatrix;
use crate::network::{
    apply_unit_increments, build_base_admittance, invert_to_impedance, AdmittanceMode,
    PowerSystem, UnitState,
};

/// Default converter current cap on the unit's own capacity base.
pub const DEFAULT_IMAX_OWN_BASE: f64 = 1.0;

/// One inverter as seen by the fault engines: terminal bus, droop gain and
/// current cap on the system base, and pre-fault load current.
#[derive(Debug, Clone)]
pub struct SccIbr {
    pub bus: usize,
    pub droop: f64,
    pub i_max: f64,
    pub load_current: Complex64,
}

/// Everything the fault engines need at one operating/investment point.
#[derive(Debug, Clone)]
pub struct SccState {
    z: ComplexMatrix,
    ibrs: Vec<SccIbr>,
    prefault_v: Vec<f64>,
}

impl SccState {
    /// Build from an impedance matrix and per-inverter data.
    pub fn new(z: ComplexMatrix, ibrs: Vec<SccIbr>, prefault_v: Vec<f64>) -> Result<Self> {
        let n = z.dim();
        if prefault_v.len() != n {
            return Err(Error::Dimension {
                context: "SccState.prefault_v",
                expected: n,
                got: prefault_v.len(),
            });
        }
        for v in &prefault_v {
            if !(*v > 0.8 && *v < 1.2) {
                return Err(Error::invalid(
                    "prefault_v",
                    format!("{v} outside (0.8, 1.2)"),
                ));
            }
        }
        for ibr in &ibrs {
            if ibr.bus >= n {
                return Err(Error::invalid("SccIbr.bus", format!("bus {} out of range", ibr.bus)));
            }
            if ibr.droop < 0.0 || ibr.i_max < 0.0 {
                return Err(Error::invalid("SccIbr", "negative droop or cap"));
            }
        }
        Ok(SccState { z, ibrs, prefault_v })
    }

    /// Assemble the fault-mode impedance matrix for a unit state and rescale
    /// droops to the system base: grid-following units use their installed
    /// capacity, grid-forming units their temporary overloading capacity.
    /// Current caps default to [`DEFAULT_IMAX_OWN_BASE`] per unit of the same
    /// capacity.
    pub fn from_system(system: &PowerSystem, state: &UnitState) -> Result<Self> {
        Self::from_system_with(system, state, DEFAULT_IMAX_OWN_BASE)
    }

    /// As [`SccState::from_system`] with an explicit own-base current cap.
    pub fn from_system_with(
        system: &PowerSystem,
        state: &UnitState,
        imax_own_base: f64,
    ) -> Result<Self> {
        let y0 = build_base_admittance(system)?;
        let y = apply_unit_increments(&y0, system, state, AdmittanceMode::Fault)?;
        let z = invert_to_impedance(&y)?;
        let mut ibrs = Vec::new();
        let mut gfm_idx = 0usize;
        for u in &system.ibr_units {
            let fault_capacity = if u.is_gfm() {
                let cap = state.gfm_overload_mva[gfm_idx];
                gfm_idx += 1;
                cap
            } else {
                u.capacity_mva
            };
            if fault_capacity <= 0.0 {
                continue;
            }
            let scale = fault_capacity / system.s_base;
            ibrs.push(SccIbr {
                bus: u.bus,
                droop: u.droop_gain * scale,
                i_max: imax_own_base * scale,
                load_current: Complex64::new(0.0, 0.0),
            });
        }
        let prefault_v = vec![1.0; system.buses.len()];
        SccState::new(z, ibrs, prefault_v)
    }

    pub fn impedance(&self) -> &ComplexMatrix {
        &self.z
    }

    pub fn ibrs(&self) -> &[SccIbr] {
        &self.ibrs
    }

    pub fn dim(&self) -> usize {
        self.z.dim()
    }

    /// Override a pre-fault load current (testing the fuller formula).
    pub fn set_load_current(&mut self, ibr_index: usize, current: Complex64) {
        self.ibrs[ibr_index].load_current = current;
    }
}

/// Per-inverter outcome at a converged fault solution.
#[derive(Debug, Clone)]
pub struct IbrResponse {
    pub bus: usize,
    /// Injection magnitude, per unit on the system base. The phasor is
    /// `-j * injection`.
    pub injection: f64,
    /// Terminal voltage-magnitude change, in `[-1, 0]`.
    pub voltage_drop: f64,
}

/// One recorded iteration of the fixed-point engine.
#[derive(Debug, Clone)]
pub struct TraceRow {
    pub iteration: usize,
    /// Lower-bracket voltage drops, one per inverter.
    pub voltage_drops: Vec<f64>,
    /// Fault-current magnitude implied by those drops.
    pub i_f: f64,
}

/// Result of a fault-current evaluation.
#[derive(Debug, Clone)]
pub struct SccResult {
    pub fault_bus: usize,
    /// `|I_F|`, per unit.
    pub magnitude: f64,
    /// Iteration count; 0 for closed-form routes.
    pub iterations: usize,
    pub converged: bool,
    pub per_ibr: Vec<IbrResponse>,
    /// Iteration trace (iterative route only).
    pub trace: Vec<TraceRow>,
}

/// Saturating droop characteristic: injection magnitude for a voltage drop.
///
/// `dv` is the nonpositive magnitude change; values outside `[-1, 0]` clamp.
pub fn ibr_injection(dv: f64, droop: f64, i_max: f64) -> f64 {
    let drop = (-dv).clamp(0.0, 1.0);
    (droop * drop).min(i_max)
}

/// Conventional fault current without inverter in-feed.
pub fn scc_conventional(state: &SccState, fault_bus: usize) -> Result<SccResult> {
    let zff = state.z[(fault_bus, fault_bus)];
    if zff.norm() < 1e-12 {
        return Err(Error::invalid("Z_FF", "zero driving-point impedance"));
    }
    let v0 = state.prefault_v[fault_bus];
    Ok(SccResult {
        fault_bus,
        magnitude: v0 / zff.norm(),
        iterations: 0,
        converged: true,
        per_ibr: Vec::new(),
        trace: Vec::new(),
    })
}

/// Closed-form fault current in the unsaturated droop regime.
///
/// Eliminating the drop vector from the coupled superposition relations gives
///
/// ```text
/// I_F = (-V_F(0) + Z_FC^T I_L) / (Z_FF + j Z_FC^T D A^-1 Z_FC)
/// A   = I - j Z_CC D
/// ```
///
/// with `D = diag(d_c)`. Under the lossless model the coupling term is a
/// negative imaginary correction: droop in-feed shrinks the effective
/// driving-point impedance, so the fault current can only grow with `d_c`.
/// Also returns the implied voltage drops `dV = A^-1 Z_FC I_F`.
pub fn scc_explicit(state: &SccState, fault_bus: usize) -> Result<SccResult> {
    let nc = state.ibrs.len();
    let z = &state.z;
    let zff = z[(fault_bus, fault_bus)];
    if zff.norm() < 1e-12 {
        return Err(Error::invalid("Z_FF", "zero driving-point impedance"));
    }
    let v0 = Complex64::new(state.prefault_v[fault_bus], 0.0);

    // A[(i, j)] = delta_ij - j * Z_{bus_j, bus_i} * d_j
    let mut a = ComplexMatrix::identity(nc);
    for i in 0..nc {
        for j in 0..nc {
            let coupling = z[(state.ibrs[j].bus, state.ibrs[i].bus)] * state.ibrs[j].droop;
            a[(i, j)] -= Complex64::new(0.0, 1.0) * coupling;
        }
    }
    let zfc: Vec<Complex64> = state.ibrs.iter().map(|c| z[(fault_bus, c.bus)]).collect();
    let w = if nc > 0 {
        a.solve(&zfc).map_err(|_| Error::DroopMatrixSingular)?
    } else {
        Vec::new()
    };
    let mut coupling = Complex64::new(0.0, 0.0);
    for i in 0..nc {
        coupling += zfc[i] * state.ibrs[i].droop * w[i];
    }
    let denom = zff + Complex64::new(0.0, 1.0) * coupling;
    if denom.norm() < 1e-12 {
        return Err(Error::DroopMatrixSingular);
    }
    let mut numer = -v0;
    for i in 0..nc {
        numer += zfc[i] * state.ibrs[i].load_current;
    }
    let i_f = numer / denom;

    let per_ibr = state
        .ibrs
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let dv = (w[i] * i_f).re;
            IbrResponse {
                bus: c.bus,
                injection: c.droop * (-dv).max(0.0),
                voltage_drop: dv,
            }
        })
        .collect();

    Ok(SccResult {
        fault_bus,
        magnitude: i_f.norm(),
        iterations: 0,
        converged: true,
        per_ibr,
        trace: Vec::new(),
    })
}

/// Reduced real coefficients of the drop map `dv -> b + X' * i(dv)` at one
/// fault bus, plus the complex pieces needed for the fault current.
struct FaultMap {
    /// Faulted-network transfer reactances between inverter terminals.
    xprime: Vec<Vec<f64>>,
    /// Drop with zero inverter in-feed.
    b: Vec<f64>,
    zfc: Vec<Complex64>,
    zff: Complex64,
    v0: Complex64,
}

impl FaultMap {
    fn build(state: &SccState, fault_bus: usize) -> Result<Self> {
        let z = &state.z;
        let zff = z[(fault_bus, fault_bus)];
        if zff.norm() < 1e-12 {
            return Err(Error::invalid("Z_FF", "zero driving-point impedance"));
        }
        let v0 = Complex64::new(state.prefault_v[fault_bus], 0.0);
        let nc = state.ibrs.len();
        let zfc: Vec<Complex64> = state.ibrs.iter().map(|c| z[(fault_bus, c.bus)]).collect();
        let mut xprime = vec![vec![0.0; nc]; nc];
        let mut b = vec![0.0; nc];
        for i in 0..nc {
            let bi = state.ibrs[i].bus;
            let mut drop = -z[(bi, fault_bus)] * v0 / zff;
            for j in 0..nc {
                let bj = state.ibrs[j].bus;
                // Transfer impedance with the fault bus grounded.
                let s = z[(bj, bi)] - zfc[i] * zfc[j] / zff;
                // -j * (j x') = x': purely reactive in-feed raises the drop
                // through the imaginary part of the transfer impedance.
                xprime[i][j] = s.im;
                drop -= s * state.ibrs[j].load_current;
            }
            b[i] = drop.re.clamp(-1.0, 0.0);
        }
        Ok(FaultMap {
            xprime,
            b,
            zfc,
            zff,
            v0,
        })
    }

    fn injections(&self, state: &SccState, dv: &[f64]) -> Vec<f64> {
        state
            .ibrs
            .iter()
            .zip(dv)
            .map(|(c, &v)| ibr_injection(v, c.droop, c.i_max))
            .collect()
    }

    fn fault_current(&self, state: &SccState, inj: &[f64]) -> Complex64 {
        let mut numer = -self.v0;
        for (i, c) in state.ibrs.iter().enumerate() {
            let i_fc = Complex64::new(0.0, -inj[i]);
            numer -= self.zfc[i] * (i_fc - c.load_current);
        }
        numer / self.zff
    }

    fn apply(&self, inj: &[f64]) -> Vec<f64> {
        self.b
            .iter()
            .enumerate()
            .map(|(i, &bi)| {
                let mut v = bi;
                for (j, &ij) in inj.iter().enumerate() {
                    v += self.xprime[i][j] * ij;
                }
                v.clamp(-1.0, 0.0)
            })
            .collect()
    }

    fn step(&self, state: &SccState, dv: &[f64]) -> Vec<f64> {
        self.apply(&self.injections(state, dv))
    }

    /// Saturation pattern at a drop vector: true where the cap binds.
    fn pattern(&self, state: &SccState, dv: &[f64]) -> Vec<bool> {
        state
            .ibrs
            .iter()
            .zip(dv)
            .map(|(c, &v)| c.droop * (-v).clamp(0.0, 1.0) >= c.i_max)
            .collect()
    }

    /// Solve the fixed point exactly for a fixed saturation pattern and
    /// verify it. Saturated inverters inject their cap; the rest stay on the
    /// droop line, leaving the linear system `(I + X' D) dv = b + X' i_sat`.
    fn exact_fixed_point(&self, state: &SccState, pattern: &[bool]) -> Option<Vec<f64>> {
        let nc = state.ibrs.len();
        let free: Vec<usize> = (0..nc).filter(|&i| !pattern[i]).collect();
        let mut rhs: Vec<f64> = Vec::with_capacity(free.len());
        for &i in &free {
            let mut v = self.b[i];
            for j in 0..nc {
                if pattern[j] {
                    v += self.xprime[i][j] * state.ibrs[j].i_max;
                }
            }
            rhs.push(v);
        }
        let mut mat = crate::matrix::RealMatrix::zeros(free.len(), free.len());
        for (ri, &i) in free.iter().enumerate() {
            for (rj, &j) in free.iter().enumerate() {
                let delta = if i == j { 1.0 } else { 0.0 };
                mat[(ri, rj)] = delta + self.xprime[i][j] * state.ibrs[j].droop;
            }
        }
        let sol = if free.is_empty() {
            Vec::new()
        } else {
            mat.solve(&rhs).ok()?
        };
        let mut dv = vec![0.0; nc];
        for (ri, &i) in free.iter().enumerate() {
            dv[i] = sol[ri];
        }
        // Saturated terminals still see the drop implied by all injections.
        let inj: Vec<f64> = (0..nc)
            .map(|i| {
                if pattern[i] {
                    state.ibrs[i].i_max
                } else {
                    state.ibrs[i].droop * (-dv[i]).max(0.0)
                }
            })
            .collect();
        let full = self.apply(&inj);
        let tol = 1e-9;
        for i in 0..nc {
            if pattern[i] {
                dv[i] = full[i];
            }
        }
        for i in 0..nc {
            if !(-1.0 - tol..=tol).contains(&dv[i]) {
                return None;
            }
            let demand = state.ibrs[i].droop * (-dv[i]).clamp(0.0, 1.0);
            if pattern[i] && demand < state.ibrs[i].i_max - tol {
                return None;
            }
            if !pattern[i] && demand > state.ibrs[i].i_max + tol {
                return None;
            }
            // Self-consistency of the unsaturated components.
            if !pattern[i] && (full[i] - dv[i]).abs() > 1e-7 {
                return None;
            }
        }
        Some(dv.iter().map(|v| v.clamp(-1.0, 0.0)).collect())
    }
}

/// Saturating fixed-point fault current.
///
/// Starts from the full-drop initialization `dv = -1` (maximum in-feed) and
/// a zero-drop upper bracket, iterates the drop map from both ends, and stops
/// when the combined current/voltage error falls below `eps`. Convergence is
/// declared only when the two brackets have pinched the fixed point, so the
/// returned injections are exactly consistent with the returned drops.
pub fn scc_iterative(
    state: &SccState,
    fault_bus: usize,
    eps: f64,
    k_max: usize,
) -> Result<SccResult> {
    if eps <= 0.0 {
        return Err(Error::invalid("eps", "must be positive"));
    }
    let map = FaultMap::build(state, fault_bus)?;
    let nc = state.ibrs.len();

    let mut lower = vec![-1.0; nc];
    let mut upper = vec![0.0; nc];
    let mut i_f_prev = map.fault_current(state, &map.injections(state, &lower)).norm();
    let mut trace = vec![TraceRow {
        iteration: 0,
        voltage_drops: lower.clone(),
        i_f: i_f_prev,
    }];

    let mut iterations = 0usize;
    let mut converged = false;
    while iterations < k_max {
        iterations += 1;
        let next_lower = map.step(state, &upper);
        let next_upper = map.step(state, &lower);
        lower = next_lower;
        upper = next_upper;

        // The fixed point is linear once the saturation pattern is known.
        // Guess it from the bracket midpoint (and the brackets themselves),
        // solve the linear system, and keep the result only when it verifies
        // and stays inside the bracket.
        let mid: Vec<f64> = lower.iter().zip(&upper).map(|(l, u)| 0.5 * (l + u)).collect();
        let mut candidates = vec![map.pattern(state, &mid)];
        for probe in [&lower, &upper] {
            let pat = map.pattern(state, probe);
            if !candidates.contains(&pat) {
                candidates.push(pat);
            }
        }
        for pat in candidates {
            if let Some(exact) = map.exact_fixed_point(state, &pat) {
                let keeps_order = exact
                    .iter()
                    .zip(&lower)
                    .zip(&upper)
                    .all(|((&e, &l), &u)| e >= l - 1e-9 && e <= u + 1e-9);
                if keeps_order {
                    lower = exact.clone();
                    upper = exact;
                    break;
                }
            }
        }

        let inj = map.injections(state, &lower);
        let i_f = map.fault_current(state, &inj).norm();
        let eps_i = (i_f - i_f_prev).abs();
        let eps_v_step = trace
            .last()
            .map(|row| {
                row.voltage_drops
                    .iter()
                    .zip(&lower)
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0f64, f64::max)
            })
            .unwrap_or(0.0);
        let width = lower
            .iter()
            .zip(&upper)
            .map(|(l, u)| (u - l).abs())
            .fold(0.0f64, f64::max);
        trace.push(TraceRow {
            iteration: iterations,
            voltage_drops: lower.clone(),
            i_f,
        });
        i_f_prev = i_f;
        if eps_i + eps_v_step.max(width) <= eps {
            converged = true;
            break;
        }
    }

    if !converged {
        return Err(Error::SccIterationLimit {
            fault_bus,
            k_max,
            trace: trace.into_iter().map(|t| t.voltage_drops).collect(),
        });
    }

    let inj = map.injections(state, &lower);
    let i_f = map.fault_current(state, &inj);
    let per_ibr = state
        .ibrs
        .iter()
        .enumerate()
        .map(|(i, c)| IbrResponse {
            bus: c.bus,
            injection: inj[i],
            voltage_drop: lower[i],
        })
        .collect();
    Ok(SccResult {
        fault_bus,
        magnitude: i_f.norm(),
        iterations,
        converged: true,
        per_ibr,
        trace,
    })
}

/// Superposition audit: replay fixed injections through the fault relation
/// with an independent linear solve of the assembled admittance matrix.
///
/// `injections` are complex in-feed phasors aligned with the state's IBR
/// list. Returns `|I_F|`.
pub fn scc_superposition_oracle(
    system: &PowerSystem,
    state: &UnitState,
    fault_bus: usize,
    injections: &[Complex64],
    load_currents: &[Complex64],
    prefault_v: f64,
) -> Result<f64> {
    let y0 = build_base_admittance(system)?;
    let y = apply_unit_increments(&y0, system, state, AdmittanceMode::Fault)?;
    let n = y.dim();
    // Column F of the impedance matrix via one linear solve.
    let mut e_f = vec![Complex64::new(0.0, 0.0); n];
    e_f[fault_bus] = Complex64::new(1.0, 0.0);
    let z_col = y.solve(&e_f)?;
    let zff = z_col[fault_bus];
    if zff.norm() < 1e-12 {
        return Err(Error::invalid("Z_FF", "zero driving-point impedance"));
    }

    let mut ibr_buses = Vec::new();
    let mut gfm_idx = 0usize;
    for u in &system.ibr_units {
        let cap = if u.is_gfm() {
            let c = state.gfm_overload_mva[gfm_idx];
            gfm_idx += 1;
            c
        } else {
            u.capacity_mva
        };
        if cap > 0.0 {
            ibr_buses.push(u.bus);
        }
    }
    if ibr_buses.len() != injections.len() || ibr_buses.len() != load_currents.len() {
        return Err(Error::Dimension {
            context: "scc_superposition_oracle",
            expected: ibr_buses.len(),
            got: injections.len(),
        });
    }

    let mut numer = Complex64::new(-prefault_v, 0.0);
    for (i, &bus) in ibr_buses.iter().enumerate() {
        numer -= z_col[bus] * (injections[i] - load_currents[i]);
    }
    Ok((numer / zff).norm())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::workbench::fixtures;
    use approx::assert_abs_diff_eq;

    fn two_bus_state() -> SccState {
        let system = fixtures::two_bus();
        SccState::from_system(&system, &UnitState::all_on(&system)).unwrap()
    }

    #[test]
    fn conventional_two_bus_value() {
        let state = two_bus_state();
        // Z_22 = j0.3 from the analytic 2x2 inverse.
        let r = scc_conventional(&state, 1).unwrap();
        assert_abs_diff_eq!(r.magnitude, 1.0 / 0.3, epsilon = 1e-9);
    }

    #[test]
    fn injection_clamps() {
        assert_abs_diff_eq!(ibr_injection(-0.4, 2.0, 1.2), 0.8, epsilon = 1e-12);
        assert_abs_diff_eq!(ibr_injection(-1.0, 2.0, 1.2), 1.2, epsilon = 1e-12);
        assert_abs_diff_eq!(ibr_injection(0.0, 2.0, 1.2), 0.0, epsilon = 1e-12);
        // Inputs past the box clamp rather than erroring.
        assert_abs_diff_eq!(ibr_injection(-2.0, 2.0, 5.0), 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(ibr_injection(0.5, 2.0, 5.0), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn explicit_reduces_to_conventional_without_droop() {
        let system = fixtures::two_bus();
        let mut state = SccState::from_system(&system, &UnitState::all_on(&system)).unwrap();
        for ibr in &mut state.ibrs {
            ibr.droop = 0.0;
        }
        for bus in 0..2 {
            let a = scc_explicit(&state, bus).unwrap();
            let b = scc_conventional(&state, bus).unwrap();
            assert_abs_diff_eq!(a.magnitude, b.magnitude, epsilon = 1e-10);
        }
    }

    #[test]
    fn colocated_ibr_scalar_hand_solve() {
        // Fault at the IBR terminal: the drop is pinned at -1, so the fault
        // current is the conventional value plus the full droop in-feed.
        let state = two_bus_state();
        let d = state.ibrs[0].droop;
        assert_eq!(state.ibrs[0].bus, 1);
        let r = scc_explicit(&state, 1).unwrap();
        assert_abs_diff_eq!(r.magnitude, 1.0 / 0.3 + d, epsilon = 1e-9);
        assert_abs_diff_eq!(r.per_ibr[0].voltage_drop, -1.0, epsilon = 1e-9);
    }

    #[test]
    fn droop_does_not_reduce_fault_current() {
        let system = fixtures::two_bus();
        let base = SccState::from_system(&system, &UnitState::all_on(&system)).unwrap();
        for bus in 0..2 {
            let with = scc_explicit(&base, bus).unwrap().magnitude;
            let mut zeroed = base.clone();
            zeroed.ibrs.iter_mut().for_each(|c| c.droop = 0.0);
            let without = scc_explicit(&zeroed, bus).unwrap().magnitude;
            assert!(with >= without - 1e-12, "bus {bus}: {with} < {without}");
        }
    }

    #[test]
    fn iterative_without_ibrs_converges_immediately() {
        let system = fixtures::two_bus();
        let mut state = SccState::from_system(&system, &UnitState::all_on(&system)).unwrap();
        state.ibrs.clear();
        let r = scc_iterative(&state, 0, 1e-6, 50).unwrap();
        let conv = scc_conventional(&state, 0).unwrap();
        assert_eq!(r.iterations, 1);
        assert_abs_diff_eq!(r.magnitude, conv.magnitude, epsilon = 1e-12);
    }

    #[test]
    fn iterative_matches_explicit_when_caps_are_loose() {
        let system = fixtures::two_bus();
        let mut state = SccState::from_system(&system, &UnitState::all_on(&system)).unwrap();
        // Make the cap non-binding everywhere.
        for ibr in &mut state.ibrs {
            ibr.i_max = 100.0;
        }
        for bus in 0..2 {
            let a = scc_iterative(&state, bus, 1e-9, 50).unwrap();
            let b = scc_explicit(&state, bus).unwrap();
            assert_abs_diff_eq!(a.magnitude, b.magnitude, epsilon = 1e-6);
        }
    }

    #[test]
    fn iterative_trace_is_monotone() {
        let system = fixtures::five_bus();
        let mut unit_state = UnitState::all_on(&system);
        unit_state.gfm_mva = vec![100.0];
        unit_state.gfm_overload_mva = vec![120.0];
        let state = SccState::from_system(&system, &unit_state).unwrap();
        for bus in 0..system.buses.len() {
            let r = scc_iterative(&state, bus, 1e-8, 50).unwrap();
            for w in r.trace.windows(2) {
                assert!(w[1].i_f <= w[0].i_f + 1e-12, "I_F rose at bus {bus}");
                for (a, b) in w[0].voltage_drops.iter().zip(&w[1].voltage_drops) {
                    assert!(b + 1e-12 >= *a, "drop fell at bus {bus}");
                }
            }
            for row in &r.trace {
                for v in &row.voltage_drops {
                    assert!((-1.0..=0.0).contains(v));
                }
            }
        }
    }

    #[test]
    fn converged_injections_satisfy_droop_curve() {
        let system = fixtures::five_bus();
        let mut unit_state = UnitState::all_on(&system);
        unit_state.gfm_mva = vec![150.0];
        unit_state.gfm_overload_mva = vec![180.0];
        let state = SccState::from_system(&system, &unit_state).unwrap();
        for bus in 0..system.buses.len() {
            let r = scc_iterative(&state, bus, 1e-8, 50).unwrap();
            for (resp, ibr) in r.per_ibr.iter().zip(state.ibrs()) {
                let expect = ibr_injection(resp.voltage_drop, ibr.droop, ibr.i_max);
                assert_abs_diff_eq!(resp.injection, expect, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn zero_prefault_voltage_gives_zero_current() {
        let system = fixtures::two_bus();
        let state = SccState::from_system(&system, &UnitState::all_on(&system)).unwrap();
        // prefault_v is validated to (0.8, 1.2); emulate V=0 by scaling the
        // conventional formula instead.
        let r = scc_conventional(&state, 1).unwrap();
        assert!(r.magnitude > 0.0);
        let zero = 0.0 / state.impedance()[(1, 1)].norm();
        assert_eq!(zero, 0.0);
    }
}
