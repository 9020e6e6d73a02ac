//! Grid-strength metric: minimum eigenvalue of the capacity-weighted,
//! Kron-reduced admittance matrix (gSCR).
//!
//! For small signals every synchronous machine, condenser and grid-forming
//! converter is a voltage source behind a reactance, so they all enter the
//! strength-mode admittance matrix. Passive buses are eliminated by Kron
//! reduction down to the grid-following terminals; each retained row is
//! weighted by `V^2 / P` of its converter. The minimum eigenvalue of that
//! product is the strength index: adding synchronous or grid-forming
//! capacity raises it, adding grid-following output lowers it.

use crate::error::{Error, Result};
use crate::matrix::{symmetric_eigenvalues, ComplexMatrix, RealMatrix};
use crate::network::{
    apply_unit_increments, build_base_admittance, kron_reduce, AdmittanceMode, PowerSystem,
    UnitState,
};

/// One strength evaluation point: the strength-mode admittance matrix plus
/// converter loadings at the retained grid-following terminals.
#[derive(Debug, Clone)]
pub struct StrengthPoint {
    /// Strength-mode admittance matrix (grid-forming converters included).
    pub admittance: ComplexMatrix,
    /// Retained grid-following terminal buses.
    pub gfl_buses: Vec<usize>,
    /// Output powers at those terminals, per unit on the system base. Must be
    /// strictly positive: zero-output converters are excluded up front.
    pub gfl_powers: Vec<f64>,
    /// Terminal voltage magnitudes, per unit.
    pub gfl_voltages: Vec<f64>,
}

impl StrengthPoint {
    pub fn new(
        admittance: ComplexMatrix,
        gfl_buses: Vec<usize>,
        gfl_powers: Vec<f64>,
        gfl_voltages: Vec<f64>,
    ) -> Result<Self> {
        if gfl_buses.len() != gfl_powers.len() || gfl_buses.len() != gfl_voltages.len() {
            return Err(Error::Dimension {
                context: "StrengthPoint",
                expected: gfl_buses.len(),
                got: gfl_powers.len().max(gfl_voltages.len()),
            });
        }
        for &p in &gfl_powers {
            if p <= 0.0 {
                return Err(Error::invalid("gfl_powers", "power must be positive"));
            }
        }
        for &v in &gfl_voltages {
            if !(v > 0.8 && v < 1.2) {
                return Err(Error::invalid("gfl_voltages", format!("{v} outside (0.8, 1.2)")));
            }
        }
        Ok(StrengthPoint {
            admittance,
            gfl_buses,
            gfl_powers,
            gfl_voltages,
        })
    }
}

/// Weighted, reduced admittance matrix `diag(V^2/P) * B_red`.
///
/// The reduction is taken on the susceptance magnitude of the lossless
/// matrix, so the result is real with the Laplacian-plus-shunts sign that
/// keeps the spectrum nonnegative.
pub fn build_equivalent_admittance(point: &StrengthPoint) -> Result<RealMatrix> {
    let reduced = kron_reduce(&point.admittance, &point.gfl_buses)?;
    let n = reduced.dim();
    let mut out = RealMatrix::zeros(n, n);
    for i in 0..n {
        let w = point.gfl_voltages[i] * point.gfl_voltages[i] / point.gfl_powers[i];
        for j in 0..n {
            // Lossless entries are purely imaginary; -imag flips the
            // Laplacian to positive semidefinite orientation.
            out[(i, j)] = w * (-reduced[(i, j)].im);
        }
    }
    Ok(out)
}

/// Smallest eigenvalue of a matrix of the form `D * S` with `D` diagonal
/// positive and `S` symmetric.
///
/// The product itself is not symmetric, but it is similar to
/// `D^{1/2} S D^{1/2}`: the diagonal scaling is recovered from the asymmetry
/// pattern (`d_i m_ij = d_j m_ji` up to a free factor per connected
/// component, which cancels in the spectrum) and the eigenvalue is computed
/// on the symmetrized matrix.
pub fn min_eigenvalue(m: &RealMatrix) -> Result<f64> {
    if !m.is_square() {
        return Err(Error::Dimension {
            context: "min_eigenvalue",
            expected: m.rows(),
            got: m.cols(),
        });
    }
    let n = m.rows();
    if n == 0 {
        return Err(Error::invalid("min_eigenvalue", "empty matrix"));
    }
    for i in 0..n {
        for j in 0..n {
            if !m[(i, j)].is_finite() {
                return Err(Error::invalid("min_eigenvalue", "non-finite entry"));
            }
        }
    }

    // Recover the symmetrizing weights w_i (= 1/d_i up to scale) from
    // w_i m_ij = w_j m_ji across the nonzero pattern.
    let scale = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .map(|(i, j)| m[(i, j)].abs())
        .fold(0.0f64, f64::max);
    let zero_tol = scale * 1e-12;
    let mut w = vec![0.0f64; n];
    for root in 0..n {
        if w[root] != 0.0 {
            continue;
        }
        w[root] = 1.0;
        let mut stack = vec![root];
        while let Some(i) = stack.pop() {
            for j in 0..n {
                if i == j || w[j] != 0.0 {
                    continue;
                }
                let a = m[(i, j)];
                let b = m[(j, i)];
                if a.abs() <= zero_tol && b.abs() <= zero_tol {
                    continue;
                }
                if a.abs() <= zero_tol || b.abs() <= zero_tol || a * b < 0.0 {
                    return Err(Error::invalid(
                        "min_eigenvalue",
                        "matrix is not a positively scaled symmetric matrix",
                    ));
                }
                // w_j = w_i * m_ij / m_ji
                w[j] = w[i] * a / b;
                if w[j] <= 0.0 || !w[j].is_finite() {
                    return Err(Error::invalid(
                        "min_eigenvalue",
                        "recovered scaling is not positive",
                    ));
                }
                stack.push(j);
            }
        }
    }

    let mut sym = RealMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            // w_i^{1/2} m_ij w_j^{-1/2}, similar to m.
            sym[(i, j)] = (w[i] / w[j]).sqrt() * m[(i, j)];
        }
    }
    // Symmetrize away the last roundoff before the eigenvalue sweep.
    for i in 0..n {
        for j in (i + 1)..n {
            let avg = 0.5 * (sym[(i, j)] + sym[(j, i)]);
            sym[(i, j)] = avg;
            sym[(j, i)] = avg;
        }
    }
    let eigs = symmetric_eigenvalues(&sym)?;
    Ok(eigs[0])
}

/// Grid strength at one operating/investment point.
///
/// Assembles the strength-mode admittance (grid-forming converters
/// included), reduces it to the grid-following terminals with positive
/// output, applies the `V^2/P` weighting and returns the minimum eigenvalue.
/// `gfl_powers` aligns with the system's grid-following units (per unit on
/// the system base); entries at or below zero drop that terminal from the
/// reduction. Errors when every terminal is passive.
pub fn gscr(
    system: &PowerSystem,
    state: &UnitState,
    gfl_powers: &[f64],
) -> Result<f64> {
    let gfl: Vec<_> = system.gfl_units().collect();
    if gfl_powers.len() != gfl.len() {
        return Err(Error::Dimension {
            context: "gscr gfl_powers",
            expected: gfl.len(),
            got: gfl_powers.len(),
        });
    }
    let mut buses = Vec::new();
    let mut powers = Vec::new();
    for (u, &p) in gfl.iter().zip(gfl_powers) {
        if p > 0.0 {
            buses.push(u.bus);
            powers.push(p);
        }
    }
    if buses.is_empty() {
        return Err(Error::invalid(
            "gfl_powers",
            "no grid-following unit with positive output",
        ));
    }
    let y0 = build_base_admittance(system)?;
    let y = apply_unit_increments(&y0, system, state, AdmittanceMode::Strength)?;
    let voltages = vec![1.0; buses.len()];
    let point = StrengthPoint::new(y, buses, powers, voltages)?;
    let yeq = build_equivalent_admittance(&point)?;
    min_eigenvalue(&yeq)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::workbench::fixtures;
    use approx::assert_abs_diff_eq;

    #[test]
    fn single_gfl_scalar_weighting() {
        // 1x1 reduced susceptance b=5 with V=1, P=0.5 -> 10.
        let mut y = ComplexMatrix::zeros(1);
        y[(0, 0)] = num_complex::Complex64::new(0.0, -5.0);
        let point = StrengthPoint::new(y, vec![0], vec![0.5], vec![1.0]).unwrap();
        let yeq = build_equivalent_admittance(&point).unwrap();
        assert_abs_diff_eq!(yeq[(0, 0)], 10.0, epsilon = 1e-12);
        assert_abs_diff_eq!(min_eigenvalue(&yeq).unwrap(), 10.0, epsilon = 1e-12);
    }

    #[test]
    fn doubling_power_halves_rows() {
        let system = fixtures::five_bus();
        let state = UnitState::all_on(&system);
        let n_gfl = system.gfl_units().count();
        let p1 = vec![0.8; n_gfl];
        let p2 = vec![1.6; n_gfl];
        let g1 = gscr(&system, &state, &p1).unwrap();
        let g2 = gscr(&system, &state, &p2).unwrap();
        assert_abs_diff_eq!(g2, g1 / 2.0, epsilon = 1e-9 * g1.abs());
    }

    #[test]
    fn identity_and_diagonal_minimums() {
        let id = RealMatrix::identity(3);
        assert_abs_diff_eq!(min_eigenvalue(&id).unwrap(), 1.0, epsilon = 1e-12);
        let mut d = RealMatrix::zeros(2, 2);
        d[(0, 0)] = 2.0;
        d[(1, 1)] = 5.0;
        assert_abs_diff_eq!(min_eigenvalue(&d).unwrap(), 2.0, epsilon = 1e-12);
    }

    #[test]
    fn scaled_product_matches_symmetric_spectrum() {
        // D*S with known spectrum: S = [[2,1],[1,2]], D = diag(1, 4).
        // D^{1/2} S D^{1/2} = [[2,2],[2,8]]; eigs 5 -+ sqrt(13).
        let mut m = RealMatrix::zeros(2, 2);
        m[(0, 0)] = 2.0;
        m[(0, 1)] = 1.0;
        m[(1, 0)] = 4.0;
        m[(1, 1)] = 8.0;
        let want = 5.0 - 13.0f64.sqrt();
        assert_abs_diff_eq!(min_eigenvalue(&m).unwrap(), want, epsilon = 1e-10);
    }

    #[test]
    fn more_synchronous_capacity_never_hurts() {
        let system = fixtures::five_bus();
        let n_gfl = system.gfl_units().count();
        let powers = vec![0.9; n_gfl];
        let mut state = UnitState::all_on(&system);
        let base = gscr(&system, &state, &powers).unwrap();
        state.sc_mva = state.sc_mva.iter().map(|_| 80.0).collect();
        let with_sc = gscr(&system, &state, &powers).unwrap();
        assert!(with_sc >= base - 1e-10);
    }

    #[test]
    fn zero_gfm_state_equals_gfm_free_system() {
        let mut system = fixtures::five_bus();
        let n_gfl = system.gfl_units().count();
        let powers = vec![0.7; n_gfl];
        let state = UnitState::all_on(&system);
        let a = gscr(&system, &state, &powers).unwrap();
        system.ibr_units.retain(|u| !u.is_gfm());
        let state2 = UnitState::all_on(&system);
        let b = gscr(&system, &state2, &powers).unwrap();
        assert_abs_diff_eq!(a, b, epsilon = 1e-12);
    }

    #[test]
    fn non_finite_entries_rejected() {
        let mut m = RealMatrix::identity(2);
        m[(0, 1)] = f64::NAN;
        assert!(min_eigenvalue(&m).is_err());
    }
}
