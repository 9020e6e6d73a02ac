//! Data-driven linear surrogates for the stability metrics.
//!
//! The exact fault-current and strength metrics are nonlinear in the
//! planning decisions, so the planner sees fitted linear stand-ins instead:
//!
//! ```text
//! metric_hat = sum k_g x_g + sum k_s S_s + sum k_cm S_cm + sum k_cl P_cl + k0
//! ```
//!
//! The fit is boundary aware rather than least squares: samples strictly
//! below the limit must be predicted below it, samples at least `nu` above
//! the limit must be predicted above it, and only the band in between enters
//! the squared-error objective. Misclassification can then only happen
//! inside the band, which keeps the surrogate conservative. `nu` is chosen
//! as the smallest grid value that keeps the fit feasible.
//!
//! [`active_sampling`] grows the training set with planner-in-the-loop
//! iterations: solve the planning problem under the current surrogate,
//! exactly evaluate every dispatched hour, add the misclassified points,
//! refit, and stop when nothing new is misclassified.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::RealMatrix;
use crate::solver::{solve_qp, QpProblem, SolveRequest, SolveStatus};

/// Which exact metric a sample or coefficient set belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricTag {
    Gscr,
    Scc { bus: usize },
}

impl std::fmt::Display for MetricTag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            MetricTag::Gscr => write!(f, "gscr"),
            MetricTag::Scc { bus } => write!(f, "scc_bus{bus}"),
        }
    }
}

/// Feature-vector dimensions, fixed by the system under study.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FeatureDims {
    pub n_gen: usize,
    pub n_sc: usize,
    pub n_gfm: usize,
    pub n_gfl: usize,
}

impl FeatureDims {
    pub fn flat_len(&self) -> usize {
        self.n_gen + self.n_sc + self.n_gfm + self.n_gfl
    }
}

/// One operating/investment point as seen by the surrogates. Grid-forming
/// capacity appears twice because the fault metric responds to the
/// overloading capacity while the strength metric sees the installed one.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatingPoint {
    /// Commitment state per generator (0/1).
    pub x_g: Vec<f64>,
    /// Installed SC capacity per candidate, MVA.
    pub s_s: Vec<f64>,
    /// Installed GFM capacity per candidate, MVA.
    pub s_cm: Vec<f64>,
    /// GFM temporary overloading capacity per candidate, MVA.
    pub s_cm_prime: Vec<f64>,
    /// Grid-following output per unit of the fleet, MW.
    pub p_cl: Vec<f64>,
}

impl OperatingPoint {
    /// Flat feature view for one metric.
    pub fn features(&self, tag: MetricTag) -> Vec<f64> {
        let gfm = match tag {
            MetricTag::Gscr => &self.s_cm,
            MetricTag::Scc { .. } => &self.s_cm_prime,
        };
        let mut out = Vec::with_capacity(self.x_g.len() + self.s_s.len() + gfm.len() + self.p_cl.len());
        out.extend_from_slice(&self.x_g);
        out.extend_from_slice(&self.s_s);
        out.extend_from_slice(gfm);
        out.extend_from_slice(&self.p_cl);
        out
    }

    pub fn dims(&self) -> FeatureDims {
        FeatureDims {
            n_gen: self.x_g.len(),
            n_sc: self.s_s.len(),
            n_gfm: self.s_cm.len(),
            n_gfl: self.p_cl.len(),
        }
    }
}

/// One training sample: flat features plus the exactly evaluated metric.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleRecord {
    pub features: Vec<f64>,
    pub label: f64,
    pub tag: MetricTag,
}

/// Fitted coefficient set for one metric. Coefficients are in natural units
/// (per MVA / per MW); the capacity scaling used for conditioning inside the
/// fit is folded back in before storing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearCoefficients {
    pub tag: MetricTag,
    pub k_g: Vec<f64>,
    pub k_s: Vec<f64>,
    pub k_cm: Vec<f64>,
    pub k_cl: Vec<f64>,
    pub k_0: f64,
    pub limit: f64,
    pub nu: f64,
}

impl LinearCoefficients {
    /// Redundant initialization: zero slopes with the intercept at the limit,
    /// which satisfies the constraint everywhere.
    pub fn redundant(tag: MetricTag, dims: FeatureDims, limit: f64) -> Self {
        LinearCoefficients {
            tag,
            k_g: vec![0.0; dims.n_gen],
            k_s: vec![0.0; dims.n_sc],
            k_cm: vec![0.0; dims.n_gfm],
            k_cl: vec![0.0; dims.n_gfl],
            k_0: limit,
            limit,
            nu: 0.0,
        }
    }

    pub fn dims(&self) -> FeatureDims {
        FeatureDims {
            n_gen: self.k_g.len(),
            n_sc: self.k_s.len(),
            n_gfm: self.k_cm.len(),
            n_gfl: self.k_cl.len(),
        }
    }

    fn flat(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.dims().flat_len());
        out.extend_from_slice(&self.k_g);
        out.extend_from_slice(&self.k_s);
        out.extend_from_slice(&self.k_cm);
        out.extend_from_slice(&self.k_cl);
        out
    }
}

/// Surrogate value at a flat feature vector.
pub fn evaluate_linear(k: &LinearCoefficients, features: &[f64]) -> Result<f64> {
    let flat = k.flat();
    if features.len() != flat.len() {
        return Err(Error::Dimension {
            context: "evaluate_linear",
            expected: flat.len(),
            got: features.len(),
        });
    }
    Ok(flat.iter().zip(features).map(|(a, b)| a * b).sum::<f64>() + k.k_0)
}

/// Three-way split of a sample set around the limit and the band width `nu`.
#[derive(Debug, Clone, Default)]
pub struct Partition {
    pub omega1: Vec<SampleRecord>,
    pub omega2: Vec<SampleRecord>,
    pub omega3: Vec<SampleRecord>,
}

impl Partition {
    pub fn total(&self) -> usize {
        self.omega1.len() + self.omega2.len() + self.omega3.len()
    }
}

/// Split samples: below the limit, in the band `[limit, limit + nu)`, and at
/// or above `limit + nu`. Boundaries are inclusive on the right-hand sets.
pub fn partition_samples(samples: &[SampleRecord], limit: f64, nu: f64) -> Partition {
    let mut p = Partition::default();
    for s in samples {
        if s.label < limit {
            p.omega1.push(s.clone());
        } else if s.label < limit + nu {
            p.omega2.push(s.clone());
        } else {
            p.omega3.push(s.clone());
        }
    }
    p
}

/// Capacity/power features are fed to the QP in GW to keep it well
/// conditioned; binaries stay as they are.
fn feature_scales(dims: FeatureDims) -> Vec<f64> {
    let mut scales = vec![1.0; dims.flat_len()];
    for s in scales.iter_mut().skip(dims.n_gen) {
        *s = 1e-3;
    }
    scales
}

/// Boundary-aware constrained least squares.
///
/// Minimizes the squared error over the band samples subject to every
/// below-limit sample predicting below the limit (strictness realized as a
/// `1e-6`-relative offset) and every above-band sample predicting at or
/// above it. A tiny ridge pins the minimum-norm solution when the band is
/// empty or degenerate, which makes refits deterministic.
pub fn fit_coefficients(
    tag: MetricTag,
    dims: FeatureDims,
    partition: &Partition,
    limit: f64,
    nu: f64,
) -> Result<LinearCoefficients> {
    let nf = dims.flat_len() + 1; // slopes + intercept
    let scales = feature_scales(dims);
    let scaled = |s: &SampleRecord| -> Vec<f64> {
        let mut row: Vec<f64> = s
            .features
            .iter()
            .zip(&scales)
            .map(|(f, sc)| f * sc)
            .collect();
        row.push(1.0);
        row
    };

    let ridge = 1e-10;
    let mut q = RealMatrix::zeros(nf, nf);
    let mut c = vec![0.0; nf];
    for i in 0..nf {
        q[(i, i)] = 2.0 * ridge;
    }
    for s in &partition.omega2 {
        let row = scaled(s);
        for i in 0..nf {
            c[i] -= 2.0 * s.label * row[i];
            for j in 0..nf {
                q[(i, j)] += 2.0 * row[i] * row[j];
            }
        }
    }

    let delta = 1e-6 * limit.abs().max(1e-9);
    let mut ineq = Vec::new();
    for s in &partition.omega1 {
        ineq.push((scaled(s), limit - delta));
    }
    for s in &partition.omega3 {
        let row: Vec<f64> = scaled(s).iter().map(|v| -v).collect();
        ineq.push((row, -limit));
    }

    let qp = QpProblem {
        q,
        c,
        ineq,
        eq: Vec::new(),
    };
    let res = solve_qp(&qp, &SolveRequest::default())?;
    match res.status {
        SolveStatus::Optimal => {}
        SolveStatus::Infeasible => return Err(Error::FitInfeasible { nu }),
        other => return Err(Error::Solver(format!("fit QP ended as {other:?}"))),
    }

    // Fold the GW scaling back into natural units.
    let mut k = res.x;
    let k_0 = k.pop().expect("intercept present");
    for (ki, sc) in k.iter_mut().zip(&scales) {
        *ki *= sc;
    }
    let (g, rest) = k.split_at(dims.n_gen);
    let (s, rest) = rest.split_at(dims.n_sc);
    let (cm, cl) = rest.split_at(dims.n_gfm);
    Ok(LinearCoefficients {
        tag,
        k_g: g.to_vec(),
        k_s: s.to_vec(),
        k_cm: cm.to_vec(),
        k_cl: cl.to_vec(),
        k_0,
        limit,
        nu,
    })
}

/// Squared error of a coefficient set over the band samples.
pub fn band_objective(k: &LinearCoefficients, partition: &Partition) -> f64 {
    partition
        .omega2
        .iter()
        .map(|s| {
            let pred = evaluate_linear(k, &s.features).unwrap_or(f64::NAN);
            (s.label - pred) * (s.label - pred)
        })
        .sum()
}

/// Default nu grid: 21 geometric points between `1e-3` and `0.5` times the
/// limit.
pub fn default_nu_grid(limit: f64) -> Vec<f64> {
    let lo = 1e-3 * limit.abs().max(1e-9);
    let hi = 0.5 * limit.abs().max(1e-9);
    let n = 21;
    (0..n)
        .map(|i| lo * (hi / lo).powf(i as f64 / (n - 1) as f64))
        .collect()
}

/// Smallest grid value for which the boundary-aware fit is feasible,
/// together with the fit itself.
pub fn choose_nu(
    tag: MetricTag,
    dims: FeatureDims,
    samples: &[SampleRecord],
    limit: f64,
    nu_grid: &[f64],
) -> Result<(f64, LinearCoefficients)> {
    for w in nu_grid.windows(2) {
        if w[1] < w[0] {
            return Err(Error::invalid("nu_grid", "must be ascending"));
        }
    }
    for &nu in nu_grid {
        let part = partition_samples(samples, limit, nu);
        match fit_coefficients(tag, dims, &part, limit, nu) {
            Ok(k) => return Ok((nu, k)),
            Err(Error::FitInfeasible { .. }) => continue,
            Err(e) => return Err(e),
        }
    }
    Err(Error::NuGridExhausted {
        tried: nu_grid.len(),
        limit,
    })
}

/// Count samples whose predicted side of the limit disagrees with the true
/// side. A value exactly on the limit counts as satisfied on both sides.
pub fn misclassification_count(
    k: &LinearCoefficients,
    samples: &[SampleRecord],
    limit: f64,
) -> usize {
    samples
        .iter()
        .filter(|s| {
            let pred = evaluate_linear(k, &s.features).unwrap_or(f64::NAN);
            (pred >= limit) != (s.label >= limit)
        })
        .count()
}

/// Requirements of one metric inside the sampling loop.
#[derive(Debug, Clone)]
pub struct MetricSpec {
    pub tag: MetricTag,
    pub limit: f64,
    pub nu_grid: Vec<f64>,
}

/// Per-iteration, per-metric log row of the sampling loop.
#[derive(Debug, Clone)]
pub struct IterationRow {
    pub iteration: usize,
    pub tag: MetricTag,
    pub omega_size: usize,
    pub delta_size: usize,
    pub misclassified: usize,
    /// Band objective of the fit produced at the end of this iteration
    /// (`NaN` before the first fit exists).
    pub objective: f64,
}

/// Outcome of the sampling loop.
#[derive(Debug, Clone)]
pub struct SamplingOutcome {
    pub coefficients: Vec<LinearCoefficients>,
    pub log: Vec<IterationRow>,
    pub iterations: usize,
}

/// Planner-in-the-loop sample growth.
///
/// Iteration zero solves the planning problem under redundant surrogates
/// (zero slopes, intercept at the limit) and seeds the training set with
/// every dispatched hour. Each later iteration re-solves the planner with
/// the freshly fitted surrogates, exactly evaluates each hour, adds only the
/// points that violate the side constraints of the fit, and refits. The loop
/// stops when no point is added or the iteration budget is spent.
///
/// `solve_planner` maps the current coefficient sets to the dispatched
/// operating points of the whole horizon; `evaluate_exact` computes one
/// metric at one point, returning `None` when the metric is undefined there
/// (strength in an hour with no grid-following output).
pub fn active_sampling<P, E>(
    metrics: &[MetricSpec],
    dims: FeatureDims,
    m_max: usize,
    mut solve_planner: P,
    mut evaluate_exact: E,
) -> Result<SamplingOutcome>
where
    P: FnMut(&[LinearCoefficients]) -> Result<Vec<OperatingPoint>>,
    E: FnMut(MetricTag, &OperatingPoint) -> Result<Option<f64>>,
{
    if m_max == 0 {
        return Err(Error::invalid("m_max", "must be at least 1"));
    }
    let mut coeffs: Vec<LinearCoefficients> = metrics
        .iter()
        .map(|m| LinearCoefficients::redundant(m.tag, dims, m.limit))
        .collect();
    let mut omegas: Vec<Vec<SampleRecord>> = vec![Vec::new(); metrics.len()];
    let mut seen: Vec<std::collections::HashSet<Vec<u64>>> =
        vec![std::collections::HashSet::new(); metrics.len()];
    let mut log = Vec::new();
    let mut iterations = 0usize;

    for m in 0..=m_max {
        iterations = m;
        let points = solve_planner(&coeffs)?;
        let mut any_added = false;

        let mut fits: Vec<Option<LinearCoefficients>> = vec![None; metrics.len()];
        for (mi, spec) in metrics.iter().enumerate() {
            let mut delta = 0usize;
            let mut n_mc = 0usize;
            for pt in &points {
                let features = pt.features(spec.tag);
                let Some(label) = evaluate_exact(spec.tag, pt)? else {
                    continue;
                };
                let pred = evaluate_linear(&coeffs[mi], &features)?;
                if (pred >= spec.limit) != (label >= spec.limit) {
                    n_mc += 1;
                }
                let add = if m == 0 {
                    true
                } else {
                    let unsafe_miss = label < spec.limit && pred >= spec.limit;
                    let safe_miss = label >= spec.limit + coeffs[mi].nu && pred < spec.limit;
                    unsafe_miss || safe_miss
                };
                if add {
                    let key: Vec<u64> = features
                        .iter()
                        .chain(std::iter::once(&label))
                        .map(|v| v.to_bits())
                        .collect();
                    if seen[mi].insert(key) {
                        omegas[mi].push(SampleRecord {
                            features,
                            label,
                            tag: spec.tag,
                        });
                        delta += 1;
                    }
                }
            }
            if delta > 0 {
                any_added = true;
            }
            let objective = if m == 0 {
                f64::NAN
            } else {
                let part = partition_samples(&omegas[mi], spec.limit, coeffs[mi].nu);
                band_objective(&coeffs[mi], &part)
            };
            log.push(IterationRow {
                iteration: m,
                tag: spec.tag,
                omega_size: omegas[mi].len(),
                delta_size: delta,
                misclassified: n_mc,
                objective,
            });
            if delta > 0 || m == 0 {
                let (_nu, k) =
                    choose_nu(spec.tag, dims, &omegas[mi], spec.limit, &spec.nu_grid)?;
                fits[mi] = Some(k);
            }
        }

        if m > 0 && !any_added {
            break;
        }
        for (mi, fit) in fits.into_iter().enumerate() {
            if let Some(k) = fit {
                coeffs[mi] = k;
            }
        }
    }

    Ok(SamplingOutcome {
        coefficients: coeffs,
        log,
        iterations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn sample(f: Vec<f64>, label: f64) -> SampleRecord {
        SampleRecord {
            features: f,
            label,
            tag: MetricTag::Gscr,
        }
    }

    fn dims1() -> FeatureDims {
        FeatureDims {
            n_gen: 1,
            n_sc: 0,
            n_gfm: 0,
            n_gfl: 0,
        }
    }

    #[test]
    fn partition_thresholds_exact() {
        let samples = vec![
            sample(vec![0.0], 2.4),
            sample(vec![0.0], 2.6),
            sample(vec![0.0], 2.9),
        ];
        let p = partition_samples(&samples, 2.5, 0.3);
        assert_eq!(p.omega1.len(), 1);
        assert_eq!(p.omega2.len(), 1);
        assert_eq!(p.omega3.len(), 1);
        assert_abs_diff_eq!(p.omega1[0].label, 2.4);
        assert_abs_diff_eq!(p.omega2[0].label, 2.6);
        assert_abs_diff_eq!(p.omega3[0].label, 2.9);
    }

    #[test]
    fn zero_nu_empties_band() {
        let samples = vec![sample(vec![0.0], 2.5), sample(vec![0.0], 2.6)];
        let p = partition_samples(&samples, 2.5, 0.0);
        assert!(p.omega2.is_empty());
        assert_eq!(p.omega3.len(), 2);
    }

    #[test]
    fn boundary_label_goes_to_band() {
        let samples = vec![sample(vec![0.0], 2.5)];
        let p = partition_samples(&samples, 2.5, 0.3);
        assert_eq!(p.omega2.len(), 1);
    }

    #[test]
    fn separable_pair_classified_correctly() {
        let below = sample(vec![0.0], 1.0);
        let above = sample(vec![1.0], 4.0);
        let p = partition_samples(&[below.clone(), above.clone()], 2.0, 0.1);
        let k = fit_coefficients(MetricTag::Gscr, dims1(), &p, 2.0, 0.1).unwrap();
        assert!(evaluate_linear(&k, &below.features).unwrap() < 2.0);
        assert!(evaluate_linear(&k, &above.features).unwrap() >= 2.0);
    }

    #[test]
    fn degenerate_all_above_pins_intercept_at_limit() {
        let samples = vec![
            sample(vec![0.0], 3.5),
            sample(vec![0.0], 3.8),
            sample(vec![0.0], 4.1),
        ];
        let p = partition_samples(&samples, 2.0, 0.5);
        assert_eq!(p.omega3.len(), 3);
        let k = fit_coefficients(MetricTag::Gscr, dims1(), &p, 2.0, 0.5).unwrap();
        assert_abs_diff_eq!(k.k_0, 2.0, epsilon = 1e-6);
        assert_abs_diff_eq!(k.k_g[0], 0.0, epsilon = 1e-6);
    }

    #[test]
    fn evaluate_linear_edges() {
        let k = LinearCoefficients {
            tag: MetricTag::Gscr,
            k_g: vec![1.5],
            k_s: vec![0.25],
            k_cm: vec![],
            k_cl: vec![-0.5],
            k_0: 2.0,
            limit: 2.5,
            nu: 0.1,
        };
        assert_abs_diff_eq!(evaluate_linear(&k, &[0.0, 0.0, 0.0]).unwrap(), 2.0);
        assert_abs_diff_eq!(evaluate_linear(&k, &[1.0, 1.0, 1.0]).unwrap(), 3.25);
        assert!(evaluate_linear(&k, &[1.0]).is_err());
    }

    #[test]
    fn choose_nu_prefers_smallest() {
        let samples = vec![sample(vec![0.0], 1.0), sample(vec![1.0], 4.0)];
        let grid = vec![0.05, 0.2, 0.8];
        let (nu, _) = choose_nu(MetricTag::Gscr, dims1(), &samples, 2.0, &grid).unwrap();
        assert_abs_diff_eq!(nu, 0.05);
    }

    #[test]
    fn choose_nu_on_empty_set_uses_first() {
        let grid = vec![0.01, 0.1];
        let (nu, k) = choose_nu(MetricTag::Gscr, dims1(), &[], 2.0, &grid).unwrap();
        assert_abs_diff_eq!(nu, 0.01);
        // Vacuous constraints: minimum-norm zero slopes.
        assert_abs_diff_eq!(k.k_g[0], 0.0, epsilon = 1e-9);
    }

    #[test]
    fn overlap_needs_wider_band() {
        // Same feature value on both sides of the limit at nu=0; a band of
        // 0.5 moves the upper point into omega2, restoring feasibility.
        let samples = vec![sample(vec![1.0], 1.9), sample(vec![1.0], 2.3)];
        let grid = vec![0.0, 0.5];
        let (nu, _) = choose_nu(MetricTag::Gscr, dims1(), &samples, 2.0, &grid).unwrap();
        assert_abs_diff_eq!(nu, 0.5);
    }

    #[test]
    fn misclassification_counting() {
        let k = LinearCoefficients {
            tag: MetricTag::Gscr,
            k_g: vec![0.0],
            k_s: vec![],
            k_cm: vec![],
            k_cl: vec![],
            k_0: 2.0,
            limit: 2.0,
            nu: 0.0,
        };
        // Everything predicted exactly at the limit counts as satisfied.
        let samples = vec![
            sample(vec![0.0], 1.5), // predicted ok, actually low -> miss
            sample(vec![0.0], 2.5), // predicted ok, actually ok
            sample(vec![0.0], 2.0), // boundary on both sides -> ok
        ];
        assert_eq!(misclassification_count(&k, &samples, 2.0), 1);
        let perfect = LinearCoefficients {
            k_g: vec![0.0],
            k_0: 0.0,
            ..k.clone()
        };
        // Predicts 0 < limit for everything: misses the two satisfied ones.
        assert_eq!(misclassification_count(&perfect, &samples, 2.0), 2);
    }

    #[test]
    fn fit_determinism() {
        let samples = vec![
            sample(vec![0.0], 1.2),
            sample(vec![1.0], 2.2),
            sample(vec![1.0], 2.05),
            sample(vec![1.0], 3.4),
        ];
        let grid = default_nu_grid(2.0);
        let (nu1, k1) = choose_nu(MetricTag::Gscr, dims1(), &samples, 2.0, &grid).unwrap();
        let (nu2, k2) = choose_nu(MetricTag::Gscr, dims1(), &samples, 2.0, &grid).unwrap();
        assert_eq!(nu1, nu2);
        assert_eq!(k1, k2);
    }
}
