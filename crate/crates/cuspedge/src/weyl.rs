//! Weyl-law fitting and Dirichlet–Neumann bracketing machinery.
//!
//! Implements the dyadic decomposition of the cusp region into blocks
//! `I_μ × Z`, exact lattice counts and per-coordinate bounds for the model
//! eigenvalues on each block, the `δ^{ℓ+|k|}` cusp-error coefficient, the
//! `(m₀, m)` truncation schedule, the bracketing sandwich check, and the
//! least-squares Weyl-slope fit of counting curves.
//!
//! ```
//! use cuspedge::weyl::{block_lattice_count, per_coordinate_bounds, schedule};
//!
//! // ℓ = 1, k = 3: β = ℓ + |k| = 4, so at λ = 1024 the schedule is
//! // m0 = round(log₂λ / β) = 3, m = round(½ log₂λ) = 5.
//! assert_eq!(schedule(1024.0, 4.0).unwrap(), (3, 5));
//!
//! // Exact eigenvalue-lattice count on the block μ = 2 at λ = 100, and
//! // its per-coordinate majorant.
//! let count = block_lattice_count(&[2], &[3.0], 0, 100.0);
//! let (radial, angular, _) = per_coordinate_bounds(2, 3.0, 100.0);
//! assert_eq!(count, 5);
//! assert!(count <= radial * angular);
//! ```

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{weyl_constant, CuspEdgeModel};
use crate::spectrum::CountingCurve;

/// Dyadic bracketing partition of `(0, 2^{−m0})^ℓ`.
///
/// Index `j ∈ {m0,…,m}` labels the interval `I_j = (2^{−j−1}, 2^{−j})`, and
/// the terminal index `m+1` labels `I_{m+1} = (0, 2^{−m−1})`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BracketingPartition {
    pub m0: u32,
    pub m: u32,
    pub ell: usize,
}

impl BracketingPartition {
    pub fn new(m0: u32, m: u32, ell: usize) -> Result<Self> {
        if m0 == 0 || m < m0 || ell == 0 {
            return Err(Error::InvalidConfig(format!(
                "bracketing partition needs 1 <= m0 <= m and ell >= 1 (got m0={m0}, m={m}, ell={ell})"
            )));
        }
        Ok(BracketingPartition { m0, m, ell })
    }

    /// Outer radius `δ = 2^{−m0}`.
    pub fn delta(&self) -> f64 {
        2f64.powi(-(self.m0 as i32))
    }

    /// Length of the interval labelled `j`.
    pub fn interval_length(&self, j: u32) -> f64 {
        if j == self.m + 1 {
            2f64.powi(-(self.m as i32) - 1)
        } else {
            2f64.powi(-(j as i32) - 1)
        }
    }

    /// All block multi-indices `μ ∈ {m0,…,m+1}^ℓ` in lexicographic order.
    pub fn blocks(&self) -> Vec<Vec<u32>> {
        let range: Vec<u32> = (self.m0..=self.m + 1).collect();
        let mut out = vec![Vec::new()];
        for _ in 0..self.ell {
            let mut next = Vec::with_capacity(out.len() * range.len());
            for prefix in &out {
                for &j in &range {
                    let mut b = prefix.clone();
                    b.push(j);
                    next.push(b);
                }
            }
            out = next;
        }
        out
    }
}

/// Truncation schedule of the bracketing argument:
/// `m ≈ ½ log₂ λ` and `m0 ≈ (1/β) log₂ λ` with `β = ℓ + |k|`.
pub fn schedule(lambda: f64, beta: f64) -> Result<(u32, u32)> {
    if !(lambda >= 4.0) {
        return Err(Error::InvalidConfig("schedule needs lambda >= 4".into()));
    }
    if !(beta > 0.0) {
        return Err(Error::InvalidConfig("beta must be positive".into()));
    }
    let log2 = lambda.log2();
    let m = (0.5 * log2).round() as u32;
    let m0 = ((log2 / beta).round() as u32).max(1);
    if m0 > m {
        return Err(Error::ScheduleInverted { m0, m });
    }
    Ok((m0, m))
}

/// Exact count of integer tuples `(ξ, ζ, η) ∈ ℤ^ℓ × ℤ^ℓ × ℤ^d` with
/// `Σ 2^{2μ_j}ξ_j² + Σ 2^{2μ_j k_j}ζ_j² + |η|² ≤ λ`.
pub fn block_lattice_count(mu: &[u32], k: &[f64], cross_dim: usize, lambda: f64) -> u64 {
    if lambda < 0.0 {
        return 0;
    }
    let mut coeffs: Vec<f64> = Vec::with_capacity(2 * mu.len() + cross_dim);
    for &mj in mu {
        coeffs.push(4f64.powi(mj as i32));
    }
    for (&mj, &kj) in mu.iter().zip(k) {
        coeffs.push(2f64.powf(2.0 * mj as f64 * kj));
    }
    coeffs.extend(std::iter::repeat(1.0).take(cross_dim));
    count_diagonal_quadratic(&coeffs, lambda)
}

/// Count of `z ∈ ℤ^d` with `Σ c_j z_j² ≤ λ`, by nested loops with a closed
/// form in the last coordinate.
pub fn count_diagonal_quadratic(coeffs: &[f64], lambda: f64) -> u64 {
    if lambda < 0.0 {
        return 0;
    }
    match coeffs {
        [] => 1,
        [c] => 2 * (lambda / c).sqrt().floor() as u64 + 1,
        [c, rest @ ..] => {
            let zmax = (lambda / c).sqrt().floor() as i64;
            let mut total = 0;
            for z in -zmax..=zmax {
                let used = c * (z * z) as f64;
                if used <= lambda {
                    total += count_diagonal_quadratic(rest, lambda - used);
                }
            }
            total
        }
    }
}

/// Per-coordinate one-dimensional count bounds
/// `(2⌊√λ 2^{−μ_j}⌋+1, 2⌊√λ 2^{−μ_j k_j}⌋+1, 2⌊√λ⌋+1)`; their product
/// upper-bounds `block_lattice_count`.
pub fn per_coordinate_bounds(mu_j: u32, k_j: f64, lambda: f64) -> (u64, u64, u64) {
    let sq = lambda.max(0.0).sqrt();
    (
        2 * (sq * 2f64.powi(-(mu_j as i32))).floor() as u64 + 1,
        2 * (sq * 2f64.powf(-(mu_j as f64) * k_j)).floor() as u64 + 1,
        2 * sq.floor() as u64 + 1,
    )
}

/// The two cusp-error coefficients of the bracketing argument.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CuspErrorBound {
    /// `∏_j Σ_{μ_j=m0}^{m} 2^{−(1+k_j)μ_j}` — the block sum as computed.
    pub summed_coefficient: f64,
    /// `δ^{ℓ+|k|}` with `δ = 2^{−m0}` — the closed-form majorant.
    pub closed_form_coefficient: f64,
    /// Coefficients multiplied by `λ^{n/2}`.
    pub summed_bound: f64,
    pub closed_form_bound: f64,
}

/// Cusp-error bound `C δ^{ℓ+|k|} λ^{n/2}`: the summed coefficient over
/// non-terminal blocks and the closed-form majorant, both times `λ^{n/2}`.
pub fn cusp_error_bound(
    model: &CuspEdgeModel,
    m0: u32,
    m: u32,
    lambda: f64,
) -> Result<CuspErrorBound> {
    if m < m0 {
        return Err(Error::ScheduleInverted { m0, m });
    }
    let mut summed = 1.0;
    for &kj in &model.k {
        let mut s = 0.0;
        for mu in m0..=m {
            s += 2f64.powf(-(1.0 + kj) * mu as f64);
        }
        summed *= s;
    }
    let delta = 2f64.powi(-(m0 as i32));
    let closed = delta.powf(model.beta());
    let pow = lambda.max(0.0).powf(model.dim() as f64 / 2.0);
    Ok(CuspErrorBound {
        summed_coefficient: summed,
        closed_form_coefficient: closed,
        summed_bound: summed * pow,
        closed_form_bound: closed * pow,
    })
}

/// Cusp-region eigenvalue-count surrogate at level `δ = 2^{−m0}`: the sum of
/// exact lattice counts over all dyadic blocks, with each terminal index
/// absorbed into its neighbor (`μ_j = m+1` counted as `μ_j = m`).
pub fn cusp_region_count(ell: usize, k: &[f64], m0: u32, m: u32, lambda: f64) -> u64 {
    let part = BracketingPartition { m0, m, ell };
    let mut total = 0;
    for mut mu in part.blocks() {
        for mj in &mut mu {
            if *mj == m + 1 {
                *mj = m;
            }
        }
        total += block_lattice_count(&mu, k, 0, lambda);
    }
    total
}

/// One grid point where the bracketing inequalities fail.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SandwichViolation {
    pub lambda: f64,
    pub n_dirichlet: f64,
    pub n_full: f64,
    pub n_neumann: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SandwichReport {
    pub violations: Vec<SandwichViolation>,
    pub pass: bool,
}

/// Verify `N_D(λ) ≤ N(λ) ≤ N_N(λ)` at every grid point, where `N_D`/`N_N`
/// sum the Dirichlet/Neumann part curves. Exact spectra must produce zero
/// violations; discretized spectra may produce spurious ones near
/// eigenvalues, which the report surfaces for the caller to attribute.
pub fn sandwich_check(
    curve_d_parts: &[CountingCurve],
    curve_full: &CountingCurve,
    curve_n_parts: &[CountingCurve],
) -> Result<SandwichReport> {
    let grid = curve_full.lambdas();
    for c in curve_d_parts.iter().chain(curve_n_parts) {
        let g = c.lambdas();
        if g.len() != grid.len()
            || g.iter()
                .zip(&grid)
                .any(|(a, b)| (a - b).abs() > 1e-12 * b.abs().max(1.0))
        {
            return Err(Error::GridMismatch);
        }
    }
    let mut violations = Vec::new();
    for (i, &(lambda, n_full)) in curve_full.points.iter().enumerate() {
        let n_d: f64 = curve_d_parts.iter().map(|c| c.points[i].1).sum();
        let n_n: f64 = curve_n_parts.iter().map(|c| c.points[i].1).sum();
        if n_d > n_full || n_full > n_n {
            violations.push(SandwichViolation {
                lambda,
                n_dirichlet: n_d,
                n_full,
                n_neumann: n_n,
            });
        }
    }
    Ok(SandwichReport {
        pass: violations.is_empty(),
        violations,
    })
}

/// Result of fitting a counting curve against `λ^{n/2}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WeylFit {
    /// Fitted coefficient of `λ^{n/2}` (least squares through the origin).
    pub slope: f64,
    /// `ω_n/(2π)^n · Vol` from the model.
    pub theoretical: f64,
    pub rel_error: f64,
    pub n: usize,
    pub lambda_range: (f64, f64),
}

/// Least-squares fit of `N(λ) = slope · λ^{n/2}` over the top half of the
/// grid, compared against the model's Weyl constant. Only the leading term
/// is fitted; the remainder is `o(λ^{n/2})` with no usable second term.
pub fn fit_weyl(curve: &CountingCurve, model: &CuspEdgeModel) -> Result<WeylFit> {
    let n = model.dim();
    let lambda_max = curve
        .points
        .last()
        .map(|p| p.0)
        .ok_or_else(|| Error::InsufficientData("empty counting curve".into()))?;
    let cut = 0.5 * lambda_max;
    let pts: Vec<&(f64, f64)> = curve.points.iter().filter(|p| p.0 >= cut).collect();
    if pts.len() < 10 {
        return Err(Error::InsufficientData(format!(
            "need >= 10 grid points in the upper half-range, found {}",
            pts.len()
        )));
    }
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for &&(lambda, count) in &pts {
        let x = lambda.powf(n as f64 / 2.0);
        sxx += x * x;
        sxy += x * count;
    }
    let slope = sxy / sxx;
    let theoretical = weyl_constant(model);
    Ok(WeylFit {
        slope,
        theoretical,
        rel_error: (slope - theoretical).abs() / theoretical,
        n,
        lambda_range: (pts[0].0, lambda_max),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::CrossSection;
    use crate::spectrum::CurveLabel;
    use approx::assert_relative_eq;

    #[test]
    fn schedule_examples() {
        assert_eq!(schedule(1024.0, 4.0).unwrap(), (3, 5));
        assert_eq!(schedule(4.0, 4.0).unwrap(), (1, 1));
        assert_eq!(schedule(16.0, 16.0).unwrap(), (1, 2));
    }

    #[test]
    fn schedule_inverted() {
        // β < 2 forces m0 > m for large λ.
        assert!(matches!(
            schedule(1024.0, 1.0),
            Err(Error::ScheduleInverted { .. })
        ));
    }

    #[test]
    fn partition_tiles_exactly() {
        for (m0, m, ell) in [(1u32, 3u32, 1usize), (2, 4, 2), (3, 3, 1)] {
            let p = BracketingPartition::new(m0, m, ell).unwrap();
            let total: f64 = p
                .blocks()
                .iter()
                .map(|mu| mu.iter().map(|&j| p.interval_length(j)).product::<f64>())
                .sum();
            assert_relative_eq!(total, p.delta().powi(ell as i32), max_relative = 1e-12);
        }
    }

    #[test]
    fn block_count_examples() {
        // ℓ=1, μ=2, k=3, λ=100: ζ forced to 0, 16ξ² ≤ 100 ⇒ ξ ∈ {−2..2}.
        assert_eq!(block_lattice_count(&[2], &[3.0], 0, 100.0), 5);
        assert_eq!(block_lattice_count(&[2], &[3.0], 0, 0.0), 1);
        assert_eq!(block_lattice_count(&[5], &[3.0], 1, 0.0), 1);
        // ℓ=1, μ=1, k=3, cross_dim=1, λ=5: 4ξ²+64ζ²+η² ≤ 5 → 11 tuples.
        assert_eq!(block_lattice_count(&[1], &[3.0], 1, 5.0), 11);
    }

    #[test]
    fn block_count_matches_brute_force() {
        // Independent nested-loop oracle with generous static ranges.
        let brute = |mu: &[u32], k: &[f64], d: usize, lambda: f64| -> u64 {
            let mut coeffs = Vec::new();
            for &m in mu {
                coeffs.push(4f64.powi(m as i32));
            }
            for (&m, &kj) in mu.iter().zip(k) {
                coeffs.push(2f64.powf(2.0 * m as f64 * kj));
            }
            coeffs.extend(std::iter::repeat(1.0).take(d));
            fn rec(c: &[f64], lambda: f64) -> u64 {
                if c.is_empty() {
                    return 1;
                }
                let mut t = 0;
                for z in -40i64..=40 {
                    let used = c[0] * (z * z) as f64;
                    if used <= lambda {
                        t += rec(&c[1..], lambda - used);
                    }
                }
                t
            }
            rec(&coeffs, lambda)
        };
        for (mu, k, d, lambda) in [
            (vec![1u32], vec![3.0], 0usize, 64.0),
            (vec![1], vec![3.0], 1, 5.0),
            (vec![2], vec![3.0], 0, 100.0),
            (vec![1, 2], vec![3.0, 2.0], 1, 30.0),
            (vec![1, 1], vec![1.0, 1.0], 2, 12.5),
        ] {
            assert_eq!(
                block_lattice_count(&mu, &k, d, lambda),
                brute(&mu, &k, d, lambda),
                "mu={mu:?} k={k:?} d={d} lambda={lambda}"
            );
        }
    }

    #[test]
    fn per_coordinate_bound_examples() {
        assert_eq!(per_coordinate_bounds(2, 3.0, 100.0), (5, 1, 21));
        assert_eq!(per_coordinate_bounds(2, 3.0, 0.0), (1, 1, 1));
        assert_eq!(per_coordinate_bounds(1, 3.0, 64.0), (9, 3, 17));
    }

    #[test]
    fn per_coordinate_product_dominates_block_count() {
        for mu in 1u32..=4 {
            for lambda in [0.0, 5.0, 64.0, 400.0] {
                for kj in [1.0, 2.0, 3.0] {
                    let count = block_lattice_count(&[mu], &[kj], 1, lambda);
                    let (bx, bz, be) = per_coordinate_bounds(mu, kj, lambda);
                    assert!(count <= bx * bz * be);
                }
            }
        }
    }

    #[test]
    fn cusp_error_examples() {
        let model = CuspEdgeModel::new(1, vec![3.0], 0.125, CrossSection::Point).unwrap();
        let b = cusp_error_bound(&model, 3, 3, 1.0).unwrap();
        assert_relative_eq!(b.summed_coefficient, 2f64.powi(-12), max_relative = 1e-14);
        assert_relative_eq!(b.closed_form_coefficient, 2f64.powi(-12), max_relative = 1e-14);

        let b0 = cusp_error_bound(&model, 3, 3, 0.0).unwrap();
        assert_eq!(b0.summed_bound, 0.0);

        // ℓ=2, k=(3,3), m0=2, m=3: (2^{−8}+2^{−12})², by direct summation.
        let model2 = CuspEdgeModel::new(2, vec![3.0, 3.0], 0.25, CrossSection::Point).unwrap();
        let b2 = cusp_error_bound(&model2, 2, 3, 1.0).unwrap();
        let expect = (2f64.powi(-8) + 2f64.powi(-12)).powi(2);
        assert_relative_eq!(b2.summed_coefficient, expect, max_relative = 1e-14);
    }

    #[test]
    fn cusp_error_geometric_envelope() {
        // δ^{ℓ+|k|} ≤ summed ≤ ... is reversed: the sum starts at μ=m0 so it
        // dominates the closed form's first term and is bounded by the full
        // geometric series.
        for (ell, k, m0, m) in [
            (1usize, vec![3.0], 2u32, 6u32),
            (2, vec![3.0, 2.0], 2, 5),
            (1, vec![1.5], 1, 8),
        ] {
            let delta = 2f64.powi(-(m0 as i32));
            let model = CuspEdgeModel::new(ell, k.clone(), delta, CrossSection::Point).unwrap();
            let b = cusp_error_bound(&model, m0, m, 1.0).unwrap();
            let kmin = k.iter().cloned().fold(f64::INFINITY, f64::min);
            let envelope = b.closed_form_coefficient
                * (1.0 / (1.0 - 2f64.powf(-(1.0 + kmin)))).powi(ell as i32);
            assert!(b.summed_coefficient >= b.closed_form_coefficient * (1.0 - 1e-12));
            assert!(b.summed_coefficient <= envelope * (1.0 + 1e-12));
        }
    }

    fn curve_from_eigs(eigs: &[f64], grid: &[f64], label: CurveLabel) -> CountingCurve {
        CountingCurve {
            points: grid
                .iter()
                .map(|&l| (l, eigs.iter().filter(|&&e| e <= l).count() as f64))
                .collect(),
            label,
        }
    }

    #[test]
    fn sandwich_split_interval_exact() {
        // Interval (0,1), α=0, split at 1/2. Full Dirichlet: (jπ)².
        // Halves: Dirichlet (2jπ)², Neumann ((j−1)·2π)² (incl. 0), each twice.
        let pi = std::f64::consts::PI;
        let grid: Vec<f64> = (1..=40).map(|j| j as f64 * 10.0).collect();
        let full: Vec<f64> = (1..=40).map(|j| (j as f64 * pi).powi(2)).collect();
        let half_d: Vec<f64> = (1..=40).map(|j| (2.0 * j as f64 * pi).powi(2)).collect();
        let mut half_n: Vec<f64> = vec![0.0];
        half_n.extend(&half_d);

        let full_c = curve_from_eigs(&full, &grid, CurveLabel::Dirichlet);
        let d_parts = vec![
            curve_from_eigs(&half_d, &grid, CurveLabel::Dirichlet),
            curve_from_eigs(&half_d, &grid, CurveLabel::Dirichlet),
        ];
        let n_parts = vec![
            curve_from_eigs(&half_n, &grid, CurveLabel::Neumann),
            curve_from_eigs(&half_n, &grid, CurveLabel::Neumann),
        ];
        let rep = sandwich_check(&d_parts, &full_c, &n_parts).unwrap();
        assert!(rep.pass, "violations: {:?}", rep.violations);

        // Spot check at λ=50: N_D = 2·1? no — (2π)² ≈ 39.5 ≤ 50 once per half.
        let at50 = |eigs: &[f64]| eigs.iter().filter(|&&e| e <= 50.0).count();
        assert_eq!(2 * at50(&half_d), 2);
        assert_eq!(at50(&full), 2);
        assert_eq!(2 * at50(&half_n), 4);
    }

    #[test]
    fn sandwich_identity_partition_trivial() {
        let grid: Vec<f64> = (1..=20).map(|j| j as f64).collect();
        let eigs = vec![0.5, 2.5, 7.0, 13.0];
        let c = curve_from_eigs(&eigs, &grid, CurveLabel::Dirichlet);
        let rep = sandwich_check(
            std::slice::from_ref(&c),
            &c,
            std::slice::from_ref(&c),
        )
        .unwrap();
        assert!(rep.pass);
    }

    #[test]
    fn sandwich_grid_mismatch() {
        let a = curve_from_eigs(&[1.0], &[1.0, 2.0], CurveLabel::Dirichlet);
        let b = curve_from_eigs(&[1.0], &[1.0, 3.0], CurveLabel::Dirichlet);
        assert!(matches!(
            sandwich_check(std::slice::from_ref(&a), &b, std::slice::from_ref(&a)),
            Err(Error::GridMismatch)
        ));
    }

    #[test]
    fn fit_exact_law_recovers_slope() {
        // n=2 model with Vol=π/32: theoretical slope 1/128.
        let model = CuspEdgeModel::new(1, vec![3.0], 0.5, CrossSection::Point).unwrap();
        let grid: Vec<f64> = (1..=40).map(|j| j as f64 * 250.0).collect();
        let curve = CountingCurve {
            points: grid.iter().map(|&l| (l, l / 128.0)).collect(),
            label: CurveLabel::Averaged,
        };
        let fit = fit_weyl(&curve, &model).unwrap();
        assert_relative_eq!(fit.slope, 1.0 / 128.0, max_relative = 1e-12);
        assert!(fit.rel_error < 1e-12);
    }

    #[test]
    fn fit_zero_curve() {
        let model = CuspEdgeModel::new(1, vec![3.0], 0.5, CrossSection::Point).unwrap();
        let grid: Vec<f64> = (1..=40).map(|j| j as f64 * 250.0).collect();
        let curve = CountingCurve {
            points: grid.iter().map(|&l| (l, 0.0)).collect(),
            label: CurveLabel::Averaged,
        };
        let fit = fit_weyl(&curve, &model).unwrap();
        assert_eq!(fit.slope, 0.0);
        assert_eq!(fit.rel_error, 1.0);
    }

    #[test]
    fn fit_needs_enough_points() {
        let model = CuspEdgeModel::new(1, vec![3.0], 0.5, CrossSection::Point).unwrap();
        let curve = CountingCurve {
            points: vec![(1.0, 0.0), (2.0, 1.0)],
            label: CurveLabel::Dirichlet,
        };
        assert!(matches!(
            fit_weyl(&curve, &model),
            Err(Error::InsufficientData(_))
        ));
    }
}
