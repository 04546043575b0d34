//! Tensor-product spectrum assembly and eigenvalue counting.
//!
//! Every model eigenvalue is a sum `Σ_i λ^{radial}_{i,(m_i,n_i)} + λ^{cross}`
//! of separated pieces. This module builds per-direction eigenvalue lists
//! with certified angular truncation, closed-form cross-section lattice
//! eigenvalues, and counts all sums `≤ λ` by pruned depth-first enumeration.
//!
//! ```
//! use cuspedge::model::{Bc, CrossSection, CuspEdgeModel};
//! use cuspedge::spectrum::{assemble_count, brute_force_count, build_index};
//!
//! let model = CuspEdgeModel::new(1, vec![3.0], 0.5, CrossSection::Point).unwrap();
//! let idx = build_index(&model, 400, 3.0, Bc::Dirichlet, 200.0).unwrap();
//! assert!(idx.certified);
//! let fast = assemble_count(&idx, 150.0).unwrap();
//! let slow = brute_force_count(&idx.merged, &idx.cross, 150.0);
//! assert_eq!(fast, slow);
//! ```

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Bc, CrossSection, CuspEdgeModel};
use crate::sturm::{mode_cutoff, solve_eigs, GradedMesh, RadialProblem};

/// Closed-form cross-section eigenvalues `≤ lambda_max`, ascending, with
/// multiplicity.
///
/// Point: `[0]`. Flat torus: `Σ (2πz_j/L_j)²` over `z ∈ ℤ^d`. Box:
/// `Σ (πz_j/L_j)²` with `z_j ≥ 1` (Dirichlet) or `z_j ≥ 0` (Neumann).
pub fn cross_section_eigs(cs: &CrossSection, lambda_max: f64) -> Vec<f64> {
    let mut out = Vec::new();
    if lambda_max < 0.0 {
        return out;
    }
    match cs {
        CrossSection::Point => out.push(0.0),
        CrossSection::FlatTorus { lengths } => {
            let freqs: Vec<f64> = lengths
                .iter()
                .map(|l| 2.0 * std::f64::consts::PI / l)
                .collect();
            enumerate_lattice(&freqs, true, 0, 0.0, lambda_max, &mut out);
        }
        CrossSection::Box { lengths, bc } => {
            let freqs: Vec<f64> = lengths.iter().map(|l| std::f64::consts::PI / l).collect();
            match bc {
                Bc::Dirichlet => enumerate_box_dirichlet(&freqs, 0, 0.0, lambda_max, &mut out),
                Bc::Neumann => enumerate_lattice(&freqs, false, 0, 0.0, lambda_max, &mut out),
            }
        }
    }
    out.sort_by(|a, b| a.partial_cmp(b).unwrap());
    out
}

/// Sums `Σ (freq_j z_j)²` with `z_j ∈ ℤ` (signed) or `z_j ≥ 0`.
fn enumerate_lattice(
    freqs: &[f64],
    signed: bool,
    dim: usize,
    partial: f64,
    lambda_max: f64,
    out: &mut Vec<f64>,
) {
    if dim == freqs.len() {
        out.push(partial);
        return;
    }
    let rem = lambda_max - partial;
    let zmax = (rem.sqrt() / freqs[dim]).floor() as i64;
    let zmin = if signed { -zmax } else { 0 };
    for z in zmin..=zmax {
        let term = (freqs[dim] * z as f64).powi(2);
        if partial + term <= lambda_max {
            enumerate_lattice(freqs, signed, dim + 1, partial + term, lambda_max, out);
        }
    }
}

fn enumerate_box_dirichlet(
    freqs: &[f64],
    dim: usize,
    partial: f64,
    lambda_max: f64,
    out: &mut Vec<f64>,
) {
    if dim == freqs.len() {
        out.push(partial);
        return;
    }
    let rem = lambda_max - partial;
    let zmax = (rem.sqrt() / freqs[dim]).floor() as i64;
    for z in 1..=zmax {
        let term = (freqs[dim] * z as f64).powi(2);
        if partial + term <= lambda_max {
            enumerate_box_dirichlet(freqs, dim + 1, partial + term, lambda_max, out);
        }
    }
}

/// Per-direction radial lists plus cross-section eigenvalues, all certified
/// below `lambda_max`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpectrumIndex {
    /// For each cusp direction, angular mode `m ≥ 0` to ascending radial
    /// eigenvalues `≤ lambda_max`. Modes `m` and `−m` share the list and are
    /// both counted.
    pub per_direction: Vec<BTreeMap<i64, Vec<f64>>>,
    /// Merged per-direction spectra (ascending, `±m` multiplicity applied).
    pub merged: Vec<Vec<f64>>,
    /// Cross-section eigenvalues with multiplicity, ascending.
    pub cross: Vec<f64>,
    pub lambda_max: f64,
    pub bc: Bc,
    /// All radial solves passed the refinement certification.
    pub certified: bool,
}

/// Build the index for a model: radial solves for every direction and every
/// angular mode below the certified cutoff.
pub fn build_index(
    model: &CuspEdgeModel,
    mesh_cells: usize,
    mesh_grading: f64,
    bc: Bc,
    lambda_max: f64,
) -> Result<SpectrumIndex> {
    model.validate()?;
    if !(lambda_max > 0.0) {
        return Err(Error::InvalidConfig("lambda_max must be positive".into()));
    }
    let mut per_direction = Vec::with_capacity(model.ell);
    let mut merged = Vec::with_capacity(model.ell);
    let mut certified = true;
    for &k in &model.k {
        // Rigorous mode bound: m²δ^{−2k} > λ has no spectrum below λ.
        let m_max = (lambda_max.sqrt() * model.delta.powf(k)).floor() as i64;
        let mesh = GradedMesh::new(mesh_cells, mesh_grading, model.delta)?;
        let solved: Vec<(i64, Vec<f64>, bool)> = (0..=m_max)
            .into_par_iter()
            .map(|m| {
                let p = RadialProblem {
                    alpha: k,
                    k,
                    m,
                    delta: model.delta,
                    outer_bc: bc,
                };
                if mode_cutoff(&p, lambda_max) {
                    return Ok((m, Vec::new(), true));
                }
                let r = solve_eigs(&p, &mesh, lambda_max)?;
                Ok((m, r.eigenvalues, r.certified_complete))
            })
            .collect::<Result<_>>()?;

        let mut modes = BTreeMap::new();
        let mut all: Vec<f64> = Vec::new();
        for (m, eigs, cert) in solved {
            certified &= cert;
            if eigs.is_empty() {
                continue;
            }
            all.extend_from_slice(&eigs);
            if m != 0 {
                all.extend_from_slice(&eigs);
            }
            modes.insert(m, eigs);
        }
        all.sort_by(|a, b| a.partial_cmp(b).unwrap());
        per_direction.push(modes);
        merged.push(all);
    }
    Ok(SpectrumIndex {
        per_direction,
        merged,
        cross: cross_section_eigs(&model.cross_section, lambda_max),
        lambda_max,
        bc,
        certified,
    })
}

/// Number of tuples with `Σ_i λ_i + λ_cross ≤ lambda`, by depth-first
/// enumeration over directions with monotone pruning.
pub fn assemble_count(idx: &SpectrumIndex, lambda: f64) -> Result<usize> {
    if lambda > idx.lambda_max * (1.0 + 1e-12) {
        return Err(Error::IndexIncomplete {
            lambda,
            lambda_max: idx.lambda_max,
        });
    }
    Ok(count_rec(&idx.merged, &idx.cross, 0, lambda))
}

fn count_rec(directions: &[Vec<f64>], cross: &[f64], dim: usize, budget: f64) -> usize {
    if budget < 0.0 {
        return 0;
    }
    if dim == directions.len() {
        // Ascending cross list: binary search for the first entry > budget.
        return cross.partition_point(|&c| c <= budget);
    }
    let mut total = 0;
    for &ev in &directions[dim] {
        if ev > budget {
            break;
        }
        total += count_rec(directions, cross, dim + 1, budget - ev);
    }
    total
}

/// Label attached to a counting curve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CurveLabel {
    Dirichlet,
    Neumann,
    Averaged,
}

/// Eigenvalue counting function sampled on an ascending grid.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CountingCurve {
    /// `(λ, N(λ))` with λ ascending and counts non-decreasing. Counts are
    /// stored as reals so Dirichlet/Neumann averages fit the same type;
    /// pure curves hold exact integers.
    pub points: Vec<(f64, f64)>,
    pub label: CurveLabel,
}

impl CountingCurve {
    pub fn lambdas(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.0).collect()
    }

    /// Pointwise average of a Dirichlet and a Neumann curve.
    pub fn averaged(d: &CountingCurve, n: &CountingCurve) -> Result<CountingCurve> {
        if d.points.len() != n.points.len()
            || d.points
                .iter()
                .zip(&n.points)
                .any(|(a, b)| (a.0 - b.0).abs() > 1e-12 * a.0.abs().max(1.0))
        {
            return Err(Error::GridMismatch);
        }
        Ok(CountingCurve {
            points: d
                .points
                .iter()
                .zip(&n.points)
                .map(|(a, b)| (a.0, 0.5 * (a.1 + b.1)))
                .collect(),
            label: CurveLabel::Averaged,
        })
    }
}

/// Build the counting curve for a model on an ascending λ grid: one index
/// construction at the grid maximum, then one pruned count per grid point.
pub fn counting_curve(
    model: &CuspEdgeModel,
    mesh_cells: usize,
    mesh_grading: f64,
    bc: Bc,
    lambda_grid: &[f64],
) -> Result<CountingCurve> {
    if lambda_grid.is_empty() {
        return Err(Error::InsufficientData("empty lambda grid".into()));
    }
    if lambda_grid.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidConfig("lambda grid must be ascending".into()));
    }
    let lambda_max = *lambda_grid.last().unwrap();
    let idx = build_index(model, mesh_cells, mesh_grading, bc, lambda_max.max(1e-9))?;
    if !idx.certified {
        return Err(Error::MeshTooCoarse {
            rel_change: f64::NAN,
            rtol: crate::sturm::DEFAULT_CERT_RTOL,
        });
    }
    let points = lambda_grid
        .iter()
        .map(|&l| Ok((l, assemble_count(&idx, l)? as f64)))
        .collect::<Result<Vec<_>>>()?;
    Ok(CountingCurve {
        points,
        label: match bc {
            Bc::Dirichlet => CurveLabel::Dirichlet,
            Bc::Neumann => CurveLabel::Neumann,
        },
    })
}

/// Brute-force tuple count over the full Cartesian product; test oracle for
/// `assemble_count`, kept in the library so acceptance suites can call it.
pub fn brute_force_count(directions: &[Vec<f64>], cross: &[f64], lambda: f64) -> usize {
    fn rec(dirs: &[Vec<f64>], cross: &[f64], dim: usize, sum: f64, lambda: f64) -> usize {
        if dim == dirs.len() {
            return cross.iter().filter(|&&c| sum + c <= lambda).count();
        }
        dirs[dim]
            .iter()
            .map(|&ev| rec(dirs, cross, dim + 1, sum + ev, lambda))
            .sum()
    }
    rec(directions, cross, 0, 0.0, lambda)
}
