//! Separated radial eigensolver.
//!
//! Solves `−u'' − (α/ρ)u' + m²ρ^{−2k} u = λu` on `(0, δ)` in the weighted
//! space `L²(ρ^α dρ)` by conforming piecewise-linear finite elements on a
//! graded mesh, with eigenvalue extraction by Sturm-sequence bisection on
//! the tridiagonal stiffness/mass pencil.
//!
//! No essential condition is imposed at `ρ = 0`: for `α ≥ 3` this is the
//! limit-point setting where none is needed, and for `α < 3` it selects the
//! Friedrichs extension. Conformity means every discrete eigenvalue is an
//! upper bound for its continuum counterpart and non-increasing under
//! nested refinement.
//!
//! ```
//! use cuspedge::model::Bc;
//! use cuspedge::sturm::{solve_eigs, GradedMesh, RadialProblem};
//!
//! // α = 0, m = 0 on (0, 1): the Friedrichs extension is the Dirichlet
//! // Laplacian, so the eigenvalues are (jπ)².
//! let problem = RadialProblem { alpha: 0.0, k: 1.0, m: 0, delta: 1.0, outer_bc: Bc::Dirichlet };
//! let mesh = GradedMesh::new(400, 1.0, 1.0).unwrap();
//! let res = solve_eigs(&problem, &mesh, 50.0).unwrap();
//! let pi = std::f64::consts::PI;
//! assert!(res.certified_complete);
//! assert!((res.eigenvalues[0] - pi * pi).abs() < 1e-3);
//! assert!((res.eigenvalues[1] - 4.0 * pi * pi).abs() < 1e-2);
//! ```

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::Bc;
use crate::quad::{hat_mass_entry, hat_stiff};

/// Default mesh grading exponent; clusters nodes toward the cusp end.
pub const DEFAULT_GRADING: f64 = 3.0;
/// Relative change of the top eigenvalue tolerated under one refinement.
pub const DEFAULT_CERT_RTOL: f64 = 1e-3;

/// One separated radial problem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialProblem {
    /// Weight exponent in the measure `ρ^α dρ`; equals `k` for the model.
    pub alpha: f64,
    /// Cusp order in the angular potential `m²ρ^{−2k}`.
    pub k: f64,
    /// Angular mode.
    pub m: i64,
    /// Outer radius.
    pub delta: f64,
    /// Condition at `ρ = δ`.
    pub outer_bc: Bc,
}

impl RadialProblem {
    pub fn validate(&self) -> Result<()> {
        if !(self.delta > 0.0 && self.delta.is_finite()) {
            return Err(Error::InvalidConfig("delta must be positive".into()));
        }
        if !(self.alpha >= 0.0) {
            return Err(Error::InvalidConfig("alpha must be >= 0".into()));
        }
        if !(self.k >= 1.0) {
            return Err(Error::InvalidConfig("k must be >= 1".into()));
        }
        Ok(())
    }
}

/// Graded mesh `ρ_j = δ (j/N)^g` on `(0, δ)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GradedMesh {
    pub cells: usize,
    pub grading: f64,
    pub nodes: Vec<f64>,
}

impl GradedMesh {
    pub fn new(cells: usize, grading: f64, delta: f64) -> Result<Self> {
        if cells < 2 {
            return Err(Error::InvalidConfig("mesh needs at least 2 cells".into()));
        }
        if !(grading >= 1.0) {
            return Err(Error::InvalidConfig("grading must be >= 1".into()));
        }
        let nodes = (0..=cells)
            .map(|j| delta * (j as f64 / cells as f64).powf(grading))
            .collect();
        Ok(GradedMesh {
            cells,
            grading,
            nodes,
        })
    }

    /// Nested refinement: doubling `cells` with the same grading keeps every
    /// old node (`(2j/2N)^g = (j/N)^g`).
    pub fn refined(&self) -> GradedMesh {
        GradedMesh::new(self.cells * 2, self.grading, *self.nodes.last().unwrap()).unwrap()
    }
}

/// Eigenvalues found below a certification threshold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigResult {
    /// Ascending eigenvalues `≤ lambda_max`.
    pub eigenvalues: Vec<f64>,
    pub lambda_max: f64,
    /// True when the refinement check passed, so every continuum eigenvalue
    /// `≤ lambda_max` is represented.
    pub certified_complete: bool,
}

/// Certified angular truncation: mode `m` contributes no spectrum `≤ λ`
/// when `m²δ^{−2k} > λ`, because the potential alone bounds the form from
/// below by that constant.
pub fn mode_cutoff(problem: &RadialProblem, lambda: f64) -> bool {
    let m = problem.m as f64;
    m * m * problem.delta.powf(-2.0 * problem.k) > lambda
}

/// Local 2x2 stiffness and mass blocks on one cell.
///
/// Stiffness combines `∫ ρ^α φ_i'φ_j'` with the potential term
/// `m² ∫ ρ^{α−2k} φ_iφ_j`; mass is `∫ ρ^α φ_iφ_j`. All entries are exact
/// monomial integrals. Fails when a required integral diverges, which on the
/// first cell with `m ≠ 0` happens exactly when `α − 2k + 2 ≤ −1`.
pub fn element_integrals(
    cell: (f64, f64),
    alpha: f64,
    k: f64,
    m: i64,
) -> Result<([[f64; 2]; 2], [[f64; 2]; 2])> {
    let (a, b) = cell;
    if !(0.0 <= a && a < b) {
        return Err(Error::InvalidConfig("cell must satisfy 0 <= a < b".into()));
    }
    let fail = || {
        Error::NumericalFailure(format!(
            "divergent element integral on cell [{a:e}, {b:e}] (alpha={alpha}, k={k}, m={m})"
        ))
    };
    let mut stiff = hat_stiff(alpha, a, b).ok_or_else(fail)?;
    let mass = crate::quad::hat_mass(alpha, a, b).ok_or_else(fail)?;
    if m != 0 {
        let w = alpha - 2.0 * k;
        let mm = (m * m) as f64;
        for i in 0..2 {
            for j in i..2 {
                let e = hat_mass_entry(w, a, b, i, j).ok_or_else(fail)?;
                stiff[i][j] += mm * e;
                if i != j {
                    stiff[j][i] = stiff[i][j];
                }
            }
        }
    }
    Ok((stiff, mass))
}

/// Symmetric tridiagonal matrix stored as diagonal and sub-diagonal.
#[derive(Debug, Clone)]
pub struct Tridiag {
    pub diag: Vec<f64>,
    pub off: Vec<f64>,
}

impl Tridiag {
    fn zeros(n: usize) -> Self {
        Tridiag {
            diag: vec![0.0; n],
            off: vec![0.0; n.saturating_sub(1)],
        }
    }
}

/// Number of eigenvalues of the pencil `(K, M)` strictly below `lambda`,
/// by counting negative pivots of the LDLᵀ factorization of `K − λM`.
pub fn pencil_count_below(k: &Tridiag, m: &Tridiag, lambda: f64) -> usize {
    let n = k.diag.len();
    if n == 0 {
        return 0;
    }
    let mut count = 0;
    let mut q = k.diag[0] - lambda * m.diag[0];
    if q < 0.0 {
        count += 1;
    }
    for i in 1..n {
        let e = k.off[i - 1] - lambda * m.off[i - 1];
        let q_safe = if q == 0.0 { -f64::MIN_POSITIVE } else { q };
        q = (k.diag[i] - lambda * m.diag[i]) - e * e / q_safe;
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// All generalized eigenvalues of `(K, M)` that are `≤ lambda_max`,
/// ascending, found by per-index bisection on the Sturm count.
pub fn pencil_eigenvalues_below(k: &Tridiag, m: &Tridiag, lambda_max: f64) -> Vec<f64> {
    let n = k.diag.len();
    if n == 0 {
        return Vec::new();
    }
    // The pencil is positive semi-definite; start just below zero to catch
    // Neumann zero modes pushed to -eps by roundoff.
    let mut lo = -1e-9 * lambda_max.abs().max(1.0);
    while pencil_count_below(k, m, lo) > 0 {
        lo *= 16.0;
    }
    let hi = lambda_max * (1.0 + 1e-13) + f64::MIN_POSITIVE;
    let total = pencil_count_below(k, m, hi);
    let mut eigs = Vec::with_capacity(total);
    let mut left = lo;
    for idx in 0..total {
        // Eigenvalue idx lies in [left, hi); counts are monotone so the
        // previous eigenvalue is a valid left bracket.
        let mut a = left;
        let mut b = hi;
        for _ in 0..200 {
            let mid = 0.5 * (a + b);
            if b - a <= 1e-13 * mid.abs().max(1e-300) || mid <= a || mid >= b {
                break;
            }
            if pencil_count_below(k, m, mid) > idx {
                b = mid;
            } else {
                a = mid;
            }
        }
        let ev = 0.5 * (a + b);
        eigs.push(ev.min(lambda_max));
        left = a;
    }
    eigs
}

/// Boundary treatment at the left end of the assembly interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LeftEnd {
    /// Interval starts at `ρ = 0` with no essential condition (natural /
    /// Friedrichs). Divergent first-cell integrals for `m ≠ 0` are handled
    /// by zero-extension: the affected nodes are pinned to zero, which keeps
    /// the method conforming.
    CuspNatural,
    Dirichlet,
    Neumann,
}

/// Assemble the stiffness/mass pencil for hat functions on `nodes`,
/// restricted to the active degrees of freedom.
pub fn assemble_pencil(
    nodes: &[f64],
    alpha: f64,
    k: f64,
    m: i64,
    left: LeftEnd,
    outer_bc: Bc,
) -> Result<(Tridiag, Tridiag)> {
    let ncells = nodes.len() - 1;
    if !(alpha >= 0.0) && m != 0 {
        return Err(Error::NumericalFailure(
            "alpha < 0 with m != 0: element integrals are non-finite near 0".into(),
        ));
    }

    // Determine the first active node and whether the first cell is skipped.
    let starts_at_zero = nodes[0] == 0.0;
    let (first_active, skip_cells) = match left {
        LeftEnd::Dirichlet => (1usize, 0usize),
        LeftEnd::Neumann if !starts_at_zero => (0usize, 0usize),
        LeftEnd::Neumann | LeftEnd::CuspNatural => {
            if m == 0 {
                // Friedrichs extension: for α < 1 constants near 0 are not
                // reachable from compactly supported functions in form norm,
                // so the boundary value is pinned; for α ≥ 1 the free node
                // is the right discretization. An explicit Neumann request
                // at 0 always keeps the node free.
                if left == LeftEnd::Neumann || alpha >= 1.0 {
                    (0usize, 0usize)
                } else {
                    (1usize, 0usize)
                }
            } else {
                let w = alpha - 2.0 * k;
                if w > -1.0 + 1e-12 {
                    // Even the falling hat at node 0 has finite potential
                    // energy.
                    (0usize, 0usize)
                } else if w + 2.0 > -1.0 + 1e-12 {
                    // Rising hat on the first cell has potential energy
                    // ∫ ρ^{α−2k} (ρ/ρ_1)² dρ, finite iff α − 2k + 2 > −1;
                    // node 0 alone carries infinite energy, drop it.
                    (1usize, 0usize)
                } else {
                    // Zero-extension: pin u = 0 on [0, ρ_1] as well.
                    (2usize, 1usize)
                }
            }
        }
    };
    let last_active = match outer_bc {
        Bc::Dirichlet => ncells - 1,
        Bc::Neumann => ncells,
    };
    if first_active > last_active {
        return Err(Error::InvalidConfig("no active degrees of freedom".into()));
    }

    let ndof = last_active - first_active + 1;
    let mut kk = Tridiag::zeros(ndof);
    let mut mm = Tridiag::zeros(ndof);

    for c in skip_cells..ncells {
        let cell = (nodes[c], nodes[c + 1]);
        // On a skipped-left configuration the cell containing only pinned
        // nodes never reaches here; otherwise compute only finite entries.
        for i in 0..2 {
            for j in i..2 {
                let (gi, gj) = (c + i, c + j);
                if gi < first_active || gi > last_active || gj > last_active {
                    continue;
                }
                let sfail = || {
                    Error::NumericalFailure(format!(
                        "divergent element integral on cell [{:e}, {:e}] (alpha={alpha}, k={k}, m={m})",
                        cell.0, cell.1
                    ))
                };
                let mut s = hat_stiff(alpha, cell.0, cell.1).ok_or_else(sfail)?[i][j];
                if m != 0 {
                    let w = alpha - 2.0 * k;
                    s += (m * m) as f64
                        * hat_mass_entry(w, cell.0, cell.1, i, j).ok_or_else(sfail)?;
                }
                let mval = hat_mass_entry(alpha, cell.0, cell.1, i, j).ok_or_else(sfail)?;
                let (li, lj) = (gi - first_active, gj - first_active);
                if li == lj {
                    kk.diag[li] += s;
                    mm.diag[li] += mval;
                } else {
                    kk.off[li] += s;
                    mm.off[li] += mval;
                }
            }
        }
    }
    Ok((kk, mm))
}

fn eigs_on_mesh(problem: &RadialProblem, mesh: &GradedMesh, lambda_max: f64) -> Result<Vec<f64>> {
    let (k, m) = assemble_pencil(
        &mesh.nodes,
        problem.alpha,
        problem.k,
        problem.m,
        LeftEnd::CuspNatural,
        problem.outer_bc,
    )?;
    Ok(pencil_eigenvalues_below(&k, &m, lambda_max))
}

/// Solve the radial eigenproblem on the given mesh, returning all discrete
/// eigenvalues `≤ lambda_max` with a refinement-based completeness flag.
pub fn solve_eigs(
    problem: &RadialProblem,
    mesh: &GradedMesh,
    lambda_max: f64,
) -> Result<EigResult> {
    solve_eigs_with_rtol(problem, mesh, lambda_max, DEFAULT_CERT_RTOL)
}

pub fn solve_eigs_with_rtol(
    problem: &RadialProblem,
    mesh: &GradedMesh,
    lambda_max: f64,
    rtol: f64,
) -> Result<EigResult> {
    problem.validate()?;
    if !(lambda_max > 0.0) {
        return Err(Error::InvalidConfig("lambda_max must be positive".into()));
    }
    if mode_cutoff(problem, lambda_max) {
        return Ok(EigResult {
            eigenvalues: Vec::new(),
            lambda_max,
            certified_complete: true,
        });
    }
    let eigs = eigs_on_mesh(problem, mesh, lambda_max)?;
    let refined = eigs_on_mesh(problem, &mesh.refined(), lambda_max)?;

    // Certification: the largest reported eigenvalue must be stable under
    // one refinement, and the counts must agree.
    let certified = if eigs.len() != refined.len() {
        false
    } else if let (Some(&top), Some(&rtop)) = (eigs.last(), refined.last()) {
        let scale = top.abs().max(1.0);
        (top - rtop).abs() / scale <= rtol
    } else {
        true
    };

    Ok(EigResult {
        eigenvalues: eigs,
        lambda_max,
        certified_complete: certified,
    })
}

/// Eigenvalues of the same operator restricted to a sub-interval
/// `[a, b] ⊂ [0, δ]` with explicit conditions at both ends. Used by the
/// Dirichlet–Neumann bracketing checks. When `a = 0` the left condition is
/// interpreted in the cusp sense (`Neumann` maps to the natural condition).
pub fn solve_eigs_on_interval(
    problem: &RadialProblem,
    nodes: &[f64],
    left_bc: Bc,
    right_bc: Bc,
    lambda_max: f64,
) -> Result<Vec<f64>> {
    let left = if nodes[0] == 0.0 {
        match left_bc {
            Bc::Dirichlet => LeftEnd::Dirichlet,
            Bc::Neumann => LeftEnd::CuspNatural,
        }
    } else {
        match left_bc {
            Bc::Dirichlet => LeftEnd::Dirichlet,
            Bc::Neumann => LeftEnd::Neumann,
        }
    };
    let (k, m) = assemble_pencil(nodes, problem.alpha, problem.k, problem.m, left, right_bc)?;
    Ok(pencil_eigenvalues_below(&k, &m, lambda_max))
}

/// Uniform nodes on `[a, b]`.
pub fn uniform_nodes(a: f64, b: f64, cells: usize) -> Vec<f64> {
    (0..=cells)
        .map(|j| a + (b - a) * j as f64 / cells as f64)
        .collect()
}

/// Graded nodes `a + (b-a)(j/N)^g`; grading toward `a`.
pub fn graded_nodes(a: f64, b: f64, cells: usize, grading: f64) -> Vec<f64> {
    (0..=cells)
        .map(|j| a + (b - a) * (j as f64 / cells as f64).powf(grading))
        .collect()
}

/// `∫_0^δ ρ^α dρ`-normalized check used in tests: first Bessel J0 zero by
/// bisection on the power series. Kept here for reuse by oracle code.
pub fn bessel_j0(x: f64) -> f64 {
    // Series is fine for the modest arguments used in tests (< 20).
    let mut term = 1.0f64;
    let mut sum = 1.0f64;
    let q = x * x / 4.0;
    for j in 1..200 {
        term *= -q / ((j * j) as f64);
        sum += term;
        if term.abs() < 1e-18 * sum.abs().max(1.0) {
            break;
        }
    }
    sum
}
