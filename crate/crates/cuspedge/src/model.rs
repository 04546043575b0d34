//! Model cusp-edge geometry.
//!
//! The model space is `(0,δ)^ℓ × (S¹)^ℓ × Z` carrying the metric
//! `Σ_i (dρ_i² + ρ_i^{2k_i} dθ_i²) + dy²`, where `Z` is a flat
//! cross-section (a point, a torus, or a box). Everything downstream — the
//! separated eigensolver, the counting function, the bracketing bounds —
//! runs on this geometry.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Boundary condition label used throughout the crate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Hash)]
#[serde(rename_all = "lowercase")]
pub enum Bc {
    Dirichlet,
    Neumann,
}

/// Flat cross-section factor `Z`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum CrossSection {
    /// Zero-dimensional cross-section: the single eigenvalue 0.
    Point,
    /// Flat torus with the given circumferences.
    FlatTorus { lengths: Vec<f64> },
    /// Rectangular box with Dirichlet or Neumann sides.
    Box { lengths: Vec<f64>, bc: Bc },
}

impl CrossSection {
    pub fn dim(&self) -> usize {
        match self {
            CrossSection::Point => 0,
            CrossSection::FlatTorus { lengths } | CrossSection::Box { lengths, .. } => {
                lengths.len()
            }
        }
    }

    pub fn volume(&self) -> f64 {
        match self {
            CrossSection::Point => 1.0,
            CrossSection::FlatTorus { lengths } | CrossSection::Box { lengths, .. } => {
                lengths.iter().product()
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            CrossSection::Point => Ok(()),
            CrossSection::FlatTorus { lengths } | CrossSection::Box { lengths, .. } => {
                if lengths.iter().all(|&l| l > 0.0 && l.is_finite()) {
                    Ok(())
                } else {
                    Err(Error::InvalidConfig(
                        "cross-section lengths must be positive and finite".into(),
                    ))
                }
            }
        }
    }
}

/// The model space `(0,δ)^ℓ × (S¹)^ℓ × Z` with cusp multi-order `k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CuspEdgeModel {
    /// Number of cusp directions `ℓ ≥ 1`.
    pub ell: usize,
    /// Cusp orders, one per direction, each `k_i ≥ 1`. Self-adjointness of
    /// the model operator needs `k_i ≥ 3`; smaller values are allowed so the
    /// classifier can probe the failure regime.
    pub k: Vec<f64>,
    /// Outer radius of each cusp coordinate.
    pub delta: f64,
    pub cross_section: CrossSection,
}

impl CuspEdgeModel {
    pub fn new(ell: usize, k: Vec<f64>, delta: f64, cross_section: CrossSection) -> Result<Self> {
        let m = CuspEdgeModel {
            ell,
            k,
            delta,
            cross_section,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        if self.ell < 1 {
            return Err(Error::InvalidConfig("ell must be >= 1".into()));
        }
        if self.k.len() != self.ell {
            return Err(Error::InvalidConfig(format!(
                "k has {} entries, expected ell = {}",
                self.k.len(),
                self.ell
            )));
        }
        if !self.k.iter().all(|&ki| ki >= 1.0 && ki.is_finite()) {
            return Err(Error::InvalidConfig("every k_i must satisfy k_i >= 1".into()));
        }
        if !(self.delta > 0.0 && self.delta.is_finite()) {
            return Err(Error::InvalidConfig("delta must be positive".into()));
        }
        self.cross_section.validate()
    }

    /// Total dimension `n = 2ℓ + dim Z`.
    pub fn dim(&self) -> usize {
        2 * self.ell + self.cross_section.dim()
    }

    /// `|k| = Σ k_i`.
    pub fn k_total(&self) -> f64 {
        self.k.iter().sum()
    }

    /// The cusp-error exponent `β = ℓ + |k|`.
    pub fn beta(&self) -> f64 {
        self.ell as f64 + self.k_total()
    }

    /// True when every `k_i ≥ 3`, the regime where the model operator is
    /// essentially self-adjoint.
    pub fn self_adjoint_regime(&self) -> bool {
        self.k.iter().all(|&ki| ki >= 3.0)
    }
}

/// Riemannian volume of the model metric:
/// `(2π)^ℓ · Vol(Z) · ∏_i δ^{k_i+1}/(k_i+1)`.
pub fn volume(model: &CuspEdgeModel) -> f64 {
    let cusp: f64 = model
        .k
        .iter()
        .map(|&ki| model.delta.powf(ki + 1.0) / (ki + 1.0))
        .product();
    (2.0 * std::f64::consts::PI).powi(model.ell as i32) * model.cross_section.volume() * cusp
}

/// Volume of the unit ball in `ℝ^n`, via the half-integer Gamma function.
pub fn unit_ball_volume(n: usize) -> f64 {
    // ω_n = π^{n/2} / Γ(n/2 + 1); Γ at half-integers in closed form.
    let pi = std::f64::consts::PI;
    if n % 2 == 0 {
        let mut fact = 1.0;
        for j in 1..=(n / 2) {
            fact *= j as f64;
        }
        pi.powi((n / 2) as i32) / fact
    } else {
        // Γ(n/2 + 1) = (n/2)(n/2-1)…(1/2)·√π
        let mut g = pi.sqrt();
        let mut x = n as f64 / 2.0;
        while x > 0.0 {
            g *= x;
            x -= 1.0;
        }
        pi.powf(n as f64 / 2.0) / g
    }
}

/// Leading Weyl coefficient `ω_n/(2π)^n · Vol(model)`, so that
/// `N(λ) ≈ weyl_constant · λ^{n/2}`.
pub fn weyl_constant(model: &CuspEdgeModel) -> f64 {
    let n = model.dim();
    unit_ball_volume(n) / (2.0 * std::f64::consts::PI).powi(n as i32) * volume(model)
}

/// Finite-sample probe of the decay conditions on metric perturbation
/// coefficients: each coefficient must vanish like `|ρ|^η`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PerturbationSample {
    /// Required decay order `η > 0`.
    pub eta: f64,
    pub samples: Vec<PerturbationPoint>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PerturbationPoint {
    pub rho: Vec<f64>,
    /// Coefficient name (`a_i`, `a_ij`, `b_ij`, `b~_ij`, `c_ij`) to value.
    pub values: BTreeMap<String, f64>,
}

/// Per-coefficient outcome of the admissibility regression.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AdmissibilityEntry {
    /// Fitted slope of `log|value|` against `log|ρ|`, or `None` when every
    /// sample sits below the absolute floor.
    pub slope: Option<f64>,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AdmissibilityReport {
    pub eta: f64,
    pub tol_slope: f64,
    pub coefficients: BTreeMap<String, AdmissibilityEntry>,
    pub pass: bool,
}

pub const ADMISSIBILITY_SLOPE_TOL: f64 = 0.1;
pub const ADMISSIBILITY_FLOOR: f64 = 1e-14;

/// Least-squares decay-slope check of perturbation coefficients.
///
/// For each coefficient, fits `log|value|` against `log|ρ|`; passes when the
/// slope is at least `η - tol_slope`, or when all values sit below the
/// absolute floor `1e-14`.
pub fn check_admissibility(p: &PerturbationSample) -> Result<AdmissibilityReport> {
    let radii: Vec<f64> = p
        .samples
        .iter()
        .map(|pt| pt.rho.iter().map(|r| r * r).sum::<f64>().sqrt())
        .collect();
    if radii.len() < 8 {
        return Err(Error::InsufficientSamples { span: 1.0 });
    }
    let rmin = radii.iter().cloned().fold(f64::INFINITY, f64::min);
    let rmax = radii.iter().cloned().fold(0.0, f64::max);
    let span = rmax / rmin;
    if !(span >= 10.0) {
        return Err(Error::InsufficientSamples { span });
    }

    let mut names: Vec<&String> = Vec::new();
    for pt in &p.samples {
        for name in pt.values.keys() {
            if !names.contains(&name) {
                names.push(name);
            }
        }
    }

    let mut coefficients = BTreeMap::new();
    let mut all_pass = true;
    for name in names {
        let pts: Vec<(f64, f64)> = p
            .samples
            .iter()
            .zip(&radii)
            .filter_map(|(pt, &r)| pt.values.get(name).map(|&v| (r, v)))
            .collect();
        let below_floor = pts.iter().all(|&(_, v)| v.abs() < ADMISSIBILITY_FLOOR);
        let entry = if below_floor {
            AdmissibilityEntry {
                slope: None,
                pass: true,
            }
        } else {
            // Drop below-floor points: log of ~0 would wreck the fit.
            let logpts: Vec<(f64, f64)> = pts
                .iter()
                .filter(|&&(_, v)| v.abs() >= ADMISSIBILITY_FLOOR)
                .map(|&(r, v)| (r.ln(), v.abs().ln()))
                .collect();
            let slope = least_squares_slope(&logpts);
            AdmissibilityEntry {
                slope: Some(slope),
                pass: slope >= p.eta - ADMISSIBILITY_SLOPE_TOL,
            }
        };
        all_pass &= entry.pass;
        coefficients.insert(name.clone(), entry);
    }

    Ok(AdmissibilityReport {
        eta: p.eta,
        tol_slope: ADMISSIBILITY_SLOPE_TOL,
        coefficients,
        pass: all_pass,
    })
}

fn least_squares_slope(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len() as f64;
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    (n * sxy - sx * sy) / (n * sxx - sx * sx)
}
