//! Desk-scale spectral toolkit for crossing cusp-edge Laplacians.
//!
//! The model geometry is `(0,δ)^ℓ × (S¹)^ℓ × Z` with metric
//! `Σ_i (dρ_i² + ρ_i^{2k_i} dθ_i²) + dy²`. The crate computes its spectrum
//! by separation of variables, counts eigenvalues with certified
//! truncations, fits the Weyl law, checks Dirichlet–Neumann bracketing and
//! dyadic lattice-count bounds, verifies weighted Hardy inequalities, and
//! classifies essential self-adjointness of the radial operator.
//!
//! ```
//! use cuspedge::model::{CuspEdgeModel, CrossSection, volume, weyl_constant};
//!
//! let m = CuspEdgeModel::new(1, vec![3.0], 0.5, CrossSection::Point).unwrap();
//! assert!((volume(&m) - std::f64::consts::PI / 32.0).abs() < 1e-12);
//! assert!((weyl_constant(&m) - 1.0 / 128.0).abs() < 1e-12);
//! ```

pub mod cli;
pub mod error;
pub mod hardy;
pub mod model;
pub mod quad;
pub mod saclass;
pub mod spectrum;
pub mod sturm;
pub mod weyl;

pub use error::{Error, Result};
