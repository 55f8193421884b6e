//! Discontinuous Galerkin solvers for the Ostrovsky-Vakhnenko equation
//!
//! The equation models short-wave perturbations in a rotating fluid:
//!
//! ```text
//! (u_t + u u_x)_x + gamma * u = 0.
//! ```
//!
//! Writing v for the zero-mean primitive of u turns it into the split system
//! u_t + (u^2 / 2)_x + gamma * v = 0, v_x = u, which is what the solvers in
//! this crate discretize. Three families are provided:
//!
//! * an energy-stable scheme with upwind fluxes for v ([`ov`]), in a variant
//!   that solves a global system for v and one that integrates u exactly,
//! * a Hamiltonian-conserving scheme with central fluxes ([`ov`]),
//! * schemes for the hodograph-transformed coupled-dispersion form of the
//!   equation ([`cd`]), which resolve loop and cuspon solitons that are
//!   multivalued in physical coordinates.
//!
//! Time stepping is third-order strong-stability-preserving Runge-Kutta
//! ([`time`]), optionally combined with a TVB minmod limiter ([`limiter`]).
//! Closed-form reference solutions live in [`exact`], experiment drivers and
//! output writers in [`runner`] and [`diagnostics`], and the `ovdg` binary
//! exposes everything on the command line.
//!
//! # Example
//!
//! ```
//! use std::sync::Arc;
//! use ovdg::{build_mesh, l2_project};
//! use ovdg::ov::{OvConfig, OvOperator, OvScheme};
//!
//! let mesh = Arc::new(build_mesh(0.0, std::f64::consts::TAU, 16).unwrap());
//! let u = l2_project(&mesh, 2, f64::sin).unwrap();
//! let op = OvOperator::new(mesh, 2, OvConfig::periodic(OvScheme::EnergyDg, 1.0)).unwrap();
//! let du = op.rhs(&u, 0.0).unwrap();
//! // sin has zero mean, so the semi-discrete energy law applies: d/dt ||u||^2 <= 0.
//! let dissipation: f64 = u.coeffs().iter().zip(du.coeffs()).map(|(a, b)| a * b).sum();
//! assert!(dissipation <= 1e-12);
//! ```

pub mod basis;
pub mod cd;
pub mod config;
pub mod diagnostics;
pub mod error;
pub mod exact;
pub mod field;
pub mod limiter;
pub mod mesh;
pub mod ov;
pub mod quad;
pub mod runner;
pub mod time;

pub use error::{OvdgError, Result};
pub use field::{error_norms, l2_project, project_onesided, traces, DGField};
pub use mesh::{build_mesh, Mesh1D};
