//! Radially symmetric kinetic chemotaxis simulator.
//!
//! The model is a two-dimensional kinetic transport equation on a bounded
//! velocity set, coupled to an attractive chemical field: cells reorient
//! toward the chemical gradient at a rate proportional to `(v . grad S)_+`,
//! and the field solves `-lap S + alpha S = rho`. Under radial symmetry the
//! phase space reduces to `(r, w, phi)` with `phi` the angle between position
//! and velocity, which is what the solver discretizes.
//!
//! The crate provides
//! * the reduced finite-volume solver and its diagnostics (moments, mixed
//!   norms, virial tracking, blow-up detection),
//! * the critical-mass formulas and the singular supersolution machinery used
//!   to monitor small-mass runs,
//! * the parabolic (drift-diffusion) scaling, a radial Keller-Segel limit
//!   solver and convergence studies,
//! * independent brute-force oracles (a coarse Cartesian phase-space solver,
//!   quadrature cross-checks, free-transport dispersion tests).
//!
//! Core numerics are generic over the scalar type via [`real::Real`];
//! `f64` aliases are exported at the crate root.

pub mod chemfield;
pub mod comparison;
pub mod config;
pub mod diagnostics;
pub mod error;
pub mod geom;
pub mod io;
pub mod kinsolver;
pub mod oracles;
pub mod parabolic;
pub mod quadrature;
pub mod real;
pub mod runner;
pub mod thresholds;
pub mod velocity;

pub use error::{KinchemError, Result};
pub use real::Real;

// Concrete f64 aliases; the CLI and the test suites work with these.
pub use chemfield::{ChemField64, RadialDensity64};
pub use comparison::Supersolution64;
pub use diagnostics::DiagnosticsRecord64;
pub use kinsolver::{PhaseGrid64, PhaseState64, SolverParams64};
pub use oracles::CartesianState64;
pub use velocity::VelocitySet64;
