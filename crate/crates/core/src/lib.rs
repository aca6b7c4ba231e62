//! Solvers and verification tools for the scalar conservation law
//!
//! u_t + f(x,u)_x = 0,    f(x,u) = f_l(u) for x < 0,  f_r(u) for x > 0,
//!
//! where the flux changes across the fixed interface x = 0. Admissibility of
//! the interface jump is encoded by an *admissibility germ*: a set of
//! stationary trace pairs (u_l, u_r) declared admissible a priori. The crate
//! provides
//!
//! - exact geometry on piecewise-linear fluxes ([`flux`]),
//! - the germ catalog and germ algebra: duals, closures, L1-dissipativity
//!   and completeness probes ([`germ`]),
//! - exact classical and interface Riemann solvers ([`riemann`]),
//! - the Godunov-interface monotone finite-volume scheme ([`scheme`]),
//! - viscous regularizations and standing-wave profiles ([`viscous`]),
//! - residual-based verification of the dissipativity inequalities
//!   ([`verify`]).
//!
//! All fluxes are piecewise linear with explicit breakpoints, which makes
//! Godunov fluxes, oscillations, level sets and germ membership exact finite
//! computations. Analytic fluxes enter through chord sampling.

pub mod flux;
pub mod germ;
pub mod riemann;
pub mod scheme;
pub mod verify;
pub mod viscous;

pub use flux::{FluxError, FluxPair, Interval, LevelSetItem, PiecewiseLinearFlux};
pub use germ::{GermError, GermKind, GermSample, GermSpec, StatePair};
pub use riemann::{InterfaceSolution, RiemannError, RiemannFan, Side, Wave, WaveKind};
pub use scheme::{BulkFlux, GridSolution, InitialData, MeshConfig, SchemeError};
pub use verify::{ResidualReport, TestBump, VerifyError};
pub use viscous::{Profile, ProfileVerdict, ViscosityPair, ViscousError};

/// Absolute tolerance for state-space comparisons (domain membership,
/// level matching, pair identity).
pub const STATE_TOL: f64 = 1e-12;

/// Default Rankine-Hugoniot tolerance, in flux units.
pub const RH_TOL: f64 = 1e-9;

/// Tolerance on wave speeds; zero-speed waves are kept inside the fans.
pub const SPEED_TOL: f64 = 1e-9;
