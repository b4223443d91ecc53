//! Numerical toolkit for a seasonally forced herbivore-vegetation system.
//!
//! The model couples vegetation biomass `v` and herbivore biomass `h` through
//! a saturating intake of the biomass above an ungrazable reserve:
//!
//! ```text
//! dv/dt = v (a - b v) - c (v - rho) h / (beta + v)
//! dh/dt = h ( alpha (v - rho) / (beta + v) - R - gamma (beta + v) / (v - rho) )
//! ```
//!
//! with every coefficient an omega-periodic, piecewise-continuous function
//! of time (`a`, `b`, `alpha`, `beta`, `R` strictly positive on average;
//! `c`, `gamma`, `rho` possibly vanishing).  The crate provides:
//!
//! * [`coefficients`] - periodic coefficient values (constant + harmonics +
//!   step segments), arithmetic expressions over them, exact and quadrature
//!   averages, and extrema location;
//! * [`model`] - the vector field, its per-capita herbivore growth rate, and
//!   the reduction from field-measured parameters to the compact form above;
//! * [`integrate`] - adaptive Dormand-Prince and fixed-step Runge-Kutta
//!   integration with dense output, step clipping at coefficient
//!   discontinuities, and hard singularity/blow-up detection;
//! * [`analysis`] - the closed-form periodic logistic solution, Lyapunov
//!   diagnostics, empirical bounds, and the persistence / extinction /
//!   permanence / stability condition checkers;
//! * [`periodic`] - the period map, fixed-point (periodic orbit) location by
//!   damped Newton, monodromy matrices, and Floquet classification.

pub mod analysis;
pub mod coefficients;
pub mod error;
pub mod integrate;
pub mod model;
pub mod periodic;
pub mod quad;
pub mod report;

pub use analysis::{
    check_gas, check_herbivore_persistence, check_periodic_existence, check_permanence_iff,
    check_vegetation_persistence, lyapunov_w, lyapunov_x, upper_bounds, vstar, BoundsReport,
    ClosedFormLogistic,
};
pub use coefficients::{CoefExpr, Extrema, Harmonic, PeriodicCoefficient, Segment};
pub use error::{Error, Result};
pub use integrate::{integrate, flow_map, IntegratorConfig, Scheme, Trajectory};
pub use model::{percapita_h, RawParams, SimplifiedParams, State};
pub use periodic::{
    classify, find_fixed_point, floquet_multipliers, monodromy, periodic_orbit, poincare,
    FixedPointOptions, PeriodicOrbit, PoincareResult, Stability,
};
pub use report::ConditionReport;
