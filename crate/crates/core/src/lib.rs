//! Numerical toolkit for the Koiso-Cao shrinking Kähler-Ricci soliton on
//! CP² # C̄P² and its U(2)-invariant Yamabe equation.
//!
//! The pipeline has three stages:
//!
//! 1. [`soliton`] solves the cohomogeneity-one profile equation by shooting:
//!    bisection on the first-minimum value pins the soliton constant, and the
//!    root of Cao's closed-form function provides an independent check.
//! 2. [`geometry`] evaluates everything the metric determines along the
//!    profile: warp function, potential, Ricci components, scalar curvature
//!    and its derivative, the radial Laplacian drift, volume weight, and the
//!    Yamabe quotient of radial test functions.
//! 3. [`yamabe`] solves the radial Yamabe boundary value problem by
//!    double shooting from Taylor seeds at the two singular endpoints, and
//!    scans the left boundary value to witness uniqueness of the solution.
//!
//! Everything rides on [`ode`], a Dormand-Prince 5(4) integrator with dense
//! output and event location.

pub mod geometry;
pub mod ode;
pub mod soliton;
pub mod yamabe;

pub use geometry::{CurvatureSample, Geometry, GeometryError, RadialFunction};
pub use ode::{
    EventDirection, EventSpec, FixedScheme, IntegratorConfig, OdeError, Trajectory,
};
pub use soliton::{
    C0Search, MinimumRecord, ProfilePoint, SolitonError, SolitonParams, SolitonProfile,
};
pub use yamabe::{
    ScanRecord, ShootingConfig, SolutionSample, YamabeError, YamabeProblem, YamabeSolution,
};
