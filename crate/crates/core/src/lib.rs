//! Singular periodic solutions, bifurcation branches and forward simulation
//! for the scalar DDE
//!
//! ```text
//! eps u'(t) = -u(t) - K1 u(t - a1 - c u(t)) - K2 u(t - a2 - c u(t))
//! ```
//!
//! with two linearly state-dependent delays. The `algebra`, `profiles` and
//! `branch` modules construct and verify the exact eps = 0 solutions and
//! their fold/cusp structure in the gain `K1`; `simulator` and `analysis`
//! integrate the eps > 0 equation and extract orbit metrics so the singular
//! predictions can be checked against direct simulation.

pub mod algebra;
pub mod analysis;
pub mod branch;
pub mod cli;
pub mod export;
pub mod profiles;
pub mod simulator;

pub use algebra::{
    amplitude, construct, BranchIndex, ModelParams, RootSet, SingularSolution, SolutionKind,
};
pub use analysis::{compare_to_singular, extract, sweep, OrbitMetrics, SweepResult};
pub use branch::{
    assemble, bimodal_leg, cusp_locus, unimodal_legs, BifurcationPoint, Branch, Leg,
};
pub use profiles::{
    one_delay_solution, verify, ParametricProfile, Parametrisation, VerificationReport,
};
pub use simulator::{integrate, HistorySpec, StepControl, Trajectory};
