//! The angle inequality system and its exact feasibility test.
//!
//! Angles are external angles in units of π. A feasible point is an angle
//! certificate; an infeasible system comes with a Farkas witness over the
//! system's own constraints.

mod certificate;
mod fm;
mod system;

pub use certificate::{
    condition_slacks, preset_for, solve_knot, verify_certificate, verify_params, Certificate,
    KnotFeasibility, Params, Regime, Violation,
};
pub use fm::{
    fm_eliminate, solve, verify_farkas, FarkasCheck, FarkasError, FarkasWitness, Feasibility,
    SolveError,
};
pub use system::{
    alpha_var, beta_var, build_angle_system, build_knot_system, LinearConstraint, LinearSystem,
    Provenance, Relation, SystemError, VarId,
};
