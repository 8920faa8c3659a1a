//! The scalar equations in `τ`: Ricci-Hessian coefficients, the system for
//! the horizontal Hessian eigenvalue `φ`, its first-order reduction, the
//! elimination that decides when only `φ = 0` survives, and the closed-form
//! solution family.

mod closed_form;
mod params;
mod scalar;
mod systems;

pub use closed_form::{BranchSigns, ConstantPhi, FnPhi, PhiProfile, PhiSolution};
pub use params::{ExactParams, SkrParams, BRANCH_TOL};
pub use scalar::{
    alpha, alpha_degeneracy_roots, alpha_derivative, dtau_dtau_coefficient, f_from_u, gamma_from_phi, mek_residual,
    rh_coefficients, u_from_f, DegeneracyRoots, Taylor2,
};
pub use systems::{
    decide, elimination_quantities, elimination_quotient, expected_f_system_x, expected_p_solution_branch, expected_x,
    f_system, first_order_reduction, homogeneous_log_derivative, nonexistence_decision, phi_system, phi_system_exact,
    solsys_system, Decision, FSystem, LinearOde1, LinearOde2, Reduction, Residual, Verdict,
};

use thiserror::Error;

use crate::rational::RationalError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OdeError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("parameters are off the solution family: {0}")]
    NotSolutionBranch(String),
    #[error("parameter {0} must be an exact rational for symbolic computation")]
    NotExact(String),
    #[error("pole at {at} (tau = {tau})")]
    Pole { at: String, tau: f64 },
    #[error("domain error: {0}")]
    Domain(String),
    #[error("branch violation: {0}")]
    Branch(String),
    #[error("phi changes sign: phi({tau}) = {value}")]
    SignViolation { tau: f64, value: f64 },
    #[error("combination still contains a second-derivative term")]
    NotFirstOrder,
    #[error("leading coefficient of the first-order equation vanishes identically")]
    LeadingCoefficientZero,
    #[error(transparent)]
    Rational(#[from] RationalError),
}
