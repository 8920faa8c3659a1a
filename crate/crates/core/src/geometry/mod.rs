//! Coordinate-chart tensor calculus driven by second-order jets.
//!
//! Index conventions: `R^a_{bcd} = ∂_c Γ^a_{db} − ∂_d Γ^a_{cb} + Γ^a_{ce}Γ^e_{db} − Γ^a_{de}Γ^e_{cb}`
//! and `r_{bd} = R^a_{bad}`, so the unit round sphere has `r = g`.

mod chart;
pub mod fixtures;
mod jet;
mod local;

pub use chart::{
    conformal_scale, field_derivative_defect, metric_derivative_defect, ChartPoint, ComplexStructure, ConformalChart,
    FnChart, FnField, MetricChart, ScalarField, StandardComplexStructure,
};
pub use jet::{Jet2, MAX_DIM};
pub use local::{
    christoffel, grad_norm_sq, hessian, kahler_residual, killing_residual, laplacian, positive_definite_pivot, ricci,
    Christoffel, LocalGeometry, PIVOT_THRESHOLD,
};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("point outside the chart domain")]
    OutsideDomain,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("metric is not positive definite (pivot {pivot:e})")]
    NotPositiveDefinite { pivot: f64 },
    #[error("metric components are not symmetric")]
    NotSymmetric,
    #[error("metric is not invertible")]
    Singular,
    #[error("non-finite coordinate or component")]
    NonFinite,
    #[error("conformal factor vanishes on the requested domain")]
    ZeroConformalFactor,
}
