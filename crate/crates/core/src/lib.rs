pub mod builder;
pub mod geometry;
pub mod ode;
pub mod rational;
pub mod verifier;
