//! Certified complexity bounds for multiparameter polynomial flow averages,
//! with numerical checks on torus rotations and the Heisenberg nilflow.

pub mod polyfam;
pub mod complexity;
pub mod exec;
pub mod flows;
pub mod density;
