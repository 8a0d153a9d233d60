//! Taylor–Hood P2/P1 finite elements for the Stokes, pressure-Poisson and
//! ε-Stokes problems on rectangles, with the tooling needed to measure how
//! the ε-Stokes solution approaches the other two.

pub mod assembly;
pub mod asymptotics;
pub mod config;
pub mod dofs;
pub mod elements;
pub mod error;
pub mod experiment;
pub mod expr;
pub mod functions;
pub mod mesh;
pub mod norms;
pub mod sparse;
pub mod systems;

pub use error::{Error, Result};
