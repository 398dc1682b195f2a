//! hp-adaptive finite elements for the 3D Poisson problem on hexahedral
//! meshes: exact-sequence shape functions, constrained approximation on
//! 1-irregular meshes, static condensation, Galerkin and DPG (primal and
//! ultraweak) discretizations, residual-driven adaptivity and VTU output.

pub mod adapt;
pub mod assembly;
pub mod conformity;
pub mod dpg;
pub mod error;
pub mod exec;
pub mod geometry;
pub mod masterel;
pub mod mesh;
pub mod physics;
pub mod poisson;
pub mod vtu;

pub use error::{Error, Result};
