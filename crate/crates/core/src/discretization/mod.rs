//! Graded meshes, P1 Galerkin assembly and the semi-discrete generator.

mod assembly;
mod generator;
mod mesh;
mod tridiag;

pub use assembly::{assemble_system, DiscreteSystem, QuadPoint, QuadratureTable};
pub use generator::{assemble_generator, Generator, DENSE_CAP};
pub use mesh::{auto_grading, build_mesh, Mesh};
pub use tridiag::{SymTridiag, TridiagCholesky};
