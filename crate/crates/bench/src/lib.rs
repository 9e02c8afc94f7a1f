//! Shared fixtures for the criterion benchmarks.

use tridec::dual::DualComplex;
use tridec::mesh::{generate_perturbed_mesh, generate_square_mesh, Pattern, TriangleMesh};

/// Crisscross benchmark mesh with `4 n^2` triangles.
pub fn crisscross(n: usize) -> TriangleMesh {
    generate_square_mesh(n, Pattern::Crisscross).expect("valid benchmark mesh")
}

/// Perturbed diagonal benchmark mesh with obtuse triangles.
pub fn perturbed(n: usize) -> TriangleMesh {
    generate_perturbed_mesh(n, 0.3, 1).expect("valid benchmark mesh")
}

pub fn dual_of(mesh: &TriangleMesh) -> DualComplex {
    DualComplex::build(mesh).expect("valid dual")
}
