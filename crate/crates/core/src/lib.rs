//! Discrete exterior calculus solver for the Poisson equation on 2D
//! triangle meshes.
//!
//! The crate builds an oriented simplicial complex together with its
//! circumcentric dual, assembles the discrete Poisson system along three
//! independent routes (exterior-calculus operators, linear finite
//! elements, and the finite-volume box scheme), verifies that the
//! assembled systems agree to machine precision, and measures convergence
//! rates on manufactured solutions.
//!
//! Module map:
//!
//! * [`mesh`] — oriented triangle meshes: construction, validation,
//!   structured generators, file I/O.
//! * [`dual`] — circumcentric dual complex: circumcenters, signed dual
//!   edge lengths, box areas, well-centeredness audit.
//! * [`calculus`] — chains, cochains, boundary operators, exterior
//!   derivatives, diagonal Hodge stars.
//! * [`assembly`] — stiffness matrices and right-hand sides, Dirichlet
//!   elimination, entrywise system comparison.
//! * [`solver`] — conjugate gradients, energy and L2 error norms.
//! * [`harness`] — convergence studies, the equivalence fleet, CSV and
//!   SVG reporting.

pub mod assembly;
pub mod calculus;
pub mod dual;
pub mod geometry;
pub mod harness;
pub mod mesh;
pub mod solver;
pub mod sparse;

mod rng;

pub use assembly::{LinearSystem, MethodTag, ScalarField};
pub use calculus::Cochain;
pub use dual::DualComplex;
pub use geometry::{Point, QuadratureRule};
pub use mesh::TriangleMesh;
pub use solver::SolveReport;
pub use sparse::{IncidenceMatrix, SparseMatrix, SparseOperator};
