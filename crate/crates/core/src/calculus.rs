//! Discrete exterior calculus kernel: chains, cochains, boundary
//! operators, exterior derivatives, and the diagonal Hodge stars.
//!
//! Boundary operators and derivatives are integer matrices
//! ([`IncidenceMatrix`]), so identities like the boundary of a boundary
//! vanishing hold exactly. Hodge stars are real diagonal operators built
//! from the circumcentric dual.

use thiserror::Error;

use crate::dual::DualComplex;
use crate::mesh::TriangleMesh;
use crate::sparse::{IncidenceMatrix, SparseOperator};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CalculusError {
    #[error("expected a vector of length {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("cochain degree must be 0, 1, or 2, got {degree}")]
    InvalidDegree { degree: u8 },
}

/// Which cell complex a cochain lives on.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ComplexSide {
    Primal,
    Dual,
}

/// Real-valued cochain of degree `k` on the primal or dual complex.
///
/// Dual cells are indexed by their primal generators, so a dual
/// `k`-cochain has one value per primal `(2-k)`-simplex.
#[derive(Clone, Debug, PartialEq)]
pub struct Cochain {
    pub degree: u8,
    pub side: ComplexSide,
    pub values: Vec<f64>,
}

fn simplex_count(mesh: &TriangleMesh, degree: u8) -> Result<usize, CalculusError> {
    match degree {
        0 => Ok(mesh.n_vertices()),
        1 => Ok(mesh.n_edges()),
        2 => Ok(mesh.n_triangles()),
        d => Err(CalculusError::InvalidDegree { degree: d }),
    }
}

impl Cochain {
    pub fn primal(
        mesh: &TriangleMesh,
        degree: u8,
        values: Vec<f64>,
    ) -> Result<Self, CalculusError> {
        let expected = simplex_count(mesh, degree)?;
        if values.len() != expected {
            return Err(CalculusError::DimensionMismatch {
                expected,
                found: values.len(),
            });
        }
        Ok(Self {
            degree,
            side: ComplexSide::Primal,
            values,
        })
    }

    pub fn dual(mesh: &TriangleMesh, degree: u8, values: Vec<f64>) -> Result<Self, CalculusError> {
        if degree > 2 {
            return Err(CalculusError::InvalidDegree { degree });
        }
        let expected = simplex_count(mesh, 2 - degree)?;
        if values.len() != expected {
            return Err(CalculusError::DimensionMismatch {
                expected,
                found: values.len(),
            });
        }
        Ok(Self {
            degree,
            side: ComplexSide::Dual,
            values,
        })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Bilinear pairing of a cochain with an integer chain.
pub fn evaluate(cochain: &Cochain, chain: &[i32]) -> Result<f64, CalculusError> {
    if chain.len() != cochain.len() {
        return Err(CalculusError::DimensionMismatch {
            expected: cochain.len(),
            found: chain.len(),
        });
    }
    Ok(chain
        .iter()
        .zip(&cochain.values)
        .map(|(&a, &w)| a as f64 * w)
        .sum())
}

/// First boundary operator (N0 x N1): the column of edge `(a, b)` holds
/// -1 at the tail `a` and +1 at the head `b`.
pub fn boundary_1(mesh: &TriangleMesh) -> IncidenceMatrix {
    let mut triplets = Vec::with_capacity(2 * mesh.n_edges());
    for edge in mesh.edges() {
        let (a, b) = edge.endpoints;
        triplets.push((a, edge.id, -1));
        triplets.push((b, edge.id, 1));
    }
    IncidenceMatrix::from_triplets(mesh.n_vertices(), mesh.n_edges(), triplets)
        .expect("indices are in range by construction")
}

/// Second boundary operator (N1 x N2): the column of a triangle holds +1
/// for each edge the counterclockwise loop traverses in its canonical
/// (low-to-high) direction and -1 otherwise.
pub fn boundary_2(mesh: &TriangleMesh) -> IncidenceMatrix {
    let mut triplets = Vec::with_capacity(3 * mesh.n_triangles());
    for tri in mesh.triangles() {
        for p in 0..3 {
            let a = tri.vertices[(p + 1) % 3];
            let b = tri.vertices[(p + 2) % 3];
            let sign = if a < b { 1 } else { -1 };
            triplets.push((tri.edge_ids[p], tri.id, sign));
        }
    }
    IncidenceMatrix::from_triplets(mesh.n_edges(), mesh.n_triangles(), triplets)
        .expect("indices are in range by construction")
}

/// Discrete exterior derivative on primal 0-cochains: the transpose of
/// the first boundary operator, so `(D0 u)_e = u_head - u_tail`.
pub fn derivative_0(mesh: &TriangleMesh) -> IncidenceMatrix {
    boundary_1(mesh).transpose()
}

/// Discrete exterior derivative on primal 1-cochains: the transpose of
/// the second boundary operator.
pub fn derivative_1(mesh: &TriangleMesh) -> IncidenceMatrix {
    boundary_2(mesh).transpose()
}

/// Exterior derivative on dual 1-cochains (N0 x N1).
///
/// The dual orientation induced by the primal one carries a sign:
/// this operator equals minus the transpose of [`derivative_0`].
pub fn dual_derivative_1(mesh: &TriangleMesh) -> IncidenceMatrix {
    -&derivative_0(mesh).transpose()
}

/// Diagonal Hodge star on primal 1-cochains (N1 x N1): the entry of an
/// edge is the signed dual/primal length ratio summed over its adjacent
/// triangles.
pub fn hodge_star_1(mesh: &TriangleMesh, dual: &DualComplex) -> SparseOperator {
    debug_assert_eq!(mesh.n_edges(), dual.edge_dual_ratios().len());
    SparseOperator::diagonal(dual.edge_dual_ratios())
}

/// Diagonal Hodge star on primal 0-cochains (N0 x N0): the entry of a
/// vertex is its box area.
pub fn hodge_star_0(mesh: &TriangleMesh, dual: &DualComplex) -> SparseOperator {
    debug_assert_eq!(mesh.n_vertices(), dual.box_areas().len());
    SparseOperator::diagonal(dual.box_areas())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dual::DualComplex;
    use crate::geometry::Point;
    use crate::mesh::{build_mesh, generate_perturbed_mesh, generate_square_mesh, Pattern};
    use crate::rng;

    fn single_triangle() -> TriangleMesh {
        build_mesh(
            vec![
                Point::new(0.0, 0.0),
                Point::new(1.0, 0.0),
                Point::new(0.0, 1.0),
            ],
            vec![[0, 1, 2]],
        )
        .unwrap()
    }

    #[test]
    fn boundary_2_of_single_triangle() {
        // Edges in canonical order: (0,1), (0,2), (1,2); the boundary of
        // [0,1,2] is +[1,2] - [0,2] + [0,1].
        let mesh = single_triangle();
        let b2 = boundary_2(&mesh);
        assert_eq!(b2.rows(), 3);
        assert_eq!(b2.cols(), 1);
        assert_eq!(b2.get(mesh.edge_id(0, 1).unwrap(), 0), 1);
        assert_eq!(b2.get(mesh.edge_id(0, 2).unwrap(), 0), -1);
        assert_eq!(b2.get(mesh.edge_id(1, 2).unwrap(), 0), 1);
    }

    #[test]
    fn boundary_1_columns_are_head_minus_tail() {
        let mesh = single_triangle();
        let b1 = boundary_1(&mesh);
        let e01 = mesh.edge_id(0, 1).unwrap();
        assert_eq!(b1.get(0, e01), -1);
        assert_eq!(b1.get(1, e01), 1);
        for e in 0..mesh.n_edges() {
            let col_sum: i32 = (0..mesh.n_vertices()).map(|v| b1.get(v, e)).sum();
            assert_eq!(col_sum, 0);
            let nnz = (0..mesh.n_vertices())
                .filter(|&v| b1.get(v, e) != 0)
                .count();
            assert_eq!(nnz, 2);
        }
    }

    #[test]
    fn boundary_of_boundary_vanishes() {
        for mesh in [
            generate_square_mesh(3, Pattern::Crisscross).unwrap(),
            generate_perturbed_mesh(5, 0.3, 4).unwrap(),
        ] {
            let composed = boundary_1(&mesh).matmul(&boundary_2(&mesh));
            assert_eq!(
                composed.nnz(),
                0,
                "boundary composition must vanish exactly"
            );
            let d = derivative_1(&mesh).matmul(&derivative_0(&mesh));
            assert_eq!(d.nnz(), 0);
        }
    }

    #[test]
    fn shared_edge_gets_opposite_signs() {
        let mesh = build_mesh(
            vec![
                Point::new(0.0, 0.0),
                Point::new(1.0, 0.0),
                Point::new(1.0, 1.0),
                Point::new(0.0, 1.0),
            ],
            vec![[0, 1, 2], [0, 2, 3]],
        )
        .unwrap();
        let b2 = boundary_2(&mesh);
        let diag = mesh.edge_id(0, 2).unwrap();
        assert_eq!(b2.get(diag, 0) + b2.get(diag, 1), 0);
        assert_ne!(b2.get(diag, 0), 0);
    }

    #[test]
    fn derivative_0_differences_and_constants() {
        let mesh = generate_square_mesh(2, Pattern::Diagonal).unwrap();
        let d0 = derivative_0(&mesh);
        let u: Vec<f64> = (0..mesh.n_vertices())
            .map(|v| (v * v) as f64 * 0.25)
            .collect();
        let du = d0.apply_real(&u);
        for edge in mesh.edges() {
            let (a, b) = edge.endpoints;
            assert_eq!(du[edge.id], u[b] - u[a]);
        }
        let constant = vec![3.25; mesh.n_vertices()];
        assert!(d0.apply_real(&constant).iter().all(|&x| x == 0.0));
    }

    #[test]
    fn dual_derivative_is_minus_transpose() {
        let mesh = generate_square_mesh(2, Pattern::Crisscross).unwrap();
        let dd1 = dual_derivative_1(&mesh);
        assert_eq!(dd1.rows(), mesh.n_vertices());
        assert_eq!(dd1.cols(), mesh.n_edges());
        let d0t = derivative_0(&mesh).transpose();
        for (r, c, v) in dd1.entries() {
            assert_eq!(v, -d0t.get(r, c));
        }
        // One +-1 per incident edge in each row.
        for v in 0..mesh.n_vertices() {
            let incident = mesh
                .edges()
                .iter()
                .filter(|e| e.endpoints.0 == v || e.endpoints.1 == v)
                .count();
            assert_eq!(dd1.row(v).count(), incident);
            assert!(dd1.row(v).all(|(_, s)| s == 1 || s == -1));
        }
    }

    #[test]
    fn hodge_star_1_on_reference_meshes() {
        let h = 3.0f64.sqrt() / 2.0;
        let pair = build_mesh(
            vec![
                Point::new(0.0, 0.0),
                Point::new(1.0, 0.0),
                Point::new(0.5, h),
                Point::new(0.5, -h),
            ],
            vec![[0, 1, 2], [0, 3, 1]],
        )
        .unwrap();
        let dual = DualComplex::build(&pair).unwrap();
        let star = hodge_star_1(&pair, &dual);
        let shared = pair.edge_id(0, 1).unwrap();
        assert!((star.get(shared, shared) - 1.0 / 3.0f64.sqrt()).abs() < 1e-14);

        // Right triangles of the diagonal pattern: the hypotenuse entry
        // vanishes.
        let mesh = generate_square_mesh(2, Pattern::Diagonal).unwrap();
        let dual = DualComplex::build(&mesh).unwrap();
        let star = hodge_star_1(&mesh, &dual);
        let hyp = mesh.edge_id(0, 4).unwrap();
        assert_eq!(star.get(hyp, hyp), 0.0);
    }

    #[test]
    fn hodge_star_0_traces_domain_area() {
        let mesh = generate_square_mesh(1, Pattern::Crisscross).unwrap();
        let dual = DualComplex::build(&mesh).unwrap();
        let star = hodge_star_0(&mesh, &dual);
        assert!((star.get(4, 4) - 0.5).abs() < 1e-14);
        let trace: f64 = (0..mesh.n_vertices()).map(|v| star.get(v, v)).sum();
        assert!((trace - 1.0).abs() < 1e-12);
    }

    #[test]
    fn star_composed_with_its_inverse_is_identity_when_nonzero() {
        let h = 3.0f64.sqrt() / 2.0;
        let mesh = build_mesh(
            vec![
                Point::new(0.0, 0.0),
                Point::new(1.0, 0.0),
                Point::new(0.5, h),
                Point::new(0.5, -h),
            ],
            vec![[0, 1, 2], [0, 3, 1]],
        )
        .unwrap();
        let dual = DualComplex::build(&mesh).unwrap();
        assert!((0..mesh.n_triangles()).all(|t| dual.is_well_centered(t)));
        let entries = dual.edge_dual_ratios();
        assert!(entries.iter().all(|&d| d != 0.0));
        let star = hodge_star_1(&mesh, &dual);
        let inverse =
            SparseOperator::diagonal(&entries.iter().map(|&d| 1.0 / d).collect::<Vec<_>>());
        let product = inverse.matmul(&star);
        for e in 0..mesh.n_edges() {
            assert!((product.get(e, e) - 1.0).abs() < 1e-14);
        }
        assert_eq!(product.nnz(), mesh.n_edges());
    }

    #[test]
    fn evaluate_pairs_linearly() {
        let mesh = single_triangle();
        let omega = Cochain::primal(&mesh, 1, vec![2.0, -1.0, 0.5]).unwrap();
        let mut chain = vec![0i32; 3];
        chain[1] = 1;
        assert_eq!(evaluate(&omega, &chain).unwrap(), -1.0);
        // Linearity in the chain argument.
        let c1 = [1, 2, -1];
        let c2 = [0, 3, 2];
        let sum: Vec<i32> = c1.iter().zip(&c2).map(|(a, b)| a + b).collect();
        let lhs = evaluate(&omega, &sum).unwrap();
        let rhs = evaluate(&omega, &c1).unwrap() + evaluate(&omega, &c2).unwrap();
        assert!((lhs - rhs).abs() < 1e-15);
    }

    #[test]
    fn evaluate_rejects_wrong_length() {
        let mesh = single_triangle();
        let omega = Cochain::primal(&mesh, 0, vec![1.0, 2.0, 3.0]).unwrap();
        assert_eq!(
            evaluate(&omega, &[1, 2]).unwrap_err(),
            CalculusError::DimensionMismatch {
                expected: 3,
                found: 2
            }
        );
    }

    #[test]
    fn cochain_lengths_validate_against_mesh() {
        let mesh = generate_square_mesh(1, Pattern::Crisscross).unwrap();
        assert!(Cochain::primal(&mesh, 1, vec![0.0; 8]).is_ok());
        assert!(Cochain::primal(&mesh, 1, vec![0.0; 7]).is_err());
        // A dual 2-cochain is indexed by primal vertices.
        assert!(Cochain::dual(&mesh, 2, vec![0.0; 5]).is_ok());
        assert!(Cochain::dual(&mesh, 0, vec![0.0; 4]).is_ok());
        assert!(Cochain::primal(&mesh, 3, vec![]).is_err());
    }

    #[test]
    fn stokes_pairing_identity_on_random_chains() {
        let mesh = generate_square_mesh(2, Pattern::Crisscross).unwrap();
        let d0 = derivative_0(&mesh);
        let b1 = boundary_1(&mesh);
        let mut rng = rng::seeded(31);
        for _ in 0..50 {
            let u: Vec<f64> = (0..mesh.n_vertices())
                .map(|_| rng::uniform_sym(&mut rng))
                .collect();
            let chain: Vec<i32> = (0..mesh.n_edges())
                .map(|_| (rng::uniform_sym(&mut rng) * 3.0) as i32)
                .collect();
            let du = Cochain::primal(&mesh, 1, d0.apply_real(&u)).unwrap();
            let lhs = evaluate(&du, &chain).unwrap();
            // Boundary of the chain, computed in integer arithmetic.
            let boundary: Vec<i32> = (0..mesh.n_vertices())
                .map(|v| b1.row(v).map(|(e, s)| s * chain[e]).sum())
                .collect();
            let u_cochain = Cochain::primal(&mesh, 0, u).unwrap();
            let rhs = evaluate(&u_cochain, &boundary).unwrap();
            assert!((lhs - rhs).abs() < 1e-13, "stokes pairing: {lhs} vs {rhs}");
        }
    }
}
