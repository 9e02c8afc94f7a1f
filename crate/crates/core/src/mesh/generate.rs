//! Structured unit-square mesh generators.

use std::str::FromStr;

use crate::geometry::{signed_area_2x, Point};
use crate::rng;

use super::{build_mesh, MeshError, TriangleMesh};

/// Subdivision pattern for the unit-square generators.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Pattern {
    /// Each grid cell split by its (+1, +1) diagonal into 2 triangles.
    Diagonal,
    /// Each grid cell split through its center into 4 triangles.
    Crisscross,
}

impl FromStr for Pattern {
    type Err = MeshError;
    fn from_str(s: &str) -> Result<Self, MeshError> {
        match s {
            "diagonal" => Ok(Pattern::Diagonal),
            "crisscross" => Ok(Pattern::Crisscross),
            other => Err(MeshError::InvalidParameter(format!(
                "unknown pattern '{other}' (expected 'diagonal' or 'crisscross')"
            ))),
        }
    }
}

impl std::fmt::Display for Pattern {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Pattern::Diagonal => write!(f, "diagonal"),
            Pattern::Crisscross => write!(f, "crisscross"),
        }
    }
}

/// Mesh of the unit square with `n x n` cells.
///
/// Vertex order is deterministic: the (n+1) x (n+1) grid row-major first,
/// then (for the crisscross pattern) the cell centers row-major.
pub fn generate_square_mesh(n: usize, pattern: Pattern) -> Result<TriangleMesh, MeshError> {
    if n == 0 {
        return Err(MeshError::InvalidParameter(
            "subdivision count must be at least 1".into(),
        ));
    }
    let (positions, triples) = square_grid(n, pattern);
    let mesh = build_mesh(positions, triples).expect("structured mesh is valid");
    debug_assert_eq!(mesh.euler_characteristic(), 1);
    Ok(mesh)
}

fn square_grid(n: usize, pattern: Pattern) -> (Vec<Point>, Vec<[usize; 3]>) {
    let grid = |i: usize, j: usize| j * (n + 1) + i;
    let mut positions = Vec::new();
    for j in 0..=n {
        for i in 0..=n {
            positions.push(Point::new(i as f64 / n as f64, j as f64 / n as f64));
        }
    }
    let mut triples = Vec::new();
    match pattern {
        Pattern::Diagonal => {
            for j in 0..n {
                for i in 0..n {
                    let a = grid(i, j);
                    let b = grid(i + 1, j);
                    let c = grid(i + 1, j + 1);
                    let d = grid(i, j + 1);
                    triples.push([a, b, c]);
                    triples.push([a, c, d]);
                }
            }
        }
        Pattern::Crisscross => {
            let center_base = (n + 1) * (n + 1);
            for j in 0..n {
                for i in 0..n {
                    positions.push(Point::new(
                        (i as f64 + 0.5) / n as f64,
                        (j as f64 + 0.5) / n as f64,
                    ));
                    let m = center_base + j * n + i;
                    let a = grid(i, j);
                    let b = grid(i + 1, j);
                    let c = grid(i + 1, j + 1);
                    let d = grid(i, j + 1);
                    triples.push([a, b, m]);
                    triples.push([b, c, m]);
                    triples.push([c, d, m]);
                    triples.push([d, a, m]);
                }
            }
        }
    }
    (positions, triples)
}

/// Diagonal-pattern mesh whose interior grid vertices are displaced by a
/// seeded pseudorandom offset of magnitude at most `amplitude / n`.
///
/// Boundary vertices stay fixed and every triangle keeps a strictly
/// positive orientation: offsets that would flip or flatten an incident
/// triangle are redrawn a bounded number of times and then dropped.
pub fn generate_perturbed_mesh(
    n: usize,
    amplitude: f64,
    seed: u64,
) -> Result<TriangleMesh, MeshError> {
    if n == 0 {
        return Err(MeshError::InvalidParameter(
            "subdivision count must be at least 1".into(),
        ));
    }
    if !(0.0..0.49).contains(&amplitude) {
        return Err(MeshError::InvalidParameter(format!(
            "perturbation amplitude must lie in [0, 0.49), got {amplitude}"
        )));
    }
    let (mut positions, triples) = square_grid(n, Pattern::Diagonal);
    if amplitude > 0.0 && n >= 2 {
        let h = 1.0 / n as f64;
        let radius = amplitude * h;
        // Minimum twice-area an incident triangle may shrink to; well away
        // from the degeneracy threshold of `build_mesh`.
        let area_floor = 1e-6 * h * h;
        let mut incident: Vec<Vec<usize>> = vec![Vec::new(); positions.len()];
        for (t, tri) in triples.iter().enumerate() {
            for &v in tri {
                incident[v].push(t);
            }
        }
        let mut rng = rng::seeded(seed);
        for j in 1..n {
            for i in 1..n {
                let v = j * (n + 1) + i;
                let original = positions[v];
                let mut accepted = false;
                'attempts: for _ in 0..32 {
                    let offset = match draw_in_disk(&mut rng, radius) {
                        Some(o) => o,
                        None => return Err(MeshError::PerturbationFailed { seed, vertex: v }),
                    };
                    positions[v] = original + offset;
                    for &t in &incident[v] {
                        let [a, b, c] = triples[t];
                        if signed_area_2x(positions[a], positions[b], positions[c]) <= area_floor {
                            continue 'attempts;
                        }
                    }
                    accepted = true;
                    break;
                }
                if !accepted {
                    positions[v] = original;
                }
            }
        }
    }
    let mesh = build_mesh(positions, triples)?;
    debug_assert_eq!(mesh.euler_characteristic(), 1);
    Ok(mesh)
}

/// Rejection-sample a point of the closed disk of the given radius.
fn draw_in_disk(rng: &mut rand_chacha::ChaCha8Rng, radius: f64) -> Option<Point> {
    for _ in 0..64 {
        let dx = rng::uniform_sym(rng) * radius;
        let dy = rng::uniform_sym(rng) * radius;
        if dx * dx + dy * dy <= radius * radius {
            return Some(Point::new(dx, dy));
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_counts() {
        let mesh = generate_square_mesh(2, Pattern::Diagonal).unwrap();
        assert_eq!(mesh.n_vertices(), 9);
        assert_eq!(mesh.n_triangles(), 8);
        assert_eq!(mesh.euler_characteristic(), 1);
    }

    #[test]
    fn crisscross_counts_and_interior_center() {
        let mesh = generate_square_mesh(1, Pattern::Crisscross).unwrap();
        assert_eq!(mesh.n_vertices(), 5);
        assert_eq!(mesh.n_triangles(), 4);
        assert!(!mesh.is_boundary_vertex(4));
        assert_eq!(mesh.n_interior_vertices(), 1);
    }

    #[test]
    fn diagonal_n1_has_no_interior_vertices() {
        let mesh = generate_square_mesh(1, Pattern::Diagonal).unwrap();
        assert_eq!(mesh.n_interior_vertices(), 0);
    }

    #[test]
    fn triangle_areas_tile_the_square() {
        for pattern in [Pattern::Diagonal, Pattern::Crisscross] {
            let mesh = generate_square_mesh(4, pattern).unwrap();
            assert!((mesh.total_area() - 1.0).abs() < 1e-12);
        }
        let mesh = generate_perturbed_mesh(6, 0.3, 7).unwrap();
        assert!((mesh.total_area() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_amplitude_matches_diagonal() {
        let a = generate_perturbed_mesh(3, 0.0, 42).unwrap();
        let b = generate_square_mesh(3, Pattern::Diagonal).unwrap();
        assert!(a.canonical_eq(&b, 0.0));
    }

    #[test]
    fn same_seed_is_bitwise_identical() {
        let a = generate_perturbed_mesh(5, 0.3, 11).unwrap();
        let b = generate_perturbed_mesh(5, 0.3, 11).unwrap();
        assert!(a.canonical_eq(&b, 0.0));
        let moved = generate_perturbed_mesh(5, 0.3, 12).unwrap();
        assert!(!moved.canonical_eq(&a, 0.0));
    }

    #[test]
    fn boundary_vertices_stay_fixed() {
        let perturbed = generate_perturbed_mesh(4, 0.3, 3).unwrap();
        let reference = generate_square_mesh(4, Pattern::Diagonal).unwrap();
        for v in 0..perturbed.n_vertices() {
            if perturbed.is_boundary_vertex(v) {
                assert_eq!(perturbed.position(v), reference.position(v));
            }
        }
    }

    #[test]
    fn amplitude_out_of_range_rejected() {
        assert!(matches!(
            generate_perturbed_mesh(4, 0.49, 1),
            Err(MeshError::InvalidParameter(_))
        ));
        assert!(matches!(
            generate_perturbed_mesh(4, -0.1, 1),
            Err(MeshError::InvalidParameter(_))
        ));
    }

    #[test]
    fn interior_center_of_diagonal_2_touches_six_triangles() {
        let mesh = generate_square_mesh(2, Pattern::Diagonal).unwrap();
        let center = 4; // grid (1, 1)
        assert!(!mesh.is_boundary_vertex(center));
        assert_eq!(mesh.vertex_star(center).len(), 6);
    }

    #[test]
    fn crisscross_center_star_is_all_four_triangles() {
        let mesh = generate_square_mesh(1, Pattern::Crisscross).unwrap();
        let mut star = mesh.vertex_star(4).to_vec();
        star.sort_unstable();
        assert_eq!(star, vec![0, 1, 2, 3]);
    }
}
