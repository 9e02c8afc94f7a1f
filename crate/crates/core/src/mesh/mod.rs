//! Oriented 2D triangle meshes.
//!
//! A [`TriangleMesh`] is an oriented manifold-like simplicial complex:
//! triangles are stored counterclockwise, edges carry a canonical
//! low-to-high vertex orientation, every edge belongs to one or two
//! triangles, and every vertex star is a single fan. Construction
//! validates all of this and derives the edge table, adjacency, and
//! boundary flags.

use std::collections::HashMap;

use thiserror::Error;

use crate::geometry::{signed_area_2x, Point};

mod generate;
mod io;

pub use generate::{generate_perturbed_mesh, generate_square_mesh, Pattern};
pub use io::{load_mesh, mesh_json_string, save_mesh};

/// Relative threshold on twice the signed area below which a triangle is
/// considered degenerate (scaled by the squared longest edge).
pub const DEGENERACY_THRESHOLD: f64 = 1e-14;

#[derive(Debug, Error)]
pub enum MeshError {
    #[error("a mesh needs at least 3 vertices, found {found}")]
    TooFewVertices { found: usize },
    #[error("a mesh needs at least one triangle")]
    NoTriangles,
    #[error("vertex {vertex} has a non-finite coordinate")]
    NonFinitePosition { vertex: usize },
    #[error(
        "triangle {triangle} references vertex {index}, but there are only {n_vertices} vertices"
    )]
    VertexIndexOutOfRange {
        triangle: usize,
        index: usize,
        n_vertices: usize,
    },
    #[error("triangle {triangle} is degenerate (zero signed area)")]
    DegenerateTriangle { triangle: usize },
    #[error("triangles {first} and {second} share the same vertex set")]
    DuplicateTriangle { first: usize, second: usize },
    #[error("edge ({a}, {b}) belongs to {count} triangles; at most 2 are allowed")]
    NonManifoldEdge { a: usize, b: usize, count: usize },
    #[error("vertex {vertex} belongs to no triangle")]
    DanglingVertex { vertex: usize },
    #[error("interior edge ({a}, {b}) is traversed in the same direction by both triangles")]
    InconsistentOrientation { a: usize, b: usize },
    #[error("the triangles around vertex {vertex} do not form a single fan")]
    NonManifoldVertex { vertex: usize },
    #[error("{0}")]
    InvalidParameter(String),
    #[error("perturbation of vertex {vertex} failed after bounded retries (seed {seed})")]
    PerturbationFailed { seed: u64, vertex: usize },
    #[error("parse error in {path} (line {line}): {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// Mesh vertex: dense id plus position.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Vertex {
    pub id: usize,
    pub position: Point,
}

/// Undirected mesh edge with canonical orientation from the lower to the
/// higher vertex id.
#[derive(Clone, Debug, PartialEq)]
pub struct Edge {
    pub id: usize,
    /// Endpoints with `endpoints.0 < endpoints.1`.
    pub endpoints: (usize, usize),
    pub boundary: bool,
    pub length: f64,
    /// Adjacent triangles; the second is `None` on the boundary.
    pub triangles: (usize, Option<usize>),
}

/// Oriented triangle; the stored vertex triple is counterclockwise.
#[derive(Clone, Debug, PartialEq)]
pub struct Triangle {
    pub id: usize,
    pub vertices: [usize; 3],
    pub area: f64,
    /// `edge_ids[p]` is the edge opposite `vertices[p]`.
    pub edge_ids: [usize; 3],
}

/// Oriented manifold-like triangle mesh with derived incidence tables.
#[derive(Clone, Debug)]
pub struct TriangleMesh {
    vertices: Vec<Vertex>,
    edges: Vec<Edge>,
    triangles: Vec<Triangle>,
    /// Incident triangles per vertex, in counterclockwise fan order.
    vertex_stars: Vec<Vec<usize>>,
    boundary_vertex: Vec<bool>,
    /// Input triangle indices whose triples arrived clockwise and were
    /// flipped during construction.
    flipped_inputs: Vec<usize>,
}

/// Build a mesh from vertex positions and triangle index triples.
///
/// Edges and vertex incidence are derived. Clockwise triples are flipped
/// to counterclockwise (and recorded); the edge table is deduplicated
/// with the canonical low-to-high orientation. All structural invariants
/// are checked and violations are reported as [`MeshError`]s.
pub fn build_mesh(
    positions: Vec<Point>,
    triples: Vec<[usize; 3]>,
) -> Result<TriangleMesh, MeshError> {
    if positions.len() < 3 {
        return Err(MeshError::TooFewVertices {
            found: positions.len(),
        });
    }
    if triples.is_empty() {
        return Err(MeshError::NoTriangles);
    }
    for (i, p) in positions.iter().enumerate() {
        if !p.is_finite() {
            return Err(MeshError::NonFinitePosition { vertex: i });
        }
    }
    let n_vertices = positions.len();

    // Orient triangles counterclockwise, rejecting degenerate ones.
    let mut oriented: Vec<[usize; 3]> = Vec::with_capacity(triples.len());
    let mut areas: Vec<f64> = Vec::with_capacity(triples.len());
    let mut flipped_inputs = Vec::new();
    for (t, &triple) in triples.iter().enumerate() {
        for &v in &triple {
            if v >= n_vertices {
                return Err(MeshError::VertexIndexOutOfRange {
                    triangle: t,
                    index: v,
                    n_vertices,
                });
            }
        }
        let [i, j, k] = triple;
        if i == j || j == k || i == k {
            return Err(MeshError::DegenerateTriangle { triangle: t });
        }
        let (a, b, c) = (positions[i], positions[j], positions[k]);
        let det = signed_area_2x(a, b, c);
        let max_edge_sq = (b - a)
            .norm_squared()
            .max((c - b).norm_squared())
            .max((a - c).norm_squared());
        if det.abs() <= DEGENERACY_THRESHOLD * max_edge_sq {
            return Err(MeshError::DegenerateTriangle { triangle: t });
        }
        if det < 0.0 {
            oriented.push([i, k, j]);
            flipped_inputs.push(t);
        } else {
            oriented.push([i, j, k]);
        }
        areas.push(det.abs() * 0.5);
    }

    // Duplicate triangles (same vertex set) are invalid.
    let mut seen: HashMap<[usize; 3], usize> = HashMap::new();
    for (t, &tri) in oriented.iter().enumerate() {
        let mut key = tri;
        key.sort_unstable();
        if let Some(&first) = seen.get(&key) {
            return Err(MeshError::DuplicateTriangle { first, second: t });
        }
        seen.insert(key, t);
    }

    // Canonical edge table, ids in lexicographic endpoint order.
    let mut pairs: Vec<(usize, usize)> = Vec::with_capacity(3 * oriented.len());
    for tri in &oriented {
        for p in 0..3 {
            let a = tri[(p + 1) % 3];
            let b = tri[(p + 2) % 3];
            pairs.push((a.min(b), a.max(b)));
        }
    }
    pairs.sort_unstable();
    pairs.dedup();
    let edge_index: HashMap<(usize, usize), usize> =
        pairs.iter().enumerate().map(|(i, &e)| (e, i)).collect();

    let mut edge_triangles: Vec<Vec<usize>> = vec![Vec::new(); pairs.len()];
    let mut triangles: Vec<Triangle> = Vec::with_capacity(oriented.len());
    for (t, tri) in oriented.iter().enumerate() {
        let mut edge_ids = [0usize; 3];
        for p in 0..3 {
            let a = tri[(p + 1) % 3];
            let b = tri[(p + 2) % 3];
            let e = edge_index[&(a.min(b), a.max(b))];
            edge_ids[p] = e;
            edge_triangles[e].push(t);
        }
        triangles.push(Triangle {
            id: t,
            vertices: *tri,
            area: areas[t],
            edge_ids,
        });
    }

    let mut edges: Vec<Edge> = Vec::with_capacity(pairs.len());
    for (e, &(a, b)) in pairs.iter().enumerate() {
        let adj = &edge_triangles[e];
        if adj.len() > 2 {
            return Err(MeshError::NonManifoldEdge {
                a,
                b,
                count: adj.len(),
            });
        }
        edges.push(Edge {
            id: e,
            endpoints: (a, b),
            boundary: adj.len() == 1,
            length: positions[a].distance(positions[b]),
            triangles: (adj[0], adj.get(1).copied()),
        });
    }

    // Interior edges must be traversed in opposite directions by their two
    // counterclockwise triangles; equal directions mean the triangles
    // overlap geometrically.
    for edge in &edges {
        if let (t1, Some(t2)) = edge.triangles {
            let d1 = traversal_direction(&triangles[t1], edge.endpoints);
            let d2 = traversal_direction(&triangles[t2], edge.endpoints);
            if d1 == d2 {
                return Err(MeshError::InconsistentOrientation {
                    a: edge.endpoints.0,
                    b: edge.endpoints.1,
                });
            }
        }
    }

    // Vertex incidence, then fan ordering (which is also the manifold
    // vertex check).
    let mut incident: Vec<Vec<usize>> = vec![Vec::new(); n_vertices];
    for tri in &triangles {
        for &v in &tri.vertices {
            incident[v].push(tri.id);
        }
    }
    for (v, list) in incident.iter().enumerate() {
        if list.is_empty() {
            return Err(MeshError::DanglingVertex { vertex: v });
        }
    }

    let mut vertex_stars = Vec::with_capacity(n_vertices);
    for v in 0..n_vertices {
        vertex_stars.push(fan_order(v, &incident[v], &triangles)?);
    }

    let mut boundary_vertex = vec![false; n_vertices];
    for edge in &edges {
        if edge.boundary {
            boundary_vertex[edge.endpoints.0] = true;
            boundary_vertex[edge.endpoints.1] = true;
        }
    }

    let vertices = positions
        .into_iter()
        .enumerate()
        .map(|(id, position)| Vertex { id, position })
        .collect();

    Ok(TriangleMesh {
        vertices,
        edges,
        triangles,
        vertex_stars,
        boundary_vertex,
        flipped_inputs,
    })
}

/// +1 when the triangle's counterclockwise loop traverses the edge from
/// its low to its high vertex, -1 otherwise.
fn traversal_direction(tri: &Triangle, (a, b): (usize, usize)) -> i32 {
    for p in 0..3 {
        let u = tri.vertices[p];
        let w = tri.vertices[(p + 1) % 3];
        if (u, w) == (a, b) {
            return 1;
        }
        if (u, w) == (b, a) {
            return -1;
        }
    }
    unreachable!("edge does not belong to triangle {}", tri.id);
}

/// Order the triangles around `v` into a single counterclockwise fan.
///
/// For each incident triangle rotated to start at `v`, `(v, p, q)`, the
/// next triangle counterclockwise is the one entered across edge `(v, q)`.
/// Failure to chain all incident triangles into one walk means the vertex
/// star is not a disk or half-disk.
fn fan_order(
    v: usize,
    incident: &[usize],
    triangles: &[Triangle],
) -> Result<Vec<usize>, MeshError> {
    let fail = || MeshError::NonManifoldVertex { vertex: v };
    let mut from_neighbor: HashMap<usize, (usize, usize)> = HashMap::new();
    let mut successors: Vec<usize> = Vec::with_capacity(incident.len());
    for &t in incident {
        let tri = &triangles[t].vertices;
        let pos = tri.iter().position(|&u| u == v).expect("incident triangle");
        let p = tri[(pos + 1) % 3];
        let q = tri[(pos + 2) % 3];
        if from_neighbor.insert(p, (t, q)).is_some() {
            return Err(fail());
        }
        successors.push(q);
    }
    // A boundary fan starts at the unique in-neighbor that is nobody's
    // out-neighbor; an interior fan is a cycle and may start anywhere, so
    // pick the lowest incident triangle id for determinism.
    let starts: Vec<usize> = from_neighbor
        .keys()
        .copied()
        .filter(|p| !successors.contains(p))
        .collect();
    let start = match starts.len() {
        0 => {
            let t0 = *incident.iter().min().expect("nonempty star");
            let tri = &triangles[t0].vertices;
            let pos = tri.iter().position(|&u| u == v).expect("incident triangle");
            tri[(pos + 1) % 3]
        }
        1 => starts[0],
        _ => return Err(fail()),
    };
    let mut fan = Vec::with_capacity(incident.len());
    let mut current = start;
    for _ in 0..incident.len() {
        let &(t, q) = from_neighbor.get(&current).ok_or_else(fail)?;
        fan.push(t);
        current = q;
        if current == start {
            break;
        }
    }
    if fan.len() != incident.len() {
        return Err(fail());
    }
    Ok(fan)
}

impl TriangleMesh {
    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn n_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn triangles(&self) -> &[Triangle] {
        &self.triangles
    }

    pub fn position(&self, vertex: usize) -> Point {
        self.vertices[vertex].position
    }

    /// Corner positions of a triangle in stored (counterclockwise) order.
    pub fn triangle_points(&self, triangle: usize) -> [Point; 3] {
        let [i, j, k] = self.triangles[triangle].vertices;
        [self.position(i), self.position(j), self.position(k)]
    }

    /// Triangles incident to a vertex, in counterclockwise fan order.
    pub fn vertex_star(&self, vertex: usize) -> &[usize] {
        &self.vertex_stars[vertex]
    }

    pub fn is_boundary_vertex(&self, vertex: usize) -> bool {
        self.boundary_vertex[vertex]
    }

    pub fn n_boundary_vertices(&self) -> usize {
        self.boundary_vertex.iter().filter(|&&b| b).count()
    }

    pub fn n_interior_vertices(&self) -> usize {
        self.n_vertices() - self.n_boundary_vertices()
    }

    pub fn edge_id(&self, a: usize, b: usize) -> Option<usize> {
        let key = (a.min(b), a.max(b));
        self.edges.binary_search_by_key(&key, |e| e.endpoints).ok()
    }

    pub fn total_area(&self) -> f64 {
        self.triangles.iter().map(|t| t.area).sum()
    }

    /// N0 - N1 + N2; equals 1 for a simply connected polygonal domain.
    pub fn euler_characteristic(&self) -> i64 {
        self.n_vertices() as i64 - self.n_edges() as i64 + self.n_triangles() as i64
    }

    /// Input triangle indices that were reoriented during construction.
    pub fn flipped_inputs(&self) -> &[usize] {
        &self.flipped_inputs
    }

    /// Canonical-form equality: identical triangle triples and vertex
    /// positions within `tol` per coordinate.
    pub fn canonical_eq(&self, other: &TriangleMesh, tol: f64) -> bool {
        if self.n_vertices() != other.n_vertices() || self.n_triangles() != other.n_triangles() {
            return false;
        }
        let positions_close = self.vertices.iter().zip(&other.vertices).all(|(a, b)| {
            (a.position.x - b.position.x).abs() <= tol && (a.position.y - b.position.y).abs() <= tol
        });
        positions_close
            && self
                .triangles
                .iter()
                .zip(&other.triangles)
                .all(|(a, b)| a.vertices == b.vertices)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_triangle() -> TriangleMesh {
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
    fn single_triangle_counts() {
        let mesh = unit_triangle();
        assert_eq!(mesh.n_vertices(), 3);
        assert_eq!(mesh.n_edges(), 3);
        assert_eq!(mesh.n_triangles(), 1);
        assert!(mesh.edges().iter().all(|e| e.boundary));
        assert_eq!(mesh.euler_characteristic(), 1);
    }

    #[test]
    fn split_square_has_interior_diagonal() {
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
        assert_eq!(mesh.n_edges(), 5);
        let diag = mesh.edge_id(0, 2).unwrap();
        assert!(!mesh.edges()[diag].boundary);
        assert_eq!(mesh.euler_characteristic(), 1);
    }

    #[test]
    fn clockwise_input_is_flipped() {
        let mesh = build_mesh(
            vec![
                Point::new(0.0, 0.0),
                Point::new(0.0, 1.0),
                Point::new(1.0, 0.0),
            ],
            vec![[0, 1, 2]],
        )
        .unwrap();
        let tri = &mesh.triangles()[0];
        assert_eq!(tri.vertices, [0, 2, 1]);
        assert!((tri.area - 0.5).abs() < 1e-15);
        assert_eq!(mesh.flipped_inputs(), &[0]);
        let [a, b, c] = mesh.triangle_points(0);
        assert!(signed_area_2x(a, b, c) > 0.0);
    }

    #[test]
    fn non_finite_position_rejected() {
        let err = build_mesh(
            vec![
                Point::new(0.0, 0.0),
                Point::new(1.0, f64::NAN),
                Point::new(0.0, 1.0),
            ],
            vec![[0, 1, 2]],
        )
        .unwrap_err();
        assert!(matches!(err, MeshError::NonFinitePosition { vertex: 1 }));
    }

    #[test]
    fn degenerate_triangle_rejected() {
        let err = build_mesh(
            vec![
                Point::new(0.0, 0.0),
                Point::new(1.0, 0.0),
                Point::new(2.0, 0.0),
            ],
            vec![[0, 1, 2]],
        )
        .unwrap_err();
        assert!(matches!(err, MeshError::DegenerateTriangle { triangle: 0 }));
    }

    #[test]
    fn repeated_vertex_rejected() {
        let err = build_mesh(
            vec![
                Point::new(0.0, 0.0),
                Point::new(1.0, 0.0),
                Point::new(0.0, 1.0),
            ],
            vec![[0, 1, 1]],
        )
        .unwrap_err();
        assert!(matches!(err, MeshError::DegenerateTriangle { triangle: 0 }));
    }

    #[test]
    fn duplicate_triangle_rejected() {
        let err = build_mesh(
            vec![
                Point::new(0.0, 0.0),
                Point::new(1.0, 0.0),
                Point::new(0.0, 1.0),
            ],
            vec![[0, 1, 2], [1, 2, 0]],
        )
        .unwrap_err();
        assert!(matches!(
            err,
            MeshError::DuplicateTriangle {
                first: 0,
                second: 1
            }
        ));
    }

    #[test]
    fn nonmanifold_edge_rejected() {
        let err = build_mesh(
            vec![
                Point::new(0.0, 0.0),
                Point::new(1.0, 0.0),
                Point::new(0.0, 1.0),
                Point::new(0.0, -1.0),
                Point::new(0.5, 2.0),
            ],
            vec![[0, 1, 2], [0, 1, 3], [0, 1, 4]],
        )
        .unwrap_err();
        assert!(matches!(
            err,
            MeshError::NonManifoldEdge {
                a: 0,
                b: 1,
                count: 3
            }
        ));
    }

    #[test]
    fn dangling_vertex_rejected() {
        let err = build_mesh(
            vec![
                Point::new(0.0, 0.0),
                Point::new(1.0, 0.0),
                Point::new(0.0, 1.0),
                Point::new(5.0, 5.0),
            ],
            vec![[0, 1, 2]],
        )
        .unwrap_err();
        assert!(matches!(err, MeshError::DanglingVertex { vertex: 3 }));
    }

    #[test]
    fn overlapping_triangles_rejected() {
        // Both triangles lie on the same side of edge (0, 1), so both
        // counterclockwise loops traverse it the same way.
        let err = build_mesh(
            vec![
                Point::new(0.0, 0.0),
                Point::new(1.0, 0.0),
                Point::new(0.0, 1.0),
                Point::new(0.4, 0.3),
            ],
            vec![[0, 1, 2], [0, 1, 3]],
        )
        .unwrap_err();
        assert!(matches!(
            err,
            MeshError::InconsistentOrientation { a: 0, b: 1 }
        ));
    }

    #[test]
    fn bowtie_vertex_rejected() {
        let err = build_mesh(
            vec![
                Point::new(0.0, 0.0),
                Point::new(1.0, 0.0),
                Point::new(1.0, 1.0),
                Point::new(-1.0, 0.0),
                Point::new(-1.0, -1.0),
            ],
            vec![[0, 1, 2], [0, 3, 4]],
        )
        .unwrap_err();
        assert!(matches!(err, MeshError::NonManifoldVertex { vertex: 0 }));
    }

    #[test]
    fn vertex_star_of_corner() {
        let mesh = unit_triangle();
        assert_eq!(mesh.vertex_star(0), &[0]);
    }

    #[test]
    fn index_out_of_range_rejected() {
        let err = build_mesh(
            vec![
                Point::new(0.0, 0.0),
                Point::new(1.0, 0.0),
                Point::new(0.0, 1.0),
            ],
            vec![[0, 1, 7]],
        )
        .unwrap_err();
        assert!(matches!(
            err,
            MeshError::VertexIndexOutOfRange {
                triangle: 0,
                index: 7,
                ..
            }
        ));
    }

    #[test]
    fn rebuild_of_canonical_output_is_identity() {
        let mesh = generate_square_mesh(2, Pattern::Crisscross).unwrap();
        let positions = mesh.vertices().iter().map(|v| v.position).collect();
        let triples = mesh.triangles().iter().map(|t| t.vertices).collect();
        let rebuilt = build_mesh(positions, triples).unwrap();
        assert!(mesh.canonical_eq(&rebuilt, 0.0));
        assert!(rebuilt.flipped_inputs().is_empty());
    }

    #[test]
    fn interior_edges_have_opposite_traversals() {
        let mesh = generate_square_mesh(3, Pattern::Diagonal).unwrap();
        for edge in mesh.edges() {
            if let (t1, Some(t2)) = edge.triangles {
                let d1 = traversal_direction(&mesh.triangles()[t1], edge.endpoints);
                let d2 = traversal_direction(&mesh.triangles()[t2], edge.endpoints);
                assert_eq!(d1, -d2);
            }
        }
    }
}
