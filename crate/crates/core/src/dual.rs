//! Circumcentric dual complex.
//!
//! For every triangle the circumcenter is joined to the three edge
//! midpoints. This yields, per (triangle, edge) pair, a signed dual edge
//! length `e` (negative when the circumcenter lies on the far side of the
//! edge, i.e. when the opposite angle is obtuse) and, per (triangle,
//! corner) pair, a signed kite area. Kites accumulate into per-vertex box
//! areas, and the signed ratios `e / l` accumulate into the diagonal
//! Hodge star of degree one. All quantities stay valid on meshes that are
//! not well-centered; the signs carry the geometry.

use thiserror::Error;

use crate::geometry::{shoelace, signed_area_2x, Point};
use crate::mesh::{build_mesh, MeshError, TriangleMesh, DEGENERACY_THRESHOLD};

#[derive(Debug, Error)]
pub enum DualError {
    #[error("degenerate point triple: circumcenter is undefined")]
    DegeneratePoints,
    #[error("triangle {triangle} is degenerate")]
    DegenerateTriangle { triangle: usize },
    #[error("subdivision of triangle {triangle} has a degenerate simplex (circumcenter meets an edge midpoint)")]
    DegenerateSubdivisionSimplex { triangle: usize },
    #[error(transparent)]
    Mesh(#[from] MeshError),
}

/// Circumcenter of the triangle `(a, b, c)`: the point equidistant from
/// all three corners.
pub fn circumcenter(a: Point, b: Point, c: Point) -> Result<Point, DualError> {
    let u = b - a;
    let v = c - a;
    let det = u.cross(v); // twice the signed area
    let max_edge_sq = u
        .norm_squared()
        .max(v.norm_squared())
        .max((c - b).norm_squared());
    if det.abs() <= DEGENERACY_THRESHOLD * max_edge_sq {
        return Err(DualError::DegeneratePoints);
    }
    let u2 = u.norm_squared();
    let v2 = v.norm_squared();
    let cx = (v.y * u2 - u.y * v2) / (2.0 * det);
    let cy = (u.x * v2 - v.x * u2) / (2.0 * det);
    Ok(a + Point::new(cx, cy))
}

/// Signed ratios `e_p / l_p` for the three edges of a triangle, where
/// `e_p` is the signed length of the dual segment from the circumcenter
/// to the midpoint of edge `p` and `l_p` the primal edge length.
///
/// Each ratio equals `2 * area(x_q, x_r, c) / l_p^2` with `(x_q, x_r)`
/// the opposite edge taken in the triangle's counterclockwise order, so
/// it is positive exactly when the angle opposite edge `p` is acute, and
/// it always equals the cotangent assembly weight for that corner.
pub fn signed_dual_ratios(mesh: &TriangleMesh, triangle: usize) -> Result<[f64; 3], DualError> {
    let [a, b, c] = mesh.triangle_points(triangle);
    let center = circumcenter(a, b, c).map_err(|_| DualError::DegenerateTriangle { triangle })?;
    Ok(ratios_about(a, b, c, center))
}

fn ratios_about(a: Point, b: Point, c: Point, center: Point) -> [f64; 3] {
    let corners = [a, b, c];
    let mut ratios = [0.0; 3];
    for p in 0..3 {
        let q = corners[(p + 1) % 3];
        let r = corners[(p + 2) % 3];
        let l_sq = (r - q).norm_squared();
        ratios[p] = signed_area_2x(q, r, center) / l_sq;
    }
    ratios
}

/// Circumcentric dual of a triangle mesh.
#[derive(Clone, Debug)]
pub struct DualComplex {
    circumcenters: Vec<Point>,
    midpoints: Vec<Point>,
    /// Signed dual segment length per (triangle, local edge).
    dual_edge_lengths: Vec<[f64; 3]>,
    /// Signed ratio e/l per (triangle, local edge).
    signed_ratios: Vec<[f64; 3]>,
    /// Signed kite area per (triangle, local corner).
    kite_areas: Vec<[f64; 3]>,
    /// Sum of signed ratios over the triangles adjacent to each edge;
    /// the degree-one Hodge diagonal.
    edge_dual_ratios: Vec<f64>,
    /// Signed box (dual cell) area per vertex.
    box_areas: Vec<f64>,
    well_centered: Vec<bool>,
}

impl DualComplex {
    pub fn build(mesh: &TriangleMesh) -> Result<Self, DualError> {
        let n2 = mesh.n_triangles();
        let mut circumcenters = Vec::with_capacity(n2);
        let mut dual_edge_lengths = Vec::with_capacity(n2);
        let mut signed_ratios = Vec::with_capacity(n2);
        let mut kite_areas = Vec::with_capacity(n2);
        let mut well_centered = Vec::with_capacity(n2);
        let mut edge_dual_ratios = vec![0.0; mesh.n_edges()];
        let mut box_areas = vec![0.0; mesh.n_vertices()];

        let midpoints: Vec<Point> = mesh
            .edges()
            .iter()
            .map(|e| {
                mesh.position(e.endpoints.0)
                    .midpoint(mesh.position(e.endpoints.1))
            })
            .collect();

        for tri in mesh.triangles() {
            let corners = mesh.triangle_points(tri.id);
            let center = circumcenter(corners[0], corners[1], corners[2])
                .map_err(|_| DualError::DegenerateTriangle { triangle: tri.id })?;
            let ratios = ratios_about(corners[0], corners[1], corners[2], center);

            let mut lengths = [0.0; 3];
            let mut kites = [0.0; 3];
            for p in 0..3 {
                let edge = &mesh.edges()[tri.edge_ids[p]];
                lengths[p] = ratios[p] * edge.length;
                edge_dual_ratios[tri.edge_ids[p]] += ratios[p];

                // Kite at corner p, traversed counterclockwise for the
                // stored triangle orientation: corner, midpoint of the
                // outgoing edge, circumcenter, midpoint of the incoming
                // edge.
                let m_out = midpoints[tri.edge_ids[(p + 2) % 3]];
                let m_in = midpoints[tri.edge_ids[(p + 1) % 3]];
                kites[p] = shoelace(&[corners[p], m_out, center, m_in]);
                box_areas[tri.vertices[p]] += kites[p];
            }

            circumcenters.push(center);
            dual_edge_lengths.push(lengths);
            signed_ratios.push(ratios);
            kite_areas.push(kites);
            well_centered.push(ratios.iter().all(|&r| r > 0.0));
        }

        Ok(Self {
            circumcenters,
            midpoints,
            dual_edge_lengths,
            signed_ratios,
            kite_areas,
            edge_dual_ratios,
            box_areas,
            well_centered,
        })
    }

    pub fn circumcenter(&self, triangle: usize) -> Point {
        self.circumcenters[triangle]
    }

    pub fn midpoint(&self, edge: usize) -> Point {
        self.midpoints[edge]
    }

    /// Signed dual segment lengths `e_p`, indexed like `Triangle::edge_ids`.
    pub fn dual_edge_lengths(&self, triangle: usize) -> [f64; 3] {
        self.dual_edge_lengths[triangle]
    }

    /// Signed ratios `e_p / l_p`, indexed like `Triangle::edge_ids`.
    pub fn signed_ratios(&self, triangle: usize) -> [f64; 3] {
        self.signed_ratios[triangle]
    }

    /// Signed kite areas, indexed like `Triangle::vertices`.
    pub fn kite_areas(&self, triangle: usize) -> [f64; 3] {
        self.kite_areas[triangle]
    }

    /// Total signed ratio `sum e/l` over the triangles adjacent to an edge.
    pub fn edge_dual_ratio(&self, edge: usize) -> f64 {
        self.edge_dual_ratios[edge]
    }

    pub fn edge_dual_ratios(&self) -> &[f64] {
        &self.edge_dual_ratios
    }

    /// Box (dual cell) area of a vertex.
    pub fn box_area(&self, vertex: usize) -> f64 {
        self.box_areas[vertex]
    }

    pub fn box_areas(&self) -> &[f64] {
        &self.box_areas
    }

    /// True when all three signed ratios of the triangle are strictly
    /// positive (equivalently, the triangle is acute).
    pub fn is_well_centered(&self, triangle: usize) -> bool {
        self.well_centered[triangle]
    }
}

/// Summary of the well-centeredness audit.
#[derive(Clone, Debug)]
pub struct WellCenteredReport {
    pub n_triangles: usize,
    pub n_well_centered: usize,
    /// Triangles with a non-positive signed ratio.
    pub offenders: Vec<usize>,
    pub min_ratio: f64,
    pub min_ratio_triangle: usize,
}

impl WellCenteredReport {
    pub fn all_well_centered(&self) -> bool {
        self.offenders.is_empty()
    }
}

impl std::fmt::Display for WellCenteredReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(
            f,
            "well-centered triangles: {} / {}",
            self.n_well_centered, self.n_triangles
        )?;
        writeln!(
            f,
            "minimum signed ratio e/l: {} (triangle {})",
            self.min_ratio, self.min_ratio_triangle
        )?;
        if !self.offenders.is_empty() {
            let shown: Vec<String> = self
                .offenders
                .iter()
                .take(12)
                .map(|t| t.to_string())
                .collect();
            let suffix = if self.offenders.len() > 12 {
                ", ..."
            } else {
                ""
            };
            writeln!(f, "offending triangles: {}{}", shown.join(", "), suffix)?;
        }
        Ok(())
    }
}

pub fn well_centered_report(mesh: &TriangleMesh, dual: &DualComplex) -> WellCenteredReport {
    let mut offenders = Vec::new();
    let mut min_ratio = f64::INFINITY;
    let mut min_ratio_triangle = 0;
    for t in 0..mesh.n_triangles() {
        let ratios = dual.signed_ratios(t);
        for &r in &ratios {
            if r < min_ratio {
                min_ratio = r;
                min_ratio_triangle = t;
            }
        }
        if !dual.is_well_centered(t) {
            offenders.push(t);
        }
    }
    WellCenteredReport {
        n_triangles: mesh.n_triangles(),
        n_well_centered: mesh.n_triangles() - offenders.len(),
        offenders,
        min_ratio,
        min_ratio_triangle,
    }
}

/// Circumcentric subdivision: each triangle is replaced by the six
/// triangles (corner, edge midpoint, circumcenter).
///
/// Subdivision vertices are the mesh vertices, then the edge midpoints,
/// then the circumcenters, so the result has N0 + N1 + N2 vertices and
/// 6 N2 triangles. A circumcenter falling on an edge midpoint (a right
/// triangle) makes two subdivision corners coincide and is rejected.
pub fn circumcentric_subdivision(mesh: &TriangleMesh) -> Result<TriangleMesh, DualError> {
    let n0 = mesh.n_vertices();
    let n1 = mesh.n_edges();
    let mut positions: Vec<Point> = mesh.vertices().iter().map(|v| v.position).collect();
    positions.extend(mesh.edges().iter().map(|e| {
        mesh.position(e.endpoints.0)
            .midpoint(mesh.position(e.endpoints.1))
    }));
    for tri in mesh.triangles() {
        let [a, b, c] = mesh.triangle_points(tri.id);
        positions.push(
            circumcenter(a, b, c)
                .map_err(|_| DualError::DegenerateTriangle { triangle: tri.id })?,
        );
    }

    let mut triples = Vec::with_capacity(6 * mesh.n_triangles());
    for tri in mesh.triangles() {
        let center = n0 + n1 + tri.id;
        for p in 0..3 {
            let corner = tri.vertices[p];
            let m_out = n0 + tri.edge_ids[(p + 2) % 3];
            let m_in = n0 + tri.edge_ids[(p + 1) % 3];
            for sub in [[corner, m_out, center], [corner, center, m_in]] {
                let (a, b, c) = (positions[sub[0]], positions[sub[1]], positions[sub[2]]);
                let max_edge_sq = (b - a)
                    .norm_squared()
                    .max((c - b).norm_squared())
                    .max((a - c).norm_squared());
                if signed_area_2x(a, b, c).abs() <= DEGENERACY_THRESHOLD * max_edge_sq {
                    return Err(DualError::DegenerateSubdivisionSimplex { triangle: tri.id });
                }
                triples.push(sub);
            }
        }
    }
    Ok(build_mesh(positions, triples)?)
}
