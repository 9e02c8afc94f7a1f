//! Mesh file input/output.
//!
//! The native format is a JSON document with two arrays:
//!
//! ```json
//! { "vertices": [[x, y], ...], "triangles": [[i, j, k], ...] }
//! ```
//!
//! with 0-based vertex indices. Files named `*.node` are read as
//! Triangle-format `.node`/`.ele` pairs instead (indices converted to
//! 0-based on read).

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::geometry::Point;

use super::{build_mesh, MeshError, TriangleMesh};

#[derive(Serialize, Deserialize)]
struct MeshFile {
    vertices: Vec<[f64; 2]>,
    triangles: Vec<[usize; 3]>,
}

/// The canonical form (positions and triangle triples) as JSON text.
pub fn mesh_json_string(mesh: &TriangleMesh) -> String {
    let file = MeshFile {
        vertices: mesh
            .vertices()
            .iter()
            .map(|v| [v.position.x, v.position.y])
            .collect(),
        triangles: mesh.triangles().iter().map(|t| t.vertices).collect(),
    };
    let mut text = serde_json::to_string_pretty(&file).expect("mesh serialization cannot fail");
    text.push('\n');
    text
}

/// Serialize the canonical form (positions and triangle triples).
pub fn save_mesh(mesh: &TriangleMesh, path: impl AsRef<Path>) -> Result<(), MeshError> {
    let path = path.as_ref();
    fs::write(path, mesh_json_string(mesh)).map_err(|source| MeshError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Load and validate a mesh file (JSON, or a `.node`/`.ele` pair).
pub fn load_mesh(path: impl AsRef<Path>) -> Result<TriangleMesh, MeshError> {
    let path = path.as_ref();
    if path.extension().is_some_and(|e| e == "node") {
        return load_triangle_format(path);
    }
    let text = fs::read_to_string(path).map_err(|source| MeshError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let file: MeshFile = serde_json::from_str(&text).map_err(|e| MeshError::Parse {
        path: path.display().to_string(),
        line: e.line(),
        message: e.to_string(),
    })?;
    let n_vertices = file.vertices.len();
    for (t, tri) in file.triangles.iter().enumerate() {
        for &v in tri {
            if v >= n_vertices {
                return Err(MeshError::Parse {
                    path: path.display().to_string(),
                    line: 0,
                    message: format!(
                        "triangle {t} references vertex {v}, but there are only {n_vertices} vertices"
                    ),
                });
            }
        }
    }
    let positions = file
        .vertices
        .iter()
        .map(|&[x, y]| Point::new(x, y))
        .collect();
    build_mesh(positions, file.triangles)
}

fn parse_err(path: &Path, line: usize, message: impl Into<String>) -> MeshError {
    MeshError::Parse {
        path: path.display().to_string(),
        line,
        message: message.into(),
    }
}

/// Read a Triangle-format `.node` file and its sibling `.ele` file.
fn load_triangle_format(node_path: &Path) -> Result<TriangleMesh, MeshError> {
    let read = |p: &Path| {
        fs::read_to_string(p).map_err(|source| MeshError::Io {
            path: p.display().to_string(),
            source,
        })
    };
    let node_text = read(node_path)?;
    let ele_path = node_path.with_extension("ele");
    let ele_text = read(&ele_path)?;

    let (positions, base) = parse_node(node_path, &node_text)?;
    let triples = parse_ele(&ele_path, &ele_text, base, positions.len())?;
    build_mesh(positions, triples)
}

/// Non-comment, non-empty lines with their 1-based line numbers.
fn data_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

fn parse_node(path: &Path, text: &str) -> Result<(Vec<Point>, usize), MeshError> {
    let mut lines = data_lines(text);
    let (line_no, header) = lines
        .next()
        .ok_or_else(|| parse_err(path, 0, "empty .node file"))?;
    let mut fields = header.split_whitespace();
    let count: usize = fields
        .next()
        .and_then(|f| f.parse().ok())
        .ok_or_else(|| parse_err(path, line_no, "bad vertex count in header"))?;
    let mut indexed: Vec<(usize, Point)> = Vec::with_capacity(count);
    for _ in 0..count {
        let (line_no, line) = lines
            .next()
            .ok_or_else(|| parse_err(path, 0, "unexpected end of .node file"))?;
        let mut fields = line.split_whitespace();
        let idx: usize = fields
            .next()
            .and_then(|f| f.parse().ok())
            .ok_or_else(|| parse_err(path, line_no, "bad vertex index"))?;
        let x: f64 = fields
            .next()
            .and_then(|f| f.parse().ok())
            .ok_or_else(|| parse_err(path, line_no, "bad x coordinate"))?;
        let y: f64 = fields
            .next()
            .and_then(|f| f.parse().ok())
            .ok_or_else(|| parse_err(path, line_no, "bad y coordinate"))?;
        indexed.push((idx, Point::new(x, y)));
    }
    // Triangle numbers nodes from 0 or 1; take the base from the first entry.
    let base = indexed.first().map(|&(i, _)| i).unwrap_or(0);
    let mut positions = vec![Point::default(); indexed.len()];
    for (idx, p) in indexed {
        let slot = idx
            .checked_sub(base)
            .filter(|&s| s < positions.len())
            .ok_or_else(|| parse_err(path, 0, format!("vertex index {idx} out of sequence")))?;
        positions[slot] = p;
    }
    Ok((positions, base))
}

fn parse_ele(
    path: &Path,
    text: &str,
    base: usize,
    n_vertices: usize,
) -> Result<Vec<[usize; 3]>, MeshError> {
    let mut lines = data_lines(text);
    let (line_no, header) = lines
        .next()
        .ok_or_else(|| parse_err(path, 0, "empty .ele file"))?;
    let count: usize = header
        .split_whitespace()
        .next()
        .and_then(|f| f.parse().ok())
        .ok_or_else(|| parse_err(path, line_no, "bad triangle count in header"))?;
    let mut triples = Vec::with_capacity(count);
    for _ in 0..count {
        let (line_no, line) = lines
            .next()
            .ok_or_else(|| parse_err(path, 0, "unexpected end of .ele file"))?;
        let mut fields = line.split_whitespace();
        fields.next(); // triangle index
        let mut tri = [0usize; 3];
        for slot in &mut tri {
            let raw: usize = fields
                .next()
                .and_then(|f| f.parse().ok())
                .ok_or_else(|| parse_err(path, line_no, "bad corner index"))?;
            *slot = raw
                .checked_sub(base)
                .filter(|&v| v < n_vertices)
                .ok_or_else(|| {
                    parse_err(path, line_no, format!("corner index {raw} out of range"))
                })?;
        }
        triples.push(tri);
    }
    Ok(triples)
}
