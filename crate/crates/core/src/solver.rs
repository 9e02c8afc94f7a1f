//! Conjugate-gradient solver and discrete error norms.

use std::time::Instant;

use thiserror::Error;

use crate::assembly::{LinearSystem, MethodTag, ScalarField};
use crate::geometry::{Point, QuadratureRule};
use crate::mesh::TriangleMesh;

/// Default relative residual tolerance.
pub const DEFAULT_TOL: f64 = 1e-10;

/// Default iteration cap for a system with `n` unknowns.
pub fn default_max_iterations(n: usize) -> usize {
    10 * n.max(1)
}

#[derive(Debug, Error)]
pub enum SolveError {
    #[error("conjugate gradients did not converge within {iterations} iterations (relative residual {residual:.3e})")]
    MaxIterations { iterations: usize, residual: f64 },
    #[error("matrix is not positive definite: non-positive curvature at iteration {iteration}")]
    NotPositiveDefinite { iteration: usize },
}

/// A vector-valued field on the domain, used for reference gradients.
#[derive(Clone)]
pub struct VectorField {
    name: String,
    f: fn(f64, f64) -> (f64, f64),
}

impl VectorField {
    pub fn function(name: &str, f: fn(f64, f64) -> (f64, f64)) -> Self {
        Self {
            name: name.to_string(),
            f,
        }
    }

    pub fn eval(&self, p: Point) -> (f64, f64) {
        (self.f)(p.x, p.y)
    }

    pub fn name(&self) -> &str {
        &self.name
    }
}

/// Result of a linear solve, scattered back to the full vertex set.
#[derive(Clone, Debug)]
pub struct SolveReport {
    pub method: MethodTag,
    /// Per-vertex nodal values; boundary entries are exactly zero.
    pub solution: Vec<f64>,
    pub n_interior: usize,
    pub iterations: usize,
    /// True relative residual of the reduced system at exit.
    pub relative_residual: f64,
    pub energy_error: Option<f64>,
    pub l2_error: Option<f64>,
    pub max_nodal_error: Option<f64>,
    pub wall_time: f64,
}

impl SolveReport {
    /// Flat `key = value` text block.
    pub fn key_value_block(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("method = {}\n", self.method));
        out.push_str(&format!("n_vertices = {}\n", self.solution.len()));
        out.push_str(&format!("n_interior = {}\n", self.n_interior));
        out.push_str(&format!("iterations = {}\n", self.iterations));
        out.push_str(&format!(
            "relative_residual = {:e}\n",
            self.relative_residual
        ));
        if let Some(e) = self.energy_error {
            out.push_str(&format!("energy_error = {e:e}\n"));
        }
        if let Some(e) = self.l2_error {
            out.push_str(&format!("l2_error = {e:e}\n"));
        }
        if let Some(e) = self.max_nodal_error {
            out.push_str(&format!("max_nodal_error = {e:e}\n"));
        }
        out.push_str(&format!("wall_time_s = {:e}\n", self.wall_time));
        out
    }

    /// Nodal solution as CSV lines `vertex,x,y,value`.
    pub fn solution_csv(&self, mesh: &TriangleMesh) -> String {
        let mut out = String::from("vertex,x,y,value\n");
        for v in 0..self.solution.len() {
            let p = mesh.position(v);
            out.push_str(&format!("{v},{},{},{}\n", p.x, p.y, self.solution[v]));
        }
        out
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Solve the reduced system by conjugate gradients from a zero initial
/// guess. Deterministic; stops when the recurrence residual satisfies
/// `||r|| <= tol * ||b||` and reports the recomputed true residual.
pub fn solve_cg(
    system: &LinearSystem,
    tol: f64,
    max_iter: usize,
) -> Result<SolveReport, SolveError> {
    let start = Instant::now();
    let a = &system.matrix;
    let b = &system.rhs;
    let n = b.len();
    let norm_b = dot(b, b).sqrt();
    let mut x = vec![0.0; n];

    let mut iterations = 0;
    if norm_b > 0.0 {
        let mut r = b.clone();
        let mut p = r.clone();
        let mut rs = dot(&r, &r);
        let mut converged = false;
        for iter in 0..max_iter {
            let ap = a.matvec(&p);
            let curvature = dot(&p, &ap);
            if curvature <= 0.0 {
                return Err(SolveError::NotPositiveDefinite { iteration: iter });
            }
            let alpha = rs / curvature;
            for i in 0..n {
                x[i] += alpha * p[i];
                r[i] -= alpha * ap[i];
            }
            let rs_next = dot(&r, &r);
            iterations = iter + 1;
            if rs_next.sqrt() <= tol * norm_b {
                converged = true;
                break;
            }
            let beta = rs_next / rs;
            for i in 0..n {
                p[i] = r[i] + beta * p[i];
            }
            rs = rs_next;
        }
        if !converged {
            let residual = dot(&r, &r).sqrt() / norm_b;
            return Err(SolveError::MaxIterations {
                iterations,
                residual,
            });
        }
    }

    let ax = a.matvec(&x);
    let true_residual: f64 = ax
        .iter()
        .zip(b)
        .map(|(p, q)| (p - q) * (p - q))
        .sum::<f64>()
        .sqrt();
    let relative_residual = if norm_b > 0.0 {
        true_residual / norm_b
    } else {
        0.0
    };

    Ok(SolveReport {
        method: system.method,
        solution: system.expand(&x),
        n_interior: n,
        iterations,
        relative_residual,
        energy_error: None,
        l2_error: None,
        max_nodal_error: None,
        wall_time: start.elapsed().as_secs_f64(),
    })
}

/// Constant gradient of the linear interpolant of `v` on a triangle.
fn triangle_gradient(points: [Point; 3], values: [f64; 3], area: f64) -> (f64, f64) {
    let [a, b, c] = points;
    let [va, vb, vc] = values;
    let gx = (va * (b.y - c.y) + vb * (c.y - a.y) + vc * (a.y - b.y)) / (2.0 * area);
    let gy = (va * (c.x - b.x) + vb * (a.x - c.x) + vc * (b.x - a.x)) / (2.0 * area);
    (gx, gy)
}

fn nodal_values(mesh: &TriangleMesh, v: &[f64], t: usize) -> [f64; 3] {
    let [i, j, k] = mesh.triangles()[t].vertices;
    [v[i], v[j], v[k]]
}

/// Energy norm of a nodal field: the square root of the Dirichlet
/// integral of its linear interpolant, `sqrt(sum_t |t| |grad v|^2)`.
pub fn energy_norm(mesh: &TriangleMesh, v: &[f64]) -> f64 {
    assert_eq!(v.len(), mesh.n_vertices());
    let mut acc = 0.0;
    for tri in mesh.triangles() {
        let (gx, gy) = triangle_gradient(
            mesh.triangle_points(tri.id),
            nodal_values(mesh, v, tri.id),
            tri.area,
        );
        acc += tri.area * (gx * gx + gy * gy);
    }
    acc.sqrt()
}

/// Linear interpolation of nodal values at a point of a triangle via
/// barycentric coordinates.
fn interpolate(points: [Point; 3], values: [f64; 3], area: f64, p: Point) -> f64 {
    let [a, b, c] = points;
    let la = 0.5 * crate::geometry::signed_area_2x(p, b, c) / area;
    let lb = 0.5 * crate::geometry::signed_area_2x(a, p, c) / area;
    let lc = 0.5 * crate::geometry::signed_area_2x(a, b, p) / area;
    la * values[0] + lb * values[1] + lc * values[2]
}

/// L2 distance between the linear interpolant of `v` and a reference
/// field, by per-triangle quadrature.
pub fn l2_error(
    mesh: &TriangleMesh,
    v: &[f64],
    reference: &ScalarField,
    rule: QuadratureRule,
) -> f64 {
    assert_eq!(v.len(), mesh.n_vertices());
    let mut acc = 0.0;
    for tri in mesh.triangles() {
        let points = mesh.triangle_points(tri.id);
        let values = nodal_values(mesh, v, tri.id);
        acc += rule.integrate(points[0], points[1], points[2], tri.area, |p| {
            let d = interpolate(points, values, tri.area, p) - reference.eval(p);
            d * d
        });
    }
    acc.sqrt()
}

/// Energy-norm distance between the linear interpolant of `v` and a
/// reference gradient field.
pub fn energy_error(
    mesh: &TriangleMesh,
    v: &[f64],
    reference_gradient: &VectorField,
    rule: QuadratureRule,
) -> f64 {
    assert_eq!(v.len(), mesh.n_vertices());
    let mut acc = 0.0;
    for tri in mesh.triangles() {
        let points = mesh.triangle_points(tri.id);
        let (gx, gy) = triangle_gradient(points, nodal_values(mesh, v, tri.id), tri.area);
        acc += rule.integrate(points[0], points[1], points[2], tri.area, |p| {
            let (rx, ry) = reference_gradient.eval(p);
            (gx - rx) * (gx - rx) + (gy - ry) * (gy - ry)
        });
    }
    acc.sqrt()
}

/// Largest nodal deviation `max_i |v_i - reference(x_i)|`.
pub fn max_nodal_error(mesh: &TriangleMesh, v: &[f64], reference: &ScalarField) -> f64 {
    assert_eq!(v.len(), mesh.n_vertices());
    (0..mesh.n_vertices())
        .map(|i| (v[i] - reference.eval(mesh.position(i))).abs())
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assembly::{
        apply_dirichlet, assemble_dec, assemble_fem, assemble_rhs_dec, ScalarField,
    };
    use crate::dual::DualComplex;
    use crate::mesh::{generate_square_mesh, Pattern};
    use crate::rng;
    use crate::sparse::SparseOperator;

    fn smallest_crisscross_system() -> LinearSystem {
        let mesh = generate_square_mesh(1, Pattern::Crisscross).unwrap();
        let dual = DualComplex::build(&mesh).unwrap();
        let matrix = assemble_dec(&mesh, &dual);
        let rhs = assemble_rhs_dec(&mesh, &dual, &ScalarField::constant(1.0));
        apply_dirichlet(&matrix, &rhs, &mesh, MethodTag::Dec).unwrap()
    }

    #[test]
    fn one_unknown_system_solves_exactly() {
        let system = smallest_crisscross_system();
        let report = solve_cg(&system, DEFAULT_TOL, 10).unwrap();
        assert!((report.solution[4] - 0.125).abs() < 1e-14);
        for v in 0..4 {
            assert_eq!(report.solution[v], 0.0);
        }
        assert!(report.relative_residual <= DEFAULT_TOL);
    }

    #[test]
    fn zero_rhs_returns_zero_without_iterating() {
        let mut system = smallest_crisscross_system();
        system.rhs = vec![0.0];
        let report = solve_cg(&system, DEFAULT_TOL, 10).unwrap();
        assert_eq!(report.iterations, 0);
        assert!(report.solution.iter().all(|&x| x == 0.0));
        assert_eq!(report.relative_residual, 0.0);
    }

    /// Dense Gaussian elimination with partial pivoting, used as an
    /// independent solve oracle.
    fn dense_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
        let n = b.len();
        for col in 0..n {
            let pivot = (col..n)
                .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
                .unwrap();
            a.swap(col, pivot);
            b.swap(col, pivot);
            for row in col + 1..n {
                let factor = a[row][col] / a[col][col];
                for k in col..n {
                    a[row][k] -= factor * a[col][k];
                }
                b[row] -= factor * b[col];
            }
        }
        let mut x = vec![0.0; n];
        for row in (0..n).rev() {
            let mut acc = b[row];
            for k in row + 1..n {
                acc -= a[row][k] * x[k];
            }
            x[row] = acc / a[row][row];
        }
        x
    }

    #[test]
    fn cg_matches_dense_oracle_on_random_spd_system() {
        let n = 5;
        let mut rng = rng::seeded(77);
        // A = M^T M + I is symmetric positive definite.
        let m: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..n).map(|_| rng::uniform_sym(&mut rng)).collect())
            .collect();
        let mut dense = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    dense[i][j] += m[k][i] * m[k][j];
                }
            }
            dense[i][i] += 1.0;
        }
        let rhs: Vec<f64> = (0..n).map(|_| rng::uniform_sym(&mut rng)).collect();
        let mut triplets = Vec::new();
        for i in 0..n {
            for j in 0..n {
                triplets.push((i, j, dense[i][j]));
            }
        }
        let system = LinearSystem {
            matrix: SparseOperator::from_triplets(n, n, triplets).unwrap(),
            rhs: rhs.clone(),
            interior_map: (0..n).collect(),
            global_to_interior: (0..n).map(Some).collect(),
            n_vertices: n,
            method: MethodTag::Fem,
        };
        let report = solve_cg(&system, 1e-14, 200).unwrap();
        let oracle = dense_solve(dense, rhs);
        for i in 0..n {
            assert!((report.solution[i] - oracle[i]).abs() < 1e-10);
        }
    }

    #[test]
    fn indefinite_matrix_is_detected() {
        let system = LinearSystem {
            matrix: SparseOperator::from_triplets(2, 2, vec![(0, 0, 1.0), (1, 1, -1.0)]).unwrap(),
            rhs: vec![1.0, 1.0],
            interior_map: vec![0, 1],
            global_to_interior: vec![Some(0), Some(1)],
            n_vertices: 2,
            method: MethodTag::Fem,
        };
        assert!(matches!(
            solve_cg(&system, 1e-10, 10),
            Err(SolveError::NotPositiveDefinite { iteration: 0 })
        ));
    }

    #[test]
    fn iteration_cap_is_reported() {
        let mesh = generate_square_mesh(4, Pattern::Crisscross).unwrap();
        let dual = DualComplex::build(&mesh).unwrap();
        let matrix = assemble_dec(&mesh, &dual);
        let rhs = assemble_rhs_dec(&mesh, &dual, &ScalarField::constant(1.0));
        let system = apply_dirichlet(&matrix, &rhs, &mesh, MethodTag::Dec).unwrap();
        match solve_cg(&system, 1e-14, 2) {
            Err(SolveError::MaxIterations {
                iterations,
                residual,
            }) => {
                assert_eq!(iterations, 2);
                assert!(residual > 0.0);
            }
            other => panic!("expected iteration cap, got {other:?}"),
        }
    }

    #[test]
    fn energy_norm_of_constants_and_linears() {
        let mesh = generate_square_mesh(3, Pattern::Crisscross).unwrap();
        let constant = vec![2.5; mesh.n_vertices()];
        assert!(energy_norm(&mesh, &constant) < 1e-13);
        let linear: Vec<f64> = (0..mesh.n_vertices()).map(|v| mesh.position(v).x).collect();
        assert!((energy_norm(&mesh, &linear) - 1.0).abs() < 1e-13);
    }

    #[test]
    fn energy_norm_squared_equals_stiffness_quadratic_form() {
        let mesh = generate_square_mesh(2, Pattern::Crisscross).unwrap();
        let stiffness = assemble_fem(&mesh);
        let mut rng = rng::seeded(5);
        for _ in 0..10 {
            let v: Vec<f64> = (0..mesh.n_vertices())
                .map(|_| rng::uniform_sym(&mut rng))
                .collect();
            let quadratic = dot(&v, &stiffness.matvec(&v));
            let norm_sq = energy_norm(&mesh, &v).powi(2);
            assert!(
                (quadratic - norm_sq).abs() <= 1e-12 * quadratic.abs().max(1.0),
                "{quadratic} vs {norm_sq}"
            );
        }
    }

    #[test]
    fn l2_error_reproduces_linear_fields() {
        let mesh = generate_square_mesh(2, Pattern::Diagonal).unwrap();
        let reference = ScalarField::function("plane", |x, y| 2.0 * x - y + 0.5);
        let nodal: Vec<f64> = (0..mesh.n_vertices())
            .map(|v| reference.eval(mesh.position(v)))
            .collect();
        assert!(l2_error(&mesh, &nodal, &reference, QuadratureRule::MidEdge) < 1e-14);
    }

    #[test]
    fn l2_norm_of_sine_product_approaches_half() {
        let reference = ScalarField::function("sine", |x, y| {
            (std::f64::consts::PI * x).sin() * (std::f64::consts::PI * y).sin()
        });
        let mut values = Vec::new();
        for n in [16, 32] {
            let mesh = generate_square_mesh(n, Pattern::Crisscross).unwrap();
            let zero = vec![0.0; mesh.n_vertices()];
            values.push(l2_error(&mesh, &zero, &reference, QuadratureRule::MidEdge));
        }
        assert!((values[1] - 0.5).abs() <= 1e-3, "n=32 value {}", values[1]);
        assert!((values[1] - 0.5).abs() < (values[0] - 0.5).abs());
    }

    #[test]
    fn energy_error_against_reference_gradients() {
        let mesh = generate_square_mesh(3, Pattern::Diagonal).unwrap();
        // Interpolating a linear field reproduces its gradient exactly.
        let linear: Vec<f64> = (0..mesh.n_vertices())
            .map(|v| {
                let p = mesh.position(v);
                3.0 * p.x + 4.0 * p.y
            })
            .collect();
        let grad = VectorField::function("const-grad", |_, _| (3.0, 4.0));
        assert!(energy_error(&mesh, &linear, &grad, QuadratureRule::MidEdge) < 1e-13);

        // Against v = 0 the error is the energy norm of the reference:
        // pi / sqrt(2) for the sine product on the unit square.
        let sine_grad = VectorField::function("sine-grad", |x, y| {
            let pi = std::f64::consts::PI;
            (
                pi * (pi * x).cos() * (pi * y).sin(),
                pi * (pi * x).sin() * (pi * y).cos(),
            )
        });
        let mesh = generate_square_mesh(32, Pattern::Crisscross).unwrap();
        let zero = vec![0.0; mesh.n_vertices()];
        let value = energy_error(&mesh, &zero, &sine_grad, QuadratureRule::MidEdge);
        let exact = std::f64::consts::PI / 2.0f64.sqrt();
        assert!((value - exact).abs() < 1e-3, "{value} vs {exact}");
    }

    #[test]
    fn maximum_principle_on_m_matrix_mesh() {
        let mesh = generate_square_mesh(3, Pattern::Crisscross).unwrap();
        let dual = DualComplex::build(&mesh).unwrap();
        let matrix = assemble_dec(&mesh, &dual);
        let rhs = assemble_rhs_dec(&mesh, &dual, &ScalarField::constant(1.0));
        let system = apply_dirichlet(&matrix, &rhs, &mesh, MethodTag::Dec).unwrap();
        assert!(system.is_m_matrix());
        let report = solve_cg(
            &system,
            DEFAULT_TOL,
            default_max_iterations(system.n_unknowns()),
        )
        .unwrap();
        assert!(report.solution.iter().all(|&u| u >= 0.0));
    }

    #[test]
    fn report_block_lists_core_keys() {
        let system = smallest_crisscross_system();
        let report = solve_cg(&system, DEFAULT_TOL, 10).unwrap();
        let block = report.key_value_block();
        for key in [
            "method = dec",
            "n_interior = 1",
            "iterations",
            "wall_time_s",
        ] {
            assert!(block.contains(key), "missing {key} in:\n{block}");
        }
    }
}
