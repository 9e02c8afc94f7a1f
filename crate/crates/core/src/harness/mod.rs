//! Experiment harness: manufactured-solution convergence studies, the
//! stiffness/rhs equivalence fleet, and report emission.

use std::fs;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::assembly::{
    apply_dirichlet, assemble_dec, assemble_fem, assemble_rhs_box, assemble_rhs_dec,
    compare_matrices, compare_vectors, AssemblyError, BoxPiecewiseConstant, MethodTag, ScalarField,
};
use crate::dual::{DualComplex, DualError};
use crate::geometry::QuadratureRule;
use crate::mesh::{
    generate_perturbed_mesh, generate_square_mesh, mesh_json_string, MeshError, Pattern,
    TriangleMesh,
};
use crate::rng;
use crate::solver::{
    default_max_iterations, energy_error, l2_error, max_nodal_error, solve_cg, SolveError,
    VectorField, DEFAULT_TOL,
};
use crate::sparse::SparseOperator;

mod plot;

pub use plot::emit_svg_plot;

/// Relative tolerance for stiffness-matrix equivalence across assembly
/// routes.
pub const STIFFNESS_REL_TOL: f64 = 1e-12;
/// Absolute tolerance for right-hand-side equality under box-piecewise
/// constant sources.
pub const RHS_PIECEWISE_ABS_TOL: f64 = 1e-13;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid experiment config: {0}")]
    InvalidConfig(String),
    #[error("refinement level {level} (n = {n}) failed: {source}")]
    LevelFailed {
        level: usize,
        n: usize,
        #[source]
        source: Box<HarnessError>,
        /// Rows completed before the failure, for flushing.
        partial: Vec<ConvergenceRow>,
    },
    #[error("equivalence violated on {label}: {detail}")]
    EquivalenceViolation {
        label: String,
        detail: String,
        /// Offending mesh in the native file format, for post-mortems.
        mesh_dump: String,
    },
    #[error("no rows to emit")]
    EmptyRows,
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error(transparent)]
    Dual(#[from] DualError),
    #[error(transparent)]
    Assembly(#[from] AssemblyError),
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

fn sine_solution(x: f64, y: f64) -> f64 {
    (std::f64::consts::PI * x).sin() * (std::f64::consts::PI * y).sin()
}

fn sine_gradient(x: f64, y: f64) -> (f64, f64) {
    let pi = std::f64::consts::PI;
    (
        pi * (pi * x).cos() * (pi * y).sin(),
        pi * (pi * x).sin() * (pi * y).cos(),
    )
}

fn sine_source(x: f64, y: f64) -> f64 {
    2.0 * std::f64::consts::PI.powi(2) * sine_solution(x, y)
}

fn poly_solution(x: f64, y: f64) -> f64 {
    x * (1.0 - x) * y * (1.0 - y)
}

fn poly_gradient(x: f64, y: f64) -> (f64, f64) {
    (
        (1.0 - 2.0 * x) * y * (1.0 - y),
        x * (1.0 - x) * (1.0 - 2.0 * y),
    )
}

fn poly_source(x: f64, y: f64) -> f64 {
    2.0 * (x * (1.0 - x) + y * (1.0 - y))
}

/// An exact solution of the Dirichlet problem on the unit square together
/// with its gradient and source term.
#[derive(Clone, Copy)]
pub struct ManufacturedSolution {
    pub name: &'static str,
    solution: fn(f64, f64) -> f64,
    gradient: fn(f64, f64) -> (f64, f64),
    source: fn(f64, f64) -> f64,
}

/// `u = sin(pi x) sin(pi y)`, `f = 2 pi^2 u`.
pub const SINE: ManufacturedSolution = ManufacturedSolution {
    name: "sine",
    solution: sine_solution,
    gradient: sine_gradient,
    source: sine_source,
};

/// `u = x (1-x) y (1-y)` with the polynomial source
/// `f = 2 (x (1-x) + y (1-y))`.
pub const POLY: ManufacturedSolution = ManufacturedSolution {
    name: "poly",
    solution: poly_solution,
    gradient: poly_gradient,
    source: poly_source,
};

impl ManufacturedSolution {
    pub fn by_name(name: &str) -> Option<&'static ManufacturedSolution> {
        match name {
            "sine" => Some(&SINE),
            "poly" => Some(&POLY),
            _ => None,
        }
    }

    pub fn names() -> &'static [&'static str] {
        &["sine", "poly"]
    }

    pub fn solution_field(&self) -> ScalarField {
        ScalarField::function(self.name, self.solution)
    }

    pub fn gradient_field(&self) -> VectorField {
        VectorField::function(self.name, self.gradient)
    }

    pub fn source_field(&self) -> ScalarField {
        ScalarField::function(self.name, self.source)
    }
}

/// Configuration of a convergence study.
#[derive(Clone)]
pub struct ExperimentConfig {
    pub pattern: Pattern,
    /// Number of refinement levels; `n` doubles per level.
    pub levels: usize,
    /// Subdivisions at the coarsest level.
    pub base_n: usize,
    /// Zero disables perturbation.
    pub perturb_amplitude: f64,
    pub perturb_seed: u64,
    pub solution: &'static ManufacturedSolution,
    pub quadrature: QuadratureRule,
    pub solver_tol: f64,
    pub csv_out: Option<PathBuf>,
    pub svg_out: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn new(pattern: Pattern, levels: usize) -> Self {
        Self {
            pattern,
            levels,
            base_n: 4,
            perturb_amplitude: 0.0,
            perturb_seed: 0,
            solution: &SINE,
            quadrature: QuadratureRule::MidEdge,
            solver_tol: DEFAULT_TOL,
            csv_out: None,
            svg_out: None,
        }
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.levels < 2 {
            return Err(HarnessError::InvalidConfig(
                "at least 2 levels are needed to observe an order".into(),
            ));
        }
        if self.base_n == 0 {
            return Err(HarnessError::InvalidConfig(
                "base_n must be at least 1".into(),
            ));
        }
        if self.perturb_amplitude > 0.0 && self.pattern != Pattern::Diagonal {
            return Err(HarnessError::InvalidConfig(
                "perturbation applies to the diagonal pattern only".into(),
            ));
        }
        if self.solver_tol.is_nan() || self.solver_tol <= 0.0 {
            return Err(HarnessError::InvalidConfig(
                "solver tolerance must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Error norms of one method on one refinement level.
#[derive(Clone, Copy, Debug)]
pub struct MethodErrors {
    pub energy: f64,
    pub l2: f64,
    pub max_nodal: f64,
}

/// One refinement level of a convergence study.
#[derive(Clone, Debug)]
pub struct ConvergenceRow {
    pub level: usize,
    pub n: usize,
    pub h: f64,
    pub n_vertices: usize,
    pub n_interior: usize,
    pub dec: MethodErrors,
    /// Finite-element stiffness with the same nodal box right-hand side;
    /// an independent assembly route for the identical discrete system.
    pub fem: MethodErrors,
    /// log2 error ratios against the previous level, defined from the
    /// second level on.
    pub order_energy: Option<f64>,
    pub order_l2: Option<f64>,
}

fn level_mesh(cfg: &ExperimentConfig, n: usize) -> Result<TriangleMesh, MeshError> {
    if cfg.perturb_amplitude > 0.0 {
        generate_perturbed_mesh(n, cfg.perturb_amplitude, cfg.perturb_seed)
    } else {
        generate_square_mesh(n, cfg.pattern)
    }
}

fn method_errors(
    mesh: &TriangleMesh,
    solution: &[f64],
    ms: &ManufacturedSolution,
    rule: QuadratureRule,
) -> MethodErrors {
    MethodErrors {
        energy: energy_error(mesh, solution, &ms.gradient_field(), rule),
        l2: l2_error(mesh, solution, &ms.solution_field(), rule),
        max_nodal: max_nodal_error(mesh, solution, &ms.solution_field()),
    }
}

fn run_level(
    cfg: &ExperimentConfig,
    level: usize,
    n: usize,
) -> Result<ConvergenceRow, HarnessError> {
    let mesh = level_mesh(cfg, n)?;
    let dual = DualComplex::build(&mesh)?;
    let source = cfg.solution.source_field();
    let rhs = assemble_rhs_dec(&mesh, &dual, &source);

    let mut reports = Vec::with_capacity(2);
    for (matrix, tag) in [
        (assemble_dec(&mesh, &dual), MethodTag::Dec),
        (assemble_fem(&mesh), MethodTag::Fem),
    ] {
        let system = apply_dirichlet(&matrix, &rhs, &mesh, tag)?;
        let max_iter = default_max_iterations(system.n_unknowns());
        reports.push(solve_cg(&system, cfg.solver_tol, max_iter)?);
    }

    Ok(ConvergenceRow {
        level,
        n,
        h: 1.0 / n as f64,
        n_vertices: mesh.n_vertices(),
        n_interior: reports[0].n_interior,
        dec: method_errors(&mesh, &reports[0].solution, cfg.solution, cfg.quadrature),
        fem: method_errors(&mesh, &reports[1].solution, cfg.solution, cfg.quadrature),
        order_energy: None,
        order_l2: None,
    })
}

/// Run a convergence study: per level, assemble the system, solve, and
/// measure errors against the manufactured solution. A failing level
/// aborts; the rows already completed travel inside the error.
pub fn run_convergence(cfg: &ExperimentConfig) -> Result<Vec<ConvergenceRow>, HarnessError> {
    cfg.validate()?;
    let mut rows: Vec<ConvergenceRow> = Vec::with_capacity(cfg.levels);
    for level in 0..cfg.levels {
        let n = cfg.base_n << level;
        match run_level(cfg, level, n) {
            Ok(mut row) => {
                if let Some(prev) = rows.last() {
                    row.order_energy = Some((prev.dec.energy / row.dec.energy).log2());
                    row.order_l2 = Some((prev.dec.l2 / row.dec.l2).log2());
                }
                rows.push(row);
            }
            Err(source) => {
                return Err(HarnessError::LevelFailed {
                    level,
                    n,
                    source: Box::new(source),
                    partial: rows,
                });
            }
        }
    }
    Ok(rows)
}

/// Exact CSV column set of the convergence report, in order.
pub const CSV_HEADER: &str = "level,n,h,n_vertices,n_interior,energy_err_dec,l2_err_dec,max_err_dec,energy_err_fem,l2_err_fem,max_err_fem,order_energy,order_l2";

fn option_cell(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Render rows as CSV text (header plus one line per row).
pub fn csv_string(rows: &[ConvergenceRow]) -> Result<String, HarnessError> {
    if rows.is_empty() {
        return Err(HarnessError::EmptyRows);
    }
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
            r.level,
            r.n,
            r.h,
            r.n_vertices,
            r.n_interior,
            r.dec.energy,
            r.dec.l2,
            r.dec.max_nodal,
            r.fem.energy,
            r.fem.l2,
            r.fem.max_nodal,
            option_cell(r.order_energy),
            option_cell(r.order_l2),
        ));
    }
    Ok(out)
}

/// Write the CSV report; nothing is created when `rows` is empty.
pub fn emit_csv(rows: &[ConvergenceRow], path: impl AsRef<Path>) -> Result<(), HarnessError> {
    let text = csv_string(rows)?;
    let path = path.as_ref();
    fs::write(path, text).map_err(|source| HarnessError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// The labelled meshes of the equivalence fleet: diagonal, crisscross,
/// and perturbed families interleaved, sizes up to n = 32.
pub fn fleet_meshes(seed: u64, count: usize) -> Result<Vec<(String, TriangleMesh)>, MeshError> {
    const DIAGONAL_N: [usize; 5] = [2, 4, 8, 16, 32];
    const CRISSCROSS_N: [usize; 5] = [1, 2, 4, 8, 16];
    const PERTURBED_N: [usize; 3] = [4, 8, 16];
    let mut fleet = Vec::with_capacity(count);
    for i in 0..count {
        let cycle = i / 4;
        let (label, mesh) = match i % 4 {
            0 => {
                let n = DIAGONAL_N[cycle % DIAGONAL_N.len()];
                (
                    format!("diagonal-n{n}"),
                    generate_square_mesh(n, Pattern::Diagonal)?,
                )
            }
            1 => {
                let n = CRISSCROSS_N[cycle % CRISSCROSS_N.len()];
                (
                    format!("crisscross-n{n}"),
                    generate_square_mesh(n, Pattern::Crisscross)?,
                )
            }
            rest => {
                let n = PERTURBED_N[(2 * cycle + rest - 2) % PERTURBED_N.len()];
                let amplitude = if rest == 2 { 0.25 } else { 0.35 };
                let mesh_seed = seed.wrapping_add(i as u64);
                (
                    format!("perturbed-n{n}-a{amplitude}-s{mesh_seed}"),
                    generate_perturbed_mesh(n, amplitude, mesh_seed)?,
                )
            }
        };
        fleet.push((label, mesh));
    }
    Ok(fleet)
}

/// Worst deviations observed over an equivalence fleet run.
#[derive(Clone, Debug)]
pub struct FleetReport {
    pub n_meshes: usize,
    pub worst_matrix_rel: f64,
    pub worst_matrix_label: String,
    pub worst_rhs_abs: f64,
    pub worst_rhs_label: String,
}

impl std::fmt::Display for FleetReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "meshes checked: {}", self.n_meshes)?;
        writeln!(
            f,
            "worst stiffness deviation (relative): {:.3e} on {}",
            self.worst_matrix_rel, self.worst_matrix_label
        )?;
        writeln!(
            f,
            "worst rhs deviation for box-constant sources: {:.3e} on {}",
            self.worst_rhs_abs, self.worst_rhs_label
        )
    }
}

/// Compare two stiffness matrices for one mesh; a deviation beyond
/// [`STIFFNESS_REL_TOL`] aborts with the worst entry location (its row
/// and column are the vertex pair of the offending edge) and the mesh
/// attached for post-mortems.
pub fn verify_stiffness_pair(
    label: &str,
    mesh: &TriangleMesh,
    a: &SparseOperator,
    b: &SparseOperator,
) -> Result<f64, HarnessError> {
    let report = compare_matrices(a, b)?;
    if !report.within(STIFFNESS_REL_TOL) {
        return Err(HarnessError::EquivalenceViolation {
            label: label.to_string(),
            detail: format!(
                "stiffness matrices differ: {report}; worst entry couples vertices {} and {}",
                report.worst.0, report.worst.1
            ),
            mesh_dump: mesh_json_string(mesh),
        });
    }
    Ok(report.rel_diff)
}

/// Check one mesh: the two stiffness routes must agree relatively to
/// [`STIFFNESS_REL_TOL`], and the nodal and box-integrated right-hand
/// sides must agree to [`RHS_PIECEWISE_ABS_TOL`] for a source that is
/// constant on each box.
pub fn check_equivalence(
    label: &str,
    mesh: &TriangleMesh,
    box_values: Vec<f64>,
) -> Result<(f64, f64), HarnessError> {
    let dual = DualComplex::build(mesh)?;
    let matrix_rel =
        verify_stiffness_pair(label, mesh, &assemble_dec(mesh, &dual), &assemble_fem(mesh))?;
    let source = BoxPiecewiseConstant(box_values);
    let nodal = assemble_rhs_dec(mesh, &dual, &source);
    let boxed = assemble_rhs_box(mesh, &dual, &source, QuadratureRule::MidEdge);
    let rhs_report = compare_vectors(&nodal, &boxed)?;
    if rhs_report.max_abs_diff > RHS_PIECEWISE_ABS_TOL {
        return Err(HarnessError::EquivalenceViolation {
            label: label.to_string(),
            detail: format!(
                "right-hand sides differ for a box-constant source at vertex {}: {rhs_report}",
                rhs_report.worst.0
            ),
            mesh_dump: mesh_json_string(mesh),
        });
    }
    Ok((matrix_rel, rhs_report.max_abs_diff))
}

/// Assemble both stiffness routes and both right-hand sides over a
/// seeded fleet of structured and perturbed meshes and verify that they
/// agree. Any violation aborts with the offending mesh attached.
pub fn run_equivalence_fleet(seed: u64, count: usize) -> Result<FleetReport, HarnessError> {
    if count == 0 {
        return Err(HarnessError::InvalidConfig(
            "fleet count must be at least 1".into(),
        ));
    }
    let fleet = fleet_meshes(seed, count)?;
    let mut rng = rng::seeded(seed ^ 0x9e37_79b9_7f4a_7c15);
    let mut report = FleetReport {
        n_meshes: fleet.len(),
        worst_matrix_rel: 0.0,
        worst_matrix_label: String::new(),
        worst_rhs_abs: 0.0,
        worst_rhs_label: String::new(),
    };
    for (label, mesh) in &fleet {
        let values: Vec<f64> = (0..mesh.n_vertices())
            .map(|_| rng::uniform_sym(&mut rng))
            .collect();
        let (matrix_rel, rhs_abs) = check_equivalence(label, mesh, values)?;
        if matrix_rel > report.worst_matrix_rel {
            report.worst_matrix_rel = matrix_rel;
            report.worst_matrix_label = label.clone();
        }
        if rhs_abs > report.worst_rhs_abs {
            report.worst_rhs_abs = rhs_abs;
            report.worst_rhs_label = label.clone();
        }
    }
    Ok(report)
}
