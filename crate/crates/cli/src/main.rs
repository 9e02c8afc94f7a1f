//! Command-line interface: generate meshes, audit them, solve the
//! Poisson problem, compare the assembly routes, and run convergence
//! studies.
//!
//! Exit codes: 0 on success, 1 on validation errors (bad flags, bad
//! files, bad meshes), 2 on numerical failures (solver breakdown or an
//! equivalence violation).

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use tridec::assembly::{
    apply_dirichlet, assemble_dec, assemble_fem, assemble_rhs_box, assemble_rhs_dec,
    compare_matrices, compare_vectors, AssemblyError, MethodTag, ScalarField,
};
use tridec::dual::{well_centered_report, DualComplex};
use tridec::harness::{
    self, emit_csv, emit_svg_plot, run_convergence, ExperimentConfig, HarnessError,
    ManufacturedSolution,
};
use tridec::mesh::{generate_perturbed_mesh, generate_square_mesh, load_mesh, save_mesh, Pattern};
use tridec::solver::{default_max_iterations, solve_cg, SolveReport};
use tridec::{QuadratureRule, SparseOperator};

#[derive(Parser)]
#[command(
    name = "tridec",
    version,
    about = "2D Poisson solver on triangle meshes with a circumcentric dual"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a structured unit-square mesh.
    Gen(GenArgs),
    /// Audit a mesh and its dual (counts, partitions, well-centeredness).
    Check(CheckArgs),
    /// Assemble and solve the Poisson problem on a mesh.
    Solve(SolveArgs),
    /// Compare the assembly routes entrywise on a mesh.
    Compare(CompareArgs),
    /// Run a manufactured-solution convergence study.
    Converge(ConvergeArgs),
}

#[derive(Args)]
struct GenArgs {
    /// Domain shape; only the unit square is supported.
    #[arg(long, default_value = "square")]
    shape: String,
    /// Subdivisions per side.
    #[arg(long)]
    n: usize,
    /// Cell subdivision pattern: diagonal or crisscross.
    #[arg(long)]
    pattern: String,
    /// Perturbation amplitude as a fraction of the cell width (diagonal
    /// pattern only).
    #[arg(long)]
    perturb: Option<f64>,
    /// Seed for the perturbation.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output mesh file.
    #[arg(short, long)]
    output: PathBuf,
}

#[derive(Args)]
struct CheckArgs {
    mesh: PathBuf,
    /// Print the full dual-complex table (circumcenters, midpoints,
    /// ratios, box areas).
    #[arg(long)]
    dump_dual: bool,
}

#[derive(Args)]
struct SolveArgs {
    mesh: PathBuf,
    /// Source term: a constant, or a manufactured solution name
    /// (sine, poly) whose exact solution is used for error reporting.
    #[arg(long)]
    f: String,
    /// Assembly route: dec, fem, or box.
    #[arg(long, default_value = "dec")]
    method: String,
    /// Relative residual tolerance for conjugate gradients.
    #[arg(long, default_value_t = tridec::solver::DEFAULT_TOL)]
    tol: f64,
    /// Iteration cap for conjugate gradients (default: 10x the unknowns).
    #[arg(long)]
    max_iter: Option<usize>,
    /// Write the nodal solution as CSV (vertex, x, y, value).
    #[arg(long)]
    dump_solution: Option<PathBuf>,
}

#[derive(Args)]
struct CompareArgs {
    mesh: PathBuf,
    /// Export matrices and right-hand sides as triplet text into this
    /// directory.
    #[arg(long)]
    export_dir: Option<PathBuf>,
}

#[derive(Args)]
struct ConvergeArgs {
    /// Mesh pattern: diagonal or crisscross.
    #[arg(long)]
    pattern: String,
    /// Number of refinement levels (n doubles per level).
    #[arg(long)]
    levels: usize,
    /// Subdivisions at the coarsest level.
    #[arg(long, default_value_t = 4)]
    base_n: usize,
    /// Perturbation amplitude (diagonal pattern only).
    #[arg(long)]
    perturb: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Manufactured solution: sine or poly.
    #[arg(long, default_value = "sine")]
    solution: String,
    /// Output CSV path.
    #[arg(long)]
    out: PathBuf,
    /// Optional SVG log-log plot path.
    #[arg(long)]
    plot: Option<PathBuf>,
}

/// Failures carrying their process exit code.
enum CliError {
    /// Bad input: flags, files, meshes. Exit code 1.
    Validation(String),
    /// Numerical breakdown: solver or equivalence. Exit code 2.
    Numerical(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Numerical(_) => 2,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Validation(m) | CliError::Numerical(m) => m,
        }
    }
}

impl From<tridec::mesh::MeshError> for CliError {
    fn from(e: tridec::mesh::MeshError) -> Self {
        CliError::Validation(e.to_string())
    }
}

impl From<tridec::dual::DualError> for CliError {
    fn from(e: tridec::dual::DualError) -> Self {
        CliError::Validation(e.to_string())
    }
}

impl From<AssemblyError> for CliError {
    fn from(e: AssemblyError) -> Self {
        CliError::Validation(e.to_string())
    }
}

impl From<tridec::solver::SolveError> for CliError {
    fn from(e: tridec::solver::SolveError) -> Self {
        CliError::Numerical(e.to_string())
    }
}

impl From<HarnessError> for CliError {
    fn from(e: HarnessError) -> Self {
        match e {
            HarnessError::EquivalenceViolation { .. } | HarnessError::Solve(_) => {
                CliError::Numerical(e.to_string())
            }
            other => CliError::Validation(other.to_string()),
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // --help and --version arrive here as "errors" that exit 0.
            let is_usage = e.use_stderr();
            let _ = e.print();
            return if is_usage {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match cli.command {
        Command::Gen(args) => cmd_gen(args),
        Command::Check(args) => cmd_check(args),
        Command::Solve(args) => cmd_solve(args),
        Command::Compare(args) => cmd_compare(args),
        Command::Converge(args) => cmd_converge(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.code())
        }
    }
}

fn parse_pattern(s: &str) -> Result<Pattern, CliError> {
    s.parse::<Pattern>()
        .map_err(|e| CliError::Validation(e.to_string()))
}

fn cmd_gen(args: GenArgs) -> Result<(), CliError> {
    if args.shape != "square" {
        return Err(CliError::Validation(format!(
            "unsupported shape '{}'; only 'square' is available",
            args.shape
        )));
    }
    let pattern = parse_pattern(&args.pattern)?;
    let mesh = match args.perturb {
        Some(amplitude) if amplitude != 0.0 => {
            if pattern != Pattern::Diagonal {
                return Err(CliError::Validation(
                    "--perturb applies to the diagonal pattern only".into(),
                ));
            }
            generate_perturbed_mesh(args.n, amplitude, args.seed)?
        }
        _ => generate_square_mesh(args.n, pattern)?,
    };
    save_mesh(&mesh, &args.output)?;
    println!(
        "wrote {} ({} vertices, {} edges, {} triangles)",
        args.output.display(),
        mesh.n_vertices(),
        mesh.n_edges(),
        mesh.n_triangles()
    );
    Ok(())
}

fn cmd_check(args: CheckArgs) -> Result<(), CliError> {
    let mesh = load_mesh(&args.mesh)?;
    let dual = DualComplex::build(&mesh)?;

    println!("mesh: {}", args.mesh.display());
    println!(
        "counts: N0 = {}, N1 = {}, N2 = {}",
        mesh.n_vertices(),
        mesh.n_edges(),
        mesh.n_triangles()
    );
    println!("euler characteristic: {}", mesh.euler_characteristic());
    println!(
        "boundary: {} vertices, {} edges; interior vertices: {}",
        mesh.n_boundary_vertices(),
        mesh.edges().iter().filter(|e| e.boundary).count(),
        mesh.n_interior_vertices()
    );
    let area = mesh.total_area();
    println!("triangle area total: {area}");
    let boxes: f64 = dual.box_areas().iter().sum();
    println!(
        "box area total: {boxes} (deviation from triangles: {:e})",
        (boxes - area).abs()
    );
    let mut worst_kite = 0.0f64;
    for tri in mesh.triangles() {
        let sum: f64 = dual.kite_areas(tri.id).iter().sum();
        worst_kite = worst_kite.max((sum - tri.area).abs());
    }
    println!("worst kite-partition deviation: {worst_kite:e}");
    print!("{}", well_centered_report(&mesh, &dual));

    if args.dump_dual {
        println!("-- dual complex --");
        println!("triangle circumcenters (id, x, y, well_centered):");
        for t in 0..mesh.n_triangles() {
            let c = dual.circumcenter(t);
            println!("  {t} {} {} {}", c.x, c.y, dual.is_well_centered(t));
        }
        println!("edge midpoints and dual ratios (id, x, y, sum e/l):");
        for e in 0..mesh.n_edges() {
            let m = dual.midpoint(e);
            println!("  {e} {} {} {}", m.x, m.y, dual.edge_dual_ratio(e));
        }
        println!("vertex box areas (id, area):");
        for v in 0..mesh.n_vertices() {
            println!("  {v} {}", dual.box_area(v));
        }
    }
    Ok(())
}

fn resolve_source(
    name: &str,
) -> Result<(ScalarField, Option<&'static ManufacturedSolution>), CliError> {
    if let Ok(value) = name.parse::<f64>() {
        return Ok((ScalarField::constant(value), None));
    }
    match ManufacturedSolution::by_name(name) {
        Some(ms) => Ok((ms.source_field(), Some(ms))),
        None => Err(CliError::Validation(format!(
            "unknown source '{name}': expected a number or one of {:?}",
            ManufacturedSolution::names()
        ))),
    }
}

fn cmd_solve(args: SolveArgs) -> Result<(), CliError> {
    let mesh = load_mesh(&args.mesh)?;
    let method: MethodTag = args
        .method
        .parse()
        .map_err(|e: String| CliError::Validation(e))?;
    if args.tol.is_nan() || args.tol <= 0.0 {
        return Err(CliError::Validation("--tol must be positive".into()));
    }
    let (source, manufactured) = resolve_source(&args.f)?;
    let dual = DualComplex::build(&mesh)?;

    let matrix = match method {
        MethodTag::Dec => assemble_dec(&mesh, &dual),
        MethodTag::Fem | MethodTag::Box => assemble_fem(&mesh),
    };
    let rhs = match method {
        MethodTag::Box => assemble_rhs_box(&mesh, &dual, &source, QuadratureRule::MidEdge),
        _ => assemble_rhs_dec(&mesh, &dual, &source),
    };
    let system = apply_dirichlet(&matrix, &rhs, &mesh, method)?;
    if !system.is_m_matrix() {
        eprintln!("note: reduced matrix is not an M-matrix (obtuse triangles present)");
    }
    let max_iter = args
        .max_iter
        .unwrap_or_else(|| default_max_iterations(system.n_unknowns()));
    let mut report: SolveReport = solve_cg(&system, args.tol, max_iter)?;

    if let Some(ms) = manufactured {
        let rule = QuadratureRule::MidEdge;
        report.energy_error = Some(tridec::solver::energy_error(
            &mesh,
            &report.solution,
            &ms.gradient_field(),
            rule,
        ));
        report.l2_error = Some(tridec::solver::l2_error(
            &mesh,
            &report.solution,
            &ms.solution_field(),
            rule,
        ));
        report.max_nodal_error = Some(tridec::solver::max_nodal_error(
            &mesh,
            &report.solution,
            &ms.solution_field(),
        ));
    }
    print!("{}", report.key_value_block());

    if let Some(path) = args.dump_solution {
        write_text(&path, &report.solution_csv(&mesh))?;
        println!("solution written to {}", path.display());
    }
    Ok(())
}

fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text)
        .map_err(|e| CliError::Validation(format!("cannot write {}: {e}", path.display())))
}

fn export_vector(path: &Path, v: &[f64]) -> Result<(), CliError> {
    let triplets: Vec<(usize, usize, f64)> =
        v.iter().enumerate().map(|(i, &x)| (i, 0, x)).collect();
    let matrix =
        SparseOperator::from_triplets(v.len(), 1, triplets).expect("vector indices are in range");
    write_text(path, &matrix.to_triplet_string())
}

fn cmd_compare(args: CompareArgs) -> Result<(), CliError> {
    let mesh = load_mesh(&args.mesh)?;
    let dual = DualComplex::build(&mesh)?;

    let a_dec = assemble_dec(&mesh, &dual);
    let a_fem = assemble_fem(&mesh);
    let matrix_report = compare_matrices(&a_dec, &a_fem)?;
    println!("stiffness (dec vs fem): {matrix_report}");

    // Box-piecewise-constant source: the two right-hand-side rules must
    // coincide. Use the vertex index pattern as the constants.
    let values: Vec<f64> = (0..mesh.n_vertices())
        .map(|v| 0.5 + (v % 7) as f64 * 0.25)
        .collect();
    let constant_source = tridec::assembly::BoxPiecewiseConstant(values);
    let nodal = assemble_rhs_dec(&mesh, &dual, &constant_source);
    let boxed = assemble_rhs_box(&mesh, &dual, &constant_source, QuadratureRule::MidEdge);
    let rhs_report = compare_vectors(&nodal, &boxed)?;
    println!("rhs, box-constant source (nodal vs box rule): {rhs_report}");

    // Smooth source: the rules differ by quadrature; informational only.
    let sine = ManufacturedSolution::by_name("sine").expect("built-in solution");
    let smooth_nodal = assemble_rhs_dec(&mesh, &dual, &sine.source_field());
    let smooth_boxed =
        assemble_rhs_box(&mesh, &dual, &sine.source_field(), QuadratureRule::MidEdge);
    let norm: f64 = smooth_nodal
        .iter()
        .zip(&smooth_boxed)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt();
    println!("rhs, smooth sine source: |nodal - box|_2 = {norm:e} (shrinks under refinement)");

    if let Some(dir) = &args.export_dir {
        fs::create_dir_all(dir)
            .map_err(|e| CliError::Validation(format!("cannot create {}: {e}", dir.display())))?;
        write_text(&dir.join("stiffness_dec.txt"), &a_dec.to_triplet_string())?;
        write_text(&dir.join("stiffness_fem.txt"), &a_fem.to_triplet_string())?;
        export_vector(&dir.join("rhs_nodal.txt"), &nodal)?;
        export_vector(&dir.join("rhs_box.txt"), &boxed)?;
        println!("operators exported to {}", dir.display());
    }

    let matrices_ok = matrix_report.within(harness::STIFFNESS_REL_TOL);
    let rhs_ok = rhs_report.max_abs_diff <= harness::RHS_PIECEWISE_ABS_TOL;
    if matrices_ok && rhs_ok {
        println!("equivalence holds");
        Ok(())
    } else {
        Err(CliError::Numerical(format!(
            "equivalence violated (matrices ok: {matrices_ok}, rhs ok: {rhs_ok})"
        )))
    }
}

fn cmd_converge(args: ConvergeArgs) -> Result<(), CliError> {
    let mut cfg = ExperimentConfig::new(parse_pattern(&args.pattern)?, args.levels);
    cfg.base_n = args.base_n;
    if let Some(amplitude) = args.perturb {
        cfg.perturb_amplitude = amplitude;
        cfg.perturb_seed = args.seed;
    }
    cfg.solution = ManufacturedSolution::by_name(&args.solution).ok_or_else(|| {
        CliError::Validation(format!(
            "unknown solution '{}': expected one of {:?}",
            args.solution,
            ManufacturedSolution::names()
        ))
    })?;

    let rows = match run_convergence(&cfg) {
        Ok(rows) => rows,
        Err(HarnessError::LevelFailed {
            level,
            n,
            source,
            partial,
        }) => {
            // Flush whatever completed before failing.
            if !partial.is_empty() {
                emit_csv(&partial, &args.out)?;
                eprintln!(
                    "level {level} (n = {n}) failed; {} rows flushed to {}",
                    partial.len(),
                    args.out.display()
                );
            }
            return Err(HarnessError::LevelFailed {
                level,
                n,
                source,
                partial: Vec::new(),
            }
            .into());
        }
        Err(other) => return Err(other.into()),
    };

    emit_csv(&rows, &args.out)?;
    println!("wrote {}", args.out.display());
    if let Some(plot) = &args.plot {
        emit_svg_plot(&rows, plot)?;
        println!("wrote {}", plot.display());
    }
    for row in &rows {
        println!(
            "level {} n {:>3}: energy {:.6e}  l2 {:.6e}  order(e) {}  order(l2) {}",
            row.level,
            row.n,
            row.dec.energy,
            row.dec.l2,
            row.order_energy
                .map(|o| format!("{o:.3}"))
                .unwrap_or_else(|| "-".into()),
            row.order_l2
                .map(|o| format!("{o:.3}"))
                .unwrap_or_else(|| "-".into()),
        );
    }
    Ok(())
}
