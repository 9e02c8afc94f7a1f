use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use tridec::assembly::{apply_dirichlet, assemble_dec, assemble_rhs_dec, MethodTag, ScalarField};
use tridec::solver::{default_max_iterations, solve_cg, DEFAULT_TOL};
use tridec_bench::{crisscross, dual_of};

fn bench_cg(c: &mut Criterion) {
    let mut group = c.benchmark_group("conjugate_gradients");
    for n in [8, 16, 32] {
        let mesh = crisscross(n);
        let dual = dual_of(&mesh);
        let matrix = assemble_dec(&mesh, &dual);
        let rhs = assemble_rhs_dec(&mesh, &dual, &ScalarField::constant(1.0));
        let system = apply_dirichlet(&matrix, &rhs, &mesh, MethodTag::Dec).unwrap();
        let max_iter = default_max_iterations(system.n_unknowns());
        group.bench_with_input(BenchmarkId::from_parameter(n), &system, |b, system| {
            b.iter(|| solve_cg(system, DEFAULT_TOL, max_iter).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, bench_cg);
criterion_main!(benches);
