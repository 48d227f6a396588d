use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use dqpass::dqstamp::{assemble_ydq, ParasiticConfig};
use dqpass::netcase::ieee9;
use dqpass::par::Execution;
use dqpass::passcheck::{reproduce_table_iii, sweep_psd, ClassifyOptions, SweepGrid, Tolerances};
use dqpass::polarmodels::{build_j_of_s, build_jdf};
use dqpass::powerflow::solve_powerflow;

fn sweeps(c: &mut Criterion) {
    let case = ieee9();
    let op = solve_powerflow(&case).unwrap();
    let ydq = assemble_ydq(&case, &ParasiticConfig::default()).unwrap();
    let jdf = build_jdf(&build_j_of_s(&ydq, &op).unwrap(), 0.01).unwrap();
    let tol = Tolerances::default();

    let mut group = c.benchmark_group("sweep_psd");
    for ppd in [20usize, 200] {
        let grid = SweepGrid { points_per_decade: ppd, ..Default::default() };
        for (name, exec) in [("parallel", Execution::Parallel), ("sequential", Execution::Sequential)] {
            group.bench_with_input(BenchmarkId::new(format!("ydq/{name}"), ppd), &grid, |b, g| {
                b.iter(|| sweep_psd(black_box(&ydq), g, &tol, exec).unwrap())
            });
            group.bench_with_input(BenchmarkId::new(format!("jdf/{name}"), ppd), &grid, |b, g| {
                b.iter(|| sweep_psd(black_box(&jdf), g, &tol, exec).unwrap())
            });
        }
    }
    group.finish();
}

fn grid(c: &mut Criterion) {
    let case = ieee9();
    let mut group = c.benchmark_group("table_iii");
    group.sample_size(10);
    for (name, exec) in [("parallel", Execution::Parallel), ("sequential", Execution::Sequential)] {
        let opts = ClassifyOptions { execution: exec, ..Default::default() };
        group.bench_function(name, |b| b.iter(|| reproduce_table_iii(black_box(&case), &opts).unwrap()));
    }
    group.finish();
}

criterion_group!(benches, sweeps, grid);
criterion_main!(benches);
