//! Sequential against rayon-parallel evaluation of the same workload: build
//! the engine, compute the z-partition, then answer a few lex and z queries.
//! Each iteration starts from a fresh engine so memoized LPs are not reused.
//!
//! The informational table printed first shows how one workload grows with
//! the number of atoms. Worlds double per atom and the lex search may visit
//! exponentially many default subsets, so the growth is expected.

use std::hint::black_box;
use std::time::Instant;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use plp_core::defaults::{Engine, EngineConfig, Semantics};
use plp_core::ground::split_theory;
use plp_core::oracle::random::rng;
use plp_core::oracle::{random_formula, random_program, RandomParams};
use plp_core::syntax::{Formula, Program};

const SEED: u64 = 7;

struct Workload {
    params: RandomParams,
    program: Program,
    queries: Vec<(Formula, Formula)>,
}

/// The first consistent program for `atoms` atoms, with four queries.
fn workload(atoms: usize) -> Workload {
    let params = RandomParams { atoms, defaults: 6, strict: 2, granularity: 4 };
    for seed in SEED.. {
        let program = random_program(seed, &params);
        if run(&params, &program, &[], false).is_some() {
            let names = params.atom_names();
            let mut r = rng(seed);
            let queries = (0..4).map(|_| (random_formula(&mut r, &names), random_formula(&mut r, &names))).collect();
            return Workload { params, program, queries };
        }
    }
    unreachable!()
}

fn run(params: &RandomParams, program: &Program, queries: &[(Formula, Formula)], parallel: bool) -> Option<usize> {
    let theory = split_theory(program.iter().cloned());
    let engine =
        Engine::from_theory(theory, params.base(), EngineConfig { parallel, ..EngineConfig::default() }).unwrap();
    let levels = engine.z_partition().unwrap()?.len();
    for (beta, alpha) in queries {
        for s in [Semantics::Z, Semantics::Lex] {
            black_box(engine.tight(beta, alpha, s).unwrap());
        }
    }
    Some(levels)
}

fn growth_note(sizes: &[usize]) {
    println!("runtime growth (sequential, one pass):");
    for &atoms in sizes {
        let w = workload(atoms);
        let start = Instant::now();
        run(&w.params, &w.program, &w.queries, false);
        println!("  {atoms} atoms, {:>4} worlds: {:>9.2} ms", 1usize << atoms, start.elapsed().as_secs_f64() * 1e3);
    }
}

fn bench(c: &mut Criterion) {
    let sizes = [4, 6, 8];
    growth_note(&sizes);
    let mut group = c.benchmark_group("engine");
    group.sample_size(10);
    for atoms in sizes {
        let w = workload(atoms);
        group.bench_with_input(BenchmarkId::new("sequential", atoms), &w, |b, w| {
            b.iter(|| run(&w.params, &w.program, &w.queries, false))
        });
        group.bench_with_input(BenchmarkId::new("parallel", atoms), &w, |b, w| {
            b.iter(|| run(&w.params, &w.program, &w.queries, plp_core::par::AVAILABLE))
        });
    }
    group.finish();
}

criterion_group!(benches, bench);
criterion_main!(benches);
