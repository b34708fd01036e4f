use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use regroup_bench::{office_map, office_team, random_costs, random_map};
use regroup_core::{hungarian, plan_chain, propagate, ChainParams, Point};
use std::hint::black_box;

fn fmm(c: &mut Criterion) {
    let office = office_map();
    let cluttered = random_map(100, 0.3, 7);
    let mut g = c.benchmark_group("propagate");
    g.bench_function("office_100", |b| {
        b.iter(|| propagate(black_box(&office), Point::new(5.0, 5.0)).unwrap())
    });
    let start = (0..cluttered.len())
        .map(|i| cluttered.cell_at(i))
        .find(|&c| cluttered.is_free(c))
        .map(|c| cluttered.center(c))
        .unwrap();
    g.bench_function("random_100_d30", |b| b.iter(|| propagate(black_box(&cluttered), start).unwrap()));
    g.finish();
}

fn assignment(c: &mut Criterion) {
    let mut g = c.benchmark_group("hungarian");
    for (agents, goals) in [(7, 5), (20, 15), (60, 40)] {
        let costs = random_costs(agents, goals, 3);
        g.bench_with_input(BenchmarkId::from_parameter(format!("{agents}x{goals}")), &costs, |b, m| {
            b.iter(|| hungarian(black_box(m)).unwrap())
        });
    }
    g.finish();
}

fn chain(c: &mut Criterion) {
    let map = office_map();
    let team = office_team();
    let active = vec![true; team.len()];
    let params = ChainParams::default();
    // distance fields come from the per-thread memo after the first
    // iteration, so this is the warm replanning cost
    c.bench_function("plan_chain/office_7", |b| {
        b.iter(|| {
            plan_chain(
                black_box(&team),
                &active,
                Point::new(5.0, 5.0),
                Point::new(80.0, 80.0),
                &map,
                &params,
            )
        })
    });
}

criterion_group!(benches, fmm, assignment, chain);
criterion_main!(benches);
