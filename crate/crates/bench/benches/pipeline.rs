use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use fipsynth_bench::{game, relation, GAMES};
use fipsynth_core::arena::{build, Limits};
use fipsynth_core::normalize::normalize;
use fipsynth_core::oracle::report;
use fipsynth_core::solve::{solve, synthesize};
use fipsynth_core::twotape::{fip_to_2dfa, is_indist_relation};

fn stages(c: &mut Criterion) {
    let mut group = c.benchmark_group("stages");
    for name in GAMES {
        let g = game(name);
        let n = normalize(&g).unwrap();
        let built = build(&n, Limits::default()).unwrap();
        group.bench_with_input(BenchmarkId::new("normalize", name), &g, |b, g| b.iter(|| normalize(black_box(g)).unwrap()));
        group.bench_with_input(BenchmarkId::new("build", name), &n, |b, n| {
            b.iter(|| build(black_box(n), Limits::default()).unwrap().arena.len())
        });
        group.bench_with_input(BenchmarkId::new("solve", name), &built.arena, |b, a| {
            b.iter(|| solve(black_box(a), &g.condition).winner)
        });
        group.bench_with_input(BenchmarkId::new("synthesize", name), &g, |b, g| {
            b.iter(|| synthesize(black_box(g), Limits::default()).unwrap().winner)
        });
    }
    group.finish();
}

fn relations(c: &mut Criterion) {
    let mut group = c.benchmark_group("two-tape");
    for name in GAMES {
        let g = game(name);
        group.bench_with_input(BenchmarkId::new("fip_to_2dfa", name), &g, |b, g| {
            b.iter(|| fip_to_2dfa(black_box(g)).unwrap().num_states())
        });
    }
    for name in ["fig5c.json", "fig8.json", "fig9.json"] {
        let r = relation(name);
        let vis = r.act.is_some();
        group.bench_with_input(BenchmarkId::new("is_indist_relation", name), &r, |b, r| {
            b.iter(|| is_indist_relation(black_box(r), vis).unwrap().is_valid())
        });
    }
    group.finish();
}

fn oracle(c: &mut Criterion) {
    let mut group = c.benchmark_group("oracle");
    group.sample_size(10);
    for name in ["peek.json", "sync-reach.json"] {
        let g = game(name);
        for depth in [3, 5] {
            group.bench_with_input(BenchmarkId::new(name, depth), &g, |b, g| b.iter(|| report(black_box(g), depth, None).unwrap().passed));
        }
    }
    group.finish();
}

criterion_group!(benches, stages, relations, oracle);
criterion_main!(benches);
