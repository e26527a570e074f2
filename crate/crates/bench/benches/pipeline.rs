use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use trp_bench::{fixture, sample_generation};
use trp_core::level::strip_threats;
use trp_core::metrics::{is_playable, self_similarity};
use trp_core::pipeline::{fill, partition_sketch, place_threats, rank_threats};
use trp_core::rng::stream;
use trp_core::{generate, mc_generate, run_playthrough, train};

fn stages(c: &mut Criterion) {
    for name in ["dungeon", "platformer"] {
        let (d, src) = fixture(name);
        let g = sample_generation(&d, &src, 0);
        let stripped = strip_threats(&src, &d.kit.threats);

        c.bench_function(&format!("{name}/partition"), |b| {
            let mut rng = stream(1);
            b.iter(|| partition_sketch(black_box(src.width()), src.height(), d.kit.s, &mut rng))
        });
        c.bench_function(&format!("{name}/fill"), |b| {
            let mut rng = stream(2);
            b.iter(|| fill(black_box(&g.sketch), &stripped, d.kit.s, &mut rng).unwrap())
        });
        c.bench_function(&format!("{name}/threats"), |b| {
            b.iter(|| place_threats(&g.filled, &rank_threats(black_box(&g.record)), d.kit.e))
        });
        c.bench_function(&format!("{name}/playable"), |b| {
            b.iter(|| is_playable(black_box(&g.level), d.kind()).unwrap())
        });
    }
}

fn search(c: &mut Criterion) {
    let mut group = c.benchmark_group("search");
    group.sample_size(10);
    for name in ["dungeon", "platformer"] {
        let (d, src) = fixture(name);
        let game = d.game(&src).unwrap();
        group.bench_function(format!("{name}/playthrough"), |b| {
            let mut seed = 0;
            b.iter(|| {
                seed += 1;
                run_playthrough(&game, &d.kit, &d.budget, seed).unwrap()
            })
        });
        group.bench_function(format!("{name}/generate"), |b| {
            let mut seed = 0;
            b.iter(|| {
                seed += 1;
                generate(&src, &d.rules, &d.kit, &d.budget, seed).unwrap()
            })
        });
    }
    group.finish();
}

fn baseline_and_metrics(c: &mut Criterion) {
    let (d, src) = fixture("platformer");
    let model = train(std::slice::from_ref(&src)).unwrap();
    c.bench_function("platformer/markov", |b| {
        let mut rng = stream(3);
        b.iter(|| mc_generate(&model, src.width(), src.height(), &mut rng).unwrap())
    });
    let population: Vec<_> = (0..20)
        .map(|s| sample_generation(&d, &src, s).level)
        .collect();
    let mut group = c.benchmark_group("metrics");
    group.sample_size(10);
    group.bench_function("platformer/self-similarity-20", |b| {
        b.iter(|| self_similarity(black_box(&population)).unwrap())
    });
    group.finish();
}

criterion_group!(benches, stages, search, baseline_and_metrics);
criterion_main!(benches);
