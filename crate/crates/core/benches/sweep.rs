//! Parallel vs sequential sweep over a monochromatic Sambe landscape grid.
//! Build with `--no-default-features` to measure the sequential fallback alone.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use floquet_landscape::landscape::solve_sambe_landscape;
use floquet_landscape::models::{two_level_drive_mono, two_level_static};
use floquet_landscape::sambe::build_sambe_mono;
use floquet_landscape::sweep::{linspace, map_ordered, map_sequential, parallel_enabled, Workers};

const OMEGA: f64 = 10.0;

fn v_max(a: f64, truncation: u32) -> f64 {
    let h0 = two_level_static(1.0).unwrap();
    let drive = two_level_drive_mono(a * OMEGA).unwrap();
    let s = build_sambe_mono(&h0, &drive, OMEGA, truncation).unwrap();
    solve_sambe_landscape(&s, 1e-24).unwrap().v_max
}

fn sweep(c: &mut Criterion) {
    faer::set_global_parallelism(faer::Par::Seq);
    let grid = linspace(0.0, 10.0, 64);
    let mut group = c.benchmark_group("cdt_mono_sweep");
    group.sample_size(10);
    for truncation in [6u32, 12] {
        group.bench_with_input(BenchmarkId::new("sequential", truncation), &truncation, |b, &m| {
            b.iter(|| map_sequential(black_box(&grid), |&a| v_max(a, m)))
        });
        if parallel_enabled() {
            group.bench_with_input(BenchmarkId::new("parallel", truncation), &truncation, |b, &m| {
                b.iter(|| map_ordered(black_box(&grid), Workers(None), |&a| v_max(a, m)).unwrap())
            });
        }
    }
    group.finish();
}

criterion_group!(benches, sweep);
criterion_main!(benches);
