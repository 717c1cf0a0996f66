//! Engine and threading comparisons for the statistics maps.
//!
//! Run with `cargo bench -p sf2d-core`. The `single-thread` variants pin a
//! one-worker rayon pool, so the same binary measures the sequential
//! baseline and the data-parallel speedup.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use sf2d_core::{compute_statmaps, generate, Component, Engine, LagGridSpec, SynthSpec};
use std::hint::black_box;

fn scene(n: usize) -> sf2d_core::Field2D {
    let spec = SynthSpec {
        width: n,
        height: n,
        pixel_size_m: 50.0,
        seed: 7,
        offset: 0.0,
        components: vec![
            Component::Rolls {
                wavelength_px: 40.0,
                orientation_rad: 2.0,
                amplitude: 1.0,
                rise_fraction: 0.3,
                phase_rad: 0.0,
            },
            Component::GaussianNoise { sigma: 0.3 },
        ],
    };
    generate(&spec).unwrap()
}

fn bench_engines(c: &mut Criterion) {
    let field = scene(256);
    let spec = LagGridSpec::new(24, 1).unwrap();
    let mut group = c.benchmark_group("statmaps-256px-k24");
    group.sample_size(10);

    for engine in [Engine::Direct, Engine::Fft] {
        let name = match engine {
            Engine::Direct => "direct",
            Engine::Fft => "fft",
        };
        group.bench_with_input(BenchmarkId::new(name, "threads-all"), &engine, |b, &e| {
            b.iter(|| compute_statmaps(black_box(&field), &spec, 100, e).unwrap())
        });
        #[cfg(feature = "parallel")]
        {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(1)
                .build()
                .unwrap();
            group.bench_with_input(BenchmarkId::new(name, "threads-1"), &engine, |b, &e| {
                b.iter(|| {
                    pool.install(|| compute_statmaps(black_box(&field), &spec, 100, e).unwrap())
                })
            });
        }
    }
    group.finish();
}

fn bench_generation(c: &mut Criterion) {
    c.bench_function("synth-512px-rolls-noise", |b| {
        b.iter(|| black_box(scene(512)))
    });
}

criterion_group!(benches, bench_engines, bench_generation);
criterion_main!(benches);
