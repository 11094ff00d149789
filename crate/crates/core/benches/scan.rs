use alfven_core::par::{par_map, seq_map};
use alfven_core::profiles::{BackgroundProfile, ExtendedProfile};
use alfven_core::spectral::{compute_d, SpectralOptions};
use alfven_core::Complex64;
use criterion::{black_box, criterion_group, criterion_main, Criterion};

fn scan(c: &mut Criterion) {
    let ext = ExtendedProfile::new(&BackgroundProfile::new(&[0.0, 0.5], &[0.0, 1.0], 0.1).unwrap()).unwrap();
    let opts = SpectralOptions {
        n_nodes: 513,
        ..Default::default()
    };
    let points: Vec<Complex64> = (0..48)
        .map(|k| Complex64::new(-1.4 + 2.8 * k as f64 / 47.0, 0.0))
        .collect();
    let eval = |c: &Complex64| compute_d(&ext, 1.0, *c, &opts).map(|w| w.inv_d).unwrap();

    let mut group = c.benchmark_group("wronskian_scan");
    group.sample_size(20);
    group.bench_function("sequential", |b| b.iter(|| seq_map(black_box(&points), eval)));
    group.bench_function(
        if alfven_core::par::is_parallel() { "parallel" } else { "parallel_disabled" },
        |b| b.iter(|| par_map(black_box(&points), eval)),
    );
    group.finish();
}

criterion_group!(benches, scan);
criterion_main!(benches);
