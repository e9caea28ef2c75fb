use criterion::{black_box, criterion_group, criterion_main, Criterion};

use wolfcast_core::ensemble::{blend, normalize_weights};
use wolfcast_core::forecasters::ForecastMatrix;
use wolfcast_core::gwo::{gwo_optimize, DecodedSolution, GwoConfig, SearchSpace};
use wolfcast_core::metrics;
use wolfcast_core::tensor::Tensor;

fn sphere(sol: &DecodedSolution) -> f64 {
    sol.iter().map(|v| v.as_real().unwrap().powi(2)).sum()
}

fn bench_gwo(c: &mut Criterion) {
    let space = SearchSpace::continuous_box(10, -5.0, 5.0).unwrap();
    c.bench_function("gwo_sphere_10d_pop20_iters50", |b| {
        b.iter(|| {
            let config = GwoConfig::new(20, 50, 7);
            black_box(gwo_optimize(sphere, &space, &config).unwrap().fitness)
        })
    });
}

fn bench_blend(c: &mut Criterion) {
    let members: Vec<ForecastMatrix> = (0..5)
        .map(|m| ForecastMatrix {
            values: Tensor::filled(&[500, 3], 0.1 * m as f64),
            model_label: format!("m{m}"),
        })
        .collect();
    let weights = normalize_weights(&[1.0, 2.0, 3.0, 4.0, 5.0]).unwrap();
    c.bench_function("blend_5x500x3", |b| {
        b.iter(|| black_box(blend(&members, &weights).unwrap()))
    });
}

fn bench_metrics(c: &mut Criterion) {
    let y: Vec<f64> = (0..3000).map(|i| (i as f64 * 0.01).sin() + 2.0).collect();
    let p: Vec<f64> = y.iter().map(|v| v + 0.05).collect();
    c.bench_function("metrics_report_3000", |b| {
        b.iter(|| black_box(metrics::report(&y, &p, metrics::MspeMode::Percentage).unwrap()))
    });
}

criterion_group!(benches, bench_gwo, bench_blend, bench_metrics);
criterion_main!(benches);
