use criterion::{criterion_group, criterion_main, Criterion};
use nalgebra::DMatrix;
use rand::Rng;
use std::hint::black_box;

use texclass::bayes;
use texclass::reduce::{ga_fitness, pca_fit, Mask};
use texclass::rng::seeded;

fn fixture(n: usize, d: usize) -> (DMatrix<f64>, Vec<String>) {
    let mut rng = seeded(7);
    let labels: Vec<String> = (0..n).map(|i| format!("c{}", i % 5)).collect();
    let x = DMatrix::from_fn(n, d, |r, c| {
        rng.gen::<f64>()
            + if c % 7 == 0 {
                (r % 5) as f64 * 0.3
            } else {
                0.0
            }
    });
    (x, labels)
}

fn bench_classify(c: &mut Criterion) {
    let (x, y) = fixture(120, 520);
    c.bench_function("nb_fit_120x520", |b| {
        b.iter(|| bayes::fit(black_box(&x), &y).unwrap())
    });
    let model = bayes::fit(&x, &y).unwrap();
    c.bench_function("nb_evaluate_120x520", |b| {
        b.iter(|| bayes::evaluate(&model, black_box(&x), &y).unwrap())
    });
    c.bench_function("pca_fit_120x520", |b| {
        b.iter(|| pca_fit(black_box(&x), 0.95).unwrap())
    });
    let (ex, ey) = fixture(40, 520);
    let mask = Mask::all(520);
    c.bench_function("ga_fitness_all_520", |b| {
        b.iter(|| ga_fitness(black_box(&mask), &x, &y, &ex, &ey, 0.95).unwrap())
    });
}

criterion_group!(benches, bench_classify);
criterion_main!(benches);
