//! Benchmarks for the hot paths: the cumax activation, one language-model
//! gradient step, and height-vector tree building.

use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use onlab_core::induction::{build_tree, TieBreak};
use onlab_core::model::{cumax, loss_and_gradients, ModelConfig, ModelParams};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::hint::black_box;

fn bench_cumax(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let logits: Vec<f64> = (0..512).map(|_| rng.random_range(-5.0..5.0)).collect();
    c.bench_function("cumax_512", |b| {
        b.iter(|| cumax(black_box(ndarray::ArrayView1::from(&logits))))
    });
}

fn bench_gradient_step(c: &mut Criterion) {
    let config = ModelConfig {
        num_layers: 2,
        embed_dim: 64,
        hidden_dims: vec![64, 64],
        chunk_factor: 4,
        dropout_input: 0.0,
        dropout_recurrent: 0.0,
        dropout_output: 0.0,
        vocab_size: 100,
        tie_embeddings: true,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let params = ModelParams::init(&config, &mut rng);
    let ids: Vec<usize> = (0..35).map(|_| rng.random_range(0..config.vocab_size)).collect();
    c.bench_function("loss_and_gradients_2x64_len35", |b| {
        b.iter(|| loss_and_gradients(black_box(&ids), &params, &config, None).unwrap())
    });
}

fn bench_build_tree(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    c.bench_function("build_tree_len64", |b| {
        b.iter_batched(
            || (0..63).map(|_| rng.random_range(-1.0..1.0)).collect::<Vec<f64>>(),
            |heights| build_tree(black_box(&heights), TieBreak::Leftmost),
            BatchSize::SmallInput,
        )
    });
}

criterion_group!(benches, bench_cumax, bench_gradient_step, bench_build_tree);
criterion_main!(benches);
