use criterion::{black_box, criterion_group, criterion_main, BatchSize, Criterion};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sandcast_core::ingest::{integrate_all, resample_uniform};
use sandcast_core::mann::{train_mann, HiddenSpec};
use sandcast_core::nn::{gradient, init_weights, train_scg};
use sandcast_core::preprocess::{pair_wells, partition_lowo};
use sandcast_core::volume::{filter_volume, predict_volume};
use sandcast_core::{synth, Batch, SynthConfig, TrainConfig};

fn batch(n: usize) -> Batch {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let x: Vec<[f64; 3]> = (0..n)
        .map(|_| std::array::from_fn(|_| rng.gen_range(-2.0..2.0)))
        .collect();
    let y = x.iter().map(|v| 0.5 + 0.2 * v[0].sin() * v[1].cos()).collect();
    Batch::new(x, y).unwrap()
}

fn small_field() -> SynthConfig {
    SynthConfig {
        n_inlines: 16,
        n_xlines: 16,
        n_wells: 4,
        ..SynthConfig::default()
    }
}

fn network(c: &mut Criterion) {
    let b = batch(3000);
    let model = init_weights(8, 3).unwrap();
    c.bench_function("gradient_h8_n3000", |bench| {
        bench.iter(|| gradient(black_box(&model), black_box(&b)).unwrap())
    });
    let config = TrainConfig {
        max_epoch: 20,
        err_min: 0.0,
        ..TrainConfig::default()
    };
    c.bench_function("scg_20_epochs_h8_n3000", |bench| {
        bench.iter(|| train_scg(&model, &b, &config).unwrap())
    });
}

fn resampling(c: &mut Criterion) {
    let t: Vec<f64> = (0..2000).map(|i| 100.0 + 0.5 * i as f64).collect();
    let v: Vec<f64> = t.iter().map(|x| (x * 0.05).sin()).collect();
    c.bench_function("spline_resample_2000_to_0.1ms", |bench| {
        bench.iter(|| resample_uniform(&t, &v, 100.0, 1099.5, 0.1).unwrap())
    });
}

fn pipeline(c: &mut Criterion) {
    let field = synth::generate(&small_field()).unwrap();
    c.bench_function("integrate_4_wells", |bench| {
        bench.iter(|| integrate_all(&field.logs, &field.checkshots, &field.locations, &field.volume).unwrap())
    });

    let logs = integrate_all(&field.logs, &field.checkshots, &field.locations, &field.volume).unwrap();
    let wells = pair_wells(logs, &field.tops).unwrap();
    let zoned = partition_lowo(&wells, "W1").unwrap();
    let config = TrainConfig {
        max_epoch: 10,
        ..TrainConfig::default()
    };
    let model = train_mann(&zoned, &config, &HiddenSpec::Uniform(2)).unwrap();
    c.bench_function("predict_volume_16x16", |bench| {
        bench.iter(|| predict_volume(&model, &field.volume, &field.horizons).unwrap())
    });

    let predicted = predict_volume(&model, &field.volume, &field.horizons).unwrap();
    c.bench_function("filter_volume_w3_16x16", |bench| {
        bench.iter_batched(|| &predicted, |v| filter_volume(v, 3).unwrap(), BatchSize::SmallInput)
    });
}

criterion_group!(benches, network, resampling, pipeline);
criterion_main!(benches);
