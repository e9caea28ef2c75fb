use criterion::{black_box, criterion_group, criterion_main, Criterion};

use wolfcast_core::data::FeatureSet;
use wolfcast_core::forecasters::{build, ArchitectureId, HyperParams};
use wolfcast_core::nn::{mse_loss, Mode, OptimizerKind};
use wolfcast_core::rng::{stream, tags, uniform};
use wolfcast_core::tensor::Tensor;

fn random_tensor(shape: &[usize], seed: u64) -> Tensor {
    let mut r = stream(seed, 0, 0);
    let n = shape.iter().product();
    Tensor::from_vec(shape, (0..n).map(|_| uniform(&mut r, 0.0, 1.0)).collect()).unwrap()
}

fn hp(exponent: u32) -> HyperParams {
    HyperParams {
        learning_rate: 0.005,
        hidden_exponent: exponent,
        optimizer: OptimizerKind::Adam,
        dropout: 0.2,
        window: 10,
        features: FeatureSet::Sent,
    }
}

fn bench_forward(c: &mut Criterion) {
    for (arch, exponent) in [
        (ArchitectureId::BiGru, 5u32),
        (ArchitectureId::CnnBiLstm, 5),
        (ArchitectureId::EncDecBiLstm, 5),
    ] {
        let mut model = build(arch, &hp(exponent), 2).unwrap();
        model
            .network_mut()
            .init_params(&mut stream(1, tags::TRAIN_INIT, 0));
        let x = random_tensor(&[16, 10, 2], 2);
        c.bench_function(&format!("predict_{:?}_h{}", arch, 1 << exponent), |b| {
            b.iter(|| black_box(model.predict(&x).unwrap()))
        });
    }
}

fn bench_train_step(c: &mut Criterion) {
    let mut model = build(ArchitectureId::BiLstm, &hp(5), 2).unwrap();
    let net = model.network_mut();
    net.init_params(&mut stream(3, tags::TRAIN_INIT, 0));
    let x = random_tensor(&[16, 10, 2], 4);
    let y = random_tensor(&[16, 3], 5);
    let mut rng = stream(6, tags::TRAIN_DROPOUT, 0);
    c.bench_function("bilstm_h32_forward_backward_batch16", |b| {
        b.iter(|| {
            let out = net.forward(&x, Mode::Train, &mut rng).unwrap();
            let (_, grad) = mse_loss(&out, &y).unwrap();
            net.zero_grads();
            black_box(net.backward(&grad).unwrap())
        })
    });
}

criterion_group!(benches, bench_forward, bench_train_step);
criterion_main!(benches);
