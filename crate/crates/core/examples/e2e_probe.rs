
use std::time::Instant;
use rayon::prelude::*;
use wolfcast_core::calibration::{calibrate, CalibrationSettings};
use wolfcast_core::data::{align, fit_normalizer, generate, make_windows, RowSplit, SynthConfig, HORIZON};
use wolfcast_core::ensemble::{blend, optimize_weights};
use wolfcast_core::forecasters::{build, ArchitectureId, ForecastMatrix};
use wolfcast_core::metrics::{mse, r2};
use wolfcast_core::nn::TrainConfig;
use wolfcast_core::rng::{derive_seed, tags};

fn main() {
    let t0 = Instant::now();
    let days: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(110);
    let cal_epochs: usize = std::env::args().nth(2).and_then(|s| s.parse().ok()).unwrap_or(12);
    let final_epochs: usize = std::env::args().nth(3).and_then(|s| s.parse().ok()).unwrap_or(60);
    let seed: u64 = std::env::args().nth(4).and_then(|s| s.parse().ok()).unwrap_or(2024);
    let cal_patience: usize = std::env::args().nth(5).and_then(|s| s.parse().ok()).unwrap_or(2);

    let data = generate(&SynthConfig { days, seed: 7, noise: 0.6 }).unwrap();
    let frame_raw = align(&data.brent, &data.usdx, &data.sent).unwrap();
    let split = RowSplit::from_fractions(frame_raw.len(), HORIZON, 0.2, 0.15).unwrap();
    let norm = fit_normalizer(&frame_raw, split.train_rows()).unwrap();
    let frame = norm.apply(&frame_raw);
    println!("days {days}, val samples {}, test samples {}", split.validation_samples(), split.test_samples());

    let cal_cfg = TrainConfig { batch_size: 16, max_epochs: cal_epochs, patience: cal_patience, seed: 0, validation_fraction: 0.15 };
    let settings = CalibrationSettings { pop_size: 6, iterations: 10, runs: 2 };

    let outputs: Vec<_> = ArchitectureId::ALL
        .into_par_iter()
        .map(|arch| {
            let tc = Instant::now();
            let result = calibrate(arch, &frame, &split, &settings, &cal_cfg, seed).unwrap();
            let hp = result.best_hp;
            let dataset = make_windows(&frame, hp.features, hp.window, HORIZON).unwrap();
            let slices = split.slices(&dataset).unwrap();
            let mut model = build(arch, &hp, hp.features.feature_count()).unwrap();
            let fin_cfg = TrainConfig { batch_size: 16, max_epochs: final_epochs, patience: 10, seed: result.eval_seed, validation_fraction: 0.15 };
            let rep = model.fit_with_validation(&slices.train, &slices.validation, &fin_cfg).unwrap();
            let vf = model.predict(&slices.validation.x).unwrap();
            let tf = model.predict(&slices.test.x).unwrap();
            let test_r2 = r2(slices.test.y.data(), tf.values.data()).unwrap();
            let test_mse = mse(slices.test.y.data(), tf.values.data()).unwrap();
            println!(
                "{}: cal {:.1?} best {:.3e} | final {} ep val {:.3e} | test mse {:.3e} r2 {:.3} | w{} lr{:.4} h{} {:?} d{:.2} {:?}",
                result.label, tc.elapsed(), result.best_validation_mse, rep.epochs_run, rep.best_validation_mse,
                test_mse, test_r2, hp.window, hp.learning_rate, hp.hidden_units(), hp.optimizer, hp.dropout, hp.features
            );
            (vf, tf, slices.validation.y.clone(), slices.test.y.clone())
        })
        .collect();

    let val_forecasts: Vec<ForecastMatrix> = outputs.iter().map(|(v, _, _, _)| v.clone()).collect();
    let test_forecasts: Vec<ForecastMatrix> = outputs.iter().map(|(_, t, _, _)| t.clone()).collect();
    let vt = outputs[0].2.clone();
    let tt = outputs[0].3.clone();
    let (w, fit_mse) = optimize_weights(&val_forecasts, &vt, 8, 15, derive_seed(seed, tags::ENSEMBLE_WEIGHTS, 0)).unwrap();
    let blended = blend(&test_forecasts, &w).unwrap();
    let ens_mse = mse(tt.data(), blended.values.data()).unwrap();
    let ens_r2 = r2(tt.data(), blended.values.data()).unwrap();
    let best_individual = test_forecasts.iter().map(|f| mse(tt.data(), f.values.data()).unwrap()).fold(f64::INFINITY, f64::min);
    println!("weights {:?} fit_mse {:.3e}", w.components(), fit_mse);
    println!("ENSEMBLE test mse {:.4e} r2 {:.4} | best individual {:.4e} | ratio {:.3}", ens_mse, ens_r2, best_individual, ens_mse / best_individual);
    println!("TOTAL {:?}", t0.elapsed());
}
