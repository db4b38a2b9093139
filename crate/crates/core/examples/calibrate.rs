// Temporary calibration probe; deleted before release.
use std::time::Instant;

use veracity::data::{
    corrupt_at_positions, corrupt_positions, generate_synthetic, split, Dataset, SplitSpec,
    SynthConfig,
};
use veracity::ga::{evolve, FeatureMask, GaConfig};
use veracity::metrics::{report, ConfusionMatrix};
use veracity::model::input::StreamInput;
use veracity::model::{self, ModelTopology, Scenario};
use veracity::nn::TrainConfig;

const SEEDS: [u64; 5] = [1000, 2000, 3000, 4000, 5000];

fn eval(
    train_ds: &Dataset<f64>,
    test_ds: &Dataset<f64>,
    mask: Option<&FeatureMask>,
) -> f64 {
    let cfg = TrainConfig::default();
    let train_in = StreamInput::from_dataset(train_ds, Scenario::LeftOnly).unwrap();
    let test_in = StreamInput::from_dataset(test_ds, Scenario::LeftOnly).unwrap();
    let topo = ModelTopology::single(
        StreamInput::<f64>::input_dim(mask),
        cfg.hidden_units,
        cfg.activation,
    );
    let batch = train_in.batch(mask).unwrap();
    let (params, _) = model::train(topo, &batch, &train_in.label_indices(), &cfg).unwrap();
    let preds = params.predict_batch(&test_in.batch(mask).unwrap()).unwrap();
    let cm = ConfusionMatrix::from_labels(&preds, test_in.labels()).unwrap();
    report(&cm).unwrap().accuracy
}

fn gfs_arm(name: &str, ds: &Dataset<f64>, ga_base: &GaConfig) {
    let t0 = Instant::now();
    let mut no_gfs = Vec::new();
    let mut with_gfs = Vec::new();
    let mut keeps = Vec::new();
    for seed in SEEDS {
        let (train_ds, test_ds) = split(ds, &SplitSpec { train_fraction: 0.8, seed }).unwrap();
        no_gfs.push(eval(&train_ds, &test_ds, None));
        let ga = GaConfig { seed, ..ga_base.clone() };
        let (mask, _) =
            evolve(&train_ds, Scenario::LeftOnly, &ga, &TrainConfig::default(), false).unwrap();
        with_gfs.push(eval(&train_ds, &test_ds, Some(&mask)));
        let inside: usize = (10..31).filter(|&t| mask.get(t)).count();
        let keep_in = inside as f64 / 21.0;
        let keep_out = (mask.popcount() - inside) as f64 / 165.0;
        keeps.push((keep_in, keep_out, keep_in > keep_out));
    }
    let m0 = no_gfs.iter().sum::<f64>() / 5.0;
    let m1 = with_gfs.iter().sum::<f64>() / 5.0;
    println!("{name}:");
    println!("  no-GFS  {no_gfs:.1?} mean {m0:.2}");
    println!("  GFS     {with_gfs:.1?} mean {m1:.2}  (gap {:+.2})", m1 - m0);
    println!("  keep-rates (in, out, in>out): {keeps:.2?}");
    println!("  elapsed {:.0}s", t0.elapsed().as_secs_f64());
}

fn recovery_arm(name: &str, noise_sd: f64, generations: usize, hidden: usize) {
    let synth = SynthConfig {
        n_observers: 1,
        n_videos: 600,
        length_range: (60, 60),
        noise_sd,
        blink_rate: 0.0,
        seed: 777,
        ..SynthConfig::default()
    };
    let ds = generate_synthetic::<f64>(&synth).unwrap();
    let train_cfg = TrainConfig {
        hidden_units: hidden,
        learning_rate: 1e-3,
        ..TrainConfig::default()
    };
    let ga_base = GaConfig {
        generations,
        fitness_epochs: 400,
        ..GaConfig::default()
    };
    let t0 = Instant::now();
    let mut keeps = Vec::new();
    for seed in SEEDS {
        let (train_ds, _) = split(&ds, &SplitSpec { train_fraction: 0.8, seed }).unwrap();
        let ga = GaConfig { seed, ..ga_base.clone() };
        let (mask, history) =
            evolve(&train_ds, Scenario::LeftOnly, &ga, &train_cfg, false).unwrap();
        let inside: usize = (10..31).filter(|&t| mask.get(t)).count();
        let keep_in = inside as f64 / 21.0;
        let keep_out = (mask.popcount() - inside) as f64 / 165.0;
        keeps.push((keep_in, keep_out, keep_in > keep_out, history.best().best_fitness));
    }
    println!("{name}: {keeps:.2?} elapsed {:.0}s", t0.elapsed().as_secs_f64());
}

fn main() {
    recovery_arm("1-obs recovery noise 1.5 gens 10", 1.5, 10, 8);
    recovery_arm("1-obs recovery noise 2.0 gens 10", 2.0, 10, 8);
    recovery_arm("1-obs recovery noise 2.0 gens 20", 2.0, 20, 8);

    let ds = generate_synthetic::<f64>(&SynthConfig::default()).unwrap();
    let _ = corrupt_positions(&ds, 0.0, 3.5, 1.0, 1).unwrap();
    let _ = corrupt_at_positions(&ds, &[0], 3.5, 3.0, 777).unwrap();
    let _ = gfs_arm;
    let _ = eval;
}
