//! Full Table-1-shaped sweep on clean, strongly separable synthetic data:
//! every hidden-size/activation cell must classify well.

use veracity::data::SynthConfig;
use veracity::experiment::{sweep_baseline, DataSource, ExperimentConfig};
use veracity::nn::{Activation, TrainConfig};

#[test]
fn every_grid_cell_learns_clean_separable_data() {
    let cfg = ExperimentConfig {
        data: DataSource::Synthetic {
            config: SynthConfig {
                n_observers: 8,
                n_videos: 8,
                length_range: (60, 90),
                noise_sd: 0.05,
                blink_rate: 0.0,
                seed: 55,
                ..SynthConfig::default()
            },
        },
        train: TrainConfig {
            epochs: 300,
            learning_rate: 1e-3,
            ..TrainConfig::default()
        },
        run_seeds: vec![1000, 2000],
        ..ExperimentConfig::default()
    };
    let table = sweep_baseline::<f64>(
        &cfg,
        &[30, 40, 50, 60, 70, 80],
        &[Activation::Relu, Activation::Tanh, Activation::Sigmoid],
    )
    .unwrap();
    assert_eq!(table.hidden.len(), 6);
    assert_eq!(table.activations.len(), 3);
    for (row, &hidden) in table.hidden.iter().enumerate() {
        for (col, act) in table.activations.iter().enumerate() {
            let cell = table.cells[row][col];
            assert!(
                (0.0..=100.0).contains(&cell),
                "cell out of range: {cell}"
            );
            assert!(
                cell >= 85.0,
                "hidden {hidden} {act}: accuracy {cell} below 85%"
            );
        }
    }
}
