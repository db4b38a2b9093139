//! Analytic gradients of the mean batch loss against central finite
//! differences, for both topologies and every activation.

use ndarray::Array2;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use veracity::model::{Batch, ModelParams, ModelTopology};
use veracity::nn::{Activation, BatchModel, LayerParams};

fn random_batch(rng: &mut ChaCha8Rng, n: usize, dim: usize) -> Array2<f64> {
    Array2::from_shape_fn((n, dim), |_| rng.gen_range(-2.0..2.0))
}

fn loss_of(params: &ModelParams<f64>, batch: &Batch<f64>, labels: &[usize]) -> f64 {
    params.loss_and_grads(batch, labels).0
}

/// Central finite differences over every parameter entry of every layer.
fn check_gradients(params: &ModelParams<f64>, batch: &Batch<f64>, labels: &[usize]) {
    let h = 1e-5;
    let (_, grads) = params.loss_and_grads(batch, labels);
    let layer_count = params.layer_params().len();
    for layer in 0..layer_count {
        let shape = (
            params.layer_params()[layer].out_dim(),
            params.layer_params()[layer].in_dim(),
        );
        for r in 0..shape.0 {
            for c in 0..=shape.1 {
                // c == shape.1 addresses the bias for row r
                let mut plus = params.clone();
                let mut minus = params.clone();
                let bump = |p: &mut ModelParams<f64>, delta: f64| {
                    let layer_mut: &mut LayerParams<f64> = &mut p.layers_mut()[layer];
                    if c < shape.1 {
                        layer_mut.weights[[r, c]] += delta;
                    } else {
                        layer_mut.biases[r] += delta;
                    }
                };
                bump(&mut plus, h);
                bump(&mut minus, -h);
                let numeric = (loss_of(&plus, batch, labels) - loss_of(&minus, batch, labels))
                    / (2.0 * h);
                let analytic = if c < shape.1 {
                    grads[layer].weights[[r, c]]
                } else {
                    grads[layer].biases[r]
                };
                let scale = numeric.abs().max(analytic.abs());
                let diff = (numeric - analytic).abs();
                assert!(
                    diff <= 1e-4 * scale || diff <= 1e-8,
                    "layer {layer} entry ({r},{c}): numeric={numeric:.10e} analytic={analytic:.10e}"
                );
            }
        }
    }
}

#[test]
fn gradients_match_finite_differences_on_random_networks() {
    let mut rng = ChaCha8Rng::seed_from_u64(1234);
    for case in 0..8u64 {
        let activation = Activation::ALL[case as usize % 3];
        let input_dim = rng.gen_range(1..=8);
        let hidden = rng.gen_range(1..=5);
        let n = rng.gen_range(2..=6);
        let labels: Vec<usize> = (0..n).map(|_| rng.gen_range(0..2)).collect();
        if case % 2 == 0 {
            let topology = ModelTopology::single(input_dim, hidden, activation);
            let params = ModelParams::init(topology, 100 + case).unwrap();
            let batch = Batch::Single(random_batch(&mut rng, n, input_dim));
            check_gradients(&params, &batch, &labels);
        } else {
            let topology = ModelTopology::two_stream(input_dim, hidden, activation);
            let params = ModelParams::init(topology, 200 + case).unwrap();
            let batch = Batch::Two(
                random_batch(&mut rng, n, input_dim),
                random_batch(&mut rng, n, input_dim),
            );
            check_gradients(&params, &batch, &labels);
        }
    }
}
