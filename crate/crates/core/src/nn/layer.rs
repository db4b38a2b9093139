use ndarray::{Array1, Array2};
use rand::Rng;

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::seeds::{self, mix, rng};

/// Weights (`out_dim x in_dim`) and biases of one dense layer.
#[derive(Clone, Debug, PartialEq)]
pub struct LayerParams<T> {
    pub weights: Array2<T>,
    pub biases: Array1<T>,
}

impl<T: Scalar> LayerParams<T> {
    pub fn zeros(in_dim: usize, out_dim: usize) -> Self {
        LayerParams {
            weights: Array2::zeros((out_dim, in_dim)),
            biases: Array1::zeros(out_dim),
        }
    }

    pub fn zeros_like(&self) -> Self {
        LayerParams::zeros(self.in_dim(), self.out_dim())
    }

    pub fn in_dim(&self) -> usize {
        self.weights.ncols()
    }

    pub fn out_dim(&self) -> usize {
        self.weights.nrows()
    }

    pub fn same_shape(&self, other: &Self) -> bool {
        self.weights.dim() == other.weights.dim() && self.biases.len() == other.biases.len()
    }

    /// `X W^T + b` for a batch with one sample per row.
    pub fn affine(&self, x: &Array2<T>) -> Array2<T> {
        let mut z = x.dot(&self.weights.t());
        z += &self.biases;
        z
    }

    pub fn num_params(&self) -> usize {
        self.weights.len() + self.biases.len()
    }
}

/// Glorot-uniform weights in `[-sqrt(6/(in+out)), sqrt(6/(in+out))]` with
/// zero biases, deterministic given the seed.
pub fn init_layer<T: Scalar>(in_dim: usize, out_dim: usize, seed: u64) -> Result<LayerParams<T>> {
    if in_dim == 0 || out_dim == 0 {
        return Err(Error::validation(format!(
            "layer dimensions must be positive, got {out_dim} x {in_dim}"
        )));
    }
    let bound = (6.0 / (in_dim + out_dim) as f64).sqrt();
    let mut rng = rng(mix(seed, &[seeds::TAG_LAYER_INIT]));
    let weights =
        Array2::from_shape_fn((out_dim, in_dim), |_| T::from_f64(rng.gen_range(-bound..=bound)));
    Ok(LayerParams {
        weights,
        biases: Array1::zeros(out_dim),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn init_is_deterministic_and_zero_biased() {
        let a: LayerParams<f64> = init_layer(3, 2, 1).unwrap();
        let b: LayerParams<f64> = init_layer(3, 2, 1).unwrap();
        assert_eq!(a, b);
        assert!(a.biases.iter().all(|&v| v == 0.0));
        let c: LayerParams<f64> = init_layer(3, 2, 2).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn init_rejects_zero_dims() {
        assert!(init_layer::<f64>(0, 2, 1).is_err());
        assert!(init_layer::<f64>(2, 0, 1).is_err());
    }

    #[test]
    fn init_draws_are_bounded_and_centered() {
        // 400 * 250 = 100_000 draws; mean of U(-b, b) has sd b/sqrt(3n).
        let layer: LayerParams<f64> = init_layer(400, 250, 42).unwrap();
        let bound = (6.0 / 650.0f64).sqrt();
        assert!(layer.weights.iter().all(|w| w.abs() <= bound));
        let n = layer.weights.len() as f64;
        let mean = layer.weights.sum() / n;
        let tol = 3.0 * bound / (3.0 * n).sqrt();
        assert!(mean.abs() < tol, "mean={mean} tol={tol}");
    }

    #[test]
    fn affine_matches_hand_computation() {
        let layer: LayerParams<f64> = LayerParams {
            weights: ndarray::arr2(&[[1.0, 2.0], [0.5, -1.0]]),
            biases: ndarray::arr1(&[0.1, -0.2]),
        };
        let x = ndarray::arr2(&[[3.0, 4.0]]);
        let z = layer.affine(&x);
        assert!((z[[0, 0]] - 11.1).abs() < 1e-12);
        assert!((z[[0, 1]] - (-2.7)).abs() < 1e-12);
    }
}
