//! Builds fixed-width model inputs from a dataset for a given scenario.
//!
//! Every stream is materialized as an `n_samples x 186` matrix of padded
//! values; difference streams apply the step-to-step difference to the raw
//! sequence before padding, so both streams share the mask geometry.

use ndarray::{Array2, Axis};

use crate::data::{differences, pad_to_feature_len, Dataset, Label, Normalizer};
use crate::error::{Error, Result};
use crate::ga::FeatureMask;
use crate::model::{Batch, ModelKind, Scenario};
use crate::scalar::Scalar;
use crate::FEATURE_LEN;

/// Padded per-stream feature matrices plus labels for one dataset.
#[derive(Clone, Debug, PartialEq)]
pub struct StreamInput<T> {
    scenario: Scenario,
    a: Array2<T>,
    b: Option<Array2<T>>,
    labels: Vec<Label>,
}

/// Per-stream z-scoring statistics fitted on a training `StreamInput`.
#[derive(Clone, Debug, PartialEq)]
pub struct StreamNormalizer<T> {
    pub a: Normalizer<T>,
    pub b: Option<Normalizer<T>>,
}

impl<T: Scalar> StreamInput<T> {
    pub fn from_dataset(ds: &Dataset<T>, scenario: Scenario) -> Result<Self> {
        if ds.is_empty() {
            return Err(Error::validation("cannot build inputs from an empty dataset"));
        }
        let n = ds.len();
        let mut a = Array2::zeros((n, FEATURE_LEN));
        let mut b = match scenario.kind() {
            ModelKind::SingleStream => None,
            ModelKind::TwoStream => Some(Array2::zeros((n, FEATURE_LEN))),
        };
        for (i, sample) in ds.samples().iter().enumerate() {
            let (first, second): (&[T], Option<Vec<T>>) = match scenario {
                Scenario::LeftOnly => (&sample.left, None),
                Scenario::RightOnly => (&sample.right, None),
                Scenario::LeftRight => (&sample.left, Some(sample.right.clone())),
                Scenario::LeftPlusLeftDiff => (&sample.left, Some(differences(&sample.left)?)),
                Scenario::RightPlusRightDiff => {
                    (&sample.right, Some(differences(&sample.right)?))
                }
            };
            fill_row(&mut a, i, first)?;
            if let Some(second) = second {
                fill_row(b.as_mut().expect("two-stream scenario"), i, &second)?;
            }
        }
        Ok(StreamInput {
            scenario,
            a,
            b,
            labels: ds.labels(),
        })
    }

    pub fn scenario(&self) -> Scenario {
        self.scenario
    }

    pub fn num_samples(&self) -> usize {
        self.a.nrows()
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn label_indices(&self) -> Vec<usize> {
        self.labels.iter().map(|l| l.class_index()).collect()
    }

    /// Fits z-scoring statistics on this (training) input.
    pub fn fit_normalizer(&self) -> StreamNormalizer<T> {
        StreamNormalizer {
            a: Normalizer::fit(&self.a),
            b: self.b.as_ref().map(Normalizer::fit),
        }
    }

    pub fn normalize(&mut self, normalizer: &StreamNormalizer<T>) {
        normalizer.a.apply(&mut self.a);
        if let (Some(b), Some(nb)) = (self.b.as_mut(), normalizer.b.as_ref()) {
            nb.apply(b);
        }
    }

    /// Assembles the training batch, keeping only mask-selected columns.
    /// The same mask gates both streams.
    pub fn batch(&self, mask: Option<&FeatureMask>) -> Result<Batch<T>> {
        let select = |m: &Array2<T>| -> Result<Array2<T>> {
            match mask {
                None => Ok(m.clone()),
                Some(mask) => {
                    if mask.len() != FEATURE_LEN {
                        return Err(Error::validation(format!(
                            "mask length {} does not match feature length {FEATURE_LEN}",
                            mask.len()
                        )));
                    }
                    if mask.popcount() == 0 {
                        return Err(Error::validation("mask selects no features"));
                    }
                    Ok(m.select(Axis(1), &mask.selected_indices()))
                }
            }
        };
        Ok(match &self.b {
            None => Batch::Single(select(&self.a)?),
            Some(b) => Batch::Two(select(&self.a)?, select(b)?),
        })
    }

    /// Width of the batch columns produced for `mask`.
    pub fn input_dim(mask: Option<&FeatureMask>) -> usize {
        mask.map_or(FEATURE_LEN, FeatureMask::popcount)
    }

    pub fn stream_a(&self) -> &Array2<T> {
        &self.a
    }

    pub fn stream_b(&self) -> Option<&Array2<T>> {
        self.b.as_ref()
    }
}

fn fill_row<T: Scalar>(matrix: &mut Array2<T>, row: usize, seq: &[T]) -> Result<()> {
    let fv = pad_to_feature_len(seq)?;
    for (j, &v) in fv.values().iter().enumerate() {
        matrix[[row, j]] = v;
    }
    Ok(())
}
