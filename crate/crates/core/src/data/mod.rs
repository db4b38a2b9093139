//! Two-eye pupillary recordings: loading, synthesis, padding, differencing
//! and train/test splitting.

mod io;
mod synthetic;

pub use io::{load_dataset, write_dataset};
pub use synthetic::{generate_synthetic, SynthConfig};

use ndarray::{Array1, Array2, Axis};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::seeds::{self, mix, rng};
use crate::{FEATURE_LEN, MAX_SEQ_LEN, MIN_SEQ_LEN, SAMPLING_RATE_HZ};

/// Class of the stimulus a recording was taken under.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Genuine,
    Posed,
}

impl Label {
    pub const ALL: [Label; 2] = [Label::Genuine, Label::Posed];

    /// Class index used by the loss and the confusion matrix.
    pub fn class_index(self) -> usize {
        match self {
            Label::Genuine => 0,
            Label::Posed => 1,
        }
    }

    pub fn from_class_index(index: usize) -> Option<Label> {
        match index {
            0 => Some(Label::Genuine),
            1 => Some(Label::Posed),
            _ => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Label::Genuine => "genuine",
            Label::Posed => "posed",
        }
    }

    /// Case-insensitive parse of `genuine` / `posed`.
    pub fn parse(text: &str) -> Option<Label> {
        match text.trim().to_ascii_lowercase().as_str() {
            "genuine" => Some(Label::Genuine),
            "posed" => Some(Label::Posed),
            _ => None,
        }
    }
}

impl std::fmt::Display for Label {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One observer-video recording: a left- and right-eye diameter sequence of
/// identical length plus the class label.
#[derive(Clone, Debug, PartialEq)]
pub struct Sample<T> {
    pub sample_id: String,
    pub observer_id: u32,
    pub video_id: u32,
    pub left: Vec<T>,
    pub right: Vec<T>,
    pub label: Label,
}

impl<T: Scalar> Sample<T> {
    /// Validates lengths (60..=186, both eyes equal) and that every diameter
    /// is a finite non-negative millimetre value.
    pub fn new(
        sample_id: impl Into<String>,
        observer_id: u32,
        video_id: u32,
        left: Vec<T>,
        right: Vec<T>,
        label: Label,
    ) -> Result<Self> {
        let sample_id = sample_id.into();
        if left.len() != right.len() {
            return Err(Error::validation(format!(
                "sample {sample_id}: left length {} does not match right length {}",
                left.len(),
                right.len()
            )));
        }
        if left.len() < MIN_SEQ_LEN || left.len() > MAX_SEQ_LEN {
            return Err(Error::validation(format!(
                "sample {sample_id}: length {} outside [{MIN_SEQ_LEN}, {MAX_SEQ_LEN}]",
                left.len()
            )));
        }
        for (eye, seq) in [("left", &left), ("right", &right)] {
            if let Some(bad) = seq.iter().find(|v| !v.is_finite() || **v < T::zero()) {
                return Err(Error::validation(format!(
                    "sample {sample_id}: {eye} eye contains invalid diameter {bad}"
                )));
            }
        }
        Ok(Sample {
            sample_id,
            observer_id,
            video_id,
            left,
            right,
            label,
        })
    }

    /// Number of timesteps in the recording.
    pub fn len(&self) -> usize {
        self.left.len()
    }

    pub fn is_empty(&self) -> bool {
        self.left.is_empty()
    }
}

/// An ordered collection of samples with unique ids, recorded at 60 Hz.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset<T> {
    samples: Vec<Sample<T>>,
    pub sampling_rate_hz: u32,
}

impl<T: Scalar> Dataset<T> {
    pub fn new(samples: Vec<Sample<T>>) -> Result<Self> {
        let mut seen = std::collections::HashSet::new();
        for sample in &samples {
            if !seen.insert(sample.sample_id.as_str()) {
                return Err(Error::validation(format!(
                    "duplicate sample id {}",
                    sample.sample_id
                )));
            }
        }
        Ok(Dataset {
            samples,
            sampling_rate_hz: SAMPLING_RATE_HZ,
        })
    }

    /// Builds a partition of an already-validated dataset.
    pub(crate) fn from_validated(samples: Vec<Sample<T>>) -> Self {
        Dataset {
            samples,
            sampling_rate_hz: SAMPLING_RATE_HZ,
        }
    }

    pub fn samples(&self) -> &[Sample<T>] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn labels(&self) -> Vec<Label> {
        self.samples.iter().map(|s| s.label).collect()
    }

    /// Sample counts per class, indexed by [`Label::class_index`].
    pub fn label_counts(&self) -> [usize; 2] {
        let mut counts = [0usize; 2];
        for sample in &self.samples {
            counts[sample.label.class_index()] += 1;
        }
        counts
    }
}

/// A sequence padded to a fixed width with trailing exact zeros.
#[derive(Clone, Debug, PartialEq)]
pub struct FeatureVector<T> {
    values: Vec<T>,
    valid_len: usize,
}

impl<T: Scalar> FeatureVector<T> {
    /// Full padded vector.
    pub fn values(&self) -> &[T] {
        &self.values
    }

    /// Count of entries before the padding starts.
    pub fn valid_len(&self) -> usize {
        self.valid_len
    }

    /// The pre-padding prefix.
    pub fn valid(&self) -> &[T] {
        &self.values[..self.valid_len]
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Copies `seq` and appends exact zeros up to `target_len`.
pub fn pad<T: Scalar>(seq: &[T], target_len: usize) -> Result<FeatureVector<T>> {
    if seq.len() > target_len {
        return Err(Error::validation(format!(
            "cannot pad sequence of length {} to shorter target {target_len}",
            seq.len()
        )));
    }
    let mut values = Vec::with_capacity(target_len);
    values.extend_from_slice(seq);
    values.resize(target_len, T::zero());
    Ok(FeatureVector {
        values,
        valid_len: seq.len(),
    })
}

/// Pads to the pipeline-wide [`FEATURE_LEN`].
pub fn pad_to_feature_len<T: Scalar>(seq: &[T]) -> Result<FeatureVector<T>> {
    pad(seq, FEATURE_LEN)
}

/// Step-to-step differences, same length as the input; the first entry is 0.
pub fn differences<T: Scalar>(seq: &[T]) -> Result<Vec<T>> {
    if seq.is_empty() {
        return Err(Error::validation(
            "differences of an empty sequence".to_string(),
        ));
    }
    let mut out = Vec::with_capacity(seq.len());
    out.push(T::zero());
    for t in 1..seq.len() {
        out.push(seq[t] - seq[t - 1]);
    }
    Ok(out)
}

/// Shuffled train/test split specification.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SplitSpec {
    pub train_fraction: f64,
    pub seed: u64,
}

impl Default for SplitSpec {
    fn default() -> Self {
        SplitSpec {
            train_fraction: 0.8,
            seed: 0,
        }
    }
}

/// Shuffles sample indices with a seeded RNG and takes `round(fraction * n)`
/// for training. Partitions keep the original dataset order.
pub fn split<T: Scalar>(ds: &Dataset<T>, spec: &SplitSpec) -> Result<(Dataset<T>, Dataset<T>)> {
    if ds.is_empty() {
        return Err(Error::validation("cannot split an empty dataset"));
    }
    if !(spec.train_fraction > 0.0 && spec.train_fraction < 1.0) {
        return Err(Error::validation(format!(
            "train fraction {} outside (0, 1)",
            spec.train_fraction
        )));
    }
    let counts = ds.label_counts();
    if counts.iter().any(|&c| c == 0) {
        return Err(Error::validation(
            "split requires at least one sample of each label",
        ));
    }
    let n = ds.len();
    let train_n = (spec.train_fraction * n as f64).round() as usize;
    if train_n == 0 || train_n >= n {
        return Err(Error::validation(format!(
            "split of {n} samples at fraction {} leaves an empty partition",
            spec.train_fraction
        )));
    }
    let mut indices: Vec<usize> = (0..n).collect();
    indices.shuffle(&mut rng(mix(spec.seed, &[seeds::TAG_SPLIT])));
    let mut train_idx: Vec<usize> = indices[..train_n].to_vec();
    let mut test_idx: Vec<usize> = indices[train_n..].to_vec();
    train_idx.sort_unstable();
    test_idx.sort_unstable();
    let take = |idx: &[usize]| -> Vec<Sample<T>> {
        idx.iter().map(|&i| ds.samples[i].clone()).collect()
    };
    Ok((
        Dataset::from_validated(take(&train_idx)),
        Dataset::from_validated(take(&test_idx)),
    ))
}

/// Per-column affine transform fitted on training data (z-scoring).
#[derive(Clone, Debug, PartialEq)]
pub struct Normalizer<T> {
    mean: Array1<T>,
    sd: Array1<T>,
}

impl<T: Scalar> Normalizer<T> {
    /// Column means and population standard deviations of `rows`; columns
    /// with (near-)zero spread are left unscaled.
    pub fn fit(rows: &Array2<T>) -> Normalizer<T> {
        let n = rows.nrows().max(1);
        let mean = rows.sum_axis(Axis(0)) / T::from_f64(n as f64);
        let mut var = Array1::<T>::zeros(rows.ncols());
        for row in rows.rows() {
            for (j, v) in row.iter().enumerate() {
                let d = *v - mean[j];
                var[j] += d * d;
            }
        }
        var /= T::from_f64(n as f64);
        let floor = T::from_f64(1e-12);
        let sd = var.mapv(|v| {
            let s = v.sqrt();
            if s <= floor {
                T::one()
            } else {
                s
            }
        });
        Normalizer { mean, sd }
    }

    pub fn apply(&self, rows: &mut Array2<T>) {
        for mut row in rows.rows_mut() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = (*v - self.mean[j]) / self.sd[j];
            }
        }
    }

    pub fn mean(&self) -> &Array1<T> {
        &self.mean
    }

    pub fn sd(&self) -> &Array1<T> {
        &self.sd
    }

    pub fn from_parts(mean: Array1<T>, sd: Array1<T>) -> Result<Self> {
        if mean.len() != sd.len() {
            return Err(Error::validation("normalizer mean/sd length mismatch"));
        }
        Ok(Normalizer { mean, sd })
    }
}

/// Replaces a fixed random subset of timestep positions with pure noise in
/// every sample (both eyes), simulating sensor failure. `fraction` is the
/// share of the [`FEATURE_LEN`] positions corrupted; padding stays zero
/// because only positions inside each sample's valid range are touched.
pub fn corrupt_positions<T: Scalar>(
    ds: &Dataset<T>,
    fraction: f64,
    noise_mean: f64,
    noise_sd: f64,
    seed: u64,
) -> Result<Dataset<T>> {
    if !(0.0..=1.0).contains(&fraction) {
        return Err(Error::validation(format!(
            "corrupt fraction {fraction} outside [0, 1]"
        )));
    }
    let positions = corrupted_position_set(fraction, seed);
    corrupt_at_positions(ds, &positions, noise_mean, noise_sd, seed)
}

/// Like [`corrupt_positions`] but with an explicit position list.
pub fn corrupt_at_positions<T: Scalar>(
    ds: &Dataset<T>,
    positions: &[usize],
    noise_mean: f64,
    noise_sd: f64,
    seed: u64,
) -> Result<Dataset<T>> {
    if noise_sd < 0.0 {
        return Err(Error::validation("corrupt noise sd must be non-negative"));
    }
    if let Some(bad) = positions.iter().find(|&&p| p >= FEATURE_LEN) {
        return Err(Error::validation(format!(
            "corrupt position {bad} outside [0, {FEATURE_LEN})"
        )));
    }
    let mut samples = Vec::with_capacity(ds.len());
    for (i, sample) in ds.samples().iter().enumerate() {
        let mut sample = sample.clone();
        let mut noise = rng(mix(seed, &[seeds::TAG_CORRUPT_SAMPLE, i as u64]));
        for &p in positions {
            if p < sample.len() {
                for eye in [&mut sample.left, &mut sample.right] {
                    let z: f64 = StandardNormal.sample(&mut noise);
                    eye[p] = T::from_f64((noise_mean + noise_sd * z).max(0.0));
                }
            }
        }
        samples.push(sample);
    }
    Ok(Dataset::from_validated(samples))
}

/// The positions `corrupt_positions` would overwrite for a given seed.
pub fn corrupted_position_set(fraction: f64, seed: u64) -> Vec<usize> {
    let k = (fraction * FEATURE_LEN as f64).round() as usize;
    let mut positions = rand::seq::index::sample(
        &mut rng(mix(seed, &[seeds::TAG_CORRUPT_POSITIONS])),
        FEATURE_LEN,
        k,
    )
    .into_vec();
    positions.sort_unstable();
    positions
}

/// Deterministic helper for tests and generators: uniform value in `[lo, hi]`.
pub(crate) fn uniform_in<R: Rng>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * rng.gen::<f64>()
}
