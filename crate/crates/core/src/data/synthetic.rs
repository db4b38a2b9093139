//! Synthetic two-eye pupillary dataset generator.
//!
//! Stands in for the private recordings the pipeline was designed around:
//! per-observer baseline diameters with slow drift, an additive response
//! bump inside a fixed signal window for genuine stimuli, Gaussian sensor
//! noise, and blink dropouts that overwrite short runs with near-zero values.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::data::{uniform_in, Dataset, Label, Sample};
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::seeds::{self, mix, rng};
use crate::{MAX_SEQ_LEN, MIN_SEQ_LEN};

/// Peak height (mm) of the genuine-stimulus response bump.
pub const SIGNAL_BUMP_MM: f64 = 1.5;

/// Configuration for [`generate_synthetic`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthConfig {
    pub n_observers: usize,
    pub n_videos: usize,
    /// Inclusive bounds on recording length.
    pub length_range: (usize, usize),
    /// Half-open `[start, end)` index range carrying the label signal; must
    /// lie inside `[0, 60)` so every sample contains it before padding.
    pub signal_window: (usize, usize),
    /// Per-timestep Gaussian sensor noise, mm.
    pub noise_sd: f64,
    /// Probability per timestep that a blink dropout starts.
    pub blink_rate: f64,
    /// Scale of the response bump on the right eye relative to the left.
    pub eye_correlation: f64,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            n_observers: 22,
            n_videos: 20,
            length_range: (MIN_SEQ_LEN, MAX_SEQ_LEN),
            signal_window: (10, 31),
            noise_sd: 0.15,
            blink_rate: 0.005,
            eye_correlation: 0.8,
            seed: 7,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_observers == 0 {
            return Err(Error::validation("n_observers must be at least 1"));
        }
        if self.n_videos < 2 {
            return Err(Error::validation(
                "n_videos must be at least 2 so both labels occur",
            ));
        }
        let (lo, hi) = self.length_range;
        if lo < MIN_SEQ_LEN || hi > MAX_SEQ_LEN || lo > hi {
            return Err(Error::validation(format!(
                "length range [{lo}, {hi}] outside [{MIN_SEQ_LEN}, {MAX_SEQ_LEN}]"
            )));
        }
        let (start, end) = self.signal_window;
        if start >= end || end > MIN_SEQ_LEN {
            return Err(Error::validation(format!(
                "signal window [{start}, {end}) must be non-empty and inside [0, {MIN_SEQ_LEN})"
            )));
        }
        if self.noise_sd < 0.0 || !self.noise_sd.is_finite() {
            return Err(Error::validation("noise_sd must be finite and >= 0"));
        }
        if !(0.0..=1.0).contains(&self.blink_rate) {
            return Err(Error::validation("blink_rate must lie in [0, 1]"));
        }
        if !(0.0..=1.0).contains(&self.eye_correlation) {
            return Err(Error::validation("eye_correlation must lie in [0, 1]"));
        }
        Ok(())
    }

    /// Additive left-eye bump at timestep `t` for genuine samples: a raised
    /// cosine over the signal window, zero elsewhere.
    pub fn bump_at(&self, t: usize) -> f64 {
        let (start, end) = self.signal_window;
        if t < start || t >= end {
            return 0.0;
        }
        let width = (end - start) as f64;
        let x = (t - start) as f64 + 0.5;
        SIGNAL_BUMP_MM * (PI * x / width).sin().powi(2)
    }
}

/// Generates `n_observers * n_videos` samples, deterministically from the
/// seed. Even-numbered videos are genuine, odd are posed; the genuine bump
/// rides on both eyes (scaled by `eye_correlation` on the right).
pub fn generate_synthetic<T: Scalar>(cfg: &SynthConfig) -> Result<Dataset<T>> {
    cfg.validate()?;
    let mut samples = Vec::with_capacity(cfg.n_observers * cfg.n_videos);
    for observer in 0..cfg.n_observers {
        let mut observer_rng = rng(mix(cfg.seed, &[seeds::TAG_OBSERVER, observer as u64]));
        let base = uniform_in(&mut observer_rng, 3.2, 3.8);
        let drift_amp = uniform_in(&mut observer_rng, 0.05, 0.2);
        let drift_phase = uniform_in(&mut observer_rng, 0.0, 2.0 * PI);
        for video in 0..cfg.n_videos {
            let tags = [observer as u64, video as u64];
            let label = if video % 2 == 0 {
                Label::Genuine
            } else {
                Label::Posed
            };
            let len = rng(mix(cfg.seed, &[seeds::TAG_SAMPLE_LEN, tags[0], tags[1]]))
                .gen_range(cfg.length_range.0..=cfg.length_range.1);

            let mut noise_rng = rng(mix(cfg.seed, &[seeds::TAG_SAMPLE_NOISE, tags[0], tags[1]]));
            let mut left = Vec::with_capacity(len);
            let mut right = Vec::with_capacity(len);
            for t in 0..len {
                let drift = drift_amp * (2.0 * PI * t as f64 / 120.0 + drift_phase).sin();
                let bump = if label == Label::Genuine {
                    cfg.bump_at(t)
                } else {
                    0.0
                };
                let zl: f64 = StandardNormal.sample(&mut noise_rng);
                let zr: f64 = StandardNormal.sample(&mut noise_rng);
                left.push((base + drift + bump + cfg.noise_sd * zl).max(0.0));
                right.push(
                    (base + drift + cfg.eye_correlation * bump + cfg.noise_sd * zr).max(0.0),
                );
            }

            let mut blink_rng = rng(mix(cfg.seed, &[seeds::TAG_SAMPLE_BLINK, tags[0], tags[1]]));
            let mut t = 0;
            while t < len {
                if blink_rng.gen::<f64>() < cfg.blink_rate {
                    let run = blink_rng.gen_range(2..=5usize);
                    for u in t..(t + run).min(len) {
                        left[u] = 0.02 + 0.03 * blink_rng.gen::<f64>();
                        right[u] = 0.02 + 0.03 * blink_rng.gen::<f64>();
                    }
                    t += run;
                } else {
                    t += 1;
                }
            }

            samples.push(Sample::new(
                format!("o{observer:02}v{video:02}"),
                observer as u32,
                video as u32,
                left.into_iter().map(T::from_f64).collect(),
                right.into_iter().map(T::from_f64).collect(),
                label,
            )?);
        }
    }
    Dataset::new(samples)
}
