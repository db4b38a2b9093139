//! Versioned text checkpoint for trained models.
//!
//! Layout (line oriented, space separated, shortest round-trip floats):
//!
//! ```text
//! veracity-checkpoint v1
//! scenario <left-only|right-only|left-right|left-diff|right-diff>
//! activation <relu|tanh|sigmoid>
//! hidden_units <n>
//! input_dim <n>
//! mask <186-char 0/1 string | none>
//! normalize <streams | none>
//! norm_a_mean <186 floats>        # only when normalize = streams
//! norm_a_sd <186 floats>
//! norm_b_mean <186 floats>        # only for two-stream models
//! norm_b_sd <186 floats>
//! layers <count>
//! layer <index> <out_dim> <in_dim>
//! w <in_dim floats>               # one line per output unit, row-major
//! ...
//! b <out_dim floats>
//! end
//! ```

use std::path::Path;

use ndarray::{Array1, Array2};

use crate::data::Normalizer;
use crate::error::{Error, Result};
use crate::ga::FeatureMask;
use crate::model::input::StreamNormalizer;
use crate::model::{ModelKind, ModelParams, ModelTopology, Scenario};
use crate::nn::{Activation, LayerParams};
use crate::scalar::Scalar;
use crate::FEATURE_LEN;

const MAGIC: &str = "veracity-checkpoint v1";

/// Everything needed to re-evaluate a trained model on new data.
#[derive(Clone, Debug, PartialEq)]
pub struct Checkpoint<T> {
    pub params: ModelParams<T>,
    pub scenario: Scenario,
    pub mask: Option<FeatureMask>,
    pub normalizer: Option<StreamNormalizer<T>>,
}

impl<T: Scalar> Checkpoint<T> {
    pub fn validate(&self) -> Result<()> {
        let topology = self.params.topology();
        if topology.kind != self.scenario.kind() {
            return Err(Error::validation(
                "checkpoint scenario does not match model kind",
            ));
        }
        if let Some(mask) = &self.mask {
            if mask.len() != FEATURE_LEN {
                return Err(Error::validation("checkpoint mask must have length 186"));
            }
            if mask.popcount() != topology.input_dim {
                return Err(Error::validation(format!(
                    "mask selects {} features but model expects {}",
                    mask.popcount(),
                    topology.input_dim
                )));
            }
        } else if topology.input_dim != FEATURE_LEN {
            return Err(Error::validation(format!(
                "maskless checkpoint must take {FEATURE_LEN} inputs, has {}",
                topology.input_dim
            )));
        }
        if let Some(norm) = &self.normalizer {
            if norm.a.mean().len() != FEATURE_LEN {
                return Err(Error::validation("normalizer width must be 186"));
            }
            match (topology.kind, &norm.b) {
                (ModelKind::TwoStream, Some(b)) if b.mean().len() == FEATURE_LEN => {}
                (ModelKind::SingleStream, None) => {}
                _ => {
                    return Err(Error::validation(
                        "normalizer streams do not match model kind",
                    ))
                }
            }
        }
        Ok(())
    }
}

fn write_floats<T: Scalar>(out: &mut String, prefix: &str, values: impl Iterator<Item = T>) {
    out.push_str(prefix);
    for v in values {
        out.push(' ');
        out.push_str(&v.to_string());
    }
    out.push('\n');
}

pub fn save_checkpoint<T: Scalar>(ckpt: &Checkpoint<T>, path: impl AsRef<Path>) -> Result<()> {
    ckpt.validate()?;
    let topology = ckpt.params.topology();
    let mut out = String::new();
    out.push_str(MAGIC);
    out.push('\n');
    out.push_str(&format!("scenario {}\n", ckpt.scenario));
    out.push_str(&format!("activation {}\n", topology.activation));
    out.push_str(&format!("hidden_units {}\n", topology.hidden_units));
    out.push_str(&format!("input_dim {}\n", topology.input_dim));
    match &ckpt.mask {
        Some(mask) => out.push_str(&format!("mask {}\n", mask.to_01_string())),
        None => out.push_str("mask none\n"),
    }
    match &ckpt.normalizer {
        Some(norm) => {
            out.push_str("normalize streams\n");
            write_floats(&mut out, "norm_a_mean", norm.a.mean().iter().copied());
            write_floats(&mut out, "norm_a_sd", norm.a.sd().iter().copied());
            if let Some(b) = &norm.b {
                write_floats(&mut out, "norm_b_mean", b.mean().iter().copied());
                write_floats(&mut out, "norm_b_sd", b.sd().iter().copied());
            }
        }
        None => out.push_str("normalize none\n"),
    }
    let layers = ckpt.params.layer_params();
    out.push_str(&format!("layers {}\n", layers.len()));
    for (i, layer) in layers.iter().enumerate() {
        out.push_str(&format!(
            "layer {i} {} {}\n",
            layer.out_dim(),
            layer.in_dim()
        ));
        for row in layer.weights.rows() {
            write_floats(&mut out, "w", row.iter().copied());
        }
        write_floats(&mut out, "b", layer.biases.iter().copied());
    }
    out.push_str("end\n");
    std::fs::write(path, out)?;
    Ok(())
}

struct Lines<'a> {
    path: String,
    iter: std::str::Lines<'a>,
    line: u64,
}

impl<'a> Lines<'a> {
    fn next(&mut self) -> Result<&'a str> {
        self.line += 1;
        self.iter
            .next()
            .ok_or_else(|| Error::parse(&self.path, self.line, "unexpected end of file"))
    }

    fn err(&self, message: impl Into<String>) -> Error {
        Error::parse(&self.path, self.line, message)
    }

    /// Next line, which must start with `key`; returns the remainder.
    fn field(&mut self, key: &str) -> Result<&'a str> {
        let line = self.next()?;
        line.strip_prefix(key)
            .map(str::trim)
            .ok_or_else(|| self.err(format!("expected {key:?}, got {line:?}")))
    }

    fn floats<T: Scalar>(&mut self, key: &str, expected: usize) -> Result<Vec<T>> {
        let rest = self.field(key)?;
        let values = rest
            .split_whitespace()
            .map(|tok| tok.parse::<T>())
            .collect::<std::result::Result<Vec<T>, _>>()
            .map_err(|e| self.err(format!("bad float: {e}")))?;
        if values.len() != expected {
            return Err(self.err(format!(
                "expected {expected} values after {key:?}, got {}",
                values.len()
            )));
        }
        Ok(values)
    }
}

pub fn load_checkpoint<T: Scalar>(path: impl AsRef<Path>) -> Result<Checkpoint<T>> {
    let path = path.as_ref();
    let contents = std::fs::read_to_string(path)?;
    let mut lines = Lines {
        path: path.display().to_string(),
        iter: contents.lines(),
        line: 0,
    };

    if lines.next()? != MAGIC {
        return Err(lines.err(format!("expected header {MAGIC:?}")));
    }
    let scenario: Scenario = lines.field("scenario")?.parse()?;
    let activation: Activation = lines.field("activation")?.parse()?;
    let parse_usize = |lines: &mut Lines, key: &str| -> Result<usize> {
        let rest = lines.field(key)?;
        rest.parse()
            .map_err(|_| lines.err(format!("bad {key} {rest:?}")))
    };
    let hidden_units = parse_usize(&mut lines, "hidden_units")?;
    let input_dim = parse_usize(&mut lines, "input_dim")?;
    let mask = match lines.field("mask")? {
        "none" => None,
        bits => Some(FeatureMask::from_01_string(bits)?),
    };
    let normalizer = match lines.field("normalize")? {
        "none" => None,
        "streams" => {
            let mean = lines.floats::<T>("norm_a_mean", FEATURE_LEN)?;
            let sd = lines.floats::<T>("norm_a_sd", FEATURE_LEN)?;
            let a = Normalizer::from_parts(Array1::from(mean), Array1::from(sd))?;
            let b = if scenario.kind() == ModelKind::TwoStream {
                let mean = lines.floats::<T>("norm_b_mean", FEATURE_LEN)?;
                let sd = lines.floats::<T>("norm_b_sd", FEATURE_LEN)?;
                Some(Normalizer::from_parts(Array1::from(mean), Array1::from(sd))?)
            } else {
                None
            };
            Some(StreamNormalizer { a, b })
        }
        other => return Err(lines.err(format!("bad normalize flag {other:?}"))),
    };

    let layer_count = parse_usize(&mut lines, "layers")?;
    let mut layers = Vec::with_capacity(layer_count);
    for index in 0..layer_count {
        let rest = lines.field("layer")?;
        let parts: Vec<&str> = rest.split_whitespace().collect();
        if parts.len() != 3 || parts[0].parse::<usize>() != Ok(index) {
            return Err(lines.err(format!("bad layer header {rest:?}")));
        }
        let out_dim: usize = parts[1]
            .parse()
            .map_err(|_| lines.err("bad layer out_dim"))?;
        let in_dim: usize = parts[2]
            .parse()
            .map_err(|_| lines.err("bad layer in_dim"))?;
        let mut weights = Array2::<T>::zeros((out_dim, in_dim));
        for r in 0..out_dim {
            let row = lines.floats::<T>("w", in_dim)?;
            for (c, v) in row.into_iter().enumerate() {
                weights[[r, c]] = v;
            }
        }
        let biases = Array1::from(lines.floats::<T>("b", out_dim)?);
        layers.push(LayerParams { weights, biases });
    }
    if lines.next()? != "end" {
        return Err(lines.err("expected trailing \"end\""));
    }

    let topology = ModelTopology {
        kind: scenario.kind(),
        input_dim,
        hidden_units,
        activation,
    };
    let ckpt = Checkpoint {
        params: ModelParams::from_layers(topology, layers)?,
        scenario,
        mask,
        normalizer,
    };
    ckpt.validate()?;
    Ok(ckpt)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{generate_synthetic, SynthConfig};
    use crate::model::input::StreamInput;

    fn sample_checkpoint(normalize: bool, masked: bool) -> Checkpoint<f64> {
        let cfg = SynthConfig {
            n_observers: 2,
            n_videos: 4,
            ..SynthConfig::default()
        };
        let ds = generate_synthetic::<f64>(&cfg).unwrap();
        let input = StreamInput::from_dataset(&ds, Scenario::LeftRight).unwrap();
        let mask = masked.then(|| {
            let mut bits = vec![false; FEATURE_LEN];
            for i in (0..FEATURE_LEN).step_by(3) {
                bits[i] = true;
            }
            FeatureMask::new(bits).unwrap()
        });
        let input_dim = StreamInput::<f64>::input_dim(mask.as_ref());
        let topology = ModelTopology::two_stream(input_dim, 5, Activation::Tanh);
        Checkpoint {
            params: ModelParams::init(topology, 3).unwrap(),
            scenario: Scenario::LeftRight,
            mask,
            normalizer: normalize.then(|| input.fit_normalizer()),
        }
    }

    #[test]
    fn round_trips_exactly() {
        let dir = tempfile::tempdir().unwrap();
        for (normalize, masked) in [(false, false), (true, false), (false, true), (true, true)] {
            let ckpt = sample_checkpoint(normalize, masked);
            let path = dir.path().join(format!("m_{normalize}_{masked}.ckpt"));
            save_checkpoint(&ckpt, &path).unwrap();
            let loaded: Checkpoint<f64> = load_checkpoint(&path).unwrap();
            assert_eq!(ckpt, loaded);
        }
    }

    #[test]
    fn rejects_corrupted_files() {
        let dir = tempfile::tempdir().unwrap();
        let ckpt = sample_checkpoint(false, false);
        let path = dir.path().join("model.ckpt");
        save_checkpoint(&ckpt, &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();

        let truncated = dir.path().join("truncated.ckpt");
        std::fs::write(&truncated, &text[..text.len() / 2]).unwrap();
        assert!(load_checkpoint::<f64>(&truncated).is_err());

        let bad_magic = dir.path().join("magic.ckpt");
        std::fs::write(&bad_magic, text.replacen("v1", "v9", 1)).unwrap();
        let err = load_checkpoint::<f64>(&bad_magic).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));

        let bad_float = dir.path().join("float.ckpt");
        std::fs::write(&bad_float, text.replacen("w ", "w x", 1)).unwrap();
        assert!(load_checkpoint::<f64>(&bad_float).is_err());
    }
}
