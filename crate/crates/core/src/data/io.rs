//! CSV persistence for datasets.
//!
//! Schema, one row per timestep:
//! `sample_id,observer_id,video_id,t,left_mm,right_mm,label`
//! with a required header, `t` 0-based and contiguous per sample, rows of a
//! sample consecutive, and `label` one of `genuine`/`posed` (any case).
//! Diameters render with shortest round-trip precision, so
//! `load_dataset(write_dataset(ds))` reproduces `ds` bit-for-bit.

use std::path::Path;

use crate::data::{Dataset, Label, Sample};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

const HEADER: [&str; 7] = [
    "sample_id",
    "observer_id",
    "video_id",
    "t",
    "left_mm",
    "right_mm",
    "label",
];

struct PendingSample<T> {
    id: String,
    observer_id: u32,
    video_id: u32,
    label: Label,
    left: Vec<T>,
    right: Vec<T>,
}

impl<T: Scalar> PendingSample<T> {
    fn finish(self) -> Result<Sample<T>> {
        Sample::new(
            self.id,
            self.observer_id,
            self.video_id,
            self.left,
            self.right,
            self.label,
        )
    }
}

fn record_line(record: &csv::StringRecord) -> u64 {
    record.position().map(|p| p.line()).unwrap_or(0)
}

fn csv_error_line(err: &csv::Error) -> u64 {
    match err.kind() {
        csv::ErrorKind::Utf8 { pos, .. } => pos.as_ref().map(|p| p.line()).unwrap_or(0),
        csv::ErrorKind::UnequalLengths { pos, .. } => {
            pos.as_ref().map(|p| p.line()).unwrap_or(0)
        }
        _ => 0,
    }
}

pub fn load_dataset<T: Scalar>(path: impl AsRef<Path>) -> Result<Dataset<T>> {
    let path = path.as_ref();
    let display = path.display().to_string();
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| match e.into_kind() {
            csv::ErrorKind::Io(io) => Error::Io(io),
            other => Error::parse(&display, 1, format!("{other:?}")),
        })?;

    {
        let headers = reader
            .headers()
            .map_err(|e| Error::parse(&display, 1, e.to_string()))?;
        let got: Vec<String> = headers.iter().map(|h| h.trim().to_ascii_lowercase()).collect();
        if got != HEADER {
            return Err(Error::parse(
                &display,
                1,
                format!("expected header {:?}, got {:?}", HEADER.join(","), got.join(",")),
            ));
        }
    }

    let mut samples: Vec<Sample<T>> = Vec::new();
    let mut pending: Option<PendingSample<T>> = None;

    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = csv_error_line(&e);
            Error::parse(&display, line, e.to_string())
        })?;
        let line = record_line(&record);
        if record.len() != HEADER.len() {
            return Err(Error::parse(
                &display,
                line,
                format!("expected {} fields, got {}", HEADER.len(), record.len()),
            ));
        }
        let field = |i: usize| record.get(i).unwrap_or("");
        let parse_err =
            |name: &str, value: &str| Error::parse(&display, line, format!("bad {name} {value:?}"));

        let id = field(0).to_string();
        if id.is_empty() {
            return Err(parse_err("sample_id", ""));
        }
        let observer_id: u32 = field(1).parse().map_err(|_| parse_err("observer_id", field(1)))?;
        let video_id: u32 = field(2).parse().map_err(|_| parse_err("video_id", field(2)))?;
        let t: usize = field(3).parse().map_err(|_| parse_err("t", field(3)))?;
        let left: T = field(4).parse().map_err(|_| parse_err("left_mm", field(4)))?;
        let right: T = field(5).parse().map_err(|_| parse_err("right_mm", field(5)))?;
        let label = Label::parse(field(6)).ok_or_else(|| parse_err("label", field(6)))?;

        let start_new = match &pending {
            Some(p) => p.id != id,
            None => true,
        };
        if start_new {
            if let Some(p) = pending.take() {
                samples.push(p.finish()?);
            }
            if t != 0 {
                return Err(Error::parse(
                    &display,
                    line,
                    format!("sample {id} must start at t=0, got t={t}"),
                ));
            }
            pending = Some(PendingSample {
                id,
                observer_id,
                video_id,
                label,
                left: vec![left],
                right: vec![right],
            });
        } else {
            let p = pending.as_mut().unwrap();
            if t != p.left.len() {
                return Err(Error::parse(
                    &display,
                    line,
                    format!("sample {id}: expected t={}, got t={t}", p.left.len()),
                ));
            }
            if p.observer_id != observer_id || p.video_id != video_id {
                return Err(Error::parse(
                    &display,
                    line,
                    format!("sample {id}: observer/video ids change mid-sample"),
                ));
            }
            if p.label != label {
                return Err(Error::parse(
                    &display,
                    line,
                    format!("sample {id}: label changes mid-sample"),
                ));
            }
            p.left.push(left);
            p.right.push(right);
        }
    }
    if let Some(p) = pending.take() {
        samples.push(p.finish()?);
    }
    Dataset::new(samples)
}

pub fn write_dataset<T: Scalar>(ds: &Dataset<T>, path: impl AsRef<Path>) -> Result<()> {
    let mut writer = csv::Writer::from_path(path.as_ref())
        .map_err(|e| Error::validation(e.to_string()))?;
    writer
        .write_record(HEADER)
        .map_err(|e| Error::validation(e.to_string()))?;
    for sample in ds.samples() {
        for t in 0..sample.len() {
            writer
                .write_record([
                    sample.sample_id.as_str(),
                    &sample.observer_id.to_string(),
                    &sample.video_id.to_string(),
                    &t.to_string(),
                    &sample.left[t].to_string(),
                    &sample.right[t].to_string(),
                    sample.label.as_str(),
                ])
                .map_err(|e| Error::validation(e.to_string()))?;
        }
    }
    writer.flush()?;
    Ok(())
}
