//! CSV and JSON artifacts.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::Spectrum;
use crate::theory::{CirclePrediction, EllipsePrediction, Geometry};

use super::SweepRecord;

pub const CSV_HEADER: [&str; 11] = [
    "scenario",
    "param",
    "value",
    "seed",
    "r_theory",
    "r_spectral",
    "r_dynamics",
    "modulus_theory",
    "modulus_spectral",
    "regime",
    "wall_ms",
];

fn csv_error(path: &Path, source: csv::Error) -> Error {
    Error::Csv {
        path: path.to_path_buf(),
        source,
    }
}

/// Writes `records` with the fixed header; an empty list gives a header-only
/// file.
pub fn export_csv(records: &[SweepRecord], path: &Path) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_path(path)
        .map_err(|e| csv_error(path, e))?;
    w.write_record(CSV_HEADER).map_err(|e| csv_error(path, e))?;
    for r in records {
        w.serialize(r).map_err(|e| csv_error(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_csv(path: &Path) -> Result<Vec<SweepRecord>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| csv_error(path, e))?;
    r.deserialize()
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| csv_error(path, e))
}

/// On-disk form of a spectrum with its predicted bulk and outlier.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumDocument {
    pub eigenvalues: Vec<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub circle: Option<CirclePrediction>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ellipse: Option<EllipsePrediction>,
    pub outlier: Option<f64>,
}

impl SpectrumDocument {
    pub fn new(spectrum: &Spectrum, geometry: Option<&Geometry>, outlier: Option<f64>) -> Self {
        let (circle, ellipse) = match geometry {
            Some(Geometry::Circle(c)) => (Some(*c), None),
            Some(Geometry::Ellipse(e)) => (None, Some(*e)),
            None => (None, None),
        };
        Self {
            eigenvalues: spectrum.eigenvalues().iter().map(|z| [z.re, z.im]).collect(),
            circle,
            ellipse,
            outlier,
        }
    }
}

pub fn export_spectrum_json(
    spectrum: &Spectrum,
    geometry: Option<&Geometry>,
    outlier: Option<f64>,
    path: &Path,
) -> Result<()> {
    write_json(&SpectrumDocument::new(spectrum, geometry, outlier), path, false)
}

pub(crate) fn write_json<T: Serialize>(value: &T, path: &Path, pretty: bool) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let written = if pretty {
        serde_json::to_writer_pretty(&mut w, value)
    } else {
        serde_json::to_writer(&mut w, value)
    };
    written.map_err(|e| Error::Json {
        path: path.to_path_buf(),
        source: e,
    })?;
    w.write_all(b"\n").map_err(|e| Error::io(path, e))?;
    w.flush().map_err(|e| Error::io(path, e))
}
