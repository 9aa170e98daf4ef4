//! File writers. Numbers are written as `{:.8e}` (nine significant digits).

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use ndgi_core::psf::SweepRow;
use ndgi_core::GhostImage;

use crate::error::{CliError, Result};

pub fn sci(v: f64) -> String {
    format!("{v:.8e}")
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| CliError::io(format!("cannot create {}", path.display()), e))
}

fn csv_err(path: &Path, e: csv::Error) -> CliError {
    CliError::io(format!("writing {}", path.display()), e.into())
}

pub fn write_sweep(path: &Path, rows: &[SweepRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(create(path)?);
    w.write_record(["axis_value", "w_psf_m", "w_fov_m", "magnification", "turbulent_flag"])
        .map_err(|e| csv_err(path, e))?;
    for r in rows {
        w.write_record([
            sci(r.value),
            sci(r.report.w_psf),
            sci(r.report.w_fov),
            sci(r.report.magnification),
            r.report.turbulent.to_string(),
        ])
        .map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| CliError::io(format!("writing {}", path.display()), e))
}

/// Raw covariance values, one grid row per line.
pub fn write_image_csv(path: &Path, image: &GhostImage) -> Result<()> {
    let n = image.grid().n();
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(create(path)?);
    for row in image.values().values().chunks_exact(n) {
        w.write_record(row.iter().map(|&v| sci(v)))
            .map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| CliError::io(format!("writing {}", path.display()), e))
}

/// Binary 16-bit graymap (`P5`, maxval 65535, big-endian) of the min-max
/// normalized image.
pub fn write_pgm(path: &Path, image: &GhostImage) -> Result<()> {
    let n = image.grid().n();
    let mut bytes = format!("P5\n{n} {n}\n65535\n").into_bytes();
    for v in image.normalized() {
        let level = (v * 65535.0).round().clamp(0.0, 65535.0) as u16;
        bytes.extend_from_slice(&level.to_be_bytes());
    }
    let mut w = create(path)?;
    w.write_all(&bytes)
        .and_then(|_| w.flush())
        .map_err(|e| CliError::io(format!("writing {}", path.display()), e))
}

/// Plain `key=value` lines in insertion order.
#[derive(Debug, Default)]
pub struct Manifest {
    entries: Vec<(String, String)>,
}

impl Manifest {
    pub fn set(&mut self, key: &str, value: impl ToString) {
        self.entries.push((key.to_string(), value.to_string()));
    }

    pub fn render(&self) -> String {
        self.entries
            .iter()
            .map(|(k, v)| format!("{k}={v}\n"))
            .collect()
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.render()).map_err(|e| CliError::io(format!("writing {}", path.display()), e))
    }
}
