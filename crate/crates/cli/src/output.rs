//! CSV tables and side-car manifests.
//!
//! Numbers are written with 17 significant digits so that two runs can be
//! compared byte for byte. Cells of quantities that were not requested, or
//! of rows that failed, are left empty.

use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use udw_harvest::harvest::{HarvestResult, SweepTable, ThresholdResult};

use crate::config::{Config, RunSection};

/// Header of sweep tables.
pub const SWEEP_COLUMNS: [&str; 12] = [
    "swept_value",
    "p",
    "re_x",
    "im_x",
    "abs_x",
    "concurrence",
    "err_p",
    "err_x",
    "converged",
    "re_c",
    "im_c",
    "err_c",
];

/// Header of the single-row table written by `point`.
pub const POINT_COLUMNS: [&str; 12] = [
    "p_a",
    "p_b",
    "re_x",
    "im_x",
    "abs_x",
    "concurrence",
    "err_p",
    "err_x",
    "converged",
    "re_c",
    "im_c",
    "err_c",
];

/// Header of threshold tables.
pub const THRESHOLD_COLUMNS: [&str; 8] = [
    "swept_value",
    "threshold",
    "bracket_lo",
    "bracket_hi",
    "tolerance_achieved",
    "iterations",
    "multiple_crossings",
    "converged",
];

/// Full-precision representation of a number.
pub fn number(x: f64) -> String {
    format!("{x:.16e}")
}

fn optional(x: Option<f64>) -> String {
    x.map(number).unwrap_or_default()
}

/// Path of the manifest that accompanies `output`.
pub fn manifest_path(output: &Path) -> PathBuf {
    let stem = output
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    output.with_file_name(format!("{stem}.manifest.toml"))
}

/// Output file and manifest, both opened before any computation so that an
/// unwritable destination fails early.
pub struct Destination {
    pub path: PathBuf,
    table: File,
    manifest: File,
}

impl Destination {
    pub fn create(path: &Path) -> Result<Self> {
        let table =
            File::create(path).with_context(|| format!("cannot write {}", path.display()))?;
        let manifest_path = manifest_path(path);
        let manifest = File::create(&manifest_path)
            .with_context(|| format!("cannot write {}", manifest_path.display()))?;
        Ok(Self {
            path: path.to_owned(),
            table,
            manifest,
        })
    }

    /// Writes the table and the manifest describing how it was produced.
    pub fn finish(
        mut self,
        rows: Vec<Vec<String>>,
        header: &[&str],
        config: &Config,
        run: RunSection,
    ) -> Result<()> {
        let mut writer = csv::Writer::from_writer(&mut self.table);
        writer.write_record(header)?;
        for row in rows {
            writer.write_record(row)?;
        }
        writer.flush()?;
        drop(writer);
        let manifest = Config {
            run: Some(run),
            ..config.clone()
        };
        self.manifest.write_all(manifest.to_toml().as_bytes())?;
        Ok(())
    }
}

fn harvest_cells(r: &HarvestResult) -> Vec<String> {
    vec![
        optional(r.x.map(|x| x.re)),
        optional(r.x.map(|x| x.im)),
        optional(r.abs_x()),
        optional(r.concurrence()),
        number(r.err_p),
        optional(r.err_x),
        r.converged.to_string(),
        optional(r.c_corr.map(|c| c.re)),
        optional(r.c_corr.map(|c| c.im)),
        optional(r.err_c),
    ]
}

pub fn point_row(r: &HarvestResult) -> Vec<String> {
    let mut row = vec![number(r.p_a), number(r.p_b)];
    row.extend(harvest_cells(r));
    row
}

pub fn sweep_rows(table: &SweepTable) -> Vec<Vec<String>> {
    table
        .rows
        .iter()
        .map(|row| {
            let mut cells = vec![number(row.swept_value)];
            match &row.outcome {
                Ok(r) => {
                    cells.push(number(r.p_a));
                    cells.extend(harvest_cells(r));
                }
                Err(_) => {
                    cells.resize(SWEEP_COLUMNS.len(), String::new());
                    cells[8] = false.to_string();
                }
            }
            cells
        })
        .collect()
}

pub fn threshold_row<E>(swept_value: f64, outcome: &Result<ThresholdResult, E>) -> Vec<String> {
    let mut cells = vec![number(swept_value)];
    match outcome {
        Ok(t) => cells.extend([
            number(t.value),
            number(t.bracket.0),
            number(t.bracket.1),
            number(t.tolerance_achieved),
            t.iterations.to_string(),
            t.multiple_crossings.to_string(),
            t.converged.to_string(),
        ]),
        Err(_) => {
            cells.resize(THRESHOLD_COLUMNS.len(), String::new());
            cells[7] = false.to_string();
        }
    }
    cells
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_keep_seventeen_digits() {
        let x = 0.1 + 0.2;
        let s = number(x);
        assert_eq!(s, "3.0000000000000004e-1");
        assert_eq!(s.parse::<f64>().unwrap(), x);
    }

    #[test]
    fn manifest_sits_next_to_the_table() {
        assert_eq!(
            manifest_path(Path::new("out/fig2a.csv")),
            Path::new("out/fig2a.manifest.toml")
        );
    }
}
