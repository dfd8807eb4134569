//! File output: diagnostics CSV, summary JSON, plot series, field dumps.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::acceptance::AcceptanceReport;
use super::config::{Config, Derived};
use super::experiment::{DiagnosticsRecord, EmpiricalConstants, ExperimentResult, FieldDump, RunStatus};
use crate::error::Result;
use crate::profile::SolverMeta;

pub const SUMMARY_VERSION: u32 = 1;

/// Contents of `summary.json`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Summary {
    pub version: u32,
    pub config: Config,
    pub derived: Derived,
    pub profile: SolverMeta,
    pub run: RunStatus,
    pub steps: usize,
    pub max_newton_iters: usize,
    pub initial_h2_sq: f64,
    pub initial_mass: f64,
    pub records: usize,
    pub constants: EmpiricalConstants,
    pub acceptance: AcceptanceReport,
}

pub fn write_csv(records: &[DiagnosticsRecord], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for r in records {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv(path: &Path) -> Result<Vec<DiagnosticsRecord>> {
    let mut r = csv::Reader::from_path(path)?;
    let mut out = Vec::new();
    for row in r.deserialize() {
        out.push(row?);
    }
    Ok(out)
}

/// Two whitespace-separated columns, one row per point.
pub fn write_series(path: &Path, x: &[f64], y: &[f64]) -> Result<()> {
    let mut f = std::io::BufWriter::new(fs::File::create(path)?);
    for (a, b) in x.iter().zip(y) {
        writeln!(f, "{a:.17e} {b:.17e}")?;
    }
    f.flush()?;
    Ok(())
}

fn write_dump(path: &Path, grid: &crate::Grid, d: &FieldDump) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["x", "v", "u", "phi", "vbar", "ubar", "phibar"])?;
    for i in 0..d.v.len() {
        w.write_record(
            [grid.x(i), d.v[i], d.u[i], d.phi[i], d.vbar[i], d.ubar[i], d.phibar[i]]
                .iter()
                .map(|x| x.to_string()),
        )?;
    }
    w.flush()?;
    Ok(())
}

pub fn summary(result: &ExperimentResult, report: &AcceptanceReport) -> Summary {
    Summary {
        version: SUMMARY_VERSION,
        config: result.config.clone(),
        derived: result.derived,
        profile: result.profile_meta.clone(),
        run: result.status.clone(),
        steps: result.steps,
        max_newton_iters: result.max_newton_iters,
        initial_h2_sq: result.initial_h2_sq,
        initial_mass: result.initial_mass,
        records: result.records.len(),
        constants: result.constants,
        acceptance: report.clone(),
    }
}

/// Writes `diagnostics.csv`, `summary.json`, `config.toml`, `series/*.dat`
/// and, when dumps were taken, `fields/field_NNNNN.csv` under `dir`.
pub fn emit(result: &ExperimentResult, report: &AcceptanceReport, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    let csv_path = dir.join("diagnostics.csv");
    write_csv(&result.records, &csv_path)?;
    written.push(csv_path);

    let json_path = dir.join("summary.json");
    fs::write(&json_path, serde_json::to_string_pretty(&summary(result, report))?)?;
    written.push(json_path);

    let cfg_path = dir.join("config.toml");
    fs::write(&cfg_path, result.config.to_toml()?)?;
    written.push(cfg_path);

    let series_dir = dir.join("series");
    fs::create_dir_all(&series_dir)?;
    let t: Vec<f64> = result.records.iter().map(|r| r.t).collect();
    type Column = (&'static str, fn(&DiagnosticsRecord) -> f64);
    let columns: [Column; 8] = [
        ("u_linf", |r| r.u_linf),
        ("v_linf", |r| r.v_linf),
        ("x", |r| r.x),
        ("xdot", |r| r.xdot),
        ("eta_weighted", |r| r.eta_weighted),
        ("cumulative", |r| r.cumulative),
        ("g", |r| r.g),
        ("pert_h2_sq", |r| r.pert_h2_sq),
    ];
    for (name, col) in columns {
        let p = series_dir.join(format!("{name}.dat"));
        let y: Vec<f64> = result.records.iter().map(col).collect();
        write_series(&p, &t, &y)?;
        written.push(p);
    }

    if !result.dumps.is_empty() {
        let fields_dir = dir.join("fields");
        fs::create_dir_all(&fields_dir)?;
        for (k, d) in result.dumps.iter().enumerate() {
            let p = fields_dir.join(format!("field_{k:05}.csv"));
            write_dump(&p, &result.derived.grid, d)?;
            written.push(p);
        }
    }
    Ok(written)
}
