//! Deterministic result files: CSV tables, CSV density matrices, and a JSON
//! metadata sidecar per scenario. Files appear atomically (write to a
//! temporary name, then rename) and are named
//! `<scenario>__<strategies>__<config-hash>.<ext>` with a timestamp-free
//! hash of the resolved configuration.

use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::experiments::{ResultTable, ScenarioOutput};
use crate::matter::DensityGeometry;
use crate::observables::DensityField;
use sha2::{Digest, Sha256};
use std::fs;
use std::path::{Path, PathBuf};

/// Twelve hex characters of the SHA-256 of the canonical resolved config.
pub fn config_hash(cfg: &RunConfig) -> String {
    let mut hasher = Sha256::new();
    hasher.update(cfg.canonical_toml().as_bytes());
    let digest = hasher.finalize();
    digest.iter().take(6).map(|b| format!("{b:02x}")).collect()
}

fn fmt_value(v: f64) -> String {
    if v.is_nan() {
        "nan".to_string()
    } else {
        format!("{v:.12e}")
    }
}

pub fn table_to_csv(table: &ResultTable) -> String {
    let mut out = String::new();
    if table.row_labels.is_some() {
        out.push_str("label,");
    }
    out.push_str(&table.columns.join(","));
    out.push('\n');
    for (i, row) in table.rows.iter().enumerate() {
        if let Some(labels) = &table.row_labels {
            out.push_str(&labels[i]);
            out.push(',');
        }
        let cells: Vec<String> = row.iter().map(|&v| fmt_value(v)).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

pub fn density_to_csv(field: &DensityField) -> String {
    let mut out = String::new();
    match field.geometry {
        DensityGeometry::Line { grid } | DensityGeometry::PairLine { grid } => {
            out.push_str(&format!(
                "# geometry=line n={} spacing={:.12e}\n",
                grid.n_points(),
                grid.spacing()
            ));
            let cells: Vec<String> = field.values.iter().map(|&v| fmt_value(v)).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        DensityGeometry::Plane { grid } => {
            out.push_str(&format!(
                "# geometry=plane nx={} ny={} spacing_x={:.12e} spacing_y={:.12e}\n",
                grid.n_x(),
                grid.n_y(),
                grid.spacing_x(),
                grid.spacing_y()
            ));
            for iy in 0..grid.n_y() {
                let row = &field.values[iy * grid.n_x()..(iy + 1) * grid.n_x()];
                let cells: Vec<String> = row.iter().map(|&v| fmt_value(v)).collect();
                out.push_str(&cells.join(","));
                out.push('\n');
            }
        }
    }
    out
}

/// Write content to `path` atomically via a sibling temporary file.
pub fn write_atomic(path: &Path, content: &str) -> Result<()> {
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, content)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

fn checked_path(dir: &Path, name: &str, overwrite: bool) -> Result<PathBuf> {
    let path = dir.join(name);
    if path.exists() && !overwrite {
        return Err(Error::Config(format!(
            "output file {} exists; pass overwrite to replace it",
            path.display()
        )));
    }
    Ok(path)
}

/// Write every artifact of a finished scenario; returns the written paths.
pub fn write_scenario(
    dir: &Path,
    output: &ScenarioOutput,
    cfg: &RunConfig,
    overwrite: bool,
) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let hash = config_hash(cfg);
    let base = format!("{}__{}__{}", output.name, output.strategies_slug, hash);
    let mut written = Vec::new();

    let table_path = checked_path(dir, &format!("{base}.csv"), overwrite)?;
    write_atomic(&table_path, &table_to_csv(&output.table))?;
    written.push(table_path);

    if let Some(summary) = &output.summary {
        let p = checked_path(dir, &format!("{base}__summary.csv"), overwrite)?;
        write_atomic(&p, &table_to_csv(summary))?;
        written.push(p);
    }

    for (name, field) in &output.densities {
        let p = checked_path(dir, &format!("{base}__{name}.csv"), overwrite)?;
        write_atomic(&p, &density_to_csv(field))?;
        written.push(p);
    }

    let meta = serde_json::json!({
        "scenario": output.name,
        "config_hash": hash,
        "resolved_config": cfg,
        "records": output.records,
        "extras": output.extras,
    });
    let meta_path = checked_path(dir, &format!("{base}.meta.json"), overwrite)?;
    write_atomic(&meta_path, &serde_json::to_string_pretty(&meta).expect("metadata serializes"))?;
    written.push(meta_path);

    Ok(written)
}
