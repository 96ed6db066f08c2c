//! Report emission: `report.json`, the per-table CSVs and `indicators.csv`.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::diagnostics::{DatasetDiagnostics, DiagnosticTables};
use super::{EvalReport, Method};
use crate::{Error, Result};

fn write_rows<T: Serialize>(path: &Path, rows: impl IntoIterator<Item = T>) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::InvalidArgument(format!("{}: {other:?}", path.display())),
    })?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

#[derive(Serialize)]
struct AggregateRow {
    method: Method,
    datasets: usize,
    mean_delta_accuracy: f64,
    mean_delta_minority_recall: f64,
    mean_delta_majority_recall: f64,
    wins: usize,
    ties: usize,
    losses: usize,
    wilcoxon_w: Option<f64>,
    wilcoxon_p: Option<f64>,
    minority_regressions: usize,
    majority_regressions: usize,
}

#[derive(Serialize)]
struct PerDatasetRow<'a> {
    dataset: &'a str,
    n: usize,
    method: Method,
    accuracy: f64,
    minority_recall: f64,
    majority_recall: f64,
    delta_accuracy: Option<f64>,
}

#[derive(Serialize)]
struct IndicatorCsvRow<'a> {
    dataset: &'a str,
    #[serde(rename = "M")]
    m: f64,
    #[serde(rename = "S")]
    s: f64,
    #[serde(rename = "MS")]
    ms: f64,
    delta_acc: Option<f64>,
}

#[derive(Serialize)]
struct QuintileCsvRow {
    quintile: usize,
    size: usize,
    ms_min: f64,
    ms_max: f64,
    mean_delta: f64,
    wins: usize,
    ties: usize,
    losses: usize,
}

#[derive(Serialize)]
struct PointRow {
    x1: f64,
    x2: f64,
    class: u8,
    best_pattern: String,
    accuracy: f64,
}

fn indicator_row(r: &super::IndicatorRow) -> IndicatorCsvRow<'_> {
    IndicatorCsvRow {
        dataset: &r.dataset,
        m: r.m,
        s: r.s,
        ms: r.ms,
        delta_acc: r.delta_accuracy,
    }
}

/// Writes the evaluation report and its tables into `dir`; returns the
/// files written.
pub fn write_report(report: &EvalReport, dir: &Path) -> Result<Vec<PathBuf>> {
    ensure_dir(dir)?;
    let mut written = Vec::new();

    let json = dir.join("report.json");
    fs::write(&json, report.to_json()?).map_err(|e| Error::io(&json, e))?;
    written.push(json);

    let path = dir.join("table3_aggregate.csv");
    write_rows(
        &path,
        report.comparisons.iter().map(|c| AggregateRow {
            method: c.method,
            datasets: c.deltas.len(),
            mean_delta_accuracy: c.mean_delta_accuracy,
            mean_delta_minority_recall: c.mean_delta_minority_recall,
            mean_delta_majority_recall: c.mean_delta_majority_recall,
            wins: c.wtl.wins,
            ties: c.wtl.ties,
            losses: c.wtl.losses,
            wilcoxon_w: c.wilcoxon.map(|w| w.statistic),
            wilcoxon_p: c.wilcoxon.map(|w| w.p_value),
            minority_regressions: c.minority_regressions,
            majority_regressions: c.majority_regressions,
        }),
    )?;
    written.push(path);

    let path = dir.join("table14_per_dataset.csv");
    let rows = report.datasets.iter().flat_map(|d| {
        d.means.iter().map(move |(&method, m)| PerDatasetRow {
            dataset: &d.dataset,
            n: d.n_samples,
            method,
            accuracy: m.accuracy,
            minority_recall: m.minority_recall,
            majority_recall: m.majority_recall,
            delta_accuracy: d.delta(method).map(|x| x.accuracy),
        })
    });
    write_rows(&path, rows)?;
    written.push(path);

    let path = dir.join("indicators.csv");
    write_rows(&path, report.indicators.iter().map(indicator_row))?;
    written.push(path);

    let mut by_ms: Vec<&super::IndicatorRow> = report.indicators.iter().collect();
    by_ms.sort_by(|a, b| b.ms.total_cmp(&a.ms));
    let path = dir.join("table13_ms.csv");
    write_rows(&path, by_ms.into_iter().map(indicator_row))?;
    written.push(path);

    if let Some(q) = &report.quintiles {
        let path = dir.join("table8_quintiles.csv");
        write_rows(
            &path,
            q.iter().map(|r| QuintileCsvRow {
                quintile: r.quintile,
                size: r.size,
                ms_min: r.ms_min,
                ms_max: r.ms_max,
                mean_delta: r.mean_delta,
                wins: r.wtl.wins,
                ties: r.wtl.ties,
                losses: r.wtl.losses,
            }),
        )?;
        written.push(path);
    }

    let path = dir.join("runs.csv");
    write_rows(&path, &report.records)?;
    written.push(path);
    Ok(written)
}

/// Writes the diagnostic tables into `dir`.
pub fn write_diagnostics(tables: &DiagnosticTables, dir: &Path) -> Result<Vec<PathBuf>> {
    ensure_dir(dir)?;
    let files = [
        "table2_pattern_frequency.csv",
        "table4_region_pattern.csv",
        "table5_pattern_class.csv",
        "table6_spread.csv",
        "table7_best_pattern.csv",
    ];
    let paths: Vec<PathBuf> = files.iter().map(|f| dir.join(f)).collect();
    write_rows(&paths[0], &tables.frequency)?;
    write_rows(&paths[1], &tables.region_pattern)?;
    write_rows(&paths[2], &tables.pattern_class)?;
    write_rows(&paths[3], &tables.spread)?;
    write_rows(&paths[4], &tables.best_pattern)?;
    let json = dir.join("diagnostics.json");
    fs::write(&json, serde_json::to_string_pretty(tables)?).map_err(|e| Error::io(&json, e))?;
    let mut out = paths;
    out.push(json);
    Ok(out)
}

/// Per-point best-pattern map for a 2D dataset: `x1, x2, class, best_pattern`.
pub fn write_point_map(diag: &DatasetDiagnostics, path: &Path) -> Result<()> {
    if let Some(p) = diag.points.iter().find(|p| p.x.len() != 2) {
        return Err(Error::DimensionMismatch {
            expected: 2,
            got: p.x.len(),
        });
    }
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        ensure_dir(parent)?;
    }
    write_rows(
        path,
        diag.points.iter().map(|p| PointRow {
            x1: p.x[0],
            x2: p.x[1],
            class: p.label,
            best_pattern: p.best.to_string(),
            accuracy: p.accuracy,
        }),
    )
}
