//! Report documents, CSV tables and atomic file output.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use subexp_core::{ComparisonTable, EvaluationTable, OracleEstimate, RegimeClass, TailExpansion};

use crate::config::Config;
use crate::error::CliError;

/// Everything one run produced, with the config that produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Report {
    pub config: Config,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub classification: Option<RegimeClass>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expansion: Option<TailExpansion>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub evaluation: Option<EvaluationTable>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub comparison: Option<ComparisonTable>,
}

impl Report {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let report: Report = serde_path_to_error::deserialize(de).map_err(|e| CliError::Schema {
            path: e.path().to_string(),
            message: e.into_inner().to_string(),
        })?;
        report.config.validate()?;
        Ok(report)
    }
}

/// Write `bytes` to `dir/name` through a temporary file in the same directory.
pub fn write_atomic(dir: &Path, name: &str, bytes: &[u8]) -> Result<PathBuf, CliError> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(format!("creating {}", dir.display()), e))?;
    let target = dir.join(name);
    let mut tmp = tempfile::NamedTempFile::new_in(dir)
        .map_err(|e| CliError::io(format!("temporary file in {}", dir.display()), e))?;
    tmp.write_all(bytes)
        .and_then(|_| publish_permissions(tmp.as_file()))
        .and_then(|_| tmp.as_file().sync_all())
        .map_err(|e| CliError::io(format!("writing {}", target.display()), e))?;
    tmp.persist(&target)
        .map_err(|e| CliError::io(format!("renaming onto {}", target.display()), e.error))?;
    Ok(target)
}

#[cfg(unix)]
fn publish_permissions(file: &std::fs::File) -> std::io::Result<()> {
    use std::os::unix::fs::PermissionsExt;
    file.set_permissions(std::fs::Permissions::from_mode(0o644))
}

#[cfg(not(unix))]
fn publish_permissions(_: &std::fs::File) -> std::io::Result<()> {
    Ok(())
}

pub fn to_json<T: Serialize>(value: &T) -> Result<Vec<u8>, CliError> {
    let mut bytes = serde_json::to_vec_pretty(value).map_err(|e| CliError::Output(e.to_string()))?;
    bytes.push(b'\n');
    Ok(bytes)
}

/// Shortest round-trip scientific form.
fn sci(x: f64) -> String {
    format!("{x:e}")
}

fn num(x: Option<f64>) -> String {
    x.map_or_else(String::new, sci)
}

fn finish(writer: csv::Writer<Vec<u8>>) -> Result<Vec<u8>, CliError> {
    writer.into_inner().map_err(|e| CliError::Output(e.to_string()))
}

fn header(term_labels: &[String]) -> Vec<String> {
    let mut h = vec!["t".to_string(), "expansion_total".to_string()];
    h.extend(term_labels.iter().map(|l| format!("term_{}", l.replace(',', ";"))));
    h.extend(
        [
            "remainder_benchmark",
            "oracle_p",
            "oracle_stderr",
            "deviation",
            "deviation_over_benchmark",
            "cancellation_flag",
        ]
        .map(String::from),
    );
    h
}

struct CsvRow<'a> {
    t: f64,
    total: Option<f64>,
    terms: &'a [f64],
    benchmark: Option<f64>,
    oracle: Option<&'a OracleEstimate>,
    deviation: Option<f64>,
    deviation_over_benchmark: Option<f64>,
    cancellation: bool,
}

fn write_rows<'a>(labels: &[String], rows: impl Iterator<Item = CsvRow<'a>>) -> Result<Vec<u8>, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let err = |e: csv::Error| CliError::Output(e.to_string());
    w.write_record(header(labels)).map_err(err)?;
    for r in rows {
        let mut rec = vec![sci(r.t), num(r.total)];
        rec.extend((0..labels.len()).map(|k| num(r.terms.get(k).copied())));
        rec.extend([
            num(r.benchmark),
            num(r.oracle.map(|o| o.p_hat)),
            num(r.oracle.map(|o| o.std_err)),
            num(r.deviation),
            num(r.deviation_over_benchmark),
            r.cancellation.to_string(),
        ]);
        w.write_record(rec).map_err(err)?;
    }
    finish(w)
}

pub fn evaluation_csv(table: &EvaluationTable) -> Result<Vec<u8>, CliError> {
    write_rows(
        &table.term_labels,
        table.rows.iter().map(|r| CsvRow {
            t: r.t,
            total: r.total,
            terms: &r.terms,
            benchmark: r.benchmark,
            oracle: None,
            deviation: None,
            deviation_over_benchmark: None,
            cancellation: r.cancellation,
        }),
    )
}

pub fn comparison_csv(table: &ComparisonTable) -> Result<Vec<u8>, CliError> {
    write_rows(
        &table.term_labels,
        table.rows.iter().map(|r| CsvRow {
            t: r.t,
            total: r.expansion_total,
            terms: &r.terms,
            benchmark: r.benchmark,
            oracle: r.oracle.as_ref(),
            deviation: r.deviation,
            deviation_over_benchmark: r.deviation_over_benchmark,
            cancellation: r.cancellation,
        }),
    )
}

pub fn oracle_csv(estimates: &[OracleEstimate]) -> Result<Vec<u8>, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let err = |e: csv::Error| CliError::Output(e.to_string());
    w.write_record([
        "t",
        "oracle_p",
        "oracle_stderr",
        "quadrature_error",
        "truncation_n",
        "truncation_bias_bound",
        "n_samples",
        "seed",
        "method",
    ])
    .map_err(err)?;
    for o in estimates {
        let method = serde_json::to_value(o.method)
            .ok()
            .and_then(|v| v.as_str().map(String::from))
            .unwrap_or_default();
        w.write_record([
            sci(o.t),
            sci(o.p_hat),
            sci(o.std_err),
            sci(o.quadrature_error),
            o.truncation_n.to_string(),
            sci(o.truncation_bias_bound),
            o.n_samples.to_string(),
            o.seed.to_string(),
            method,
        ])
        .map_err(err)?;
    }
    finish(w)
}
