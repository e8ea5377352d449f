//! Command dispatch.

use std::path::{Path, PathBuf};

use clap::ValueEnum;
use serde::Serialize;
use subexp_core::{
    classify, compare, evaluate, expand, rewrite_in_hazard_scale, HazardScaleExpansion, OracleEstimate,
    Regime, TailExpansion,
};

use crate::config::Config;
use crate::error::CliError;
use crate::output::{comparison_csv, evaluation_csv, oracle_csv, to_json, write_atomic, Report};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Command {
    Classify,
    Expand,
    Evaluate,
    Oracle,
    Compare,
    Report,
}

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub config: Option<PathBuf>,
    /// Re-ingest a previous `report.json` instead of a config.
    pub report: Option<PathBuf>,
    pub out: PathBuf,
    pub seed: Option<u64>,
    pub order: Option<usize>,
}

#[derive(Debug, Serialize)]
struct ExpandOutput<'a> {
    expansion: &'a TailExpansion,
    #[serde(skip_serializing_if = "Option::is_none")]
    hazard_scale: Option<HazardScaleExpansion>,
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::io(format!("reading {}", path.display()), e))
}

fn load(opts: &RunOptions) -> Result<(Config, Option<Report>), CliError> {
    let (mut config, previous) = match (&opts.report, &opts.config) {
        (Some(r), _) => {
            let report = Report::from_json(&read(r)?)?;
            (report.config.clone(), Some(report))
        }
        (None, Some(c)) => (Config::from_json(&read(c)?)?, None),
        (None, None) => {
            return Err(CliError::Schema {
                path: String::new(),
                message: "either --config or --report is required".into(),
            })
        }
    };
    if let Some(seed) = opts.seed {
        config.oracle.seed = seed;
    }
    if let Some(order) = opts.order {
        config.expansion.order = order;
    }
    Ok((config, previous))
}

/// Execute `command` and return the paths written.
pub fn run(command: Command, opts: &RunOptions) -> Result<Vec<PathBuf>, CliError> {
    let (config, previous) = load(opts)?;
    let dist = config.distribution()?;
    let seq = config.weights()?;
    let grid = config.grid();
    let out = opts.out.as_path();
    let mut written = Vec::new();

    match command {
        Command::Classify => {
            let class = classify(dist.upper())?;
            written.push(write_atomic(out, "classification.json", &to_json(&class)?)?);
        }
        Command::Expand => {
            let exp = expand(&dist, &seq, config.expansion.order, config.expansion.regime_override)?;
            let hazard_scale = match exp.regime.regime {
                Regime::CaseC => Some(rewrite_in_hazard_scale(&exp, exp.terms.len().max(1))?),
                _ => None,
            };
            let doc = ExpandOutput {
                expansion: &exp,
                hazard_scale,
            };
            written.push(write_atomic(out, "expansion.json", &to_json(&doc)?)?);
        }
        Command::Evaluate => {
            let exp = expand(&dist, &seq, config.expansion.order, config.expansion.regime_override)?;
            let table = evaluate(&exp, &dist, &grid);
            if let Some(old) = previous.as_ref().and_then(|r| r.evaluation.as_ref()) {
                if *old != table {
                    return Err(CliError::RoundTrip(
                        "recomputed evaluation table differs from the report".into(),
                    ));
                }
            }
            written.push(write_atomic(out, "evaluation.csv", &evaluation_csv(&table)?)?);
            let report = Report {
                classification: Some(exp.regime.clone()),
                expansion: Some(exp),
                evaluation: Some(table),
                comparison: None,
                config,
            };
            written.push(write_atomic(out, "report.json", &to_json(&report)?)?);
        }
        Command::Oracle => {
            let estimates: Vec<OracleEstimate> = grid
                .iter()
                .map(|&t| config.oracle.estimate(&dist, &seq, t))
                .collect::<Result<_, _>>()?;
            written.push(write_atomic(out, "oracle.csv", &oracle_csv(&estimates)?)?);
            written.push(write_atomic(out, "oracle.json", &to_json(&estimates)?)?);
        }
        Command::Compare | Command::Report => {
            let exp = expand(&dist, &seq, config.expansion.order, config.expansion.regime_override)?;
            let table = compare(&exp, &dist, &seq, &grid, &config.oracle);
            written.push(write_atomic(out, "comparison.csv", &comparison_csv(&table)?)?);
            if command == Command::Compare {
                written.push(write_atomic(out, "comparison.json", &to_json(&table)?)?);
            } else {
                let evaluation = evaluate(&exp, &dist, &grid);
                written.push(write_atomic(out, "evaluation.csv", &evaluation_csv(&evaluation)?)?);
                let report = Report {
                    classification: Some(exp.regime.clone()),
                    expansion: Some(exp),
                    evaluation: Some(evaluation),
                    comparison: Some(table),
                    config,
                };
                written.push(write_atomic(out, "report.json", &to_json(&report)?)?);
            }
        }
    }
    Ok(written)
}
