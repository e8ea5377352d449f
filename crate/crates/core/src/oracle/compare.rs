//! Expansion against oracle, point by point.

use serde::{Deserialize, Serialize};

use super::convolution::quadrature_oracle;
use super::monte_carlo::{conditional_mc, plain_mc, McOptions, Scheme};
use super::{OracleEstimate, OracleMethod};
use crate::distribution::TailDistribution;
use crate::error::Result;
use crate::expansion::{evaluate, EvaluationRow, TailExpansion};
use crate::weights::WeightSequence;

/// Oracle method and sampling budget for [`compare`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Budget {
    pub method: OracleMethod,
    pub n: u64,
    pub seed: u64,
    pub eps_trunc: f64,
    pub scheme: Scheme,
    /// Relative tolerance for the quadrature oracle.
    pub rel_tol: f64,
    /// Multiple of the remainder benchmark tolerated as deviation.
    pub slack: f64,
}

impl Default for Budget {
    fn default() -> Self {
        Self {
            method: OracleMethod::ConditionalMc,
            n: 1_000_000,
            seed: 1,
            eps_trunc: 1e-12,
            scheme: Scheme::LargestSummand,
            rel_tol: 1e-8,
            slack: 10.0,
        }
    }
}

impl Budget {
    /// Run the configured oracle at `t`.
    pub fn estimate(&self, dist: &TailDistribution, seq: &WeightSequence, t: f64) -> Result<OracleEstimate> {
        match self.method {
            OracleMethod::ConditionalMc => conditional_mc(
                dist,
                seq,
                t,
                self.n,
                self.seed,
                McOptions {
                    eps_trunc: self.eps_trunc,
                    scheme: self.scheme,
                },
            ),
            OracleMethod::PlainMc => plain_mc(dist, seq, t, self.n, self.seed, self.eps_trunc),
            OracleMethod::Quadrature => quadrature_oracle(dist, seq, t, self.rel_tol),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub t: f64,
    pub oracle: Option<OracleEstimate>,
    pub expansion_total: Option<f64>,
    pub terms: Vec<f64>,
    pub benchmark: Option<f64>,
    /// `expansion_total - p_hat`.
    pub deviation: Option<f64>,
    pub relative_deviation: Option<f64>,
    pub deviation_over_benchmark: Option<f64>,
    pub pass: bool,
    pub cancellation: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub errors: Vec<String>,
}

impl ComparisonRow {
    /// Allowed `|deviation|` for this row.
    pub fn band(&self, slack: f64) -> Option<f64> {
        let o = self.oracle.as_ref()?;
        let noise = 3.0 * o.std_err + o.truncation_bias_bound + o.quadrature_error;
        Some(noise.max(self.benchmark.unwrap_or(0.0) * slack))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonTable {
    pub term_labels: Vec<String>,
    pub budget: Budget,
    pub rows: Vec<ComparisonRow>,
}

impl ComparisonTable {
    pub fn all_pass(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }
}

/// Evaluate `exp` and the budgeted oracle on every grid point.
///
/// Failures are recorded per row; a row passes only when both sides
/// produced a value and `|deviation| <= max(3σ + bias + quad_err, slack · benchmark)`.
pub fn compare(
    exp: &TailExpansion,
    dist: &TailDistribution,
    seq: &WeightSequence,
    grid: &[f64],
    budget: &Budget,
) -> ComparisonTable {
    let table = evaluate(exp, dist, grid);
    let rows = table
        .rows
        .into_iter()
        .map(|row| compare_row(row, dist, seq, budget))
        .collect();
    ComparisonTable {
        term_labels: table.term_labels,
        budget: *budget,
        rows,
    }
}

fn compare_row(row: EvaluationRow, dist: &TailDistribution, seq: &WeightSequence, budget: &Budget) -> ComparisonRow {
    let mut errors: Vec<String> = row.error.into_iter().collect();
    let oracle = budget
        .estimate(dist, seq, row.t)
        .map_err(|e| errors.push(format!("oracle: {e}")))
        .ok();
    let deviation = match (row.total, &oracle) {
        (Some(total), Some(o)) => Some(total - o.p_hat),
        _ => None,
    };
    let relative_deviation = deviation
        .zip(oracle.as_ref())
        .and_then(|(d, o)| (o.p_hat != 0.0).then(|| d / o.p_hat));
    let deviation_over_benchmark = deviation
        .zip(row.benchmark)
        .and_then(|(d, b)| (b != 0.0).then(|| d / b));
    let mut out = ComparisonRow {
        t: row.t,
        oracle,
        expansion_total: row.total,
        terms: row.terms,
        benchmark: row.benchmark,
        deviation,
        relative_deviation,
        deviation_over_benchmark,
        pass: false,
        cancellation: row.cancellation,
        errors,
    };
    out.pass = match (out.deviation, out.band(budget.slack)) {
        (Some(d), Some(band)) => d.abs() <= band,
        _ => false,
    };
    out
}
