//! Independent estimators of `P(Σ c_i X_i > t)` for validating expansions.

mod compare;
mod convolution;
mod monte_carlo;

use serde::{Deserialize, Serialize};

pub use compare::{compare, Budget, ComparisonRow, ComparisonTable};
pub use convolution::{
    convolve_direct, convolve_pair, convolve_quadrature, quadrature_oracle, MAX_FACTORS,
};
pub use monte_carlo::{conditional_mc, plain_mc, truncation_bias_bound, McOptions, Scheme};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OracleMethod {
    ConditionalMc,
    PlainMc,
    Quadrature,
}

/// One oracle value with its error accounting.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleEstimate {
    pub t: f64,
    pub p_hat: f64,
    /// Sample standard deviation over `sqrt(n)`; zero for quadrature.
    pub std_err: f64,
    /// Estimated absolute quadrature error; zero for Monte Carlo.
    pub quadrature_error: f64,
    pub n_samples: u64,
    pub truncation_n: i64,
    pub truncation_bias_bound: f64,
    pub seed: u64,
    pub method: OracleMethod,
}
