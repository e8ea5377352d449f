//! Higher-order tail expansions for weighted sums of light-subexponential
//! random variables.
//!
//! For `X = Σ c_i X_i` with i.i.d. `X_i` whose tail `S(t)` has a hazard rate
//! regularly varying with index in `[-1, 0)`, the crate builds asymptotic
//! expansions of `P(X > t)` in terms of scaled tail derivatives, moments of
//! the residual sums and a truncated Laplace-transform calculus. Independent
//! Monte Carlo and quadrature oracles are provided for validation.

pub mod distribution;
pub mod error;
pub mod expansion;
pub mod hazard;
pub mod laplace;
pub mod oracle;
pub mod powerlog;
pub mod quad;
pub mod weights;

pub use distribution::{Law, PointMass, Scaled, TailDistribution};
pub use error::{Error, Result};
pub use expansion::{
    classify, evaluate, expand, expand_case_a, expand_case_b, expand_case_c, leading_order_check,
    leading_terms, rewrite_in_hazard_scale, EvaluationRow, EvaluationTable, ExpansionTerm,
    HazardScaleExpansion, Provenance, Regime, RegimeClass, RemainderScale, TailExpansion, TermOrder,
};
pub use hazard::{
    survival_polynomial, Family, HazardModel, HazardMonomial, HazardPolynomial, MetadataFlag,
    MetadataReport, RvMetadata, SurvivalComponent, TailCurve,
};
pub use laplace::{
    apply, character_from_moments, compose, convolve_moments, residual_moments, LaplaceCharacter,
    MomentVector,
};
pub use oracle::{
    compare, conditional_mc, convolve_direct, convolve_pair, convolve_quadrature, plain_mc,
    quadrature_oracle, truncation_bias_bound, Budget, ComparisonRow, ComparisonTable, McOptions,
    OracleEstimate, OracleMethod, Scheme,
};
pub use powerlog::{PowerLog, PowerLogTerm};
pub use weights::{GeometricTail, Level, Precedence, SignMode, WeightSequence};
