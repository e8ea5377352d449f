//! Regime classification and asymptotic expansions of `P(Σ c_i X_i > t)`.
//!
//! Three regimes are distinguished by the growth of the hazard rate `h`
//! against `t^{-1} log t`:
//!
//! * CaseC, `h ≫ t^{-1} log t`: only the maximal weights contribute, each
//!   through a full Laplace character of its residual sum.
//! * CaseB, `h ~ λ t^{-1} log t`: every weight with `|c| >= c_(1) e^{-k/λ}`
//!   contributes, with character order reduced by `⌊λ log(|c| / c_(1))⌋`.
//! * CaseA, `h = o(t^{-1} log t)`: a plain sum of scaled tails down to the
//!   `m`-th distinct level.

use std::cmp::Ordering;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distribution::TailDistribution;
use crate::error::{Error, Result};
use crate::hazard::{
    default_grid, survival_polynomial, HazardModel, HazardMonomial, MetadataFlag, RvMetadata,
};
use crate::laplace::{character_from_moments, residual_moments};
use crate::weights::{SignMode, WeightSequence, LEVEL_TOLERANCE};

/// Relative size below which a total counts as cancelled.
pub const CANCELLATION_RATIO: f64 = 0.01;

/// Tolerance when comparing regular-variation orders.
pub const ORDER_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "case")]
pub enum Regime {
    CaseA,
    CaseB { lambda: f64 },
    CaseC,
}

impl Regime {
    pub fn name(&self) -> &'static str {
        match self {
            Regime::CaseA => "CaseA",
            Regime::CaseB { .. } => "CaseB",
            Regime::CaseC => "CaseC",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    /// Declared metadata only; the numeric check disagreed or was inconclusive.
    Declared,
    /// Declared metadata agreed with the numeric diagnostics.
    NumericallyCorroborated,
    /// Forced by the caller.
    Override,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegimeClass {
    pub regime: Regime,
    pub provenance: Provenance,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub flags: Vec<MetadataFlag>,
}

/// Regime of a tail model from its declared metadata, checked numerically.
pub fn classify(model: &HazardModel) -> Result<RegimeClass> {
    let meta = model.metadata();
    meta.validate()?;
    let report = model.validate_metadata(&default_grid(model.t0()))?;
    let regime = if meta.rv_index > -1.0 || meta.log_exponent > 1.0 {
        Regime::CaseC
    } else if meta.log_exponent == 1.0 {
        match meta.lambda_coeff {
            Some(lambda) => Regime::CaseB { lambda },
            None => {
                return Err(Error::OutOfScope(
                    "h(t) ~ λ t^-1 log t needs a declared lambda".into(),
                ))
            }
        }
    } else {
        if report.case_a_bounded == Some(false) {
            let slope = report
                .flags
                .iter()
                .find_map(|f| match f {
                    MetadataFlag::CaseAFunctionalGrowing { slope } => Some(*slope),
                    _ => None,
                })
                .unwrap_or(f64::NAN);
            return Err(Error::CaseAConditionViolated(format!(
                "log-log slope {slope:.3} of t h(t)^2 / h(1/h(t)) on the diagnostic grid"
            )));
        }
        Regime::CaseA
    };
    let consistent = match regime {
        Regime::CaseC => report.case_c_compatible,
        Regime::CaseB { .. } => true,
        Regime::CaseA => report.case_a_bounded == Some(true),
    };
    let provenance = if report.agrees() && consistent {
        Provenance::NumericallyCorroborated
    } else {
        Provenance::Declared
    };
    Ok(RegimeClass {
        regime,
        provenance,
        flags: report.flags,
    })
}

/// A-priori size of a term relative to `P(c_(1) X > t)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TermOrder {
    /// Tails on distinct levels, rapidly varying apart; rank 1 dominates.
    Level { rank: usize },
    /// Regularly varying factor `t^index (log t)^log_power`.
    Power { index: f64, log_power: f64 },
}

impl TermOrder {
    /// `Greater` when `self` dominates `other`.
    pub fn dominance(&self, other: &Self) -> Ordering {
        match (self, other) {
            (TermOrder::Level { rank: a }, TermOrder::Level { rank: b }) => b.cmp(a),
            (
                TermOrder::Power {
                    index: i1,
                    log_power: l1,
                },
                TermOrder::Power {
                    index: i2,
                    log_power: l2,
                },
            ) => {
                if (i1 - i2).abs() > ORDER_TOLERANCE {
                    i1.total_cmp(i2)
                } else if (l1 - l2).abs() > ORDER_TOLERANCE {
                    l1.total_cmp(l2)
                } else {
                    Ordering::Equal
                }
            }
            (TermOrder::Level { .. }, TermOrder::Power { .. }) => Ordering::Greater,
            (TermOrder::Power { .. }, TermOrder::Level { .. }) => Ordering::Less,
        }
    }

    pub fn comparable(&self, other: &Self) -> bool {
        self.dominance(other) == Ordering::Equal
    }
}

/// `coefficient · D^j P(scale · X > t)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpansionTerm {
    pub scale: f64,
    pub derivative_index: usize,
    pub coefficient: f64,
    /// 1-based rank of `|scale|` among the distinct levels.
    pub source_level: usize,
    /// Order of the Laplace character the term comes from.
    pub operator_order: usize,
    /// Weight indices merged into this term.
    pub entries: Vec<i64>,
    pub order: TermOrder,
}

impl ExpansionTerm {
    pub fn label(&self) -> String {
        format!("c={},j={}", self.scale, self.derivative_index)
    }

    pub fn value(&self, dist: &TailDistribution, t: f64) -> Result<f64> {
        Ok(self.coefficient * dist.scaled_survival_derivative(self.scale, self.derivative_index, t)?)
    }
}

/// The benchmark inside the remainder `o(·)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RemainderScale {
    /// `h_c(t)^power P(cX > t)` with `h_c` the hazard of `cX`.
    HazardPower { power: usize, scale: f64 },
    /// `P(cX > t)` for the `level`-th distinct magnitude `c`.
    ScaledTail { scale: f64, level: usize },
}

impl RemainderScale {
    pub fn value(&self, dist: &TailDistribution, t: f64) -> Result<f64> {
        match *self {
            RemainderScale::HazardPower { power, scale } => {
                let (model, s) = dist.scaled_model(scale.abs(), t)?;
                let h = model.hazard(s)? / scale.abs();
                Ok(h.powi(power as i32) * model.survival(s)?)
            }
            RemainderScale::ScaledTail { scale, .. } => {
                let (model, s) = dist.scaled_model(scale.abs(), t)?;
                model.survival(s)
            }
        }
    }

    pub fn label(&self) -> String {
        match self {
            RemainderScale::HazardPower { power, scale } => {
                format!("o(h^{power} M_{scale} F)")
            }
            RemainderScale::ScaledTail { scale, .. } => format!("o(M_{scale} F)"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailExpansion {
    pub regime: RegimeClass,
    pub order_request: usize,
    pub metadata: RvMetadata,
    pub terms: Vec<ExpansionTerm>,
    pub remainder: RemainderScale,
    pub remainder_order: TermOrder,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

fn check_standard_conditions(dist: &TailDistribution, seq: &WeightSequence) -> Result<()> {
    if seq.sign_mode() == SignMode::Balanced && !dist.is_two_sided() {
        return Err(Error::InvalidArgument(
            "balanced weights need a two-sided, tail-balanced law".into(),
        ));
    }
    Ok(())
}

fn check_smoothness(dist: &TailDistribution, scale: f64, order: usize) -> Result<()> {
    let model = if scale > 0.0 {
        dist.upper()
    } else {
        dist.lower().ok_or(Error::UnsupportedSign(scale))?
    };
    if order > model.smooth_order() {
        return Err(Error::InsufficientSmoothness {
            requested: order,
            available: model.smooth_order(),
        });
    }
    Ok(())
}

fn same_magnitude(a: f64, b: f64) -> bool {
    (a.abs() - b.abs()).abs() <= LEVEL_TOLERANCE * a.abs().max(b.abs())
}

/// 1-based level ranks of the given magnitudes among `entries`.
fn level_rank(entries: &[(i64, f64)], magnitude: f64) -> usize {
    let mut mags: Vec<f64> = entries.iter().map(|e| e.1.abs()).collect();
    mags.sort_by(|a, b| b.total_cmp(a));
    mags.dedup_by(|a, b| same_magnitude(*a, *b));
    mags.iter()
        .position(|&m| same_magnitude(m, magnitude))
        .map_or(mags.len() + 1, |p| p + 1)
}

/// Merge terms sharing `(scale, derivative_index)` and sort by dominance.
fn merge_terms(mut terms: Vec<ExpansionTerm>) -> Vec<ExpansionTerm> {
    terms.sort_by(|a, b| {
        b.scale
            .total_cmp(&a.scale)
            .then(a.derivative_index.cmp(&b.derivative_index))
    });
    let mut merged: Vec<ExpansionTerm> = Vec::new();
    for term in terms {
        match merged.last_mut() {
            Some(last)
                if last.scale == term.scale && last.derivative_index == term.derivative_index =>
            {
                last.coefficient += term.coefficient;
                last.entries.extend(term.entries);
                last.operator_order = last.operator_order.max(term.operator_order);
            }
            _ => merged.push(term),
        }
    }
    merged.retain(|t| t.coefficient != 0.0 || t.derivative_index == 0);
    merged.sort_by(|a, b| {
        b.order
            .dominance(&a.order)
            .then(b.scale.total_cmp(&a.scale))
            .then(a.derivative_index.cmp(&b.derivative_index))
    });
    merged
}

/// Laplace-character terms of one entry, using its residual moments.
#[allow(clippy::too_many_arguments)]
fn character_terms(
    dist: &TailDistribution,
    seq: &WeightSequence,
    index: i64,
    scale: f64,
    order: usize,
    rank: usize,
    order_of: impl Fn(usize) -> TermOrder,
) -> Result<Vec<ExpansionTerm>> {
    check_smoothness(dist, scale, order)?;
    let moments = residual_moments(dist, seq, index, order)?;
    let ch = character_from_moments(&moments, order)?;
    Ok(ch
        .coeffs()
        .iter()
        .enumerate()
        .map(|(j, &a)| ExpansionTerm {
            scale,
            derivative_index: j,
            coefficient: a,
            source_level: rank,
            operator_order: order,
            entries: vec![index],
            order: order_of(j),
        })
        .collect())
}

fn regime_for(
    dist: &TailDistribution,
    wanted: fn(&Regime) -> bool,
    fallback: Regime,
) -> Result<RegimeClass> {
    match classify(dist.upper()) {
        Ok(class) if wanted(&class.regime) => Ok(class),
        _ => Ok(RegimeClass {
            regime: fallback,
            provenance: Provenance::Override,
            flags: Vec::new(),
        }),
    }
}

/// Expansion for `h ≫ t^{-1} log t`, to order `m`.
pub fn expand_case_c(
    dist: &TailDistribution,
    seq: &WeightSequence,
    m: usize,
) -> Result<TailExpansion> {
    check_standard_conditions(dist, seq)?;
    let regime = regime_for(dist, |r| matches!(r, Regime::CaseC), Regime::CaseC)?;
    build_case_c(dist, seq, m, regime)
}

fn build_case_c(
    dist: &TailDistribution,
    seq: &WeightSequence,
    m: usize,
    regime: RegimeClass,
) -> Result<TailExpansion> {
    let meta = dist.upper().metadata();
    let c1 = seq.top_magnitude();
    let order_of = |j: usize| TermOrder::Power {
        index: j as f64 * meta.rv_index,
        log_power: j as f64 * meta.log_exponent,
    };
    let mut terms = Vec::new();
    for (i, c) in seq.maximal_entries() {
        terms.extend(character_terms(dist, seq, i, c, m, 1, order_of)?);
    }
    Ok(TailExpansion {
        regime,
        order_request: m,
        metadata: meta,
        terms: merge_terms(terms),
        remainder: RemainderScale::HazardPower {
            power: m,
            scale: c1,
        },
        remainder_order: order_of(m),
        notes: Vec::new(),
    })
}

/// `⌊x⌋` with `x` first snapped to a nearby integer.
fn snapped(x: f64) -> f64 {
    let r = x.round();
    if (x - r).abs() <= 1e-12 * x.abs().max(1.0) {
        r
    } else {
        x
    }
}

/// Expansion for `h ~ λ t^{-1} log t`, to order `k`.
pub fn expand_case_b(
    dist: &TailDistribution,
    seq: &WeightSequence,
    k: usize,
) -> Result<TailExpansion> {
    check_standard_conditions(dist, seq)?;
    let meta = dist.upper().metadata();
    let lambda = meta.lambda_coeff.ok_or_else(|| {
        Error::OutOfScope("h(t) ~ λ t^-1 log t needs a declared lambda".into())
    })?;
    let regime = regime_for(
        dist,
        |r| matches!(r, Regime::CaseB { .. }),
        Regime::CaseB { lambda },
    )?;
    build_case_b(dist, seq, k, lambda, regime)
}

fn build_case_b(
    dist: &TailDistribution,
    seq: &WeightSequence,
    k: usize,
    lambda: f64,
    regime: RegimeClass,
) -> Result<TailExpansion> {
    let meta = dist.upper().metadata();
    let c1 = seq.top_magnitude();
    let candidates = seq.entries_above(c1 * (-(k as f64) / lambda).exp());
    let mut terms = Vec::new();
    for &(i, c) in &candidates {
        let x = snapped(lambda * (c.abs() / c1).ln());
        if k as f64 + x < 0.0 {
            continue;
        }
        let order = (k as f64 + x.floor()) as usize;
        let base = lambda * (c.abs() / c1).ln();
        let order_of = |j: usize| TermOrder::Power {
            index: base - j as f64,
            log_power: j as f64,
        };
        let rank = level_rank(&candidates, c);
        terms.extend(character_terms(dist, seq, i, c, order, rank, order_of)?);
    }
    Ok(TailExpansion {
        regime,
        order_request: k,
        metadata: meta,
        terms: merge_terms(terms),
        remainder: RemainderScale::HazardPower {
            power: k,
            scale: c1,
        },
        remainder_order: TermOrder::Power {
            index: -(k as f64),
            log_power: k as f64,
        },
        notes: Vec::new(),
    })
}

/// Expansion for `h = o(t^{-1} log t)` down to the `m`-th level.
pub fn expand_case_a(
    dist: &TailDistribution,
    seq: &WeightSequence,
    m: usize,
) -> Result<TailExpansion> {
    check_standard_conditions(dist, seq)?;
    let regime = regime_for(dist, |r| matches!(r, Regime::CaseA), Regime::CaseA)?;
    build_case_a(dist, seq, m, regime)
}

fn build_case_a(
    dist: &TailDistribution,
    seq: &WeightSequence,
    m: usize,
    regime: RegimeClass,
) -> Result<TailExpansion> {
    if m == 0 {
        return Err(Error::InvalidArgument("level count m must be at least 1".into()));
    }
    let levels = seq.level_sequence(m)?;
    let mut notes = Vec::new();
    if levels.len() < m {
        notes.push(format!(
            "only {} distinct levels available, {m} requested; using all",
            levels.len()
        ));
    }
    let last = levels.last().ok_or(Error::EmptySequence)?;
    let entries = seq.entries_above(last.magnitude);
    let terms = entries
        .iter()
        .map(|&(i, c)| {
            check_smoothness(dist, c, 0)?;
            let rank = level_rank(&entries, c);
            Ok(ExpansionTerm {
                scale: c,
                derivative_index: 0,
                coefficient: 1.0,
                source_level: rank,
                operator_order: 0,
                entries: vec![i],
                order: TermOrder::Level { rank },
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(TailExpansion {
        regime,
        order_request: m,
        metadata: dist.upper().metadata(),
        terms: merge_terms(terms),
        remainder: RemainderScale::ScaledTail {
            scale: last.magnitude,
            level: levels.len(),
        },
        remainder_order: TermOrder::Level { rank: levels.len() },
        notes,
    })
}

/// Classify the upper tail and expand in the matching regime, or in
/// `regime_override` when given.
pub fn expand(
    dist: &TailDistribution,
    seq: &WeightSequence,
    order: usize,
    regime_override: Option<Regime>,
) -> Result<TailExpansion> {
    check_standard_conditions(dist, seq)?;
    let class = match regime_override {
        Some(regime) => RegimeClass {
            regime,
            provenance: Provenance::Override,
            flags: Vec::new(),
        },
        None => classify(dist.upper())?,
    };
    match class.regime {
        Regime::CaseA => build_case_a(dist, seq, order, class),
        Regime::CaseB { lambda } => build_case_b(dist, seq, order, lambda, class),
        Regime::CaseC => build_case_c(dist, seq, order, class),
    }
}

/// Groups of consecutive terms whose orders are comparable.
fn tie_groups<T>(items: &[T], order: impl Fn(&T) -> TermOrder) -> Vec<std::ops::Range<usize>> {
    let mut groups = Vec::new();
    let mut start = 0;
    for i in 1..=items.len() {
        if i == items.len() || !order(&items[i]).comparable(&order(&items[start])) {
            groups.push(start..i);
            start = i;
        }
    }
    groups
}

/// The dominant terms of an expansion: whole tie groups until at least `keep`.
pub fn leading_terms(exp: &TailExpansion, keep: usize) -> Vec<ExpansionTerm> {
    let mut out = Vec::new();
    for g in tie_groups(&exp.terms, |t| t.order) {
        if out.len() >= keep {
            break;
        }
        out.extend_from_slice(&exp.terms[g]);
    }
    out
}

/// `coefficient · h_c^{e0} (h_c')^{e1} ... P(cX > t)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HazardScaleTerm {
    pub scale: f64,
    pub monomial: HazardMonomial,
    pub label: String,
    pub coefficient: f64,
    pub order: TermOrder,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HazardScaleExpansion {
    /// Significant terms, most dominant first.
    pub kept: Vec<HazardScaleTerm>,
    /// Terms beyond `keep`, or negligible against the original remainder.
    pub dropped: Vec<HazardScaleTerm>,
    /// Labels of mutually comparable terms, never broken silently.
    pub ties: Vec<Vec<String>>,
    /// Order inside the new `o(·)`.
    pub remainder_order: TermOrder,
}

/// Rewrite a CaseB/CaseC expansion in the monomials `h^{e0} (h')^{e1} ... F`.
pub fn rewrite_in_hazard_scale(exp: &TailExpansion, keep: usize) -> Result<HazardScaleExpansion> {
    if matches!(exp.regime.regime, Regime::CaseA) {
        return Err(Error::OutOfScope(
            "hazard-scale rewriting applies to CaseB and CaseC expansions".into(),
        ));
    }
    let meta = exp.metadata;
    let mut collected: Vec<HazardScaleTerm> = Vec::new();
    for term in &exp.terms {
        let (base_index, base_log) = match term.order {
            TermOrder::Power { index, log_power } => (
                index - term.derivative_index as f64 * meta.rv_index,
                log_power - term.derivative_index as f64 * meta.log_exponent,
            ),
            TermOrder::Level { .. } => (0.0, 0.0),
        };
        for (mono, c) in survival_polynomial(term.derivative_index).terms() {
            let coefficient = term.coefficient * c as f64;
            let order = TermOrder::Power {
                index: base_index + mono.rv_index(meta.rv_index),
                log_power: base_log + mono.degree() as f64 * meta.log_exponent,
            };
            match collected
                .iter_mut()
                .find(|t| t.scale == term.scale && &t.monomial == mono)
            {
                Some(t) => t.coefficient += coefficient,
                None => collected.push(HazardScaleTerm {
                    scale: term.scale,
                    label: monomial_label(mono, term.scale),
                    monomial: mono.clone(),
                    coefficient,
                    order,
                }),
            }
        }
    }
    collected.retain(|t| t.coefficient != 0.0);
    collected.sort_by(|a, b| {
        b.order
            .dominance(&a.order)
            .then(b.scale.total_cmp(&a.scale))
            .then(a.monomial.cmp(&b.monomial))
    });
    let (significant, mut dropped): (Vec<_>, Vec<_>) = collected
        .into_iter()
        .partition(|t| t.order.dominance(&exp.remainder_order) != Ordering::Less);

    let groups = tie_groups(&significant, |t| t.order);
    let ties = groups
        .iter()
        .filter(|g| g.len() > 1)
        .map(|g| significant[g.clone()].iter().map(|t| t.label.clone()).collect())
        .collect();
    let mut kept = Vec::new();
    let mut rest = Vec::new();
    for g in groups {
        if kept.len() < keep {
            kept.extend_from_slice(&significant[g]);
        } else {
            rest.extend_from_slice(&significant[g]);
        }
    }
    let remainder_order = if rest.is_empty() {
        exp.remainder_order
    } else {
        kept.last().map_or(exp.remainder_order, |t| t.order)
    };
    rest.append(&mut dropped);
    Ok(HazardScaleExpansion {
        kept,
        dropped: rest,
        ties,
        remainder_order,
    })
}

fn monomial_label(mono: &HazardMonomial, scale: f64) -> String {
    let tail = if scale == 1.0 {
        "F".to_string()
    } else {
        format!("M_{scale} F")
    };
    match mono.label().as_str() {
        "1" => tail,
        m => format!("{m} {tail}"),
    }
}

/// One grid point of [`evaluate`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationRow {
    pub t: f64,
    pub total: Option<f64>,
    pub terms: Vec<f64>,
    pub benchmark: Option<f64>,
    pub cancellation: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationTable {
    pub term_labels: Vec<String>,
    pub rows: Vec<EvaluationRow>,
}

/// Cancellation test on the signed pieces of all terms.
///
/// Fires when the total is small against the largest term, or when the
/// pieces other than the largest one sum to far less than their own size.
pub fn cancellation(total: f64, terms: &[f64], pieces: &[f64]) -> bool {
    let max_term = terms.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if total.abs() < CANCELLATION_RATIO * max_term {
        return true;
    }
    let Some(lead) = pieces
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
        .map(|(i, _)| i)
    else {
        return false;
    };
    let others: Vec<f64> = pieces
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != lead)
        .map(|(_, &v)| v)
        .collect();
    let max_other = others.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    others.len() >= 2 && max_other > 0.0 && others.iter().sum::<f64>().abs() < CANCELLATION_RATIO * max_other
}

fn evaluate_point(exp: &TailExpansion, dist: &TailDistribution, t: f64) -> Result<EvaluationRow> {
    let mut values = Vec::with_capacity(exp.terms.len());
    let mut pieces = Vec::new();
    for term in &exp.terms {
        values.push(term.value(dist, t)?);
        let parts =
            dist.scaled_survival_derivative_components(term.scale, term.derivative_index, t)?;
        pieces.extend(parts.into_iter().map(|p| term.coefficient * p));
    }
    let total: f64 = values.iter().sum();
    Ok(EvaluationRow {
        t,
        total: Some(total),
        benchmark: Some(exp.remainder.value(dist, t)?),
        cancellation: cancellation(total, &values, &pieces),
        terms: values,
        error: None,
    })
}

/// Evaluate an expansion on a grid; failures are reported per point.
pub fn evaluate(exp: &TailExpansion, dist: &TailDistribution, grid: &[f64]) -> EvaluationTable {
    let rows = grid
        .par_iter()
        .map(|&t| {
            evaluate_point(exp, dist, t).unwrap_or_else(|e| EvaluationRow {
                t,
                total: None,
                terms: Vec::new(),
                benchmark: None,
                cancellation: false,
                error: Some(e.to_string()),
            })
        })
        .collect();
    EvaluationTable {
        term_labels: exp.terms.iter().map(ExpansionTerm::label).collect(),
        rows,
    }
}

/// Coefficients of the order-zero terms at `±c_(1)` against `(ν₊, ν₋)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LeadingOrderCheck {
    pub plus_coefficient: f64,
    pub minus_coefficient: f64,
    pub nu_plus: usize,
    pub nu_minus: usize,
}

impl LeadingOrderCheck {
    pub fn consistent(&self) -> bool {
        self.plus_coefficient == self.nu_plus as f64
            && self.minus_coefficient == self.nu_minus as f64
    }
}

/// First-order check: `P(X > t) ~ ν₊ P(c_(1) X > t) + ν₋ P(-c_(1) X > t)`.
pub fn leading_order_check(exp: &TailExpansion, seq: &WeightSequence) -> Result<LeadingOrderCheck> {
    let top = seq.level_sequence(1)?[0];
    let coeff = |sign: f64| {
        exp.terms
            .iter()
            .filter(|t| {
                t.derivative_index == 0
                    && t.scale.signum() == sign
                    && same_magnitude(t.scale, top.magnitude)
            })
            .map(|t| t.coefficient)
            .sum::<f64>()
    };
    Ok(LeadingOrderCheck {
        plus_coefficient: coeff(1.0),
        minus_coefficient: coeff(-1.0),
        nu_plus: top.nu_plus,
        nu_minus: top.nu_minus,
    })
}
