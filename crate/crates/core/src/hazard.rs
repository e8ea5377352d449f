//! Light-subexponential tails represented through their hazard rate.
//!
//! A tail is `S(t) = S(t0) exp(-∫_{t0}^t h)` for `t >= t0`, where `h` is
//! regularly varying with index in `[-1, 0)`. Derivatives of `S` are
//! computed exactly as `P_k(h, h', ..., h^{(k-1)}) S` with the hazard
//! polynomials `P_0 = 1`, `P_{k+1} = P_k' - h P_k`.

use std::collections::BTreeMap;
use std::sync::{Arc, OnceLock};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::powerlog::{PowerLog, PowerLogTerm};
use crate::quad::{integrate, QuadOptions};

/// Highest derivative order any model may declare.
pub const MAX_SMOOTH_ORDER: usize = 20;

/// Default smoothness order of the built-in families.
pub const BUILTIN_SMOOTH_ORDER: usize = 16;

/// Exponent vector of a product `h^{e0} (h')^{e1} (h'')^{e2} ...`.
/// Trailing zeros are always trimmed, so equal monomials compare equal.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct HazardMonomial(pub Vec<u32>);

impl HazardMonomial {
    pub fn unit() -> Self {
        Self(Vec::new())
    }

    fn trimmed(mut exps: Vec<u32>) -> Self {
        while exps.last() == Some(&0) {
            exps.pop();
        }
        Self(exps)
    }

    /// Number of hazard factors.
    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    /// Total differentiation order carried, `Σ e_i (i + 1)`.
    pub fn weight(&self) -> u32 {
        self.0
            .iter()
            .enumerate()
            .map(|(i, e)| e * (i as u32 + 1))
            .sum()
    }

    /// Index of regular variation when `h` has index `rv_index`.
    pub fn rv_index(&self, rv_index: f64) -> f64 {
        self.0
            .iter()
            .enumerate()
            .map(|(i, &e)| e as f64 * (rv_index - i as f64))
            .sum()
    }

    pub fn eval(&self, hazard_derivs: &[f64]) -> f64 {
        self.0
            .iter()
            .enumerate()
            .map(|(i, &e)| hazard_derivs[i].powi(e as i32))
            .product()
    }

    /// Human-readable form such as `h^2 h'`.
    pub fn label(&self) -> String {
        let mut parts = Vec::new();
        for (i, &e) in self.0.iter().enumerate() {
            if e == 0 {
                continue;
            }
            let base = format!("h{}", "'".repeat(i));
            parts.push(if e == 1 { base } else { format!("{base}^{e}") });
        }
        if parts.is_empty() {
            "1".to_string()
        } else {
            parts.join(" ")
        }
    }
}

/// Integer polynomial in `h, h', h'', ...`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct HazardPolynomial {
    terms: BTreeMap<HazardMonomial, i64>,
}

impl HazardPolynomial {
    pub fn one() -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(HazardMonomial::unit(), 1);
        Self { terms }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&HazardMonomial, i64)> {
        self.terms.iter().map(|(m, &c)| (m, c))
    }

    fn add(&mut self, mono: HazardMonomial, coeff: i64) {
        let entry = self.terms.entry(mono).or_insert(0);
        *entry += coeff;
        // zero entries are pruned by the caller after a full pass
    }

    fn prune(&mut self) {
        self.terms.retain(|_, c| *c != 0);
    }

    /// Total derivative, treating `h^{(i)}` as a function with derivative `h^{(i+1)}`.
    pub fn derivative(&self) -> Self {
        let mut out = Self::default();
        for (mono, &coeff) in &self.terms {
            for (i, &e) in mono.0.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                let mut exps = mono.0.clone();
                exps[i] -= 1;
                if exps.len() <= i + 1 {
                    exps.resize(i + 2, 0);
                }
                exps[i + 1] += 1;
                out.add(HazardMonomial::trimmed(exps), coeff * e as i64);
            }
        }
        out.prune();
        out
    }

    /// Product with `h`.
    pub fn times_hazard(&self) -> Self {
        let mut out = Self::default();
        for (mono, &coeff) in &self.terms {
            let mut exps = mono.0.clone();
            if exps.is_empty() {
                exps.push(0);
            }
            exps[0] += 1;
            out.add(HazardMonomial(exps), coeff);
        }
        out
    }

    fn minus(mut self, other: &Self) -> Self {
        for (mono, &coeff) in &other.terms {
            self.add(mono.clone(), -coeff);
        }
        self.prune();
        self
    }

    /// Highest hazard-derivative order appearing.
    pub fn max_derivative(&self) -> Option<usize> {
        self.terms.keys().filter_map(|m| m.0.len().checked_sub(1)).max()
    }

    pub fn eval(&self, hazard_derivs: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(m, &c)| c as f64 * m.eval(hazard_derivs))
            .sum()
    }
}

/// `P_k` with `S^{(k)} = P_k(h, ..., h^{(k-1)}) S`, for `k <= MAX_SMOOTH_ORDER`.
pub fn survival_polynomial(k: usize) -> &'static HazardPolynomial {
    static TABLE: OnceLock<Vec<HazardPolynomial>> = OnceLock::new();
    let table = TABLE.get_or_init(|| {
        let mut polys = vec![HazardPolynomial::one()];
        for j in 0..MAX_SMOOTH_ORDER {
            let next = polys[j].derivative().minus(&polys[j].times_hazard());
            polys.push(next);
        }
        polys
    });
    &table[k]
}

/// Regular-variation metadata of a hazard rate `h(t) ≍ t^ρ (log t)^γ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RvMetadata {
    /// Index `ρ` of regular variation of `h`.
    pub rv_index: f64,
    /// Power `γ` of `log t` in `t h(t)` when `ρ = -1`.
    pub log_exponent: f64,
    /// `λ` in `h(t) ~ λ t^{-1} log t`, when that holds.
    pub lambda_coeff: Option<f64>,
}

impl RvMetadata {
    pub fn validate(&self) -> Result<()> {
        let RvMetadata {
            rv_index,
            log_exponent,
            lambda_coeff,
        } = *self;
        if !(rv_index >= -1.0 && rv_index < 0.0) {
            return Err(Error::OutOfScope(format!(
                "hazard index {rv_index} outside [-1, 0): need h regularly varying with h -> 0 and t h(t) -> inf"
            )));
        }
        if rv_index == -1.0 && !(log_exponent > 0.0) {
            return Err(Error::OutOfScope(format!(
                "hazard index -1 needs log exponent > 0 for t h(t) -> inf, got {log_exponent}"
            )));
        }
        if let Some(l) = lambda_coeff {
            if !(l > 0.0 && l.is_finite()) {
                return Err(Error::InvalidModel(format!("lambda must be positive, got {l}")));
            }
        }
        Ok(())
    }
}

/// Built-in tail families with global closed forms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum Family {
    /// `S(t) = exp(-t^a)` on `[0, ∞)`, `0 < a < 1`.
    Weibull { shape: f64 },
    /// `S(t) = exp(-(log t)^a)` on `[1, ∞)`, `a > 1`.
    #[serde(rename = "logweibull")]
    LogWeibull { shape: f64 },
    /// `S(t) = exp(-θ (log t)^2)` on `[1, ∞)`.
    #[serde(rename = "lognormal2")]
    LogNormal2 { theta: f64 },
}

impl Family {
    pub fn validate(&self) -> Result<()> {
        match *self {
            Family::Weibull { shape } if !(shape > 0.0 && shape < 1.0) => Err(Error::OutOfScope(
                format!("Weibull shape {shape} must lie in (0, 1) for a subexponential tail"),
            )),
            Family::LogWeibull { shape } if !(shape > 1.0 && shape.is_finite()) => Err(
                Error::OutOfScope(format!("log-Weibull shape {shape} must exceed 1")),
            ),
            Family::LogNormal2 { theta } if !(theta > 0.0 && theta.is_finite()) => Err(
                Error::InvalidModel(format!("theta {theta} must be positive")),
            ),
            _ => Ok(()),
        }
    }

    /// Cumulative hazard `Λ` with `S = exp(-Λ)` on the support.
    pub fn cumulative(&self) -> PowerLog {
        match *self {
            Family::Weibull { shape } => PowerLog::monomial(1.0, shape, 0.0),
            Family::LogWeibull { shape } => PowerLog::monomial(1.0, 0.0, shape),
            Family::LogNormal2 { theta } => PowerLog::monomial(theta, 0.0, 2.0),
        }
    }

    pub fn hazard(&self) -> PowerLog {
        self.cumulative().derivative()
    }

    /// Left end of the support.
    pub fn support_lower(&self) -> f64 {
        match self {
            Family::Weibull { .. } => 0.0,
            Family::LogWeibull { .. } | Family::LogNormal2 { .. } => 1.0,
        }
    }

    pub fn metadata(&self) -> RvMetadata {
        match *self {
            Family::Weibull { shape } => RvMetadata {
                rv_index: shape - 1.0,
                log_exponent: 0.0,
                lambda_coeff: None,
            },
            Family::LogWeibull { shape } => RvMetadata {
                rv_index: -1.0,
                log_exponent: shape - 1.0,
                lambda_coeff: (shape == 2.0).then_some(2.0),
            },
            Family::LogNormal2 { theta } => RvMetadata {
                rv_index: -1.0,
                log_exponent: 1.0,
                lambda_coeff: Some(2.0 * theta),
            },
        }
    }

    /// `log S(y)` for every real `y`.
    pub fn log_survival(&self, y: f64) -> f64 {
        if y <= self.support_lower() {
            return 0.0;
        }
        match *self {
            Family::Weibull { shape } => -y.powf(shape),
            Family::LogWeibull { shape } => -y.ln().powf(shape),
            Family::LogNormal2 { theta } => {
                let l = y.ln();
                -theta * l * l
            }
        }
    }

    /// `y` with `S(y) = v`, for `v` in `(0, 1]`.
    pub fn inverse_survival(&self, v: f64) -> f64 {
        let w = -v.ln();
        match *self {
            Family::Weibull { shape } => w.powf(1.0 / shape),
            Family::LogWeibull { shape } => w.powf(1.0 / shape).exp(),
            Family::LogNormal2 { theta } => (w / theta).sqrt().exp(),
        }
    }

    /// `y` with `1 - S(y) = u`, accurate for small `u`.
    pub fn quantile(&self, u: f64) -> f64 {
        let w = -(-u).ln_1p();
        match *self {
            Family::Weibull { shape } => w.powf(1.0 / shape),
            Family::LogWeibull { shape } => w.powf(1.0 / shape).exp(),
            Family::LogNormal2 { theta } => (w / theta).sqrt().exp(),
        }
    }
}

/// One term `weight · exp(-Λ(scale · t))` of a survival-defined tail.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurvivalComponent {
    pub weight: f64,
    #[serde(default = "one")]
    pub scale: f64,
    pub exponent: PowerLog,
}

fn one() -> f64 {
    1.0
}

/// How a tail is specified.
#[derive(Debug, Clone, PartialEq)]
pub enum TailCurve {
    /// Hazard rate given directly; `cumulative` is its antiderivative when known.
    Hazard {
        rate: PowerLog,
        cumulative: Option<PowerLog>,
    },
    /// Survival function given as a signed sum of exponentials.
    Survival { components: Vec<SurvivalComponent> },
}

#[derive(Debug)]
struct CurveData {
    curve: TailCurve,
    // derivative series of the hazard (Hazard) or of each component exponent (Survival)
    rate_derivs: Vec<PowerLog>,
    component_derivs: Vec<Vec<PowerLog>>,
}

/// Hazard-rate representation of one tail.
#[derive(Debug, Clone)]
pub struct HazardModel {
    data: Arc<CurveData>,
    t0: f64,
    log_sbar_t0: f64,
    // only used by survival-defined curves: log of the raw curve at t0
    curve_log_t0: f64,
    meta: RvMetadata,
    smooth_order: usize,
}

/// Default diagnostic grid used when no grid is supplied.
pub fn default_grid(t0: f64) -> Vec<f64> {
    let lo = (10.0 * t0).max(100.0).log10();
    let hi = 12.0f64.max(lo + 4.0);
    let n = 41;
    (0..n)
        .map(|i| 10f64.powf(lo + (hi - lo) * i as f64 / (n - 1) as f64))
        .collect()
}

impl HazardModel {
    /// Tail of a built-in family, anchored at `t0 > 1`.
    pub fn builtin(family: Family, t0: f64) -> Result<Self> {
        family.validate()?;
        let cumulative = family.cumulative();
        let rate = cumulative.derivative();
        let log_sbar_t0 = family.log_survival(t0);
        Self::build(
            TailCurve::Hazard {
                rate,
                cumulative: Some(cumulative),
            },
            t0,
            log_sbar_t0,
            family.metadata(),
            BUILTIN_SMOOTH_ORDER,
        )
    }

    /// Tail with hazard `rate`, survival value `sbar_t0` at `t0`.
    pub fn from_hazard(
        rate: PowerLog,
        t0: f64,
        sbar_t0: f64,
        meta: RvMetadata,
        smooth_order: usize,
    ) -> Result<Self> {
        if !(sbar_t0 > 0.0 && sbar_t0 <= 1.0) {
            return Err(Error::InvalidModel(format!(
                "survival at t0 must lie in (0, 1], got {sbar_t0}"
            )));
        }
        let cumulative = rate.antiderivative();
        Self::build(
            TailCurve::Hazard { rate, cumulative },
            t0,
            sbar_t0.ln(),
            meta,
            smooth_order,
        )
    }

    /// Tail `S(t) = Σ w_k exp(-Λ_k(s_k t))` for `t >= t0`.
    pub fn from_survival(
        components: Vec<SurvivalComponent>,
        t0: f64,
        meta: RvMetadata,
        smooth_order: usize,
    ) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::InvalidModel("no survival components".into()));
        }
        for c in &components {
            if !(c.scale > 0.0 && c.scale.is_finite()) || !c.weight.is_finite() {
                return Err(Error::InvalidModel(format!(
                    "component scale must be positive and weight finite: {c:?}"
                )));
            }
        }
        let curve = TailCurve::Survival { components };
        let mut model = Self::build(curve, t0, 0.0, meta, smooth_order)?;
        let raw = model.curve_log(t0);
        if !(raw.is_finite() && raw <= 1e-12) {
            return Err(Error::InvalidModel(format!(
                "survival components give S(t0) = {} outside (0, 1]",
                raw.exp()
            )));
        }
        model.curve_log_t0 = raw;
        model.log_sbar_t0 = raw.min(0.0);
        Ok(model)
    }

    fn build(
        curve: TailCurve,
        t0: f64,
        log_sbar_t0: f64,
        meta: RvMetadata,
        smooth_order: usize,
    ) -> Result<Self> {
        if !(t0 > 1.0 && t0.is_finite()) {
            return Err(Error::InvalidModel(format!("t0 must exceed 1, got {t0}")));
        }
        if smooth_order > MAX_SMOOTH_ORDER {
            return Err(Error::InvalidModel(format!(
                "smoothness order {smooth_order} exceeds supported maximum {MAX_SMOOTH_ORDER}"
            )));
        }
        meta.validate()?;
        let (rate_derivs, component_derivs) = match &curve {
            TailCurve::Hazard { rate, .. } => {
                if rate.is_empty() {
                    return Err(Error::InvalidModel("hazard rate has no terms".into()));
                }
                (rate.derivatives(smooth_order), Vec::new())
            }
            TailCurve::Survival { components } => (
                Vec::new(),
                components
                    .iter()
                    .map(|c| c.exponent.derivatives(smooth_order + 1))
                    .collect(),
            ),
        };
        let model = Self {
            data: Arc::new(CurveData {
                curve,
                rate_derivs,
                component_derivs,
            }),
            t0,
            log_sbar_t0,
            curve_log_t0: 0.0,
            meta,
            smooth_order,
        };
        model.check_decreasing()?;
        Ok(model)
    }

    fn check_decreasing(&self) -> Result<()> {
        let mut grid = vec![self.t0];
        grid.extend(default_grid(self.t0));
        for &t in &grid {
            let h = match &self.data.curve {
                TailCurve::Hazard { rate, .. } => rate.eval(t),
                TailCurve::Survival { .. } => self.survival_hazard_derivs(t, 0)[0],
            };
            if !(h > 0.0) || !h.is_finite() {
                return Err(Error::InvalidModel(format!(
                    "hazard rate must be positive on [t0, inf); h({t}) = {h}"
                )));
            }
        }
        Ok(())
    }

    /// Same tail carrying total mass `mass` (e.g. one side of a two-sided law).
    pub fn with_mass(mut self, mass: f64) -> Result<Self> {
        if !(mass > 0.0 && mass <= 1.0) {
            return Err(Error::InvalidModel(format!("tail mass {mass} not in (0, 1]")));
        }
        self.log_sbar_t0 += mass.ln();
        Ok(self)
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn sbar_t0(&self) -> f64 {
        self.log_sbar_t0.exp()
    }

    pub fn metadata(&self) -> RvMetadata {
        self.meta
    }

    pub fn smooth_order(&self) -> usize {
        self.smooth_order
    }

    pub fn curve(&self) -> &TailCurve {
        &self.data.curve
    }

    fn check_domain(&self, t: f64) -> Result<()> {
        if t >= self.t0 {
            Ok(())
        } else {
            Err(Error::OutOfDomain { t, t0: self.t0 })
        }
    }

    fn check_order(&self, k: usize) -> Result<()> {
        if k > self.smooth_order {
            Err(Error::InsufficientSmoothness {
                requested: k,
                available: self.smooth_order,
            })
        } else {
            Ok(())
        }
    }

    // log of Σ w_k exp(-Λ_k(s_k t)), unnormalised
    fn curve_log(&self, t: f64) -> f64 {
        match &self.data.curve {
            TailCurve::Hazard { .. } => unreachable!("only survival-defined curves"),
            TailCurve::Survival { components } => {
                let exps: Vec<f64> = components
                    .iter()
                    .map(|c| -c.exponent.eval(c.scale * t))
                    .collect();
                let top = exps.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                let sum: f64 = components
                    .iter()
                    .zip(&exps)
                    .map(|(c, e)| c.weight * (e - top).exp())
                    .sum();
                top + sum.ln()
            }
        }
    }

    /// `∫_{t0}^t h(u) du`.
    pub fn cum_hazard(&self, t: f64) -> Result<f64> {
        self.check_domain(t)?;
        match &self.data.curve {
            TailCurve::Hazard {
                cumulative: Some(cum),
                ..
            } => Ok(cum.eval(t) - cum.eval(self.t0)),
            TailCurve::Hazard {
                rate,
                cumulative: None,
            } => {
                let est = integrate(|u| rate.eval(u), self.t0, t, QuadOptions::relative(1e-13))?;
                Ok(est.value)
            }
            TailCurve::Survival { .. } => Ok(self.curve_log_t0 - self.curve_log(t)),
        }
    }

    pub fn log_survival(&self, t: f64) -> Result<f64> {
        Ok(self.log_sbar_t0 - self.cum_hazard(t)?)
    }

    /// `S(t) = S(t0) exp(-∫_{t0}^t h)`.
    pub fn survival(&self, t: f64) -> Result<f64> {
        Ok(self.log_survival(t)?.exp())
    }

    pub fn hazard(&self, t: f64) -> Result<f64> {
        Ok(self.hazard_derivatives(t, 0)?[0])
    }

    /// `h, h', ..., h^{(n)}` at `t`, for `n <= smooth_order`.
    pub fn hazard_derivatives(&self, t: f64, n: usize) -> Result<Vec<f64>> {
        self.check_domain(t)?;
        self.check_order(n)?;
        Ok(match &self.data.curve {
            TailCurve::Hazard { .. } => self.data.rate_derivs[..=n]
                .iter()
                .map(|s| s.eval(t))
                .collect(),
            TailCurve::Survival { .. } => self.survival_hazard_derivs(t, n),
        })
    }

    // normalised component values w_k exp(-Λ_k(s_k t) + top) and their P_j ratios
    fn component_ratios(&self, t: f64, n: usize) -> (Vec<f64>, Vec<Vec<f64>>) {
        let TailCurve::Survival { components } = &self.data.curve else {
            unreachable!()
        };
        let exps: Vec<f64> = components
            .iter()
            .map(|c| -c.exponent.eval(c.scale * t))
            .collect();
        let top = exps.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let mut values = Vec::with_capacity(components.len());
        let mut ratios = Vec::with_capacity(components.len());
        for ((c, e), derivs) in components
            .iter()
            .zip(&exps)
            .zip(&self.data.component_derivs)
        {
            values.push(c.weight * (e - top).exp());
            // ψ(t) = Λ(s t); ψ' plays the role of the hazard for this component
            let psi: Vec<f64> = (0..n.max(1))
                .map(|i| c.scale.powi(i as i32 + 1) * derivs[i + 1].eval(c.scale * t))
                .collect();
            ratios.push((0..=n).map(|j| survival_polynomial(j).eval(&psi)).collect());
        }
        (values, ratios)
    }

    fn survival_hazard_derivs(&self, t: f64, n: usize) -> Vec<f64> {
        let (values, ratios) = self.component_ratios(t, n + 1);
        let total: f64 = values.iter().sum();
        // g_j = S^{(j)} / S
        let g: Vec<f64> = (0..=n + 1)
            .map(|j| values.iter().zip(&ratios).map(|(v, r)| v * r[j]).sum::<f64>() / total)
            .collect();
        // S^{(m+1)} = -Σ_i C(m,i) h^{(i)} S^{(m-i)}
        let mut h = Vec::with_capacity(n + 1);
        for m in 0..=n {
            let mut acc = g[m + 1];
            let mut binom = 1.0;
            for i in 0..m {
                acc += binom * h[i] * g[m - i];
                binom = binom * (m - i) as f64 / (i + 1) as f64;
            }
            h.push(-acc);
        }
        h
    }

    /// `S^{(k)}(t)` via the hazard polynomial `P_k`.
    pub fn survival_derivative(&self, k: usize, t: f64) -> Result<f64> {
        self.check_order(k)?;
        let s = self.survival(t)?;
        if k == 0 {
            return Ok(s);
        }
        let h = self.hazard_derivatives(t, k - 1)?;
        Ok(survival_polynomial(k).eval(&h) * s)
    }

    /// Signed pieces summing to `S^{(k)}(t)`: one per survival component,
    /// or a single piece for hazard-defined tails.
    pub fn survival_derivative_components(&self, k: usize, t: f64) -> Result<Vec<f64>> {
        self.check_order(k)?;
        self.check_domain(t)?;
        match &self.data.curve {
            TailCurve::Hazard { .. } => Ok(vec![self.survival_derivative(k, t)?]),
            TailCurve::Survival { .. } => {
                let (values, ratios) = self.component_ratios(t, k);
                let total: f64 = values.iter().sum();
                let s = self.survival(t)?;
                Ok(values
                    .iter()
                    .zip(&ratios)
                    .map(|(v, r)| v / total * r[k] * s)
                    .collect())
            }
        }
    }

    /// Numerical sanity check of the declared regular-variation metadata.
    pub fn validate_metadata(&self, grid: &[f64]) -> Result<MetadataReport> {
        validate_metadata(self, grid)
    }
}

/// Disagreements found by [`validate_metadata`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "flag", rename_all = "snake_case")]
pub enum MetadataFlag {
    RvIndexMismatch { declared: f64, estimated: f64 },
    LogExponentMismatch { declared: f64, estimated: f64 },
    LambdaMismatch { declared: f64, estimated: f64 },
    CaseAFunctionalGrowing { slope: f64 },
    Inconclusive { reason: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetadataReport {
    pub estimated_rv_index: f64,
    pub estimated_log_exponent: Option<f64>,
    pub estimated_lambda: Option<f64>,
    /// `(t, t h(t)^2 / h(1/h(t)))` where `1/h(t) >= t0`.
    pub case_a_functional: Vec<(f64, f64)>,
    pub case_a_bounded: Option<bool>,
    pub case_c_compatible: bool,
    pub flags: Vec<MetadataFlag>,
}

impl MetadataReport {
    pub fn inconclusive(&self) -> bool {
        self.flags
            .iter()
            .any(|f| matches!(f, MetadataFlag::Inconclusive { .. }))
    }

    pub fn agrees(&self) -> bool {
        self.flags.is_empty()
    }
}

/// Tolerance on estimated indices.
pub const METADATA_TOLERANCE: f64 = 0.05;

fn slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

/// See [`HazardModel::validate_metadata`].
pub fn validate_metadata(model: &HazardModel, grid: &[f64]) -> Result<MetadataReport> {
    if grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidArgument("grid must be strictly increasing".into()));
    }
    if grid.first().is_some_and(|&t| t <= model.t0) {
        return Err(Error::InvalidArgument(format!(
            "grid must lie in (t0, inf) with t0 = {}",
            model.t0
        )));
    }
    let meta = model.meta;
    let mut flags = Vec::new();
    let span = match (grid.first(), grid.last()) {
        (Some(a), Some(b)) => (b / a).log10(),
        _ => 0.0,
    };
    if grid.len() < 3 || span < 3.0 {
        flags.push(MetadataFlag::Inconclusive {
            reason: format!("grid spans {span:.2} decades over {} points; need 3 decades", grid.len()),
        });
    }
    let hs: Vec<f64> = grid
        .iter()
        .map(|&t| model.hazard(t))
        .collect::<Result<_>>()?;
    if grid.len() < 2 {
        return Ok(MetadataReport {
            estimated_rv_index: f64::NAN,
            estimated_log_exponent: None,
            estimated_lambda: None,
            case_a_functional: Vec::new(),
            case_a_bounded: None,
            case_c_compatible: false,
            flags,
        });
    }
    let log_t: Vec<f64> = grid.iter().map(|t| t.ln()).collect();
    let log_h: Vec<f64> = hs.iter().map(|h| h.ln()).collect();
    let rv_est = slope(&log_t, &log_h);
    if (rv_est - meta.rv_index).abs() > METADATA_TOLERANCE {
        flags.push(MetadataFlag::RvIndexMismatch {
            declared: meta.rv_index,
            estimated: rv_est,
        });
    }

    let near_minus_one = meta.rv_index == -1.0 || (rv_est + 1.0).abs() <= METADATA_TOLERANCE;
    let mut gamma_est = None;
    let mut lambda_est = None;
    if near_minus_one {
        let loglog: Vec<f64> = log_t.iter().map(|l| l.ln()).collect();
        let log_th: Vec<f64> = log_t.iter().zip(&log_h).map(|(lt, lh)| lt + lh).collect();
        let g = slope(&loglog, &log_th);
        gamma_est = Some(g);
        if meta.rv_index == -1.0 && (g - meta.log_exponent).abs() > METADATA_TOLERANCE {
            flags.push(MetadataFlag::LogExponentMismatch {
                declared: meta.log_exponent,
                estimated: g,
            });
        }
        let (t_last, h_last) = (*grid.last().unwrap(), *hs.last().unwrap());
        let l = t_last * h_last / t_last.ln();
        lambda_est = Some(l);
        if let Some(declared) = meta.lambda_coeff {
            if ((l - declared) / declared).abs() > METADATA_TOLERANCE {
                flags.push(MetadataFlag::LambdaMismatch {
                    declared,
                    estimated: l,
                });
            }
        }
    }

    let mut functional = Vec::new();
    for (&t, &h) in grid.iter().zip(&hs) {
        let s = 1.0 / h;
        if s >= model.t0 {
            functional.push((t, t * h * h / model.hazard(s)?));
        }
    }
    let case_a_bounded = if functional.len() >= 4 {
        let upper = &functional[functional.len() / 2..];
        let xs: Vec<f64> = upper.iter().map(|(t, _)| t.ln()).collect();
        let ys: Vec<f64> = upper.iter().map(|(_, v)| v.ln()).collect();
        let s = slope(&xs, &ys);
        let bounded = s <= METADATA_TOLERANCE;
        if !bounded && meta.rv_index == -1.0 && meta.log_exponent < 1.0 {
            flags.push(MetadataFlag::CaseAFunctionalGrowing { slope: s });
        }
        Some(bounded)
    } else {
        None
    };

    let case_c_compatible = rv_est > -1.0 + METADATA_TOLERANCE
        || (near_minus_one && gamma_est.is_some_and(|g| g > 1.0 + METADATA_TOLERANCE));

    Ok(MetadataReport {
        estimated_rv_index: rv_est,
        estimated_log_exponent: gamma_est,
        estimated_lambda: lambda_est,
        case_a_functional: functional,
        case_a_bounded,
        case_c_compatible,
        flags,
    })
}

/// Hazard `Σ λ_k t^{ρ_k} (log t)^{γ_k}` from `(λ, ρ, γ)` triples.
pub fn power_log_hazard(terms: &[(f64, f64, f64)]) -> PowerLog {
    PowerLog::new(terms.iter().map(|&(c, p, q)| PowerLogTerm::new(c, p, q)))
}
