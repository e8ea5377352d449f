//! Full law of one innovation `X`: body plus hazard-rate tails.
//!
//! Two-sided laws are built as `X = ±Y` where the magnitude `Y` has a single
//! law and the sign is independent with `P(X < 0) = lower_mass`. Both tails
//! then share one hazard rate, so the law is strongly tail balanced with
//! ratio `(1 - lower_mass) / lower_mass`.

use std::collections::BTreeMap;
use std::sync::RwLock;

use crate::error::{Error, Result};
use crate::hazard::{Family, HazardModel};
use crate::laplace::MomentVector;
use crate::quad::{integrate, QuadOptions};

/// Cumulative distribution of a real law, with tail-accurate inverses.
pub trait Law: Sync {
    /// `P(X > x)`.
    fn sf(&self, x: f64) -> f64;
    /// `P(X <= x)`.
    fn cdf(&self, x: f64) -> f64;
    /// `x` with `P(X <= x) = u`, accurate for small `u`.
    fn quantile(&self, u: f64) -> f64;
    /// `x` with `P(X > x) = v`, accurate for small `v`.
    fn isf(&self, v: f64) -> f64;
}

/// Body of the magnitude law below the tail anchor.
#[derive(Debug, Clone, PartialEq)]
enum Body {
    /// The family's global closed form.
    Closed(Family),
    /// CDF linear on `[lower, t0]`, joining the tail continuously.
    Linear { lower: f64 },
}

/// Law of the magnitude `Y >= 0`.
#[derive(Debug, Clone)]
struct Magnitude {
    tail: HazardModel,
    body: Body,
}

impl Magnitude {
    fn lower(&self) -> f64 {
        match &self.body {
            Body::Closed(f) => f.support_lower(),
            Body::Linear { lower } => *lower,
        }
    }

    fn log_sf(&self, y: f64) -> f64 {
        match &self.body {
            Body::Closed(f) => f.log_survival(y),
            Body::Linear { lower } => {
                let t0 = self.tail.t0();
                if y >= t0 {
                    self.tail.log_survival(y).expect("y >= t0")
                } else if y <= *lower {
                    0.0
                } else {
                    let s0 = self.tail.sbar_t0();
                    (1.0 - (1.0 - s0) * (y - lower) / (t0 - lower)).ln()
                }
            }
        }
    }

    fn sf(&self, y: f64) -> f64 {
        self.log_sf(y).exp()
    }

    /// `P(Y <= y)` without cancellation near the lower end.
    fn cdf(&self, y: f64) -> f64 {
        -self.log_sf(y).exp_m1()
    }

    fn isf(&self, v: f64) -> f64 {
        if v >= 1.0 {
            return self.lower();
        }
        if v <= 0.0 {
            return f64::INFINITY;
        }
        match &self.body {
            Body::Closed(f) => f.inverse_survival(v).max(f.support_lower()),
            Body::Linear { lower } => {
                let t0 = self.tail.t0();
                let s0 = self.tail.sbar_t0();
                if v >= s0 {
                    lower + (1.0 - v) / (1.0 - s0) * (t0 - lower)
                } else {
                    tail_isf(&self.tail, v)
                }
            }
        }
    }

    fn quantile(&self, u: f64) -> f64 {
        if u <= 0.0 {
            return self.lower();
        }
        match &self.body {
            Body::Closed(f) => f.quantile(u).max(f.support_lower()),
            Body::Linear { .. } => self.isf(1.0 - u),
        }
    }

    /// `E[Y^i] = ∫ i y^{i-1} P(Y > y) dy`.
    fn moment(&self, i: usize) -> Result<f64> {
        if i == 0 {
            return Ok(1.0);
        }
        let fi = i as f64;
        let lower = self.lower();
        let t0 = self.tail.t0();
        let opts = QuadOptions::relative(1e-13);
        // below the support P(Y > y) = 1
        let mut total = lower.powi(i as i32);
        total += integrate(|y| fi * y.powi(i as i32 - 1) * self.sf(y), lower, t0, opts)?.value;
        // tail in s = ln y, panels of unit width until the integrand is negligible
        let g = |s: f64| fi * (fi * s + self.log_sf(s.exp())).exp();
        let log_g = |s: f64| fi.ln() + fi * s + self.log_sf(s.exp());
        let mut a = t0.ln();
        let mut peak = log_g(a);
        let mut tail = 0.0;
        for _ in 0..100_000 {
            let b = a + 1.0;
            tail += integrate(g, a, b, opts)?.value;
            let lb = log_g(b);
            peak = peak.max(lb);
            a = b;
            if lb < peak - 80.0 && lb < log_g(b - 0.5) {
                break;
            }
        }
        total += tail;
        if total.is_finite() {
            Ok(total)
        } else {
            Err(Error::NonFiniteMoment(i))
        }
    }
}

/// Root of `log S(y) = ln v` for a tail model, `v < S(t0)`.
fn tail_isf(model: &HazardModel, v: f64) -> f64 {
    let target = v.ln();
    let f = |y: f64| model.log_survival(y).expect("y >= t0") - target;
    let mut lo = model.t0();
    let mut hi = 2.0 * lo;
    while f(hi) > 0.0 {
        lo = hi;
        hi *= 2.0;
        if !hi.is_finite() {
            return f64::INFINITY;
        }
    }
    let mut y = 0.5 * (lo + hi);
    for _ in 0..200 {
        let fy = f(y);
        if fy > 0.0 {
            lo = y;
        } else {
            hi = y;
        }
        if fy.abs() < 1e-15 * target.abs().max(1.0) || hi - lo <= 4.0 * f64::EPSILON * hi {
            break;
        }
        // f' = -h
        let step = y + fy / model.hazard(y).expect("y >= t0");
        y = if step > lo && step < hi {
            step
        } else {
            0.5 * (lo + hi)
        };
    }
    y
}

/// Law of one innovation: magnitude law, sign split and tail models.
#[derive(Debug)]
pub struct TailDistribution {
    magnitude: Magnitude,
    upper: HazardModel,
    lower: Option<HazardModel>,
    lower_mass: f64,
    moment_cache: RwLock<BTreeMap<usize, f64>>,
}

impl Clone for TailDistribution {
    fn clone(&self) -> Self {
        Self {
            magnitude: self.magnitude.clone(),
            upper: self.upper.clone(),
            lower: self.lower.clone(),
            lower_mass: self.lower_mass,
            moment_cache: RwLock::new(self.moment_cache.read().expect("cache lock").clone()),
        }
    }
}

impl TailDistribution {
    /// One-sided law of a built-in family with tail anchored at `t0`.
    pub fn builtin(family: Family, t0: f64) -> Result<Self> {
        let tail = HazardModel::builtin(family, t0)?;
        Ok(Self::from_magnitude(Magnitude {
            tail,
            body: Body::Closed(family),
        }))
    }

    /// One-sided law with tail `tail` and a CDF linear on `[body_lower, t0]`.
    pub fn custom(tail: HazardModel, body_lower: f64) -> Result<Self> {
        if !(body_lower >= 0.0 && body_lower < tail.t0()) {
            return Err(Error::InvalidModel(format!(
                "body lower end {body_lower} must lie in [0, t0) with t0 = {}",
                tail.t0()
            )));
        }
        Ok(Self::from_magnitude(Magnitude {
            tail,
            body: Body::Linear { lower: body_lower },
        }))
    }

    fn from_magnitude(magnitude: Magnitude) -> Self {
        Self {
            upper: magnitude.tail.clone(),
            magnitude,
            lower: None,
            lower_mass: 0.0,
            moment_cache: RwLock::new(BTreeMap::new()),
        }
    }

    /// Two-sided version `±Y` with `P(X < 0) = lower_mass`.
    pub fn two_sided(self, lower_mass: f64) -> Result<Self> {
        if !(lower_mass > 0.0 && lower_mass < 1.0) {
            return Err(Error::InvalidModel(format!(
                "lower mass {lower_mass} must lie in (0, 1)"
            )));
        }
        let tail = self.magnitude.tail.clone();
        Ok(Self {
            upper: tail.clone().with_mass(1.0 - lower_mass)?,
            lower: Some(tail.with_mass(lower_mass)?),
            lower_mass,
            magnitude: self.magnitude,
            moment_cache: RwLock::new(BTreeMap::new()),
        })
    }

    /// Symmetric version `±Y` with equal sign probabilities.
    pub fn symmetric(self) -> Result<Self> {
        self.two_sided(0.5)
    }

    /// Upper tail model of `F`.
    pub fn upper(&self) -> &HazardModel {
        &self.upper
    }

    /// Tail model of `M_{-1} F`, present for two-sided laws.
    pub fn lower(&self) -> Option<&HazardModel> {
        self.lower.as_ref()
    }

    pub fn lower_mass(&self) -> f64 {
        self.lower_mass
    }

    pub fn upper_mass(&self) -> f64 {
        1.0 - self.lower_mass
    }

    pub fn is_two_sided(&self) -> bool {
        self.lower.is_some()
    }

    pub fn is_symmetric(&self) -> bool {
        self.lower_mass == 0.5
    }

    /// Limit of `P(X > t) / P(X < -t)`.
    pub fn tail_balance_ratio(&self) -> Option<f64> {
        self.lower.as_ref().map(|_| self.upper_mass() / self.lower_mass)
    }

    /// Anchor of both tail models.
    pub fn t0(&self) -> f64 {
        self.upper.t0()
    }

    /// `log P(X > x)` for `x >= 0`, without underflow.
    pub fn log_sf_upper(&self, x: f64) -> f64 {
        self.upper_mass().ln() + self.magnitude.log_sf(x)
    }

    /// `E[X^i]`, memoised.
    pub fn moment(&self, i: usize) -> Result<f64> {
        let abs = self.abs_moment(i)?;
        Ok(if i % 2 == 0 {
            abs
        } else if self.is_symmetric() {
            0.0
        } else {
            (self.upper_mass() - self.lower_mass) * abs
        })
    }

    /// `E[|X|^i]`, memoised.
    pub fn abs_moment(&self, i: usize) -> Result<f64> {
        if let Some(&v) = self.moment_cache.read().expect("cache lock").get(&i) {
            return Ok(v);
        }
        let v = self.magnitude.moment(i)?;
        // concurrent writers store the same value
        self.moment_cache.write().expect("cache lock").insert(i, v);
        Ok(v)
    }

    /// Moments `μ_0..μ_m` with absolute moments.
    pub fn moments(&self, m: usize) -> Result<MomentVector> {
        let raw = (0..=m).map(|i| self.moment(i)).collect::<Result<Vec<_>>>()?;
        let abs = (0..=m).map(|i| self.abs_moment(i)).collect::<Result<Vec<_>>>()?;
        MomentVector::with_absolute(raw, abs)
    }

    /// `D^k` of `t ↦ P(cX > t)`.
    pub fn scaled_survival_derivative(&self, c: f64, k: usize, t: f64) -> Result<f64> {
        let (model, s) = self.scaled_model(c, t)?;
        Ok(c.abs().powi(-(k as i32)) * model.survival_derivative(k, s)?)
    }

    /// Signed pieces of [`Self::scaled_survival_derivative`], one per survival component.
    pub fn scaled_survival_derivative_components(
        &self,
        c: f64,
        k: usize,
        t: f64,
    ) -> Result<Vec<f64>> {
        let (model, s) = self.scaled_model(c, t)?;
        let f = c.abs().powi(-(k as i32));
        Ok(model
            .survival_derivative_components(k, s)?
            .into_iter()
            .map(|v| f * v)
            .collect())
    }

    /// Tail model governing `P(cX > t)` and the rescaled argument `t / |c|`.
    pub fn scaled_model(&self, c: f64, t: f64) -> Result<(&HazardModel, f64)> {
        if c == 0.0 {
            return Err(Error::DegenerateWeight);
        }
        if c > 0.0 {
            Ok((&self.upper, t / c))
        } else {
            match &self.lower {
                Some(m) => Ok((m, t / -c)),
                None => Err(Error::UnsupportedSign(c)),
            }
        }
    }

    /// Draw `X` from two independent uniforms on `(0, 1)`.
    pub fn sample_from_uniforms(&self, u_sign: f64, v: f64) -> f64 {
        let y = self.magnitude.isf(v);
        if u_sign < self.lower_mass {
            -y
        } else {
            y
        }
    }

    /// `P(|X| > y)`.
    pub fn abs_sf(&self, y: f64) -> f64 {
        self.magnitude.sf(y)
    }

    /// Lower end of the magnitude support.
    pub fn magnitude_lower(&self) -> f64 {
        self.magnitude.lower()
    }
}

impl Law for TailDistribution {
    fn sf(&self, x: f64) -> f64 {
        if x >= 0.0 {
            self.upper_mass() * self.magnitude.sf(x)
        } else {
            1.0 - self.lower_mass * self.magnitude.sf(-x)
        }
    }

    fn cdf(&self, x: f64) -> f64 {
        if x < 0.0 {
            self.lower_mass * self.magnitude.sf(-x)
        } else {
            self.lower_mass + self.upper_mass() * self.magnitude.cdf(x)
        }
    }

    fn quantile(&self, u: f64) -> f64 {
        if u <= self.lower_mass {
            -self.magnitude.isf(u / self.lower_mass)
        } else {
            let w = u - self.lower_mass;
            // small w: magnitude near its lower end
            if w < 0.5 * self.upper_mass() {
                self.magnitude.quantile(w / self.upper_mass())
            } else {
                self.magnitude.isf((1.0 - u) / self.upper_mass())
            }
        }
    }

    fn isf(&self, v: f64) -> f64 {
        let p = self.upper_mass();
        if v <= p {
            if v > 0.5 * p {
                self.magnitude.quantile((p - v) / p)
            } else {
                self.magnitude.isf(v / p)
            }
        } else {
            -self.magnitude.isf((1.0 - v) / self.lower_mass)
        }
    }
}

/// Law of `c X` for a fixed nonzero `c`.
pub struct Scaled<'a, L: Law> {
    pub law: &'a L,
    pub c: f64,
}

impl<L: Law> Law for Scaled<'_, L> {
    fn sf(&self, x: f64) -> f64 {
        if self.c > 0.0 {
            self.law.sf(x / self.c)
        } else {
            self.law.cdf(x / self.c)
        }
    }

    fn cdf(&self, x: f64) -> f64 {
        if self.c > 0.0 {
            self.law.cdf(x / self.c)
        } else {
            self.law.sf(x / self.c)
        }
    }

    fn quantile(&self, u: f64) -> f64 {
        if self.c > 0.0 {
            self.c * self.law.quantile(u)
        } else {
            self.c * self.law.isf(u)
        }
    }

    fn isf(&self, v: f64) -> f64 {
        if self.c > 0.0 {
            self.c * self.law.isf(v)
        } else {
            self.c * self.law.quantile(v)
        }
    }
}

/// Unit point mass at zero.
pub struct PointMass;

impl Law for PointMass {
    fn sf(&self, x: f64) -> f64 {
        if x < 0.0 {
            1.0
        } else {
            0.0
        }
    }

    fn cdf(&self, x: f64) -> f64 {
        1.0 - self.sf(x)
    }

    fn quantile(&self, _u: f64) -> f64 {
        0.0
    }

    fn isf(&self, _v: f64) -> f64 {
        0.0
    }
}
