//! Laplace characters: truncated operators `Σ_{i<=m} ((-1)^i / i!) μ_i D^i`.
//!
//! Convolution of laws maps to composition of characters, which is the
//! product of coefficient polynomials modulo `D^{m+1}`.

use serde::{Deserialize, Serialize};

use crate::distribution::TailDistribution;
use crate::error::{Error, Result};
use crate::weights::WeightSequence;

/// Raw moments `μ_0 = 1, μ_1, ..., μ_m`, optionally with absolute moments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentVector {
    moments: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    absolute: Option<Vec<f64>>,
}

fn check_moments(v: &[f64]) -> Result<()> {
    if v.first() != Some(&1.0) {
        return Err(Error::InvalidArgument("moment vector must start with 1".into()));
    }
    match v.iter().position(|x| !x.is_finite()) {
        Some(i) => Err(Error::NonFiniteMoment(i)),
        None => Ok(()),
    }
}

impl MomentVector {
    pub fn new(moments: Vec<f64>) -> Result<Self> {
        check_moments(&moments)?;
        Ok(Self {
            moments,
            absolute: None,
        })
    }

    pub fn with_absolute(moments: Vec<f64>, absolute: Vec<f64>) -> Result<Self> {
        check_moments(&moments)?;
        check_moments(&absolute)?;
        if absolute.len() != moments.len() {
            return Err(Error::InvalidArgument("absolute moments of different order".into()));
        }
        Ok(Self {
            moments,
            absolute: Some(absolute),
        })
    }

    /// Moments of the unit point mass at zero.
    pub fn point_mass(m: usize) -> Self {
        let mut moments = vec![0.0; m + 1];
        moments[0] = 1.0;
        Self {
            absolute: Some(moments.clone()),
            moments,
        }
    }

    pub fn order(&self) -> usize {
        self.moments.len() - 1
    }

    pub fn moments(&self) -> &[f64] {
        &self.moments
    }

    pub fn absolute(&self) -> Option<&[f64]> {
        self.absolute.as_deref()
    }

    pub fn get(&self, i: usize) -> f64 {
        self.moments[i]
    }

    /// Moments of `c X`.
    pub fn scaled(&self, c: f64) -> Self {
        let scale = |v: &[f64]| -> Vec<f64> {
            v.iter()
                .enumerate()
                .map(|(i, x)| x * c.powi(i as i32))
                .collect()
        };
        Self {
            moments: scale(&self.moments),
            absolute: self.absolute.as_deref().map(|a| {
                a.iter()
                    .enumerate()
                    .map(|(i, x)| x * c.abs().powi(i as i32))
                    .collect()
            }),
        }
    }
}

fn binomial_row(n: usize) -> Vec<f64> {
    let mut row = vec![1.0; n + 1];
    for k in 1..n {
        row[k] = row[k - 1] * (n - k + 1) as f64 / k as f64;
    }
    row
}

/// Moments of the sum of independent variables, `μ_n = Σ_j C(n,j) a_j b_{n-j}`.
pub fn convolve_moments(a: &MomentVector, b: &MomentVector) -> Result<MomentVector> {
    if a.order() != b.order() {
        return Err(Error::OrderMismatch {
            left: a.order(),
            right: b.order(),
        });
    }
    let moments = (0..=a.order())
        .map(|n| {
            let c = binomial_row(n);
            (0..=n).map(|j| c[j] * a.get(j) * b.get(n - j)).sum()
        })
        .collect();
    Ok(MomentVector {
        moments,
        absolute: None,
    })
}

/// Cumulants `κ_1..κ_m` (index 0 holds 0) from raw moments.
pub fn cumulants_from_moments(mu: &[f64]) -> Vec<f64> {
    // κ_n = μ_n - Σ_{k=1}^{n-1} C(n-1, k-1) κ_k μ_{n-k}
    let mut kappa = vec![0.0; mu.len()];
    for n in 1..mu.len() {
        let c = binomial_row(n - 1);
        let mut acc = mu[n];
        for k in 1..n {
            acc -= c[k - 1] * kappa[k] * mu[n - k];
        }
        kappa[n] = acc;
    }
    kappa
}

/// Raw moments from cumulants `κ_1..κ_m` (index 0 ignored).
pub fn moments_from_cumulants(kappa: &[f64]) -> Vec<f64> {
    // μ_n = Σ_{k=0}^{n-1} C(n-1, k) κ_{k+1} μ_{n-1-k}
    let mut mu = vec![0.0; kappa.len()];
    mu[0] = 1.0;
    for n in 1..kappa.len() {
        let c = binomial_row(n - 1);
        mu[n] = (0..n).map(|k| c[k] * kappa[k + 1] * mu[n - 1 - k]).sum();
    }
    mu
}

/// Coefficients `a_0..a_m` of a truncated differential operator in `D`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LaplaceCharacter {
    coeffs: Vec<f64>,
}

fn factorial(i: usize) -> f64 {
    (1..=i).map(|k| k as f64).product()
}

impl LaplaceCharacter {
    /// The identity operator of order `m`.
    pub fn identity(m: usize) -> Self {
        let mut coeffs = vec![0.0; m + 1];
        coeffs[0] = 1.0;
        Self { coeffs }
    }

    pub fn from_coeffs(coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.first() != Some(&1.0) {
            return Err(Error::InvalidArgument("character must have a_0 = 1".into()));
        }
        Ok(Self { coeffs })
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Recover `μ_i = (-1)^i i! a_i`.
    pub fn moments(&self) -> MomentVector {
        let moments = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, a)| sign(i) * factorial(i) * a)
            .collect();
        MomentVector {
            moments,
            absolute: None,
        }
    }

    /// Same operator modulo `D^{m+1}`.
    pub fn truncate(&self, m: usize) -> Result<Self> {
        if m > self.order() {
            return Err(Error::InsufficientMoments {
                requested: m,
                available: self.order(),
            });
        }
        Ok(Self {
            coeffs: self.coeffs[..=m].to_vec(),
        })
    }
}

fn sign(i: usize) -> f64 {
    if i % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// `a_i = ((-1)^i / i!) μ_i` for `i <= m`.
pub fn character_from_moments(mv: &MomentVector, m: usize) -> Result<LaplaceCharacter> {
    if mv.order() < m {
        return Err(Error::InsufficientMoments {
            requested: m,
            available: mv.order(),
        });
    }
    let coeffs = (0..=m).map(|i| sign(i) / factorial(i) * mv.get(i)).collect();
    Ok(LaplaceCharacter { coeffs })
}

/// Truncated product of coefficient polynomials.
pub fn compose(a: &LaplaceCharacter, b: &LaplaceCharacter) -> Result<LaplaceCharacter> {
    if a.order() != b.order() {
        return Err(Error::OrderMismatch {
            left: a.order(),
            right: b.order(),
        });
    }
    let coeffs = (0..=a.order())
        .map(|k| (0..=k).map(|i| a.coeffs[i] * b.coeffs[k - i]).sum())
        .collect();
    Ok(LaplaceCharacter { coeffs })
}

/// `Σ_i a_i D^i` applied to `t ↦ P(cX > t)`.
pub fn apply(ch: &LaplaceCharacter, dist: &TailDistribution, c: f64, t: f64) -> Result<f64> {
    let (model, _) = dist.scaled_model(c, t)?;
    if ch.order() > model.smooth_order() {
        return Err(Error::InsufficientSmoothness {
            requested: ch.order(),
            available: model.smooth_order(),
        });
    }
    let mut total = 0.0;
    for (i, a) in ch.coeffs.iter().enumerate() {
        if *a != 0.0 || i == 0 {
            total += a * dist.scaled_survival_derivative(c, i, t)?;
        }
    }
    Ok(total)
}

/// Moments of order `0..=m` of `Σ_{j != i} c_j X_j`.
pub fn residual_moments(
    dist: &TailDistribution,
    seq: &WeightSequence,
    i: i64,
    m: usize,
) -> Result<MomentVector> {
    let residual = seq.residual(i)?;
    let base = dist.moments(m)?;
    let kappa_f = cumulants_from_moments(base.moments());
    let kappa: Vec<f64> = kappa_f
        .iter()
        .enumerate()
        .map(|(n, k)| if n == 0 { 0.0 } else { k * residual.power_sum(n as u32) })
        .collect();
    let moments = moments_from_cumulants(&kappa);
    match moments.iter().position(|x| !x.is_finite()) {
        Some(n) => Err(Error::NonFiniteMoment(n)),
        None => Ok(MomentVector {
            moments,
            absolute: None,
        }),
    }
}
