//! Finite sums of power-log monomials `c · t^p · (ln t)^q`.
//!
//! Closed under differentiation; used for hazard rates and cumulative
//! hazards of the built-in families and of custom models.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerLogTerm {
    pub coeff: f64,
    pub power: f64,
    pub log_power: f64,
}

impl PowerLogTerm {
    pub fn new(coeff: f64, power: f64, log_power: f64) -> Self {
        Self {
            coeff,
            power,
            log_power,
        }
    }

    /// Evaluate at `t`; requires `t > 1` whenever `log_power != 0`.
    pub fn eval(&self, t: f64) -> f64 {
        let mut v = self.coeff;
        if self.power != 0.0 {
            v *= t.powf(self.power);
        }
        if self.log_power != 0.0 {
            v *= t.ln().powf(self.log_power);
        }
        v
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PowerLog {
    terms: Vec<PowerLogTerm>,
}

impl PowerLog {
    /// Build a series, merging terms with identical exponents and dropping zeros.
    pub fn new(terms: impl IntoIterator<Item = PowerLogTerm>) -> Self {
        let mut merged: Vec<PowerLogTerm> = Vec::new();
        for term in terms {
            match merged
                .iter_mut()
                .find(|m| m.power == term.power && m.log_power == term.log_power)
            {
                Some(m) => m.coeff += term.coeff,
                None => merged.push(term),
            }
        }
        merged.retain(|t| t.coeff != 0.0);
        Self { terms: merged }
    }

    pub fn monomial(coeff: f64, power: f64, log_power: f64) -> Self {
        Self::new([PowerLogTerm::new(coeff, power, log_power)])
    }

    pub fn terms(&self) -> &[PowerLogTerm] {
        &self.terms
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.terms.iter().map(|term| term.eval(t)).sum()
    }

    pub fn derivative(&self) -> PowerLog {
        // d/dt t^p L^q = p t^{p-1} L^q + q t^{p-1} L^{q-1}
        let mut out = Vec::with_capacity(2 * self.terms.len());
        for term in &self.terms {
            if term.power != 0.0 {
                out.push(PowerLogTerm::new(
                    term.coeff * term.power,
                    term.power - 1.0,
                    term.log_power,
                ));
            }
            if term.log_power != 0.0 {
                out.push(PowerLogTerm::new(
                    term.coeff * term.log_power,
                    term.power - 1.0,
                    term.log_power - 1.0,
                ));
            }
        }
        PowerLog::new(out)
    }

    /// Derivatives of orders `0..=n` as series.
    pub fn derivatives(&self, n: usize) -> Vec<PowerLog> {
        let mut out = Vec::with_capacity(n + 1);
        out.push(self.clone());
        for j in 0..n {
            let next = out[j].derivative();
            out.push(next);
        }
        out
    }

    /// Antiderivative when every term has an elementary one of the same kind
    /// (`q = 0, p != -1` or `p = -1, q != -1`); `None` otherwise.
    pub fn antiderivative(&self) -> Option<PowerLog> {
        let mut out = Vec::with_capacity(self.terms.len());
        for term in &self.terms {
            if term.log_power == 0.0 && term.power != -1.0 {
                out.push(PowerLogTerm::new(
                    term.coeff / (term.power + 1.0),
                    term.power + 1.0,
                    0.0,
                ));
            } else if term.power == -1.0 && term.log_power != -1.0 {
                out.push(PowerLogTerm::new(
                    term.coeff / (term.log_power + 1.0),
                    0.0,
                    term.log_power + 1.0,
                ));
            } else {
                return None;
            }
        }
        Some(PowerLog::new(out))
    }

    /// Term of largest growth: highest power, then highest log power.
    pub fn dominant(&self) -> Option<&PowerLogTerm> {
        self.terms.iter().max_by(|a, b| {
            a.power
                .total_cmp(&b.power)
                .then(a.log_power.total_cmp(&b.log_power))
        })
    }
}
