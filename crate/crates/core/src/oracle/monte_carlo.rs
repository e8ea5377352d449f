//! Seeded Monte Carlo estimators over truncated weighted sums.
//!
//! Samples are grouped in fixed-size blocks; block `b` draws from the
//! ChaCha8 stream `b` of the seed, and per-block statistics are merged in
//! block order, so results do not depend on the number of worker threads.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{OracleEstimate, OracleMethod};
use crate::distribution::{Law, TailDistribution};
use crate::error::{Error, Result};
use crate::weights::WeightSequence;

const BLOCK: u64 = 1 << 14;

/// Which variable is integrated out analytically.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    /// Sum over `i` of `P(c_i X > max(t - S_{-i}, max_{j != i} c_j X_j))`.
    #[default]
    LargestSummand,
    /// `P(c_* X > t - S')` for one designated maximal entry `c_*`.
    MaxEntry,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McOptions {
    /// Truncate the weights at the first `N` with `Σ_{|j| > N} |c_j| < eps_trunc`.
    pub eps_trunc: f64,
    pub scheme: Scheme,
}

impl Default for McOptions {
    fn default() -> Self {
        Self {
            eps_trunc: 1e-12,
            scheme: Scheme::LargestSummand,
        }
    }
}

/// Running mean and centred second moment.
#[derive(Debug, Clone, Copy, Default)]
struct Welford {
    n: u64,
    mean: f64,
    m2: f64,
}

impl Welford {
    fn push(&mut self, x: f64) {
        self.n += 1;
        let d = x - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += d * (x - self.mean);
    }

    fn merge(self, other: Welford) -> Welford {
        if self.n == 0 {
            return other;
        }
        if other.n == 0 {
            return self;
        }
        let n = self.n + other.n;
        let d = other.mean - self.mean;
        let (na, nb) = (self.n as f64, other.n as f64);
        Welford {
            n,
            mean: self.mean + d * nb / n as f64,
            m2: self.m2 + other.m2 + d * d * na * nb / n as f64,
        }
    }

    fn std_err(&self) -> f64 {
        if self.n < 2 {
            0.0
        } else {
            (self.m2.max(0.0) / (self.n - 1) as f64 / self.n as f64).sqrt()
        }
    }
}

fn uniform(rng: &mut ChaCha8Rng) -> f64 {
    // midpoint of a 53-bit grid cell, so never 0 or 1
    ((rng.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
}

fn draw(dist: &TailDistribution, rng: &mut ChaCha8Rng) -> f64 {
    let u_sign = if dist.is_two_sided() { uniform(rng) } else { 1.0 };
    dist.sample_from_uniforms(u_sign, uniform(rng))
}

fn run_blocks<F>(n: u64, seed: u64, sample: F) -> Welford
where
    F: Fn(&mut ChaCha8Rng, &mut Vec<f64>) -> f64 + Sync,
{
    let blocks = n.div_ceil(BLOCK);
    let parts: Vec<Welford> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(b);
            let count = BLOCK.min(n - b * BLOCK);
            let mut scratch = Vec::new();
            let mut acc = Welford::default();
            for _ in 0..count {
                acc.push(sample(&mut rng, &mut scratch));
            }
            acc
        })
        .collect();
    parts.into_iter().fold(Welford::default(), Welford::merge)
}

/// `P(c X > y)`.
fn scaled_sf(dist: &TailDistribution, c: f64, y: f64) -> f64 {
    if c > 0.0 {
        dist.sf(y / c)
    } else {
        dist.cdf(y / c)
    }
}

fn truncated_weights(seq: &WeightSequence, eps: f64) -> Result<(i64, Vec<f64>)> {
    let n = seq.truncation_index(eps)?;
    let weights: Vec<f64> = seq.entries_up_to(n).into_iter().map(|e| e.1).collect();
    if weights.is_empty() {
        return Err(Error::InvalidArgument(format!(
            "truncation at eps = {eps} leaves no weights"
        )));
    }
    Ok((n, weights))
}

/// Bound on `|P(S_N + R > t) - P(S_N > t)|` for the remainder `R = Σ_{|j|>N} c_j X_j`.
///
/// With `s = Σ_{|j|>N} |c_j|^{1/2}`, `|R| <= s` unless some
/// `|X_j| > |c_j|^{-1/2}`; the sum of those probabilities plus
/// `2 s p H`, with `H` the largest scaled hazard at `t`, bounds the shift.
pub fn truncation_bias_bound(
    dist: &TailDistribution,
    seq: &WeightSequence,
    n: i64,
    t: f64,
    p_hat: f64,
) -> f64 {
    let explicit: Vec<f64> = seq
        .entries()
        .iter()
        .filter(|e| e.0.abs() > n)
        .map(|e| e.1.abs())
        .collect();
    let s = explicit.iter().map(|c| c.sqrt()).sum::<f64>() + seq.generator_tail(n, 0.5);
    let mut escape: f64 = explicit.iter().map(|&c| dist.abs_sf(c.powf(-0.5))).sum();
    if let Some(g) = seq.generator() {
        let mut j = g.from_index.max(n + 1);
        loop {
            let p = dist.abs_sf(g.weight(j).abs().powf(-0.5));
            escape += p;
            if p <= 1e-300 || j > n + 100_000 {
                break;
            }
            j += 1;
        }
    }
    let hazard = seq
        .entries_up_to(n)
        .iter()
        .filter_map(|&(_, c)| {
            let (model, s) = dist.scaled_model(c, t).ok()?;
            Some(model.hazard(s).ok()? / c.abs())
        })
        .fold(0.0f64, f64::max);
    escape + 2.0 * s * p_hat * hazard
}

/// Conditional Monte Carlo estimate of `P(Σ c_j X_j > t)`.
pub fn conditional_mc(
    dist: &TailDistribution,
    seq: &WeightSequence,
    t: f64,
    n: u64,
    seed: u64,
    opts: McOptions,
) -> Result<OracleEstimate> {
    if n == 0 {
        return Err(Error::InvalidArgument("sample count must be positive".into()));
    }
    let (trunc, weights) = truncated_weights(seq, opts.eps_trunc)?;
    for &c in &weights {
        dist.scaled_model(c, t)?;
    }
    let stats = match opts.scheme {
        Scheme::LargestSummand => run_blocks(n, seed, |rng, xs| {
            xs.clear();
            xs.extend(weights.iter().map(|&c| c * draw(dist, rng)));
            let total: f64 = xs.iter().sum();
            let (mut top, mut second, mut arg) = (f64::NEG_INFINITY, f64::NEG_INFINITY, 0);
            for (i, &x) in xs.iter().enumerate() {
                if x > top {
                    second = top;
                    top = x;
                    arg = i;
                } else if x > second {
                    second = x;
                }
            }
            xs.iter()
                .zip(&weights)
                .enumerate()
                .map(|(i, (&x, &c))| {
                    let others_max = if i == arg { second } else { top };
                    scaled_sf(dist, c, (t - (total - x)).max(others_max))
                })
                .sum()
        }),
        Scheme::MaxEntry => {
            let star = weights
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()).then(b.0.cmp(&a.0)))
                .map(|(i, _)| i)
                .expect("nonempty");
            run_blocks(n, seed, |rng, _| {
                let rest: f64 = weights
                    .iter()
                    .enumerate()
                    .filter(|&(i, _)| i != star)
                    .map(|(_, &c)| c * draw(dist, rng))
                    .sum();
                scaled_sf(dist, weights[star], t - rest)
            })
        }
    };
    Ok(OracleEstimate {
        t,
        p_hat: stats.mean,
        std_err: stats.std_err(),
        quadrature_error: 0.0,
        n_samples: n,
        truncation_n: trunc,
        truncation_bias_bound: truncation_bias_bound(dist, seq, trunc, t, stats.mean),
        seed,
        method: OracleMethod::ConditionalMc,
    })
}

/// Crude Monte Carlo estimate of `P(Σ c_j X_j > t)`.
pub fn plain_mc(
    dist: &TailDistribution,
    seq: &WeightSequence,
    t: f64,
    n: u64,
    seed: u64,
    eps_trunc: f64,
) -> Result<OracleEstimate> {
    if n == 0 {
        return Err(Error::InvalidArgument("sample count must be positive".into()));
    }
    let (trunc, weights) = truncated_weights(seq, eps_trunc)?;
    let stats = run_blocks(n, seed, |rng, _| {
        let s: f64 = weights.iter().map(|&c| c * draw(dist, rng)).sum();
        if s > t {
            1.0
        } else {
            0.0
        }
    });
    Ok(OracleEstimate {
        t,
        p_hat: stats.mean,
        std_err: stats.std_err(),
        quadrature_error: 0.0,
        n_samples: n,
        truncation_n: trunc,
        truncation_bias_bound: truncation_bias_bound(dist, seq, trunc, t, stats.mean),
        seed,
        method: OracleMethod::PlainMc,
    })
}
