//! Weight sequences `(c_i)`: explicit head plus optional geometric tail,
//! the tail-order comparison of scales, distinct levels and residuals.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative tolerance under which two magnitudes form one level.
pub const LEVEL_TOLERANCE: f64 = 1e-12;

/// Whether the innovation law has a lower tail.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SignMode {
    /// `F` vanishes near `-∞`; weights must be positive.
    OneSided,
    /// `F` is two-sided and strongly tail balanced.
    Balanced,
}

/// Weights `first · ratio^{j - from_index}` for all `j >= from_index`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeometricTail {
    pub first: f64,
    pub ratio: f64,
    pub from_index: i64,
}

impl GeometricTail {
    pub fn weight(&self, j: i64) -> f64 {
        self.first * self.ratio.powi((j - self.from_index) as i32)
    }

    /// `Σ_{j >= from} c_j^n`.
    pub fn power_sum(&self, n: u32) -> f64 {
        self.first.powi(n as i32) / (1.0 - self.ratio.powi(n as i32))
    }

    /// `Σ_{j >= from} |c_j|^p` for real `p > 0`.
    pub fn abs_power_sum(&self, p: f64) -> f64 {
        self.first.abs().powf(p) / (1.0 - self.ratio.abs().powf(p))
    }
}

/// Result of [`WeightSequence::compare`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Precedence {
    Precedes,
    Equivalent,
    Succeeds,
}

/// One distinct magnitude `c_(i)` with its signed multiplicities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Level {
    pub magnitude: f64,
    pub nu_plus: usize,
    pub nu_minus: usize,
}

impl Level {
    pub fn multiplicity(&self) -> usize {
        self.nu_plus + self.nu_minus
    }
}

fn same_level(a: f64, b: f64) -> bool {
    (a - b).abs() <= LEVEL_TOLERANCE * a.abs().max(b.abs())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightSequence {
    entries: Vec<(i64, f64)>,
    generator: Option<GeometricTail>,
    delta: f64,
    sign_mode: SignMode,
}

impl WeightSequence {
    /// Weights `c_1, c_2, ...` from a list, optionally continued geometrically.
    pub fn from_list(
        weights: &[f64],
        generator_ratio: Option<f64>,
        delta: f64,
        sign_mode: SignMode,
    ) -> Result<Self> {
        let entries: Vec<(i64, f64)> = weights
            .iter()
            .enumerate()
            .map(|(k, &w)| (k as i64 + 1, w))
            .collect();
        let generator = match generator_ratio {
            None => None,
            Some(ratio) => {
                let last = *weights.last().ok_or(Error::EmptySequence)?;
                Some(GeometricTail {
                    first: last * ratio,
                    ratio,
                    from_index: weights.len() as i64 + 1,
                })
            }
        };
        Self::new(entries, generator, delta, sign_mode)
    }

    /// General constructor; zero weights are dropped.
    pub fn new(
        entries: Vec<(i64, f64)>,
        generator: Option<GeometricTail>,
        delta: f64,
        sign_mode: SignMode,
    ) -> Result<Self> {
        if !(delta > 0.0 && delta < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "summability exponent delta = {delta} must lie in (0, 1)"
            )));
        }
        let mut entries: Vec<(i64, f64)> = entries.into_iter().filter(|e| e.1 != 0.0).collect();
        entries.sort_by_key(|e| e.0);
        if entries.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::InvalidArgument("duplicate weight index".into()));
        }
        if entries.iter().any(|e| !e.1.is_finite()) {
            return Err(Error::InvalidArgument("weights must be finite".into()));
        }
        let generator = match generator {
            Some(g) if g.first == 0.0 || g.ratio == 0.0 => None,
            other => other,
        };
        if let Some(g) = &generator {
            if !(g.ratio.abs() < 1.0) || !g.first.is_finite() {
                return Err(Error::InvalidArgument(format!(
                    "geometric ratio {} must satisfy |ratio| < 1",
                    g.ratio
                )));
            }
            if entries.last().is_some_and(|e| e.0 >= g.from_index) {
                return Err(Error::InvalidArgument(
                    "explicit indices overlap the geometric tail".into(),
                ));
            }
        }
        if entries.is_empty() && generator.is_none() {
            return Err(Error::EmptySequence);
        }
        if sign_mode == SignMode::OneSided {
            let negative = entries.iter().any(|e| e.1 < 0.0)
                || generator.is_some_and(|g| g.first < 0.0 || g.ratio < 0.0);
            if negative {
                return Err(Error::InvalidArgument(
                    "negative weights need a two-sided, tail-balanced law".into(),
                ));
            }
        }
        Ok(Self {
            entries,
            generator,
            delta,
            sign_mode,
        })
    }

    pub fn entries(&self) -> &[(i64, f64)] {
        &self.entries
    }

    pub fn generator(&self) -> Option<&GeometricTail> {
        self.generator.as_ref()
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn sign_mode(&self) -> SignMode {
        self.sign_mode
    }

    pub fn is_finite(&self) -> bool {
        self.generator.is_none()
    }

    /// `Σ |c_i|^δ`, finite by construction.
    pub fn delta_sum(&self) -> f64 {
        let head: f64 = self.entries.iter().map(|e| e.1.abs().powf(self.delta)).sum();
        head + self.generator.map_or(0.0, |g| g.abs_power_sum(self.delta))
    }

    /// Tail-order comparison of the scales `a` and `b`.
    pub fn compare(&self, a: f64, b: f64) -> Precedence {
        let key = |x: f64| match self.sign_mode {
            SignMode::Balanced => x.abs(),
            SignMode::OneSided => x.max(0.0),
        };
        let (ka, kb) = (key(a), key(b));
        if same_level(ka, kb) {
            Precedence::Equivalent
        } else if ka < kb {
            Precedence::Precedes
        } else {
            Precedence::Succeeds
        }
    }

    /// Explicit entries plus generator terms with magnitude at least `floor`.
    pub fn entries_above(&self, floor: f64) -> Vec<(i64, f64)> {
        let cut = floor * (1.0 - LEVEL_TOLERANCE);
        let mut out: Vec<(i64, f64)> = self
            .entries
            .iter()
            .copied()
            .filter(|e| e.1.abs() >= cut)
            .collect();
        if let Some(g) = &self.generator {
            let mut j = g.from_index;
            loop {
                let w = g.weight(j);
                if w.abs() < cut || w == 0.0 {
                    break;
                }
                out.push((j, w));
                j += 1;
            }
        }
        out
    }

    /// All entries with `|j| <= n`.
    pub fn entries_up_to(&self, n: i64) -> Vec<(i64, f64)> {
        let mut out: Vec<(i64, f64)> = self
            .entries
            .iter()
            .copied()
            .filter(|e| e.0.abs() <= n)
            .collect();
        if let Some(g) = &self.generator {
            out.extend((g.from_index.max(-n)..=n).map(|j| (j, g.weight(j))));
        }
        out
    }

    /// The first `max_levels` distinct magnitudes in decreasing order.
    pub fn level_sequence(&self, max_levels: usize) -> Result<Vec<Level>> {
        let mut mags: Vec<f64> = self.entries.iter().map(|e| e.1).collect();
        if let Some(g) = &self.generator {
            let mut j = g.from_index;
            loop {
                mags.push(g.weight(j));
                let w = g.weight(j + 1).abs();
                let levels = group_levels(&mags);
                if w == 0.0
                    || (levels.len() >= max_levels
                        && w < levels[max_levels - 1].magnitude * (1.0 - LEVEL_TOLERANCE))
                {
                    break;
                }
                j += 1;
            }
        }
        let mut levels = group_levels(&mags);
        levels.truncate(max_levels);
        Ok(levels)
    }

    /// Largest magnitude `c_(1)`.
    pub fn top_magnitude(&self) -> f64 {
        let head = self.entries.iter().map(|e| e.1.abs()).fold(0.0, f64::max);
        head.max(self.generator.map_or(0.0, |g| g.first.abs()))
    }

    /// Entries equivalent to `c_(1)`.
    pub fn maximal_entries(&self) -> Vec<(i64, f64)> {
        self.entries_above(self.top_magnitude())
    }

    /// The weight at index `i`, if present.
    pub fn weight(&self, i: i64) -> Option<f64> {
        if let Ok(k) = self.entries.binary_search_by_key(&i, |e| e.0) {
            return Some(self.entries[k].1);
        }
        self.generator
            .filter(|g| i >= g.from_index)
            .map(|g| g.weight(i))
    }

    /// The sequence with entry `i` removed.
    pub fn residual(&self, i: i64) -> Result<Self> {
        if let Ok(k) = self.entries.binary_search_by_key(&i, |e| e.0) {
            let mut out = self.clone();
            out.entries.remove(k);
            return Ok(out);
        }
        match self.generator {
            Some(g) if i >= g.from_index => {
                let mut out = self.clone();
                out.entries
                    .extend((g.from_index..i).map(|j| (j, g.weight(j))));
                out.generator = Some(GeometricTail {
                    first: g.weight(i + 1),
                    ratio: g.ratio,
                    from_index: i + 1,
                });
                Ok(out)
            }
            _ => Err(Error::IndexAbsent(i)),
        }
    }

    /// `Σ_j c_j^n`; may vanish for an empty residual.
    pub fn power_sum(&self, n: u32) -> f64 {
        let head: f64 = self.entries.iter().map(|e| e.1.powi(n as i32)).sum();
        head + self.generator.map_or(0.0, |g| g.power_sum(n))
    }

    /// `Σ_{|j| > n} |c_j|`.
    pub fn abs_tail_sum(&self, n: i64) -> f64 {
        let head: f64 = self
            .entries
            .iter()
            .filter(|e| e.0.abs() > n)
            .map(|e| e.1.abs())
            .sum();
        head + self.generator_tail(n, 1.0)
    }

    /// `Σ_{j > n, j in generator} |c_j|^p`.
    pub fn generator_tail(&self, n: i64, p: f64) -> f64 {
        match &self.generator {
            None => 0.0,
            Some(g) => {
                let start = g.from_index.max(n + 1);
                g.first.abs().powf(p) * g.ratio.abs().powf(p * (start - g.from_index) as f64)
                    / (1.0 - g.ratio.abs().powf(p))
            }
        }
    }

    /// Smallest `N >= 0` with `Σ_{|j| > N} |c_j| < eps`.
    pub fn truncation_index(&self, eps: f64) -> Result<i64> {
        if !(eps > 0.0) {
            return Err(Error::InvalidArgument(format!("eps = {eps} must be positive")));
        }
        let explicit_end = self.entries.iter().map(|e| e.0.abs()).max().unwrap_or(0);
        let gen_start = self.generator.map_or(0, |g| g.from_index - 1);
        for n in 0..=explicit_end.max(gen_start) {
            if self.abs_tail_sum(n) < eps {
                return Ok(n);
            }
        }
        let g = self.generator.expect("finite lists terminate above");
        // |first| r^{N+1-from} / (1 - r) < eps
        let r = g.ratio.abs();
        let x = (eps * (1.0 - r) / g.first.abs()).ln() / r.ln();
        let mut n = (g.from_index - 1 + x.floor() as i64).max(explicit_end.max(gen_start));
        while self.abs_tail_sum(n) >= eps {
            n += 1;
        }
        while n > 0 && self.abs_tail_sum(n - 1) < eps {
            n -= 1;
        }
        Ok(n)
    }
}

fn group_levels(weights: &[f64]) -> Vec<Level> {
    let mut sorted: Vec<f64> = weights.to_vec();
    sorted.sort_by(|a, b| b.abs().total_cmp(&a.abs()));
    let mut levels: Vec<Level> = Vec::new();
    for w in sorted {
        match levels.last_mut() {
            Some(l) if same_level(l.magnitude, w.abs()) => {
                if w > 0.0 {
                    l.nu_plus += 1
                } else {
                    l.nu_minus += 1
                }
            }
            _ => levels.push(Level {
                magnitude: w.abs(),
                nu_plus: usize::from(w > 0.0),
                nu_minus: usize::from(w < 0.0),
            }),
        }
    }
    levels
}

impl Precedence {
    pub fn as_ordering(self) -> Ordering {
        match self {
            Precedence::Precedes => Ordering::Less,
            Precedence::Equivalent => Ordering::Equal,
            Precedence::Succeeds => Ordering::Greater,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn one_sided(ws: &[f64]) -> WeightSequence {
        WeightSequence::from_list(ws, None, 0.5, SignMode::OneSided).unwrap()
    }

    fn halving() -> WeightSequence {
        WeightSequence::from_list(&[1.0], Some(0.5), 0.5, SignMode::OneSided).unwrap()
    }

    #[test]
    fn compare_examples() {
        let s = one_sided(&[1.0]);
        assert_eq!(s.compare(0.5, 1.0), Precedence::Precedes);
        assert_eq!(s.compare(-3.0, 0.0), Precedence::Equivalent);
        let b = WeightSequence::from_list(&[1.0, -1.0], None, 0.5, SignMode::Balanced).unwrap();
        assert_eq!(b.compare(-1.0, 1.0), Precedence::Equivalent);
    }

    #[test]
    fn level_examples() {
        let s = one_sided(&[1.0, 1.0, 0.5, 1.0 / 3.0, 1.0 / 3.0, 0.1]);
        let l = s.level_sequence(3).unwrap();
        let got: Vec<_> = l.iter().map(|l| (l.magnitude, l.nu_plus, l.nu_minus)).collect();
        assert_eq!(got, vec![(1.0, 2, 0), (0.5, 1, 0), (1.0 / 3.0, 2, 0)]);

        let b = WeightSequence::from_list(&[1.0, -1.0, 0.5], None, 0.5, SignMode::Balanced).unwrap();
        let got: Vec<_> = b
            .level_sequence(10)
            .unwrap()
            .iter()
            .map(|l| (l.magnitude, l.nu_plus, l.nu_minus))
            .collect();
        assert_eq!(got, vec![(1.0, 1, 1), (0.5, 1, 0)]);

        let g = halving().level_sequence(6).unwrap();
        for (k, l) in g.iter().enumerate() {
            assert_eq!((l.magnitude, l.nu_plus, l.nu_minus), (0.5f64.powi(k as i32), 1, 0));
        }
    }

    #[test]
    fn residual_examples() {
        let s = one_sided(&[1.0, 0.5, 0.25]);
        assert_eq!(s.residual(1).unwrap().entries(), &[(2, 0.5), (3, 0.25)]);
        let d = one_sided(&[1.0, 1.0, 0.5]);
        let r = d.residual(2).unwrap();
        assert_eq!(r.entries(), &[(1, 1.0), (3, 0.5)]);
        assert_eq!(r.level_sequence(1).unwrap()[0].nu_plus, 1);
        assert_eq!(s.residual(9), Err(Error::IndexAbsent(9)));
    }

    #[test]
    fn residual_inside_generator() {
        let g = halving();
        let r = g.residual(3).unwrap();
        assert_eq!(r.weight(3), None);
        assert_eq!(r.weight(2), Some(0.5));
        assert_eq!(r.weight(4), Some(0.125));
        assert!((r.power_sum(1) - (2.0 - 0.25)).abs() < 1e-15);
    }

    #[test]
    fn truncation_examples() {
        // Σ_{j > N} 2^{-(j-1)} = 2^{1-N} < 1e-6 first at N = 21
        assert_eq!(halving().truncation_index(1e-6).unwrap(), 21);
        assert_eq!(one_sided(&[1.0, 0.5, 0.2]).truncation_index(1e-9).unwrap(), 3);
        assert_eq!(one_sided(&[1.0, 0.5]).truncation_index(10.0).unwrap(), 0);
        assert!(halving().truncation_index(0.0).is_err());
    }

    #[test]
    fn construction_rules() {
        assert!(WeightSequence::from_list(&[1.0, -0.5], None, 0.5, SignMode::OneSided).is_err());
        assert!(WeightSequence::from_list(&[], None, 0.5, SignMode::OneSided).is_err());
        assert!(WeightSequence::from_list(&[1.0], Some(1.0), 0.5, SignMode::OneSided).is_err());
        let z = one_sided(&[1.0, 0.0, 0.5]);
        assert_eq!(z.entries(), &[(1, 1.0), (3, 0.5)]);
        assert!((halving().delta_sum() - 1.0 / (1.0 - 0.5f64.sqrt())).abs() < 1e-12);
    }

    #[test]
    fn power_sums_in_closed_form() {
        let r = halving().residual(1).unwrap();
        assert!((r.power_sum(2) - 1.0 / 3.0).abs() < 1e-15);
        assert!((r.power_sum(4) - 1.0 / 15.0).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn compare_is_total_preorder(a in -5.0f64..5.0, b in -5.0f64..5.0, c in -5.0f64..5.0, balanced: bool) {
            let mode = if balanced { SignMode::Balanced } else { SignMode::OneSided };
            let s = WeightSequence::from_list(&[1.0], None, 0.5, mode).unwrap();
            prop_assert_eq!(s.compare(a, a), Precedence::Equivalent);
            prop_assert_eq!(s.compare(a, b).as_ordering(), s.compare(b, a).as_ordering().reverse());
            if s.compare(a, b) != Precedence::Succeeds && s.compare(b, c) != Precedence::Succeeds {
                prop_assert_ne!(s.compare(a, c), Precedence::Succeeds);
            }
            if balanced {
                prop_assert_eq!(s.compare(a, -a), Precedence::Equivalent);
            }
        }

        #[test]
        fn residual_lowers_one_multiplicity(ws in proptest::collection::vec(1u8..5, 1..8), pick in 0usize..8) {
            let weights: Vec<f64> = ws.iter().map(|&w| 1.0 / w as f64).collect();
            let s = one_sided(&weights);
            let i = (pick % weights.len()) as i64 + 1;
            let before = s.level_sequence(usize::MAX).unwrap();
            let after = s.residual(i).unwrap().level_sequence(usize::MAX).unwrap();
            let removed = weights[i as usize - 1];
            for l in &before {
                let now = after.iter().find(|m| m.magnitude == l.magnitude).map_or(0, |m| m.nu_plus);
                let drop = usize::from(l.magnitude == removed);
                prop_assert_eq!(now, l.nu_plus - drop);
            }
        }
    }
}
