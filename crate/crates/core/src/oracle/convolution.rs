//! Numerical convolution of tails by adaptive quadrature.
//!
//! Stieltjes integrals `∫ g(y) dK(y)` are computed in probability space:
//! the lower half of `K` through `y = K^{-1}(u)` and the upper half through
//! `y = K̄^{-1}(e^{-w})`, which keeps tail mass resolvable far below machine
//! epsilon and handles atoms without special cases.

use super::{OracleEstimate, OracleMethod};
use crate::distribution::{Law, Scaled, TailDistribution};
use crate::error::{Error, Result};
use crate::quad::{integrate, Estimate, QuadOptions};
use crate::weights::WeightSequence;

/// Largest number of factors accepted by [`convolve_quadrature`].
pub const MAX_FACTORS: usize = 4;

/// `-ln` of the smallest positive double, rounded.
const W_MAX: f64 = 745.0;

/// Tighter tolerance used one recursion level down.
const LEVEL_FACTOR: f64 = 0.1;

fn options(rel_tol: f64, scale: f64) -> QuadOptions {
    QuadOptions {
        max_intervals: 2000,
        ..QuadOptions::relative(rel_tol).with_abs(1e-3 * rel_tol * scale)
    }
}

/// `∫_{lo < y <= hi} g(y) dK(y)`.
fn stieltjes<G>(k: &dyn Law, lo: f64, hi: f64, g: G, opts: QuadOptions) -> Result<Estimate>
where
    G: Fn(f64) -> Result<f64>,
{
    if !(lo < hi) {
        return Ok(Estimate::ZERO);
    }
    let failure = std::cell::RefCell::new(None);
    let eval = |y: f64| -> f64 {
        if y <= lo || y > hi {
            return 0.0;
        }
        match g(y) {
            Ok(v) => v,
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                0.0
            }
        }
    };
    let mut acc = Estimate::ZERO;

    let u_lo = if lo == f64::NEG_INFINITY { 0.0 } else { k.cdf(lo) };
    let u_hi = if hi == f64::INFINITY { 1.0 } else { k.cdf(hi) }.min(0.5);
    if u_lo < u_hi {
        acc = acc + integrate(|u| eval(k.quantile(u)), u_lo, u_hi, opts)?;
    }

    let v_hi = if lo == f64::NEG_INFINITY { 1.0 } else { k.sf(lo) }.min(0.5);
    let v_lo = if hi == f64::INFINITY { 0.0 } else { k.sf(hi) };
    if v_lo < v_hi {
        let w_a = -v_hi.ln();
        let w_b = if v_lo > 0.0 { (-v_lo.ln()).min(W_MAX) } else { W_MAX };
        let mut points = vec![w_a];
        let mut w = (2.0 * w_a).max(1.0);
        while w < w_b {
            points.push(w);
            w *= 2.0;
        }
        points.push(w_b);
        for p in points.windows(2) {
            let f = |w: f64| {
                let weight = (-w).exp();
                if weight == 0.0 {
                    0.0
                } else {
                    eval(k.isf(weight)) * weight
                }
            };
            acc = acc + integrate(f, p[0], p[1], opts)?;
        }
    }
    match failure.into_inner() {
        Some(e) => Err(e),
        None => Ok(acc),
    }
}

/// `P(H + K > t)` for independent `H`, `K`, via
/// `T_K H̄(t) + T_H K̄(t) + H̄(t/2) K̄(t/2)` with
/// `T_K f(t) = ∫_{y <= t/2} f(t - y) dK(y)`.
pub fn convolve_pair(h: &dyn Law, k: &dyn Law, t: f64, rel_tol: f64) -> Result<Estimate> {
    let half = 0.5 * t;
    let opts = options(rel_tol, h.sf(t).max(k.sf(t)));
    let tk = stieltjes(k, f64::NEG_INFINITY, half, |y| Ok(h.sf(t - y)), opts)?;
    let th = stieltjes(h, f64::NEG_INFINITY, half, |y| Ok(k.sf(t - y)), opts)?;
    let product = h.sf(half) * k.sf(half);
    Ok(tk + th + Estimate { value: product, error: 0.0 })
}

/// `P(H + K > t) = ∫ H̄(t - y) dK(y)` with breakpoints at `t/2` and `t`,
/// without the symmetric split; a cross-check for [`convolve_pair`].
pub fn convolve_direct(h: &dyn Law, k: &dyn Law, t: f64, rel_tol: f64) -> Result<Estimate> {
    let opts = options(rel_tol, h.sf(t).max(k.sf(t)));
    let g = |y: f64| Ok(h.sf(t - y));
    let half = 0.5 * t;
    let (a, b) = if half < t { (half, t) } else { (t, half) };
    Ok(stieltjes(k, f64::NEG_INFINITY, a, g, opts)?
        + stieltjes(k, a, b, g, opts)?
        + stieltjes(k, b, f64::INFINITY, g, opts)?)
}

/// `P(Σ Y_i > t)` for independent `Y_i` with the given laws, at most
/// [`MAX_FACTORS`] of them.
///
/// Factors are folded from the left; each composite level integrates the
/// last factor against the tail of the partial sum, evaluated recursively
/// at a tenfold tighter tolerance.
pub fn convolve_quadrature(factors: &[&dyn Law], t: f64, rel_tol: f64) -> Result<Estimate> {
    match factors.len() {
        0 => Err(Error::EmptySequence),
        n if n > MAX_FACTORS => Err(Error::OutOfScope(format!(
            "quadrature convolution supports at most {MAX_FACTORS} factors, got {n}"
        ))),
        _ => partial_sf(factors, t, rel_tol),
    }
}

fn partial_sf(factors: &[&dyn Law], t: f64, rel_tol: f64) -> Result<Estimate> {
    match factors {
        [single] => Ok(Estimate { value: single.sf(t), error: 0.0 }),
        [h, k] => convolve_pair(*h, *k, t, rel_tol),
        [rest @ .., k] => {
            let inner = rel_tol * LEVEL_FACTOR;
            let scale = factors.iter().map(|f| f.sf(t)).fold(0.0, f64::max)
                * 0.5f64.powi(factors.len() as i32 - 1);
            let opts = options(rel_tol, scale);
            let g = |y: f64| partial_sf(rest, t - y, inner).map(|e| e.value);
            let half = 0.5 * t;
            Ok(stieltjes(*k, f64::NEG_INFINITY, half, g, opts)?
                + stieltjes(*k, half, f64::INFINITY, g, opts)?)
        }
        [] => Err(Error::EmptySequence),
    }
}

/// Quadrature oracle for a finite sequence with at most [`MAX_FACTORS`]
/// nonzero weights.
pub fn quadrature_oracle(
    dist: &TailDistribution,
    seq: &WeightSequence,
    t: f64,
    rel_tol: f64,
) -> Result<OracleEstimate> {
    if !seq.is_finite() {
        return Err(Error::OutOfScope(
            "quadrature oracle needs a finite weight list".into(),
        ));
    }
    let scaled: Vec<Scaled<TailDistribution>> = seq
        .entries()
        .iter()
        .map(|&(_, c)| {
            dist.scaled_model(c, t)?;
            Ok(Scaled { law: dist, c })
        })
        .collect::<Result<_>>()?;
    let factors: Vec<&dyn Law> = scaled.iter().map(|s| s as &dyn Law).collect();
    let est = convolve_quadrature(&factors, t, rel_tol)?;
    Ok(OracleEstimate {
        t,
        p_hat: est.value,
        std_err: 0.0,
        quadrature_error: est.error,
        n_samples: 0,
        truncation_n: seq.entries().iter().map(|e| e.0.abs()).max().unwrap_or(0),
        truncation_bias_bound: 0.0,
        seed: 0,
        method: OracleMethod::Quadrature,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distribution::PointMass;
    use crate::hazard::Family;

    fn weibull(a: f64) -> TailDistribution {
        TailDistribution::builtin(Family::Weibull { shape: a }, 2.0).unwrap()
    }

    struct Exp;

    impl Law for Exp {
        fn sf(&self, x: f64) -> f64 {
            if x <= 0.0 {
                1.0
            } else {
                (-x).exp()
            }
        }
        fn cdf(&self, x: f64) -> f64 {
            if x <= 0.0 {
                0.0
            } else {
                -(-x).exp_m1()
            }
        }
        fn quantile(&self, u: f64) -> f64 {
            -(-u).ln_1p()
        }
        fn isf(&self, v: f64) -> f64 {
            -v.ln()
        }
    }

    fn close(a: f64, b: f64, rel: f64) -> bool {
        (a - b).abs() <= rel * b.abs()
    }

    #[test]
    fn point_mass_is_unit() {
        let f = weibull(0.5);
        for t in [3.0, 50.0, 1e4] {
            let left = convolve_pair(&f, &PointMass, t, 1e-10).unwrap().value;
            let right = convolve_pair(&PointMass, &f, t, 1e-10).unwrap().value;
            assert!(close(left, f.sf(t), 1e-9), "{left} vs {}", f.sf(t));
            assert!(close(right, f.sf(t), 1e-9));
        }
    }

    #[test]
    fn commutative() {
        let f = weibull(0.4);
        let g = Scaled { law: &f, c: 0.5 };
        for t in [10.0, 1e3, 1e5] {
            let a = convolve_pair(&f, &g, t, 1e-11).unwrap().value;
            let b = convolve_pair(&g, &f, t, 1e-11).unwrap().value;
            assert!(close(a, b, 1e-10), "{a} vs {b}");
        }
    }

    #[test]
    fn pair_matches_direct() {
        let f = weibull(0.4).symmetric().unwrap();
        let g = Scaled { law: &f, c: -0.7 };
        for t in [5.0, 300.0, 2e4] {
            let tol = 1e-9;
            let a = convolve_pair(&f, &g, t, tol).unwrap().value;
            let b = convolve_direct(&f, &g, t, tol).unwrap().value;
            assert!(close(a, b, 2.0 * tol), "{a} vs {b}");
        }
    }

    #[test]
    fn exponential_pair_is_gamma() {
        let f = Exp;
        for t in [0.5, 5.0, 40.0] {
            let got = convolve_pair(&f, &f, t, 1e-12).unwrap().value;
            let exact = (1.0 + t) * (-t).exp();
            assert!(close(got, exact, 1e-10), "{got} vs {exact}");
        }
    }

    #[test]
    fn three_factor_recursion_matches_closed_form() {
        let f = Exp;
        let factors: Vec<&dyn Law> = vec![&f, &f, &f];
        for t in [1.0, 12.0] {
            let got = convolve_quadrature(&factors, t, 1e-7).unwrap().value;
            let exact = (1.0 + t + 0.5 * t * t) * (-t).exp();
            assert!(close(got, exact, 1e-6), "{got} vs {exact}");
        }
    }

    #[test]
    fn self_convolution_ratio_approaches_two() {
        let f = weibull(0.3);
        let ratio = |t: f64| convolve_pair(&f, &f, t, 1e-9).unwrap().value / f.sf(t);
        let (a, b) = (ratio(1e4), ratio(1e8));
        assert!(a > b && b > 2.0 && b < 2.1, "{a} {b}");
    }

    #[test]
    fn too_many_factors() {
        let f = weibull(0.5);
        let factors: Vec<&dyn Law> = vec![&f; 5];
        assert!(matches!(
            convolve_quadrature(&factors, 10.0, 1e-6),
            Err(Error::OutOfScope(_))
        ));
    }
}
