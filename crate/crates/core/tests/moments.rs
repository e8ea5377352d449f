//! Residual moments against geometric-sum and multinomial oracles.

use subexp_core::{residual_moments, Family, SignMode, TailDistribution, WeightSequence};

fn symmetric() -> TailDistribution {
    TailDistribution::builtin(Family::Weibull { shape: 0.5 }, 2.0)
        .unwrap()
        .symmetric()
        .unwrap()
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * b.abs().max(1.0)
}

#[test]
fn halving_weights_residual_moments() {
    let d = symmetric();
    let seq = WeightSequence::from_list(&[1.0], Some(0.5), 0.5, SignMode::Balanced).unwrap();
    let mu = residual_moments(&d, &seq, 1, 4).unwrap();
    let (m2, m4) = (d.moment(2).unwrap(), d.moment(4).unwrap());
    let (c2, c4) = (1.0 / 3.0, 1.0 / 15.0);
    assert!(close(mu.get(1), 0.0, 1e-10));
    assert!(close(mu.get(3), 0.0, 1e-10));
    assert!(close(mu.get(2), c2 * m2, 1e-10), "{} vs {}", mu.get(2), c2 * m2);
    let want = 3.0 * (c2 * c2 - c4) * m2 * m2 + c4 * m4;
    assert!(close(mu.get(4), want, 1e-10), "{} vs {want}", mu.get(4));
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// `E[(Σ c_j X_j)^n]` by expanding the power over all exponent tuples.
fn multinomial_moment(weights: &[f64], base: &[f64], n: usize) -> f64 {
    match weights {
        [] => f64::from(u8::from(n == 0)),
        [c, rest @ ..] => (0..=n)
            .map(|k| binomial(n, k) * c.powi(k as i32) * base[k] * multinomial_moment(rest, base, n - k))
            .sum(),
    }
}

#[test]
fn truncated_residuals_match_multinomial_expansion() {
    for d in [symmetric(), TailDistribution::builtin(Family::Weibull { shape: 0.5 }, 2.0).unwrap()] {
        let base: Vec<f64> = (0..=6).map(|i| d.moment(i).unwrap()).collect();
        let weights = [1.0, 0.5, 0.25, 0.125];
        let mode = if d.is_symmetric() { SignMode::Balanced } else { SignMode::OneSided };
        let seq = WeightSequence::from_list(&weights, None, 0.5, mode).unwrap();
        for i in 1..=4 {
            let rest: Vec<f64> = weights
                .iter()
                .enumerate()
                .filter(|&(j, _)| j as i64 + 1 != i)
                .map(|(_, &c)| c)
                .collect();
            let mu = residual_moments(&d, &seq, i, 6).unwrap();
            for n in 0..=6 {
                let want = multinomial_moment(&rest, &base, n);
                assert!(close(mu.get(n), want, 1e-10), "i={i} n={n}: {} vs {want}", mu.get(n));
            }
        }
    }
}

#[test]
fn builtin_moments_match_special_functions() {
    use statrs::function::{erf::erf, gamma::gamma};
    for a in [0.35, 0.7] {
        let d = TailDistribution::builtin(Family::Weibull { shape: a }, 2.0).unwrap();
        for i in 1..=4 {
            let want = gamma(1.0 + i as f64 / a);
            assert!(close(d.moment(i).unwrap(), want, 1e-9), "a={a} i={i}");
        }
    }
    // log Y has survival exp(-θ z^2) on z >= 0
    for theta in [0.5, 1.5] {
        let d = TailDistribution::builtin(Family::LogNormal2 { theta }, 2.0).unwrap();
        for i in 1..=4 {
            let x = i as f64;
            let want = 1.0
                + x * (x * x / (4.0 * theta)).exp()
                    * 0.5
                    * (std::f64::consts::PI / theta).sqrt()
                    * (1.0 + erf(x / (2.0 * theta.sqrt())));
            assert!(close(d.moment(i).unwrap(), want, 1e-9), "theta={theta} i={i}");
        }
    }
}
