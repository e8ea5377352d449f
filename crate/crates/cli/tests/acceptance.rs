//! Acceptance criteria, one PASS/FAIL line each.

use std::path::Path;
use std::time::{Duration, Instant};

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use subexp_cli::{run, Command, RunOptions};
use subexp_core::{
    character_from_moments, compose, conditional_mc, convolve_moments, convolve_pair, evaluate, expand,
    expand_case_a, expand_case_b, expand_case_c, leading_terms, quadrature_oracle, residual_moments,
    survival_polynomial, Family, HazardModel, LaplaceCharacter, Law, McOptions, MomentVector, PowerLog,
    RvMetadata, SignMode, SurvivalComponent, TailDistribution, WeightSequence,
};

type Outcome = Result<String, String>;

fn check(ok: bool, detail: impl Into<String>) -> Outcome {
    if ok {
        Ok(detail.into())
    } else {
        Err(detail.into())
    }
}

fn within(limit: Duration, start: Instant) -> Result<(), String> {
    let took = start.elapsed();
    if took <= limit {
        Ok(())
    } else {
        Err(format!("runtime {took:?} exceeds {limit:?}"))
    }
}

fn geometric(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| lo * (hi / lo).powf(i as f64 / (n - 1) as f64))
        .collect()
}

fn weibull(a: f64) -> TailDistribution {
    TailDistribution::builtin(Family::Weibull { shape: a }, 2.0).unwrap()
}

fn list(ws: &[f64]) -> WeightSequence {
    WeightSequence::from_list(ws, None, 0.5, SignMode::OneSided).unwrap()
}

fn uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64
}

fn max_gap(a: &LaplaceCharacter, b: &LaplaceCharacter) -> f64 {
    a.coeffs()
        .iter()
        .zip(b.coeffs())
        .map(|(x, y)| (x - y).abs() / (1.0 + y.abs()))
        .fold(0.0, f64::max)
}

fn laplace_morphism() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst = 0.0f64;
    for _ in 0..200 {
        let m = 1 + (rng.next_u64() % 8) as usize;
        let mut draw = || {
            let mut v = vec![1.0];
            v.extend((0..m).map(|_| uniform(&mut rng, -2.0, 2.0)));
            MomentVector::new(v).unwrap()
        };
        let (a, b, c) = (draw(), draw(), draw());
        let ch = |mv: &MomentVector| character_from_moments(mv, m).unwrap();
        let (la, lb, lc) = (ch(&a), ch(&b), ch(&c));
        let morph = ch(&convolve_moments(&a, &b).map_err(|e| e.to_string())?);
        let ab = compose(&la, &lb).unwrap();
        worst = worst
            .max(max_gap(&ab, &morph))
            .max(max_gap(&ab, &compose(&lb, &la).unwrap()))
            .max(max_gap(
                &compose(&ab, &lc).unwrap(),
                &compose(&la, &compose(&lb, &lc).unwrap()).unwrap(),
            ));
    }
    within(Duration::from_secs(1), start)?;
    check(worst <= 1e-12, format!("max scaled gap {worst:.2e} over 200 draws"))
}

/// `Σ c (log t)^p t^q` as `(c, p, q)` triples, differentiated by hand rules.
fn hand_derivative(terms: &[(f64, f64, f64)]) -> Vec<(f64, f64, f64)> {
    let mut out = Vec::new();
    for &(c, p, q) in terms {
        if p != 0.0 {
            out.push((c * p, p - 1.0, q - 1.0));
        }
        if q != 0.0 {
            out.push((c * q, p, q - 1.0));
        }
    }
    out
}

fn hand_eval(terms: &[(f64, f64, f64)], t: f64) -> f64 {
    terms.iter().map(|&(c, p, q)| c * t.ln().powf(p) * t.powf(q)).sum()
}

fn derivative_engine() -> Outcome {
    let start = Instant::now();
    let cases = [
        (Family::Weibull { shape: 0.4 }, 2.0, vec![(0.4, 0.0, -0.6)]),
        (Family::LogWeibull { shape: 1.5 }, 3.0, vec![(1.5, 0.5, -1.0)]),
        (Family::LogNormal2 { theta: 0.5 }, 3.0, vec![(1.0, 1.0, -1.0)]),
    ];
    let mut worst_closed = 0.0f64;
    let mut worst_fd = 0.0f64;
    for (family, t0, h) in cases {
        let model = HazardModel::builtin(family, t0).unwrap();
        let mut series = vec![h];
        for _ in 0..3 {
            series.push(hand_derivative(series.last().unwrap()));
        }
        for t in [20.0, 1e3, 1e5] {
            let s = model.survival(t).unwrap();
            let d: Vec<f64> = series.iter().map(|x| hand_eval(x, t)).collect();
            let (h, h1, h2, h3) = (d[0], d[1], d[2], d[3]);
            let closed = [
                -h * s,
                (-h1 + h * h) * s,
                (-h2 + 3.0 * h1 * h - h.powi(3)) * s,
                (-h3 + 4.0 * h * h2 + 3.0 * h1 * h1 - 6.0 * h * h * h1 + h.powi(4)) * s,
            ];
            for (i, want) in closed.iter().enumerate() {
                let got = model.survival_derivative(i + 1, t).unwrap();
                worst_closed = worst_closed.max((got / want - 1.0).abs());
            }
            let step = 1e-3 * t;
            for k in 1..=4 {
                let f = |x: f64| model.survival_derivative(k - 1, x).unwrap();
                let fd = (8.0 * (f(t + step) - f(t - step)) - (f(t + 2.0 * step) - f(t - 2.0 * step)))
                    / (12.0 * step);
                worst_fd = worst_fd.max((model.survival_derivative(k, t).unwrap() / fd - 1.0).abs());
            }
        }
        let grid: Vec<f64> = (2..=8).map(|e| 10f64.powi(e)).collect();
        for k in 2..=4usize {
            let gap: Vec<f64> = grid
                .iter()
                .map(|&t| {
                    let d = model.hazard_derivatives(t, k).unwrap();
                    (survival_polynomial(k).eval(&d) / (-d[0]).powi(k as i32) - 1.0).abs()
                })
                .collect();
            if gap.windows(2).any(|w| w[1] >= w[0]) {
                return Err(format!("{family:?} k={k}: ratio gap not decreasing {gap:?}"));
            }
        }
    }
    within(Duration::from_secs(5), start)?;
    check(
        worst_closed <= 1e-10 && worst_fd <= 1e-6,
        format!("closed-form rel {worst_closed:.1e}, finite-difference rel {worst_fd:.1e}, trend decreasing"),
    )
}

fn multinomial_moment(weights: &[f64], base: &[f64], n: usize) -> f64 {
    let binom = |n: usize, k: usize| (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64);
    match weights {
        [] => f64::from(u8::from(n == 0)),
        [c, rest @ ..] => (0..=n)
            .map(|k| binom(n, k) * c.powi(k as i32) * base[k] * multinomial_moment(rest, base, n - k))
            .sum(),
    }
}

fn halving_generator_identities() -> Outcome {
    let d = weibull(0.5).symmetric().unwrap();
    let seq = WeightSequence::from_list(&[1.0], Some(0.5), 0.5, SignMode::Balanced).unwrap();
    let mu = residual_moments(&d, &seq, 1, 4).map_err(|e| e.to_string())?;
    let (m2, m4) = (d.moment(2).unwrap(), d.moment(4).unwrap());
    let (c2, c4) = (1.0 / 3.0, 1.0 / 15.0);
    let want4 = 3.0 * (c2 * c2 - c4) * m2 * m2 + c4 * m4;
    let geo = ((mu.get(2) - c2 * m2) / (c2 * m2)).abs().max(((mu.get(4) - want4) / want4).abs());

    let base: Vec<f64> = (0..=4).map(|i| d.moment(i).unwrap()).collect();
    let trunc = [1.0, 0.5, 0.25, 0.125];
    let seq4 = WeightSequence::from_list(&trunc, None, 0.5, SignMode::Balanced).unwrap();
    let mu4 = residual_moments(&d, &seq4, 1, 4).map_err(|e| e.to_string())?;
    let brute = (0..=4)
        .map(|n| {
            let want = multinomial_moment(&trunc[1..], &base, n);
            (mu4.get(n) - want).abs() / want.abs().max(1.0)
        })
        .fold(0.0, f64::max);
    check(
        geo <= 1e-10 && brute <= 1e-10,
        format!("geometric-sum rel {geo:.1e}, multinomial rel {brute:.1e}"),
    )
}

fn logarithmic_gate() -> Outcome {
    let d = TailDistribution::builtin(Family::LogNormal2 { theta: 0.5 }, 2.0).unwrap();
    let set = |terms: &[subexp_core::ExpansionTerm]| -> Vec<(f64, usize)> {
        terms.iter().map(|t| (t.scale, t.derivative_index)).collect()
    };
    let case1 = expand_case_b(&d, &list(&[1.0, 0.3]), 1).map_err(|e| e.to_string())?;
    let mu1 = d.moment(1).unwrap();
    let coeff_ok = case1.terms.len() == 2 && (case1.terms[1].coefficient + 0.3 * mu1).abs() <= 1e-12 * mu1;
    let case2 = expand_case_b(&d, &list(&[1.0, 0.5]), 1).map_err(|e| e.to_string())?;
    let two = leading_terms(&case2, 2);
    let b = (-1.0f64).exp();
    let edge = expand_case_b(&d, &list(&[1.0, b]), 1).map_err(|e| e.to_string())?;
    let boundary = edge.terms.iter().find(|t| t.scale == b).map(|t| t.operator_order);
    check(
        set(&case1.terms) == vec![(1.0, 0), (1.0, 1)]
            && coeff_ok
            && set(&two) == vec![(1.0, 0), (0.5, 0)]
            && boundary == Some(0),
        format!(
            "case 1 {:?}, case 2 {:?}, boundary operator order {boundary:?}",
            set(&case1.terms),
            set(&two)
        ),
    )
}

fn survival_difference_cancellation() -> Outcome {
    let e = PowerLog::monomial(1.0, 0.0, 1.5);
    let comps = vec![
        SurvivalComponent {
            weight: 1.0,
            scale: 1.0,
            exponent: e.clone(),
        },
        SurvivalComponent {
            weight: -1.0,
            scale: 2.0,
            exponent: e,
        },
    ];
    let meta = RvMetadata {
        rv_index: -1.0,
        log_exponent: 0.5,
        lambda_coeff: None,
    };
    let tail = HazardModel::from_survival(comps, 2.0, meta, 4).map_err(|e| e.to_string())?;
    let d = TailDistribution::custom(tail, 1.0).map_err(|e| e.to_string())?;
    let exp = expand_case_a(&d, &list(&[1.0, 0.5]), 2).map_err(|e| e.to_string())?;
    let e1 = |t: f64| (-t.ln().powf(1.5)).exp();
    let grid = geometric(1e9, 1e15, 7);
    let table = evaluate(&exp, &d, &grid);
    let mut worst = 0.0f64;
    let mut ratios = Vec::new();
    for row in &table.rows {
        let total = row.total.ok_or_else(|| format!("t={}: {:?}", row.t, row.error))?;
        worst = worst.max((total / (e1(row.t) - e1(4.0 * row.t)) - 1.0).abs());
        ratios.push((total - e1(row.t)).abs() / d.sf(2.0 * row.t));
    }
    let flagged = table.rows.iter().all(|r| r.cancellation);
    let decreasing = ratios.windows(2).all(|w| w[1] < w[0]);
    check(
        worst <= 1e-12 && flagged && decreasing,
        format!(
            "closed-form rel {worst:.1e}, flag on all rows {flagged}, residual ratio {:.2e} -> {:.2e}",
            ratios[0],
            ratios[ratios.len() - 1]
        ),
    )
}

fn oracle_cross_validation() -> Outcome {
    let start = Instant::now();
    let d = weibull(0.4);
    let seq = list(&[1.0, 0.5]);
    let mut worst = 0.0f64;
    for t in geometric(150.0, 600.0, 5) {
        let q = quadrature_oracle(&d, &seq, t, 1e-9).map_err(|e| e.to_string())?;
        if !(1e-6..=1e-3).contains(&q.p_hat) {
            return Err(format!("t={t}: quadrature value {} outside the window", q.p_hat));
        }
        let mc = conditional_mc(&d, &seq, t, 1_000_000, 2024, McOptions::default()).map_err(|e| e.to_string())?;
        let band = 3.0 * mc.std_err + mc.truncation_bias_bound;
        worst = worst.max((mc.p_hat - q.p_hat).abs() / band);
    }
    within(Duration::from_secs(60), start)?;
    check(worst <= 1.0, format!("max |mc - quad| / (3 se + bias) = {worst:.2}"))
}

fn expansion_improvement() -> Outcome {
    let start = Instant::now();
    let d = weibull(0.4);
    let seq = list(&[1.0, 0.5]);
    let grid = geometric(1e4, 3e4, 5);
    let tables: Vec<_> = [0usize, 2]
        .iter()
        .map(|&m| expand_case_c(&d, &seq, m).map(|e| evaluate(&e, &d, &grid)))
        .collect::<Result<_, _>>()
        .map_err(|e| e.to_string())?;
    let mut worst_ratio = 0.0f64;
    let mut improved = true;
    for (i, &t) in grid.iter().enumerate() {
        let o = conditional_mc(&d, &seq, t, 10_000_000, 7, McOptions::default()).map_err(|e| e.to_string())?;
        let dev = |k: usize| (o.p_hat - tables[k].rows[i].total.unwrap()).abs();
        for k in 0..2 {
            worst_ratio = worst_ratio.max(dev(k) / tables[k].rows[i].benchmark.unwrap());
        }
        improved &= dev(1) < dev(0);
    }
    within(Duration::from_secs(600), start)?;
    check(
        worst_ratio <= 10.0 && improved,
        format!("max |dev|/benchmark {worst_ratio:.2}, m=2 beats m=0 pointwise {improved}"),
    )
}

fn multiplicity() -> Outcome {
    let d = weibull(0.4);
    let seq = list(&[1.0, 1.0, 0.5]);
    let exp = expand(&d, &seq, 0, None).map_err(|e| e.to_string())?;
    let lead = exp.terms.first().map(|t| t.coefficient);
    let t = 1e4;
    let o = conditional_mc(&d, &seq, t, 1_000_000, 3, McOptions::default()).map_err(|e| e.to_string())?;
    let ratio = o.p_hat / (2.0 * d.sf(t));
    check(
        lead == Some(2.0) && (0.8..=1.2).contains(&ratio),
        format!("leading coefficient {lead:?}, oracle / 2F(t) = {ratio:.4} at t = {t:e}"),
    )
}

fn subexponential_witness() -> Outcome {
    let cases = [
        (Family::Weibull { shape: 0.4 }, 2.0, geometric(1e3, 1e7, 5)),
        (Family::LogWeibull { shape: 1.5 }, 3.0, geometric(1e3, 1e12, 7)),
        (Family::LogNormal2 { theta: 0.5 }, 3.0, geometric(1e3, 1e12, 7)),
    ];
    let mut lasts = Vec::new();
    for (family, t0, grid) in cases {
        let f = TailDistribution::builtin(family, t0).unwrap();
        let ratios: Vec<f64> = grid
            .iter()
            .map(|&t| convolve_pair(&f, &f, t, 1e-9).map(|e| e.value / f.sf(t)))
            .collect::<Result<_, _>>()
            .map_err(|e| e.to_string())?;
        let last = ratios[ratios.len() - 1];
        let trend = ratios.windows(2).all(|w| (w[1] - 2.0).abs() < (w[0] - 2.0).abs());
        if !((1.9..=2.1).contains(&last) && trend) {
            return Err(format!("{family:?}: {ratios:?}"));
        }
        lasts.push(format!("{last:.4}"));
    }
    Ok(format!("final ratios {}", lasts.join(", ")))
}

fn cli_round_trip() -> Outcome {
    let examples = Path::new(env!("CARGO_MANIFEST_DIR")).join("examples");
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let names = [
        "example1",
        "example2_case1",
        "example2_case2",
        "example3",
        "example4",
        "example5",
    ];
    for name in names {
        let run_into = |sub: &str, config: Option<&Path>, report: Option<&Path>, cmd: Command| {
            let out = dir.path().join(name).join(sub);
            let opts = RunOptions {
                config: config.map(Path::to_path_buf),
                report: report.map(Path::to_path_buf),
                out: out.clone(),
                ..RunOptions::default()
            };
            run(cmd, &opts).map(|_| out).map_err(|e| format!("{name}: {e}"))
        };
        let config = examples.join(format!("{name}.json"));
        let a = run_into("a", Some(&config), None, Command::Report)?;
        let b = run_into("b", Some(&config), None, Command::Report)?;
        for csv in ["comparison.csv", "evaluation.csv"] {
            if std::fs::read(a.join(csv)).ok() != std::fs::read(b.join(csv)).ok() {
                return Err(format!("{name}: {csv} differs between runs"));
            }
        }
        let again = run_into("c", None, Some(&a.join("report.json")), Command::Evaluate)?;
        if std::fs::read(a.join("evaluation.csv")).ok() != std::fs::read(again.join("evaluation.csv")).ok() {
            return Err(format!("{name}: re-ingested evaluation differs"));
        }
    }
    Ok(format!("{} shipped configs reproduced byte for byte", names.len()))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("Laplace morphism", laplace_morphism),
        ("derivative engine", derivative_engine),
        ("residual moment identities", halving_generator_identities),
        ("logarithmic regime gate", logarithmic_gate),
        ("survival difference cancellation", survival_difference_cancellation),
        ("oracle cross-validation", oracle_cross_validation),
        ("expansion improves with order", expansion_improvement),
        ("leading multiplicity", multiplicity),
        ("subexponentiality witness", subexponential_witness),
        ("CLI determinism and round trip", cli_round_trip),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = f();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS {:>2} {name}: {detail} ({secs:.1} s)", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {detail} ({secs:.1} s)", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
