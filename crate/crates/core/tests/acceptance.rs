//! Acceptance suite: one PASS/FAIL line per criterion.

mod common;

use std::time::Instant;

use common::{c, fixture, random_gammas, random_model, random_nonperiodic, with_periodic, PERIODS};
use expsum::fourier::confluent_params;
use expsum::recovery::parameter_sensitivity;
use expsum::{
    aaa_fit, coeff_model, coeff_quadrature_oracle, gammas_from_A, gammas_from_Astar, poles, recover,
    recover_real_proper, Complex64, Error, ExpTerm, ExponentialSumModel, FourierDataset, RecoveryMode,
    RecoveryOptions, RecoveryReport,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome { passed, detail: detail.into() }
}

fn dataset(model: &ExponentialSumModel, period: f64, lo: i64, hi: i64) -> FourierDataset {
    FourierDataset::from_model(model, period, lo..=hi).unwrap()
}

fn errors(report: &RecoveryReport) -> (f64, f64) {
    let d = report.reference_distance.expect("reference supplied");
    if d.matched {
        (d.freq_err, d.coef_err)
    } else {
        (f64::INFINITY, f64::INFINITY)
    }
}

fn degrees(model: &ExponentialSumModel) -> Vec<usize> {
    model.terms.iter().map(ExpTerm::degree).collect()
}

fn criterion_y2() -> Outcome {
    let model = fixture("y2");
    let start = Instant::now();
    let ds = dataset(&model, 3.0, 1, 40);
    let rep = match recover_real_proper(&ds, &RecoveryOptions::default(), Some(&model)) {
        Ok(r) => r,
        Err(e) => return outcome(false, format!("recovery failed: {e}")),
    };
    let elapsed = start.elapsed().as_secs_f64();
    let (fe, ce) = errors(&rep);
    let support: Vec<i64> = rep.aaa.support_indices.iter().map(|&i| ds.entries[i].0).collect();
    outcome(
        fe <= 1e-8 && ce <= 1e-8 && rep.aaa.iterations == 5 && rep.aaa.final_residual <= 1e-13 && elapsed < 1.0,
        format!(
            "alpha err {fe:.2e}, gamma err {ce:.2e}, {} iterations, residual {:.2e}, support k {support:?}, {elapsed:.3} s",
            rep.aaa.iterations, rep.aaa.final_residual
        ),
    )
}

fn criterion_y1() -> Outcome {
    let model = fixture("y1");
    let ds = dataset(&model, 6.0, -29, 29);
    let rep = match recover(&ds, &RecoveryOptions::default(), Some(&model)) {
        Ok(r) => r,
        Err(e) => return outcome(false, format!("recovery failed: {e}")),
    };
    let (fe, ce) = errors(&rep);
    let support: Vec<i64> = rep.aaa.support_indices.iter().map(|&i| ds.entries[i].0).collect();
    outcome(
        rep.sigma == [-12] && fe <= 1e-9 && ce <= 1e-9,
        format!(
            "sigma {:?}, freq err {fe:.2e}, coef err {ce:.2e}, {} iterations, residual {:.2e}, support k {support:?}",
            rep.sigma, rep.aaa.iterations, rep.aaa.final_residual
        ),
    )
}

fn criterion_y3() -> Outcome {
    let model = fixture("y3");
    let ds = dataset(&model, 8.0, -29, 29);
    let opts = RecoveryOptions { merge_tol: 0.01, mode: RecoveryMode::Extended, ..Default::default() };
    let rep = match recover(&ds, &opts, Some(&model)) {
        Ok(r) => r,
        Err(e) => return outcome(false, format!("recovery failed: {e}")),
    };
    let (fe, ce) = errors(&rep);
    let mut counts: Vec<usize> = rep.clusters.clusters.iter().map(|c| c.count).collect();
    counts.sort_unstable_by(|a, b| b.cmp(a));
    let support: Vec<i64> = rep.aaa.support_indices.iter().map(|&i| ds.entries[i].0).collect();
    outcome(
        rep.aaa.iterations == 6 && rep.aaa.final_residual <= 1e-12 && counts == [5, 1] && fe <= 1e-8 && ce <= 1e-8,
        format!(
            "{} iterations, residual {:.2e}, cluster counts {counts:?}, freq err {fe:.2e}, coef err {ce:.2e}, support k {support:?}",
            rep.aaa.iterations, rep.aaa.final_residual
        ),
    )
}

fn criterion_y4() -> Outcome {
    let model = fixture("y4");
    let ds = dataset(&model, 8.0, -47, 47);
    let opts = RecoveryOptions { merge_tol: 1e-3, mode: RecoveryMode::Extended, ..Default::default() };
    let rep = match recover(&ds, &opts, Some(&model)) {
        Ok(r) => r,
        Err(e) => return outcome(false, format!("recovery failed: {e}")),
    };
    let (fe, ce) = errors(&rep);
    let mut degs = degrees(&rep.model);
    let mut expected = degrees(&model);
    degs.sort_unstable();
    expected.sort_unstable();
    let counts: Vec<usize> = rep.clusters.clusters.iter().map(|c| c.count).collect();
    outcome(
        rep.model.len() == 3 && degs == expected && rep.sigma == [12] && fe <= 1e-8 && ce <= 1e-8,
        format!(
            "M = {}, degrees {:?}, sigma {:?}, {} iterations, residual {:.2e}, pruned {:?}, cluster counts {counts:?}, freq err {fe:.2e}, coef err {ce:.2e}",
            rep.model.len(),
            degrees(&rep.model),
            rep.sigma,
            rep.aaa.iterations,
            rep.aaa.final_residual,
            rep.pruned.iter().map(|z| z.re).collect::<Vec<_>>(),
        ),
    )
}

fn criterion_oracle() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst: f64 = 0.0;
    let mut failures = 0;
    for trial in 0..50 {
        let period = PERIODS[trial % 3];
        let model = random_model(&mut rng, 6, period);
        let scale = (0..=400)
            .map(|i| model.evaluate(period * i as f64 / 400.0).norm())
            .fold(1.0, f64::max);
        for k in -20..=20 {
            let exact = coeff_model(&model, period, k);
            match coeff_quadrature_oracle(&model, period, k, 1e-12 * scale) {
                Ok(q) => worst = worst.max((exact - q).norm() / scale),
                Err(_) => failures += 1,
            }
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    outcome(
        worst <= 1e-9 && failures == 0 && elapsed < 30.0,
        format!("max |closed form - quadrature| / max(1, max|y|) = {worst:.2e}, {failures} quadrature failures, {elapsed:.2} s"),
    )
}

fn is_conditioning_error(e: &Error) -> bool {
    matches!(
        e,
        Error::RankDeficient(_)
            | Error::NearPeriodicPole(_)
            | Error::MissingPoles { .. }
            | Error::NotConverged { .. }
            | Error::InsufficientCoefficients { .. }
    )
}

/// Parameter error caused by rounding the exact data alone, to first order.
fn rounding_floor(model: &ExponentialSumModel, ds: &FourierDataset) -> f64 {
    let idx: Vec<i64> = ds.indices().collect();
    let fmax = ds.entries.iter().map(|e| e.1.norm()).fold(0.0, f64::max);
    parameter_sensitivity(model, ds.period, &idx).unwrap_or(f64::INFINITY) * f64::EPSILON * fmax
}

fn criterion_round_trip() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let opts = RecoveryOptions { merge_tol: 0.1, ..Default::default() };
    let mut ok = 0;
    let mut beyond = 0;
    let mut unexplained = Vec::new();
    for trial in 0..100 {
        let period = PERIODS[trial % 3];
        let n = rng.random_range(1..=8);
        let model = random_nonperiodic(&mut rng, n, period);
        let lo = -(n as i64 + 1);
        let ds = dataset(&model, period, lo, lo + 2 * n as i64 + 1);
        beyond += usize::from(rounding_floor(&model, &ds) > 1e-6);
        match recover(&ds, &opts, Some(&model)) {
            Ok(rep) => {
                let (fe, ce) = errors(&rep);
                if fe.max(ce) <= 1e-6 {
                    ok += 1;
                } else if rep.warnings.is_empty() {
                    unexplained.push(format!("trial {trial}: N={n}, errors {fe:.1e}/{ce:.1e} without warning"));
                }
            }
            Err(e) if is_conditioning_error(&e) => {}
            Err(e) => unexplained.push(format!("trial {trial}: {e}")),
        }
    }

    let mut ok_periodic = 0;
    let mut beyond_periodic = 0;
    let mut sigma_wrong = Vec::new();
    let mut unexplained_periodic = Vec::new();
    for trial in 0..100 {
        let period = PERIODS[trial % 3];
        let mult = rng.random_range(1..=3);
        let n = rng.random_range(mult..=8);
        let base = if n > mult {
            random_nonperiodic(&mut rng, n - mult, period)
        } else {
            ExponentialSumModel::empty()
        };
        let lo = -(n as i64 + 1);
        let hi = lo + 2 * n as i64 + 1;
        let k0 = rng.random_range(lo..=hi);
        let model = with_periodic(&mut rng, base, k0, mult, period);
        let ds = dataset(&model, period, lo, hi);
        beyond_periodic += usize::from(rounding_floor(&model, &ds) > 1e-6);
        match recover(&ds, &opts, Some(&model)) {
            Ok(rep) => {
                let (fe, ce) = errors(&rep);
                if fe.max(ce) <= 1e-6 {
                    ok_periodic += 1;
                    if rep.sigma != [k0] {
                        sigma_wrong.push(trial);
                    }
                } else if rep.warnings.is_empty() {
                    unexplained_periodic.push(format!(
                        "trial {trial}: N={n}, k0={k0}, mult {mult}, errors {fe:.1e}/{ce:.1e}, sigma {:?} without warning",
                        rep.sigma
                    ));
                }
            }
            Err(e) if is_conditioning_error(&e) => {}
            Err(e) => unexplained_periodic.push(format!("trial {trial}: {e}")),
        }
    }
    outcome(
        ok >= 95 && unexplained.is_empty() && ok_periodic >= 95 && sigma_wrong.is_empty() && unexplained_periodic.is_empty(),
        format!(
            "non-periodic {ok}/100, unwarned failures {unexplained:?}; periodic {ok_periodic}/100, wrong sigma {sigma_wrong:?}, unwarned failures {unexplained_periodic:?}; rounding the exact data alone already exceeds 1e-6 in {beyond} and {beyond_periodic} trials"
        ),
    )
}

fn criterion_structure() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst_norm: f64 = 0.0;
    let mut worst_side: f64 = 0.0;
    let mut worst_pole: f64 = 0.0;
    for trial in 0..60 {
        let period = PERIODS[trial % 3];
        let model = random_model(&mut rng, 8, period);
        let n = model.order() as i64;
        let points: Vec<Complex64> = (-n - 2..=n + 2).map(|k| c(k as f64, 0.0)).collect();
        let values: Vec<Complex64> = (-n - 2..=n + 2).map(|k| coeff_model(&model, period, k)).collect();
        for jmax in 1..=(n as usize + 1) {
            let (r, _) = aaa_fit(&points, &values, 1e-13, jmax).unwrap();
            let fs = r.values.iter().map(|f| f.norm_sqr()).sum::<f64>().sqrt();
            worst_norm = worst_norm.max((r.weight_norm() - 1.0).abs());
            worst_side = worst_side.max(r.side_condition() / fs);
            let wmax = r.weights.iter().map(|w| w.norm()).fold(0.0, f64::max);
            if let Ok(ps) = poles(&r) {
                for rho in ps {
                    if r.support.iter().all(|&z| (z - rho).norm() > 1e-6) {
                        worst_pole = worst_pole.max(r.denominator(rho).norm() / wmax);
                    }
                }
            }
        }
    }

    let mut worst_a: f64 = 0.0;
    let mut worst_astar: f64 = 0.0;
    for trial in 0..200 {
        let period = PERIODS[trial % 3];
        let len = rng.random_range(1..=5);
        let gammas = random_gammas(&mut rng, len);
        let scale = gammas.iter().map(|g| g.norm()).fold(0.0, f64::max);

        let model = random_nonperiodic(&mut rng, 1, period);
        let lambda = model.terms[0].lambda;
        let pf = confluent_params(&ExponentialSumModel::new(vec![ExpTerm::new(lambda, gammas.clone())]), period);
        let back = gammas_from_A(&pf.clusters[0].coeffs, pf.clusters[0].pole, period).unwrap();
        worst_a = worst_a.max(max_diff(&back, &gammas) / scale);

        let k0: i64 = rng.random_range(-10..=10);
        let lambda = c(0.0, k0 as f64 / period);
        let term = ExponentialSumModel::new(vec![ExpTerm::new(lambda, gammas.clone())]);
        let pf = confluent_params(&term, period);
        let c_breve = coeff_model(&term, period, k0);
        let back = gammas_from_Astar(&pf.clusters[0].coeffs, c_breve, period);
        worst_astar = worst_astar.max(max_diff(&back, &gammas) / scale);
    }
    outcome(
        worst_norm <= 1e-12 && worst_side <= 1e-10 && worst_pole <= 1e-8 && worst_a <= 1e-10 && worst_astar <= 1e-10,
        format!(
            "| |w|-1 | {worst_norm:.1e}, |w^T f|/|f| {worst_side:.1e}, |q(rho)|/max|w| {worst_pole:.1e}, A inverse {worst_a:.1e}, A* inverse {worst_astar:.1e}"
        ),
    )
}

fn max_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

fn criterion_order() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut wrong = Vec::new();
    let mut early_converged = true;
    let mut wrong_periodic = Vec::new();
    for n in 1..=8usize {
        for trial in 0..6 {
            let period = PERIODS[trial % 3];
            let model = random_nonperiodic(&mut rng, n, period);
            let lo = -(n as i64 + 1);
            let ds = dataset(&model, period, lo, lo + 2 * n as i64 + 1);
            let points: Vec<Complex64> = ds.indices().map(|k| c(k as f64, 0.0)).collect();
            let values: Vec<Complex64> = ds.entries.iter().map(|e| e.1).collect();
            let (_, d) = aaa_fit(&points, &values, 1e-13, n + 1).unwrap();
            if d.iterations != n || !d.converged {
                wrong.push((n, d.iterations));
                early_converged &= d.converged && d.iterations < n;
            }

            let mult = rng.random_range(1..=n.min(3));
            let base = if n > mult { random_nonperiodic(&mut rng, n - mult, period) } else { ExponentialSumModel::empty() };
            let hi = lo + 2 * n as i64 + 1;
            let k0 = rng.random_range(lo..=hi);
            let model = with_periodic(&mut rng, base, k0, mult, period);
            let values: Vec<Complex64> = (lo..=hi).map(|k| coeff_model(&model, period, k)).collect();
            let (_, d) = aaa_fit(&points, &values, 1e-13, n + 1).unwrap();
            if d.iterations > n + 1 || !d.converged {
                wrong_periodic.push((n, d.iterations));
            }
        }
    }
    outcome(
        wrong.is_empty() && wrong_periodic.is_empty(),
        format!(
            "non-periodic mismatches (N, iterations) {wrong:?}, every mismatch is an early stop within tolerance: {early_converged}; periodic overruns {wrong_periodic:?}"
        ),
    )
}

fn main() {
    type Criterion = (&'static str, fn() -> Outcome);
    let criteria: [Criterion; 8] = [
        ("1 real proper example (y2)", criterion_y2),
        ("2 periodic proper example (y1)", criterion_y1),
        ("3 extended example (y3)", criterion_y3),
        ("4 extended periodic example (y4)", criterion_y4),
        ("5 closed form vs quadrature", criterion_oracle),
        ("6 round trip", criterion_round_trip),
        ("7 structural invariants", criterion_structure),
        ("8 order detection", criterion_order),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        let o = run();
        println!("{} criterion {name}: {}", if o.passed { "PASS" } else { "FAIL" }, o.detail);
        if !o.passed {
            failed += 1;
        }
    }
    // The report is the product; regressions are caught by the asserting suites.
    println!("{failed} of {} criteria failed", criteria.len());
}
