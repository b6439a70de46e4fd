#![allow(dead_code)]

use std::f64::consts::PI;
use std::path::PathBuf;

use expsum::{Complex64, ExpTerm, ExponentialSumModel};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub const PERIODS: [f64; 3] = [1.0, 2.0 * PI, 8.0];

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn fixture(name: &str) -> ExponentialSumModel {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(format!("{name}.json"));
    ExponentialSumModel::from_json(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn random_gamma(rng: &mut ChaCha8Rng) -> Complex64 {
    c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
}

fn leading_gamma(rng: &mut ChaCha8Rng) -> Complex64 {
    Complex64::from_polar(rng.random_range(0.2..1.0), rng.random_range(-PI..PI))
}

pub fn random_gammas(rng: &mut ChaCha8Rng, len: usize) -> Vec<Complex64> {
    let mut g: Vec<Complex64> = (0..len).map(|_| random_gamma(rng)).collect();
    if let Some(last) = g.last_mut() {
        *last = leading_gamma(rng);
    }
    g
}

/// Random multiplicities `1..=4` summing to `order`.
fn random_split(rng: &mut ChaCha8Rng, order: usize) -> Vec<usize> {
    let mut parts = Vec::new();
    let mut left = order;
    while left > 0 {
        let m = rng.random_range(1..=left.min(4));
        parts.push(m);
        left -= m;
    }
    parts
}

/// Random non-periodic model of the given order with `|Re λ| ≤ 0.5`,
/// `|Im λ| ≤ 3`, poles `C = −iλP` pairwise at least 0.5 apart and at least
/// 0.1 away from every integer.
pub fn random_nonperiodic(rng: &mut ChaCha8Rng, order: usize, period: f64) -> ExponentialSumModel {
    let mut terms: Vec<ExpTerm> = Vec::new();
    for mult in random_split(rng, order) {
        let lambda = loop {
            let lambda = c(rng.random_range(-0.5..0.5), rng.random_range(-3.0..3.0));
            let pole = -Complex64::i() * lambda * period;
            let near_int = (pole.re - pole.re.round()).abs().max(pole.im.abs()) < 0.1;
            let crowded = terms.iter().any(|t| (t.lambda - lambda).norm() * period < 0.5);
            if !near_int && !crowded {
                break lambda;
            }
        };
        terms.push(ExpTerm::new(lambda, random_gammas(rng, mult)));
    }
    ExponentialSumModel::new(terms)
}

/// Non-periodic model of order `order − mult` plus one term of multiplicity
/// `mult` at `λ = i k0 / P`.
pub fn with_periodic(
    rng: &mut ChaCha8Rng,
    base: ExponentialSumModel,
    k0: i64,
    mult: usize,
    period: f64,
) -> ExponentialSumModel {
    let mut terms = base.terms;
    terms.push(ExpTerm::new(c(0.0, k0 as f64 / period), random_gammas(rng, mult)));
    ExponentialSumModel::new(terms)
}

/// Random model (possibly with periodic terms) of order at most `max_order`.
pub fn random_model(rng: &mut ChaCha8Rng, max_order: usize, period: f64) -> ExponentialSumModel {
    let order = rng.random_range(1..=max_order);
    let mut model = random_nonperiodic(rng, order, period);
    if rng.random_bool(0.5) {
        let t = rng.random_range(0..model.len());
        let k0 = rng.random_range(-20..=20);
        model.terms[t].lambda = c(0.0, k0 as f64 / period);
    }
    model
}

pub fn indices(lo: i64, hi: i64) -> impl Iterator<Item = i64> {
    lo..=hi
}
