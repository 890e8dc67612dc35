//! Cross-checks the metric implementations against straightforward
//! index-loop re-implementations written from the formulas.

use matsel_core::{
    absolute_exponential, city_block, correlation_coefficient, euclidean, exponential_similarity,
    geometric_average_min, MetricKind,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

mod reference {
    pub fn euclidean(y: &[f64], x: &[f64]) -> f64 {
        let mut acc = 0.0;
        for i in 0..y.len() {
            acc += (y[i] - x[i]).powi(2);
        }
        acc.sqrt()
    }

    pub fn city_block(y: &[f64], x: &[f64]) -> f64 {
        let mut acc = 0.0;
        for i in 0..y.len() {
            acc += if y[i] > x[i] { y[i] - x[i] } else { x[i] - y[i] };
        }
        acc
    }

    pub fn absolute_exponential(y: &[f64], x: &[f64]) -> f64 {
        let mut acc = 0.0;
        for i in 0..y.len() {
            acc += (y[i] - x[i]).abs();
        }
        f64::exp(-acc)
    }

    pub fn geometric_average_min(y: &[f64], x: &[f64]) -> f64 {
        let mut num = 0.0;
        let mut den = 0.0;
        for i in 0..y.len() {
            num += if x[i] < y[i] { x[i] } else { y[i] };
            den += x[i].sqrt() * y[i].sqrt();
        }
        num / den
    }

    pub fn correlation_coefficient(y: &[f64], x: &[f64]) -> f64 {
        let n = y.len() as f64;
        let xm: f64 = x.iter().sum::<f64>() / n;
        let ym: f64 = y.iter().sum::<f64>() / n;
        let mut num = 0.0;
        let mut sx = 0.0;
        let mut sy = 0.0;
        for i in 0..y.len() {
            num += (x[i] - xm).abs() * (y[i] - ym).abs();
            sx += (x[i] - xm).powi(2);
            sy += (y[i] - ym).powi(2);
        }
        num / (sx.sqrt() * sy.sqrt())
    }

    pub fn exponential_similarity(y: &[f64], x: &[f64]) -> f64 {
        let mut acc = 0.0;
        for i in 0..y.len() {
            let u = (y[i] - x[i]).abs();
            acc += u / (1.0 + f64::exp(-u));
        }
        acc
    }
}

fn rel_err(got: f64, want: f64) -> f64 {
    if got == want {
        return 0.0;
    }
    (got - want).abs() / want.abs().max(got.abs())
}

fn pairs(seed: u64, count: usize) -> Vec<(Vec<f64>, Vec<f64>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let n = rng.random_range(2..=23);
            let y = (0..n).map(|_| rng.random_range(0.05..50.0)).collect();
            let x = (0..n).map(|_| rng.random_range(0.05..50.0)).collect();
            (y, x)
        })
        .collect()
}

#[test]
fn six_metrics_match_reference() {
    type Pair = (fn(&[f64], &[f64]) -> Result<f64, matsel_core::MetricError>, fn(&[f64], &[f64]) -> f64);
    let cases: [(MetricKind, Pair); 6] = [
        (MetricKind::Euclidean, (euclidean, reference::euclidean)),
        (MetricKind::CityBlock, (city_block, reference::city_block)),
        (MetricKind::AbsoluteExponential, (absolute_exponential, reference::absolute_exponential)),
        (MetricKind::GeometricAverageMin, (geometric_average_min, reference::geometric_average_min)),
        (
            MetricKind::CorrelationCoefficient,
            (correlation_coefficient, reference::correlation_coefficient),
        ),
        (
            MetricKind::ExponentialSimilarity,
            (exponential_similarity, reference::exponential_similarity),
        ),
    ];
    for (y, x) in pairs(2024, 200) {
        for (kind, (imp, oracle)) in &cases {
            let got = imp(&y, &x).unwrap();
            let want = oracle(&y, &x);
            assert!(rel_err(got, want) <= 1e-9, "{kind}: {got} vs {want}");
            assert_eq!(kind.score(&y, &x).unwrap(), got);
        }
    }
}

#[test]
fn absolute_exponential_is_exp_of_city_block() {
    // Small components keep exp(-L1) out of the subnormal range.
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for _ in 0..200 {
        let n = rng.random_range(2..=23);
        let y: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..2.0)).collect();
        let x: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..2.0)).collect();
        let a = absolute_exponential(&y, &x).unwrap();
        let b = (-city_block(&y, &x).unwrap()).exp();
        assert!(rel_err(a, b) <= 1e-12);
    }
}

#[test]
fn xg_vectors_against_reference() {
    let y = [20.0, 23.9, 4.0, 56.67, 2000.0];
    let x = [27.456, 12.21, 4.0, 67.32, 2399.47];
    let g = [2.34, 22.456, 4.0, 3.0, 1.0e6];
    assert!(rel_err(euclidean(&y, &x).unwrap(), reference::euclidean(&y, &x)) < 1e-12);
    assert!(rel_err(geometric_average_min(&y, &g).unwrap(), reference::geometric_average_min(&y, &g)) < 1e-12);
    assert!(rel_err(correlation_coefficient(&y, &x).unwrap(), reference::correlation_coefficient(&y, &x)) < 1e-12);
}
