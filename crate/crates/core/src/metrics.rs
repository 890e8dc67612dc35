//! Distance and similarity functions between a requirement vector `y` and a
//! candidate vector `x`, plus min-max normalization.
//!
//! Three kinds are distances (0 at equality, larger is farther): Euclidean,
//! city block and exponential similarity. The other three are similarities
//! (1 at equality, larger is closer): absolute exponential, geometric average
//! minimum and the absolute-deviation correlation coefficient.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::datastore::DataMatrix;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MetricError {
    #[error("vector length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("empty vector")]
    Empty,
    #[error("non-finite component at index {0}")]
    NonFinite(usize),
    #[error("{metric}: non-positive component at index {index}")]
    NonPositive { metric: MetricKind, index: usize },
    #[error("{metric}: needs at least 2 components")]
    TooShort { metric: MetricKind },
    #[error("{metric}: zero variance")]
    ZeroVariance { metric: MetricKind },
}

/// A finite, non-empty vector of reals.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector(Vec<f64>);

impl FeatureVector {
    pub fn new(values: Vec<f64>) -> Result<Self, MetricError> {
        if values.is_empty() {
            return Err(MetricError::Empty);
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(MetricError::NonFinite(i));
        }
        Ok(Self(values))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl AsRef<[f64]> for FeatureVector {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Orientation {
    /// Smaller is closer.
    Distance,
    /// Larger is closer.
    Similarity,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "&'static str", try_from = "String")]
pub enum MetricKind {
    Euclidean,
    CityBlock,
    AbsoluteExponential,
    GeometricAverageMin,
    CorrelationCoefficient,
    ExponentialSimilarity,
}

impl MetricKind {
    pub const ALL: [MetricKind; 6] = [
        MetricKind::Euclidean,
        MetricKind::CityBlock,
        MetricKind::AbsoluteExponential,
        MetricKind::GeometricAverageMin,
        MetricKind::CorrelationCoefficient,
        MetricKind::ExponentialSimilarity,
    ];

    /// Name used on the command line and in the HTTP API.
    pub fn name(self) -> &'static str {
        match self {
            MetricKind::Euclidean => "euclidean",
            MetricKind::CityBlock => "cityblock",
            MetricKind::AbsoluteExponential => "absexp",
            MetricKind::GeometricAverageMin => "geomavg",
            MetricKind::CorrelationCoefficient => "corrcoef",
            MetricKind::ExponentialSimilarity => "expsim",
        }
    }

    pub fn orientation(self) -> Orientation {
        match self {
            MetricKind::Euclidean | MetricKind::CityBlock | MetricKind::ExponentialSimilarity => {
                Orientation::Distance
            }
            MetricKind::AbsoluteExponential
            | MetricKind::GeometricAverageMin
            | MetricKind::CorrelationCoefficient => Orientation::Similarity,
        }
    }

    /// Scores `x` against `y` with this metric.
    pub fn score(self, y: &[f64], x: &[f64]) -> Result<f64, MetricError> {
        match self {
            MetricKind::Euclidean => euclidean(y, x),
            MetricKind::CityBlock => city_block(y, x),
            MetricKind::AbsoluteExponential => absolute_exponential(y, x),
            MetricKind::GeometricAverageMin => geometric_average_min(y, x),
            MetricKind::CorrelationCoefficient => correlation_coefficient(y, x),
            MetricKind::ExponentialSimilarity => exponential_similarity(y, x),
        }
    }
}

impl fmt::Display for MetricKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown metric '{0}' (valid: euclidean, cityblock, absexp, geomavg, corrcoef, expsim)")]
pub struct UnknownMetric(pub String);

impl FromStr for MetricKind {
    type Err = UnknownMetric;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        MetricKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| UnknownMetric(s.to_string()))
    }
}

impl From<MetricKind> for &'static str {
    fn from(k: MetricKind) -> Self {
        k.name()
    }
}

impl TryFrom<String> for MetricKind {
    type Error = UnknownMetric;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

fn check_pair(y: &[f64], x: &[f64]) -> Result<(), MetricError> {
    if y.len() != x.len() {
        return Err(MetricError::LengthMismatch(y.len(), x.len()));
    }
    if y.is_empty() {
        return Err(MetricError::Empty);
    }
    if let Some(i) = y.iter().zip(x).position(|(a, b)| !a.is_finite() || !b.is_finite()) {
        return Err(MetricError::NonFinite(i));
    }
    Ok(())
}

fn abs_diffs<'a>(y: &'a [f64], x: &'a [f64]) -> impl Iterator<Item = f64> + 'a {
    y.iter().zip(x).map(|(a, b)| (a - b).abs())
}

pub fn euclidean(y: &[f64], x: &[f64]) -> Result<f64, MetricError> {
    check_pair(y, x)?;
    Ok(y.iter()
        .zip(x)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt())
}

pub fn city_block(y: &[f64], x: &[f64]) -> Result<f64, MetricError> {
    check_pair(y, x)?;
    Ok(abs_diffs(y, x).sum())
}

/// `exp(-L1)`. Large distances underflow towards 0.0, which is returned as is.
pub fn absolute_exponential(y: &[f64], x: &[f64]) -> Result<f64, MetricError> {
    Ok((-city_block(y, x)?).exp())
}

/// `Σ min(x_k, y_k) / Σ sqrt(x_k y_k)`; every component must be positive.
pub fn geometric_average_min(y: &[f64], x: &[f64]) -> Result<f64, MetricError> {
    check_pair(y, x)?;
    if let Some(index) = y.iter().zip(x).position(|(a, b)| *a <= 0.0 || *b <= 0.0) {
        return Err(MetricError::NonPositive {
            metric: MetricKind::GeometricAverageMin,
            index,
        });
    }
    let (mins, roots) = y
        .iter()
        .zip(x)
        .fold((0.0, 0.0), |(m, r), (a, b)| (m + a.min(*b), r + (a * b).sqrt()));
    Ok(mins / roots)
}

/// `Σ|x_k - x̄||y_k - ȳ| / (sqrt(Σ(x_k - x̄)²) sqrt(Σ(y_k - ȳ)²))`, with the
/// absolute values in the numerator, so the result lies in `[0, 1]`.
pub fn correlation_coefficient(y: &[f64], x: &[f64]) -> Result<f64, MetricError> {
    check_pair(y, x)?;
    let metric = MetricKind::CorrelationCoefficient;
    if y.len() < 2 {
        return Err(MetricError::TooShort { metric });
    }
    // A constant vector's computed mean can be off by an ulp, which would
    // leave tiny spurious deviations; test constancy directly instead.
    let constant = |v: &[f64]| v.iter().all(|c| *c == v[0]);
    if constant(y) || constant(x) {
        return Err(MetricError::ZeroVariance { metric });
    }
    let n = y.len() as f64;
    let y_mean = y.iter().sum::<f64>() / n;
    let x_mean = x.iter().sum::<f64>() / n;
    let mut num = 0.0;
    let mut ss_x = 0.0;
    let mut ss_y = 0.0;
    for (a, b) in y.iter().zip(x) {
        let dy = a - y_mean;
        let dx = b - x_mean;
        num += dx.abs() * dy.abs();
        ss_x += dx * dx;
        ss_y += dy * dy;
    }
    let denom = ss_x.sqrt() * ss_y.sqrt();
    if denom == 0.0 || !denom.is_finite() {
        return Err(MetricError::ZeroVariance { metric });
    }
    // Rounding can push a perfect match a few ulps past 1.
    Ok((num / denom).min(1.0))
}

/// `Σ u_k / (1 + exp(-u_k))` with `u_k = |y_k - x_k|`.
pub fn exponential_similarity(y: &[f64], x: &[f64]) -> Result<f64, MetricError> {
    check_pair(y, x)?;
    Ok(abs_diffs(y, x).map(|u| u / (1.0 + (-u).exp())).sum())
}

/// Result of [`min_max_normalize`].
#[derive(Debug, Clone, PartialEq)]
pub struct Normalized {
    pub matrix: DataMatrix,
    pub query: Vec<f64>,
    /// Per-column `(min, max)` over the matrix column and the query entry.
    pub ranges: Vec<(f64, f64)>,
}

/// Rescales every column to `[0, 1]` using the joint range of the matrix
/// column and the query entry. Columns with `max == min` map to 0.
pub fn min_max_normalize(matrix: &DataMatrix, query: &[f64]) -> Result<Normalized, MetricError> {
    if query.len() != matrix.cols() {
        return Err(MetricError::LengthMismatch(query.len(), matrix.cols()));
    }
    let ranges: Vec<(f64, f64)> = query
        .iter()
        .enumerate()
        .map(|(f, &q)| {
            (0..matrix.rows())
                .map(|i| matrix.get(i, f))
                .fold((q, q), |(lo, hi), v| (lo.min(v), hi.max(v)))
        })
        .collect();
    let scale = |f: usize, v: f64| {
        let (lo, hi) = ranges[f];
        if hi > lo {
            (v - lo) / (hi - lo)
        } else {
            0.0
        }
    };
    let query = query.iter().enumerate().map(|(f, &v)| scale(f, v)).collect();
    let matrix = matrix.map_cells(scale);
    Ok(Normalized {
        matrix,
        query,
        ranges,
    })
}
