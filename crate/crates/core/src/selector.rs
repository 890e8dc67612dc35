//! Candidate scoring, ranking and cross-metric comparison.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::datastore::{fragment, to_matrix, DataError, DataMatrix, MaterialDatabase};
use crate::knowledgebase::{classify, ClassifyError, Knowledgebase};
use crate::metrics::{min_max_normalize, MetricError, MetricKind, Orientation};
use crate::model::{DesignRequirement, MaterialClass, RequirementError};
use crate::schema::PropertySchema;

/// How scores are turned into a ranking.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SelectionMode {
    /// Lowest score wins for every metric, including similarities.
    #[serde(rename = "paper-min")]
    PaperMin,
    /// Lowest wins for distances, highest wins for similarities.
    #[default]
    #[serde(rename = "oriented")]
    Oriented,
}

impl SelectionMode {
    pub fn as_str(self) -> &'static str {
        match self {
            SelectionMode::PaperMin => "paper-min",
            SelectionMode::Oriented => "oriented",
        }
    }

    fn ascending(self, metric: MetricKind) -> bool {
        match self {
            SelectionMode::PaperMin => true,
            SelectionMode::Oriented => metric.orientation() == Orientation::Distance,
        }
    }
}

impl fmt::Display for SelectionMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SelectionMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "paper-min" => Ok(SelectionMode::PaperMin),
            "oriented" => Ok(SelectionMode::Oriented),
            other => Err(format!("unknown mode '{other}' (valid: paper-min, oriented)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankEntry {
    pub id: String,
    pub score: f64,
}

/// A row left out of the ranking because the metric is undefined on it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Exclusion {
    pub id: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionReport {
    pub metric: MetricKind,
    pub mode: SelectionMode,
    pub winner_id: String,
    pub degree_of_similarity: f64,
    /// Best first. Covers every scored row unless truncated by top-k.
    pub ranking: Vec<RankEntry>,
    pub normalized: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub excluded: Vec<Exclusion>,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SelectError {
    #[error("no candidates: the fragment is empty")]
    NoCandidates,
    #[error("no scorable candidates: {}", describe_exclusions(.0))]
    NoScorableCandidates(Vec<Exclusion>),
    #[error("query has {query} values but the matrix has {columns} columns")]
    QueryShape { query: usize, columns: usize },
    #[error("top-k must be at least 1")]
    ZeroK,
    #[error(transparent)]
    Metric(#[from] MetricError),
}

fn describe_exclusions(ex: &[Exclusion]) -> String {
    ex.iter()
        .map(|e| format!("{} ({})", e.id, e.reason))
        .collect::<Vec<_>>()
        .join(", ")
}

/// Scores every row against `query` and picks the best under `mode`. Ties go
/// to the smaller material id. Rows the metric cannot score (non-positive
/// components for the geometric average, constant rows for the correlation
/// coefficient, non-finite results) are listed in `excluded`.
pub fn select_best(
    matrix: &DataMatrix,
    query: &[f64],
    metric: MetricKind,
    mode: SelectionMode,
) -> Result<SelectionReport, SelectError> {
    if matrix.is_empty() {
        return Err(SelectError::NoCandidates);
    }
    if query.len() != matrix.cols() {
        return Err(SelectError::QueryShape {
            query: query.len(),
            columns: matrix.cols(),
        });
    }

    let mut ranking = Vec::with_capacity(matrix.rows());
    let mut excluded = Vec::new();
    for (id, row) in matrix.iter_rows() {
        match metric.score(query, row) {
            Ok(score) if score.is_finite() => ranking.push(RankEntry {
                id: id.to_string(),
                score,
            }),
            Ok(score) => excluded.push(Exclusion {
                id: id.to_string(),
                reason: format!("score is {score}"),
            }),
            // A bad query fails every row the same way; report it directly.
            Err(e @ (MetricError::LengthMismatch(..) | MetricError::Empty)) => return Err(e.into()),
            Err(e) => excluded.push(Exclusion {
                id: id.to_string(),
                reason: e.to_string(),
            }),
        }
    }
    if ranking.is_empty() {
        return Err(SelectError::NoScorableCandidates(excluded));
    }

    let ascending = mode.ascending(metric);
    ranking.sort_by(|a, b| {
        let by_score = if ascending {
            a.score.total_cmp(&b.score)
        } else {
            b.score.total_cmp(&a.score)
        };
        by_score.then_with(|| a.id.cmp(&b.id))
    });

    Ok(SelectionReport {
        metric,
        mode,
        winner_id: ranking[0].id.clone(),
        degree_of_similarity: ranking[0].score,
        ranking,
        normalized: false,
        excluded,
    })
}

/// [`select_best`] with the ranking cut to the first `k` entries.
pub fn rank_top_k(
    matrix: &DataMatrix,
    query: &[f64],
    metric: MetricKind,
    mode: SelectionMode,
    k: usize,
) -> Result<SelectionReport, SelectError> {
    if k == 0 {
        return Err(SelectError::ZeroK);
    }
    let mut report = select_best(matrix, query, metric, mode)?;
    report.ranking.truncate(k);
    Ok(report)
}

/// Requirement entry echoed back in a comparison, value in cell syntax.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RequirementEcho {
    pub property: String,
    pub value: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub requirement: Vec<RequirementEcho>,
    pub class: MaterialClass,
    pub index_pattern: Vec<u32>,
    pub candidates: usize,
    pub reports: Vec<SelectionReport>,
    /// Metrics that could score no candidate; the others still report.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub unscored: Vec<UnscoredMetric>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnscoredMetric {
    pub metric: MetricKind,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompareOptions {
    pub metrics: Vec<MetricKind>,
    pub mode: SelectionMode,
    pub normalize: bool,
    pub top_k: Option<usize>,
}

impl Default for CompareOptions {
    fn default() -> Self {
        Self {
            metrics: MetricKind::ALL.to_vec(),
            mode: SelectionMode::default(),
            normalize: false,
            top_k: None,
        }
    }
}

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("no metrics requested")]
    NoMetrics,
    #[error("the database has no {class} materials to rank")]
    NoCandidates { class: MaterialClass },
    #[error(transparent)]
    Requirement(#[from] RequirementError),
    #[error(transparent)]
    Classify(#[from] ClassifyError),
    #[error(transparent)]
    Data(#[from] DataError),
    #[error("{metric}: {source}")]
    Select {
        metric: MetricKind,
        #[source]
        source: SelectError,
    },
    #[error(transparent)]
    Metric(#[from] MetricError),
}

/// Classifies the requirement, fragments the database to the winning class,
/// builds (and optionally normalizes) the data matrix, and runs every
/// requested metric over that one matrix.
pub fn compare_metrics(
    db: &MaterialDatabase,
    req: &DesignRequirement,
    kb: &Knowledgebase,
    schema: &PropertySchema,
    options: &CompareOptions,
) -> Result<ComparisonReport, PipelineError> {
    if options.metrics.is_empty() {
        return Err(PipelineError::NoMetrics);
    }
    let classification = classify(req, kb, schema)?;
    let frag = fragment(db, classification.class, req)?;
    if frag.rows.is_empty() {
        return Err(PipelineError::NoCandidates {
            class: classification.class,
        });
    }
    let mut matrix = to_matrix(&frag, schema)?;
    let mut query = req.query_vector(schema)?;
    if options.normalize && !matrix.is_empty() {
        let n = min_max_normalize(&matrix, &query)?;
        matrix = n.matrix;
        query = n.query;
    }

    let mut reports = Vec::new();
    let mut unscored = Vec::new();
    let mut first_failure = None;
    for &metric in &options.metrics {
        let result = match options.top_k {
            Some(k) => rank_top_k(&matrix, &query, metric, options.mode, k),
            None => select_best(&matrix, &query, metric, options.mode),
        };
        match result {
            Ok(mut report) => {
                report.normalized = options.normalize;
                reports.push(report);
            }
            Err(source @ SelectError::NoScorableCandidates(_)) => {
                unscored.push(UnscoredMetric {
                    metric,
                    reason: source.to_string(),
                });
                first_failure.get_or_insert(PipelineError::Select { metric, source });
            }
            Err(source) => return Err(PipelineError::Select { metric, source }),
        }
    }
    if reports.is_empty() {
        if let Some(e) = first_failure {
            return Err(e);
        }
    }

    Ok(ComparisonReport {
        requirement: req
            .entries()
            .iter()
            .map(|(p, v)| RequirementEcho {
                property: p.clone(),
                value: v.to_string(),
            })
            .collect(),
        class: classification.class,
        index_pattern: classification.index_pattern,
        candidates: matrix.rows(),
        reports,
        unscored,
    })
}

/// Orders two scores under a metric and mode: `Less` means `a` ranks first.
pub fn rank_order(metric: MetricKind, mode: SelectionMode, a: f64, b: f64) -> Ordering {
    if mode.ascending(metric) {
        a.total_cmp(&b)
    } else {
        b.total_cmp(&a)
    }
}
