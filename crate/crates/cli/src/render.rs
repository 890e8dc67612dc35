use std::fmt::Write as _;

use clap::ValueEnum;
use matsel_core::{Axiom, AxiomReport, ClassificationResult, ComparisonReport, MaterialDatabase};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Table,
    Json,
    Csv,
    /// `(metric, degree_of_similarity)` pairs for charting.
    Plotdata,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum QueryView {
    Select,
    Compare,
}

/// Shortest round-trip form, switching to exponent notation for very small
/// or very large magnitudes.
pub fn fmt_num(v: f64) -> String {
    let a = v.abs();
    if a != 0.0 && a.is_finite() && !(1e-4..1e15).contains(&a) {
        format!("{v:e}")
    } else {
        format!("{v}")
    }
}

fn json<T: serde::Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report serializes");
    s.push('\n');
    s
}

pub(crate) fn ingest(db: &MaterialDatabase, format: OutputFormat) -> String {
    let counts = db.count_by_class();
    match format {
        OutputFormat::Json => json(&serde_json::json!({
            "materials": db.len(),
            "by_class": counts.iter().map(|(c, n)| (c.as_str(), *n)).collect::<std::collections::BTreeMap<_, _>>(),
        })),
        OutputFormat::Csv | OutputFormat::Plotdata => {
            let mut s = String::from("class,materials\n");
            for (c, n) in counts {
                let _ = writeln!(s, "{c},{n}");
            }
            s
        }
        OutputFormat::Table => {
            let mut s = format!("N={} materials\n", db.len());
            for (c, n) in counts {
                let _ = writeln!(s, "  {c:<8} {n}");
            }
            s
        }
    }
}

pub(crate) fn classification(r: &ClassificationResult, format: OutputFormat) -> String {
    match format {
        OutputFormat::Json => json(r),
        OutputFormat::Csv | OutputFormat::Plotdata => {
            let mut s = String::from("property,index\n");
            for n in &r.node_list {
                let _ = writeln!(s, "{},{}", n.property, n.index);
            }
            s
        }
        OutputFormat::Table => {
            let ids: Vec<String> = r.index_pattern.iter().map(u32::to_string).collect();
            let mut s = format!("class: {}\nindex pattern: {}\n", r.class, ids.join(" "));
            let scores: Vec<String> = r.scores.iter().map(|(c, n)| format!("{c}={n}")).collect();
            let _ = writeln!(s, "rule counts: {}", scores.join(" "));
            let _ = writeln!(s, "nodes:");
            for n in &r.node_list {
                let _ = writeln!(s, "  {:<32} {}", n.property, n.index);
            }
            s
        }
    }
}

pub(crate) fn comparison(r: &ComparisonReport, format: OutputFormat, view: QueryView) -> String {
    match format {
        OutputFormat::Json => json(r),
        OutputFormat::Csv => {
            let mut s = String::from("metric,mode,winner_id,degree_of_similarity\n");
            for rep in &r.reports {
                let _ = writeln!(
                    s,
                    "{},{},{},{}",
                    rep.metric,
                    rep.mode,
                    rep.winner_id,
                    fmt_num(rep.degree_of_similarity)
                );
            }
            s
        }
        OutputFormat::Plotdata => {
            let mut s = String::from("# metric\tdegree_of_similarity\n");
            for rep in &r.reports {
                let _ = writeln!(s, "{}\t{}", rep.metric, fmt_num(rep.degree_of_similarity));
            }
            s
        }
        OutputFormat::Table => {
            let req: Vec<String> = r
                .requirement
                .iter()
                .map(|e| format!("{} = {}", e.property, e.value))
                .collect();
            let ids: Vec<String> = r.index_pattern.iter().map(u32::to_string).collect();
            let mut s = format!(
                "requirement: {}\nclass: {} (index pattern: {})\ncandidates: {}\n\n",
                req.join(", "),
                r.class,
                ids.join(" "),
                r.candidates
            );
            let _ = writeln!(
                s,
                "{:<10} {:<9} {:<12} degree_of_similarity",
                "metric", "mode", "winner"
            );
            for rep in &r.reports {
                let _ = writeln!(
                    s,
                    "{:<10} {:<9} {:<12} {}",
                    rep.metric.name(),
                    rep.mode.as_str(),
                    rep.winner_id,
                    fmt_num(rep.degree_of_similarity)
                );
            }
            for u in &r.unscored {
                let _ = writeln!(s, "{:<10} unscored: {}", u.metric.name(), u.reason);
            }
            if view == QueryView::Select {
                for rep in &r.reports {
                    let _ = writeln!(s, "\nranking ({}, {}):", rep.metric, rep.mode);
                    for (i, e) in rep.ranking.iter().enumerate() {
                        let _ = writeln!(s, "  {:>4}. {:<12} {}", i + 1, e.id, fmt_num(e.score));
                    }
                    for ex in &rep.excluded {
                        let _ = writeln!(s, "  excluded {}: {}", ex.id, ex.reason);
                    }
                }
            }
            s
        }
    }
}

pub(crate) fn axioms(r: &AxiomReport, format: OutputFormat) -> String {
    match format {
        OutputFormat::Json => json(r),
        OutputFormat::Csv | OutputFormat::Plotdata => {
            let mut s = String::from("axiom,passed,failed\n");
            for (a, t) in &r.tallies {
                let _ = writeln!(s, "{},{},{}", a.label(), t.passed, t.failed);
            }
            s
        }
        OutputFormat::Table => {
            let mut s = format!(
                "metric: {} ({:?}), samples: {}, seed: {}\n",
                r.metric,
                r.metric.orientation(),
                r.samples,
                r.seed
            );
            for (a, t) in &r.tallies {
                let verdict = if t.all_passed() { "PASS" } else { "FAIL" };
                let _ = writeln!(
                    s,
                    "  {:<22} {verdict}  ({} passed, {} failed)",
                    a.label(),
                    t.passed,
                    t.failed
                );
            }
            if r.skipped > 0 {
                let _ = writeln!(s, "  skipped {} out-of-domain samples", r.skipped);
            }
            if let Some(ce) = r.counterexamples.iter().find(|c| c.axiom != Axiom::IdentityAsDistance) {
                let _ = writeln!(
                    s,
                    "  first counterexample ({}): lhs={} rhs={} n={}",
                    ce.axiom.label(),
                    fmt_num(ce.lhs),
                    fmt_num(ce.rhs),
                    ce.x.len()
                );
            }
            s
        }
    }
}
