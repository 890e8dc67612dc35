//! Rule knowledgebase and the index based classifier.
//!
//! A rules file holds one rule per line:
//!
//! ```text
//! rule <id> => <Polymer|Ceramic|Metal> when <property> <cmp> <number> [and <property> <cmp> <number>]...
//! ```
//!
//! `<id>` is a non-negative integer and `<cmp>` is `<`, `<=`, `>`, `>=`, or
//! `between <lo> <hi>` (inclusive bounds, `lo <= hi`). Tokens are separated by
//! whitespace; a property name is every token between the start of a
//! condition (or `and`) and its comparator, so multi-word names need no
//! quoting. Everything after `#` is a comment; blank lines are skipped.

use std::collections::{BTreeMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{scalarize, DesignRequirement, MaterialClass};
use crate::schema::PropertySchema;

/// The shipped 23-rule knowledgebase.
pub const DEFAULT_RULES: &str = include_str!("../data/rules23.txt");

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Comparator {
    Lt(f64),
    Le(f64),
    Gt(f64),
    Ge(f64),
    Between(f64, f64),
}

impl Comparator {
    pub fn holds(&self, v: f64) -> bool {
        match *self {
            Comparator::Lt(t) => v < t,
            Comparator::Le(t) => v <= t,
            Comparator::Gt(t) => v > t,
            Comparator::Ge(t) => v >= t,
            Comparator::Between(lo, hi) => lo <= v && v <= hi,
        }
    }
}

impl fmt::Display for Comparator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Comparator::Lt(t) => write!(f, "< {t}"),
            Comparator::Le(t) => write!(f, "<= {t}"),
            Comparator::Gt(t) => write!(f, "> {t}"),
            Comparator::Ge(t) => write!(f, ">= {t}"),
            Comparator::Between(lo, hi) => write!(f, "between {lo} {hi}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Condition {
    pub property: String,
    pub comparator: Comparator,
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.property, self.comparator)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecisionRule {
    pub id: u32,
    pub target: MaterialClass,
    pub conditions: Vec<Condition>,
}

impl fmt::Display for DecisionRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "rule {} => {} when ", self.id, self.target)?;
        for (i, c) in self.conditions.iter().enumerate() {
            if i > 0 {
                f.write_str(" and ")?;
            }
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum KbError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: unknown property '{property}'")]
    UnknownProperty { line: usize, property: String },
    #[error("line {line}: duplicate rule id {id}")]
    DuplicateId { line: usize, id: u32 },
    #[error("line {line}: malformed comparator: {message}")]
    Comparator { line: usize, message: String },
    #[error("class {class} is not the target of any rule (checked through line {line})")]
    UncoveredClass { line: usize, class: MaterialClass },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Knowledgebase {
    rules: Vec<DecisionRule>,
}

impl Knowledgebase {
    /// Parses and validates a rules file against `schema`.
    pub fn load(text: &str, schema: &PropertySchema) -> Result<Self, KbError> {
        let mut rules = Vec::new();
        let mut ids = HashSet::new();
        let mut last_line = 0;
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            last_line = line;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let rule = parse_rule(content, line, schema)?;
            if !ids.insert(rule.id) {
                return Err(KbError::DuplicateId { line, id: rule.id });
            }
            rules.push(rule);
        }
        for class in MaterialClass::ALL {
            if !rules.iter().any(|r| r.target == class) {
                return Err(KbError::UncoveredClass {
                    line: last_line,
                    class,
                });
            }
        }
        Ok(Self { rules })
    }

    /// The shipped knowledgebase, validated against `schema`.
    pub fn default_rules(schema: &PropertySchema) -> Result<Self, KbError> {
        Self::load(DEFAULT_RULES, schema)
    }

    pub fn rules(&self) -> &[DecisionRule] {
        &self.rules
    }

    pub fn len(&self) -> usize {
        self.rules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    pub fn rule(&self, id: u32) -> Option<&DecisionRule> {
        self.rules.iter().find(|r| r.id == id)
    }
}

fn parse_rule(content: &str, line: usize, schema: &PropertySchema) -> Result<DecisionRule, KbError> {
    let syntax = |message: String| KbError::Syntax { line, message };
    let tokens: Vec<&str> = content.split_whitespace().collect();
    if tokens.len() < 5 || tokens[0] != "rule" || tokens[2] != "=>" || tokens[4] != "when" {
        return Err(syntax(
            "expected 'rule <id> => <class> when <conditions>'".to_string(),
        ));
    }
    let id: u32 = tokens[1]
        .parse()
        .map_err(|_| syntax(format!("bad rule id '{}'", tokens[1])))?;
    let target = tokens[3].parse::<MaterialClass>().map_err(syntax)?;

    let body = &tokens[5..];
    if body.is_empty() {
        return Err(syntax(format!("rule {id} has no conditions")));
    }
    let conditions = body
        .split(|t| *t == "and")
        .map(|clause| parse_condition(clause, line, schema))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(DecisionRule {
        id,
        target,
        conditions,
    })
}

fn parse_condition(
    clause: &[&str],
    line: usize,
    schema: &PropertySchema,
) -> Result<Condition, KbError> {
    let cmp_err = |message: String| KbError::Comparator { line, message };
    let at = clause
        .iter()
        .position(|t| matches!(*t, "<" | "<=" | ">" | ">=" | "between"))
        .ok_or_else(|| cmp_err(format!("no comparator in '{}'", clause.join(" "))))?;
    if at == 0 {
        return Err(KbError::Syntax {
            line,
            message: format!("missing property name before '{}'", clause[0]),
        });
    }
    let property = clause[..at].join(" ");
    if schema.get(&property).is_none() {
        return Err(KbError::UnknownProperty { line, property });
    }
    let args = &clause[at + 1..];
    let number = |s: &str| -> Result<f64, KbError> {
        s.parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| cmp_err(format!("bad threshold '{s}'")))
    };
    let expect = |n: usize| -> Result<(), KbError> {
        if args.len() == n {
            Ok(())
        } else {
            Err(cmp_err(format!(
                "'{}' takes {n} threshold(s), found {}",
                clause[at],
                args.len()
            )))
        }
    };
    let comparator = match clause[at] {
        "between" => {
            expect(2)?;
            let (lo, hi) = (number(args[0])?, number(args[1])?);
            if lo > hi {
                return Err(cmp_err(format!("between bounds out of order ({lo} > {hi})")));
            }
            Comparator::Between(lo, hi)
        }
        op => {
            expect(1)?;
            let t = number(args[0])?;
            match op {
                "<" => Comparator::Lt(t),
                "<=" => Comparator::Le(t),
                ">" => Comparator::Gt(t),
                _ => Comparator::Ge(t),
            }
        }
    };
    Ok(Condition {
        property,
        comparator,
    })
}

/// One classifier node: a requirement property and its schema index.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Node {
    pub property: String,
    pub index: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassificationResult {
    pub class: MaterialClass,
    /// Ascending ids of every satisfied rule.
    pub index_pattern: Vec<u32>,
    /// Requirement properties in entry order.
    pub node_list: Vec<Node>,
    /// Satisfied-rule count per class, in canonical class order.
    pub scores: Vec<(MaterialClass, usize)>,
}

/// An evaluable rule that did not fire, with how close it came.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NearMiss {
    pub rule_id: u32,
    pub target: MaterialClass,
    pub failed: usize,
    pub total: usize,
    pub rule: String,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ClassifyError {
    #[error("unclassifiable requirement: no rule satisfied{}", describe_misses(.nearest_misses))]
    Unclassifiable { nearest_misses: Vec<NearMiss> },
    #[error("requirement property '{0}' is not in the schema")]
    UnknownProperty(String),
    #[error(transparent)]
    Value(#[from] crate::model::ValueError),
}

fn describe_misses(misses: &[NearMiss]) -> String {
    if misses.is_empty() {
        return " (no rule applies to the given properties)".to_string();
    }
    let parts: Vec<String> = misses
        .iter()
        .map(|m| format!("rule {} ({}/{} conditions failed)", m.rule_id, m.failed, m.total))
        .collect();
    format!("; nearest misses: {}", parts.join(", "))
}

const NEAREST_MISSES: usize = 3;

/// Classifies a requirement: every rule whose properties all appear in the
/// requirement is evaluated on scalarized values, each class scores its
/// satisfied rules, and the highest score wins with ties going to the
/// earlier class in Polymer, Ceramic, Metal order.
pub fn classify(
    req: &DesignRequirement,
    kb: &Knowledgebase,
    schema: &PropertySchema,
) -> Result<ClassificationResult, ClassifyError> {
    let mut node_list = Vec::with_capacity(req.len());
    let mut values = BTreeMap::new();
    for (name, value) in req.entries() {
        let def = schema
            .get(name)
            .ok_or_else(|| ClassifyError::UnknownProperty(name.clone()))?;
        values.insert(name.as_str(), scalarize(def, value)?);
        node_list.push(Node {
            property: name.clone(),
            index: def.position,
        });
    }

    let mut fired = Vec::new();
    let mut misses = Vec::new();
    for rule in kb.rules() {
        let mut failed = 0;
        let mut evaluable = true;
        for cond in &rule.conditions {
            match values.get(cond.property.as_str()) {
                Some(&v) if cond.comparator.holds(v) => {}
                Some(_) => failed += 1,
                None => {
                    evaluable = false;
                    break;
                }
            }
        }
        if !evaluable {
            continue;
        }
        if failed == 0 {
            fired.push(rule);
        } else {
            misses.push(NearMiss {
                rule_id: rule.id,
                target: rule.target,
                failed,
                total: rule.conditions.len(),
                rule: rule.to_string(),
            });
        }
    }

    if fired.is_empty() {
        misses.sort_by_key(|m| (m.failed, m.rule_id));
        misses.truncate(NEAREST_MISSES);
        return Err(ClassifyError::Unclassifiable {
            nearest_misses: misses,
        });
    }

    let scores: Vec<(MaterialClass, usize)> = MaterialClass::ALL
        .iter()
        .map(|&c| (c, fired.iter().filter(|r| r.target == c).count()))
        .collect();
    // max_by_key keeps the last maximum; scanning in reverse canonical order
    // makes the earliest class win ties.
    let class = scores
        .iter()
        .rev()
        .max_by_key(|(_, n)| *n)
        .map(|(c, _)| *c)
        .expect("three classes");

    let mut index_pattern: Vec<u32> = fired.iter().map(|r| r.id).collect();
    index_pattern.sort_unstable();
    index_pattern.dedup();

    Ok(ClassificationResult {
        class,
        index_pattern,
        node_list,
        scores,
    })
}
