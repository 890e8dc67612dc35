//! Property schema: the ordered list of material properties, their value
//! kinds, units and ordinal scales.
//!
//! Schema files are line oriented, one property per line:
//!
//! ```text
//! <name> | <kind> | <unit> [| <label>=<weight>, <label>=<weight>, ...]
//! ```
//!
//! `kind` is `numeric`, `interval` or `ordinal`. The scale field is required
//! for ordinal properties and forbidden otherwise; its weights must increase
//! strictly in listed order. Text after `#` is a comment and blank lines are
//! skipped. A property's position is its index in file order.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// The shipped 23-property schema file.
pub const DEFAULT_SCHEMA: &str = include_str!("../data/schema23.txt");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PropertyKind {
    Numeric,
    Interval,
    Ordinal,
}

impl PropertyKind {
    pub fn as_str(self) -> &'static str {
        match self {
            PropertyKind::Numeric => "numeric",
            PropertyKind::Interval => "interval",
            PropertyKind::Ordinal => "ordinal",
        }
    }
}

impl fmt::Display for PropertyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PropertyKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "numeric" => Ok(PropertyKind::Numeric),
            "interval" => Ok(PropertyKind::Interval),
            "ordinal" => Ok(PropertyKind::Ordinal),
            other => Err(format!("unknown property kind '{other}'")),
        }
    }
}

/// Ordered label to weight mapping for a linguistic property.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrdinalScale {
    levels: Vec<(String, f64)>,
}

impl OrdinalScale {
    /// Builds a scale, rejecting empty scales, duplicate labels and weights
    /// that do not strictly increase.
    pub fn new(levels: Vec<(String, f64)>) -> Result<Self, String> {
        if levels.is_empty() {
            return Err("ordinal scale has no labels".into());
        }
        for (i, (label, weight)) in levels.iter().enumerate() {
            if label.is_empty() {
                return Err("ordinal scale has an empty label".into());
            }
            if !weight.is_finite() {
                return Err(format!("weight of '{label}' is not finite"));
            }
            if levels[..i].iter().any(|(l, _)| l == label) {
                return Err(format!("duplicate ordinal label '{label}'"));
            }
            if i > 0 && levels[i - 1].1 >= *weight {
                return Err(format!(
                    "ordinal weights must strictly increase ('{}'={} then '{}'={})",
                    levels[i - 1].0,
                    levels[i - 1].1,
                    label,
                    weight
                ));
            }
        }
        Ok(Self { levels })
    }

    /// Poor=1, Fair=2, Good=3, Very Good=4, Excellent=5.
    pub fn five_level() -> Self {
        let levels = ["Poor", "Fair", "Good", "Very Good", "Excellent"]
            .iter()
            .enumerate()
            .map(|(i, l)| (l.to_string(), (i + 1) as f64))
            .collect();
        Self { levels }
    }

    pub fn weight(&self, label: &str) -> Option<f64> {
        self.levels.iter().find(|(l, _)| l == label).map(|(_, w)| *w)
    }

    pub fn labels(&self) -> impl Iterator<Item = &str> {
        self.levels.iter().map(|(l, _)| l.as_str())
    }

    pub fn levels(&self) -> &[(String, f64)] {
        &self.levels
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropertyDef {
    pub name: String,
    pub kind: PropertyKind,
    pub unit: String,
    /// Present iff `kind` is ordinal.
    pub ordinal_scale: Option<OrdinalScale>,
    pub position: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SchemaError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("duplicate property name '{0}'")]
    DuplicateName(String),
    #[error("property '{0}': {1}")]
    Invalid(String, String),
    #[error("schema defines no properties")]
    Empty,
}

/// Ordered property definitions with name lookup.
#[derive(Debug, Clone, PartialEq)]
pub struct PropertySchema {
    properties: Vec<PropertyDef>,
    by_name: HashMap<String, usize>,
}

impl PropertySchema {
    /// Builds a schema from `(name, kind, unit, scale)` records; positions
    /// are assigned in order.
    pub fn new(
        records: Vec<(String, PropertyKind, String, Option<OrdinalScale>)>,
    ) -> Result<Self, SchemaError> {
        if records.is_empty() {
            return Err(SchemaError::Empty);
        }
        let mut properties = Vec::with_capacity(records.len());
        let mut by_name = HashMap::with_capacity(records.len());
        for (position, (name, kind, unit, scale)) in records.into_iter().enumerate() {
            check_name(&name).map_err(|m| SchemaError::Invalid(name.clone(), m))?;
            match (kind, &scale) {
                (PropertyKind::Ordinal, None) => {
                    return Err(SchemaError::Invalid(
                        name,
                        "ordinal property needs a scale".into(),
                    ))
                }
                (PropertyKind::Numeric | PropertyKind::Interval, Some(_)) => {
                    return Err(SchemaError::Invalid(
                        name,
                        format!("{kind} property cannot carry an ordinal scale"),
                    ))
                }
                _ => {}
            }
            if by_name.insert(name.clone(), position).is_some() {
                return Err(SchemaError::DuplicateName(name));
            }
            properties.push(PropertyDef {
                name,
                kind,
                unit,
                ordinal_scale: scale,
                position,
            });
        }
        Ok(Self {
            properties,
            by_name,
        })
    }

    pub fn parse(text: &str) -> Result<Self, SchemaError> {
        let mut records = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let err = |message: String| SchemaError::Parse { line, message };
            let fields: Vec<&str> = content.split('|').map(str::trim).collect();
            if !(3..=4).contains(&fields.len()) {
                return Err(err(format!(
                    "expected 3 or 4 '|'-separated fields, found {}",
                    fields.len()
                )));
            }
            let kind: PropertyKind = fields[1].parse().map_err(err)?;
            let scale = match fields.get(3) {
                Some(scale) => Some(parse_scale(scale).map_err(err)?),
                None => None,
            };
            records.push((fields[0].to_string(), kind, fields[2].to_string(), scale));
        }
        Self::new(records)
    }

    /// The shipped 23-property schema.
    pub fn default_schema() -> Self {
        Self::parse(DEFAULT_SCHEMA).expect("shipped schema is valid")
    }

    pub fn len(&self) -> usize {
        self.properties.len()
    }

    pub fn is_empty(&self) -> bool {
        self.properties.is_empty()
    }

    pub fn properties(&self) -> &[PropertyDef] {
        &self.properties
    }

    pub fn get(&self, name: &str) -> Option<&PropertyDef> {
        self.by_name.get(name).map(|&i| &self.properties[i])
    }

    pub fn position(&self, name: &str) -> Option<usize> {
        self.by_name.get(name).copied()
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.properties.iter().map(|p| p.name.as_str())
    }

    /// Renders the schema back into the file format accepted by [`parse`].
    ///
    /// [`parse`]: PropertySchema::parse
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for p in &self.properties {
            out.push_str(&format!("{} | {} | {}", p.name, p.kind, p.unit));
            if let Some(scale) = &p.ordinal_scale {
                let levels: Vec<String> = scale
                    .levels()
                    .iter()
                    .map(|(l, w)| format!("{l}={w}"))
                    .collect();
                out.push_str(" | ");
                out.push_str(&levels.join(", "));
            }
            out.push('\n');
        }
        out
    }
}

// Names end up in CSV headers, requirement lines and rule conditions, so the
// separators of those formats are off limits.
fn check_name(name: &str) -> Result<(), String> {
    if name.is_empty() {
        return Err("empty property name".into());
    }
    if name != name.trim() {
        return Err("leading or trailing whitespace".into());
    }
    if let Some(c) = name.chars().find(|c| matches!(c, ',' | '=' | '|' | '#' | '"')) {
        return Err(format!("character '{c}' is not allowed in a property name"));
    }
    const RESERVED: [&str; 7] = ["and", "<", "<=", ">", ">=", "between", "when"];
    if let Some(word) = name.split_whitespace().find(|w| RESERVED.contains(w)) {
        return Err(format!("reserved word '{word}' is not allowed in a property name"));
    }
    Ok(())
}

fn parse_scale(text: &str) -> Result<OrdinalScale, String> {
    let mut levels = Vec::new();
    for item in text.split(',') {
        let (label, weight) = item
            .split_once('=')
            .ok_or_else(|| format!("scale entry '{}' is not <label>=<weight>", item.trim()))?;
        let weight: f64 = weight
            .trim()
            .parse()
            .map_err(|_| format!("bad weight '{}' for label '{}'", weight.trim(), label.trim()))?;
        levels.push((label.trim().to_string(), weight));
    }
    OrdinalScale::new(levels)
}
