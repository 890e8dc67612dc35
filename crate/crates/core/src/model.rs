//! Property values, materials, design requirements and the rules that turn
//! mixed-type values into reals.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::schema::{PropertyDef, PropertyKind, PropertySchema};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ValueError {
    #[error("property '{property}': unknown ordinal label '{label}'")]
    UnknownLabel { property: String, label: String },
    #[error("property '{property}': expected a {expected} value, got {found}")]
    KindMismatch {
        property: String,
        expected: PropertyKind,
        found: PropertyKind,
    },
    #[error("property '{property}': interval lo > hi ({lo} > {hi})")]
    IntervalOrder { property: String, lo: f64, hi: f64 },
    #[error("property '{property}': value is not finite")]
    NotFinite { property: String },
    #[error("expected {expected} property values, found {found}")]
    Arity { expected: usize, found: usize },
    #[error("property '{property}': cannot parse '{text}' as {kind}")]
    Unparsable {
        property: String,
        text: String,
        kind: PropertyKind,
    },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RequirementError {
    #[error("requirement is empty")]
    Empty,
    #[error("unknown property '{0}'")]
    UnknownProperty(String),
    #[error("malformed requirement line '{0}' (expected <property> = <value>)")]
    Malformed(String),
    #[error("property '{0}' appears more than once")]
    Duplicate(String),
    #[error(transparent)]
    Value(#[from] ValueError),
}

#[derive(Debug, Clone, PartialEq)]
pub enum PropertyValue {
    Numeric(f64),
    Interval { lo: f64, hi: f64 },
    Ordinal(String),
}

impl PropertyValue {
    pub fn kind(&self) -> PropertyKind {
        match self {
            PropertyValue::Numeric(_) => PropertyKind::Numeric,
            PropertyValue::Interval { .. } => PropertyKind::Interval,
            PropertyValue::Ordinal(_) => PropertyKind::Ordinal,
        }
    }

    /// Checks the value against its definition: matching kind, finite
    /// numbers, `lo <= hi`, and a label present in the scale.
    pub fn check(&self, def: &PropertyDef) -> Result<(), ValueError> {
        if self.kind() != def.kind {
            return Err(ValueError::KindMismatch {
                property: def.name.clone(),
                expected: def.kind,
                found: self.kind(),
            });
        }
        let not_finite = || ValueError::NotFinite {
            property: def.name.clone(),
        };
        match self {
            PropertyValue::Numeric(v) if !v.is_finite() => Err(not_finite()),
            PropertyValue::Interval { lo, hi } => {
                if !lo.is_finite() || !hi.is_finite() {
                    Err(not_finite())
                } else if lo > hi {
                    Err(ValueError::IntervalOrder {
                        property: def.name.clone(),
                        lo: *lo,
                        hi: *hi,
                    })
                } else {
                    Ok(())
                }
            }
            PropertyValue::Ordinal(label) => encode_ordinal(def, label).map(|_| ()),
            PropertyValue::Numeric(_) => Ok(()),
        }
    }

    /// Parses a cell in the textual value syntax shared by the CSV format,
    /// requirement files and the HTTP API: a decimal literal for numeric
    /// properties, `lo..hi` for intervals and a scale label for ordinals.
    pub fn parse_cell(def: &PropertyDef, text: &str) -> Result<Self, ValueError> {
        let text = text.trim();
        let unparsable = || ValueError::Unparsable {
            property: def.name.clone(),
            text: text.to_string(),
            kind: def.kind,
        };
        let value = match def.kind {
            PropertyKind::Numeric => PropertyValue::Numeric(text.parse().map_err(|_| unparsable())?),
            PropertyKind::Interval => {
                let (lo, hi) = text.split_once("..").ok_or_else(unparsable)?;
                let lo = lo.trim().parse().map_err(|_| unparsable())?;
                let hi = hi.trim().parse().map_err(|_| unparsable())?;
                PropertyValue::Interval { lo, hi }
            }
            PropertyKind::Ordinal => PropertyValue::Ordinal(text.to_string()),
        };
        value.check(def)?;
        Ok(value)
    }
}

/// Formats in the cell syntax accepted by [`PropertyValue::parse_cell`].
/// Floats use the shortest representation that parses back to the same bits.
impl fmt::Display for PropertyValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PropertyValue::Numeric(v) => write!(f, "{v}"),
            PropertyValue::Interval { lo, hi } => write!(f, "{lo}..{hi}"),
            PropertyValue::Ordinal(label) => f.write_str(label),
        }
    }
}

/// Weight of `label` on the property's ordinal scale.
pub fn encode_ordinal(def: &PropertyDef, label: &str) -> Result<f64, ValueError> {
    let unknown = || ValueError::UnknownLabel {
        property: def.name.clone(),
        label: label.to_string(),
    };
    match (&def.kind, &def.ordinal_scale) {
        (PropertyKind::Ordinal, Some(scale)) => scale.weight(label).ok_or_else(unknown),
        _ => Err(ValueError::KindMismatch {
            property: def.name.clone(),
            expected: def.kind,
            found: PropertyKind::Ordinal,
        }),
    }
}

/// Maps a value to a single real: numerics are unchanged, intervals become
/// their midpoint and ordinal labels their scale weight.
pub fn scalarize(def: &PropertyDef, value: &PropertyValue) -> Result<f64, ValueError> {
    if value.kind() != def.kind {
        return Err(ValueError::KindMismatch {
            property: def.name.clone(),
            expected: def.kind,
            found: value.kind(),
        });
    }
    match value {
        PropertyValue::Numeric(v) => Ok(*v),
        PropertyValue::Interval { lo, hi } => {
            let sum = lo + hi;
            if sum.is_finite() {
                Ok(sum / 2.0)
            } else {
                Ok(lo / 2.0 + hi / 2.0)
            }
        }
        PropertyValue::Ordinal(label) => encode_ordinal(def, label),
    }
}

/// Material class. The derived ordering (Polymer < Ceramic < Metal) is the
/// canonical order used for tie-breaks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum MaterialClass {
    Polymer,
    Ceramic,
    Metal,
}

impl MaterialClass {
    pub const ALL: [MaterialClass; 3] = [
        MaterialClass::Polymer,
        MaterialClass::Ceramic,
        MaterialClass::Metal,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            MaterialClass::Polymer => "Polymer",
            MaterialClass::Ceramic => "Ceramic",
            MaterialClass::Metal => "Metal",
        }
    }
}

impl fmt::Display for MaterialClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for MaterialClass {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        MaterialClass::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| format!("unknown material class '{s}'"))
    }
}

/// One database tuple. `values` is indexed by schema position and covers
/// every schema property.
#[derive(Debug, Clone, PartialEq)]
pub struct Material {
    pub id: String,
    pub name: String,
    pub class: MaterialClass,
    pub values: Vec<PropertyValue>,
}

impl Material {
    pub fn new(
        schema: &PropertySchema,
        id: impl Into<String>,
        name: impl Into<String>,
        class: MaterialClass,
        values: Vec<PropertyValue>,
    ) -> Result<Self, ValueError> {
        let id = id.into();
        if values.len() != schema.len() {
            return Err(ValueError::Arity {
                expected: schema.len(),
                found: values.len(),
            });
        }
        for (def, value) in schema.properties().iter().zip(&values) {
            value.check(def)?;
        }
        Ok(Self {
            id,
            name: name.into(),
            class,
            values,
        })
    }

    pub fn value(&self, schema: &PropertySchema, property: &str) -> Option<&PropertyValue> {
        schema.position(property).and_then(|i| self.values.get(i))
    }
}

/// The engineer's ordered, partial property specification.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignRequirement {
    entries: Vec<(String, PropertyValue)>,
}

impl DesignRequirement {
    pub fn new(
        schema: &PropertySchema,
        entries: Vec<(String, PropertyValue)>,
    ) -> Result<Self, RequirementError> {
        if entries.is_empty() {
            return Err(RequirementError::Empty);
        }
        let mut seen = HashSet::with_capacity(entries.len());
        for (name, value) in &entries {
            let def = schema
                .get(name)
                .ok_or_else(|| RequirementError::UnknownProperty(name.clone()))?;
            if !seen.insert(name.as_str()) {
                return Err(RequirementError::Duplicate(name.clone()));
            }
            value.check(def)?;
        }
        Ok(Self { entries })
    }

    /// Builds a requirement from `(property, cell text)` pairs, parsing each
    /// cell according to the property's kind.
    pub fn from_cells<S: AsRef<str>, T: AsRef<str>>(
        schema: &PropertySchema,
        cells: &[(S, T)],
    ) -> Result<Self, RequirementError> {
        let mut entries = Vec::with_capacity(cells.len());
        for (name, text) in cells {
            let name = name.as_ref().trim();
            let def = schema
                .get(name)
                .ok_or_else(|| RequirementError::UnknownProperty(name.to_string()))?;
            entries.push((name.to_string(), PropertyValue::parse_cell(def, text.as_ref())?));
        }
        Self::new(schema, entries)
    }

    /// Parses requirement-file text: one `<property> = <value>` per line,
    /// order significant, `#` comments and blank lines ignored.
    pub fn parse(schema: &PropertySchema, text: &str) -> Result<Self, RequirementError> {
        let mut cells = Vec::new();
        for raw in text.lines() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (name, value) = line
                .split_once('=')
                .ok_or_else(|| RequirementError::Malformed(line.to_string()))?;
            cells.push((name.trim().to_string(), value.trim().to_string()));
        }
        Self::from_cells(schema, &cells)
    }

    pub fn entries(&self) -> &[(String, PropertyValue)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|(n, _)| n.as_str())
    }

    pub fn get(&self, property: &str) -> Option<&PropertyValue> {
        self.entries.iter().find(|(n, _)| n == property).map(|(_, v)| v)
    }

    /// Scalarized values in requirement order.
    pub fn query_vector(&self, schema: &PropertySchema) -> Result<Vec<f64>, RequirementError> {
        self.entries
            .iter()
            .map(|(name, value)| {
                let def = schema
                    .get(name)
                    .ok_or_else(|| RequirementError::UnknownProperty(name.clone()))?;
                Ok(scalarize(def, value)?)
            })
            .collect()
    }

    /// Renders the requirement in the file syntax accepted by [`parse`].
    ///
    /// [`parse`]: DesignRequirement::parse
    pub fn to_text(&self) -> String {
        self.entries
            .iter()
            .map(|(n, v)| format!("{n} = {v}\n"))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn schema() -> PropertySchema {
        PropertySchema::default_schema()
    }

    #[test]
    fn ordinal_encoding_on_default_scale() {
        let s = schema();
        let def = s.get("Corrosion Resistance").unwrap();
        assert_eq!(encode_ordinal(def, "Poor"), Ok(1.0));
        assert_eq!(encode_ordinal(def, "Good"), Ok(3.0));
        assert_eq!(encode_ordinal(def, "Excellent"), Ok(5.0));
        let err = encode_ordinal(def, "Mediocre").unwrap_err();
        assert_eq!(
            err,
            ValueError::UnknownLabel {
                property: "Corrosion Resistance".into(),
                label: "Mediocre".into()
            }
        );
        assert!(err.to_string().contains("Mediocre"));
        assert!(err.to_string().contains("Corrosion Resistance"));
    }

    #[test]
    fn ordinal_weights_are_monotone() {
        let s = schema();
        let def = s.get("Wear Resistance").unwrap();
        let weights: Vec<f64> = def
            .ordinal_scale
            .as_ref()
            .unwrap()
            .labels()
            .map(|l| encode_ordinal(def, l).unwrap())
            .collect();
        assert!(weights.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn scalarize_rules() {
        let s = schema();
        let density = s.get("Density").unwrap();
        let v = scalarize(density, &PropertyValue::Interval { lo: 0.23, hi: 0.56 }).unwrap();
        assert!((v - 0.395).abs() < 1e-15);
        let tm = s.get("Tensile Modulus").unwrap();
        assert_eq!(scalarize(tm, &PropertyValue::Numeric(2000.0)), Ok(2000.0));
        let hard = s.get("Machinability").unwrap();
        assert_eq!(scalarize(hard, &PropertyValue::Ordinal("Good".into())), Ok(3.0));
        assert!(matches!(
            scalarize(tm, &PropertyValue::Ordinal("Good".into())),
            Err(ValueError::KindMismatch { .. })
        ));
    }

    #[test]
    fn degenerate_interval_scalarizes_to_endpoint() {
        let s = schema();
        let density = s.get("Density").unwrap();
        for a in [0.0, -3.5, 1e-300, 7.25, 1e300, f64::MAX] {
            assert_eq!(scalarize(density, &PropertyValue::Interval { lo: a, hi: a }), Ok(a));
        }
    }

    #[test]
    fn parse_cells() {
        let s = schema();
        let density = s.get("Density").unwrap();
        assert_eq!(
            PropertyValue::parse_cell(density, "0.23..0.56"),
            Ok(PropertyValue::Interval { lo: 0.23, hi: 0.56 })
        );
        assert!(matches!(
            PropertyValue::parse_cell(density, "0.56..0.23"),
            Err(ValueError::IntervalOrder { .. })
        ));
        assert!(PropertyValue::parse_cell(density, "0.4").is_err());
        let ts = s.get("Tensile Strength").unwrap();
        assert!(PropertyValue::parse_cell(ts, "abc").is_err());
        assert!(PropertyValue::parse_cell(ts, "inf").is_err());
        assert!(PropertyValue::parse_cell(ts, "NaN").is_err());
    }

    #[test]
    fn requirement_invariants() {
        let s = schema();
        assert_eq!(
            DesignRequirement::new(&s, vec![]),
            Err(RequirementError::Empty)
        );
        assert_eq!(
            DesignRequirement::from_cells(&s, &[("Flavor", "3")]),
            Err(RequirementError::UnknownProperty("Flavor".into()))
        );
        assert_eq!(
            DesignRequirement::from_cells(&s, &[("Hardness", "3"), ("Hardness", "4")]),
            Err(RequirementError::Duplicate("Hardness".into()))
        );

        let req = DesignRequirement::parse(
            &s,
            "# ordered\nHardness = 56.67\nDensity = 0.23..0.56\nMachinability = Good\n",
        )
        .unwrap();
        let names: Vec<&str> = req.names().collect();
        assert_eq!(names, ["Hardness", "Density", "Machinability"]);
        let q = req.query_vector(&s).unwrap();
        assert_eq!(q.len(), 3);
        assert_eq!(q[0], 56.67);
        assert_eq!(q[2], 3.0);
        assert_eq!(DesignRequirement::parse(&s, &req.to_text()).unwrap(), req);
    }

    #[test]
    fn class_order_and_names() {
        assert!(MaterialClass::Polymer < MaterialClass::Ceramic);
        assert!(MaterialClass::Ceramic < MaterialClass::Metal);
        assert_eq!("Metal".parse::<MaterialClass>(), Ok(MaterialClass::Metal));
        assert!("Plastic".parse::<MaterialClass>().is_err());
    }
}
