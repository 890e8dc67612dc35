//! Materials database ingestion, class fragmentation and the numeric data
//! matrix built from a fragment.
//!
//! CSV layout: header `id,name,class,<prop1>,...,<propM>` with properties in
//! schema order; numeric cells are decimal literals, interval cells `lo..hi`,
//! ordinal cells scale labels. UTF-8, comma separated.

use std::collections::HashSet;

use thiserror::Error;

use crate::model::{scalarize, DesignRequirement, Material, MaterialClass, PropertyValue, ValueError};
use crate::schema::PropertySchema;

#[derive(Debug, Error)]
pub enum DataError {
    #[error("header mismatch: {0}")]
    Header(String),
    /// `row` counts data rows from 1; the header is row 0.
    #[error("row {row}: {message}")]
    Row { row: usize, message: String },
    #[error("row {row}: duplicate material id '{id}'")]
    DuplicateId { row: usize, id: String },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("requirement property '{0}' is not an attribute of the database")]
    NotAnAttribute(String),
    #[error("fragment column '{0}' is not in the schema")]
    UnknownColumn(String),
    #[error(transparent)]
    Value(#[from] ValueError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct MaterialDatabase {
    schema: PropertySchema,
    materials: Vec<Material>,
}

impl MaterialDatabase {
    pub fn new(schema: PropertySchema, materials: Vec<Material>) -> Result<Self, DataError> {
        let mut ids = HashSet::with_capacity(materials.len());
        for (i, m) in materials.iter().enumerate() {
            if !ids.insert(m.id.as_str()) {
                return Err(DataError::DuplicateId {
                    row: i + 1,
                    id: m.id.clone(),
                });
            }
            if m.values.len() != schema.len() {
                return Err(DataError::Row {
                    row: i + 1,
                    message: ValueError::Arity {
                        expected: schema.len(),
                        found: m.values.len(),
                    }
                    .to_string(),
                });
            }
            for (def, v) in schema.properties().iter().zip(&m.values) {
                v.check(def).map_err(|e| DataError::Row {
                    row: i + 1,
                    message: e.to_string(),
                })?;
            }
        }
        Ok(Self { schema, materials })
    }

    pub fn schema(&self) -> &PropertySchema {
        &self.schema
    }

    pub fn materials(&self) -> &[Material] {
        &self.materials
    }

    pub fn len(&self) -> usize {
        self.materials.len()
    }

    pub fn is_empty(&self) -> bool {
        self.materials.is_empty()
    }

    pub fn count_by_class(&self) -> [(MaterialClass, usize); 3] {
        MaterialClass::ALL.map(|c| (c, self.materials.iter().filter(|m| m.class == c).count()))
    }

    /// Serializes to the CSV layout read by [`ingest_csv`].
    pub fn to_csv(&self) -> String {
        let mut w = csv::WriterBuilder::new().from_writer(Vec::new());
        let header = ["id", "name", "class"]
            .into_iter()
            .chain(self.schema.names());
        w.write_record(header).expect("in-memory write");
        for m in &self.materials {
            let cells: Vec<String> = m.values.iter().map(|v| v.to_string()).collect();
            w.write_record(
                [m.id.as_str(), m.name.as_str(), m.class.as_str()]
                    .into_iter()
                    .chain(cells.iter().map(String::as_str)),
            )
            .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 input")
    }
}

fn reader(content: &str) -> csv::Reader<&[u8]> {
    csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(content.as_bytes())
}

fn check_header(header: &csv::StringRecord, schema: &PropertySchema) -> Result<(), DataError> {
    let expected: Vec<&str> = ["id", "name", "class"]
        .into_iter()
        .chain(schema.names())
        .collect();
    if header.len() != expected.len() {
        return Err(DataError::Header(format!(
            "expected {} columns, found {}",
            expected.len(),
            header.len()
        )));
    }
    for (i, (got, want)) in header.iter().zip(&expected).enumerate() {
        if got != *want {
            return Err(DataError::Header(format!(
                "column {}: expected '{want}', found '{got}'",
                i + 1
            )));
        }
    }
    Ok(())
}

fn parse_record(
    record: &csv::StringRecord,
    row: usize,
    schema: &PropertySchema,
) -> Result<Material, DataError> {
    let row_err = |message: String| DataError::Row { row, message };
    if record.len() != schema.len() + 3 {
        return Err(row_err(format!(
            "expected {} cells, found {}",
            schema.len() + 3,
            record.len()
        )));
    }
    let id = &record[0];
    if id.is_empty() {
        return Err(row_err("empty material id".into()));
    }
    let class: MaterialClass = record[2].parse().map_err(row_err)?;
    let values = schema
        .properties()
        .iter()
        .zip(record.iter().skip(3))
        .map(|(def, cell)| PropertyValue::parse_cell(def, cell))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| row_err(e.to_string()))?;
    Ok(Material {
        id: id.to_string(),
        name: record[1].to_string(),
        class,
        values,
    })
}

/// Reads and fully type-checks a materials CSV; row order is preserved.
pub fn ingest_csv(content: &str, schema: &PropertySchema) -> Result<MaterialDatabase, DataError> {
    let mut rdr = reader(content);
    check_header(rdr.headers()?, schema)?;
    let mut materials: Vec<Material> = Vec::new();
    let mut ids = HashSet::new();
    for (i, record) in rdr.records().enumerate() {
        let row = i + 1;
        let record = record.map_err(|e| DataError::Row {
            row,
            message: e.to_string(),
        })?;
        let material = parse_record(&record, row, schema)?;
        if !ids.insert(material.id.clone()) {
            return Err(DataError::DuplicateId {
                row,
                id: material.id,
            });
        }
        materials.push(material);
    }
    Ok(MaterialDatabase {
        schema: schema.clone(),
        materials,
    })
}

/// Like [`ingest_csv`] but keeps going after a bad row and returns every
/// row-level problem. A bad header still stops the scan. On success returns
/// the row count.
pub fn validate_csv(content: &str, schema: &PropertySchema) -> Result<usize, Vec<DataError>> {
    let mut rdr = reader(content);
    match rdr.headers() {
        Ok(h) => check_header(h, schema).map_err(|e| vec![e])?,
        Err(e) => return Err(vec![e.into()]),
    }
    let mut errors = Vec::new();
    let mut ids = HashSet::new();
    let mut rows = 0;
    for (i, record) in rdr.records().enumerate() {
        let row = i + 1;
        rows = row;
        let parsed = record
            .map_err(|e| DataError::Row {
                row,
                message: e.to_string(),
            })
            .and_then(|r| parse_record(&r, row, schema));
        match parsed {
            Ok(m) if !ids.insert(m.id.clone()) => {
                errors.push(DataError::DuplicateId { row, id: m.id })
            }
            Ok(_) => {}
            Err(e) => errors.push(e),
        }
    }
    if errors.is_empty() {
        Ok(rows)
    } else {
        Err(errors)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FragmentRow {
    pub id: String,
    pub values: Vec<PropertyValue>,
}

/// Class-filtered, requirement-projected slice of a database.
#[derive(Debug, Clone, PartialEq)]
pub struct FragmentDatabase {
    pub class: MaterialClass,
    /// Requirement properties, in requirement order.
    pub attributes: Vec<String>,
    pub rows: Vec<FragmentRow>,
}

impl FragmentDatabase {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

/// Keeps the rows of `class` and projects them onto the requirement's
/// properties in requirement order, in a single pass over the database.
/// An empty result is not an error.
pub fn fragment(
    db: &MaterialDatabase,
    class: MaterialClass,
    req: &DesignRequirement,
) -> Result<FragmentDatabase, DataError> {
    let positions = req
        .names()
        .map(|n| {
            db.schema
                .position(n)
                .ok_or_else(|| DataError::NotAnAttribute(n.to_string()))
        })
        .collect::<Result<Vec<_>, _>>()?;

    let rows = db
        .materials
        .iter()
        .filter(|m| m.class == class)
        .map(|m| FragmentRow {
            id: m.id.clone(),
            values: positions.iter().map(|&p| m.values[p].clone()).collect(),
        })
        .collect();

    Ok(FragmentDatabase {
        class,
        attributes: req.names().map(str::to_string).collect(),
        rows,
    })
}

/// Dense row-major matrix of scalarized fragment values.
#[derive(Debug, Clone, PartialEq)]
pub struct DataMatrix {
    row_ids: Vec<String>,
    columns: Vec<String>,
    cells: Vec<f64>,
}

impl DataMatrix {
    /// Builds a matrix from rows; every row must have `columns.len()` cells.
    pub fn from_rows(
        row_ids: Vec<String>,
        columns: Vec<String>,
        rows: Vec<Vec<f64>>,
    ) -> Result<Self, String> {
        if row_ids.len() != rows.len() {
            return Err(format!("{} ids for {} rows", row_ids.len(), rows.len()));
        }
        let width = columns.len();
        let mut cells = Vec::with_capacity(rows.len() * width);
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != width {
                return Err(format!("row {i} has {} cells, expected {width}", row.len()));
            }
            cells.extend(row);
        }
        Ok(Self {
            row_ids,
            columns,
            cells,
        })
    }

    pub fn rows(&self) -> usize {
        self.row_ids.len()
    }

    pub fn cols(&self) -> usize {
        self.columns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.row_ids.is_empty()
    }

    pub fn row_ids(&self) -> &[String] {
        &self.row_ids
    }

    pub fn columns(&self) -> &[String] {
        &self.columns
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let n = self.cols();
        &self.cells[i * n..(i + 1) * n]
    }

    pub fn get(&self, i: usize, f: usize) -> f64 {
        self.cells[i * self.cols() + f]
    }

    pub fn iter_rows(&self) -> impl Iterator<Item = (&str, &[f64])> {
        let n = self.cols();
        self.row_ids
            .iter()
            .enumerate()
            .map(move |(i, id)| (id.as_str(), &self.cells[i * n..(i + 1) * n]))
    }

    pub(crate) fn map_cells(&self, f: impl Fn(usize, f64) -> f64) -> Self {
        let n = self.cols().max(1);
        Self {
            row_ids: self.row_ids.clone(),
            columns: self.columns.clone(),
            cells: self
                .cells
                .iter()
                .enumerate()
                .map(|(k, &v)| f(k % n, v))
                .collect(),
        }
    }
}

/// Scalarizes every fragment cell, preserving row and column order.
pub fn to_matrix(frag: &FragmentDatabase, schema: &PropertySchema) -> Result<DataMatrix, DataError> {
    let defs = frag
        .attributes
        .iter()
        .map(|a| schema.get(a).ok_or_else(|| DataError::UnknownColumn(a.clone())))
        .collect::<Result<Vec<_>, _>>()?;
    let mut cells = Vec::with_capacity(frag.rows.len() * defs.len());
    for row in &frag.rows {
        for (def, value) in defs.iter().zip(&row.values) {
            cells.push(scalarize(def, value)?);
        }
    }
    Ok(DataMatrix {
        row_ids: frag.rows.iter().map(|r| r.id.clone()).collect(),
        columns: frag.attributes.clone(),
        cells,
    })
}
