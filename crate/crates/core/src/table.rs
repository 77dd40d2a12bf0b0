//! Columnar data model, CSV ingestion and dataset-level cleaning.
//!
//! A [`Table`] is immutable once built. Numeric columns hold finite `f64`
//! values and categorical columns hold non-empty text. Cleaning operations
//! ([`deduplicate`], [`split_features_target`]) return new tables and never
//! reorder rows.

use std::collections::{HashMap, HashSet};
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ColumnKind {
    Numeric,
    Categorical,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColumnDef {
    pub name: String,
    pub kind: ColumnKind,
}

impl ColumnDef {
    pub fn new(name: impl Into<String>, kind: ColumnKind) -> Self {
        Self {
            name: name.into(),
            kind,
        }
    }
}

/// Ordered column definitions plus the optional prediction column.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawSchema", into = "RawSchema")]
pub struct Schema {
    columns: Vec<ColumnDef>,
    target: Option<String>,
}

#[derive(Serialize, Deserialize)]
struct RawSchema {
    columns: Vec<ColumnDef>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    target: Option<String>,
}

impl TryFrom<RawSchema> for Schema {
    type Error = Error;

    fn try_from(raw: RawSchema) -> Result<Self> {
        Schema::new(raw.columns, raw.target)
    }
}

impl From<Schema> for RawSchema {
    fn from(s: Schema) -> Self {
        RawSchema {
            columns: s.columns,
            target: s.target,
        }
    }
}

/// Attribute names of the UGRansome table, in file order.
pub const UGRANSOME_COLUMNS: [(&str, ColumnKind); 14] = [
    ("Time", ColumnKind::Numeric),
    ("Protocol", ColumnKind::Categorical),
    ("Flag", ColumnKind::Categorical),
    ("Family", ColumnKind::Categorical),
    ("Clusters", ColumnKind::Numeric),
    ("SeedAddress", ColumnKind::Categorical),
    ("ExpAddress", ColumnKind::Categorical),
    ("BTC", ColumnKind::Numeric),
    ("USD", ColumnKind::Numeric),
    ("NetflowBytes", ColumnKind::Numeric),
    ("IPAddress", ColumnKind::Categorical),
    ("Threats", ColumnKind::Categorical),
    ("Port", ColumnKind::Numeric),
    ("Prediction", ColumnKind::Categorical),
];

impl Schema {
    /// Builds a schema, checking that names are unique and that the target,
    /// when given, names a categorical column.
    pub fn new(columns: Vec<ColumnDef>, target: Option<String>) -> Result<Self> {
        let mut seen = HashSet::new();
        for c in &columns {
            if !seen.insert(c.name.as_str()) {
                return Err(Error::Schema(format!("duplicate column name {:?}", c.name)));
            }
        }
        if let Some(t) = &target {
            match columns.iter().find(|c| &c.name == t) {
                None => {
                    return Err(Error::Schema(format!("target {t:?} is not a column")));
                }
                Some(c) if c.kind != ColumnKind::Categorical => {
                    return Err(Error::Schema(format!("target {t:?} must be categorical")));
                }
                Some(_) => {}
            }
        }
        Ok(Self { columns, target })
    }

    /// The fourteen-attribute UGRansome layout with `Prediction` as target.
    pub fn ugransome() -> Self {
        let columns = UGRANSOME_COLUMNS
            .iter()
            .map(|(n, k)| ColumnDef::new(*n, *k))
            .collect();
        Self::new(columns, Some("Prediction".to_owned())).expect("built-in schema is valid")
    }

    pub fn from_json_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Read {
            path: path.to_owned(),
            source,
        })?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn columns(&self) -> &[ColumnDef] {
        &self.columns
    }

    pub fn target(&self) -> Option<&str> {
        self.target.as_deref()
    }

    pub fn len(&self) -> usize {
        self.columns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.columns.is_empty()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c.name == name)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.columns.iter().map(|c| c.name.as_str())
    }
}

impl Default for Schema {
    fn default() -> Self {
        Self::ugransome()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Column {
    Numeric(Vec<f64>),
    Categorical(Vec<String>),
}

impl Column {
    pub fn kind(&self) -> ColumnKind {
        match self {
            Column::Numeric(_) => ColumnKind::Numeric,
            Column::Categorical(_) => ColumnKind::Categorical,
        }
    }

    pub fn len(&self) -> usize {
        match self {
            Column::Numeric(v) => v.len(),
            Column::Categorical(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn as_numeric(&self) -> Option<&[f64]> {
        match self {
            Column::Numeric(v) => Some(v),
            Column::Categorical(_) => None,
        }
    }

    pub fn as_categorical(&self) -> Option<&[String]> {
        match self {
            Column::Categorical(v) => Some(v),
            Column::Numeric(_) => None,
        }
    }

    /// Renders one cell the way [`write_csv`] prints it.
    pub fn cell_text(&self, row: usize) -> String {
        match self {
            Column::Numeric(v) => format!("{}", v[row]),
            Column::Categorical(v) => v[row].clone(),
        }
    }

    fn take(&self, rows: &[usize]) -> Column {
        match self {
            Column::Numeric(v) => Column::Numeric(rows.iter().map(|&r| v[r]).collect()),
            Column::Categorical(v) => {
                Column::Categorical(rows.iter().map(|&r| v[r].clone()).collect())
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    schema: Schema,
    columns: Vec<Column>,
    rows: usize,
}

impl Table {
    /// Assembles a table from a schema and matching columns.
    ///
    /// Every column must have the schema's kind and a common length; numeric
    /// cells must be finite and categorical cells non-empty.
    pub fn new(schema: Schema, columns: Vec<Column>) -> Result<Self> {
        if schema.len() != columns.len() {
            return Err(Error::Schema(format!(
                "schema has {} columns but {} were supplied",
                schema.len(),
                columns.len()
            )));
        }
        let rows = columns.first().map_or(0, Column::len);
        for (def, col) in schema.columns().iter().zip(&columns) {
            if def.kind != col.kind() {
                return Err(Error::ColumnKind {
                    column: def.name.clone(),
                    expected: kind_name(def.kind),
                });
            }
            if col.len() != rows {
                return Err(Error::LengthMismatch {
                    left: rows,
                    right: col.len(),
                });
            }
            match col {
                Column::Numeric(v) => {
                    if let Some(i) = v.iter().position(|x| !x.is_finite()) {
                        return Err(Error::ParseNumber {
                            row: i + 1,
                            column: def.name.clone(),
                            value: v[i].to_string(),
                        });
                    }
                }
                Column::Categorical(v) => {
                    if let Some(i) = v.iter().position(|s| s.trim().is_empty()) {
                        return Err(Error::MissingCell {
                            row: i + 1,
                            column: def.name.clone(),
                        });
                    }
                }
            }
        }
        Ok(Self {
            schema,
            columns,
            rows,
        })
    }

    /// A zero-row table with the given schema.
    pub fn empty(schema: Schema) -> Self {
        let columns = schema
            .columns()
            .iter()
            .map(|c| match c.kind {
                ColumnKind::Numeric => Column::Numeric(Vec::new()),
                ColumnKind::Categorical => Column::Categorical(Vec::new()),
            })
            .collect();
        Self {
            schema,
            columns,
            rows: 0,
        }
    }

    pub fn schema(&self) -> &Schema {
        &self.schema
    }

    pub fn row_count(&self) -> usize {
        self.rows
    }

    pub fn column_count(&self) -> usize {
        self.columns.len()
    }

    pub fn columns(&self) -> &[Column] {
        &self.columns
    }

    pub fn column_at(&self, index: usize) -> &Column {
        &self.columns[index]
    }

    pub fn column(&self, name: &str) -> Result<&Column> {
        self.schema
            .index_of(name)
            .map(|i| &self.columns[i])
            .ok_or_else(|| Error::UnknownColumn(name.to_owned()))
    }

    pub fn numeric(&self, name: &str) -> Result<&[f64]> {
        self.column(name)?
            .as_numeric()
            .ok_or_else(|| Error::ColumnKind {
                column: name.to_owned(),
                expected: "numeric",
            })
    }

    pub fn categorical(&self, name: &str) -> Result<&[String]> {
        self.column(name)?
            .as_categorical()
            .ok_or_else(|| Error::ColumnKind {
                column: name.to_owned(),
                expected: "categorical",
            })
    }

    /// Rows at the given indices, in the given order.
    pub fn take_rows(&self, rows: &[usize]) -> Table {
        Table {
            schema: self.schema.clone(),
            columns: self.columns.iter().map(|c| c.take(rows)).collect(),
            rows: rows.len(),
        }
    }

    /// Projects onto the named columns. The target survives only if selected.
    pub fn select_columns<S: AsRef<str>>(&self, names: &[S]) -> Result<Table> {
        let mut defs = Vec::with_capacity(names.len());
        let mut cols = Vec::with_capacity(names.len());
        for name in names {
            let name = name.as_ref();
            let i = self
                .schema
                .index_of(name)
                .ok_or_else(|| Error::UnknownColumn(name.to_owned()))?;
            defs.push(self.schema.columns()[i].clone());
            cols.push(self.columns[i].clone());
        }
        let target = self
            .schema
            .target()
            .filter(|t| names.iter().any(|n| n.as_ref() == *t))
            .map(str::to_owned);
        let schema = Schema::new(defs, target)?;
        Ok(Table {
            schema,
            columns: cols,
            rows: self.rows,
        })
    }

    /// Replaces a column's values, changing its kind if needed. Replacing the
    /// target with a numeric column is rejected.
    pub fn with_column(&self, name: &str, column: Column) -> Result<Table> {
        let i = self
            .schema
            .index_of(name)
            .ok_or_else(|| Error::UnknownColumn(name.to_owned()))?;
        let mut defs = self.schema.columns().to_vec();
        defs[i].kind = column.kind();
        let schema = Schema::new(defs, self.schema.target.clone())?;
        let mut columns = self.columns.clone();
        columns[i] = column;
        Table::new(schema, columns)
    }

    pub fn row_text(&self, row: usize) -> Vec<String> {
        self.columns.iter().map(|c| c.cell_text(row)).collect()
    }
}

fn kind_name(kind: ColumnKind) -> &'static str {
    match kind {
        ColumnKind::Numeric => "numeric",
        ColumnKind::Categorical => "categorical",
    }
}

/// Parses a numeric cell. Surrounding whitespace and thousands separators
/// are ignored; the result must be finite.
pub fn parse_numeric(text: &str) -> Option<f64> {
    let cleaned: String = text.trim().chars().filter(|&c| c != ',').collect();
    cleaned.parse::<f64>().ok().filter(|v| v.is_finite())
}

/// Loads a CSV file into a table that honors `schema`.
///
/// Row numbers in diagnostics are 1-based record positions in the file,
/// counting the header when present.
pub fn load_csv(path: &Path, schema: &Schema, has_header: bool) -> Result<Table> {
    load_csv_with(path, schema, HeaderMode::from(has_header))
}

pub fn load_csv_with(path: &Path, schema: &Schema, header: HeaderMode) -> Result<Table> {
    let file = File::open(path).map_err(|source| Error::Read {
        path: path.to_owned(),
        source,
    })?;
    read_csv_with(file, schema, header)
}

/// How the first record of a CSV is treated.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HeaderMode {
    Present,
    Absent,
    /// A header iff the first record lists exactly the schema's column names
    /// in order.
    #[default]
    Detect,
}

impl From<bool> for HeaderMode {
    fn from(has_header: bool) -> Self {
        if has_header {
            HeaderMode::Present
        } else {
            HeaderMode::Absent
        }
    }
}

pub fn read_csv<R: Read>(reader: R, schema: &Schema, has_header: bool) -> Result<Table> {
    read_csv_with(reader, schema, HeaderMode::from(has_header))
}

pub fn read_csv_with<R: Read>(reader: R, schema: &Schema, header: HeaderMode) -> Result<Table> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(reader);
    let mut columns: Vec<Column> = Table::empty(schema.clone()).columns;
    let mut rows = 0;
    for (i, record) in rdr.records().enumerate() {
        let record = record?;
        let row = i + 1;
        if i == 0 {
            let is_header = match header {
                HeaderMode::Present => true,
                HeaderMode::Absent => false,
                HeaderMode::Detect => {
                    record.len() == schema.len() && record.iter().map(str::trim).eq(schema.names())
                }
            };
            if is_header {
                let matched = record
                    .iter()
                    .filter(|h| schema.index_of(h.trim()).is_some())
                    .count();
                if matched == 0 && !schema.is_empty() {
                    log::warn!("header row matches none of the schema's column names");
                }
                continue;
            }
        }
        if record.len() != schema.len() {
            return Err(Error::FieldCount {
                row,
                expected: schema.len(),
                found: record.len(),
            });
        }
        for ((field, def), col) in record.iter().zip(schema.columns()).zip(&mut columns) {
            if field.trim().is_empty() {
                return Err(Error::MissingCell {
                    row,
                    column: def.name.clone(),
                });
            }
            match col {
                Column::Numeric(v) => {
                    let x = parse_numeric(field).ok_or_else(|| Error::ParseNumber {
                        row,
                        column: def.name.clone(),
                        value: field.to_owned(),
                    })?;
                    v.push(x);
                }
                Column::Categorical(v) => v.push(field.to_owned()),
            }
        }
        rows += 1;
    }
    Ok(Table {
        schema: schema.clone(),
        columns,
        rows,
    })
}

/// Writes a table in the dialect [`read_csv`] consumes. Numbers are printed
/// with the shortest representation that parses back to the same value.
pub fn write_csv<W: Write>(table: &Table, writer: W, header: bool) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    if header {
        w.write_record(table.schema.names())?;
    }
    for row in 0..table.rows {
        w.write_record(table.row_text(row))?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub fn save_csv(table: &Table, path: &Path, header: bool) -> Result<()> {
    let file = File::create(path).map_err(|source| Error::Write {
        path: path.to_owned(),
        source,
    })?;
    write_csv(table, std::io::BufWriter::new(file), header)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DatasetStats {
    #[serde(rename = "rows")]
    pub row_count: usize,
    #[serde(rename = "columns")]
    pub column_count: usize,
    pub duplicate_rows: usize,
    pub duplicate_fraction: f64,
    pub missing_cells: usize,
}

/// Flags each row that repeats an earlier row in every field.
///
/// Numeric cells compare by value (so `0` and `-0` are equal), text cells
/// compare exactly.
pub fn duplicate_mask(t: &Table) -> Vec<bool> {
    let mut keys: Vec<Vec<u64>> = vec![Vec::with_capacity(t.column_count()); t.rows];
    for col in &t.columns {
        match col {
            Column::Numeric(v) => {
                for (k, &x) in keys.iter_mut().zip(v) {
                    let x = if x == 0.0 { 0.0 } else { x };
                    k.push(x.to_bits());
                }
            }
            Column::Categorical(v) => {
                let mut ids: HashMap<&str, u64> = HashMap::new();
                for (k, s) in keys.iter_mut().zip(v) {
                    let next = ids.len() as u64;
                    k.push(*ids.entry(s.as_str()).or_insert(next));
                }
            }
        }
    }
    let mut seen = HashSet::with_capacity(t.rows);
    keys.into_iter().map(|k| !seen.insert(k)).collect()
}

pub fn dataset_stats(t: &Table) -> DatasetStats {
    let duplicate_rows = duplicate_mask(t).into_iter().filter(|&d| d).count();
    let duplicate_fraction = if t.rows > 0 {
        duplicate_rows as f64 / t.rows as f64
    } else {
        0.0
    };
    DatasetStats {
        row_count: t.rows,
        column_count: t.column_count(),
        duplicate_rows,
        duplicate_fraction,
        missing_cells: 0,
    }
}

/// Keeps the first occurrence of every distinct row, in original order.
pub fn deduplicate(t: &Table) -> (Table, usize) {
    let keep: Vec<usize> = duplicate_mask(t)
        .into_iter()
        .enumerate()
        .filter(|(_, dup)| !dup)
        .map(|(i, _)| i)
        .collect();
    let removed = t.rows - keep.len();
    (t.take_rows(&keep), removed)
}

/// Class labels encoded against their sorted alphabet.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Labels {
    classes: Vec<String>,
    codes: Vec<usize>,
}

impl Labels {
    pub fn from_strings<S: AsRef<str>>(values: &[S]) -> Self {
        let mut classes: Vec<String> = values.iter().map(|v| v.as_ref().to_owned()).collect();
        classes.sort();
        classes.dedup();
        let codes = values
            .iter()
            .map(|v| {
                classes
                    .binary_search_by(|c| c.as_str().cmp(v.as_ref()))
                    .unwrap()
            })
            .collect();
        Self { classes, codes }
    }

    /// Sorted, distinct class names.
    pub fn classes(&self) -> &[String] {
        &self.classes
    }

    pub fn codes(&self) -> &[usize] {
        &self.codes
    }

    pub fn len(&self) -> usize {
        self.codes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.codes.is_empty()
    }

    pub fn class_count(&self) -> usize {
        self.classes.len()
    }

    pub fn get(&self, row: usize) -> &str {
        &self.classes[self.codes[row]]
    }

    pub fn to_strings(&self) -> Vec<String> {
        self.codes
            .iter()
            .map(|&c| self.classes[c].clone())
            .collect()
    }

    pub fn take(&self, rows: &[usize]) -> Labels {
        let values: Vec<&str> = rows.iter().map(|&r| self.get(r)).collect();
        Labels::from_strings(&values)
    }
}

/// Separates the target column from the features, preserving row order.
pub fn split_features_target(t: &Table) -> Result<(Table, Labels)> {
    let target = t.schema.target().ok_or(Error::NoTarget)?;
    let labels = Labels::from_strings(t.categorical(target)?);
    let keep: Vec<&str> = t.schema.names().filter(|n| *n != target).collect();
    let features = t.select_columns(&keep)?;
    Ok((features, labels))
}
