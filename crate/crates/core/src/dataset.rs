//! Tabular dataset container: schema, CSV ingestion, and feature encoding.
//!
//! A dataset separates three kinds of columns by role: **features** (what
//! task models and surrogates see), **attributes** (the metadata being
//! audited — never encoded into the feature matrix), and exactly one
//! **label**. Attributes and the label stay in raw form; features are
//! encoded once into a numeric matrix: categoricals one-hot per category,
//! continuous columns passed through, and missing continuous values
//! imputed with a `-1.0` placeholder plus a paired `"<name> missing"`
//! indicator column so that missingness stays visible to models instead
//! of silently vanishing.

use crate::error::{AuditError, Result};
use ndarray::Array2;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::collections::HashMap;
use std::path::Path;

/// What a column means to the audit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ColumnRole {
    Feature,
    Attribute,
    Label,
    Ignore,
}

/// How a column's cells are typed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ColumnKind {
    Continuous,
    Categorical,
}

/// Declared shape of one CSV column.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnSchema {
    pub name: String,
    pub role: ColumnRole,
    pub kind: ColumnKind,
}

impl ColumnSchema {
    pub fn new(name: impl Into<String>, role: ColumnRole, kind: ColumnKind) -> Self {
        Self {
            name: name.into(),
            role,
            kind,
        }
    }
}

fn validate_schema(columns: &[ColumnSchema]) -> Result<()> {
    if columns.is_empty() {
        return Err(AuditError::Schema("schema has no columns".into()));
    }
    let mut seen = std::collections::HashSet::new();
    for col in columns {
        if !seen.insert(col.name.as_str()) {
            return Err(AuditError::Schema(format!(
                "duplicate column name in schema: {:?}",
                col.name
            )));
        }
    }
    let labels = columns
        .iter()
        .filter(|c| c.role == ColumnRole::Label)
        .count();
    if labels != 1 {
        return Err(AuditError::Schema(format!(
            "schema must declare exactly one label column, found {labels}"
        )));
    }
    if !columns.iter().any(|c| c.role == ColumnRole::Feature) {
        return Err(AuditError::Schema(
            "schema must declare at least one feature column".into(),
        ));
    }
    Ok(())
}

/// A raw (pre-encoding) column. `None` marks a missing cell.
#[derive(Debug, Clone, PartialEq)]
pub enum RawColumn {
    Continuous(Vec<Option<f64>>),
    Categorical(Vec<Option<String>>),
}

impl RawColumn {
    pub fn len(&self) -> usize {
        match self {
            RawColumn::Continuous(v) => v.len(),
            RawColumn::Categorical(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn is_missing(&self, row: usize) -> bool {
        match self {
            RawColumn::Continuous(v) => v[row].is_none(),
            RawColumn::Categorical(v) => v[row].is_none(),
        }
    }

    fn missing_count(&self) -> usize {
        (0..self.len()).filter(|&i| self.is_missing(i)).count()
    }
}

/// A dense categorical vector: codes in `0..C` plus category names.
///
/// Every code is below the declared cardinality; constructors reject
/// out-of-range codes. (Cardinality counts *declared* categories — a
/// category may have zero occurrences, e.g. after subsetting rows.)
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CategoricalSeries {
    codes: Vec<u32>,
    names: Vec<String>,
}

impl CategoricalSeries {
    pub fn from_codes(codes: Vec<u32>, names: Vec<String>) -> Result<Self> {
        if names.is_empty() {
            return Err(AuditError::InvalidArgument(
                "categorical series needs at least one category".into(),
            ));
        }
        let c = names.len() as u32;
        if let Some(&bad) = codes.iter().find(|&&v| v >= c) {
            return Err(AuditError::InvalidArgument(format!(
                "code {bad} out of range for {c} categories"
            )));
        }
        Ok(Self { codes, names })
    }

    /// Build from string values; categories are the distinct values in
    /// sorted order (deterministic regardless of row order).
    pub fn from_strings<S: AsRef<str>>(values: &[S]) -> Result<Self> {
        if values.is_empty() {
            return Err(AuditError::InvalidArgument(
                "categorical series needs at least one value".into(),
            ));
        }
        let mut names: Vec<String> = values.iter().map(|v| v.as_ref().to_string()).collect();
        names.sort();
        names.dedup();
        let index: HashMap<&str, u32> = names
            .iter()
            .enumerate()
            .map(|(i, n)| (n.as_str(), i as u32))
            .collect();
        let codes = values.iter().map(|v| index[v.as_ref()]).collect();
        Ok(Self { codes, names })
    }

    pub fn codes(&self) -> &[u32] {
        &self.codes
    }

    pub fn category_names(&self) -> &[String] {
        &self.names
    }

    pub fn cardinality(&self) -> usize {
        self.names.len()
    }

    pub fn len(&self) -> usize {
        self.codes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.codes.is_empty()
    }

    /// Occurrences per category code.
    pub fn category_counts(&self) -> Vec<u64> {
        let mut counts = vec![0u64; self.cardinality()];
        for &c in &self.codes {
            counts[c as usize] += 1;
        }
        counts
    }

    /// The series restricted to `rows` (same categories, possibly with
    /// zero-count entries).
    pub fn select(&self, rows: &[usize]) -> Self {
        Self {
            codes: rows.iter().map(|&r| self.codes[r]).collect(),
            names: self.names.clone(),
        }
    }

    /// Renumber so only categories that occur keep codes; returns the
    /// compacted series.
    pub fn densified(&self) -> Self {
        let counts = self.category_counts();
        let mut remap = vec![u32::MAX; self.cardinality()];
        let mut names = Vec::new();
        let mut next = 0u32;
        for (i, &cnt) in counts.iter().enumerate() {
            if cnt > 0 {
                remap[i] = next;
                names.push(self.names[i].clone());
                next += 1;
            }
        }
        if names.is_empty() {
            // empty series: keep declared names so cardinality stays valid
            return self.clone();
        }
        Self {
            codes: self.codes.iter().map(|&c| remap[c as usize]).collect(),
            names,
        }
    }
}

/// How feature columns map onto encoded matrix columns. Needed by models
/// that treat continuous and categorical columns differently (naive Bayes),
/// and by anything reconstructing column meaning from the matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum FeatureBlock {
    /// One continuous column at `col`.
    Continuous { col: usize },
    /// A one-hot group occupying `cols` (contiguous); exactly one column
    /// per row is 1.
    OneHot { cols: std::ops::Range<usize> },
}

/// Column metadata for an encoded feature matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct FeatureMeta {
    pub blocks: Vec<FeatureBlock>,
}

impl FeatureMeta {
    /// Meta declaring every one of `d` columns continuous (synthetic
    /// matrices, probe representations).
    pub fn all_continuous(d: usize) -> Self {
        Self {
            blocks: (0..d).map(|col| FeatureBlock::Continuous { col }).collect(),
        }
    }
}

/// Encoded feature matrix plus column names and block structure.
#[derive(Debug, Clone, PartialEq)]
pub struct EncodedFeatures {
    pub matrix: Array2<f64>,
    pub names: Vec<String>,
    pub meta: FeatureMeta,
}

const MAX_CATEGORIES: usize = 1000;
const MISSING_PLACEHOLDER: f64 = -1.0;

/// An audited dataset: raw columns by role, plus (after
/// [`encode_features`]) the encoded feature matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    n_rows: usize,
    feature_columns: Vec<(String, RawColumn)>,
    attributes: Vec<(String, RawColumn)>,
    label_name: String,
    label: RawColumn,
    encoded: Option<EncodedFeatures>,
}

impl Dataset {
    /// Assemble a dataset from raw columns. All columns must share one
    /// positive length; names must be unique across roles.
    pub fn from_columns(
        feature_columns: Vec<(String, RawColumn)>,
        attributes: Vec<(String, RawColumn)>,
        label: (String, RawColumn),
    ) -> Result<Self> {
        let n_rows = label.1.len();
        if n_rows == 0 {
            return Err(AuditError::Data("dataset has no rows".into()));
        }
        if feature_columns.is_empty() {
            return Err(AuditError::Schema(
                "dataset needs at least one feature column".into(),
            ));
        }
        let mut seen = std::collections::HashSet::new();
        for (name, col) in feature_columns
            .iter()
            .chain(attributes.iter())
            .chain(std::iter::once(&label))
        {
            if col.len() != n_rows {
                return Err(AuditError::Data(format!(
                    "column {name:?} has {} rows, expected {n_rows}",
                    col.len()
                )));
            }
            if !seen.insert(name.clone()) {
                return Err(AuditError::Schema(format!(
                    "duplicate column name: {name:?}"
                )));
            }
        }
        Ok(Self {
            n_rows,
            feature_columns,
            attributes,
            label_name: label.0,
            label: label.1,
            encoded: None,
        })
    }

    /// A copy of this dataset with one more feature column appended.
    /// Re-encodes when the original was already encoded, so the new
    /// column shows up in the feature matrix immediately.
    pub fn with_feature_column(&self, name: impl Into<String>, column: RawColumn) -> Result<Self> {
        let name = name.into();
        if column.len() != self.n_rows {
            return Err(AuditError::Data(format!(
                "column {name:?} has {} rows, expected {}",
                column.len(),
                self.n_rows
            )));
        }
        let taken = self
            .feature_columns
            .iter()
            .chain(self.attributes.iter())
            .any(|(n, _)| *n == name)
            || self.label_name == name;
        if taken {
            return Err(AuditError::Schema(format!(
                "duplicate column name: {name:?}"
            )));
        }
        let mut appended = Self {
            n_rows: self.n_rows,
            feature_columns: self.feature_columns.clone(),
            attributes: self.attributes.clone(),
            label_name: self.label_name.clone(),
            label: self.label.clone(),
            encoded: None,
        };
        appended.feature_columns.push((name, column));
        if self.encoded.is_some() {
            encode_features(appended)
        } else {
            Ok(appended)
        }
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn attribute_names(&self) -> Vec<&str> {
        self.attributes.iter().map(|(n, _)| n.as_str()).collect()
    }

    pub fn attribute(&self, name: &str) -> Result<&RawColumn> {
        self.attributes
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, c)| c)
            .ok_or_else(|| AuditError::InvalidArgument(format!("unknown attribute {name:?}")))
    }

    pub fn label_name(&self) -> &str {
        &self.label_name
    }

    pub fn label(&self) -> &RawColumn {
        &self.label
    }

    pub fn feature_names_raw(&self) -> Vec<&str> {
        self.feature_columns.iter().map(|(n, _)| n.as_str()).collect()
    }

    /// The encoded feature matrix; errors if [`encode_features`] has not
    /// run yet.
    pub fn features(&self) -> Result<&EncodedFeatures> {
        self.encoded.as_ref().ok_or_else(|| {
            AuditError::InvalidArgument("dataset features are not encoded yet".into())
        })
    }

    pub fn is_encoded(&self) -> bool {
        self.encoded.is_some()
    }

    /// Indices of rows where `attribute` is present (non-missing), in
    /// ascending order.
    pub fn rows_with_attribute(&self, attribute: &str) -> Result<Vec<usize>> {
        let col = self.attribute(attribute)?;
        Ok((0..self.n_rows).filter(|&i| !col.is_missing(i)).collect())
    }

    /// Indices of rows where *every* listed attribute is present (the
    /// strict missingness policy).
    pub fn rows_with_all_attributes(&self, attributes: &[String]) -> Result<Vec<usize>> {
        let cols: Vec<&RawColumn> = attributes
            .iter()
            .map(|a| self.attribute(a))
            .collect::<Result<_>>()?;
        Ok((0..self.n_rows)
            .filter(|&i| cols.iter().all(|c| !c.is_missing(i)))
            .collect())
    }

    /// Rows where the label is present.
    pub fn rows_with_label(&self) -> Vec<usize> {
        (0..self.n_rows)
            .filter(|&i| !self.label.is_missing(i))
            .collect()
    }

    /// Fingerprint for reports: shape plus a content hash over names and
    /// cell values (stable across runs and platforms).
    pub fn fingerprint(&self) -> DatasetFingerprint {
        let mut hasher = Sha256::new();
        let mut eat_col = |name: &str, col: &RawColumn| {
            hasher.update(name.as_bytes());
            hasher.update([0x1e]);
            match col {
                RawColumn::Continuous(values) => {
                    for v in values {
                        match v {
                            Some(x) => hasher.update(x.to_le_bytes()),
                            None => hasher.update([0xff; 8]),
                        }
                    }
                }
                RawColumn::Categorical(values) => {
                    for v in values {
                        match v {
                            Some(s) => hasher.update(s.as_bytes()),
                            None => hasher.update([0xfe]),
                        }
                        hasher.update([0x1f]);
                    }
                }
            }
        };
        for (name, col) in &self.feature_columns {
            eat_col(name, col);
        }
        for (name, col) in &self.attributes {
            eat_col(name, col);
        }
        eat_col(&self.label_name, &self.label);
        let digest = hasher.finalize();
        DatasetFingerprint {
            n_rows: self.n_rows,
            n_feature_columns: self.feature_columns.len(),
            n_attributes: self.attributes.len(),
            content_hash: digest.iter().map(|b| format!("{b:02x}")).collect(),
        }
    }

    /// Write the raw (pre-encoding) columns back out as CSV, features
    /// first, then attributes, then the label. Missing cells become the
    /// given token.
    pub fn write_csv(&self, path: &Path, missing_token: &str) -> Result<()> {
        let mut writer = csv::Writer::from_path(path).map_err(|e| AuditError::Io {
            path: path.display().to_string(),
            source: std::io::Error::other(e),
        })?;
        let mut header: Vec<&str> = self.feature_names_raw();
        header.extend(self.attribute_names());
        header.push(&self.label_name);
        writer
            .write_record(&header)
            .map_err(|e| AuditError::Csv(e.to_string()))?;
        let cell = |col: &RawColumn, row: usize| -> String {
            match col {
                RawColumn::Continuous(v) => v[row]
                    .map(|x| format!("{x}"))
                    .unwrap_or_else(|| missing_token.to_string()),
                RawColumn::Categorical(v) => v[row]
                    .clone()
                    .unwrap_or_else(|| missing_token.to_string()),
            }
        };
        for row in 0..self.n_rows {
            let mut record: Vec<String> = Vec::with_capacity(header.len());
            for (_, col) in &self.feature_columns {
                record.push(cell(col, row));
            }
            for (_, col) in &self.attributes {
                record.push(cell(col, row));
            }
            record.push(cell(&self.label, row));
            writer
                .write_record(&record)
                .map_err(|e| AuditError::Csv(e.to_string()))?;
        }
        writer.flush().map_err(|e| AuditError::Io {
            path: path.display().to_string(),
            source: e,
        })?;
        Ok(())
    }
}

/// Shape and content identity of a dataset, embedded in reports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetFingerprint {
    pub n_rows: usize,
    pub n_feature_columns: usize,
    pub n_attributes: usize,
    pub content_hash: String,
}

/// Load a CSV against a declared schema.
///
/// The header must contain exactly the schema's column names (any order);
/// cells equal to `missing_token` are missing. Continuous cells must parse
/// as numbers — failures report the data row and column. Columns with role
/// `ignore` are read past and dropped.
pub fn load_csv(path: &Path, columns: &[ColumnSchema], missing_token: &str) -> Result<Dataset> {
    validate_schema(columns)?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .map_err(|e| match e.kind() {
            csv::ErrorKind::Io(_) => AuditError::Io {
                path: path.display().to_string(),
                source: std::io::Error::other(e.to_string()),
            },
            _ => AuditError::Csv(e.to_string()),
        })?;
    let header = reader
        .headers()
        .map_err(|e| AuditError::Csv(e.to_string()))?
        .clone();
    let header_names: Vec<&str> = header.iter().collect();
    {
        let mut seen = std::collections::HashSet::new();
        for h in &header_names {
            if !seen.insert(*h) {
                return Err(AuditError::Csv(format!("duplicate header column {h:?}")));
            }
        }
    }
    // map schema columns onto header positions
    let mut positions = Vec::with_capacity(columns.len());
    for col in columns {
        match header_names.iter().position(|h| *h == col.name) {
            Some(idx) => positions.push(idx),
            None => {
                return Err(AuditError::Csv(format!(
                    "schema column {:?} not found in CSV header",
                    col.name
                )))
            }
        }
    }
    if header_names.len() != columns.len() {
        let extra: Vec<&str> = header_names
            .iter()
            .filter(|h| !columns.iter().any(|c| c.name == **h))
            .copied()
            .collect();
        return Err(AuditError::Csv(format!(
            "CSV header has {} columns not in the schema: {extra:?} (declare them with role \"ignore\")",
            extra.len()
        )));
    }

    let mut storage: Vec<RawColumn> = columns
        .iter()
        .map(|c| match c.kind {
            ColumnKind::Continuous => RawColumn::Continuous(Vec::new()),
            ColumnKind::Categorical => RawColumn::Categorical(Vec::new()),
        })
        .collect();

    for (row_idx, record) in reader.records().enumerate() {
        let record = record.map_err(|e| AuditError::Csv(e.to_string()))?;
        if record.len() != header_names.len() {
            return Err(AuditError::Csv(format!(
                "data row {} has {} fields, header has {}",
                row_idx + 1,
                record.len(),
                header_names.len()
            )));
        }
        for (col, (&pos, store)) in columns.iter().zip(positions.iter().zip(&mut storage)) {
            let cell = record.get(pos).expect("validated length");
            match store {
                RawColumn::Continuous(v) => {
                    if cell == missing_token {
                        v.push(None);
                    } else {
                        let parsed: f64 = cell.trim().parse().map_err(|_| {
                            AuditError::Csv(format!(
                                "row {}, column {:?}: cannot parse {cell:?} as a number",
                                row_idx + 1,
                                col.name
                            ))
                        })?;
                        if !parsed.is_finite() {
                            return Err(AuditError::Csv(format!(
                                "row {}, column {:?}: non-finite value {cell:?}",
                                row_idx + 1,
                                col.name
                            )));
                        }
                        v.push(Some(parsed));
                    }
                }
                RawColumn::Categorical(v) => {
                    if cell == missing_token {
                        v.push(None);
                    } else {
                        v.push(Some(cell.to_string()));
                    }
                }
            }
        }
    }

    let mut feature_columns = Vec::new();
    let mut attributes = Vec::new();
    let mut label = None;
    for (col, store) in columns.iter().zip(storage) {
        match col.role {
            ColumnRole::Feature => feature_columns.push((col.name.clone(), store)),
            ColumnRole::Attribute => attributes.push((col.name.clone(), store)),
            ColumnRole::Label => label = Some((col.name.clone(), store)),
            ColumnRole::Ignore => {}
        }
    }
    let label = label.expect("schema validated to hold one label");
    if label.1.is_empty() {
        return Err(AuditError::Data(format!(
            "{}: CSV contains a header but no data rows",
            path.display()
        )));
    }
    Dataset::from_columns(feature_columns, attributes, label)
}

/// Encode raw feature columns into the numeric matrix. Idempotent:
/// an already-encoded dataset is returned unchanged.
///
/// * continuous, fully observed -> copied through;
/// * continuous with gaps -> `-1.0` placeholder plus a `"<name> missing"`
///   0/1 indicator column;
/// * categorical -> one one-hot column per observed category (sorted
///   names; missing cells get their own `"<name> missing"` one-hot column
///   inside the group so each group still sums to exactly 1).
///
/// Categorical features with more than 1000 distinct values are rejected —
/// near-unique strings one-hot into a useless, enormous matrix and almost
/// always indicate a mis-declared identifier column.
pub fn encode_features(dataset: Dataset) -> Result<Dataset> {
    if dataset.encoded.is_some() {
        return Ok(dataset);
    }
    let n = dataset.n_rows;
    let mut cols: Vec<Vec<f64>> = Vec::new();
    let mut names: Vec<String> = Vec::new();
    let mut blocks: Vec<FeatureBlock> = Vec::new();

    for (name, col) in &dataset.feature_columns {
        match col {
            RawColumn::Continuous(values) => {
                let missing = col.missing_count();
                let mut data = Vec::with_capacity(n);
                for v in values {
                    data.push(v.unwrap_or(MISSING_PLACEHOLDER));
                }
                blocks.push(FeatureBlock::Continuous { col: cols.len() });
                cols.push(data);
                names.push(name.clone());
                if missing > 0 {
                    let indicator: Vec<f64> = values
                        .iter()
                        .map(|v| if v.is_none() { 1.0 } else { 0.0 })
                        .collect();
                    blocks.push(FeatureBlock::Continuous { col: cols.len() });
                    cols.push(indicator);
                    names.push(format!("{name} missing"));
                }
            }
            RawColumn::Categorical(values) => {
                let mut categories: Vec<&str> =
                    values.iter().flatten().map(|s| s.as_str()).collect();
                categories.sort_unstable();
                categories.dedup();
                if categories.len() > MAX_CATEGORIES {
                    return Err(AuditError::Data(format!(
                        "categorical feature {name:?} has {} distinct values (limit {MAX_CATEGORIES}); \
                         this is usually an identifier, not a feature",
                        categories.len()
                    )));
                }
                let has_missing = col.missing_count() > 0;
                let start = cols.len();
                let index: HashMap<&str, usize> = categories
                    .iter()
                    .enumerate()
                    .map(|(i, &c)| (c, i))
                    .collect();
                let group_width = categories.len() + usize::from(has_missing);
                let mut group: Vec<Vec<f64>> = vec![vec![0.0; n]; group_width];
                for (row, v) in values.iter().enumerate() {
                    let slot = match v {
                        Some(s) => index[s.as_str()],
                        None => group_width - 1,
                    };
                    group[slot][row] = 1.0;
                }
                for (i, data) in group.into_iter().enumerate() {
                    let col_name = if i < categories.len() {
                        format!("{name}={}", categories[i])
                    } else {
                        format!("{name} missing")
                    };
                    names.push(col_name);
                    cols.push(data);
                }
                blocks.push(FeatureBlock::OneHot {
                    cols: start..start + group_width,
                });
            }
        }
    }

    let d = cols.len();
    let mut matrix = Array2::zeros((n, d));
    for (j, data) in cols.into_iter().enumerate() {
        for (i, v) in data.into_iter().enumerate() {
            matrix[[i, j]] = v;
        }
    }
    let mut out = dataset;
    out.encoded = Some(EncodedFeatures {
        matrix,
        names,
        meta: FeatureMeta { blocks },
    });
    Ok(out)
}

/// Build an already-encoded dataset directly from a numeric matrix
/// (synthetic generators, tests). Column `j` is named by `feature_names`
/// and treated as continuous.
pub fn from_matrix(
    matrix: Array2<f64>,
    feature_names: Vec<String>,
    attributes: Vec<(String, CategoricalSeries)>,
    label: (String, CategoricalSeries),
) -> Result<Dataset> {
    let n = matrix.nrows();
    if n == 0 {
        return Err(AuditError::Data("dataset has no rows".into()));
    }
    if feature_names.len() != matrix.ncols() {
        return Err(AuditError::InvalidArgument(format!(
            "{} feature names for {} matrix columns",
            feature_names.len(),
            matrix.ncols()
        )));
    }
    let to_raw = |s: &CategoricalSeries| -> RawColumn {
        RawColumn::Categorical(
            s.codes()
                .iter()
                .map(|&c| Some(s.category_names()[c as usize].clone()))
                .collect(),
        )
    };
    let feature_columns: Vec<(String, RawColumn)> = feature_names
        .iter()
        .enumerate()
        .map(|(j, name)| {
            (
                name.clone(),
                RawColumn::Continuous(matrix.column(j).iter().map(|&v| Some(v)).collect()),
            )
        })
        .collect();
    let attr_cols: Vec<(String, RawColumn)> = attributes
        .iter()
        .map(|(n, s)| (n.clone(), to_raw(s)))
        .collect();
    let label_col = (label.0.clone(), to_raw(&label.1));
    let d = matrix.ncols();
    let mut ds = Dataset::from_columns(feature_columns, attr_cols, label_col)?;
    ds.encoded = Some(EncodedFeatures {
        matrix,
        names: feature_names,
        meta: FeatureMeta::all_continuous(d),
    });
    Ok(ds)
}
