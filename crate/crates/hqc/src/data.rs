//! Mixed-type tabular data: ingestion, standardization, and grouping by
//! qualitative value.
//!
//! A [`Dataset`] pairs a quantitative matrix (row-major, `rows x dims`) with
//! one qualitative label column. [`ValueGroup`]s partition the retained rows
//! by label, and a [`Sample`] is the quantitative sub-matrix of one or more
//! groups, ready for a two-sample statistic.

use std::collections::HashMap;
use std::fmt;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DataError {
    #[error("failed to read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("malformed CSV in {path}: {source}")]
    Csv { path: String, source: csv::Error },
    #[error("label column {0:?} not found in header")]
    LabelColumnMissing(String),
    #[error("feature column {0:?} not found in header")]
    FeatureColumnMissing(String),
    #[error("feature column {0:?} is the label column")]
    FeatureIsLabel(String),
    #[error("zero numeric columns selected")]
    ZeroNumericColumns,
    #[error("zero rows survived ingestion ({dropped} dropped)")]
    ZeroRows { dropped: usize },
    #[error("standardization needs at least 2 rows, got {0}")]
    TooFewRows(usize),
    #[error("min_count must be at least 2, got {0}")]
    MinCountTooSmall(usize),
    #[error("fewer than 2 value groups survive (got {0}); clustering needs at least 2")]
    TooFewGroups(usize),
    #[error("sample is empty")]
    EmptySample,
}

/// Which columns of the CSV feed the quantitative matrix.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum FeatureColumns {
    /// Every non-label column that contains at least one numeric entry.
    AllNumeric,
    /// An explicit list of column names; each must exist in the header.
    Named(Vec<String>),
}

/// Row-aligned quantitative matrix plus one qualitative label column.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    quantitative: Vec<f64>,
    qualitative: Vec<String>,
    column_names: Vec<String>,
    label_name: String,
    rows: usize,
    dims: usize,
    dropped_rows: usize,
    zero_variance_columns: Vec<String>,
}

impl Dataset {
    /// Build a dataset from parts. `quantitative` is row-major with
    /// `qualitative.len() * column_names.len()` entries.
    pub fn from_parts(
        quantitative: Vec<f64>,
        qualitative: Vec<String>,
        column_names: Vec<String>,
        label_name: String,
    ) -> Self {
        let rows = qualitative.len();
        let dims = column_names.len();
        assert_eq!(quantitative.len(), rows * dims, "matrix shape mismatch");
        Dataset {
            quantitative,
            qualitative,
            column_names,
            label_name,
            rows,
            dims,
            dropped_rows: 0,
            zero_variance_columns: Vec::new(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn dims(&self) -> usize {
        self.dims
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.quantitative[i * self.dims..(i + 1) * self.dims]
    }

    pub fn label(&self, i: usize) -> &str {
        &self.qualitative[i]
    }

    pub fn labels(&self) -> &[String] {
        &self.qualitative
    }

    pub fn column_names(&self) -> &[String] {
        &self.column_names
    }

    pub fn label_name(&self) -> &str {
        &self.label_name
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.column_names.iter().position(|c| c == name)
    }

    /// Rows dropped during ingestion because of missing or unparseable values.
    pub fn dropped_rows(&self) -> usize {
        self.dropped_rows
    }

    /// Columns flattened to all zeros by [`Dataset::standardize`].
    pub fn zero_variance_columns(&self) -> &[String] {
        &self.zero_variance_columns
    }

    /// Column values for the given rows, in row order.
    pub fn column_values(&self, column: usize, rows: &[usize]) -> Vec<f64> {
        rows.iter().map(|&r| self.row(r)[column]).collect()
    }

    /// Z-score every column using the sample standard deviation (denominator
    /// `n - 1`) over the full dataset. Zero-variance columns become all zeros
    /// and are reported via [`Dataset::zero_variance_columns`].
    pub fn standardize(&self) -> Result<Dataset, DataError> {
        if self.rows < 2 {
            return Err(DataError::TooFewRows(self.rows));
        }
        let n = self.rows as f64;
        let mut out = self.clone();
        let mut flagged = Vec::new();
        for c in 0..self.dims {
            let mut mean = 0.0;
            for r in 0..self.rows {
                mean += self.quantitative[r * self.dims + c];
            }
            mean /= n;
            let mut ss = 0.0;
            for r in 0..self.rows {
                let d = self.quantitative[r * self.dims + c] - mean;
                ss += d * d;
            }
            let std = (ss / (n - 1.0)).sqrt();
            if std == 0.0 {
                for r in 0..self.rows {
                    out.quantitative[r * self.dims + c] = 0.0;
                }
                flagged.push(self.column_names[c].clone());
            } else {
                for r in 0..self.rows {
                    out.quantitative[r * self.dims + c] =
                        (self.quantitative[r * self.dims + c] - mean) / std;
                }
            }
        }
        out.zero_variance_columns = flagged;
        Ok(out)
    }
}

/// One distinct qualitative value and the rows that carry it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValueGroup {
    pub value: String,
    pub row_indices: Vec<usize>,
    pub count: usize,
}

/// A quantitative sub-matrix (`n x dims`, row-major) fed to two-sample
/// statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    data: Vec<f64>,
    n: usize,
    dims: usize,
}

impl Sample {
    pub fn from_rows(data: Vec<f64>, n: usize, dims: usize) -> Self {
        assert_eq!(data.len(), n * dims, "sample shape mismatch");
        Sample { data, n, dims }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dims(&self) -> usize {
        self.dims
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dims..(i + 1) * self.dims]
    }

    pub fn rows_iter(&self) -> impl Iterator<Item = &[f64]> + '_ {
        self.data.chunks_exact(self.dims.max(1))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }
}

impl fmt::Display for Sample {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Sample({} x {})", self.n, self.dims)
    }
}

/// Load a CSV file with a header row into a raw (unstandardized) dataset.
///
/// Rows with a missing label or any unparseable value in a selected feature
/// column are dropped and counted. A cell parses when `f64::from_str`
/// succeeds and the value is finite.
pub fn load_csv(
    path: impl AsRef<Path>,
    label_column: &str,
    feature_columns: &FeatureColumns,
) -> Result<Dataset, DataError> {
    let path = path.as_ref();
    let path_str = path.display().to_string();
    let mut reader = csv::ReaderBuilder::new()
        .flexible(false)
        .from_path(path)
        .map_err(|e| match e.kind() {
            csv::ErrorKind::Io(_) => DataError::Io {
                path: path_str.clone(),
                source: std::io::Error::other(e.to_string()),
            },
            _ => DataError::Csv {
                path: path_str.clone(),
                source: e,
            },
        })?;

    let headers: Vec<String> = reader
        .headers()
        .map_err(|e| DataError::Csv {
            path: path_str.clone(),
            source: e,
        })?
        .iter()
        .map(|h| h.trim().to_string())
        .collect();

    let label_idx = headers
        .iter()
        .position(|h| h == label_column)
        .ok_or_else(|| DataError::LabelColumnMissing(label_column.to_string()))?;

    let mut records: Vec<csv::StringRecord> = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| DataError::Csv {
            path: path_str.clone(),
            source: e,
        })?;
        records.push(rec);
    }

    let feature_idx: Vec<usize> = match feature_columns {
        FeatureColumns::Named(names) => {
            let mut idx = Vec::with_capacity(names.len());
            for name in names {
                if name == label_column {
                    return Err(DataError::FeatureIsLabel(name.clone()));
                }
                let i = headers
                    .iter()
                    .position(|h| h == name)
                    .ok_or_else(|| DataError::FeatureColumnMissing(name.clone()))?;
                idx.push(i);
            }
            if idx.is_empty() {
                return Err(DataError::ZeroNumericColumns);
            }
            idx
        }
        FeatureColumns::AllNumeric => {
            // A column counts as numeric when at least one cell parses.
            let mut idx = Vec::new();
            for (i, _) in headers.iter().enumerate() {
                if i == label_idx {
                    continue;
                }
                let numeric = records
                    .iter()
                    .any(|rec| rec.get(i).map(parse_cell).is_some_and(|v| v.is_some()));
                if numeric {
                    idx.push(i);
                }
            }
            if idx.is_empty() {
                return Err(DataError::ZeroNumericColumns);
            }
            idx
        }
    };

    let dims = feature_idx.len();
    let mut quantitative = Vec::new();
    let mut qualitative = Vec::new();
    let mut dropped = 0usize;
    'rows: for rec in &records {
        let label = rec.get(label_idx).unwrap_or("").trim();
        if label.is_empty() {
            dropped += 1;
            continue;
        }
        let mut row = Vec::with_capacity(dims);
        for &i in &feature_idx {
            match rec.get(i).and_then(parse_cell) {
                Some(v) => row.push(v),
                None => {
                    dropped += 1;
                    continue 'rows;
                }
            }
        }
        quantitative.extend_from_slice(&row);
        qualitative.push(label.to_string());
    }

    if qualitative.is_empty() {
        return Err(DataError::ZeroRows { dropped });
    }

    let column_names = feature_idx.iter().map(|&i| headers[i].clone()).collect();
    let mut ds = Dataset::from_parts(
        quantitative,
        qualitative,
        column_names,
        label_column.to_string(),
    );
    ds.dropped_rows = dropped;
    Ok(ds)
}

fn parse_cell(cell: &str) -> Option<f64> {
    let trimmed = cell.trim();
    if trimmed.is_empty() {
        return None;
    }
    trimmed.parse::<f64>().ok().filter(|v| v.is_finite())
}

/// Group rows by qualitative value, keeping the `top_k` most frequent values
/// (all when absent) with at least `min_count` rows each.
///
/// Groups come back ordered by descending count, ties broken lexicographically
/// by value. Rows of excluded values take no further part in clustering.
pub fn group_by_value(
    dataset: &Dataset,
    top_k: Option<usize>,
    min_count: usize,
) -> Result<Vec<ValueGroup>, DataError> {
    if min_count < 2 {
        return Err(DataError::MinCountTooSmall(min_count));
    }
    let mut by_value: HashMap<&str, Vec<usize>> = HashMap::new();
    for i in 0..dataset.rows() {
        by_value.entry(dataset.label(i)).or_default().push(i);
    }
    let mut groups: Vec<ValueGroup> = by_value
        .into_iter()
        .map(|(value, row_indices)| ValueGroup {
            value: value.to_string(),
            count: row_indices.len(),
            row_indices,
        })
        .collect();
    groups.sort_by(|a, b| b.count.cmp(&a.count).then_with(|| a.value.cmp(&b.value)));
    if let Some(k) = top_k {
        groups.truncate(k);
    }
    groups.retain(|g| g.count >= min_count);
    if groups.len() < 2 {
        return Err(DataError::TooFewGroups(groups.len()));
    }
    Ok(groups)
}

/// Gather the quantitative rows at `indices` into an owned sample.
pub fn gather_rows(dataset: &Dataset, indices: &[usize]) -> Sample {
    let dims = dataset.dims();
    let mut data = Vec::with_capacity(indices.len() * dims);
    for &i in indices {
        data.extend_from_slice(dataset.row(i));
    }
    Sample::from_rows(data, indices.len(), dims)
}

/// Concatenate the rows of the given groups into one sample. When `cap` is
/// set and exceeded, a uniform subsample of size `cap` is drawn, seeded by
/// `seed` and the group values so repeated calls agree.
pub fn sample_for(
    groups: &[ValueGroup],
    dataset: &Dataset,
    cap: Option<usize>,
    seed: u64,
) -> Result<Sample, DataError> {
    let mut indices: Vec<usize> = groups
        .iter()
        .flat_map(|g| g.row_indices.iter().copied())
        .collect();
    if indices.is_empty() {
        return Err(DataError::EmptySample);
    }
    if let Some(cap) = cap {
        let mut values: Vec<&str> = groups.iter().map(|g| g.value.as_str()).collect();
        values.sort_unstable();
        let identity = values.join("\u{1f}");
        indices = subsample_indices(&indices, cap, derive_seed(seed, identity.as_bytes()));
    }
    Ok(gather_rows(dataset, &indices))
}

/// Uniform subsample of `indices` down to `cap` entries, preserving the
/// original relative order. Identity when `cap >= indices.len()`.
pub fn subsample_indices(indices: &[usize], cap: usize, seed: u64) -> Vec<usize> {
    if indices.len() <= cap {
        return indices.to_vec();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut picks = rand::seq::index::sample(&mut rng, indices.len(), cap).into_vec();
    picks.sort_unstable();
    picks.into_iter().map(|p| indices[p]).collect()
}

/// Mix a byte identity into a global seed (FNV-1a over the seed then the
/// identity bytes). Distinct identities get independent substreams.
pub fn derive_seed(seed: u64, identity: &[u8]) -> u64 {
    const OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
    const PRIME: u64 = 0x0000_0100_0000_01b3;
    let mut h = OFFSET;
    for b in seed.to_le_bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(PRIME);
    }
    for &b in identity {
        h ^= u64::from(b);
        h = h.wrapping_mul(PRIME);
    }
    h
}
