//! Dataset ingestion, min-max normalization and per-feature statistics.

use std::fs::File;
use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Result, SomError};

/// Input vectors, stored row-major, with optional labels that are carried
/// along for reporting but never used as features.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    dim: usize,
    values: Vec<f64>,
    labels: Option<Vec<String>>,
    column_names: Option<Vec<String>>,
}

impl Dataset {
    pub fn from_flat(dim: usize, values: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(SomError::InvalidArgument("dataset dimension must be positive".into()));
        }
        if values.len() % dim != 0 {
            return Err(SomError::InvalidArgument(format!(
                "{} values do not form rows of dimension {dim}",
                values.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(SomError::NonFinite(format!("row {} feature {}", i / dim, i % dim)));
        }
        Ok(Dataset {
            dim,
            values,
            labels: None,
            column_names: None,
        })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.first().map_or(0, Vec::len);
        for r in rows {
            check_dim(dim, r.len())?;
        }
        Self::from_flat(dim, rows.concat())
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.len() {
            return Err(SomError::InvalidArgument(format!(
                "{} labels for {} rows",
                labels.len(),
                self.len()
            )));
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn with_column_names(mut self, names: Vec<String>) -> Result<Self> {
        check_dim(self.dim, names.len())?;
        self.column_names = Some(names);
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.values.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> std::slice::ChunksExact<'_, f64> {
        self.values.chunks_exact(self.dim)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    pub fn label(&self, i: usize) -> Option<&str> {
        self.labels.as_ref().map(|l| l[i].as_str())
    }

    pub fn column_names(&self) -> Option<&[String]> {
        self.column_names.as_deref()
    }
}

/// Which column of a CSV file holds labels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LabelColumn {
    Name(String),
    /// Zero-based column index.
    Index(usize),
}

impl std::str::FromStr for LabelColumn {
    type Err = std::convert::Infallible;

    /// Integers select a column by index, anything else by header name.
    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Ok(match s.parse::<usize>() {
            Ok(i) => LabelColumn::Index(i),
            Err(_) => LabelColumn::Name(s.to_string()),
        })
    }
}

#[derive(Debug, Clone)]
pub struct CsvOptions {
    pub has_header: bool,
    pub label_column: Option<LabelColumn>,
    pub delimiter: u8,
}

impl Default for CsvOptions {
    fn default() -> Self {
        CsvOptions {
            has_header: false,
            label_column: None,
            delimiter: b',',
        }
    }
}

pub fn load_csv(path: impl AsRef<Path>, options: &CsvOptions) -> Result<Dataset> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| SomError::io(path, e))?;
    read_csv(file, options)
}

/// Parses CSV text. Row numbers in errors are 1-based and count data rows
/// only (the header is not counted); columns are 1-based.
pub fn read_csv<R: Read>(reader: R, options: &CsvOptions) -> Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .delimiter(options.delimiter)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut records = rdr.records();

    let header: Option<Vec<String>> = if options.has_header {
        match records.next() {
            Some(rec) => Some(
                rec.map_err(|e| SomError::Csv(e.to_string()))?
                    .iter()
                    .map(str::to_string)
                    .collect(),
            ),
            None => return Err(SomError::EmptyDataset),
        }
    } else {
        None
    };

    let label_idx = match (&options.label_column, &header) {
        (None, _) => None,
        (Some(LabelColumn::Index(i)), _) => Some(*i),
        (Some(LabelColumn::Name(name)), Some(h)) => match h.iter().position(|c| c == name) {
            Some(i) => Some(i),
            None => return Err(SomError::Csv(format!("label column `{name}` not found in header"))),
        },
        (Some(LabelColumn::Name(name)), None) => {
            return Err(SomError::Csv(format!(
                "label column `{name}` given by name but the file has no header"
            )))
        }
    };

    let mut width = header.as_ref().map(Vec::len);
    let mut values = Vec::new();
    let mut labels = Vec::new();
    let mut row = 0usize;
    for rec in records {
        let rec = rec.map_err(|e| SomError::Csv(e.to_string()))?;
        if rec.len() == 1 && rec.get(0) == Some("") {
            continue;
        }
        row += 1;
        let w = *width.get_or_insert(rec.len());
        if rec.len() != w {
            return Err(SomError::RaggedRow {
                row,
                expected: w,
                found: rec.len(),
            });
        }
        for (col, cell) in rec.iter().enumerate() {
            if Some(col) == label_idx {
                labels.push(cell.to_string());
                continue;
            }
            let v: f64 = cell.parse().map_err(|_| SomError::CsvCell {
                row,
                column: col + 1,
                message: format!("`{cell}` is not a number"),
            })?;
            if !v.is_finite() {
                return Err(SomError::CsvCell {
                    row,
                    column: col + 1,
                    message: format!("`{cell}` is not finite"),
                });
            }
            values.push(v);
        }
    }

    let width = match width {
        Some(w) if row > 0 => w,
        _ => return Err(SomError::EmptyDataset),
    };
    if let Some(i) = label_idx {
        if i >= width {
            return Err(SomError::Csv(format!(
                "label column index {i} out of range for {width} columns"
            )));
        }
    }
    let dim = width - usize::from(label_idx.is_some());
    if dim == 0 {
        return Err(SomError::Csv("no feature columns".into()));
    }
    let mut ds = Dataset::from_flat(dim, values)?;
    if label_idx.is_some() {
        ds = ds.with_labels(labels)?;
    }
    if let Some(h) = header {
        let names = h
            .into_iter()
            .enumerate()
            .filter(|(i, _)| Some(*i) != label_idx)
            .map(|(_, n)| n)
            .collect();
        ds = ds.with_column_names(names)?;
    }
    Ok(ds)
}

/// Per-feature min-max ranges fitted on a training set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NormalizationParams {
    pub mins: Vec<f64>,
    pub maxs: Vec<f64>,
    pub degenerate_flags: Vec<bool>,
}

impl NormalizationParams {
    /// Params that leave `[0, 1]` data untouched.
    pub fn identity(dim: usize) -> Self {
        NormalizationParams {
            mins: vec![0.0; dim],
            maxs: vec![1.0; dim],
            degenerate_flags: vec![false; dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.mins.len()
    }

    pub(crate) fn validate(&self) -> Result<()> {
        let n = self.mins.len();
        if n == 0 {
            return Err(SomError::schema("normalization.mins", "must be non-empty"));
        }
        if self.maxs.len() != n {
            return Err(SomError::schema("normalization.maxs", format!("expected {n} entries")));
        }
        if self.degenerate_flags.len() != n {
            return Err(SomError::schema(
                "normalization.degenerate_flags",
                format!("expected {n} entries"),
            ));
        }
        for i in 0..n {
            let (lo, hi) = (self.mins[i], self.maxs[i]);
            if !lo.is_finite() || !hi.is_finite() {
                return Err(SomError::NonFinite(format!("normalization feature {i}")));
            }
            if lo > hi {
                return Err(SomError::schema("normalization", format!("feature {i}: min > max")));
            }
            if self.degenerate_flags[i] != (lo == hi) {
                return Err(SomError::schema(
                    "normalization.degenerate_flags",
                    format!("feature {i} flag disagrees with its range"),
                ));
            }
        }
        Ok(())
    }

    /// Maps one raw vector into normalized space. Values outside the fitted
    /// range land outside `[0, 1]`; they are not clamped.
    pub fn normalize_vector(&self, v: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.dim(), v.len())?;
        let mut out = vec![0.0; v.len()];
        self.normalize_into(v, &mut out);
        Ok(out)
    }

    #[inline]
    pub(crate) fn normalize_into(&self, v: &[f64], out: &mut [f64]) {
        for (i, (o, x)) in out.iter_mut().zip(v).enumerate() {
            *o = if self.degenerate_flags[i] {
                0.0
            } else {
                (x - self.mins[i]) / (self.maxs[i] - self.mins[i])
            };
        }
    }
}

pub fn fit_normalization(ds: &Dataset) -> Result<NormalizationParams> {
    if ds.is_empty() {
        return Err(SomError::EmptyDataset);
    }
    let mut mins = ds.row(0).to_vec();
    let mut maxs = mins.clone();
    for row in ds.rows().skip(1) {
        for (i, &v) in row.iter().enumerate() {
            mins[i] = mins[i].min(v);
            maxs[i] = maxs[i].max(v);
        }
    }
    let degenerate_flags = mins.iter().zip(&maxs).map(|(a, b)| a == b).collect();
    Ok(NormalizationParams {
        mins,
        maxs,
        degenerate_flags,
    })
}

/// Applies `params` to every row; labels and column names pass through.
pub fn normalize(ds: &Dataset, params: &NormalizationParams) -> Result<Dataset> {
    check_dim(params.dim(), ds.dim())?;
    let mut values = vec![0.0; ds.values.len()];
    for (src, dst) in ds.rows().zip(values.chunks_exact_mut(ds.dim)) {
        params.normalize_into(src, dst);
    }
    Ok(Dataset {
        dim: ds.dim,
        values,
        labels: ds.labels.clone(),
        column_names: ds.column_names.clone(),
    })
}

/// Inverse of [`normalize`]; degenerate features come back as their constant.
pub fn denormalize(v: &[f64], params: &NormalizationParams) -> Result<Vec<f64>> {
    check_dim(params.dim(), v.len())?;
    Ok(v.iter()
        .enumerate()
        .map(|(i, &x)| {
            if params.degenerate_flags[i] {
                params.mins[i]
            } else {
                params.mins[i] + x * (params.maxs[i] - params.mins[i])
            }
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FeatureSummary {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub min: f64,
    pub max: f64,
    pub mean: f64,
    /// Population standard deviation.
    #[serde(rename = "std")]
    pub std_dev: f64,
}

pub fn summarize(ds: &Dataset) -> Result<Vec<FeatureSummary>> {
    if ds.is_empty() {
        return Err(SomError::EmptyDataset);
    }
    // Welford's online update, one accumulator per feature.
    let dim = ds.dim();
    let mut mean = vec![0.0; dim];
    let mut m2 = vec![0.0; dim];
    let mut min = vec![f64::INFINITY; dim];
    let mut max = vec![f64::NEG_INFINITY; dim];
    for (k, row) in ds.rows().enumerate() {
        let count = (k + 1) as f64;
        for (i, &x) in row.iter().enumerate() {
            let delta = x - mean[i];
            mean[i] += delta / count;
            m2[i] += delta * (x - mean[i]);
            min[i] = min[i].min(x);
            max[i] = max[i].max(x);
        }
    }
    let n = ds.len() as f64;
    Ok((0..dim)
        .map(|i| FeatureSummary {
            name: ds.column_names().map(|c| c[i].clone()),
            min: min[i],
            max: max[i],
            mean: mean[i],
            std_dev: (m2[i] / n).max(0.0).sqrt(),
        })
        .collect())
}
