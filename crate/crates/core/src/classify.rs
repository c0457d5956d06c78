//! Mapping samples onto a trained map. Weights are never touched.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use rayon::prelude::*;

use crate::error::{check_dim, Result, SomError};
use crate::grid::{bmu_unchecked, GridPosition};
use crate::model::SomModel;
use crate::preprocess::Dataset;

#[derive(Debug, Clone, PartialEq)]
pub struct Assignment {
    pub sample_index: usize,
    pub position: GridPosition,
    pub bmu_distance: f64,
    pub label: Option<String>,
}

/// Per-sample winners plus per-neuron win counts (row-major, `side²` long).
#[derive(Debug, Clone, PartialEq)]
pub struct Assignments {
    side: usize,
    entries: Vec<Assignment>,
    activation_counts: Vec<u64>,
}

impl Assignments {
    pub fn new(side: usize, entries: Vec<Assignment>) -> Result<Self> {
        if side == 0 {
            return Err(SomError::InvalidArgument("map side must be positive".into()));
        }
        let mut activation_counts = vec![0u64; side * side];
        for a in &entries {
            if GridPosition::new(a.position.row, a.position.col, side)? != a.position {
                return Err(SomError::InvalidArgument(format!(
                    "sample {}: flat index {} does not match ({}, {})",
                    a.sample_index, a.position.flat_index, a.position.row, a.position.col
                )));
            }
            if !(a.bmu_distance >= 0.0 && a.bmu_distance.is_finite()) {
                return Err(SomError::InvalidArgument(format!(
                    "sample {}: invalid bmu distance {}",
                    a.sample_index, a.bmu_distance
                )));
            }
            activation_counts[a.position.flat_index] += 1;
        }
        Ok(Assignments {
            side,
            entries,
            activation_counts,
        })
    }

    pub fn side(&self) -> usize {
        self.side
    }

    pub fn entries(&self) -> &[Assignment] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn activation_counts(&self) -> &[u64] {
        &self.activation_counts
    }

    /// CSV with header `sample_index,row,col,flat_index,bmu_distance,label`.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let err = |e: csv::Error| SomError::Csv(e.to_string());
        w.write_record(["sample_index", "row", "col", "flat_index", "bmu_distance", "label"])
            .map_err(err)?;
        for a in &self.entries {
            w.write_record([
                a.sample_index.to_string(),
                a.position.row.to_string(),
                a.position.col.to_string(),
                a.position.flat_index.to_string(),
                a.bmu_distance.to_string(),
                a.label.clone().unwrap_or_default(),
            ])
            .map_err(err)?;
        }
        w.flush().map_err(|e| SomError::Csv(e.to_string()))
    }

    /// Reads the format written by [`Assignments::write_csv`], validating
    /// every position against a map of the given side. Empty label cells
    /// become `None`.
    pub fn read_csv<R: Read>(reader: R, side: usize) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
        let headers = rdr.headers().map_err(|e| SomError::Csv(e.to_string()))?.clone();
        let expected = ["sample_index", "row", "col", "flat_index", "bmu_distance", "label"];
        if headers.iter().ne(expected) {
            return Err(SomError::Csv(format!(
                "unexpected assignments header `{}`",
                headers.iter().collect::<Vec<_>>().join(",")
            )));
        }
        let mut entries = Vec::new();
        for (i, rec) in rdr.records().enumerate() {
            let row = i + 1;
            let rec = rec.map_err(|e| SomError::Csv(e.to_string()))?;
            let int = |col: usize| -> Result<usize> {
                rec[col].parse().map_err(|_| SomError::CsvCell {
                    row,
                    column: col + 1,
                    message: format!("`{}` is not a non-negative integer", &rec[col]),
                })
            };
            let (sample_index, r, c, flat) = (int(0)?, int(1)?, int(2)?, int(3)?);
            let bmu_distance: f64 = rec[4].parse().map_err(|_| SomError::CsvCell {
                row,
                column: 5,
                message: format!("`{}` is not a number", &rec[4]),
            })?;
            let position = GridPosition::new(r, c, side).map_err(|e| SomError::CsvCell {
                row,
                column: 2,
                message: e.to_string(),
            })?;
            if position.flat_index != flat {
                return Err(SomError::CsvCell {
                    row,
                    column: 4,
                    message: format!("flat index {flat} does not match ({r}, {c}) on a side-{side} map"),
                });
            }
            let label = (!rec[5].is_empty()).then(|| rec[5].to_string());
            entries.push(Assignment {
                sample_index,
                position,
                bmu_distance,
                label,
            });
        }
        Self::new(side, entries)
    }
}

/// Normalizes each raw row with the model's stored parameters and finds its
/// winner. Output order matches input order.
pub fn classify(model: &SomModel, ds: &Dataset) -> Result<Assignments> {
    check_dim(model.dim(), ds.dim())?;
    if ds.is_empty() {
        return Err(SomError::EmptyDataset);
    }
    let wm = model.weights();
    let params = model.normalization();
    let entries = (0..ds.len())
        .into_par_iter()
        .map(|i| {
            let mut x = vec![0.0; ds.dim()];
            params.normalize_into(ds.row(i), &mut x);
            let (j, sq) = bmu_unchecked(&x, wm);
            Assignment {
                sample_index: i,
                position: wm.position(j),
                bmu_distance: sq.sqrt(),
                label: ds.label(i).map(str::to_string),
            }
        })
        .collect();
    Assignments::new(model.side(), entries)
}

/// How many neurons won exactly `c` samples, for every `c` that occurs
/// (zero included).
pub fn activation_histogram(a: &Assignments) -> BTreeMap<u64, usize> {
    let mut hist = BTreeMap::new();
    for &c in &a.activation_counts {
        *hist.entry(c).or_insert(0) += 1;
    }
    hist
}
