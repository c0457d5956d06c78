//! Map-quality metrics and the per-neuron report.
//!
//! Metrics are computed in normalized space so runs on differently scaled
//! data stay comparable; codebook vectors in reports are given in raw units.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};

use rayon::prelude::*;
use serde::Serialize;

use crate::classify::{activation_histogram, Assignments};
use crate::error::{check_dim, Result, SomError};
use crate::grid::{bmu_unchecked, squared_distance, two_bmus_unchecked, GridPosition, WeightMatrix};
use crate::model::SomModel;
use crate::preprocess::{denormalize, Dataset};

/// A `side × side` grid of scalars, row-major.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridValues {
    pub side: usize,
    pub values: Vec<f64>,
}

impl GridValues {
    pub fn new(side: usize, values: Vec<f64>) -> Result<Self> {
        if side == 0 || values.len() != side * side {
            return Err(SomError::InvalidArgument(format!(
                "{} values do not fill a {side}x{side} grid",
                values.len()
            )));
        }
        Ok(GridValues { side, values })
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.side + col]
    }

    pub fn from_counts(side: usize, counts: &[u64]) -> Result<Self> {
        Self::new(side, counts.iter().map(|&c| c as f64).collect())
    }
}

/// Mean distance from each (already normalized) sample to its winner.
pub fn quantization_error_normalized(wm: &WeightMatrix, normalized: &Dataset) -> f64 {
    // Collect before summing so the float reduction order is fixed.
    let distances: Vec<f64> = (0..normalized.len())
        .into_par_iter()
        .map(|i| bmu_unchecked(normalized.row(i), wm).1.sqrt())
        .collect();
    distances.iter().sum::<f64>() / normalized.len() as f64
}

fn normalized_rows(model: &SomModel, ds: &Dataset) -> Result<Dataset> {
    check_dim(model.dim(), ds.dim())?;
    if ds.is_empty() {
        return Err(SomError::EmptyDataset);
    }
    crate::preprocess::normalize(ds, model.normalization())
}

/// Mean winner distance over raw-unit samples, after applying the model's
/// normalization.
pub fn quantization_error(model: &SomModel, ds: &Dataset) -> Result<f64> {
    let norm = normalized_rows(model, ds)?;
    Ok(quantization_error_normalized(model.weights(), &norm))
}

/// Fraction of samples whose two nearest neurons are not lattice neighbors
/// (8-neighborhood).
pub fn topographic_error(model: &SomModel, ds: &Dataset) -> Result<f64> {
    let wm = model.weights();
    if wm.neuron_count() < 2 {
        return Err(SomError::TooFewNeurons(wm.neuron_count()));
    }
    let norm = normalized_rows(model, ds)?;
    let errors = (0..norm.len())
        .into_par_iter()
        .filter(|&i| {
            let ((a, _), (b, _)) = two_bmus_unchecked(norm.row(i), wm);
            wm.position(a).chebyshev(&wm.position(b)) > 1
        })
        .count();
    Ok(errors as f64 / norm.len() as f64)
}

/// Share of neurons that won at least one sample.
pub fn activation_density(a: &Assignments) -> f64 {
    let active = a.activation_counts().iter().filter(|&&c| c > 0).count();
    active as f64 / a.activation_counts().len() as f64
}

/// Mean weight distance from each neuron to its existing 8-neighbors.
pub fn u_matrix(model: &SomModel) -> GridValues {
    let wm = model.weights();
    let side = wm.side();
    let mut values = Vec::with_capacity(side * side);
    for p in wm.positions() {
        let mut total = 0.0;
        let mut count = 0usize;
        for r in p.row.saturating_sub(1)..=(p.row + 1).min(side - 1) {
            for c in p.col.saturating_sub(1)..=(p.col + 1).min(side - 1) {
                if (r, c) == (p.row, p.col) {
                    continue;
                }
                total += squared_distance(wm.neuron(p.flat_index), wm.neuron(r * side + c)).sqrt();
                count += 1;
            }
        }
        values.push(if count == 0 { 0.0 } else { total / count as f64 });
    }
    GridValues { side, values }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NeuronReport {
    pub row: usize,
    pub col: usize,
    pub flat_index: usize,
    pub activation_count: u64,
    /// `None` for neurons that won nothing.
    pub mean_bmu_distance: Option<f64>,
    /// Codebook vector in raw units.
    pub weights: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub majority_label: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub purity: Option<f64>,
    #[serde(skip)]
    majority_count: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Metrics {
    pub quantization_error: f64,
    /// `None` on a single-neuron map, where it is undefined.
    pub topographic_error: Option<f64>,
    pub activation_density: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MapReport {
    pub side: usize,
    pub dim: usize,
    pub samples: usize,
    pub metrics: Metrics,
    /// `[activation count, neurons with that count]`, ascending by count.
    pub activation_histogram: Vec<(u64, usize)>,
    pub per_neuron: Vec<NeuronReport>,
}

impl MapReport {
    /// Purity over all labeled samples: summed majority counts divided by
    /// summed activation counts of labeled neurons. `None` without labels.
    pub fn weighted_purity(&self) -> Option<f64> {
        let (mut majority, mut total) = (0u64, 0u64);
        for n in &self.per_neuron {
            if let Some(m) = n.majority_count {
                majority += m;
                total += n.activation_count;
            }
        }
        (total > 0).then(|| majority as f64 / total as f64)
    }

    pub fn to_json_pretty(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| SomError::Invariant(e.to_string()))
    }
}

/// Majority label and its count; ties go to the lexicographically smallest
/// label.
fn majority<'a>(labels: impl Iterator<Item = &'a str>) -> Option<(String, u64)> {
    let mut counts: BTreeMap<&str, u64> = BTreeMap::new();
    for l in labels {
        *counts.entry(l).or_insert(0) += 1;
    }
    let mut best: Option<(&str, u64)> = None;
    for (label, count) in counts {
        if best.map_or(true, |(_, c)| count > c) {
            best = Some((label, count));
        }
    }
    best.map(|(l, c)| (l.to_string(), c))
}

pub fn build_report(model: &SomModel, a: &Assignments, ds: &Dataset) -> Result<MapReport> {
    if a.len() != ds.len() {
        return Err(SomError::InvalidArgument(format!(
            "{} assignments for {} samples",
            a.len(),
            ds.len()
        )));
    }
    if a.side() != model.side() {
        return Err(SomError::InvalidArgument(format!(
            "assignments are for a side-{} map, model has side {}",
            a.side(),
            model.side()
        )));
    }
    let wm = model.weights();
    let metrics = Metrics {
        quantization_error: quantization_error(model, ds)?,
        topographic_error: if wm.neuron_count() >= 2 {
            Some(topographic_error(model, ds)?)
        } else {
            None
        },
        activation_density: activation_density(a),
    };

    let mut members: Vec<Vec<usize>> = vec![Vec::new(); wm.neuron_count()];
    for (i, e) in a.entries().iter().enumerate() {
        members[e.position.flat_index].push(i);
    }
    let per_neuron = wm
        .positions()
        .map(|p| {
            let idx = &members[p.flat_index];
            let count = a.activation_counts()[p.flat_index];
            let mean_bmu_distance = (!idx.is_empty()).then(|| {
                idx.iter().map(|&i| a.entries()[i].bmu_distance).sum::<f64>() / idx.len() as f64
            });
            let maj = majority(idx.iter().filter_map(|&i| a.entries()[i].label.as_deref()));
            Ok(NeuronReport {
                row: p.row,
                col: p.col,
                flat_index: p.flat_index,
                activation_count: count,
                mean_bmu_distance,
                weights: denormalize(wm.neuron(p.flat_index), model.normalization())?,
                purity: maj.as_ref().map(|(_, c)| *c as f64 / count as f64),
                majority_count: maj.as_ref().map(|(_, c)| *c),
                majority_label: maj.map(|(l, _)| l),
            })
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(MapReport {
        side: model.side(),
        dim: model.dim(),
        samples: ds.len(),
        metrics,
        activation_histogram: activation_histogram(a).into_iter().collect(),
        per_neuron,
    })
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "-".to_string(), |x| format!("{x:.4}"))
}

impl fmt::Display for MapReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "map {0}x{0}, dim {1}, {2} samples", self.side, self.dim, self.samples)?;
        writeln!(f, "quantization error  {:.6}", self.metrics.quantization_error)?;
        writeln!(f, "topographic error   {}", fmt_opt(self.metrics.topographic_error))?;
        writeln!(f, "activation density  {:.4}", self.metrics.activation_density)?;
        if let Some(p) = self.weighted_purity() {
            writeln!(f, "weighted purity     {p:.4}")?;
        }
        writeln!(f)?;
        writeln!(f, "{:>5} {:>4} {:>4} {:>7} {:>10} {:>12} {:>7}  weights", "flat", "row", "col", "count", "mean dist", "label", "purity")?;
        for n in &self.per_neuron {
            let mut w = String::new();
            for (i, x) in n.weights.iter().enumerate() {
                if i > 0 {
                    w.push(' ');
                }
                let _ = write!(w, "{x:.3}");
            }
            writeln!(
                f,
                "{:>5} {:>4} {:>4} {:>7} {:>10} {:>12} {:>7}  {}",
                n.flat_index,
                n.row,
                n.col,
                n.activation_count,
                fmt_opt(n.mean_bmu_distance),
                n.majority_label.as_deref().unwrap_or("-"),
                fmt_opt(n.purity),
                w
            )?;
        }
        Ok(())
    }
}

/// Neurons whose majority label is `label`.
pub fn neurons_with_majority<'a>(report: &'a MapReport, label: &'a str) -> impl Iterator<Item = GridPosition> + 'a {
    report
        .per_neuron
        .iter()
        .filter(move |n| n.majority_label.as_deref() == Some(label))
        .map(|n| GridPosition {
            row: n.row,
            col: n.col,
            flat_index: n.flat_index,
        })
}
