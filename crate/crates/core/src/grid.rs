//! Map lattice geometry, codebook storage and best-matching-unit search.
//!
//! Neurons live on a square `side × side` grid and are stored row-major:
//! the neuron at `(row, col)` has flat index `row * side + col`. Every other
//! module (persistence, plots, reports) indexes neurons the same way.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{check_dim, Result, SomError};

/// A neuron's coordinates on the map.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GridPosition {
    pub row: usize,
    pub col: usize,
    pub flat_index: usize,
}

impl GridPosition {
    pub fn new(row: usize, col: usize, side: usize) -> Result<Self> {
        if row >= side || col >= side {
            return Err(SomError::InvalidArgument(format!(
                "grid position ({row}, {col}) outside a {side}x{side} map"
            )));
        }
        Ok(GridPosition {
            row,
            col,
            flat_index: row * side + col,
        })
    }

    pub fn from_flat(flat_index: usize, side: usize) -> Result<Self> {
        if side == 0 || flat_index >= side * side {
            return Err(SomError::InvalidArgument(format!(
                "flat index {flat_index} outside a {side}x{side} map"
            )));
        }
        Ok(Self::from_flat_unchecked(flat_index, side))
    }

    #[inline]
    pub(crate) fn from_flat_unchecked(flat_index: usize, side: usize) -> Self {
        GridPosition {
            row: flat_index / side,
            col: flat_index % side,
            flat_index,
        }
    }

    /// Chebyshev distance on the lattice; `<= 1` means the two neurons touch
    /// (including diagonals).
    pub fn chebyshev(&self, other: &GridPosition) -> usize {
        self.row.abs_diff(other.row).max(self.col.abs_diff(other.col))
    }
}

/// Euclidean distance between two lattice positions.
pub fn grid_distance(p: &GridPosition, q: &GridPosition) -> f64 {
    let dr = p.row.abs_diff(q.row) as f64;
    let dc = p.col.abs_diff(q.col) as f64;
    (dr * dr + dc * dc).sqrt()
}

/// The codebook: `side²` weight vectors of dimension `dim`, flat row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightMatrix {
    side: usize,
    dim: usize,
    weights: Vec<f64>,
}

impl WeightMatrix {
    /// Builds a matrix from flat row-major data. All values must be finite.
    pub fn from_flat(side: usize, dim: usize, weights: Vec<f64>) -> Result<Self> {
        if side == 0 || dim == 0 {
            return Err(SomError::InvalidArgument(format!(
                "map side and input dimension must be positive (side {side}, dim {dim})"
            )));
        }
        if weights.len() != side * side * dim {
            return Err(SomError::InvalidArgument(format!(
                "expected {} weight components for a {side}x{side} map of dim {dim}, got {}",
                side * side * dim,
                weights.len()
            )));
        }
        if let Some(i) = weights.iter().position(|w| !w.is_finite()) {
            return Err(SomError::NonFinite(format!(
                "weight of neuron {} component {}",
                i / dim,
                i % dim
            )));
        }
        Ok(WeightMatrix { side, dim, weights })
    }

    pub fn from_rows(side: usize, rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().find(|r| r.len() != dim) {
            return Err(SomError::DimensionMismatch {
                expected: dim,
                found: bad.len(),
            });
        }
        Self::from_flat(side, dim, rows.concat())
    }

    pub fn side(&self) -> usize {
        self.side
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn neuron_count(&self) -> usize {
        self.side * self.side
    }

    #[inline]
    pub fn neuron(&self, flat_index: usize) -> &[f64] {
        &self.weights[flat_index * self.dim..(flat_index + 1) * self.dim]
    }

    #[inline]
    pub(crate) fn neuron_mut(&mut self, flat_index: usize) -> &mut [f64] {
        &mut self.weights[flat_index * self.dim..(flat_index + 1) * self.dim]
    }

    pub fn neurons(&self) -> std::slice::ChunksExact<'_, f64> {
        self.weights.chunks_exact(self.dim)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.weights
    }

    pub fn position(&self, flat_index: usize) -> GridPosition {
        GridPosition::from_flat_unchecked(flat_index, self.side)
    }

    pub fn positions(&self) -> impl Iterator<Item = GridPosition> + '_ {
        (0..self.neuron_count()).map(move |j| self.position(j))
    }
}

#[inline]
pub(crate) fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Euclidean distance between two vectors of equal dimension.
pub fn euclidean_distance(a: &[f64], b: &[f64]) -> Result<f64> {
    check_dim(a.len(), b.len())?;
    if a.is_empty() {
        return Err(SomError::InvalidArgument("vectors must be non-empty".into()));
    }
    Ok(squared_distance(a, b).sqrt())
}

/// Winner-takes-all search: the neuron whose weight vector is nearest to
/// `sample`, with ties going to the smallest flat index.
pub fn find_bmu(sample: &[f64], wm: &WeightMatrix) -> Result<(GridPosition, f64)> {
    check_dim(wm.dim, sample.len())?;
    let (best, best_sq) = bmu_unchecked(sample, wm);
    Ok((wm.position(best), best_sq.sqrt()))
}

#[inline]
pub(crate) fn bmu_unchecked(sample: &[f64], wm: &WeightMatrix) -> (usize, f64) {
    let mut best = 0;
    let mut best_sq = f64::INFINITY;
    for (j, w) in wm.neurons().enumerate() {
        let d = squared_distance(sample, w);
        if d < best_sq {
            best = j;
            best_sq = d;
        }
    }
    (best, best_sq)
}

/// First and second best matching units (distinct neurons).
pub fn find_two_bmus(sample: &[f64], wm: &WeightMatrix) -> Result<(GridPosition, GridPosition)> {
    check_dim(wm.dim, sample.len())?;
    if wm.neuron_count() < 2 {
        return Err(SomError::TooFewNeurons(wm.neuron_count()));
    }
    let ((first, _), (second, _)) = two_bmus_unchecked(sample, wm);
    Ok((wm.position(first), wm.position(second)))
}

pub(crate) fn two_bmus_unchecked(sample: &[f64], wm: &WeightMatrix) -> ((usize, f64), (usize, f64)) {
    let mut first = (usize::MAX, f64::INFINITY);
    let mut second = (usize::MAX, f64::INFINITY);
    for (j, w) in wm.neurons().enumerate() {
        let d = squared_distance(sample, w);
        if d < first.1 || first.0 == usize::MAX {
            second = first;
            first = (j, d);
        } else if d < second.1 || second.0 == usize::MAX {
            second = (j, d);
        }
    }
    (first, second)
}

/// Seeded uniform `[0, 1)` initialization. Same `(side, dim, seed)` always
/// yields the same matrix.
pub fn init_weights(side: usize, dim: usize, seed: u64) -> Result<WeightMatrix> {
    if side == 0 || dim == 0 {
        return Err(SomError::InvalidArgument(format!(
            "map side and input dimension must be positive (side {side}, dim {dim})"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let weights = (0..side * side * dim).map(|_| rng.random::<f64>()).collect();
    WeightMatrix::from_flat(side, dim, weights)
}
