//! Online Kohonen training.
//!
//! Each presentation picks one pattern, finds its best matching unit and
//! pulls every neuron toward the pattern by `α(t) · h(bmu, j, σ(t))`, where
//! `h` is a Gaussian over lattice distance. Both `α` and `σ` decay linearly
//! over the configured number of presentations `P`.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::analytics::quantization_error_normalized;
use crate::error::{check_dim, Result, SomError};
use crate::grid::{bmu_unchecked, grid_distance, init_weights, GridPosition, WeightMatrix};
use crate::model::{SomModel, TrainingMeta};
use crate::preprocess::{fit_normalization, normalize, Dataset, NormalizationParams};

/// Neighborhood coefficients below this are treated as zero.
pub const NEIGHBORHOOD_CUTOFF: f64 = 1e-6;

/// ChaCha stream used for pattern sampling; weight init uses stream 0 of the
/// same seed.
const SAMPLING_STREAM: u64 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sampling {
    /// Presentation `t` uses row `t mod N`.
    Cyclic,
    /// Rows drawn uniformly with replacement from a seeded stream.
    Random,
}

impl fmt::Display for Sampling {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sampling::Cyclic => "cyclic",
            Sampling::Random => "random",
        })
    }
}

impl FromStr for Sampling {
    type Err = SomError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cyclic" => Ok(Sampling::Cyclic),
            "random" | "uniform-random" => Ok(Sampling::Random),
            other => Err(SomError::InvalidConfig(format!("unknown sampling mode `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainingConfig {
    pub side: usize,
    /// Total number of pattern presentations `P`.
    pub presentations: u64,
    pub initial_learning_rate: f64,
    pub initial_radius: f64,
    pub seed: u64,
    pub sampling: Sampling,
}

impl TrainingConfig {
    /// Config with the default radius `max(1, side / 2)`, seed 0 and random
    /// sampling.
    pub fn new(side: usize, presentations: u64, initial_learning_rate: f64) -> Self {
        TrainingConfig {
            side,
            presentations,
            initial_learning_rate,
            initial_radius: default_radius(side),
            seed: 0,
            sampling: Sampling::Random,
        }
    }

    pub fn with_radius(mut self, radius: f64) -> Self {
        self.initial_radius = radius;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_sampling(mut self, sampling: Sampling) -> Self {
        self.sampling = sampling;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.side == 0 {
            return Err(SomError::InvalidConfig("side must be at least 1".into()));
        }
        if self.presentations == 0 {
            return Err(SomError::InvalidConfig("presentations must be at least 1".into()));
        }
        let lr = self.initial_learning_rate;
        if !(lr > 0.0 && lr <= 1.0) {
            return Err(SomError::InvalidConfig(format!(
                "learning rate must lie in (0, 1], got {lr}"
            )));
        }
        let r = self.initial_radius;
        if !(r.is_finite() && r > 0.0) {
            return Err(SomError::InvalidConfig(format!("radius must be positive, got {r}")));
        }
        if self.side > 1 && r < 1.0 {
            return Err(SomError::InvalidConfig(format!(
                "radius must be at least 1 for maps larger than 1x1, got {r}"
            )));
        }
        Ok(())
    }
}

pub fn default_radius(side: usize) -> f64 {
    (side as f64 / 2.0).max(1.0)
}

fn check_t(t: u64, cfg: &TrainingConfig) -> Result<()> {
    if t >= cfg.presentations {
        return Err(SomError::PresentationOutOfRange {
            t,
            presentations: cfg.presentations,
        });
    }
    Ok(())
}

#[inline]
fn remaining(t: u64, presentations: u64) -> f64 {
    1.0 - t as f64 / presentations as f64
}

/// `α(t) = α₀ · (1 − t/P)`.
pub fn learning_rate_at(t: u64, cfg: &TrainingConfig) -> Result<f64> {
    check_t(t, cfg)?;
    Ok(cfg.initial_learning_rate * remaining(t, cfg.presentations))
}

/// `σ(t) = 1 + (σ₀ − 1) · (1 − t/P)`.
pub fn radius_at(t: u64, cfg: &TrainingConfig) -> Result<f64> {
    check_t(t, cfg)?;
    Ok(1.0 + (cfg.initial_radius - 1.0) * remaining(t, cfg.presentations))
}

/// Gaussian neighborhood `exp(−d² / 2σ²)` over lattice distance.
pub fn neighborhood_coefficient(bmu: &GridPosition, node: &GridPosition, sigma: f64) -> Result<f64> {
    if !(sigma > 0.0) {
        return Err(SomError::InvalidArgument(format!("sigma must be positive, got {sigma}")));
    }
    let d = grid_distance(bmu, node);
    Ok((-(d * d) / (2.0 * sigma * sigma)).exp())
}

/// One presentation of `sample` at index `t`. Returns the winner.
pub fn update_step(
    wm: &mut WeightMatrix,
    sample: &[f64],
    t: u64,
    cfg: &TrainingConfig,
) -> Result<GridPosition> {
    check_dim(wm.dim(), sample.len())?;
    check_t(t, cfg)?;
    let alpha = learning_rate_at(t, cfg)?;
    let sigma = radius_at(t, cfg)?;
    Ok(apply_update(wm, sample, alpha, sigma))
}

fn apply_update(wm: &mut WeightMatrix, sample: &[f64], alpha: f64, sigma: f64) -> GridPosition {
    let (bmu, _) = bmu_unchecked(sample, wm);
    let bmu = wm.position(bmu);
    let inv_two_sigma_sq = 1.0 / (2.0 * sigma * sigma);
    for j in 0..wm.neuron_count() {
        let node = wm.position(j);
        let dr = node.row.abs_diff(bmu.row) as f64;
        let dc = node.col.abs_diff(bmu.col) as f64;
        let h = (-(dr * dr + dc * dc) * inv_two_sigma_sq).exp();
        if h < NEIGHBORHOOD_CUTOFF {
            continue;
        }
        let rate = alpha * h;
        for (w, &x) in wm.neuron_mut(j).iter_mut().zip(sample) {
            // A convex combination of w and x; clamp away rounding overshoot.
            let moved = *w + rate * (x - *w);
            *w = if x >= *w { moved.clamp(*w, x) } else { moved.clamp(x, *w) };
        }
    }
    bmu
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Checkpoint {
    pub t: u64,
    #[serde(rename = "alpha")]
    pub learning_rate: f64,
    #[serde(rename = "sigma")]
    pub radius: f64,
    /// Over the training set, measured right after presentation `t`.
    pub quantization_error: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrainingTrace {
    pub checkpoints: Vec<Checkpoint>,
}

impl TrainingTrace {
    /// CSV with header `t,alpha,sigma,quantization_error`.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["t", "alpha", "sigma", "quantization_error"])
            .map_err(|e| SomError::Csv(e.to_string()))?;
        for c in &self.checkpoints {
            w.write_record([
                c.t.to_string(),
                c.learning_rate.to_string(),
                c.radius.to_string(),
                c.quantization_error.to_string(),
            ])
            .map_err(|e| SomError::Csv(e.to_string()))?;
        }
        w.flush().map_err(|e| SomError::Csv(e.to_string()))
    }
}

/// Interval between trace checkpoints: `max(1, P / 100)`.
pub fn checkpoint_interval(presentations: u64) -> u64 {
    (presentations / 100).max(1)
}

/// Trains a map on already-normalized data. `normalization` is stored in the
/// model so raw inputs can be mapped later.
pub fn train(
    ds: &Dataset,
    normalization: NormalizationParams,
    cfg: &TrainingConfig,
) -> Result<(SomModel, TrainingTrace)> {
    cfg.validate()?;
    if ds.is_empty() {
        return Err(SomError::EmptyDataset);
    }
    check_dim(normalization.dim(), ds.dim())?;
    for (row, values) in ds.rows().enumerate() {
        if let Some((feature, &value)) = values
            .iter()
            .enumerate()
            .find(|(_, v)| !(0.0..=1.0).contains(*v))
        {
            return Err(SomError::NotNormalized { row, feature, value });
        }
    }

    let mut wm = init_weights(cfg.side, ds.dim(), cfg.seed)?;
    let mut sampler = ChaCha8Rng::seed_from_u64(cfg.seed);
    sampler.set_stream(SAMPLING_STREAM);
    let n = ds.len();
    let interval = checkpoint_interval(cfg.presentations);
    let mut trace = TrainingTrace::default();

    for t in 0..cfg.presentations {
        let idx = match cfg.sampling {
            Sampling::Cyclic => (t % n as u64) as usize,
            Sampling::Random => sampler.random_range(0..n),
        };
        let alpha = learning_rate_at(t, cfg)?;
        let sigma = radius_at(t, cfg)?;
        apply_update(&mut wm, ds.row(idx), alpha, sigma);
        if t % interval == 0 {
            trace.checkpoints.push(Checkpoint {
                t,
                learning_rate: alpha,
                radius: sigma,
                quantization_error: quantization_error_normalized(&wm, ds),
            });
        }
    }

    let meta = TrainingMeta {
        config: cfg.clone(),
        presentations_completed: cfg.presentations,
    };
    Ok((SomModel::new(wm, normalization, meta)?, trace))
}

/// Fits min-max normalization on `raw`, normalizes it and trains.
pub fn fit_and_train(raw: &Dataset, cfg: &TrainingConfig) -> Result<(SomModel, TrainingTrace)> {
    let params = fit_normalization(raw)?;
    let normalized = normalize(raw, &params)?;
    train(&normalized, params, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::Rng;

    fn cfg(side: usize, p: u64) -> TrainingConfig {
        TrainingConfig::new(side, p, 0.1).with_seed(42)
    }

    #[test]
    fn learning_rate_schedule() {
        let c = TrainingConfig::new(10, 50_000, 0.1);
        assert_eq!(learning_rate_at(0, &c).unwrap(), 0.1);
        assert!((learning_rate_at(25_000, &c).unwrap() - 0.05).abs() < 1e-15);
        assert!(learning_rate_at(49_999, &c).unwrap() > 0.0);
        assert!(learning_rate_at(50_000, &c).is_err());
        for t in (0..50_000).step_by(997) {
            let expect = 0.1 * (1.0 - t as f64 / 50_000.0);
            assert!((learning_rate_at(t, &c).unwrap() - expect).abs() < 1e-15);
        }
    }

    #[test]
    fn radius_schedule() {
        let c = TrainingConfig::new(10, 1000, 0.1);
        assert_eq!(radius_at(0, &c).unwrap(), 5.0);
        assert!((radius_at(999, &c).unwrap() - 1.0).abs() < 0.01);
        assert!(radius_at(1000, &c).is_err());
        let mut prev = f64::INFINITY;
        for t in 0..1000 {
            let r = radius_at(t, &c).unwrap();
            assert!(r <= prev && r >= 1.0);
            prev = r;
        }
    }

    #[test]
    fn neighborhood_values() {
        let a = GridPosition::new(2, 2, 5).unwrap();
        let b = GridPosition::new(2, 4, 5).unwrap();
        assert_eq!(neighborhood_coefficient(&a, &a, 1.5).unwrap(), 1.0);
        assert!((neighborhood_coefficient(&a, &b, 2.0).unwrap() - (-0.5f64).exp()).abs() < 1e-15);
        assert!(neighborhood_coefficient(&a, &b, 0.0).is_err());
        assert!(neighborhood_coefficient(&a, &b, -1.0).is_err());
    }

    #[test]
    fn config_validation() {
        assert!(cfg(3, 0).validate().is_err());
        assert!(cfg(0, 5).validate().is_err());
        assert!(TrainingConfig::new(3, 5, 0.0).validate().is_err());
        assert!(TrainingConfig::new(3, 5, 1.5).validate().is_err());
        assert!(TrainingConfig::new(3, 5, 1.0).validate().is_ok());
        assert!(cfg(3, 5).with_radius(0.5).validate().is_err());
        assert!(cfg(1, 5).with_radius(0.5).validate().is_ok());
        assert_eq!(TrainingConfig::new(1, 1, 0.1).initial_radius, 1.0);
        assert_eq!(TrainingConfig::new(10, 1, 0.1).initial_radius, 5.0);
    }

    #[test]
    fn single_neuron_step() {
        let mut wm = WeightMatrix::from_flat(1, 2, vec![0.0, 0.0]).unwrap();
        let c = TrainingConfig::new(1, 10, 0.1);
        update_step(&mut wm, &[1.0, 1.0], 0, &c).unwrap();
        assert!(wm.as_slice().iter().all(|w| (w - 0.1).abs() < 1e-15));
    }

    #[test]
    fn step_with_sample_on_every_neuron_is_noop() {
        let mut wm = WeightMatrix::from_flat(3, 2, vec![0.25; 18]).unwrap();
        let before = wm.clone();
        update_step(&mut wm, &[0.25, 0.25], 3, &cfg(3, 10)).unwrap();
        assert_eq!(wm, before);
    }

    #[test]
    fn step_errors() {
        let mut wm = init_weights(2, 2, 1).unwrap();
        assert!(update_step(&mut wm, &[0.1], 0, &cfg(2, 10)).is_err());
        assert!(update_step(&mut wm, &[0.1, 0.2], 10, &cfg(2, 10)).is_err());
    }

    #[test]
    fn step_matches_cutoff_free_formula() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        for _ in 0..20 {
            let c = cfg(3, 100).with_radius(rng.random_range(1.0..3.0));
            let mut wm = init_weights(3, 4, rng.random()).unwrap();
            let x: Vec<f64> = (0..4).map(|_| rng.random::<f64>()).collect();
            let t = rng.random_range(0..100);
            let oracle = {
                let (b, _) = crate::grid::find_bmu(&x, &wm).unwrap();
                let a = c.initial_learning_rate * (1.0 - t as f64 / 100.0);
                let s = 1.0 + (c.initial_radius - 1.0) * (1.0 - t as f64 / 100.0);
                let mut out = wm.as_slice().to_vec();
                for j in 0..9 {
                    let p = wm.position(j);
                    let d2 = (p.row as f64 - b.row as f64).powi(2) + (p.col as f64 - b.col as f64).powi(2);
                    let h = (-d2 / (2.0 * s * s)).exp();
                    for i in 0..4 {
                        out[j * 4 + i] += a * h * (x[i] - out[j * 4 + i]);
                    }
                }
                out
            };
            update_step(&mut wm, &x, t, &c).unwrap();
            for (a, b) in wm.as_slice().iter().zip(&oracle) {
                assert!((a - b).abs() <= 1e-6);
            }
        }
    }

    #[test]
    fn train_rejects_bad_input() {
        let ds = Dataset::from_rows(&[vec![0.5, 2.0]]).unwrap();
        let err = train(&ds, NormalizationParams::identity(2), &cfg(2, 10)).unwrap_err();
        assert!(matches!(err, SomError::NotNormalized { row: 0, feature: 1, .. }));
        let empty = Dataset::from_flat(2, vec![]).unwrap();
        assert!(matches!(
            train(&empty, NormalizationParams::identity(2), &cfg(2, 10)),
            Err(SomError::EmptyDataset)
        ));
        let ok = Dataset::from_rows(&[vec![0.5, 0.5]]).unwrap();
        assert!(train(&ok, NormalizationParams::identity(2), &cfg(2, 0)).is_err());
        assert!(train(&ok, NormalizationParams::identity(3), &cfg(2, 10)).is_err());
    }

    #[test]
    fn one_presentation_is_one_step() {
        let ds = Dataset::from_rows(&[vec![0.9, 0.1], vec![0.2, 0.3]]).unwrap();
        let c = cfg(3, 1).with_sampling(Sampling::Cyclic);
        let (model, trace) = train(&ds, NormalizationParams::identity(2), &c).unwrap();
        let mut wm = init_weights(3, 2, 42).unwrap();
        update_step(&mut wm, ds.row(0), 0, &c).unwrap();
        assert_eq!(model.weights(), &wm);
        assert_eq!(model.training().presentations_completed, 1);
        assert_eq!(trace.checkpoints.len(), 1);
    }

    #[test]
    fn identical_inputs_attract_every_neuron() {
        let v = vec![0.3, 0.7, 0.5];
        let ds = Dataset::from_rows(&vec![v.clone(); 10]).unwrap();
        let (model, _) = train(&ds, NormalizationParams::identity(3), &cfg(4, 20_000).with_radius(2.0)).unwrap();
        for w in model.weights().neurons() {
            for (a, b) in w.iter().zip(&v) {
                assert!((a - b).abs() < 1e-3, "{a} vs {b}");
            }
        }
    }

    #[test]
    fn trace_is_monotone() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let rows: Vec<Vec<f64>> = (0..40).map(|_| vec![rng.random(), rng.random()]).collect();
        let ds = Dataset::from_rows(&rows).unwrap();
        let (_, trace) = train(&ds, NormalizationParams::identity(2), &cfg(4, 1000)).unwrap();
        assert_eq!(trace.checkpoints.len(), 100);
        for pair in trace.checkpoints.windows(2) {
            assert!(pair[0].t < pair[1].t);
            assert!(pair[0].learning_rate >= pair[1].learning_rate);
            assert!(pair[0].radius >= pair[1].radius);
        }
        let mut out = Vec::new();
        trace.write_csv(&mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert!(text.starts_with("t,alpha,sigma,quantization_error\n0,0.1,2,"));
        assert_eq!(text.lines().count(), 101);
    }

    #[test]
    fn sampling_parses() {
        assert_eq!("cyclic".parse::<Sampling>().unwrap(), Sampling::Cyclic);
        assert_eq!("random".parse::<Sampling>().unwrap(), Sampling::Random);
        assert!("other".parse::<Sampling>().is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn weights_stay_in_unit_interval_and_bmu_moves_closer(
            seed in any::<u64>(), side in 1usize..6, lr in 0.01f64..=1.0,
        ) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let c = TrainingConfig::new(side, 200, lr).with_seed(seed);
            let mut wm = init_weights(side, 3, seed).unwrap();
            for t in 0..200 {
                let x: Vec<f64> = (0..3).map(|_| if rng.random_bool(0.2) { 1.0 } else { rng.random() }).collect();
                let (before_pos, before) = crate::grid::find_bmu(&x, &wm).unwrap();
                let bmu = update_step(&mut wm, &x, t, &c).unwrap();
                prop_assert_eq!(bmu, before_pos);
                let after = crate::grid::euclidean_distance(&x, wm.neuron(bmu.flat_index)).unwrap();
                prop_assert!(after <= before);
                prop_assert!(wm.as_slice().iter().all(|w| (0.0..=1.0).contains(w)));
            }
        }

        #[test]
        fn training_is_deterministic(seed in any::<u64>(), cyclic in any::<bool>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let rows: Vec<Vec<f64>> = (0..15).map(|_| vec![rng.random(), rng.random()]).collect();
            let ds = Dataset::from_rows(&rows).unwrap();
            let sampling = if cyclic { Sampling::Cyclic } else { Sampling::Random };
            let c = cfg(3, 300).with_seed(seed).with_sampling(sampling);
            let a = train(&ds, NormalizationParams::identity(2), &c).unwrap();
            let b = train(&ds, NormalizationParams::identity(2), &c).unwrap();
            prop_assert_eq!(a, b);
        }
    }
}
