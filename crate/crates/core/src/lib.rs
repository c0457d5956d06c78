//! Self-organizing (Kohonen) maps: training, classification, quality
//! metrics, JSON persistence and static plots.
//!
//! Typical flow:
//!
//! ```no_run
//! use somtool_core::{classify, fit_and_train, load_csv, CsvOptions, TrainingConfig};
//!
//! let data = load_csv("colors.csv", &CsvOptions::default())?;
//! let cfg = TrainingConfig::new(10, 50_000, 0.1).with_seed(42);
//! let (model, _trace) = fit_and_train(&data, &cfg)?;
//! let assignments = classify(&model, &data)?;
//! # Ok::<(), somtool_core::SomError>(())
//! ```

pub mod analytics;
pub mod classify;
pub mod error;
pub mod grid;
pub mod model;
pub mod persist;
pub mod preprocess;
pub mod training;
pub mod viz;

pub use analytics::{
    activation_density, build_report, quantization_error, topographic_error, u_matrix, GridValues,
    MapReport, Metrics, NeuronReport,
};
pub use classify::{activation_histogram, classify, Assignment, Assignments};
pub use error::{Result, SomError};
pub use grid::{
    euclidean_distance, find_bmu, find_two_bmus, grid_distance, init_weights, GridPosition,
    WeightMatrix,
};
pub use model::{SomModel, TrainingMeta, FORMAT_VERSION};
pub use persist::{from_json_str, load_model, save_model, to_json_string};
pub use preprocess::{
    denormalize, fit_normalization, load_csv, normalize, read_csv, summarize, CsvOptions, Dataset,
    FeatureSummary, LabelColumn, NormalizationParams,
};
pub use training::{
    fit_and_train, learning_rate_at, neighborhood_coefficient, radius_at, train, update_step,
    Checkpoint, Sampling, TrainingConfig, TrainingTrace,
};
pub use viz::{
    export_surface, render_bars, render_codebook_tiles, render_heatmap, surface_json, ColorScale,
    PlotKind, PlotSpec,
};
