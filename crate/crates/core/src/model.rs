use crate::error::{check_dim, Result, SomError};
use crate::grid::WeightMatrix;
use crate::preprocess::NormalizationParams;
use crate::training::TrainingConfig;

pub const FORMAT_VERSION: u32 = 1;

/// Training configuration as recorded in a model, plus how far training got.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingMeta {
    pub config: TrainingConfig,
    pub presentations_completed: u64,
}

/// A trained feature map: codebook plus the normalization it was trained
/// under. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct SomModel {
    weights: WeightMatrix,
    normalization: NormalizationParams,
    training: TrainingMeta,
}

impl SomModel {
    pub fn new(
        weights: WeightMatrix,
        normalization: NormalizationParams,
        training: TrainingMeta,
    ) -> Result<Self> {
        normalization.validate()?;
        training
            .config
            .validate()
            .map_err(|e| SomError::schema("training_meta", e.to_string()))?;
        check_dim(weights.dim(), normalization.dim())?;
        if training.config.side != weights.side() {
            return Err(SomError::schema(
                "training_meta",
                format!(
                    "configured side {} differs from weight matrix side {}",
                    training.config.side,
                    weights.side()
                ),
            ));
        }
        if training.presentations_completed > training.config.presentations {
            return Err(SomError::schema(
                "training_meta.presentations_completed",
                "exceeds configured presentations",
            ));
        }
        Ok(SomModel {
            weights,
            normalization,
            training,
        })
    }

    pub fn weights(&self) -> &WeightMatrix {
        &self.weights
    }

    pub fn normalization(&self) -> &NormalizationParams {
        &self.normalization
    }

    pub fn training(&self) -> &TrainingMeta {
        &self.training
    }

    pub fn side(&self) -> usize {
        self.weights.side()
    }

    pub fn dim(&self) -> usize {
        self.weights.dim()
    }

    pub fn format_version(&self) -> u32 {
        FORMAT_VERSION
    }
}
