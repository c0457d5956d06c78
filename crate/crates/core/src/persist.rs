//! JSON model documents.
//!
//! Layout (keys always in this order, weights ordered by flat index):
//!
//! ```json
//! {
//!   "format_version": 1,
//!   "side": 1,
//!   "dim": 2,
//!   "weights": [
//!     [0.25,0.75]
//!   ],
//!   "normalization": {"mins":[0.0,0.0],"maxs":[255.0,255.0],"degenerate_flags":[false,false]},
//!   "training_meta": {"presentations":10,"presentations_completed":10,"initial_learning_rate":0.1,"initial_radius":1.0,"seed":42,"sampling":"random"}
//! }
//! ```
//!
//! Floats are written in the shortest form that parses back to the same
//! bits, so equal models always serialize to identical bytes.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Result, SomError};
use crate::grid::WeightMatrix;
use crate::model::{SomModel, TrainingMeta, FORMAT_VERSION};
use crate::preprocess::NormalizationParams;
use crate::training::{Sampling, TrainingConfig};

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TrainingMetaDoc {
    presentations: u64,
    presentations_completed: u64,
    initial_learning_rate: f64,
    initial_radius: f64,
    seed: u64,
    sampling: Sampling,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelDocument {
    #[allow(dead_code)]
    format_version: u64,
    side: usize,
    dim: usize,
    weights: Vec<Vec<f64>>,
    normalization: NormalizationParams,
    training_meta: TrainingMetaDoc,
}

fn json<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    serde_json::to_string(value).map_err(|e| SomError::Invariant(e.to_string()))
}

/// Canonical serialization of a model.
pub fn to_json_string(model: &SomModel) -> Result<String> {
    let wm = model.weights();
    let norm = model.normalization();
    if norm.mins.iter().chain(&norm.maxs).any(|v| !v.is_finite()) {
        return Err(SomError::NonFinite("normalization".into()));
    }
    let meta = model.training();
    let cfg = &meta.config;
    if !cfg.initial_learning_rate.is_finite() || !cfg.initial_radius.is_finite() {
        return Err(SomError::NonFinite("training_meta".into()));
    }
    let meta_doc = TrainingMetaDoc {
        presentations: cfg.presentations,
        presentations_completed: meta.presentations_completed,
        initial_learning_rate: cfg.initial_learning_rate,
        initial_radius: cfg.initial_radius,
        seed: cfg.seed,
        sampling: cfg.sampling,
    };

    let mut out = String::new();
    out.push_str("{\n");
    out.push_str(&format!("  \"format_version\": {},\n", FORMAT_VERSION));
    out.push_str(&format!("  \"side\": {},\n", wm.side()));
    out.push_str(&format!("  \"dim\": {},\n", wm.dim()));
    out.push_str("  \"weights\": [\n");
    let n = wm.neuron_count();
    for (j, w) in wm.neurons().enumerate() {
        out.push_str("    ");
        out.push_str(&json(w)?);
        out.push_str(if j + 1 < n { ",\n" } else { "\n" });
    }
    out.push_str("  ],\n");
    out.push_str(&format!("  \"normalization\": {},\n", json(norm)?));
    out.push_str(&format!("  \"training_meta\": {}\n", json(&meta_doc)?));
    out.push_str("}\n");
    Ok(out)
}

pub fn save_model(model: &SomModel, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let text = to_json_string(model)?;
    fs::write(path, text).map_err(|e| SomError::io(path, e))
}

fn syntax_error(e: serde_json::Error) -> SomError {
    let message = e.to_string();
    if message.contains("number out of range") {
        return SomError::NonFinite(format!("number at line {}, column {}", e.line(), e.column()));
    }
    SomError::MalformedJson {
        line: e.line(),
        column: e.column(),
        message,
    }
}

/// Parses and validates a model document. Nothing is returned unless every
/// model invariant holds.
pub fn from_json_str(text: &str) -> Result<SomModel> {
    let value: serde_json::Value = serde_json::from_str(text).map_err(syntax_error)?;
    let obj = value
        .as_object()
        .ok_or_else(|| SomError::schema("document", "top level must be an object"))?;
    let version = obj
        .get("format_version")
        .ok_or_else(|| SomError::schema("format_version", "missing"))?
        .as_u64()
        .ok_or_else(|| SomError::schema("format_version", "must be a non-negative integer"))?;
    if version != u64::from(FORMAT_VERSION) {
        return Err(SomError::UnsupportedVersion {
            found: version,
            supported: FORMAT_VERSION,
        });
    }

    let doc: ModelDocument = serde_path_to_error::deserialize(&value).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner().to_string();
        let field = match path.as_str() {
            "." => inner
                .split('`')
                .nth(1)
                .map_or_else(|| "document".to_string(), str::to_string),
            p => p.to_string(),
        };
        SomError::schema(field, inner)
    })?;

    if doc.side == 0 {
        return Err(SomError::schema("side", "must be at least 1"));
    }
    if doc.dim == 0 {
        return Err(SomError::schema("dim", "must be at least 1"));
    }
    let neurons = doc.side * doc.side;
    if doc.weights.len() != neurons {
        return Err(SomError::schema(
            "weights",
            format!("expected {neurons} weight vectors for side {}, found {}", doc.side, doc.weights.len()),
        ));
    }
    if let Some(j) = doc.weights.iter().position(|w| w.len() != doc.dim) {
        return Err(SomError::schema(
            format!("weights[{j}]"),
            format!("expected {} components, found {}", doc.dim, doc.weights[j].len()),
        ));
    }
    if doc.normalization.dim() != doc.dim {
        return Err(SomError::schema(
            "normalization",
            format!("dimension {} does not match dim {}", doc.normalization.dim(), doc.dim),
        ));
    }
    let wm = WeightMatrix::from_flat(doc.side, doc.dim, doc.weights.concat())?;
    let m = doc.training_meta;
    let config = TrainingConfig {
        side: doc.side,
        presentations: m.presentations,
        initial_learning_rate: m.initial_learning_rate,
        initial_radius: m.initial_radius,
        seed: m.seed,
        sampling: m.sampling,
    };
    SomModel::new(
        wm,
        doc.normalization,
        TrainingMeta {
            config,
            presentations_completed: m.presentations_completed,
        },
    )
}

pub fn load_model(path: impl AsRef<Path>) -> Result<SomModel> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| SomError::io(path, e))?;
    from_json_str(&text)
}
