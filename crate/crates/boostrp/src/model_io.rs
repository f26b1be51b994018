//! Versioned text serialization of fitted ensembles.
//!
//! The file is a single JSON document: a header (format version, variant,
//! loss, task, dimensions, learning rate), the intercept, then one record
//! per stage holding the projection (by scheme/seed/shape, with an optional
//! explicit-matrix fallback), the tree node list and the weight vector.
//! Floats are written with shortest round-trip precision, so
//! `load(save(model))` predicts bit-for-bit identically. Files with an
//! unknown format version are rejected.

use std::fs;
use std::path::Path;

use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};

use crate::boosting::{BoostedEnsemble, Stage, Variant};
use crate::data::TaskKind;
use crate::error::{Error, Result};
use crate::loss::LossKind;
use crate::projection::{ProjectionMatrix, ProjectionScheme};
use crate::rng::RngSeed;
use crate::tree::{Node, RegressionTree};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct ModelFile {
    format_version: u32,
    variant: String,
    loss: String,
    task: String,
    n_features: usize,
    n_outputs: usize,
    learning_rate: f64,
    intercept: Vec<f64>,
    stages: Vec<StageRecord>,
}

#[derive(Serialize, Deserialize)]
struct StageRecord {
    #[serde(skip_serializing_if = "Option::is_none", default)]
    projection: Option<ProjectionRecord>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    target_output: Option<usize>,
    tree: TreeRecord,
    rho: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct ProjectionRecord {
    scheme: String,
    seed: u64,
    q: usize,
    d: usize,
    /// Explicit row-major entries; present only as a forward-safety fallback.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    entries: Option<Vec<Vec<f64>>>,
}

#[derive(Serialize, Deserialize)]
struct TreeRecord {
    n_features: usize,
    n_outputs: usize,
    nodes: Vec<Node>,
}

fn encode(model: &BoostedEnsemble) -> ModelFile {
    ModelFile {
        format_version: FORMAT_VERSION,
        variant: model.variant().as_str().to_string(),
        loss: model.loss_kind().as_str().to_string(),
        task: model.task().as_str().to_string(),
        n_features: model.n_features(),
        n_outputs: model.n_outputs(),
        learning_rate: model.learning_rate(),
        intercept: model.intercept().to_vec(),
        stages: model
            .stages()
            .iter()
            .map(|stage| StageRecord {
                projection: stage.projection.as_ref().map(|phi| ProjectionRecord {
                    scheme: phi.scheme().as_str().to_string(),
                    seed: phi.seed().0,
                    q: phi.q(),
                    d: phi.d(),
                    entries: None,
                }),
                target_output: stage.target_output,
                tree: TreeRecord {
                    n_features: stage.tree.n_features(),
                    n_outputs: stage.tree.n_outputs(),
                    nodes: stage.tree.nodes().to_vec(),
                },
                rho: stage.rho.to_vec(),
            })
            .collect(),
    }
}

fn decode(file: ModelFile) -> Result<BoostedEnsemble> {
    if file.format_version != FORMAT_VERSION {
        return Err(Error::ModelFormat(format!(
            "unsupported format version {} (expected {FORMAT_VERSION})",
            file.format_version
        )));
    }
    let variant: Variant = file.variant.parse()?;
    let loss: LossKind = file.loss.parse()?;
    let task: TaskKind = file.task.parse()?;
    if file.intercept.len() != file.n_outputs {
        return Err(Error::ModelFormat("intercept dimension mismatch".into()));
    }

    let mut stages = Vec::with_capacity(file.stages.len());
    for (index, record) in file.stages.into_iter().enumerate() {
        if record.rho.len() != file.n_outputs {
            return Err(Error::ModelFormat(format!(
                "stage {index}: weight vector dimension mismatch"
            )));
        }
        if record.tree.n_features != file.n_features {
            return Err(Error::ModelFormat(format!(
                "stage {index}: tree feature count mismatch"
            )));
        }
        let tree = RegressionTree::from_parts(
            record.tree.nodes,
            record.tree.n_features,
            record.tree.n_outputs,
        )?;
        let projection = match record.projection {
            None => None,
            Some(rec) => {
                let scheme: ProjectionScheme = rec.scheme.parse()?;
                let phi = match rec.entries {
                    // Regenerating from the seed is the normal path; explicit
                    // entries win when present.
                    None => ProjectionMatrix::draw(scheme, rec.q, rec.d, RngSeed(rec.seed))?,
                    Some(rows) => {
                        if rows.len() != rec.q || rows.iter().any(|r| r.len() != rec.d) {
                            return Err(Error::ModelFormat(format!(
                                "stage {index}: projection entry shape mismatch"
                            )));
                        }
                        let flat: Vec<f64> = rows.into_iter().flatten().collect();
                        let entries = Array2::from_shape_vec((rec.q, rec.d), flat)
                            .map_err(|e| Error::ModelFormat(e.to_string()))?;
                        ProjectionMatrix::from_entries(scheme, RngSeed(rec.seed), entries)?
                    }
                };
                Some(phi)
            }
        };
        stages.push(Stage {
            tree,
            rho: Array1::from_vec(record.rho),
            projection,
            target_output: record.target_output,
        });
    }

    Ok(BoostedEnsemble::from_parts(
        variant,
        loss,
        task,
        file.learning_rate,
        file.n_features,
        Array1::from_vec(file.intercept),
        stages,
    ))
}

/// Serializes a model to its text form.
pub fn model_to_string(model: &BoostedEnsemble) -> Result<String> {
    serde_json::to_string(&encode(model)).map_err(|e| Error::ModelFormat(e.to_string()))
}

/// Parses a model from its text form.
pub fn model_from_str(text: &str) -> Result<BoostedEnsemble> {
    let file: ModelFile =
        serde_json::from_str(text).map_err(|e| Error::ModelFormat(e.to_string()))?;
    decode(file)
}

pub fn save_model<P: AsRef<Path>>(model: &BoostedEnsemble, path: P) -> Result<()> {
    fs::write(path, model_to_string(model)?)?;
    Ok(())
}

pub fn load_model<P: AsRef<Path>>(path: P) -> Result<BoostedEnsemble> {
    let text = fs::read_to_string(path)?;
    model_from_str(&text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::Array2;
    use rand::Rng;

    use crate::boosting::{fit, BoostConfig};
    use crate::data::Dataset;

    fn small_regression(seed: u64) -> Dataset {
        let mut rng = RngSeed(seed).rng();
        let x = Array2::from_shape_fn((25, 3), |_| rng.random::<f64>());
        let y = Array2::from_shape_fn((25, 2), |(i, j)| x[[i, j]] * 2.0 + rng.random::<f64>());
        Dataset::new(x, y, TaskKind::Regression).unwrap()
    }

    #[test]
    fn round_trip_preserves_predictions_exactly() {
        let train = small_regression(1);
        let mut config = BoostConfig::new(Variant::GbRelabelRpo, LossKind::L2, 8, RngSeed(2));
        config.q = 2;
        config.projection = ProjectionScheme::Gaussian;
        let (model, _) = fit(&train, &config).unwrap();
        let text = model_to_string(&model).unwrap();
        let loaded = model_from_str(&text).unwrap();
        let a = model.predict(train.features()).unwrap();
        let b = loaded.predict(train.features()).unwrap();
        assert_eq!(a, b);
        assert_eq!(loaded.variant(), Variant::GbRelabelRpo);
        assert_eq!(loaded.n_stages(), model.n_stages());
    }

    #[test]
    fn file_round_trip() {
        let train = small_regression(3);
        let config = BoostConfig::new(Variant::SingleTarget, LossKind::L2, 4, RngSeed(4));
        let (model, _) = fit(&train, &config).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.json");
        save_model(&model, &path).unwrap();
        let loaded = load_model(&path).unwrap();
        assert_eq!(
            model.predict(train.features()).unwrap(),
            loaded.predict(train.features()).unwrap()
        );
    }

    #[test]
    fn unknown_version_is_rejected() {
        let train = small_regression(5);
        let config = BoostConfig::new(Variant::GbMo, LossKind::L2, 2, RngSeed(6));
        let (model, _) = fit(&train, &config).unwrap();
        let text = model_to_string(&model).unwrap();
        let bumped = text.replace("\"format_version\":1", "\"format_version\":99");
        assert_ne!(text, bumped);
        let err = model_from_str(&bumped).unwrap_err();
        assert!(matches!(err, Error::ModelFormat(_)), "{err}");
    }

    #[test]
    fn explicit_projection_entries_override_the_seed() {
        let train = small_regression(7);
        let config = BoostConfig::new(Variant::GbRpo, LossKind::L2, 1, RngSeed(8));
        let (model, _) = fit(&train, &config).unwrap();
        let text = model_to_string(&model).unwrap();

        let mut file: serde_json::Value = serde_json::from_str(&text).unwrap();
        let d = model.n_outputs();
        let row: Vec<f64> = (0..d).map(|j| j as f64 + 0.5).collect();
        file["stages"][0]["projection"]["entries"] = serde_json::json!(vec![row.clone()]);
        // A seed that would regenerate something else entirely.
        file["stages"][0]["projection"]["seed"] = serde_json::json!(123456u64);
        let loaded = model_from_str(&file.to_string()).unwrap();
        let phi = loaded.stages()[0].projection.as_ref().unwrap();
        assert_eq!(phi.entries().row(0).to_vec(), row);
        // Predictions do not involve the projection, so they still match.
        assert_eq!(
            model.predict(train.features()).unwrap(),
            loaded.predict(train.features()).unwrap()
        );
    }

    #[test]
    fn serialization_is_deterministic() {
        let train = small_regression(9);
        let config = BoostConfig::new(Variant::GbRpo, LossKind::L2, 5, RngSeed(10));
        let (a, _) = fit(&train, &config).unwrap();
        let (b, _) = fit(&train, &config).unwrap();
        assert_eq!(model_to_string(&a).unwrap(), model_to_string(&b).unwrap());
    }
}
