//! Gradient tree boosting for multi-output regression and multi-label
//! classification, with random projections of the output space.
//!
//! Four training drivers share one stagewise loop and differ in what each
//! weak tree fits:
//!
//! * [`Variant::SingleTarget`] — one independent sequence of trees per
//!   output, scheduled round-robin;
//! * [`Variant::GbMo`] — one multi-output tree per stage, fit on the full
//!   gradient matrix;
//! * [`Variant::GbRpo`] — one scalar tree per stage, fit on a fresh random
//!   1-row projection of the gradient; a per-output weight vector shares the
//!   tree across outputs;
//! * [`Variant::GbRelabelRpo`] — the tree structure is grown on a `q`-row
//!   projection, then its leaves are relabelled with per-leaf means of the
//!   unprojected gradient.
//!
//! ```
//! use boostrp::{fit, generate, macro_r2, BoostConfig, Family, LossKind,
//!               RngSeed, SyntheticSpec, Variant};
//!
//! let train = generate(&SyntheticSpec::new(Family::Group, 120, 4, RngSeed(7))).unwrap();
//! let config = BoostConfig::new(Variant::GbRpo, LossKind::L2, 50, RngSeed(1));
//! let (model, trace) = fit(&train, &config).unwrap();
//!
//! // Training loss never increases across stages.
//! assert!(trace.train_loss.windows(2).all(|w| w[1] <= w[0] + 1e-9));
//!
//! let pred = model.predict(train.features()).unwrap();
//! let score = macro_r2(train.targets(), pred.view()).unwrap();
//! assert!(score.value > 0.0);
//! ```
//!
//! The accompanying guide under `book/` walks through each concept; its code
//! snippets compile and run as doc-tests via the [`guide`] module.

pub mod boosting;
pub mod cli;
pub mod data;
mod error;
pub mod guide;
pub mod loss;
pub mod metrics;
pub mod model_io;
pub mod projection;
mod rng;
pub mod synthetic;
pub mod tree;

pub use boosting::{
    fit, BoostConfig, BoostedEnsemble, FitTrace, KFeatures, Stage, TreeParams, Variant,
};
pub use data::{Dataset, Split, TargetScaler, TaskKind};
pub use error::{Error, Result};
pub use loss::{brent_minimize, Loss, LossKind, StepWeights};
pub use metrics::{lrap, macro_r2, LrapScore, MacroR2Score, Metric, MetricReport};
pub use model_io::{load_model, model_from_str, model_to_string, save_model};
pub use projection::{ProjectionMatrix, ProjectionScheme};
pub use rng::{RngSeed, SeedStream};
pub use synthetic::{friedman_base, generate, Family, InputDistribution, SyntheticSpec};
pub use tree::{Node, RegressionTree, TreeConfig};
