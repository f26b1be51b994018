//! The boosting drivers and staged prediction.
//!
//! Four variants share one stagewise loop — compute the negative loss
//! gradient at the current prediction, fit a tree to some view of it, fit
//! per-output step weights, update — and differ only in what the tree sees:
//!
//! * `single-target`: one output's gradient per stage, round-robin;
//! * `gbmo`: the full `n x d` gradient, with vector-leaf trees;
//! * `gb-rpo`: a fresh random `1 x d` projection of the gradient per stage,
//!   with the scalar tree shared across outputs through its weight vector;
//! * `gb-relabel-rpo`: a fresh `q x d` projection for growing the structure,
//!   then leaves relabelled with per-leaf means of the unprojected gradient.
//!
//! The learning rate is folded into the stored weights at fit time, so a
//! saved model predicts without knowing it. Fitting and prediction share the
//! stage-application code path, which makes `predict` on the training set
//! reproduce the internal training-time predictions bit for bit.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use ndarray::{Array1, Array2, ArrayView2, Axis};

use crate::data::{Dataset, TaskKind};
use crate::error::{Error, Result};
use crate::loss::{Loss, LossKind, StepWeights};
use crate::metrics::Metric;
use crate::projection::{ProjectionMatrix, ProjectionScheme};
use crate::rng::{RngSeed, SeedStream};
use crate::tree::{RegressionTree, TreeConfig};

/// Which boosting driver to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variant {
    SingleTarget,
    GbMo,
    GbRpo,
    GbRelabelRpo,
}

impl Variant {
    pub fn as_str(&self) -> &'static str {
        match self {
            Variant::SingleTarget => "single-target",
            Variant::GbMo => "gbmo",
            Variant::GbRpo => "gb-rpo",
            Variant::GbRelabelRpo => "gb-relabel-rpo",
        }
    }

    pub fn uses_projection(&self) -> bool {
        matches!(self, Variant::GbRpo | Variant::GbRelabelRpo)
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Variant {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "single-target" => Ok(Variant::SingleTarget),
            "gbmo" => Ok(Variant::GbMo),
            "gb-rpo" => Ok(Variant::GbRpo),
            "gb-relabel-rpo" => Ok(Variant::GbRelabelRpo),
            other => Err(Error::Parameter(format!("unknown variant '{other}'"))),
        }
    }
}

/// Number of features drawn at each tree node.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KFeatures {
    All,
    Sqrt,
    Count(usize),
}

impl KFeatures {
    pub fn resolve(&self, p: usize) -> Result<usize> {
        match self {
            KFeatures::All => Ok(p),
            KFeatures::Sqrt => Ok(((p as f64).sqrt().round() as usize).clamp(1, p)),
            KFeatures::Count(k) => {
                if *k == 0 || *k > p {
                    Err(Error::Config(format!(
                        "k = {k} must lie in [1, {p}] for this dataset"
                    )))
                } else {
                    Ok(*k)
                }
            }
        }
    }
}

impl fmt::Display for KFeatures {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KFeatures::All => f.write_str("all"),
            KFeatures::Sqrt => f.write_str("sqrt"),
            KFeatures::Count(k) => write!(f, "{k}"),
        }
    }
}

impl FromStr for KFeatures {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "all" => Ok(KFeatures::All),
            "sqrt" => Ok(KFeatures::Sqrt),
            other => other
                .parse::<usize>()
                .map(KFeatures::Count)
                .map_err(|_| Error::Parameter(format!("k must be a count, 'all' or 'sqrt', got '{other}'"))),
        }
    }
}

/// Weak-learner shape shared by every stage.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TreeParams {
    pub max_leaves: usize,
    pub k_features: KFeatures,
    pub min_samples_leaf: usize,
}

impl Default for TreeParams {
    fn default() -> Self {
        TreeParams {
            max_leaves: 2,
            k_features: KFeatures::All,
            min_samples_leaf: 1,
        }
    }
}

/// Full training configuration for [`fit`].
#[derive(Debug, Clone, Copy)]
pub struct BoostConfig {
    pub variant: Variant,
    pub loss: LossKind,
    /// Maximum number of boosting stages M.
    pub stages: usize,
    /// Learning rate in (0, 1].
    pub learning_rate: f64,
    /// Projection scheme for the rpo variants; ignored otherwise.
    pub projection: ProjectionScheme,
    /// Projected dimension for `gb-relabel-rpo`; forced to 1 for `gb-rpo`.
    pub q: usize,
    pub tree: TreeParams,
    pub seed: RngSeed,
    /// Optional wall-clock budget in seconds; fitting stops at the first
    /// stage boundary past it.
    pub time_budget: Option<f64>,
}

impl BoostConfig {
    pub fn new(variant: Variant, loss: LossKind, stages: usize, seed: RngSeed) -> Self {
        BoostConfig {
            variant,
            loss,
            stages,
            learning_rate: 0.1,
            projection: ProjectionScheme::Subsample,
            q: 1,
            tree: TreeParams::default(),
            seed,
            time_budget: None,
        }
    }

    /// Checks the configuration alone (everything that does not need data).
    pub fn validate_params(&self) -> Result<()> {
        if !(self.learning_rate > 0.0 && self.learning_rate <= 1.0) {
            return Err(Error::Config(format!(
                "learning rate must lie in (0, 1], got {}",
                self.learning_rate
            )));
        }
        if self.q == 0 {
            return Err(Error::Config("q must be >= 1".into()));
        }
        if self.variant == Variant::GbRpo && self.q != 1 {
            return Err(Error::Config(
                "gb-rpo projects onto a single row; q must be 1".into(),
            ));
        }
        if self.tree.max_leaves < 2 {
            return Err(Error::Config("max_leaves must be >= 2".into()));
        }
        if self.tree.min_samples_leaf == 0 {
            return Err(Error::Config("min_samples_leaf must be >= 1".into()));
        }
        if let Some(budget) = self.time_budget {
            if budget < 0.0 {
                return Err(Error::Config("time budget must be >= 0".into()));
            }
        }
        Ok(())
    }

    /// Checks the configuration against a concrete training set.
    pub fn validate(&self, train: &Dataset) -> Result<()> {
        self.validate_params()?;
        if self.loss == LossKind::Logistic && train.task() != TaskKind::Multilabel {
            return Err(Error::Config(
                "logistic loss requires a multilabel dataset".into(),
            ));
        }
        if self.variant.uses_projection()
            && self.projection == ProjectionScheme::Subsample
            && self.q > train.n_outputs()
        {
            return Err(Error::Config(format!(
                "subsampling q = {} outputs of {} is not possible without replacement",
                self.q,
                train.n_outputs()
            )));
        }
        self.tree.k_features.resolve(train.n_features())?;
        Ok(())
    }
}

/// One boosting stage: a tree, its per-output weights (learning rate already
/// folded in), and how the tree's targets were derived.
#[derive(Debug, Clone)]
pub struct Stage {
    pub tree: RegressionTree,
    pub rho: StepWeights,
    pub projection: Option<ProjectionMatrix>,
    pub target_output: Option<usize>,
}

impl Stage {
    // Adds this stage's contribution to a prediction matrix. Used by both
    // fitting and prediction so the two agree bit for bit.
    fn apply(&self, x: ArrayView2<'_, f64>, f: &mut Array2<f64>) -> Result<()> {
        let out = self.tree.predict(x)?;
        let d = f.ncols();
        if self.rho.len() != d {
            return Err(Error::Shape("stage weight dimension mismatch".into()));
        }
        if self.tree.n_outputs() == 1 {
            for i in 0..f.nrows() {
                let h = out[[i, 0]];
                for j in 0..d {
                    f[[i, j]] += self.rho[j] * h;
                }
            }
        } else {
            if self.tree.n_outputs() != d {
                return Err(Error::Shape("stage tree dimension mismatch".into()));
            }
            for i in 0..f.nrows() {
                for j in 0..d {
                    f[[i, j]] += self.rho[j] * out[[i, j]];
                }
            }
        }
        Ok(())
    }
}

/// A fitted additive model: intercept plus weighted tree stages.
#[derive(Debug, Clone)]
pub struct BoostedEnsemble {
    variant: Variant,
    loss: LossKind,
    task: TaskKind,
    learning_rate: f64,
    n_features: usize,
    rho0: Array1<f64>,
    stages: Vec<Stage>,
}

/// Per-stage diagnostics from a fit.
#[derive(Debug, Clone)]
pub struct FitTrace {
    /// Total training loss after the intercept (entry 0) and after each
    /// stage. Non-increasing for convex losses.
    pub train_loss: Vec<f64>,
    /// Wall-clock seconds spent fitting each stage.
    pub stage_seconds: Vec<f64>,
}

impl FitTrace {
    /// Cumulative fit time at the end of each stage; entry 0 is the intercept.
    pub fn cumulative_seconds(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.stage_seconds.len() + 1);
        let mut acc = 0.0;
        out.push(0.0);
        for &s in &self.stage_seconds {
            acc += s;
            out.push(acc);
        }
        out
    }
}

/// Trains an ensemble. Returns the model and its per-stage training trace.
pub fn fit(train: &Dataset, config: &BoostConfig) -> Result<(BoostedEnsemble, FitTrace)> {
    config.validate(train)?;
    let x = train.features();
    let y = train.targets();
    let n = train.n_samples();
    let d = train.n_outputs();
    let p = train.n_features();
    if n == 0 {
        return Err(Error::Validation("training set is empty".into()));
    }
    let loss = Loss::new(config.loss, d);
    let k_features = config.tree.k_features.resolve(p)?;

    let started = Instant::now();
    let rho0 = loss.constant_minimizer(y)?;
    let mut pred = Array2::from_shape_fn((n, d), |(_, j)| rho0[j]);
    let mut train_loss = vec![loss.total_value(y, pred.view())?];
    let mut stage_seconds = Vec::new();
    let mut stages: Vec<Stage> = Vec::new();
    let mut zero_stage_run = 0usize;

    for m in 1..=config.stages {
        if let Some(budget) = config.time_budget {
            if started.elapsed().as_secs_f64() >= budget {
                break;
            }
        }
        let stage_started = Instant::now();
        let gradient = loss.negative_gradient_matrix(y, pred.view())?;
        let tree_config = TreeConfig {
            max_leaves: config.tree.max_leaves,
            k_features,
            min_samples_leaf: config.tree.min_samples_leaf,
            seed: config.seed.derive(SeedStream::Tree, m as u64),
        };

        let stage = match config.variant {
            Variant::SingleTarget => {
                let j = (m - 1) % d;
                let column = gradient.column(j).insert_axis(Axis(1));
                let tree = RegressionTree::fit(x, column.view(), &tree_config)?;
                let h = tree.predict(x)?;
                let rho_j =
                    loss.fit_rho_for_output(j, y.column(j), pred.column(j), h.column(0))?;
                let mut rho = Array1::zeros(d);
                rho[j] = config.learning_rate * rho_j;
                Stage {
                    tree,
                    rho,
                    projection: None,
                    target_output: Some(j),
                }
            }
            Variant::GbMo => {
                let tree = RegressionTree::fit(x, gradient.view(), &tree_config)?;
                let h = tree.predict(x)?;
                let rho = loss.fit_rho_vector_tree(y, pred.view(), h.view())?;
                Stage {
                    tree,
                    rho: rho * config.learning_rate,
                    projection: None,
                    target_output: None,
                }
            }
            Variant::GbRpo => {
                let phi = ProjectionMatrix::draw(
                    config.projection,
                    1,
                    d,
                    config.seed.derive(SeedStream::Projection, m as u64),
                )?;
                let projected = phi.project(gradient.view())?;
                let tree = RegressionTree::fit(x, projected.view(), &tree_config)?;
                let h = tree.predict(x)?;
                let rho = loss.fit_rho_scalar_tree(y, pred.view(), h.column(0))?;
                Stage {
                    tree,
                    rho: rho * config.learning_rate,
                    projection: Some(phi),
                    target_output: None,
                }
            }
            Variant::GbRelabelRpo => {
                let phi = ProjectionMatrix::draw(
                    config.projection,
                    config.q,
                    d,
                    config.seed.derive(SeedStream::Projection, m as u64),
                )?;
                let projected = phi.project(gradient.view())?;
                let grown = RegressionTree::fit(x, projected.view(), &tree_config)?;
                // Back to the original residual space: per-leaf means of the
                // unprojected negative gradient.
                let tree = grown.relabel(x, gradient.view())?;
                let h = tree.predict(x)?;
                let rho = loss.fit_rho_vector_tree(y, pred.view(), h.view())?;
                Stage {
                    tree,
                    rho: rho * config.learning_rate,
                    projection: Some(phi),
                    target_output: None,
                }
            }
        };

        stage.apply(x, &mut pred)?;
        train_loss.push(loss.total_value(y, pred.view())?);
        stage_seconds.push(stage_started.elapsed().as_secs_f64());
        let all_zero = stage.rho.iter().all(|&r| r == 0.0);
        stages.push(stage);
        if all_zero {
            zero_stage_run += 1;
            if zero_stage_run >= 3 {
                break; // residuals exhausted
            }
        } else {
            zero_stage_run = 0;
        }
    }

    Ok((
        BoostedEnsemble {
            variant: config.variant,
            loss: config.loss,
            task: train.task(),
            learning_rate: config.learning_rate,
            n_features: p,
            rho0,
            stages,
        },
        FitTrace {
            train_loss,
            stage_seconds,
        },
    ))
}

impl BoostedEnsemble {
    pub fn variant(&self) -> Variant {
        self.variant
    }

    pub fn loss_kind(&self) -> LossKind {
        self.loss
    }

    pub fn task(&self) -> TaskKind {
        self.task
    }

    pub fn learning_rate(&self) -> f64 {
        self.learning_rate
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn n_outputs(&self) -> usize {
        self.rho0.len()
    }

    pub fn n_stages(&self) -> usize {
        self.stages.len()
    }

    pub fn intercept(&self) -> &Array1<f64> {
        &self.rho0
    }

    pub fn stages(&self) -> &[Stage] {
        &self.stages
    }

    pub(crate) fn from_parts(
        variant: Variant,
        loss: LossKind,
        task: TaskKind,
        learning_rate: f64,
        n_features: usize,
        rho0: Array1<f64>,
        stages: Vec<Stage>,
    ) -> Self {
        BoostedEnsemble {
            variant,
            loss,
            task,
            learning_rate,
            n_features,
            rho0,
            stages,
        }
    }

    fn check_features(&self, x: &ArrayView2<'_, f64>) -> Result<()> {
        if x.ncols() != self.n_features {
            return Err(Error::Shape(format!(
                "model expects p = {} features but input has p = {}",
                self.n_features,
                x.ncols()
            )));
        }
        Ok(())
    }

    /// Raw scores / regression values, `m x d`.
    pub fn predict(&self, x: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
        self.check_features(&x)?;
        let mut f = Array2::from_shape_fn((x.nrows(), self.n_outputs()), |(_, j)| self.rho0[j]);
        for stage in &self.stages {
            stage.apply(x, &mut f)?;
        }
        Ok(f)
    }

    /// Per-output positive-class probabilities `1 / (1 + exp(-2 score))`.
    /// Only defined for logistic models.
    pub fn predict_proba(&self, x: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
        if self.loss != LossKind::Logistic {
            return Err(Error::Mode(
                "probability estimates require a logistic-loss model".into(),
            ));
        }
        let mut scores = self.predict(x)?;
        scores.mapv_inplace(|s| 1.0 / (1.0 + (-2.0 * s).exp()));
        Ok(scores)
    }

    /// Metric value after the intercept and after each stage prefix;
    /// the trace has `n_stages() + 1` entries and its last entry equals
    /// `metric(predict(x))`.
    pub fn staged_scores(
        &self,
        x: ArrayView2<'_, f64>,
        y_true: ArrayView2<'_, f64>,
        metric: Metric,
    ) -> Result<Vec<f64>> {
        self.check_features(&x)?;
        if y_true.nrows() != x.nrows() || y_true.ncols() != self.n_outputs() {
            return Err(Error::Shape(
                "staged evaluation needs matching targets".into(),
            ));
        }
        let mut f = Array2::from_shape_fn((x.nrows(), self.n_outputs()), |(_, j)| self.rho0[j]);
        let mut scores = Vec::with_capacity(self.stages.len() + 1);
        scores.push(metric.eval(y_true, f.view())?);
        for stage in &self.stages {
            stage.apply(x, &mut f)?;
            scores.push(metric.eval(y_true, f.view())?);
        }
        Ok(scores)
    }
}
