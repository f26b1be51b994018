//! Core data containers: dense feature/target matrices, CSV ingestion,
//! deterministic splitting and target standardization.
//!
//! Targets of multilabel tasks are stored internally as `{-1, +1}`; CSV files
//! use `{0, 1}` and are converted at the boundary in both directions.

use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use ndarray::{Array1, Array2, ArrayView2, Axis};
use rand::seq::SliceRandom;

use crate::error::{Error, Result};
use crate::rng::RngSeed;

/// What the target matrix represents.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TaskKind {
    Regression,
    Multilabel,
}

impl TaskKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            TaskKind::Regression => "regression",
            TaskKind::Multilabel => "multilabel",
        }
    }
}

impl fmt::Display for TaskKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TaskKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "regression" => Ok(TaskKind::Regression),
            "multilabel" => Ok(TaskKind::Multilabel),
            other => Err(Error::Parameter(format!("unknown task kind '{other}'"))),
        }
    }
}

/// An in-memory supervised dataset: an `n x p` feature matrix paired with an
/// `n x d` target matrix. Immutable after construction.
#[derive(Debug, Clone)]
pub struct Dataset {
    features: Array2<f64>,
    targets: Array2<f64>,
    task: TaskKind,
    feature_names: Option<Vec<String>>,
    target_names: Option<Vec<String>>,
}

/// A row-disjoint train/validation/test partition of one dataset.
#[derive(Debug, Clone)]
pub struct Split {
    pub train: Dataset,
    pub validation: Dataset,
    pub test: Dataset,
}

/// Per-output affine transform recorded by [`Dataset::standardize_targets`],
/// kept so predictions can be mapped back to the original scale.
#[derive(Debug, Clone)]
pub struct TargetScaler {
    pub mean: Array1<f64>,
    pub std: Array1<f64>,
}

impl TargetScaler {
    /// Maps standardized target values back to the original scale.
    pub fn inverse(&self, targets: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
        if targets.ncols() != self.mean.len() {
            return Err(Error::Shape(format!(
                "scaler has {} outputs but matrix has {} columns",
                self.mean.len(),
                targets.ncols()
            )));
        }
        let mut out = targets.to_owned();
        for (j, mut col) in out.axis_iter_mut(Axis(1)).enumerate() {
            col.mapv_inplace(|v| v * self.std[j] + self.mean[j]);
        }
        Ok(out)
    }
}

impl Dataset {
    /// Builds a dataset and checks its invariants: at least one row, one
    /// feature and one output, finite entries, and `{-1,+1}` targets for
    /// multilabel tasks.
    pub fn new(features: Array2<f64>, targets: Array2<f64>, task: TaskKind) -> Result<Self> {
        if features.nrows() == 0 || features.ncols() == 0 || targets.ncols() == 0 {
            return Err(Error::Validation(
                "dataset requires n >= 1, p >= 1, d >= 1".into(),
            ));
        }
        Self::from_parts(features, targets, task, None, None)
    }

    /// As [`Dataset::new`] but allows `n = 0`, used for empty partitions of a
    /// split. Other invariants still hold.
    pub(crate) fn from_parts(
        features: Array2<f64>,
        targets: Array2<f64>,
        task: TaskKind,
        feature_names: Option<Vec<String>>,
        target_names: Option<Vec<String>>,
    ) -> Result<Self> {
        if features.nrows() != targets.nrows() {
            return Err(Error::Shape(format!(
                "features have {} rows but targets have {}",
                features.nrows(),
                targets.nrows()
            )));
        }
        if features.iter().any(|v| !v.is_finite()) || targets.iter().any(|v| !v.is_finite()) {
            return Err(Error::Validation("non-finite entry in dataset".into()));
        }
        if task == TaskKind::Multilabel && targets.iter().any(|&v| v != -1.0 && v != 1.0) {
            return Err(Error::Validation(
                "multilabel targets must be -1 or +1 internally".into(),
            ));
        }
        if let Some(names) = &feature_names {
            if names.len() != features.ncols() {
                return Err(Error::Shape("feature name count mismatch".into()));
            }
        }
        if let Some(names) = &target_names {
            if names.len() != targets.ncols() {
                return Err(Error::Shape("target name count mismatch".into()));
            }
        }
        Ok(Dataset {
            features,
            targets,
            task,
            feature_names,
            target_names,
        })
    }

    pub fn n_samples(&self) -> usize {
        self.features.nrows()
    }

    pub fn n_features(&self) -> usize {
        self.features.ncols()
    }

    pub fn n_outputs(&self) -> usize {
        self.targets.ncols()
    }

    pub fn task(&self) -> TaskKind {
        self.task
    }

    pub fn features(&self) -> ArrayView2<'_, f64> {
        self.features.view()
    }

    pub fn targets(&self) -> ArrayView2<'_, f64> {
        self.targets.view()
    }

    pub fn feature_names(&self) -> Option<&[String]> {
        self.feature_names.as_deref()
    }

    pub fn target_names(&self) -> Option<&[String]> {
        self.target_names.as_deref()
    }

    pub fn with_names(
        mut self,
        feature_names: Option<Vec<String>>,
        target_names: Option<Vec<String>>,
    ) -> Result<Self> {
        if let Some(names) = &feature_names {
            if names.len() != self.n_features() {
                return Err(Error::Shape("feature name count mismatch".into()));
            }
        }
        if let Some(names) = &target_names {
            if names.len() != self.n_outputs() {
                return Err(Error::Shape("target name count mismatch".into()));
            }
        }
        self.feature_names = feature_names;
        self.target_names = target_names;
        Ok(self)
    }

    /// Loads a comma-separated file. The last `n_outputs` columns become
    /// targets, the rest features. A header row is detected as any
    /// non-numeric cell in the first row. For multilabel tasks, `{0,1}`
    /// target cells are mapped to `{-1,+1}`.
    pub fn load_csv<P: AsRef<Path>>(path: P, n_outputs: usize, task: TaskKind) -> Result<Self> {
        if n_outputs == 0 {
            return Err(Error::Parameter("n_outputs must be >= 1".into()));
        }
        let file = File::open(path.as_ref())?;
        let reader = BufReader::new(file);

        let mut header: Option<Vec<String>> = None;
        let mut rows: Vec<Vec<f64>> = Vec::new();
        let mut n_cols: Option<usize> = None;

        for (line_no, line) in reader.lines().enumerate() {
            let line = line?;
            let row_index = line_no + 1;
            if line.trim().is_empty() {
                continue;
            }
            let cells: Vec<&str> = line.split(',').map(str::trim).collect();
            if line_no == 0 && cells.iter().any(|c| c.parse::<f64>().is_err()) {
                header = Some(cells.iter().map(|c| c.to_string()).collect());
                continue;
            }
            match n_cols {
                None => n_cols = Some(cells.len()),
                Some(c) if c != cells.len() => {
                    return Err(Error::Parse {
                        row: row_index,
                        msg: format!("expected {} columns, found {}", c, cells.len()),
                    });
                }
                _ => {}
            }
            let mut parsed = Vec::with_capacity(cells.len());
            for cell in &cells {
                let v: f64 = cell.parse().map_err(|_| Error::Parse {
                    row: row_index,
                    msg: format!("cannot parse '{cell}' as a number"),
                })?;
                parsed.push(v);
            }
            rows.push(parsed);
        }

        let n = rows.len();
        if n == 0 {
            return Err(Error::Validation("file contains no data rows".into()));
        }
        let cols = n_cols.unwrap();
        if cols < n_outputs + 1 {
            return Err(Error::Shape(format!(
                "rows have {cols} columns, need at least {} (n_outputs + 1)",
                n_outputs + 1
            )));
        }
        let p = cols - n_outputs;

        let mut features = Array2::zeros((n, p));
        let mut targets = Array2::zeros((n, n_outputs));
        for (i, row) in rows.iter().enumerate() {
            for j in 0..p {
                features[[i, j]] = row[j];
            }
            for j in 0..n_outputs {
                let v = row[p + j];
                targets[[i, j]] = match task {
                    TaskKind::Regression => v,
                    TaskKind::Multilabel => {
                        if v == 0.0 {
                            -1.0
                        } else if v == 1.0 {
                            1.0
                        } else {
                            return Err(Error::Validation(format!(
                                "multilabel target cell {v} is not 0 or 1 (row {}, output {j})",
                                i + 1
                            )));
                        }
                    }
                };
            }
        }

        let (feature_names, target_names) = match header {
            Some(names) if names.len() == cols => {
                let feats = names[..p].to_vec();
                let targs = names[p..].to_vec();
                (Some(feats), Some(targs))
            }
            _ => (None, None),
        };
        Self::from_parts(features, targets, task, feature_names, target_names)
    }

    /// Writes the dataset back to CSV, targets last. Multilabel targets are
    /// written as `{0,1}`. A header row is written when names are present.
    /// `load_csv(save_csv(ds))` reproduces the dataset exactly: floats are
    /// printed with the shortest round-trip representation.
    pub fn save_csv<P: AsRef<Path>>(&self, path: P) -> Result<()> {
        let file = File::create(path.as_ref())?;
        let mut w = BufWriter::new(file);

        if self.feature_names.is_some() || self.target_names.is_some() {
            let feats: Vec<String> = match &self.feature_names {
                Some(names) => names.clone(),
                None => (1..=self.n_features()).map(|j| format!("x{j}")).collect(),
            };
            let targs: Vec<String> = match &self.target_names {
                Some(names) => names.clone(),
                None => (1..=self.n_outputs()).map(|j| format!("y{j}")).collect(),
            };
            let mut all = feats;
            all.extend(targs);
            writeln!(w, "{}", all.join(","))?;
        }

        for i in 0..self.n_samples() {
            let mut cells: Vec<String> = Vec::with_capacity(self.n_features() + self.n_outputs());
            for j in 0..self.n_features() {
                cells.push(format!("{}", self.features[[i, j]]));
            }
            for j in 0..self.n_outputs() {
                let v = self.targets[[i, j]];
                let out = match self.task {
                    TaskKind::Regression => v,
                    TaskKind::Multilabel => {
                        if v > 0.0 {
                            1.0
                        } else {
                            0.0
                        }
                    }
                };
                cells.push(format!("{out}"));
            }
            writeln!(w, "{}", cells.join(","))?;
        }
        w.flush()?;
        Ok(())
    }

    /// Partitions rows into train/validation/test by a uniform random
    /// permutation followed by a contiguous cut. Sizes are floor-rounded
    /// with the remainder assigned to train.
    pub fn split(&self, fractions: (f64, f64, f64), seed: RngSeed) -> Result<Split> {
        let (ft, fv, fs) = fractions;
        if ft < 0.0 || fv < 0.0 || fs < 0.0 {
            return Err(Error::Parameter("fractions must be nonnegative".into()));
        }
        if (ft + fv + fs - 1.0).abs() > 1e-9 {
            return Err(Error::Parameter(format!(
                "fractions must sum to 1, got {}",
                ft + fv + fs
            )));
        }
        let n = self.n_samples();
        let n_val = (n as f64 * fv).floor() as usize;
        let n_test = (n as f64 * fs).floor() as usize;
        let n_train = n - n_val - n_test;

        for (frac, size, name) in [
            (ft, n_train, "train"),
            (fv, n_val, "validation"),
            (fs, n_test, "test"),
        ] {
            if frac > 0.0 && size == 0 {
                return Err(Error::Sizing(format!(
                    "{name} fraction {frac} yields 0 rows out of {n}"
                )));
            }
        }

        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(&mut seed.rng());

        let take = |idx: &[usize]| -> Result<Dataset> {
            let features = self.features.select(Axis(0), idx);
            let targets = self.targets.select(Axis(0), idx);
            Dataset::from_parts(
                features,
                targets,
                self.task,
                self.feature_names.clone(),
                self.target_names.clone(),
            )
        };

        Ok(Split {
            train: take(&order[..n_train])?,
            validation: take(&order[n_train..n_train + n_val])?,
            test: take(&order[n_train + n_val..])?,
        })
    }

    /// Rescales every regression output column to mean 0 and unit population
    /// variance, returning the standardized dataset and the transform.
    pub fn standardize_targets(&self) -> Result<(Dataset, TargetScaler)> {
        if self.task != TaskKind::Regression {
            return Err(Error::Validation(
                "target standardization applies to regression tasks only".into(),
            ));
        }
        let n = self.n_samples();
        let d = self.n_outputs();
        let mut mean = Array1::zeros(d);
        let mut std = Array1::zeros(d);
        let mut targets = self.targets.clone();
        for j in 0..d {
            let col = self.targets.column(j);
            let m = col.sum() / n as f64;
            let var = col.iter().map(|&v| (v - m) * (v - m)).sum::<f64>() / n as f64;
            let s = var.sqrt();
            if s == 0.0 {
                return Err(Error::DegenerateOutput {
                    output: j,
                    msg: "constant output column cannot be standardized".into(),
                });
            }
            mean[j] = m;
            std[j] = s;
            targets
                .column_mut(j)
                .mapv_inplace(|v| (v - m) / s);
        }
        let ds = Dataset::from_parts(
            self.features.clone(),
            targets,
            self.task,
            self.feature_names.clone(),
            self.target_names.clone(),
        )?;
        Ok((ds, TargetScaler { mean, std }))
    }
}
