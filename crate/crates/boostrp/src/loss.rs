//! Multi-output losses and per-output step-length optimization.
//!
//! Three losses are implemented, all decomposable as sums over outputs:
//!
//! * `l2`:       `1/2 * ||y - y'||^2`
//! * `l1`:       `||y - y'||_1`
//! * `logistic`: `sum_j log(1 + exp(-2 y_j y'_j))` with labels in `{-1,+1}`
//!
//! Besides values and negative gradients, each loss knows its constant
//! minimizer (the intercept of a boosted ensemble) and how to fit the
//! per-output step weights `rho` for a fixed weak-model direction: a closed
//! form for `l2`, Brent scalar minimization for `l1` and `logistic`.

use std::fmt;
use std::str::FromStr;

use ndarray::{Array1, Array2, ArrayView1, ArrayView2};

use crate::error::{Error, Result};

/// Bracket half-width and clamp for numeric line searches. Bounded steps keep
/// logit predictions finite on separable problems.
pub const RHO_MAX: f64 = 1e3;
/// Default tolerance for Brent minimization.
pub const BRENT_TOL: f64 = 1e-8;
/// Default iteration cap for Brent minimization.
pub const BRENT_MAX_ITER: usize = 100;

/// Per-output multiplicative weights fitted after each boosting stage.
pub type StepWeights = Array1<f64>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LossKind {
    L2,
    L1,
    Logistic,
}

impl LossKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            LossKind::L2 => "l2",
            LossKind::L1 => "l1",
            LossKind::Logistic => "logistic",
        }
    }
}

impl fmt::Display for LossKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for LossKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "l2" => Ok(LossKind::L2),
            "l1" => Ok(LossKind::L1),
            "logistic" => Ok(LossKind::Logistic),
            other => Err(Error::Parameter(format!("unknown loss '{other}'"))),
        }
    }
}

// log(1 + exp(z)) without overflow.
fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

/// A multi-output loss over `d` outputs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Loss {
    kind: LossKind,
    n_outputs: usize,
}

impl Loss {
    pub fn new(kind: LossKind, n_outputs: usize) -> Self {
        Loss { kind, n_outputs }
    }

    pub fn kind(&self) -> LossKind {
        self.kind
    }

    pub fn n_outputs(&self) -> usize {
        self.n_outputs
    }

    fn check_dim(&self, len: usize) -> Result<()> {
        if len != self.n_outputs {
            return Err(Error::Shape(format!(
                "loss over {} outputs applied to vector of length {len}",
                self.n_outputs
            )));
        }
        Ok(())
    }

    // Single-output loss term; every implemented loss is a sum of these.
    fn term(&self, y: f64, y_pred: f64) -> f64 {
        match self.kind {
            LossKind::L2 => 0.5 * (y - y_pred) * (y - y_pred),
            LossKind::L1 => (y - y_pred).abs(),
            LossKind::Logistic => softplus(-2.0 * y * y_pred),
        }
    }

    // Single-output negative gradient with respect to the prediction.
    fn term_negative_gradient(&self, y: f64, y_pred: f64) -> f64 {
        match self.kind {
            LossKind::L2 => y - y_pred,
            LossKind::L1 => {
                let r = y - y_pred;
                if r > 0.0 {
                    1.0
                } else if r < 0.0 {
                    -1.0
                } else {
                    0.0
                }
            }
            LossKind::Logistic => 2.0 * y / (1.0 + (2.0 * y * y_pred).exp()),
        }
    }

    /// Loss of one prediction against one ground-truth vector.
    pub fn value(&self, y: ArrayView1<'_, f64>, y_pred: ArrayView1<'_, f64>) -> Result<f64> {
        self.check_dim(y.len())?;
        self.check_dim(y_pred.len())?;
        Ok(y
            .iter()
            .zip(y_pred.iter())
            .map(|(&a, &b)| self.term(a, b))
            .sum())
    }

    /// Total training loss `sum_i loss(y^i, f(x^i))`.
    pub fn total_value(&self, y: ArrayView2<'_, f64>, pred: ArrayView2<'_, f64>) -> Result<f64> {
        if y.dim() != pred.dim() {
            return Err(Error::Shape(format!(
                "targets {:?} vs predictions {:?}",
                y.dim(),
                pred.dim()
            )));
        }
        self.check_dim(y.ncols())?;
        Ok(y
            .iter()
            .zip(pred.iter())
            .map(|(&a, &b)| self.term(a, b))
            .sum())
    }

    /// Negative gradient of the loss at one prediction.
    pub fn negative_gradient(
        &self,
        y: ArrayView1<'_, f64>,
        y_pred: ArrayView1<'_, f64>,
    ) -> Result<Array1<f64>> {
        self.check_dim(y.len())?;
        self.check_dim(y_pred.len())?;
        Ok(Array1::from_iter(
            y.iter()
                .zip(y_pred.iter())
                .map(|(&a, &b)| self.term_negative_gradient(a, b)),
        ))
    }

    /// Row-wise negative gradients for a whole training set.
    pub fn negative_gradient_matrix(
        &self,
        y: ArrayView2<'_, f64>,
        pred: ArrayView2<'_, f64>,
    ) -> Result<Array2<f64>> {
        if y.dim() != pred.dim() {
            return Err(Error::Shape(format!(
                "targets {:?} vs predictions {:?}",
                y.dim(),
                pred.dim()
            )));
        }
        self.check_dim(y.ncols())?;
        let mut out = Array2::zeros(y.raw_dim());
        for ((idx, &a), &b) in y.indexed_iter().zip(pred.iter()) {
            out[idx] = self.term_negative_gradient(a, b);
        }
        Ok(out)
    }

    /// The constant vector minimizing the total loss: per-output mean for
    /// `l2`, lower median for `l1`, and `log(n+ / n-)` for `logistic`.
    pub fn constant_minimizer(&self, targets: ArrayView2<'_, f64>) -> Result<Array1<f64>> {
        self.check_dim(targets.ncols())?;
        let n = targets.nrows();
        if n == 0 {
            return Err(Error::Validation("constant minimizer needs n >= 1".into()));
        }
        let d = targets.ncols();
        let mut rho0 = Array1::zeros(d);
        for j in 0..d {
            let col = targets.column(j);
            rho0[j] = match self.kind {
                LossKind::L2 => col.sum() / n as f64,
                LossKind::L1 => {
                    let mut v: Vec<f64> = col.to_vec();
                    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
                    v[(n - 1) / 2]
                }
                LossKind::Logistic => {
                    let mut pos = 0usize;
                    let mut neg = 0usize;
                    for &y in col.iter() {
                        if y == 1.0 {
                            pos += 1;
                        } else if y == -1.0 {
                            neg += 1;
                        } else {
                            return Err(Error::Validation(format!(
                                "logistic loss target {y} is not -1 or +1 (output {j})"
                            )));
                        }
                    }
                    if pos == 0 || neg == 0 {
                        return Err(Error::DegenerateOutput {
                            output: j,
                            msg: "logistic intercept needs both classes present".into(),
                        });
                    }
                    (pos as f64 / neg as f64).ln()
                }
            };
        }
        Ok(rho0)
    }

    /// Step weight for a single output given the weak model direction `h`.
    /// `y` and `pred` are that output's target and current prediction
    /// columns; `output` only labels errors.
    pub fn fit_rho_for_output(
        &self,
        output: usize,
        y: ArrayView1<'_, f64>,
        pred: ArrayView1<'_, f64>,
        h: ArrayView1<'_, f64>,
    ) -> Result<f64> {
        if y.len() != pred.len() || y.len() != h.len() {
            return Err(Error::Shape(
                "target, prediction and direction columns must agree on rows".into(),
            ));
        }
        self.fit_rho_one(output, y, pred, h)
    }

    // Step weight for one output given the weak model direction `h`.
    // `y` and `pred` are that output's target and current prediction columns.
    fn fit_rho_one(
        &self,
        output: usize,
        y: ArrayView1<'_, f64>,
        pred: ArrayView1<'_, f64>,
        h: ArrayView1<'_, f64>,
    ) -> Result<f64> {
        if h.iter().all(|&v| v == 0.0) {
            return Ok(0.0); // no-op stage
        }
        match self.kind {
            LossKind::L2 => {
                // Least-squares coefficient of the residual on h.
                let num: f64 = y
                    .iter()
                    .zip(pred.iter())
                    .zip(h.iter())
                    .map(|((&yi, &fi), &hi)| (yi - fi) * hi)
                    .sum();
                let den: f64 = h.iter().map(|&hi| hi * hi).sum();
                Ok(num / den)
            }
            LossKind::L1 | LossKind::Logistic => {
                let objective = |rho: f64| -> f64 {
                    y.iter()
                        .zip(pred.iter())
                        .zip(h.iter())
                        .map(|((&yi, &fi), &hi)| self.term(yi, fi + rho * hi))
                        .sum()
                };
                let rho = brent_minimize(objective, -RHO_MAX, RHO_MAX, BRENT_TOL, BRENT_MAX_ITER)
                    .map_err(|e| Error::LineSearch {
                        output,
                        msg: e.to_string(),
                    })?;
                // The minimizer is only approximate; never accept a step that
                // increases this output's loss over rho = 0.
                if objective(rho) > objective(0.0) {
                    Ok(0.0)
                } else {
                    Ok(rho)
                }
            }
        }
    }

    /// Step weights when the weak model has a single output shared by all
    /// target outputs (`f_j <- f_j + rho_j * h`).
    pub fn fit_rho_scalar_tree(
        &self,
        targets: ArrayView2<'_, f64>,
        current_pred: ArrayView2<'_, f64>,
        tree_out: ArrayView1<'_, f64>,
    ) -> Result<StepWeights> {
        self.check_dim(targets.ncols())?;
        if targets.dim() != current_pred.dim() || targets.nrows() != tree_out.len() {
            return Err(Error::Shape(
                "targets, predictions and tree output must agree on rows".into(),
            ));
        }
        let d = targets.ncols();
        let mut rho = Array1::zeros(d);
        for j in 0..d {
            rho[j] = self.fit_rho_one(j, targets.column(j), current_pred.column(j), tree_out)?;
        }
        Ok(rho)
    }

    /// Step weights when the weak model predicts one value per output
    /// (`f_j <- f_j + rho_j * h_j`).
    pub fn fit_rho_vector_tree(
        &self,
        targets: ArrayView2<'_, f64>,
        current_pred: ArrayView2<'_, f64>,
        tree_out: ArrayView2<'_, f64>,
    ) -> Result<StepWeights> {
        self.check_dim(targets.ncols())?;
        if targets.dim() != current_pred.dim() || targets.dim() != tree_out.dim() {
            return Err(Error::Shape(
                "targets, predictions and tree output must have equal shape".into(),
            ));
        }
        let d = targets.ncols();
        let mut rho = Array1::zeros(d);
        for j in 0..d {
            rho[j] = self.fit_rho_one(
                j,
                targets.column(j),
                current_pred.column(j),
                tree_out.column(j),
            )?;
        }
        Ok(rho)
    }
}

/// Brent scalar minimization over `[lo, hi]`: golden-section steps with
/// parabolic interpolation where it is safe.
pub fn brent_minimize<F: FnMut(f64) -> f64>(
    mut f: F,
    lo: f64,
    hi: f64,
    tol: f64,
    max_iter: usize,
) -> Result<f64> {
    const GOLDEN: f64 = 0.381_966_011_250_105; // 2 - golden ratio
    const ZEPS: f64 = 1e-12;

    if !(tol > 0.0) {
        return Err(Error::Parameter("brent tolerance must be positive".into()));
    }
    let (mut a, mut b) = if lo < hi { (lo, hi) } else { (hi, lo) };

    let mut x = a + GOLDEN * (b - a);
    let mut w = x;
    let mut v = x;
    let mut fx = f(x);
    let mut fw = fx;
    let mut fv = fx;

    let mut d = 0.0_f64;
    let mut e = 0.0_f64;

    for _ in 0..max_iter {
        let m = 0.5 * (a + b);
        let tol1 = tol * x.abs() + ZEPS;
        let tol2 = 2.0 * tol1;

        if (x - m).abs() <= tol2 - 0.5 * (b - a) {
            return Ok(x);
        }

        let mut use_golden = true;
        if e.abs() > tol1 {
            // Trial parabolic fit through (v, w, x).
            let r = (x - w) * (fx - fv);
            let mut q = (x - v) * (fx - fw);
            let mut p = (x - v) * q - (x - w) * r;
            q = 2.0 * (q - r);
            if q > 0.0 {
                p = -p;
            }
            q = q.abs();
            let e_prev = e;
            e = d;
            if p.abs() < (0.5 * q * e_prev).abs() && p > q * (a - x) && p < q * (b - x) {
                d = p / q;
                let u = x + d;
                if u - a < tol2 || b - u < tol2 {
                    d = if x < m { tol1 } else { -tol1 };
                }
                use_golden = false;
            }
        }
        if use_golden {
            e = if x < m { b - x } else { a - x };
            d = GOLDEN * e;
        }

        let u = if d.abs() >= tol1 {
            x + d
        } else if d > 0.0 {
            x + tol1
        } else {
            x - tol1
        };
        let fu = f(u);

        if fu <= fx {
            if u < x {
                b = x;
            } else {
                a = x;
            }
            v = w;
            fv = fw;
            w = x;
            fw = fx;
            x = u;
            fx = fu;
        } else {
            if u < x {
                a = u;
            } else {
                b = u;
            }
            if fu <= fw || w == x {
                v = w;
                fv = fw;
                w = u;
                fw = fu;
            } else if fu <= fv || v == x || v == w {
                v = u;
                fv = fu;
            }
        }
    }
    Err(Error::Convergence(format!(
        "brent did not converge within {max_iter} iterations"
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use rand::Rng;

    use crate::rng::RngSeed;

    #[test]
    fn l2_value_identity_case() {
        let loss = Loss::new(LossKind::L2, 2);
        let v = loss
            .value(array![1.0, 2.0].view(), array![1.0, 2.0].view())
            .unwrap();
        assert_eq!(v, 0.0);
    }

    #[test]
    fn logistic_value_at_zero_prediction() {
        let loss = Loss::new(LossKind::Logistic, 1);
        let v = loss.value(array![1.0].view(), array![0.0].view()).unwrap();
        assert!((v - std::f64::consts::LN_2).abs() < 1e-12);
    }

    #[test]
    fn l1_value_direct() {
        let loss = Loss::new(LossKind::L1, 2);
        let v = loss
            .value(array![3.0, -1.0].view(), array![1.0, 1.0].view())
            .unwrap();
        assert_eq!(v, 4.0);
    }

    #[test]
    fn value_dimension_mismatch_is_shape_error() {
        let loss = Loss::new(LossKind::L2, 2);
        let err = loss
            .value(array![1.0].view(), array![1.0, 2.0].view())
            .unwrap_err();
        assert!(matches!(err, Error::Shape(_)));
    }

    #[test]
    fn negative_gradients_match_table_rows() {
        let l2 = Loss::new(LossKind::L2, 1);
        assert_eq!(
            l2.negative_gradient(array![3.0].view(), array![1.0].view())
                .unwrap()[0],
            2.0
        );
        let logistic = Loss::new(LossKind::Logistic, 1);
        assert_eq!(
            logistic
                .negative_gradient(array![1.0].view(), array![0.0].view())
                .unwrap()[0],
            1.0
        );
        let l1 = Loss::new(LossKind::L1, 2);
        let g = l1
            .negative_gradient(array![2.0, 2.0].view(), array![2.0, 5.0].view())
            .unwrap();
        assert_eq!(g, array![0.0, -1.0]);
    }

    #[test]
    fn constant_minimizers() {
        let l2 = Loss::new(LossKind::L2, 1);
        assert_eq!(
            l2.constant_minimizer(array![[1.0], [2.0], [3.0]].view())
                .unwrap()[0],
            2.0
        );
        let logistic = Loss::new(LossKind::Logistic, 1);
        let f0 = logistic
            .constant_minimizer(array![[1.0], [1.0], [1.0], [-1.0]].view())
            .unwrap()[0];
        assert!((f0 - 3.0_f64.ln()).abs() < 1e-12);
        let l1 = Loss::new(LossKind::L1, 1);
        assert_eq!(
            l1.constant_minimizer(array![[1.0], [2.0], [100.0]].view())
                .unwrap()[0],
            2.0
        );
        // Lower median on even n.
        assert_eq!(
            l1.constant_minimizer(array![[4.0], [1.0], [3.0], [2.0]].view())
                .unwrap()[0],
            2.0
        );
    }

    #[test]
    fn logistic_single_class_output_is_degenerate() {
        let logistic = Loss::new(LossKind::Logistic, 2);
        let err = logistic
            .constant_minimizer(array![[1.0, 1.0], [-1.0, 1.0]].view())
            .unwrap_err();
        match err {
            Error::DegenerateOutput { output, .. } => assert_eq!(output, 1),
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn brent_on_quadratic() {
        let x = brent_minimize(|x| (x - 2.0) * (x - 2.0), -10.0, 10.0, 1e-8, 100).unwrap();
        assert!((x - 2.0).abs() < 1e-8);
    }

    #[test]
    fn brent_on_absolute_value() {
        let x = brent_minimize(|x| (x - 1.0).abs(), 0.0, 3.0, 1e-8, 100).unwrap();
        assert!((x - 1.0).abs() < 1e-6);
    }

    #[test]
    fn brent_monotone_objective_hits_boundary() {
        let x = brent_minimize(|x| softplus(-2.0 * x), -50.0, 50.0, 1e-8, 100).unwrap();
        assert!(x > 49.99, "expected boundary minimizer, got {x}");
    }

    #[test]
    fn fit_rho_l2_closed_form() {
        // Residuals r = (2,4) on direction h = (1,2): rho = 10/5 = 2.
        let loss = Loss::new(LossKind::L2, 1);
        let y = array![[2.0], [4.0]];
        let pred = array![[0.0], [0.0]];
        let h = array![1.0, 2.0];
        let rho = loss
            .fit_rho_scalar_tree(y.view(), pred.view(), h.view())
            .unwrap();
        assert!((rho[0] - 2.0).abs() < 1e-12);

        // Numeric 1-D minimization oracle over the same objective.
        let oracle = brent_minimize(
            |r| 0.5 * ((2.0 - r).powi(2) + (4.0 - 2.0 * r).powi(2)),
            -RHO_MAX,
            RHO_MAX,
            1e-10,
            200,
        )
        .unwrap();
        assert!((rho[0] - oracle).abs() < 1e-7);
    }

    #[test]
    fn fit_rho_zero_direction_is_noop() {
        for kind in [LossKind::L2, LossKind::L1, LossKind::Logistic] {
            let loss = Loss::new(kind, 1);
            let y = array![[1.0], [1.0]];
            let pred = array![[0.0], [0.0]];
            let h = array![0.0, 0.0];
            let rho = loss
                .fit_rho_scalar_tree(y.view(), pred.view(), h.view())
                .unwrap();
            assert_eq!(rho[0], 0.0);
        }
    }

    #[test]
    fn fit_rho_logistic_separable_clamps() {
        // One all-positive sample: the objective decreases toward infinity,
        // so the step is bounded by the bracket. Past rho ~ 372 the loss
        // underflows to exactly 0, so any point in that saturated region is
        // a numerically-global minimizer within the clamp.
        let loss = Loss::new(LossKind::Logistic, 1);
        let y = array![[1.0]];
        let pred = array![[0.0]];
        let h = array![1.0];
        let rho = loss
            .fit_rho_scalar_tree(y.view(), pred.view(), h.view())
            .unwrap();
        assert!(rho[0] > 300.0, "rho = {}", rho[0]);
        assert!(rho[0] <= RHO_MAX);
        assert_eq!(softplus(-2.0 * rho[0]), 0.0);
    }

    #[test]
    fn fit_rho_vector_tree_cases() {
        let loss = Loss::new(LossKind::L2, 2);
        // Column 0: r = (1,1), h = (2,2) -> 0.5; column 1: zeros -> 0.
        let y = array![[1.0, 0.0], [1.0, 0.0]];
        let pred = array![[0.0, 0.0], [0.0, 0.0]];
        let h = array![[2.0, 0.0], [2.0, 0.0]];
        let rho = loss
            .fit_rho_vector_tree(y.view(), pred.view(), h.view())
            .unwrap();
        assert!((rho[0] - 0.5).abs() < 1e-12);
        assert_eq!(rho[1], 0.0);
    }

    #[test]
    fn fit_rho_relabelled_tree_gives_all_ones() {
        // When leaves already hold the per-leaf mean residuals, the l2 step
        // weights degenerate to an all-ones vector.
        let loss = Loss::new(LossKind::L2, 2);
        let y = array![[1.0, 5.0], [3.0, 7.0], [3.0, 9.0]];
        let pred = Array2::zeros((3, 2));
        // Leaf partition {0} | {1,2}; leaf means per output.
        let h = array![[1.0, 5.0], [3.0, 8.0], [3.0, 8.0]];
        let rho = loss
            .fit_rho_vector_tree(y.view(), pred.view(), h.view())
            .unwrap();
        assert!((rho[0] - 1.0).abs() < 1e-12);
        assert!((rho[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn negative_gradient_matches_finite_differences() {
        // Central differences of the value at 100 random points, l2 and
        // logistic (l1 is non-differentiable at 0 by design).
        let mut rng = RngSeed(99).rng();
        for kind in [LossKind::L2, LossKind::Logistic] {
            let loss = Loss::new(kind, 3);
            for _ in 0..100 {
                let y: Array1<f64> = match kind {
                    LossKind::Logistic => Array1::from_iter(
                        (0..3).map(|_| if rng.random::<f64>() < 0.5 { -1.0 } else { 1.0 }),
                    ),
                    _ => Array1::from_iter((0..3).map(|_| rng.random::<f64>() * 4.0 - 2.0)),
                };
                let pred =
                    Array1::from_iter((0..3).map(|_| rng.random::<f64>() * 4.0 - 2.0));
                let grad = loss.negative_gradient(y.view(), pred.view()).unwrap();
                let h = 1e-6;
                for j in 0..3 {
                    let mut plus = pred.clone();
                    plus[j] += h;
                    let mut minus = pred.clone();
                    minus[j] -= h;
                    let fd = -(loss.value(y.view(), plus.view()).unwrap()
                        - loss.value(y.view(), minus.view()).unwrap())
                        / (2.0 * h);
                    let denom = grad[j].abs().max(1.0);
                    assert!(
                        (grad[j] - fd).abs() / denom < 1e-6,
                        "{kind:?} output {j}: analytic {} vs fd {fd}",
                        grad[j]
                    );
                }
            }
        }
    }

    #[test]
    fn l1_minimizer_beats_probe_constants() {
        let mut rng = RngSeed(5).rng();
        let loss = Loss::new(LossKind::L1, 1);
        for _ in 0..20 {
            let n = 1 + (rng.random::<u64>() % 15) as usize;
            let col: Vec<f64> = (0..n).map(|_| rng.random::<f64>() * 10.0 - 5.0).collect();
            let targets = Array2::from_shape_vec((n, 1), col.clone()).unwrap();
            let med = loss.constant_minimizer(targets.view()).unwrap()[0];
            let cost = |c: f64| col.iter().map(|v| (v - c).abs()).sum::<f64>();
            let mean = col.iter().sum::<f64>() / n as f64;
            for probe in col.iter().copied().chain([mean]) {
                assert!(cost(med) <= cost(probe) + 1e-12);
            }
        }
    }

    #[test]
    fn fit_rho_never_increases_loss() {
        let mut rng = RngSeed(17).rng();
        for kind in [LossKind::L2, LossKind::L1, LossKind::Logistic] {
            for trial in 0..20 {
                let n = 2 + (trial % 5) as usize;
                let d = 3;
                let loss = Loss::new(kind, d);
                let y = Array2::from_shape_fn((n, d), |_| match kind {
                    LossKind::Logistic => {
                        if rng.random::<f64>() < 0.5 {
                            -1.0
                        } else {
                            1.0
                        }
                    }
                    _ => rng.random::<f64>() * 6.0 - 3.0,
                });
                let pred = Array2::from_shape_fn((n, d), |_| rng.random::<f64>() * 2.0 - 1.0);
                let h = Array1::from_shape_fn(n, |_| rng.random::<f64>() * 2.0 - 1.0);
                let rho = loss
                    .fit_rho_scalar_tree(y.view(), pred.view(), h.view())
                    .unwrap();
                let mut stepped = pred.clone();
                for i in 0..n {
                    for j in 0..d {
                        stepped[[i, j]] += rho[j] * h[i];
                    }
                }
                let before = loss.total_value(y.view(), pred.view()).unwrap();
                let after = loss.total_value(y.view(), stepped.view()).unwrap();
                assert!(
                    after <= before + 1e-9,
                    "{kind:?}: loss rose from {before} to {after}"
                );
            }
        }
    }

    #[test]
    fn l2_closed_form_matches_brent_on_random_instances() {
        let mut rng = RngSeed(23).rng();
        let loss = Loss::new(LossKind::L2, 1);
        for _ in 0..30 {
            let n = 2 + (rng.random::<u64>() % 49) as usize;
            let y = Array2::from_shape_fn((n, 1), |_| rng.random::<f64>() * 8.0 - 4.0);
            let pred = Array2::from_shape_fn((n, 1), |_| rng.random::<f64>() * 2.0 - 1.0);
            let h = Array1::from_shape_fn(n, |_| rng.random::<f64>() * 2.0 - 1.0);
            let closed = loss
                .fit_rho_scalar_tree(y.view(), pred.view(), h.view())
                .unwrap()[0];
            let objective = |r: f64| {
                (0..n)
                    .map(|i| 0.5 * (y[[i, 0]] - pred[[i, 0]] - r * h[i]).powi(2))
                    .sum::<f64>()
            };
            let numeric = brent_minimize(objective, -RHO_MAX, RHO_MAX, 1e-10, 200).unwrap();
            assert!(
                (closed - numeric).abs() < 1e-7,
                "closed {closed} vs brent {numeric}"
            );
        }
    }
}
