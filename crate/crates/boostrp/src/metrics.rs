//! Evaluation metrics: Label Ranking Average Precision for multilabel tasks
//! and macro-r2 for multi-output regression.

use std::fmt;
use std::str::FromStr;

use ndarray::{Array1, ArrayView2};

use crate::error::{Error, Result};

/// LRAP value plus the number of rows excluded for lacking positive labels
/// (the per-row average is undefined there).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LrapScore {
    pub value: f64,
    pub rows_skipped: usize,
}

/// Macro-r2 value plus its per-output components.
#[derive(Debug, Clone, PartialEq)]
pub struct MacroR2Score {
    pub value: f64,
    pub per_output: Array1<f64>,
}

/// A metric choice, e.g. for staged evaluation or the CLI.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    MacroR2,
    Lrap,
}

impl Metric {
    pub fn as_str(&self) -> &'static str {
        match self {
            Metric::MacroR2 => "macro-r2",
            Metric::Lrap => "lrap",
        }
    }

    pub fn eval(&self, y_true: ArrayView2<'_, f64>, pred: ArrayView2<'_, f64>) -> Result<f64> {
        match self {
            Metric::MacroR2 => Ok(macro_r2(y_true, pred)?.value),
            Metric::Lrap => Ok(lrap(y_true, pred)?.value),
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Metric {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "macro-r2" => Ok(Metric::MacroR2),
            "lrap" => Ok(Metric::Lrap),
            other => Err(Error::Parameter(format!("unknown metric '{other}'"))),
        }
    }
}

/// A metric outcome as reported by the CLI.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricReport {
    pub name: String,
    pub value: f64,
    pub per_output: Option<Vec<f64>>,
}

/// Label Ranking Average Precision.
///
/// For each sample and each true label `j`, the ratio of true labels scored
/// at least as high as `j` to all labels scored at least as high as `j`
/// (ties count in both sets), averaged over true labels and then over
/// samples. Positive labels are entries `> 0`, so both `{0,1}` and `{-1,+1}`
/// encodings work. Rows without any positive label are skipped and counted.
pub fn lrap(y_true: ArrayView2<'_, f64>, scores: ArrayView2<'_, f64>) -> Result<LrapScore> {
    if y_true.dim() != scores.dim() {
        return Err(Error::Shape(format!(
            "labels {:?} vs scores {:?}",
            y_true.dim(),
            scores.dim()
        )));
    }
    let (n, d) = y_true.dim();
    let mut total = 0.0;
    let mut counted = 0usize;
    let mut order: Vec<usize> = Vec::with_capacity(d);
    for i in 0..n {
        let labels = y_true.row(i);
        let row_scores = scores.row(i);
        let n_pos = labels.iter().filter(|&&v| v > 0.0).count();
        if n_pos == 0 {
            continue;
        }
        counted += 1;

        // Walk labels by descending score in groups of equal score; within a
        // group every member shares the same ">= s_j" sets.
        order.clear();
        order.extend(0..d);
        order.sort_unstable_by(|&a, &b| row_scores[b].partial_cmp(&row_scores[a]).unwrap());

        let mut row_sum = 0.0;
        let mut seen = 0usize;
        let mut seen_pos = 0usize;
        let mut g = 0usize;
        while g < d {
            let mut end = g;
            while end < d && row_scores[order[end]] == row_scores[order[g]] {
                end += 1;
            }
            let group_pos = order[g..end]
                .iter()
                .filter(|&&k| labels[k] > 0.0)
                .count();
            let den = (end) as f64; // all labels with score >= this group's
            let num = (seen_pos + group_pos) as f64;
            row_sum += group_pos as f64 * (num / den);
            seen += end - g;
            seen_pos += group_pos;
            g = end;
        }
        debug_assert_eq!(seen, d);
        total += row_sum / n_pos as f64;
    }
    if counted == 0 {
        return Err(Error::UndefinedMetric(
            "no row has a positive label; LRAP is undefined".into(),
        ));
    }
    Ok(LrapScore {
        value: total / counted as f64,
        rows_skipped: n - counted,
    })
}

/// Macro-r2: `1 - (1/d) * sum_j [ SS_res_j / SS_tot_j ]`, where the total sum
/// of squares uses the evaluation-sample mean of each output. At most 1; a
/// value at or below 0 means the model is worse than a constant.
pub fn macro_r2(y_true: ArrayView2<'_, f64>, y_pred: ArrayView2<'_, f64>) -> Result<MacroR2Score> {
    if y_true.dim() != y_pred.dim() {
        return Err(Error::Shape(format!(
            "targets {:?} vs predictions {:?}",
            y_true.dim(),
            y_pred.dim()
        )));
    }
    let (n, d) = y_true.dim();
    if n < 2 {
        return Err(Error::Validation("macro-r2 needs n >= 2".into()));
    }
    let mut per_output = Array1::zeros(d);
    for j in 0..d {
        let col = y_true.column(j);
        let mean = col.sum() / n as f64;
        let ss_tot: f64 = col.iter().map(|&v| (v - mean) * (v - mean)).sum();
        if ss_tot == 0.0 {
            return Err(Error::DegenerateOutput {
                output: j,
                msg: "constant true column makes r2 undefined".into(),
            });
        }
        let ss_res: f64 = col
            .iter()
            .zip(y_pred.column(j).iter())
            .map(|(&t, &p)| (t - p) * (t - p))
            .sum();
        per_output[j] = 1.0 - ss_res / ss_tot;
    }
    Ok(MacroR2Score {
        value: per_output.sum() / d as f64,
        per_output,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::{array, Array2};
    use rand::Rng;

    use crate::rng::RngSeed;

    // Naive direct-from-definition LRAP used as an oracle: O(d^2) per row.
    pub(crate) fn lrap_oracle(y: &Array2<f64>, s: &Array2<f64>) -> (f64, usize) {
        let (n, d) = y.dim();
        let mut total = 0.0;
        let mut counted = 0;
        for i in 0..n {
            let positives: Vec<usize> = (0..d).filter(|&j| y[[i, j]] > 0.0).collect();
            if positives.is_empty() {
                continue;
            }
            counted += 1;
            let mut row = 0.0;
            for &j in &positives {
                let num = positives
                    .iter()
                    .filter(|&&k| s[[i, k]] >= s[[i, j]])
                    .count() as f64;
                let den = (0..d).filter(|&k| s[[i, k]] >= s[[i, j]]).count() as f64;
                row += num / den;
            }
            total += row / positives.len() as f64;
        }
        (total / counted as f64, n - counted)
    }

    #[test]
    fn lrap_perfect_ranking() {
        let y = array![[1.0, 0.0, 1.0]];
        let s = array![[0.9, 0.2, 0.5]];
        let score = lrap(y.view(), s.view()).unwrap();
        assert_eq!(score.value, 1.0);
    }

    #[test]
    fn lrap_reversed_pair() {
        let y = array![[1.0, 0.0]];
        let s = array![[0.2, 0.9]];
        let score = lrap(y.view(), s.view()).unwrap();
        assert_eq!(score.value, 0.5);
    }

    #[test]
    fn lrap_equal_scores_gives_fraction_of_positives() {
        let y = array![[1.0, 0.0, 1.0, 0.0, 0.0]];
        let s = array![[0.3, 0.3, 0.3, 0.3, 0.3]];
        let score = lrap(y.view(), s.view()).unwrap();
        assert!((score.value - 0.4).abs() < 1e-15);
    }

    #[test]
    fn lrap_accepts_pm1_labels() {
        let y = array![[1.0, -1.0, 1.0]];
        let s = array![[0.9, 0.2, 0.5]];
        assert_eq!(lrap(y.view(), s.view()).unwrap().value, 1.0);
    }

    #[test]
    fn lrap_skips_rows_without_positives() {
        let y = array![[0.0, 0.0], [1.0, 0.0]];
        let s = array![[0.1, 0.9], [0.9, 0.1]];
        let score = lrap(y.view(), s.view()).unwrap();
        assert_eq!(score.rows_skipped, 1);
        assert_eq!(score.value, 1.0);
    }

    #[test]
    fn lrap_all_rows_skipped_is_undefined() {
        let y = array![[0.0, 0.0]];
        let s = array![[0.1, 0.9]];
        let err = lrap(y.view(), s.view()).unwrap_err();
        assert!(matches!(err, Error::UndefinedMetric(_)));
    }

    #[test]
    fn lrap_matches_oracle_on_random_instances() {
        let mut rng = RngSeed(8).rng();
        for _ in 0..50 {
            let n = 1 + (rng.random::<u64>() % 6) as usize;
            let d = 2 + (rng.random::<u64>() % 6) as usize;
            let y = Array2::from_shape_fn((n, d), |_| {
                if rng.random::<f64>() < 0.4 {
                    1.0
                } else {
                    0.0
                }
            });
            if !(0..n).any(|i| (0..d).any(|j| y[[i, j]] > 0.0)) {
                continue;
            }
            // Coarse scores force plenty of ties.
            let s = Array2::from_shape_fn((n, d), |_| (rng.random::<u64>() % 4) as f64 / 4.0);
            let fast = lrap(y.view(), s.view()).unwrap();
            let (slow, skipped) = lrap_oracle(&y, &s);
            assert!((fast.value - slow).abs() < 1e-12);
            assert_eq!(fast.rows_skipped, skipped);
        }
    }

    #[test]
    fn lrap_is_invariant_under_monotone_transforms() {
        let mut rng = RngSeed(9).rng();
        for _ in 0..20 {
            let y = Array2::from_shape_fn((4, 5), |_| {
                if rng.random::<f64>() < 0.5 {
                    1.0
                } else {
                    0.0
                }
            });
            if !(0..4).any(|i| (0..5).any(|j| y[[i, j]] > 0.0)) {
                continue;
            }
            let s = Array2::from_shape_fn((4, 5), |_| (rng.random::<u64>() % 5) as f64);
            let transformed = s.mapv(|v| (v * 0.7 + 1.0).exp());
            let a = lrap(y.view(), s.view()).unwrap();
            let b = lrap(y.view(), transformed.view()).unwrap();
            assert!((a.value - b.value).abs() < 1e-12);
        }
    }

    #[test]
    fn macro_r2_perfect_predictions() {
        let y = array![[1.0, 2.0], [3.0, 4.0], [5.0, 0.0]];
        let score = macro_r2(y.view(), y.view()).unwrap();
        assert_eq!(score.value, 1.0);
    }

    #[test]
    fn macro_r2_mean_prediction_scores_zero() {
        let y = array![[0.0], [2.0], [4.0]];
        let pred = array![[2.0], [2.0], [2.0]];
        let score = macro_r2(y.view(), pred.view()).unwrap();
        assert_eq!(score.value, 0.0);
    }

    #[test]
    fn macro_r2_hand_example() {
        let y = array![[0.0], [2.0]];
        let pred = array![[1.0], [1.0]];
        let score = macro_r2(y.view(), pred.view()).unwrap();
        assert_eq!(score.value, 0.0);
    }

    #[test]
    fn macro_r2_constant_column_errors() {
        let y = array![[1.0], [1.0]];
        let pred = array![[1.0], [2.0]];
        let err = macro_r2(y.view(), pred.view()).unwrap_err();
        assert!(matches!(err, Error::DegenerateOutput { .. }));
    }

    #[test]
    fn macro_r2_per_output_is_scale_invariant() {
        let mut rng = RngSeed(10).rng();
        let y = Array2::from_shape_fn((8, 2), |_| rng.random::<f64>() * 4.0);
        let pred = Array2::from_shape_fn((8, 2), |_| rng.random::<f64>() * 4.0);
        let base = macro_r2(y.view(), pred.view()).unwrap();
        let mut ys = y.clone();
        let mut ps = pred.clone();
        ys.column_mut(1).mapv_inplace(|v| v * -3.5);
        ps.column_mut(1).mapv_inplace(|v| v * -3.5);
        let scaled = macro_r2(ys.view(), ps.view()).unwrap();
        assert!((base.per_output[1] - scaled.per_output[1]).abs() < 1e-12);
        assert!((base.per_output[0] - scaled.per_output[0]).abs() < 1e-12);
    }

    // Direct-from-definition macro-r2 oracle.
    pub(crate) fn macro_r2_oracle(y: &Array2<f64>, p: &Array2<f64>) -> f64 {
        let (n, d) = y.dim();
        let mut acc = 0.0;
        for j in 0..d {
            let mean = (0..n).map(|i| y[[i, j]]).sum::<f64>() / n as f64;
            let num: f64 = (0..n).map(|i| (y[[i, j]] - p[[i, j]]).powi(2)).sum();
            let den: f64 = (0..n).map(|i| (y[[i, j]] - mean).powi(2)).sum();
            acc += num / den;
        }
        1.0 - acc / d as f64
    }

    #[test]
    fn macro_r2_matches_oracle_on_random_instances() {
        let mut rng = RngSeed(11).rng();
        for _ in 0..50 {
            let n = 2 + (rng.random::<u64>() % 10) as usize;
            let d = 1 + (rng.random::<u64>() % 5) as usize;
            let y = Array2::from_shape_fn((n, d), |_| rng.random::<f64>() * 10.0 - 5.0);
            let p = Array2::from_shape_fn((n, d), |_| rng.random::<f64>() * 10.0 - 5.0);
            let fast = macro_r2(y.view(), p.view());
            let Ok(fast) = fast else { continue };
            assert!((fast.value - macro_r2_oracle(&y, &p)).abs() < 1e-12);
        }
    }
}
