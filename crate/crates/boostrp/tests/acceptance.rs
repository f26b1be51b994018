//! Acceptance suite: the desk-scale claims this library must reproduce,
//! one test per criterion, each printing a PASS/FAIL line.
//!
//! Run with `cargo test --test acceptance` (add `-- --nocapture` to see the
//! per-criterion lines). The friedman comparisons take a few minutes; the
//! property checks finish in seconds.

use boostrp::*;
use ndarray::{Array1, Array2};
use rand::Rng;

fn verdict(id: u32, name: &str, pass: bool) {
    println!("acceptance {id} ({name}): {}", if pass { "PASS" } else { "FAIL" });
    assert!(pass, "acceptance criterion {id} ({name}) failed");
}

fn random_regression(n: usize, p: usize, d: usize, seed: u64) -> Dataset {
    let mut rng = RngSeed(seed).rng();
    let x = Array2::from_shape_fn((n, p), |_| rng.random::<f64>() * 4.0 - 2.0);
    let y = Array2::from_shape_fn((n, d), |(i, j)| {
        let s: f64 = (0..p).map(|k| x[[i, k]] * ((j + k) as f64 terminal + 1.0)).sum();
        s + rng.random::<f64>()
    });
    Dataset::new(x, y, TaskKind::Regression).unwrap()
}

fn random_multilabel(n: usize, p: usize, d: usize, seed: u64) -> Dataset {
    let mut rng = RngSeed(seed).rng();
    let x = Array2::from_shape_fn((n, p), |_| rng.random::<f64>() * 2.0 - 1.0);
    let mut y = Array2::from_shape_fn((n, d), |(i, j)| {
        if x[[i, j % p]] + 0.4 * (rng.random::<f64>() - 0.5) > 0.0 {
            1.0
        } else {
            -1.0
        }
    });
    for j in 0..d {
        y[[0, j]] = 1.0;
        y[[1, j]] = -1.0;
    }
    Dataset::new(x, y, TaskKind::Multilabel).unwrap()
}
