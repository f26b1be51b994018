//! Random projections of the output space.
//!
//! Four schemes, from sparsest to densest:
//!
//! * `subsample`: rows drawn without replacement from the `d x d` identity,
//!   selecting `q` of the original outputs;
//! * `sparse-rademacher`: entries in `{-sqrt(s/q), 0, +sqrt(s/q)}` with
//!   probabilities `{1/(2s), 1 - 1/s, 1/(2s)}` and `s = sqrt(d)`;
//! * `achlioptas`: the same family at `s = 3`;
//! * `gaussian`: i.i.d. `N(0, 1/q)` entries.
//!
//! All schemes approximately preserve pairwise distances (and hence
//! multi-output variance) at sufficient `q`.

use std::fmt;
use std::str::FromStr;

use ndarray::{Array2, ArrayView2};
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::RngSeed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ProjectionScheme {
    Gaussian,
    Achlioptas,
    SparseRademacher,
    Subsample,
}

impl ProjectionScheme {
    pub fn as_str(&self) -> &'static str {
        match self {
            ProjectionScheme::Gaussian => "gaussian",
            ProjectionScheme::Achlioptas => "achlioptas",
            ProjectionScheme::SparseRademacher => "sparse-rademacher",
            ProjectionScheme::Subsample => "subsample",
        }
    }
}

impl fmt::Display for ProjectionScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ProjectionScheme {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gaussian" => Ok(ProjectionScheme::Gaussian),
            "achlioptas" => Ok(ProjectionScheme::Achlioptas),
            "sparse-rademacher" => Ok(ProjectionScheme::SparseRademacher),
            "subsample" => Ok(ProjectionScheme::Subsample),
            other => Err(Error::Parameter(format!(
                "unknown projection scheme '{other}'"
            ))),
        }
    }
}

/// A materialized `q x d` random projection, reproducible from its seed.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionMatrix {
    scheme: ProjectionScheme,
    q: usize,
    d: usize,
    seed: RngSeed,
    entries: Array2<f64>,
}

impl ProjectionMatrix {
    /// Draws a `q x d` matrix of the given scheme. Identical arguments yield
    /// identical matrices.
    pub fn draw(scheme: ProjectionScheme, q: usize, d: usize, seed: RngSeed) -> Result<Self> {
        if q == 0 || d == 0 {
            return Err(Error::Parameter("projection needs q >= 1 and d >= 1".into()));
        }
        let mut rng = seed.rng();
        let entries = match scheme {
            ProjectionScheme::Gaussian => {
                let normal = Normal::new(0.0, (1.0 / q as f64).sqrt()).unwrap();
                Array2::from_shape_fn((q, d), |_| normal.sample(&mut rng))
            }
            ProjectionScheme::Achlioptas => sparse_entries(&mut rng, q, d, 3.0),
            ProjectionScheme::SparseRademacher => sparse_entries(&mut rng, q, d, (d as f64).sqrt()),
            ProjectionScheme::Subsample => {
                if q > d {
                    return Err(Error::Parameter(format!(
                        "subsampling draws without replacement; q = {q} exceeds d = {d}"
                    )));
                }
                let picks = rand::seq::index::sample(&mut rng, d, q);
                let mut m = Array2::zeros((q, d));
                for (row, col) in picks.into_iter().enumerate() {
                    m[[row, col]] = 1.0;
                }
                m
            }
        };
        Ok(ProjectionMatrix {
            scheme,
            q,
            d,
            seed,
            entries,
        })
    }

    /// Rebuilds a matrix from explicitly stored entries (model-file fallback).
    pub fn from_entries(
        scheme: ProjectionScheme,
        seed: RngSeed,
        entries: Array2<f64>,
    ) -> Result<Self> {
        if entries.nrows() == 0 || entries.ncols() == 0 {
            return Err(Error::Parameter("projection entries must be non-empty".into()));
        }
        Ok(ProjectionMatrix {
            scheme,
            q: entries.nrows(),
            d: entries.ncols(),
            seed,
            entries,
        })
    }

    pub fn scheme(&self) -> ProjectionScheme {
        self.scheme
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn seed(&self) -> RngSeed {
        self.seed
    }

    pub fn entries(&self) -> ArrayView2<'_, f64> {
        self.entries.view()
    }

    /// Maps each row `y` of an `n x d` matrix to `phi * y`, giving `n x q`.
    pub fn project(&self, vectors: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
        if vectors.ncols() != self.d {
            return Err(Error::Shape(format!(
                "projection expects {} columns, got {}",
                self.d,
                vectors.ncols()
            )));
        }
        Ok(vectors.dot(&self.entries.t()))
    }
}

fn sparse_entries(rng: &mut impl Rng, q: usize, d: usize, s: f64) -> Array2<f64> {
    let magnitude = (s / q as f64).sqrt();
    let p_nonzero_half = 1.0 / (2.0 * s);
    Array2::from_shape_fn((q, d), |_| {
        let u: f64 = rng.random();
        if u < p_nonzero_half {
            -magnitude
        } else if u < 2.0 * p_nonzero_half {
            magnitude
        } else {
            0.0
        }
    })
}
