//! Synthetic binary matrices with planted biclusters.
//!
//! Every bicluster `k` is a contiguous run of `r_k` rows times a contiguous run of
//! `c_k` columns, each placed at a uniform random start. Biclusters may overlap.

use std::ops::{Range, RangeInclusive};

use ndarray::Array2;
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::{Bicluster, BiclusterSet};
use crate::model::{logistic, BinaryMatrix};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub rows: usize,
    pub cols: usize,
    pub k: usize,
    /// Fraction of cells flipped (Simulation I).
    pub noise: f64,
    /// Scalar logit offset (Simulation II).
    pub mu_offset: f64,
    pub row_sizes: RangeInclusive<usize>,
    pub col_sizes: RangeInclusive<usize>,
    pub seed: u64,
}

impl SimConfig {
    /// 300 x 1000 with 15 biclusters, sizes `5..=20` by `10..=50`.
    pub fn new(rows: usize, cols: usize, k: usize, seed: u64) -> Self {
        SimConfig {
            rows,
            cols,
            k,
            noise: 0.0,
            mu_offset: 0.0,
            row_sizes: 5..=20,
            col_sizes: 10..=50,
            seed,
        }
    }

    pub fn with_noise(mut self, noise: f64) -> Self {
        self.noise = noise;
        self
    }

    pub fn with_mu(mut self, mu: f64) -> Self {
        self.mu_offset = mu;
        self
    }

    fn validate(&self) -> Result<()> {
        if self.rows == 0 || self.cols == 0 {
            return Err(Error::InvalidArgument(
                "simulation needs positive dimensions".into(),
            ));
        }
        let (r0, r1) = (*self.row_sizes.start(), *self.row_sizes.end());
        let (c0, c1) = (*self.col_sizes.start(), *self.col_sizes.end());
        if r0 == 0 || r0 > r1 || c0 == 0 || c0 > c1 {
            return Err(Error::InvalidArgument(format!(
                "bicluster size ranges must be non-empty and positive: rows {r0}..={r1}, cols {c0}..={c1}"
            )));
        }
        if r1 > self.rows || c1 > self.cols {
            return Err(Error::InvalidArgument(format!(
                "bicluster sizes up to {r1}x{c1} do not fit a {}x{} matrix",
                self.rows, self.cols
            )));
        }
        Ok(())
    }
}

/// Ground truth of a simulated dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct PlantedTruth {
    /// 0-based half-open row and column ranges per bicluster.
    pub biclusters: Vec<(Range<usize>, Range<usize>)>,
    pub a_true: Array2<f64>,
    pub b_true: Array2<f64>,
    pub k_true: usize,
}

impl PlantedTruth {
    pub fn to_set(&self) -> BiclusterSet {
        BiclusterSet::new(
            self.biclusters
                .iter()
                .map(|(r, c)| Bicluster::new(r.clone().collect(), c.clone().collect()))
                .collect(),
        )
    }

    /// Cells covered by at least one bicluster.
    pub fn support(&self) -> Array2<bool> {
        let m = self.a_true.dot(&self.b_true.t());
        m.mapv(|v| v != 0.0)
    }
}

fn plant(cfg: &SimConfig, rng: &mut ChaCha8Rng) -> PlantedTruth {
    let mut a = Array2::zeros((cfg.rows, cfg.k));
    let mut b = Array2::zeros((cfg.cols, cfg.k));
    let mut biclusters = Vec::with_capacity(cfg.k);
    for k in 0..cfg.k {
        let r = rng.random_range(cfg.row_sizes.clone());
        let c = rng.random_range(cfg.col_sizes.clone());
        let r_start = rng.random_range(0..=cfg.rows - r);
        let c_start = rng.random_range(0..=cfg.cols - c);
        let rows = r_start..r_start + r;
        let cols = c_start..c_start + c;
        for i in rows.clone() {
            a[[i, k]] = 1.0;
        }
        for j in cols.clone() {
            b[[j, k]] = 1.0;
        }
        biclusters.push((rows, cols));
    }
    PlantedTruth {
        biclusters,
        a_true: a,
        b_true: b,
        k_true: cfg.k,
    }
}

/// Noise-flipped planted blocks: `y_ij = 1(m_ij != 0)` with exactly `round(noise * I * J)` distinct cells flipped.
pub fn simulate_i(cfg: &SimConfig) -> Result<(BinaryMatrix, PlantedTruth)> {
    cfg.validate()?;
    if !(0.0..=0.5).contains(&cfg.noise) {
        return Err(Error::InvalidArgument(format!(
            "noise must be in [0, 0.5], got {}",
            cfg.noise
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let truth = plant(cfg, &mut rng);
    let support = truth.support();
    let mut y = BinaryMatrix::from_bools(cfg.rows, cfg.cols, |i, j| support[[i, j]])?;
    let cells = cfg.rows * cfg.cols;
    let flips = (cfg.noise * cells as f64).round() as usize;
    for idx in sample(&mut rng, cells, flips).into_iter() {
        y.flip(idx / cfg.cols, idx % cfg.cols);
    }
    Ok((y, truth))
}

/// Logistic-generative planted blocks.
///
/// Background cells take `N(0, 0.1^2)` values, cells of bicluster `k` take `N(s_k 2, 0.1^2)` with a
/// random sign `s_k` per bicluster (later biclusters overwrite earlier ones where they overlap), and
/// `y_ij ~ Bernoulli(sigmoid(mu + value_ij))`.
pub fn simulate_ii(cfg: &SimConfig) -> Result<(BinaryMatrix, PlantedTruth)> {
    cfg.validate()?;
    if !cfg.mu_offset.is_finite() {
        return Err(Error::InvalidArgument("mu offset must be finite".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let truth = plant(cfg, &mut rng);
    let noise = Normal::new(0.0, 0.1).expect("valid normal");
    let mut values = Array2::from_shape_simple_fn((cfg.rows, cfg.cols), || noise.sample(&mut rng));
    for (rows, cols) in &truth.biclusters {
        let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
        for i in rows.clone() {
            for j in cols.clone() {
                values[[i, j]] = 2.0 * sign + noise.sample(&mut rng);
            }
        }
    }
    let mut y = BinaryMatrix::zeros(cfg.rows, cfg.cols)?;
    for ((i, j), &v) in values.indexed_iter() {
        if rng.random_bool(logistic(cfg.mu_offset + v)) {
            y.set(i, j, true);
        }
    }
    Ok((y, truth))
}
