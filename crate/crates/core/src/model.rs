//! Logistic matrix factorization model: data types, likelihood, log-posterior and gradients.
//!
//! The observed binary matrix `Y` (I x J) is modelled as
//! `y_ij ~ Bernoulli(sigmoid(mu_i + <a_i, b_j>))` with `A` (I x K) and `B` (J x K)
//! carrying spike-and-slab lasso priors on their entries.

use ndarray::{Array1, Array2, ArrayView2, Axis, Zip};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::penalty::{lambda_star, PenaltyParams};

/// Probabilities are clipped to `[EPS, 1 - EPS]`.
pub const PROB_EPS: f64 = 1e-12;

/// Dense 0/1 data matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct BinaryMatrix {
    values: Array2<f64>,
    ones: usize,
}

impl BinaryMatrix {
    /// All-zero matrix of the given shape.
    pub fn zeros(rows: usize, cols: usize) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidArgument(format!(
                "binary matrix must be non-empty, got {rows}x{cols}"
            )));
        }
        Ok(BinaryMatrix {
            values: Array2::zeros((rows, cols)),
            ones: 0,
        })
    }

    /// Builds a matrix from a dense array; every entry must be exactly 0 or 1.
    pub fn from_dense(values: Array2<f64>) -> Result<Self> {
        let (rows, cols) = values.dim();
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidArgument(format!(
                "binary matrix must be non-empty, got {rows}x{cols}"
            )));
        }
        let mut ones = 0;
        for ((i, j), &v) in values.indexed_iter() {
            if v == 1.0 {
                ones += 1;
            } else if v != 0.0 {
                return Err(Error::InvalidArgument(format!(
                    "entry ({i}, {j}) = {v} is not binary"
                )));
            }
        }
        Ok(BinaryMatrix { values, ones })
    }

    pub fn from_bools(rows: usize, cols: usize, f: impl Fn(usize, usize) -> bool) -> Result<Self> {
        let values = Array2::from_shape_fn((rows, cols), |(i, j)| if f(i, j) { 1.0 } else { 0.0 });
        Self::from_dense(values)
    }

    /// Builds a matrix from 0-based coordinates of the one-cells. Duplicates are ignored.
    pub fn from_coordinates(rows: usize, cols: usize, ones: &[(usize, usize)]) -> Result<Self> {
        let mut m = Self::zeros(rows, cols)?;
        for &(i, j) in ones {
            if i >= rows || j >= cols {
                return Err(Error::InvalidArgument(format!(
                    "coordinate ({i}, {j}) outside {rows}x{cols}"
                )));
            }
            m.set(i, j, true);
        }
        Ok(m)
    }

    pub fn rows(&self) -> usize {
        self.values.nrows()
    }

    pub fn cols(&self) -> usize {
        self.values.ncols()
    }

    pub fn dim(&self) -> (usize, usize) {
        self.values.dim()
    }

    pub fn get(&self, i: usize, j: usize) -> bool {
        self.values[[i, j]] == 1.0
    }

    pub fn set(&mut self, i: usize, j: usize, one: bool) {
        let cell = &mut self.values[[i, j]];
        match (*cell == 1.0, one) {
            (false, true) => self.ones += 1,
            (true, false) => self.ones -= 1,
            _ => {}
        }
        *cell = if one { 1.0 } else { 0.0 };
    }

    pub fn flip(&mut self, i: usize, j: usize) {
        let now = self.get(i, j);
        self.set(i, j, !now);
    }

    /// Number of one-cells.
    pub fn count_ones(&self) -> usize {
        self.ones
    }

    /// The matrix as 0.0/1.0 reals.
    pub fn view(&self) -> ArrayView2<'_, f64> {
        self.values.view()
    }

    /// 0-based coordinates of the one-cells in row-major order.
    pub fn ones_coordinates(&self) -> Vec<(usize, usize)> {
        self.values
            .indexed_iter()
            .filter(|(_, &v)| v == 1.0)
            .map(|(ij, _)| ij)
            .collect()
    }
}

/// Factor matrices `A` (I x K), `B` (J x K) and the row location vector `mu`.
#[derive(Debug, Clone, PartialEq)]
pub struct FactorPair {
    pub a: Array2<f64>,
    pub b: Array2<f64>,
    pub mu: Array1<f64>,
}

impl FactorPair {
    pub fn new(a: Array2<f64>, b: Array2<f64>, mu: Array1<f64>) -> Result<Self> {
        let fp = FactorPair { a, b, mu };
        fp.validate()?;
        Ok(fp)
    }

    /// All-zero factors with `k` columns.
    pub fn zeros(rows: usize, cols: usize, k: usize) -> Self {
        FactorPair {
            a: Array2::zeros((rows, k)),
            b: Array2::zeros((cols, k)),
            mu: Array1::zeros(rows),
        }
    }

    pub fn k(&self) -> usize {
        self.a.ncols()
    }

    pub fn rows(&self) -> usize {
        self.a.nrows()
    }

    pub fn cols(&self) -> usize {
        self.b.nrows()
    }

    pub fn validate(&self) -> Result<()> {
        if self.a.ncols() != self.b.ncols() {
            return Err(Error::DimensionMismatch(format!(
                "A has {} columns but B has {}",
                self.a.ncols(),
                self.b.ncols()
            )));
        }
        if self.mu.len() != self.a.nrows() {
            return Err(Error::DimensionMismatch(format!(
                "mu has length {} but A has {} rows",
                self.mu.len(),
                self.a.nrows()
            )));
        }
        let finite = self
            .a
            .iter()
            .chain(self.b.iter())
            .chain(self.mu.iter())
            .all(|v| v.is_finite());
        if !finite {
            return Err(Error::InvalidArgument(
                "factor entries must be finite".into(),
            ));
        }
        Ok(())
    }

    /// Linear predictor `M = mu 1^T + A B^T`.
    pub fn linear_predictor(&self) -> Array2<f64> {
        linear_predictor(&self.a, &self.b, &self.mu)
    }

    /// Fitted success probabilities `sigmoid(M)`.
    pub fn probabilities(&self) -> Array2<f64> {
        self.linear_predictor().mapv_into(logistic)
    }

    pub(crate) fn check_against(&self, y: &BinaryMatrix) -> Result<()> {
        if self.a.ncols() != self.b.ncols() {
            return Err(Error::DimensionMismatch(format!(
                "A has {} columns but B has {}",
                self.a.ncols(),
                self.b.ncols()
            )));
        }
        if self.a.nrows() != y.rows() || self.mu.len() != y.rows() || self.b.nrows() != y.cols() {
            return Err(Error::DimensionMismatch(format!(
                "Y is {}x{} but A is {}x{}, B is {}x{}, mu has length {}",
                y.rows(),
                y.cols(),
                self.a.nrows(),
                self.a.ncols(),
                self.b.nrows(),
                self.b.ncols(),
                self.mu.len()
            )));
        }
        Ok(())
    }
}

/// How the column inclusion summaries are refreshed after each sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum TauRule {
    /// `(alpha + nnz) / (alpha + beta + n)`.
    #[default]
    Intensity,
    /// Finite beta-Bernoulli form `(alpha/K + nnz) / (alpha/K + 1 + n)` with `K` the current truncation.
    Truncated,
}

/// Slab parameter used in the squared term of the threshold test function.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ThresholdSlab {
    /// Slab of the matrix being updated (`lambda1_tilde` for A, `lambda1` for B).
    #[default]
    PerMatrix,
    /// Always the B-side slab `lambda1`.
    Global,
}

/// Power of the singular values used to scale the truncated-SVD start.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum SvdScale {
    /// `A = U D^{1/2}`, `B = V D^{1/2}`, so `AB^T` is the rank-K truncation of `Y`.
    #[default]
    Sqrt,
    /// `A = U D^{-1/2}`, `B = V D^{-1/2}`. Every planted block starts with `||a_k||_1 ||b_k||_1 = 1`,
    /// which sits inside the basin of the all-zero mode when the slab is 1.
    InverseSqrt,
}

impl SvdScale {
    pub fn exponent(self) -> f64 {
        match self {
            SvdScale::Sqrt => 0.5,
            SvdScale::InverseSqrt => -0.5,
        }
    }
}

/// Prior, truncation and solver settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hyperparams {
    pub lambda0_tilde: f64,
    pub lambda1_tilde: f64,
    pub lambda0: f64,
    pub lambda1: f64,
    pub alpha_tilde: f64,
    pub alpha: f64,
    pub beta_tilde: f64,
    pub beta: f64,
    pub k_star: usize,
    pub eta: f64,
    pub lambda0_ladder: Vec<f64>,
    pub tol: f64,
    pub max_iter: usize,
    pub seed: u64,
    #[serde(default)]
    pub tau_rule: TauRule,
    #[serde(default)]
    pub threshold_slab: ThresholdSlab,
    #[serde(default)]
    pub svd_scale: SvdScale,
}

/// Spike ladder used when none is given.
pub const DEFAULT_LADDER: [f64; 7] = [1.0, 5.0, 10.0, 50.0, 100.0, 1000.0, 10000.0];

impl Hyperparams {
    /// Defaults: unit slabs, `alpha = 1/K*`, `beta = 1`, `eta = 1e-3`, the standard spike ladder.
    pub fn new(k_star: usize) -> Self {
        let alpha = 1.0 / k_star.max(1) as f64;
        Hyperparams {
            lambda0_tilde: DEFAULT_LADDER[0],
            lambda1_tilde: 1.0,
            lambda0: DEFAULT_LADDER[0],
            lambda1: 1.0,
            alpha_tilde: alpha,
            alpha,
            beta_tilde: 1.0,
            beta: 1.0,
            k_star,
            eta: 1e-3,
            lambda0_ladder: DEFAULT_LADDER.to_vec(),
            tol: 1e-6,
            max_iter: 500,
            seed: 0,
            tau_rule: TauRule::default(),
            threshold_slab: ThresholdSlab::default(),
            svd_scale: SvdScale::default(),
        }
    }

    /// Copy with both spike parameters set to `lambda0`.
    pub fn with_spike(&self, lambda0: f64) -> Self {
        Hyperparams {
            lambda0_tilde: lambda0,
            lambda0,
            ..self.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("lambda0_tilde", self.lambda0_tilde),
            ("lambda1_tilde", self.lambda1_tilde),
            ("lambda0", self.lambda0),
            ("lambda1", self.lambda1),
            ("alpha_tilde", self.alpha_tilde),
            ("alpha", self.alpha),
            ("beta_tilde", self.beta_tilde),
            ("beta", self.beta),
            ("eta", self.eta),
            ("tol", self.tol),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidArgument(format!(
                    "{name} must be positive and finite, got {v}"
                )));
            }
        }
        if self.k_star == 0 {
            return Err(Error::InvalidArgument("k_star must be positive".into()));
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidArgument("max_iter must be positive".into()));
        }
        if self.lambda0_tilde < self.lambda1_tilde || self.lambda0 < self.lambda1 {
            return Err(Error::InvalidArgument(format!(
                "spike must not be smaller than slab: lambda0_tilde={}, lambda1_tilde={}, lambda0={}, lambda1={}",
                self.lambda0_tilde, self.lambda1_tilde, self.lambda0, self.lambda1
            )));
        }
        let slab = self.lambda1.max(self.lambda1_tilde);
        for (idx, w) in self.lambda0_ladder.windows(2).enumerate() {
            if w[1] <= w[0] {
                return Err(Error::InvalidArgument(format!(
                    "lambda0 ladder must be strictly increasing (rung {} = {}, rung {} = {})",
                    idx,
                    w[0],
                    idx + 1,
                    w[1]
                )));
            }
        }
        if let Some(&first) = self.lambda0_ladder.first() {
            if !(first.is_finite() && first >= slab) {
                return Err(Error::InvalidArgument(format!(
                    "lambda0 ladder must start at or above the slab {slab}, got {first}"
                )));
            }
        }
        Ok(())
    }
}

/// Iterate of the coordinate ascent: current factors, momentum history and inclusion summaries.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverState {
    pub factors: FactorPair,
    /// `A(t-2)` for the momentum step; the current `A(t-1)` lives in `factors`.
    pub a_prev: Array2<f64>,
    pub b_prev: Array2<f64>,
    pub tau_tilde: Array1<f64>,
    pub tau: Array1<f64>,
    pub t: usize,
    pub log_posterior: f64,
}

impl SolverState {
    /// Starts a run at `t = 2` with the history equal to the starting point.
    pub fn new(factors: FactorPair, tau_tilde: Array1<f64>, tau: Array1<f64>) -> Result<Self> {
        factors.validate()?;
        let k = factors.k();
        if tau_tilde.len() != k || tau.len() != k {
            return Err(Error::DimensionMismatch(format!(
                "tau vectors have lengths {} and {} but K = {k}",
                tau_tilde.len(),
                tau.len()
            )));
        }
        if tau_tilde
            .iter()
            .chain(tau.iter())
            .any(|t| !(0.0..=1.0).contains(t))
        {
            return Err(Error::InvalidArgument(
                "tau entries must lie in [0, 1]".into(),
            ));
        }
        Ok(SolverState {
            a_prev: factors.a.clone(),
            b_prev: factors.b.clone(),
            factors,
            tau_tilde,
            tau,
            t: 2,
            log_posterior: f64::NEG_INFINITY,
        })
    }

    pub fn k(&self) -> usize {
        self.factors.k()
    }

    /// Columns of A, B, both histories and both tau vectors agree.
    pub fn is_coherent(&self) -> bool {
        let k = self.k();
        self.factors.b.ncols() == k
            && self.a_prev.dim() == self.factors.a.dim()
            && self.b_prev.dim() == self.factors.b.dim()
            && self.tau_tilde.len() == k
            && self.tau.len() == k
    }
}

/// Logistic function with the `[EPS, 1 - EPS]` clip; callers guarantee a finite argument.
#[inline]
pub(crate) fn logistic(m: f64) -> f64 {
    let p = if m >= 0.0 {
        1.0 / (1.0 + (-m).exp())
    } else {
        let e = m.exp();
        e / (1.0 + e)
    };
    p.clamp(PROB_EPS, 1.0 - PROB_EPS)
}

/// `log(1 + exp(m))` without overflow.
#[inline]
pub(crate) fn softplus(m: f64) -> f64 {
    m.max(0.0) + (-m.abs()).exp().ln_1p()
}

/// Success probability `exp(m) / (1 + exp(m))`, clipped to `[1e-12, 1 - 1e-12]`.
pub fn success_probability(m: f64) -> Result<f64> {
    if !m.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "logit must be finite, got {m}"
        )));
    }
    Ok(logistic(m))
}

pub(crate) fn linear_predictor(a: &Array2<f64>, b: &Array2<f64>, mu: &Array1<f64>) -> Array2<f64> {
    let mut m = a.dot(&b.t());
    Zip::from(m.rows_mut())
        .and(mu)
        .for_each(|mut row, &mu_i| row += mu_i);
    m
}

/// `W - Y` with `W` the fitted probabilities.
pub(crate) fn residual(
    y: &BinaryMatrix,
    a: &Array2<f64>,
    b: &Array2<f64>,
    mu: &Array1<f64>,
) -> Array2<f64> {
    let mut r = linear_predictor(a, b, mu);
    Zip::from(&mut r)
        .and(&y.view())
        .for_each(|w, &yv| *w = logistic(*w) - yv);
    r
}

pub(crate) fn log_likelihood_raw(
    y: &BinaryMatrix,
    a: &Array2<f64>,
    b: &Array2<f64>,
    mu: &Array1<f64>,
) -> f64 {
    let m = linear_predictor(a, b, mu);
    let mut total = 0.0;
    Zip::from(&m)
        .and(&y.view())
        .for_each(|&mv, &yv| total += yv * mv - softplus(mv));
    total
}

/// Bernoulli log-likelihood `sum_ij [y_ij m_ij - log(1 + exp(m_ij))]`.
pub fn log_likelihood(y: &BinaryMatrix, fp: &FactorPair) -> Result<f64> {
    fp.check_against(y)?;
    Ok(log_likelihood_raw(y, &fp.a, &fp.b, &fp.mu))
}

/// Separable penalty `sum_ik -lambda*(a_ik; tau_k) |a_ik|` for one factor matrix.
pub(crate) fn factor_penalty(
    x: &Array2<f64>,
    tau: &Array1<f64>,
    spike: f64,
    slab: f64,
    eta: f64,
) -> f64 {
    let mut total = 0.0;
    for (col, &theta) in x.axis_iter(Axis(1)).zip(tau.iter()) {
        let pp = PenaltyParams::unchecked(theta, spike, slab, eta);
        for &v in col.iter() {
            if v != 0.0 {
                total -= lambda_star(v, &pp) * v.abs();
            }
        }
    }
    total
}

/// Log-likelihood plus the tau-approximated spike-and-slab penalties of every column.
pub fn log_posterior(y: &BinaryMatrix, state: &SolverState, hp: &Hyperparams) -> Result<f64> {
    let fp = &state.factors;
    fp.check_against(y)?;
    if state.tau_tilde.len() != fp.k() || state.tau.len() != fp.k() {
        return Err(Error::DimensionMismatch(format!(
            "tau vectors have lengths {} and {} but K = {}",
            state.tau_tilde.len(),
            state.tau.len(),
            fp.k()
        )));
    }
    Ok(log_posterior_unchecked(y, state, hp))
}

pub(crate) fn log_posterior_unchecked(
    y: &BinaryMatrix,
    state: &SolverState,
    hp: &Hyperparams,
) -> f64 {
    let fp = &state.factors;
    log_likelihood_raw(y, &fp.a, &fp.b, &fp.mu)
        + factor_penalty(
            &fp.a,
            &state.tau_tilde,
            hp.lambda0_tilde,
            hp.lambda1_tilde,
            hp.eta,
        )
        + factor_penalty(&fp.b, &state.tau, hp.lambda0, hp.lambda1, hp.eta)
}

/// Gradient of the negative log-likelihood with respect to `A`: `(W - Y) B`.
pub fn gradient_wrt_a(y: &BinaryMatrix, fp: &FactorPair) -> Result<Array2<f64>> {
    fp.check_against(y)?;
    Ok(residual(y, &fp.a, &fp.b, &fp.mu).dot(&fp.b))
}

/// Gradient of the negative log-likelihood with respect to `B`: `(W - Y)^T A`.
pub fn gradient_wrt_b(y: &BinaryMatrix, fp: &FactorPair) -> Result<Array2<f64>> {
    fp.check_against(y)?;
    Ok(residual(y, &fp.a, &fp.b, &fp.mu).t().dot(&fp.a))
}
