//! Starting points for the solver.

use nalgebra::DMatrix;
use ndarray::{s, Array1, Array2};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{BinaryMatrix, FactorPair, Hyperparams, SvdScale};
use crate::optimizer::FitResult;

/// Initial inclusion summary of every column.
pub const INITIAL_TAU: f64 = 0.5;

/// Singular values at or below this fraction of the largest are treated as zero.
const RANK_TOL: f64 = 1e-10;

/// Factors and inclusion summaries the solver starts from.
#[derive(Debug, Clone, PartialEq)]
pub struct StartPoint {
    pub factors: FactorPair,
    pub tau_tilde: Array1<f64>,
    pub tau: Array1<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitMode {
    Svd,
    Warm,
    Random,
}

#[derive(Debug, Clone)]
pub struct InitSpec<'a> {
    pub mode: InitMode,
    pub k_star: usize,
    pub seed: u64,
    pub warm_source: Option<&'a FitResult>,
}

pub fn initialize(y: &BinaryMatrix, spec: &InitSpec<'_>, hp: &Hyperparams) -> Result<StartPoint> {
    match spec.mode {
        InitMode::Svd => init_svd(y, spec.k_star, hp.svd_scale),
        InitMode::Random => init_random(y, spec.k_star, spec.seed),
        InitMode::Warm => {
            let prev = spec.warm_source.ok_or_else(|| {
                Error::InvalidArgument("warm initialization needs a previous fit".into())
            })?;
            if prev.factors.rows() != y.rows() || prev.factors.cols() != y.cols() {
                return Err(Error::DimensionMismatch(format!(
                    "previous fit is {}x{} but Y is {}x{}",
                    prev.factors.rows(),
                    prev.factors.cols(),
                    y.rows(),
                    y.cols()
                )));
            }
            init_warm(prev, spec.k_star, hp)
        }
    }
}

/// Truncated-SVD start: `A = U_K D_K^p`, `B = V_K D_K^p` with `p` from `scale`, `mu = 0`, all tau at 0.5.
///
/// Each singular pair is oriented so the largest-magnitude entry of `u_k` is non-negative.
/// Components with a zero singular value are left as zero columns.
pub fn init_svd(y: &BinaryMatrix, k_star: usize, scale: SvdScale) -> Result<StartPoint> {
    let (rows, cols) = y.dim();
    if k_star == 0 || k_star > rows.min(cols) {
        return Err(Error::InvalidArgument(format!(
            "k_star = {k_star} must lie in 1..={} for a {rows}x{cols} matrix",
            rows.min(cols)
        )));
    }
    let mut a = Array2::zeros((rows, k_star));
    let mut b = Array2::zeros((cols, k_star));
    if y.count_ones() == 0 {
        log::warn!("all-zero data matrix: SVD initialization yields zero factors");
    } else {
        let (u, d, v) = truncated_svd(y, k_star);
        let top = d[0];
        for k in 0..k_star {
            if d[k] <= RANK_TOL * top {
                continue;
            }
            let w = d[k].powf(scale.exponent());
            a.slice_mut(s![.., k]).assign(&(&u.slice(s![.., k]) * w));
            b.slice_mut(s![.., k]).assign(&(&v.slice(s![.., k]) * w));
        }
    }
    Ok(StartPoint {
        factors: FactorPair {
            a,
            b,
            mu: Array1::zeros(rows),
        },
        tau_tilde: Array1::from_elem(k_star, INITIAL_TAU),
        tau: Array1::from_elem(k_star, INITIAL_TAU),
    })
}

/// Leading `k` singular triples of `Y` in descending order with the sign convention applied.
pub fn truncated_svd(y: &BinaryMatrix, k: usize) -> (Array2<f64>, Vec<f64>, Array2<f64>) {
    let (rows, cols) = y.dim();
    let view = y.view();
    let m = DMatrix::from_fn(rows, cols, |i, j| view[[i, j]]);
    let svd = m.svd(true, true);
    let u = svd.u.expect("left singular vectors requested");
    let v_t = svd.v_t.expect("right singular vectors requested");
    let sv = svd.singular_values;

    let mut order: Vec<usize> = (0..sv.len()).collect();
    order.sort_by(|&p, &q| sv[q].total_cmp(&sv[p]).then(p.cmp(&q)));

    let mut u_out = Array2::zeros((rows, k));
    let mut v_out = Array2::zeros((cols, k));
    let mut d_out = Vec::with_capacity(k);
    for (slot, &idx) in order.iter().take(k).enumerate() {
        let mut pivot = 0;
        for i in 0..rows {
            if u[(i, idx)].abs() > u[(pivot, idx)].abs() {
                pivot = i;
            }
        }
        let sign = if u[(pivot, idx)] < 0.0 { -1.0 } else { 1.0 };
        for i in 0..rows {
            u_out[[i, slot]] = sign * u[(i, idx)];
        }
        for j in 0..cols {
            v_out[[j, slot]] = sign * v_t[(idx, j)];
        }
        d_out.push(sv[idx]);
    }
    (u_out, d_out, v_out)
}

/// Restarts from a previous fit, padding with zero columns up to `k_star`.
///
/// Padded columns take the prior mean `alpha / (alpha + beta)` as their inclusion summary.
pub fn init_warm(prev: &FitResult, k_star: usize, hp: &Hyperparams) -> Result<StartPoint> {
    let k_hat = prev.k_hat;
    let k = k_star.max(k_hat);
    let rows = prev.factors.rows();
    let cols = prev.factors.cols();
    let mut a = Array2::zeros((rows, k));
    let mut b = Array2::zeros((cols, k));
    a.slice_mut(s![.., ..k_hat]).assign(&prev.factors.a);
    b.slice_mut(s![.., ..k_hat]).assign(&prev.factors.b);
    let mut tau_tilde = Array1::from_elem(k, hp.alpha_tilde / (hp.alpha_tilde + hp.beta_tilde));
    let mut tau = Array1::from_elem(k, hp.alpha / (hp.alpha + hp.beta));
    tau_tilde.slice_mut(s![..k_hat]).assign(&prev.tau_tilde);
    tau.slice_mut(s![..k_hat]).assign(&prev.tau);
    Ok(StartPoint {
        factors: FactorPair {
            a,
            b,
            mu: prev.factors.mu.clone(),
        },
        tau_tilde,
        tau,
    })
}

/// i.i.d. `N(0, 0.1^2)` factor entries; intended for robustness studies.
pub fn init_random(y: &BinaryMatrix, k_star: usize, seed: u64) -> Result<StartPoint> {
    if k_star == 0 {
        return Err(Error::InvalidArgument("k_star must be positive".into()));
    }
    let (rows, cols) = y.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, 0.1).expect("valid normal");
    let a = Array2::from_shape_simple_fn((rows, k_star), || normal.sample(&mut rng));
    let b = Array2::from_shape_simple_fn((cols, k_star), || normal.sample(&mut rng));
    Ok(StartPoint {
        factors: FactorPair {
            a,
            b,
            mu: Array1::zeros(rows),
        },
        tau_tilde: Array1::from_elem(k_star, INITIAL_TAU),
        tau: Array1::from_elem(k_star, INITIAL_TAU),
    })
}
