//! Proximal coordinate ascent for the posterior mode.
//!
//! One sweep at iteration `t`:
//!
//! 1. FISTA-style momentum step on `A` followed by the spike-and-slab thresholding rule.
//! 2. The same for `B` using the freshly updated `A`.
//! 3. One minorize-maximize step for every `mu_i` (curvature bound `J/4`).
//! 4. Inclusion summaries `tau_tilde`, `tau` from column supports.
//! 5. Columns reordered by descending `tau_tilde`.
//! 6. Zero columns pruned; the truncation shrinks to the surviving count.
//! 7. Column pairs rescaled so `|a_k|_1 = |b_k|_1`.

use ndarray::{Array1, Array2, Axis, Zip};

use crate::error::{Error, Result};
use crate::init::{init_svd, init_warm, StartPoint};
use crate::model::{
    log_posterior_unchecked, residual, BinaryMatrix, FactorPair, Hyperparams, SolverState, TauRule,
    ThresholdSlab,
};
use crate::penalty::{lambda_star, soft_threshold, threshold_upper, PenaltyParams};

/// One row of the per-iteration log.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceEntry {
    /// Index into the spike ladder (0 for a plain fit).
    pub rung: usize,
    pub iteration: usize,
    pub log_posterior: f64,
    pub k: usize,
    pub max_rel_change: f64,
}

/// Summary of one spike-ladder rung.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RungSummary {
    pub lambda0: f64,
    pub k_hat: usize,
    pub iterations: usize,
    pub converged: bool,
    pub log_posterior: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub factors: FactorPair,
    pub k_hat: usize,
    pub tau_tilde: Array1<f64>,
    pub tau: Array1<f64>,
    pub trace: Vec<TraceEntry>,
    pub iterations: usize,
    pub converged: bool,
    /// Every column was pruned; only `mu` carries signal.
    pub degenerate: bool,
    pub log_posterior: f64,
    pub rungs: Vec<RungSummary>,
}

impl FitResult {
    /// Starting point that continues from this solution.
    pub fn to_start(&self) -> StartPoint {
        StartPoint {
            factors: self.factors.clone(),
            tau_tilde: self.tau_tilde.clone(),
            tau: self.tau.clone(),
        }
    }
}

/// Outcome of [`reorder_and_prune`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PruneOutcome {
    /// Original indices of the surviving columns, in their new order.
    pub kept: Vec<usize>,
    pub degenerate: bool,
}

fn momentum_point(current: &Array2<f64>, previous: &Array2<f64>, t: usize) -> Array2<f64> {
    let coef = t.saturating_sub(2) as f64 / (t + 1) as f64;
    if coef == 0.0 {
        return current.clone();
    }
    let mut m = current.clone();
    Zip::from(&mut m)
        .and(previous)
        .for_each(|x, &p| *x += coef * (*x - p));
    m
}

struct SideParams {
    spike: f64,
    slab: f64,
    g_slab: f64,
    name: &'static str,
}

/// Thresholds `z` column by column. `anchor` holds the previous iterate where `lambda*` is evaluated.
fn threshold_columns(
    z: &Array2<f64>,
    anchor: &Array2<f64>,
    tau: &Array1<f64>,
    side: &SideParams,
    eta: f64,
    iteration: usize,
) -> Result<Array2<f64>> {
    let mut out = Array2::zeros(z.dim());
    for (k, &theta) in tau.iter().enumerate() {
        let pp =
            PenaltyParams::unchecked(theta, side.spike, side.slab, eta).with_g_slab(side.g_slab);
        let delta = threshold_upper(&pp);
        for i in 0..z.nrows() {
            let zv = z[[i, k]];
            if !zv.is_finite() {
                return Err(Error::Divergence {
                    matrix: side.name,
                    row: i,
                    col: k,
                    iteration,
                });
            }
            out[[i, k]] = soft_threshold(zv, lambda_star(anchor[[i, k]], &pp), delta, eta);
        }
    }
    Ok(out)
}

fn side_a(hp: &Hyperparams) -> SideParams {
    SideParams {
        spike: hp.lambda0_tilde,
        slab: hp.lambda1_tilde,
        g_slab: match hp.threshold_slab {
            ThresholdSlab::PerMatrix => hp.lambda1_tilde,
            ThresholdSlab::Global => hp.lambda1,
        },
        name: "A",
    }
}

fn side_b(hp: &Hyperparams) -> SideParams {
    SideParams {
        spike: hp.lambda0,
        slab: hp.lambda1,
        g_slab: hp.lambda1,
        name: "B",
    }
}

fn check_state(state: &SolverState, y: &BinaryMatrix) -> Result<()> {
    state.factors.check_against(y)?;
    if !state.is_coherent() {
        return Err(Error::DimensionMismatch(
            "solver state columns are inconsistent".into(),
        ));
    }
    Ok(())
}

/// Momentum proximal update of `A` with `B` and `mu` held at their current values.
///
/// On return `factors.a` holds `A(t)` and `a_prev` holds `A(t-1)`.
pub fn update_a(state: &mut SolverState, y: &BinaryMatrix, hp: &Hyperparams) -> Result<()> {
    check_state(state, y)?;
    let fp = &state.factors;
    let a_m = momentum_point(&fp.a, &state.a_prev, state.t);
    let grad = residual(y, &a_m, &fp.b, &fp.mu).dot(&fp.b);
    let z = a_m - grad * hp.eta;
    let new_a = threshold_columns(&z, &fp.a, &state.tau_tilde, &side_a(hp), hp.eta, state.t)?;
    state.a_prev = std::mem::replace(&mut state.factors.a, new_a);
    Ok(())
}

/// Momentum proximal update of `B` with the current `A` and `mu`.
pub fn update_b(state: &mut SolverState, y: &BinaryMatrix, hp: &Hyperparams) -> Result<()> {
    check_state(state, y)?;
    let fp = &state.factors;
    let b_m = momentum_point(&fp.b, &state.b_prev, state.t);
    let grad = residual(y, &fp.a, &b_m, &fp.mu).t().dot(&fp.a);
    let z = b_m - grad * hp.eta;
    let new_b = threshold_columns(&z, &fp.b, &state.tau, &side_b(hp), hp.eta, state.t)?;
    state.b_prev = std::mem::replace(&mut state.factors.b, new_b);
    Ok(())
}

/// One minorize-maximize step per row: `mu_i += (4/J) sum_j (y_ij - p_ij)`.
pub fn update_mu(state: &mut SolverState, y: &BinaryMatrix) -> Result<()> {
    state.factors.check_against(y)?;
    let fp = &state.factors;
    let r = residual(y, &fp.a, &fp.b, &fp.mu);
    let step = 4.0 / y.cols() as f64;
    let shift = r.sum_axis(Axis(1));
    Zip::from(&mut state.factors.mu)
        .and(&shift)
        .for_each(|mu, &s| *mu -= step * s);
    Ok(())
}

fn nnz(col: ndarray::ArrayView1<'_, f64>) -> usize {
    col.iter().filter(|&&v| v != 0.0).count()
}

/// Refreshes the inclusion summaries from the current column supports.
pub fn update_tau(state: &mut SolverState, hp: &Hyperparams) {
    let (rows, cols) = (state.factors.rows() as f64, state.factors.cols() as f64);
    let k = state.k() as f64;
    let (at, bt, a, b) = match hp.tau_rule {
        TauRule::Intensity => (hp.alpha_tilde, hp.beta_tilde, hp.alpha, hp.beta),
        TauRule::Truncated => (hp.alpha_tilde / k, 1.0, hp.alpha / k, 1.0),
    };
    let fp = &state.factors;
    state.tau_tilde =
        fp.a.axis_iter(Axis(1))
            .map(|c| (at + nnz(c) as f64) / (at + bt + rows))
            .collect();
    state.tau =
        fp.b.axis_iter(Axis(1))
            .map(|c| (a + nnz(c) as f64) / (a + b + cols))
            .collect();
}

fn select_columns(x: &Array2<f64>, kept: &[usize]) -> Array2<f64> {
    x.select(Axis(1), kept)
}

/// Sorts columns by descending `tau_tilde` (stable) and drops columns whose `a_k` or `b_k` is all zero.
///
/// The same permutation and pruning is applied to the momentum history and to `tau`.
pub fn reorder_and_prune(state: &mut SolverState) -> PruneOutcome {
    let k = state.k();
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&p, &q| state.tau_tilde[q].total_cmp(&state.tau_tilde[p]));
    let fp = &state.factors;
    let kept: Vec<usize> = order
        .into_iter()
        .filter(|&c| nnz(fp.a.column(c)) > 0 && nnz(fp.b.column(c)) > 0)
        .collect();
    let identity = kept.len() == k && kept.iter().enumerate().all(|(i, &c)| i == c);
    if !identity {
        state.factors.a = select_columns(&state.factors.a, &kept);
        state.factors.b = select_columns(&state.factors.b, &kept);
        state.a_prev = select_columns(&state.a_prev, &kept);
        state.b_prev = select_columns(&state.b_prev, &kept);
        state.tau_tilde = state.tau_tilde.select(Axis(0), &kept);
        state.tau = state.tau.select(Axis(0), &kept);
    }
    let degenerate = kept.is_empty() && k > 0;
    if degenerate {
        log::warn!("all columns pruned: degenerate empty model, continuing with mu only");
    }
    PruneOutcome { kept, degenerate }
}

/// Balances each column pair so `|a_k|_1 = |b_k|_1`, leaving `A B^T` unchanged.
///
/// The momentum history is rescaled by the same factors.
pub fn rescale(state: &mut SolverState) {
    for k in 0..state.k() {
        let na: f64 = state.factors.a.column(k).iter().map(|v| v.abs()).sum();
        let nb: f64 = state.factors.b.column(k).iter().map(|v| v.abs()).sum();
        assert!(
            nb > 0.0 && na > 0.0,
            "rescale requires pruned state (column {k} is zero)"
        );
        let c = (na / nb).sqrt();
        if c == 1.0 {
            continue;
        }
        state.factors.a.column_mut(k).mapv_inplace(|v| v / c);
        state.a_prev.column_mut(k).mapv_inplace(|v| v / c);
        state.factors.b.column_mut(k).mapv_inplace(|v| v * c);
        state.b_prev.column_mut(k).mapv_inplace(|v| v * c);
    }
}

fn rel_change(new: &Array2<f64>, old: &Array2<f64>) -> f64 {
    let diff: f64 = Zip::from(new)
        .and(old)
        .fold(0.0, |acc, &n, &o| acc + (n - o) * (n - o));
    let base: f64 = old.iter().map(|v| v * v).sum();
    diff.sqrt() / (1.0 + base.sqrt())
}

fn rel_change_1d(new: &Array1<f64>, old: &Array1<f64>) -> f64 {
    let diff: f64 = Zip::from(new)
        .and(old)
        .fold(0.0, |acc, &n, &o| acc + (n - o) * (n - o));
    let base: f64 = old.iter().map(|v| v * v).sum();
    diff.sqrt() / (1.0 + base.sqrt())
}

/// Runs one full sweep (steps 1-7) and advances `t`.
pub fn sweep(state: &mut SolverState, y: &BinaryMatrix, hp: &Hyperparams) -> Result<PruneOutcome> {
    update_a(state, y, hp)?;
    update_b(state, y, hp)?;
    update_mu(state, y)?;
    update_tau(state, hp);
    let outcome = reorder_and_prune(state);
    rescale(state);
    state.t += 1;
    Ok(outcome)
}

/// Runs the coordinate ascent from `start` at the spike values stored in `hp`.
///
/// Converges when the largest relative change of `A`, `B`, `mu` drops below `tol` on an
/// iteration that pruned nothing. Without convergence the iterate with the best
/// log-posterior is returned.
pub fn fit(y: &BinaryMatrix, hp: &Hyperparams, start: StartPoint) -> Result<FitResult> {
    fit_rung(y, hp, start, 0)
}

fn fit_rung(
    y: &BinaryMatrix,
    hp: &Hyperparams,
    start: StartPoint,
    rung: usize,
) -> Result<FitResult> {
    hp.validate()?;
    start.factors.check_against(y)?;
    let mut state = SolverState::new(start.factors, start.tau_tilde, start.tau)?;
    state.log_posterior = log_posterior_unchecked(y, &state, hp);

    let mut trace = Vec::new();
    let mut best = state.clone();
    let mut converged = false;
    let mut degenerate = state.k() == 0;
    let mut iterations = 0;

    for iteration in 1..=hp.max_iter {
        let before = state.factors.clone();
        let k_before = state.k();
        let outcome = sweep(&mut state, y, hp)?;
        iterations = iteration;
        degenerate = state.k() == 0;

        let max_rel_change = if outcome.kept.len() == k_before {
            let fp = &state.factors;
            let a_old = select_columns(&before.a, &outcome.kept);
            let b_old = select_columns(&before.b, &outcome.kept);
            rel_change(&fp.a, &a_old)
                .max(rel_change(&fp.b, &b_old))
                .max(rel_change_1d(&fp.mu, &before.mu))
        } else {
            f64::INFINITY
        };

        state.log_posterior = log_posterior_unchecked(y, &state, hp);
        trace.push(TraceEntry {
            rung,
            iteration,
            log_posterior: state.log_posterior,
            k: state.k(),
            max_rel_change,
        });
        log::trace!(
            "rung {rung} iter {iteration}: logpost {:.6} K {} change {:.3e}",
            state.log_posterior,
            state.k(),
            max_rel_change
        );

        if state.log_posterior >= best.log_posterior || !best.log_posterior.is_finite() {
            best = state.clone();
        }
        if max_rel_change < hp.tol {
            converged = true;
            break;
        }
    }

    let chosen = if converged { state } else { best };
    Ok(FitResult {
        k_hat: chosen.k(),
        degenerate: degenerate && chosen.k() == 0,
        log_posterior: chosen.log_posterior,
        factors: chosen.factors,
        tau_tilde: chosen.tau_tilde,
        tau: chosen.tau,
        trace,
        iterations,
        converged,
        rungs: Vec::new(),
    })
}

/// Truncated-SVD start followed by [`fit_ladder_from`].
pub fn fit_ladder(y: &BinaryMatrix, hp: &Hyperparams) -> Result<FitResult> {
    let start = init_svd(y, hp.k_star, hp.svd_scale)?;
    fit_ladder_from(y, hp, start)
}

/// Fits every spike value of the ladder in turn, warm-starting each rung from the previous one.
pub fn fit_ladder_from(y: &BinaryMatrix, hp: &Hyperparams, start: StartPoint) -> Result<FitResult> {
    fit_ladder_with(y, hp, start, |_, _| {})
}

/// As [`fit_ladder_from`], handing every rung's result to `on_rung`.
pub fn fit_ladder_with(
    y: &BinaryMatrix,
    hp: &Hyperparams,
    start: StartPoint,
    mut on_rung: impl FnMut(usize, &FitResult),
) -> Result<FitResult> {
    hp.validate()?;
    if hp.lambda0_ladder.is_empty() {
        return Err(Error::InvalidArgument("lambda0 ladder is empty".into()));
    }
    let mut trace = Vec::new();
    let mut rungs = Vec::new();
    let mut start = start;
    let mut last = None;
    for (rung, &lambda0) in hp.lambda0_ladder.iter().enumerate() {
        let rung_hp = hp.with_spike(lambda0);
        let result = fit_rung(y, &rung_hp, start, rung)?;
        log::debug!(
            "rung {rung} (lambda0 = {lambda0}): K = {}, {} iterations, converged = {}",
            result.k_hat,
            result.iterations,
            result.converged
        );
        on_rung(rung, &result);
        rungs.push(RungSummary {
            lambda0,
            k_hat: result.k_hat,
            iterations: result.iterations,
            converged: result.converged,
            log_posterior: result.log_posterior,
        });
        trace.extend_from_slice(&result.trace);
        start = init_warm(&result, result.k_hat, &rung_hp)?;
        last = Some(result);
    }
    let mut result = last.expect("ladder is non-empty");
    result.trace = trace;
    result.rungs = rungs;
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{gradient_wrt_a, log_likelihood};
    use approx::assert_abs_diff_eq;
    use ndarray::{array, Array};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_state(rows: usize, cols: usize, k: usize, seed: u64) -> (BinaryMatrix, SolverState) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let y = BinaryMatrix::from_bools(rows, cols, |_, _| false).unwrap();
        let mut y = y;
        for i in 0..rows {
            for j in 0..cols {
                if rng.random_bool(0.3) {
                    y.set(i, j, true);
                }
            }
        }
        let a = Array::from_shape_simple_fn((rows, k), || rng.random_range(-1.0..1.0));
        let b = Array::from_shape_simple_fn((cols, k), || rng.random_range(-1.0..1.0));
        let mu = Array::from_shape_simple_fn(rows, || rng.random_range(-1.0..1.0));
        let tau = Array1::from_elem(k, 0.5);
        let state = SolverState::new(FactorPair::new(a, b, mu).unwrap(), tau.clone(), tau).unwrap();
        (y, state)
    }

    #[test]
    fn first_step_has_no_momentum() {
        let (y, mut state) = random_state(6, 10, 2, 1);
        // a history that would matter if the coefficient were nonzero
        state.a_prev.fill(5.0);
        let mut hp = Hyperparams::new(2);
        hp.eta = 0.05;
        let fp = state.factors.clone();
        update_a(&mut state, &y, &hp).unwrap();
        let z = &fp.a - &(gradient_wrt_a(&y, &fp).unwrap() * hp.eta);
        for ((i, k), &v) in state.factors.a.indexed_iter() {
            let pp = PenaltyParams::new(0.5, hp.lambda0_tilde, hp.lambda1_tilde, hp.eta).unwrap();
            let expected = soft_threshold(
                z[[i, k]],
                lambda_star(fp.a[[i, k]], &pp),
                threshold_upper(&pp),
                hp.eta,
            );
            assert_eq!(v, expected);
        }
        assert_eq!(state.a_prev, fp.a);
    }

    #[test]
    fn momentum_coefficient_applied_later() {
        let current = array![[1.0, 2.0]];
        let previous = array![[0.0, 4.0]];
        let m = momentum_point(&current, &previous, 5);
        assert_abs_diff_eq!(m[[0, 0]], 1.0 + 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(m[[0, 1]], 2.0 - 1.0, epsilon = 1e-15);
    }

    #[test]
    fn zero_proposal_kills_everything() {
        // Y = W and A = 0 makes the gradient step land at zero
        let y = BinaryMatrix::from_bools(4, 5, |i, j| i == j).unwrap();
        let tau = Array1::from_elem(2, 0.5);
        let fp = FactorPair::new(
            Array2::zeros((4, 2)),
            Array2::from_elem((5, 2), 0.3),
            Array1::zeros(4),
        )
        .unwrap();
        let mut state = SolverState::new(fp, tau.clone(), tau).unwrap();
        let mut hp = Hyperparams::new(2).with_spike(100.0);
        hp.eta = 1e-6;
        update_a(&mut state, &y, &hp).unwrap();
        assert!(state.factors.a.iter().all(|&v| v == 0.0));
        let fp = FactorPair::new(
            Array2::from_elem((4, 2), 0.3),
            Array2::zeros((5, 2)),
            Array1::zeros(4),
        )
        .unwrap();
        let tau = Array1::from_elem(2, 0.5);
        let mut state = SolverState::new(fp, tau.clone(), tau).unwrap();
        update_b(&mut state, &y, &hp).unwrap();
        assert!(state.factors.b.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn divergence_is_reported() {
        let (y, mut state) = random_state(4, 5, 1, 3);
        state.factors.a[[2, 0]] = f64::NAN;
        let hp = Hyperparams::new(1);
        match update_a(&mut state, &y, &hp) {
            Err(Error::Divergence { matrix: "A", .. }) => {}
            other => panic!("expected divergence, got {other:?}"),
        }
    }

    #[test]
    fn mu_update_values() {
        let y = BinaryMatrix::from_bools(2, 4, |_, _| true).unwrap();
        let tau = Array1::from_elem(1, 0.5);
        let fp = FactorPair::zeros(2, 4, 1);
        let mut state = SolverState::new(fp, tau.clone(), tau).unwrap();
        update_mu(&mut state, &y).unwrap();
        for &m in state.factors.mu.iter() {
            assert_abs_diff_eq!(m, 2.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn mu_unchanged_at_zero_residual() {
        // one row with y = (1, 0) and logits (+inf-ish, -inf-ish) is a fixed point up to the clip
        let y = BinaryMatrix::from_bools(1, 2, |_, j| j == 0).unwrap();
        let fp = FactorPair::new(array![[1.0]], array![[40.0], [-40.0]], array![0.0]).unwrap();
        let tau = Array1::from_elem(1, 0.5);
        let mut state = SolverState::new(fp, tau.clone(), tau).unwrap();
        update_mu(&mut state, &y).unwrap();
        assert!(state.factors.mu[0].abs() < 1e-11);
    }

    #[test]
    fn mu_step_never_decreases_row_objective() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for seed in 0..50 {
            let (y, mut state) = random_state(3, 7, 2, seed);
            state
                .factors
                .mu
                .mapv_inplace(|_| rng.random_range(-4.0..4.0));
            let before = log_likelihood(&y, &state.factors).unwrap();
            update_mu(&mut state, &y).unwrap();
            let after = log_likelihood(&y, &state.factors).unwrap();
            assert!(after >= before - 1e-12);
        }
    }

    #[test]
    fn tau_update_values() {
        let mut a = Array2::zeros((100, 2));
        for i in 0..10 {
            a[[i, 1]] = 1.0;
        }
        let b = Array2::from_elem((3, 2), 1.0);
        let fp = FactorPair::new(a, b, Array1::zeros(100)).unwrap();
        let tau = Array1::from_elem(2, 0.5);
        let mut state = SolverState::new(fp, tau.clone(), tau).unwrap();
        let hp = Hyperparams::new(20);
        update_tau(&mut state, &hp);
        assert_abs_diff_eq!(state.tau_tilde[0], 0.05 / 101.05, epsilon = 1e-15);
        assert_abs_diff_eq!(state.tau_tilde[1], 10.05 / 101.05, epsilon = 1e-15);
        assert_abs_diff_eq!(state.tau[0], 3.05 / 4.05, epsilon = 1e-15);
        assert!(state.tau[0] < 1.0);

        let mut hp = hp;
        hp.tau_rule = TauRule::Truncated;
        update_tau(&mut state, &hp);
        let at = 0.05 / 2.0;
        assert_abs_diff_eq!(
            state.tau_tilde[1],
            (at + 10.0) / (at + 1.0 + 100.0),
            epsilon = 1e-15
        );
    }

    fn state_from(a: Array2<f64>, b: Array2<f64>, tau_tilde: Array1<f64>) -> SolverState {
        let rows = a.nrows();
        let tau = tau_tilde.clone();
        SolverState::new(
            FactorPair::new(a, b, Array1::zeros(rows)).unwrap(),
            tau_tilde,
            tau,
        )
        .unwrap()
    }

    #[test]
    fn reorder_sorts_by_tau_tilde() {
        let a = array![[1.0, 2.0, 3.0], [1.0, 2.0, 3.0]];
        let b = array![[1.0, 1.0, 1.0]];
        let mut state = state_from(a, b, array![0.1, 0.9, 0.5]);
        let out = reorder_and_prune(&mut state);
        assert_eq!(out.kept, vec![1, 2, 0]);
        assert_eq!(state.factors.a.row(0).to_vec(), vec![2.0, 3.0, 1.0]);
        assert_eq!(state.a_prev.row(0).to_vec(), vec![2.0, 3.0, 1.0]);
        assert_eq!(state.tau_tilde.to_vec(), vec![0.9, 0.5, 0.1]);
    }

    #[test]
    fn reorder_identity_on_sorted_input() {
        let a = array![[1.0, 2.0], [0.0, 1.0]];
        let b = array![[1.0, 1.0]];
        let mut state = state_from(a, b, array![0.7, 0.7]);
        let before = state.clone();
        let out = reorder_and_prune(&mut state);
        assert_eq!(out.kept, vec![0, 1]);
        assert_eq!(state, before);
    }

    #[test]
    fn prune_drops_annihilated_columns() {
        let a = array![[0.0, 2.0], [0.0, 1.0]];
        let b = array![[1.0, 1.0], [3.0, 0.0]];
        let mut state = state_from(a, b, array![0.9, 0.5]);
        let out = reorder_and_prune(&mut state);
        assert_eq!(out.kept, vec![1]);
        assert_eq!(state.k(), 1);
        assert!(state.is_coherent());

        let mut state = state_from(array![[0.0], [0.0]], array![[1.0], [1.0]], array![0.5]);
        let out = reorder_and_prune(&mut state);
        assert!(out.degenerate);
        assert_eq!(state.k(), 0);
        assert!(state.is_coherent());
    }

    #[test]
    fn rescale_balances_l1_norms() {
        let a = array![[2.0], [2.0]];
        let b = array![[0.5], [-0.5]];
        let mut state = state_from(a, b, array![0.5]);
        let before = state.factors.a.dot(&state.factors.b.t());
        rescale(&mut state);
        assert_abs_diff_eq!(state.factors.a[[0, 0]], 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(state.factors.b[[1, 0]], -1.0, epsilon = 1e-15);
        let after = state.factors.a.dot(&state.factors.b.t());
        for (x, y) in before.iter().zip(after.iter()) {
            assert_abs_diff_eq!(x, y, epsilon = 1e-12);
        }
        let snapshot = state.clone();
        rescale(&mut state);
        assert_eq!(state, snapshot);
    }

    #[test]
    fn all_zero_data_gives_empty_model() {
        let y = BinaryMatrix::zeros(10, 20).unwrap();
        let mut hp = Hyperparams::new(3);
        hp.max_iter = 2000;
        let start = crate::init::init_random(&y, 3, 5).unwrap();
        let fit = fit_ladder_from(&y, &hp, start).unwrap();
        assert_eq!(fit.k_hat, 0);
        assert!(fit.degenerate);
        for p in fit.factors.probabilities().iter() {
            assert!(*p <= 0.01);
        }
    }

    #[test]
    fn single_rung_ladder_equals_fit() {
        let (y, state) = random_state(8, 12, 2, 9);
        let mut hp = Hyperparams::new(2);
        hp.lambda0_ladder = vec![5.0];
        hp.max_iter = 50;
        let start = StartPoint {
            factors: state.factors.clone(),
            tau_tilde: state.tau_tilde.clone(),
            tau: state.tau.clone(),
        };
        let ladder = fit_ladder_from(&y, &hp, start.clone()).unwrap();
        let plain = fit(&y, &hp.with_spike(5.0), start).unwrap();
        assert_eq!(ladder.factors, plain.factors);
        assert_eq!(ladder.trace, plain.trace);
        assert_eq!(ladder.rungs.len(), 1);
    }

    #[test]
    fn ladder_warm_starts_each_rung() {
        let (y, state) = random_state(8, 12, 2, 4);
        let mut hp = Hyperparams::new(2);
        hp.lambda0_ladder = vec![1.0, 10.0];
        hp.max_iter = 30;
        let start = StartPoint {
            factors: state.factors.clone(),
            tau_tilde: state.tau_tilde.clone(),
            tau: state.tau.clone(),
        };
        let mut rung_results = Vec::new();
        let ladder =
            fit_ladder_with(&y, &hp, start.clone(), |_, r| rung_results.push(r.clone())).unwrap();
        let rung0 = fit(&y, &hp.with_spike(1.0), start).unwrap();
        assert_eq!(rung_results[0], rung0);
        let rung1 = fit(&y, &hp.with_spike(10.0), rung0.to_start()).unwrap();
        assert_eq!(ladder.factors, rung1.factors);
        assert_eq!(ladder.trace.len(), rung0.trace.len() + rung1.trace.len());
    }
}
