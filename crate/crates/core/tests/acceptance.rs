//! Acceptance suite. Every criterion prints one `criterion N: PASS|FAIL ...` line on stderr.
//!
//! Criteria 7-9 (planted recovery at desk scale) only fail the test run when
//! `BISSLB_STRICT_ACCEPTANCE=1`; otherwise their verdict is reported and the run continues.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use ndarray::{Array1, Array2};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use bisslb::metrics::{
    extract_biclusters, match_and_score, relevance_recovery, roc_auc, score_all, Bicluster,
    BiclusterSet, CeNorm, ScoreKind,
};
use bisslb::model::{gradient_wrt_a, gradient_wrt_b, log_likelihood};
use bisslb::optimizer::{fit_ladder, reorder_and_prune, rescale, update_mu};
use bisslb::penalty::{lambda_star, soft_threshold, threshold_upper, PenaltyParams};
use bisslb::simgen::{simulate_i, simulate_ii, SimConfig};
use bisslb::{BinaryMatrix, FactorPair, Hyperparams, SolverState};

/// Bypasses libtest's output capture so the verdict lines always show.
fn report(criterion: u32, pass: bool, detail: String) {
    let verdict = if pass { "PASS" } else { "FAIL" };
    let _ = writeln!(
        std::io::stderr(),
        "criterion {criterion}: {verdict} {detail}"
    );
}

fn strict() -> bool {
    std::env::var("BISSLB_STRICT_ACCEPTANCE").is_ok_and(|v| v == "1")
}

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    // Box-Muller keeps the test independent of distribution crates
    let u1: f64 = rng.random_range(f64::EPSILON..1.0);
    let u2: f64 = rng.random();
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize, sd: f64) -> Array2<f64> {
    Array2::from_shape_simple_fn((rows, cols), || sd * normal(rng))
}

fn random_y(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> BinaryMatrix {
    let bits: Vec<bool> = (0..rows * cols).map(|_| rng.random_bool(0.4)).collect();
    BinaryMatrix::from_bools(rows, cols, |i, j| bits[i * cols + j]).unwrap()
}

#[test]
fn criterion_01_gradient_matches_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let h = 1e-5;
    let mut worst: f64 = 0.0;
    for _ in 0..10 {
        let (rows, cols, k) = (
            rng.random_range(1..=8),
            rng.random_range(1..=10),
            rng.random_range(1..=3),
        );
        let y = random_y(&mut rng, rows, cols);
        let fp = FactorPair::new(
            random_matrix(&mut rng, rows, k, 0.7),
            random_matrix(&mut rng, cols, k, 0.7),
            Array1::from_iter((0..rows).map(|_| normal(&mut rng))),
        )
        .unwrap();
        let nll = |fp: &FactorPair| -log_likelihood(&y, fp).unwrap();
        for (which, grad) in [
            ("a", gradient_wrt_a(&y, &fp).unwrap()),
            ("b", gradient_wrt_b(&y, &fp).unwrap()),
        ] {
            let mut fd = Array2::zeros(grad.dim());
            for idx in ndarray::indices(grad.dim()) {
                let mut plus = fp.clone();
                let mut minus = fp.clone();
                let (p, m) = if which == "a" {
                    (&mut plus.a, &mut minus.a)
                } else {
                    (&mut plus.b, &mut minus.b)
                };
                p[idx] += h;
                m[idx] -= h;
                fd[idx] = (nll(&plus) - nll(&minus)) / (2.0 * h);
            }
            let diff = (&grad - &fd).mapv(|v| v * v).sum().sqrt();
            let scale = fd.mapv(|v| v * v).sum().sqrt().max(1e-8);
            worst = worst.max(diff / scale);
        }
    }
    let pass = worst < 1e-5;
    report(
        1,
        pass,
        format!("max relative error {worst:.2e} (< 1e-5) over 10 instances"),
    );
    assert!(pass);
}

fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

/// Row objective `sum_j y_ij mu_i - log(1 + exp(mu_i + a_i.b_j))`.
fn row_objective(y: &BinaryMatrix, fp: &FactorPair, i: usize, mu: f64) -> f64 {
    let ab = fp.a.row(i).dot(&fp.b.t());
    (0..y.cols())
        .map(|j| if y.get(i, j) { mu } else { 0.0 } - softplus(mu + ab[j]))
        .sum()
}

#[test]
fn criterion_02_mu_update_never_decreases_row_objective() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut violations = 0;
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let (rows, cols, k) = (
            rng.random_range(1..=6),
            rng.random_range(1..=15),
            rng.random_range(0..=3),
        );
        let y = random_y(&mut rng, rows, cols);
        let fp = FactorPair::new(
            random_matrix(&mut rng, rows, k, 1.0),
            random_matrix(&mut rng, cols, k, 1.0),
            Array1::from_iter((0..rows).map(|_| 3.0 * normal(&mut rng))),
        )
        .unwrap();
        let row = rng.random_range(0..rows);
        let before = row_objective(&y, &fp, row, fp.mu[row]);
        let mut state = SolverState::new(
            fp.clone(),
            Array1::from_elem(k, 0.5),
            Array1::from_elem(k, 0.5),
        )
        .unwrap();
        update_mu(&mut state, &y).unwrap();
        let after = row_objective(&y, &fp, row, state.factors.mu[row]);
        if after < before - 1e-12 {
            violations += 1;
            worst = worst.max(before - after);
        }
    }
    let pass = violations == 0;
    report(
        2,
        pass,
        format!("{violations} violations in 1000 draws (worst drop {worst:.2e})"),
    );
    assert!(pass);
}

/// `log[(1 - theta) psi(x | xi0) + theta psi(x | xi1)]` up to a constant, by log-sum-exp.
fn log_mixture(x: f64, theta: f64, xi0: f64, xi1: f64) -> f64 {
    let s0 = (1.0 - theta).ln() + (xi0 / 2.0).ln() - xi0 * x.abs();
    let s1 = theta.ln() + (xi1 / 2.0).ln() - xi1 * x.abs();
    let m = s0.max(s1);
    m + ((s0 - m).exp() + (s1 - m).exp()).ln()
}

/// Whether the global minimizer of `(z - x)^2 / (2 eta) - log[pi(x) / pi(0)]` is non-zero, by grid search.
fn brute_force_nonzero(z: f64, theta: f64, xi0: f64, xi1: f64, eta: f64) -> bool {
    let base = log_mixture(0.0, theta, xi0, xi1);
    let objective =
        |x: f64| (z - x) * (z - x) / (2.0 * eta) - (log_mixture(x, theta, xi0, xi1) - base);
    let at_zero = objective(0.0);
    // the minimizer shares the sign of z and never exceeds |z| in magnitude
    let n = 20_000;
    let step = z.abs() / n as f64;
    let (mut best_x, mut best) = (0.0, f64::INFINITY);
    for s in 1..=n {
        let x = z.signum() * step * s as f64;
        let v = objective(x);
        if v < best {
            best = v;
            best_x = x;
        }
    }
    // golden-section refinement around the best grid point
    let (mut lo, mut hi) = (best_x - z.signum() * step, best_x + z.signum() * step);
    if lo.abs() > hi.abs() {
        std::mem::swap(&mut lo, &mut hi);
    }
    let g = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..80 {
        let c = hi - g * (hi - lo);
        let d = lo + g * (hi - lo);
        if objective(c) < objective(d) {
            hi = d;
        } else {
            lo = c;
        }
    }
    let refined = objective((lo + hi) / 2.0);
    best.min(refined) < at_zero
}

/// The solver's rule, iterated to a fixed point in `lambda*`.
fn thresholded_nonzero(z: f64, pp: &PenaltyParams) -> bool {
    let delta = threshold_upper(pp);
    let mut x = z;
    for _ in 0..200 {
        let next = soft_threshold(z, lambda_star(x, pp), delta, pp.eta);
        if next == x {
            break;
        }
        x = next;
    }
    x != 0.0
}

#[test]
fn criterion_03_threshold_rule_matches_brute_force_prox() {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (mut agree, mut total) = (0, 0);
    while total < 500 {
        let eta = 10f64.powf(rng.random_range(-4.0..-1.0));
        let xi1 = rng.random_range(0.5..2.0);
        let xi0 = xi1 + (2.0 / eta.sqrt()) * 10f64.powf(rng.random_range(0.01..2.0));
        let theta = rng.random_range(0.05..0.95);
        let pp = PenaltyParams::new(theta, xi0, xi1, eta).unwrap();
        let delta = threshold_upper(&pp);
        let z = delta * rng.random_range(0.2..3.0) * if rng.random_bool(0.5) { 1.0 } else { -1.0 };
        if !(eta.sqrt() * (xi0 - xi1) > 2.0 && (z.abs() - delta).abs() > 1e-3) {
            continue;
        }
        total += 1;
        if thresholded_nonzero(z, &pp) == brute_force_nonzero(z, theta, xi0, xi1, eta) {
            agree += 1;
        }
    }
    let elapsed = started.elapsed();
    let rate = agree as f64 / total as f64;
    let pass = rate >= 0.99 && elapsed < Duration::from_secs(10);
    report(
        3,
        pass,
        format!(
            "{agree}/{total} decisions agree ({:.1}%, need 99%) in {:.2}s",
            100.0 * rate,
            elapsed.as_secs_f64()
        ),
    );
    assert!(pass);
}

fn random_set(rng: &mut ChaCha8Rng, n: usize, rows: usize, cols: usize) -> BiclusterSet {
    let clusters = (0..n)
        .map(|_| {
            let r: Vec<usize> = (0..rng.random_range(1..=4))
                .map(|_| rng.random_range(0..rows))
                .collect();
            let c: Vec<usize> = (0..rng.random_range(1..=4))
                .map(|_| rng.random_range(0..cols))
                .collect();
            Bicluster::new(r, c)
        })
        .collect();
    BiclusterSet::new(clusters)
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            out.push(q);
        }
    }
    out
}

/// Exhaustive counterpart of the matched score.
fn brute_force_score(truth: &BiclusterSet, est: &BiclusterSet, kind: ScoreKind) -> f64 {
    if truth.is_empty() && est.is_empty() {
        return 1.0;
    }
    if truth.is_empty() || est.is_empty() {
        return 0.0;
    }
    let (t, e) = (truth.cell_sets(), est.cell_sets());
    let n = t.len().max(e.len());
    // each weight as an unreduced fraction (numerator, denominator)
    let weight = |i: usize, j: usize| -> (u128, u128) {
        if i >= t.len() || j >= e.len() {
            return (0, 1);
        }
        let inter = t[i]
            .cells()
            .iter()
            .filter(|c| e[j].cells().contains(c))
            .count() as u128;
        match kind {
            ScoreKind::Ce => (inter, 1),
            ScoreKind::Cs => {
                let union = (t[i].len() + e[j].len()) as u128 - inter;
                if union == 0 {
                    (1, 1)
                } else {
                    (inter, union)
                }
            }
        }
    };
    let add = |(a, b): (u128, u128), (c, d): (u128, u128)| (a * d + c * b, b * d);
    let best = permutations(n)
        .iter()
        .map(|p| (0..n).map(|i| weight(i, p[i])).fold((0, 1), add))
        .reduce(|x, y| if x.0 * y.1 >= y.0 * x.1 { x } else { y })
        .unwrap();
    let best = best.0 as f64 / best.1 as f64;
    let normalizer = match kind {
        ScoreKind::Cs => n as f64,
        ScoreKind::Ce => {
            let count = |sets: &[bisslb::metrics::CellSet]| {
                let mut c: BTreeMap<(usize, usize), usize> = BTreeMap::new();
                for cell in sets.iter().flat_map(|s| s.cells().iter().copied()) {
                    *c.entry(cell).or_default() += 1;
                }
                c
            };
            let (ct, ce) = (count(&t), count(&e));
            let mut total = 0;
            for (cell, &a) in &ct {
                total += a.max(ce.get(cell).copied().unwrap_or(0));
            }
            total += ce
                .iter()
                .filter(|(cell, _)| !ct.contains_key(cell))
                .map(|(_, &b)| b)
                .sum::<usize>();
            total as f64
        }
    };
    best / normalizer
}

#[test]
fn criterion_04_hungarian_matches_exhaustive_search() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut mismatches = 0;
    for _ in 0..200 {
        let truth = {
            let n = rng.random_range(1..=6);
            random_set(&mut rng, n, 8, 8)
        };
        let est = {
            let n = rng.random_range(1..=6);
            random_set(&mut rng, n, 8, 8)
        };
        for kind in [ScoreKind::Ce, ScoreKind::Cs] {
            if match_and_score(&truth, &est, kind, CeNorm::Union)
                != brute_force_score(&truth, &est, kind)
            {
                mismatches += 1;
            }
        }
    }
    let pass = mismatches == 0;
    report(
        4,
        pass,
        format!("{mismatches} mismatches in 200 trials x {{CE, CS}} (exact equality)"),
    );
    assert!(pass);
}

#[test]
fn criterion_05_auc_matches_pairwise_statistic() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let n = rng.random_range(2..=200);
        // coarse scores force ties
        let scores: Vec<f64> = (0..n)
            .map(|_| (rng.random_range(0.0..1.0f64) * 20.0).floor() / 20.0)
            .collect();
        let mut labels: Vec<bool> = (0..n).map(|_| rng.random_bool(0.3)).collect();
        labels[0] = true;
        labels[1] = false;
        let (mut num, mut pairs) = (0.0, 0.0);
        for i in 0..n {
            for j in 0..n {
                if labels[i] && !labels[j] {
                    pairs += 1.0;
                    num += if scores[i] > scores[j] {
                        1.0
                    } else if scores[i] == scores[j] {
                        0.5
                    } else {
                        0.0
                    };
                }
            }
        }
        worst = worst.max((roc_auc(&scores, &labels).unwrap() - num / pairs).abs());
    }
    let separated = roc_auc(&[0.9, 0.8, 0.3, 0.1], &[true, true, false, false]).unwrap();
    let pass = worst <= 1e-12 && separated == 1.0;
    report(
        5,
        pass,
        format!("max deviation {worst:.2e} over 100 trials; perfect separation = {separated}"),
    );
    assert!(pass);
}

fn fuzzed_state(rng: &mut ChaCha8Rng) -> SolverState {
    let (rows, cols, k) = (
        rng.random_range(1..=6),
        rng.random_range(1..=6),
        rng.random_range(0..=6),
    );
    let mut a = random_matrix(rng, rows, k, 1.0);
    let mut b = random_matrix(rng, cols, k, 1.0);
    for c in 0..k {
        match rng.random_range(0..4) {
            0 => a.column_mut(c).fill(0.0),
            1 => b.column_mut(c).fill(0.0),
            _ => {}
        }
        for v in a.column_mut(c).iter_mut().chain(b.column_mut(c).iter_mut()) {
            if rng.random_bool(0.3) {
                *v = 0.0;
            }
        }
    }
    let fp = FactorPair::new(a, b, Array1::zeros(rows)).unwrap();
    let tau_tilde = Array1::from_iter((0..k).map(|_| (rng.random_range(0..4) as f64) / 4.0));
    let tau = Array1::from_iter((0..k).map(|_| rng.random_range(0.0..1.0)));
    let mut state = SolverState::new(fp, tau_tilde, tau).unwrap();
    state.a_prev = random_matrix(rng, rows, k, 1.0);
    state.b_prev = random_matrix(rng, cols, k, 1.0);
    state
}

#[test]
fn criterion_06_metric_identities_and_state_invariants() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut identity_failures = 0;
    for _ in 0..100 {
        let n = rng.random_range(1..=6);
        let set = random_set(&mut rng, n, 10, 10);
        let s = score_all(&set, &set, CeNorm::Union);
        let (rel, rec) = relevance_recovery(&set, &set);
        let close = |v: f64| (v - 1.0).abs() <= 1e-12;
        if !(close(s.cs) && close(s.ce) && close(rel) && close(rec)) {
            identity_failures += 1;
        }
    }

    let mut rescale_worst = 0.0f64;
    let mut coherence_failures = 0;
    for _ in 0..1000 {
        let mut state = fuzzed_state(&mut rng);
        let before = state.factors.a.dot(&state.factors.b.t());
        let outcome = reorder_and_prune(&mut state);
        let k = outcome.kept.len();
        let ok = state.is_coherent()
            && state.factors.a.ncols() == k
            && state.a_prev.ncols() == k
            && state.b_prev.ncols() == k
            && state.tau.len() == k
            && state.tau_tilde.windows(2).into_iter().all(|w| w[0] >= w[1])
            && (0..k).all(|c| {
                state.factors.a.column(c).iter().any(|&v| v != 0.0)
                    && state.factors.b.column(c).iter().any(|&v| v != 0.0)
            });
        if !ok {
            coherence_failures += 1;
        }
        // pruned columns carried a zero rank-one term, so AB^T is unchanged by pruning as well
        rescale(&mut state);
        let after = state.factors.a.dot(&state.factors.b.t());
        rescale_worst = rescale_worst.max(
            (&after - &before)
                .iter()
                .fold(0.0f64, |m, v| m.max(v.abs())),
        );
        for c in 0..k {
            let na: f64 = state.factors.a.column(c).iter().map(|v| v.abs()).sum();
            let nb: f64 = state.factors.b.column(c).iter().map(|v| v.abs()).sum();
            if (na - nb).abs() > 1e-12 * na.max(1.0) {
                coherence_failures += 1;
            }
        }
    }
    let pass = identity_failures == 0 && rescale_worst <= 1e-12 && coherence_failures == 0;
    report(
        6,
        pass,
        format!(
            "score(X, X) failures {identity_failures}/100; rescale max |dAB^T| {rescale_worst:.1e}; \
             coherence failures {coherence_failures}/1000"
        ),
    );
    assert!(pass);
}

struct RunOutcome {
    k_hat: usize,
    cs: f64,
    secs: f64,
}

fn planted_run(cfg: SimConfig, logistic: bool, k_star: usize) -> RunOutcome {
    let started = Instant::now();
    let (y, truth) = if logistic {
        simulate_ii(&cfg)
    } else {
        simulate_i(&cfg)
    }
    .unwrap();
    let fit = fit_ladder(&y, &Hyperparams::new(k_star)).unwrap();
    let scores = score_all(
        &truth.to_set(),
        &extract_biclusters(&fit.factors, false),
        CeNorm::Union,
    );
    RunOutcome {
        k_hat: fit.k_hat,
        cs: scores.cs,
        secs: started.elapsed().as_secs_f64(),
    }
}

fn finish_soft(criterion: u32, pass: bool, detail: String) {
    report(criterion, pass, detail);
    if strict() {
        assert!(pass);
    }
}

#[test]
fn criterion_07_noise_free_planted_recovery() {
    let runs: Vec<RunOutcome> = (0..20u64)
        .into_par_iter()
        .map(|seed| planted_run(SimConfig::new(60, 150, 3, seed), false, 10))
        .collect();
    let hits = runs.iter().filter(|r| r.k_hat == 3 && r.cs >= 0.95).count();
    let slowest = runs.iter().map(|r| r.secs).fold(0.0, f64::max);
    let k_hats: Vec<usize> = runs.iter().map(|r| r.k_hat).collect();
    let pass = hits >= 18 && slowest < 30.0;
    finish_soft(
        7,
        pass,
        format!("{hits}/20 runs with K_hat = 3 and CS >= 0.95 (need 18); slowest {slowest:.1}s; K_hat {k_hats:?}"),
    );
}

#[test]
fn criterion_08_noise_robustness() {
    let started = Instant::now();
    let mean_cs = |noise: f64| {
        let runs: Vec<RunOutcome> = (0..20u64)
            .into_par_iter()
            .map(|seed| {
                planted_run(
                    SimConfig::new(100, 300, 5, seed).with_noise(noise),
                    false,
                    10,
                )
            })
            .collect();
        runs.iter().map(|r| r.cs).sum::<f64>() / runs.len() as f64
    };
    let low = mean_cs(0.05);
    let high = mean_cs(0.15);
    let elapsed = started.elapsed().as_secs_f64();
    let pass = low >= 0.7 && high >= low - 0.35 && elapsed < 600.0;
    finish_soft(
        8,
        pass,
        format!("mean CS {low:.3} at noise 0.05 (need 0.7), {high:.3} at 0.15 (need >= {:.3}); {elapsed:.0}s", low - 0.35),
    );
}

fn median(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len();
    if n % 2 == 1 {
        xs[n / 2]
    } else {
        (xs[n / 2 - 1] + xs[n / 2]) / 2.0
    }
}

#[test]
fn criterion_09_k_recovery_trend() {
    let mut parts = Vec::new();
    let mut pass = true;
    for mu in [-5.0, -3.0] {
        let runs: Vec<RunOutcome> = (0..10u64)
            .into_par_iter()
            .map(|seed| planted_run(SimConfig::new(100, 300, 5, seed).with_mu(mu), true, 10))
            .collect();
        let logs: Vec<f64> = runs
            .iter()
            .map(|r| (r.k_hat as f64).ln() / 5f64.ln())
            .collect();
        let med = median(logs);
        pass &= (0.8..=1.2).contains(&med);
        let k_hats: Vec<usize> = runs.iter().map(|r| r.k_hat).collect();
        parts.push(format!(
            "mu = {mu}: median log5 K_hat {med:.3}, K_hat {k_hats:?}"
        ));
    }
    finish_soft(9, pass, format!("{} (need [0.8, 1.2])", parts.join("; ")));
}

fn files_in(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out: Vec<(String, Vec<u8>)> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (
                e.file_name().to_string_lossy().into_owned(),
                std::fs::read(e.path()).unwrap(),
            )
        })
        .collect();
    out.sort();
    out
}

#[test]
fn criterion_10_bench_runs_are_bitwise_reproducible() {
    let tmp = tempfile::tempdir().unwrap();
    let first = tmp.path().join("first");
    let second = tmp.path().join("second");
    let bin = env!("CARGO_BIN_EXE_bisslb");
    let status = Command::new(bin)
        .args([
            "bench", "--sim", "1", "--i", "40", "--j", "80", "--k", "2", "--k-star", "5",
        ])
        .args([
            "--noise-grid",
            "0:0.1:0.05",
            "--replicates",
            "3",
            "--max-iter",
            "100",
            "--seed",
            "9",
        ])
        .arg("--out")
        .arg(&first)
        .env("BISSLB_THREADS", "1")
        .status()
        .unwrap();
    assert!(status.success());
    let status = Command::new(bin)
        .arg("replay")
        .arg("--manifest")
        .arg(first.join("manifest.json"))
        .arg("--out")
        .arg(&second)
        .env("BISSLB_THREADS", "3")
        .status()
        .unwrap();
    assert!(status.success());
    let (a, b) = (files_in(&first), files_in(&second));
    let names: Vec<&str> = a.iter().map(|(n, _)| n.as_str()).collect();
    let pass = a == b && names == ["manifest.json", "replicates.csv", "summary.csv"];
    report(
        10,
        pass,
        format!(
            "files {names:?} identical across two runs (1 vs 3 threads): {}",
            a == b
        ),
    );
    assert!(pass);
}

#[test]
fn shuffled_cluster_order_does_not_change_scores() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..50 {
        let set = {
            let n = rng.random_range(1..=6);
            random_set(&mut rng, n, 12, 12)
        };
        let mut clusters = set.clusters().to_vec();
        clusters.shuffle(&mut rng);
        let other = BiclusterSet::new(clusters);
        assert!((match_and_score(&set, &other, ScoreKind::Cs, CeNorm::Union) - 1.0).abs() < 1e-12);
    }
}
