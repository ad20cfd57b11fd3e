//! Monte Carlo benchmark: simulate, fit the spike ladder, score against the planted truth.
//!
//! Replicate `r` at every grid level uses seed `seed + r`. Replicates run on a rayon pool and are
//! collected in grid order, so the output does not depend on the thread count.

use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io;
use crate::metrics::{extract_biclusters, score_all, CeNorm, Scores};
use crate::model::Hyperparams;
use crate::optimizer::fit_ladder;
use crate::simgen::{simulate_i, simulate_ii, SimConfig};

/// Which generator drives the benchmark; the grid level is its noise rate or logit offset.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Simulation {
    /// Flip noise; levels are flip fractions.
    Flip,
    /// Logistic generator; levels are the offset `mu`.
    Logistic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchConfig {
    pub simulation: Simulation,
    pub rows: usize,
    pub cols: usize,
    pub k: usize,
    pub row_sizes: (usize, usize),
    pub col_sizes: (usize, usize),
    pub levels: Vec<f64>,
    pub replicates: usize,
    pub seed: u64,
    pub hyperparams: Hyperparams,
    #[serde(default)]
    pub ce_norm: CeNorm,
}

impl BenchConfig {
    pub fn new(simulation: Simulation, rows: usize, cols: usize, k: usize, k_star: usize) -> Self {
        BenchConfig {
            simulation,
            rows,
            cols,
            k,
            row_sizes: (5, 20),
            col_sizes: (10, 50),
            levels: vec![0.0],
            replicates: 1,
            seed: 0,
            hyperparams: Hyperparams::new(k_star),
            ce_norm: CeNorm::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.levels.is_empty() {
            return Err(Error::Usage("benchmark grid is empty".into()));
        }
        if self.replicates == 0 {
            return Err(Error::Usage("need at least one replicate".into()));
        }
        self.hyperparams.validate()
    }

    fn sim_config(&self, level: f64, replicate: usize) -> SimConfig {
        let mut cfg = SimConfig::new(
            self.rows,
            self.cols,
            self.k,
            self.seed.wrapping_add(replicate as u64),
        );
        cfg.row_sizes = self.row_sizes.0..=self.row_sizes.1;
        cfg.col_sizes = self.col_sizes.0..=self.col_sizes.1;
        match self.simulation {
            Simulation::Flip => cfg.with_noise(level),
            Simulation::Logistic => cfg.with_mu(level),
        }
    }
}

/// Parses `start:stop:step` (inclusive of `stop` up to rounding) or a comma-separated list.
pub fn parse_grid(spec: &str) -> Result<Vec<f64>> {
    let spec = spec.trim();
    if spec.is_empty() {
        return Err(Error::Usage("benchmark grid is empty".into()));
    }
    let number = |s: &str| -> Result<f64> {
        s.trim()
            .parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| Error::Usage(format!("bad grid value {s:?}")))
    };
    if spec.contains(':') {
        let parts: Vec<&str> = spec.split(':').collect();
        if parts.len() != 3 {
            return Err(Error::Usage(format!(
                "range grid must be start:stop:step, got {spec:?}"
            )));
        }
        let (start, stop, step) = (number(parts[0])?, number(parts[1])?, number(parts[2])?);
        if step <= 0.0 {
            return Err(Error::Usage(format!(
                "grid step must be positive, got {step}"
            )));
        }
        if stop < start {
            return Err(Error::Usage(format!(
                "grid stop {stop} is below start {start}"
            )));
        }
        let n = ((stop - start) / step + 1e-9).floor() as usize;
        // round to the step's decimal precision so 0.1 + 0.2 style drift never reaches the output
        Ok((0..=n).map(|i| round12(start + i as f64 * step)).collect())
    } else {
        spec.split(',').map(number).collect()
    }
}

fn round12(v: f64) -> f64 {
    (v * 1e12).round() / 1e12
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReplicateResult {
    pub level: f64,
    pub replicate: usize,
    pub seed: u64,
    pub k_hat: usize,
    pub scores: Scores,
    pub converged: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub level: f64,
    pub n: usize,
    pub mean: [f64; 6],
    pub sd: [f64; 6],
}

/// Column names of [`Summary::mean`] and [`Summary::sd`].
pub const SUMMARY_FIELDS: [&str; 6] = ["ce", "cs", "relevance", "recovery", "k_hat", "log_k_k_hat"];

#[derive(Debug, Clone, PartialEq)]
pub struct BenchReport {
    pub replicates: Vec<ReplicateResult>,
    pub summary: Vec<Summary>,
}

pub fn run_replicate(cfg: &BenchConfig, level: f64, replicate: usize) -> Result<ReplicateResult> {
    let sim = cfg.sim_config(level, replicate);
    let (y, truth) = match cfg.simulation {
        Simulation::Flip => simulate_i(&sim)?,
        Simulation::Logistic => simulate_ii(&sim)?,
    };
    let fit = fit_ladder(&y, &cfg.hyperparams)?;
    let scores = score_all(
        &truth.to_set(),
        &extract_biclusters(&fit.factors, false),
        cfg.ce_norm,
    );
    Ok(ReplicateResult {
        level,
        replicate,
        seed: sim.seed,
        k_hat: fit.k_hat,
        scores,
        converged: fit.converged,
    })
}

/// Runs the grid on `threads` workers (`None`: rayon's default).
pub fn run(cfg: &BenchConfig, threads: Option<usize>) -> Result<BenchReport> {
    cfg.validate()?;
    let jobs: Vec<(f64, usize)> = cfg
        .levels
        .iter()
        .flat_map(|&l| (0..cfg.replicates).map(move |r| (l, r)))
        .collect();
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| Error::InvalidArgument(format!("cannot build thread pool: {e}")))?;
    let results: Vec<Result<ReplicateResult>> = pool.install(|| {
        jobs.par_iter()
            .map(|&(l, r)| run_replicate(cfg, l, r))
            .collect()
    });
    let replicates = results.into_iter().collect::<Result<Vec<_>>>()?;
    let summary = summarize(cfg, &replicates);
    Ok(BenchReport {
        replicates,
        summary,
    })
}

fn log_base(k_hat: usize, k: usize) -> f64 {
    if k < 2 {
        return f64::NAN;
    }
    (k_hat as f64).ln() / (k as f64).ln()
}

fn mean_sd(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, f64::NAN);
    }
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

pub fn summarize(cfg: &BenchConfig, replicates: &[ReplicateResult]) -> Vec<Summary> {
    cfg.levels
        .iter()
        .map(|&level| {
            let rows: Vec<&ReplicateResult> =
                replicates.iter().filter(|r| r.level == level).collect();
            let mut mean = [0.0; 6];
            let mut sd = [0.0; 6];
            for f in 0..6 {
                let xs: Vec<f64> = rows
                    .iter()
                    .map(|r| match f {
                        0 => r.scores.ce,
                        1 => r.scores.cs,
                        2 => r.scores.relevance,
                        3 => r.scores.recovery,
                        4 => r.k_hat as f64,
                        _ => log_base(r.k_hat, cfg.k),
                    })
                    .collect();
                (mean[f], sd[f]) = mean_sd(&xs);
            }
            Summary {
                level,
                n: rows.len(),
                mean,
                sd,
            }
        })
        .collect()
}

pub fn render_replicates(report: &BenchReport, k: usize) -> String {
    let mut out =
        String::from("level,replicate,seed,k_hat,log_k_k_hat,ce,cs,relevance,recovery,converged\n");
    for r in &report.replicates {
        let _ = writeln!(
            out,
            "{:?},{},{},{},{:?},{:?},{:?},{:?},{:?},{}",
            r.level,
            r.replicate,
            r.seed,
            r.k_hat,
            log_base(r.k_hat, k),
            r.scores.ce,
            r.scores.cs,
            r.scores.relevance,
            r.scores.recovery,
            r.converged
        );
    }
    out
}

pub fn render_summary(report: &BenchReport) -> String {
    let mut out = String::from("level,n");
    for f in SUMMARY_FIELDS {
        let _ = write!(out, ",{f}_mean,{f}_sd");
    }
    out.push('\n');
    for s in &report.summary {
        let _ = write!(out, "{:?},{}", s.level, s.n);
        for f in 0..6 {
            let _ = write!(out, ",{:?},{:?}", s.mean[f], s.sd[f]);
        }
        out.push('\n');
    }
    out
}

/// Writes `replicates.csv`, `summary.csv` and `manifest.json` into `dir`.
pub fn write_report(dir: &Path, cfg: &BenchConfig, report: &BenchReport) -> Result<()> {
    io::ensure_dir(dir)?;
    let write = |name: &str, text: String| {
        let path = dir.join(name);
        std::fs::write(&path, text).map_err(|e| Error::io(path, e))
    };
    write("replicates.csv", render_replicates(report, cfg.k))?;
    write("summary.csv", render_summary(report))?;
    let run = serde_json::json!({ "command": "bench", "config": cfg });
    // same shape as the `bench` variant of the CLI run spec, so `replay` accepts it
    io::write_manifest(&dir.join("manifest.json"), &io::Manifest::new(run, None))
}
