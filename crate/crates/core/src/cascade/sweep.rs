use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;

use super::engine::{CascadeEngine, CascadeGraph, FailureRecord};
use super::params::CascadeParams;
use crate::error::{Error, Result};
use crate::rng;
use crate::scalar::Scalar;
use crate::stats::mean_se;

/// 0.2, 0.4, ..., 1.0
pub fn default_alpha_grid<F: Scalar>() -> Vec<F> {
    (1..=5).map(|i| F::from_f64_lossy(i as f64 * 0.2)).collect()
}

/// 1, 2, ..., 5
pub fn default_gamma_grid<F: Scalar>() -> Vec<F> {
    (1..=5).map(|i| F::from_f64_lossy(i as f64)).collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepConfig<F> {
    pub alphas: Vec<F>,
    pub gammas: Vec<F>,
    pub steps: usize,
    pub shock_fraction: F,
    pub replicates: usize,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRow<F> {
    pub alpha: F,
    pub gamma: F,
    pub replicate: usize,
    pub seed: u64,
    pub mean_downtime: F,
    pub failure_proportion: F,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepCell {
    pub alpha: f64,
    pub gamma: f64,
    pub runs: usize,
    pub mean_downtime: f64,
    pub mean_downtime_se: f64,
    pub failure_proportion: f64,
    pub failure_proportion_se: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepTable<F> {
    /// Ordered by alpha, then gamma, then replicate.
    pub rows: Vec<SweepRow<F>>,
    /// Ordered by alpha, then gamma.
    pub cells: Vec<SweepCell>,
}

impl<F: Scalar> SweepTable<F> {
    pub fn cell(&self, alpha_index: usize, gamma_index: usize, n_gammas: usize) -> &SweepCell {
        &self.cells[alpha_index * n_gammas + gamma_index]
    }
}

/// Runs every `(alpha, gamma, replicate)` combination independently.
///
/// The seed of each run is derived from the master seed and the run's grid
/// coordinates, and is reported in its row.
pub fn sweep<F: Scalar>(graph: &CascadeGraph, cfg: &SweepConfig<F>) -> Result<SweepTable<F>> {
    if cfg.alphas.is_empty() || cfg.gammas.is_empty() {
        return Err(Error::InvalidParam("sweep grids must be nonempty".into()));
    }
    if cfg.replicates == 0 {
        return Err(Error::InvalidParam("at least one replicate is required".into()));
    }
    let jobs: Vec<(usize, usize, usize)> = (0..cfg.alphas.len())
        .flat_map(|a| (0..cfg.gammas.len()).flat_map(move |g| (0..cfg.replicates).map(move |r| (a, g, r))))
        .collect();
    let rows = jobs
        .par_iter()
        .map(|&(a, g, r)| {
            let seed = rng::derive(cfg.seed, &[rng::tag::SWEEP, a as u64, g as u64, r as u64]);
            let params = CascadeParams {
                alpha: cfg.alphas[a],
                gamma: cfg.gammas[g],
                steps: cfg.steps,
                shock_fraction: cfg.shock_fraction,
                seed,
            };
            let out = CascadeEngine::new(graph, params)?.run(FailureRecord::Summary)?;
            Ok(SweepRow {
                alpha: params.alpha,
                gamma: params.gamma,
                replicate: r,
                seed,
                mean_downtime: out.metrics.mean_downtime,
                failure_proportion: out.metrics.failure_proportion,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let cells = rows
        .chunks(cfg.replicates)
        .map(|runs| {
            let tau: Vec<f64> = runs.iter().map(|r| r.mean_downtime.to_f64_lossy()).collect();
            let phi: Vec<f64> = runs.iter().map(|r| r.failure_proportion.to_f64_lossy()).collect();
            let (mt, st) = mean_se(&tau);
            let (mp, sp) = mean_se(&phi);
            SweepCell {
                alpha: runs[0].alpha.to_f64_lossy(),
                gamma: runs[0].gamma.to_f64_lossy(),
                runs: runs.len(),
                mean_downtime: mt,
                mean_downtime_se: st,
                failure_proportion: mp,
                failure_proportion_se: sp,
            }
        })
        .collect();
    Ok(SweepTable { rows, cells })
}

/// `alpha,gamma,replicate,seed,mean_downtime,failure_proportion`
pub fn write_sweep_csv<F: Scalar>(path: impl AsRef<Path>, table: &SweepTable<F>) -> Result<()> {
    let path = path.as_ref();
    let io = |e| Error::io(path, e);
    let mut w = BufWriter::new(File::create(path).map_err(io)?);
    writeln!(w, "alpha,gamma,replicate,seed,mean_downtime,failure_proportion").map_err(io)?;
    for r in &table.rows {
        writeln!(
            w,
            "{},{},{},{},{},{}",
            r.alpha, r.gamma, r.replicate, r.seed, r.mean_downtime, r.failure_proportion
        )
        .map_err(io)?;
    }
    w.flush().map_err(io)
}
