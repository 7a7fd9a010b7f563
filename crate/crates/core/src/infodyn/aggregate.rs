use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;

use super::{
    active_information_storage, fisher_combine, is_constant, mutual_information, surrogate_test,
    transfer_entropy, InfoKind, InfoParams, InfoResult, Measure, DEFAULT_P_FLOOR,
};
use crate::error::{Error, Result};
use crate::overlap::{EdgeExistenceMatrix, ExistenceSet};
use crate::rng;
use crate::scalar::Scalar;

/// How surrogate values tied with the observed statistic enter the per-edge p-value.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum TieRule {
    /// `(1 + #{surrogate >= observed}) / (1 + n)`; valid but conservative.
    Conservative,
    /// Ties broken by a uniform draw; exactly uniform under the null, so
    /// Fisher's combination stays calibrated when many edges are tied.
    #[default]
    Randomized,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct AggregateConfig {
    /// Surrogates per edge; zero skips significance testing.
    pub surrogates: usize,
    pub seed: u64,
    pub p_floor: f64,
    pub ties: TieRule,
}

impl Default for AggregateConfig {
    fn default() -> Self {
        Self {
            surrogates: 200,
            seed: 0,
            p_floor: DEFAULT_P_FLOOR,
            ties: TieRule::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AggregateResult<F> {
    pub measure: Measure,
    /// Mean over edges whose estimate succeeded; `population_size` is that count.
    pub result: InfoResult<F>,
    /// Succeeded edges with a constant series among those involved (0-bit estimates).
    pub degenerate: usize,
    /// Edges whose estimator preconditions failed.
    pub failed: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SeriesRole {
    Patent,
    Share,
}

impl SeriesRole {
    fn of(self, m: &EdgeExistenceMatrix) -> &[u8] {
        match self {
            SeriesRole::Patent => &m.patent,
            SeriesRole::Share => &m.share,
        }
    }
}

struct EdgeOutcome<F> {
    value: F,
    p_value: Option<F>,
    n_samples: usize,
    degenerate: bool,
}

fn estimate_edge<F: Scalar>(
    m: &EdgeExistenceMatrix,
    measure: Measure,
    params: &InfoParams,
    cfg: &AggregateConfig,
) -> Result<EdgeOutcome<F>> {
    use SeriesRole::*;
    // (source that gets shuffled, other series)
    let (source, other) = match measure {
        Measure::Mi | Measure::TePS => (Patent.of(m), Share.of(m)),
        Measure::TeSP => (Share.of(m), Patent.of(m)),
        Measure::AisP => (Patent.of(m), Patent.of(m)),
        Measure::AisS => (Share.of(m), Share.of(m)),
    };
    let statistic = |src: &[u8]| -> Result<(F, usize)> {
        let r = match measure {
            Measure::Mi => mutual_information::<F>(src, other, params.u)?,
            Measure::AisP | Measure::AisS => active_information_storage::<F>(src, params.k, params.tau_x)?,
            Measure::TePS | Measure::TeSP => transfer_entropy::<F>(src, other, params)?,
        };
        Ok((r.value_bits, r.n_samples))
    };
    let (value, n_samples) = statistic(source)?;
    let degenerate = is_constant(source) || is_constant(other);
    let p_value = if cfg.surrogates > 0 {
        let seed = rng::derive(
            cfg.seed,
            &[
                m.pair.as_u64(),
                measure.tag(),
                params.u as u64,
                params.k as u64,
                params.l as u64,
                params.tau_x as u64,
                params.tau_y as u64,
            ],
        );
        let t = surrogate_test(source, cfg.surrogates, seed, |s| statistic(s).map(|v| v.0))?;
        Some(match cfg.ties {
            TieRule::Conservative => t.p_value,
            TieRule::Randomized => t.randomized_p(),
        })
    } else {
        None
    };
    Ok(EdgeOutcome {
        value,
        p_value,
        n_samples,
        degenerate,
    })
}

/// Averages a per-edge measure over every matrix in `set`.
///
/// Per-edge p-values (when surrogates are requested) are combined with
/// Fisher's method, which treats edges as independent tests. Each edge's
/// surrogate stream is seeded from the master seed and the pair key, so the
/// result does not depend on the thread count.
pub fn aggregate_over_edges<F: Scalar>(
    set: &ExistenceSet,
    measure: Measure,
    params: &InfoParams,
    cfg: &AggregateConfig,
) -> Result<AggregateResult<F>> {
    params.validate()?;
    if set.is_empty() {
        return Err(Error::Empty("edge population".into()));
    }
    let outcomes: Vec<Result<EdgeOutcome<F>>> = set
        .matrices
        .par_iter()
        .map(|(_, m)| estimate_edge(m, measure, params, cfg))
        .collect();

    let mut sum = F::zero();
    let mut ok = 0usize;
    let mut degenerate = 0usize;
    let mut failed = 0usize;
    let mut n_samples = 0usize;
    let mut p_values = Vec::new();
    let mut last_err = None;
    for o in outcomes {
        match o {
            Ok(o) => {
                sum = sum + o.value;
                ok += 1;
                degenerate += o.degenerate as usize;
                n_samples = n_samples.max(o.n_samples);
                p_values.extend(o.p_value);
            }
            Err(e) => {
                failed += 1;
                last_err = Some(e);
            }
        }
    }
    if ok == 0 {
        return Err(Error::NoValidEdges {
            attempted: failed,
            last: last_err.map(|e| e.to_string()).unwrap_or_default(),
        });
    }
    let p_value = if p_values.is_empty() {
        None
    } else {
        Some(fisher_combine(&p_values, F::from_f64_lossy(cfg.p_floor))?)
    };
    let measure_kind: InfoKind = measure.kind();
    Ok(AggregateResult {
        measure,
        result: InfoResult {
            measure: measure_kind,
            value_bits: sum / F::from_usize_lossy(ok),
            p_value,
            n_samples,
            params: *params,
            population_size: ok,
        },
        degenerate,
        failed,
    })
}

/// Chooses the target history length that maximises population-average
/// active information storage; ties go to the shorter history.
///
/// Returns the chosen `k` and the whole `(k, AIS)` curve.
pub fn select_k_by_ais<F: Scalar>(
    set: &ExistenceSet,
    target: SeriesRole,
    k_max: usize,
    tau: usize,
) -> Result<(usize, Vec<(usize, F)>)> {
    let measure = match target {
        SeriesRole::Patent => Measure::AisP,
        SeriesRole::Share => Measure::AisS,
    };
    let cfg = AggregateConfig {
        surrogates: 0,
        ..Default::default()
    };
    let mut curve = Vec::new();
    for k in 1..=k_max {
        let params = InfoParams {
            k,
            tau_x: tau,
            ..Default::default()
        };
        match aggregate_over_edges::<F>(set, measure, &params, &cfg) {
            Ok(r) => curve.push((k, r.result.value_bits)),
            Err(Error::NoValidEdges { .. }) => break,
            Err(e) => return Err(e),
        }
    }
    let mut best: Option<(usize, F)> = None;
    for &(k, v) in &curve {
        if best.is_none_or(|(_, b)| v > b) {
            best = Some((k, v));
        }
    }
    let (k, _) = best.ok_or_else(|| Error::Empty("no history length admits an AIS estimate".into()))?;
    Ok((k, curve))
}

/// One line of the results file.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ResultRow {
    pub scope: Option<String>,
    pub measure: Measure,
    pub params: InfoParams,
    pub value_bits: f64,
    pub p_combined: Option<f64>,
    pub population: usize,
    pub degenerate: usize,
}

impl ResultRow {
    pub fn from_aggregate<F: Scalar>(scope: Option<String>, agg: &AggregateResult<F>) -> Self {
        Self {
            scope,
            measure: agg.measure,
            params: agg.result.params,
            value_bits: agg.result.value_bits.to_f64_lossy(),
            p_combined: agg.result.p_value.map(Scalar::to_f64_lossy),
            population: agg.result.population_size,
            degenerate: agg.degenerate,
        }
    }
}

/// Writes `measure,u,k,l,tau_x,tau_y,value_bits,p_combined,population,degenerate`,
/// with a trailing `scope` column when any row carries a scope.
pub fn write_results(path: impl AsRef<Path>, rows: &[ResultRow]) -> Result<()> {
    let path = path.as_ref();
    let io = |e| Error::io(path, e);
    let mut w = BufWriter::new(File::create(path).map_err(io)?);
    let scoped = rows.iter().any(|r| r.scope.is_some());
    write!(w, "measure,u,k,l,tau_x,tau_y,value_bits,p_combined,population,degenerate").map_err(io)?;
    writeln!(w, "{}", if scoped { ",scope" } else { "" }).map_err(io)?;
    for r in rows {
        let p = &r.params;
        write!(
            w,
            "{},{},{},{},{},{},{},{},{},{}",
            r.measure.label(),
            p.u,
            p.k,
            p.l,
            p.tau_x,
            p.tau_y,
            r.value_bits,
            r.p_combined.map(|v| v.to_string()).unwrap_or_default(),
            r.population,
            r.degenerate
        )
        .map_err(io)?;
        if scoped {
            write!(w, ",{}", r.scope.as_deref().unwrap_or("")).map_err(io)?;
        }
        writeln!(w).map_err(io)?;
    }
    w.flush().map_err(io)
}
