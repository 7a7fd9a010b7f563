use log::warn;
use rand::seq::index;
use rayon::prelude::*;
use serde::Serialize;

use super::params::{CascadeParams, StepParams};
use crate::error::{Error, Result};
use crate::graph::Network;
use crate::rng;
use crate::scalar::Scalar;

/// Full failure matrices above this many bits are not kept (1 GiB).
pub const DEFAULT_BIT_BUDGET: u128 = 1 << 33;

/// Propagation structure derived from a directed shareholding network.
///
/// `shareholders(i)` lists the distinct nodes that hold shares in `i`;
/// `investees[j]` is how many distinct investees `j` holds.
#[derive(Clone, Debug)]
pub struct CascadeGraph {
    offsets: Vec<usize>,
    shareholders: Vec<u32>,
    investees: Vec<u32>,
}

impl CascadeGraph {
    pub fn from_network(net: &Network) -> Result<Self> {
        if !net.is_directed() {
            return Err(Error::InvalidParam("cascades need a directed network".into()));
        }
        Ok(Self::from_edges(net.node_count(), net.edges()))
    }

    /// Builds from `(investee, shareholder)` pairs; duplicates and self-loops are ignored.
    pub fn from_edges(n: usize, edges: impl IntoIterator<Item = (u32, u32)>) -> Self {
        let mut edges: Vec<(u32, u32)> = edges.into_iter().filter(|(s, t)| s != t).collect();
        edges.sort_unstable();
        edges.dedup();
        let mut offsets = vec![0usize; n + 1];
        let mut investees = vec![0u32; n];
        for &(s, t) in &edges {
            offsets[s as usize + 1] += 1;
            investees[t as usize] += 1;
        }
        for i in 0..n {
            offsets[i + 1] += offsets[i];
        }
        let shareholders = edges.into_iter().map(|(_, t)| t).collect();
        Self {
            offsets,
            shareholders,
            investees,
        }
    }

    pub fn node_count(&self) -> usize {
        self.investees.len()
    }

    pub fn edge_count(&self) -> usize {
        self.shareholders.len()
    }

    pub fn shareholders(&self, i: usize) -> &[u32] {
        &self.shareholders[self.offsets[i]..self.offsets[i + 1]]
    }

    pub fn investee_count(&self, j: usize) -> u32 {
        self.investees[j]
    }
}

/// Exactly `floor(fraction * n)` distinct nodes chosen uniformly, sorted.
pub fn init_shock<F: Scalar>(n: usize, fraction: F, seed: u64) -> Vec<u32> {
    let count = ((fraction.to_f64_lossy() * n as f64) + 1e-9).floor() as usize;
    let count = count.min(n);
    let mut rng = rng::stream(seed, &[rng::tag::SHOCK]);
    let mut picked: Vec<u32> = index::sample(&mut rng, n, count)
        .into_iter()
        .map(|i| i as u32)
        .collect();
    picked.sort_unstable();
    picked
}

/// One node's update: returns `(x, p_t)` where `x = m k / d` is the impulse from
/// `m` investees that failed in the previous step out of `d`, and
/// `p_t = x + p_{t-1} (1 - x) / (1 + r)`. Nodes without investees stay at zero.
#[inline]
pub fn update_probability<F: Scalar>(failed_investees: u32, investees: u32, step: &StepParams<F>, p_prev: F) -> (F, F) {
    if investees == 0 {
        return (F::zero(), F::zero());
    }
    let x = if failed_investees == 0 {
        F::zero()
    } else {
        F::from_u32(failed_investees).unwrap() * step.k_step / F::from_u32(investees).unwrap()
    };
    let carried = if p_prev == F::zero() {
        F::zero()
    } else {
        p_prev * (F::one() - x) / (F::one() + step.r_step)
    };
    (x, x + carried)
}

#[inline]
fn bit(words: &[u64], i: usize) -> bool {
    words[i >> 6] >> (i & 63) & 1 == 1
}

#[inline]
fn set_bit(words: &mut [u64], i: usize) {
    words[i >> 6] |= 1 << (i & 63);
}

/// Mutable simulation state at the end of step `t`.
#[derive(Clone, Debug)]
pub struct CascadeState<F> {
    pub t: usize,
    /// Failure probability of every node; ignored once a node has failed.
    pub p: Vec<F>,
    /// Current failure-matrix row, bit-packed (bit `i` of word `i / 64`).
    pub failed: Vec<u64>,
    /// Nodes that failed during step `t` (the shock at `t = 0`), sorted.
    pub newly_failed: Vec<u32>,
    pub failed_count: usize,
    impulses: Vec<u32>,
}

impl<F: Scalar> CascadeState<F> {
    pub fn new(n: usize, shock: &[u32]) -> Self {
        let mut failed = vec![0u64; n.div_ceil(64)];
        for &i in shock {
            set_bit(&mut failed, i as usize);
        }
        Self {
            t: 0,
            p: vec![F::zero(); n],
            failed,
            newly_failed: shock.to_vec(),
            failed_count: shock.len(),
            impulses: vec![0; n],
        }
    }

    pub fn is_failed(&self, i: usize) -> bool {
        bit(&self.failed, i)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FailureRecord {
    /// Per-step counts only.
    Summary,
    /// Keep every row unless `n * T` exceeds the bit budget.
    Full { budget_bits: u128 },
}

/// `T x N` failure matrix; row `t - 1` is the failed set after step `t`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FailureMatrix {
    pub nodes: usize,
    pub steps: usize,
    pub(crate) words_per_row: usize,
    pub(crate) words: Vec<u64>,
}

impl FailureMatrix {
    pub fn row(&self, r: usize) -> &[u64] {
        &self.words[r * self.words_per_row..(r + 1) * self.words_per_row]
    }

    pub fn get(&self, r: usize, i: usize) -> bool {
        bit(self.row(r), i)
    }

    pub fn row_count(&self, r: usize) -> usize {
        self.row(r).iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn total(&self) -> usize {
        (0..self.steps).map(|r| self.row_count(r)).sum()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CascadeMetrics<F> {
    /// Mean fraction of (node, step) cells spent failed, net of the shock.
    pub mean_downtime: F,
    /// Fraction of nodes failed at the end, net of the shock.
    pub failure_proportion: F,
    pub per_step_new_failures: Vec<usize>,
    pub shock_size: usize,
    pub nodes: usize,
}

impl<F: Scalar> CascadeMetrics<F> {
    fn from_counts(nodes: usize, shock_size: usize, per_step_new_failures: Vec<usize>) -> Self {
        let steps = per_step_new_failures.len();
        if nodes == 0 {
            return Self {
                mean_downtime: F::zero(),
                failure_proportion: F::zero(),
                per_step_new_failures,
                shock_size,
                nodes,
            };
        }
        // sum over rows of (failed in row - shock), exact in integers
        let mut cumulative = 0u128;
        let mut excess_cells = 0u128;
        for &c in &per_step_new_failures {
            cumulative += c as u128;
            excess_cells += cumulative;
        }
        let cells = nodes as f64 * steps as f64;
        Self {
            mean_downtime: F::from_f64_lossy(excess_cells as f64 / cells),
            failure_proportion: F::from_f64_lossy(cumulative as f64 / nodes as f64),
            per_step_new_failures,
            shock_size,
            nodes,
        }
    }

    pub fn empty() -> Self {
        Self::from_counts(0, 0, Vec::new())
    }
}

#[derive(Clone, Debug)]
pub struct RunOutput<F> {
    pub metrics: CascadeMetrics<F>,
    pub matrix: Option<FailureMatrix>,
    /// Set when a full matrix was requested but exceeded the bit budget.
    pub matrix_refused: bool,
}

pub struct CascadeEngine<'g, F> {
    graph: &'g CascadeGraph,
    params: CascadeParams<F>,
    step: StepParams<F>,
}

impl<'g, F: Scalar> CascadeEngine<'g, F> {
    pub fn new(graph: &'g CascadeGraph, params: CascadeParams<F>) -> Result<Self> {
        params.validate()?;
        let step = params.step_params()?;
        Ok(Self { graph, params, step })
    }

    pub fn step_params(&self) -> &StepParams<F> {
        &self.step
    }

    pub fn initial_state(&self) -> CascadeState<F> {
        let n = self.graph.node_count();
        let shock = init_shock(n, self.params.shock_fraction, self.params.seed);
        CascadeState::new(n, &shock)
    }

    /// Advances `state` by one step.
    ///
    /// Each node that has not failed gets the impulse from investees that
    /// failed in the previous step, and fails if its uniform draw for this
    /// `(node, step)` falls below its updated probability.
    pub fn step(&self, state: &mut CascadeState<F>) {
        let t = state.t + 1;
        let mut touched = Vec::new();
        for &i in &state.newly_failed {
            for &j in self.graph.shareholders(i as usize) {
                if state.impulses[j as usize] == 0 {
                    touched.push(j);
                }
                state.impulses[j as usize] += 1;
            }
        }

        let graph = self.graph;
        let step = &self.step;
        let seed = self.params.seed;
        let failed = &state.failed;
        let impulses = &state.impulses;
        let newly: Vec<u32> = state
            .p
            .par_iter_mut()
            .enumerate()
            .with_min_len(4096)
            .filter_map(|(i, p)| {
                if bit(failed, i) {
                    return None;
                }
                let d = graph.investee_count(i);
                if d == 0 {
                    return None;
                }
                let (x, next) = update_probability(impulses[i], d, step, *p);
                debug_assert!(x >= F::zero() && x <= step.k_step, "x = {x} outside [0, k]");
                debug_assert!(next >= F::zero() && next <= F::one(), "p = {next} outside [0, 1]");
                *p = next;
                if next > F::zero() {
                    let z = F::unit_from_bits(rng::derive(seed, &[rng::tag::DRAW, t as u64, i as u64]));
                    if z < next {
                        return Some(i as u32);
                    }
                }
                None
            })
            .collect();

        for j in touched {
            state.impulses[j as usize] = 0;
        }
        for &i in &newly {
            set_bit(&mut state.failed, i as usize);
        }
        state.failed_count += newly.len();
        state.newly_failed = newly;
        state.t = t;
    }

    pub fn run(&self, record: FailureRecord) -> Result<RunOutput<F>> {
        let n = self.graph.node_count();
        let steps = self.params.steps;
        let mut matrix_refused = false;
        let mut matrix = match record {
            FailureRecord::Summary => None,
            FailureRecord::Full { budget_bits } => {
                let bits = n as u128 * steps as u128;
                if bits > budget_bits {
                    warn!("{}", Error::BitBudget { bits, budget: budget_bits });
                    matrix_refused = true;
                    None
                } else {
                    let words_per_row = n.div_ceil(64);
                    Some(FailureMatrix {
                        nodes: n,
                        steps,
                        words_per_row,
                        words: Vec::with_capacity(words_per_row * steps),
                    })
                }
            }
        };

        let mut state = self.initial_state();
        let shock_size = state.failed_count;
        let mut per_step = Vec::with_capacity(steps);
        for _ in 0..steps {
            self.step(&mut state);
            per_step.push(state.newly_failed.len());
            if let Some(m) = matrix.as_mut() {
                m.words.extend_from_slice(&state.failed);
            }
        }
        Ok(RunOutput {
            metrics: CascadeMetrics::from_counts(n, shock_size, per_step),
            matrix,
            matrix_refused,
        })
    }
}
