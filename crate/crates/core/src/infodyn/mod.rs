//! Plug-in discrete information measures on binary yearly series.
//!
//! All values are in bits and use maximum-likelihood (frequency) estimates of
//! the underlying distributions, without bias correction.

mod aggregate;
mod estimate;
mod fisher;
mod surrogate;

use std::ops::Deref;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use aggregate::{
    aggregate_over_edges, select_k_by_ais, write_results, AggregateConfig, AggregateResult, ResultRow, TieRule,
    SeriesRole,
};
pub use estimate::{
    active_information_storage, entropy, mutual_information, transfer_entropy, transfer_entropy_by_entropies,
    JointCounts, TransferSamples,
};
pub use fisher::{chi_square_even_sf, fisher_combine, DEFAULT_P_FLOOR};
pub use surrogate::{surrogate_p_value, surrogate_test, SurrogateTest};

/// A {0,1}-valued time series.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BinarySeries(Vec<u8>);

impl BinarySeries {
    pub fn new(values: Vec<u8>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Empty("binary series".into()));
        }
        if values.iter().any(|&v| v > 1) {
            return Err(Error::InvalidParam("series values must be 0 or 1".into()));
        }
        Ok(Self(values))
    }

    /// Parses a string of `0`/`1` characters.
    pub fn parse(bits: &str) -> Result<Self> {
        let values = bits
            .chars()
            .map(|c| match c {
                '0' => Ok(0),
                '1' => Ok(1),
                other => Err(Error::InvalidParam(format!("not a bit: {other:?}"))),
            })
            .collect::<Result<Vec<u8>>>()?;
        Self::new(values)
    }

    pub fn into_inner(self) -> Vec<u8> {
        self.0
    }

    pub fn is_constant(&self) -> bool {
        is_constant(&self.0)
    }
}

impl Deref for BinarySeries {
    type Target = [u8];

    fn deref(&self) -> &[u8] {
        &self.0
    }
}

pub(crate) fn is_constant(values: &[u8]) -> bool {
    values.windows(2).all(|w| w[0] == w[1])
}

/// Embedding and delay parameters.
///
/// `k`/`tau_x`: target history length and spacing; `l`/`tau_y`: source
/// history length and spacing; `u`: source-to-target delay. For delayed mutual
/// information only `u` is used; for active information storage only `k` and
/// `tau_x`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct InfoParams {
    pub k: usize,
    pub l: usize,
    pub tau_x: usize,
    pub tau_y: usize,
    pub u: usize,
}

impl Default for InfoParams {
    fn default() -> Self {
        Self {
            k: 5,
            l: 1,
            tau_x: 1,
            tau_y: 1,
            u: 1,
        }
    }
}

impl InfoParams {
    pub fn validate(&self) -> Result<()> {
        if self.k == 0 || self.l == 0 || self.tau_x == 0 || self.tau_y == 0 {
            return Err(Error::InvalidParam(format!(
                "k, l, tau_x and tau_y must be >= 1 (got {self:?})"
            )));
        }
        if self.k > 63 || self.l > 63 {
            return Err(Error::InvalidParam("embedding lengths above 63 are not supported".into()));
        }
        Ok(())
    }

    pub fn with_u(self, u: usize) -> Self {
        Self { u, ..self }
    }

    pub fn with_k(self, k: usize) -> Self {
        Self { k, ..self }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum InfoKind {
    MutualInformation,
    ActiveStorage,
    TransferEntropy,
}

/// Population-level measure over edge-existence matrices.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Measure {
    /// Delayed mutual information between the patent column and the later share column.
    Mi,
    AisP,
    AisS,
    /// Transfer entropy from the patent column to the share column.
    TePS,
    TeSP,
}

impl Measure {
    pub const ALL: [Measure; 5] = [Measure::Mi, Measure::AisP, Measure::AisS, Measure::TePS, Measure::TeSP];

    pub fn label(self) -> &'static str {
        match self {
            Measure::Mi => "mi",
            Measure::AisP => "ais_p",
            Measure::AisS => "ais_s",
            Measure::TePS => "te_p_s",
            Measure::TeSP => "te_s_p",
        }
    }

    pub fn parse(s: &str) -> Option<Measure> {
        let norm = s.trim().to_ascii_lowercase().replace(['-', '>'], "_");
        Some(match norm.as_str() {
            "mi" => Measure::Mi,
            "ais_p" => Measure::AisP,
            "ais_s" => Measure::AisS,
            "te_p_s" | "te_ps" | "te_p__s" => Measure::TePS,
            "te_s_p" | "te_sp" | "te_s__p" => Measure::TeSP,
            _ => return None,
        })
    }

    pub fn kind(self) -> InfoKind {
        match self {
            Measure::Mi => InfoKind::MutualInformation,
            Measure::AisP | Measure::AisS => InfoKind::ActiveStorage,
            Measure::TePS | Measure::TeSP => InfoKind::TransferEntropy,
        }
    }

    pub(crate) fn tag(self) -> u64 {
        self as u64 + 1
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct InfoResult<F> {
    pub measure: InfoKind,
    /// Nonnegative; tiny negative rounding residue is clamped to zero.
    pub value_bits: F,
    pub p_value: Option<F>,
    pub n_samples: usize,
    pub params: InfoParams,
    pub population_size: usize,
}
