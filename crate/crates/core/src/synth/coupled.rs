use rand::Rng;
use serde::{Deserialize, Serialize};

use super::country_codes;
use crate::error::{Error, Result};
use crate::graph::{LinkKind, NodeTable, TemporalEdgeRecord, YearWindow};
use crate::rng;

/// Two-layer temporal pair generator with a planted patent-to-share delay.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoupledGenParams {
    pub n_pairs: usize,
    pub years: YearWindow,
    /// Per-year probability of a joint patent application.
    pub p_patent: f64,
    /// Probability that a patent event at year t plants a shareholding from t + d.
    pub q_convert: f64,
    pub d_delay: usize,
    /// Per-year probability of a spontaneous shareholding relation.
    pub p_noise_share: f64,
    pub n_countries: usize,
    pub seed: u64,
}

impl Default for CoupledGenParams {
    fn default() -> Self {
        Self {
            n_pairs: 5000,
            years: YearWindow::default(),
            p_patent: 0.3,
            q_convert: 0.6,
            d_delay: 4,
            p_noise_share: 0.02,
            n_countries: 4,
            seed: 0,
        }
    }
}

impl CoupledGenParams {
    pub fn validate(&self) -> Result<()> {
        for (name, p) in [
            ("p_patent", self.p_patent),
            ("q_convert", self.q_convert),
            ("p_noise_share", self.p_noise_share),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::InvalidParam(format!("{name} = {p} outside [0, 1]")));
            }
        }
        if self.n_countries == 0 {
            return Err(Error::InvalidParam("n_countries must be >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvertedPair {
    /// Investee key.
    pub src: String,
    /// Shareholder key.
    pub dst: String,
    pub patent_year: i32,
    pub share_start: i32,
}

/// Sidecar describing what was planted.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub d_delay: usize,
    pub converted: Vec<ConvertedPair>,
    pub params: CoupledGenParams,
}

#[derive(Clone, Debug)]
pub struct CoupledData {
    pub table: NodeTable,
    pub patents: Vec<TemporalEdgeRecord>,
    pub shares: Vec<TemporalEdgeRecord>,
    pub truth: GroundTruth,
}

/// Generates `n_pairs` disjoint firm pairs.
///
/// Patent events are i.i.d. per year. Each event converts with probability
/// `q_convert` into a shareholding that holds from `d_delay` years later to the
/// end of the window; spontaneous shareholdings also persist to the window end.
/// Each pair's draws come from its own stream keyed by the pair index.
pub fn gen_coupled(params: &CoupledGenParams) -> Result<CoupledData> {
    params.validate()?;
    let len = params.years.len();
    let codes = country_codes(params.n_countries);
    let mut table = NodeTable::new();
    let mut patents = Vec::new();
    let mut shares = Vec::new();
    let mut converted = Vec::new();
    for i in 0..params.n_pairs {
        let mut rng = rng::stream(params.seed, &[rng::tag::COUPLED, i as u64]);
        let a = table.intern(&format!("F{:07}", 2 * i));
        let b = table.intern(&format!("F{:07}", 2 * i + 1));
        table.set_country(a, Some(codes[rng.random_range(0..codes.len())]));
        table.set_country(b, Some(codes[rng.random_range(0..codes.len())]));
        let (investee, holder) = if rng.random_bool(0.5) { (a, b) } else { (b, a) };

        let mut share = vec![false; len];
        for (off, year) in params.years.years().enumerate() {
            if rng.random_bool(params.p_patent) {
                patents.push(TemporalEdgeRecord::new(a, b, year, LinkKind::Patent));
                if rng.random_bool(params.q_convert) {
                    let start = off + params.d_delay;
                    if start < len {
                        share[start..].iter_mut().for_each(|s| *s = true);
                        converted.push(ConvertedPair {
                            src: table.key(investee).to_owned(),
                            dst: table.key(holder).to_owned(),
                            patent_year: year,
                            share_start: year + params.d_delay as i32,
                        });
                    }
                }
            }
        }
        for off in 0..len {
            if rng.random_bool(params.p_noise_share) {
                share[off..].iter_mut().for_each(|s| *s = true);
            }
        }
        for (off, year) in params.years.years().enumerate() {
            if share[off] {
                shares.push(TemporalEdgeRecord::new(investee, holder, year, LinkKind::Share));
            }
        }
    }
    Ok(CoupledData {
        table,
        patents,
        shares,
        truth: GroundTruth {
            d_delay: params.d_delay,
            converted,
            params: params.clone(),
        },
    })
}
