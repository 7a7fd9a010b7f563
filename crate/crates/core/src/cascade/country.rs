use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use log::warn;
use rayon::prelude::*;
use serde::Serialize;

use super::engine::{CascadeEngine, CascadeGraph, CascadeMetrics, FailureRecord};
use super::params::CascadeParams;
use crate::error::{Error, Result};
use crate::graph::Network;
use crate::rng;
use crate::scalar::Scalar;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CountryMetrics<F> {
    pub country: String,
    pub nodes: usize,
    pub edges: usize,
    pub seed: u64,
    pub metrics: CascadeMetrics<F>,
    /// The country network had no nodes; metrics are zero.
    pub empty: bool,
}

/// Independent cascade runs on per-country networks.
///
/// Each country's seed is derived from `params.seed` and the country key. The
/// output is sorted by mean downtime, most vulnerable first.
pub fn country_sweep<F: Scalar>(
    networks: &BTreeMap<String, Network>,
    params: &CascadeParams<F>,
) -> Result<Vec<CountryMetrics<F>>> {
    params.validate()?;
    let mut out = networks
        .par_iter()
        .map(|(country, net)| {
            let seed = rng::derive(params.seed, &[rng::tag::COUNTRY, rng::str_key(country)]);
            if net.node_count() == 0 {
                warn!("country {country} has an empty network");
                return Ok(CountryMetrics {
                    country: country.clone(),
                    nodes: 0,
                    edges: 0,
                    seed,
                    metrics: CascadeMetrics::empty(),
                    empty: true,
                });
            }
            let graph = CascadeGraph::from_network(net)?;
            let run = CascadeEngine::new(&graph, CascadeParams { seed, ..*params })?.run(FailureRecord::Summary)?;
            Ok(CountryMetrics {
                country: country.clone(),
                nodes: net.node_count(),
                edges: net.edge_count(),
                seed,
                metrics: run.metrics,
                empty: false,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    out.sort_by(|a, b| {
        b.metrics
            .mean_downtime
            .partial_cmp(&a.metrics.mean_downtime)
            .expect("finite metrics")
            .then_with(|| a.country.cmp(&b.country))
    });
    Ok(out)
}

/// `country,nodes,edges,mean_downtime,failure_proportion`
pub fn write_country_csv<F: Scalar>(path: impl AsRef<Path>, rows: &[CountryMetrics<F>]) -> Result<()> {
    let path = path.as_ref();
    let io = |e| Error::io(path, e);
    let mut w = BufWriter::new(File::create(path).map_err(io)?);
    writeln!(w, "country,nodes,edges,mean_downtime,failure_proportion").map_err(io)?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{}",
            r.country, r.nodes, r.edges, r.metrics.mean_downtime, r.metrics.failure_proportion
        )
        .map_err(io)?;
    }
    w.flush().map_err(io)
}
