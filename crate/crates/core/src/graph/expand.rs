use rayon::prelude::*;

use super::{Multiplicity, Network};
use crate::error::{Error, Result};

/// Largest hop count `expand_indirect` accepts unless the caller raises it.
pub const DEFAULT_EXPAND_CAP: usize = 4;

/// Adds an edge `u -> w` for every directed path of at most `max_depth` hops.
///
/// `max_depth == 1` returns the network unchanged. The result of a deeper
/// expansion is a simple network.
pub fn expand_indirect(net: &Network, max_depth: usize, cap: usize) -> Result<Network> {
    if !net.is_directed() {
        return Err(Error::InvalidParam(
            "indirect expansion needs a directed network".into(),
        ));
    }
    if max_depth == 0 || max_depth > cap {
        return Err(Error::InvalidParam(format!(
            "expansion depth {max_depth} outside 1..={cap}"
        )));
    }
    if max_depth == 1 {
        return Ok(net.clone());
    }
    let n = net.node_count();
    let edges: Vec<(u32, u32)> = (0..n)
        .into_par_iter()
        .flat_map_iter(|src| {
            let mut reached: Vec<u32> = Vec::new();
            let mut frontier: Vec<u32> = vec![src as u32];
            for _ in 0..max_depth {
                let mut next: Vec<u32> = frontier
                    .iter()
                    .flat_map(|&v| net.out_neighbors(v as usize).iter().copied())
                    .collect();
                next.sort_unstable();
                next.dedup();
                next.retain(|v| reached.binary_search(v).is_err());
                if next.is_empty() {
                    break;
                }
                reached.extend_from_slice(&next);
                reached.sort_unstable();
                frontier = next;
            }
            reached
                .into_iter()
                .filter(move |&v| v != src as u32)
                .map(move |v| (src as u32, v))
        })
        .collect();
    Ok(Network::from_edges(
        true,
        Multiplicity::Simple,
        edges,
        net.keys().to_vec(),
        net.countries().to_vec(),
    ))
}
