use std::collections::HashMap;

use log::warn;

use super::{Country, Network};

/// Subnetwork induced by the nodes of one country, renumbered densely.
///
/// An absent country (or a network without country data) gives an empty
/// network with a warning.
pub fn country_partition(net: &Network, country: Country) -> Network {
    let members: Vec<u32> = (0..net.node_count() as u32)
        .filter(|&v| net.country(v as usize) == Some(country))
        .collect();
    if members.is_empty() {
        warn!("country {country} has no nodes in this network");
        return Network::empty(net.is_directed(), net.multiplicity());
    }
    let local: HashMap<u32, u32> = members
        .iter()
        .enumerate()
        .map(|(i, &v)| (v, i as u32))
        .collect();
    let edges = net
        .edges()
        .filter_map(|(s, t)| Some((*local.get(&s)?, *local.get(&t)?)))
        .collect();
    let keys = members.iter().map(|&v| net.key(v as usize).to_owned()).collect();
    let countries = vec![Some(country); members.len()];
    Network::from_edges(net.is_directed(), net.multiplicity(), edges, keys, countries)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Multiplicity;

    fn fixture() -> Network {
        let jp = Country::parse("JP");
        let us = Country::parse("US");
        Network::from_edges(
            true,
            Multiplicity::Simple,
            vec![(0, 1), (0, 2)],
            vec!["a".into(), "b".into(), "c".into()],
            vec![jp, jp, us],
        )
    }

    #[test]
    fn japan_subnetwork() {
        let sub = country_partition(&fixture(), Country::parse("JP").unwrap());
        assert_eq!(sub.node_count(), 2);
        assert_eq!(sub.edge_count(), 1);
        assert_eq!(sub.keys(), &["a".to_string(), "b".to_string()]);
        assert!(sub.is_directed());
    }

    #[test]
    fn us_subnetwork_is_a_single_node() {
        let sub = country_partition(&fixture(), Country::parse("US").unwrap());
        assert_eq!(sub.node_count(), 1);
        assert_eq!(sub.edge_count(), 0);
        assert_eq!(sub.key(0), "c");
    }

    #[test]
    fn absent_country_is_empty() {
        let sub = country_partition(&fixture(), Country::parse("FR").unwrap());
        assert_eq!(sub.node_count(), 0);
    }
}
