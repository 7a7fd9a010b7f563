use std::collections::{BTreeSet, HashSet};

use firmnet_core::graph::{
    build_network, country_partition, expand_indirect, load_edges, load_nodes, summarize, write_edges,
    write_nodes, Country, FirmId, LinkKind, LoadOptions, Multiplicity, Network, NodeTable, TemporalEdgeRecord,
    YearWindow, DEFAULT_EXPAND_CAP,
};
use firmnet_core::overlap::{build_existence_matrices, build_overlap_network, PairScope};
use proptest::prelude::*;

const CODES: [&str; 3] = ["US", "JP", "DE"];

fn table(n: usize) -> NodeTable {
    let mut t = NodeTable::new();
    for i in 0..n {
        let id = t.intern(&format!("F{i}"));
        t.set_country(id, Country::parse(CODES[i % CODES.len()]));
    }
    t
}

fn records(kind: LinkKind) -> impl Strategy<Value = Vec<TemporalEdgeRecord>> {
    prop::collection::vec((0u32..40, 0u32..40, 2008i32..=2016), 0..150).prop_map(move |v| {
        v.into_iter()
            .filter(|(s, t, _)| s != t)
            .map(|(s, t, y)| TemporalEdgeRecord::new(FirmId(s), FirmId(t), y, kind))
            .collect()
    })
}

fn directed(n: usize, edges: Vec<(u32, u32)>) -> Network {
    let keys = (0..n).map(|i| format!("F{i}")).collect();
    let countries = (0..n).map(|i| Country::parse(CODES[i % CODES.len()])).collect();
    Network::from_edges(true, Multiplicity::Simple, edges, keys, countries)
}

fn dag_edges() -> impl Strategy<Value = (usize, Vec<(u32, u32)>)> {
    (2usize..30).prop_flat_map(|n| {
        (Just(n), prop::collection::vec((0..n as u32, 0..n as u32), 0..60))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn degree_sum_is_twice_edge_count(recs in records(LinkKind::Patent), multi in any::<bool>()) {
        let t = table(40);
        let mult = if multi { Multiplicity::Multi } else { Multiplicity::Simple };
        let net = build_network(&recs, &t, None, mult).unwrap();
        let total: usize = (0..net.node_count()).map(|v| net.degree(v)).sum();
        prop_assert_eq!(total, 2 * net.edge_count());
        let s = summarize(&net);
        let hist: usize = s.degree_histogram.values().sum();
        prop_assert_eq!(hist, net.node_count());
    }

    #[test]
    fn directed_degrees_balance(recs in records(LinkKind::Share)) {
        let t = table(40);
        let net = build_network(&recs, &t, None, Multiplicity::Simple).unwrap();
        let outs: usize = (0..net.node_count()).map(|v| net.out_degree(v)).sum();
        let ins: usize = (0..net.node_count()).map(|v| net.in_degree(v)).sum();
        prop_assert_eq!(outs, net.edge_count());
        prop_assert_eq!(ins, net.edge_count());
    }

    #[test]
    fn components_partition_the_nodes(recs in records(LinkKind::Share)) {
        let t = table(40);
        let net = build_network(&recs, &t, None, Multiplicity::Simple).unwrap();
        let s = summarize(&net);
        prop_assert!(s.component_count <= s.nodes);
        prop_assert!(s.largest_component_nodes <= s.nodes);
        if s.nodes > 0 {
            prop_assert!(s.component_count >= 1);
            // every node lies on an edge, so no component is a singleton
            prop_assert!(2 * s.component_count <= s.nodes);
            prop_assert!((s.largest_component_fraction - s.largest_component_nodes as f64 / s.nodes as f64).abs() < 1e-15);
        }
    }

    #[test]
    fn country_partitions_cover_intra_country_edges(recs in records(LinkKind::Share)) {
        let t = table(40);
        let net = build_network(&recs, &t, None, Multiplicity::Simple).unwrap();
        let mut nodes = 0;
        let mut edges = 0;
        for c in CODES {
            let part = country_partition(&net, Country::parse(c).unwrap());
            nodes += part.node_count();
            edges += part.edge_count();
        }
        let intra = net.edges().filter(|&(s, d)| net.country(s as usize) == net.country(d as usize)).count();
        prop_assert_eq!(nodes, net.node_count());
        prop_assert_eq!(edges, intra);
    }

    #[test]
    fn expansion_is_monotone_in_depth((n, edges) in dag_edges()) {
        let net = directed(n, edges);
        let mut prev: BTreeSet<(u32, u32)> = net.edges().collect();
        for depth in 2..=DEFAULT_EXPAND_CAP {
            let e = expand_indirect(&net, depth, DEFAULT_EXPAND_CAP).unwrap();
            let cur: BTreeSet<(u32, u32)> = e.edges().collect();
            prop_assert!(prev.is_subset(&cur));
            prop_assert_eq!(e.node_count(), n);
            prev = cur;
        }
    }

    #[test]
    fn overlap_edges_equal_the_and_sum(p in records(LinkKind::Patent), s in records(LinkKind::Share), year in 2008i32..=2016) {
        let t = table(40);
        let w = YearWindow::default();
        let set = build_existence_matrices(&p, &s, w, &PairScope::ObservedPairs);
        let off = w.offset(year).unwrap();
        let and_sum: usize = set.iter().map(|m| (m.patent[off] & m.share[off]) as usize).sum();
        let ov = build_overlap_network(&set, year, &t).unwrap();
        prop_assert_eq!(ov.network.edge_count(), and_sum);

        let canon = |r: &TemporalEdgeRecord| (r.src.0.min(r.dst.0), r.src.0.max(r.dst.0));
        let pp: HashSet<_> = p.iter().filter(|r| r.year == year).map(canon).collect();
        let ss: HashSet<_> = s.iter().filter(|r| r.year == year).map(canon).collect();
        prop_assert_eq!(and_sum, pp.intersection(&ss).count());
    }
}

#[test]
fn expansion_of_a_chain_reaches_exactly_depth_hops() {
    let net = directed(6, (0..5).map(|i| (i, i + 1)).collect());
    for depth in 1..=4u32 {
        let e = expand_indirect(&net, depth as usize, DEFAULT_EXPAND_CAP).unwrap();
        let expected: usize = (0..6u32).map(|s| (5 - s).min(depth) as usize).sum();
        assert_eq!(e.edge_count(), expected, "depth {depth}");
    }
    assert!(expand_indirect(&net, 5, DEFAULT_EXPAND_CAP).is_err());
    assert!(expand_indirect(&net, 5, 5).is_ok());
}

#[test]
fn csv_round_trip_preserves_networks() {
    let dir = tempfile::tempdir().unwrap();
    let t = table(10);
    let recs: Vec<TemporalEdgeRecord> = (0..9u32)
        .map(|i| TemporalEdgeRecord::new(FirmId(i), FirmId(i + 1), 2010 + (i as i32 % 3), LinkKind::Share))
        .collect();
    write_nodes(dir.path().join("nodes.csv"), &t).unwrap();
    write_edges(dir.path().join("shares.csv"), &t, &recs).unwrap();

    let mut loaded = load_nodes(dir.path().join("nodes.csv")).unwrap();
    let report = load_edges(
        dir.path().join("shares.csv"),
        LinkKind::Share,
        &mut loaded,
        &LoadOptions::default(),
    )
    .unwrap();
    assert_eq!(report.records.len(), recs.len());
    let a = build_network(&recs, &t, None, Multiplicity::Simple).unwrap();
    let b = build_network(&report.records, &loaded, None, Multiplicity::Simple).unwrap();
    assert_eq!(a.keys(), b.keys());
    assert_eq!(a.countries(), b.countries());
    assert_eq!(a.edges().collect::<Vec<_>>(), b.edges().collect::<Vec<_>>());
}
