use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::{Country, FirmId, NodeTable, TemporalEdgeRecord, YearWindow};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Multiplicity {
    /// Each `(src, dst)` at most once.
    Simple,
    /// One edge per distinct dated record.
    Multi,
}

/// Immutable network in compressed sparse row form.
///
/// Undirected networks store every edge in both endpoint rows of the `out`
/// arrays; directed networks additionally keep the transposed `in` arrays.
/// Node ids are dense and local to the network; `keys` maps them back to the
/// external firm identifiers.
#[derive(Clone, Debug, PartialEq)]
pub struct Network {
    directed: bool,
    multiplicity: Multiplicity,
    out_offsets: Vec<usize>,
    out_targets: Vec<u32>,
    in_offsets: Vec<usize>,
    in_sources: Vec<u32>,
    edge_count: usize,
    keys: Vec<String>,
    countries: Vec<Option<Country>>,
}

fn csr(n: usize, pairs: impl Iterator<Item = (u32, u32)> + Clone) -> (Vec<usize>, Vec<u32>) {
    let mut offsets = vec![0usize; n + 1];
    for (s, _) in pairs.clone() {
        offsets[s as usize + 1] += 1;
    }
    for i in 0..n {
        offsets[i + 1] += offsets[i];
    }
    let mut cursor = offsets.clone();
    let mut targets = vec![0u32; offsets[n]];
    for (s, t) in pairs {
        targets[cursor[s as usize]] = t;
        cursor[s as usize] += 1;
    }
    for v in 0..n {
        targets[offsets[v]..offsets[v + 1]].sort_unstable();
    }
    (offsets, targets)
}

impl Network {
    /// Builds a network over local ids `0..keys.len()`.
    ///
    /// Self-loops are dropped. For undirected networks `(u, v)` and `(v, u)`
    /// are the same edge.
    pub fn from_edges(
        directed: bool,
        multiplicity: Multiplicity,
        mut edges: Vec<(u32, u32)>,
        keys: Vec<String>,
        countries: Vec<Option<Country>>,
    ) -> Self {
        let n = keys.len();
        assert_eq!(countries.len(), n, "one country slot per node");
        edges.retain(|&(s, t)| s != t);
        if !directed {
            for e in edges.iter_mut() {
                if e.1 < e.0 {
                    *e = (e.1, e.0);
                }
            }
        }
        if multiplicity == Multiplicity::Simple {
            edges.sort_unstable();
            edges.dedup();
        }
        debug_assert!(edges.iter().all(|&(s, t)| (s as usize) < n && (t as usize) < n));
        let edge_count = edges.len();
        let (out_offsets, out_targets, in_offsets, in_sources) = if directed {
            let (oo, ot) = csr(n, edges.iter().copied());
            let (io, is) = csr(n, edges.iter().map(|&(s, t)| (t, s)));
            (oo, ot, io, is)
        } else {
            let both = edges.iter().flat_map(|&(s, t)| [(s, t), (t, s)]);
            let (oo, ot) = csr(n, both);
            (oo, ot, Vec::new(), Vec::new())
        };
        Self {
            directed,
            multiplicity,
            out_offsets,
            out_targets,
            in_offsets,
            in_sources,
            edge_count,
            keys,
            countries,
        }
    }

    pub fn empty(directed: bool, multiplicity: Multiplicity) -> Self {
        Self::from_edges(directed, multiplicity, Vec::new(), Vec::new(), Vec::new())
    }

    pub fn node_count(&self) -> usize {
        self.keys.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn is_directed(&self) -> bool {
        self.directed
    }

    pub fn multiplicity(&self) -> Multiplicity {
        self.multiplicity
    }

    /// Successors (directed) or neighbours (undirected), sorted.
    pub fn out_neighbors(&self, v: usize) -> &[u32] {
        &self.out_targets[self.out_offsets[v]..self.out_offsets[v + 1]]
    }

    /// Predecessors (directed) or neighbours (undirected), sorted.
    pub fn in_neighbors(&self, v: usize) -> &[u32] {
        if self.directed {
            &self.in_sources[self.in_offsets[v]..self.in_offsets[v + 1]]
        } else {
            self.out_neighbors(v)
        }
    }

    pub fn out_degree(&self, v: usize) -> usize {
        self.out_offsets[v + 1] - self.out_offsets[v]
    }

    pub fn in_degree(&self, v: usize) -> usize {
        if self.directed {
            self.in_offsets[v + 1] - self.in_offsets[v]
        } else {
            self.out_degree(v)
        }
    }

    /// Degree in the undirected interpretation (in + out for directed networks).
    pub fn degree(&self, v: usize) -> usize {
        if self.directed {
            self.out_degree(v) + self.in_degree(v)
        } else {
            self.out_degree(v)
        }
    }

    /// Every edge exactly once as `(src, dst)`; undirected edges come out with `src < dst`.
    pub fn edges(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        let directed = self.directed;
        (0..self.node_count()).flat_map(move |u| {
            self.out_neighbors(u)
                .iter()
                .filter(move |&&v| directed || (u as u32) < v)
                .map(move |&v| (u as u32, v))
        })
    }

    pub fn key(&self, v: usize) -> &str {
        &self.keys[v]
    }

    pub fn keys(&self) -> &[String] {
        &self.keys
    }

    pub fn country(&self, v: usize) -> Option<Country> {
        self.countries[v]
    }

    pub fn countries(&self) -> &[Option<Country>] {
        &self.countries
    }

    pub fn has_countries(&self) -> bool {
        self.countries.iter().any(Option::is_some)
    }

    /// Approximate heap footprint of the adjacency and label storage.
    pub fn heap_bytes(&self) -> usize {
        use std::mem::size_of;
        (self.out_offsets.capacity() + self.in_offsets.capacity()) * size_of::<usize>()
            + (self.out_targets.capacity() + self.in_sources.capacity()) * size_of::<u32>()
            + self.keys.capacity() * size_of::<String>()
            + self.keys.iter().map(String::capacity).sum::<usize>()
            + self.countries.capacity() * size_of::<Option<Country>>()
    }
}

/// Builds a network from records of a single kind.
///
/// Nodes are the endpoints of the records that pass `years`, numbered in
/// increasing [`FirmId`] order. Patent records give an undirected network,
/// share records a directed one. `Simple` collapses repeated pairs across the
/// whole filter window.
pub fn build_network(
    records: &[TemporalEdgeRecord],
    table: &NodeTable,
    years: Option<YearWindow>,
    multiplicity: Multiplicity,
) -> Result<Network> {
    let Some(first) = records.first() else {
        return Ok(Network::empty(false, multiplicity));
    };
    let kind = first.kind;
    if records.iter().any(|r| r.kind != kind) {
        return Err(Error::InvalidParam(
            "build_network needs records of a single link kind".into(),
        ));
    }
    let kept: Vec<&TemporalEdgeRecord> = records
        .iter()
        .filter(|r| years.is_none_or(|w| w.contains(r.year)))
        .collect();

    let mut ids: Vec<FirmId> = kept.iter().flat_map(|r| [r.src, r.dst]).collect();
    ids.sort_unstable();
    ids.dedup();
    let local: HashMap<FirmId, u32> = ids
        .iter()
        .enumerate()
        .map(|(i, &id)| (id, i as u32))
        .collect();
    let edges = kept
        .iter()
        .map(|r| (local[&r.src], local[&r.dst]))
        .collect();
    let keys = ids.iter().map(|&id| table.key(id).to_owned()).collect();
    let countries = ids.iter().map(|&id| table.country(id)).collect();
    Ok(Network::from_edges(
        kind.is_directed(),
        multiplicity,
        edges,
        keys,
        countries,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::LinkKind;

    fn patent_fixture() -> (NodeTable, Vec<TemporalEdgeRecord>) {
        let mut t = NodeTable::new();
        let (a, b, c) = (t.intern("a"), t.intern("b"), t.intern("c"));
        let recs = vec![
            TemporalEdgeRecord::new(a, b, 2010, LinkKind::Patent),
            TemporalEdgeRecord::new(b, c, 2010, LinkKind::Patent),
            TemporalEdgeRecord::new(a, b, 2011, LinkKind::Patent),
        ];
        (t, recs)
    }

    #[test]
    fn simple_collapses_duplicate_pairs() {
        let (t, recs) = patent_fixture();
        let net = build_network(&recs, &t, None, Multiplicity::Simple).unwrap();
        assert_eq!(net.node_count(), 3);
        assert_eq!(net.edge_count(), 2);
        assert!(!net.is_directed());
    }

    #[test]
    fn multi_keeps_every_record() {
        let (t, recs) = patent_fixture();
        let net = build_network(&recs, &t, None, Multiplicity::Multi).unwrap();
        assert_eq!(net.edge_count(), 3);
        assert_eq!(net.degree(0), 2);
    }

    #[test]
    fn share_year_filter_gives_directed_in_degrees() {
        let mut t = NodeTable::new();
        let (a, b, c) = (t.intern("a"), t.intern("b"), t.intern("c"));
        let recs = vec![
            TemporalEdgeRecord::new(a, b, 2010, LinkKind::Share),
            TemporalEdgeRecord::new(b, c, 2010, LinkKind::Share),
        ];
        let net = build_network(&recs, &t, Some(YearWindow::single(2010)), Multiplicity::Simple).unwrap();
        assert!(net.is_directed());
        let indeg: Vec<usize> = (0..3).map(|v| net.in_degree(v)).collect();
        assert_eq!(indeg, vec![0, 1, 1]);
        assert_eq!(net.key(1), "b");
    }

    #[test]
    fn empty_records_give_empty_network() {
        let t = NodeTable::new();
        let net = build_network(&[], &t, None, Multiplicity::Simple).unwrap();
        assert_eq!(net.node_count(), 0);
        assert_eq!(net.edge_count(), 0);
    }

    #[test]
    fn mixed_kinds_rejected() {
        let mut t = NodeTable::new();
        let (a, b) = (t.intern("a"), t.intern("b"));
        let recs = vec![
            TemporalEdgeRecord::new(a, b, 2010, LinkKind::Share),
            TemporalEdgeRecord::new(a, b, 2010, LinkKind::Patent),
        ];
        assert!(build_network(&recs, &t, None, Multiplicity::Simple).is_err());
    }

    #[test]
    fn edges_iterates_each_edge_once() {
        let (t, recs) = patent_fixture();
        let net = build_network(&recs, &t, None, Multiplicity::Multi).unwrap();
        let e: Vec<_> = net.edges().collect();
        assert_eq!(e, vec![(0, 1), (0, 1), (1, 2)]);
    }

    #[test]
    fn self_loops_dropped_on_construction() {
        let net = Network::from_edges(
            true,
            Multiplicity::Simple,
            vec![(0, 0), (0, 1)],
            vec!["x".into(), "y".into()],
            vec![None, None],
        );
        assert_eq!(net.edge_count(), 1);
    }
}
