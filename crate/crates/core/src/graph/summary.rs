use std::collections::BTreeMap;

use serde::Serialize;

use super::Network;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TopologySummary {
    pub nodes: usize,
    pub edges: usize,
    /// `2E / N` for both directed and undirected networks.
    pub avg_degree: f64,
    /// Lower median of the degree multiset.
    pub median_degree: usize,
    pub degree_histogram: BTreeMap<usize, usize>,
    /// Weak components for directed networks.
    pub component_count: usize,
    pub largest_component_nodes: usize,
    pub largest_component_fraction: f64,
}

struct DisjointSet {
    parent: Vec<u32>,
    size: Vec<u32>,
}

impl DisjointSet {
    fn new(n: usize) -> Self {
        Self {
            parent: (0..n as u32).collect(),
            size: vec![1; n],
        }
    }

    fn find(&mut self, mut x: u32) -> u32 {
        while self.parent[x as usize] != x {
            let p = self.parent[x as usize];
            self.parent[x as usize] = self.parent[p as usize];
            x = p;
        }
        x
    }

    fn union(&mut self, a: u32, b: u32) {
        let (mut a, mut b) = (self.find(a), self.find(b));
        if a == b {
            return;
        }
        if self.size[a as usize] < self.size[b as usize] {
            std::mem::swap(&mut a, &mut b);
        }
        self.parent[b as usize] = a;
        self.size[a as usize] += self.size[b as usize];
    }
}

/// Sizes of the (weak) connected components.
pub(crate) fn component_sizes(net: &Network) -> Vec<usize> {
    let n = net.node_count();
    let mut ds = DisjointSet::new(n);
    for (u, v) in net.edges() {
        ds.union(u, v);
    }
    let roots: Vec<u32> = (0..n as u32).filter(|&v| ds.find(v) == v).collect();
    roots.into_iter().map(|r| ds.size[r as usize] as usize).collect()
}

pub fn summarize(net: &Network) -> TopologySummary {
    let n = net.node_count();
    let e = net.edge_count();
    let mut degrees: Vec<usize> = (0..n).map(|v| net.degree(v)).collect();
    let mut degree_histogram = BTreeMap::new();
    for &d in &degrees {
        *degree_histogram.entry(d).or_insert(0) += 1;
    }
    let median_degree = if n == 0 {
        0
    } else {
        let mid = (n - 1) / 2;
        *degrees.select_nth_unstable(mid).1
    };
    let sizes = component_sizes(net);
    let largest = sizes.iter().copied().max().unwrap_or(0);
    TopologySummary {
        nodes: n,
        edges: e,
        avg_degree: if n == 0 { 0.0 } else { 2.0 * e as f64 / n as f64 },
        median_degree,
        degree_histogram,
        component_count: sizes.len(),
        largest_component_nodes: largest,
        largest_component_fraction: if n == 0 { 0.0 } else { largest as f64 / n as f64 },
    }
}
