use std::path::Path;

use rand::seq::index;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::country_codes;
use crate::error::{Error, Result};
use crate::graph::{
    write_edges, write_nodes, Country, LinkKind, Multiplicity, Network, NodeTable, TemporalEdgeRecord,
};
use crate::rng;

/// Heavy-tailed directed shareholding network generator.
///
/// A `component_mix` fraction of nodes is spent on isolated investee→shareholder
/// dyads. The rest grow by preferential attachment: each new investee links to
/// `edges_per_node` existing shareholders chosen with weight
/// `(in_degree + 1)^attachment_exponent`, or with probability `new_root_prob`
/// opens a fresh component.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShareGenParams {
    pub n_nodes: usize,
    pub attachment_exponent: f64,
    pub component_mix: f64,
    pub new_root_prob: f64,
    pub edges_per_node: usize,
    pub n_countries: usize,
    /// Probability that a node copies the country of the node it attaches to.
    pub country_assortativity: f64,
    pub seed: u64,
}

impl Default for ShareGenParams {
    fn default() -> Self {
        Self {
            n_nodes: 10_000,
            attachment_exponent: 1.0,
            component_mix: 0.5,
            new_root_prob: 0.05,
            edges_per_node: 1,
            n_countries: 20,
            country_assortativity: 0.0,
            seed: 0,
        }
    }
}

impl ShareGenParams {
    pub fn validate(&self) -> Result<()> {
        for (name, p) in [
            ("component_mix", self.component_mix),
            ("new_root_prob", self.new_root_prob),
            ("country_assortativity", self.country_assortativity),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::InvalidParam(format!("{name} = {p} outside [0, 1]")));
            }
        }
        if !self.attachment_exponent.is_finite() || self.attachment_exponent < 0.0 {
            return Err(Error::InvalidParam(format!(
                "attachment_exponent = {} must be finite and >= 0",
                self.attachment_exponent
            )));
        }
        if self.edges_per_node == 0 {
            return Err(Error::InvalidParam("edges_per_node must be >= 1".into()));
        }
        if self.n_countries == 0 {
            return Err(Error::InvalidParam("n_countries must be >= 1".into()));
        }
        if self.n_nodes > u32::MAX as usize {
            return Err(Error::InvalidParam("n_nodes exceeds u32 id space".into()));
        }
        Ok(())
    }
}

/// Prefix sums over node weights with O(log n) update and inverse lookup.
struct Fenwick {
    tree: Vec<f64>,
}

impl Fenwick {
    fn new(n: usize) -> Self {
        Self { tree: vec![0.0; n + 1] }
    }

    fn add(&mut self, i: usize, delta: f64) {
        let mut j = i + 1;
        while j < self.tree.len() {
            self.tree[j] += delta;
            j += j & j.wrapping_neg();
        }
    }

    fn total(&self, len: usize) -> f64 {
        let mut j = len;
        let mut s = 0.0;
        while j > 0 {
            s += self.tree[j];
            j &= j - 1;
        }
        s
    }

    /// Smallest index whose inclusive prefix sum exceeds `target`, capped at `len - 1`.
    fn find(&self, mut target: f64, len: usize) -> usize {
        let mut pos = 0;
        let mut step = (self.tree.len() - 1).next_power_of_two();
        while step > 0 {
            let next = pos + step;
            if next < self.tree.len() && self.tree[next] <= target {
                pos = next;
                target -= self.tree[next];
            }
            step >>= 1;
        }
        pos.min(len - 1)
    }
}

struct Builder<'a> {
    params: &'a ShareGenParams,
    codes: Vec<Country>,
    rng: ChaCha8Rng,
    countries: Vec<Option<Country>>,
    edges: Vec<(u32, u32)>,
}

impl Builder<'_> {
    fn fresh_country(&mut self) -> Country {
        self.codes[self.rng.random_range(0..self.codes.len())]
    }

    fn country_near(&mut self, anchor: usize) -> Country {
        if self.rng.random_bool(self.params.country_assortativity) {
            self.countries[anchor].expect("anchor already placed")
        } else {
            self.fresh_country()
        }
    }
}

/// Generates a directed shareholding network with edges investee → shareholder.
pub fn gen_shareholding(params: &ShareGenParams) -> Result<Network> {
    params.validate()?;
    generate(params, country_codes(params.n_countries), "S")
}

fn generate(params: &ShareGenParams, codes: Vec<Country>, prefix: &str) -> Result<Network> {
    let n = params.n_nodes;
    let mut b = Builder {
        params,
        codes,
        rng: rng::stream(params.seed, &[rng::tag::SHAREHOLDING]),
        countries: vec![None; n],
        edges: Vec::with_capacity(n * params.edges_per_node),
    };

    let dyad_nodes = (((params.component_mix * n as f64) as usize) / 2 * 2).min(n / 2 * 2);
    for i in (0..dyad_nodes).step_by(2) {
        let c = b.fresh_country();
        b.countries[i] = Some(c);
        let c2 = b.country_near(i);
        b.countries[i + 1] = Some(c2);
        b.edges.push((i as u32, i as u32 + 1));
    }

    let base = dyad_nodes;
    let growth = n - base;
    let mut fenwick = Fenwick::new(growth);
    let mut in_deg = vec![0u32; growth];
    let beta = params.attachment_exponent;
    let weight = |d: u32| (d as f64 + 1.0).powf(beta);
    let mut placed = 0usize;
    while placed < growth {
        let remaining = growth - placed;
        let open_root = placed == 0 || (remaining >= 2 && b.rng.random_bool(params.new_root_prob));
        if open_root && remaining >= 2 {
            let (root, leaf) = (base + placed, base + placed + 1);
            let c = b.fresh_country();
            b.countries[root] = Some(c);
            let c2 = b.country_near(root);
            b.countries[leaf] = Some(c2);
            b.edges.push((leaf as u32, root as u32));
            in_deg[placed] = 1;
            fenwick.add(placed, weight(1));
            fenwick.add(placed + 1, weight(0));
            placed += 2;
            continue;
        }
        if placed == 0 {
            // a single leftover node with nothing to attach to
            b.countries[base] = Some(b.fresh_country());
            break;
        }
        let v = base + placed;
        let want = params.edges_per_node.min(placed);
        let mut targets: Vec<usize> = Vec::with_capacity(want);
        if want == placed {
            targets.extend(0..placed);
        } else {
            let total = fenwick.total(placed);
            let mut tries = 0;
            while targets.len() < want && tries < 64 * want {
                let t = fenwick.find(b.rng.random::<f64>() * total, placed);
                if !targets.contains(&t) {
                    targets.push(t);
                }
                tries += 1;
            }
            if targets.len() < want {
                for t in index::sample(&mut b.rng, placed, want).into_iter() {
                    if targets.len() < want && !targets.contains(&t) {
                        targets.push(t);
                    }
                }
            }
        }
        let c = b.country_near(base + targets[0]);
        b.countries[v] = Some(c);
        for &t in &targets {
            b.edges.push((v as u32, (base + t) as u32));
            let old = in_deg[t];
            in_deg[t] += 1;
            fenwick.add(t, weight(old + 1) - weight(old));
        }
        fenwick.add(placed, weight(0));
        placed += 1;
    }

    let keys = (0..n).map(|i| format!("{prefix}{i:07}")).collect();
    let countries = b.countries;
    Ok(Network::from_edges(true, Multiplicity::Simple, b.edges, keys, countries))
}

/// Generates a multi-country network in which every country has its own
/// structure: size, dyad share, attachment strength and root rate all vary.
pub fn gen_country_suite(n_countries: usize, nodes_per_country: usize, seed: u64) -> Result<Network> {
    if n_countries == 0 || nodes_per_country < 2 {
        return Err(Error::InvalidParam(
            "country suite needs >= 1 country and >= 2 nodes per country".into(),
        ));
    }
    let codes = country_codes(n_countries);
    let mut keys = Vec::new();
    let mut countries = Vec::new();
    let mut edges = Vec::new();
    for (ci, code) in codes.iter().enumerate() {
        let mut r = rng::stream(seed, &[rng::tag::COUNTRY, ci as u64]);
        let scale: f64 = r.random_range(0.5..1.5);
        let params = ShareGenParams {
            n_nodes: ((nodes_per_country as f64 * scale) as usize).max(2),
            attachment_exponent: r.random_range(0.5..1.3),
            component_mix: r.random_range(0.1..0.9),
            new_root_prob: r.random_range(0.01..0.3),
            edges_per_node: 1,
            n_countries: 1,
            country_assortativity: 1.0,
            seed: rng::derive(seed, &[rng::tag::COUNTRY, ci as u64, 1]),
        };
        let net = generate(&params, vec![*code], code.as_str())?;
        let offset = keys.len() as u32;
        edges.extend(net.edges().map(|(s, t)| (s + offset, t + offset)));
        keys.extend(net.keys().iter().cloned());
        countries.extend(net.countries().iter().copied());
    }
    Ok(Network::from_edges(true, Multiplicity::Simple, edges, keys, countries))
}

/// Writes a network as `nodes.csv`-style and edge-list CSV files, stamping
/// every edge with `year`.
pub fn write_network_csv(net: &Network, nodes: impl AsRef<Path>, edges: impl AsRef<Path>, year: i32) -> Result<()> {
    let mut table = NodeTable::new();
    for v in 0..net.node_count() {
        let id = table.intern(net.key(v));
        table.set_country(id, net.country(v));
    }
    let records: Vec<TemporalEdgeRecord> = net
        .edges()
        .map(|(s, t)| {
            TemporalEdgeRecord::new(
                crate::graph::FirmId(s),
                crate::graph::FirmId(t),
                year,
                LinkKind::Share,
            )
        })
        .collect();
    write_nodes(nodes, &table)?;
    write_edges(edges, &table, &records)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::summarize;

    #[test]
    fn fenwick_inverts_prefix_sums() {
        let mut f = Fenwick::new(5);
        for (i, w) in [1.0, 2.0, 0.0, 3.0, 4.0].into_iter().enumerate() {
            f.add(i, w);
        }
        assert_eq!(f.total(5), 10.0);
        assert_eq!(f.find(0.5, 5), 0);
        assert_eq!(f.find(1.0, 5), 1);
        assert_eq!(f.find(2.99, 5), 1);
        assert_eq!(f.find(3.0, 5), 3);
        assert_eq!(f.find(9.99, 5), 4);
    }

    #[test]
    fn all_dyads() {
        let p = ShareGenParams {
            n_nodes: 1000,
            component_mix: 1.0,
            seed: 4,
            ..Default::default()
        };
        let net = gen_shareholding(&p).unwrap();
        let s = summarize(&net);
        assert_eq!(s.component_count, 500);
        assert_eq!(s.largest_component_nodes, 2);
        assert_eq!(net.edge_count(), 500);
    }

    #[test]
    fn no_self_loops_or_duplicates() {
        let p = ShareGenParams {
            n_nodes: 5000,
            edges_per_node: 3,
            component_mix: 0.2,
            seed: 5,
            ..Default::default()
        };
        let net = gen_shareholding(&p).unwrap();
        let mut e: Vec<_> = net.edges().collect();
        assert!(e.iter().all(|(s, t)| s != t));
        let n = e.len();
        e.sort();
        e.dedup();
        assert_eq!(e.len(), n);
        assert!(net.countries().iter().all(|c| c.is_some()));
    }

    #[test]
    fn default_shape() {
        let p = ShareGenParams {
            n_nodes: 100_000,
            seed: 6,
            ..Default::default()
        };
        let net = gen_shareholding(&p).unwrap();
        let s = summarize(&net);
        let deg1 = s.degree_histogram.get(&1).copied().unwrap_or(0) as f64 / s.nodes as f64;
        assert!(deg1 > 0.5, "degree-1 fraction {deg1}");
        assert!(
            (0.05..=0.5).contains(&s.largest_component_fraction),
            "largest fraction {}",
            s.largest_component_fraction
        );
    }

    #[test]
    fn suite_carries_every_country() {
        let net = gen_country_suite(5, 200, 9).unwrap();
        let mut seen: Vec<_> = net.countries().iter().flatten().copied().collect();
        seen.sort();
        seen.dedup();
        assert_eq!(seen.len(), 5);
    }
}
