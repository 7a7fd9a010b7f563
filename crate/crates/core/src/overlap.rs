//! Per-pair edge-existence matrices over a year window, and the yearly
//! overlap networks where both link types coexist.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use log::warn;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Country, FirmId, LinkKind, Multiplicity, Network, NodeTable, TemporalEdgeRecord};

pub use crate::graph::YearWindow;

/// Unordered firm pair, stored with `a <= b`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PairKey {
    pub a: FirmId,
    pub b: FirmId,
}

impl PairKey {
    pub fn new(x: FirmId, y: FirmId) -> Self {
        if x <= y {
            Self { a: x, b: y }
        } else {
            Self { a: y, b: x }
        }
    }

    /// Stable 64-bit key for seeding per-pair random streams.
    pub fn as_u64(&self) -> u64 {
        ((self.a.0 as u64) << 32) | self.b.0 as u64
    }
}

/// Binary per-year existence of each link type for one pair.
///
/// `patent[t] == 1` iff the pair filed a joint application in year `t`;
/// `share[t] == 1` iff a shareholding relation between them (either
/// direction) was in force at the end of year `t`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EdgeExistenceMatrix {
    pub pair: PairKey,
    pub window: YearWindow,
    pub patent: Vec<u8>,
    pub share: Vec<u8>,
}

impl EdgeExistenceMatrix {
    pub fn both_at(&self, offset: usize) -> bool {
        self.patent[offset] == 1 && self.share[offset] == 1
    }
}

#[derive(Clone, Debug)]
pub enum PairScope {
    /// Pairs with at least one patent and one shareholding observation in the window.
    ObservedPairs,
    ExplicitList(Vec<PairKey>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExistenceSet {
    pub window: YearWindow,
    pub matrices: BTreeMap<PairKey, EdgeExistenceMatrix>,
}

impl ExistenceSet {
    pub fn len(&self) -> usize {
        self.matrices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.matrices.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &EdgeExistenceMatrix> {
        self.matrices.values()
    }
}

pub fn build_existence_matrices(
    patents: &[TemporalEdgeRecord],
    shares: &[TemporalEdgeRecord],
    window: YearWindow,
    scope: &PairScope,
) -> ExistenceSet {
    // single-threaded grouping pass: pair -> observed year offsets per kind
    let mut groups: HashMap<PairKey, (Vec<usize>, Vec<usize>)> = HashMap::new();
    for (records, is_patent) in [(patents, true), (shares, false)] {
        for r in records {
            let Some(off) = window.offset(r.year) else {
                continue;
            };
            let entry = groups.entry(PairKey::new(r.src, r.dst)).or_default();
            if is_patent {
                entry.0.push(off);
            } else {
                entry.1.push(off);
            }
        }
    }
    let in_scope: Vec<PairKey> = match scope {
        PairScope::ObservedPairs => groups
            .iter()
            .filter(|(_, (p, s))| !p.is_empty() && !s.is_empty())
            .map(|(k, _)| *k)
            .collect(),
        PairScope::ExplicitList(list) => {
            list.iter().copied().collect::<BTreeSet<_>>().into_iter().collect()
        }
    };
    if in_scope.is_empty() {
        warn!("existence-matrix scope is empty");
    }
    let empty = (Vec::new(), Vec::new());
    let matrices = in_scope
        .into_par_iter()
        .map(|pair| {
            let (p, s) = groups.get(&pair).unwrap_or(&empty);
            let mut patent = vec![0u8; window.len()];
            let mut share = vec![0u8; window.len()];
            p.iter().for_each(|&o| patent[o] = 1);
            s.iter().for_each(|&o| share[o] = 1);
            (
                pair,
                EdgeExistenceMatrix {
                    pair,
                    window,
                    patent,
                    share,
                },
            )
        })
        .collect();
    ExistenceSet { window, matrices }
}

#[derive(Clone, Debug)]
pub struct OverlapNetwork {
    pub year: i32,
    pub network: Network,
}

/// Simple undirected network of the pairs with both link types in `year`.
pub fn build_overlap_network(set: &ExistenceSet, year: i32, table: &NodeTable) -> Result<OverlapNetwork> {
    let off = set.window.offset(year).ok_or(Error::YearOutOfWindow {
        year,
        start: set.window.start(),
        end: set.window.end(),
    })?;
    let pairs: Vec<PairKey> = set
        .iter()
        .filter(|m| m.both_at(off))
        .map(|m| m.pair)
        .collect();
    let mut ids: Vec<FirmId> = pairs.iter().flat_map(|p| [p.a, p.b]).collect();
    ids.sort_unstable();
    ids.dedup();
    let local: HashMap<FirmId, u32> = ids.iter().enumerate().map(|(i, &f)| (f, i as u32)).collect();
    let edges = pairs.iter().map(|p| (local[&p.a], local[&p.b])).collect();
    let network = Network::from_edges(
        false,
        Multiplicity::Simple,
        edges,
        ids.iter().map(|&f| table.key(f).to_owned()).collect(),
        ids.iter().map(|&f| table.country(f)).collect(),
    );
    Ok(OverlapNetwork { year, network })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Reach {
    IntraNational,
    International,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ScopeMode {
    IntraNational,
    International,
    /// Pairs touching one country: both endpoints in it, or exactly one.
    Country(Country, Reach),
}

impl ScopeMode {
    pub fn label(&self) -> String {
        match self {
            ScopeMode::IntraNational => "intra".into(),
            ScopeMode::International => "international".into(),
            ScopeMode::Country(c, Reach::IntraNational) => format!("{c}:intra"),
            ScopeMode::Country(c, Reach::International) => format!("{c}:international"),
        }
    }

    fn admits(&self, x: Country, y: Country) -> bool {
        match *self {
            ScopeMode::IntraNational => x == y,
            ScopeMode::International => x != y,
            ScopeMode::Country(c, Reach::IntraNational) => x == c && y == c,
            ScopeMode::Country(c, Reach::International) => (x == c) != (y == c),
        }
    }
}

#[derive(Clone, Debug)]
pub struct ScopeSplit {
    pub selected: ExistenceSet,
    /// Pairs with a missing or unreadable country on either endpoint.
    pub unknown: ExistenceSet,
}

pub fn split_scope(set: &ExistenceSet, mode: ScopeMode, table: &NodeTable) -> ScopeSplit {
    let known = |f: FirmId| table.country(f).filter(|c| !c.is_unknown());
    let mut selected = BTreeMap::new();
    let mut unknown = BTreeMap::new();
    for (k, m) in &set.matrices {
        match (known(k.a), known(k.b)) {
            (Some(x), Some(y)) => {
                if mode.admits(x, y) {
                    selected.insert(*k, m.clone());
                }
            }
            _ => {
                unknown.insert(*k, m.clone());
            }
        }
    }
    ScopeSplit {
        selected: ExistenceSet {
            window: set.window,
            matrices: selected,
        },
        unknown: ExistenceSet {
            window: set.window,
            matrices: unknown,
        },
    }
}

/// Writes one `src,dst,year,P,S` row per pair-year.
pub fn write_matrix_dump(path: impl AsRef<Path>, set: &ExistenceSet, table: &NodeTable) -> Result<()> {
    let path = path.as_ref();
    let io = |e| Error::io(path, e);
    let mut w = BufWriter::new(File::create(path).map_err(io)?);
    writeln!(w, "src,dst,year,P,S").map_err(io)?;
    for m in set.iter() {
        for (off, year) in set.window.years().enumerate() {
            writeln!(
                w,
                "{},{},{},{},{}",
                table.key(m.pair.a),
                table.key(m.pair.b),
                year,
                m.patent[off],
                m.share[off]
            )
            .map_err(io)?;
        }
    }
    w.flush().map_err(io)
}

/// Contents of a matrix dump, ready to feed back into
/// [`build_existence_matrices`] with an explicit pair list.
#[derive(Clone, Debug)]
pub struct MatrixDump {
    pub window: YearWindow,
    pub patents: Vec<TemporalEdgeRecord>,
    pub shares: Vec<TemporalEdgeRecord>,
    pub pairs: Vec<PairKey>,
}

impl MatrixDump {
    pub fn rebuild(&self) -> ExistenceSet {
        build_existence_matrices(
            &self.patents,
            &self.shares,
            self.window,
            &PairScope::ExplicitList(self.pairs.clone()),
        )
    }
}

pub fn read_matrix_dump(path: impl AsRef<Path>, table: &mut NodeTable) -> Result<MatrixDump> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(file);
    let parse_err = |line: u64, msg: String| Error::Parse {
        path: path.into(),
        line,
        msg,
    };
    let header: Vec<String> = rdr
        .headers()
        .map_err(|e| parse_err(1, e.to_string()))?
        .iter()
        .map(str::to_owned)
        .collect();
    if header != ["src", "dst", "year", "P", "S"] {
        return Err(parse_err(1, format!("unexpected header {header:?}")));
    }
    let mut patents = Vec::new();
    let mut shares = Vec::new();
    let mut pairs = BTreeSet::new();
    let (mut lo, mut hi) = (i32::MAX, i32::MIN);
    for row in rdr.records() {
        let row = row.map_err(|e| parse_err(e.position().map_or(0, |p| p.line()), e.to_string()))?;
        let line = row.position().map_or(0, |p| p.line());
        let bit = |s: &str| match s {
            "0" => Ok(false),
            "1" => Ok(true),
            other => Err(parse_err(line, format!("expected 0 or 1, found {other:?}"))),
        };
        let year: i32 = row[2]
            .parse()
            .map_err(|_| parse_err(line, format!("bad year {:?}", &row[2])))?;
        if row[0] == row[1] {
            return Err(parse_err(line, "pair with identical endpoints".into()));
        }
        let a = table.intern(&row[0]);
        let b = table.intern(&row[1]);
        pairs.insert(PairKey::new(a, b));
        lo = lo.min(year);
        hi = hi.max(year);
        if bit(&row[3])? {
            patents.push(TemporalEdgeRecord::new(a, b, year, LinkKind::Patent));
        }
        if bit(&row[4])? {
            shares.push(TemporalEdgeRecord::new(a, b, year, LinkKind::Share));
        }
    }
    if pairs.is_empty() {
        return Err(Error::Empty(format!("no rows in {}", path.display())));
    }
    Ok(MatrixDump {
        window: YearWindow::new(lo, hi)?,
        patents,
        shares,
        pairs: pairs.into_iter().collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(t: &mut NodeTable, a: &str, b: &str, y: i32, k: LinkKind) -> TemporalEdgeRecord {
        let (a, b) = (t.intern(a), t.intern(b));
        TemporalEdgeRecord::new(a, b, y, k)
    }

    fn bits(s: &str) -> Vec<u8> {
        s.bytes().map(|b| b - b'0').collect()
    }

    #[test]
    fn transcribes_patent_event_and_share_state() {
        let mut t = NodeTable::new();
        let p = vec![rec(&mut t, "a", "b", 2010, LinkKind::Patent)];
        let s: Vec<_> = (2012..=2016).map(|y| rec(&mut t, "b", "a", y, LinkKind::Share)).collect();
        let set = build_existence_matrices(&p, &s, YearWindow::default(), &PairScope::ObservedPairs);
        assert_eq!(set.len(), 1);
        let m = set.iter().next().unwrap();
        assert_eq!(m.patent, bits("001000000"));
        assert_eq!(m.share, bits("000011111"));
    }

    #[test]
    fn patent_only_pairs_are_out_of_scope() {
        let mut t = NodeTable::new();
        let p: Vec<_> = (2008..=2016).map(|y| rec(&mut t, "a", "b", y, LinkKind::Patent)).collect();
        let set = build_existence_matrices(&p, &[], YearWindow::default(), &PairScope::ObservedPairs);
        assert!(set.is_empty());
    }

    #[test]
    fn observed_scope_matches_brute_force_scan() {
        let mut t = NodeTable::new();
        let p = vec![
            rec(&mut t, "a", "b", 2009, LinkKind::Patent),
            rec(&mut t, "c", "d", 2009, LinkKind::Patent),
            rec(&mut t, "e", "f", 2010, LinkKind::Patent),
        ];
        let s = vec![
            rec(&mut t, "b", "a", 2014, LinkKind::Share),
            rec(&mut t, "e", "f", 2011, LinkKind::Share),
            rec(&mut t, "e", "f", 2030, LinkKind::Share),
        ];
        // brute force: a pair qualifies if it appears in both lists inside the window
        let w = YearWindow::default();
        let mut expected = BTreeSet::new();
        for x in &p {
            for y in &s {
                if PairKey::new(x.src, x.dst) == PairKey::new(y.src, y.dst)
                    && w.contains(x.year)
                    && w.contains(y.year)
                {
                    expected.insert(PairKey::new(x.src, x.dst));
                }
            }
        }
        let set = build_existence_matrices(&p, &s, w, &PairScope::ObservedPairs);
        assert_eq!(set.len(), 2);
        assert_eq!(set.matrices.keys().copied().collect::<BTreeSet<_>>(), expected);
    }

    #[test]
    fn overlap_network_requires_both_columns() {
        let mut t = NodeTable::new();
        let p = vec![
            rec(&mut t, "a", "b", 2016, LinkKind::Patent),
            rec(&mut t, "c", "d", 2016, LinkKind::Patent),
        ];
        let s = vec![
            rec(&mut t, "a", "b", 2016, LinkKind::Share),
            rec(&mut t, "c", "d", 2015, LinkKind::Share),
        ];
        let set = build_existence_matrices(&p, &s, YearWindow::default(), &PairScope::ObservedPairs);
        let o = build_overlap_network(&set, 2016, &t).unwrap();
        assert_eq!(o.network.edge_count(), 1);
        assert_eq!(o.network.node_count(), 2);
        assert_eq!(o.network.keys(), &["a".to_string(), "b".to_string()]);
        assert!(build_overlap_network(&set, 2017, &t).is_err());
    }

    #[test]
    fn scope_split_by_country() {
        let mut t = NodeTable::new();
        let mut p = Vec::new();
        let mut s = Vec::new();
        for (a, b) in [("j1", "j2"), ("j3", "u1"), ("j4", "x1")] {
            p.push(rec(&mut t, a, b, 2010, LinkKind::Patent));
            s.push(rec(&mut t, a, b, 2011, LinkKind::Share));
        }
        for k in ["j1", "j2", "j3", "j4"] {
            let id = t.get(k).unwrap();
            t.set_country(id, Country::parse("JP"));
        }
        let u1 = t.get("u1").unwrap();
        t.set_country(u1, Country::parse("US"));
        let set = build_existence_matrices(&p, &s, YearWindow::default(), &PairScope::ObservedPairs);
        let jp = Country::parse("JP").unwrap();
        let us = Country::parse("US").unwrap();

        let intra = split_scope(&set, ScopeMode::IntraNational, &t);
        assert_eq!(intra.selected.len(), 1);
        assert_eq!(intra.unknown.len(), 1);
        let inter = split_scope(&set, ScopeMode::International, &t);
        assert_eq!(inter.selected.len(), 1);
        assert_eq!(split_scope(&set, ScopeMode::Country(jp, Reach::International), &t).selected.len(), 1);
        assert_eq!(split_scope(&set, ScopeMode::Country(us, Reach::International), &t).selected.len(), 1);
        assert_eq!(split_scope(&set, ScopeMode::Country(jp, Reach::IntraNational), &t).selected.len(), 1);
        assert_eq!(split_scope(&set, ScopeMode::Country(us, Reach::IntraNational), &t).selected.len(), 0);
    }

    #[test]
    fn dump_round_trips_through_explicit_scope() {
        let mut t = NodeTable::new();
        let p = vec![
            rec(&mut t, "a", "b", 2010, LinkKind::Patent),
            rec(&mut t, "c", "d", 2012, LinkKind::Patent),
        ];
        let s = vec![
            rec(&mut t, "b", "a", 2013, LinkKind::Share),
            rec(&mut t, "d", "c", 2016, LinkKind::Share),
        ];
        let set = build_existence_matrices(&p, &s, YearWindow::default(), &PairScope::ObservedPairs);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.csv");
        write_matrix_dump(&path, &set, &t).unwrap();
        let dump = read_matrix_dump(&path, &mut t).unwrap();
        assert_eq!(dump.rebuild(), set);
    }
}
