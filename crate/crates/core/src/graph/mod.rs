//! Temporal interfirm networks: node interning, edge records, compressed
//! adjacency, topology summaries and derived subnetworks.

mod expand;
mod io;
mod network;
mod partition;
mod summary;

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use expand::{expand_indirect, DEFAULT_EXPAND_CAP};
pub use io::{load_edges, load_nodes, write_edges, write_nodes, LoadOptions, LoadReport};
pub use network::{build_network, Multiplicity, Network};
pub use partition::country_partition;
pub use summary::{summarize, TopologySummary};

/// Dense, 0-based firm identifier issued by a [`NodeTable`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FirmId(pub u32);

impl FirmId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// Two-letter country code. `??` marks a code that was present but unreadable.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Country([u8; 2]);

impl Country {
    pub const UNKNOWN: Country = Country(*b"??");

    /// Accepts exactly two ASCII letters, case-insensitively.
    pub fn parse(s: &str) -> Option<Country> {
        let b = s.trim().as_bytes();
        if b.len() == 2 && b.iter().all(u8::is_ascii_alphabetic) {
            Some(Country([b[0].to_ascii_uppercase(), b[1].to_ascii_uppercase()]))
        } else {
            None
        }
    }

    pub fn as_str(&self) -> &str {
        std::str::from_utf8(&self.0).expect("country codes are ASCII")
    }

    pub fn is_unknown(&self) -> bool {
        *self == Self::UNKNOWN
    }
}

impl fmt::Debug for Country {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Country({})", self.as_str())
    }
}

impl fmt::Display for Country {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum LinkKind {
    /// Joint patent application; undirected.
    Patent,
    /// Ownership stake; directed from investee company to shareholder.
    Share,
}

impl LinkKind {
    pub fn is_directed(self) -> bool {
        matches!(self, LinkKind::Share)
    }
}

/// Inclusive range of years.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct YearWindow {
    start: i32,
    end: i32,
}

impl YearWindow {
    pub fn new(start: i32, end: i32) -> Result<Self> {
        if start > end {
            return Err(Error::InvalidParam(format!(
                "year window start {start} is after end {end}"
            )));
        }
        Ok(Self { start, end })
    }

    pub fn single(year: i32) -> Self {
        Self {
            start: year,
            end: year,
        }
    }

    pub fn start(&self) -> i32 {
        self.start
    }

    pub fn end(&self) -> i32 {
        self.end
    }

    pub fn len(&self) -> usize {
        (self.end - self.start + 1) as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, year: i32) -> bool {
        (self.start..=self.end).contains(&year)
    }

    /// Position of `year` inside the window.
    pub fn offset(&self, year: i32) -> Option<usize> {
        self.contains(year).then(|| (year - self.start) as usize)
    }

    pub fn years(&self) -> impl Iterator<Item = i32> {
        self.start..=self.end
    }
}

impl Default for YearWindow {
    /// 2008 through 2016, the years both link types are observed.
    fn default() -> Self {
        Self {
            start: 2008,
            end: 2016,
        }
    }
}

/// One dated link observation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TemporalEdgeRecord {
    pub src: FirmId,
    pub dst: FirmId,
    pub year: i32,
    pub kind: LinkKind,
}

impl TemporalEdgeRecord {
    /// Builds a record, ordering patent endpoints so that `src <= dst`.
    pub fn new(src: FirmId, dst: FirmId, year: i32, kind: LinkKind) -> Self {
        let (src, dst) = match kind {
            LinkKind::Patent if dst < src => (dst, src),
            _ => (src, dst),
        };
        Self {
            src,
            dst,
            year,
            kind,
        }
    }

    pub fn is_self_loop(&self) -> bool {
        self.src == self.dst
    }
}

/// Bijection between external firm keys and dense [`FirmId`]s, plus the
/// optional country of each firm.
#[derive(Clone, Debug, Default)]
pub struct NodeTable {
    keys: Vec<String>,
    index: HashMap<String, FirmId>,
    countries: Vec<Option<Country>>,
}

impl NodeTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn intern(&mut self, key: &str) -> FirmId {
        if let Some(&id) = self.index.get(key) {
            return id;
        }
        let id = FirmId(u32::try_from(self.keys.len()).expect("more than u32::MAX firms"));
        self.keys.push(key.to_owned());
        self.index.insert(key.to_owned(), id);
        self.countries.push(None);
        id
    }

    pub fn get(&self, key: &str) -> Option<FirmId> {
        self.index.get(key).copied()
    }

    pub fn key(&self, id: FirmId) -> &str {
        &self.keys[id.index()]
    }

    pub fn country(&self, id: FirmId) -> Option<Country> {
        self.countries[id.index()]
    }

    pub fn set_country(&mut self, id: FirmId, country: Option<Country>) {
        self.countries[id.index()] = country;
    }

    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }

    pub fn ids(&self) -> impl Iterator<Item = FirmId> {
        (0..self.keys.len() as u32).map(FirmId)
    }

    pub fn has_countries(&self) -> bool {
        self.countries.iter().any(Option::is_some)
    }
}
