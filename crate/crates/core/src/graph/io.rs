//! CSV readers and writers for node and edge files.
//!
//! nodes: header `id,country`, edges: header `src,dst,year`. Comma-delimited
//! UTF-8 with unquoted ids.

use std::collections::HashSet;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use log::warn;

use super::{Country, LinkKind, NodeTable, TemporalEdgeRecord, YearWindow};
use crate::error::{Error, Result};

#[derive(Clone, Debug)]
pub struct LoadOptions {
    /// Records outside the window are dropped and counted. `None` keeps every year.
    pub window: Option<YearWindow>,
    /// Malformed rows tolerated before the load aborts.
    pub max_malformed: usize,
}

impl Default for LoadOptions {
    fn default() -> Self {
        Self {
            window: Some(YearWindow::default()),
            max_malformed: 0,
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct LoadReport {
    pub records: Vec<TemporalEdgeRecord>,
    pub self_loops: usize,
    pub malformed: usize,
    pub duplicates: usize,
    pub out_of_window: usize,
}

fn reader(path: &Path) -> Result<csv::Reader<File>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    Ok(csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(file))
}

fn check_header(rdr: &mut csv::Reader<File>, path: &Path, expected: &[&str]) -> Result<()> {
    let header = rdr.headers().map_err(|e| Error::Parse {
        path: path.into(),
        line: 1,
        msg: e.to_string(),
    })?;
    let got: Vec<&str> = header.iter().collect();
    if got != expected {
        return Err(Error::Parse {
            path: path.into(),
            line: 1,
            msg: format!("expected header {:?}, found {:?}", expected.join(","), got.join(",")),
        });
    }
    Ok(())
}

/// Reads a node file into a fresh table.
pub fn load_nodes(path: impl AsRef<Path>) -> Result<NodeTable> {
    let path = path.as_ref();
    let mut rdr = reader(path)?;
    check_header(&mut rdr, path, &["id", "country"])?;
    let mut table = NodeTable::new();
    for row in rdr.records() {
        let row = row.map_err(|e| Error::Parse {
            path: path.into(),
            line: e.position().map_or(0, |p| p.line()),
            msg: e.to_string(),
        })?;
        let line = row.position().map_or(0, |p| p.line());
        if row.len() != 2 || row[0].is_empty() {
            return Err(Error::Parse {
                path: path.into(),
                line,
                msg: "expected `id,country`".into(),
            });
        }
        if table.get(&row[0]).is_some() {
            warn!("{}:{line}: duplicate node id {:?}, keeping first", path.display(), &row[0]);
            continue;
        }
        let id = table.intern(&row[0]);
        let country = match &row[1] {
            "" => None,
            code => Some(Country::parse(code).unwrap_or_else(|| {
                warn!("{}:{line}: unknown country code {code:?}", path.display());
                Country::UNKNOWN
            })),
        };
        table.set_country(id, country);
    }
    Ok(table)
}

/// Reads an edge file, interning unseen firm keys into `table`.
///
/// Patent rows are canonicalized (`src <= dst`); records are deduplicated on
/// `(src, dst, year, kind)` and self-loops are dropped.
pub fn load_edges(
    path: impl AsRef<Path>,
    kind: LinkKind,
    table: &mut NodeTable,
    opts: &LoadOptions,
) -> Result<LoadReport> {
    let path = path.as_ref();
    let mut rdr = reader(path)?;
    check_header(&mut rdr, path, &["src", "dst", "year"])?;

    let mut report = LoadReport::default();
    let mut seen = HashSet::new();
    let mut row = csv::StringRecord::new();
    loop {
        let more = rdr.read_record(&mut row).map_err(|e| Error::Parse {
            path: path.into(),
            line: e.position().map_or(0, |p| p.line()),
            msg: e.to_string(),
        })?;
        if !more {
            break;
        }
        let line = row.position().map_or(0, |p| p.line());
        let parsed = (row.len() == 3 && !row[0].is_empty() && !row[1].is_empty())
            .then(|| row[2].parse::<i32>().ok())
            .flatten();
        let Some(year) = parsed else {
            report.malformed += 1;
            if report.malformed > opts.max_malformed {
                return Err(Error::Parse {
                    path: path.into(),
                    line,
                    msg: format!("malformed edge row {:?}", row.iter().collect::<Vec<_>>()),
                });
            }
            continue;
        };
        if opts.window.is_some_and(|w| !w.contains(year)) {
            report.out_of_window += 1;
            continue;
        }
        if row[0] == row[1] {
            report.self_loops += 1;
            continue;
        }
        let src = table.intern(&row[0]);
        let dst = table.intern(&row[1]);
        let rec = TemporalEdgeRecord::new(src, dst, year, kind);
        if seen.insert(rec) {
            report.records.push(rec);
        } else {
            report.duplicates += 1;
        }
    }
    if report.malformed > 0 {
        warn!("{}: skipped {} malformed rows", path.display(), report.malformed);
    }
    Ok(report)
}

pub fn write_nodes(path: impl AsRef<Path>, table: &NodeTable) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let io = |e| Error::io(path, e);
    writeln!(w, "id,country").map_err(io)?;
    for id in table.ids() {
        let c = table.country(id).map(|c| c.to_string()).unwrap_or_default();
        writeln!(w, "{},{}", table.key(id), c).map_err(io)?;
    }
    w.flush().map_err(io)
}

pub fn write_edges(
    path: impl AsRef<Path>,
    table: &NodeTable,
    records: &[TemporalEdgeRecord],
) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let io = |e| Error::io(path, e);
    writeln!(w, "src,dst,year").map_err(io)?;
    for r in records {
        writeln!(w, "{},{},{}", table.key(r.src), table.key(r.dst), r.year).map_err(io)?;
    }
    w.flush().map_err(io)
}
