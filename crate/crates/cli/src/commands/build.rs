use std::fs;
use std::io::Write;
use std::time::Instant;

use anyhow::Result;
use firmnet_core::graph::{build_network, country_partition, expand_indirect, summarize, Country, LinkKind, Multiplicity};
use serde_json::json;

use crate::args::{BuildArgs, Kind, UsageError};
use crate::commands::{load_kind, load_table};
use crate::manifest::Run;

pub fn run(a: &BuildArgs, run: &mut Run) -> Result<()> {
    let kind = match a.kind {
        Kind::Patent => LinkKind::Patent,
        Kind::Share => LinkKind::Share,
    };
    let country = a
        .country
        .as_deref()
        .map(|c| Country::parse(c).ok_or_else(|| UsageError(format!("invalid country code `{c}`"))))
        .transpose()?;
    let mut table = load_table(a.nodes.as_ref(), run)?;
    let started = Instant::now();
    let report = load_kind(&a.edges, kind, &mut table, a.years.0, a.max_malformed, run)?;
    run.record_time("load", started);
    let mult = if a.multi { Multiplicity::Multi } else { Multiplicity::Simple };
    let mut net = run.timed("build", || build_network(&report.records, &table, Some(a.years.0), mult))?;
    if let Some(c) = country {
        net = country_partition(&net, c);
    }
    if let Some(depth) = a.expand {
        net = run.timed("expand", || expand_indirect(&net, depth, a.expand_cap))?;
    }
    let summary = run.timed("summarize", || summarize(&net));

    let doc = json!({
        "directed": net.is_directed(),
        "records": report.records.len(),
        "self_loops": report.self_loops,
        "malformed": report.malformed,
        "duplicates": report.duplicates,
        "out_of_window": report.out_of_window,
        "summary": summary,
    });
    fs::write(run.output("summary.json"), serde_json::to_string_pretty(&doc)? + "\n")?;
    let mut w = std::io::BufWriter::new(fs::File::create(run.output("degrees.csv"))?);
    writeln!(w, "degree,count")?;
    for (d, c) in &summary.degree_histogram {
        writeln!(w, "{d},{c}")?;
    }
    w.flush()?;
    run.extra("heap_bytes", net.heap_bytes());
    Ok(())
}
