use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;

use anyhow::{Context, Result};
use firmnet_core::stats::spearman;
use serde_json::{json, Value};

use crate::args::ReportArgs;
use crate::manifest::Run;

type Table = Vec<BTreeMap<String, String>>;

fn read_table(path: &Path) -> Result<Table> {
    let mut rdr = csv::Reader::from_path(path).with_context(|| format!("opening {}", path.display()))?;
    let headers = rdr.headers()?.clone();
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec.with_context(|| format!("reading {}", path.display()))?;
        rows.push(headers.iter().zip(rec.iter()).map(|(h, v)| (h.to_owned(), v.to_owned())).collect());
    }
    Ok(rows)
}

fn num(row: &BTreeMap<String, String>, key: &str) -> Result<f64> {
    let v = row.get(key).with_context(|| format!("missing column {key}"))?;
    v.parse().with_context(|| format!("column {key}: `{v}` is not a number"))
}

fn sanitize(s: &str) -> String {
    s.chars().map(|c| if c.is_ascii_alphanumeric() || c == '-' { c } else { '_' }).collect()
}

/// One curve per (scope, measure): `u,value_bits,p_combined`.
fn curves(prefix: &str, rows: &Table, run: &mut Run) -> Result<Value> {
    let mut groups: BTreeMap<(String, String), Vec<(usize, f64, String)>> = BTreeMap::new();
    for r in rows {
        let scope = r.get("scope").cloned().unwrap_or_default();
        let measure = r.get("measure").cloned().unwrap_or_default();
        let u = num(r, "u")? as usize;
        groups
            .entry((scope, measure))
            .or_default()
            .push((u, num(r, "value_bits")?, r.get("p_combined").cloned().unwrap_or_default()));
    }
    let mut peaks = serde_json::Map::new();
    for ((scope, measure), mut pts) in groups {
        pts.sort_by_key(|p| p.0);
        let tag = if scope.is_empty() { measure.clone() } else { format!("{measure}_{}", sanitize(&scope)) };
        let mut w = BufWriter::new(File::create(run.output(&format!("{prefix}curve_{tag}.csv")))?);
        writeln!(w, "u,value_bits,p_combined")?;
        for (u, v, p) in &pts {
            writeln!(w, "{u},{v},{p}")?;
        }
        w.flush()?;
        let best = pts.iter().max_by(|a, b| a.1.total_cmp(&b.1).then(b.0.cmp(&a.0))).expect("non-empty group");
        peaks.insert(tag, json!({ "argmax_u": best.0, "max_bits": best.1 }));
    }
    Ok(Value::Object(peaks))
}

/// Alpha-by-gamma grids of the cell means.
fn heatmaps(prefix: &str, rows: &Table, run: &mut Run) -> Result<()> {
    let mut alphas: Vec<String> = Vec::new();
    let mut gammas: Vec<String> = Vec::new();
    for r in rows {
        for (list, key) in [(&mut alphas, "alpha"), (&mut gammas, "gamma")] {
            let v = r[key].clone();
            if !list.contains(&v) {
                list.push(v);
            }
        }
    }
    for metric in ["mean_downtime", "failure_proportion"] {
        let cell: BTreeMap<(&str, &str), &str> = rows
            .iter()
            .map(|r| ((r["alpha"].as_str(), r["gamma"].as_str()), r[metric].as_str()))
            .collect();
        let mut w = BufWriter::new(File::create(run.output(&format!("{prefix}heatmap_{metric}.csv")))?);
        writeln!(w, "alpha,{}", gammas.iter().map(|g| format!("gamma={g}")).collect::<Vec<_>>().join(","))?;
        for a in &alphas {
            let vals: Vec<&str> = gammas.iter().map(|g| cell.get(&(a.as_str(), g.as_str())).copied().unwrap_or("")).collect();
            writeln!(w, "{a},{}", vals.join(","))?;
        }
        w.flush()?;
    }
    Ok(())
}

/// Country ranks under both metrics and their rank correlation.
fn ranks(prefix: &str, rows: &Table, run: &mut Run) -> Result<Value> {
    let live: Vec<_> = rows.iter().filter(|r| r.get("nodes").is_some_and(|n| n != "0")).collect();
    let tau: Vec<f64> = live.iter().map(|r| num(r, "mean_downtime")).collect::<Result<_>>()?;
    let phi: Vec<f64> = live.iter().map(|r| num(r, "failure_proportion")).collect::<Result<_>>()?;
    let rank_of = |v: &[f64]| {
        let mut idx: Vec<usize> = (0..v.len()).collect();
        idx.sort_by(|&a, &b| v[b].total_cmp(&v[a]).then(a.cmp(&b)));
        let mut r = vec![0; v.len()];
        for (pos, i) in idx.into_iter().enumerate() {
            r[i] = pos + 1;
        }
        r
    };
    let (rt, rp) = (rank_of(&tau), rank_of(&phi));
    let mut w = BufWriter::new(File::create(run.output(&format!("{prefix}country_ranks.csv")))?);
    writeln!(w, "country,downtime_rank,failure_rank")?;
    for (i, r) in live.iter().enumerate() {
        writeln!(w, "{},{},{}", r["country"], rt[i], rp[i])?;
    }
    w.flush()?;
    let rho = if live.len() >= 2 { Some(spearman(&tau, &phi)) } else { None };
    Ok(json!({ "countries": live.len(), "spearman": rho }))
}

pub fn run(a: &ReportArgs, run: &mut Run) -> Result<()> {
    let mut doc = serde_json::Map::new();
    for dir in &a.inputs {
        let name = dir
            .file_name()
            .map(|n| sanitize(&n.to_string_lossy()))
            .unwrap_or_else(|| "input".into());
        let prefix = if a.inputs.len() > 1 { format!("{name}_") } else { String::new() };
        let mut entry = serde_json::Map::new();
        let results = dir.join("results.csv");
        if results.exists() {
            run.input(&results)?;
            entry.insert("curves".into(), curves(&prefix, &read_table(&results)?, run)?);
        }
        let cells = dir.join("sweep_cells.csv");
        if cells.exists() {
            run.input(&cells)?;
            heatmaps(&prefix, &read_table(&cells)?, run)?;
            entry.insert("heatmaps".into(), json!(true));
        }
        let country = dir.join("country.csv");
        if country.exists() {
            run.input(&country)?;
            entry.insert("countries".into(), ranks(&prefix, &read_table(&country)?, run)?);
        }
        if entry.is_empty() {
            anyhow::bail!(firmnet_core::Error::Empty(format!(
                "{} has no results.csv, sweep_cells.csv or country.csv",
                dir.display()
            )));
        }
        doc.insert(name, Value::Object(entry));
    }
    fs::write(run.output("report.json"), serde_json::to_string_pretty(&doc)? + "\n")?;
    Ok(())
}
