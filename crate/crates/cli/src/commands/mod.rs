mod build;
mod cascade;
mod gen;
mod infodyn;
mod overlap;
mod report;

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use firmnet_core::graph::{load_edges, load_nodes, LinkKind, LoadOptions, LoadReport, NodeTable, YearWindow};
use log::{info, warn};

use crate::args::{Cli, Command, GenCommand, PairInputs, UsageError};
use crate::config::{merge_config, Argv};
use crate::manifest::{Run, RunManifest};

pub fn dispatch(cli: Cli, argv: Argv) -> Result<()> {
    if let Command::Rerun(r) = &cli.command {
        return rerun(&r.manifest, &cli.out, cli.threads);
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads)
        .build_global()
        .context("configuring the worker pool")?;
    let name = match &cli.command {
        Command::Gen(GenCommand::Coupled(_)) => "gen coupled",
        Command::Gen(GenCommand::Shareholding(_)) => "gen shareholding",
        Command::Gen(GenCommand::Suite(_)) => "gen suite",
        Command::Build(_) => "build",
        Command::Overlap(_) => "overlap",
        Command::Infodyn(_) => "infodyn",
        Command::Cascade(_) => "cascade",
        Command::Report(_) => "report",
        Command::Rerun(_) => unreachable!("handled above"),
    };
    let mut run = Run::start(name, &argv, &cli.out, cli.seed, cli.threads)?;
    let seed = cli.seed;
    match cli.command {
        Command::Gen(GenCommand::Coupled(a)) => gen::coupled(&a, seed, &mut run)?,
        Command::Gen(GenCommand::Shareholding(a)) => gen::shareholding(&a, seed, &mut run)?,
        Command::Gen(GenCommand::Suite(a)) => gen::suite(&a, seed, &mut run)?,
        Command::Build(a) => build::run(&a, &mut run)?,
        Command::Overlap(a) => overlap::run(&a, &mut run)?,
        Command::Infodyn(a) => infodyn::run(&a, seed, &mut run)?,
        Command::Cascade(a) => cascade::run(&a, seed, &mut run)?,
        Command::Report(a) => report::run(&a, &mut run)?,
        Command::Rerun(_) => unreachable!("handled above"),
    }
    run.finish()
}

/// Drops `--out`, `--threads` and `--seed` (with their values) from an argument list.
fn strip_globals(args: &[String]) -> Vec<String> {
    const GLOBALS: [&str; 3] = ["--out", "--threads", "--seed"];
    let mut out = Vec::new();
    let mut skip = false;
    for a in args {
        if skip {
            skip = false;
            continue;
        }
        if GLOBALS.contains(&a.as_str()) {
            skip = true;
            continue;
        }
        if GLOBALS.iter().any(|g| a.starts_with(&format!("{g}="))) {
            continue;
        }
        out.push(a.clone());
    }
    out
}

fn rerun(manifest: &Path, out: &Path, threads: usize) -> Result<()> {
    let m = RunManifest::load(manifest)?;
    let mut raw = vec!["firmnet".to_owned()];
    raw.extend(strip_globals(&m.argv));
    raw.extend([
        "--seed".to_owned(),
        m.seed.to_string(),
        "--threads".to_owned(),
        threads.to_string(),
        "--out".to_owned(),
        out.display().to_string(),
    ]);
    info!("re-running: {}", raw.join(" "));
    let argv = merge_config(&raw)?;
    let cli = <Cli as clap::Parser>::try_parse_from(&argv.effective)
        .map_err(|e| UsageError(format!("manifest arguments no longer parse: {e}")))?;
    if matches!(cli.command, Command::Rerun(_)) {
        return Err(UsageError("a manifest cannot record a rerun".into()).into());
    }
    dispatch(cli, argv)
}

pub(crate) fn load_table(nodes: Option<&PathBuf>, run: &mut Run) -> Result<NodeTable> {
    match nodes {
        Some(p) => {
            run.input(p)?;
            Ok(load_nodes(p)?)
        }
        None => Ok(NodeTable::new()),
    }
}

pub(crate) fn load_kind(
    path: &Path,
    kind: LinkKind,
    table: &mut NodeTable,
    window: YearWindow,
    max_malformed: usize,
    run: &mut Run,
) -> Result<LoadReport> {
    run.input(path)?;
    let opts = LoadOptions {
        window: Some(window),
        max_malformed,
    };
    let report = load_edges(path, kind, table, &opts)?;
    if report.self_loops + report.malformed + report.out_of_window > 0 {
        warn!(
            "{}: dropped {} self-loops, {} malformed rows, {} rows outside {}-{}",
            path.display(),
            report.self_loops,
            report.malformed,
            report.out_of_window,
            window.start(),
            window.end()
        );
    }
    Ok(report)
}

pub(crate) struct PairData {
    pub table: NodeTable,
    pub patents: LoadReport,
    pub shares: LoadReport,
    pub window: YearWindow,
}

pub(crate) fn load_pairs(inputs: &PairInputs, run: &mut Run) -> Result<PairData> {
    let window = inputs.years.0;
    let mut table = load_table(inputs.nodes.as_ref(), run)?;
    let patents = load_kind(&inputs.patents, LinkKind::Patent, &mut table, window, inputs.max_malformed, run)?;
    let shares = load_kind(&inputs.shares, LinkKind::Share, &mut table, window, inputs.max_malformed, run)?;
    run.extra(
        "records",
        serde_json::json!({ "patent": patents.records.len(), "share": shares.records.len() }),
    );
    Ok(PairData {
        table,
        patents,
        shares,
        window,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn globals_are_stripped() {
        let a: Vec<String> = ["--seed", "3", "cascade", "--out=x", "--threads", "8", "--alpha", "0.2"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        assert_eq!(strip_globals(&a), vec!["cascade", "--alpha", "0.2"]);
    }
}
