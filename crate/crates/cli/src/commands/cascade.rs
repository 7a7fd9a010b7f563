use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::time::Instant;

use anyhow::Result;
use firmnet_core::cascade::{
    country_sweep, default_alpha_grid, default_gamma_grid, sweep, write_country_csv, write_fmx, write_sweep_csv,
    CascadeEngine, CascadeGraph, CascadeParams, FailureRecord, SweepConfig,
};
use firmnet_core::graph::{build_network, country_partition, Country, LinkKind, Multiplicity, Network};
use firmnet_core::stats::spearman;
use firmnet_core::synth::TOP20_COUNTRIES;
use log::warn;

use crate::args::{CascadeArgs, CascadeMode, UsageError};
use crate::commands::{load_kind, load_table};
use crate::manifest::Run;

pub fn run(a: &CascadeArgs, seed: u64, run: &mut Run) -> Result<()> {
    let started = Instant::now();
    let mut table = load_table(a.nodes.as_ref(), run)?;
    let report = load_kind(&a.edges, LinkKind::Share, &mut table, a.years.0, a.max_malformed, run)?;
    let net = build_network(&report.records, &table, Some(a.years.0), Multiplicity::Simple)?;
    let net = if net.node_count() == 0 { Network::empty(true, Multiplicity::Simple) } else { net };
    run.record_time("load", started);
    run.extra("nodes", net.node_count());
    run.extra("edges", net.edge_count());

    let params = CascadeParams {
        alpha: a.alpha,
        gamma: a.gamma,
        steps: a.steps,
        shock_fraction: a.shock,
        seed,
    };
    match a.mode {
        CascadeMode::Run => single(a, &net, params, run),
        CascadeMode::Sweep => grid(a, &net, params, run),
        CascadeMode::Country => countries(a, &net, params, run),
    }
}

fn single(a: &CascadeArgs, net: &Network, params: CascadeParams<f64>, run: &mut Run) -> Result<()> {
    let graph = CascadeGraph::from_network(net)?;
    let engine = CascadeEngine::new(&graph, params)?;
    let record = if a.dump_fmx {
        FailureRecord::Full {
            budget_bits: a.bit_budget,
        }
    } else {
        FailureRecord::Summary
    };
    let out = run.timed("simulate", || engine.run(record))?;
    let m = &out.metrics;
    let step = engine.step_params();

    let mut w = BufWriter::new(File::create(run.output("metrics.csv"))?);
    writeln!(
        w,
        "alpha,gamma,steps,shock_fraction,seed,k_step,r_step,nodes,edges,shock_size,mean_downtime,failure_proportion"
    )?;
    writeln!(
        w,
        "{},{},{},{},{},{},{},{},{},{},{},{}",
        params.alpha,
        params.gamma,
        params.steps,
        params.shock_fraction,
        params.seed,
        step.k_step,
        step.r_step,
        m.nodes,
        graph.edge_count(),
        m.shock_size,
        m.mean_downtime,
        m.failure_proportion
    )?;
    w.flush()?;

    let mut w = BufWriter::new(File::create(run.output("per_step.csv"))?);
    writeln!(w, "step,new_failures,failed")?;
    let mut failed = m.shock_size;
    for (t, c) in m.per_step_new_failures.iter().enumerate() {
        failed += c;
        writeln!(w, "{},{c},{failed}", t + 1)?;
    }
    w.flush()?;

    if let Some(matrix) = &out.matrix {
        write_fmx(run.output("failures.fmx"), matrix)?;
    }
    if out.matrix_refused {
        warn!("failure matrix not written: {} x {} bits exceeds --bit-budget", m.nodes, params.steps);
        run.extra("fmx_refused", true);
    }
    Ok(())
}

fn grid(a: &CascadeArgs, net: &Network, params: CascadeParams<f64>, run: &mut Run) -> Result<()> {
    let graph = CascadeGraph::from_network(net)?;
    let cfg = SweepConfig {
        alphas: if a.alphas.is_empty() { default_alpha_grid() } else { a.alphas.clone() },
        gammas: if a.gammas.is_empty() { default_gamma_grid() } else { a.gammas.clone() },
        steps: params.steps,
        shock_fraction: params.shock_fraction,
        replicates: a.replicates,
        seed: params.seed,
    };
    let table = run.timed("simulate", || sweep(&graph, &cfg))?;
    write_sweep_csv(run.output("sweep.csv"), &table)?;
    let mut w = BufWriter::new(File::create(run.output("sweep_cells.csv"))?);
    writeln!(
        w,
        "alpha,gamma,runs,mean_downtime,mean_downtime_se,failure_proportion,failure_proportion_se"
    )?;
    for c in &table.cells {
        writeln!(
            w,
            "{},{},{},{},{},{},{}",
            c.alpha,
            c.gamma,
            c.runs,
            c.mean_downtime,
            c.mean_downtime_se,
            c.failure_proportion,
            c.failure_proportion_se
        )?;
    }
    w.flush()?;
    Ok(())
}

fn countries(a: &CascadeArgs, net: &Network, params: CascadeParams<f64>, run: &mut Run) -> Result<()> {
    if !net.has_countries() {
        return Err(UsageError("--mode country needs --nodes with country codes".into()).into());
    }
    let codes: Vec<String> = if a.countries.is_empty() {
        TOP20_COUNTRIES.iter().map(|c| c.to_string()).collect()
    } else {
        a.countries.clone()
    };
    let mut nets = BTreeMap::new();
    for code in &codes {
        let c = Country::parse(code).ok_or_else(|| UsageError(format!("invalid country code `{code}`")))?;
        nets.insert(c.to_string(), country_partition(net, c));
    }
    let rows = run.timed("simulate", || country_sweep(&nets, &params))?;
    write_country_csv(run.output("country.csv"), &rows)?;
    for r in &rows {
        run.seed(&format!("country:{}", r.country), r.seed);
    }
    let live: Vec<_> = rows.iter().filter(|r| !r.empty).collect();
    if live.len() >= 2 {
        let tau: Vec<f64> = live.iter().map(|r| r.metrics.mean_downtime).collect();
        let phi: Vec<f64> = live.iter().map(|r| r.metrics.failure_proportion).collect();
        run.extra("spearman_downtime_failure", spearman(&tau, &phi));
    }
    Ok(())
}
