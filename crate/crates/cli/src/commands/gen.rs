use std::fs;

use anyhow::Result;
use firmnet_core::graph::{summarize, write_edges, write_nodes};
use firmnet_core::synth::{
    gen_country_suite, gen_coupled, gen_shareholding, write_network_csv, CoupledGenParams, ShareGenParams,
};

use crate::args::{CoupledArgs, ShareholdingArgs, SuiteArgs};
use crate::manifest::Run;

pub fn coupled(a: &CoupledArgs, seed: u64, run: &mut Run) -> Result<()> {
    let params = CoupledGenParams {
        n_pairs: a.pairs,
        years: a.years.0,
        p_patent: a.p_patent,
        q_convert: a.q_convert,
        d_delay: a.delay,
        p_noise_share: a.p_noise,
        n_countries: a.countries,
        seed,
    };
    let data = run.timed("generate", || gen_coupled(&params))?;
    write_nodes(run.output("nodes.csv"), &data.table)?;
    write_edges(run.output("patents.csv"), &data.table, &data.patents)?;
    write_edges(run.output("shares.csv"), &data.table, &data.shares)?;
    let truth = serde_json::to_string_pretty(&data.truth)?;
    fs::write(run.output("truth.json"), truth + "\n")?;
    run.extra("converted_pairs", data.truth.converted.len());
    Ok(())
}

pub fn shareholding(a: &ShareholdingArgs, seed: u64, run: &mut Run) -> Result<()> {
    let params = ShareGenParams {
        n_nodes: a.firms,
        attachment_exponent: a.exponent,
        component_mix: a.mix,
        new_root_prob: a.new_root,
        edges_per_node: a.edges_per_node,
        n_countries: a.countries,
        country_assortativity: a.assortativity,
        seed,
    };
    let net = run.timed("generate", || gen_shareholding(&params))?;
    write_network_csv(&net, run.output("nodes.csv"), run.output("shares.csv"), a.year)?;
    let summary = summarize(&net);
    fs::write(run.output("summary.json"), serde_json::to_string_pretty(&summary)? + "\n")?;
    Ok(())
}

pub fn suite(a: &SuiteArgs, seed: u64, run: &mut Run) -> Result<()> {
    let net = run.timed("generate", || gen_country_suite(a.countries, a.firms_per_country, seed))?;
    write_network_csv(&net, run.output("nodes.csv"), run.output("shares.csv"), a.year)?;
    Ok(())
}
