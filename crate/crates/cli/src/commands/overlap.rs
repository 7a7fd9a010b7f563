use std::fs::File;
use std::io::{BufWriter, Write};

use anyhow::Result;
use firmnet_core::overlap::{build_existence_matrices, build_overlap_network, write_matrix_dump, PairScope};

use crate::args::OverlapArgs;
use crate::commands::load_pairs;
use crate::manifest::Run;

pub fn run(a: &OverlapArgs, run: &mut Run) -> Result<()> {
    let data = load_pairs(&a.inputs, run)?;
    let set = run.timed("matrices", || {
        build_existence_matrices(
            &data.patents.records,
            &data.shares.records,
            data.window,
            &PairScope::ObservedPairs,
        )
    });
    write_matrix_dump(run.output("matrices.csv"), &set, &data.table)?;
    let years: Vec<i32> = if a.year.is_empty() {
        data.window.years().collect()
    } else {
        a.year.clone()
    };

    let mut summary = BufWriter::new(File::create(run.output("overlap_summary.csv"))?);
    writeln!(summary, "year,nodes,edges")?;
    for y in years {
        let ov = build_overlap_network(&set, y, &data.table)?;
        let net = &ov.network;
        writeln!(summary, "{y},{},{}", net.node_count(), net.edge_count())?;
        let mut w = BufWriter::new(File::create(run.output(&format!("overlap_{y}.csv")))?);
        writeln!(w, "src,dst")?;
        for (s, t) in net.edges() {
            writeln!(w, "{},{}", net.key(s as usize), net.key(t as usize))?;
        }
        w.flush()?;
    }
    summary.flush()?;
    run.extra("pairs", set.len());
    Ok(())
}
