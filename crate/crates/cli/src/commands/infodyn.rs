use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};

use anyhow::Result;
use firmnet_core::graph::{Country, NodeTable};
use firmnet_core::infodyn::{
    aggregate_over_edges, select_k_by_ais, write_results, AggregateConfig, InfoParams, Measure, ResultRow,
    SeriesRole, TieRule, DEFAULT_P_FLOOR,
};
use firmnet_core::overlap::{build_existence_matrices, split_scope, ExistenceSet, PairScope, Reach, ScopeMode};
use log::warn;
use serde_json::json;

use crate::args::{InfodynArgs, KChoice, Ties, UsageError};
use crate::commands::load_pairs;
use crate::manifest::Run;

fn parse_measures(raw: &[String]) -> Result<Vec<Measure>> {
    let mut out = Vec::new();
    for m in raw {
        let m = m.trim().to_ascii_lowercase();
        if m == "te" {
            out.extend([Measure::TePS, Measure::TeSP]);
        } else {
            out.push(Measure::parse(&m).ok_or_else(|| {
                UsageError(format!("unknown measure `{m}` (mi, ais_p, ais_s, te_p_s, te_s_p, te)"))
            })?);
        }
    }
    out.dedup();
    Ok(out)
}

fn parse_scope(s: &str) -> Result<ScopeMode> {
    let s = s.trim();
    let (head, reach) = match s.split_once(':') {
        Some((h, r)) => (h, Some(r)),
        None => (s, None),
    };
    let reach_of = |r: Option<&str>| match r.map(str::to_ascii_lowercase).as_deref() {
        None | Some("intra") => Ok(Reach::IntraNational),
        Some("international") => Ok(Reach::International),
        Some(other) => Err(UsageError(format!("unknown scope reach `{other}`"))),
    };
    match (head.to_ascii_lowercase().as_str(), reach) {
        ("intra", None) => Ok(ScopeMode::IntraNational),
        ("international", None) => Ok(ScopeMode::International),
        _ => {
            let c = Country::parse(head).ok_or_else(|| UsageError(format!("unknown scope `{s}`")))?;
            Ok(ScopeMode::Country(c, reach_of(reach)?))
        }
    }
}

/// Series whose own history conditions the measure.
fn target_of(m: Measure) -> Option<SeriesRole> {
    match m {
        Measure::AisP | Measure::TeSP => Some(SeriesRole::Patent),
        Measure::AisS | Measure::TePS => Some(SeriesRole::Share),
        Measure::Mi => None,
    }
}

fn role_label(r: SeriesRole) -> &'static str {
    match r {
        SeriesRole::Patent => "patent",
        SeriesRole::Share => "share",
    }
}

fn scoped_sets(a: &InfodynArgs, set: ExistenceSet, table: &NodeTable, run: &mut Run) -> Result<Vec<(Option<String>, ExistenceSet)>> {
    if a.split.is_empty() {
        return Ok(vec![(None, set)]);
    }
    if a.inputs.nodes.is_none() {
        return Err(UsageError("--split needs --nodes with country codes".into()).into());
    }
    let mut out = Vec::new();
    let mut sizes = BTreeMap::new();
    for s in &a.split {
        let mode = parse_scope(s)?;
        let split = split_scope(&set, mode, table);
        if !split.unknown.is_empty() {
            warn!("{} pairs without a known country excluded from scope {}", split.unknown.len(), mode.label());
        }
        sizes.insert(mode.label(), json!({ "pairs": split.selected.len(), "unknown": split.unknown.len() }));
        out.push((Some(mode.label()), split.selected));
    }
    run.extra("scopes", sizes);
    Ok(out)
}

pub fn run(a: &InfodynArgs, seed: u64, run: &mut Run) -> Result<()> {
    let measures = parse_measures(&a.measure)?;
    if a.delays.0.is_empty() {
        return Err(UsageError("--delays is empty".into()).into());
    }
    let data = load_pairs(&a.inputs, run)?;
    let set = build_existence_matrices(
        &data.patents.records,
        &data.shares.records,
        data.window,
        &PairScope::ObservedPairs,
    );
    run.extra("pairs", set.len());
    let scopes = scoped_sets(a, set, &data.table, run)?;

    let cfg = AggregateConfig {
        surrogates: a.surrogates,
        seed,
        p_floor: DEFAULT_P_FLOOR,
        ties: match a.ties {
            Ties::Conservative => TieRule::Conservative,
            Ties::Randomized => TieRule::Randomized,
        },
    };
    let base = InfoParams {
        k: 1,
        l: a.l,
        tau_x: a.tau_x,
        tau_y: a.tau_y,
        u: 0,
    };
    let k_cap = a.k_max.min(data.window.len().saturating_sub(1)).max(1);

    let mut rows = Vec::new();
    let mut chosen = BTreeMap::new();
    let mut curves: Vec<(String, &'static str, usize, f64)> = Vec::new();
    let started = std::time::Instant::now();
    for (scope, subset) in &scopes {
        let mut k_for = |role: SeriesRole| -> Result<usize> {
            match a.k {
                KChoice::Fixed(k) => Ok(k),
                KChoice::AutoAis => {
                    let key = format!("{}/{}", scope.as_deref().unwrap_or("all"), role_label(role));
                    if let Some(&k) = chosen.get(&key) {
                        return Ok(k);
                    }
                    let (k, curve) = select_k_by_ais::<f64>(subset, role, k_cap, a.tau_x)?;
                    for (kk, v) in curve {
                        curves.push((scope.clone().unwrap_or_else(|| "all".into()), role_label(role), kk, v));
                    }
                    chosen.insert(key, k);
                    Ok(k)
                }
            }
        };
        for &m in &measures {
            let k = target_of(m).map(&mut k_for).transpose()?.unwrap_or(match a.k {
                KChoice::Fixed(k) => k,
                KChoice::AutoAis => 1,
            });
            let params = InfoParams { k, ..base };
            let delays: &[usize] = if matches!(m, Measure::AisP | Measure::AisS) { &[0] } else { &a.delays.0 };
            for &u in delays {
                let agg = aggregate_over_edges::<f64>(subset, m, &params.with_u(u), &cfg)?;
                if agg.failed > 0 {
                    warn!("{} u={u}: {} edges lacked samples and were skipped", m.label(), agg.failed);
                }
                rows.push(ResultRow::from_aggregate(scope.clone(), &agg));
            }
        }
    }
    run.record_time("estimate", started);
    write_results(run.output("results.csv"), &rows)?;
    if !chosen.is_empty() {
        run.extra("k_auto", &chosen);
        let mut w = BufWriter::new(File::create(run.output("ais_curve.csv"))?);
        writeln!(w, "scope,target,k,ais_bits")?;
        for (s, t, k, v) in &curves {
            writeln!(w, "{s},{t},{k},{v}")?;
        }
        w.flush()?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn te_expands_to_both_directions() {
        let m = parse_measures(&["mi".into(), "te".into()]).unwrap();
        assert_eq!(m, vec![Measure::Mi, Measure::TePS, Measure::TeSP]);
        assert!(parse_measures(&["xx".into()]).is_err());
    }

    #[test]
    fn scopes() {
        assert_eq!(parse_scope("intra").unwrap(), ScopeMode::IntraNational);
        assert_eq!(parse_scope("international").unwrap(), ScopeMode::International);
        let us = Country::parse("US").unwrap();
        assert_eq!(parse_scope("US:international").unwrap(), ScopeMode::Country(us, Reach::International));
        assert_eq!(parse_scope("us").unwrap(), ScopeMode::Country(us, Reach::IntraNational));
        assert!(parse_scope("USA").is_err());
    }
}
