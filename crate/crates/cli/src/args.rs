use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use firmnet_core::graph::YearWindow;

/// A malformed flag value or configuration entry.
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

#[derive(Debug, Parser)]
#[command(name = "firmnet", version, about = "Interfirm network information dynamics and cascade simulation")]
pub struct Cli {
    /// Master seed; every random stream is derived from it.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads; 0 uses every core. Results do not depend on it.
    #[arg(long, global = true, default_value_t = 0)]
    pub threads: usize,
    /// Output directory (created if missing).
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate synthetic inputs.
    #[command(subcommand)]
    Gen(GenCommand),
    /// Load an edge list and summarise its topology.
    Build(BuildArgs),
    /// Per-year overlap networks and the edge-existence matrix dump.
    Overlap(OverlapArgs),
    /// Mutual information, active storage and transfer entropy across edges.
    Infodyn(InfodynArgs),
    /// Cascading-failure runs, sweeps and per-country comparisons.
    Cascade(CascadeArgs),
    /// Plot-ready tables from earlier output directories.
    Report(ReportArgs),
    /// Repeat the command recorded in a manifest.
    Rerun(RerunArgs),
}

#[derive(Debug, Subcommand)]
pub enum GenCommand {
    /// Paired firms with a planted patent-to-shareholding delay.
    Coupled(CoupledArgs),
    /// Heavy-tailed directed shareholding network.
    Shareholding(ShareholdingArgs),
    /// Multi-country shareholding network with per-country structure.
    Suite(SuiteArgs),
}

/// Inclusive year range written `START-END` (or a single year).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Years(pub YearWindow);

impl FromStr for Years {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (a, b) = match s.split_once(['-', ':']) {
            Some((a, b)) => (a, b),
            None => (s, s),
        };
        let parse = |x: &str| x.trim().parse::<i32>().map_err(|e| format!("bad year `{x}`: {e}"));
        YearWindow::new(parse(a)?, parse(b)?)
            .map(Years)
            .map_err(|e| e.to_string())
    }
}

impl Default for Years {
    fn default() -> Self {
        Years(YearWindow::default())
    }
}

impl fmt::Display for Years {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.0.start(), self.0.end())
    }
}

/// Delay list: `0..6` (inclusive), `0,2,4`, or a single value.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Delays(pub Vec<usize>);

impl FromStr for Delays {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let num = |x: &str| x.trim().parse::<usize>().map_err(|e| format!("bad delay `{x}`: {e}"));
        let v: Vec<usize> = if let Some((a, b)) = s.split_once("..") {
            let (a, b) = (num(a)?, num(b.trim_start_matches('='))?);
            if a > b {
                return Err(format!("empty delay range {s}"));
            }
            (a..=b).collect()
        } else {
            s.split(',').map(num).collect::<Result<_, _>>()?
        };
        Ok(Delays(v))
    }
}

/// Embedding length or `auto-ais`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KChoice {
    Fixed(usize),
    AutoAis,
}

impl FromStr for KChoice {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "auto-ais" || s == "auto" {
            return Ok(KChoice::AutoAis);
        }
        s.parse()
            .map(KChoice::Fixed)
            .map_err(|_| format!("expected a positive integer or `auto-ais`, got `{s}`"))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Kind {
    Patent,
    Share,
}

/// Tie handling in per-edge surrogate p-values.
#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Ties {
    Conservative,
    Randomized,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum CascadeMode {
    Run,
    Sweep,
    Country,
}

#[derive(Debug, Args)]
pub struct CoupledArgs {
    #[arg(long)]
    pub pairs: usize,
    #[arg(long, default_value_t = 4)]
    pub delay: usize,
    #[arg(long, default_value_t = Years::default())]
    pub years: Years,
    #[arg(long, default_value_t = 0.3)]
    pub p_patent: f64,
    #[arg(long, default_value_t = 0.6)]
    pub q_convert: f64,
    #[arg(long, default_value_t = 0.02)]
    pub p_noise: f64,
    #[arg(long, default_value_t = 4)]
    pub countries: usize,
}

#[derive(Debug, Args)]
pub struct ShareholdingArgs {
    #[arg(long)]
    pub firms: usize,
    #[arg(long, default_value_t = 1.0)]
    pub exponent: f64,
    /// Fraction of firms spent on isolated investee-shareholder dyads.
    #[arg(long, default_value_t = 0.5)]
    pub mix: f64,
    #[arg(long, default_value_t = 0.05)]
    pub new_root: f64,
    #[arg(long, default_value_t = 1)]
    pub edges_per_node: usize,
    #[arg(long, default_value_t = 20)]
    pub countries: usize,
    #[arg(long, default_value_t = 0.0)]
    pub assortativity: f64,
    /// Year stamped on every edge.
    #[arg(long, default_value_t = 2016)]
    pub year: i32,
}

#[derive(Debug, Args)]
pub struct SuiteArgs {
    #[arg(long, default_value_t = 20)]
    pub countries: usize,
    #[arg(long, default_value_t = 2000)]
    pub firms_per_country: usize,
    #[arg(long, default_value_t = 2016)]
    pub year: i32,
}

#[derive(Debug, Args)]
pub struct BuildArgs {
    /// Node file (`id,country`).
    #[arg(long)]
    pub nodes: Option<PathBuf>,
    /// Edge file (`src,dst,year`).
    #[arg(long)]
    pub edges: PathBuf,
    #[arg(long, value_enum)]
    pub kind: Kind,
    #[arg(long, default_value_t = Years::default())]
    pub years: Years,
    /// Keep repeated pairs as parallel edges.
    #[arg(long)]
    pub multi: bool,
    /// Add indirect shareholding edges up to this many hops.
    #[arg(long)]
    pub expand: Option<usize>,
    #[arg(long, default_value_t = firmnet_core::graph::DEFAULT_EXPAND_CAP)]
    pub expand_cap: usize,
    /// Restrict to the firms of one country.
    #[arg(long)]
    pub country: Option<String>,
    /// Malformed rows tolerated before aborting.
    #[arg(long, default_value_t = 0)]
    pub max_malformed: usize,
}

#[derive(Debug, Args)]
pub struct PairInputs {
    #[arg(long)]
    pub nodes: Option<PathBuf>,
    #[arg(long)]
    pub patents: PathBuf,
    #[arg(long)]
    pub shares: PathBuf,
    #[arg(long, default_value_t = Years::default())]
    pub years: Years,
    #[arg(long, default_value_t = 0)]
    pub max_malformed: usize,
}

#[derive(Debug, Args)]
pub struct OverlapArgs {
    #[command(flatten)]
    pub inputs: PairInputs,
    /// Years to emit overlap networks for (default: the whole window).
    #[arg(long, value_delimiter = ',')]
    pub year: Vec<i32>,
}

#[derive(Debug, Args)]
pub struct InfodynArgs {
    #[command(flatten)]
    pub inputs: PairInputs,
    /// mi, ais_p, ais_s, te_p_s, te_s_p, or te for both directions.
    #[arg(long, value_delimiter = ',', required = true)]
    pub measure: Vec<String>,
    #[arg(long, default_value = "0")]
    pub delays: Delays,
    #[arg(long, default_value = "5")]
    pub k: KChoice,
    /// Largest history tried by `--k auto-ais` (capped at window length - 1).
    #[arg(long, default_value_t = 8)]
    pub k_max: usize,
    #[arg(long, default_value_t = 1)]
    pub l: usize,
    #[arg(long, default_value_t = 1)]
    pub tau_x: usize,
    #[arg(long, default_value_t = 1)]
    pub tau_y: usize,
    /// Surrogates per edge; 0 skips significance testing.
    #[arg(long, default_value_t = 200)]
    pub surrogates: usize,
    /// Tie handling in per-edge p-values before they are combined.
    #[arg(long, value_enum, default_value_t = Ties::Randomized)]
    pub ties: Ties,
    /// Scopes: intra, international, CC:intra, CC:international.
    #[arg(long, value_delimiter = ',')]
    pub split: Vec<String>,
}

#[derive(Debug, Args)]
pub struct CascadeArgs {
    #[arg(long)]
    pub nodes: Option<PathBuf>,
    /// Shareholding edge file (`src,dst,year`, investee to shareholder).
    #[arg(long)]
    pub edges: PathBuf,
    #[arg(long, default_value_t = Years::default())]
    pub years: Years,
    #[arg(long, value_enum, default_value_t = CascadeMode::Run)]
    pub mode: CascadeMode,
    #[arg(long, default_value_t = 0.2)]
    pub alpha: f64,
    #[arg(long, default_value_t = 1.0)]
    pub gamma: f64,
    #[arg(long, default_value_t = firmnet_core::cascade::DEFAULT_STEPS)]
    pub steps: usize,
    /// Fraction of firms failed at step zero.
    #[arg(long, default_value_t = 0.1)]
    pub shock: f64,
    /// Sweep grid (default 0.2,0.4,...,1.0).
    #[arg(long, value_delimiter = ',')]
    pub alphas: Vec<f64>,
    /// Sweep grid (default 1,2,...,5).
    #[arg(long, value_delimiter = ',')]
    pub gammas: Vec<f64>,
    #[arg(long, default_value_t = 30)]
    pub replicates: usize,
    /// Countries for `--mode country` (default: the twenty largest economies).
    #[arg(long, value_delimiter = ',')]
    pub countries: Vec<String>,
    /// Write the full failure matrix as `failures.fmx`.
    #[arg(long)]
    pub dump_fmx: bool,
    /// Largest failure matrix, in bits, that `--dump-fmx` will keep.
    #[arg(long, default_value_t = firmnet_core::cascade::DEFAULT_BIT_BUDGET)]
    pub bit_budget: u128,
    #[arg(long, default_value_t = 0)]
    pub max_malformed: usize,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// Output directories of earlier `infodyn` / `cascade` runs.
    #[arg(long = "input", required = true, value_delimiter = ',')]
    pub inputs: Vec<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RerunArgs {
    pub manifest: PathBuf,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn year_ranges() {
        assert_eq!("2008-2016".parse::<Years>().unwrap(), Years::default());
        assert_eq!("2010".parse::<Years>().unwrap().0.len(), 1);
        assert!("2016-2008".parse::<Years>().is_err());
    }

    #[test]
    fn delay_lists() {
        assert_eq!("0..6".parse::<Delays>().unwrap().0, (0..=6).collect::<Vec<_>>());
        assert_eq!("1,3".parse::<Delays>().unwrap().0, vec![1, 3]);
        assert!("4..1".parse::<Delays>().is_err());
    }

    #[test]
    fn k_choice() {
        assert_eq!("auto-ais".parse::<KChoice>().unwrap(), KChoice::AutoAis);
        assert_eq!("3".parse::<KChoice>().unwrap(), KChoice::Fixed(3));
    }

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
