//! Flag definitions and `--config` merging.
//!
//! A config file holds `key = value` lines (`#` starts a comment). Each key is
//! a long flag name without the dashes. Entries are appended after the command
//! line and parsed with self-overriding arguments, so a file value wins over
//! the same flag given on the command line.

use anyhow::{bail, Context, Result};
use clap::{Args, CommandFactory, FromArgMatches, Parser, Subcommand};
use std::ffi::OsString;
use std::path::PathBuf;

#[derive(Debug, Parser)]
#[command(name = "vbreceiver", version, about = "VB receivers for hidden Markov sources, frequency estimation and GDL operator counts")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// BER of every detector for a Markov source over AWGN.
    HmcAwgn(ChannelArgs),
    /// BER of every detector over quantized Rayleigh fading.
    HmcFading(ChannelArgs),
    /// RMS frequency error of the single-tone estimators.
    Freq(FreqArgs),
    /// Topology and operator counts of a factor model file.
    GdlCount(GdlArgs),
    /// KLD of plain and transformed VB on the bivariate power-exponential target.
    PeDemo(PeArgs),
    /// Small oracle-equivalence suites; exit status 2 on any failure.
    Selftest(SelftestArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::HmcAwgn(_) => "hmc-awgn",
            Command::HmcFading(_) => "hmc-fading",
            Command::Freq(_) => "freq",
            Command::GdlCount(_) => "gdl-count",
            Command::PeDemo(_) => "pe-demo",
            Command::Selftest(_) => "selftest",
        }
    }

    pub fn common(&self) -> &Common {
        match self {
            Command::HmcAwgn(a) | Command::HmcFading(a) => &a.common,
            Command::Freq(a) => &a.common,
            Command::GdlCount(a) => &a.common,
            Command::PeDemo(a) => &a.common,
            Command::Selftest(a) => &a.common,
        }
    }
}

#[derive(Debug, Args)]
pub struct Common {
    /// Base seed; trial `t` uses `seed ^ t`.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Key-value file whose entries override the flags.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// CSV destination; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Worker threads; defaults to all cores.
    #[arg(long)]
    pub jobs: Option<usize>,
    /// Record wall-clock milliseconds (otherwise `NA`, keeping output reproducible).
    #[arg(long)]
    pub timing: bool,
    /// Additional long-format CSV for plotting.
    #[arg(long = "plot-data")]
    pub plot_data: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ChannelArgs {
    /// Must agree with the subcommand when given.
    #[arg(long)]
    pub scenario: Option<String>,
    /// QAM order, also the number of source states.
    #[arg(long, default_value_t = 4)]
    pub m: usize,
    /// Fading quantization levels.
    #[arg(long, default_value_t = 8)]
    pub k: usize,
    /// Per-dimension variance of the fading process.
    #[arg(long, default_value_t = 0.5)]
    pub sigma2: f64,
    /// Comma-separated Eb/N0 grid in dB.
    #[arg(long, default_value = "10")]
    pub ebn0: String,
    /// Comma-separated fading correlation grid.
    #[arg(long)]
    pub rho: Option<String>,
    /// Comma-separated normalized Doppler grid, mapped to `ρ = J₀(2π f_D T_s)`.
    #[arg(long)]
    pub fdts: Option<String>,
    #[arg(long, default_value_t = 1000)]
    pub n: usize,
    #[arg(long, default_value_t = 100)]
    pub trials: usize,
    /// Comma-separated subset of ml,fb,va,vb,vb-acc,fcvb,fcvb-acc.
    #[arg(long, default_value = "ml,fb,va,vb,vb-acc,fcvb,fcvb-acc")]
    pub methods: String,
    /// KS stopping threshold of the VB family.
    #[arg(long, default_value_t = 0.01)]
    pub xi: f64,
    #[arg(long = "max-cycles", default_value_t = 100)]
    pub max_cycles: usize,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct FreqArgs {
    /// Comma-separated SNR grid in dB.
    #[arg(long, default_value = "5,15")]
    pub snr: String,
    #[arg(long, default_value_t = 64)]
    pub n: usize,
    /// True frequency in DFT bins.
    #[arg(long = "omega-bins", default_value_t = 1.1)]
    pub omega_bins: f64,
    #[arg(long, default_value_t = 1000)]
    pub trials: usize,
    /// Zero-padding factor of the frequency grid.
    #[arg(long, default_value_t = 8)]
    pub pad: usize,
    /// Comma-separated subset of periodogram,ml,map,marginal-map,mean,vb,tvb.
    #[arg(long, default_value = "periodogram,ml,map,marginal-map,mean,vb,tvb")]
    pub methods: String,
    /// VB and TVB cycles.
    #[arg(long, default_value_t = 5)]
    pub cycles: usize,
    /// Optional KS early stop for VB and TVB.
    #[arg(long = "ks-tol")]
    pub ks_tol: Option<f64>,
    /// joint-map, prior or exact-marginal.
    #[arg(long, default_value = "joint-map")]
    pub init: String,
    #[arg(long = "mu-a", default_value_t = 1.0)]
    pub mu_a: f64,
    #[arg(long = "r-a", default_value_t = 0.1)]
    pub r_a: f64,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct GdlArgs {
    /// Model file: header `m M n`, then one `|ω| idx.. values..` line per factor.
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// Comma-separated 1-based variables to ring-sum; all when absent.
    #[arg(long)]
    pub sum: Option<String>,
    /// Forward/backward split `i`; defaults to `⌈n/2⌉`.
    #[arg(long)]
    pub split: Option<usize>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct PeArgs {
    /// Comma-separated correlation grid.
    #[arg(long, default_value = "0.2,0.5,0.8")]
    pub rho: String,
    /// Diagonalizing map of the transformed approximation: ldu or eigen.
    #[arg(long, default_value = "ldu")]
    pub transform: String,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct SelftestArgs {
    #[command(flatten)]
    pub common: Common,
}

fn command() -> clap::Command {
    Cli::command().mut_subcommands(|s| s.args_override_self(true))
}

/// Usage line of `subcommand`, or of the tool when it is unknown.
pub fn usage(subcommand: &str) -> String {
    let mut cmd = command();
    cmd.build();
    match cmd.find_subcommand_mut(subcommand) {
        Some(sub) => sub.render_usage().to_string(),
        None => cmd.render_usage().to_string(),
    }
}

/// Parses `argv`, then re-parses with the `--config` entries appended.
pub fn parse(argv: Vec<OsString>) -> std::result::Result<Cli, ParseFailure> {
    let first = parse_once(&argv)?;
    let Some(path) = first.command.common().config.clone() else {
        return Ok(first);
    };
    let extra = config_args(&path).map_err(ParseFailure::Config)?;
    let mut merged = argv;
    merged.extend(extra.into_iter().map(OsString::from));
    parse_once(&merged)
}

fn parse_once(argv: &[OsString]) -> std::result::Result<Cli, ParseFailure> {
    let matches = command().try_get_matches_from(argv).map_err(ParseFailure::Clap)?;
    Cli::from_arg_matches(&matches).map_err(ParseFailure::Clap)
}

#[derive(Debug)]
pub enum ParseFailure {
    Clap(clap::Error),
    Config(anyhow::Error),
}

fn config_args(path: &PathBuf) -> Result<Vec<String>> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
    let mut out = Vec::new();
    for (ln, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            bail!("{}:{}: expected `key = value`", path.display(), ln + 1);
        };
        let (key, value) = (key.trim(), value.trim());
        if key == "config" {
            bail!("{}:{}: nested config files are not supported", path.display(), ln + 1);
        }
        if key == "timing" {
            match value {
                "true" => out.push("--timing".into()),
                "false" => {}
                _ => bail!("{}:{}: timing must be true or false", path.display(), ln + 1),
            }
            continue;
        }
        out.push(format!("--{key}"));
        out.push(value.to_string());
    }
    Ok(out)
}

/// Comma-separated list, each item parsed with `parse`.
pub fn list<T>(s: &str, what: &str, parse: impl Fn(&str) -> Option<T>) -> Result<Vec<T>> {
    let items: Vec<T> = s
        .split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| parse(t).with_context(|| format!("bad {what} entry `{t}`")))
        .collect::<Result<_>>()?;
    if items.is_empty() {
        bail!("empty {what} list");
    }
    Ok(items)
}

pub fn float_list(s: &str, what: &str) -> Result<Vec<f64>> {
    list(s, what, |t| t.parse::<f64>().ok().filter(|v| v.is_finite()))
}
