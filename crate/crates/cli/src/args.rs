use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, CommandFactory, FromArgMatches, Parser, Subcommand};
use latticehull::experiments::{EstimatorKind, Functional};

#[derive(Debug, Parser)]
#[command(name = "latticehull", version, about = "Monte Carlo studies of randomized integer convex hulls")]
pub struct Cli {
    /// Worker threads; 1 gives serial runs. Defaults to the available cores.
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    /// File of `key = value` lines supplying defaults for the subcommand's flags.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Estimate the mean-width (or area) loss at one scale.
    WidthDiff(WidthDiffArgs),
    /// Run a scale study and fit the log-log exponent.
    Scaling(ScalingArgs),
    /// Probability that a cap misses the random lattice.
    CapProb(CapProbArgs),
    /// Flatness constants of a body.
    Tau(TauArgs),
    /// Large-scale limit of the width loss for a polygon.
    Gamma(GammaArgs),
    /// Mean lattice point count against the body's volume.
    CountCheck(CountArgs),
}

#[derive(Debug, Args)]
pub struct Common {
    /// Body name (disk, disk-r2, square, square-s3, ellipse, hexagon, ball3, cube)
    /// or a polygon file with one `x y` vertex per line.
    #[arg(long)]
    pub body: String,

    #[arg(long, env = "LATTICEHULL_SEED", default_value_t = 0)]
    pub seed: u64,

    #[arg(long, default_value_t = 2000)]
    pub n_lattices: usize,

    /// Append CSV rows here as well as printing them.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct WidthDiffArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    pub lambda: f64,
    #[arg(long, default_value_t = 1024)]
    pub n_dirs: usize,
    #[arg(long, default_value_t = 64)]
    pub n_t: usize,
    #[arg(long, default_value = "direct", value_parser = parse_estimator)]
    pub estimator: EstimatorKind,
    #[arg(long, default_value = "width", value_parser = parse_functional)]
    pub functional: Functional,
}

#[derive(Debug, Args)]
pub struct ScalingArgs {
    #[command(flatten)]
    pub common: Common,
    /// Comma-separated, strictly increasing.
    #[arg(long, value_delimiter = ',', required = true)]
    pub lambdas: Vec<f64>,
    #[arg(long, default_value_t = 1024)]
    pub n_dirs: usize,
    #[arg(long, default_value_t = 64)]
    pub n_t: usize,
    #[arg(long, default_value = "direct", value_parser = parse_estimator)]
    pub estimator: EstimatorKind,
    #[arg(long, default_value = "width", value_parser = parse_functional)]
    pub functional: Functional,
    /// Write a log-log plot of the study.
    #[arg(long)]
    pub svg: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CapProbArgs {
    #[command(flatten)]
    pub common: Common,
    /// Cap depth.
    #[arg(long)]
    pub t: f64,
    /// Direction angle in radians (planar bodies).
    #[arg(long, conflicts_with = "direction", allow_negative_numbers = true)]
    pub angle: Option<f64>,
    /// Direction components, comma-separated; normalized before use.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub direction: Option<Vec<f64>>,
    /// Scale the body first.
    #[arg(long, default_value_t = 1.0)]
    pub lambda: f64,
}

#[derive(Debug, Args)]
pub struct TauArgs {
    #[arg(long)]
    pub body: String,
    #[arg(long, default_value_t = 1024)]
    pub grid_size: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GammaArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, default_value_t = 64)]
    pub n_dirs_per_cone: usize,
    #[arg(long, default_value_t = 64)]
    pub n_t: usize,
}

#[derive(Debug, Args)]
pub struct CountArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, default_value_t = 1.0)]
    pub lambda: f64,
}

fn parse_estimator(s: &str) -> Result<EstimatorKind, String> {
    s.parse().map_err(|e: latticehull::Error| e.to_string())
}

fn parse_functional(s: &str) -> Result<Functional, String> {
    s.parse().map_err(|e: latticehull::Error| e.to_string())
}

const SUBCOMMANDS: [&str; 6] = ["width-diff", "scaling", "cap-prob", "tau", "gamma", "count-check"];

impl Cli {
    /// Parses arguments, letting a repeated flag replace its earlier value.
    pub fn parse_args(args: Vec<OsString>) -> Result<Cli, clap::Error> {
        let mut cmd = Cli::command().args_override_self(true);
        for name in SUBCOMMANDS {
            cmd = cmd.mut_subcommand(name, |s| s.args_override_self(true));
        }
        let matches = cmd.try_get_matches_from(args)?;
        Cli::from_arg_matches(&matches)
    }
}

/// Turns `key = value` lines into `--key value` arguments. Blank lines and
/// `#` comments are skipped; underscores in keys become dashes.
pub fn config_args(text: &str) -> Result<Vec<OsString>, String> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| format!("config line {}: expected `key = value`", i + 1))?;
        let key = key.trim().replace('_', "-");
        if key.is_empty() || key == "config" || key == "threads" {
            return Err(format!("config line {}: key `{key}` not allowed", i + 1));
        }
        out.push(OsString::from(format!("--{key}")));
        out.push(OsString::from(value.trim()));
    }
    Ok(out)
}

/// Expands `--config FILE` in place: the file's arguments go right after the
/// subcommand name, so flags given on the command line come later and win.
pub fn expand_config(args: Vec<OsString>) -> Result<Vec<OsString>, String> {
    let mut rest = Vec::with_capacity(args.len());
    let mut config = None;
    let mut it = args.into_iter();
    while let Some(a) = it.next() {
        let s = a.to_string_lossy().into_owned();
        if s == "--config" {
            config = Some(it.next().ok_or("--config needs a file")?);
        } else if let Some(path) = s.strip_prefix("--config=") {
            config = Some(OsString::from(path));
        } else {
            rest.push(a);
        }
    }
    let Some(path) = config else { return Ok(rest) };
    let text = std::fs::read_to_string(&path)
        .map_err(|e| format!("cannot read config {}: {e}", PathBuf::from(&path).display()))?;
    let extra = config_args(&text)?;
    let pos = rest
        .iter()
        .position(|a| SUBCOMMANDS.contains(&a.to_string_lossy().as_ref()))
        .ok_or("--config needs a subcommand")?;
    rest.splice(pos + 1..pos + 1, extra);
    Ok(rest)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn os(v: &[&str]) -> Vec<OsString> {
        v.iter().map(OsString::from).collect()
    }

    #[test]
    fn config_lines() {
        let args = config_args("# study\nbody = disk\nn_lattices=500\n\nlambdas = 8,16,32 # grid\n").unwrap();
        assert_eq!(args, os(&["--body", "disk", "--n-lattices", "500", "--lambdas", "8,16,32"]));
        assert!(config_args("body disk").is_err());
        assert!(config_args("threads = 4").is_err());
    }

    #[test]
    fn command_line_overrides_config() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.conf");
        std::fs::write(&path, "body = disk\nlambda = 8\nseed = 3\n").unwrap();
        let args = expand_config(os(&["latticehull", "--config", path.to_str().unwrap(), "width-diff", "--seed", "9"])).unwrap();
        let cli = Cli::parse_args(args).unwrap();
        match cli.command {
            Command::WidthDiff(a) => {
                assert_eq!(a.common.seed, 9);
                assert_eq!(a.lambda, 8.0);
                assert_eq!(a.common.body, "disk");
            }
            _ => panic!("wrong subcommand"),
        }
    }
}
