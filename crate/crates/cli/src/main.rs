mod args;
mod output;
mod svg;

use std::path::Path;
use std::process::ExitCode;
use std::time::Instant;

use latticehull::estimators::{cap_avoidance_probability, expected_lattice_count, gamma_polytope};
use latticehull::experiments::{estimate_row, run_scaling_study, BodySpec, Functional, RunParams, StudyConfig};
use latticehull::geometry::{flatness_constants, Body, UnitVector};
use latticehull::{Error, Estimate, SeededStream};
use serde::Serialize;

use args::{CapProbArgs, Cli, Command, Common, CountArgs, GammaArgs, ScalingArgs, TauArgs, WidthDiffArgs};
use output::{emit, total_flags, write_manifest, Row, RunManifest};

/// Stream index for single-shot commands that are not tied to a scale.
const FIXED_STREAM: u64 = 0;

enum Failure {
    Usage(String),
    Numeric(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidArgument(_) | Error::Precondition(_) | Error::Parse { .. } | Error::NotExtreme(_) => {
                Failure::Usage(e.to_string())
            }
            Error::Degenerate(_) | Error::Unbounded | Error::Fit(_) => Failure::Numeric(e.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Numeric(format!("i/o error: {e}"))
    }
}

type Outcome = Result<(), Failure>;

fn resolve_body(name: &str) -> Result<(BodySpec, Body), Failure> {
    let path = Path::new(name);
    let spec = if path.is_file() {
        let text = std::fs::read_to_string(path)?;
        let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        BodySpec::polygon_from_text(&stem, &text)?
    } else {
        name.parse::<BodySpec>()?
    };
    let body = spec.build()?;
    Ok((spec, body))
}

struct Run<'a, C: Serialize> {
    command: &'a str,
    config: &'a C,
    seed: u64,
    out: Option<&'a Path>,
    started: Instant,
}

impl<C: Serialize> Run<'_, C> {
    fn finish(&self, rows: &[Row], summary: Option<serde_json::Value>) -> Outcome {
        emit(rows, self.out)?;
        if let Some(out) = self.out {
            let manifest = RunManifest {
                command: self.command,
                config: self.config,
                config_hash: output::config_hash(self.config),
                seed: self.seed,
                tool_version: env!("CARGO_PKG_VERSION"),
                threads: rayon::current_num_threads(),
                duration_secs: self.started.elapsed().as_secs_f64(),
                flags: total_flags(rows),
                summary,
            };
            write_manifest(out, &manifest)?;
        }
        Ok(())
    }
}

#[derive(Serialize)]
struct WidthDiffConfig<'a> {
    body: &'a BodySpec,
    lambda: f64,
    estimator: String,
    functional: String,
    params: &'a RunParams,
}

fn params(common: &Common, n_dirs: usize, n_t: usize, n_dirs_per_cone: usize) -> RunParams {
    RunParams { n_lattices: common.n_lattices, n_dirs, n_t, n_dirs_per_cone, seed: common.seed }
}

fn cmd_width_diff(a: &WidthDiffArgs) -> Outcome {
    let started = Instant::now();
    let (spec, body) = resolve_body(&a.common.body)?;
    let p = params(&a.common, a.n_dirs, a.n_t, 0);
    let est = estimate_row(&body, a.lambda, a.estimator, a.functional, &p)?;
    let mut row = Row::from_estimate(&spec.to_string(), &a.functional.to_string(), Some(a.lambda), &a.estimator.to_string(), &est);
    if a.functional == Functional::Width {
        row = row.with_dirs(a.n_dirs);
    }
    let config = WidthDiffConfig {
        body: &spec,
        lambda: a.lambda,
        estimator: a.estimator.to_string(),
        functional: a.functional.to_string(),
        params: &p,
    };
    Run { command: "width-diff", config: &config, seed: p.seed, out: a.common.out.as_deref(), started }.finish(&[row], None)
}

fn cmd_scaling(a: &ScalingArgs) -> Outcome {
    let started = Instant::now();
    let (spec, body) = resolve_body(&a.common.body)?;
    let config = StudyConfig {
        body: spec.clone(),
        lambdas: a.lambdas.clone(),
        estimator: a.estimator,
        functional: a.functional,
        params: params(&a.common, a.n_dirs, a.n_t, 0),
    };
    let result = run_scaling_study(&config)?;
    let name = spec.to_string();
    let rows: Vec<Row> = result
        .rows
        .iter()
        .map(|r| {
            let row = Row::from_estimate(&name, &a.functional.to_string(), Some(r.lambda), &a.estimator.to_string(), &r.estimate);
            if a.functional == Functional::Width { row.with_dirs(a.n_dirs) } else { row }
        })
        .collect();
    match &result.fit {
        Some(f) => eprintln!(
            "fit: slope {:.6}, 95% CI [{:.6}, {:.6}], r^2 {:.4}, rows used {}",
            f.slope, f.ci.0, f.ci.1, f.r_squared, f.n_used
        ),
        None => eprintln!("fit: invalid ({})", result.fit_error.as_deref().unwrap_or("unknown")),
    }
    let flagged = result.rows_with_empty_intersections();
    if !flagged.is_empty() {
        eprintln!("empty intersections at lambda = {flagged:?}");
    }
    if let Some(path) = &a.svg {
        let reference = match a.functional {
            Functional::Width if body.is_smooth() => -body.dim().smooth_exponent(),
            Functional::Area if body.is_smooth() => 2.0 / 3.0,
            _ => 0.0,
        };
        let pairs = result.pairs();
        let title = format!("{name}: {} loss", a.functional);
        let doc = svg::render(&svg::Plot {
            title: &title,
            y_label: &format!("{} difference", a.functional),
            rows: &pairs,
            fit: result.fit.as_ref(),
            reference_slope: Some(reference),
        });
        std::fs::write(path, doc)?;
    }
    let summary = serde_json::json!({ "fit": result.fit, "fit_error": result.fit_error });
    Run { command: "scaling", config: &config, seed: config.params.seed, out: a.common.out.as_deref(), started }
        .finish(&rows, Some(summary))
}

#[derive(Serialize)]
struct CapProbConfig<'a> {
    body: &'a BodySpec,
    lambda: f64,
    t: f64,
    direction: Vec<f64>,
    n_lattices: usize,
    seed: u64,
}

fn cmd_cap_prob(a: &CapProbArgs) -> Outcome {
    let started = Instant::now();
    let (spec, body) = resolve_body(&a.common.body)?;
    let u = match (&a.direction, a.angle) {
        (Some(v), _) => UnitVector::normalize(v)?,
        (None, Some(theta)) => UnitVector::from_angle(theta),
        (None, None) => return Err(Failure::Usage("cap-prob needs --angle or --direction".into())),
    };
    if u.dim() != body.dim() {
        return Err(Failure::Usage("direction and body differ in dimension".into()));
    }
    let scaled = body.scale(a.lambda)?;
    let stream = SeededStream::new(a.common.seed, FIXED_STREAM);
    let est = cap_avoidance_probability(&scaled, a.t, &u, a.common.n_lattices, &stream)?;
    let row = Row::from_estimate(&spec.to_string(), "cap-avoidance", Some(a.lambda), "monte-carlo", &est);
    let config = CapProbConfig {
        body: &spec,
        lambda: a.lambda,
        t: a.t,
        direction: u.components(),
        n_lattices: a.common.n_lattices,
        seed: a.common.seed,
    };
    Run { command: "cap-prob", config: &config, seed: a.common.seed, out: a.common.out.as_deref(), started }.finish(&[row], None)
}

#[derive(Serialize)]
struct TauConfig<'a> {
    body: &'a BodySpec,
    grid_size: usize,
}

fn cmd_tau(a: &TauArgs) -> Outcome {
    let started = Instant::now();
    let (spec, body) = resolve_body(&a.body)?;
    let fc = flatness_constants(&body, a.grid_size)?;
    let name = spec.to_string();
    let row = |functional: &str, v: f64| {
        Row::from_estimate(&name, functional, None, "grid", &Estimate::exact(v, 0)).with_dirs(a.grid_size)
    };
    let rows = vec![
        row("tau", fc.tau),
        row("tau-raw", fc.tau_raw),
        row("lambda-min", fc.lambda_min),
        row("lambda-min-raw", fc.lambda_raw),
    ];
    let config = TauConfig { body: &spec, grid_size: a.grid_size };
    Run { command: "tau", config: &config, seed: 0, out: a.out.as_deref(), started }.finish(&rows, None)
}

#[derive(Serialize)]
struct GammaConfig<'a> {
    body: &'a BodySpec,
    n_lattices: usize,
    n_dirs_per_cone: usize,
    n_t: usize,
    seed: u64,
}

fn cmd_gamma(a: &GammaArgs) -> Outcome {
    let started = Instant::now();
    let (spec, body) = resolve_body(&a.common.body)?;
    let stream = SeededStream::new(a.common.seed, FIXED_STREAM);
    let est = gamma_polytope(&body, a.common.n_lattices, a.n_dirs_per_cone, a.n_t, &stream)?;
    let n_vertices = body.as_polytope().map(|p| p.vertices().len()).unwrap_or(0);
    let row = Row::from_estimate(&spec.to_string(), "gamma", None, "cone-integral", &est)
        .with_dirs(a.n_dirs_per_cone * n_vertices);
    let config = GammaConfig {
        body: &spec,
        n_lattices: a.common.n_lattices,
        n_dirs_per_cone: a.n_dirs_per_cone,
        n_t: a.n_t,
        seed: a.common.seed,
    };
    Run { command: "gamma", config: &config, seed: a.common.seed, out: a.common.out.as_deref(), started }.finish(&[row], None)
}

#[derive(Serialize)]
struct CountConfig<'a> {
    body: &'a BodySpec,
    lambda: f64,
    n_lattices: usize,
    seed: u64,
}

fn cmd_count_check(a: &CountArgs) -> Outcome {
    let started = Instant::now();
    let (spec, body) = resolve_body(&a.common.body)?;
    let scaled = body.scale(a.lambda)?;
    let stream = SeededStream::new(a.common.seed, FIXED_STREAM);
    let est = expected_lattice_count(&scaled, a.common.n_lattices, &stream)?;
    let volume = scaled.volume();
    let z = (est.value - volume) / est.std_error;
    eprintln!(
        "volume {volume:.6}, mean count {:.6} +- {:.6} ({z:+.2} SE){}",
        est.value,
        est.std_error,
        if z.abs() <= 4.0 { "" } else { ", outside the 4 SE band" }
    );
    let row = Row::from_estimate(&spec.to_string(), "count", Some(a.lambda), "monte-carlo", &est);
    let config = CountConfig { body: &spec, lambda: a.lambda, n_lattices: a.common.n_lattices, seed: a.common.seed };
    let summary = serde_json::json!({ "volume": volume, "z_score": z });
    Run { command: "count-check", config: &config, seed: a.common.seed, out: a.common.out.as_deref(), started }
        .finish(&[row], Some(summary))
}

fn run(cli: &Cli) -> Outcome {
    match &cli.command {
        Command::WidthDiff(a) => cmd_width_diff(a),
        Command::Scaling(a) => cmd_scaling(a),
        Command::CapProb(a) => cmd_cap_prob(a),
        Command::Tau(a) => cmd_tau(a),
        Command::Gamma(a) => cmd_gamma(a),
        Command::CountCheck(a) => cmd_count_check(a),
    }
}

fn main() -> ExitCode {
    let args = match args::expand_config(std::env::args_os().collect()) {
        Ok(a) => a,
        Err(msg) => {
            eprintln!("error: {msg}");
            return ExitCode::from(2);
        }
    };
    let cli = match Cli::parse_args(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("error: --threads must be at least 1");
            return ExitCode::from(2);
        }
        pool = pool.num_threads(n);
    }
    let pool = match pool.build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: cannot start worker pool: {e}");
            return ExitCode::from(1);
        }
    };
    match pool.install(|| run(&cli)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Numeric(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
