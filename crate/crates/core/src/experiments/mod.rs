//! Studies over a grid of scale factors: one estimate per `lambda`, a
//! log-log exponent fit, and the convergence and lower-bound diagnostics.
//!
//! Row `lambda` always draws from `SeededStream::new(seed, lambda.to_bits())`,
//! so a single-row run reproduces the corresponding row of a study.

mod body_spec;
mod fit;

pub use body_spec::BodySpec;
pub use fit::{fit_exponent, Fit};

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::{
    area_difference, gamma_polytope, width_difference_cap_integral, width_difference_direct, Estimate, DEFAULT_N_T,
};
use crate::geometry::{flatness_constants, Body, Dim, DEFAULT_GRID_SIZE, DEFAULT_N_DIRS};
use crate::lattice::SeededStream;

/// Stream index reserved for the cone integral in convergence reports.
const GAMMA_STREAM: u64 = 0x67_616d_6d61;

pub const MIN_STUDY_LATTICES: usize = 200;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EstimatorKind {
    Direct,
    CapIntegral,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Functional {
    Width,
    Area,
}

impl fmt::Display for EstimatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EstimatorKind::Direct => "direct",
            EstimatorKind::CapIntegral => "cap-integral",
        })
    }
}

impl FromStr for EstimatorKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "direct" => Ok(EstimatorKind::Direct),
            "cap-integral" => Ok(EstimatorKind::CapIntegral),
            _ => Err(Error::InvalidArgument(format!("unknown estimator '{s}'"))),
        }
    }
}

impl fmt::Display for Functional {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Functional::Width => "width",
            Functional::Area => "area",
        })
    }
}

impl FromStr for Functional {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "width" => Ok(Functional::Width),
            "area" => Ok(Functional::Area),
            _ => Err(Error::InvalidArgument(format!("unknown functional '{s}'"))),
        }
    }
}

/// Sampling parameters shared by every row of a study.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunParams {
    pub n_lattices: usize,
    pub n_dirs: usize,
    /// Depth nodes for cap integrals.
    pub n_t: usize,
    /// Directions per normal cone for the polygon limit constant.
    pub n_dirs_per_cone: usize,
    pub seed: u64,
}

impl Default for RunParams {
    fn default() -> Self {
        RunParams { n_lattices: 2000, n_dirs: DEFAULT_N_DIRS, n_t: DEFAULT_N_T, n_dirs_per_cone: 64, seed: 0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StudyConfig {
    pub body: BodySpec,
    pub lambdas: Vec<f64>,
    pub estimator: EstimatorKind,
    pub functional: Functional,
    #[serde(flatten)]
    pub params: RunParams,
}

impl StudyConfig {
    pub fn validate(&self) -> Result<()> {
        if self.lambdas.len() < 3 {
            return Err(Error::InvalidArgument("a study needs at least 3 lambda values".into()));
        }
        if self.lambdas.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidArgument("lambda grid must be strictly increasing".into()));
        }
        if !(self.lambdas[0] >= 1.0) || !self.lambdas.iter().all(|l| l.is_finite()) {
            return Err(Error::InvalidArgument("lambda values must be finite and at least 1".into()));
        }
        if self.params.n_lattices < MIN_STUDY_LATTICES {
            return Err(Error::InvalidArgument(format!(
                "a study needs at least {MIN_STUDY_LATTICES} lattices per row"
            )));
        }
        if self.functional == Functional::Area && self.estimator == EstimatorKind::CapIntegral {
            return Err(Error::InvalidArgument("the area functional has no cap-integral estimator".into()));
        }
        Ok(())
    }
}

/// The stream used for the row at scale `lambda`.
pub fn row_stream(seed: u64, lambda: f64) -> SeededStream {
    SeededStream::new(seed, lambda.to_bits())
}

/// One estimate of the chosen functional at one scale.
pub fn estimate_row(
    body: &Body,
    lambda: f64,
    estimator: EstimatorKind,
    functional: Functional,
    params: &RunParams,
) -> Result<Estimate> {
    let stream = row_stream(params.seed, lambda);
    match (functional, estimator) {
        (Functional::Width, EstimatorKind::Direct) => {
            width_difference_direct(body, lambda, params.n_lattices, params.n_dirs, &stream)
        }
        (Functional::Width, EstimatorKind::CapIntegral) => {
            width_difference_cap_integral(body, lambda, params.n_lattices, params.n_dirs, params.n_t, &stream)
        }
        (Functional::Area, EstimatorKind::Direct) => area_difference(body, lambda, params.n_lattices, &stream),
        (Functional::Area, EstimatorKind::CapIntegral) => {
            Err(Error::InvalidArgument("the area functional has no cap-integral estimator".into()))
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingRow {
    pub lambda: f64,
    pub estimate: Estimate,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingResult {
    pub config: StudyConfig,
    pub rows: Vec<ScalingRow>,
    /// `None` when fewer than three rows are signal-dominated.
    pub fit: Option<Fit>,
    pub fit_error: Option<String>,
}

impl ScalingResult {
    pub fn pairs(&self) -> Vec<(f64, Estimate)> {
        self.rows.iter().map(|r| (r.lambda, r.estimate.clone())).collect()
    }

    /// Scales at which some lattice missed the body.
    pub fn rows_with_empty_intersections(&self) -> Vec<f64> {
        self.rows.iter().filter(|r| r.estimate.flag("empty_intersection") > 0).map(|r| r.lambda).collect()
    }
}

fn run_rows(body: &Body, lambdas: &[f64], estimator: EstimatorKind, functional: Functional, params: &RunParams) -> Result<Vec<ScalingRow>> {
    lambdas
        .iter()
        .map(|&lambda| Ok(ScalingRow { lambda, estimate: estimate_row(body, lambda, estimator, functional, params)? }))
        .collect()
}

pub fn run_scaling_study(config: &StudyConfig) -> Result<ScalingResult> {
    config.validate()?;
    let body = config.body.build()?;
    let rows = run_rows(&body, &config.lambdas, config.estimator, config.functional, &config.params)?;
    let pairs: Vec<_> = rows.iter().map(|r| (r.lambda, r.estimate.clone())).collect();
    let (fit, fit_error) = match fit_exponent(&pairs) {
        Ok(f) => (Some(f), None),
        Err(e) => (None, Some(e.to_string())),
    };
    Ok(ScalingResult { config: config.clone(), rows, fit, fit_error })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub rows: Vec<ScalingRow>,
    /// `value[k+1] - value[k]`.
    pub differences: Vec<f64>,
    pub difference_errors: Vec<f64>,
    pub gamma: Estimate,
    pub tau: f64,
    pub lambda_min: f64,
    pub last_two_agree: bool,
    pub differences_nonincreasing: bool,
    pub converged: bool,
    pub gamma_agrees_with_last: bool,
    /// Every value positive and, where `lambda >= lambda_min`, at most
    /// `2 tau + 4 SE`.
    pub within_bounds: bool,
}

/// Width differences of a polygon along a scale grid, compared with the
/// limit constant from the vertex-cone integral.
pub fn run_polytope_convergence(polytope: &Body, lambdas: &[f64], params: &RunParams) -> Result<ConvergenceReport> {
    if polytope.as_polytope().is_none() || polytope.dim() != Dim::Two {
        return Err(Error::InvalidArgument("convergence study needs a planar polygon".into()));
    }
    if lambdas.len() < 4 {
        return Err(Error::InvalidArgument("convergence study needs at least 4 lambda values".into()));
    }
    let fc = flatness_constants(polytope, DEFAULT_GRID_SIZE)?;
    let rows = run_rows(polytope, lambdas, EstimatorKind::Direct, Functional::Width, params)?;
    let gamma = gamma_polytope(
        polytope,
        params.n_lattices,
        params.n_dirs_per_cone,
        params.n_t,
        &SeededStream::new(params.seed, GAMMA_STREAM),
    )?;

    let est: Vec<&Estimate> = rows.iter().map(|r| &r.estimate).collect();
    let differences: Vec<f64> = est.windows(2).map(|w| w[1].value - w[0].value).collect();
    let difference_errors: Vec<f64> = est.windows(2).map(|w| w[0].combined_se(w[1])).collect();
    let n = est.len();
    let last_two_agree = est[n - 2].agrees_with(est[n - 1], 4.0);
    let differences_nonincreasing = differences
        .windows(2)
        .zip(difference_errors.windows(2))
        .all(|(d, s)| d[1].abs() <= d[0].abs() + 4.0 * s[0].hypot(s[1]));
    let within_bounds = rows.iter().all(|r| {
        let e = &r.estimate;
        e.value > 0.0 && (r.lambda < fc.lambda_min || e.value <= 2.0 * fc.tau + 4.0 * e.std_error)
    });
    let gamma_agrees_with_last = gamma.agrees_with(est[n - 1], 4.0);
    Ok(ConvergenceReport {
        differences,
        difference_errors,
        gamma,
        tau: fc.tau,
        lambda_min: fc.lambda_min,
        last_two_agree,
        differences_nonincreasing,
        converged: last_two_agree && differences_nonincreasing,
        gamma_agrees_with_last,
        within_bounds,
        rows,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LowerBoundReport {
    /// `(d - 1) / (d + 1)`.
    pub exponent: f64,
    pub rows: Vec<ScalingRow>,
    /// `lambda^exponent * value` with its standard error.
    pub rescaled: Vec<(f64, f64)>,
    /// `min(rescaled - 4 SE)`.
    pub floor: f64,
    /// `max(rescaled) / min(rescaled)`.
    pub spread: f64,
    pub passed: bool,
}

/// Checks that `lambda^((d-1)/(d+1)) * (W(lambda K) - E W((lambda K)_L))`
/// stays above a positive floor. The body must lie in the unit ball.
pub fn run_general_lower_bound_check(body: &Body, lambdas: &[f64], params: &RunParams) -> Result<LowerBoundReport> {
    if body.circumradius() > 1.0 + 1e-12 {
        return Err(Error::Precondition(format!(
            "body must lie in the unit ball, circumradius is {}",
            body.circumradius()
        )));
    }
    if lambdas.is_empty() {
        return Err(Error::InvalidArgument("empty lambda grid".into()));
    }
    let exponent = body.dim().smooth_exponent();
    let rows = run_rows(body, lambdas, EstimatorKind::Direct, Functional::Width, params)?;
    let rescaled: Vec<(f64, f64)> = rows
        .iter()
        .map(|r| {
            let k = r.lambda.powf(exponent);
            (k * r.estimate.value, k * r.estimate.std_error)
        })
        .collect();
    let floor = rescaled.iter().map(|(v, s)| v - 4.0 * s).fold(f64::INFINITY, f64::min);
    let lo = rescaled.iter().map(|r| r.0).fold(f64::INFINITY, f64::min);
    let hi = rescaled.iter().map(|r| r.0).fold(f64::NEG_INFINITY, f64::max);
    Ok(LowerBoundReport { exponent, rows, rescaled, floor, spread: hi / lo, passed: floor > 0.0 })
}
