//! Exponential smoothing, rolling-origin forecast losses, and parameter
//! fitting by ALMI-PSO or by exhaustive grid search.

mod models;

pub use models::{holt_forecast, holt_winters_forecast, ses_forecast, ses_smooth, HoltOutput};

use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{precondition, Error, Result};
use crate::objective::{Bounds, ObjectiveFunction};
use crate::optimizer::{optimize, OptimizerConfig, RunSummary};

/// Floor on `|actual|` in the MAPE denominator.
pub const MAPE_FLOOR: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SmoothingKind {
    Single,
    Double,
    Triple { season_length: usize },
}

impl SmoothingKind {
    pub fn param_count(self) -> usize {
        match self {
            SmoothingKind::Single => 1,
            SmoothingKind::Double => 2,
            SmoothingKind::Triple { .. } => 3,
        }
    }

    pub fn season_length(self) -> Option<usize> {
        match self {
            SmoothingKind::Triple { season_length } => Some(season_length),
            _ => None,
        }
    }

    /// Fewest observations a forecast window needs.
    pub fn min_window(self) -> usize {
        match self {
            SmoothingKind::Single => 1,
            SmoothingKind::Double => 2,
            SmoothingKind::Triple { season_length } => 2 * season_length,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            SmoothingKind::Single => "ses",
            SmoothingKind::Double => "holt",
            SmoothingKind::Triple { .. } => "holt-winters",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmoothingSpec {
    pub kind: SmoothingKind,
    /// `(alpha)`, `(alpha, beta)` or `(alpha, beta, gamma)`.
    pub params: Vec<f64>,
}

impl SmoothingSpec {
    pub fn new(kind: SmoothingKind, params: Vec<f64>) -> Result<Self> {
        if params.len() != kind.param_count() {
            return precondition(format!(
                "{} takes {} parameters, got {}",
                kind.name(),
                kind.param_count(),
                params.len()
            ));
        }
        if let Some(p) = params.iter().find(|p| !(0.0..=1.0).contains(*p)) {
            return precondition(format!("smoothing parameters must lie in [0, 1], got {p}"));
        }
        if let SmoothingKind::Triple { season_length } = kind {
            if season_length < 2 {
                return precondition("season length must be at least 2");
            }
        }
        Ok(Self { kind, params })
    }

    /// Forecasts `horizon` steps past the end of `window`.
    pub fn forecast(&self, window: &[f64], horizon: usize) -> Result<Vec<f64>> {
        let p = &self.params;
        match self.kind {
            SmoothingKind::Single => Ok(vec![ses_forecast(window, p[0])?; horizon]),
            SmoothingKind::Double => Ok(holt_forecast(window, p[0], p[1], horizon)?.forecasts),
            SmoothingKind::Triple { season_length } => {
                holt_winters_forecast(window, p[0], p[1], p[2], season_length, horizon)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    Mape,
    Rmse,
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Metric::Mape => "mape",
            Metric::Rmse => "rmse",
        })
    }
}

impl FromStr for Metric {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "mape" => Ok(Metric::Mape),
            "rmse" => Ok(Metric::Rmse),
            other => Err(Error::Malformed(format!("unknown metric `{other}`"))),
        }
    }
}

/// Rolling-origin evaluation scheme.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvaluationScheme {
    /// Observations the model is fitted on at each origin.
    pub window_length: usize,
    /// Steps ahead that are scored.
    pub horizon: usize,
    pub metric: Metric,
}

/// Both error metrics from one rolling-origin pass.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForecastEvaluation {
    pub window_length: usize,
    pub horizon: usize,
    /// Percent.
    pub mape: f64,
    pub rmse: f64,
}

/// One scored origin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ForecastPoint {
    /// Number of observations available at the origin.
    pub origin: usize,
    pub actual: f64,
    pub forecast: f64,
}

/// Forecasts at every origin `t = window_length ..= len - horizon`, each from
/// the `window_length` observations ending at `t`, scored `horizon` steps ahead.
pub fn rolling_forecasts(
    spec: &SmoothingSpec,
    series: &[f64],
    window_length: usize,
    horizon: usize,
) -> Result<Vec<ForecastPoint>> {
    if horizon == 0 {
        return precondition("horizon must be positive");
    }
    if window_length < spec.kind.min_window() {
        return precondition(format!(
            "{} needs a window of at least {} observations",
            spec.kind.name(),
            spec.kind.min_window()
        ));
    }
    if window_length + horizon > series.len() {
        return precondition(format!(
            "series of length {} is too short for window {window_length} and horizon {horizon}",
            series.len()
        ));
    }
    (window_length..=series.len() - horizon)
        .map(|t| {
            let forecast = spec.forecast(&series[t - window_length..t], horizon)?[horizon - 1];
            Ok(ForecastPoint {
                origin: t,
                actual: series[t + horizon - 1],
                forecast,
            })
        })
        .collect()
}

pub fn rmse(points: &[ForecastPoint]) -> f64 {
    let mse = points
        .iter()
        .map(|p| (p.actual - p.forecast).powi(2))
        .sum::<f64>()
        / points.len() as f64;
    mse.sqrt()
}

pub fn mape(points: &[ForecastPoint]) -> f64 {
    100.0
        * points
            .iter()
            .map(|p| (p.actual - p.forecast).abs() / p.actual.abs().max(MAPE_FLOOR))
            .sum::<f64>()
        / points.len() as f64
}

pub fn evaluate_forecasts(
    spec: &SmoothingSpec,
    series: &[f64],
    window_length: usize,
    horizon: usize,
) -> Result<ForecastEvaluation> {
    let points = rolling_forecasts(spec, series, window_length, horizon)?;
    Ok(ForecastEvaluation {
        window_length,
        horizon,
        mape: mape(&points),
        rmse: rmse(&points),
    })
}

/// Rolling-origin loss of `spec` on `series` under `scheme`.
pub fn forecast_loss(
    spec: &SmoothingSpec,
    series: &[f64],
    scheme: &EvaluationScheme,
) -> Result<f64> {
    let points = rolling_forecasts(spec, series, scheme.window_length, scheme.horizon)?;
    Ok(match scheme.metric {
        Metric::Mape => mape(&points),
        Metric::Rmse => rmse(&points),
    })
}

fn validate_fit_inputs(
    kind: SmoothingKind,
    series: &[f64],
    scheme: &EvaluationScheme,
) -> Result<()> {
    let probe = SmoothingSpec::new(kind, vec![0.5; kind.param_count()])?;
    rolling_forecasts(&probe, series, scheme.window_length, scheme.horizon).map(|_| ())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub spec: SmoothingSpec,
    pub loss: f64,
    pub evaluations: usize,
}

/// Noise re-sampled onto the series at every loss evaluation, turning the
/// loss into a stochastic objective.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseResampling {
    pub noise_sd: f64,
    pub seed: u64,
}

/// Fits smoothing parameters with ALMI-PSO over `[0, 1]^d`.
pub fn fit_parameters(
    kind: SmoothingKind,
    series: &[f64],
    scheme: &EvaluationScheme,
    cfg: &OptimizerConfig,
) -> Result<FitResult> {
    fit_parameters_with(kind, series, scheme, cfg, None).map(|(fit, _)| fit)
}

/// As [`fit_parameters`], optionally re-sampling observation noise per
/// evaluation. Also returns the optimizer's run summary. With resampling
/// enabled, the reported loss is that of the best spec on the clean series.
pub fn fit_parameters_with(
    kind: SmoothingKind,
    series: &[f64],
    scheme: &EvaluationScheme,
    cfg: &OptimizerConfig,
    resampling: Option<NoiseResampling>,
) -> Result<(FitResult, RunSummary)> {
    validate_fit_inputs(kind, series, scheme)?;
    let bounds = Bounds::uniform(kind.param_count(), 0.0, 1.0)?;
    let mut noise = match resampling {
        Some(r) => {
            let dist = Normal::new(0.0, r.noise_sd)
                .map_err(|e| Error::Precondition(format!("invalid noise sd: {e}")))?;
            Some((dist, ChaCha8Rng::seed_from_u64(r.seed)))
        }
        None => None,
    };
    let mut perturbed = series.to_vec();
    let mut objective = ObjectiveFunction::new(bounds, |p: &[f64]| {
        let Ok(spec) = SmoothingSpec::new(kind, p.to_vec()) else {
            return f64::INFINITY;
        };
        let data: &[f64] = match noise.as_mut() {
            Some((dist, rng)) => {
                for (y, x) in perturbed.iter_mut().zip(series) {
                    *y = x + dist.sample(rng);
                }
                &perturbed
            }
            None => series,
        };
        forecast_loss(&spec, data, scheme).unwrap_or(f64::INFINITY)
    })
    .stochastic(resampling.is_some());
    let summary = optimize(&mut objective, cfg)?;
    let spec = SmoothingSpec::new(kind, summary.best_position.clone())?;
    let loss = if resampling.is_some() {
        forecast_loss(&spec, series, scheme)?
    } else {
        summary.best_fitness
    };
    Ok((
        FitResult {
            spec,
            loss,
            evaluations: summary.evaluations_used,
        },
        summary,
    ))
}

/// Points per axis of the lattice `{0, a, 2a, ...} ∩ [0, 1]`.
pub fn lattice_points(resolution: f64) -> Result<usize> {
    if !(resolution > 0.0 && resolution <= 1.0) {
        return precondition(format!(
            "grid resolution must lie in (0, 1], got {resolution}"
        ));
    }
    Ok((1.0 / resolution + 1e-9).floor() as usize + 1)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridFit {
    pub spec: SmoothingSpec,
    pub loss: f64,
    pub evaluations: usize,
    /// Every lattice point with its loss, in odometer order (first parameter
    /// varies slowest).
    pub surface: Vec<(Vec<f64>, f64)>,
}

/// Exhaustive search over the lattice `{0, a, 2a, ...}^d`; costs
/// `(floor(1/a) + 1)^d` loss evaluations.
pub fn grid_search_fit(
    kind: SmoothingKind,
    series: &[f64],
    scheme: &EvaluationScheme,
    resolution: f64,
) -> Result<GridFit> {
    validate_fit_inputs(kind, series, scheme)?;
    let per_axis = lattice_points(resolution)?;
    let d = kind.param_count();
    let axis: Vec<f64> = (0..per_axis)
        .map(|i| (i as f64 * resolution).min(1.0))
        .collect();
    let mut idx = vec![0usize; d];
    let mut surface = Vec::with_capacity(per_axis.pow(d as u32));
    let mut best: Option<(usize, f64)> = None;
    loop {
        let params: Vec<f64> = idx.iter().map(|&i| axis[i]).collect();
        let spec = SmoothingSpec::new(kind, params.clone())?;
        let loss = forecast_loss(&spec, series, scheme)?;
        if best.is_none_or(|(_, b)| loss < b) {
            best = Some((surface.len(), loss));
        }
        surface.push((params, loss));

        let mut k = d;
        loop {
            if k == 0 {
                let (i, loss) = best.expect("lattice is non-empty");
                return Ok(GridFit {
                    spec: SmoothingSpec::new(kind, surface[i].0.clone())?,
                    loss,
                    evaluations: surface.len(),
                    surface,
                });
            }
            k -= 1;
            idx[k] += 1;
            if idx[k] < per_axis {
                break;
            }
            idx[k] = 0;
        }
    }
}

/// `amplitude * sin(2 pi t / period) + N(0, noise_sd^2)` for `t = 0..n`.
pub fn synth_sinusoid(
    n: usize,
    amplitude: f64,
    period: f64,
    noise_sd: f64,
    seed: u64,
) -> Result<Vec<f64>> {
    if n == 0 {
        return precondition("series length must be positive");
    }
    if !(period > 0.0) {
        return precondition("period must be positive");
    }
    if !(noise_sd >= 0.0) {
        return precondition(format!("noise sd must be non-negative, got {noise_sd}"));
    }
    let noise = Normal::new(0.0, noise_sd).map_err(|_| {
        Error::Precondition(format!("noise sd must be non-negative, got {noise_sd}"))
    })?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..n)
        .map(|t| {
            let clean = amplitude * (std::f64::consts::TAU * t as f64 / period).sin();
            if noise_sd == 0.0 {
                clean
            } else {
                clean + noise.sample(&mut rng)
            }
        })
        .collect())
}
