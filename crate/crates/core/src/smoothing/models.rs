//! Single, double (Holt) and additive triple (Holt-Winters) exponential smoothing.

use crate::error::{precondition, Result};

fn check_unit(name: &str, value: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&value) {
        return precondition(format!("{name} must lie in [0, 1], got {value}"));
    }
    Ok(())
}

/// `S_t = alpha x_t + (1 - alpha) S_{t-1}` starting from `s0`.
pub fn ses_smooth(series: &[f64], alpha: f64, s0: f64) -> Result<Vec<f64>> {
    check_unit("alpha", alpha)?;
    if series.is_empty() {
        return precondition("cannot smooth an empty series");
    }
    if !s0.is_finite() {
        return precondition("initial smoothed value must be finite");
    }
    let mut prev = s0;
    Ok(series
        .iter()
        .map(|x| {
            prev = alpha * x + (1.0 - alpha) * prev;
            prev
        })
        .collect())
}

/// Flat SES forecast: the last smoothed value, starting from the first observation.
pub fn ses_forecast(series: &[f64], alpha: f64) -> Result<f64> {
    let s0 = *series
        .first()
        .ok_or_else(|| crate::Error::Precondition("cannot smooth an empty series".into()))?;
    let smoothed = ses_smooth(series, alpha, s0)?;
    Ok(smoothed[smoothed.len() - 1])
}

#[derive(Debug, Clone, PartialEq)]
pub struct HoltOutput {
    pub level: Vec<f64>,
    pub trend: Vec<f64>,
    /// Forecasts for steps `1..=horizon` past the end of the series.
    pub forecasts: Vec<f64>,
}

/// Holt's linear trend method, initialized with `l_1 = x_1`, `b_1 = x_2 - x_1`.
pub fn holt_forecast(series: &[f64], alpha: f64, beta: f64, horizon: usize) -> Result<HoltOutput> {
    check_unit("alpha", alpha)?;
    check_unit("beta", beta)?;
    if series.len() < 2 {
        return precondition("Holt smoothing needs at least two observations");
    }
    let mut level = Vec::with_capacity(series.len());
    let mut trend = Vec::with_capacity(series.len());
    level.push(series[0]);
    trend.push(series[1] - series[0]);
    for &x in &series[1..] {
        let (l_prev, b_prev) = (level[level.len() - 1], trend[trend.len() - 1]);
        let l = alpha * x + (1.0 - alpha) * (l_prev + b_prev);
        let b = beta * (l - l_prev) + (1.0 - beta) * b_prev;
        level.push(l);
        trend.push(b);
    }
    let (l, b) = (level[level.len() - 1], trend[trend.len() - 1]);
    let forecasts = (1..=horizon).map(|h| l + h as f64 * b).collect();
    Ok(HoltOutput {
        level,
        trend,
        forecasts,
    })
}

/// Additive Holt-Winters with season length `m`.
///
/// Initial level is the mean of the first season, initial trend the change
/// in seasonal means between the first two seasons divided by `m`, and the
/// initial seasonal indices the first season's deviations from its mean.
/// Forecasts are `l_T + h b_T + s_{T + h - m ceil(h / m)}` for `h = 1..=horizon`.
pub fn holt_winters_forecast(
    series: &[f64],
    alpha: f64,
    beta: f64,
    gamma: f64,
    m: usize,
    horizon: usize,
) -> Result<Vec<f64>> {
    check_unit("alpha", alpha)?;
    check_unit("beta", beta)?;
    check_unit("gamma", gamma)?;
    if m == 0 {
        return precondition("season length must be positive");
    }
    if series.len() < 2 * m {
        return precondition(format!(
            "Holt-Winters needs at least two seasons ({} observations), got {}",
            2 * m,
            series.len()
        ));
    }
    let mf = m as f64;
    let first_mean = series[..m].iter().sum::<f64>() / mf;
    let second_mean = series[m..2 * m].iter().sum::<f64>() / mf;
    let mut level = first_mean;
    let mut trend = (second_mean - first_mean) / mf;
    let mut season: Vec<f64> = series[..m].iter().map(|x| x - first_mean).collect();

    for (t, &x) in series.iter().enumerate().skip(m) {
        let slot = t % m;
        let s_old = season[slot];
        let l = alpha * (x - s_old) + (1.0 - alpha) * (level + trend);
        let b = beta * (l - level) + (1.0 - beta) * trend;
        season[slot] = gamma * (x - l) + (1.0 - gamma) * s_old;
        level = l;
        trend = b;
    }

    let last = series.len() - 1;
    Ok((1..=horizon)
        .map(|h| {
            let back = m * h.div_ceil(m);
            let idx = (last + h - back) % m;
            level + h as f64 * trend + season[idx]
        })
        .collect())
}
