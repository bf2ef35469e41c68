//! Monte-Carlo check of the environment assumption behind collective
//! reprojection: the objective should average lower around the forward
//! center than around the backward center.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{precondition, Error, Result};
use crate::objective::Objective;

/// Mean objective value over an L2 ball around each center, with standard errors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnvironmentEstimate {
    pub forward_mean: f64,
    pub forward_std_error: f64,
    pub backward_mean: f64,
    pub backward_std_error: f64,
}

impl EnvironmentEstimate {
    pub fn assumption_holds(&self) -> bool {
        self.forward_mean < self.backward_mean
    }
}

/// Estimates the ball averages of `objective` around `mu_w` (forward) and
/// `mu_b` (backward). Purely diagnostic; points are not clamped to bounds.
pub fn assumption1_diagnostic<O, R>(
    objective: &mut O,
    mu_b: &[f64],
    mu_w: &[f64],
    epsilon: f64,
    samples: usize,
    rng: &mut R,
) -> Result<EnvironmentEstimate>
where
    O: Objective + ?Sized,
    R: Rng + ?Sized,
{
    if !(epsilon > 0.0) {
        return precondition("epsilon must be positive");
    }
    if samples < 100 {
        return precondition("at least 100 samples are required");
    }
    if mu_b.len() != mu_w.len() {
        return Err(Error::DimensionMismatch {
            expected: mu_b.len(),
            actual: mu_w.len(),
        });
    }
    let (forward_mean, forward_std_error) = ball_mean(objective, mu_w, epsilon, samples, rng);
    let (backward_mean, backward_std_error) = ball_mean(objective, mu_b, epsilon, samples, rng);
    Ok(EnvironmentEstimate {
        forward_mean,
        forward_std_error,
        backward_mean,
        backward_std_error,
    })
}

fn ball_mean<O, R>(
    objective: &mut O,
    center: &[f64],
    radius: f64,
    samples: usize,
    rng: &mut R,
) -> (f64, f64)
where
    O: Objective + ?Sized,
    R: Rng + ?Sized,
{
    let dim = center.len();
    let mut point = vec![0.0; dim];
    let mut values = Vec::with_capacity(samples);
    for _ in 0..samples {
        sample_in_ball(center, radius, &mut point, rng);
        values.push(objective.evaluate(&point));
    }
    let n = samples as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Uniform draw from the ball: Gaussian direction, radius `r * u^(1/D)`.
fn sample_in_ball<R: Rng + ?Sized>(center: &[f64], radius: f64, out: &mut [f64], rng: &mut R) {
    let dim = center.len();
    loop {
        let mut norm2 = 0.0;
        for v in out.iter_mut() {
            *v = rng.sample::<f64, _>(StandardNormal);
            norm2 += *v * *v;
        }
        if norm2 > 0.0 {
            let u: f64 = rng.random();
            let scale = radius * u.powf(1.0 / dim as f64) / norm2.sqrt();
            for (v, c) in out.iter_mut().zip(center) {
                *v = c + *v * scale;
            }
            return;
        }
    }
}
