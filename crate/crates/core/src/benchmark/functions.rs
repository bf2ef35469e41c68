//! Stable-tendency test functions. All have their minimum 0 at the origin.

use std::f64::consts::{E, PI};

pub fn sphere(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum()
}

/// Schwefel 2.22: `sum |x_i| + prod |x_i|`.
pub fn schwefel_2_22(x: &[f64]) -> f64 {
    let sum: f64 = x.iter().map(|v| v.abs()).sum();
    let prod: f64 = x.iter().map(|v| v.abs()).product();
    sum + prod
}

/// Quadric (Schwefel 1.2): `sum_i (sum_{j<=i} x_j)^2`.
pub fn quadric(x: &[f64]) -> f64 {
    x.iter()
        .scan(0.0, |acc, v| {
            *acc += v;
            Some(*acc * *acc)
        })
        .sum()
}

/// `sum floor(x_i + 0.5)^2`
pub fn step(x: &[f64]) -> f64 {
    x.iter().map(|v| (v + 0.5).floor().powi(2)).sum()
}

/// Quartic with multiplicative noise: `sum u_i x_i^4`, `u_i` drawn from `noise`.
pub fn noisy_quartic(x: &[f64], mut noise: impl FnMut() -> f64) -> f64 {
    x.iter().map(|v| noise() * v.powi(4)).sum()
}

pub fn quartic(x: &[f64]) -> f64 {
    x.iter().map(|v| v.powi(4)).sum()
}

pub fn rastrigin(x: &[f64]) -> f64 {
    10.0 * x.len() as f64
        + x.iter()
            .map(|v| v * v - 10.0 * (2.0 * PI * v).cos())
            .sum::<f64>()
}

pub fn ackley(x: &[f64]) -> f64 {
    let n = x.len() as f64;
    let sum_sq: f64 = x.iter().map(|v| v * v).sum();
    let sum_cos: f64 = x.iter().map(|v| (2.0 * PI * v).cos()).sum();
    -20.0 * (-0.2 * (sum_sq / n).sqrt()).exp() - (sum_cos / n).exp() + 20.0 + E
}

pub fn griewank(x: &[f64]) -> f64 {
    let sum: f64 = x.iter().map(|v| v * v).sum::<f64>() / 4000.0;
    let prod: f64 = x
        .iter()
        .enumerate()
        .map(|(i, v)| (v / ((i + 1) as f64).sqrt()).cos())
        .product();
    1.0 + sum - prod
}
