//! Preserved history: a bounded elite archive of (coords, fitness, age)
//! records and the statistics the swarm derives from it.

use std::cmp::Ordering;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{precondition, Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PreservedEntry {
    pub coords: Vec<f64>,
    pub fitness: f64,
    pub birth_iteration: u64,
}

impl PreservedEntry {
    /// Age in generations at `iteration`; an entry born this generation has age 1.
    pub fn age(&self, iteration: u64) -> f64 {
        (iteration.saturating_sub(self.birth_iteration) + 1) as f64
    }
}

/// Eviction order: better fitness first, equal fitness keeps the younger entry.
pub(crate) fn elite_order(a_fit: f64, a_birth: u64, b_fit: f64, b_birth: u64) -> Ordering {
    a_fit.total_cmp(&b_fit).then(b_birth.cmp(&a_birth))
}

#[derive(Debug, Clone, PartialEq)]
pub struct PreservedHistory {
    capacity: usize,
    dim: usize,
    entries: Vec<PreservedEntry>,
    current_iteration: u64,
    rejected: usize,
}

impl PreservedHistory {
    pub fn new(capacity: usize, dim: usize) -> Result<Self> {
        if capacity == 0 {
            return precondition("history capacity must be positive");
        }
        if dim == 0 {
            return precondition("history dimension must be positive");
        }
        Ok(Self {
            capacity,
            dim,
            entries: Vec::with_capacity(capacity),
            current_iteration: 0,
            rejected: 0,
        })
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Entries sorted best first.
    pub fn entries(&self) -> &[PreservedEntry] {
        &self.entries
    }

    pub fn current_iteration(&self) -> u64 {
        self.current_iteration
    }

    /// Number of candidates skipped so far because their fitness was not finite.
    pub fn rejected(&self) -> usize {
        self.rejected
    }

    /// Merges `candidates` into the archive, keeping the `capacity` best.
    ///
    /// Non-finite candidates are skipped and counted in [`rejected`](Self::rejected).
    /// On a dimension mismatch the archive is left untouched.
    pub fn update<I>(&mut self, candidates: I, iteration: u64) -> Result<()>
    where
        I: IntoIterator<Item = (Vec<f64>, f64)>,
    {
        if iteration < self.current_iteration {
            return precondition(format!(
                "history iteration moved backwards ({iteration} < {})",
                self.current_iteration
            ));
        }
        let mut fresh = Vec::new();
        let mut rejected = 0;
        for (coords, fitness) in candidates {
            if coords.len() != self.dim {
                return Err(Error::DimensionMismatch {
                    expected: self.dim,
                    actual: coords.len(),
                });
            }
            if !fitness.is_finite() {
                rejected += 1;
                continue;
            }
            fresh.push(PreservedEntry {
                coords,
                fitness,
                birth_iteration: iteration,
            });
        }
        self.rejected += rejected;
        self.current_iteration = iteration;
        self.entries.extend(fresh);
        self.entries.sort_by(|a, b| {
            elite_order(a.fitness, a.birth_iteration, b.fitness, b.birth_iteration)
        });
        self.entries.truncate(self.capacity);
        Ok(())
    }

    fn require_non_empty(&self) -> Result<()> {
        if self.entries.is_empty() {
            return precondition("preserved history is empty");
        }
        Ok(())
    }

    /// Fitness of each entry standardized by the archive's population mean
    /// and standard deviation. All zeros when every fitness is equal.
    pub fn standardized_fitness(&self) -> Result<Vec<f64>> {
        self.require_non_empty()?;
        let fitness: Vec<f64> = self.entries.iter().map(|e| e.fitness).collect();
        let (mean, sd) = population_mean_sd(&fitness);
        if sd == 0.0 {
            return Ok(vec![0.0; fitness.len()]);
        }
        Ok(fitness.iter().map(|c| (c - mean) / sd).collect())
    }

    /// Per-entry weights `f(t~) / age^alpha`, where `t~` is the standardized
    /// fitness shifted so that its minimum is 1.
    pub fn weights(&self, f: &WeightFunction, alpha: f64, iteration: u64) -> Result<Vec<f64>> {
        if !(alpha > 0.0) {
            return precondition(format!("alpha must be positive, got {alpha}"));
        }
        let t = self.standardized_fitness()?;
        let t_min = t.iter().copied().fold(f64::INFINITY, f64::min);
        self.entries
            .iter()
            .zip(&t)
            .enumerate()
            .map(|(index, (entry, &ti))| {
                let guarded = ti - t_min + 1.0;
                let value = f.evaluate(guarded) / entry.age(iteration).powf(alpha);
                if value.is_finite() && value > 0.0 {
                    Ok(value)
                } else {
                    Err(Error::NonFiniteWeight { index, value })
                }
            })
            .collect()
    }

    /// Forward weighted center of the archive for one weight function.
    pub fn weighted_center(
        &self,
        f: &WeightFunction,
        alpha: f64,
        iteration: u64,
    ) -> Result<Vec<f64>> {
        let weights = self.weights(f, alpha, iteration)?;
        let total: f64 = weights.iter().sum();
        let mut center = vec![0.0; self.dim];
        for (entry, w) in self.entries.iter().zip(&weights) {
            for (c, x) in center.iter_mut().zip(&entry.coords) {
                *c += w * x;
            }
        }
        // A convex combination never leaves the bounding box; clamp away rounding.
        for (d, c) in center.iter_mut().enumerate() {
            *c /= total;
            let (lo, hi) = self.coord_range(d);
            *c = c.clamp(lo, hi);
        }
        Ok(center)
    }

    fn coord_range(&self, d: usize) -> (f64, f64) {
        self.entries
            .iter()
            .map(|e| e.coords[d])
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| {
                (lo.min(x), hi.max(x))
            })
    }

    /// Span measure: largest per-dimension population standard deviation of
    /// the stored coordinates.
    pub fn span_sigma(&self) -> Result<f64> {
        self.require_non_empty()?;
        let mut column = Vec::with_capacity(self.entries.len());
        let mut sigma: f64 = 0.0;
        for d in 0..self.dim {
            column.clear();
            column.extend(self.entries.iter().map(|e| e.coords[d]));
            sigma = sigma.max(population_mean_sd(&column).1);
        }
        Ok(sigma)
    }
}

impl Serialize for PreservedHistory {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.entries.serialize(serializer)
    }
}

/// Population mean and standard deviation. The deviation is exactly zero
/// when all values are equal.
pub(crate) fn population_mean_sd(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let all_equal = values.windows(2).all(|w| w[0] == w[1]);
    if all_equal {
        return (values[0], 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Transform applied to guarded standardized fitness before age discounting.
/// For minimization it must be strictly decreasing and positive on `[1, inf)`.
#[derive(Clone)]
pub enum WeightFunction {
    /// `exp(-t)`
    InverseExponential,
    /// `t^-3`
    InverseCubic,
    Custom(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl WeightFunction {
    pub fn custom(f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Self::Custom(Arc::new(f))
    }

    pub fn evaluate(&self, t: f64) -> f64 {
        match self {
            Self::InverseExponential => (-t).exp(),
            Self::InverseCubic => t.powi(3).recip(),
            Self::Custom(f) => f(t),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::InverseExponential => "inverse_exponential",
            Self::InverseCubic => "inverse_cubic",
            Self::Custom(_) => "custom",
        }
    }

    pub fn defaults() -> Vec<Self> {
        vec![Self::InverseExponential, Self::InverseCubic]
    }
}

impl fmt::Debug for WeightFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl Serialize for WeightFunction {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(self.name())
    }
}

impl<'de> Deserialize<'de> for WeightFunction {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let name = String::deserialize(deserializer)?;
        match name.as_str() {
            "inverse_exponential" => Ok(Self::InverseExponential),
            "inverse_cubic" => Ok(Self::InverseCubic),
            other => Err(serde::de::Error::custom(format!(
                "unknown weight function `{other}` (custom functions cannot be deserialized)"
            ))),
        }
    }
}
