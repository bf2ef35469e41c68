//! The eight stable-tendency functions (`stf1`..`stf8`) and their rotated
//! variants (`rf1`..`rf8`), addressable by string id.
//!
//! Rotated variants evaluate `f(Q x)` over the original box, with `Q` a
//! seeded random rotation. `stf5` is noisy; its success is judged on the
//! noise-free quartic.

pub mod functions;
mod rotation;

pub use rotation::{random_orthogonal, RotationMatrix};

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::objective::{Bounds, Objective};

/// Rotation seed used for `rfN` ids that do not name one (`rfN@seed`).
pub const DEFAULT_ROTATION_SEED: u64 = 20_240_601;

/// Experiment dimension when none is configured.
pub const DEFAULT_DIMENSION: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Family {
    Stf1,
    Stf2,
    Stf3,
    Stf4,
    Stf5,
    Stf6,
    Stf7,
    Stf8,
}

impl Family {
    pub const ALL: [Family; 8] = [
        Family::Stf1,
        Family::Stf2,
        Family::Stf3,
        Family::Stf4,
        Family::Stf5,
        Family::Stf6,
        Family::Stf7,
        Family::Stf8,
    ];

    /// 1-based table index.
    pub fn index(self) -> usize {
        self as usize + 1
    }

    pub fn from_index(index: usize) -> Option<Self> {
        Self::ALL.get(index.checked_sub(1)?).copied()
    }

    pub fn name(self) -> &'static str {
        match self {
            Family::Stf1 => "Sphere",
            Family::Stf2 => "Schwefel 2.22",
            Family::Stf3 => "Quadric",
            Family::Stf4 => "Step",
            Family::Stf5 => "Noisy quartic",
            Family::Stf6 => "Rastrigin",
            Family::Stf7 => "Ackley",
            Family::Stf8 => "Griewank",
        }
    }

    /// Half-width of the symmetric initialization box.
    pub fn half_width(self) -> f64 {
        match self {
            Family::Stf1 | Family::Stf3 | Family::Stf4 => 100.0,
            Family::Stf2 => 10.0,
            Family::Stf5 => 500.0,
            Family::Stf6 => 5.12,
            Family::Stf7 => 32.0,
            Family::Stf8 => 600.0,
        }
    }

    pub fn optimum(self) -> f64 {
        0.0
    }

    pub fn is_noisy(self) -> bool {
        self == Family::Stf5
    }

    /// Evaluates the function at `z`, drawing `stf5` noise from `noise`.
    pub fn value(self, z: &[f64], noise: impl FnMut() -> f64) -> f64 {
        use functions::*;
        match self {
            Family::Stf1 => sphere(z),
            Family::Stf2 => schwefel_2_22(z),
            Family::Stf3 => quadric(z),
            Family::Stf4 => step(z),
            Family::Stf5 => noisy_quartic(z, noise),
            Family::Stf6 => rastrigin(z),
            Family::Stf7 => ackley(z),
            Family::Stf8 => griewank(z),
        }
    }

    /// Noise-free value; differs from [`value`](Self::value) only for `stf5`.
    pub fn clean_value(self, z: &[f64]) -> f64 {
        match self {
            Family::Stf5 => functions::quartic(z),
            other => other.value(z, || 1.0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BenchmarkId {
    pub family: Family,
    pub rotation_seed: Option<u64>,
}

impl BenchmarkId {
    pub fn plain(family: Family) -> Self {
        Self {
            family,
            rotation_seed: None,
        }
    }

    pub fn rotated(family: Family, seed: u64) -> Self {
        Self {
            family,
            rotation_seed: Some(seed),
        }
    }

    pub fn is_rotated(&self) -> bool {
        self.rotation_seed.is_some()
    }

    pub fn bounds(&self, dim: usize) -> Result<Bounds> {
        let h = self.family.half_width();
        Bounds::uniform(dim, -h, h)
    }
}

impl fmt::Display for BenchmarkId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.rotation_seed {
            None => write!(f, "stf{}", self.family.index()),
            Some(DEFAULT_ROTATION_SEED) => write!(f, "rf{}", self.family.index()),
            Some(seed) => write!(f, "rf{}@{seed}", self.family.index()),
        }
    }
}

impl FromStr for BenchmarkId {
    type Err = Error;

    /// Accepts `stfN`, `rfN` and `rfN@seed` (case-insensitive), `N` in 1..=8.
    fn from_str(s: &str) -> Result<Self> {
        let unknown = || Error::UnknownFunction(s.to_string());
        let lower = s.trim().to_ascii_lowercase();
        let (rotated, rest) = if let Some(rest) = lower.strip_prefix("stf") {
            (false, rest)
        } else if let Some(rest) = lower.strip_prefix("rf") {
            (true, rest)
        } else {
            return Err(unknown());
        };
        let (index, seed) = match rest.split_once('@') {
            Some(_) if !rotated => return Err(unknown()),
            Some((i, seed)) => (i, Some(seed.parse::<u64>().map_err(|_| unknown())?)),
            None => (rest, None),
        };
        let family = index
            .parse::<usize>()
            .ok()
            .and_then(Family::from_index)
            .ok_or_else(unknown)?;
        Ok(if rotated {
            Self::rotated(family, seed.unwrap_or(DEFAULT_ROTATION_SEED))
        } else {
            Self::plain(family)
        })
    }
}

impl Serialize for BenchmarkId {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for BenchmarkId {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// A benchmark instance in a fixed dimension, owning its noise stream.
#[derive(Debug, Clone)]
pub struct Benchmark {
    id: BenchmarkId,
    bounds: Bounds,
    rotation: Option<RotationMatrix>,
    noise: ChaCha8Rng,
}

impl Benchmark {
    pub fn new(id: BenchmarkId, dim: usize, noise_seed: u64) -> Result<Self> {
        Ok(Self {
            bounds: id.bounds(dim)?,
            rotation: id.rotation_seed.map(|seed| random_orthogonal(dim, seed)),
            noise: ChaCha8Rng::seed_from_u64(noise_seed),
            id,
        })
    }

    pub fn id(&self) -> BenchmarkId {
        self.id
    }

    pub fn rotation(&self) -> Option<&RotationMatrix> {
        self.rotation.as_ref()
    }

    fn transform(&self, x: &[f64]) -> Vec<f64> {
        match &self.rotation {
            Some(q) => q.apply(x),
            None => x.to_vec(),
        }
    }

    /// Evaluates at `x`, which must lie inside the box.
    pub fn evaluate_checked(&mut self, x: &[f64]) -> Result<f64> {
        self.bounds.check(x)?;
        Ok(self.raw_value(x))
    }

    fn raw_value(&mut self, x: &[f64]) -> f64 {
        let z = self.transform(x);
        let noise = &mut self.noise;
        self.id.family.value(&z, || noise.random::<f64>())
    }

    pub fn clean_value(&self, x: &[f64]) -> f64 {
        self.id.family.clean_value(&self.transform(x))
    }
}

impl Objective for Benchmark {
    fn bounds(&self) -> &Bounds {
        &self.bounds
    }

    fn known_optimum(&self) -> Option<f64> {
        Some(self.id.family.optimum())
    }

    fn is_stochastic(&self) -> bool {
        self.id.family.is_noisy()
    }

    fn evaluate(&mut self, x: &[f64]) -> f64 {
        self.raw_value(x)
    }

    fn judged_value(&mut self, x: &[f64], fitness: f64) -> f64 {
        if self.id.family.is_noisy() {
            self.clean_value(x)
        } else {
            fitness
        }
    }
}

/// Evaluates benchmark `id` at `x` with a throwaway noise stream.
pub fn evaluate_benchmark(id: BenchmarkId, x: &[f64], noise_seed: u64) -> Result<f64> {
    Benchmark::new(id, x.len(), noise_seed)?.evaluate_checked(x)
}
