//! Objective functions and box bounds.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Axis-aligned search box.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl Bounds {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.len() != upper.len() {
            return Err(Error::DimensionMismatch {
                expected: lower.len(),
                actual: upper.len(),
            });
        }
        if lower.is_empty() {
            return Err(Error::Precondition(
                "bounds must have dimension >= 1".into(),
            ));
        }
        for (d, (lo, hi)) in lower.iter().zip(&upper).enumerate() {
            if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
                return Err(Error::Precondition(format!(
                    "lower bound must be below upper bound in dimension {d} ({lo} vs {hi})"
                )));
            }
        }
        Ok(Self { lower, upper })
    }

    /// The same interval `[lower, upper]` in every one of `dim` coordinates.
    pub fn uniform(dim: usize, lower: f64, upper: f64) -> Result<Self> {
        Self::new(vec![lower; dim], vec![upper; dim])
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim()
            && x.iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(v, (lo, hi))| *lo <= *v && *v <= *hi)
    }

    /// Returns an error naming the first coordinate outside the box.
    pub fn check(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                actual: x.len(),
            });
        }
        for (index, (&value, (&lower, &upper))) in
            x.iter().zip(self.lower.iter().zip(&self.upper)).enumerate()
        {
            if !(lower <= value && value <= upper) {
                return Err(Error::OutOfBounds {
                    index,
                    value,
                    lower,
                    upper,
                });
            }
        }
        Ok(())
    }

    /// Clamps `x` into the box in place. Returns a mask of the clamped coordinates.
    pub fn clamp(&self, x: &mut [f64]) -> Vec<bool> {
        x.iter_mut()
            .zip(self.lower.iter().zip(&self.upper))
            .map(|(v, (&lo, &hi))| {
                if *v < lo {
                    *v = lo;
                    true
                } else if *v > hi {
                    *v = hi;
                    true
                } else if v.is_nan() {
                    *v = 0.5 * (lo + hi);
                    true
                } else {
                    false
                }
            })
            .collect()
    }

    pub fn sample<R: rand::Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        self.lower
            .iter()
            .zip(&self.upper)
            .map(|(&lo, &hi)| rng.random_range(lo..=hi))
            .collect()
    }
}

/// A minimization problem over a box.
///
/// `evaluate` takes `&mut self` so that noisy objectives can own their
/// noise stream. Each optimizer run owns its objective instance.
pub trait Objective {
    fn bounds(&self) -> &Bounds;

    fn dimension(&self) -> usize {
        self.bounds().dim()
    }

    /// Known optimal value, used for success detection.
    fn known_optimum(&self) -> Option<f64> {
        None
    }

    fn is_stochastic(&self) -> bool {
        false
    }

    fn evaluate(&mut self, x: &[f64]) -> f64;

    /// Value used to judge success at `x`. Noisy objectives override this
    /// with their noise-free counterpart; `fitness` is the value `evaluate`
    /// returned for the same point.
    fn judged_value(&mut self, _x: &[f64], fitness: f64) -> f64 {
        fitness
    }
}

impl<T: Objective + ?Sized> Objective for &mut T {
    fn bounds(&self) -> &Bounds {
        (**self).bounds()
    }
    fn known_optimum(&self) -> Option<f64> {
        (**self).known_optimum()
    }
    fn is_stochastic(&self) -> bool {
        (**self).is_stochastic()
    }
    fn evaluate(&mut self, x: &[f64]) -> f64 {
        (**self).evaluate(x)
    }
    fn judged_value(&mut self, x: &[f64], fitness: f64) -> f64 {
        (**self).judged_value(x, fitness)
    }
}

/// Closure-backed objective.
pub struct ObjectiveFunction<F> {
    bounds: Bounds,
    known_optimum: Option<f64>,
    stochastic: bool,
    func: F,
}

impl<F: FnMut(&[f64]) -> f64> ObjectiveFunction<F> {
    pub fn new(bounds: Bounds, func: F) -> Self {
        Self {
            bounds,
            known_optimum: None,
            stochastic: false,
            func,
        }
    }

    pub fn with_optimum(mut self, value: f64) -> Self {
        self.known_optimum = Some(value);
        self
    }

    pub fn stochastic(mut self, stochastic: bool) -> Self {
        self.stochastic = stochastic;
        self
    }
}

impl<F: FnMut(&[f64]) -> f64> Objective for ObjectiveFunction<F> {
    fn bounds(&self) -> &Bounds {
        &self.bounds
    }

    fn known_optimum(&self) -> Option<f64> {
        self.known_optimum
    }

    fn is_stochastic(&self) -> bool {
        self.stochastic
    }

    fn evaluate(&mut self, x: &[f64]) -> f64 {
        (self.func)(x)
    }
}
