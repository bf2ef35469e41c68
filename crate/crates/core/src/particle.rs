use serde::{Deserialize, Serialize};

/// A swarm member. `velocity` doubles as the reprojection velocity of the
/// individual update.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Particle {
    pub position: Vec<f64>,
    pub velocity: Vec<f64>,
    pub fitness: f64,
    pub personal_best_position: Vec<f64>,
    pub personal_best_fitness: f64,
    pub birth_iteration: u64,
}

impl Particle {
    /// A freshly evaluated particle at rest, its own personal best.
    pub fn new(position: Vec<f64>, fitness: f64, birth_iteration: u64) -> Self {
        Self {
            velocity: vec![0.0; position.len()],
            personal_best_position: position.clone(),
            personal_best_fitness: fitness,
            position,
            fitness,
            birth_iteration,
        }
    }

    pub fn dim(&self) -> usize {
        self.position.len()
    }

    /// Records a new evaluation of the current position and refreshes the
    /// personal best on strict improvement.
    pub fn set_fitness(&mut self, fitness: f64) {
        self.fitness = fitness;
        if fitness < self.personal_best_fitness {
            self.personal_best_fitness = fitness;
            self.personal_best_position.clone_from(&self.position);
        }
    }
}
