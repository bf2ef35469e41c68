use crate::objective::Objective;

use super::{RunDiagnostics, RunSummary, TracePoint};

/// Budgeted objective wrapper that tracks the global best, the improvement
/// trace and success.
pub(crate) struct Evaluator<'o, O: Objective + ?Sized> {
    objective: &'o mut O,
    budget: usize,
    threshold: f64,
    used: usize,
    best_position: Vec<f64>,
    best_fitness: f64,
    trace: Vec<TracePoint>,
    success_at: Option<usize>,
    non_finite: usize,
}

impl<'o, O: Objective + ?Sized> Evaluator<'o, O> {
    pub fn new(objective: &'o mut O, budget: usize, threshold: f64) -> Self {
        Self {
            objective,
            budget,
            threshold,
            used: 0,
            best_position: Vec::new(),
            best_fitness: f64::INFINITY,
            trace: Vec::new(),
            success_at: None,
            non_finite: 0,
        }
    }

    pub fn done(&self) -> bool {
        self.used >= self.budget || self.success_at.is_some()
    }

    pub fn best_position(&self) -> &[f64] {
        &self.best_position
    }

    /// Evaluates `x`, or returns `None` once the budget is spent or the run
    /// has succeeded. Non-finite outputs are scored as `+inf`.
    pub fn evaluate(&mut self, x: &[f64]) -> Option<f64> {
        if self.done() {
            return None;
        }
        let mut fitness = self.objective.evaluate(x);
        self.used += 1;
        if !fitness.is_finite() {
            self.non_finite += 1;
            fitness = f64::INFINITY;
        }
        if fitness < self.best_fitness || self.best_position.is_empty() {
            self.best_fitness = fitness;
            self.best_position.clear();
            self.best_position.extend_from_slice(x);
            self.trace.push(TracePoint {
                evaluation_count: self.used,
                best_so_far: fitness,
            });
            if let Some(optimum) = self.objective.known_optimum() {
                let judged = self.objective.judged_value(x, fitness);
                if judged <= optimum + self.threshold {
                    self.success_at = Some(self.used);
                }
            }
        }
        Some(fitness)
    }

    pub fn finish(self, generations: u64, mut diagnostics: RunDiagnostics) -> RunSummary {
        diagnostics.non_finite_evaluations = self.non_finite;
        let mut trace = self.trace;
        if trace
            .last()
            .is_some_and(|p| p.evaluation_count != self.used)
        {
            trace.push(TracePoint {
                evaluation_count: self.used,
                best_so_far: self.best_fitness,
            });
        }
        RunSummary {
            best_position: self.best_position,
            best_fitness: self.best_fitness,
            evaluations_used: self.used,
            evaluations_to_success: self.success_at,
            success: self.success_at.is_some(),
            fitness_trace: trace,
            generations,
            diagnostics,
        }
    }
}
