//! Canonical global-best PSO, kept as the comparator for ALMI-PSO.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::objective::{Bounds, Objective};
use crate::particle::Particle;

use super::evaluator::Evaluator;
use super::{BaselineParams, OptimizerConfig, RunDiagnostics, RunSummary};

/// `v' = w v + c1 r1 (p - x) + c2 r2 (g - x)`, `x' = x + v'`, with fresh
/// uniform draws per dimension. Clamped coordinates lose their velocity.
pub fn pso_velocity_update<R: Rng + ?Sized>(
    particle: &mut Particle,
    global_best: &[f64],
    params: &BaselineParams,
    bounds: &Bounds,
    rng: &mut R,
) {
    for d in 0..particle.dim() {
        let x = particle.position[d];
        let r1: f64 = rng.random();
        let r2: f64 = rng.random();
        let v = params.inertia * particle.velocity[d]
            + params.c1 * r1 * (particle.personal_best_position[d] - x)
            + params.c2 * r2 * (global_best[d] - x);
        particle.velocity[d] = v;
        particle.position[d] = x + v;
    }
    let clamped = bounds.clamp(&mut particle.position);
    for (v, hit) in particle.velocity.iter_mut().zip(clamped) {
        if hit {
            *v = 0.0;
        }
    }
}

/// Runs the baseline PSO with the same initialization, budget, success and
/// determinism rules as [`optimize`](super::optimize).
pub fn baseline_pso<O: Objective + ?Sized>(
    objective: &mut O,
    cfg: &OptimizerConfig,
) -> Result<RunSummary> {
    let budget = cfg.validate_common(objective.dimension())?;
    let bounds = objective.bounds().clone();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut eval = Evaluator::new(objective, budget, cfg.success_threshold);

    let mut swarm = Vec::with_capacity(cfg.swarm_size);
    for _ in 0..cfg.swarm_size {
        let x = bounds.sample(&mut rng);
        let fitness = eval.evaluate(&x).unwrap_or(f64::INFINITY);
        swarm.push(Particle::new(x, fitness, 0));
    }

    let mut iterations = 0u64;
    'run: while !eval.done() {
        iterations += 1;
        for particle in swarm.iter_mut() {
            let global_best = eval.best_position().to_vec();
            pso_velocity_update(particle, &global_best, &cfg.baseline, &bounds, &mut rng);
            let Some(fitness) = eval.evaluate(&particle.position) else {
                break 'run;
            };
            particle.set_fitness(fitness);
        }
    }
    Ok(eval.finish(iterations, RunDiagnostics::default()))
}
