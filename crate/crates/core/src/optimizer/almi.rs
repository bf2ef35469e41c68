//! History-informed swarm: individual reprojection across the best ring
//! neighbor, collective reprojection away from the badness-weighted center,
//! and natural selection.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{precondition, Error, Result};
use crate::history::{elite_order, PreservedHistory};
use crate::objective::{Bounds, Objective};
use crate::particle::Particle;

use super::evaluator::Evaluator;
use super::{OptimizerConfig, RunDiagnostics, RunSummary, UpdateSigns};

/// Keeps the badness weights of the best particle strictly positive.
const BADNESS_FLOOR: f64 = 1e-12;

/// Below this length the reprojection direction is treated as undefined.
const MIN_DIRECTION_NORM: f64 = 1e-300;

/// Center of the swarm weighted toward its worst members.
///
/// Each particle weighs `(c - c_min) / (c_max - c_min) + 1e-12`. Particles
/// with non-finite fitness weigh as much as the worst finite one. A swarm
/// whose fitness values are all equal yields the plain arithmetic mean.
pub fn backward_center(swarm: &[Particle]) -> Result<Vec<f64>> {
    let Some(first) = swarm.first() else {
        return precondition("backward center of an empty swarm");
    };
    let dim = first.dim();
    let (lo, hi) = swarm
        .iter()
        .map(|p| p.fitness)
        .filter(|c| c.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), c| {
            (lo.min(c), hi.max(c))
        });
    let any_non_finite = swarm.iter().any(|p| !p.fitness.is_finite());

    if !any_non_finite && lo == hi {
        let n = swarm.len() as f64;
        let mut mean = vec![0.0; dim];
        for p in swarm {
            for (m, x) in mean.iter_mut().zip(&p.position) {
                *m += x;
            }
        }
        mean.iter_mut().for_each(|m| *m /= n);
        return Ok(mean);
    }

    let range = hi - lo;
    let mut center = vec![0.0; dim];
    let mut total = 0.0;
    for p in swarm {
        let badness = if !p.fitness.is_finite() {
            1.0
        } else if range > 0.0 {
            (p.fitness - lo) / range
        } else {
            0.0
        };
        let w = badness + BADNESS_FLOOR;
        total += w;
        for (c, x) in center.iter_mut().zip(&p.position) {
            *c += w * x;
        }
    }
    center.iter_mut().for_each(|c| *c /= total);
    Ok(center)
}

/// Projects the backward center through the forward center and `sigma`
/// further: `mu_b + r * (1 + sigma / |r|)` with `r = mu_w - mu_b`.
pub fn collective_reproject(mu_b: &[f64], mu_w: &[f64], sigma: f64) -> Result<Vec<f64>> {
    if mu_b.len() != mu_w.len() {
        return Err(Error::DimensionMismatch {
            expected: mu_b.len(),
            actual: mu_w.len(),
        });
    }
    let r: Vec<f64> = mu_w.iter().zip(mu_b).map(|(w, b)| w - b).collect();
    let norm = r.iter().map(|v| v * v).sum::<f64>().sqrt();
    if !(norm >= MIN_DIRECTION_NORM) {
        return Err(Error::DegenerateDirection);
    }
    if sigma == 0.0 {
        return Ok(mu_w.to_vec());
    }
    let stretch = 1.0 + sigma / norm;
    Ok(mu_b.iter().zip(&r).map(|(b, r)| b + r * stretch).collect())
}

/// Candidate positions produced by collective reprojection in one generation.
#[derive(Debug, Clone, PartialEq)]
pub struct Collective {
    pub positions: Vec<Vec<f64>>,
    /// How many positions were replaced by uniform random points.
    pub random_restarts: usize,
}

/// The pair emitted for one weight function: the forward center itself and
/// its reprojection from `mu_b`, both clamped. A degenerate direction turns
/// the second member into a uniform random point.
pub fn collective_pair<R: Rng + ?Sized>(
    mu_b: &[f64],
    mu_w: &[f64],
    sigma: f64,
    bounds: &Bounds,
    rng: &mut R,
) -> (Vec<f64>, Vec<f64>, bool) {
    let mut center = mu_w.to_vec();
    bounds.clamp(&mut center);
    match collective_reproject(mu_b, mu_w, sigma) {
        Ok(mut x) => {
            bounds.clamp(&mut x);
            (center, x, false)
        }
        Err(_) => (center, bounds.sample(rng), true),
    }
}

/// Generates `2 * f_n` candidates from the preserved history: per weight
/// function, its weighted center and the reprojection of the swarm's
/// backward center across it.
pub fn generate_collective<R: Rng + ?Sized>(
    history: &PreservedHistory,
    swarm: &[Particle],
    cfg: &OptimizerConfig,
    iteration: u64,
    bounds: &Bounds,
    rng: &mut R,
) -> Result<Collective> {
    let sigma = history.span_sigma()?;
    let mu_b = backward_center(swarm)?;
    let mut positions = Vec::with_capacity(cfg.generated_per_generation());
    let mut random_restarts = 0;
    for f in &cfg.weight_functions {
        match history.weighted_center(f, cfg.alpha, iteration) {
            Ok(mu_w) => {
                let (center, reprojected, restarted) =
                    collective_pair(&mu_b, &mu_w, sigma, bounds, rng);
                random_restarts += usize::from(restarted);
                positions.push(center);
                positions.push(reprojected);
            }
            Err(Error::NonFiniteWeight { .. }) => {
                random_restarts += 2;
                positions.push(bounds.sample(rng));
                positions.push(bounds.sample(rng));
            }
            Err(e) => return Err(e),
        }
    }
    Ok(Collective {
        positions,
        random_restarts,
    })
}

/// Index of the ring neighbor (`i - 1` or `i + 1`, wrapping) with the
/// better personal best. Ties go to the predecessor.
pub fn ring_neighbor(swarm: &[Particle], i: usize) -> usize {
    let n = swarm.len();
    let prev = (i + n - 1) % n;
    let next = (i + 1) % n;
    if swarm[next].personal_best_fitness < swarm[prev].personal_best_fitness {
        next
    } else {
        prev
    }
}

/// Individual reprojection step.
///
/// Per dimension, with independent uniform draws `r_a`, `r_b`:
/// `w' = -w + 2 r_a (x - g) + 2 r_b (x - p)` and `x' = x + w' + 2 (l - x)`.
/// The resulting position is clamped and the velocity zeroed wherever the
/// clamp was active. Fitness is left for the caller to refresh.
pub fn individual_update<R: Rng + ?Sized>(
    particle: &mut Particle,
    neighbor_best: &[f64],
    global_best: &[f64],
    bounds: &Bounds,
    signs: UpdateSigns,
    rng: &mut R,
) -> Result<()> {
    let dim = particle.dim();
    for len in [
        particle.velocity.len(),
        particle.personal_best_position.len(),
        neighbor_best.len(),
        global_best.len(),
        bounds.dim(),
    ] {
        if len != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                actual: len,
            });
        }
    }
    let sign = match signs {
        UpdateSigns::Verbatim => 1.0,
        UpdateSigns::Flipped => -1.0,
    };
    for d in 0..dim {
        let x = particle.position[d];
        let r_a: f64 = rng.random();
        let r_b: f64 = rng.random();
        let w = -particle.velocity[d]
            + sign * 2.0 * r_a * (x - global_best[d])
            + sign * 2.0 * r_b * (x - particle.personal_best_position[d]);
        particle.velocity[d] = w;
        particle.position[d] = x + w + 2.0 * (neighbor_best[d] - x);
    }
    let clamped = bounds.clamp(&mut particle.position);
    for (v, hit) in particle.velocity.iter_mut().zip(clamped) {
        if hit {
            *v = 0.0;
        }
    }
    Ok(())
}

/// Keeps the `swarm.len()` fittest particles of `swarm` and `newcomers`.
///
/// Ties prefer the younger particle. Surviving incumbents keep their ring
/// slot; vacated slots are filled by surviving newcomers in order.
pub fn natural_selection(swarm: Vec<Particle>, newcomers: Vec<Particle>) -> Vec<Particle> {
    let n = swarm.len();
    let union: Vec<Particle> = swarm.into_iter().chain(newcomers).collect();
    let mut order: Vec<usize> = (0..union.len()).collect();
    order.sort_by(|&a, &b| {
        let (pa, pb) = (&union[a], &union[b]);
        elite_order(
            pa.fitness,
            pa.birth_iteration,
            pb.fitness,
            pb.birth_iteration,
        )
        .then(a.cmp(&b))
    });
    let mut keep = vec![false; union.len()];
    for &i in &order[..n] {
        keep[i] = true;
    }
    let mut slots: Vec<Option<Particle>> = union.into_iter().map(Some).collect();
    let mut arrivals = (n..slots.len())
        .filter(|&i| keep[i])
        .collect::<Vec<_>>()
        .into_iter();
    (0..n)
        .map(|i| {
            let src = if keep[i] {
                i
            } else {
                arrivals.next().expect("one arrival per vacated slot")
            };
            slots[src].take().expect("each particle placed once")
        })
        .collect()
}

/// A running ALMI-PSO optimization, advanced one generation at a time.
pub struct AlmiSwarm<'o, O: Objective + ?Sized> {
    cfg: OptimizerConfig,
    bounds: Bounds,
    eval: Evaluator<'o, O>,
    rng: ChaCha8Rng,
    swarm: Vec<Particle>,
    history: PreservedHistory,
    pending: Vec<(Vec<f64>, f64)>,
    generation: u64,
    random_restarts: usize,
}

impl<'o, O: Objective + ?Sized> AlmiSwarm<'o, O> {
    /// Validates `cfg`, then samples and evaluates the initial swarm.
    pub fn new(objective: &'o mut O, cfg: &OptimizerConfig) -> Result<Self> {
        let dim = objective.dimension();
        let budget = cfg.validate(dim)?;
        let bounds = objective.bounds().clone();
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let mut eval = Evaluator::new(objective, budget, cfg.success_threshold);
        let mut swarm = Vec::with_capacity(cfg.swarm_size);
        let mut pending = Vec::with_capacity(cfg.swarm_size);
        for _ in 0..cfg.swarm_size {
            let x = bounds.sample(&mut rng);
            let fitness = eval.evaluate(&x).unwrap_or(f64::INFINITY);
            pending.push((x.clone(), fitness));
            swarm.push(Particle::new(x, fitness, 0));
        }
        Ok(Self {
            history: PreservedHistory::new(cfg.memory_size, dim)?,
            cfg: cfg.clone(),
            bounds,
            eval,
            rng,
            swarm,
            pending,
            generation: 0,
            random_restarts: 0,
        })
    }

    pub fn swarm(&self) -> &[Particle] {
        &self.swarm
    }

    pub fn history(&self) -> &PreservedHistory {
        &self.history
    }

    pub fn generation(&self) -> u64 {
        self.generation
    }

    pub fn is_done(&self) -> bool {
        self.eval.done()
    }

    /// Runs one generation. Returns `false` once the budget is spent or the
    /// success threshold was reached, possibly part-way through.
    pub fn step(&mut self) -> Result<bool> {
        if self.eval.done() {
            return Ok(false);
        }
        self.generation += 1;
        let g = self.generation;

        self.history.update(self.pending.drain(..), g)?;

        let collective = generate_collective(
            &self.history,
            &self.swarm,
            &self.cfg,
            g,
            &self.bounds,
            &mut self.rng,
        )?;
        self.random_restarts += collective.random_restarts;
        let mut newcomers = Vec::with_capacity(collective.positions.len());
        for x in collective.positions {
            let Some(fitness) = self.eval.evaluate(&x) else {
                return Ok(false);
            };
            self.pending.push((x.clone(), fitness));
            newcomers.push(Particle::new(x, fitness, g));
        }

        let swarm = std::mem::take(&mut self.swarm);
        self.swarm = natural_selection(swarm, newcomers);

        for i in 0..self.swarm.len() {
            let neighbor = ring_neighbor(&self.swarm, i);
            let neighbor_best = self.swarm[neighbor].personal_best_position.clone();
            let particle = &mut self.swarm[i];
            individual_update(
                particle,
                &neighbor_best,
                self.eval.best_position(),
                &self.bounds,
                self.cfg.update_signs,
                &mut self.rng,
            )?;
            let Some(fitness) = self.eval.evaluate(&particle.position) else {
                return Ok(false);
            };
            particle.set_fitness(fitness);
            self.pending.push((particle.position.clone(), fitness));
        }
        Ok(!self.eval.done())
    }

    pub fn finish(self) -> RunSummary {
        let diagnostics = RunDiagnostics {
            random_restarts: self.random_restarts,
            rejected_history_candidates: self.history.rejected(),
            ..Default::default()
        };
        self.eval.finish(self.generation, diagnostics)
    }
}

/// Runs ALMI-PSO on `objective` until the budget is spent or the known
/// optimum is reached within `cfg.success_threshold`.
pub fn optimize<O: Objective + ?Sized>(
    objective: &mut O,
    cfg: &OptimizerConfig,
) -> Result<RunSummary> {
    let mut run = AlmiSwarm::new(objective, cfg)?;
    while run.step()? {}
    Ok(run.finish())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::history::WeightFunction;
    use crate::objective::ObjectiveFunction;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn particle(pos: &[f64], fitness: f64, birth: u64) -> Particle {
        Particle::new(pos.to_vec(), fitness, birth)
    }

    fn sphere_objective(dim: usize) -> ObjectiveFunction<impl FnMut(&[f64]) -> f64> {
        ObjectiveFunction::new(
            Bounds::uniform(dim, -100.0, 100.0).unwrap(),
            |x: &[f64]| x.iter().map(|v| v * v).sum(),
        )
        .with_optimum(0.0)
    }

    #[test]
    fn backward_center_examples() {
        let swarm = vec![particle(&[0.0, 2.0], 3.0, 0), particle(&[4.0, 6.0], 3.0, 0)];
        assert_eq!(backward_center(&swarm).unwrap(), vec![2.0, 4.0]);

        let swarm = vec![particle(&[0.0], 0.0, 0), particle(&[10.0], 1.0, 0)];
        let c = backward_center(&swarm).unwrap();
        assert_abs_diff_eq!(c[0], 10.0, epsilon = 1e-10);

        let swarm = vec![particle(&[4.0, 4.0], 1.0, 0)];
        assert_eq!(backward_center(&swarm).unwrap(), vec![4.0, 4.0]);

        assert!(matches!(backward_center(&[]), Err(Error::Precondition(_))));
    }

    #[test]
    fn backward_center_treats_infinite_as_worst() {
        let swarm = vec![
            particle(&[0.0], 1.0, 0),
            particle(&[2.0], 3.0, 0),
            particle(&[8.0], f64::INFINITY, 0),
        ];
        let c = backward_center(&swarm).unwrap();
        // weights ~ {0, 1, 1}
        assert_abs_diff_eq!(c[0], 5.0, epsilon = 1e-9);
    }

    #[test]
    fn reprojection_examples() {
        assert_eq!(
            collective_reproject(&[0.0, 0.0], &[1.0, 0.0], 1.0).unwrap(),
            vec![2.0, 0.0]
        );
        assert_eq!(
            collective_reproject(&[0.1, -3.7], &[0.3, 2.9], 0.0).unwrap(),
            vec![0.3, 2.9]
        );
        assert!(matches!(
            collective_reproject(&[1.0, 1.0], &[1.0, 1.0], 0.5),
            Err(Error::DegenerateDirection)
        ));
    }

    #[test]
    fn collective_pair_composition() {
        let bounds = Bounds::uniform(1, -5.0, 5.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let (a, b, restarted) = collective_pair(&[0.0], &[1.0], 0.0, &bounds, &mut rng);
        assert_eq!((a, b, restarted), (vec![1.0], vec![1.0], false));

        let (a, b, restarted) = collective_pair(&[2.0], &[2.0], 1.0, &bounds, &mut rng);
        assert_eq!(a, vec![2.0]);
        assert!(restarted);
        assert!(bounds.contains(&b));
    }

    #[test]
    fn generate_collective_emits_two_per_weight_function() {
        let bounds = Bounds::uniform(2, -10.0, 10.0).unwrap();
        let mut h = PreservedHistory::new(10, 2).unwrap();
        h.update(
            [
                (vec![1.0, 1.0], 1.0),
                (vec![2.0, 0.0], 2.0),
                (vec![-1.0, 3.0], 4.0),
            ],
            1,
        )
        .unwrap();
        let swarm = vec![
            particle(&[5.0, 5.0], 9.0, 0),
            particle(&[-5.0, 4.0], 7.0, 0),
        ];
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let cfg = OptimizerConfig::default();
        let out = generate_collective(&h, &swarm, &cfg, 1, &bounds, &mut rng).unwrap();
        assert_eq!(out.positions.len(), 4);
        assert!(out.positions.iter().all(|x| bounds.contains(x)));

        let cfg = OptimizerConfig {
            weight_functions: vec![WeightFunction::InverseCubic],
            ..Default::default()
        };
        let out = generate_collective(&h, &swarm, &cfg, 1, &bounds, &mut rng).unwrap();
        assert_eq!(out.positions.len(), 2);
    }

    #[test]
    fn generate_collective_degenerate_geometry() {
        let bounds = Bounds::uniform(2, -10.0, 10.0).unwrap();
        let mut h = PreservedHistory::new(10, 2).unwrap();
        h.update([(vec![1.0, 2.0], 1.0)], 1).unwrap();
        let swarm = vec![particle(&[1.0, 2.0], 1.0, 0)];
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let out = generate_collective(
            &h,
            &swarm,
            &OptimizerConfig::default(),
            1,
            &bounds,
            &mut rng,
        )
        .unwrap();
        assert_eq!(out.random_restarts, 2);
        for pair in out.positions.chunks(2) {
            assert_eq!(pair[0], vec![1.0, 2.0]);
            assert!(bounds.contains(&pair[1]));
        }
    }

    #[test]
    fn individual_update_examples() {
        let bounds = Bounds::uniform(1, -10.0, 10.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);

        let mut p = particle(&[3.0], 1.0, 0);
        individual_update(
            &mut p,
            &[3.0],
            &[3.0],
            &bounds,
            UpdateSigns::Verbatim,
            &mut rng,
        )
        .unwrap();
        assert_eq!(p.position, vec![3.0]);
        assert_eq!(p.velocity, vec![0.0]);

        let mut p = particle(&[0.0], 1.0, 0);
        individual_update(
            &mut p,
            &[1.0],
            &[0.0],
            &bounds,
            UpdateSigns::Verbatim,
            &mut rng,
        )
        .unwrap();
        assert_eq!(p.position, vec![2.0]);

        for _ in 0..10 {
            let mut p = particle(&[0.0], 1.0, 0);
            p.velocity = vec![1.0];
            individual_update(
                &mut p,
                &[0.0],
                &[0.0],
                &bounds,
                UpdateSigns::Verbatim,
                &mut rng,
            )
            .unwrap();
            assert_eq!(p.position, vec![-1.0]);
            assert_eq!(p.velocity, vec![-1.0]);
        }
    }

    #[test]
    fn individual_update_clamps_and_stops() {
        let bounds = Bounds::uniform(2, -1.0, 1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut p = particle(&[0.0, 0.0], 1.0, 0);
        individual_update(
            &mut p,
            &[5.0, 0.0],
            &[0.0, 0.0],
            &bounds,
            UpdateSigns::Verbatim,
            &mut rng,
        )
        .unwrap();
        assert_eq!(p.position, vec![1.0, 0.0]);
        assert_eq!(p.velocity[0], 0.0);
    }

    #[test]
    fn individual_update_rejects_mismatch() {
        let bounds = Bounds::uniform(2, -1.0, 1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut p = particle(&[0.0, 0.0], 1.0, 0);
        assert!(individual_update(
            &mut p,
            &[0.0],
            &[0.0, 0.0],
            &bounds,
            UpdateSigns::Verbatim,
            &mut rng
        )
        .is_err());
    }

    #[test]
    fn ring_neighbor_picks_better_personal_best() {
        let swarm: Vec<Particle> = [5.0, 1.0, 3.0, 0.5]
            .iter()
            .enumerate()
            .map(|(i, &f)| particle(&[i as f64], f, 0))
            .collect();
        assert_eq!(ring_neighbor(&swarm, 0), 3);
        assert_eq!(ring_neighbor(&swarm, 2), 3);
        assert_eq!(ring_neighbor(&swarm, 3), 2);
    }

    fn fitness(swarm: &[Particle]) -> Vec<f64> {
        swarm.iter().map(|p| p.fitness).collect()
    }

    #[test]
    fn natural_selection_examples() {
        let swarm: Vec<Particle> = [1.0, 2.0, 3.0, 4.0]
            .iter()
            .map(|&f| particle(&[f], f, 0))
            .collect();

        let out = natural_selection(
            swarm.clone(),
            vec![particle(&[9.0], 9.0, 1), particle(&[8.0], 8.0, 1)],
        );
        assert_eq!(out, swarm);

        let out = natural_selection(
            swarm.clone(),
            vec![particle(&[0.0], 0.0, 1), particle(&[0.5], 0.5, 1)],
        );
        assert_eq!(fitness(&out), vec![1.0, 2.0, 0.0, 0.5]);

        let out = natural_selection(
            swarm.clone(),
            vec![particle(&[0.0], 0.0, 1), particle(&[5.0], 5.0, 1)],
        );
        let mut got = fitness(&out);
        got.sort_by(f64::total_cmp);
        assert_eq!(got, vec![0.0, 1.0, 2.0, 3.0]);
    }

    #[test]
    fn natural_selection_tie_prefers_younger() {
        let swarm = vec![particle(&[0.0], 1.0, 0), particle(&[1.0], 2.0, 0)];
        let out = natural_selection(swarm, vec![particle(&[7.0], 2.0, 4)]);
        assert_eq!(out[1].birth_iteration, 4);
        assert_eq!(out[1].position, vec![7.0]);
    }

    #[test]
    fn sphere_2d_smoke() {
        let mut f = sphere_objective(2);
        let cfg = OptimizerConfig {
            max_evaluations: Some(20_000),
            ..Default::default()
        };
        let summary = optimize(&mut f, &cfg).unwrap();
        assert!(summary.success, "best {}", summary.best_fitness);
        assert!(summary.best_fitness <= 1e-8);
        assert!(summary.evaluations_to_success.unwrap() <= summary.evaluations_used);
    }

    #[test]
    fn same_seed_same_trace() {
        let cfg = OptimizerConfig {
            max_evaluations: Some(3_000),
            seed: 17,
            ..Default::default()
        };
        let a = optimize(&mut sphere_objective(5), &cfg).unwrap();
        let b = optimize(&mut sphere_objective(5), &cfg).unwrap();
        assert_eq!(a, b);
        let c = optimize(&mut sphere_objective(5), &cfg.clone().with_seed(18)).unwrap();
        assert_ne!(a.fitness_trace, c.fitness_trace);
    }

    #[test]
    fn budget_below_swarm_is_config_error() {
        let cfg = OptimizerConfig {
            max_evaluations: Some(3),
            ..Default::default()
        };
        assert!(matches!(
            optimize(&mut sphere_objective(2), &cfg),
            Err(Error::InvalidConfig(_))
        ));
    }

    #[test]
    fn non_finite_outputs_are_flagged() {
        let bounds = Bounds::uniform(2, -1.0, 1.0).unwrap();
        let mut calls = 0usize;
        let mut f = ObjectiveFunction::new(bounds, |x: &[f64]| {
            calls += 1;
            if calls.is_multiple_of(3) {
                f64::NAN
            } else {
                x[0] * x[0] + x[1] * x[1]
            }
        });
        let cfg = OptimizerConfig {
            max_evaluations: Some(300),
            ..Default::default()
        };
        let s = optimize(&mut f, &cfg).unwrap();
        assert_eq!(s.evaluations_used, 300);
        assert_eq!(s.diagnostics.non_finite_evaluations, 100);
        assert!(s.diagnostics.rejected_history_candidates > 0);
        assert!(s.best_fitness.is_finite());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]

        #[test]
        fn engine_invariants(
            dim in 1usize..5,
            swarm_size in 5usize..14,
            f_n in 1usize..3,
            generations in 1usize..12,
            seed in any::<u64>(),
            half_width in 0.5f64..50.0,
        ) {
            prop_assume!(2 * f_n < swarm_size);
            let per_gen = 2 * f_n + swarm_size;
            let budget = swarm_size + generations * per_gen;
            let bounds = Bounds::uniform(dim, -half_width, half_width).unwrap();
            let mut seen = Vec::new();
            let mut f = ObjectiveFunction::new(bounds.clone(), |x: &[f64]| {
                seen.push(x.to_vec());
                x.iter().map(|v| (v - 0.3).abs()).sum::<f64>()
            });
            let cfg = OptimizerConfig {
                swarm_size,
                weight_functions: WeightFunction::defaults().into_iter().take(f_n).collect(),
                max_evaluations: Some(budget),
                seed,
                ..Default::default()
            };
            let mut run = AlmiSwarm::new(&mut f, &cfg).unwrap();
            let mut completed = 0;
            loop {
                let more = run.step().unwrap();
                prop_assert_eq!(run.swarm().len(), swarm_size);
                prop_assert!(run.history().len() <= cfg.memory_size);
                for p in run.swarm() {
                    prop_assert!(p.personal_best_fitness <= p.fitness);
                    prop_assert!(bounds.contains(&p.position));
                }
                if !more { break; }
                completed += 1;
            }
            let s = run.finish();
            prop_assert_eq!(completed + 1, generations);
            prop_assert_eq!(s.generations as usize, generations);
            prop_assert_eq!(s.evaluations_used, swarm_size + generations * per_gen);
            prop_assert_eq!(s.evaluations_used, seen.len());
            prop_assert!(seen.iter().all(|x| bounds.contains(x)));
            let min_seen = seen
                .iter()
                .map(|x| x.iter().map(|v| (v - 0.3).abs()).sum::<f64>())
                .fold(f64::INFINITY, f64::min);
            prop_assert_eq!(s.best_fitness, min_seen);
            prop_assert!(s.fitness_trace.windows(2).all(|w| w[1].best_so_far <= w[0].best_so_far));
        }
    }
}
