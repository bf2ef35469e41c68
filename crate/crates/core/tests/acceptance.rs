//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::cell::RefCell;
use std::path::PathBuf;
use std::time::Instant;

use almi_pso::benchmark::{Benchmark, BenchmarkId, Family, DEFAULT_ROTATION_SEED};
use almi_pso::harness::{run_batch, AlgorithmKind, AlgorithmSpec, ExperimentConfig, FvMatrix};
use almi_pso::history::{PreservedHistory, WeightFunction};
use almi_pso::io::read_report_csv;
use almi_pso::objective::{Bounds, Objective, ObjectiveFunction};
use almi_pso::optimizer::{
    collective_reproject, individual_update, natural_selection, optimize, AlmiSwarm,
    OptimizerConfig, RunSummary, UpdateSigns,
};
use almi_pso::particle::Particle;
use almi_pso::smoothing::{
    fit_parameters, grid_search_fit, ses_smooth, synth_sinusoid, EvaluationScheme, Metric,
    SmoothingKind,
};
use almi_pso::stats::{friedman_test, wilcoxon_signed_rank};
use proptest::prelude::*;
use proptest::test_runner::{Config as ProptestConfig, TestRunner};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(cond: bool, what: &str) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(what.to_string())
    }
}

fn close(a: f64, b: f64, what: &str) -> Result<(), String> {
    check((a - b).abs() <= 1e-10, &format!("{what}: {a} != {b}"))
}

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

fn history(points: &[(&[f64], f64)]) -> PreservedHistory {
    let mut h = PreservedHistory::new(points.len().max(1), points[0].0.len()).unwrap();
    h.update(points.iter().map(|(x, c)| (x.to_vec(), *c)), 0)
        .unwrap();
    h
}

fn particle(x: f64, fitness: f64, birth: u64) -> Particle {
    Particle::new(vec![x], fitness, birth)
}

fn criterion_1() -> Outcome {
    let t = history(&[(&[0.0], 7.0), (&[1.0], 7.0), (&[2.0], 7.0)])
        .standardized_fitness()
        .unwrap();
    check(t == vec![0.0; 3], "standardized_fitness constant")?;
    let t = history(&[(&[0.0], 1.0), (&[1.0], 2.0), (&[2.0], 3.0)])
        .standardized_fitness()
        .unwrap();
    let s = 1.5f64.sqrt();
    for (a, b) in t.iter().zip([-s, 0.0, s]) {
        close(*a, b, "standardized_fitness {1,2,3}")?;
    }
    check(
        history(&[(&[0.0], 4.0)]).standardized_fitness().unwrap() == vec![0.0],
        "single entry",
    )?;

    close(
        history(&[(&[0.0, 0.0], 1.0), (&[2.0, 0.0], 2.0)])
            .span_sigma()
            .unwrap(),
        1.0,
        "span (0,0),(2,0)",
    )?;
    close(
        history(&[(&[0.0, 0.0], 1.0), (&[0.0, 6.0], 2.0)])
            .span_sigma()
            .unwrap(),
        3.0,
        "span (0,0),(0,6)",
    )?;
    close(
        history(&[(&[1.0, 1.0], 1.0), (&[1.0, 1.0], 2.0)])
            .span_sigma()
            .unwrap(),
        0.0,
        "span identical",
    )?;

    check(
        collective_reproject(&[0.0, 0.0], &[1.0, 0.0], 1.0).unwrap() == vec![2.0, 0.0],
        "reproject (2,0)",
    )?;
    check(
        collective_reproject(&[0.3, -2.0], &[1.7, 4.0], 0.0).unwrap() == vec![1.7, 4.0],
        "reproject sigma 0",
    )?;
    check(
        collective_reproject(&[1.0], &[1.0], 1.0).is_err(),
        "reproject degenerate",
    )?;

    let bounds = Bounds::uniform(1, -10.0, 10.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut p = particle(0.0, 0.0, 0);
    individual_update(
        &mut p,
        &[1.0],
        &[0.0],
        &bounds,
        UpdateSigns::Verbatim,
        &mut rng,
    )
    .unwrap();
    check(p.position == vec![2.0], "individual_update across neighbor")?;
    let mut p = particle(0.0, 0.0, 0);
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
    check(
        p.position == vec![-1.0],
        "individual_update velocity negation",
    )?;
    let mut p = particle(3.5, 0.0, 0);
    individual_update(
        &mut p,
        &[3.5],
        &[3.5],
        &bounds,
        UpdateSigns::Verbatim,
        &mut rng,
    )
    .unwrap();
    check(p.position == vec![3.5], "individual_update fixed point")?;

    let swarm: Vec<_> = [1.0, 2.0, 3.0, 4.0]
        .iter()
        .map(|&c| particle(c, c, 0))
        .collect();
    let newcomers = vec![particle(0.0, 0.0, 1), particle(5.0, 5.0, 1)];
    let mut survivors: Vec<f64> = natural_selection(swarm, newcomers)
        .iter()
        .map(|p| p.fitness)
        .collect();
    survivors.sort_by(f64::total_cmp);
    check(
        survivors == vec![0.0, 1.0, 2.0, 3.0],
        "natural_selection survivors",
    )?;

    let f = friedman_test(&[
        vec![1.0, 2.0, 3.0],
        vec![1.0, 2.0, 3.0],
        vec![1.0, 2.0, 3.0],
    ])
    .unwrap();
    close(f.statistic, 6.0, "friedman 3x3")?;
    let f = friedman_test(&[vec![2.0, 2.0], vec![5.0, 5.0]]).unwrap();
    check(
        f.statistic == 0.0 && f.p_value == 1.0,
        "friedman identical columns",
    )?;

    let w = wilcoxon_signed_rank(&[1.0, 2.0, -3.0], &[0.0, 0.0, 0.0]).unwrap();
    check(
        w.statistic == 3.0 && w.p_value == 1.0,
        "wilcoxon {+1,+2,-3}",
    )?;
    check(
        wilcoxon_signed_rank(&[1.0, 2.0], &[1.0, 2.0])
            .unwrap()
            .degenerate,
        "wilcoxon degenerate",
    )?;

    let s = ses_smooth(&[3.0, 5.0, 9.0], 0.5, 1.0).unwrap();
    for (a, b) in s.iter().zip([2.0, 3.5, 6.25]) {
        close(*a, b, "ses_smooth")?;
    }
    Ok("all oracle examples match".into())
}

fn criterion_2() -> Outcome {
    let a = [1.0, 2.5, 0.1, 4.0, 3.0, 7.0, 0.5, 2.0];
    let w = wilcoxon_signed_rank(&a, &[0.0; 8]).unwrap();
    check(w.exact, "exact path not used")?;
    check(w.statistic == 0.0, &format!("W = {}", w.statistic))?;
    check(w.p_value == 0.0078125, &format!("p = {}", w.p_value))?;
    Ok(format!("W = {}, p = {}", w.statistic, w.p_value))
}

fn criterion_3() -> Outcome {
    let stf = FvMatrix::from_reports(&read_report_csv(&fixture("stf_fv.csv")).unwrap()).unwrap();
    check(
        stf.values.len() == 8 && stf.algorithms.len() == 7,
        "fixture shape",
    )?;
    let f = friedman_test(&stf.values).unwrap();
    check(
        (f.statistic - 29.017).abs() <= 0.5,
        &format!("statistic {:.3} outside 29.017 +/- 0.5", f.statistic),
    )?;
    Ok(format!("statistic {:.3}, p {:.3e}", f.statistic, f.p_value))
}

fn batch(
    functions: &[BenchmarkId],
    kinds: &[AlgorithmKind],
    threshold: f64,
    base_seed: u64,
) -> ExperimentConfig {
    ExperimentConfig {
        functions: functions.to_vec(),
        algorithms: kinds.iter().map(|&k| AlgorithmSpec::new(k)).collect(),
        dimension: 10,
        runs: 30,
        budget: None,
        threshold,
        base_seed,
        output_dir: None,
        jobs: None,
    }
}

fn criterion_4() -> Outcome {
    let floors = [(1, 1.0), (4, 0.8), (6, 0.8), (7, 0.8), (8, 0.8)];
    let ids: Vec<_> = floors
        .iter()
        .map(|&(i, _)| BenchmarkId::plain(Family::from_index(i).unwrap()))
        .collect();
    let result = run_batch(&batch(&ids, &[AlgorithmKind::Almi], 1e-6, 4)).unwrap();
    let mut line = Vec::new();
    let mut failed = Vec::new();
    for (&(i, floor), report) in floors.iter().zip(&result.reports) {
        line.push(format!("STF{i} SR {:.0}%", report.sr * 100.0));
        if report.sr < floor {
            failed.push(format!(
                "STF{i} SR {:.1}% < {:.0}%",
                report.sr * 100.0,
                floor * 100.0
            ));
        }
    }
    if failed.is_empty() {
        Ok(line.join(", "))
    } else {
        Err(format!("{} ({})", failed.join("; "), line.join(", ")))
    }
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    }
}

fn criterion_5() -> Outcome {
    let id = BenchmarkId::plain(Family::Stf1);
    let result = run_batch(&batch(
        &[id],
        &[AlgorithmKind::Almi, AlgorithmKind::BaselinePso],
        1e-6,
        5,
    ))
    .unwrap();
    let medians: Vec<f64> = ["almi", "baseline-pso"]
        .iter()
        .map(|alg| {
            median(
                result
                    .runs
                    .values()
                    .filter(|r| r.key.algorithm_id == *alg)
                    .map(|r| {
                        let s = r.outcome.as_ref().unwrap();
                        s.evaluations_to_success.map_or(f64::INFINITY, |e| e as f64)
                    })
                    .collect(),
            )
        })
        .collect();
    let msg = format!(
        "median evaluations-to-success ALMI {} vs baseline {}",
        medians[0], medians[1]
    );
    check(medians[0] <= medians[1], &msg)?;
    Ok(msg)
}

fn criterion_6() -> Outcome {
    let plain = BenchmarkId::plain(Family::Stf1);
    let rotated = BenchmarkId::rotated(Family::Stf1, DEFAULT_ROTATION_SEED);
    let result = run_batch(&batch(&[plain, rotated], &[AlgorithmKind::Almi], 1e-8, 6)).unwrap();
    let finals = |id: &BenchmarkId| -> Vec<f64> {
        let fid = id.to_string();
        result
            .runs
            .values()
            .filter(|r| r.key.function_id == fid)
            .map(|r| r.outcome.as_ref().unwrap().best_fitness)
            .collect()
    };
    let (a, b) = (finals(&plain), finals(&rotated));
    check(a.len() == 30 && b.len() == 30, "missing runs")?;
    let w = wilcoxon_signed_rank(&a, &b).unwrap();
    let msg = format!("Wilcoxon W = {}, p = {:.4}", w.statistic, w.p_value);
    check(w.p_value > 0.05, &msg)?;
    Ok(msg)
}

fn criterion_7() -> Outcome {
    let series = synth_sinusoid(200, 1.0, 25.0, 0.1, 2024).unwrap();
    let scheme = EvaluationScheme {
        window_length: 50,
        horizon: 1,
        metric: Metric::Rmse,
    };

    let cfg = OptimizerConfig {
        seed: 7,
        ..Default::default()
    };
    let ses = fit_parameters(SmoothingKind::Single, &series, &scheme, &cfg).unwrap();
    let ses_grid = grid_search_fit(SmoothingKind::Single, &series, &scheme, 0.001).unwrap();
    check(
        ses.loss <= ses_grid.loss + 1e-6,
        &format!("SES fit {} > grid {}", ses.loss, ses_grid.loss),
    )?;

    let holt_grid = grid_search_fit(SmoothingKind::Double, &series, &scheme, 0.05).unwrap();
    let cfg = OptimizerConfig {
        max_evaluations: Some(400),
        seed: 7,
        ..Default::default()
    };
    let holt = fit_parameters(SmoothingKind::Double, &series, &scheme, &cfg).unwrap();
    check(
        holt.loss <= holt_grid.loss + 1e-6,
        &format!("Holt fit {} > grid {}", holt.loss, holt_grid.loss),
    )?;
    check(
        holt.evaluations < holt_grid.evaluations,
        &format!(
            "Holt used {} evaluations, grid {}",
            holt.evaluations, holt_grid.evaluations
        ),
    )?;
    Ok(format!(
        "SES {:.6} vs grid {:.6} ({} vs {} evals); Holt {:.6} vs grid {:.6} ({} vs {} evals)",
        ses.loss,
        ses_grid.loss,
        ses.evaluations,
        ses_grid.evaluations,
        holt.loss,
        holt_grid.loss,
        holt.evaluations,
        holt_grid.evaluations
    ))
}

fn run_property<S: Strategy>(
    name: &str,
    strategy: S,
    test: impl Fn(S::Value) -> Result<(), TestCaseError>,
) -> Result<(), String> {
    let mut runner = TestRunner::new(ProptestConfig {
        cases: 100,
        failure_persistence: None,
        ..ProptestConfig::default()
    });
    runner
        .run(&strategy, test)
        .map_err(|e| format!("{name}: {e}"))
}

fn criterion_8() -> Outcome {
    run_property(
        "engine accounting, conservation and feasibility",
        (
            1usize..6,
            5usize..14,
            1usize..3,
            1usize..10,
            any::<u64>(),
            0.5f64..50.0,
        ),
        |(dim, swarm_size, f_n, generations, seed, half_width)| {
            prop_assume!(2 * f_n < swarm_size);
            let per_gen = 2 * f_n + swarm_size;
            let bounds = Bounds::uniform(dim, -half_width, half_width).unwrap();
            let seen = RefCell::new(Vec::new());
            let mut f = ObjectiveFunction::new(bounds.clone(), |x: &[f64]| {
                seen.borrow_mut().push(x.to_vec());
                x.iter().map(|v| v * v).sum::<f64>()
            });
            let cfg = OptimizerConfig {
                swarm_size,
                weight_functions: WeightFunction::defaults().into_iter().take(f_n).collect(),
                max_evaluations: Some(swarm_size + generations * per_gen),
                seed,
                ..Default::default()
            };
            let mut run = AlmiSwarm::new(&mut f, &cfg).unwrap();
            let mut g = 0;
            loop {
                let more = run.step().unwrap();
                g += 1;
                prop_assert_eq!(run.swarm().len(), swarm_size);
                prop_assert_eq!(seen.borrow().len(), swarm_size + g * per_gen);
                if !more {
                    break;
                }
            }
            let s = run.finish();
            prop_assert_eq!(g, generations);
            prop_assert_eq!(s.evaluations_used, seen.borrow().len());
            prop_assert!(seen.borrow().iter().all(|x| bounds.contains(x)));
            Ok(())
        },
    )?;

    run_property(
        "determinism",
        (any::<u64>(), 1usize..8),
        |(seed, family)| {
            let id = BenchmarkId::plain(Family::from_index(family).unwrap());
            let cfg = OptimizerConfig {
                max_evaluations: Some(300),
                seed,
                ..Default::default()
            };
            let run = || -> RunSummary {
                let mut b = Benchmark::new(id, 3, seed).unwrap();
                optimize(&mut b, &cfg).unwrap()
            };
            let (a, b) = (run(), run());
            prop_assert_eq!(a.fitness_trace.len(), b.fitness_trace.len());
            for (p, q) in a.fitness_trace.iter().zip(&b.fitness_trace) {
                prop_assert_eq!(p.evaluation_count, q.evaluation_count);
                prop_assert_eq!(p.best_so_far.to_bits(), q.best_so_far.to_bits());
            }
            prop_assert_eq!(a, b);
            Ok(())
        },
    )?;

    run_property(
        "benchmark optima at origin",
        (1usize..=8, any::<bool>(), 1usize..40, any::<u64>()),
        |(family, rotated, dim, seed)| {
            let family = Family::from_index(family).unwrap();
            let id = if rotated {
                BenchmarkId::rotated(family, seed)
            } else {
                BenchmarkId::plain(family)
            };
            let mut b = Benchmark::new(id, dim, seed).unwrap();
            let origin = vec![0.0; dim];
            let fitness = b.evaluate(&origin);
            let judged = b.judged_value(&origin, fitness);
            prop_assert!(
                (judged - family.optimum()).abs() <= 1e-12,
                "{} at origin: {}",
                id,
                judged
            );
            Ok(())
        },
    )?;

    run_property(
        "grid evaluation counts",
        (0.05f64..=1.0, 1usize..=2),
        |(a, d)| {
            let s = synth_sinusoid(24, 1.0, 6.0, 0.1, 3).unwrap();
            let kind = if d == 1 {
                SmoothingKind::Single
            } else {
                SmoothingKind::Double
            };
            let scheme = EvaluationScheme {
                window_length: 6,
                horizon: 1,
                metric: Metric::Rmse,
            };
            let g = grid_search_fit(kind, &s, &scheme, a).unwrap();
            let per_axis = (1.0 / a + 1e-9).floor() as usize + 1;
            prop_assert_eq!(g.evaluations, per_axis.pow(d as u32));
            Ok(())
        },
    )?;

    Ok("engine accounting, determinism, optima and grid counts hold over 100 cases each".into())
}

fn main() {
    let criteria: [Criterion; 8] = [
        ("correctness oracles", criterion_1),
        ("Wilcoxon exactness", criterion_2),
        ("Friedman near-reproduction", criterion_3),
        ("optimizer competence", criterion_4),
        ("comparative premise", criterion_5),
        ("rotation robustness", criterion_6),
        ("smoothing oracle dominance", criterion_7),
        ("invariant suite", criterion_8),
    ];
    let filter: Vec<String> = std::env::args()
        .skip(1)
        .filter(|a| !a.starts_with('-'))
        .collect();
    let mut failures = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let label = format!("criterion {}", i + 1);
        if !filter.is_empty()
            && !filter
                .iter()
                .any(|f| label.contains(f.as_str()) || name.contains(f.as_str()))
        {
            continue;
        }
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(run).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(msg) => println!("PASS {label} ({name}): {msg} [{secs:.1}s]"),
            Err(msg) => {
                failures += 1;
                println!("FAIL {label} ({name}): {msg} [{secs:.1}s]");
            }
        }
    }
    if failures > 0 {
        std::process::exit(1);
    }
}
