use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;

use dlo::domain::BoxDomain;
use dlo::objectives::{by_id, Objective};
use dlo::optimizer::{random_search, run, OptimizationResult, OptimizerConfig, RunState};
use dlo::schedule::Mode;
use dlo::stats::median;

fn quadratic() -> Objective {
    Objective::new("quad1", BoxDomain::cube(1, 0.0, 1.0).unwrap(), |x| -(x[0] - 0.3).powi(2))
}

fn counted(calls: Arc<AtomicUsize>) -> Objective {
    Objective::new("sphere3", BoxDomain::cube(3, -2.0, 2.0).unwrap(), move |x| {
        calls.fetch_add(1, Ordering::SeqCst);
        -x.iter().map(|v| v * v).sum::<f64>()
    })
}

fn same_trace(a: &OptimizationResult, b: &OptimizationResult) -> bool {
    a.trace.len() == b.trace.len()
        && a.trace.iter().zip(&b.trace).all(|(x, y)| {
            x.f_value.to_bits() == y.f_value.to_bits()
                && x.theta.iter().zip(&y.theta).all(|(p, q)| p.to_bits() == q.to_bits())
                && x.beta.map(f64::to_bits) == y.beta.map(f64::to_bits)
                && x.radius.map(f64::to_bits) == y.radius.map(f64::to_bits)
                && x.mode == y.mode
        })
}

#[test]
fn one_dimensional_quadratic_converges() {
    let mut cfg = OptimizerConfig::for_dim(1);
    cfg.budget = 30;
    cfg.seed = 0;
    let r = run(&quadratic(), cfg).unwrap();
    assert!(r.is_complete());
    assert_eq!(r.trace.len(), 30);
    assert!(r.best_value > -1e-2, "best {}", r.best_value);
    assert!((r.best_point[0] - 0.3).abs() < 0.1);
}

#[test]
fn exactly_budget_calls_with_uneven_batches() {
    let calls = Arc::new(AtomicUsize::new(0));
    let obj = counted(calls.clone());
    let mut cfg = OptimizerConfig::for_dim(3);
    cfg.budget = 27;
    cfg.batch = 4;
    let r = run(&obj, cfg).unwrap();
    assert_eq!(calls.load(Ordering::SeqCst), 27);
    assert_eq!(r.trace.len(), 27);
    assert_eq!(r.log.len(), 27);
    let idx: Vec<usize> = r.trace.iter().map(|t| t.call_index).collect();
    assert_eq!(idx, (0..27).collect::<Vec<_>>());
}

#[test]
fn best_value_is_the_trace_maximum_and_monotone() {
    let obj = by_id("ackley-d", Some(3)).unwrap();
    let r = run(&obj, OptimizerConfig::for_dim(3)).unwrap();
    let max = r.trace.iter().map(|t| t.f_value).fold(f64::NEG_INFINITY, f64::max);
    assert_eq!(r.best_value, max);
    assert!(r.trace.windows(2).all(|w| w[1].best_so_far >= w[0].best_so_far));
    let best = r.trace.iter().find(|t| t.f_value == max).unwrap();
    assert_eq!(best.theta, r.best_point);
}

#[test]
fn init_only_run_is_latin_hypercube() {
    let obj = by_id("rastrigin-d", Some(4)).unwrap();
    let mut cfg = OptimizerConfig::for_dim(4);
    cfg.budget = cfg.n_init;
    let r = run(&obj, cfg).unwrap();
    assert_eq!(r.trace.len(), 8);
    assert!(r.trace.iter().all(|t| t.mode == Mode::Init));
    // one point per stratum on every axis
    for j in 0..4 {
        let mut strata: Vec<usize> = r.log.points().iter().map(|p| (p[j] * 8.0) as usize).collect();
        strata.sort_unstable();
        assert_eq!(strata, (0..8).collect::<Vec<_>>());
    }
}

#[test]
fn identical_seeds_identical_traces() {
    let obj = by_id("ackley-d", Some(4)).unwrap();
    let mut cfg = OptimizerConfig::for_dim(4);
    cfg.budget = 30;
    cfg.seed = 11;
    let a = run(&obj, cfg.clone()).unwrap();
    let b = run(&obj, cfg.clone()).unwrap();
    assert!(same_trace(&a, &b));
    cfg.seed = 12;
    let c = run(&obj, cfg).unwrap();
    assert!(!same_trace(&a, &c));
}

#[test]
fn ablations_compose() {
    let calls = Arc::new(AtomicUsize::new(0));
    let obj = counted(calls.clone());
    let mut cfg = OptimizerConfig::for_dim(3);
    cfg.anneal = false;
    cfg.proposals.local_box = false;
    let r = run(&obj, cfg).unwrap();
    assert!(r.is_complete());
    assert_eq!(calls.load(Ordering::SeqCst), 36);
    // annealing off means unit inverse temperature throughout
    assert!(r.trace.iter().all(|t| t.beta == Some(1.0)));
}

#[test]
fn greedy_and_annealed_iterations_alternate() {
    let obj = by_id("ackley-d", Some(2)).unwrap();
    let r = run(&obj, OptimizerConfig::for_dim(2)).unwrap();
    let modes: Vec<Mode> = r.trace[4..].iter().map(|t| t.mode).collect();
    for (i, m) in modes.iter().enumerate() {
        let expect = if i % 2 == 0 { Mode::Annealed } else { Mode::Greedy };
        assert_eq!(*m, expect, "iteration {i}");
    }
    // β climbs the ladder monotonically
    let betas: Vec<f64> = r.trace.iter().filter_map(|t| t.beta).collect();
    assert!(betas.windows(2).all(|w| w[1] >= w[0]));
}

#[test]
fn step_advances_by_batch() {
    let obj = quadratic();
    let mut cfg = OptimizerConfig::for_dim(1);
    cfg.budget = 12;
    cfg.batch = 2;
    let mut state = RunState::initialize(&obj, cfg).ok().unwrap();
    let mut len = state.log().len();
    while !state.is_done() {
        state.step().unwrap();
        assert_eq!(state.log().len(), len + 2);
        len += 2;
    }
    assert_eq!(state.iteration(), 5);
}

#[test]
fn random_search_baseline() {
    let obj = by_id("corrgauss10", None).unwrap();
    let optimum = obj.known_optimum().unwrap().1;
    let finals: Vec<f64> = (0..15).map(|s| random_search(&obj, 120, 20, s).best_value).collect();
    let med = median(&finals).unwrap();
    assert!(med.is_finite() && med < optimum, "median {med}, optimum {optimum}");
    let a = random_search(&obj, 50, 20, 3);
    let b = random_search(&obj, 50, 20, 3);
    assert!(same_trace(&a, &b));
    assert!(a.trace.windows(2).all(|w| w[1].best_so_far >= w[0].best_so_far));
}
