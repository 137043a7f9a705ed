use slpmm::problems::QcqpInstance;
use slpmm::solver::{BoundMonitor, IterateState, StepRecord};
use slpmm::verify::double_double_sum;
use slpmm::{
    averaged_iterate, run_replications, sample_constraint_subset, slpmm_run, update_multipliers,
    DiagnosticEstimates, Execution, RunTrace, SeededStream, Slpmm, SolverConfig, StochasticProblem,
    StreamId, SubproblemMethod,
};

fn qcqp(n: usize, p: usize) -> QcqpInstance {
    QcqpInstance::generate(n, p, 2.0, 7).unwrap()
}

fn deterministic(config: SolverConfig) -> SolverConfig {
    SolverConfig {
        record_wall_time: false,
        ..config
    }
}

#[test]
fn huge_proximal_weight_freezes_the_iterate() {
    let problem = qcqp(5, 2);
    let config = SolverConfig::explicit(1, 1e8, 0.5).with_seed(3);
    let mut solver = Slpmm::new(&problem, config).unwrap();
    let state = IterateState {
        k: 0,
        x: problem.initial_point(),
        lambda: vec![0.7, 0.0],
    };
    let (next, _) = solver.step(&state).unwrap();

    let mut stream = SeededStream::new(3, StreamId::scenario(0));
    let ev = problem.evaluate(&state.x, &problem.sample(&mut stream));
    let v0 = ev.objective_grad.iter().map(|v| v * v).sum::<f64>().sqrt();
    let dx = next
        .x
        .iter()
        .zip(&state.x)
        .map(|(a, b)| (a - b).powi(2))
        .sum::<f64>()
        .sqrt();
    assert!(dx <= 1e-6 * (1.0 + v0));
    for i in 0..2 {
        let expected = (state.lambda[i] + 0.5 * ev.constraints[i]).max(0.0);
        assert!((next.lambda[i] - expected).abs() <= 1e-6);
    }
}

#[test]
fn closed_form_and_apg_paths_agree_on_single_constraint() {
    let problem = qcqp(6, 1);
    let base = deterministic(SolverConfig::new(100).with_seed(5));
    let mut cf = Slpmm::new(
        &problem,
        SolverConfig {
            subproblem: SubproblemMethod::ClosedFormP1WithFallback,
            ..base.clone()
        },
    )
    .unwrap();
    let mut apg_cfg = SolverConfig {
        subproblem: SubproblemMethod::Apg,
        ..base
    };
    apg_cfg.apg.tol = 1e-9;
    let mut apg = Slpmm::new(&problem, apg_cfg).unwrap();
    let mut state = cf.initial_state().unwrap();
    let mut closed_form_steps = 0;
    for _ in 0..30 {
        let (a, rec) = cf.step(&state).unwrap();
        let (b, _) = apg.step(&state).unwrap();
        closed_form_steps += usize::from(rec.closed_form);
        let err =
            a.x.iter()
                .zip(&b.x)
                .map(|(u, v)| (u - v).abs())
                .fold(0.0, f64::max);
        assert!(err <= 1e-5, "paths differ by {err}");
        state = a;
    }
    assert!(closed_form_steps > 0);
}

#[test]
fn zero_iterations_return_start() {
    let problem = qcqp(4, 2);
    let trace = slpmm_run(&problem, &SolverConfig::new(0)).unwrap();
    assert!(trace.is_empty());
    assert!(trace.averaged.is_none());
    assert!(averaged_iterate(&trace).is_err());
    assert_eq!(trace.final_state.x, problem.initial_point());
}

#[test]
fn reruns_are_identical() {
    let problem = qcqp(8, 3);
    let config = deterministic(SolverConfig::new(200).with_seed(9));
    let a = slpmm_run(&problem, &config).unwrap();
    let b = slpmm_run(&problem, &config).unwrap();
    assert_eq!(a, b);
    assert_eq!(format!("{a:?}"), format!("{b:?}"));
}

#[test]
fn seeds_change_the_run() {
    let problem = qcqp(8, 3);
    let a = slpmm_run(&problem, &SolverConfig::new(20).with_seed(1)).unwrap();
    let b = slpmm_run(&problem, &SolverConfig::new(20).with_seed(2)).unwrap();
    assert_ne!(a.steps[0].x_next, b.steps[0].x_next);
}

#[test]
fn replications_match_across_execution_modes() {
    let problem = qcqp(6, 2);
    let config = deterministic(SolverConfig::new(50));
    let seeds = [1, 2, 3, 4, 5];
    let seq = run_replications(&problem, &config, &seeds, Execution::Sequential);
    let par = run_replications(&problem, &config, &seeds, Execution::Parallel);
    for ((s, p), seed) in seq.iter().zip(&par).zip(seeds) {
        let (s, p) = (s.as_ref().unwrap(), p.as_ref().unwrap());
        assert_eq!(s, p);
        assert_eq!(
            s,
            &slpmm_run(&problem, &config.clone().with_seed(seed)).unwrap()
        );
    }
}

fn hand_trace(points: Vec<Vec<f64>>) -> RunTrace {
    let initial_point = points[0].clone();
    let steps = points[1..]
        .iter()
        .chain(std::iter::once(&points[0]))
        .enumerate()
        .map(|(k, x)| StepRecord {
            k,
            objective_sample: 0.0,
            constraint_samples: vec![],
            subset: vec![],
            x_next: x.clone(),
            lambda_next: vec![],
            lambda_norm: 0.0,
            step_norm: 0.0,
            multiplier_step_norm: 0.0,
            subproblem_iterations: 0,
            subproblem_residual: 0.0,
            closed_form: false,
            wall_time_s: 0.0,
            step_check: None,
            drift_check: None,
        })
        .collect();
    RunTrace {
        alpha: 1.0,
        sigma: 1.0,
        initial_point: initial_point.clone(),
        steps,
        averaged: None,
        final_state: IterateState {
            k: 0,
            x: initial_point,
            lambda: vec![],
        },
        estimates: DiagnosticEstimates::default(),
        step_bound: BoundMonitor::default(),
        drift_bound: BoundMonitor::default(),
    }
}

#[test]
fn averaged_iterate_hand_cases() {
    let same = hand_trace(vec![vec![0.3, -1.0]; 4]);
    assert_eq!(averaged_iterate(&same).unwrap(), vec![0.3, -1.0]);
    let two = hand_trace(vec![vec![0.0, 0.0], vec![1.0, 1.0]]);
    assert_eq!(averaged_iterate(&two).unwrap(), vec![0.5, 0.5]);
}

#[test]
fn averaged_iterate_matches_double_double_mean() {
    let mut rng = SeededStream::new(21, StreamId::raw(1));
    let points: Vec<Vec<f64>> = (0..5000)
        .map(|_| (0..3).map(|_| 1e6 * rng.normal() + rng.normal()).collect())
        .collect();
    let trace = hand_trace(points.clone());
    let avg = averaged_iterate(&trace).unwrap();
    for j in 0..3 {
        let exact = double_double_sum(points.iter().map(|x| x[j])) / points.len() as f64;
        assert!((avg[j] - exact).abs() <= 1e-13 * (1.0 + exact.abs()));
    }
}

#[test]
fn multiplier_update_matches_scalar_loop() {
    assert_eq!(
        update_multipliers(
            &[0.0, 0.0],
            0.1,
            &[-1.0, -2.0],
            &[vec![0.0], vec![0.0]],
            &[0.0]
        )
        .unwrap(),
        vec![0.0, 0.0]
    );
    assert_eq!(
        update_multipliers(
            &[1.0, 0.0],
            1.0,
            &[0.5, -3.0],
            &[vec![0.0], vec![0.0]],
            &[0.0]
        )
        .unwrap(),
        vec![1.5, 0.0]
    );

    let mut rng = SeededStream::new(22, StreamId::raw(1));
    for _ in 0..200 {
        let (p, n) = (4, 3);
        let lambda: Vec<f64> = (0..p).map(|_| rng.uniform(0.0, 2.0)).collect();
        let g: Vec<f64> = (0..p).map(|_| rng.normal()).collect();
        let v: Vec<Vec<f64>> = (0..p)
            .map(|_| (0..n).map(|_| rng.normal()).collect())
            .collect();
        let dx: Vec<f64> = (0..n).map(|_| rng.normal()).collect();
        let sigma = rng.uniform(0.01, 3.0);
        let got = update_multipliers(&lambda, sigma, &g, &v, &dx).unwrap();
        for i in 0..p {
            let mut inner = g[i];
            for (vij, dxj) in v[i].iter().zip(&dx) {
                inner += vij * dxj;
            }
            let t = lambda[i] + sigma * inner;
            assert!((got[i] - if t > 0.0 { t } else { 0.0 }).abs() <= 1e-14);
        }
    }
}

#[test]
fn constraint_subset_frequencies_are_uniform() {
    let draws = 100_000;
    let mut counts = [0usize; 10];
    for k in 0..draws {
        let mut s = SeededStream::new(23, StreamId::subset(k as u64));
        let idx = sample_constraint_subset(10, 3, &mut s).unwrap();
        assert_eq!(idx.len(), 3);
        assert!(idx.windows(2).all(|w| w[0] < w[1]));
        for i in idx {
            counts[i] += 1;
        }
    }
    let sd = (0.3f64 * 0.7 / draws as f64).sqrt();
    for c in counts {
        assert!(
            (c as f64 / draws as f64 - 0.3).abs() <= 3.0 * sd,
            "{counts:?}"
        );
    }
}

#[test]
fn subsampled_run_freezes_unselected_multipliers() {
    let problem = qcqp(5, 6);
    let config = deterministic(SolverConfig {
        constraint_subset: Some(2),
        ..SolverConfig::new(40).with_seed(4)
    });
    let trace = slpmm_run(&problem, &config).unwrap();
    let mut lambda = vec![0.0; 6];
    for s in &trace.steps {
        assert_eq!(s.subset.len(), 2);
        for (i, (next, prev)) in s.lambda_next.iter().zip(&lambda).enumerate() {
            if !s.subset.contains(&i) {
                assert_eq!(next, prev);
            }
        }
        assert!(s.drift_check.is_none());
        lambda = s.lambda_next.clone();
    }
}

#[test]
fn iterates_stay_feasible_and_multipliers_nonnegative() {
    let problem = qcqp(10, 3);
    let trace = slpmm_run(&problem, &SolverConfig::new(300).with_seed(8)).unwrap();
    let set = problem.feasible_set();
    for s in &trace.steps {
        assert!(set.contains(&s.x_next, 1e-10));
        assert!(s.lambda_next.iter().all(|&l| l >= 0.0));
    }
}

#[test]
fn bound_monitors_report_no_late_violations() {
    let problem = qcqp(10, 3);
    let trace = slpmm_run(
        &problem,
        &deterministic(SolverConfig::new(400).with_seed(2)),
    )
    .unwrap();
    assert_eq!(trace.drift_bound.checked, 400);
    assert_eq!(trace.drift_bound.violations_after_warmup, 0);
    assert_eq!(trace.drift_bound.violations_final_estimates, 0);
    assert!(trace.step_bound.checked > 0);
    assert_eq!(trace.step_bound.violations_after_warmup, 0);
    assert_eq!(trace.step_bound.violations_final_estimates, 0);
}

#[test]
fn invalid_configs_are_rejected() {
    let problem = qcqp(3, 2);
    assert!(slpmm_run(&problem, &SolverConfig::explicit(5, -1.0, 1.0)).is_err());
    assert!(slpmm_run(
        &problem,
        &SolverConfig {
            constraint_subset: Some(3),
            ..SolverConfig::new(5)
        }
    )
    .is_err());
    let outside = SolverConfig {
        initial_point: Some(vec![5.0, 0.0, 0.0]),
        ..SolverConfig::new(5)
    };
    assert!(slpmm_run(&problem, &outside).is_err());
}
