use slpmm::problems::np::logistic_loss;
use slpmm::problems::{
    np_oracle, ssd_oracle, synthetic_gaussians, synthetic_scenarios, NpClassificationData,
    QcqpInstance, SsdPortfolioData,
};
use slpmm::verify::{convexity_probe, gradient_probe};
use slpmm::{
    estimate_expectations, estimate_expectations_with, full_pass_expectations, Execution,
    StochasticProblem,
};

const VALIDATION: usize = 100_000;

fn np_problem(n: usize, per_class: usize) -> slpmm::problems::NpProblem {
    let (pos, neg) = synthetic_gaussians(n, per_class, per_class, 1.0, 3);
    np_oracle(NpClassificationData::new(pos, neg).unwrap(), 10.0).unwrap()
}

fn ssd_problem() -> slpmm::problems::SsdProblem {
    let (returns, benchmark) = synthetic_scenarios(6, 120, 4);
    ssd_oracle(
        SsdPortfolioData::new(returns, benchmark)
            .unwrap()
            .with_quantile_support(15)
            .unwrap(),
    )
    .unwrap()
}

#[test]
fn qcqp_constraints_at_anchor_equal_minus_index() {
    let problem = QcqpInstance::generate(10, 3, 2.0, 1).unwrap();
    let est = estimate_expectations(&problem, problem.anchor(), VALIDATION, 5).unwrap();
    for i in 0..3 {
        let target = -((i + 1) as f64);
        assert!(
            (est.constraints[i] - target).abs() <= 3.0 * est.constraint_stderr[i],
            "{est:?}"
        );
    }
}

#[test]
fn qcqp_objective_at_origin_is_optimal_value() {
    let problem = QcqpInstance::generate(10, 3, 2.0, 2).unwrap();
    let est = estimate_expectations(&problem, &[0.0; 10], VALIDATION, 6).unwrap();
    assert!((est.objective - problem.optimal_value()).abs() <= 3.0 * est.objective_stderr);
    assert!(problem.optimal_value() > 0.0);
}

#[test]
fn qcqp_with_zero_anchor_has_zero_optimum() {
    let problem = QcqpInstance::with_anchor(2, 2.0, vec![0.0; 5]).unwrap();
    let est = estimate_expectations(&problem, &[0.0; 5], VALIDATION, 7).unwrap();
    assert!(est.objective.abs() <= 3.0 * est.objective_stderr + 1e-12);
}

#[test]
fn stderr_shrinks_like_inverse_root_of_samples() {
    let problem = QcqpInstance::generate(8, 2, 2.0, 3).unwrap();
    let x = problem.spread_start();
    let small = estimate_expectations(&problem, &x, 1_000, 8).unwrap();
    let large = estimate_expectations(&problem, &x, VALIDATION, 8).unwrap();
    let ratio = small.objective_stderr / large.objective_stderr;
    assert!((8.0..=12.5).contains(&ratio), "ratio {ratio}");
}

#[test]
fn estimates_agree_across_execution_modes() {
    let problem = ssd_problem();
    let x = problem.feasible_set().center_point();
    let a = estimate_expectations_with(&problem, &x, 10_000, 2, Execution::Sequential).unwrap();
    let b = estimate_expectations_with(&problem, &x, 10_000, 2, Execution::Parallel).unwrap();
    assert_eq!(a, b);
}

#[test]
fn np_full_pass_matches_direct_sum() {
    let problem = np_problem(5, 300);
    let x = [0.3, -0.2, 0.1, 0.0, 0.5];
    let est = full_pass_expectations(&problem, &x).unwrap().unwrap();
    let dot = |a: &[f64]| a.iter().zip(&x).map(|(u, v)| u * v).sum::<f64>();
    let data = problem.data();
    let f: f64 = data
        .positive
        .iter()
        .map(|a| logistic_loss(dot(a)))
        .sum::<f64>()
        / 300.0;
    let g: f64 = data
        .negative
        .iter()
        .map(|a| logistic_loss(-dot(a)))
        .sum::<f64>()
        / 300.0
        - data.tau;
    assert!((est.objective - f).abs() <= 1e-12);
    assert!((est.constraints[0] - g).abs() <= 1e-12);
}

#[test]
fn np_full_batch_scenario_matches_direct_sum() {
    let mut data = NpClassificationData::new(
        synthetic_gaussians(4, 50, 50, 1.0, 9).0,
        synthetic_gaussians(4, 50, 50, 1.0, 9).1,
    )
    .unwrap();
    data.set_batch_fraction(1.0).unwrap();
    let problem = np_oracle(data, 10.0).unwrap();
    let x = [0.1, 0.2, -0.3, 0.4];
    let mut s = slpmm::SeededStream::new(1, slpmm::StreamId::scenario(0));
    let full = problem.objective(&x, &problem.sample(&mut s));
    let exact = full_pass_expectations(&problem, &x)
        .unwrap()
        .unwrap()
        .objective;
    assert!((full - exact).abs() <= 1e-12);
}

#[test]
fn np_gradients_match_finite_differences() {
    assert!(gradient_probe(&np_problem(6, 200), 100, 1, 1e-6) <= 1e-6);
}

#[test]
fn qcqp_gradients_match_finite_differences() {
    assert!(gradient_probe(&QcqpInstance::generate(8, 3, 2.0, 1).unwrap(), 100, 2, 1e-6) <= 1e-5);
}

#[test]
fn ssd_gradients_match_finite_differences() {
    assert!(gradient_probe(&ssd_problem(), 100, 3, 1e-6) <= 1e-5);
}

#[test]
fn every_family_passes_convexity_probes() {
    let tol = 1e-9;
    let q = convexity_probe(
        &QcqpInstance::generate(10, 3, 2.0, 1).unwrap(),
        1000,
        4,
        tol,
    );
    assert!(q.passed(), "{q:?}");
    let n = convexity_probe(&np_problem(5, 200), 1000, 5, tol);
    assert!(n.passed(), "{n:?}");
    let s = convexity_probe(&ssd_problem(), 1000, 6, tol);
    assert!(s.passed(), "{s:?}");
}

#[test]
fn ssd_replicating_benchmark_is_tight() {
    // asset 0 is the benchmark itself
    let (mut returns, benchmark) = synthetic_scenarios(4, 80, 5);
    for (row, y) in returns.iter_mut().zip(&benchmark) {
        row[0] = *y;
    }
    let problem = ssd_oracle(SsdPortfolioData::new(returns, benchmark).unwrap()).unwrap();
    let est = full_pass_expectations(&problem, &[1.0, 0.0, 0.0, 0.0])
        .unwrap()
        .unwrap();
    assert!(est.constraints.iter().all(|g| g.abs() <= 1e-12));
    assert!((est.objective + problem.data().benchmark_mean()).abs() <= 1e-12);
}

#[test]
fn ssd_pure_asset_below_support_gives_negative_reference() {
    let (returns, benchmark) = synthetic_scenarios(3, 50, 6);
    let floor = returns.iter().map(|r| r[1]).fold(f64::INFINITY, f64::min);
    let support: Vec<f64> = vec![floor - 0.5, floor - 0.1];
    let problem = ssd_oracle(
        SsdPortfolioData::new(returns, benchmark)
            .unwrap()
            .with_support(support)
            .unwrap(),
    )
    .unwrap();
    let reference = problem.data().reference.clone();
    for j in 0..50 {
        let g = problem.constraints(&[0.0, 1.0, 0.0], &vec![j]);
        for (gi, ri) in g.iter().zip(&reference) {
            assert_eq!(*gi, -ri);
        }
    }
}

#[test]
fn full_batch_reference_satisfies_kkt_on_small_np() {
    use slpmm::verify::full_batch_reference;
    let (pos, neg) = synthetic_gaussians(3, 100, 100, 1.0, 8);
    let mut data = NpClassificationData::new(pos, neg).unwrap();
    data.tau = 0.5;
    let problem = np_oracle(data, 10.0).unwrap();
    let r = full_batch_reference(&problem, 10.0, 100, 1e-9).unwrap();
    assert!(r.constraints[0] <= 1e-8);
    assert!((r.multipliers[0] * r.constraints[0]).abs() <= 1e-7);
    assert!(r.stationarity <= 1e-9);
    // no feasible point sampled nearby does better
    let mut rng = slpmm::SeededStream::new(1, slpmm::StreamId::raw(9));
    for _ in 0..300 {
        let z: Vec<f64> = r.point.iter().map(|v| v + 0.05 * rng.normal()).collect();
        let est = full_pass_expectations(&problem, &problem.feasible_set().project(&z))
            .unwrap()
            .unwrap();
        if est.constraints[0] <= 0.0 {
            assert!(est.objective >= r.objective - 1e-9);
        }
    }
}
