//! Quick invariant suite behind `slpmm selftest`.

use slpmm::problems::{
    np_oracle, ssd_oracle, synthetic_gaussians, synthetic_scenarios, NpClassificationData,
    QcqpInstance, SsdPortfolioData,
};
use slpmm::projections::{project_capped_simplex, project_simplex};
use slpmm::verify::{
    capped_simplex_by_enumeration, convexity_probe, finite_difference_gradient, gradient_probe,
    gradient_relative_error, proximal_augmented_lagrangian, simplex_by_enumeration,
};
use slpmm::{
    apg_solve, build_subproblem, closed_form_p1, estimate_expectations_with, phi_grad, phi_value,
    slpmm_run, ApgOptions, Evaluation, Execution, FeasibleSet, SeededStream, SolverConfig,
    StreamId, SubproblemData,
};

#[derive(Clone, Debug, PartialEq)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &'static str, worst: f64, tol: f64) -> CheckResult {
    CheckResult {
        name,
        passed: worst <= tol,
        detail: format!("worst {worst:.3e} (tol {tol:.0e})"),
    }
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

fn gaussian(rng: &mut SeededStream, n: usize, scale: f64) -> Vec<f64> {
    (0..n).map(|_| scale * rng.normal()).collect()
}

fn projections(seed: u64) -> Vec<CheckResult> {
    let mut rng = SeededStream::new(seed, StreamId::raw(0x51));
    let (mut simplex, mut capped) = (0.0f64, 0.0f64);
    for t in 0..200 {
        let n = 2 + t % 5;
        let y: Vec<f64> = (0..n).map(|_| rng.uniform(-2.0, 2.0)).collect();
        simplex = simplex.max(max_abs_diff(
            &project_simplex(&y),
            &simplex_by_enumeration(&y),
        ));
        let upper: Vec<f64> = (0..n).map(|_| rng.uniform(1.0 / n as f64, 1.0)).collect();
        let z = project_capped_simplex(&y, &upper).expect("caps sum to at least one");
        capped = capped.max(max_abs_diff(&z, &capped_simplex_by_enumeration(&y, &upper)));
    }
    vec![
        check("simplex projection vs enumeration", simplex, 1e-10),
        check("capped simplex projection vs enumeration", capped, 1e-10),
    ]
}

fn subproblem(seed: u64) -> Vec<CheckResult> {
    let mut rng = SeededStream::new(seed, StreamId::raw(0x52));
    let set = FeasibleSet::centered_ball(5, 10.0).expect("valid ball");
    let mut spread = 0.0f64;
    for _ in 0..30 {
        let p = 3;
        let ev = Evaluation {
            objective: rng.normal(),
            constraints: gaussian(&mut rng, p, 1.0),
            objective_grad: gaussian(&mut rng, 5, 1.0),
            constraint_grads: (0..p).map(|_| gaussian(&mut rng, 5, 1.0)).collect(),
        };
        let x_k = set.random_point(&mut rng);
        let lambda: Vec<f64> = (0..p).map(|_| rng.uniform(0.0, 2.0)).collect();
        let (alpha, sigma) = (rng.uniform(0.5, 10.0), rng.uniform(0.1, 2.0));
        let rows: Vec<usize> = (0..p).collect();
        let d = build_subproblem(&x_k, &lambda, &ev, sigma, alpha, &rows, &set)
            .expect("valid subproblem");
        let shifts: Vec<f64> = (0..20)
            .map(|_| {
                let z = gaussian(&mut rng, 5, 2.0);
                alpha * phi_value(&d, &z)
                    - proximal_augmented_lagrangian(&z, &lambda, &ev, &x_k, sigma, alpha, &rows)
            })
            .collect();
        let lo = shifts.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = shifts.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        spread = spread.max((hi - lo) / (1.0 + shifts[0].abs()));
    }

    let mut grad = 0.0f64;
    let mut cf = 0.0f64;
    let mut solved = 0;
    while solved < 50 {
        let n = 5;
        let a = vec![gaussian(&mut rng, n, 1.0 / (n as f64).sqrt())];
        let d = SubproblemData::from_coefficients(
            a,
            gaussian(&mut rng, 1, 1.0),
            gaussian(&mut rng, n, 1.0),
            &set,
        );
        let x = gaussian(&mut rng, n, 1.0);
        let fd = finite_difference_gradient(|z| phi_value(&d, z), &x, 1e-6);
        grad = grad.max(gradient_relative_error(&phi_grad(&d, &x), &fd));
        if let Ok(Some(exact)) = closed_form_p1(&d) {
            let opts = ApgOptions {
                strict: true,
                ..ApgOptions::default()
            };
            match apg_solve(&d, &set.center_point(), &opts) {
                Ok(out) => cf = cf.max(max_abs_diff(&out.point, &exact)),
                Err(_) => cf = f64::INFINITY,
            }
            solved += 1;
        }
    }
    vec![
        check(
            "scaled subproblem equals proximal augmented Lagrangian",
            spread,
            1e-9,
        ),
        check("subproblem gradient vs finite differences", grad, 1e-5),
        check("APG vs closed form (single constraint)", cf, 1e-5),
    ]
}

fn families(seed: u64) -> Vec<CheckResult> {
    let qcqp = QcqpInstance::generate(8, 3, 2.0, seed).expect("valid instance");
    let (pos, neg) = synthetic_gaussians(5, 200, 200, 1.0, seed);
    let np = np_oracle(
        NpClassificationData::new(pos, neg).expect("nonempty classes"),
        10.0,
    )
    .expect("valid data");
    let (returns, benchmark) = synthetic_scenarios(6, 100, seed);
    let ssd = ssd_oracle(
        SsdPortfolioData::new(returns, benchmark)
            .and_then(|d| d.with_quantile_support(10))
            .expect("valid scenarios"),
    )
    .expect("valid data");

    let convex = |name, r: slpmm::verify::ConvexityReport| CheckResult {
        name,
        passed: r.passed(),
        detail: format!("{} trials, worst excess {:.3e}", r.trials, r.worst_excess),
    };
    vec![
        check(
            "QCQP gradients vs finite differences",
            gradient_probe(&qcqp, 50, seed, 1e-6),
            1e-5,
        ),
        check(
            "NP gradients vs finite differences",
            gradient_probe(&np, 50, seed, 1e-6),
            1e-5,
        ),
        check(
            "SSD gradients vs finite differences",
            gradient_probe(&ssd, 50, seed, 1e-6),
            1e-5,
        ),
        convex("QCQP convexity", convexity_probe(&qcqp, 300, seed, 1e-9)),
        convex("NP convexity", convexity_probe(&np, 300, seed, 1e-9)),
        convex("SSD convexity", convexity_probe(&ssd, 300, seed, 1e-9)),
    ]
}

fn determinism(seed: u64) -> Vec<CheckResult> {
    let problem = QcqpInstance::generate(6, 2, 2.0, seed).expect("valid instance");
    let config = SolverConfig {
        record_wall_time: false,
        ..SolverConfig::new(100).with_seed(seed)
    };
    let same = match (slpmm_run(&problem, &config), slpmm_run(&problem, &config)) {
        (Ok(a), Ok(b)) => a == b,
        _ => false,
    };
    let x = problem.spread_start();
    let modes = estimate_expectations_with(&problem, &x, 5000, seed, Execution::Sequential).ok()
        == estimate_expectations_with(&problem, &x, 5000, seed, Execution::Parallel).ok();
    vec![
        CheckResult {
            name: "rerun determinism",
            passed: same,
            detail: String::new(),
        },
        CheckResult {
            name: "sequential and parallel estimates agree",
            passed: modes,
            detail: String::new(),
        },
    ]
}

pub fn run_selftest(seed: u64) -> Vec<CheckResult> {
    let mut all = projections(seed);
    all.extend(subproblem(seed));
    all.extend(families(seed));
    all.extend(determinism(seed));
    all
}
