use proptest::prelude::*;
use slpmm::projections::{project_ball, project_box, project_capped_simplex, project_simplex};
use slpmm::verify::{capped_simplex_by_enumeration, simplex_by_enumeration};
use slpmm::{FeasibleSet, SeededStream, StreamId};

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

fn assert_close(a: &[f64], b: &[f64], tol: f64) {
    for (x, y) in a.iter().zip(b) {
        assert!((x - y).abs() <= tol, "{a:?} vs {b:?}");
    }
}

#[test]
fn ball_hand_cases() {
    assert_eq!(project_ball(&[0.1, 0.0], &[0.0, 0.0], 2.0), vec![0.1, 0.0]);
    assert_close(
        &project_ball(&[4.0, 0.0], &[0.0, 0.0], 2.0),
        &[2.0, 0.0],
        1e-15,
    );
}

#[test]
fn ball_beats_sampled_boundary_points() {
    let mut rng = SeededStream::new(3, StreamId::raw(1));
    for _ in 0..20 {
        let y: Vec<f64> = (0..5).map(|_| 4.0 * rng.normal()).collect();
        let z = project_ball(&y, &[0.0; 5], 1.0);
        let dz = dist(&z, &y);
        for _ in 0..20_000 {
            let mut s: Vec<f64> = (0..5).map(|_| rng.normal()).collect();
            let r = s.iter().map(|v| v * v).sum::<f64>().sqrt();
            let shrink = rng.unit().powf(0.2);
            s.iter_mut().for_each(|v| *v *= shrink / r);
            assert!(dz <= dist(&s, &y) + 1e-12);
        }
    }
}

#[test]
fn box_hand_cases_and_grid() {
    assert_eq!(
        project_box(&[0.3, 0.7], &[0.0; 2], &[1.0; 2]).unwrap(),
        vec![0.3, 0.7]
    );
    assert_eq!(
        project_box(&[-1.0, 5.0], &[0.0; 2], &[1.0; 2]).unwrap(),
        vec![0.0, 1.0]
    );

    let mut rng = SeededStream::new(4, StreamId::raw(1));
    let spacing = 1e-3;
    for _ in 0..50 {
        let y: Vec<f64> = (0..6).map(|_| rng.uniform(-2.0, 2.0)).collect();
        let lower = [-1.0, -0.5, 0.0, 0.2, -2.0, 0.5];
        let upper = [1.0, 0.5, 0.1, 0.9, -1.0, 0.6];
        let z = project_box(&y, &lower, &upper).unwrap();
        // the objective is separable, so a per-coordinate grid search is exact up to spacing
        for j in 0..6 {
            let steps = ((upper[j] - lower[j]) / spacing).round() as usize;
            let best = (0..=steps)
                .map(|s| lower[j] + s as f64 * spacing)
                .min_by(|a, b| (a - y[j]).abs().total_cmp(&(b - y[j]).abs()))
                .unwrap();
            assert!((z[j] - best).abs() <= spacing);
        }
    }
}

#[test]
fn simplex_hand_cases() {
    assert_eq!(project_simplex(&[0.5, 0.5]), vec![0.5, 0.5]);
    assert_close(&project_simplex(&[2.0, 0.0]), &[1.0, 0.0], 1e-15);
}

#[test]
fn capped_simplex_hand_cases() {
    assert_close(
        &project_capped_simplex(&[2.0, 0.0], &[0.6, 0.6]).unwrap(),
        &[0.6, 0.4],
        1e-15,
    );
    let y = [0.2, 0.3, 0.5];
    assert_close(&project_capped_simplex(&y, &[1.0; 3]).unwrap(), &y, 1e-15);
}

#[test]
fn simplex_matches_enumeration() {
    let mut rng = SeededStream::new(5, StreamId::raw(1));
    for t in 0..500 {
        let n = 1 + t % 6;
        let y: Vec<f64> = (0..n).map(|_| rng.uniform(-2.0, 2.0)).collect();
        assert_close(&project_simplex(&y), &simplex_by_enumeration(&y), 1e-10);
    }
}

#[test]
fn capped_simplex_matches_enumeration() {
    let mut rng = SeededStream::new(6, StreamId::raw(1));
    let mut done = 0;
    while done < 500 {
        let n = 2 + done % 5;
        let upper: Vec<f64> = (0..n).map(|_| rng.uniform(0.05, 1.0)).collect();
        if upper.iter().sum::<f64>() < 1.0 {
            continue;
        }
        let y: Vec<f64> = (0..n).map(|_| rng.uniform(-2.0, 2.0)).collect();
        let z = project_capped_simplex(&y, &upper).unwrap();
        assert_close(&z, &capped_simplex_by_enumeration(&y, &upper), 1e-10);
        done += 1;
    }
}

#[test]
fn huge_caps_reduce_to_simplex() {
    let mut rng = SeededStream::new(7, StreamId::raw(1));
    for _ in 0..200 {
        let y: Vec<f64> = (0..8).map(|_| rng.uniform(-3.0, 3.0)).collect();
        let z = project_capped_simplex(&y, &[1e6; 8]).unwrap();
        assert_close(&z, &project_simplex(&y), 1e-9);
    }
}

fn sets() -> Vec<FeasibleSet> {
    vec![
        FeasibleSet::centered_ball(4, 1.5).unwrap(),
        FeasibleSet::bounded_box(vec![-1.0, 0.0, -0.5, 2.0], vec![1.0, 0.5, 0.5, 3.0]).unwrap(),
        FeasibleSet::simplex(4).unwrap(),
        FeasibleSet::capped_simplex(vec![0.4, 0.3, 0.5, 0.2]).unwrap(),
    ]
}

fn vec4() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-5.0f64..5.0, 4)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn idempotent(y in vec4()) {
        for set in sets() {
            let z = set.project(&y);
            let zz = set.project(&z);
            prop_assert!(dist(&z, &zz) <= 1e-12);
            prop_assert!(set.contains(&z, 1e-12));
        }
    }

    #[test]
    fn nonexpansive(x in vec4(), y in vec4()) {
        for set in sets() {
            prop_assert!(dist(&set.project(&x), &set.project(&y)) <= dist(&x, &y) + 1e-12);
        }
    }

    #[test]
    fn variational_inequality(y in vec4(), seed in 0u64..1000) {
        let mut rng = SeededStream::new(seed, StreamId::raw(2));
        for set in sets() {
            let p = set.project(&y);
            for _ in 0..10 {
                let z = set.random_point(&mut rng);
                let ip: f64 = (0..4).map(|j| (y[j] - p[j]) * (z[j] - p[j])).sum();
                prop_assert!(ip <= 1e-10 * (1.0 + dist(&y, &p)));
            }
        }
    }
}
