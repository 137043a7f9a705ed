use slpmm::problems::io::{parse_scenarios_csv, parse_sparse_classification, write_scenarios_csv};
use slpmm::problems::{
    load_scenarios_csv, load_sparse_classification, save_scenarios_csv, save_sparse_classification,
    synthetic_gaussians, synthetic_scenarios, NpClassificationData,
};
use slpmm::Error;

#[test]
fn classification_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("two_gaussians.txt");
    let (pos, neg) = synthetic_gaussians(7, 40, 25, 1.5, 11);
    let data = NpClassificationData::new(pos, neg).unwrap();
    save_sparse_classification(&path, &data).unwrap();
    let back = load_sparse_classification(&path, None).unwrap();
    assert_eq!(back.positive, data.positive);
    assert_eq!(back.negative, data.negative);
}

#[test]
fn classification_errors() {
    assert!(matches!(
        parse_sparse_classification("".as_bytes(), None),
        Err(Error::Parse { .. })
    ));
    let bad = "+1 1:1.0\n-1 2:x\n";
    match parse_sparse_classification(bad.as_bytes(), None) {
        Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
        other => panic!("{other:?}"),
    }
}

#[test]
fn scenario_csv_round_trip_with_and_without_header() {
    let dir = tempfile::tempdir().unwrap();
    let (returns, benchmark) = synthetic_scenarios(5, 60, 12);
    for header in [false, true] {
        let path = dir.path().join(format!("scen_{header}.csv"));
        save_scenarios_csv(&path, &returns, &benchmark, header).unwrap();
        let back = load_scenarios_csv(&path).unwrap();
        for (a, b) in back.returns.iter().flatten().zip(returns.iter().flatten()) {
            assert!((a - b).abs() <= 1e-12);
        }
        for (a, b) in back.benchmark.iter().zip(&benchmark) {
            assert!((a - b).abs() <= 1e-12);
        }
    }
}

#[test]
fn scenario_csv_known_numbers() {
    let mut buf = Vec::new();
    write_scenarios_csv(
        &mut buf,
        &[vec![0.5, -1.0], vec![2.0, 0.25]],
        &[0.125, 3.0],
        false,
    )
    .unwrap();
    let data = parse_scenarios_csv(buf.as_slice()).unwrap();
    assert_eq!(data.returns, vec![vec![0.5, -1.0], vec![2.0, 0.25]]);
    assert_eq!(data.benchmark, vec![0.125, 3.0]);
}

#[test]
fn ragged_csv_reports_location() {
    match parse_scenarios_csv("1,2,3\n4,5\n".as_bytes()) {
        Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
        other => panic!("{other:?}"),
    }
}
