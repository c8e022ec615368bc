use iscap_core::config::Config;
use iscap_core::experiment::{
    format_table, parse_table, read_table, run_experiment, write_table, ChannelModel, CurveSpec, ExperimentKind,
    ExperimentSpec, XAxis,
};
use proptest::prelude::*;

fn gamma_spec(x: Vec<f64>, drops: usize, eta_db: Option<f64>) -> ExperimentSpec {
    let mut curve = CurveSpec::new("c", ChannelModel::Rician { kappa: 5.0 });
    curve.eta_db = eta_db;
    ExperimentSpec {
        kind: ExperimentKind::FeasibilityVsGamma,
        x_axis: XAxis::GammaDb,
        x,
        curves: vec![curve],
        drops,
        seed: 3,
        threads: 0,
    }
}

#[test]
fn unreachable_threshold_is_never_met() {
    let res = run_experiment(&gamma_spec(vec![60.0], 10, None), &Config::default(), None).unwrap();
    assert_eq!(res.columns[1], vec![0.0]);
}

#[test]
fn vanishing_thresholds_are_always_met() {
    let mut config = Config::default();
    config.params.e_min = 1e-20;
    let res = run_experiment(&gamma_spec(vec![-60.0], 50, Some(-60.0)), &config, None).unwrap();
    assert!(res.columns[1][0] >= 0.95, "{}", res.columns[1][0]);
}

#[test]
fn written_tables_have_one_row_per_point() {
    let mut config = Config::default();
    config.drops = 2;
    let dir = tempfile::tempdir().unwrap();
    let mut spec = ExperimentSpec::standard(ExperimentKind::MrtCompare, &config);
    spec.x = vec![0.0, 10.0, 20.0];
    let res = run_experiment(&spec, &config, None).unwrap();
    let paths = res.write(&config, dir.path()).unwrap();
    assert_eq!(paths.len(), 2);
    let cols = read_table(&dir.path().join("data_EC.txt")).unwrap();
    assert_eq!(cols.len(), 1 + spec.curves.len());
    assert!(cols.iter().all(|c| c.len() == 3));
    assert_eq!(cols[0], spec.x);
    let text = std::fs::read_to_string(&paths[0]).unwrap();
    assert!(text.starts_with("# gamma_db proposed_los"));
    let manifest = std::fs::read_to_string(&paths[1]).unwrap();
    assert!(manifest.contains("cell.2.5 = drops=2"));
    assert!(manifest.contains("config.gamma = 1e1"));
}

#[test]
fn feasibility_probabilities_lie_in_the_unit_interval() {
    let mut config = Config::default();
    config.drops = 3;
    let mut spec = ExperimentSpec::standard(ExperimentKind::FeasibilityVsNodes, &config);
    spec.x = vec![2.0, 6.0];
    let res = run_experiment(&spec, &config, None).unwrap();
    for col in &res.columns[1..] {
        assert!(col.iter().all(|p| (0.0..=1.0).contains(p)));
    }
}

#[test]
fn table_errors_leave_no_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t.txt");
    assert!(write_table(&path, &[], None).is_err());
    assert!(write_table(&path, &[vec![1.0, 2.0], vec![1.0]], None).is_err());
    assert!(!path.exists());
    assert!(std::fs::read_dir(dir.path()).unwrap().next().is_none());
}

#[test]
fn three_columns_of_ten() {
    let cols: Vec<Vec<f64>> = (0..3)
        .map(|c| (0..10).map(|r| (c * 10 + r) as f64 * 0.37).collect())
        .collect();
    let text = format_table(&cols, None).unwrap();
    let rows: Vec<&str> = text.lines().collect();
    assert_eq!(rows.len(), 10);
    assert!(rows.iter().all(|r| r.split(' ').count() == 3));
}

proptest! {
    #[test]
    fn tables_round_trip_to_nine_significant_digits(
        cols in prop::collection::vec(prop::collection::vec(-1e12f64..1e12, 5), 1..4),
        scale in -30i32..30,
    ) {
        let cols: Vec<Vec<f64>> = cols
            .into_iter()
            .map(|c| c.into_iter().map(|v| v * 10f64.powi(scale)).collect())
            .collect();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.txt");
        write_table(&path, &cols, Some("x a b")).unwrap();
        let back = read_table(&path).unwrap();
        prop_assert_eq!(back.len(), cols.len());
        for (a, b) in cols.iter().zip(&back) {
            for (x, y) in a.iter().zip(b) {
                prop_assert!((x - y).abs() <= 5e-9 * x.abs());
            }
        }
        prop_assert_eq!(parse_table(&std::fs::read_to_string(&path).unwrap()).unwrap(), back);
    }
}
