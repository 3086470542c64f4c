use cubeperc::components::{distance_to_set, hit_probability, label_components, w_set};
use cubeperc::experiments::{
    parse_csv, run, to_json, write_report, ExperimentConfig, ExperimentKind, ReportFormat,
};
use cubeperc::sampler::{sample_edges, SampleKey};
use cubeperc::theory::solve_y;
use cubeperc::CubeGraph;

#[test]
fn hit_probability_tracks_survival_fraction() {
    let g = CubeGraph::new(18).unwrap();
    let est = hit_probability(&g, 2.0 / 18.0, 324, 2000, 0).unwrap();
    let y = solve_y(2.0).unwrap();
    assert!((est.estimate - y).abs() <= 0.05, "{est:?} vs {y}");
    assert!(est.std_error > 0.0 && est.std_error < 0.02);
}

#[test]
fn w_set_covers_cube_within_distance_two() {
    let g = CubeGraph::new(16).unwrap();
    let mut covered = 0;
    for t in 0..5 {
        let sample = sample_edges(&g, SampleKey::new(0, t, 0), 2.0 / 16.0).unwrap();
        let lab = label_components(&g, &sample.open).unwrap();
        let w = w_set(&lab, 256).unwrap();
        if distance_to_set(&g, &w.members).unwrap().max <= 2 {
            covered += 1;
        }
    }
    assert!(covered >= 4, "covered in {covered}/5");
}

#[test]
fn giant_fraction_approaches_y_with_dimension() {
    let deviation = |d: u32| {
        let cfg = ExperimentConfig::new(ExperimentKind::Supercritical, d, 20, 0).with_c(2.0);
        run(&cfg).unwrap().summary_value("l1_fraction_deviation").unwrap()
    };
    let (d12, d18) = (deviation(12), deviation(18));
    assert!(d18 <= d12 + 0.02, "d=12: {d12}, d=18: {d18}");
    assert!(d18 <= 0.08);
}

#[test]
fn second_component_stays_order_d() {
    let cfg = ExperimentConfig::new(ExperimentKind::Supercritical, 16, 10, 3).with_c(2.0);
    let report = run(&cfg).unwrap();
    assert!(report.rows.iter().all(|r| r.l2.unwrap() <= 160));
}

#[test]
fn large_d_galton_watson_matches_limit() {
    let cfg = ExperimentConfig::new(ExperimentKind::Gw, 1000, 10_000, 0).with_c(2.0);
    let report = run(&cfg).unwrap();
    let est = report.summary_value("survival_estimate").unwrap();
    let se = report.summary_value("std_error").unwrap();
    let y = report.summary_value("y").unwrap();
    assert!((est - y).abs() <= 3.0 * se + 1e-3, "{est} vs {y} (se {se})");
}

#[test]
fn hitprob_experiment_reports_estimate() {
    let cfg = ExperimentConfig::new(ExperimentKind::Hitprob, 14, 400, 1).with_c(2.0);
    let report = run(&cfg).unwrap();
    assert_eq!(report.rows.len(), 400);
    assert_eq!(report.config.w_threshold, Some(196));
    let est = report.summary_value("hit_estimate").unwrap();
    assert!(est > 0.6 && est < 0.9, "{est}");
}

#[test]
fn reports_written_to_disk() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = ExperimentConfig::new(ExperimentKind::Sprinkling, 12, 6, 9).with_c(2.0);
    let report = run(&cfg).unwrap();

    let (a, b) = (dir.path().join("a.json"), dir.path().join("b.json"));
    write_report(&report, &a, ReportFormat::Json).unwrap();
    write_report(&run(&cfg).unwrap(), &b, ReportFormat::Json).unwrap();
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert_eq!(std::fs::read_to_string(&a).unwrap(), to_json(&report));

    let csv = dir.path().join("r.csv");
    write_report(&report, &csv, ReportFormat::Csv).unwrap();
    let (kind, rows) = parse_csv(&std::fs::read_to_string(&csv).unwrap()).unwrap();
    assert_eq!(kind, ExperimentKind::Sprinkling);
    assert_eq!(rows, report.rows);
}

#[test]
fn aggregates_recompute_from_rows() {
    let cfg = ExperimentConfig::new(ExperimentKind::Subcritical, 12, 15, 4).with_eps(0.2);
    let report = run(&cfg).unwrap();
    let recomputed = cubeperc::experiments::aggregate_rows(report.kind(), &report.rows);
    assert_eq!(recomputed, report.aggregates);
    assert_eq!(report.rows.len(), 15);
}
