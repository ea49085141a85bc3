use approx::assert_abs_diff_eq;
use isingnet::study::{dominant_components, eigen_report, independence_accuracy, run_study, StudyConfig};

fn small(seed: u64) -> StudyConfig {
    let mut cfg = StudyConfig::with_grid(seed, 3, 4);
    cfg.n = 200;
    cfg.burn_in = 200;
    cfg.folds = 4;
    cfg
}

fn read_dir(dir: &std::path::Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<(String, Vec<u8>)> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), std::fs::read(e.path()).unwrap())
        })
        .collect();
    files.sort();
    files
}

#[test]
fn artifacts_are_byte_identical() {
    let cfg = small(4);
    let first = tempfile::tempdir().unwrap();
    let second = tempfile::tempdir().unwrap();
    run_study(&cfg).unwrap().write_to_dir(first.path()).unwrap();
    run_study(&cfg).unwrap().write_to_dir(second.path()).unwrap();
    let a = read_dir(first.path());
    let names: Vec<&str> = a.iter().map(|(n, _)| n.as_str()).collect();
    assert_eq!(
        names,
        [
            "cv_surface_a.csv",
            "cv_surface_b.csv",
            "datasetA.csv",
            "datasetB.csv",
            "eigen_a.csv",
            "eigen_b.csv",
            "fit_a.json",
            "fit_b.json",
            "model_b_true.json",
            "report.json"
        ]
    );
    assert_eq!(a, read_dir(second.path()));
}

#[test]
fn plateau_equals_independence() {
    let mut cfg = small(7);
    cfg.lambda_grid = vec![0.01, 5.0];
    cfg.alpha_grid = vec![0.5, 1.0];
    let report = run_study(&cfg).unwrap();
    for analysis in [&report.a, &report.b] {
        let base = independence_accuracy(&analysis.data, cfg.folds, cfg.seed_cv).unwrap();
        assert_abs_diff_eq!(analysis.summary.independence_accuracy, base, epsilon = 1e-15);
        for v in analysis.surface.lambda_column(1) {
            assert_abs_diff_eq!(v, base, epsilon = 1e-6);
        }
    }
}

#[test]
fn single_cell_grid() {
    let mut cfg = small(8);
    cfg.lambda_grid = vec![0.05];
    cfg.alpha_grid = vec![0.3];
    let report = run_study(&cfg).unwrap();
    for s in [&report.a.summary, &report.b.summary] {
        assert_eq!((s.best_alpha, s.best_lambda), (0.3, 0.05));
        assert_eq!(s.best_accuracy, s.min_lambda_column_mean);
        assert!(!s.verdicts.regularization_helps);
        assert_eq!(s.verdicts.penalty_preference, "ridge");
    }
}

#[test]
fn study_shapes() {
    let cfg = small(9);
    let report = run_study(&cfg).unwrap();
    assert_eq!((report.a.data.n(), report.a.data.p()), (200, 10));
    assert_eq!((report.b.data.n(), report.b.data.p()), (200, 10));
    assert_eq!(report.a.surface.accuracy.len(), 3);
    assert!(report.a.surface.accuracy.iter().all(|row| row.len() == 4));
    assert_eq!(eigen_report(&report.a.fit).unwrap(), report.a.summary.eigenvalues);
    assert_eq!(report.a.summary.eigenvalues.len(), 10);
    assert_eq!(dominant_components(&[0.0; 4], 2.0), 0);
}

#[test]
fn invalid_grids_rejected() {
    let mut cfg = small(1);
    cfg.alpha_grid = vec![];
    assert!(run_study(&cfg).is_err());
    let mut cfg = small(1);
    cfg.lambda_grid = vec![0.1, 0.1];
    assert!(run_study(&cfg).is_err());
}
