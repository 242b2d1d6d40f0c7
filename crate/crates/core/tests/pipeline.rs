use std::path::{Path, PathBuf};

use ggm_core::harness::{
    format_table, gaussian_blobs, load_csv, run_nested_cv, run_nested_cv_on, train_model,
    CountGrid, FilterSearch, SigmaSearch, SigmaStrategy, TrainSettings,
};
use ggm_core::{Architecture, ExperimentConfig, FilterPolicy, MembershipKind, TrainedModel};

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../data")
        .join(name)
}

fn small_config() -> ExperimentConfig {
    ExperimentConfig {
        sigma: SigmaSearch {
            count: 4,
            ..Default::default()
        },
        filter: FilterSearch::PerClassCount {
            values: vec![0, 2],
            max_fraction: 0.2,
            grid: CountGrid::Uniform,
        },
        outer_folds: 3,
        inner_folds: 3,
        seed: 21,
        ..Default::default()
    }
}

#[test]
fn bundled_datasets_load() {
    for (name, m, n) in [
        ("haberman", 283, 3),
        ("ionosphere", 350, 33),
        ("fertility", 99, 9),
    ] {
        let d = load_csv(data(&format!("{name}.csv")), "class").unwrap();
        assert_eq!((d.len(), d.dim(), d.class_count()), (m, n, 2), "{name}");
    }
}

#[test]
fn nested_cv_touches_only_training_rows() {
    let d = load_csv(data("haberman.csv"), "class").unwrap();
    let result = run_nested_cv_on(&d, "haberman", &small_config()).unwrap();
    let mut all_test = Vec::new();
    for trace in &result.traces {
        for i in &trace.test {
            assert!(
                trace.fitted.binary_search(i).is_err(),
                "fold {} fitted test row {i}",
                trace.fold
            );
            assert!(
                trace.selection.binary_search(i).is_err(),
                "fold {} selected on test row {i}",
                trace.fold
            );
        }
        all_test.extend(trace.test.iter().copied());
    }
    all_test.sort_unstable();
    assert_eq!(all_test, (0..d.len()).collect::<Vec<_>>());
}

#[test]
fn nested_cv_is_deterministic() {
    let d = load_csv(data("fertility.csv"), "class").unwrap();
    let mut config = small_config();
    config.sigma.strategy = SigmaStrategy::Random;
    let a = run_nested_cv_on(&d, "fertility", &config).unwrap().report;
    let b = run_nested_cv_on(&d, "fertility", &config).unwrap().report;
    assert_eq!(
        serde_json::to_string(&a).unwrap(),
        serde_json::to_string(&b).unwrap()
    );
    assert_eq!(a.per_fold.len(), 3);
    assert!(a.per_fold.windows(2).all(|w| w[0].fold < w[1].fold));
    let table = format_table(&a);
    assert_eq!(table.lines().count(), 3 + 3);
}

#[test]
fn config_file_drives_a_run() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::copy(data("fertility.csv"), dir.path().join("f.csv")).unwrap();
    let path = dir.path().join("config.json");
    std::fs::write(
        &path,
        r#"{"dataset": "f.csv", "architecture": "chipclass-exp", "membership": "cardinality",
            "filter": {"policy": "threshold"}, "outer_folds": 2, "inner_folds": 2, "seed": 3}"#,
    )
    .unwrap();
    let config = ExperimentConfig::from_json_file(&path).unwrap();
    let report = run_nested_cv(&config).unwrap().report;
    assert_eq!(report.dataset, "f");
    assert_eq!(report.candidates, 1);
    assert!(report
        .per_fold
        .iter()
        .all(|f| f.sigma.is_none() && f.filter == "threshold"));
}

#[test]
fn separable_blobs_score_perfectly() {
    let d = gaussian_blobs(&[vec![0.0, 0.0, 0.0], vec![8.0, 8.0, 0.0]], 40, 1.0, 5).unwrap();
    for architecture in [
        Architecture::ChipclassExp,
        Architecture::ChipclassTanh,
        Architecture::SsvBinary,
    ] {
        let config = ExperimentConfig {
            architecture,
            ..small_config()
        };
        let report = run_nested_cv_on(&d, "blobs", &config).unwrap().report;
        assert!(report.mean >= 0.99, "{architecture}: {}", report.mean);
        assert_eq!(report.positive_label.as_deref(), Some("1"));
    }
}

#[test]
fn models_round_trip_through_json() {
    let d = load_csv(data("heart.csv"), "class").unwrap();
    for architecture in [
        Architecture::ChipclassExp,
        Architecture::ChipclassTanh,
        Architecture::SsvBinary,
        Architecture::SsvMulticlass,
    ] {
        let settings = TrainSettings {
            architecture,
            membership: MembershipKind::Distance,
            sigma: 1.5,
            policy: FilterPolicy::Threshold,
            mode: Default::default(),
            gradient: Default::default(),
        };
        let fit = train_model(&d, &settings).unwrap();
        let back = TrainedModel::from_json(&fit.model.to_json().unwrap()).unwrap();
        assert_eq!(back, fit.model);
        let x = d.sample(7).to_vec();
        assert_eq!(
            back.predict_proba(&x).unwrap(),
            fit.model.predict_proba(&x).unwrap()
        );
        assert_eq!(back.sigma_used, Some(1.5));
    }
}

#[test]
fn malformed_model_files_are_rejected() {
    let d = load_csv(data("fertility.csv"), "class").unwrap();
    let settings = TrainSettings {
        architecture: Architecture::SsvBinary,
        membership: MembershipKind::Cardinality,
        sigma: 1.0,
        policy: FilterPolicy::None,
        mode: Default::default(),
        gradient: Default::default(),
    };
    let json = train_model(&d, &settings).unwrap().model.to_json().unwrap();
    let mut doc: serde_json::Value = serde_json::from_str(&json).unwrap();
    doc["weights"] = serde_json::Value::Null;
    assert!(TrainedModel::from_json(&doc.to_string()).is_err());
    let mut doc: serde_json::Value = serde_json::from_str(&json).unwrap();
    doc["class_labels"] = serde_json::json!(["a", "b", "c"]);
    assert!(TrainedModel::from_json(&doc.to_string()).is_err());
}
