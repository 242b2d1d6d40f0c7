use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use ggm_core::harness::{load_csv, train_model, TrainSettings};
use ggm_core::{Architecture, FilterPolicy, MembershipKind, TrainedModel};

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../data")
        .join(name)
}

fn ggm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ggm"))
        .args(args)
        .env_remove("GGM_SEED")
        .output()
        .expect("binary runs")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn dot_export_has_one_node_per_row() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("g.dot");
    let csv = data("haberman.csv");
    let r = ggm(&["graph", s(&csv), "--label", "class", "--out", s(&out)]);
    assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));
    let dot = std::fs::read_to_string(&out).unwrap();
    let m = load_csv(&csv, "class").unwrap().len();
    let nodes = dot.lines().filter(|l| l.contains("[class=")).count();
    assert_eq!(nodes, m);
    assert!(dot.starts_with("graph gabriel {"));
    assert!(dot.lines().any(|l| l.contains("support=true")));
}

#[test]
fn witness_and_edge_csv() {
    let dir = tempfile::tempdir().unwrap();
    let (edges, witness) = (dir.path().join("e.csv"), dir.path().join("w.csv"));
    let csv = data("fertility.csv");
    let r = ggm(&[
        "graph",
        s(&csv),
        "--format",
        "csv",
        "--out",
        s(&edges),
        "--witness",
        s(&witness),
    ]);
    assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));
    let m = load_csv(&csv, "class").unwrap().len();
    let w = std::fs::read_to_string(&witness).unwrap();
    assert_eq!(w.lines().count(), 1 + m * (m - 1) / 2);
    let zero_pairs = w.lines().skip(1).filter(|l| l.ends_with(",0")).count();
    let e = std::fs::read_to_string(&edges).unwrap();
    assert_eq!(e.lines().count() - 1, zero_pairs);
}

#[test]
fn cv_reports_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("config.json");
    std::fs::write(
        &config,
        format!(
            r#"{{"dataset": "{}", "architecture": "ssv-binary", "membership": "distance",
                "sigma": {{"low": 0.1, "high": 10, "strategy": "random", "count": 3}},
                "filter": {{"policy": "per-class-count", "values": [0, 2]}},
                "outer_folds": 3, "inner_folds": 2, "seed": 11}}"#,
            data("haberman.csv").display()
        ),
    )
    .unwrap();
    let run = |name: &str| {
        let out = dir.path().join(name);
        let r = ggm(&["--quiet", "cv", s(&config), "--out", s(&out)]);
        assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));
        std::fs::read(out).unwrap()
    };
    let (a, b) = (run("a.json"), run("b.json"));
    assert_eq!(a, b);
    let report: serde_json::Value = serde_json::from_slice(&a).unwrap();
    assert_eq!(report["per_fold"].as_array().unwrap().len(), 3);
    assert_eq!(report["seed"], 11);
}

#[test]
fn seed_flag_overrides_config() {
    let dir = tempfile::tempdir().unwrap();
    let csv = data("fertility.csv");
    let out = dir.path().join("r.json");
    let r = ggm(&[
        "--seed",
        "5",
        "--quiet",
        "cv",
        "--dataset",
        s(&csv),
        "--filter",
        "threshold",
        "--membership",
        "cardinality",
        "--outer",
        "2",
        "--inner",
        "2",
        "--out",
        s(&out),
    ]);
    assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out).unwrap()).unwrap();
    assert_eq!(report["seed"], 5);
}

#[test]
fn train_then_predict_is_bit_exact() {
    let dir = tempfile::tempdir().unwrap();
    let csv = data("wisconsin.csv");
    let model_path = dir.path().join("model.json");
    let probs_path = dir.path().join("p.csv");
    let r = ggm(&[
        "train",
        s(&csv),
        "--arch",
        "ssv-binary",
        "--membership",
        "distance",
        "--sigma",
        "0.5",
        "--filter-policy",
        "count:2",
        "--out",
        s(&model_path),
    ]);
    assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));
    let r = ggm(&[
        "predict",
        "--model",
        s(&model_path),
        s(&csv),
        "--out",
        s(&probs_path),
    ]);
    assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));

    let dataset = load_csv(&csv, "class").unwrap();
    let settings = TrainSettings {
        architecture: Architecture::SsvBinary,
        membership: MembershipKind::Distance,
        sigma: 0.5,
        policy: FilterPolicy::PerClassCount { counts: vec![2, 2] },
        mode: Default::default(),
        gradient: Default::default(),
    };
    let in_process = train_model(&dataset, &settings).unwrap().model;
    let loaded = TrainedModel::from_json(&std::fs::read_to_string(&model_path).unwrap()).unwrap();
    assert_eq!(loaded, in_process);

    let text = std::fs::read_to_string(&probs_path).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap().split(',').count(), 2);
    let mut rows = 0;
    for (i, line) in lines.enumerate() {
        let got: Vec<f64> = line.split(',').map(|v| v.parse().unwrap()).collect();
        let want = in_process
            .predict_proba(&dataset.sample(i).to_vec())
            .unwrap();
        assert_eq!(got.len(), want.len());
        for (g, w) in got.iter().zip(&want) {
            assert_eq!(g.to_bits(), w.to_bits(), "row {i}");
        }
        rows += 1;
    }
    assert_eq!(rows, dataset.len());
}

#[test]
fn chipclass_activation_flag() {
    let dir = tempfile::tempdir().unwrap();
    let model_path = dir.path().join("m.json");
    let csv = data("haberman.csv");
    let r = ggm(&[
        "train",
        s(&csv),
        "--arch",
        "chipclass",
        "--activation",
        "tanh",
        "--out",
        s(&model_path),
    ]);
    assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));
    let model = TrainedModel::from_json(&std::fs::read_to_string(&model_path).unwrap()).unwrap();
    assert_eq!(model.architecture, Architecture::ChipclassTanh);
    let r = ggm(&[
        "train",
        s(&csv),
        "--arch",
        "ssv-binary",
        "--activation",
        "exp",
        "--out",
        s(&model_path),
    ]);
    assert_eq!(r.status.code(), Some(1));
}

#[test]
fn exit_codes() {
    assert_eq!(ggm(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(ggm(&["graph", "--no-such-flag"]).status.code(), Some(1));
    assert_eq!(ggm(&["--help"]).status.code(), Some(0));
    assert_eq!(
        ggm(&["graph", "/definitely/not/here.csv"]).status.code(),
        Some(2)
    );

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.csv");
    std::fs::write(&bad, "a,b,class\n1,2,x\n3,,y\n").unwrap();
    let r = ggm(&["graph", s(&bad)]);
    assert_eq!(r.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&r.stderr).contains("line 3"));
}

#[test]
fn filter_and_membership_reports() {
    let dir = tempfile::tempdir().unwrap();
    let csv = data("haberman.csv");
    let json_path = dir.path().join("f.json");
    let r = ggm(&[
        "filter",
        s(&csv),
        "--filter-policy",
        "count:3,4",
        "--out",
        s(&json_path),
    ]);
    assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));
    let doc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&json_path).unwrap()).unwrap();
    assert_eq!(doc["removed"].as_array().unwrap().len(), 7);
    let m = load_csv(&csv, "class").unwrap().len();
    assert_eq!(doc["kept"].as_array().unwrap().len(), m - 7);

    let report = dir.path().join("q.csv");
    let r = ggm(&["membership", s(&csv), "--sigma", "2", "--out", s(&report)]);
    assert!(r.status.success());
    let text = std::fs::read_to_string(&report).unwrap();
    assert_eq!(
        text.lines().next().unwrap(),
        "sample_index,class,q,q_d,threshold,removed_flag"
    );
    assert_eq!(text.lines().count(), m + 1);
}

#[test]
fn bench_writes_samples() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("b.csv");
    let r = ggm(&[
        "--quiet",
        "bench",
        "--m",
        "120",
        "--dim",
        "3",
        "--fractions",
        "0.1,0.5",
        "--reps",
        "3",
        "--out",
        s(&out),
    ]);
    assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));
    let text = std::fs::read_to_string(&out).unwrap();
    assert_eq!(
        text.lines().next().unwrap(),
        "dataset,m,fraction,rep,method,seconds"
    );
    assert_eq!(text.lines().count(), 1 + 2 * 3 * 3);
}
