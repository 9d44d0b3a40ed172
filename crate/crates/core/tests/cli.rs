use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn toy_config() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures/toy/toy.toml")
}

fn hypernym(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hypernym"))
        .env_remove("HYPERNYM_OUTPUT_DIR")
        .env_remove("HYPERNYM_THREADS")
        .arg("--config")
        .arg(toy_config())
        .arg("--output-dir")
        .arg(out)
        .args(args)
        .output()
        .unwrap()
}

fn ok(o: Output) -> String {
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout).unwrap()
}

#[test]
fn help_lists_every_stage() {
    let o = Command::new(env!("CARGO_BIN_EXE_hypernym")).arg("--help").output().unwrap();
    let text = ok(o);
    for stage in ["extract", "pairs", "train-word", "train-clf", "predict", "evaluate", "report"] {
        assert!(text.contains(stage), "missing `{stage}` in help");
    }
}

#[test]
fn failure_prints_one_json_line() {
    let tmp = tempfile::tempdir().unwrap();
    let o = hypernym(tmp.path(), &["extract", "--ontology", "/nonexistent/dump.jsonl"]);
    assert!(!o.status.success());
    let stderr = String::from_utf8(o.stderr).unwrap();
    let line = stderr.lines().last().unwrap();
    let v: serde_json::Value = serde_json::from_str(line).unwrap();
    assert_eq!(v["error"]["stage"], "extract");
    assert!(v["error"]["message"].as_str().unwrap().contains("dump.jsonl"));
}

#[test]
fn unknown_set_key_is_a_config_error() {
    let tmp = tempfile::tempdir().unwrap();
    let o = hypernym(tmp.path(), &["--set", "classifier.no_such_knob=3", "report"]);
    assert!(!o.status.success());
    let v: serde_json::Value = serde_json::from_str(String::from_utf8(o.stderr).unwrap().lines().last().unwrap()).unwrap();
    assert_eq!(v["error"]["kind"], "config");
}

#[test]
fn extract_writes_provenance_and_skips_decoy() {
    let tmp = tempfile::tempdir().unwrap();
    let path = ok(hypernym(tmp.path(), &["--seed", "7", "extract"]));
    let defs = std::fs::read_to_string(path.trim()).unwrap();
    let first = defs.lines().next().unwrap();
    assert!(first.starts_with("#!hypernym ") && first.contains("stage=extract") && first.contains("seed=7"));
    assert!(!defs.contains("DECOY"));
}

#[test]
fn report_prints_both_distributions() {
    let tmp = tempfile::tempdir().unwrap();
    ok(hypernym(tmp.path(), &["extract"]));
    let text = ok(hypernym(tmp.path(), &["report"]));
    assert!(text.contains("Bonds"));
    assert!(tmp.path().join("distributions.json").exists());
    assert!(tmp.path().join("distributions.txt").exists());
}

#[test]
fn cosine_predict_needs_no_model() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("cos.tsv");
    ok(hypernym(
        tmp.path(),
        &["predict", "--classifier", "cosine", "--feature-mode", "sentence-only", "--top-k", "3", "--out", out.to_str().unwrap()],
    ));
    let text = std::fs::read_to_string(out).unwrap();
    let row = text.lines().find(|l| !l.starts_with('#')).unwrap();
    assert_eq!(row.split('\t').count(), 1 + 2 * 3);
}

#[test]
fn word2vec_model_has_no_subword_sidecar() {
    let tmp = tempfile::tempdir().unwrap();
    let path = ok(hypernym(tmp.path(), &["--set", "embedding.epochs=1", "train-word", "--model", "word2vec"]));
    let vec_path = PathBuf::from(path.trim());
    assert!(vec_path.exists());
    assert!(!hypernym::embeddings::subword_sidecar_path(&vec_path).exists());
}
