//! Command-line behaviour: outputs, exit codes and error context.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const SCHEMA: &str = r#"{"groups":[
  {"name":"hair_type","labels":["straight_hair","wavy_hair","bald"]},
  {"name":"gender","labels":["man","woman"]},
  {"name":"age","labels":["child","young","old"]}]}"#;

fn biasaudit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_biasaudit"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

struct Fixture {
    dir: tempfile::TempDir,
}

impl Fixture {
    fn new() -> Self {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("schema.json"), SCHEMA).unwrap();
        Self { dir }
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    fn simulate(&self, name: &str, seed: u64, effects: &str) -> PathBuf {
        let spec = self.path(&format!("{name}.json"));
        fs::write(
            &spec,
            format!(r#"{{"base_mean":0.6,"base_std":0.05,"k":20,"seed":{seed},"effects":[{effects}]}}"#),
        )
        .unwrap();
        let out = self.path(&format!("{name}.csv"));
        let o = biasaudit(&["simulate", "--schema", p(&self.path("schema.json")), "--spec", p(&spec), "--out", p(&out)]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        out
    }
}

#[test]
fn simulate_is_reproducible_and_records_its_rng() {
    let f = Fixture::new();
    let a = f.simulate("a", 5, r#"{"group":"hair_type","label":"bald","beta":0.08}"#);
    let first = fs::read(&a).unwrap();
    let b = f.simulate("a", 5, r#"{"group":"hair_type","label":"bald","beta":0.08}"#);
    assert_eq!(first, fs::read(&b).unwrap());
    let meta: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(f.path("a.csv.meta.json")).unwrap()).unwrap();
    assert_eq!(meta["seed"], 5);
    assert!(meta["rng"].as_str().unwrap().contains("ChaCha8"));
    let lines = String::from_utf8(first).unwrap().lines().count();
    assert_eq!(lines, 1 + 18 * 20);
}

#[test]
fn audit_writes_json_csv_and_charts() {
    let f = Fixture::new();
    let a = f.simulate("a", 1, r#"{"group":"hair_type","label":"bald","beta":0.08}"#);
    let b = f.simulate("b", 2, "");
    let out = f.path("report");
    let o = biasaudit(&[
        "audit",
        "--schema", p(&f.path("schema.json")),
        "--scores", &format!("{}:first", p(&a)),
        "--scores", &format!("{}:second", p(&b)),
        "--eod-mode", "threshold=0.5",
        "--brisk-star-mode", "literal",
        "--m", "250",
        "--out", p(&out),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(out.join("report.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 2 * 8);
    assert!(csv.lines().nth(1).unwrap().starts_with("first,a,hair_type.straight_hair,rest,ok,"));
    let json: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(json["metadata"]["bonferroni_m"], 250);
    assert_eq!(json["metadata"]["adjusted_alpha"], 4e-5);
    assert_eq!(json["metadata"]["config"]["eod_mode"]["threshold"], 0.5);
    assert_eq!(json["metadata"]["inputs"][1]["detector"], "second");
    let svgs = fs::read_dir(&out)
        .unwrap()
        .filter(|e| e.as_ref().unwrap().path().extension().is_some_and(|x| x == "svg"))
        .count();
    assert_eq!(svgs, 2);
}

#[test]
fn pairwise_compare_mode() {
    let f = Fixture::new();
    let a = f.simulate("a", 1, "");
    let out = f.path("pw");
    let o = biasaudit(&["audit", "--schema", p(&f.path("schema.json")), "--scores", p(&a), "--compare", "pairwise=old", "--out", p(&out)]);
    assert!(o.status.success());
    let csv = fs::read_to_string(out.join("report.csv")).unwrap();
    let attrs: Vec<&str> = csv.lines().skip(1).map(|l| l.split(',').nth(2).unwrap()).collect();
    assert_eq!(attrs, ["age.child:vs:old", "age.young:vs:old"]);
}

#[test]
fn unmeasurable_attribute_exits_4_after_writing() {
    let f = Fixture::new();
    let a = f.simulate("a", 1, "");
    let text = fs::read_to_string(&a).unwrap();
    let kept: Vec<&str> = text.lines().filter(|l| !l.contains(",bald,")).collect();
    let sparse = f.path("sparse.csv");
    fs::write(&sparse, kept.join("\n")).unwrap();
    let out = f.path("out");
    let o = biasaudit(&["audit", "--schema", p(&f.path("schema.json")), "--scores", p(&sparse), "--out", p(&out)]);
    assert_eq!(o.status.code(), Some(4));
    let csv = fs::read_to_string(out.join("report.csv")).unwrap();
    assert!(csv.contains("hair_type.bald,rest,not_measurable"));
}

#[test]
fn validation_and_io_exit_codes() {
    let f = Fixture::new();
    let a = f.simulate("a", 1, "");
    let text = fs::read_to_string(&a).unwrap();
    let broken = text.replacen(",synthetic,", ",maybe,", 1);
    let bad = f.path("bad.csv");
    fs::write(&bad, broken).unwrap();
    let o = biasaudit(&["audit", "--schema", p(&f.path("schema.json")), "--scores", p(&bad), "--out", p(&f.path("o"))]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("bad.csv") && err.contains("row 2"), "{err}");

    let o = biasaudit(&["audit", "--scores", p(&f.path("missing.csv")), "--out", p(&f.path("o"))]);
    assert_eq!(o.status.code(), Some(3));

    let o = biasaudit(&["audit", "--scores", p(&a), "--eod-mode", "threshold=2", "--out", p(&f.path("o"))]);
    assert_eq!(o.status.code(), Some(2));

    fs::write(f.path("bad_schema.json"), r#"{"groups":[{"name":"g","labels":["a","a"]}]}"#).unwrap();
    let o = biasaudit(&["audit", "--schema", p(&f.path("bad_schema.json")), "--scores", p(&a), "--out", p(&f.path("o"))]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn corr_sweep_and_compare_tests() {
    let f = Fixture::new();
    let a = f.simulate("a", 1, r#"{"group":"hair_type","label":"bald","beta":0.08},{"group":"age","label":"old","beta":-0.03}"#);
    let b = f.simulate("b", 2, r#"{"group":"hair_type","label":"bald","beta":0.06},{"group":"age","label":"old","beta":-0.02}"#);
    let reports = f.path("reports");
    let o = biasaudit(&["audit", "--schema", p(&f.path("schema.json")), "--scores", &format!("{}:x", p(&a)), "--scores", &format!("{}:y", p(&b)), "--out", p(&reports)]);
    assert!(o.status.success());

    let props = f.path("props.csv");
    fs::write(&props, "attribute,proportion\nbald,0.1\nwavy_hair,0.3\nstraight_hair,0.6\nold,0.2\nman,0.5\n").unwrap();
    let corr = f.path("corr");
    let o = biasaudit(&["corr", "--reports", p(&reports), "--proportions", p(&props), "--method", "spearman", "--out", p(&corr)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let matrix = fs::read_to_string(corr.join("corr_brisk.csv")).unwrap();
    assert!(matrix.starts_with("detector,x,y\nx,1,"));
    assert!(corr.join("corr_proportions.json").exists());
    assert!(String::from_utf8_lossy(&o.stderr).contains("no training proportion"));

    let sweep = f.path("sweep");
    let o = biasaudit(&["sweep", "--schema", p(&f.path("schema.json")), "--scores", p(&a), "--fractions", "1,0.5,0.2", "--reps", "4", "--seed", "3", "--out", p(&sweep)]);
    assert!(o.status.success());
    let csv = fs::read_to_string(sweep.join("sweep.csv")).unwrap();
    assert_eq!(csv.lines().count(), 4);
    assert!(csv.lines().nth(1).unwrap().split(',').nth(2) == Some("0"));

    let ct = f.path("ct");
    let o = biasaudit(&["compare-tests", "--schema", p(&f.path("schema.json")), "--scores", p(&a), "--out", p(&ct)]);
    assert!(o.status.success());
    assert_eq!(fs::read_to_string(ct.join("compare_tests.csv")).unwrap().lines().count(), 9);
}

#[test]
fn corr_needs_two_detectors() {
    let f = Fixture::new();
    let a = f.simulate("a", 1, "");
    let reports = f.path("r");
    assert!(biasaudit(&["audit", "--schema", p(&f.path("schema.json")), "--scores", p(&a), "--out", p(&reports)]).status.success());
    let o = biasaudit(&["corr", "--reports", p(&reports), "--out", p(&f.path("c"))]);
    assert_eq!(o.status.code(), Some(2));
}
