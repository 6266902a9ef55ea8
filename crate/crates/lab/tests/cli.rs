use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

const BSC_PAIR: &str = r#"{"name":"bsc","input_size":2,"output_size":2,
  "W":[[0.9,0.1],[0.1,0.9]],"q":[[0.95,0.05],[0.05,0.95]]}"#;

struct Sandbox {
    dir: tempfile::TempDir,
}

impl Sandbox {
    fn new() -> Sandbox {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("bsc.json"), BSC_PAIR).unwrap();
        Sandbox { dir }
    }

    fn file(&self, name: &str, text: &str) -> PathBuf {
        let p = self.dir.path().join(name);
        fs::write(&p, text).unwrap();
        p
    }

    fn runs(&self) -> PathBuf {
        self.dir.path().join("runs")
    }

    fn run(&self, args: &[&str]) -> Output {
        self.run_env(args, None)
    }

    fn run_env(&self, args: &[&str], budget: Option<&str>) -> Output {
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_mismatch-lab"));
        cmd.current_dir(self.dir.path()).args(args).arg("--out").arg(self.runs());
        cmd.env_remove("MISMATCH_LAB_BUDGET");
        if let Some(b) = budget {
            cmd.env("MISMATCH_LAB_BUDGET", b);
        }
        cmd.output().unwrap()
    }
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn run_dir(o: &Output) -> PathBuf {
    let line = stdout(o).lines().find(|l| l.starts_with("run directory: ")).expect("run directory line").to_string();
    PathBuf::from(line.trim_start_matches("run directory: "))
}

fn diagnostic(o: &Output) -> Value {
    serde_json::from_str(String::from_utf8_lossy(&o.stderr).trim()).expect("stderr is one JSON record")
}

fn jsonl(path: &Path) -> Vec<Value> {
    fs::read_to_string(path).unwrap().lines().map(|l| serde_json::from_str(l).unwrap()).collect()
}

#[test]
fn validate_writes_meta() {
    let sb = Sandbox::new();
    let o = sb.run(&["validate", "--problem", "bsc.json"]);
    assert_eq!(o.status.code(), Some(0));
    let dir = run_dir(&o);
    let meta: Value = serde_json::from_str(&fs::read_to_string(dir.join("run_meta.json")).unwrap()).unwrap();
    assert_eq!(meta["command"], "validate");
    assert_eq!(meta["version"], env!("CARGO_PKG_VERSION"));
    assert!(meta["wall_time_s"].as_f64().unwrap() >= 0.0);
    assert!(dir.join("validate.csv").is_file());
}

#[test]
fn input_errors_have_distinct_codes() {
    let sb = Sandbox::new();
    sb.file("row.json", &BSC_PAIR.replace("[0.9,0.1],[0.1", "[0.89,0.1],[0.1"));
    let o = sb.run(&["validate", "--problem", "row.json"]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(diagnostic(&o)["error"], "RowNotStochastic");

    sb.file("zero.json", &BSC_PAIR.replace("[0.95,0.05],[0.05", "[0.95,0],[0.05"));
    let o = sb.run(&["validate", "--problem", "zero.json"]);
    assert_eq!(o.status.code(), Some(3));
    assert_eq!(diagnostic(&o)["error"], "MetricZeroOnSupport");

    let o = sb.run(&["validate", "--problem", "missing.json"]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(diagnostic(&o)["error"], "ReadError");

    let o = sb.run(&["bsc", "--p", "0.05", "--pp", "0.1"]);
    assert_eq!(o.status.code(), Some(3));
    assert_eq!(diagnostic(&o)["error"], "OrderingViolated");
}

#[test]
fn budget_errors_exit_one() {
    let sb = Sandbox::new();
    let o = sb.run_env(&["spectrum", "--problem", "bsc.json", "--n", "300"], Some("100"));
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(diagnostic(&o)["error"], "BudgetExceeded");
    let o = sb.run_env(&["spectrum", "--problem", "bsc.json"], Some("atoms=x"));
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn bsc_closed_form_output() {
    let sb = Sandbox::new();
    let o = sb.run(&["bsc", "--p", "0.1", "--pp", "0.05"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("capacity 0.368064 nats, s* 0.746229"), "{}", stdout(&o));
}

#[test]
fn rates_over_k() {
    let sb = Sandbox::new();
    let o = sb.run(&["rates", "--problem", "bsc.json", "--k", "1,2", "--mode", "s1", "--format", "jsonl", "--bits"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let recs = jsonl(&run_dir(&o).join("rates.jsonl"));
    assert_eq!(recs.len(), 2);
    let v1 = recs[0]["value_nats"].as_f64().unwrap();
    let v2 = recs[1]["value_nats"].as_f64().unwrap();
    assert_eq!(recs[1]["k"], 2);
    assert!(v2 >= v1 - 1e-6);
    assert_eq!(recs[1]["p"].as_array().unwrap().len(), 4);
    assert!((recs[0]["value_bits"].as_f64().unwrap() - v1 / std::f64::consts::LN_2).abs() < 1e-12);
    for key in ["value_nats", "k", "s", "a", "p", "status"] {
        assert!(recs[0].get(key).is_some(), "missing {key}");
    }
}

#[test]
fn gmi_rate_at_uniform_input() {
    let sb = Sandbox::new();
    let o = sb.run(&["rates", "--problem", "bsc.json", "--input", "uniform"]);
    assert_eq!(o.status.code(), Some(0));
    let text = fs::read_to_string(run_dir(&o).join("rates.csv")).unwrap();
    let row: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
    let value: f64 = row[2].parse().unwrap();
    let s: f64 = row[3].parse().unwrap();
    assert!((value - 0.368064207168497).abs() < 1e-6);
    assert!((s - 0.746228600043274).abs() < 1e-4);
}

#[test]
fn spectrum_csv_is_sorted() {
    let sb = Sandbox::new();
    let o = sb.run(&["spectrum", "--problem", "bsc.json", "--n", "5", "--tail", "0", "--quantile", "0.1"]);
    assert_eq!(o.status.code(), Some(0));
    let text = fs::read_to_string(run_dir(&o).join("spectrum_n5.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("value,prob"));
    let values: Vec<f64> = lines.map(|l| l.split(',').next().unwrap().parse().unwrap()).collect();
    assert_eq!(values.len(), 6);
    assert!(values.windows(2).all(|w| w[0] < w[1]));
}

#[test]
fn simulate_records() {
    let sb = Sandbox::new();
    let o = sb.run(&["simulate", "--problem", "bsc.json", "--n", "4", "--M", "4", "--codebooks", "2", "--trials", "500"]);
    assert_eq!(o.status.code(), Some(0));
    let dir = run_dir(&o);
    let cb: Value = serde_json::from_str(&fs::read_to_string(dir.join("codebook_1.json")).unwrap()).unwrap();
    assert_eq!(cb["M"], 4);
    assert_eq!(cb["words"].as_array().unwrap().len(), 16);
    assert_eq!(cb["kind"], "iid");
    let mc = jsonl(&dir.join("mc.jsonl"));
    assert_eq!(mc.len(), 4);
    assert!(mc.iter().all(|r| r["trials"] == 500));
}

#[test]
fn checks_hold_on_matched_corpus() {
    let sb = Sandbox::new();
    let o = sb.run(&["checks", "--corpus", "8", "--corpus-kind", "matched", "--n", "1,3,6", "--format", "jsonl"]);
    assert_eq!(o.status.code(), Some(0));
    let recs = jsonl(&run_dir(&o).join("checks.jsonl"));
    assert!(!recs.is_empty());
    assert!(recs.iter().all(|r| r["holds"] == true));
    for check in ["overshoot", "second_moment", "pc_identity"] {
        assert!(recs.iter().any(|r| r["check"] == check));
    }
}

#[test]
fn runs_are_reproducible_and_fresh() {
    let sb = Sandbox::new();
    let args = ["bounds", "--problem", "bsc.json", "--n", "4", "--M", "2,4", "--codebooks", "6", "--trials", "300", "--seed", "9"];
    let a = sb.run(&args);
    let b = sb.run(&args);
    assert_eq!(a.status.code(), Some(0));
    let (da, db) = (run_dir(&a), run_dir(&b));
    assert_ne!(da, db);
    for name in ["sandwich.csv", "summary.csv", "feinstein_vs_gamma.csv"] {
        assert_eq!(fs::read(da.join(name)).unwrap(), fs::read(db.join(name)).unwrap(), "{name}");
    }
    let header = fs::read_to_string(da.join("sandwich.csv")).unwrap();
    assert!(header.starts_with("n,M,gamma,s,seed,pe_exact,pe_mc,stderr,feinstein,rcu,verdu_han,verdict_a,verdict_b\n"));
    let meta: Value = serde_json::from_str(&fs::read_to_string(da.join("run_meta.json")).unwrap()).unwrap();
    assert_eq!(meta["seed"], 9);
}

#[test]
fn gap_record() {
    let sb = Sandbox::new();
    let o = sb.run(&["gap", "--problem", "bsc.json", "--format", "jsonl"]);
    assert_eq!(o.status.code(), Some(0));
    let rec = &jsonl(&run_dir(&o).join("gap.jsonl"))[0];
    assert!((rec["eta_upper"].as_f64().unwrap() - 0.020654218912746394).abs() < 1e-9);
}
