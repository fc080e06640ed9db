use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

const M3: &str = r#"{"n":3,"k":2,"dist":[[0,1,3],[1,0,2],[3,2,0]],"initial":[0,1],"requests":[2]}"#;

fn kserver(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kserver")).args(args).output().unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn put(dir: &TempDir, name: &str, contents: &str) -> PathBuf {
    let path = dir.path().join(name);
    fs::write(&path, contents).unwrap();
    path
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn gen_is_deterministic() {
    let dir = TempDir::new().unwrap();
    let (a, b) = (dir.path().join("a.json"), dir.path().join("b.json"));
    for out in [&a, &b] {
        let o = kserver(&[
            "gen",
            "--n",
            "8",
            "--k",
            "3",
            "--rho-len",
            "12",
            "--seed",
            "42",
            "--out",
            s(out),
        ]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    }
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
}

#[test]
fn gen_rejects_k_above_n() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("x.json");
    let o = kserver(&[
        "gen",
        "--n",
        "8",
        "--k",
        "9",
        "--rho-len",
        "3",
        "--seed",
        "1",
        "--out",
        s(&out),
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("k exceeds n"));
    assert!(!out.exists());
}

#[test]
fn gen_rejects_unknown_request_model() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("x.json");
    let o = kserver(&[
        "gen",
        "--n",
        "5",
        "--k",
        "2",
        "--rho-len",
        "3",
        "--seed",
        "1",
        "--request-model",
        "zigzag",
        "--out",
        s(&out),
    ]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn run_prints_total_cost_and_trace() {
    let dir = TempDir::new().unwrap();
    let inst = put(&dir, "m3.json", M3);
    for algo in ["wfa", "opt"] {
        let trace = dir.path().join(format!("{algo}.json"));
        let o = kserver(&["run", "--instance", s(&inst), "--algo", algo, "--trace-out", s(&trace)]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        assert_eq!(stdout(&o).trim(), "2");
        let json: serde_json::Value = serde_json::from_str(&fs::read_to_string(&trace).unwrap()).unwrap();
        assert_eq!(json["total_cost"], 2);
    }
}

#[test]
fn missing_instance_is_an_io_error() {
    let dir = TempDir::new().unwrap();
    let missing = dir.path().join("absent.json");
    let o = kserver(&["run", "--instance", s(&missing), "--algo", "wfa"]);
    assert_eq!(o.status.code(), Some(4));
}

#[test]
fn corrupted_instances_are_input_errors() {
    let dir = TempDir::new().unwrap();
    let cases = [
        ("truncated", r#"{"n":3,"k":2,"dist":[[0,1"#),
        (
            "asymmetric",
            r#"{"n":3,"k":2,"dist":[[0,1,3],[2,0,2],[3,2,0]],"initial":[0,1],"requests":[]}"#,
        ),
        (
            "triangle",
            r#"{"n":3,"k":2,"dist":[[0,1,9],[1,0,2],[9,2,0]],"initial":[0,1],"requests":[]}"#,
        ),
        (
            "out of range",
            r#"{"n":3,"k":2,"dist":[[0,1,3],[1,0,2],[3,2,0]],"initial":[0,1],"requests":[7]}"#,
        ),
        (
            "duplicate",
            r#"{"n":3,"k":2,"dist":[[0,1,3],[1,0,2],[3,2,0]],"initial":[1,1],"requests":[]}"#,
        ),
    ];
    for (name, body) in cases {
        let inst = put(&dir, "bad.json", body);
        let o = kserver(&["run", "--instance", s(&inst), "--algo", "opt"]);
        assert_eq!(o.status.code(), Some(2), "{name}: {}", stderr(&o));
        assert!(!stderr(&o).is_empty());
    }
}

#[test]
fn verify_m3_passes_and_writes_report() {
    let dir = TempDir::new().unwrap();
    let inst = put(&dir, "m3.json", M3);
    let report = dir.path().join("report.json");
    let o = kserver(&["verify", "--instance", s(&inst), "--report-out", s(&report)]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let json: serde_json::Value = serde_json::from_str(&fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(json["m"], 13);
    assert_eq!(json["ell"], 1);
    assert_eq!(json["checks"].as_array().unwrap().len(), 9);
}

#[test]
fn verify_with_empty_prefix() {
    let dir = TempDir::new().unwrap();
    let inst = put(&dir, "empty.json", &M3.replace("[2]", "[]"));
    let o = kserver(&["verify", "--instance", s(&inst)]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
}

#[test]
fn verify_rejects_invalid_parameters() {
    let dir = TempDir::new().unwrap();
    let inst = put(&dir, "m3.json", M3);
    let o = kserver(&["verify", "--instance", s(&inst), "--alpha", "0"]);
    assert_eq!(o.status.code(), Some(2));
    let o = kserver(&["verify", "--instance", s(&inst), "--q", "0"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn failed_check_exits_one_after_writing_the_report() {
    let dir = TempDir::new().unwrap();
    let inst = dir.path().join("g.json");
    let report = dir.path().join("report.json");
    let o = kserver(&[
        "gen",
        "--n",
        "4",
        "--k",
        "3",
        "--rho-len",
        "30",
        "--seed",
        "1",
        "--request-model",
        "greedy_adversary",
        "--out",
        s(&inst),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let o = kserver(&[
        "verify",
        "--instance",
        s(&inst),
        "--alpha",
        "1",
        "--report-out",
        s(&report),
    ]);
    assert_eq!(o.status.code(), Some(1), "{}", stdout(&o));
    let json: serde_json::Value = serde_json::from_str(&fs::read_to_string(&report).unwrap()).unwrap();
    let t1 = json["checks"]
        .as_array()
        .unwrap()
        .iter()
        .find(|c| c["id"] == "T1")
        .unwrap();
    assert_eq!(t1["status"], "fail");
}

#[test]
fn failing_campaign_still_writes_every_row() {
    let dir = TempDir::new().unwrap();
    let config = put(
        &dir,
        "alpha1.json",
        r#"{"seeds":[1,20],"n":[4,4],"k":[3,3],"rho_len":[30,30],"request_model":"greedy_adversary","alpha":1}"#,
    );
    let csv = dir.path().join("out.csv");
    let o = kserver(&["campaign", "--config", s(&config), "--out", s(&csv)]);
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
    let text = fs::read_to_string(&csv).unwrap();
    assert_eq!(text.lines().count(), 21);
    assert!(text.contains(",fail,"));
}

#[test]
fn default_campaign_passes() {
    let dir = TempDir::new().unwrap();
    let config = put(
        &dir,
        "desk.json",
        r#"{"seeds":[1,100],"n":[4,8],"k":[2,3],"rho_len":[0,12],"request_model":"uniform"}"#,
    );
    let csv = dir.path().join("out.csv");
    let o = kserver(&["campaign", "--config", s(&config), "--out", s(&csv)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = fs::read_to_string(&csv).unwrap();
    assert_eq!(text.lines().count(), 101);
    assert!(text.starts_with("instance_id,seed,n,k,rho_len,m,ell,beta_used,"));
}

#[test]
fn empty_campaign_writes_only_the_header() {
    let dir = TempDir::new().unwrap();
    let config = put(
        &dir,
        "empty.json",
        r#"{"seeds":[5,4],"n":[4,8],"k":[2,3],"rho_len":[0,12],"request_model":"uniform"}"#,
    );
    let csv = dir.path().join("out.csv");
    let o = kserver(&["campaign", "--config", s(&config), "--out", s(&csv)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(fs::read_to_string(&csv).unwrap().lines().count(), 1);
}

#[test]
fn campaign_rejects_unknown_request_model() {
    let dir = TempDir::new().unwrap();
    let config = put(
        &dir,
        "bad.json",
        r#"{"seeds":[1,3],"n":[4,8],"k":[2,3],"rho_len":[0,12],"request_model":"zigzag"}"#,
    );
    let csv = dir.path().join("out.csv");
    let o = kserver(&["campaign", "--config", s(&config), "--out", s(&csv)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!csv.exists());
}

#[test]
fn help_lists_every_check() {
    let o = kserver(&["verify", "--help"]);
    let text = stdout(&o);
    for id in ["P1", "E1", "C1a", "C1b", "C2", "E2", "E3", "R1", "T1"] {
        assert!(text.contains(id), "{id} missing from help");
    }
}
