use assert_cmd::Command;
use stobon::village::{run_protocol, ScenarioSpec};
use stobon::{Trace, GRAMMAR};

fn stobon() -> Command {
    let mut cmd = Command::cargo_bin("stobon").unwrap();
    cmd.env_remove("STOBON_MAX_WORLDS");
    cmd
}

fn stdout_of(args: &[&str]) -> (String, i32) {
    let out = stobon().args(args).output().unwrap();
    (String::from_utf8(out.stdout).unwrap(), out.status.code().unwrap())
}

#[test]
fn simulate_table() {
    let (out, code) = stdout_of(&["simulate", "--men", "5", "--unfaithful", "1,2,3"]);
    assert_eq!(code, 0);
    let rows: Vec<&str> = out.lines().collect();
    assert!(rows[1].trim_start().starts_with("1  no killings"));
    assert!(rows[2].trim_start().starts_with("2  no killings"));
    assert!(rows[3].trim_start().starts_with("3  killed: 1,2,3"));
}

#[test]
fn simulate_json_round_trips() {
    let (out, code) = stdout_of(&["simulate", "--men", "6", "--unfaithful", "2,5", "--format", "json"]);
    assert_eq!(code, 0);
    let trace = Trace::from_json(&out).unwrap();
    assert_eq!(trace, run_protocol(&ScenarioSpec::new(6, [2, 5])).unwrap());
}

#[test]
fn engines_emit_identical_json() {
    for n in 1..=10usize {
        for k in 1..=n {
            let men = (1..=k).map(|i| i.to_string()).collect::<Vec<_>>().join(",");
            let n = n.to_string();
            let base = ["simulate", "--men", &n, "--unfaithful", &men, "--format", "json", "--engine"];
            let exact = stdout_of(&[&base[..], &["exact"]].concat());
            let fast = stdout_of(&[&base[..], &["fast"]].concat());
            assert_eq!(exact, fast, "n={n} k={k}");
        }
    }
}

#[test]
fn output_is_deterministic() {
    let args = ["simulate", "--men", "7", "--unfaithful", "1,4,6", "--format", "json"];
    let first = stobon().args(args).output().unwrap();
    let second = stobon().args(args).output().unwrap();
    assert_eq!(first, second);
}

#[test]
fn check_exit_codes() {
    stobon().args(["check", "--formula", "u1", "--village", "3", "--unfaithful", "1,2"]).assert().success().stdout("true\n");
    stobon()
        .args(["check", "--formula", "K[w1] u1", "--village", "1", "--unfaithful", "1"])
        .assert()
        .code(1)
        .stdout("false\n");
    stobon()
        .args(["check", "--formula", "K[w1] u1", "--village", "1", "--unfaithful", "1", "--post-oracle"])
        .assert()
        .success();
    stobon().args(["check", "--formula", "K[a", "--village", "2"]).assert().code(2);
    stobon().args(["check", "--formula", "u9", "--village", "2"]).assert().code(2);
    stobon().args(["check", "--formula", "u1"]).assert().code(2);
    stobon()
        .args(["check", "--formula", "u1", "--village", "2", "--unfaithful", "1", "--model", "x.json"])
        .assert()
        .code(2);
    stobon().args(["check", "--formula", "u1", "--village", "2", "--post-oracle"]).assert().code(3);
}

#[test]
fn check_on_model_file() {
    let dir = tempfile_dir();
    let path = dir.join("model.json");
    std::fs::write(
        &path,
        r#"{"agents":["a","b"],"atoms":["p"],
            "worlds":[{"id":"s","atoms":["p"]},{"id":"t","atoms":[]}],
            "relations":{"a":[["s","t"]],"b":[["s"],["t"]]},"actual":"s"}"#,
    )
    .unwrap();
    let p = path.to_str().unwrap();
    stobon().args(["check", "--formula", "K[b] p & ~K[a] p", "--model", p]).assert().success();
    stobon().args(["check", "--formula", "C p", "--model", p]).assert().code(1);

    let bad = dir.join("bad.json");
    std::fs::write(
        &bad,
        r#"{"agents":["a"],"atoms":[],"worlds":[{"id":"s","atoms":[]}],"relations":{"a":[["s"],["s"]]},"actual":"s"}"#,
    )
    .unwrap();
    let out = stobon().args(["check", "--formula", "true", "--model", bad.to_str().unwrap()]).output().unwrap();
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("overlapping blocks"));
}

fn tempfile_dir() -> std::path::PathBuf {
    let dir = std::env::temp_dir().join(format!("stobon-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

#[test]
fn info_reports_zero_bits_for_the_obvious() {
    let (out, code) = stdout_of(&["info", "--agent", "w1", "--formula", "u1|u2", "--village", "2", "--unfaithful", "1,2"]);
    assert_eq!(code, 0);
    assert!(out.contains("probability: 1\n"));
    assert!(out.contains("information: 0 bits\n"));
    let (out, _) = stdout_of(&[
        "info", "--agent", "w1", "--formula", "E (u1|u2)", "--village", "2", "--unfaithful", "1,2", "--format", "json",
    ]);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["probability"], "1/2");
    assert_eq!(v["bits"], 1.0);
    let (out, _) = stdout_of(&["info", "--agent", "w1", "--formula", "false", "--village", "1"]);
    assert!(out.contains("impossible event"));
    stobon().args(["info", "--agent", "w7", "--formula", "u1", "--village", "2"]).assert().code(2);
}

#[test]
fn verify_sweeps() {
    stobon()
        .args(["verify", "--assertion", "T", "--max-n", "8"])
        .assert()
        .success()
        .stdout("T holds for all 1≤k≤n≤8 (36 instances)\n");
    stobon().args(["verify", "--assertion", "S", "--max-n", "6"]).assert().success();
    stobon().args(["verify", "--assertion", "T", "--max-n", "13"]).assert().code(3);
    stobon().args(["verify", "--assertion", "X"]).assert().code(2);
}

#[test]
fn simulate_domain_errors() {
    let out = stobon().args(["simulate", "--men", "1", "--unfaithful", "1", "--deviant", "1"]).output().unwrap();
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stdout).contains("collapsed at morning 1"));
    assert!(String::from_utf8_lossy(&out.stderr).contains("collapsed"));
    stobon().args(["simulate", "--men", "3"]).assert().code(3);
    stobon().args(["simulate", "--men", "3", "--unfaithful", "1", "--deviant", "1", "--engine", "fast"]).assert().code(3);
    stobon().args(["simulate", "--men", "3", "--unfaithful", "1,2", "--max-mornings", "1"]).assert().code(3);
    stobon().args(["simulate", "--men", "3", "--unfaithful", "4"]).assert().code(3);
    stobon().args(["simulate", "--men", "3", "--engine", "both"]).assert().code(2);
}

#[test]
fn world_limit_override() {
    stobon().args(["simulate", "--men", "25", "--unfaithful", "1"]).assert().code(3);
    stobon().args(["simulate", "--men", "4", "--unfaithful", "1"]).env("STOBON_MAX_WORLDS", "8").assert().code(3);
    stobon().args(["simulate", "--men", "3", "--unfaithful", "1"]).env("STOBON_MAX_WORLDS", "8").assert().success();
    stobon().args(["simulate", "--men", "3", "--unfaithful", "1"]).env("STOBON_MAX_WORLDS", "lots").assert().code(2);
}

#[test]
fn grammar_and_schema() {
    stobon().arg("grammar").assert().success().stdout(GRAMMAR);
    let (out, code) = stdout_of(&["schema"]);
    assert_eq!(code, 0);
    let schema: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(schema["properties"]["relations"]["type"], "object");
}
