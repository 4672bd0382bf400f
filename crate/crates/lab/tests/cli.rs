use std::fs;
use std::process::{Command, Output};

fn partlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_partlab"))
        .args(args)
        .env_remove("PARTLAB_CACHE_DIR")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn explicit_sweep_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("explicit.csv");
    let o = partlab(&["verify", "--suite", "explicit", "--range", "2:1000", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    let text = fs::read_to_string(&out).unwrap();
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(rows.len(), 999);
    assert!(rows.iter().all(|r| r.ends_with(",Holds")));
    assert!(rows[0].starts_with("explicit,n=2,"));
}

#[test]
fn exit_status_follows_verdicts() {
    assert_eq!(partlab(&["verify", "--suite", "control", "--range", "2:50"]).status.code(), Some(1));
    assert_eq!(partlab(&["verify", "--suite", "upper", "--range", "1:50"]).status.code(), Some(0));
    assert_eq!(partlab(&["verify", "--suite", "window", "--range", "3:20", "--d", "1"]).status.code(), Some(0));
}

#[test]
fn usage_errors() {
    for args in [
        &["verify", "--suite", "explicit", "--range", "1:10"][..],
        &["verify", "--suite", "window", "--range", "2:10"],
        &["verify", "--suite", "dagger", "--range", "18:40"],
        &["verify", "--suite", "nope", "--range", "2:10"],
        &["sample", "--m", "10", "--trials", "5"],
        &["model", "--partition", "[3]", "--m", "2"],
        &["model", "--flips", "HTX"],
        &["moments", "--m", "25", "--exact-enum"],
        &["thresholds", "--eta", "0"],
    ] {
        let o = partlab(args);
        assert_eq!(o.status.code(), Some(2), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    }
}

#[test]
fn informational_commands() {
    let o = partlab(&["model", "--partition", "[6,4,2,2]", "--m", "10"]);
    assert!(stdout(&o).starts_with("flips: HTTHHTHHTH\n"));
    let o = partlab(&["model", "--flips", "HHT", "--format", "json"]);
    let doc: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(doc["contributions"], serde_json::json!([0, 0, 2]));
    assert_eq!(doc["size"], 3);
    assert_eq!(stdout(&partlab(&["count", "--n", "100"])), "190569292\n");
    assert_eq!(
        stdout(&partlab(&["thresholds", "--eta", "1000"])),
        "eta=1000/1 threshold=3 holds_next_100=true\n"
    );
    let o = partlab(&["thresholds", "--epsilon", "10", "--max", "500"]);
    assert_eq!(stdout(&o), "epsilon=10/1 threshold=2 scanned_max=500 last_failure=1\n");
}

#[test]
fn moments_report() {
    let o = partlab(&["moments", "--m", "6", "--exact-enum", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let doc: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(doc["moments"][0]["closed_form"], "27/4");
    assert_eq!(doc["all_uncorrelated"], true);
    assert!(doc["covariances"].as_array().unwrap().iter().all(|c| c["covariance"] == "0/1"));
    let csv = stdout(&partlab(&["moments", "--m", "10"]));
    assert!(csv.contains("E[N],65/4,,\n"), "{csv}");
}

#[test]
fn sample_is_reproducible() {
    let args = ["sample", "--m", "50", "--trials", "3000", "--seed", "7", "--d", "1.5", "--d", "sqrt(3)"];
    let a = partlab(&args);
    assert_eq!(a.stdout, partlab(&args).stdout);
    assert_eq!(stdout(&a).lines().count(), 3);
}

#[test]
fn table_cache() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_partlab"))
        .args(["table", "--max", "300"])
        .env("PARTLAB_CACHE_DIR", dir.path())
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    let path = dir.path().join("partition-table.txt");
    let text = fs::read_to_string(&path).unwrap();
    assert!(text.starts_with("PARTITION-TABLE v1 max_n=300\n1\n1\n2\n3\n5\n7\n"));
    assert_eq!(text.lines().count(), 302);
    // A tampered cache is refused rather than used.
    fs::write(&path, text.replacen("\n7\n", "\n8\n", 1)).unwrap();
    let o = partlab(&["count", "--n", "5", "--cache", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(4));
}
