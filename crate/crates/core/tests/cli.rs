use std::path::Path;
use std::process::{Command, Output};

fn intval(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_intval"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn construct_then_verify_from_disk() {
    let dir = tempfile::tempdir().unwrap();
    let o = intval(&["construct-lengths", "2,2", "--out", "a.json"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "n=2 lengths=[2,2] degree=7 factorizations=2\n");
    let v = intval(&["verify", "a.json"], dir.path());
    assert_eq!(v.status.code(), Some(0), "{}", stdout(&v));
    assert!(stdout(&v).lines().all(|l| !l.starts_with("FAIL")));
}

#[test]
fn identical_arguments_give_identical_json() {
    let dir = tempfile::tempdir().unwrap();
    for name in ["x.json", "y.json"] {
        let o = intval(&["construct-lengths", "2,3", "--c-extra", "3^2", "--out", name], dir.path());
        assert_eq!(o.status.code(), Some(0));
    }
    let x = std::fs::read(dir.path().join("x.json")).unwrap();
    let y = std::fs::read(dir.path().join("y.json")).unwrap();
    assert_eq!(x, y);

    let a = intval(&["construct-transfer", "2", "--json"], dir.path());
    let b = intval(&["construct-transfer", "2", "--json"], dir.path());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn tampered_artifact_fails_with_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    intval(&["construct-transfer", "2", "--out", "t.json"], dir.path());
    let path = dir.path().join("t.json");
    let text = std::fs::read_to_string(&path).unwrap();
    let mut doc: serde_json::Value = serde_json::from_str(&text).unwrap();
    let a0: i64 = doc["a"][0].as_str().unwrap().parse().unwrap();
    doc["a"][0] = serde_json::Value::String((a0 + 1).to_string());
    std::fs::write(&path, serde_json::to_string_pretty(&doc).unwrap()).unwrap();
    let v = intval(&["verify", "t.json", "--quiet"], dir.path());
    assert_eq!(v.status.code(), Some(1));
    assert!(stdout(&v).contains("FAIL identity"), "{}", stdout(&v));
}

#[test]
fn malformed_artifact_is_an_input_error() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("bad.json"), "{\"kind\":\"prescribed\"}").unwrap();
    let v = intval(&["verify", "bad.json"], dir.path());
    assert_eq!(v.status.code(), Some(2));
    let err = String::from_utf8_lossy(&v.stderr);
    assert_eq!(err.lines().count(), 1, "{err}");
}

#[test]
fn factorize_both_routes() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("parts.txt"), "[0,1]\n[-1,1]\n").unwrap();
    let lemma = intval(&["factorize", "--parts", "parts.txt", "--den", "2"], dir.path());
    let oracle = intval(&["factorize", "--parts", "parts.txt", "--den", "2", "--oracle"], dir.path());
    assert_eq!(lemma.status.code(), Some(0));
    assert_eq!(lemma.stdout, oracle.stdout);
    assert!(stdout(&lemma).ends_with("factorizations=1 lengths=[1]\n"), "{}", stdout(&lemma));

    let json = intval(&["factorize", "--parts", "parts.txt", "--den", "2", "--json"], dir.path());
    let doc: serde_json::Value = serde_json::from_slice(&json.stdout).unwrap();
    assert_eq!(doc["route"], "lemma");
    assert_eq!(doc["lengths"], serde_json::json!([1]));
}

#[test]
fn factorize_rejects_wrong_denominator() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("parts.json"), "[\"[0,1]\", \"[-1,1]\"]").unwrap();
    let o = intval(&["factorize", "--parts", "parts.json", "--den", "3"], dir.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn one_liners() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(stdout(&intval(&["fixdiv", "[0,-1,1]"], dir.path())), "2\n");
    assert_eq!(stdout(&intval(&["member", "[0,-1,1]/2"], dir.path())), "true\n");
    assert_eq!(intval(&["construct-lengths", "1"], dir.path()).status.code(), Some(2));
    assert_eq!(intval(&[], dir.path()).status.code(), Some(2));
    assert_eq!(intval(&["--help"], dir.path()).status.code(), Some(0));
}
