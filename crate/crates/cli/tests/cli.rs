use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/data").join(name)
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn tpda(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tpda")).args(args).output().expect("runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

/// Compares against `tests/snapshots/<name>`; set UPDATE_SNAPSHOTS=1 to rewrite.
fn snapshot(name: &str, got: &str) {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/snapshots").join(name);
    if std::env::var_os("UPDATE_SNAPSHOTS").is_some() {
        std::fs::write(&path, got).unwrap();
        return;
    }
    let want = std::fs::read_to_string(&path).unwrap_or_else(|_| panic!("missing snapshot {name}"));
    assert_eq!(got, want, "snapshot {name} changed");
}

/// Timing is the only field that varies between runs.
fn mask_time(v: &mut Value) {
    match v {
        Value::Object(m) => {
            if m.contains_key("time_ms") {
                m.insert("time_ms".into(), Value::from(0));
            }
            m.values_mut().for_each(mask_time);
        }
        Value::Array(a) => a.iter_mut().for_each(mask_time),
        _ => {}
    }
}

fn json_of(o: &Output) -> String {
    let mut v: Value = serde_json::from_slice(&o.stdout).expect("valid JSON");
    mask_time(&mut v);
    serde_json::to_string_pretty(&v).unwrap() + "\n"
}

#[test]
fn trivial_ta_is_nonempty() {
    let o = tpda(&["check", p(&fixture("trivial.ta")), "--witness"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "NONEMPTY\n(a, 0) (b, 1)\n");
}

#[test]
fn empty_is_a_successful_decision() {
    let o = tpda(&["check", p(&fixture("empty.ta"))]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "EMPTY\n");
}

#[test]
fn input_errors_exit_1() {
    let o = tpda(&["check", p(&fixture("bad.ta"))]);
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("line 6") && err.contains("undeclared state `q`"), "{err}");
    assert_eq!(tpda(&["check", "/no/such/file"]).status.code(), Some(1));
    assert_eq!(tpda(&["check", p(&fixture("trivial.ta")), "--param", "m=1"]).status.code(), Some(1));
}

#[test]
fn fig5_witness_ends_at_exit_at_15() {
    let o = tpda(&["check", p(&data("fig5.maze")), "--param", "m=7", "--param", "n=8", "--witness"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    let mut lines = out.lines();
    assert_eq!(lines.next(), Some("NONEMPTY"));
    let run = lines.next().unwrap();
    assert!(run.starts_with("(start, 0) (p6.0, 0)"), "{run}");
    assert!(run.ends_with("(p2.1, 15)"), "{run}");
}

#[test]
fn state_cap_exits_2() {
    let o = tpda(&["check", p(&data("fig5.maze")), "--state-cap", "10"]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(stdout(&o), "UNDECIDED-CAPPED\n");
}

#[test]
fn compiled_maze_checks_nonempty() {
    let dir = tempfile::tempdir().unwrap();
    let sys = dir.path().join("fig5.tpda");
    let o = tpda(&["maze", p(&data("fig5.maze")), "--param", "m=7", "--param", "n=8", "-o", p(&sys)]);
    assert_eq!(o.status.code(), Some(0));
    let o = tpda(&["check", p(&sys), "--aggressive"]);
    assert_eq!(stdout(&o), "NONEMPTY\n");
}

#[test]
fn engine_witness_verifies() {
    let dir = tempfile::tempdir().unwrap();
    let w = dir.path().join("w.json");
    let sys = data("windows.tpda");
    let o = tpda(&["check", p(&sys), "--witness-out", p(&w)]);
    assert_eq!(stdout(&o), "NONEMPTY\n");
    let o = tpda(&["verify", p(&sys), p(&w)]);
    assert_eq!((o.status.code(), stdout(&o).as_str()), (Some(0), "VALID\n"));

    // the full --json document is accepted too
    let doc = dir.path().join("doc.json");
    std::fs::write(&doc, tpda(&["check", p(&sys), "--json"]).stdout).unwrap();
    assert_eq!(stdout(&tpda(&["verify", p(&sys), p(&doc)])), "VALID\n");

    // move the last reply outside its window
    let mut v: Value = serde_json::from_str(&std::fs::read_to_string(&w).unwrap()).unwrap();
    let pos = v["positions"].as_array_mut().unwrap();
    let n = pos.len();
    pos[n - 1]["ts"] = Value::from(100);
    std::fs::write(&w, v.to_string()).unwrap();
    let o = tpda(&["verify", p(&sys), p(&w)]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stdout(&o).starts_with("INVALID: "), "{}", stdout(&o));
}

#[test]
fn bench_counts_are_reproducible_and_grow() {
    let maze = data("fig5.maze");
    let args = ["bench", p(&maze), "--sweep", "m,n=1..5", "--aggressive", "--no-time"];
    let a = stdout(&tpda(&args));
    assert_eq!(a, stdout(&tpda(&args)));
    let rows: Vec<(usize, usize)> = a
        .lines()
        .skip(1)
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            (f[1].parse().unwrap(), f[4].parse().unwrap())
        })
        .collect();
    assert_eq!(rows.len(), 5);
    // a larger M admits more states
    for w in rows.windows(2) {
        if w[0].0 < w[1].0 {
            assert!(w[0].1 < w[1].1, "{rows:?}");
        }
    }
    snapshot("bench_fig5.csv", &a);
}

#[test]
fn thread_count_keeps_counts() {
    let run = |t: &str| json_of(&tpda(&["check", p(&data("fig5.maze")), "--aggressive", "--json", "--threads", t]));
    assert_eq!(run("1"), run("3"));
}

#[test]
fn json_check_snapshot() {
    let o = tpda(&["check", p(&data("nested.tpda")), "--json", "--dump-term"]);
    snapshot("check_nested.json", &json_of(&o));
    let o = tpda(&["check", p(&fixture("empty.ta")), "--json"]);
    snapshot("check_empty.json", &json_of(&o));
}

#[test]
fn json_oracle_snapshot() {
    let o = tpda(&["oracle", p(&data("nested.tpda")), "--json"]);
    snapshot("oracle_nested.json", &json_of(&o));
    let o = tpda(&["oracle", p(&data("loop.tpda")), "--max-len", "4", "--witness"]);
    assert_eq!(stdout(&o), "NONEMPTY\n(p, 0) (p, 0) (q, 0) (q, 0) (r, 2)\n");
}

#[test]
fn json_maze_snapshot() {
    let o = tpda(&["maze", p(&fixture("small.maze")), "--json"]);
    snapshot("maze_small.json", &json_of(&o));
    let o = tpda(&["maze", p(&fixture("small.maze"))]);
    snapshot("maze_small.tpda", &stdout(&o));
}

#[test]
fn json_decompose_and_verify_snapshot() {
    let dir = tempfile::tempdir().unwrap();
    let w = dir.path().join("w.json");
    tpda(&["check", p(&data("nested.tpda")), "--witness-out", p(&w)]);
    snapshot("witness_nested.json", &std::fs::read_to_string(&w).unwrap());
    let o = tpda(&["decompose", p(&w), "--json"]);
    snapshot("decompose_nested.json", &json_of(&o));
    let o = tpda(&["verify", p(&data("nested.tpda")), p(&w), "--json"]);
    snapshot("verify_nested.json", &json_of(&o));
}
