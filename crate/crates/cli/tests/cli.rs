use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use relu_forge::format::network_from_json;
use relu_forge::Rational;
use serde_json::Value;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_relu-forge"));
    c.env_remove("RELU_FORGE_TERM_LIMIT");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn synth(dir: &Path, name: &str, extra: &[&str]) -> (PathBuf, Output) {
    let out = dir.join(name);
    let mut args = vec!["synth", "--out", p(&out)];
    args.extend_from_slice(extra);
    let o = run(&args);
    (out, o)
}

#[test]
fn synth_depths_and_stats_line() {
    let dir = tempfile::tempdir().unwrap();
    let (_, o) = synth(dir.path(), "t8.json", &["--target", "max", "--n", "8", "--method", "tree"]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o).trim(), "hidden_layers=3 neurons=21 dyadic=true");
    let (f, o) = synth(dir.path(), "m5.json", &["--target", "max", "--n", "5", "--method", "ternary"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).starts_with("hidden_layers=2 "));
    let net = network_from_json(&std::fs::read_to_string(f).unwrap()).unwrap();
    assert_eq!(net.hidden_layers(), 2);
    let (_, o) = synth(dir.path(), "o5.json", &["--target", "max", "--n", "5", "--method", "ternary", "--opt"]);
    assert_eq!(stdout(&o).trim(), "hidden_layers=2 neurons=24 dyadic=true");
}

#[test]
fn synth_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["--target", "max", "--n", "7", "--method", "ternary", "--opt"];
    let (a, _) = synth(dir.path(), "a.json", &args);
    let (b, _) = synth(dir.path(), "b.json", &args);
    assert_eq!(std::fs::read(a).unwrap(), std::fs::read(b).unwrap());
}

#[test]
fn term_guard_and_fallback() {
    let dir = tempfile::tempdir().unwrap();
    let (_, o) = synth(dir.path(), "x.json", &["--target", "max", "--n", "12", "--method", "ternary"]);
    assert_eq!(code(&o), 3);
    let err = stderr(&o);
    assert!(err.contains("RELU_FORGE_TERM_LIMIT") && err.contains("--fallback-five"), "{err}");
    let (_, o) = synth(dir.path(), "x.json", &["--target", "max", "--n", "12", "--method", "ternary", "--fallback-five"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).starts_with("hidden_layers=4 "));
    let o = bin()
        .env("RELU_FORGE_TERM_LIMIT", "5")
        .args(["synth", "--target", "max", "--n", "5", "--method", "ternary", "--out", p(&dir.path().join("y.json"))])
        .output()
        .unwrap();
    assert_eq!(code(&o), 3);
}

#[test]
fn input_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&run(&["synth", "--target", "max", "--method", "tree", "--out", "x"])), 2);
    assert_eq!(code(&run(&["synth", "--target", "max", "--n", "3", "--method", "binary", "--out", "x"])), 2);
    assert_eq!(code(&run(&["frobnicate"])), 2);
    assert_eq!(code(&run(&["verify", "--net", "/nonexistent.json", "--against", "max", "--mode", "exact"])), 2);
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"format":"relu-net/1","input_dim":2,"layers":[{"weights":[["1"]],"bias":["0"],"activation":"none"}]}"#).unwrap();
    assert_eq!(code(&run(&["inspect", "--net", p(&bad)])), 2);
    assert_eq!(code(&run(&["verify", "--net", p(&bad), "--against", "maximum", "--mode", "random"])), 2);
    assert_eq!(code(&run(&["bench", "--n-max", "x"])), 2);
}

#[test]
fn verify_exact_random_and_corrupted() {
    let dir = tempfile::tempdir().unwrap();
    let (m5, _) = synth(dir.path(), "m5.json", &["--target", "max", "--n", "5", "--method", "ternary"]);
    let o = run(&["verify", "--net", p(&m5), "--against", "max", "--mode", "exact"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let report: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(report["verdict"], "equivalent");
    assert!(report["regions_enumerated"].as_u64().unwrap() > 0);

    let o = run(&["verify", "--net", p(&m5), "--against", "max", "--mode", "random", "--samples", "300", "--seed", "4"]);
    assert_eq!(code(&o), 0);
    let report: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(report["samples_tested"], 300);

    let (tree, _) = synth(dir.path(), "t5.json", &["--target", "max", "--n", "5", "--method", "tree"]);
    let against = format!("net:{}", p(&tree));
    assert_eq!(code(&run(&["verify", "--net", p(&m5), "--against", &against, "--mode", "random", "--samples", "200"])), 0);

    // flip one first-layer weight
    let text = std::fs::read_to_string(&m5).unwrap();
    let mut v: Value = serde_json::from_str(&text).unwrap();
    let w = &mut v["layers"][0]["weights"][0][0];
    *w = Value::String(if w == "0" { "1".into() } else { "0".into() });
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, serde_json::to_string(&v).unwrap()).unwrap();
    let bad_net = network_from_json(&std::fs::read_to_string(&bad).unwrap()).unwrap();
    for mode in ["exact", "random"] {
        let o = run(&["verify", "--net", p(&bad), "--against", "max", "--mode", mode]);
        assert_eq!(code(&o), 1, "{mode}");
        let report: Value = serde_json::from_str(&stdout(&o)).unwrap();
        assert_eq!(report["verdict"], "counterexample");
        let x: Vec<Rational> = serde_json::from_value(report["witness"].clone()).unwrap();
        assert_ne!(bad_net.eval(&x).unwrap()[0], x.iter().max().unwrap().clone());
    }

    let o = run(&["verify", "--net", p(&m5), "--against", "max", "--mode", "exact", "--cap", "20"]);
    assert_eq!(code(&o), 4);
    let report: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(report["verdict"], "inconclusive");
}

#[test]
fn cpwl_target() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().join("d.json");
    std::fs::write(
        &d,
        r#"{"format":"cpwl-decomp/1","n":1,"terms":[{"sign":1,"matrix":[["1"],["-1"]],"bias":["0","0"]}]}"#,
    )
    .unwrap();
    let (f, o) = synth(dir.path(), "abs.json", &["--target", "cpwl", "--decomp", p(&d), "--method", "ternary"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let net = network_from_json(&std::fs::read_to_string(f).unwrap()).unwrap();
    assert_eq!(net.eval(&[Rational::new(-7, 2)]).unwrap(), vec![Rational::new(7, 2)]);
    let (_, o) = synth(dir.path(), "x.json", &["--target", "cpwl", "--method", "ternary"]);
    assert_eq!(code(&o), 2);
    std::fs::write(&d, r#"{"format":"cpwl-decomp/1","n":1,"terms":[{"sign":2,"matrix":[["1"],["-1"]],"bias":["0","0"]}]}"#).unwrap();
    let (_, o) = synth(dir.path(), "x.json", &["--target", "cpwl", "--decomp", p(&d), "--method", "tree"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn geometry_commands() {
    let o = run(&["geom", "simplex3"]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    let out = stdout(&o);
    assert!(out.lines().all(|l| l.starts_with("PASS ")));
    assert!(out.contains("full additivity over 15 subsets: 200 directions"));
    assert_eq!(code(&run(&["geom", "lift4", "--directions", "50"])), 0);

    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("c.json");
    let write = |s: &str| std::fs::write(&file, s).unwrap();
    write(r#"{"dim":1,"ambient":[["0"],["2"]],"pieces":[{"name":"a","vertices":[["0"],["1"]]},{"name":"b","vertices":[["1"],["2"]]}]}"#);
    let o = run(&["geom", "check-subdivision", "--complex", p(&file), "--directions", "40", "--seed", "3"]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));

    write(r#"{"dim":1,"ambient":[["0"],["3"]],"pieces":[{"name":"a","vertices":[["0"],["2"]]},{"name":"b","vertices":[["1"],["2"]]},{"name":"c","vertices":[["2"],["3"]]},{"name":"d","vertices":[["0"],["1/2"]]}]}"#);
    let o = run(&["geom", "check-subdivision", "--complex", p(&file)]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("{b, d}") || stderr(&o).contains("{c, d}"), "{}", stderr(&o));

    write(r#"{"dim":1,"ambient":[["0"],["3"]],"pieces":[{"name":"a","vertices":[["0"],["2"]]}]}"#);
    let o = run(&["geom", "check-subdivision", "--complex", p(&file)]);
    assert_eq!(code(&o), 1);
    assert!(stdout(&o).contains("FAIL full additivity"));
    assert!(stdout(&o).contains("direction ("));

    write(r#"{"dim":1,"ambient":[["0"],["2"]],"pieces":[{"name":"a","vertices":[["0","1"]]}]}"#);
    assert_eq!(code(&run(&["geom", "check-subdivision", "--complex", p(&file)])), 2);
}

#[test]
fn bench_table() {
    let o = run(&["bench", "--n-max", "12"]);
    assert_eq!(code(&o), 0);
    let out = stdout(&o);
    let rows: Vec<Vec<&str>> = out.lines().map(|l| l.split(',').collect()).collect();
    assert_eq!(rows[0], ["n", "method", "hidden_layers", "neurons_raw", "neurons_after_cse", "dyadic"]);
    let row = |n: &str, m: &str| rows.iter().find(|r| r[0] == n && r[1] == m).unwrap().clone();
    assert_eq!(row("5", "ternary")[2], "2");
    assert_eq!(row("5", "tree")[2], "3");
    assert_eq!(row("11", "ternary")[2], "3");
    assert_eq!(row("11", "tree")[2], "4");
    assert_eq!(row("4", "ternary")[2], row("4", "tree")[2]);
    assert_eq!(row("12", "ternary")[2], "skipped");
    for r in &rows[1..] {
        if r[2] != "skipped" {
            assert!(r[4].parse::<usize>().unwrap() <= r[3].parse::<usize>().unwrap());
            assert_eq!(r[5], "true");
        }
    }
    let again = run(&["bench", "--n-max", "12"]);
    assert_eq!(again.stdout, o.stdout);
}

#[test]
fn inspect_and_opt() {
    let dir = tempfile::tempdir().unwrap();
    let (m5, _) = synth(dir.path(), "m5.json", &["--target", "max", "--n", "5", "--method", "ternary"]);
    let o = run(&["inspect", "--net", p(&m5)]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("hidden_layers=2 neurons=85 dyadic=true"));
    assert!(stdout(&o).contains("input_dim=5 output_dim=1"));
    let out = dir.path().join("small.json");
    let o = run(&["opt", "--net", p(&m5), "--out", p(&out)]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o).trim(), "hidden_layers=2 neurons=24 dyadic=true");
    let tree = synth(dir.path(), "t5.json", &["--target", "max", "--n", "5", "--method", "tree"]).0;
    let o = run(&["verify", "--net", p(&out), "--against", &format!("net:{}", p(&tree)), "--mode", "exact"]);
    assert_eq!(code(&o), 0);
}
