use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use coarse_cut::format::read_cgw;

fn bin(cache: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_coarse-cut"))
        .env("COARSE_CUT_CACHE", cache)
        .args(args)
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn every_generator_writes_a_readable_window() {
    let dir = tempfile::tempdir().unwrap();
    let cases: &[(&str, &[&str], usize)] = &[
        ("tree", &["tree", "--valence", "3", "--b-min", "-2", "--depth-below", "1"], 7),
        ("product", &["product", "--depth", "1"], 49),
        ("dl", &["dl", "--band", "1", "--depth", "1"], 0),
        ("grid", &["grid", "--halfwidth", "2"], 25),
        ("wreath", &["wreath", "--radius", "2"], 0),
    ];
    for (name, args, expect) in cases {
        let path = dir.path().join(format!("{name}.cgw"));
        let mut full = vec!["generate"];
        full.extend_from_slice(args);
        full.extend_from_slice(&["--out", path.to_str().unwrap()]);
        let o = bin(dir.path(), &full);
        assert!(o.status.success(), "{name}: {}", String::from_utf8_lossy(&o.stderr));
        let w = read_cgw(&fs::read_to_string(&path).unwrap()).unwrap();
        assert!(!w.is_empty(), "{name}");
        if *expect > 0 {
            assert_eq!(w.len(), *expect, "{name}");
        }
    }
}

#[test]
fn cut_on_a_generated_grid() {
    let dir = tempfile::tempdir().unwrap();
    let g = dir.path().join("g.cgw");
    let o = bin(dir.path(), &["generate", "grid", "--halfwidth", "2", "--out", g.to_str().unwrap()]);
    assert!(o.status.success());
    let o = bin(
        dir.path(),
        &["invariant", "cut", "--graph", g.to_str().unwrap(), "--r", "1", "--delta", "1/2"],
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("kind,params,lower,exact,upper"));
}

#[test]
fn generate_cache_hits_on_second_request() {
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().join("cache");
    let args = ["generate", "grid", "--halfwidth", "3", "--cache"];
    let first = bin(&cache, &args);
    let second = bin(&cache, &args);
    assert!(first.status.success() && second.status.success());
    assert_eq!(first.stdout, second.stdout);
    assert_eq!(fs::read_dir(cache.join("objects")).unwrap().count(), 1);
}

#[test]
fn experiments_are_deterministic_and_report_regenerates() {
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().join("cache");
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for out in [&a, &b] {
        let o = bin(&cache, &["experiment", "run", "--name", "exp:grid-scan", "--out", out.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    }
    for file in ["grid-scan.csv", "grid-scan.svg"] {
        assert_eq!(fs::read(a.join(file)).unwrap(), fs::read(b.join(file)).unwrap(), "{file}");
    }
    let svg = fs::read(a.join("grid-scan.svg")).unwrap();
    fs::remove_file(a.join("grid-scan.svg")).unwrap();
    let o = bin(&cache, &["experiment", "report", "--out", a.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(fs::read(a.join("grid-scan.svg")).unwrap(), svg);
}

#[test]
fn failing_and_bad_invocations_have_distinct_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let o = bin(dir.path(), &["experiment", "run", "--name", "exp:tree-cut", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let o = bin(dir.path(), &["experiment", "run", "--name", "exp:nope", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
    assert_eq!(bin(dir.path(), &["invariant"]).status.code(), Some(3));
    assert_eq!(bin(dir.path(), &["--help"]).status.code(), Some(0));
    let list = bin(dir.path(), &["experiment", "list"]);
    assert_eq!(stdout(&list).lines().filter(|l| l.starts_with("exp:")).count(), 8);
}
