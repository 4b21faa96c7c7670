use std::fs;
use std::path::{Path, PathBuf};

use clap::Parser;
use colred::cli::{main_with_args, run, Cli};
use colred::graph::validate_proper;
use colred::{ColorAssignment, ColoredGraph};
use serde_json::Value;

fn go(out: &Path, args: &[&str]) -> (PathBuf, Value) {
    let mut argv = vec!["colred", "--out", out.to_str().unwrap()];
    argv.extend_from_slice(args);
    let o = run(&Cli::try_parse_from(argv).unwrap()).unwrap();
    (o.dir, o.summary)
}

fn code(out: &Path, args: &[&str]) -> i32 {
    let mut argv = vec!["colred", "--out", out.to_str().unwrap()];
    argv.extend_from_slice(args);
    main_with_args(argv)
}

fn read_json(p: PathBuf) -> Value {
    serde_json::from_slice(&fs::read(p).unwrap()).unwrap()
}

fn snapshot(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), fs::read(e.path()).unwrap())
        })
        .collect();
    files.sort();
    files
}

#[test]
fn color_delta1_gives_proper_five_coloring() {
    let tmp = tempfile::tempdir().unwrap();
    let args = ["color", "--algo", "delta1", "--m", "1000000", "--delta", "4", "--n", "500", "--seed", "7", "--trace"];
    let (dir, summary) = go(tmp.path(), &args);
    assert_eq!(summary["palette"], 5);
    let g: ColoredGraph = serde_json::from_slice(&fs::read(dir.join("graph.json")).unwrap()).unwrap();
    let phi: ColorAssignment = serde_json::from_slice(&fs::read(dir.join("assignment.json")).unwrap()).unwrap();
    assert!(validate_proper(&g, &phi).unwrap());
    let csv = fs::read_to_string(dir.join("rounds.csv")).unwrap();
    assert_eq!(csv.lines().last().unwrap().rsplit(',').next(), Some("5"));
    assert!(dir.join("trace.jsonl").exists());

    let first = snapshot(&dir);
    fs::remove_dir_all(&dir).unwrap();
    let (again, _) = go(tmp.path(), &args);
    assert_eq!(again, dir);
    assert_eq!(snapshot(&again), first);
}

#[test]
fn color_from_input_file() {
    let tmp = tempfile::tempdir().unwrap();
    let (dir, _) = go(tmp.path(), &["color", "--algo", "linial", "--m", "500", "--delta", "3", "--n", "50"]);
    let input = dir.join("graph.json");
    let (_, s) = go(tmp.path(), &["simulate", "--algo", "kw", "--m", "500", "--delta", "3", "--input", input.to_str().unwrap()]);
    assert_eq!(s["palette"], 400);
    assert_eq!(s["proper"], true);
}

#[test]
fn exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let t = tmp.path();
    assert_eq!(code(t, &["color", "--algo", "kw", "--m", "5", "--delta", "4"]), 2);
    assert_eq!(code(t, &["color", "--algo", "nope", "--m", "5", "--delta", "4"]), 2);
    assert_eq!(code(t, &["frobnicate"]), 2);
    assert_eq!(code(t, &["bound", "--delta", "0.5"]), 2);
    assert_eq!(code(t, &["build", "--family", "nt", "--r", "3", "--m", "6", "--d", "3", "--cap", "1000"]), 1);
    assert_eq!(code(t, &["refute", "--family", "nh1", "--m", "4", "--d", "2", "--random", "2"]), 1);
    assert_eq!(code(t, &["bound", "--delta", "64", "--eta", "0.5"]), 0);
}

#[test]
fn build_nh1_multiset() {
    let tmp = tempfile::tempdir().unwrap();
    let (dir, s) = go(tmp.path(), &["build", "--family", "nh1", "--m", "3", "--d", "2", "--variant", "multiset"]);
    assert_eq!(s["vertices"], 18);
    let g = read_json(dir.join("graph.json"));
    assert_eq!(g["vertices"].as_array().unwrap().len(), 18);
}

#[test]
fn bound_and_verify_hom() {
    let tmp = tempfile::tempdir().unwrap();
    let (_, s) = go(tmp.path(), &["bound", "--delta", "1024", "--C", "1", "--eta", "0"]);
    assert_eq!(s["r"], 4);
    let (dir, s) = go(tmp.path(), &["verify-hom", "--which", "h", "--r", "1", "--m", "3", "--d", "2"]);
    assert_eq!(s["verified"], true);
    let rep = read_json(dir.join("report.json"));
    assert!(rep["report"]["missing"].as_array().unwrap().is_empty());
    assert!(rep["report"]["broken_edges"].as_array().unwrap().is_empty());
}

#[test]
fn chi_decides_and_exports() {
    let tmp = tempfile::tempdir().unwrap();
    let (_, s) = go(tmp.path(), &["chi", "--family", "nh1", "--m", "5", "--d", "3", "--k", "2"]);
    assert_eq!(s["colorable"], "no");
    let (dir, s) = go(tmp.path(), &["chi", "--family", "nt", "--r", "1", "--m", "4", "--d", "2", "--export"]);
    assert_eq!(s["exact"], true);
    assert!(dir.join("graph.col").exists() && dir.join("graph.col.map.json").exists());
}

#[test]
fn refute_from_classes_file() {
    let tmp = tempfile::tempdir().unwrap();
    let file = tmp.path().join("classes.json");
    fs::write(&file, r#"[[{"center": 0, "members": [1, 2]}]]"#).unwrap();
    let (dir, s) = go(tmp.path(), &["refute", "--family", "nh1", "--m", "3", "--d", "2", "--classes", file.to_str().unwrap()]);
    assert_ne!(s["vertex"], "(1,{2,3})");
    assert!(dir.join("refutation.json").exists());
    fs::write(&file, "[[0, 5, 9]]").unwrap();
    let (_, s) = go(tmp.path(), &["refute", "--family", "nh1", "--m", "3", "--d", "2", "--classes", file.to_str().unwrap()]);
    assert_eq!(s["classes"], 1);
    let (_, s) = go(tmp.path(), &["refute", "--family", "nt", "--r", "2", "--m", "5", "--d", "4", "--random", "2", "--seed", "4"]);
    assert!(s["vertex"].as_str().unwrap().starts_with("(("));
}
