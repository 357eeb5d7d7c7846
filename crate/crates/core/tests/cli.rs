mod common;

use std::path::PathBuf;
use std::process::{Command, Output};

use common::*;
use serde_json::Value;
use tempfile::TempDir;

fn mixext(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mixext")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).expect("valid JSON on stdout")
}

fn game_file(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p
}

#[test]
fn goodcheck_reports_triangle_cycle() {
    let o = mixext(&["goodcheck", "--r", "1:0-1,1-2,0-2"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("not good: player 1 has cycle (0,1,2)"), "{}", stdout(&o));
    let doc = json(&mixext(&["goodcheck", "--r", "1:0-1,1-2,0-2", "--json"]));
    assert_eq!(doc["results"]["good"], Value::Bool(false));
    assert_eq!(doc["results"]["cycle"]["vertices"], serde_json::json!([0, 1, 2]));
}

#[test]
fn goodcheck_accepts_paths_with_coordinate_labels() {
    let o = mixext(&["goodcheck", "--r", "1:0-1,1-2", "--t", "1:inf"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).trim_end().ends_with("good"));
}

#[test]
fn goodcheck_rejects_malformed_pairs() {
    assert_eq!(mixext(&["goodcheck", "--r", "1:0-0"]).status.code(), Some(1));
    assert_eq!(mixext(&["goodcheck", "--r", "(0,1)"]).status.code(), Some(1));
}

#[test]
fn solve_pennies_text_and_json() {
    let dir = TempDir::new().unwrap();
    let p = game_file(&dir, "mp.txt", matching_pennies_text());
    let p = p.to_str().unwrap();
    let o = mixext(&["solve", p]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("equilibria: 1"));
    let doc = json(&mixext(&["--json", "solve", p]));
    assert_eq!(doc["results"]["count"], 1);
    assert_eq!(doc["results"]["equilibria"][0]["point"], serde_json::json!([[0.5, 0.5], [0.5, 0.5]]));
    assert!(doc["warnings"].as_array().unwrap().is_empty());
}

#[test]
fn exact_solve_writes_rationals_as_strings() {
    let dir = TempDir::new().unwrap();
    let p = game_file(&dir, "bos.txt", battle_of_sexes_text());
    let doc = json(&mixext(&["solve", p.to_str().unwrap(), "--exact", "--json"]));
    assert_eq!(doc["meta"]["exact"], Value::Bool(true));
    let points: Vec<&Value> = doc["results"]["equilibria"].as_array().unwrap().iter().map(|e| &e["point"]).collect();
    assert_eq!(points.len(), 3);
    assert!(points.contains(&&serde_json::json!([["2/3", "1/3"], ["1/3", "2/3"]])), "{points:?}");
}

#[test]
fn degenerate_games_exit_with_witness() {
    let dir = TempDir::new().unwrap();
    for (name, text) in [("dup.txt", duplicate_row_text()), ("zero.txt", zero_game_text())] {
        let p = game_file(&dir, name, text);
        let o = mixext(&["solve", p.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(2), "{name}");
        let out = stdout(&o);
        assert!(out.contains("non-generic") && out.contains("witness:"), "{name}: {out}");
    }
}

#[test]
fn lambda_prints_pennies_forms() {
    let dir = TempDir::new().unwrap();
    let p = game_file(&dir, "mp.txt", matching_pennies_text());
    let o = mixext(&["lambda", p.to_str().unwrap(), "--player", "1"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    // U^1 = [[1,-1],[-1,1]]: κ = 1 − 2y, λ_1 = −2 + 4y with y = γ^2_1.
    let compact: Vec<String> = out.lines().map(|l| l.split_whitespace().collect::<Vec<_>>().join(" ")).collect();
    for want in ["kappa", "1 1", "g2_1 -2", "lambda_1", "1 -2", "g2_1 4"] {
        assert!(compact.iter().any(|l| l == want), "missing `{want}` in\n{out}");
    }
    assert!(!out.contains("player 2"));
}

#[test]
fn sample_rates_and_determinism() {
    let o = mixext(&["sample", "2x2", "--count", "100", "--seed", "7", "--json"]);
    assert_eq!(o.status.code(), Some(0));
    let doc = json(&o);
    let rate = doc["results"]["oddness_rate"].as_f64().expect("oddness_rate");
    assert!(rate >= 0.98, "oddness rate {rate}");
    let a = stdout(&mixext(&["sample", "2x2", "--count", "1", "--seed", "11"]));
    let b = stdout(&mixext(&["sample", "2x2", "--count", "1", "--seed", "11"]));
    assert_eq!(a, b);
}

#[test]
fn sample_rejects_single_strategy_players() {
    let o = mixext(&["sample", "1x2"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("at least 2 strategies"));
}

#[test]
fn certify_round_trips_solve_output() {
    let dir = TempDir::new().unwrap();
    let g = game_file(&dir, "mp.txt", matching_pennies_text());
    let solved = mixext(&["solve", g.to_str().unwrap(), "--json"]);
    let s = game_file(&dir, "solve.json", &stdout(&solved));
    let o = mixext(&["certify", g.to_str().unwrap(), "--from-solve", s.to_str().unwrap(), "--equilibrium", "1", "--json"]);
    assert_eq!(o.status.code(), Some(0));
    let doc = json(&o);
    assert_eq!(doc["results"]["verdict"], "transversal");
    assert_eq!(doc["results"]["jacobian"], serde_json::json!([[0.0, -4.0], [4.0, 0.0]]));
    let missing = mixext(&["certify", g.to_str().unwrap(), "--from-solve", s.to_str().unwrap(), "--equilibrium", "2"]);
    assert_eq!(missing.status.code(), Some(1));
}

#[test]
fn certify_refuses_excluded_hypersurface() {
    let dir = TempDir::new().unwrap();
    let g = game_file(&dir, "mp.txt", matching_pennies_text());
    let o = mixext(&["certify", g.to_str().unwrap(), "--point", "1/2,1/2;1/2,1/2", "--t", "1:inf", "--chart", "0,0"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("choose another --chart"));
}

#[test]
fn charts_lists_complements() {
    let o = mixext(&["charts", "2x3"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.contains("6 charts"));
    assert!(out.contains("C:1:inf u C:2:1"));
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(mixext(&["solve", "/nonexistent/game.txt"]).status.code(), Some(1));
    assert_eq!(mixext(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(mixext(&["--help"]).status.code(), Some(0));
    assert_eq!(mixext(&["sample", "2x2", "--exact"]).status.code(), Some(1));
}
