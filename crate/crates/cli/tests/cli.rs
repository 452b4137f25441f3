use std::fs;
use std::path::PathBuf;

use assert_cmd::Command;
use predicates::prelude::*;
use tempfile::TempDir;

fn latagg() -> Command {
    Command::cargo_bin("latagg").unwrap()
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let path = dir.path().join(name);
    fs::write(&path, text).unwrap();
    path
}

const DIAMOND: &str = "\
# M2
lattice diamond
elements 0 a b 1
cover 0 a
cover 0 b
cover a 1
cover b 1
end
";

const MEDIAN_CHAIN3: &str = "\
function median arity 3 lattice chain3
";

fn median_file() -> String {
    let mut text = MEDIAN_CHAIN3.to_string();
    for x in 0..3 {
        for y in 0..3 {
            for z in 0..3 {
                let mut v = [x, y, z];
                v.sort();
                text.push_str(&format!("{x} {y} {z} -> {}\n", v[1]));
            }
        }
    }
    text.push_str("end\n");
    text
}

#[test]
fn lattice_check_accepts_diamond() {
    let dir = TempDir::new().unwrap();
    let path = write(&dir, "diamond.lat", DIAMOND);
    latagg()
        .args(["lattice", "check"])
        .arg(&path)
        .assert()
        .success()
        .stdout(predicate::str::contains("size=4"))
        .stdout(predicate::str::contains("bottom=0"))
        .stdout(predicate::str::contains("top=1"))
        .stdout(predicate::str::contains("relabel 0=0 a=1 b=2 1=3"));
}

#[test]
fn lattice_check_rejects_two_maxima() {
    let dir = TempDir::new().unwrap();
    let path = write(
        &dir,
        "v.lat",
        "lattice v\nelements 0 x y\ncover 0 x\ncover 0 y\nend\n",
    );
    latagg()
        .args(["lattice", "check"])
        .arg(&path)
        .assert()
        .code(2)
        .stderr(predicate::str::contains("NotALattice: join(x,y) undefined"));
}

#[test]
fn lattice_check_rejects_cycle() {
    let dir = TempDir::new().unwrap();
    let path = write(
        &dir,
        "cycle.lat",
        "lattice cyc\nelements 0 a b 1\ncover 0 a\ncover a b\ncover b a\ncover b 1\nend\n",
    );
    latagg()
        .args(["lattice", "check"])
        .arg(&path)
        .assert()
        .code(2)
        .stderr(predicate::str::contains("NotAPartialOrder"));
}

#[test]
fn lattice_check_missing_file() {
    latagg()
        .args(["lattice", "check", "/nonexistent/x.lat"])
        .assert()
        .code(2);
}

#[test]
fn enum_counts() {
    latagg()
        .args(["enum", "--lattice", "chain:2", "--arity", "2", "--class", "idempotent"])
        .assert()
        .success()
        .stdout("count=4\n");
    latagg()
        .args(["enum", "--lattice", "chain:3", "--arity", "1", "--class", "idempotent"])
        .assert()
        .success()
        .stdout("count=1\n");
    latagg()
        .args(["enum", "--lattice", "chain:2", "--arity", "2", "--class", "monotone"])
        .assert()
        .success()
        .stdout("count=6\n");
}

#[test]
fn enum_emit_is_deterministic_and_parseable() {
    let run = || {
        latagg()
            .args(["enum", "--lattice", "chain:2", "--arity", "2", "--class", "aggregation", "--emit"])
            .output()
            .unwrap()
    };
    let first = run();
    assert!(first.status.success());
    assert_eq!(first.stdout, run().stdout);
    let text = String::from_utf8(first.stdout).unwrap();
    assert!(text.starts_with("count=4\n"));
    assert_eq!(text.matches("function f").count(), 4);
    assert!(text.contains("function f1 arity 2 lattice chain2\n0 0 -> 0\n"));
}

#[test]
fn enum_over_budget_exits_3() {
    latagg()
        .args(["enum", "--lattice", "chain:4", "--arity", "4", "--class", "idempotent"])
        .assert()
        .code(3);
    latagg()
        .args(["enum", "--lattice", "chain:3", "--arity", "2", "--class", "idempotent", "--max-count", "10"])
        .assert()
        .code(3);
}

#[test]
fn bad_lattice_source_is_a_usage_error() {
    latagg()
        .args(["enum", "--lattice", "torus:3", "--arity", "2", "--class", "idempotent"])
        .assert()
        .failure()
        .stderr(predicate::str::contains("unknown lattice source"));
    latagg()
        .args(["enum", "--lattice", "chain:0", "--arity", "2", "--class", "idempotent"])
        .assert()
        .code(2);
}

#[test]
fn decompose_median_round_trips() {
    let dir = TempDir::new().unwrap();
    let f = write(&dir, "median.fn", &median_file());
    let out = dir.path().join("median.term");
    latagg()
        .args(["decompose", "--lattice", "chain:3", "--fn"])
        .arg(&f)
        .arg("--out")
        .arg(&out)
        .assert()
        .success();
    let text = fs::read_to_string(&out).unwrap();
    assert!(text.starts_with("term arity 3 lattice chain3\n"));
    assert!(text.contains("iota["));
}

#[test]
fn decompose_reduced_uses_top_only() {
    let dir = TempDir::new().unwrap();
    let f = write(&dir, "median.fn", &median_file());
    let output = latagg()
        .args(["decompose", "--lattice", "chain:3", "--reduced", "--fn"])
        .arg(&f)
        .output()
        .unwrap();
    assert!(output.status.success());
    let text = String::from_utf8(output.stdout).unwrap();
    let specs: Vec<&str> = text.split("iota[").skip(1).collect();
    assert!(!specs.is_empty());
    for s in specs {
        let params = &s[..s.find(']').unwrap()];
        let (abc, _) = params.split_once(';').unwrap();
        assert_eq!(abc.split(',').nth(2), Some("2"), "{params}");
    }
}

#[test]
fn decompose_simplify_is_smaller() {
    let dir = TempDir::new().unwrap();
    let f = write(&dir, "median.fn", &median_file());
    let len = |extra: &[&str]| {
        let out = latagg()
            .args(["decompose", "--lattice", "chain:3", "--fn"])
            .arg(&f)
            .args(extra)
            .output()
            .unwrap();
        assert!(out.status.success());
        out.stdout.len()
    };
    assert!(len(&["--simplify"]) < len(&[]));
}

#[test]
fn decompose_rejects_non_idempotent() {
    let dir = TempDir::new().unwrap();
    let f = write(
        &dir,
        "const.fn",
        "function k arity 2 lattice chain2\n0 0 -> 1\n0 1 -> 1\n1 0 -> 1\n1 1 -> 1\nend\n",
    );
    latagg()
        .args(["decompose", "--lattice", "chain:2", "--fn"])
        .arg(&f)
        .assert()
        .code(2)
        .stderr(predicate::str::contains("f(0,0) = 1"));
}

#[test]
fn decompose_rejects_wrong_lattice() {
    let dir = TempDir::new().unwrap();
    let f = write(&dir, "median.fn", &median_file());
    latagg()
        .args(["decompose", "--lattice", "chain:2", "--fn"])
        .arg(&f)
        .assert()
        .code(2)
        .stderr(predicate::str::contains("chain3"));
}

#[test]
fn verify_diamond_passes() {
    latagg()
        .args(["verify", "--lattice", "m:2", "--arity", "2"])
        .assert()
        .success()
        .stdout(predicate::str::contains("id_count=1296"))
        .stdout(predicate::str::ends_with("A=pass B=pass\n"));
}

#[test]
fn verify_small_budget_exits_3() {
    latagg()
        .args(["verify", "--lattice", "chain:3", "--arity", "2", "--budget", "5"])
        .assert()
        .code(3)
        .stdout(predicate::str::contains("budget_hit=true"));
}

#[test]
fn closure_of_lattice_operations() {
    latagg()
        .args(["closure", "--lattice", "chain:2", "--arity", "2", "--base", "meet", "--base", "join"])
        .assert()
        .success()
        .stdout("reached=4 rounds=1 budget_hit=false\n");
    latagg()
        .args(["closure", "--lattice", "chain:3", "--arity", "2"])
        .assert()
        .success()
        .stdout("reached=2 rounds=0 budget_hit=false\n");
}

#[test]
fn closure_with_generators_and_files() {
    let dir = TempDir::new().unwrap();
    let f = write(
        &dir,
        "meet.fn",
        "function m arity 2 lattice chain2\n0 0 -> 0\n0 1 -> 0\n1 0 -> 0\n1 1 -> 1\nend\n",
    );
    let output = latagg()
        .args(["closure", "--lattice", "chain:2", "--arity", "2", "--emit", "--base", "join", "--base"])
        .arg(format!("file:{}", f.display()))
        .output()
        .unwrap();
    assert!(output.status.success());
    let text = String::from_utf8(output.stdout).unwrap();
    assert!(text.starts_with("reached=4 "));
    assert_eq!(text.matches("function c").count(), 4);
    latagg()
        .args(["closure", "--lattice", "chain:3", "--arity", "2", "--base", "iota[0,1,2;1]"])
        .assert()
        .success();
    latagg()
        .args(["closure", "--lattice", "chain:3", "--arity", "2", "--base", "iota[1,0,2;1]"])
        .assert()
        .code(2);
    latagg()
        .args(["closure", "--lattice", "chain:3", "--arity", "2", "--base", "reduced", "--base", "meet", "--budget", "10"])
        .assert()
        .code(3)
        .stdout(predicate::str::contains("budget_hit=true"));
}

#[test]
fn count_spot_values() {
    latagg()
        .args(["count", "--family", "chain", "--n", "3"])
        .assert()
        .success()
        .stdout("n g_chain listed_chain\n3 16 16\n");
    latagg()
        .args(["count", "--family", "m", "--n", "6"])
        .assert()
        .success()
        .stdout("n g_m listed_m\n6 55 55\n");
}

#[test]
fn count_range_both_families() {
    let out = latagg().args(["count", "--n", "2..10"]).output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "n g_chain listed_chain g_m listed_m");
    assert_eq!(lines.len(), 10);
    assert_eq!(lines[1], "2 7 7 - -");
    assert_eq!(lines[5], "6 93 93 55 55");
    for line in &lines[1..] {
        let cols: Vec<&str> = line.split(' ').collect();
        assert_eq!(cols[1], cols[2]);
        assert_eq!(cols[3], cols[4]);
    }
}
