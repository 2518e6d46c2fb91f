use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn corpus(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("corpus").join(name)
}

fn regcover(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_regcover"))
        .args(args)
        .env_remove("REGCOVER_BUDGET")
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn check_then_verify_certificate() {
    let dir = tempfile::tempdir().unwrap();
    let cert = dir.path().join("cert.json");
    let (g, h) = (corpus("cube.graph"), corpus("k4.graph"));
    let out = regcover(&["check", p(&g), p(&h), "--certificate", p(&cert), "--oracle-verify"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stdout).contains("k = 2"));
    let out = regcover(&["verify-cert", p(&g), p(&h), p(&cert)]);
    assert_eq!(code(&out), 0);
    // the certificate does not fit another pair
    let out = regcover(&["verify-cert", p(&g), p(&corpus("c4.graph")), p(&cert)]);
    assert_eq!(code(&out), 1);
}

#[test]
fn negative_answer_exits_one() {
    let out = regcover(&["check", p(&corpus("c5.graph")), p(&corpus("c3.graph"))]);
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("no"));
}

#[test]
fn check_and_oracle_agree_on_corpus() {
    let mut files: Vec<PathBuf> = std::fs::read_dir(corpus(""))
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "graph"))
        .collect();
    files.extend(std::fs::read_dir(corpus("cube_quotients")).unwrap().map(|e| e.unwrap().path()));
    files.sort();
    let mut yes = 0;
    for g in &files {
        for h in &files {
            let a = code(&regcover(&["check", p(g), p(h)]));
            let b = code(&regcover(&["oracle", p(g), p(h)]));
            assert_eq!(a, b, "{} / {}", g.display(), h.display());
            assert!(a <= 1);
            yes += usize::from(a == 0);
        }
    }
    assert!(yes > files.len(), "only {yes} positive pairs");
}

#[test]
fn json_output() {
    let out = regcover(&["--json", "check", p(&corpus("cube.graph")), p(&corpus("k4.graph"))]);
    assert_eq!(code(&out), 0);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["answer"], true);
    assert_eq!(v["k"], 2);
    assert_eq!(v["stats"]["decided_by"], "search");
}

#[test]
fn petersen_falls_back_to_oracle() {
    let out = regcover(&["--json", "check", p(&corpus("petersen.graph")), p(&corpus("petersen_base.graph"))]);
    assert_eq!(code(&out), 0);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["path"], "oracle");
    assert_eq!(v["k"], 5);
}

#[test]
fn budget_flag_and_environment() {
    let (g, h) = (corpus("cube.graph"), corpus("k4.graph"));
    assert_eq!(code(&regcover(&["check", p(&g), p(&h), "--budget", "1"])), 2);
    let env = |val: &str| {
        Command::new(env!("CARGO_BIN_EXE_regcover"))
            .args(["check", p(&g), p(&h), "--budget", "1"])
            .env("REGCOVER_BUDGET", val)
            .output()
            .unwrap()
    };
    // the environment overrides the flag in both directions
    assert_eq!(code(&env("1000000")), 0);
    assert_eq!(code(&env("nonsense")), 2);
}

#[test]
fn errors_exit_two() {
    assert_eq!(code(&regcover(&["check", "/nonexistent.graph", p(&corpus("c3.graph"))])), 2);
    assert_eq!(code(&regcover(&["frobnicate"])), 2);
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.graph");
    std::fs::write(&bad, "this is not a graph\n").unwrap();
    assert_eq!(code(&regcover(&["atoms", p(&bad)])), 2);
}

#[test]
fn aut_reports_classes() {
    let out = regcover(&["aut", p(&corpus("dodecahedron.graph")), "--classes"]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("|Aut(G)| = 120"));
    assert!(text.contains("map automorphisms: 120"));
    assert!(text.contains("60:1"));
}

#[test]
fn quotients_written_to_directory() {
    let dir = tempfile::tempdir().unwrap();
    let out = regcover(&["quotients", p(&corpus("cube.graph")), "--k", "2", "--out", p(dir.path())]);
    assert_eq!(code(&out), 0);
    let n = std::fs::read_dir(dir.path()).unwrap().count();
    assert_eq!(n, std::fs::read_dir(corpus("cube_quotients")).unwrap().count());
    for e in std::fs::read_dir(dir.path()).unwrap() {
        let q = e.unwrap().path();
        assert_eq!(code(&regcover(&["check", p(&corpus("cube.graph")), p(&q)])), 0);
    }
}

#[test]
fn atoms_and_reduce_run() {
    for g in ["theta_pendants.graph", "hexagon_pendants.graph", "square_dipoles.graph"] {
        assert_eq!(code(&regcover(&["atoms", p(&corpus(g))])), 0);
        assert_eq!(code(&regcover(&["reduce", p(&corpus(g))])), 0);
        assert_eq!(code(&regcover(&["--json", "reduce", p(&corpus(g))])), 0);
    }
}

#[test]
fn ivmatch_file() {
    let out = regcover(&["ivmatch", p(&corpus("ivmatch_comb.iv"))]);
    assert_eq!(code(&out), 0);
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("feasible"));
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("x.iv");
    // one even vertex that no odd vertex can cover
    std::fs::write(&f, "level 1\nlevel 2\ncluster a level=1 size=1\ncluster b level=2 size=2\nadj a b kind=half\n").unwrap();
    assert_eq!(code(&regcover(&["ivmatch", p(&f)])), 1);
}
