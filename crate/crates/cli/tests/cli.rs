use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use mhcd_core::fixtures::KARATE_EDGE_LIST;
use mhcd_core::parse_assignment;

const TT: &str = "1 2\n1 3\n2 3\n4 5\n4 6\n5 6\n3 4\n";

fn mhcd(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mhcd"))
        .args(args)
        .env_remove("MHCD_SERVER")
        .output()
        .expect("binary runs")
}

fn file(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn detect_prints_two_triangles() {
    let dir = tempfile::tempdir().unwrap();
    let g = file(dir.path(), "tt.txt", TT);
    let out = mhcd(&["detect", s(&g), "--iters", "20000", "--seed", "3"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let a = parse_assignment(&String::from_utf8(out.stdout).unwrap()).unwrap();
    assert_eq!(a.len(), 6);
    assert_eq!(a[&1], a[&2]);
    assert_eq!(a[&2], a[&3]);
    assert_eq!(a[&4], a[&6]);
    assert_ne!(a[&1], a[&4]);
}

#[test]
fn detect_writes_metrics_jsonl() {
    let dir = tempfile::tempdir().unwrap();
    let g = file(dir.path(), "tt.txt", TT);
    let m = dir.path().join("m.jsonl");
    let o = dir.path().join("a.txt");
    let out = mhcd(&["detect", s(&g), "--iters", "1000", "-o", s(&o), "--metrics", s(&m)]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let metrics = std::fs::read_to_string(&m).unwrap();
    assert_eq!(metrics.lines().count(), 1);
    assert!(metrics.contains("\"iterations\":1000"), "{metrics}");
    assert!(metrics.contains("\"wall_ms\":null"), "{metrics}");
    assert_eq!(std::fs::read_to_string(&o).unwrap().lines().count(), 6);
}

#[test]
fn stream_emits_one_metrics_line_per_step() {
    let dir = tempfile::tempdir().unwrap();
    let g = file(dir.path(), "g.txt", "1 2\n2 3\n1 3\n");
    let e = file(dir.path(), "e.txt", "1 add 4 5\n1 add 5 6\n2 add 4 6\n3 add 3 4\n");
    let m = dir.path().join("m.jsonl");
    let out = mhcd(&["stream", s(&g), s(&e), "--budget-per-step", "2000", "--metrics", s(&m)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let metrics = std::fs::read_to_string(&m).unwrap();
    assert_eq!(metrics.lines().count(), 4);
    assert!(metrics.lines().next().unwrap().contains("\"t\":null"));
    assert!(metrics.lines().last().unwrap().contains("\"t\":3"));
}

#[test]
fn oracle_reports_optimum() {
    let dir = tempfile::tempdir().unwrap();
    let g = file(dir.path(), "tt.txt", TT);
    let out = mhcd(&["oracle", s(&g)]);
    assert!(out.status.success());
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("best modularity 0.357142857143 with 2 communities"), "{err}");
}

#[test]
fn bench_prints_table() {
    let dir = tempfile::tempdir().unwrap();
    let g = file(dir.path(), "karate.txt", KARATE_EDGE_LIST);
    let out = mhcd(&["bench", s(&g), "--iters", "20000"]);
    assert!(out.status.success());
    let table = String::from_utf8(out.stdout).unwrap();
    assert!(table.starts_with("graph: 34 nodes, 78 edges"), "{table}");
    assert!(table.contains("mh-hierarchical"));
    assert!(table.contains("louvain"));
    assert!(!table.contains("brute-force"));
}

#[test]
fn malformed_input_fails_with_line_number() {
    let dir = tempfile::tempdir().unwrap();
    let g = file(dir.path(), "bad.txt", "1 2\n2 x\n");
    let out = mhcd(&["detect", s(&g)]);
    assert!(!out.status.success());
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.starts_with("error:"), "{err}");
    assert!(err.contains("line 2"), "{err}");
}

#[test]
fn missing_file_fails() {
    let out = mhcd(&["detect", "/nonexistent/graph.txt"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("/nonexistent/graph.txt"));
}

#[test]
fn oracle_rejects_large_graphs() {
    let dir = tempfile::tempdir().unwrap();
    let g = file(dir.path(), "karate.txt", KARATE_EDGE_LIST);
    let out = mhcd(&["oracle", s(&g)]);
    assert!(!out.status.success());
}

#[test]
fn invalid_config_fails() {
    let dir = tempfile::tempdir().unwrap();
    let g = file(dir.path(), "tt.txt", TT);
    let out = mhcd(&["detect", s(&g), "--alpha", "1.5"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:"));
}

#[tokio::test(flavor = "multi_thread")]
async fn talks_to_an_external_server() {
    let addr = mhcd_server::spawn("127.0.0.1:0".parse().unwrap()).await.unwrap();
    let dir = tempfile::tempdir().unwrap();
    let g = file(dir.path(), "tt.txt", TT);
    let url = format!("http://{addr}");
    let path = g.clone();
    let (remote, local) = tokio::task::spawn_blocking(move || {
        let remote = mhcd(&["--server", &url, "detect", s(&path), "--iters", "5000", "--seed", "9"]);
        let local = mhcd(&["detect", s(&path), "--iters", "5000", "--seed", "9"]);
        (remote, local)
    })
    .await
    .unwrap();
    assert!(remote.status.success(), "{}", String::from_utf8_lossy(&remote.stderr));
    assert_eq!(remote.stdout, local.stdout);
}

#[test]
fn unreachable_server_fails() {
    let dir = tempfile::tempdir().unwrap();
    let g = file(dir.path(), "tt.txt", TT);
    let out = mhcd(&["--server", "http://127.0.0.1:1", "detect", s(&g)]);
    assert!(!out.status.success());
}
