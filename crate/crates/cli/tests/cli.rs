use std::io::Write;
use std::path::Path;
use std::process::{Command, Output, Stdio};

const TRI: &str = "p pdbep 3 3\nc 0 1\nc 1 1\nc 2 1\ne 0 1\ne 1 2\ne 0 2\n";

fn pdbep(args: &[&str], stdin: Option<&str>) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_pdbep"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .expect("spawn pdbep");
    let mut pipe = child.stdin.take().unwrap();
    pipe.write_all(stdin.unwrap_or("").as_bytes()).unwrap();
    drop(pipe);
    child.wait_with_output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn solve_triangle_json() {
    let out = pdbep(&["solve", "-i", "-", "--alg", "delete"], Some(TRI));
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let report: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(report["value"], "2");
    assert_eq!(report["solver"], "delete");
    assert_eq!(report["feasible"], true);
    assert_eq!(report["certified"], true);
    assert_eq!(report["bound_kind"], "oracle");
}

#[test]
fn solve_from_file_text_format() {
    let dir = tempfile::tempdir().unwrap();
    let path = write(dir.path(), "tri.txt", TRI);
    let out = pdbep(&["solve", "-i", &path, "--alg", "add", "--format", "text"], None);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.lines().any(|l| l == "s 2"), "{text}");
    assert_eq!(text.lines().filter(|l| l.starts_with("x ")).count(), 2);
    assert!(text.lines().filter(|l| !l.is_empty()).all(|l| {
        l.starts_with('#') || l.starts_with("s ") || l.starts_with("x ")
    }));
}

#[test]
fn tree_solver_refuses_cycle() {
    let out = pdbep(&["solve", "-i", "-", "--alg", "tree"], Some(TRI));
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("m ≠ n−1"), "{}", stderr(&out));
}

#[test]
fn malformed_input_is_exit_two() {
    let out = pdbep(&["solve", "-i", "-"], Some("p pdbep 2 1\ne 0 0\n"));
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("self-loop"), "{}", stderr(&out));
    let out = pdbep(&["solve", "-i", "-"], Some("p pdbep 2 2\ne 0 1\n"));
    assert_eq!(out.status.code(), Some(2));
    let out = pdbep(&["solve", "-i", "/nonexistent/instance.txt"], None);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn generated_star_solves_exactly() {
    let out = pdbep(&["gen", "--family", "star", "--n", "5", "--bounds", "fixed:1"], None);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let star = stdout(&out);
    assert!(star.contains("p pdbep 5 4"), "{star}");
    let again = pdbep(&["gen", "--family", "star", "--n", "5", "--bounds", "fixed:1"], None);
    assert_eq!(star, stdout(&again));
    let out = pdbep(&["solve", "-i", "-"], Some(&star));
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let report: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(report["solver"], "tree");
    assert_eq!(report["value"], "4");
}

#[test]
fn gen_rejects_impossible_edge_count() {
    let out = pdbep(&["gen", "--family", "gnm", "--n", "6", "--m", "20"], None);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn rounding_trace_and_lp_dump() {
    let dir = tempfile::tempdir().unwrap();
    let lp = dir.path().join("tri.lp");
    let trace = dir.path().join("trace.jsonl");
    let out = pdbep(
        &[
            "solve",
            "-i",
            "-",
            "--alg",
            "round",
            "--dump-lp",
            lp.to_str().unwrap(),
            "--trace",
            trace.to_str().unwrap(),
        ],
        Some(TRI),
    );
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let lp = std::fs::read_to_string(lp).unwrap();
    assert!(lp.starts_with("Maximize"));
    assert!(lp.contains("Subject To") && lp.trim_end().ends_with("End"));
    let trace = std::fs::read_to_string(trace).unwrap();
    let lines: Vec<serde_json::Value> = trace
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert!(lines.len() >= 2);
    assert_eq!(lines[0]["round"], 0);
}

#[test]
fn gap_small_sizes() {
    let out = pdbep(&["gap", "--n", "8,12"], None);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("2.45"), "{text}");
    assert!(text.contains("3.78125"), "{text}");
}

#[test]
fn certify_small_config() {
    let dir = tempfile::tempdir().unwrap();
    let config = write(
        dir.path(),
        "batch.toml",
        "name = \"smoke\"\nseed = 7\ninstances = 20\nn_max = 6\nm_max = 10\n",
    );
    let json = dir.path().join("summary.json");
    let out = pdbep(&["certify", "--config", &config, "--json", json.to_str().unwrap()], None);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert!(stdout(&out).contains("all certificates hold"));
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(json).unwrap()).unwrap();
    assert_eq!(summary["instances"], 20);
    assert_eq!(summary["violations"].as_array().unwrap().len(), 0);
}

#[test]
fn certify_rejects_unknown_keys() {
    let dir = tempfile::tempdir().unwrap();
    let config = write(dir.path(), "bad.toml", "instancez = 3\n");
    let out = pdbep(&["certify", "--config", &config], None);
    assert_eq!(out.status.code(), Some(2));
}
