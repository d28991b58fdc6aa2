use std::fs;
use std::io::Write;
use std::process::{Command, Output, Stdio};

use tempfile::TempDir;

const UNIT_CLASH: &str = "p cnf 2 3\na 1 0\nd 2 0\n1 0\n2 0\n-1 0\n";
const MIRROR: &str = "p cnf 2 2\na 1 0\nd 2 1 0\n1 -2 0\n-1 2 0\n";

fn dqprep(args: &[&str], stdin: Option<&str>) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_dqprep"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .expect("binary runs");
    {
        let mut pipe = child.stdin.take().unwrap();
        pipe.write_all(stdin.unwrap_or("").as_bytes()).unwrap();
    }
    child.wait_with_output().unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn write_input(dir: &TempDir, name: &str, text: &str) -> String {
    let path = dir.path().join(name);
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn unsat_after_propagation_exits_20() {
    let dir = TempDir::new().unwrap();
    let input = write_input(&dir, "clash.dqdimacs", UNIT_CLASH);
    let out = dqprep(&["--passes", "up", &input], None);
    assert_eq!(code(&out), 20, "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(String::from_utf8(out.stdout).unwrap(), "p cnf 2 1\na 1 0\nd 2 0\n0\n");
}

#[test]
fn mirror_is_kept_by_equivalence_passes() {
    let out = dqprep(&["--passes", "ur,up,upla,vivify"], Some(MIRROR));
    assert_eq!(code(&out), 0);
    assert_eq!(String::from_utf8(out.stdout).unwrap(), MIRROR);
    let stats = String::from_utf8(out.stderr).unwrap();
    assert!(stats.contains("pass=vivify round=1"));
    assert!(stats
        .lines()
        .last()
        .unwrap()
        .starts_with("verdict=UNKNOWN rounds=1 converged=true"));
}

#[test]
fn default_passes_decide_mirror() {
    let out = dqprep(&["--verify"], Some(MIRROR));
    assert_eq!(code(&out), 10);
}

#[test]
fn verified_fuzzing_succeeds() {
    let out = dqprep(&["--verify", "--seed", "7", "--fuzz", "100"], None);
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert_eq!(code(&out), 0, "{stderr}");
    assert!(stderr.contains("fuzz_instances=100 seed=7"));
}

#[test]
fn out_and_stats_json_go_to_files() {
    let dir = TempDir::new().unwrap();
    let input = write_input(&dir, "in.dqdimacs", "p cnf 2 2\ne 1 2 0\n1 2 0\n-1 0\n");
    let out_path = dir.path().join("out.dqdimacs");
    let stats_path = dir.path().join("stats.json");
    let out = dqprep(
        &[
            &input,
            "--out",
            out_path.to_str().unwrap(),
            "--stats-json",
            stats_path.to_str().unwrap(),
        ],
        None,
    );
    assert_eq!(code(&out), 10);
    assert!(out.stdout.is_empty());
    assert_eq!(fs::read_to_string(&out_path).unwrap(), "p cnf 0 0\n");

    let stats: serde_json::Value = serde_json::from_str(&fs::read_to_string(&stats_path).unwrap()).unwrap();
    assert_eq!(stats["verdict"], "SAT");
    assert_eq!(stats["fixed_units"], serde_json::json!([-1, 2]));
    assert_eq!(stats["passes"][1]["pass"], "up");
    assert_eq!(stats["passes"][1]["units_added"], 2);
}

#[test]
fn missing_file_exits_1() {
    let out = dqprep(&["/nonexistent/formula.dqdimacs"], None);
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("cannot open"));
}

#[test]
fn parse_error_exits_1_with_line() {
    let out = dqprep(&[], Some("p cnf 2 1\na 1 0\n1 3 0\n"));
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 3"));
}

#[test]
fn usage_errors_exit_1() {
    assert_eq!(code(&dqprep(&["--passes", "up,magic"], Some(MIRROR))), 1);
    assert_eq!(code(&dqprep(&["--passes", ","], Some(MIRROR))), 1);
    assert_eq!(code(&dqprep(&["--max-rounds", "0"], Some(MIRROR))), 1);
    assert_eq!(code(&dqprep(&["--no-such-flag"], None)), 1);
    assert_eq!(code(&dqprep(&["--help"], None)), 0);
}
