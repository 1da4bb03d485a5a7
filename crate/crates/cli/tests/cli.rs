use std::io::Write;
use std::path::PathBuf;
use std::process::{Command, Output, Stdio};

const INSTANCE: &str = "alldiffprec v1
# two jobs before two others, raw values
var a [10,14]
var b [10,14]
var c {10,11,12}
var d [11,13]
prec a c
prec b c
prec a d
prec b d
";

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_alldiffprec"))
}

fn run(args: &[&str], stdin: Option<&str>) -> Output {
    let mut child = bin()
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    let mut pipe = child.stdin.take().unwrap();
    if let Some(s) = stdin {
        pipe.write_all(s.as_bytes()).unwrap();
    }
    drop(pipe);
    child.wait_with_output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn temp_file(name: &str, body: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("alldiffprec-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p
}

#[test]
fn propagate_every_route_agrees() {
    let want = "a [10, 11]\nb [10, 11]\nc [12, 12]\nd [13, 13]\n";
    for route in [
        "fast",
        "fast-compressed",
        "reference",
        "binary-search",
        "decomp",
        "weak",
    ] {
        let o = run(&["propagate", "-", "--route", route], Some(INSTANCE));
        assert_eq!(o.status.code(), Some(0), "{route}");
        assert_eq!(stdout(&o), want, "{route}");
    }
}

#[test]
fn propagate_reads_a_file() {
    let p = temp_file("inst.txt", INSTANCE);
    let o = run(&["propagate", p.to_str().unwrap()], None);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("a [10, 11]\n"));
}

#[test]
fn propagate_failure_exits_one() {
    let o = run(
        &["propagate", "-"],
        Some("alldiffprec v1\nvar x [1,2]\nvar y [1,2]\nvar z [1,2]\n"),
    );
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(stdout(&o), "failure\n");
}

#[test]
fn trace_lines_follow_the_sweep() {
    let text = "alldiffprec v1\nvar X1 [1,6]\nvar X2 [1,6]\nvar X3 [1,6]\nprec X1 X2\nprec X2 X3\n";
    let o = run(&["propagate", "-", "--trace"], Some(text));
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(
        out.lines()
            .next()
            .unwrap()
            .starts_with("upper i=1 j=1 outer"),
        "{out}"
    );
    assert!(out.ends_with("X1 [1, 4]\nX2 [2, 5]\nX3 [3, 6]\n"), "{out}");
    let bad = run(
        &["propagate", "-", "--trace", "--route", "reference"],
        Some(text),
    );
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn solve_prints_names_and_raw_values() {
    let o = run(&["solve", "-", "--var-order", "lex"], Some(INSTANCE));
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(
        out.starts_with("solution\na = 10\nb = 11\nc = 12\nd = 13\n"),
        "{out}"
    );
    assert!(out.contains("nodes "));
}

#[test]
fn solve_unsat_and_limit_codes() {
    let pigeons = "alldiffprec v1\nvar x [1,2]\nvar y [1,3]\nvar z [1,3]\nprec x y\nprec x z\nprec y z\nvar w [1,3]\nprec w x\n";
    let o = run(&["solve", "-"], Some(pigeons));
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).starts_with("unsatisfiable\n"));

    // nine free variables need more than five nodes
    let mut wide = String::from("alldiffprec v1\n");
    for i in 0..9 {
        wide.push_str(&format!("var v{i} [1,9]\n"));
    }
    let o = run(
        &["solve", "-", "--node-limit", "5", "--route", "weak"],
        Some(&wide),
    );
    assert_eq!(o.status.code(), Some(3));
    assert!(stdout(&o).starts_with("node limit reached\n"));
}

#[test]
fn solve_options_parse() {
    for args in [
        ["--branching", "split", "--value-order", "desc"],
        ["--var-order", "topological", "--seed", "5"],
    ] {
        let mut full = vec!["solve", "-"];
        full.extend(args);
        let o = run(&full, Some(INSTANCE));
        assert_eq!(o.status.code(), Some(0), "{args:?}");
    }
}

#[test]
fn dc_lists_supported_values() {
    let o = run(&["dc", "-"], Some(INSTANCE));
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "a {10,11}\nb {10,11}\nc {12}\nd {13}\n");
    let o = run(&["dc", "-", "--cap", "10"], Some(INSTANCE));
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn encode_sat_round_trip() {
    let cnf = "c small\np cnf 3 2\n1 2 -3 0\n-1 2 3 0\n";
    let o = run(&["encode-sat", "-"], Some(cnf));
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.starts_with("alldiffprec v1\n"));
    // 2 variables per literal pair plus 3 per clause
    assert_eq!(text.lines().filter(|l| l.starts_with("var ")).count(), 12);
    let p = temp_file("sat.txt", &text);
    let solved = run(&["solve", p.to_str().unwrap()], None);
    assert_eq!(solved.status.code(), Some(0));

    let json = run(&["encode-sat", "-", "--json"], Some(cnf));
    assert_eq!(json.status.code(), Some(0));
    let back = run(&["propagate", "-"], Some(&stdout(&json)));
    assert_eq!(back.status.code(), Some(0));
}

#[test]
fn bad_input_exits_two() {
    assert_eq!(
        run(&["encode-sat", "-"], Some("p cnf 1 1\n1 -1 1 0\n"))
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        run(&["propagate", "-"], Some("var x [3,1]\n"))
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        run(&["propagate", "/no/such/file"], None).status.code(),
        Some(2)
    );
    assert_eq!(
        run(&["solve", "-", "--node-limit", "0"], Some(INSTANCE))
            .status
            .code(),
        Some(2)
    );
    assert_eq!(run(&["frobnicate"], None).status.code(), Some(2));
    let cyclic = "alldiffprec v1\nvar x [1,3]\nvar y [1,3]\nprec x y\nprec y x\n";
    let o = run(&["propagate", "-"], Some(cyclic));
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).starts_with("error:"));
}

#[test]
fn fuzz_small_run_is_clean() {
    let o = run(
        &[
            "fuzz", "--count", "60", "--seed", "3", "--max-n", "5", "--max-d", "7",
        ],
        None,
    );
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("instances=60 "), "{}", stdout(&o));
}

#[test]
fn gen_output_parses() {
    for kind in ["random", "schedule"] {
        let g = run(&["gen", kind, "--n", "5", "--seed", "2"], None);
        assert_eq!(g.status.code(), Some(0));
        let p = run(&["propagate", "-"], Some(&stdout(&g)));
        assert!(matches!(p.status.code(), Some(0 | 1)), "{kind}");
    }
    let s = run(&["gen", "schedule", "--n", "4", "--seed", "2"], None);
    assert_eq!(
        run(&["solve", "-"], Some(&stdout(&s))).status.code(),
        Some(0)
    );
}

#[test]
fn bench_prints_a_row_per_route() {
    let o = run(
        &["bench", "--max-n", "8", "--step", "4", "--repeats", "2"],
        None,
    );
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).lines().count(), 1 + 2 * 4);
}
