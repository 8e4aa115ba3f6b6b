use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str], threads: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_lamplighter"));
    cmd.args(args);
    if let Some(t) = threads {
        cmd.env("LAMPLIGHTER_THREADS", t);
    }
    cmd.output().unwrap()
}

fn run_to(args: &[&str], out: &Path) -> (i32, String) {
    let mut full: Vec<&str> = args.to_vec();
    full.push("--out");
    full.push(out.to_str().unwrap());
    let o = run(&full, None);
    let text = std::fs::read_to_string(out).unwrap_or_default();
    (o.status.code().unwrap(), text)
}

fn data_rows(text: &str) -> Vec<&str> {
    text.lines().filter(|l| !l.starts_with('#')).skip(1).collect()
}

#[test]
fn exact_ret_prob_single_row() {
    let o = run(&["exact", "ret-prob", "--k", "10", "--p", "0.8", "--lamp", "2"], None);
    assert_eq!(o.status.code(), Some(0));
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.starts_with("# config_hash="));
    let rows = data_rows(&text);
    assert_eq!(rows.len(), 1);
    assert!(rows[0].contains("0.0462671021138"), "{}", rows[0]);
}

#[test]
fn verify_reports_pass() {
    let o = run(&["verify", "uniform-lamps", "--max-len", "6"], None);
    assert_eq!(o.status.code(), Some(0));
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.contains("result=PASS cases=28 failures=0"), "{text}");
    assert_eq!(data_rows(&text).len(), 28);

    let o = run(&["verify", "general-measure"], None);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn malformed_config_exits_two_without_output() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    std::fs::write(&cfg, "p = 0.8\nthis line has no equals sign\n").unwrap();
    let out = dir.path().join("out.csv");
    let o = run(
        &["--config", cfg.to_str().unwrap(), "exact", "ret-prob", "--k", "3", "--out", out.to_str().unwrap()],
        None,
    );
    assert_eq!(o.status.code(), Some(2));
    assert!(!out.exists());

    let (code, _) = run_to(&["exact", "ret-prob", "--k", "3", "--p", "0.4"], &out);
    assert_eq!(code, 2);
    assert!(!out.exists());

    let (code, _) = run_to(&["exact", "ret-prob", "--k", "3", "--p", "0.8", "--lambda", "4"], &out);
    assert_eq!(code, 2);
    assert!(!out.exists());

    let (code, _) = run_to(&["exact", "mgf", "--s", "5", "--p", "0.8"], &out);
    assert_eq!(code, 2);
    assert!(!out.exists());
}

#[test]
fn config_file_and_flags_share_hash() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "# walk\np = 0.7\nlamp = 2\nk = 5\n").unwrap();
    let a = run(&["--config", cfg.to_str().unwrap(), "exact", "ret-prob"], None);
    let b = run(&["exact", "ret-prob", "--p", "0.7", "--lamp", "2", "--k", "5"], None);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);

    // flags override file values and change the hash
    let c = run(&["--config", cfg.to_str().unwrap(), "exact", "ret-prob", "--k", "6"], None);
    let hash = |o: &Output| String::from_utf8_lossy(&o.stdout).lines().next().unwrap().to_string();
    assert_ne!(hash(&a), hash(&c));
    assert!(String::from_utf8_lossy(&c.stdout).contains(",6,"));
}

#[test]
fn truncation_marks_partial_output() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("t.csv");
    let (code, text) = run_to(
        &["simulate", "returns", "--graph", "gamma:3", "--lambda", "1.5", "--radius", "3", "--k", "50",
            "--replicas", "200"],
        &out,
    );
    assert_eq!(code, 3);
    assert!(text.contains("# partial=truncation"), "{text}");
}

#[test]
fn budget_marks_partial_output() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("b.csv");
    let (code, text) =
        run_to(&["simulate", "returns", "--p", "0.6", "--k", "50", "--replicas", "200", "--budget", "20"], &out);
    assert_eq!(code, 4);
    assert!(text.contains("# partial=budget"), "{text}");
}

#[test]
fn output_independent_of_worker_count() {
    let args = ["simulate", "returns", "--ks", "1,3", "--p", "0.75", "--replicas", "5000", "--seed", "4"];
    let one = run(&args, Some("1"));
    let three = run(&args, Some("3"));
    assert_eq!(one.status.code(), Some(0));
    assert_eq!(one.stdout, three.stdout);
    let other = run(&["simulate", "returns", "--ks", "1,3", "--p", "0.75", "--replicas", "5000", "--seed", "5"], None);
    assert_ne!(one.stdout, other.stdout);
}

#[test]
fn scan_reports_bracket() {
    let o = run(
        &["scan", "--grid", "1.5,8", "--k-lo", "10", "--k-hi", "100", "--replicas", "3000", "--lamp", "2"],
        None,
    );
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.contains("# bracket="), "{text}");
}
