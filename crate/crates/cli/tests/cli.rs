use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const M2: &str = r"(\f. \z. f (f z)) (\x. if x then x else x) 0";

fn stab(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_stab")).args(args).current_dir(dir).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn machine(name: &str) -> String {
    format!("{}/../core/machines/{name}.toml", env!("CARGO_MANIFEST_DIR"))
}

fn with_program(dir: &Path, stem: &str, src: &str) {
    fs::write(dir.join(format!("{stem}.term")), src).unwrap();
    let o = stab(&["derive", &format!("{stem}.term")], dir);
    assert!(o.status.success(), "{}", stderr(&o));
    fs::write(dir.join(format!("{stem}.jsonl")), o.stdout).unwrap();
}

#[test]
fn parse_prints_size() {
    let d = tempfile::tempdir().unwrap();
    fs::write(d.path().join("zero.term"), "0").unwrap();
    fs::write(d.path().join("m2.term"), M2).unwrap();
    fs::write(d.path().join("bad.term"), r"(\x. x 0").unwrap();
    assert_eq!(stdout(&stab(&["parse", "zero.term"], d.path())), "0\nsize 1\n");
    assert!(stdout(&stab(&["parse", "m2.term"], d.path())).ends_with("size 11\n"));
    let o = stab(&["parse", "bad.term"], d.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("offset 8"), "{}", stderr(&o));
}

#[test]
fn check_reports_static_measures() {
    let d = tempfile::tempdir().unwrap();
    with_program(d.path(), "m2", M2);
    with_program(d.path(), "zero", "0");
    let o = stab(&["check", "m2.term", "--derivation", "m2.jsonl"], d.path());
    assert!(o.status.success());
    assert!(stdout(&o).contains("degree       1\n"));
    let o = stab(&["check", "zero.term", "--derivation", "zero.jsonl"], d.path());
    let out = stdout(&o);
    assert!(out.contains("degree       0\n") && out.contains("weight       1\n"), "{out}");
    let o = stab(&["check", "zero.term", "--derivation", "m2.jsonl"], d.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn broken_derivation_is_rejected_verbatim() {
    let d = tempfile::tempdir().unwrap();
    with_program(d.path(), "m2", M2);
    let src = fs::read_to_string(d.path().join("m2.jsonl")).unwrap();
    fs::write(d.path().join("m2.jsonl"), src.replacen("\"sp\"", "\"w\"", 1)).unwrap();
    let o = stab(&["check", "m2.term", "--derivation", "m2.jsonl"], d.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(!stderr(&o).is_empty());
}

#[test]
fn run_replays_the_doubling_program() {
    let d = tempfile::tempdir().unwrap();
    with_program(d.path(), "m2", M2);
    let o = stab(&["run", "m2.term", "--trace"], d.path());
    let out = stdout(&o);
    let rules: Vec<&str> = out.lines().skip(1).filter_map(|l| l.split(',').next()).filter(|r| *r != "result 0").collect();
    let expected = "beta beta h beta if h h beta if h h Ax h h Ax h h beta if h h Ax h h Ax";
    assert_eq!(rules.join(" "), expected);
    assert!(out.ends_with("result 0\n"));

    let big = stdout(&stab(&["run", "m2.term", "--stats"], d.path()));
    let small = stdout(&stab(&["run", "m2.term", "--machine", "small", "--stats"], d.path()));
    let num = |s: &str, key: &str| -> usize {
        s.lines().find_map(|l| l.strip_prefix(key)).unwrap().trim().parse().unwrap()
    };
    assert!(small.ends_with("result 0\n"));
    assert!(num(&small, "space_s ") <= num(&big, "space "));

    let o = stab(&["run", "m2.term", "--derivation", "m2.jsonl"], d.path());
    assert!(o.status.success());
    assert!(!stdout(&o).contains("FAIL"));
    let tree = stdout(&stab(&["run", "m2.term", "--tree"], d.path()));
    assert_eq!(tree.lines().filter(|l| l.contains("|=")).count(), 25);
}

#[test]
fn open_term_is_stuck() {
    let d = tempfile::tempdir().unwrap();
    fs::write(d.path().join("open.term"), "y 0").unwrap();
    let o = stab(&["run", "open.term"], d.path());
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("stuck at ∘, ε |= y 0"));
}

#[test]
fn compiled_machine_matches_oracle() {
    let d = tempfile::tempdir().unwrap();
    let m = machine("contains_one");
    let o = stab(&["compile-atm", &m, "--input", "001"], d.path());
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("compiled accept  oracle accept\nmatch\n"));
    let o = stab(&["compile-atm", &m, "--input", "000", "--poly", "0,0,1", "--emit", "p.term"], d.path());
    assert!(o.status.success());
    assert!(stdout(&o).contains("compiled reject  oracle reject\nmatch\n"));
    assert!(stdout(&stab(&["parse", "p.term"], d.path())).contains("size"));
}

#[test]
fn malformed_machine_is_a_spec_error() {
    let d = tempfile::tempdir().unwrap();
    let src = fs::read_to_string(machine("contains_one")).unwrap().replacen("\"or\"", "\"xor\"", 1);
    fs::write(d.path().join("bad.toml"), src).unwrap();
    let o = stab(&["compile-atm", "bad.toml", "--input", "1"], d.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("unknown kind \"xor\""));
}

#[test]
fn bench_over_the_exponential_family() {
    let d = tempfile::tempdir().unwrap();
    let o = stab(&["corpus", "c", "--mn", "10"], d.path());
    assert!(o.status.success());
    let csv = stdout(&stab(&["bench", "c", "--csv"], d.path()));
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("file,size,degree,rank,weight,space,space_s,bound,result,flags"));
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 10);
    for (i, r) in rows.iter().enumerate() {
        let n = i as u32 + 1;
        assert_eq!(r[0], format!("m{n:02}.term"));
        let space: u64 = r[5].parse().unwrap();
        assert!(space <= 6 * (n as u64 + 9).pow(6));
        assert_eq!(r[9], "ok");
    }
    let table = stdout(&stab(&["bench", "c"], d.path()));
    for (i, line) in table.lines().skip(1).enumerate() {
        let rules: u64 = line.split_whitespace().nth(5).unwrap().parse().unwrap();
        assert!(rules >= 1 << (i + 1), "{line}");
    }
    assert_eq!(table, stdout(&stab(&["bench", "c"], d.path())));
}

#[test]
fn bench_over_arithmetic() {
    let d = tempfile::tempdir().unwrap();
    stab(&["corpus", "c", "--mn", "0", "--arithmetic"], d.path());
    let o = stab(&["bench", "c"], d.path());
    assert!(o.status.success());
    let out = stdout(&o);
    assert_eq!(out.lines().count(), 35);
    assert!(out.lines().skip(1).all(|l| l.ends_with("ok")), "{out}");
}

#[test]
fn bench_of_empty_directory() {
    let d = tempfile::tempdir().unwrap();
    let o = stab(&["bench", "."], d.path());
    assert!(o.status.success());
    assert_eq!(stdout(&o), "file  size  degree  rank  weight  rules  space  space_s  bound  result  flags\n");
}

#[test]
fn bench_reports_missing_derivations() {
    let d = tempfile::tempdir().unwrap();
    with_program(d.path(), "a", "0");
    fs::write(d.path().join("b.term"), "1").unwrap();
    let o = stab(&["bench", "."], d.path());
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(stdout(&o).lines().count(), 2);
    assert!(stderr(&o).starts_with("b.term: "));
}

#[test]
fn usage_errors_exit_with_one() {
    let d = tempfile::tempdir().unwrap();
    assert_eq!(stab(&["run"], d.path()).status.code(), Some(1));
    assert_eq!(stab(&["run", "missing.term"], d.path()).status.code(), Some(1));
    assert_eq!(stab(&["run", "x", "--machine", "medium"], d.path()).status.code(), Some(1));
    assert_eq!(stab(&["--help"], d.path()).status.code(), Some(0));
}
