use std::path::Path;
use std::process::{Command, Output};

fn fortify(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fortify"))
        .args(args)
        .env_remove("FORTIFY_SEED")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn field<'a>(text: &'a str, key: &str) -> &'a str {
    text.lines()
        .find_map(|l| l.strip_prefix(key))
        .map(str::trim)
        .unwrap_or_else(|| panic!("no {key:?} line in\n{text}"))
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn generated_grid_solves_to_optimality() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("grid.txt");
    let gen = fortify(&[
        "generate",
        "grid",
        "--rows",
        "5",
        "--cols",
        "5",
        "--seed",
        "3",
        "-o",
        path(&file),
    ]);
    assert!(gen.status.success(), "{}", String::from_utf8_lossy(&gen.stderr));

    let out = fortify(&["solve", path(&file)]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    assert_eq!(field(&text, "status"), "optimal");
    assert_eq!(field(&text, "settings"), "IBEG");
    let z: f64 = field(&text, "z*").parse().unwrap();
    let bound: f64 = field(&text, "bound").parse().unwrap();
    assert_eq!(z, bound);

    // every settings string reaches the same optimum
    for s in ["-", "B", "EG", "IBEG"] {
        let o = fortify(&["solve", path(&file), "--settings", s]);
        assert_eq!(field(&stdout(&o), "z*").parse::<f64>().unwrap(), z, "settings {s}");
    }
}

#[test]
fn knapsack_game_reports_maximization_value() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("kfg.txt");
    std::fs::write(&file, "3 1 1 4\n5 2 1 1\n4 3 1 1\n3 2 1 1\n").unwrap();
    let out = fortify(&["solve", path(&file), "--trace"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert_eq!(field(&text, "settings"), "BEG");
    // protect item 0; the attacker removes item 2 and item 1 no longer fits
    // next to item 0, so the defender keeps 5
    assert_eq!(field(&text, "z*"), "5");
    assert!(text.lines().any(|l| l.starts_with("cut ")));
}

#[test]
fn malformed_input_exits_with_parse_code() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("bad.txt");
    std::fs::write(&file, "3 1 1\n1 2 x\n").unwrap();
    let out = fortify(&["solve", path(&file)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line"));

    let out = fortify(&["solve", path(&file), "--settings", "XYZ"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn limits_exit_with_limit_code() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("grid.txt");
    fortify(&["generate", "grid", "--bf", "7", "--bi", "5", "-o", path(&file)]);
    let out = fortify(&["solve", path(&file), "--time-limit", "0"]);
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(field(&stdout(&out), "status"), "time_limit");

    let out = fortify(&["solve", path(&file), "--node-limit", "1"]);
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(field(&stdout(&out), "status"), "node_limit");
}

#[test]
fn dimacs_road_network() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("road.gr");
    std::fs::write(&file, "c toy network\np sp 4 4\na 1 2 1\na 2 4 1\na 1 3 2\na 3 4 2\n").unwrap();
    let out = fortify(&[
        "solve",
        path(&file),
        "--format",
        "dimacs",
        "--sink",
        "4",
        "--bf",
        "1",
        "--bi",
        "1",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    // fortifying one arc of the short path leaves the attacker the other
    // one; the long path (4) is then cheaper than paying the delay
    assert_eq!(field(&stdout(&out), "z*"), "4");

    let out = fortify(&["solve", path(&file), "--format", "dimacs"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn bench_expands_paper_budgets() {
    let dir = tempfile::tempdir().unwrap();
    let grid = dir.path().join("g.txt");
    fortify(&["generate", "grid", "--rows", "4", "--cols", "4", "-o", path(&grid)]);
    let csv = dir.path().join("out.csv");
    let out = fortify(&[
        "bench",
        path(&grid),
        "--paper-budgets",
        "--settings",
        "IBEG,BEG",
        "--jobs",
        "1",
        "-o",
        path(&csv),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(&csv).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert!(lines[0].starts_with("instance,"));
    assert_eq!(lines.len(), 1 + 6 * 2);
    assert!(lines[1].contains("_bf3_bi3") && lines[1].contains(",IBEG,"));
    assert!(lines[2].contains(",BEG,"));
}

#[test]
fn verify_agrees_with_brute_force() {
    let out = fortify(&["verify", "--count", "6", "--max-n", "6"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(stdout(&out).contains("0 mismatches"));
}

#[test]
fn seed_environment_variable_overrides_flag() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.txt");
    let b = dir.path().join("b.txt");
    let c = dir.path().join("c.txt");
    fortify(&["generate", "kfg", "--seed", "5", "-o", path(&a)]);
    let env = Command::new(env!("CARGO_BIN_EXE_fortify"))
        .args(["generate", "kfg", "--seed", "9", "-o", path(&b)])
        .env("FORTIFY_SEED", "5")
        .output()
        .unwrap();
    assert!(env.status.success());
    fortify(&["generate", "kfg", "--seed", "9", "-o", path(&c)]);
    let read = |p: &Path| std::fs::read_to_string(p).unwrap();
    assert_eq!(read(&a), read(&b));
    assert_ne!(read(&a), read(&c));

    let bad = Command::new(env!("CARGO_BIN_EXE_fortify"))
        .args(["verify", "--count", "1"])
        .env("FORTIFY_SEED", "abc")
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(2));
}
