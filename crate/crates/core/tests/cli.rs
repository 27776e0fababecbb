use std::path::Path;
use std::process::{Command, Output};

use fpinit::experiments::{read_aggregates_csv, read_figure_csv, read_rows_csv};

fn fpinit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fpinit"))
        .args(args)
        .env_remove("NASH_INIT_THREADS")
        .output()
        .unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn write_pennies(dir: &Path) -> String {
    let path = dir.join("pennies.json");
    std::fs::write(&path, r#"{"players": 2, "actions": 2, "payoffs": [1,-1,-1,1,-1,1,1,-1]}"#).unwrap();
    path.to_str().unwrap().to_string()
}

const SMALL: [&str; 10] = ["--players", "3", "--actions", "5", "--games", "10", "--iters", "100", "--seed", "7"];

#[test]
fn solve_matching_pennies() {
    let dir = tempfile::tempdir().unwrap();
    let game = write_pennies(dir.path());
    let sol = dir.path().join("sol.json");
    let out = fpinit(&["solve", &game, "--algorithm", "classic", "--out", sol.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.starts_with("seed: 0\n"));
    assert!(text.contains("player 0: ["));
    assert!(text.contains("player 1: ["));
    let eps: f64 = text.lines().last().unwrap().strip_prefix("epsilon: ").unwrap().parse().unwrap();
    assert!(eps < 0.05, "{eps}");
    let json: serde_json::Value = serde_json::from_slice(&std::fs::read(sol).unwrap()).unwrap();
    assert_eq!(json["algorithm"], "classic");
    assert_eq!(json["K"], 1);
    assert_eq!(json["strategies"].as_array().unwrap().len(), 2);
    assert!((json["epsilon"].as_f64().unwrap() - eps).abs() < 1e-8);
}

#[test]
fn solve_writes_trajectory() {
    let dir = tempfile::tempdir().unwrap();
    let game = write_pennies(dir.path());
    let traj = dir.path().join("traj.csv");
    let out = fpinit(&[
        "solve", &game, "--algorithm", "macqueen-2", "--inits", "3", "--iters", "250",
        "--trajectory", traj.to_str().unwrap(), "--trajectory-stride", "100",
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let text = std::fs::read_to_string(traj).unwrap();
    assert!(text.starts_with("t,player,action,prob\n"));
    // t = 0, 100, 200, 250 with 4 rows each
    assert_eq!(text.lines().count(), 1 + 4 * 4);
}

#[test]
fn missing_and_malformed_game_files_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = fpinit(&["solve", dir.path().join("nope.json").to_str().unwrap()]);
    assert_eq!(code(&out), 2);
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"players": 2, "actions": 2, "payoffs": [1, 2, 3]}"#).unwrap();
    let out = fpinit(&["solve", bad.to_str().unwrap()]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("bad.json"));
}

#[test]
fn invalid_flags_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let game = write_pennies(dir.path());
    assert_eq!(code(&fpinit(&["solve", &game, "--inits", "0"])), 1);
    assert_eq!(code(&fpinit(&["experiment", "--games", "0"])), 1);
    assert_eq!(code(&fpinit(&["sweep", "--inits", "5,2", "--games", "1"])), 1);
    assert_eq!(code(&fpinit(&["experiment", "--frobnicate"])), 1);
    assert_eq!(code(&fpinit(&["experiment", "--pool", "3", "--algorithms", "k-means", "--games", "1"])), 1);
    let out = fpinit(&["experiment", "--algorithms", "classic,simplex"]);
    assert_eq!(code(&out), 1);
    for id in ["classic", "macqueen-1", "macqueen-2", "maximin-u", "maximin-s", "fp++", "k-means"] {
        assert!(stderr(&out).contains(id), "{}", stderr(&out));
    }
}

#[test]
fn help_and_version_exit_0() {
    assert_eq!(code(&fpinit(&["--help"])), 0);
    assert_eq!(code(&fpinit(&["--version"])), 0);
    assert_eq!(code(&fpinit(&["experiment", "--help"])), 0);
}

#[test]
fn unwritable_output_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    std::fs::write(&blocker, "").unwrap();
    let target = blocker.join("sub");
    let mut args = vec!["experiment"];
    args.extend(SMALL);
    args.extend(["--algorithms", "classic", "--out", target.to_str().unwrap()]);
    assert_eq!(code(&fpinit(&args)), 3);

    let game = write_pennies(dir.path());
    let out = fpinit(&["solve", &game, "--iters", "10", "--out", target.to_str().unwrap()]);
    assert_eq!(code(&out), 3);
}

fn experiment(out_dir: &Path, extra: &[&str]) -> Output {
    let mut args = vec!["experiment"];
    args.extend(SMALL);
    args.extend(["--inits", "5", "--pool", "300", "--out", out_dir.to_str().unwrap()]);
    args.extend(extra);
    fpinit(&args)
}

#[test]
fn experiment_is_deterministic_and_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    let first = experiment(&a, &[]);
    assert_eq!(code(&first), 0, "{}", stderr(&first));
    assert!(stdout(&first).starts_with("seed: 7 "));
    assert!(stdout(&first).contains("maximin-u"));
    assert_eq!(code(&experiment(&b, &[])), 0);
    let rows_a = std::fs::read(a.join("rows.csv")).unwrap();
    assert_eq!(rows_a, std::fs::read(b.join("rows.csv")).unwrap());
    assert_eq!(
        std::fs::read(a.join("aggregates.csv")).unwrap(),
        std::fs::read(b.join("aggregates.csv")).unwrap()
    );

    let rows = read_rows_csv(&rows_a[..]).unwrap();
    assert_eq!(rows.len(), 10 * 7);
    let aggs = read_aggregates_csv(&std::fs::read(a.join("aggregates.csv")).unwrap()[..]).unwrap();
    assert_eq!(aggs.len(), 7);
    assert!(aggs.iter().all(|g| g.games == 10 && g.k == 5));
}

#[test]
fn threads_flag_and_env_do_not_change_rows() {
    let dir = tempfile::tempdir().unwrap();
    let base = dir.path().join("base");
    assert_eq!(code(&experiment(&base, &["--threads", "1"])), 0);
    let wide = dir.path().join("wide");
    assert_eq!(code(&experiment(&wide, &["--threads", "3"])), 0);
    let env = dir.path().join("env");
    let mut args = vec!["experiment".to_string()];
    args.extend(SMALL.iter().map(|s| s.to_string()));
    args.extend(["--inits", "5", "--pool", "300", "--out"].map(String::from));
    args.push(env.to_str().unwrap().to_string());
    let out = Command::new(env!("CARGO_BIN_EXE_fpinit"))
        .args(&args)
        .env("NASH_INIT_THREADS", "2")
        .output()
        .unwrap();
    assert_eq!(code(&out), 0);
    let rows = std::fs::read(base.join("rows.csv")).unwrap();
    assert_eq!(rows, std::fs::read(wide.join("rows.csv")).unwrap());
    assert_eq!(rows, std::fs::read(env.join("rows.csv")).unwrap());
}

#[test]
fn sweep_writes_figure_data() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("sweep");
    let out = fpinit(&[
        "sweep", "--games", "4", "--iters", "100", "--pool", "100", "--inits", "2,3",
        "--algorithms", "classic,maximin-s", "--out", out_dir.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let text = std::fs::read_to_string(out_dir.join("figure.csv")).unwrap();
    assert!(text.starts_with("algorithm,K,mean,ci95\n"));
    let points = read_figure_csv(text.as_bytes()).unwrap();
    assert_eq!(points.len(), 4);
    let classic: Vec<f64> = points.iter().filter(|p| p.algorithm.id() == "classic").map(|p| p.mean).collect();
    assert_eq!(classic[0], classic[1]);
}

#[test]
fn time_budget_marks_truncation() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("cut");
    let out = fpinit(&[
        "experiment", "--games", "5000", "--iters", "5", "--algorithms", "classic", "--time-budget", "0",
        "--out", out_dir.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let text = std::fs::read_to_string(out_dir.join("rows.csv")).unwrap();
    let marker = text.lines().last().unwrap();
    assert!(marker.starts_with("# truncated: ") && marker.ends_with(" of 5000 games completed"), "{marker}");
    let rows = read_rows_csv(text.as_bytes()).unwrap();
    assert!(!rows.is_empty() && rows.len() < 5000);
}

#[test]
fn gen_game_then_solve() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("g.json");
    let out = fpinit(&["gen-game", "--players", "3", "--actions", "4", "--seed", "5", "--out", path.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    let game = fpinit::game::read_game(&path).unwrap();
    assert_eq!(game, fpinit::random_game(3, 4, 5).unwrap());
    let out = fpinit(&["solve", path.to_str().unwrap(), "--algorithm", "fp++", "--pool", "200", "--iters", "200"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert_eq!(stdout(&out).lines().filter(|l| l.starts_with("player ")).count(), 3);
}
