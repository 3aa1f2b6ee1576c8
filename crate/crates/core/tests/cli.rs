use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn diffloc(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_diffloc"))
        .args(args)
        .current_dir(dir)
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

#[test]
fn simulate_then_metrics_agree() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("s.cfg"), "duration = 20\nseeds = 5\n").unwrap();
    let sim = diffloc(&["simulate", "s.cfg", "--out", "run"], dir.path());
    assert!(sim.status.success(), "{}", stderr(&sim));
    let log = dir.path().join("run/trajectory_seed5.csv");
    let text = fs::read_to_string(&log).unwrap();
    assert!(text.starts_with("t,x_true,y_true,th_true,"));
    assert_eq!(text.lines().count(), 201);

    let summary = fs::read_to_string(dir.path().join("run/summary_seed5.csv")).unwrap();
    assert_eq!(stdout(&sim), summary);
    let metrics = diffloc(&["metrics", "run/trajectory_seed5.csv"], dir.path());
    assert!(metrics.status.success(), "{}", stderr(&metrics));
    assert_eq!(stdout(&metrics), summary);
}

#[test]
fn seed_flag_changes_the_run() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("s.cfg"), "duration = 5\n").unwrap();
    for seed in ["1", "2"] {
        let o = diffloc(
            &["simulate", "s.cfg", "--seed", seed, "--out", "o"],
            dir.path(),
        );
        assert!(o.status.success());
    }
    let a = fs::read(dir.path().join("o/trajectory_seed1.csv")).unwrap();
    let b = fs::read(dir.path().join("o/trajectory_seed2.csv")).unwrap();
    assert_ne!(a, b);
}

#[test]
fn config_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("bad.cfg"), "wheel_radius = -1\n").unwrap();
    let o = diffloc(&["simulate", "bad.cfg"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("wheel_radius"), "{}", stderr(&o));

    fs::write(dir.path().join("typo.cfg"), "duraton = 3\n").unwrap();
    let o = diffloc(&["simulate", "typo.cfg"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("duraton"), "{}", stderr(&o));
}

#[test]
fn singular_measurement_noise_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("z.cfg"),
        "duration = 2\nr_fixed = 0,0,0\ndelta = 0\n",
    )
    .unwrap();
    let o = diffloc(&["simulate", "z.cfg", "--out", "o"], dir.path());
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
}

#[test]
fn malformed_log_names_the_line() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("s.cfg"), "duration = 1\n").unwrap();
    assert!(diffloc(&["simulate", "s.cfg", "--out", "o"], dir.path())
        .status
        .success());
    let path = dir.path().join("o/trajectory_seed1.csv");
    let mut lines: Vec<String> = fs::read_to_string(&path)
        .unwrap()
        .lines()
        .map(String::from)
        .collect();
    lines[3] = "0.3,oops".into();
    fs::write(&path, lines.join("\n")).unwrap();
    let o = diffloc(&["metrics", "o/trajectory_seed1.csv"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains(":4:"), "{}", stderr(&o));
}

#[test]
fn montecarlo_writes_runs_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("mc.cfg"),
        "duration = 10\nseeds = 1-4\nout_dir = mc\n",
    )
    .unwrap();
    let par = diffloc(&["montecarlo", "mc.cfg"], dir.path());
    assert!(par.status.success(), "{}", stderr(&par));
    let runs = fs::read_to_string(dir.path().join("mc/montecarlo_runs.csv")).unwrap();
    assert_eq!(runs.lines().count(), 1 + 4 * 2);
    let summary = stdout(&par);
    assert!(summary.contains("median,ekf,4,"));
    let seq = diffloc(&["montecarlo", "mc.cfg", "--sequential"], dir.path());
    assert_eq!(stdout(&seq), summary);
}

#[test]
fn lrf_project_writes_points_and_counts_rejects() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("sweep.txt"),
        "# alpha beta range\n0 0 2\n0 90 1\n10 0 1\n0 0 100\n30 0 1\n",
    )
    .unwrap();
    let o = diffloc(&["lrf-project", "sweep.txt", "cloud.txt"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stderr(&o).contains("2 rejected"), "{}", stderr(&o));
    let cloud = fs::read_to_string(dir.path().join("cloud.txt")).unwrap();
    let lines: Vec<&str> = cloud.lines().collect();
    assert_eq!(lines.len(), 3);
    assert_eq!(lines[0], "2 0 0");
    let p: Vec<f64> = lines[1].split(' ').map(|v| v.parse().unwrap()).collect();
    assert!(p[0].abs() < 1e-9 && (p[1] - 1.0).abs() < 1e-9 && p[2].abs() < 1e-9);
    assert_eq!(lines[2], "0.984807753 0 0.173648178");
}

#[test]
fn lrf_project_malformed_line() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("sweep.txt"), "0 0 1\n\n0 x 1\n").unwrap();
    let o = diffloc(&["lrf-project", "sweep.txt", "cloud.txt"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("sweep.txt:3:"), "{}", stderr(&o));
}
