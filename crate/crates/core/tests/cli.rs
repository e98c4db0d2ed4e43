use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn nlacoustics(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nlacoustics")).args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn dir_arg(dir: &Path) -> String {
    format!("output.dir=\"{}\"", dir.display())
}

#[test]
fn run_writes_all_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("run.toml");
    fs::write(
        &cfg,
        "preset = \"exp1d-linear\"\n[domain]\nn = 20\n[time]\nt_end = 2e-6\nsnapshots = [5e-7]\n",
    )
    .unwrap();
    let out_dir = tmp.path().join("out");
    let out = nlacoustics(&["run", cfg.to_str().unwrap(), "--set", &dir_arg(&out_dir)]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));

    let energy = fs::read_to_string(out_dir.join("energy.csv")).unwrap();
    let lines: Vec<&str> = energy.lines().collect();
    assert_eq!(lines[0], "t,hamiltonian,dissipation,skew_term");
    assert_eq!(lines.len(), 1 + 21);
    let profile = fs::read_to_string(out_dir.join("profile_5e-7.csv")).unwrap();
    assert_eq!(profile.lines().next(), Some("x,h,v"));
    assert_eq!(profile.lines().count(), 1 + 2 * 20 + 1);

    // the echoed configuration reproduces the run exactly
    let echoed = nlacoustics::io::parse_config(&out_dir.join("config.toml"), &[]).unwrap();
    assert_eq!(echoed, nlacoustics::io::parse_config(&cfg, &[dir_arg(&out_dir)]).unwrap());
    assert_eq!((echoed.domain.n, echoed.time.t_end), (20, 2e-6));
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(out_dir.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["steps"], 20);
    assert_eq!(report["model"], "linear");

    let fit = nlacoustics(&["fit-decay", out_dir.join("energy.csv").to_str().unwrap()]);
    assert_eq!(code(&fit), 0, "{}", String::from_utf8_lossy(&fit.stderr));
    let fit: serde_json::Value = serde_json::from_slice(&fit.stdout).unwrap();
    assert!(fit["c1_fit"].as_f64().unwrap() > 0.0);
    assert!(fit["r_squared"].as_f64().unwrap() > 0.9);
}

#[test]
fn config_errors_exit_with_2() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("bad.toml");
    fs::write(&cfg, "[domain]\ncells = 20\n").unwrap();
    let out = nlacoustics(&["run", cfg.to_str().unwrap()]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("cells"));

    // t_end off the time grid
    let out = nlacoustics(&["exp1d", "--model", "linear", "--set", "time.t_end=1.05e-7"]);
    assert_eq!(code(&out), 2);

    let out = nlacoustics(&["run", tmp.path().join("missing.toml").to_str().unwrap()]);
    assert_eq!(code(&out), 2);

    let out = nlacoustics(&["exp1d", "--set", "time.nope=1"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn degenerate_run_exits_with_3() {
    // a h(0) = 2/c0^2 * 1.2e6 > 1 for the 2D Westervelt preset
    let tmp = tempfile::tempdir().unwrap();
    let out = nlacoustics(&[
        "exp2d",
        "--model",
        "westervelt",
        "--set",
        "domain.n=40",
        "--set",
        "time.t_end=2e-7",
        "--set",
        "time.snapshots=[]",
        "--set",
        &dir_arg(tmp.path()),
    ]);
    assert_eq!(code(&out), 3, "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stderr).contains("degenerate"));
    // the energy history up to the failure is still written
    assert!(tmp.path().join("energy.csv").exists());
}

#[test]
fn temporal_convergence_table() {
    let tmp = tempfile::tempdir().unwrap();
    let out = nlacoustics(&["convergence", "--kind", "temporal", "--out", tmp.path().to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let text = fs::read_to_string(tmp.path().join("convergence_temporal.csv")).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "resolution,error,order");
    assert_eq!(lines.len(), 4);
    assert!(lines[1].ends_with(','));
    for l in &lines[2..] {
        let order: f64 = l.rsplit(',').next().unwrap().parse().unwrap();
        assert!((order - 2.0).abs() < 0.1, "{l}");
    }
}

#[test]
fn fit_decay_rejects_short_files() {
    let tmp = tempfile::tempdir().unwrap();
    let p = tmp.path().join("energy.csv");
    fs::write(&p, "t,hamiltonian,dissipation,skew_term\n0,1,0,0\n1e-7,0.9,0,0\n").unwrap();
    let out = nlacoustics(&["fit-decay", p.to_str().unwrap()]);
    assert_eq!(code(&out), 2);
}
