use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_zeno-herald"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn read(p: &Path) -> String {
    std::fs::read_to_string(p).unwrap()
}

#[test]
fn fig2a_golden_rows() {
    let o = run(&["fig2a", "--grid=0:5:101:lin"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 102);
    assert_eq!(lines[0], "mu,p0,p1,p_multi");
    assert_eq!(
        lines[1],
        "0.000000000000e+00,1.000000000000e+00,0.000000000000e+00,0.000000000000e+00"
    );
    assert!(
        lines[71].starts_with("3.500000000000e+00,5.0707883333"),
        "{}",
        lines[71]
    );
}

#[test]
fn output_file_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    let grid = "--grid=0.1:1000:4:log";
    let o = run(&[
        "fig4",
        grid,
        "--workers=1",
        &format!("--out={}", a.display()),
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    let o = run(&[
        "fig4",
        grid,
        "--workers=4",
        &format!("--out={}", b.display()),
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(read(&a), read(&b));
    assert!(read(&a).starts_with("gamma2,loss_ratio,detector,ps,pe,h\n"));
}

#[test]
fn config_file_sets_defaults_and_flags_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "# point settings\nmu = 0\ngamma2_gate=50\neta=0.5\n").unwrap();
    let cfg_flag = format!("--config={}", cfg.display());

    let text = stdout(&run(&["point", &cfg_flag]));
    let row: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(row[0], "0.000000000000e+00");
    assert_eq!(row[3], "5.000000000000e+01");
    assert_eq!(row[4], "5.000000000000e-01");

    let text = stdout(&run(&["point", &cfg_flag, "--mu=2"]));
    let row: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(row[0], "2.000000000000e+00");
    assert_eq!(row[3], "5.000000000000e+01");
}

#[test]
fn point_prints_summary() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("p.csv");
    let o = run(&["point", &format!("--out={}", out.display())]);
    assert_eq!(o.status.code(), Some(0));
    let summary = stdout(&o);
    for key in ["P_s", "P_e", "H", "F", "p_multi_input"] {
        assert!(summary.contains(key), "{summary}");
    }
    assert_eq!(read(&out).lines().count(), 2);
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(run(&["fig9"]).status.code(), Some(2));
    assert_eq!(run(&["fig2a", "--mu=abc"]).status.code(), Some(2));
    assert_eq!(run(&["fig2b", "--grid=0:1:5:log"]).status.code(), Some(2));
    assert_eq!(run(&["point", "--eta=1.5"]).status.code(), Some(2));

    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    std::fs::write(&cfg, "colour=red\n").unwrap();
    assert_eq!(
        run(&["point", &format!("--config={}", cfg.display())])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn io_errors_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("none").join("out.csv");
    assert_eq!(
        run(&["point", &format!("--out={}", missing.display())])
            .status
            .code(),
        Some(3)
    );
    let cfg = dir.path().join("absent.cfg");
    assert_eq!(
        run(&["point", &format!("--config={}", cfg.display())])
            .status
            .code(),
        Some(3)
    );
}

#[test]
fn help_lists_defaults() {
    let o = run(&["fig4", "--help"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    for s in [
        "--loss-ratio",
        "--gamma2-filter",
        "[default: 3.5]",
        "[default: 15]",
        "0.1:1000:61:log",
    ] {
        assert!(text.contains(s), "missing {s}");
    }
}

#[test]
fn verify_reports_each_check() {
    let o = run(&["verify"]);
    let text = stdout(&o);
    assert!(text.contains("PASS expm_rk4_oracle"));
    let failures: Vec<&str> = text.lines().filter(|l| l.starts_with("FAIL")).collect();
    // the strong-gate phase-flip threshold is the one known shortfall
    assert_eq!(failures.len(), 1, "{text}");
    assert!(failures[0].contains("zeno_flip_fidelity_at_1000"));
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn verify_negative_control() {
    let text = stdout(&run(&["verify", "--corrupt-u2"]));
    assert!(
        text.lines()
            .any(|l| l.starts_with("FAIL printed_matrix_match")),
        "{text}"
    );
}
