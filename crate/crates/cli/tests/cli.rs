use std::path::Path;
use std::process::{Command, Output};

fn cartpole(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cartpole"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

#[test]
fn list_names_every_scenario_and_figure() {
    let dir = tempfile::tempdir().unwrap();
    let o = cartpole(dir.path(), &["list"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 6);
    for (i, line) in lines.iter().enumerate() {
        assert!(line.starts_with(&format!("S{}", i + 1)), "{line}");
        assert!(line.contains("Fig"), "{line}");
    }
    assert!(lines[4].contains("Fig. 13"));
}

#[test]
fn run_s1_writes_header_plus_one_row_per_step() {
    let dir = tempfile::tempdir().unwrap();
    let o = cartpole(dir.path(), &["run", "S1"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv = std::fs::read_to_string(dir.path().join("S1.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "t,x,v,theta,omega,theta_sp,force,disturbance,measured_x,measured_theta,theta_deg"
    );
    assert_eq!(csv.lines().count(), 15001);
    assert!(stdout(&o).contains("outcome             settled"));
}

#[test]
fn run_s3_reports_failure_with_its_exit_code() {
    let dir = tempfile::tempdir().unwrap();
    let o = cartpole(dir.path(), &["run", "--scenario", "S3", "--out", "s3.csv"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stdout(&o).contains("fell over"));
}

#[test]
fn s2_at_thirty_centimetres_exceeds_the_track() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("s2.toml");
    let mut def = cartpole_cli::config::RunConfig {
        inline: Some((&cartpole_core::catalog::s2_family()[3]).into()),
        ..Default::default()
    };
    def.out = Some("wide.csv".into());
    std::fs::write(&cfg, def.to_toml()).unwrap();
    let o = cartpole(dir.path(), &["run", "--config", "s2.toml"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stdout(&o).contains("track exceeded"));
    assert!(dir.path().join("wide.csv").exists());
}

#[test]
fn configuration_errors_have_distinct_codes() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(cartpole(dir.path(), &["run", "S9"]).status.code(), Some(6));
    assert_eq!(
        cartpole(dir.path(), &["run", "--config", "missing.toml"])
            .status
            .code(),
        Some(1)
    );
    std::fs::write(dir.path().join("bad.toml"), "scenario = [").unwrap();
    assert_eq!(
        cartpole(dir.path(), &["run", "--config", "bad.toml"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(
        cartpole(dir.path(), &["run", "S1", "--dt", "0.0003"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(cartpole(dir.path(), &["frobnicate"]).status.code(), Some(1));
    let o = cartpole(dir.path(), &["run", "S1", "--out", "no/such/dir/x.csv"]);
    assert_eq!(o.status.code(), Some(5));
    assert!(stderr(&o).contains("no/such/dir/x.csv"));
}

#[test]
fn metrics_round_trips_the_run_report() {
    let dir = tempfile::tempdir().unwrap();
    for (name, format) in [("S1", "csv"), ("S6", "tsv")] {
        let out = format!("trace.{format}");
        let run = cartpole(
            dir.path(),
            &["run", name, "--out", &out, "--format", format],
        );
        let metrics = cartpole(dir.path(), &["metrics", &out, "--scenario", name]);
        assert_eq!(metrics.status.code(), Some(0), "{}", stderr(&metrics));
        assert_eq!(stdout(&run), stdout(&metrics), "{name}");
    }
}

#[test]
fn metrics_names_the_missing_column_and_rejects_truncation() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("few.csv"), "t,x,v\n0,0,0\n").unwrap();
    let o = cartpole(dir.path(), &["metrics", "few.csv", "--reference", "0.1"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("'theta'"), "{}", stderr(&o));

    cartpole(dir.path(), &["run", "S1"]);
    let full = std::fs::read(dir.path().join("S1.csv")).unwrap();
    std::fs::write(dir.path().join("cut.csv"), &full[..full.len() / 2]).unwrap();
    let o = cartpole(dir.path(), &["metrics", "cut.csv", "--reference", "0.1"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn metrics_on_a_flat_trace_at_the_reference() {
    let dir = tempfile::tempdir().unwrap();
    let header = "t,x,v,theta,omega,theta_sp,force,disturbance,measured_x,measured_theta,theta_deg";
    let rows: String = (0..3)
        .map(|k| format!("{},0.1,0,0,0,0,0,0,0.1,0,0\n", k as f64 * 0.01))
        .collect();
    std::fs::write(dir.path().join("flat.csv"), format!("{header}\n{rows}")).unwrap();
    let o = cartpole(dir.path(), &["metrics", "flat.csv", "--reference", "0.1"]);
    let text = stdout(&o);
    assert_eq!(o.status.code(), Some(0));
    assert!(text.contains("settling_time_s     0\n"), "{text}");
    assert!(text.contains("outcome             settled"));
    let overshoot = text
        .lines()
        .find(|l| l.starts_with("percent_overshoot"))
        .unwrap();
    assert!(
        overshoot.ends_with(" 0") || overshoot.contains("none"),
        "{overshoot}"
    );
}

#[test]
fn sweep_reference_on_s1() {
    let dir = tempfile::tempdir().unwrap();
    let o = cartpole(
        dir.path(),
        &[
            "sweep",
            "--scenario",
            "S1",
            "reference",
            "0.10",
            "0.20",
            "0.25",
            "0.30",
            "--out",
            "runs",
        ],
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    let peaks: Vec<f64> = text
        .lines()
        .skip(1)
        .map(|l| l.split_whitespace().rev().nth(4).unwrap().parse().unwrap())
        .collect();
    assert_eq!(peaks.len(), 4);
    assert!(peaks.windows(2).all(|w| w[1] > w[0]), "{peaks:?}");
    assert_eq!(
        std::fs::read_dir(dir.path().join("runs")).unwrap().count(),
        4
    );
}

#[test]
fn sweep_s2_defaults_to_the_command_family() {
    let dir = tempfile::tempdir().unwrap();
    let text = stdout(&cartpole(
        dir.path(),
        &["sweep", "--scenario", "S2", "reference"],
    ));
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(rows.len(), 4);
    assert!(rows[..3].iter().all(|r| r.contains("settled")));
    assert!(rows[3].contains("track exceeded"));
}

#[test]
fn sweep_pendulum_mass_under_the_push() {
    let dir = tempfile::tempdir().unwrap();
    let o = cartpole(
        dir.path(),
        &[
            "sweep",
            "--scenario",
            "S3",
            "plant.pendulum_mass",
            "0.0374",
            "0.6",
        ],
    );
    let text = stdout(&o);
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert!(
        rows[0].contains("fell over") || rows[0].contains("track exceeded"),
        "{text}"
    );
    assert!(
        !rows[1].contains("fell over") && !rows[1].contains("track exceeded"),
        "{text}"
    );
}

#[test]
fn sweep_errors() {
    let dir = tempfile::tempdir().unwrap();
    let o = cartpole(
        dir.path(),
        &["sweep", "--scenario", "S1", "plant.colour", "1"],
    );
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("plant.pendulum_mass"));
    assert_eq!(
        cartpole(dir.path(), &["sweep", "--scenario", "S1", "reference"])
            .status
            .code(),
        Some(1)
    );
}

#[test]
fn tuned_gains_reload_into_run() {
    let dir = tempfile::tempdir().unwrap();
    let o = cartpole(
        dir.path(),
        &[
            "tune",
            "--scenario",
            "S1",
            "--from-reference",
            "--out",
            "gains.toml",
        ],
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("spec                PASS"));
    let rerun = cartpole(
        dir.path(),
        &["run", "--config", "gains.toml", "--out", "tuned.csv"],
    );
    assert_eq!(rerun.status.code(), Some(0));
    let (tune_out, run_out) = (stdout(&o), stdout(&rerun));
    let tune_report: Vec<&str> = tune_out.lines().take(12).collect();
    assert_eq!(tune_report, run_out.lines().collect::<Vec<_>>());
}

#[test]
fn impossible_spec_fails_the_search() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("spec.toml"),
        "max_settling_time = 0.01\nbudget = 20\n",
    )
    .unwrap();
    let o = cartpole(
        dir.path(),
        &[
            "tune",
            "--scenario",
            "S1",
            "--spec",
            "spec.toml",
            "--out",
            "g.toml",
        ],
    );
    assert_eq!(o.status.code(), Some(4));
    assert!(stderr(&o).contains("search failed"));
    assert!(!dir.path().join("g.toml").exists());
}

#[test]
fn seed_override_changes_only_noisy_runs() {
    let dir = tempfile::tempdir().unwrap();
    cartpole(dir.path(), &["run", "S6", "--out", "a.csv"]);
    cartpole(dir.path(), &["run", "S6", "--out", "b.csv", "--seed", "2"]);
    cartpole(dir.path(), &["run", "S6", "--out", "c.csv"]);
    let read = |f: &str| std::fs::read(dir.path().join(f)).unwrap();
    assert_ne!(read("a.csv"), read("b.csv"));
    assert_eq!(read("a.csv"), read("c.csv"));
}
