use fkwave::cli::{main_with, Sidecar, WaveSummary};
use fkwave::cli::RunConfig;

fn run(args: &[&str]) -> i32 {
    main_with(std::iter::once("fkwave").chain(args.iter().copied()))
}

#[test]
fn exit_codes() {
    assert_eq!(run(&["kinetic", "--v-min", "0.5", "--v-max", "0.4", "--v-step", "0.1"]), 2);
    assert_eq!(run(&["no-such-command"]), 2);
    assert_eq!(run(&["wave"]), 2);
    assert_eq!(run(&["simulate", "--mu=-1", "--sigma", "0.1"]), 2);
    // both ends of the stress bracket move: nothing to bisect
    assert_eq!(run(&["threshold", "--sigma-lo", "0.3", "--sigma-hi", "0.4", "--n", "200", "--t-end", "50"]), 3);
}

#[test]
fn wave_outputs_and_sidecar_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("wave.csv");
    let o = out.to_str().unwrap();
    assert_eq!(run(&["wave", "--velocity", "0.3", "--points", "11", "--out", o]), 0);
    let csv = std::fs::read_to_string(&out).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "xi,u");
    assert_eq!(lines.len(), 12);
    assert!(lines.iter().all(|l| l.split(',').count() == 2));
    let side: Sidecar<WaveSummary> =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("wave.json")).unwrap()).unwrap();
    assert_eq!(side.config.velocity, Some(0.3));
    assert!((side.result.z - 0.0655).abs() < 1e-3);
    assert_eq!(side.result.branch, "NewType");

    // the sidecar config reruns to the same bytes
    let cfg_path = dir.path().join("again.json");
    let mut cfg: RunConfig = side.config.clone();
    cfg.out = Some(dir.path().join("wave2.csv"));
    std::fs::write(&cfg_path, serde_json::to_string(&cfg).unwrap()).unwrap();
    assert_eq!(run(&["wave", "--config-file", cfg_path.to_str().unwrap()]), 0);
    assert_eq!(std::fs::read_to_string(dir.path().join("wave2.csv")).unwrap(), csv);
}

#[test]
fn config_file_for_other_command_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("c.json");
    std::fs::write(&p, r#"{"command": "wave", "velocity": 0.5}"#).unwrap();
    assert_eq!(run(&["kinetic", "--config-file", p.to_str().unwrap()]), 2);
    std::fs::write(&p, r#"{"velocity": 0.5, "typo": 1}"#).unwrap();
    assert_eq!(run(&["kinetic", "--config-file", p.to_str().unwrap()]), 2);
}

#[test]
fn kinetic_rows_keep_grid_order_and_flags() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("k.csv");
    let v1 = "0.24441475248391872";
    assert_eq!(run(&["kinetic", "--velocities", &format!("0.6,{v1},0.5"), "--out", out.to_str().unwrap()]), 0);
    let text = std::fs::read_to_string(&out).unwrap();
    let rows: Vec<Vec<&str>> = text.lines().map(|l| l.split(',').collect()).collect();
    assert_eq!(rows[0], ["V", "sigma", "z", "branch", "admissible", "flag"]);
    assert!(rows.iter().all(|r| r.len() == 6));
    assert_eq!(rows[1][0].parse::<f64>().unwrap(), 0.6);
    assert_eq!(rows[2][5], "SKIPPED_RESONANT");
    assert_eq!(rows[3][3], "AC");
}

#[test]
fn bifurcation_and_resonance_tables() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("b.csv");
    assert_eq!(run(&["bifurcation", "--velocities", "0.35", "--out", out.to_str().unwrap()]), 0);
    let text = std::fs::read_to_string(&out).unwrap();
    let rows: Vec<Vec<&str>> = text.lines().map(|l| l.split(',').collect()).collect();
    assert_eq!(rows[0], ["V", "z_numeric", "z_linear", "z_quartic", "q0", "q_plus", "q_minus", "jump_check"]);
    assert_eq!(rows[1][7], "PASS");
    let zn: f64 = rows[1][1].parse().unwrap();
    let zl: f64 = rows[1][2].parse().unwrap();
    assert!((zn - zl).abs() / zn < 0.1);

    let r = dir.path().join("r.json");
    assert_eq!(run(&["resonances", "--count", "2", "--format", "json", "--out", r.to_str().unwrap()]), 0);
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&r).unwrap()).unwrap();
    assert!((v[0]["V"].as_f64().unwrap() - 0.244415).abs() < 1e-6);
}

#[test]
fn simulate_writes_track_snapshot_and_outcome() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sim.json");
    let o = out.to_str().unwrap();
    assert_eq!(run(&["simulate", "--sigma", "0.12", "--n", "200", "--t-end", "100", "--stride", "100", "--out", o]), 0);
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v["result"]["classification"]["kind"], "Trapped");
    let track = std::fs::read_to_string(dir.path().join("sim_track.csv")).unwrap();
    assert!(track.starts_with("t,nu\n"));
    assert_eq!(track.lines().count(), 1 + 1 + 100);
    let snap = std::fs::read_to_string(dir.path().join("sim_final.csv")).unwrap();
    assert_eq!(snap.lines().count(), 1 + 201);
}
