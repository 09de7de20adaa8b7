//! Command-line contract: exit codes, file layout and CSV headers.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn quadftc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_quadftc"))
        .args(args)
        .output()
        .expect("run quadftc")
}

fn write_cfg(dir: &Path, text: &str) -> String {
    let p = dir.join("run.cfg");
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

fn first_line(path: &Path) -> String {
    fs::read_to_string(path).unwrap().lines().next().unwrap_or("").to_string()
}

#[test]
fn trim_prints_operating_point() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_cfg(tmp.path(), "");
    let out = quadftc(&["trim", "--config", &cfg]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("omega_trim="), "{text}");
    assert!(text.contains("residual="));
}

#[test]
fn simulate_writes_trajectory_and_manifest() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_cfg(tmp.path(), "run.label = smoke\n");
    let out_dir = tmp.path().join("out");
    let out = quadftc(&[
        "simulate",
        "--config",
        &cfg,
        "--duration",
        "1",
        "--seed",
        "9",
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let traj = fs::read_to_string(out_dir.join("trajectory.csv")).unwrap();
    let mut lines = traj.split('\n');
    assert_eq!(
        lines.next().unwrap(),
        "t,u,v,w,p,q,r,phi,theta,psi,xn,yn,zn,omega1,omega2,omega3,omega4,reward,mode"
    );
    assert!(!traj.contains('\r'));
    assert_eq!(traj.lines().count(), 101);
    let manifest = fs::read_to_string(out_dir.join("manifest.txt")).unwrap();
    for key in ["command=simulate", "seed=9", "label=smoke", "config_hash=", "version="] {
        assert!(manifest.contains(key), "{manifest}");
    }
    // the saved configuration reproduces the run
    let again = tmp.path().join("again");
    let saved = out_dir.join("config.cfg");
    let out = quadftc(&[
        "simulate",
        "--config",
        saved.to_str().unwrap(),
        "--out",
        again.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert_eq!(fs::read(again.join("trajectory.csv")).unwrap(), traj.as_bytes());
}

#[test]
fn empty_sweep_gives_header_only() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_cfg(tmp.path(), "sweep.ics =\n");
    let out_dir = tmp.path().join("out");
    let out = quadftc(&["sweep", "--config", &cfg, "--out", out_dir.to_str().unwrap()]);
    assert!(out.status.success());
    let csv = fs::read_to_string(out_dir.join("sweep.csv")).unwrap();
    assert_eq!(
        csv,
        "ic,hover_time,done,x_min,x_max,y_min,y_max,z_min,z_max,yaw_rate_peak,mode_switches\n"
    );
}

#[test]
fn zero_episodes_gives_header_only_curve() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_cfg(tmp.path(), "ddpg.episodes = 0\n");
    let out_dir = tmp.path().join("out");
    let out = quadftc(&["train", "--config", &cfg, "--out", out_dir.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(
        fs::read_to_string(out_dir.join("learning_curve.csv")).unwrap(),
        "episode,score,steps,critic_loss,noise_sigma\n"
    );
}

#[test]
fn trained_actor_drives_simulate() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_cfg(
        tmp.path(),
        "ddpg.episodes = 2\nddpg.warmup = 100\nddpg.horizon = 2\nddpg.hidden = 8\n",
    );
    let train_dir = tmp.path().join("train");
    let out = quadftc(&["train", "--config", &cfg, "--out", train_dir.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(
        first_line(&train_dir.join("learning_curve.csv")),
        "episode,score,steps,critic_loss,noise_sigma"
    );
    let actor = format!("ddpg:{}", train_dir.join("actor_best.net").display());
    let sim_dir = tmp.path().join("sim");
    let out = quadftc(&[
        "simulate",
        "--config",
        &cfg,
        "--controller",
        &actor,
        "--duration",
        "0.5",
        "--out",
        sim_dir.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(fs::read_to_string(sim_dir.join("trajectory.csv")).unwrap().lines().count(), 51);
}

#[test]
fn config_errors_exit_2() {
    let tmp = tempfile::tempdir().unwrap();
    let missing = tmp.path().join("nope.cfg");
    let out = quadftc(&["trim", "--config", missing.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));

    let cfg = write_cfg(tmp.path(), "params.mass = 0\n");
    assert_eq!(quadftc(&["trim", "--config", &cfg]).status.code(), Some(2));

    let cfg = write_cfg(tmp.path(), "env.no_such_key = 1\n");
    let out = quadftc(&["simulate", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 1"));

    assert_eq!(quadftc(&["hover"]).status.code(), Some(2));
    let cfg = write_cfg(tmp.path(), "");
    assert_eq!(
        quadftc(&["simulate", "--config", &cfg, "--controller", "pid"]).status.code(),
        Some(2)
    );
}

#[test]
fn missing_checkpoint_exits_3() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_cfg(tmp.path(), "");
    let ctl = format!("ddpg:{}", tmp.path().join("absent.net").display());
    let out = quadftc(&[
        "simulate",
        "--config",
        &cfg,
        "--controller",
        &ctl,
        "--out",
        tmp.path().join("o").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(3));
}
