use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_gapkin"));
    c.env_remove("GAPKIN_THREADS");
    c
}

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

const SMALL_SIM: &str = r#"
name = "small"
[domain]
type = "disk"
radius = 1.0
[velocity]
r0 = 0.5
Rmax = 3.0
[wall]
type = "maxwell"
theta = 1.0
[sim]
particles = 4000
seed = 11
t_end = 6.0
record_dt = 0.5
initial = { type = "uniform", speed = "measure" }
grid = { radial = 1, mu = 2, sectors = 4, speed_bins = 1 }
"#;

fn write_cfg(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

#[test]
fn geometry_check_writes_headed_csv() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let cfg = configs().join("disk_maxwell.toml");
    let o = run(&["geometry-check", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(out.join("change_of_variables.csv")).unwrap();
    let mut lines = csv.lines();
    let first = lines.next().unwrap();
    assert!(first.starts_with("# config_sha256="), "{first}");
    assert!(first.ends_with(" seed=1"), "{first}");
    assert_eq!(lines.next().unwrap(), "x,y,z,test,lhs,rhs,abs_err");
    assert!(out.join("config.resolved.toml").exists());
    let report = std::fs::read_to_string(out.join("report.toml")).unwrap();
    assert!(report.contains("config_sha256"));
}

#[test]
fn unknown_key_is_a_config_error_without_output() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_cfg(tmp.path(), "bad.toml", &format!("{SMALL_SIM}\n[spectral]\nboundary_nodez = 3\n"));
    let out = tmp.path().join("out");
    let o = run(&["simulate", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    assert!(!out.exists());
}

#[test]
fn invalid_values_are_config_errors() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let cfg = write_cfg(tmp.path(), "bad.toml", &SMALL_SIM.replace("r0 = 0.5", "r0 = 4.0"));
    let o = run(&["simulate", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    assert!(!out.exists());
    let missing = tmp.path().join("nope.toml");
    assert_eq!(code(&run(&["simulate", "--config", missing.to_str().unwrap()])), 2);
}

#[test]
fn missing_config_and_bad_flags_exit_2() {
    assert_eq!(code(&run(&["simulate"])), 2);
    assert_eq!(code(&run(&["simulate", "--seed", "x"])), 2);
    assert_eq!(code(&run(&["no-such-command"])), 2);
    let cfg = configs().join("disk_maxwell.toml");
    assert_eq!(code(&run(&["geometry-check", "--config", cfg.to_str().unwrap(), "--threads", "0"])), 2);
}

#[test]
fn spectrum_refuses_a_specular_wall() {
    let cfg = configs().join("specular.toml");
    let o = run(&["spectrum", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&o), 2, "{}", String::from_utf8_lossy(&o.stderr));
}

fn simulate_bytes(cfg: &Path, dir: &Path, extra: &[&str], threads_env: Option<&str>) -> String {
    let mut c = bin();
    c.args(["simulate", "--config", cfg.to_str().unwrap(), "--out", dir.to_str().unwrap()]);
    c.args(extra);
    if let Some(t) = threads_env {
        c.env("GAPKIN_THREADS", t);
    }
    let o = c.output().unwrap();
    assert!(matches!(code(&o), 0 | 1), "{}", String::from_utf8_lossy(&o.stderr));
    std::fs::read_to_string(dir.join("simulate.csv")).unwrap()
}

#[test]
fn simulate_is_bit_stable_across_threads() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_cfg(tmp.path(), "small.toml", SMALL_SIM);
    let a = simulate_bytes(&cfg, &tmp.path().join("a"), &["--threads", "1"], None);
    let b = simulate_bytes(&cfg, &tmp.path().join("b"), &["--threads", "2"], None);
    let c = simulate_bytes(&cfg, &tmp.path().join("c"), &[], Some("3"));
    assert_eq!(a, b);
    assert_eq!(a, c);
    assert!(a.lines().next().unwrap().ends_with(" seed=11"));
    assert!(a.lines().nth(1).unwrap().starts_with("t,total_mass,gen0,"));
}

#[test]
fn seed_override_changes_the_run() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_cfg(tmp.path(), "small.toml", SMALL_SIM);
    let a = simulate_bytes(&cfg, &tmp.path().join("a"), &[], None);
    let b = simulate_bytes(&cfg, &tmp.path().join("b"), &["--seed", "12"], None);
    let first = |s: &str| s.lines().next().unwrap().to_string();
    assert!(first(&b).ends_with(" seed=12"));
    assert_ne!(first(&a), first(&b));
    assert_ne!(a, b);
    let resolved = std::fs::read_to_string(tmp.path().join("b/config.resolved.toml")).unwrap();
    assert!(resolved.contains("seed = 12"));
}

#[test]
fn broken_tolerance_fails_with_exit_1() {
    let tmp = tempfile::tempdir().unwrap();
    let text = format!("{SMALL_SIM}\n[acceptance]\ntolerances = {{ cov_constant = -1.0 }}\n");
    let cfg = write_cfg(tmp.path(), "broken.toml", &text);
    let o = run(&["geometry-check", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stdout).contains("FAIL"));
}
