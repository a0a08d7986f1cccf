use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use kernel_bounds::harness::RunConfig;

fn config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name)
}

fn kbounds(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kbounds"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
}

fn lines(path: &Path) -> Vec<String> {
    fs::read_to_string(path).unwrap().lines().map(str::to_string).collect()
}

#[test]
fn prototype_config_matches_builtin_defaults() {
    let parsed = RunConfig::load(&config("prototype.toml")).unwrap();
    assert_eq!(parsed, RunConfig::prototype());
}

#[test]
fn check_passes_and_tags_every_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = kbounds(&["check", "--config", config("prototype.toml").to_str().unwrap()], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let hash = RunConfig::prototype().hash();
    for name in ["hypotheses.csv", "lyapunov.csv"] {
        let l = lines(&dir.path().join(name));
        assert!(!l[0].starts_with('#'));
        assert_eq!(l.last().unwrap(), &format!("# config-hash={hash}"));
    }
    let hyp = lines(&dir.path().join("hypotheses.csv"));
    assert_eq!(hyp[0], "t,id,measured,clamped,refined,closed_form,stable,pass");
    assert!(hyp[1..hyp.len() - 1].iter().all(|r| r.ends_with(",true,true")));
}

#[test]
fn identical_config_gives_identical_bytes() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let cfg = config("prototype.toml");
    for d in [&a, &b] {
        let out = kbounds(&["check", "--config", cfg.to_str().unwrap()], d.path());
        assert_eq!(out.status.code(), Some(0));
        let out = kbounds(&["constants", "--dry-run", "--config", cfg.to_str().unwrap()], d.path());
        assert_eq!(out.status.code(), Some(0));
    }
    for name in ["hypotheses.csv", "lyapunov.csv", "constants.csv"] {
        assert_eq!(fs::read(a.path().join(name)).unwrap(), fs::read(b.path().join(name)).unwrap(), "{name}");
    }
}

#[test]
fn dry_run_constants_with_unit_placeholders() {
    let dir = tempfile::tempdir().unwrap();
    let out = kbounds(
        &["constants", "--dry-run", "--t", "0.4", "--config", config("prototype.toml").to_str().unwrap()],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let l = lines(&dir.path().join("constants.csv"));
    assert_eq!(l[0], "name,value,log10");
    assert!(l.contains(&"B8,2.0,0.30102999566398114".to_string()), "{l:?}");
    assert!(l.contains(&"window.a0,0.2,-0.6989700043360187".to_string()), "{l:?}");
    assert!(l.contains(&"A3,3.0,0.4771212547196623".to_string()), "{l:?}");
}

#[test]
fn constants_without_a_solve_is_a_missing_artifact() {
    let dir = tempfile::tempdir().unwrap();
    let out = kbounds(&["constants", "--config", config("prototype.toml").to_str().unwrap()], dir.path());
    assert_eq!(out.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&out.stderr).contains("functionals.csv"));
}

#[test]
fn solve_then_constants() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config("prototype.toml");
    let out = kbounds(&["solve", "--config", cfg.to_str().unwrap()], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let kernel = lines(&dir.path().join("kernel.csv"));
    assert_eq!(kernel[0], "t,y,p,grad_p");
    let out = kbounds(&["constants", "--mode", "closed-form", "--config", cfg.to_str().unwrap()], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let l = lines(&dir.path().join("constants.csv"));
    assert!(l.iter().any(|r| r.starts_with("K,")), "{l:?}");

    // measured c2 at a0 = 0.2 is the certified supremum of the t = 0.4 window
    let out = kbounds(&["check", "--config", cfg.to_str().unwrap()], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let out = kbounds(&["constants", "--config", cfg.to_str().unwrap()], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let field = |row: &str, i: usize| row.split(',').nth(i).unwrap().to_string();
    let certified = lines(&dir.path().join("hypotheses.csv"))
        .into_iter()
        .find(|r| r.starts_with("0.4,c2,"))
        .map(|r| field(&r, 3))
        .unwrap();
    let used = lines(&dir.path().join("constants.csv"))
        .into_iter()
        .find(|r| r.starts_with("c2,"))
        .map(|r| field(&r, 1))
        .unwrap();
    assert_eq!(used, certified);
}

#[test]
fn constraint_violation_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = kbounds(&["check", "--config", config("rejected.toml").to_str().unwrap()], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("s > |m−2|"));
}

#[test]
fn unreadable_config_is_a_missing_artifact() {
    let dir = tempfile::tempdir().unwrap();
    let out = kbounds(&["check", "--config", "/nonexistent/run.toml"], dir.path());
    assert_eq!(out.status.code(), Some(4));
}

fn with_overrides(dir: &Path, extra: &str) -> PathBuf {
    let base = fs::read_to_string(config("prototype.toml")).unwrap();
    let mut text = String::new();
    let mut skip = false;
    for line in base.lines() {
        if line.starts_with('[') {
            skip = extra.contains(line);
        }
        if !skip {
            text.push_str(line);
            text.push('\n');
        }
    }
    text.push_str(extra);
    let p = dir.join("run.toml");
    fs::write(&p, text).unwrap();
    p
}

#[test]
fn uncalibrated_envelope_exits_with_five() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = with_overrides(
        dir.path(),
        "[validation]\ncalibration = \"fixed\"\nc_cal = 1e-60\n",
    );
    let out = kbounds(&["validate", "--config", cfg.to_str().unwrap()], dir.path());
    assert_eq!(out.status.code(), Some(5), "{}", String::from_utf8_lossy(&out.stdout));
    assert!(dir.path().join("validation.csv").exists());
}

#[test]
fn coarse_monte_carlo_step_exits_with_six() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = with_overrides(
        dir.path(),
        "[mc]\npaths = 100000\ndt = 0.05\n\n[validation]\ncrosscheck_times = [0.3]\n",
    );
    let out = kbounds(&["crosscheck", "--config", cfg.to_str().unwrap()], dir.path());
    assert_eq!(out.status.code(), Some(6), "{}", String::from_utf8_lossy(&out.stdout));
}

#[test]
fn cutoff_near_the_source_exits_with_seven() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = with_overrides(dir.path(), "[lyapunov]\nt0 = 0.9\n\n[approx]\nlevels = [1.0, 1.5]\n");
    let out = kbounds(&["approx", "--config", cfg.to_str().unwrap()], dir.path());
    assert_eq!(out.status.code(), Some(7), "{}", String::from_utf8_lossy(&out.stdout));
}
