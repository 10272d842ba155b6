use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use nls_core::grid::read_snapshot;
use nls_lab::bundle::{read_manifest, read_table, DIAGNOSTICS_HEADER, PROFILE_HEADER, TRACK, TRACK_HEADER, TRAJECTORY_HEADER};

fn nls_lab(args: &[&str], threads: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_nls-lab"));
    cmd.args(args);
    if let Some(t) = threads {
        cmd.env("NLS_LAB_THREADS", t);
    }
    cmd.output().expect("spawn nls-lab")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

const SMALL_INTERACTION: &str = r#"
name = "small"
kind = "interaction1d"
m = 3.0
v0 = 1.0
epsilon = 0.2
horizon = "flat"
dt = 2e-3
stride = 200

[potential]
direction = "increasing"
a_minus = 1.0
a_plus = 2.0

[output]
snapshot_every = 25
"#;

const SMALL_FREE: &str = r#"
name = "free"
kind = "freesoliton"
m = 3.0
v0 = 1.0
t_free = 2.0
stride = 50

[grid]
n = 1024
length = 100.0
"#;

#[test]
fn predict_prints_limits() {
    let o = nls_lab(&["predict", "--m", "3", "--v0", "1"], None);
    assert!(o.status.success(), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["kind"], "Transmitted");
    assert!((v["c_inf"].as_f64().unwrap() - 4.0).abs() < 1e-12);
    assert!((v["v_inf"].as_f64().unwrap() - 5f64.sqrt()).abs() < 1e-12);
}

#[test]
fn interaction_bundle_is_complete_and_readable() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "s.toml", SMALL_INTERACTION);
    let out = dir.path().join("bundle");
    let o = nls_lab(&["simulate", &cfg, "--out", out.to_str().unwrap()], None);
    assert!(matches!(o.status.code(), Some(0) | Some(1)), "{}", stderr(&o));
    assert!(stdout(&o).contains("PASS c_rel_error"));

    let manifest = read_manifest(&out).unwrap();
    assert_eq!(manifest.kind, "Interaction1D");
    for f in &manifest.files {
        assert!(out.join(f).is_file(), "{f} listed but missing");
    }
    let (h, rows) = read_table(&out.join("diagnostics.csv")).unwrap();
    assert_eq!(h, DIAGNOSTICS_HEADER);
    assert!(rows.len() > 10);
    let (h, track) = read_table(&out.join(TRACK)).unwrap();
    assert_eq!(h, TRACK_HEADER);
    let last = track.last().unwrap();
    assert!((last[1] / 4.0 - 1.0).abs() < 0.05);
    assert_eq!(read_table(&out.join("trajectory.csv")).unwrap().0, TRAJECTORY_HEADER);
    assert_eq!(read_table(&out.join("profile.csv")).unwrap().0, PROFILE_HEADER);

    let snaps: Vec<_> = manifest.files.iter().filter(|f| f.ends_with(".nlsf")).collect();
    assert!(snaps.len() >= 2);
    let n = manifest.resolved["n"].as_u64().unwrap() as usize;
    let field = read_snapshot(fs::File::open(out.join(snaps[0])).unwrap()).unwrap();
    assert_eq!(field.grid.n(), n);
    assert!(field.values.iter().all(|z| z.re.is_finite() && z.im.is_finite()));
}

#[test]
fn thread_count_does_not_change_results() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "free.toml", SMALL_FREE);
    let mut outputs = Vec::new();
    for threads in ["1", "4"] {
        let out = dir.path().join(format!("t{threads}"));
        let o = nls_lab(&["simulate", &cfg, "--out", out.to_str().unwrap()], Some(threads));
        assert!(matches!(o.status.code(), Some(0) | Some(1)), "{}", stderr(&o));
        outputs.push(out);
    }
    for f in ["diagnostics.csv", TRACK, "comparison.json"] {
        let a = fs::read(outputs[0].join(f)).unwrap();
        let b = fs::read(outputs[1].join(f)).unwrap();
        assert!(a == b, "{f} differs between thread counts");
    }
}

#[test]
fn config_errors_exit_with_code_two() {
    let dir = tempfile::tempdir().unwrap();
    let unknown = write(dir.path(), "u.toml", &format!("{SMALL_FREE}\nbogus = 1\n"));
    let o = nls_lab(&["simulate", &unknown], None);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("bogus"), "{}", stderr(&o));

    let o = nls_lab(&["residual-scaling", &write(dir.path(), "f.toml", SMALL_FREE)], None);
    assert_eq!(o.status.code(), Some(2));

    let few = write(
        dir.path(),
        "c.toml",
        "name = \"c\"\nkind = \"convergencestudy\"\nv0 = 1.0\nepsilons = [0.2, 0.1]\n",
    );
    let o = nls_lab(&["converge", &few], None);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("at least 3"), "{}", stderr(&o));

    let o = nls_lab(&["verify-identities", "--m", "3"], Some("zero"));
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn suites_pass_from_the_command_line() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("ids");
    let o = nls_lab(&["verify-identities", "--m", "3", "--out", out.to_str().unwrap()], None);
    assert!(o.status.success(), "{}{}", stdout(&o), stderr(&o));
    assert!(out.join("identities.json").is_file());
    let o = nls_lab(&["verify-operators", "--m", "2"], None);
    assert!(o.status.success(), "{}{}", stdout(&o), stderr(&o));
}

#[test]
fn effective_writes_trajectory() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "s.toml", SMALL_INTERACTION);
    let out = dir.path().join("eff");
    let o = nls_lab(&["effective", &cfg, "--out", out.to_str().unwrap()], None);
    assert!(o.status.success(), "{}", stderr(&o));
    let (_, rows) = read_table(&out.join("trajectory.csv")).unwrap();
    let last = rows.last().unwrap();
    assert!((last[1] / 4.0 - 1.0).abs() < 1e-4);
    assert!(rows.iter().all(|r| r[5] < 1e-8));
}
