use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use ipm_core::io::{read_series, read_snapshot, write_snapshot};

fn ipm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ipm"))
        .args(args)
        .output()
        .expect("spawn ipm")
}

fn write_cfg(dir: &Path, text: &str) -> String {
    let p = dir.join("run.txt");
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

fn s2_run(dir: &Path) -> String {
    let cfg = write_cfg(
        dir,
        "domain.nx = 32\nscenario = s2_symmetric\nstepper.t_end = 0.3\nsample.interval = 0.05\n",
    );
    let out = dir.join("s2").to_str().unwrap().to_string();
    let o = ipm(&["run", "--config", &cfg, "--out", &out]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    out
}

#[test]
fn stratified_run_keeps_energy() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_cfg(
        dir.path(),
        "domain.nx = 32\nscenario = stratified\nscenario.profile = sin\nstepper.t_end = 1\nsample.interval = 0.25\n",
    );
    let out = dir.path().join("out");
    let o = ipm(&["run", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let series = read_series(out.join("series.csv")).unwrap();
    let e = series.column("E").unwrap();
    assert_eq!(e.len(), 5);
    assert!(e.iter().all(|v| (v - e[0]).abs() <= 1e-12 * e[0].abs()));
    assert!(out.join("certificates.csv").exists());
    assert!(out.join("snap_00004.ipms").exists());
}

#[test]
fn s2_series_is_monotone_and_repeatable() {
    let dir = tempfile::tempdir().unwrap();
    let out = s2_run(dir.path());
    let series = read_series(Path::new(&out).join("series.csv")).unwrap();
    let e = series.column("E").unwrap();
    assert!(e.windows(2).all(|w| w[1] <= w[0]));
    assert!(series.column("delta").unwrap().iter().all(|d| *d >= 0.0));
    let first = fs::read(Path::new(&out).join("series.csv")).unwrap();
    let out2 = dir.path().join("again");
    let cfg = dir.path().join("run.txt");
    ipm(&["run", "--config", cfg.to_str().unwrap(), "--out", out2.to_str().unwrap()]);
    assert_eq!(first, fs::read(out2.join("series.csv")).unwrap());
}

#[test]
fn malformed_key_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_cfg(dir.path(), "domain.nx = 32\nscenario.bubble.radios = 1\n");
    let o = ipm(&["run", "--config", &cfg, "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("scenario.bubble.radios"), "{err}");
    assert!(err.contains("line 2"), "{err}");
}

#[test]
fn monitor_trip_exits_2_with_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_cfg(
        dir.path(),
        "domain.nx = 32\nscenario = bubble\nscenario.bubble.markers = 64\nstepper.t_end = 1\nsample.interval = 0.1\n",
    );
    let out = dir.path().join("b");
    let o = ipm(&["run", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(out.join("series.csv").exists());
    assert!(out.join("curves.csv").exists());
    assert!(out.join("snap_00000.ipms").exists());
}

#[test]
fn certify_fresh_s2_run() {
    let dir = tempfile::tempdir().unwrap();
    let out = s2_run(dir.path());
    let o = ipm(&["certify", &out, "--checks", "energy,thm2"]);
    let text = String::from_utf8_lossy(&o.stdout);
    assert_eq!(o.status.code(), Some(0), "{text}");
    assert!(text.contains("energy_identity") && text.contains("thm2_chain"));
}

#[test]
fn certify_flags_corrupted_snapshot() {
    let dir = tempfile::tempdir().unwrap();
    let out = s2_run(dir.path());
    let snap = Path::new(&out).join("snap_00003.ipms");
    let (mut f, t) = read_snapshot(&snap).unwrap();
    let nx = f.domain().nx();
    for v in &mut f.values_mut()[7 * nx..8 * nx] {
        *v = -*v;
    }
    write_snapshot(&snap, &f, t).unwrap();
    let o = ipm(&["certify", &out, "--checks", "symmetry,thm2"]);
    let text = String::from_utf8_lossy(&o.stdout);
    assert_eq!(o.status.code(), Some(1), "{text}");
    assert!(text.contains("symmetry") && text.contains("FAIL"));
}

#[test]
fn certify_empty_check_list() {
    let dir = tempfile::tempdir().unwrap();
    let out = s2_run(dir.path());
    let o = ipm(&["certify", &out, "--checks", ""]);
    assert_eq!(o.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&o.stderr).contains("nothing to do"));
}

#[test]
fn norms_and_rearrange() {
    let dir = tempfile::tempdir().unwrap();
    let out = s2_run(dir.path());
    let snap = Path::new(&out).join("snap_00000.ipms");
    let o = ipm(&["norms", snap.to_str().unwrap(), "--s", "1,2"]);
    assert_eq!(o.status.code(), Some(0));
    let text = String::from_utf8_lossy(&o.stdout);
    assert!(text.contains("hs_drho_2") && text.contains("tail_fraction"));

    let cfg = write_cfg(
        dir.path(),
        "domain.nx = 64\nscenario = layered\nscenario.layered.shape = rotation\nscenario.layered.eps0 = 0.3\nstepper.t_end = 0.05\nsample.interval = 0.05\n",
    );
    let lay = dir.path().join("lay");
    ipm(&["run", "--config", &cfg, "--out", lay.to_str().unwrap()]);
    let r = dir.path().join("rs.ipms");
    let o = ipm(&["rearrange", lay.join("snap_00000.ipms").to_str().unwrap(), "--out", r.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stdout).starts_with("x2,rho_s"));
    assert!(read_snapshot(&r).is_ok());
}

#[test]
fn bad_snapshot_errors() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("junk.ipms");
    fs::write(&p, b"IPMSjunk").unwrap();
    let o = ipm(&["norms", p.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
}
