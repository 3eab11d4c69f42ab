use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_tempwave");

fn tempwave(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().unwrap()
}

fn ok(args: &[&str]) -> Output {
    let out = tempwave(args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// All files under `dir`, relative path and bytes, sorted.
fn snapshot(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                let rel = p.strip_prefix(dir).unwrap().to_string_lossy().into_owned();
                files.push((rel, fs::read(&p).unwrap()));
            }
        }
    }
    files.sort();
    files
}

#[test]
fn scenario_output_is_deterministic() {
    let tmp = tempfile::tempdir().unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    ok(&["scenario", "fig5", "--noise", "spl", "--seed", "11", "--out", s(&a)]);
    ok(&["scenario", "fig5", "--noise", "spl", "--seed", "11", "--out", s(&b)]);
    assert_eq!(snapshot(&a), snapshot(&b));
}

#[test]
fn different_seeds_give_different_counts() {
    let tmp = tempfile::tempdir().unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    ok(&["simulate", "--noise", "spl", "--seed", "1", "--out", s(&a)]);
    ok(&["simulate", "--noise", "spl", "--seed", "2", "--out", s(&b)]);
    assert_ne!(
        fs::read(a.join("P_D.csv")).unwrap(),
        fs::read(b.join("P_D.csv")).unwrap()
    );
}

#[test]
fn manifest_regenerates_identical_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    ok(&["scenario", "table1", "--noise", "spl", "--seed", "5", "--out", s(&a)]);
    let manifest = a.join("manifest.cfg");
    ok(&["scenario", "--config", s(&manifest), "--out", s(&b)]);
    assert_eq!(snapshot(&a), snapshot(&b));
}

#[test]
fn simulate_then_reconstruct_round_trip() {
    let tmp = tempfile::tempdir().unwrap();
    let sim = tmp.path().join("sim");
    let rec = tmp.path().join("rec");
    let direct = tmp.path().join("direct");
    ok(&["simulate", "--noise", "spl", "--seed", "9", "--out", s(&sim)]);
    ok(&["reconstruct", "--input", s(&sim), "--out", s(&rec)]);
    ok(&["scenario", "fig3", "--noise", "spl", "--seed", "9", "--out", s(&direct)]);
    for f in ["reconstruction.csv", "spectrum.csv", "summary.json"] {
        assert_eq!(fs::read(rec.join(f)).unwrap(), fs::read(direct.join(f)).unwrap(), "{f}");
    }
    let fid = ok(&["fidelity", "--input", s(&rec), "--truth", s(&sim)]);
    let text = String::from_utf8(fid.stdout).unwrap();
    let want = fs::read_to_string(direct.join("fidelity.csv")).unwrap();
    assert_eq!(text, want);
}

#[test]
fn fit_reads_reconstruction() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("run");
    ok(&["scenario", "fig3", "--out", s(&dir)]);
    let out = ok(&["fit", "--input", s(&dir.join("reconstruction.csv"))]);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let width = v["sinc_fit"]["params"]["delta_t"].as_f64().unwrap();
    assert!((width - 2.607).abs() < 0.01, "{width}");
}

#[test]
fn missing_polarization_is_a_data_error() {
    let tmp = tempfile::tempdir().unwrap();
    let sim = tmp.path().join("sim");
    ok(&["simulate", "--noise", "spl", "--out", s(&sim)]);
    fs::remove_file(sim.join("P_L.csv")).unwrap();
    let out = tempwave(&["reconstruct", "--input", s(&sim)]);
    assert_eq!(out.status.code(), Some(3));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("missing polarization L"), "{err}");
    assert_eq!(err.trim_end().lines().count(), 1);
}

#[test]
fn non_uniform_grid_is_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    let sim = tmp.path().join("sim");
    ok(&["simulate", "--noise", "spl", "--out", s(&sim)]);
    let path = sim.join("P_R.csv");
    let text = fs::read_to_string(&path).unwrap();
    let mut lines: Vec<String> = text.lines().map(String::from).collect();
    let row = &mut lines[10];
    let (t, v) = row.split_once(',').unwrap();
    *row = format!("{},{v}", t.parse::<f64>().unwrap() + 0.005);
    fs::write(&path, lines.join("\n") + "\n").unwrap();
    let out = tempwave(&["reconstruct", "--input", s(&sim)]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("uniform"));
}

#[test]
fn config_errors_exit_with_2() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("bad.cfg");
    fs::write(&cfg, "w_mm = 2\nwidth = 3\n").unwrap();
    let out = tempwave(&["simulate", "--config", s(&cfg), "--out", s(&tmp.path().join("o"))]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));

    fs::write(&cfg, "gate_fwhm_ps = 15\n").unwrap();
    let out = tempwave(&["simulate", "--config", s(&cfg), "--out", s(&tmp.path().join("o"))]);
    assert_eq!(out.status.code(), Some(2));

    assert_eq!(
        tempwave(&["scenario", "fig9", "--out", s(tmp.path())]).status.code(),
        Some(2)
    );
    assert_eq!(tempwave(&["scenario", "--out", s(tmp.path())]).status.code(), Some(2));
}

#[test]
fn list_scenarios_names_every_scenario() {
    let out = String::from_utf8(ok(&["list-scenarios"]).stdout).unwrap();
    for name in ["fig3", "fig4", "fig5", "fig6", "table1"] {
        assert!(out.contains(name));
    }
}

#[test]
fn width_sweep_files() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("fig4");
    ok(&["scenario", "fig4", "--out", s(&dir)]);
    let sweep = fs::read_to_string(dir.join("width_sweep.csv")).unwrap();
    assert_eq!(sweep.lines().next(), Some("param,estimate,stderr"));
    assert_eq!(sweep.lines().count(), 6);
    let laws: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.join("laws.json")).unwrap()).unwrap();
    assert!(laws["phase_law"]["slope"].as_f64().unwrap() > 2.3);
}
