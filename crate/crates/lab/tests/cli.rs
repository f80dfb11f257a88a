use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const BASE: &str = r#"
[coefficients]
alpha = 3.0
b = 2.0
c = 1.0

[grid]
nx = 9
ny = 9
t_final = 1.0
nt = 8
"#;

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn jmgt(args: &[&str], cfg: &Path, out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_jmgt"))
        .args(args)
        .arg("--config")
        .arg(cfg)
        .arg("--out")
        .arg(out)
        .env_remove("JMGT_THREADS")
        .output()
        .unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn missing_grid_section_is_a_config_error() {
    let d = tempfile::tempdir().unwrap();
    let cfg = write(d.path(), "c.toml", "[coefficients]\nalpha = 3.0\nb = 2.0\nc = 1.0\n");
    let o = jmgt(&["validate"], &cfg, &d.path().join("out"));
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("grid"), "{}", stderr(&o));
}

#[test]
fn unknown_keys_are_rejected() {
    let d = tempfile::tempdir().unwrap();
    let cfg = write(d.path(), "c.toml", &format!("{BASE}\n[probe]\nsigma = [1.0]\n"));
    let o = jmgt(&["validate"], &cfg, &d.path().join("out"));
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("sigma"), "{}", stderr(&o));
}

#[test]
fn inadmissible_coefficients_are_a_config_error() {
    let d = tempfile::tempdir().unwrap();
    let cfg = write(d.path(), "c.toml", &BASE.replace("b = 2.0", "b = -1.0"));
    let o = jmgt(&["forward"], &cfg, &d.path().join("out"));
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
}

#[test]
fn sweep_with_one_sigma_is_refused() {
    let d = tempfile::tempdir().unwrap();
    let cfg = write(d.path(), "c.toml", &format!("{BASE}\n[probe]\nsigmas = [10.0]\n"));
    let o = jmgt(&["cgo-sweep"], &cfg, &d.path().join("out"));
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("sigma"), "{}", stderr(&o));
}

#[test]
fn unresolved_sigma_is_refused_before_solving() {
    let d = tempfile::tempdir().unwrap();
    let cfg = write(d.path(), "c.toml", &format!("{BASE}\n[probe]\nsigmas = [10.0, 20.0, 400.0]\n"));
    let o = jmgt(&["cgo-sweep"], &cfg, &d.path().join("out"));
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    assert!(!d.path().join("out/decay.csv").exists());
}

const BOUNDARY: &str = r#"
[coefficients]
alpha = 1.0
b = 9.0
c = 1.0

[grid]
x = [0.0, 0.9]
y = [0.0, 0.9]
nx = 33
ny = 33
t_final = 1.6
nt = 100

[nonlinearity]
kind = "gaussian"
center = [0.45, 0.45]
width = 0.15
window = [WINDOW]

[probe]
pad = 0.2
sources = 4
cutoff = true

[recon]
mode = "B_T"
sigmas = [4.0, 8.0]
"#;

#[test]
fn boundary_mode_rejects_early_nonlinearity() {
    let d = tempfile::tempdir().unwrap();
    let cfg = write(d.path(), "c.toml", &BOUNDARY.replace("WINDOW", "0.2, 1.5"));
    let o = jmgt(&["validate"], &cfg, &d.path().join("out"));
    assert_eq!(o.status.code(), Some(4), "{}", stderr(&o));
    let late = write(d.path(), "late.toml", &BOUNDARY.replace("WINDOW", "1.045, 1.55"));
    let o = jmgt(&["validate"], &late, &d.path().join("out"));
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
}

#[test]
fn boundary_mode_needs_the_cutoff() {
    let d = tempfile::tempdir().unwrap();
    let cfg = write(d.path(), "c.toml", &BOUNDARY.replace("WINDOW", "1.045, 1.55").replace("cutoff = true", "cutoff = false"));
    let o = jmgt(&["validate"], &cfg, &d.path().join("out"));
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
}

#[test]
fn mode_flag_overrides_the_file() {
    let d = tempfile::tempdir().unwrap();
    let cfg = write(d.path(), "c.toml", &BOUNDARY.replace("WINDOW", "1.045, 1.55").replace("cutoff = true", "cutoff = false"));
    let o = jmgt(&["validate", "--mode", "lambda_T"], &cfg, &d.path().join("out"));
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
}

#[test]
fn zero_data_gives_a_zero_field() {
    let d = tempfile::tempdir().unwrap();
    let cfg = write(d.path(), "c.toml", BASE);
    let out = d.path().join("out");
    let o = jmgt(&["forward"], &cfg, &out);
    assert!(o.status.success(), "{}", stderr(&o));
    let bytes = std::fs::read(out.join("u.bin")).unwrap();
    assert_eq!(bytes.len(), 9 * 9 * 9 * 16);
    assert!(bytes.iter().all(|b| *b == 0));
    let meta: serde_json::Value = serde_json::from_slice(&std::fs::read(out.join("u.json")).unwrap()).unwrap();
    assert_eq!(meta["shape"], serde_json::json!([9, 9, 9]));
}

#[test]
fn manifest_lists_every_file_with_its_hash() {
    let d = tempfile::tempdir().unwrap();
    let cfg = write(d.path(), "c.toml", &format!("{BASE}\n[data]\nkind = \"manufactured\"\nrefinements = 2\n"));
    let out = d.path().join("out");
    assert!(jmgt(&["forward", "--seed", "7"], &cfg, &out).status.success());
    let m: serde_json::Value = serde_json::from_slice(&std::fs::read(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(m["command"], "forward");
    assert_eq!(m["seed"], 7);
    assert_eq!(m["config_sha256"].as_str().unwrap().len(), 64);
    let files = m["files"].as_array().unwrap();
    let names: Vec<&str> = files.iter().map(|f| f["path"].as_str().unwrap()).collect();
    for want in ["u.bin", "u.json", "energy.csv", "dtn.csv", "errors.csv", "forward.json"] {
        assert!(names.contains(&want), "{names:?}");
    }
    let csv = std::fs::read(out.join("errors.csv")).unwrap();
    let entry = files.iter().find(|f| f["path"] == "errors.csv").unwrap();
    assert_eq!(entry["sha256"].as_str().unwrap(), jmgt_lab::io::sha256_hex(&csv));
}

#[test]
fn single_thread_runs_are_byte_identical() {
    let d = tempfile::tempdir().unwrap();
    let text = format!("{BASE}\n[data]\nkind = \"cubic_ramp\"\namplitude = 1e-2\n\n[nonlinearity]\nkind = \"gaussian\"\n");
    let cfg = write(d.path(), "c.toml", &text);
    let (a, b) = (d.path().join("a"), d.path().join("b"));
    assert!(jmgt(&["forward", "--threads", "1"], &cfg, &a).status.success());
    assert!(jmgt(&["forward", "--threads", "1"], &cfg, &b).status.success());
    for f in ["energy.csv", "dtn.csv", "picard.csv", "u.bin"] {
        assert_eq!(std::fs::read(a.join(f)).unwrap(), std::fs::read(b.join(f)).unwrap(), "{f}");
    }
}

#[test]
fn thread_count_comes_from_the_environment() {
    let d = tempfile::tempdir().unwrap();
    let cfg = write(d.path(), "c.toml", BASE);
    let out = d.path().join("out");
    let o = Command::new(env!("CARGO_BIN_EXE_jmgt"))
        .args(["forward", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .env("JMGT_THREADS", "1")
        .output()
        .unwrap();
    assert!(o.status.success());
    let m: serde_json::Value = serde_json::from_slice(&std::fs::read(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(m["threads"], 1);
}
