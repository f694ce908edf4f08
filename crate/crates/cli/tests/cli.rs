use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn tiltlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tiltlab"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

/// Output directory printed on the last line of stdout.
fn result_dir(out: &Output) -> PathBuf {
    let text = String::from_utf8_lossy(&out.stdout);
    PathBuf::from(text.lines().last().expect("output directory").trim())
}

fn run_ok(args: &[&str]) -> PathBuf {
    let out = tiltlab(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    result_dir(&out)
}

const MINIMAL: &str = r#"
[seeds]
master = 11

[spec]
n = 1
T = 1.0
a = 1.0
N = 8

[schedule]
sweeps = 10
burn_in = 2
thin = 2
"#;

#[test]
fn minimal_sample_writes_one_csv_and_a_sidecar() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "run.toml", MINIMAL);
    let out = tmp.path().join("out");
    let dir = run_ok(&["sample", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert!(dir.starts_with(out.join("sample")));
    let mut names: Vec<String> = fs::read_dir(&dir)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    names.sort();
    assert_eq!(names, ["config.toml", "run.json", "samples_r0.csv"]);
    let csv = fs::read_to_string(dir.join("samples_r0.csv")).unwrap();
    assert!(csv.starts_with("# n=1,T=1,N=8,a=1,lambda=1,seed=11\nsample,t,X1\n"));
    // 4 samples of 17 grid times
    assert_eq!(csv.lines().count(), 2 + 4 * 17);
}

#[test]
fn replicas_are_distinct_and_replay_from_the_sidecar() {
    let tmp = tempfile::tempdir().unwrap();
    let text = MINIMAL.replace("sweeps = 10", "sweeps = 200").replace("thin = 2", "thin = 2\nreplicas = 4");
    let cfg = write(tmp.path(), "run.toml", &text);
    let first = run_ok(&["sample", "--config", cfg.to_str().unwrap(), "--out", tmp.path().join("a").to_str().unwrap()]);
    let csvs: Vec<Vec<u8>> = (0..4).map(|r| fs::read(first.join(format!("samples_r{r}.csv"))).unwrap()).collect();
    for i in 0..4 {
        for j in 0..i {
            assert_ne!(csvs[i], csvs[j], "replicas {i} and {j} coincide");
        }
    }
    let sidecar = first.join("run.json");
    let second = run_ok(&[
        "sample",
        "--config",
        sidecar.to_str().unwrap(),
        "--out",
        tmp.path().join("b").to_str().unwrap(),
    ]);
    assert_eq!(first.file_name(), second.file_name());
    for (r, bytes) in csvs.iter().enumerate() {
        assert_eq!(&fs::read(second.join(format!("samples_r{r}.csv"))).unwrap(), bytes);
    }
    assert_eq!(fs::read(first.join("run.json")).unwrap(), fs::read(second.join("run.json")).unwrap());
}

#[test]
fn seed_flag_overrides_the_config() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "run.toml", MINIMAL);
    let out = tmp.path().join("out");
    let a = run_ok(&["sample", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    let b = run_ok(&["sample", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap(), "--seed", "12"]);
    assert_ne!(a, b);
    assert!(fs::read_to_string(b.join("samples_r0.csv")).unwrap().contains("seed=12"));
}

#[test]
fn missing_seed_is_an_error() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "run.toml", &MINIMAL.replace("[seeds]\nmaster = 11\n", ""));
    let out = tiltlab(&["sample", "--config", cfg.to_str().unwrap(), "--out", tmp.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("seed"));
}

#[test]
fn empty_check_list_passes_with_empty_aggregate() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = run_ok(&["verify", "--seed", "3", "--out", tmp.path().to_str().unwrap()]);
    let agg: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.join("reports.json")).unwrap()).unwrap();
    assert_eq!(agg["pass"], true);
    assert_eq!(agg["reports"].as_array().unwrap().len(), 0);
    assert_eq!(
        fs::read_to_string(dir.join("reports.csv")).unwrap(),
        "check,subcheck,value,threshold,pass,counted\n"
    );
}

#[test]
fn identity_scaling_check_passes() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(
        tmp.path(),
        "verify.toml",
        r#"
command = "verify"

[seeds]
master = 5

[[checks]]
check = "scaling"
lambda = 1.0
N = 16
plan = { samples = 300, replicas = 2, burn_in = 200, thin = 5 }
rescaled_plan = { samples = 300, replicas = 2, burn_in = 200, thin = 5 }
"#,
    );
    let dir = run_ok(&["verify", "--config", cfg.to_str().unwrap(), "--out", tmp.path().to_str().unwrap(), "--threads", "2"]);
    let rows = fs::read_to_string(dir.join("reports.csv")).unwrap();
    assert!(rows.contains("scaling,two-sample KS of X1(0),0.0,"));
    assert!(dir.join("summary.csv").exists() && dir.join("timing.json").exists());
}

#[test]
fn failing_and_unknown_checks_set_the_exit_code() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tiltlab(&["verify", "--seed", "1", "--check", "nonsense", "--out", tmp.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let cfg = write(
        tmp.path(),
        "partial.toml",
        "[seeds]\nmaster = 1\n\n[[checks]]\ncheck = \"spectral\"\npde = false\n",
    );
    let out = tiltlab(&["verify", "--config", cfg.to_str().unwrap(), "--out", tmp.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn airy_table_columns() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "airy.toml", "[seeds]\nmaster = 0\n\n[airy]\na = 0.5\nL = 3\n");
    let dir = run_ok(&["airy-table", "--config", cfg.to_str().unwrap(), "--out", tmp.path().to_str().unwrap()]);
    let text = fs::read_to_string(dir.join("airy_table.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("ell,omega,lambda,c"));
    let rows: Vec<Vec<f64>> = lines.map(|l| l.split(',').map(|v| v.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 3);
    let b = 1f64.cbrt();
    for (l, r) in rows.iter().enumerate() {
        assert_eq!(r[0], l as f64);
        assert_eq!(r[1], tiltlab_airy::airy_zero(l).unwrap());
        assert_eq!(r[2], 0.5 / b * r[1]);
        assert!(r[3] > 0.0);
    }
    assert!((rows[0][1] - 2.338_107_410_459_767).abs() < 1e-12);
}

#[test]
fn single_cell_confinement_sweep() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(
        tmp.path(),
        "conf.toml",
        r#"
[seeds]
master = 2

[confinement]
ns = [1]
Ts = [1.0]
N = 16
plan = { samples = 1200, replicas = 2, burn_in = 200, thin = 5 }
control_lambda = 1.0
growth_Ts = []
"#,
    );
    let dir = run_ok(&["confinement-sweep", "--config", cfg.to_str().unwrap(), "--out", tmp.path().to_str().unwrap()]);
    let table = fs::read_to_string(dir.join("table.csv")).unwrap();
    assert_eq!(table.lines().count(), 2);
    assert!(table.starts_with("n,T=1\n1,"));
    let cells = fs::read_to_string(dir.join("cells.csv")).unwrap();
    assert!(cells.starts_with("n,T,lambda,mean,stderr,count,tail_slope,heavy_tail\n"));
    assert_eq!(cells.lines().count(), 3);
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["subchecks"][0]["value"], 0.0);
    assert!(report["notes"][0].as_str().unwrap().contains("surrogate"));
}

#[test]
fn alpha_outside_the_range_is_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "conf.toml", "[seeds]\nmaster = 2\n\n[confinement]\nalpha = 0.6\n");
    let out = tiltlab(&["confinement-sweep", "--config", cfg.to_str().unwrap(), "--out", tmp.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("alpha"));
}
