use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn wf(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wf"))
        .args(args)
        .current_dir(root())
        .env_remove("WF_SEED")
        .output()
        .expect("run wf")
}

fn stdout(o: &Output) -> String {
    assert!(o.status.success(), "exit {:?}: {}", o.status.code(), String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout.clone()).unwrap()
}

/// Compare against `golden/<name>`; set `WF_BLESS=1` to rewrite.
fn golden(name: &str, actual: &str) {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name);
    if std::env::var_os("WF_BLESS").is_some() {
        std::fs::write(&path, actual).unwrap();
        return;
    }
    let expected = std::fs::read_to_string(&path).unwrap_or_else(|_| panic!("missing {}", path.display()));
    assert_eq!(actual, expected, "output differs from {}", path.display());
}

#[test]
fn cascade_two_stage() {
    let out = stdout(&wf(&["cascade", "configs/two_stage.toml"]));
    assert!(out.lines().last().unwrap().starts_with("total,4.200000,"));
    golden("cascade_two_stage.csv", &out);
}

#[test]
fn cascade_reference_ru() {
    let out = stdout(&wf(&["cascade", "configs/ru_reference.toml"]));
    let w: f64 = out.lines().last().unwrap().split(',').nth(1).unwrap().parse().unwrap();
    assert!((3.45..=3.55).contains(&w), "{w}");
    golden("cascade_ru_reference.csv", &out);
}

#[test]
fn cascade_link_json() {
    let out = stdout(&wf(&["cascade", "configs/link.toml", "--format", "json"]));
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["stages"].as_array().unwrap().len(), 3);
    golden("cascade_link.json", &out);
}

#[test]
fn system_series() {
    let out = stdout(&wf(&["system", "configs/system.toml"]));
    assert_eq!(out.lines().count(), 1 + 4 * 13);
    golden("system.csv", &out);
}

#[test]
fn metrics_table() {
    let out = stdout(&wf(&["metrics", "configs/metrics.toml"]));
    assert!(out.contains("bs_a,ee_bs_gb_per_wh,0.142857\n"));
    assert!(out.contains("bs_b,ee_bs_gb_per_wh,0.200000\n"));
    assert!(out.contains("ru_b,w,3.500000\n"));
    golden("metrics.csv", &out);
    let json = stdout(&wf(&["metrics", "configs/metrics.toml", "--format", "json"]));
    golden("metrics.json", &json);
}

#[test]
fn fit_log() {
    let out = stdout(&wf(&["fit", "configs/ru_power_log.csv"]));
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert!((v["w"].as_f64().unwrap() - 3.5).abs() < 1e-9);
    assert!((v["p_non_path_w"].as_f64().unwrap() - 140.0).abs() < 1e-6);
    assert_eq!(v["physical"], true);
    golden("fit.json", &out);
}

#[test]
fn simulate_small_grid() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    stdout(&wf(&["simulate", "configs/simulate_small.toml", "--seeds", "2", "--out", d, "--jobs", "2"]));
    let drops = std::fs::read_to_string(dir.path().join("drops.csv")).unwrap();
    let agg = std::fs::read_to_string(dir.path().join("aggregate.csv")).unwrap();
    assert_eq!(drops.lines().count(), 1 + 2 * 2 * 2 * 2);
    assert_eq!(agg.lines().count(), 1 + 2 * 2 * 2);
    golden("simulate_small_drops.csv", &drops);
    golden("simulate_small_aggregate.csv", &agg);

    let serial = tempfile::tempdir().unwrap();
    stdout(&wf(&[
        "simulate",
        "configs/simulate_small.toml",
        "--seeds",
        "2",
        "--out",
        serial.path().to_str().unwrap(),
        "--jobs",
        "1",
    ]));
    assert_eq!(std::fs::read_to_string(serial.path().join("drops.csv")).unwrap(), drops);
}

#[test]
fn seed_env_override() {
    let run = |seed: Option<&str>| {
        let mut c = Command::new(env!("CARGO_BIN_EXE_wf"));
        c.args(["simulate", "configs/simulate_small.toml", "--seeds", "1"]).current_dir(root());
        match seed {
            Some(s) => c.env("WF_SEED", s),
            None => c.env_remove("WF_SEED"),
        };
        c.output().unwrap()
    };
    let base = stdout(&run(None));
    assert_eq!(stdout(&run(Some("100"))), base);
    assert_ne!(stdout(&run(Some("7"))), base);
    assert_eq!(run(Some("seven")).status.code(), Some(2));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let bad_key = dir.path().join("bad.toml");
    std::fs::write(&bad_key, "[ru]\npa_pea = 0.4\n").unwrap();
    let o = wf(&["cascade", bad_key.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("pa_pea"));

    let bad_value = dir.path().join("pae.toml");
    std::fs::write(&bad_value, "[ru]\npa_pae = 1.4\n").unwrap();
    assert_eq!(wf(&["cascade", bad_value.to_str().unwrap()]).status.code(), Some(2));

    let log = dir.path().join("log.csv");
    std::fs::write(&log, "p_signal_w,p_total_w\n1,2\n2,x\n").unwrap();
    let o = wf(&["fit", log.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 3"));

    assert_eq!(wf(&["fit", "does/not/exist.csv"]).status.code(), Some(1));
    assert_eq!(wf(&["cascade"]).status.code(), Some(2));
    assert_eq!(wf(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn help_for_every_subcommand() {
    for sub in ["cascade", "system", "fit", "metrics", "simulate"] {
        let o = wf(&[sub, "--help"]);
        assert!(o.status.success(), "{sub}");
        assert!(!o.stdout.is_empty());
    }
}
