use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use gibbs_lab::sampler::SampleSet;
use serde_json::Value;

fn lab(args: &[&str], threads: Option<usize>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_lab"));
    cmd.args(args);
    match threads {
        Some(t) => cmd.env("LAB_THREADS", t.to_string()),
        None => cmd.env_remove("LAB_THREADS"),
    };
    cmd.output().expect("lab runs")
}

fn write_spec(dir: &Path, name: &str, json: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, json).unwrap();
    p
}

fn repo_spec(name: &str) -> String {
    format!("{}/../../specs/{name}", env!("CARGO_MANIFEST_DIR"))
}

fn body(path: &Path) -> Value {
    let v: Value = serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap();
    v["body"].clone()
}

#[test]
fn certify_writes_report_and_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = lab(&["certify", "--spec", &repo_spec("certify-ising-2d.json"), "--out", out], None);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let b = body(&dir.path().join("certify.json"));
    assert_eq!(b["results"]["satisfied"], true);
    assert!(b["results"]["D"].as_f64().unwrap() > 0.0);
    let header: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("certify.json")).unwrap()).unwrap();
    assert!(header["header"]["timestamp"].is_u64());
    assert!(fs::read_to_string(dir.path().join("certify.csv")).unwrap().starts_with("y,value\n"));
}

#[test]
fn product_measure_gcb_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let o = lab(
        &["gcb-test", "--spec", &repo_spec("gcb-product.json"), "--out", dir.path().to_str().unwrap()],
        None,
    );
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(body(&dir.path().join("gcb-test.json"))["results"]["windows"][0]["gcb"]["verdict"], "pass");
}

#[test]
fn critical_variance_at_the_critical_point_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let o = lab(
        &["critical-variance", "--spec", &repo_spec("critical-variance.json"), "--out", dir.path().to_str().unwrap()],
        None,
    );
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    let csv = fs::read_to_string(dir.path().join("critical-variance.csv")).unwrap();
    let v: Vec<f64> = csv.lines().skip(1).map(|l| l.split(',').nth(2).unwrap().parse().unwrap()).collect();
    assert!(v.windows(2).all(|w| w[0] < w[1]), "{v:?}");
}

#[test]
fn usage_errors_exit_three() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    assert_eq!(lab(&["no-such-scenario"], None).status.code(), Some(3));
    assert_eq!(lab(&["certify"], None).status.code(), Some(3));
    assert_eq!(lab(&["certify", "--spec", "/nonexistent.json"], None).status.code(), Some(3));
    let bad = write_spec(dir.path(), "bad.json", r#"{"scenario":"certify","model":{"model":"ising","beta":0.1},"typo":1}"#);
    assert_eq!(lab(&["certify", "--spec", bad.to_str().unwrap(), "--out", out], None).status.code(), Some(3));
    // Spec names a different scenario than the subcommand.
    let o = lab(&["blowup", "--spec", &repo_spec("certify-ising-2d.json"), "--out", out], None);
    assert_eq!(o.status.code(), Some(3));
    // Resource cap: the windows are far beyond exact enumeration.
    let big = write_spec(
        dir.path(),
        "big.json",
        r#"{"scenario":"entropy-probe","model":{"model":"ising","beta":0.5,"d":2},"sides":[9]}"#,
    );
    let o = lab(&["entropy-probe", "--spec", big.to_str().unwrap(), "--out", out], None);
    assert_eq!(o.status.code(), Some(3));
    assert!(body(&dir.path().join("entropy-probe.json"))["error"].is_string());
    assert_eq!(lab(&["certify", "--spec", &repo_spec("certify-ising-2d.json"), "--out", out], Some(0)).status.code(), Some(3));
}

#[test]
fn reports_are_identical_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write_spec(
        dir.path(),
        "s.json",
        r#"{"scenario":"gcb-test","model":{"model":"ising","beta":0.2,"d":2},"sides":[6],
            "sampling":{"burn_in":100,"samples":300,"chains":5},"seed":17}"#,
    );
    let mut bodies = Vec::new();
    for (i, t) in [1, 4, 2].into_iter().enumerate() {
        let out = dir.path().join(format!("run{i}"));
        let o = lab(
            &["gcb-test", "--spec", spec.to_str().unwrap(), "--out", out.to_str().unwrap()],
            Some(t),
        );
        assert!(matches!(o.status.code(), Some(0 | 2)));
        bodies.push((
            serde_json::to_string(&body(&out.join("gcb-test.json"))).unwrap(),
            fs::read(out.join("gcb-test.csv")).unwrap(),
        ));
    }
    assert!(bodies.windows(2).all(|w| w[0] == w[1]));
    // The seed flag overrides the spec file.
    let out = dir.path().join("reseeded");
    lab(&["gcb-test", "--spec", spec.to_str().unwrap(), "--seed", "18", "--out", out.to_str().unwrap()], Some(1));
    assert_ne!(serde_json::to_string(&body(&out.join("gcb-test.json"))).unwrap(), bodies[0].0);
}

#[test]
fn beta_sweep_rows_increase() {
    let dir = tempfile::tempdir().unwrap();
    let o = lab(
        &[
            "sweep",
            "--spec",
            &repo_spec("certify-ising-2d.json"),
            "--param",
            "beta",
            "--grid",
            "0.05,0.1,0.15,0.2",
            "--out",
            dir.path().to_str().unwrap(),
        ],
        None,
    );
    assert_eq!(o.status.code(), Some(0));
    let b = body(&dir.path().join("certify-sweep-beta.json"));
    let cs: Vec<f64> = b["points"]
        .as_array()
        .unwrap()
        .iter()
        .map(|p| p["report"]["results"]["c"].as_f64().unwrap())
        .collect();
    assert_eq!(cs.len(), 4);
    assert!(cs.windows(2).all(|w| w[0] < w[1]), "{cs:?}");
    let csv = fs::read_to_string(dir.path().join("certify-sweep-beta.csv")).unwrap();
    assert!(csv.starts_with("param,value,y,value\nbeta,0.05,"));
}

#[test]
fn n_sweep_of_entropy_probe_decreases() {
    let dir = tempfile::tempdir().unwrap();
    let o = lab(
        &[
            "sweep",
            "--spec",
            &repo_spec("entropy-probe.json"),
            "--param",
            "n",
            "--grid",
            "1,1.5",
            "--out",
            dir.path().to_str().unwrap(),
        ],
        None,
    );
    // One window per grid point carries no trend of its own: each point is
    // inconclusive and the trend is read across points.
    assert_eq!(o.status.code(), Some(2), "{}", String::from_utf8_lossy(&o.stdout));
    let csv = fs::read_to_string(dir.path().join("entropy-probe-sweep-n.csv")).unwrap();
    let per_site: Vec<f64> = csv.lines().skip(1).map(|l| l.rsplit(',').next().unwrap().parse().unwrap()).collect();
    assert_eq!(per_site.len(), 2);
    assert!(per_site[1] < per_site[0]);
    let out = dir.path().to_str().unwrap();
    let spec = repo_spec("entropy-probe.json");
    for (param, grid) in [("n", "1.2"), ("gamma", "1")] {
        let o = lab(&["sweep", "--spec", &spec, "--param", param, "--grid", grid, "--out", out], None);
        assert_eq!(o.status.code(), Some(3));
    }
}

#[test]
fn epsilon_sweep_of_blowup_runs() {
    let dir = tempfile::tempdir().unwrap();
    let o = lab(
        &[
            "sweep",
            "--spec",
            &repo_spec("blowup-1d.json"),
            "--param",
            "epsilon",
            "--grid",
            "0.5,0.9",
            "--out",
            dir.path().to_str().unwrap(),
        ],
        None,
    );
    assert!(matches!(o.status.code(), Some(0 | 2)));
    let csv = fs::read_to_string(dir.path().join("blowup-sweep-epsilon.csv")).unwrap();
    assert!(csv.lines().skip(1).all(|l| l.ends_with(",true")));
}

#[test]
fn sample_writes_a_readable_sample_file() {
    let dir = tempfile::tempdir().unwrap();
    let model = write_spec(dir.path(), "model.json", r#"{"model":"ising","beta":0.3,"d":2}"#);
    let out = dir.path().join("samples.txt");
    let o = lab(
        &[
            "sample",
            "--model-config",
            model.to_str().unwrap(),
            "--side",
            "5",
            "--geometry",
            "fixed",
            "--boundary",
            "plus",
            "--sweeps",
            "50",
            "--samples",
            "7",
            "--chains",
            "2",
            "--seed",
            "9",
            "--out",
            out.to_str().unwrap(),
        ],
        None,
    );
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let set = SampleSet::from_text(&fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(set.samples.len(), 14);
    assert!(set.samples.iter().all(|s| s.len() == 25));
    let o = lab(
        &["sample", "--model-config", model.to_str().unwrap(), "--side", "5", "--geometry", "torus", "--boundary", "plus"],
        None,
    );
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn outputs_section_names_the_files() {
    let dir = tempfile::tempdir().unwrap();
    let o = lab(
        &["deviation-rates", "--spec", &repo_spec("deviation-rates.json"), "--out", dir.path().to_str().unwrap()],
        None,
    );
    assert_eq!(o.status.code(), Some(0));
    assert!(dir.path().join("rates.json").exists());
    assert!(dir.path().join("rates.csv").exists());
}
