use std::path::Path;
use std::process::{Command, Output};

const HEADER: &str = "body,functional,lambda,estimator,value,std_error,n_samples,n_dirs,seed,flags";

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_latticehull")).args(args).env_remove("LATTICEHULL_SEED").output().unwrap()
}

fn ok(args: &[&str]) -> String {
    let out = run(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn fields(csv: &str) -> Vec<Vec<String>> {
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some(HEADER));
    lines.map(|l| l.split(',').map(str::to_string).collect()).collect()
}

fn value(row: &[String]) -> f64 {
    row[4].parse().unwrap()
}

#[test]
fn width_diff_writes_one_row() {
    let rows = fields(&ok(&["width-diff", "--body", "disk", "--lambda", "16", "--n-lattices", "300"]));
    assert_eq!(rows.len(), 1);
    let r = &rows[0];
    assert_eq!(r.len(), 10);
    assert_eq!(&r[..4], ["disk", "width", "16", "direct"]);
    assert_eq!(r[6], "300");
    assert_eq!(r[7], "1024");
    let v = value(r);
    assert!(v > 0.3 && v < 0.6, "{v}");
}

#[test]
fn scaling_rows_and_plot() {
    let dir = tempfile::tempdir().unwrap();
    let svg = dir.path().join("plot.svg");
    let csv = dir.path().join("runs.csv");
    let out = run(&[
        "scaling", "--body", "disk", "--lambdas", "8,16,32", "--n-lattices", "300", "--n-dirs", "256",
        "--svg", svg.to_str().unwrap(), "--out", csv.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("slope"));
    let rows = fields(&String::from_utf8(out.stdout).unwrap());
    assert_eq!(rows.iter().map(|r| r[2].as_str()).collect::<Vec<_>>(), ["8", "16", "32"]);
    assert!(value(&rows[0]) > value(&rows[2]));

    let doc_text = std::fs::read_to_string(&svg).unwrap();
    let doc = roxmltree::Document::parse(&doc_text).unwrap();
    assert_eq!(doc.root_element().tag_name().name(), "svg");
    assert!(doc.descendants().filter(|n| n.has_tag_name("circle")).count() == 3);

    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("runs.csv.manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["command"], "scaling");
    assert_eq!(manifest["config_hash"].as_str().unwrap().len(), 64);
    assert!(manifest["summary"]["fit"]["slope"].is_number());
}

#[test]
fn out_file_appends_without_repeating_header() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("runs.csv");
    for seed in ["1", "2"] {
        ok(&["width-diff", "--body", "square", "--lambda", "8", "--n-lattices", "200", "--seed", seed, "--out", csv.to_str().unwrap()]);
    }
    let text = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(text.lines().filter(|l| *l == HEADER).count(), 1);
    assert_eq!(text.lines().count(), 3);
}

#[test]
fn usage_errors_exit_two() {
    for args in [
        &["width-diff", "--body", "disk"][..],
        &["width-diff", "--body", "blob", "--lambda", "8"],
        &["width-diff", "--body", "disk", "--lambda", "8", "--estimator", "guess"],
        &["width-diff", "--body", "disk", "--lambda", "1.5", "--estimator", "cap-integral"],
        &["scaling", "--body", "disk", "--lambdas", "8,16,32", "--n-lattices", "10"],
        &["scaling", "--body", "disk", "--lambdas", "16,8,32"],
        &["cap-prob", "--body", "disk", "--t", "-1", "--angle", "0"],
        &["--threads", "0", "tau", "--body", "disk"],
    ] {
        let out = run(args);
        assert_eq!(out.status.code(), Some(2), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
        assert!(out.stdout.is_empty() || !String::from_utf8_lossy(&out.stdout).contains(','));
    }
}

#[test]
fn serial_runs_repeat_exactly() {
    let args = ["--threads", "1", "width-diff", "--body", "ellipse", "--lambda", "8", "--n-lattices", "300", "--seed", "11"];
    assert_eq!(ok(&args), ok(&args));
    let mut parallel = args;
    parallel[1] = "4";
    let a = value(&fields(&ok(&args))[0]);
    let b = value(&fields(&ok(&parallel))[0]);
    assert!((a - b).abs() <= 1e-9 * a.abs());
}

#[test]
fn seed_from_environment() {
    let base = ["width-diff", "--body", "disk", "--lambda", "8", "--n-lattices", "200"];
    let env = Command::new(env!("CARGO_BIN_EXE_latticehull")).args(base).env("LATTICEHULL_SEED", "42").output().unwrap();
    let explicit = ok(&[&base[..], &["--seed", "42"]].concat());
    assert_eq!(String::from_utf8(env.stdout).unwrap(), explicit);
    assert_eq!(fields(&explicit)[0][8], "42");
}

#[test]
fn config_file_supplies_flags() {
    let dir = tempfile::tempdir().unwrap();
    let conf = dir.path().join("run.conf");
    std::fs::write(&conf, "# disk study\nbody = disk\nlambda = 8\nn_lattices = 200\nseed = 3\n").unwrap();
    let from_file = ok(&["--config", conf.to_str().unwrap(), "width-diff"]);
    let direct = ok(&["width-diff", "--body", "disk", "--lambda", "8", "--n-lattices", "200", "--seed", "3"]);
    assert_eq!(from_file, direct);
    let overridden = ok(&["--config", conf.to_str().unwrap(), "width-diff", "--seed", "4"]);
    assert_eq!(fields(&overridden)[0][8], "4");
}

#[test]
fn tau_rows() {
    let rows = fields(&ok(&["tau", "--body", "disk"]));
    let get = |name: &str| value(rows.iter().find(|r| r[1] == name).unwrap());
    assert!((get("tau-raw") - (1.0 + 0.5f64.sqrt())).abs() < 1e-3);
    assert!((get("tau") - 1.25 * get("tau-raw")).abs() < 1e-12);
    assert!(get("lambda-min") >= get("tau") - 1e-12);
}

#[test]
fn count_check_matches_area() {
    let out = run(&["count-check", "--body", "disk-r2", "--n-lattices", "4000"]);
    assert!(out.status.success());
    let row = &fields(&String::from_utf8(out.stdout).unwrap())[0];
    let (v, se) = (value(row), row[5].parse::<f64>().unwrap());
    assert!((v - 4.0 * std::f64::consts::PI).abs() <= 4.0 * se);
}

#[test]
fn cap_probability_in_unit_interval() {
    let row = &fields(&ok(&["cap-prob", "--body", "disk", "--t", "0.3", "--angle", "-0.4", "--lambda", "4", "--n-lattices", "500"]))[0];
    let p = value(row);
    assert!((0.0..=1.0).contains(&p));
}

#[test]
fn gamma_for_square_is_positive() {
    let row = &fields(&ok(&["gamma", "--body", "square", "--n-lattices", "50", "--n-dirs-per-cone", "16", "--n-t", "16"]))[0];
    assert!(value(row) > 4.0 * row[5].parse::<f64>().unwrap());
    let out = run(&["gamma", "--body", "disk", "--n-lattices", "50"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn polygon_file_as_body() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("tri.txt");
    std::fs::write(&path, "# triangle\n0 0\n3 0\n0 3\n").unwrap();
    let row = &fields(&ok(&["count-check", "--body", path.to_str().unwrap(), "--n-lattices", "2000"]))[0];
    let (v, se) = (value(row), row[5].parse::<f64>().unwrap());
    assert!((v - 4.5).abs() <= 4.0 * se);
    assert!(Path::new(&path).exists());
}
