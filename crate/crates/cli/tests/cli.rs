use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use hhvix::params::{compute_c_l, compute_l_j};
use hhvix::{JumpLaw, ModelParams};
use serde_json::Value;
use tempfile::TempDir;

const CONFIG: &str = r#"{
  "model": {"r": 0.02, "rho": -0.7, "v0": 0.04, "kappa": 3.0, "vbar": 0.04, "sigma": 0.3,
            "eta": 0.01, "lambda0": 1.0, "alpha": 1.0, "beta": 2.0, "T": 1.0},
  "jump": {"type": "exponential", "rate": 20.0},
  "shift_a": 0.0,
  "assumption": {"Q2": 2.0, "eps1": 1.0, "eps2": 1.0},
  "pricing": {"T_mat": 0.5, "K": 20.0},
  "sim": {"n_paths": 200000, "seed": 11}
}"#;

struct Fixture {
    dir: TempDir,
}

impl Fixture {
    fn new() -> Self {
        Self { dir: tempfile::tempdir().unwrap() }
    }

    fn config(&self, name: &str, text: &str) -> PathBuf {
        let p = self.dir.path().join(name);
        std::fs::write(&p, text).unwrap();
        p
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }
}

fn hhvix(config: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hhvix"))
        .arg("--config")
        .arg(config)
        .args(args)
        .output()
        .unwrap()
}

fn json_of(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn error_of(out: &Output) -> Value {
    serde_json::from_slice(&out.stderr).unwrap()
}

#[test]
fn validate_reports_constants_that_round_trip() {
    let fx = Fixture::new();
    let cfg = fx.config("ok.json", CONFIG);
    let out = hhvix(&cfg, &["validate"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json_of(&out);
    assert_eq!(v["admissible"], Value::Bool(true));

    let parsed: Value = serde_json::from_str(CONFIG).unwrap();
    let p: ModelParams = serde_json::from_value(parsed["model"].clone()).unwrap();
    let jump: JumpLaw = serde_json::from_value(parsed["jump"].clone()).unwrap();
    assert_eq!(v["c_l"].as_f64().unwrap(), compute_c_l(&p, &jump).unwrap());
    assert_eq!(v["L_J"].as_f64().unwrap(), compute_l_j(&p, &jump).unwrap());
    assert!(v["a_max"].as_f64().unwrap() > 0.0);
}

#[test]
fn validate_flags_unstable_hawkes() {
    let fx = Fixture::new();
    let cfg = fx.config("unstable.json", &CONFIG.replace("\"alpha\": 1.0", "\"alpha\": 2.0"));
    let out = hhvix(&cfg, &["validate"]);
    assert_eq!(out.status.code(), Some(1));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    let stability = v["flags"].as_array().unwrap().iter().find(|f| f["name"] == "stability").unwrap();
    assert_eq!(stability["passed"], Value::Bool(false));
}

#[test]
fn parse_errors_exit_two() {
    let fx = Fixture::new();
    let malformed = fx.config("bad.json", "{\"model\": ");
    let out = hhvix(&malformed, &["validate"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(error_of(&out)["error"]["kind"], "usage");

    let unknown = fx.config("unknown.json", &CONFIG.replace("\"shift_a\"", "\"shift\": 1, \"shift_a\""));
    assert_eq!(hhvix(&unknown, &["validate"]).status.code(), Some(2));
    assert_eq!(hhvix(&fx.path("missing.json"), &["vix"]).status.code(), Some(2));

    let ok = fx.config("ok.json", CONFIG);
    assert_eq!(hhvix(&ok, &["price", "--strike", "abc"]).status.code(), Some(2));
    assert_eq!(hhvix(&ok, &["price", "--strike", "-5"]).status.code(), Some(2));
}

#[test]
fn domain_and_admissibility_failures_exit_one() {
    let fx = Fixture::new();
    let ok = fx.config("ok.json", CONFIG);
    let out = hhvix(&ok, &["charfn", "--phi", "100"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(error_of(&out)["error"]["kind"], "domain_violation");

    let far = fx.config("far.json", &CONFIG.replace("\"shift_a\": 0.0", "\"shift_a\": 5.0"));
    let out = hhvix(&far, &["price"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(error_of(&out)["error"]["kind"], "shift_out_of_range");
}

#[test]
fn price_is_positive_bounded_and_deterministic() {
    let fx = Fixture::new();
    let cfg = fx.config("ok.json", CONFIG);
    let a = hhvix(&cfg, &["price", "--strike", "20"]);
    let b = hhvix(&cfg, &["--threads", "2", "price", "--strike", "20"]);
    assert_eq!(a.stdout, b.stdout);
    let v = json_of(&a);
    let price = v["price"].as_f64().unwrap();
    assert!(price > 0.0 && price < 100.0 * 0.04f64.sqrt());
    for key in ["phi_R", "nodes", "est_error"] {
        assert!(!v[key].is_null(), "{key}");
    }

    let far = json_of(&hhvix(&cfg, &["price", "--strike", "1e6"]));
    assert!(far["price"].as_f64().unwrap() < 1e-6);
}

#[test]
fn price_dumps_integrand_samples() {
    let fx = Fixture::new();
    let cfg = fx.config("ok.json", CONFIG);
    let dump = fx.path("integrand.csv");
    let v = json_of(&hhvix(&cfg, &["price", "--dump-integrand", dump.to_str().unwrap()]));
    let text = std::fs::read_to_string(&dump).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("phi_I,integrand"));
    let rows: Vec<Vec<f64>> = lines.map(|l| l.split(',').map(|x| x.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len() as u64, v["nodes"].as_u64().unwrap());
    assert!(rows.windows(2).all(|w| w[0][0] <= w[1][0]));
}

#[test]
fn vix_coefficients_are_reported() {
    let fx = Fixture::new();
    let cfg = fx.config("ok.json", CONFIG);
    let v = json_of(&hhvix(&cfg, &["vix"]));
    for key in ["A", "B", "C", "C1", "C2", "C3"] {
        assert!(v[key].is_f64(), "{key}");
    }
    assert!(v["A"].as_f64().unwrap() > 0.0 && v["B"].as_f64().unwrap() > 0.0);
}

#[test]
fn charfn_trajectory_csv() {
    let fx = Fixture::new();
    let cfg = fx.config("ok.json", CONFIG);
    let traj = fx.path("traj.csv");
    let v = json_of(&hhvix(
        &cfg,
        &["charfn", "--phi", "0.5,-3", "--psi", "0.1", "--grid-points", "11", "--trajectory", traj.to_str().unwrap()],
    ));
    assert!(v["value"]["re"].is_f64() && v["value"]["im"].is_f64());
    let text = std::fs::read_to_string(&traj).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "t,re_G,im_G,re_H,im_H,re_F,im_F");
    assert_eq!(lines.len(), 12);
    let last: Vec<f64> = lines[11].split(',').map(|x| x.parse().unwrap()).collect();
    assert_eq!(last, vec![1.0, 0.5, -3.0, 0.1, 0.0, 0.0, 0.0]);

    let csv_cfg = fx.config("csv.json", &CONFIG.replace("\"shift_a\"", "\"output\": {\"format\": \"csv\"}, \"shift_a\""));
    let out = hhvix(&csv_cfg, &["charfn", "--phi", "0.5", "--grid-points", "3"]);
    assert!(String::from_utf8(out.stdout).unwrap().starts_with("t,re_G"));
}

#[test]
fn dump_integrand_grid() {
    let fx = Fixture::new();
    let cfg = fx.config("csv.json", &CONFIG.replace("\"shift_a\"", "\"output\": {\"format\": \"csv\"}, \"shift_a\""));
    let out = hhvix(&cfg, &["dump-integrand", "--points", "5", "--max-phi-i", "40"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "phi_I,re_f,im_f,integrand");
    assert_eq!(lines.len(), 6);
    let first: Vec<f64> = lines[1].split(',').map(|x| x.parse().unwrap()).collect();
    assert_eq!(first[0], 0.0);
    assert_eq!(first[2], 0.0);
}

#[test]
fn simulate_agrees_with_analytic_values() {
    let fx = Fixture::new();
    let cfg = fx.config("ok.json", CONFIG);
    let cf = json_of(&hhvix(&cfg, &["simulate", "--target", "charfn", "--phi", "0.05", "--psi", "0.2"]));
    assert!(cf["z_score"].as_f64().unwrap() < 3.0, "{cf}");
    let pr = json_of(&hhvix(&cfg, &["simulate", "--target", "price", "--strike", "20"]));
    assert!(pr["z_score"].as_f64().unwrap() < 3.0, "{pr}");
    let fv = json_of(&hhvix(&cfg, &["simulate", "--target", "forward-variance", "--time", "0.25"]));
    assert!(fv["z_score"].as_f64().unwrap() < 3.0, "{fv}");
    assert_eq!(fv["n_paths"], 200000);
    assert_eq!(fv["seed"], 11);
}

#[test]
fn simulate_honors_seed_and_single_path() {
    let fx = Fixture::new();
    let cfg = fx.config("ok.json", CONFIG);
    let args = ["--seed", "5", "simulate", "--target", "price", "--strike", "15", "--paths", "2000"];
    let a = hhvix(&cfg, &args);
    let b = hhvix(&cfg, &args);
    assert_eq!(a.stdout, b.stdout);
    let c = hhvix(&cfg, &["--seed", "6", "simulate", "--target", "price", "--strike", "15", "--paths", "2000"]);
    assert_ne!(a.stdout, c.stdout);
    assert_eq!(json_of(&a)["seed"], 5);

    let one = json_of(&hhvix(&cfg, &["simulate", "--target", "price", "--paths", "1"]));
    assert!(one["se"].as_f64().unwrap().is_finite());
}

#[test]
fn simulate_writes_per_path_csv() {
    let fx = Fixture::new();
    let cfg = fx.config("ok.json", CONFIG);
    let paths = fx.path("paths.csv");
    json_of(&hhvix(
        &cfg,
        &["simulate", "--target", "forward-variance", "--paths", "50", "--paths-csv", paths.to_str().unwrap()],
    ));
    let text = std::fs::read_to_string(&paths).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "path_id,v_T,lambda_T,n_events");
    assert_eq!(lines.len(), 51);
    assert!(lines[1].starts_with("0,"));
    let lambda: f64 = lines[1].split(',').nth(2).unwrap().parse().unwrap();
    assert!(lambda >= 1.0);
}

#[test]
fn output_path_receives_main_result() {
    let fx = Fixture::new();
    let cfg = fx.config("ok.json", CONFIG);
    let target = fx.path("vix.json");
    let out = hhvix(&cfg, &["--output", target.to_str().unwrap(), "vix"]);
    assert!(out.status.success() && out.stdout.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&target).unwrap()).unwrap();
    assert!(v["A"].is_f64());
}
