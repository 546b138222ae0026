use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

fn rkhs(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rkhs")).args(args).output().expect("binary runs")
}

fn scratch(name: &str, contents: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("rkhs_cli_{}", std::process::id()));
    fs::create_dir_all(&dir).unwrap();
    let p = dir.join(name);
    fs::write(&p, contents).unwrap();
    p
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn e0_on_hermite_prints_one() {
    let k = scratch("h.json", r#"{"family":"hermite","params":[0.3,0.7]}"#);
    for problem in ["int", "approx"] {
        let o = rkhs(&["e0", "--kernel", k.to_str().unwrap(), "--problem", problem]);
        assert!(o.status.success());
        assert_eq!(stdout(&o).trim(), "1");
    }
    let g = scratch("g.json", r#"{"family":"gaussian","params":[0.5]}"#);
    let o = rkhs(&["e0", "--kernel", g.to_str().unwrap(), "--problem", "int"]);
    let v: f64 = stdout(&o).trim().parse().unwrap();
    assert!((v - 2f64.powf(-0.25)).abs() < 1e-15);
}

#[test]
fn verify_mehler_passes() {
    let o = rkhs(&["verify", "--suite", "mehler"]);
    assert!(o.status.success(), "{}", stdout(&o));
    assert!(stdout(&o).starts_with("PASS"));
}

#[test]
fn univariate_decay_is_monotone() {
    let o = rkhs(&["univariate-decay", "--space", "hermite", "--param", "0.5", "--n-max", "20"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("n,error,t4_lower,rate_fit"));
    let errors: Vec<f64> = lines.map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect();
    assert_eq!(errors.len(), 20);
    assert!(errors.windows(2).all(|w| w[1] <= w[0]));
}

#[test]
fn csv_is_deterministic() {
    let args = ["tensor-decay", "--sigma", "1,0.5", "--eps-list", "0.1,0.01,0.001"];
    let (a, b) = (rkhs(&args), rkhs(&args));
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert!(stdout(&a).starts_with("eps,n_choice,size,error\n"));
}

#[test]
fn mdm_run_reports_decay() {
    let o = rkhs(&["mdm-run", "--sigma-rule", "j^-1.5", "--budgets", "10,100,1000", "--dollar-table", "1,2,3,4,5,6,7,8,9,10,11,12,13,14,15,16,17,18,19,20,21"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(stdout(&o).lines().count(), 4);
    assert!(stdout(&o).starts_with("cost,error,tail_bound\n"));
    let err = String::from_utf8(o.stderr).unwrap();
    let d: serde_json::Value = serde_json::from_str(err.trim()).unwrap();
    assert!(d["exponent"].as_f64().unwrap() > 0.0);
}

#[test]
fn transfer_writes_twin_and_residual() {
    let r = scratch("rule.json", r#"{"nodes":[[0.0],[1.0]],"weights":[0.5,0.5]}"#);
    let out = r.with_file_name("twin.json");
    let o = rkhs(&["transfer", "--rule", r.to_str().unwrap(), "--sigma", "1", "--problem", "int", "--out", out.to_str().unwrap()]);
    assert!(o.status.success());
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    assert!(report["identity_residual"].as_f64().unwrap() < 1e-12);
    assert_eq!(report["twin"]["weights"].as_array().unwrap().len(), 2);

    let m = scratch("method.json", r#"{"nodes":[[0.0]],"index_set":[[0],[1],[2]],"coeffs":[[1.0,0.0,0.0]]}"#);
    let o = rkhs(&["transfer", "--rule", m.to_str().unwrap(), "--sigma", "1", "--problem", "approx"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let report: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(report["identity_residual"].as_f64().unwrap() < 1e-12);
}

#[test]
fn usage_errors_exit_two() {
    let bad = scratch("bad.json", "{");
    let o = rkhs(&["e0", "--kernel", bad.to_str().unwrap(), "--problem", "int"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("malformed JSON"));
    assert_eq!(rkhs(&["verify", "--suite", "everything"]).status.code(), Some(2));
    assert_eq!(rkhs(&["mdm-run", "--sigma-rule", "j^-0.3", "--budgets", "10"]).status.code(), Some(2));
}

#[test]
fn numeric_failures_carry_module_text() {
    let o = rkhs(&["univariate-decay", "--space", "hermite", "--param", "0.5", "--n-max", "300"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("unsupported rule size"));
}
