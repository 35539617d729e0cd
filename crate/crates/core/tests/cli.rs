use std::path::Path;
use std::process::{Command, Output};

fn epsosc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_epsosc"))
        .args(args)
        .env_remove("EPSOSC_CONFIG")
        .output()
        .expect("binary runs")
}

fn column(csv: &str, name: &str) -> Vec<f64> {
    let mut lines = csv.lines();
    let idx = lines.next().unwrap().split(',').position(|h| h == name).unwrap();
    lines.map(|l| l.split(',').nth(idx).unwrap().parse().unwrap()).collect()
}

fn read(p: &Path) -> String {
    std::fs::read_to_string(p).unwrap()
}

#[test]
fn classical_row_count_and_header() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("c.csv");
    let o = epsosc(&[
        "simulate-classical", "--lambda", "0.1", "--omega", "1", "--q0", "1", "--t-max", "60", "--dt", "0.006",
        "--out", out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let text = read(&out);
    assert_eq!(text.lines().next(), Some("t,q,qdot,p,pdot,E_actual,E_image,H2"));
    assert_eq!(text.lines().count() - 1, 10_001);

    let meta: serde_json::Value = serde_json::from_str(&read(&dir.path().join("c.csv.meta.json"))).unwrap();
    assert_eq!(meta["omega_prime_convention"], "rederived");
    assert_eq!(meta["version"], env!("CARGO_PKG_VERSION"));
    assert_eq!(meta["config"]["dt"], 0.006);
}

#[test]
fn undamped_energy_is_constant() {
    let o = epsosc(&["simulate-classical", "--lambda", "0", "--t-max", "20", "--dt", "0.01"]);
    assert_eq!(o.status.code(), Some(0));
    let e = column(&String::from_utf8(o.stdout).unwrap(), "E_actual");
    let spread = e.iter().fold(0.0f64, |m, v| m.max((v - e[0]).abs()));
    assert!(spread < 1e-10, "{spread:e}");
}

#[test]
fn overdamped_is_a_config_error() {
    let o = epsosc(&["simulate-classical", "--lambda", "1", "--omega", "1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("lambda < omega"));
}

#[test]
fn outputs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for p in [&a, &b] {
        let o = epsosc(&["evolve", "--t-max", "5", "--steps", "50", "--out", p.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0));
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn spectrum_tables() {
    let o = epsosc(&["spectrum", "--n-max", "2", "--lambda", "0", "--omega", "1"]);
    assert_eq!(o.status.code(), Some(0));
    let doc: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    for conv in ["paper", "rederived"] {
        let entries = doc["conventions"][conv]["eigenvalues"].as_array().unwrap();
        assert_eq!(entries.len(), 9);
        for e in entries {
            let expected = e["n"].as_f64().unwrap() - e["m"].as_f64().unwrap();
            assert_eq!(e["re"].as_f64().unwrap(), expected);
            assert_eq!(e["im"].as_f64().unwrap(), 0.0);
        }
    }

    let o = epsosc(&["spectrum", "--n-max", "1", "--lambda", "0.1"]);
    let doc: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let e10 = doc["conventions"]["paper"]["eigenvalues"]
        .as_array()
        .unwrap()
        .iter()
        .find(|e| e["n"] == 1 && e["m"] == 0)
        .unwrap()
        .clone();
    assert_eq!((e10["re"].as_f64().unwrap(), e10["im"].as_f64().unwrap()), (1.0, 0.1));

    assert_eq!(epsosc(&["spectrum", "--n-max", "13"]).status.code(), Some(2));
}

#[test]
fn chain_dump_has_four_term_h3() {
    let o = epsosc(&["spectrum", "--lambda", "0.1", "--dump-chain"]);
    assert_eq!(o.status.code(), Some(0));
    let doc: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let stages = doc["chain"]["hamiltonians"].as_array().unwrap();
    let h3 = stages.iter().find(|s| s["stage"] == "H3").unwrap();
    let terms = h3["terms"].as_object().unwrap();
    assert_eq!(terms.len(), 4, "{terms:?}");
    let mut rates: Vec<f64> = terms
        .values()
        .map(|triples| triples[0][2].as_f64().unwrap())
        .collect();
    rates.sort_by(f64::total_cmp);
    for (r, e) in rates.iter().zip([-0.2, -0.2, 0.2, 0.2]) {
        assert!((r - e).abs() < 1e-12, "{rates:?}");
    }
}

#[test]
fn evolve_flags() {
    let o = epsosc(&["evolve", "--lambda", "0", "--delta", "1", "--t-max", "10", "--steps", "200"]);
    let csv = String::from_utf8(o.stdout).unwrap();
    assert_eq!(csv.lines().next(), Some("t,dq,dpiq,dp,dpip,prod_q,prod_p,prod_combined,flag_q,flag_p"));
    assert!(column(&csv, "flag_q").iter().chain(&column(&csv, "flag_p")).all(|f| *f == 0.0));

    let o = epsosc(&["evolve", "--lambda", "0.1", "--t-max", "20", "--steps", "400"]);
    let csv = String::from_utf8(o.stdout).unwrap();
    assert!(column(&csv, "flag_q").contains(&1.0));
    assert!(column(&csv, "flag_p").iter().all(|f| *f == 0.0));
    assert!(column(&csv, "prod_combined").iter().all(|v| *v >= 0.25 * (1.0 - 1e-6)));
}

#[test]
fn evolve_oracle_columns_agree() {
    let o = epsosc(&["evolve", "--lambda", "0.1", "--t-max", "2", "--steps", "8", "--oracle"]);
    assert_eq!(o.status.code(), Some(0));
    let csv = String::from_utf8(o.stdout).unwrap();
    let diff = column(&csv, "max_abs_diff");
    assert_eq!(diff.len(), 9);
    assert!(diff.iter().all(|d| *d < 1e-6), "{diff:?}");
}

#[test]
fn evolve_json_uses_csv_keys() {
    let o = epsosc(&["evolve", "--t-max", "1", "--steps", "4", "--format", "json"]);
    let rows: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let rows = rows.as_array().unwrap();
    assert_eq!(rows.len(), 5);
    for key in ["t", "dq", "dpiq", "dp", "dpip", "prod_q", "prod_p", "prod_combined", "flag_q", "flag_p"] {
        assert!(rows[0].get(key).is_some(), "{key}");
    }
}

#[test]
fn config_file_and_environment() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, "lambda = 0\nt_max = 1\ndt = 0.5\n").unwrap();

    let o = Command::new(env!("CARGO_BIN_EXE_epsosc"))
        .args(["simulate-classical"])
        .env("EPSOSC_CONFIG", &cfg)
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(String::from_utf8(o.stdout).unwrap().lines().count(), 4);

    let o = epsosc(&["simulate-classical", "--config", cfg.to_str().unwrap(), "--dt", "0.25"]);
    assert_eq!(String::from_utf8(o.stdout).unwrap().lines().count(), 6);

    std::fs::write(&cfg, "lamda = 0\n").unwrap();
    let o = epsosc(&["simulate-classical", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn verify_exit_codes() {
    let o = epsosc(&["verify", "--quick"]);
    assert_eq!(o.status.code(), Some(0));
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.lines().filter(|l| l.starts_with("PASS") || l.starts_with("FAIL")).count() >= 15);
    assert!(text.contains("rederived"));

    let o = epsosc(&["verify", "--quick", "--perturb-symplectic", "1e-3"]);
    assert_eq!(o.status.code(), Some(1));
    let text = String::from_utf8(o.stdout).unwrap();
    let failed: Vec<&str> = text.lines().filter(|l| l.starts_with("FAIL")).collect();
    assert_eq!(failed.len(), 1);
    assert!(failed[0].contains("symplectic"));
}
