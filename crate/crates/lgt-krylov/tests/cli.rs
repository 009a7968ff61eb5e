//! End-to-end runs of the `lgt-krylov` binary.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use lgt_krylov::formats::{read_provenance, read_table, CampaignRow, CostRow, LawRow, ResultRow, RuntimeRow};

const SMALL: &str = r#"
[model]
n_sites = 4

[solver]
kinds = ["pqse"]
dims = [2, 3]

[sweep]
budgets = [1e5, 1e7]
instances = 3
seed = 11

[cost]
n_grid = [4, 8]
m = 2
"#;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_lgt-krylov"));
    c.env_remove("LGTK_CONFIG");
    for (k, _) in std::env::vars().filter(|(k, _)| k.starts_with("LGTK_")) {
        c.env_remove(k);
    }
    c
}

fn run(dir: &Path, config: &str, args: &[&str]) -> Output {
    let cfg = dir.join("config.toml");
    fs::write(&cfg, config).unwrap();
    bin().arg("--config").arg(&cfg).args(args).output().unwrap()
}

fn ok(out: &Output) -> String {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn assert_headers(dir: &Path) {
    for entry in fs::read_dir(dir).unwrap() {
        let p = entry.unwrap().path();
        if p.extension().is_some_and(|e| e == "csv") {
            let prov = read_provenance(&p)
                .unwrap()
                .unwrap_or_else(|| panic!("{} has no provenance", p.display()));
            assert_eq!(prov["schema"], "lgt-krylov/1");
            assert!(prov.contains_key("config_digest"));
        }
    }
}

#[test]
fn sweep_writes_one_row_per_instance() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("a");
    ok(&run(tmp.path(), SMALL, &["--out", out.to_str().unwrap(), "sweep"]));
    let rows: Vec<ResultRow> = read_table(&out.join("results.csv")).unwrap();
    assert_eq!(rows.len(), 2 * 2 * 3);
    assert!(rows.iter().all(|r| r.seed == 11 && r.n_sites == 4 && r.solver == "pqse"));
    assert!(rows.iter().all(|r| r.frac_error.is_finite()));
    assert!(out.join("summary.csv").exists() && out.join("manifest.json").exists());
    assert_headers(&out);
}

#[test]
fn same_seed_gives_identical_bytes() {
    let tmp = tempfile::tempdir().unwrap();
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    ok(&run(tmp.path(), SMALL, &["--out", a.to_str().unwrap(), "--workers", "1", "sweep"]));
    ok(&run(tmp.path(), SMALL, &["--out", b.to_str().unwrap(), "--workers", "4", "sweep"]));
    for f in ["results.csv", "summary.csv"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f} differs");
    }
    let c = tmp.path().join("c");
    ok(&run(tmp.path(), SMALL, &["--out", c.to_str().unwrap(), "--seed", "12", "sweep"]));
    assert_ne!(fs::read(a.join("results.csv")).unwrap(), fs::read(c.join("results.csv")).unwrap());
}

#[test]
fn noiseless_rows_have_infinite_budget() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("n");
    ok(&run(tmp.path(), SMALL, &["--out", out.to_str().unwrap(), "--noiseless", "sweep"]));
    let rows: Vec<ResultRow> = read_table(&out.join("results.csv")).unwrap();
    assert_eq!(rows.len(), 2);
    assert!(rows.iter().all(|r| r.budget.is_infinite() && r.instance == 0));
    assert!(rows[1].frac_error <= rows[0].frac_error);
}

#[test]
fn unknown_key_exits_with_config_code() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run(tmp.path(), "[model]\nsites = 4\n", &["model-info"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!out.stderr.is_empty());
}

#[test]
fn odd_chain_is_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run(tmp.path(), "[model]\nn_sites = 5\n", &["model-info"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn env_overrides_file_values() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("config.toml");
    fs::write(&cfg, SMALL).unwrap();
    let out = tmp.path().join("e");
    let o = bin()
        .env("LGTK_CONFIG", &cfg)
        .env("LGTK_SWEEP_BUDGETS", "[1e6]")
        .env("LGTK_SWEEP_INSTANCES", "2")
        .args(["--out", out.to_str().unwrap(), "sweep"])
        .output()
        .unwrap();
    ok(&o);
    let rows: Vec<ResultRow> = read_table(&out.join("results.csv")).unwrap();
    assert_eq!(rows.len(), 2 * 2);
    assert!(rows.iter().all(|r| r.budget == 1e6));
}

#[test]
fn model_info_two_sites() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("m");
    let report = ok(&run(
        tmp.path(),
        "[model]\nn_sites = 2\nx = 0.5\n",
        &["--out", out.to_str().unwrap(), "model-info"],
    ));
    let line = report.lines().find(|l| l.starts_with("interaction energy")).unwrap();
    let e: f64 = line.split_whitespace().last().unwrap().parse().unwrap();
    let want = -1.5 - (0.5 - 4.25f64.sqrt());
    assert!((e - want).abs() < 1e-10, "{e} vs {want}");
    let terms = fs::read_to_string(out.join("pauli_terms.txt")).unwrap();
    assert!(terms.lines().count() > 1);
    assert_headers(&out);
}

#[test]
fn resources_spot_rows() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("r");
    ok(&run(tmp.path(), SMALL, &["--out", out.to_str().unwrap(), "resources"]));
    let costs: Vec<CostRow> = read_table(&out.join("costs.csv")).unwrap();
    let label = "G_tilde/all_to_all_one_ancilla";
    let pick = |c: &str| {
        costs
            .iter()
            .find(|r| r.n_sites == 4 && r.construction == c && r.policy == label)
            .unwrap()
    };
    assert_eq!(pick("U").t, 60.0);
    assert!(pick("Pi").t <= 1312.0);
    let g = costs.iter().find(|r| r.n_sites == 4 && r.construction == "G").unwrap();
    assert_eq!((g.t, g.cnot, g.rz), (112.0, 188.0, 180.0));

    let runtime: Vec<RuntimeRow> = read_table(&out.join("runtime.csv")).unwrap();
    let eagle: Vec<_> = runtime.iter().filter(|r| r.processor.contains("Eagle")).collect();
    assert!(!eagle.is_empty());
    for r in eagle {
        assert!((r.serial_seconds - r.cnot * 636e-9).abs() <= 1e-12 * r.serial_seconds);
    }
    assert_headers(&out);
}

#[test]
fn fit_recovers_a_known_law() {
    let tmp = tempfile::tempdir().unwrap();
    let input = tmp.path().join("req.csv");
    let mut text = String::from("solver,n_sites,target,requirement\n");
    for n in (10..=26).step_by(2) {
        text.push_str(&format!("pqse,{n},0.0001,{:e}\n", 10f64.powf(8.919) * 1.143f64.powi(n)));
    }
    fs::write(&input, text).unwrap();
    let out = tmp.path().join("f");
    let cfg = "[fit]\nextrapolate_n = [10, 20, 40]\n";
    ok(&run(
        tmp.path(),
        cfg,
        &["--out", out.to_str().unwrap(), "fit", input.to_str().unwrap()],
    ));

    let laws: Vec<LawRow> = read_table(&out.join("laws.csv")).unwrap();
    assert_eq!(laws.len(), 1);
    assert!((laws[0].chi - 1.143f64.log10()).abs() < 1e-9);
    assert!((laws[0].lambda - 8.919).abs() < 1e-9);
    let camp: Vec<CampaignRow> = read_table(&out.join("campaign.csv")).unwrap();
    assert_eq!(camp.len(), 3);
    for c in &camp {
        let want = 10f64.powf(8.919) * 1.143f64.powi(c.n_sites as i32);
        assert!((c.requirement / want - 1.0).abs() < 1e-6);
        assert!(c.t_with_rot.is_finite() && c.t_with_rot > 0.0);
    }
    assert_headers(&out);
}

#[test]
fn fit_rejects_empty_input() {
    let tmp = tempfile::tempdir().unwrap();
    let input = tmp.path().join("empty.csv");
    fs::write(&input, "solver,n_sites,target,requirement\n").unwrap();
    let out = run(
        tmp.path(),
        "",
        &["--out", tmp.path().join("f").to_str().unwrap(), "fit", input.to_str().unwrap()],
    );
    assert!(!out.status.success());
    assert_ne!(out.status.code(), Some(0));
}

#[test]
fn pipeline_end_to_end() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("p");
    let cfg = r#"
[solver]
kinds = ["pqse", "tqse"]
dims = [1, 2, 3, 4]

[sweep]
n_sites = [4, 6]
budgets = [1e5, 1e7, 1e9, 1e11]
instances = 9

[cost]
n_grid = [4]
"#;
    ok(&run(tmp.path(), cfg, &["--out", out.to_str().unwrap(), "pipeline"]));
    for f in [
        "results.csv",
        "summary.csv",
        "fit.csv",
        "requirements.csv",
        "laws.csv",
        "campaign.csv",
        "costs.csv",
        "runtime.csv",
        "manifest.json",
    ] {
        assert!(out.join(f).exists(), "missing {f}");
    }
    let rows: Vec<ResultRow> = read_table(&out.join("results.csv")).unwrap();
    assert_eq!(rows.len(), 2 * 4 * 4 * 9 * 2);
    let manifest: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    assert!(manifest.to_string().contains("results.csv"));
    assert_headers(&out);
}
