use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn hsc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hsc-plan")).args(args).output().expect("spawn hsc-plan")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn out_dir(dir: &Path) -> &str {
    dir.to_str().unwrap()
}

/// Rows of a CSV file as header-keyed maps.
fn rows(path: &Path) -> Vec<std::collections::HashMap<String, String>> {
    let text = fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let header: Vec<String> = lines.next().unwrap().split(',').map(String::from).collect();
    lines.map(|l| header.iter().cloned().zip(l.split(',').map(String::from)).collect()).collect()
}

fn objective(dir: &Path) -> f64 {
    let json = fs::read_to_string(dir.join("audit.json")).unwrap();
    let total = json.split("\"total_cost\":").nth(1).unwrap();
    total.split([',', '}']).next().unwrap().trim().parse().unwrap()
}

#[test]
fn run_mini_case_passes_audit() {
    let dir = tempfile::tempdir().unwrap();
    let o = hsc(&["run", "northeast-mini", "--carbon-price", "100", "--truck-mode", "relaxed", "--out", out_dir(dir.path())]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(String::from_utf8_lossy(&o.stdout).contains("audit PASS"));
    for f in ["capacity.csv", "capacity_detail.csv", "costs.csv", "dispatch_z3.csv", "dispatch_z4.csv", "solution.csv", "audit.json"] {
        assert!(dir.path().join(f).exists(), "{f}");
    }
    let cap = fs::read_to_string(dir.path().join("capacity.csv")).unwrap();
    assert!(cap.starts_with("Pipeline Flow Capacity (tonne/hour),"));
}

#[test]
fn integer_trucks_cost_at_most_half_a_percent_more() {
    let dir = tempfile::tempdir().unwrap();
    let o = hsc(&["sweep", "northeast-mini", "--truck-mode", "relaxed", "--truck-mode", "integer", "--out", out_dir(dir.path())]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let r = rows(&dir.path().join("sweep.csv"));
    assert_eq!((r[0]["truck_mode"].as_str(), r[1]["truck_mode"].as_str()), ("relaxed", "integer"));
    let relaxed: f64 = r[0]["objective"].parse().unwrap();
    let integer: f64 = r[1]["objective"].parse().unwrap();
    assert!(integer >= relaxed * (1.0 - 1e-9), "{integer} < {relaxed}");
    assert!((integer - relaxed) / integer <= 0.005);
}

#[test]
fn export_only_writes_mps_and_no_solution() {
    let dir = tempfile::tempdir().unwrap();
    let o = hsc(&["run", "pipeline-pair", "--solver", "export-only", "--out", out_dir(dir.path())]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let mps = fs::read_to_string(dir.path().join("instance.mps")).unwrap();
    assert!(mps.starts_with("NAME"));
    assert!(dir.path().join("instance.names.json").exists());
    assert!(!dir.path().join("solution.csv").exists());
}

#[test]
fn two_by_two_sweep_is_sorted_and_deterministic() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let args = |dir: &Path| {
        let d = out_dir(dir).to_string();
        vec!["sweep", "smr-toy", "--carbon-price", "100", "--carbon-price", "0", "--pipe-cost-factor", "1", "--pipe-cost-factor", "0.5", "--out"]
            .into_iter()
            .map(String::from)
            .chain([d])
            .collect::<Vec<_>>()
    };
    let run = |dir: &Path| {
        let v = args(dir);
        let o = Command::new(env!("CARGO_BIN_EXE_hsc-plan")).args(&v).env("HSC_PLAN_THREADS", "1").output().unwrap();
        assert_eq!(code(&o), 0, "{}", stderr(&o));
    };
    run(a.path());
    let o = hsc(&args(b.path()).iter().map(String::as_str).collect::<Vec<_>>());
    assert_eq!(code(&o), 0);

    let r = rows(&a.path().join("sweep.csv"));
    let axes: Vec<(&str, &str)> = r.iter().map(|row| (row["carbon_price"].as_str(), row["pipeline_cost_factor"].as_str())).collect();
    assert_eq!(axes, [("0", "0.5"), ("0", "1"), ("100", "0.5"), ("100", "1")]);
    assert_eq!(fs::read(a.path().join("sweep.csv")).unwrap(), fs::read(b.path().join("sweep.csv")).unwrap());
    for row in &r {
        let label = format!("carbon-{}_elec-base_pipe-{}_relaxed", row["carbon_price"], row["pipeline_cost_factor"]);
        for f in ["capacity.csv", "costs.csv", "solution.csv", "audit.json"] {
            assert_eq!(fs::read(a.path().join(&label).join(f)).unwrap(), fs::read(b.path().join(&label).join(f)).unwrap(), "{label}/{f}");
        }
    }
}

#[test]
fn flexible_trucks_never_cost_more_than_dedicated_routes() {
    let dir = tempfile::tempdir().unwrap();
    let o = hsc(&["sweep", "pipeline-pair", "--truck-mode", "existing", "--truck-mode", "relaxed", "--out", out_dir(dir.path())]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let r = rows(&dir.path().join("sweep.csv"));
    assert_eq!(r[1]["truck_mode"], "existing");
    let relaxed: f64 = r[0]["objective"].parse().unwrap();
    let existing: f64 = r[1]["objective"].parse().unwrap();
    assert!(relaxed <= existing * (1.0 + 1e-9), "{relaxed} > {existing}");
}

#[test]
fn electrolyzer_share_rises_with_carbon_price() {
    let dir = tempfile::tempdir().unwrap();
    let mut args = vec!["sweep", "carbon-switch", "--out", out_dir(dir.path())];
    for c in ["200", "0", "100", "50"] {
        args.extend(["--carbon-price", c]);
    }
    let o = hsc(&args);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let r = rows(&dir.path().join("sweep.csv"));
    let col = |name: &str| r.iter().map(|row| row[name].parse::<f64>().unwrap()).collect::<Vec<_>>();
    assert_eq!(col("carbon_price"), [0.0, 50.0, 100.0, 200.0]);
    let ele = col("share_electrolyzer");
    let smr = col("share_smr");
    assert!(ele.windows(2).all(|w| w[1] >= w[0] - 1e-9), "{ele:?}");
    assert!(smr.windows(2).all(|w| w[1] <= w[0] + 1e-9), "{smr:?}");
}

#[test]
fn audit_of_external_solutions() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_eq!(code(&hsc(&["run", "smr-toy", "--out", out_dir(d)])), 0);
    let sol = d.join("solution.csv");
    let o = hsc(&["audit", "smr-toy", sol.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(String::from_utf8_lossy(&o.stdout).contains("\"pass\": true"));
    assert!((objective(d) - 1.011772e8).abs() / 1.011772e8 < 1e-6);

    // One tonne of phantom lost load breaks the balance.
    let text = fs::read_to_string(&sol).unwrap();
    let bad: String = text
        .lines()
        .map(|l| if l.starts_with("\"h_los(a,5)\",") { "\"h_los(a,5)\",1".to_string() } else { l.to_string() })
        .collect::<Vec<_>>()
        .join("\n");
    let corrupted = d.join("corrupted.csv");
    fs::write(&corrupted, bad).unwrap();
    let o = hsc(&["audit", "smr-toy", corrupted.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("balance"), "{}", stderr(&o));

    let empty = d.join("empty.csv");
    fs::write(&empty, "").unwrap();
    let o = hsc(&["audit", "smr-toy", empty.to_str().unwrap()]);
    assert_eq!(code(&o), 4, "{}", stderr(&o));
}

#[test]
fn exit_codes_for_input_and_solver_failures() {
    let dir = tempfile::tempdir().unwrap();
    let o = hsc(&["run", "no-such-case", "--out", out_dir(dir.path())]);
    assert_eq!(code(&o), 4);
    assert!(stderr(&o).contains("bundled"));
    assert_eq!(code(&hsc(&["run", "smr-toy", "--truck-mode", "sideways"])), 4);
    assert_eq!(code(&hsc(&["sweep", "smr-toy", "--out", out_dir(dir.path())])), 4);
    assert_eq!(code(&hsc(&["--help"])), 0);

    // The full case is above the reference solver's size limit.
    let o = hsc(&["run", "northeast", "--out", out_dir(dir.path())]);
    assert_eq!(code(&o), 3, "{}", stderr(&o));
    assert!(String::from_utf8_lossy(&o.stdout).contains("export to MPS"));
}
