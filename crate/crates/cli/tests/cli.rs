//! End-to-end runs of the `cfmm-forge` binary.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cfmm-forge"))
        .current_dir(dir)
        .env_remove("CFMM_FORGE_SEED")
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

/// `key = value` from a report.
fn value(report: &str, key: &str) -> String {
    report
        .lines()
        .find_map(|l| l.strip_prefix(&format!("{key} = ")))
        .unwrap_or_else(|| panic!("no `{key}` in\n{report}"))
        .to_string()
}

fn number(report: &str, key: &str) -> f64 {
    value(report, key).parse().unwrap()
}

/// Numeric rows of a CSV written by the tool, skipping comments and header.
fn rows(path: &Path) -> Vec<Vec<f64>> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect()
}

fn write(dir: &Path, name: &str, text: &str) {
    fs::write(dir.join(name), text).unwrap();
}

#[test]
fn optimize_uniform_belief_file() {
    let dir = TempDir::new().unwrap();
    write(dir.path(), "uniform.toml", "kind = \"uniform\"\n");
    let out = run(
        dir.path(),
        &["optimize", "--belief", "uniform.toml", "--out", "a.csv"],
    );
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let report = stdout(&out);
    assert!((number(&report, "X0") - 1.0).abs() < 1e-3);
    assert!((number(&report, "Y0") - 1.0).abs() < 1e-3);
    assert!((number(&report, "objective") - 8.0).abs() < 1e-2);
    let text = fs::read_to_string(dir.path().join("a.csv")).unwrap();
    assert!(text.starts_with("# command = optimize\n"));
    assert!(text.contains("\np,L,Y,X\n"));
    for r in rows(&dir.path().join("a.csv")) {
        if (1e-2..=1e2).contains(&r[0]) {
            assert!((r[1] / (r[0].sqrt() / 2.0) - 1.0).abs() < 1e-3);
        }
    }
}

#[test]
fn outputs_are_byte_identical_across_runs() {
    let dir = TempDir::new().unwrap();
    let args = ["optimize", "--family", "lmsr", "--grid", "1e-3,1e3,301"];
    let a = run(dir.path(), &args);
    let b = run(dir.path(), &args);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(a.stderr, b.stderr);
    let sim = [
        "simulate",
        "--family",
        "constant-product",
        "--sim",
        "0.02,0.21,20000,3",
        "--out",
        "v.csv",
    ];
    let first = run(dir.path(), &sim);
    let visits = fs::read(dir.path().join("v.csv")).unwrap();
    let second = run(dir.path(), &sim);
    assert_eq!(first.stdout, second.stdout);
    assert_eq!(visits, fs::read(dir.path().join("v.csv")).unwrap());
}

#[test]
fn malformed_belief_names_the_key() {
    let dir = TempDir::new().unwrap();
    write(
        dir.path(),
        "bad.toml",
        "kind = \"lognormal\"\nsigmaa = 1.0\n",
    );
    let out = run(dir.path(), &["optimize", "--belief", "bad.toml"]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("sigmaa"), "{}", stderr(&out));

    write(
        dir.path(),
        "neg.toml",
        "kind = \"lognormal\"\nsigma = -1.0\n",
    );
    assert_eq!(
        code(&run(dir.path(), &["optimize", "--belief", "neg.toml"])),
        2
    );
    assert_eq!(
        code(&run(dir.path(), &["optimize", "--belief", "missing.toml"])),
        2
    );
    assert_eq!(code(&run(dir.path(), &["optimize"])), 2);
}

#[test]
fn degenerate_and_truncated_beliefs_have_distinct_codes() {
    let dir = TempDir::new().unwrap();
    // support entirely outside the grid
    write(
        dir.path(),
        "far.toml",
        "kind = \"concentrated\"\nlo = 1e6\nhi = 1e7\n",
    );
    assert_eq!(
        code(&run(dir.path(), &["optimize", "--belief", "far.toml"])),
        2
    );
    let out = run(dir.path(), &["optimize", "--family", "weighted:4"]);
    assert_eq!(code(&out), 3, "{}", stderr(&out));
}

#[test]
fn invert_recovers_reference_beliefs() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    assert_eq!(
        code(&run(
            d,
            &[
                "optimize",
                "--family",
                "constant-product",
                "--out",
                "cp.csv"
            ]
        )),
        0
    );
    let out = run(d, &["invert", "--alloc", "cp.csv", "--out", "cp_h.csv"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let h = rows(&d.join("cp_h.csv"));
    let h0 = h[0][1];
    assert!(h.iter().all(|r| (r[1] / h0 - 1.0).abs() < 1e-9));

    assert_eq!(
        code(&run(
            d,
            &["optimize", "--family", "lmsr", "--out", "lmsr.csv"]
        )),
        0
    );
    assert_eq!(
        code(&run(
            d,
            &["invert", "--alloc", "lmsr.csv", "--out", "lmsr_h.csv"]
        )),
        0
    );
    let h = rows(&d.join("lmsr_h.csv"));
    let scale = h[0][1] / (h[0][0] / (1.0 + h[0][0]).powi(2));
    for r in &h {
        let reference = scale * r[0] / (1.0 + r[0]).powi(2);
        assert!((r[1] / reference - 1.0).abs() < 1e-9, "p = {}", r[0]);
    }
}

#[test]
fn inverted_belief_round_trips_through_optimize() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    assert_eq!(
        code(&run(
            d,
            &["optimize", "--family", "lognormal:1", "--out", "a.csv"]
        )),
        0
    );
    assert_eq!(
        code(&run(d, &["invert", "--alloc", "a.csv", "--out", "h.csv"])),
        0
    );
    write(d, "h.toml", "kind = \"ratio-table\"\npath = \"h.csv\"\n");
    let out = run(d, &["optimize", "--belief", "h.toml", "--out", "b.csv"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let (a, b) = (rows(&d.join("a.csv")), rows(&d.join("b.csv")));
    let mid = a.len() / 2;
    let c = b[mid][1] / a[mid][1];
    for (x, y) in a.iter().zip(&b) {
        if x[1] > 0.0 && y[1] > 0.0 {
            assert!((y[1] / (c * x[1]) - 1.0).abs() < 1e-6);
        }
    }
}

#[test]
fn invert_rejects_malformed_csv() {
    let dir = TempDir::new().unwrap();
    write(dir.path(), "a.csv", "p,L,Y\n1,2,3\n");
    assert_eq!(code(&run(dir.path(), &["invert", "--alloc", "a.csv"])), 2);
    write(dir.path(), "b.csv", "p,L,Y,X\n1,2,3,x\n");
    let out = run(dir.path(), &["invert", "--alloc", "b.csv"]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("non-numeric"));
    write(
        dir.path(),
        "c.csv",
        "p,L,Y,X\n1,1,1,1\n2,1,1,1\n2.5,1,1,1\n",
    );
    assert_eq!(code(&run(dir.path(), &["invert", "--alloc", "c.csv"])), 2);
}

#[test]
fn simulate_reports_and_asserts_bounds() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    let out = run(
        d,
        &[
            "simulate",
            "--family",
            "constant-product",
            "--sim",
            "0.02,0.21,1000000,42",
            "--assert-bounds",
        ],
    );
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let report = stdout(&out);
    assert!((number(&report, "band") - 0.190909).abs() < 1e-6);
    let rate = number(&report, "failure_rate");
    assert!(rate > number(&report, "bound_lo") - 0.01 && rate < number(&report, "bound_hi") + 0.01);
    assert!(number(&report, "tv_distance_uniform") < 0.02);

    // trades larger than the band always fail
    let out = run(
        d,
        &[
            "simulate",
            "--family",
            "constant-product",
            "--sim",
            "0.3,0.21,10000,1",
        ],
    );
    assert_eq!(code(&out), 0);
    assert_eq!(number(&stdout(&out), "failure_rate"), 1.0);

    // the strict-spot bounds do not hold for the more lenient average-rate rule
    let out = run(
        d,
        &[
            "simulate",
            "--family",
            "constant-product",
            "--sim",
            "0.04,0.21,1000000,5",
            "--rule",
            "overall-rate",
            "--assert-bounds",
        ],
    );
    assert_eq!(code(&out), 4);
    assert!(number(&stdout(&out), "failure_rate") < number(&stdout(&out), "bound_lo"));
}

#[test]
fn simulate_seed_comes_from_flag_or_environment() {
    let dir = TempDir::new().unwrap();
    let base = [
        "simulate",
        "--family",
        "constant-product",
        "--sim",
        "0.02,0.21,20000",
    ];
    let via_env = Command::new(env!("CARGO_BIN_EXE_cfmm-forge"))
        .current_dir(dir.path())
        .env("CFMM_FORGE_SEED", "17")
        .args(base)
        .output()
        .unwrap();
    let mut explicit = base.to_vec();
    explicit[4] = "0.02,0.21,20000,17";
    let via_flag = run(dir.path(), &explicit);
    let other = run(dir.path(), &base);
    assert_eq!(via_env.stdout, via_flag.stdout);
    assert_ne!(via_env.stdout, other.stdout);
}

#[test]
fn simulate_against_an_allocation_file() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    assert_eq!(
        code(&run(
            d,
            &["optimize", "--family", "constant-product", "--out", "a.csv"]
        )),
        0
    );
    let out = run(
        d,
        &[
            "simulate",
            "--alloc",
            "a.csv",
            "--sim",
            "0.02,0.21,200000,9",
            "--out",
            "v.csv",
        ],
    );
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let visits = rows(&d.join("v.csv"));
    let total: f64 = visits.iter().map(|r| r[2]).sum();
    assert_eq!(total, 200_000.0);
}

#[test]
fn verify_reference_families() {
    let dir = TempDir::new().unwrap();
    for (family, tol) in [
        ("constant-product", "1e-3"),
        ("weighted:4", "1e-3"),
        ("lmsr", "1e-3"),
        ("lognormal:1", "1e-2"),
        ("concentrated:0.5,2", "1e-3"),
    ] {
        let out = run(dir.path(), &["verify", "--family", family, "--tol", tol]);
        assert_eq!(code(&out), 0, "{family}: {}{}", stdout(&out), stderr(&out));
        assert_eq!(value(&stdout(&out), "result"), "pass");
    }
}

#[test]
fn verify_fails_with_code_five() {
    let dir = TempDir::new().unwrap();
    // below the rounding floor of the comparison itself
    let out = run(
        dir.path(),
        &["verify", "--family", "lmsr", "--tol", "1e-18"],
    );
    assert_eq!(code(&out), 5, "{}", stdout(&out));
    assert_eq!(code(&run(dir.path(), &["verify"])), 2);
}

#[test]
fn gbm_belief_compiles_and_feeds_the_optimizer() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    write(
        d,
        "gbm.toml",
        "kind = \"gbm\"\nsigma-x = 0.5\nsigma-y = 0.5\ngamma = 1.0\n",
    );
    let out = run(
        d,
        &[
            "compile-belief",
            "--belief",
            "gbm.toml",
            "--axis",
            "1e-2,1e2,41",
            "--grid",
            "1e-3,1e3,401",
            "--out",
            "g.csv",
        ],
    );
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let report = stdout(&out);
    assert!(number(&report, "swap_asymmetry") < 2e-2);
    assert!((number(&report, "mass") - 1.0).abs() < 2e-2);

    write(d, "t.toml", "kind = \"table-2d\"\npath = \"g.csv\"\n");
    let out = run(
        d,
        &[
            "optimize",
            "--belief",
            "t.toml",
            "--grid",
            "1e-2,1e2,401",
            "--out",
            "l.csv",
        ],
    );
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let l: Vec<(f64, f64)> = rows(&d.join("l.csv"))
        .iter()
        .map(|r| (r[0], r[1]))
        .collect();
    let peaks = l
        .windows(3)
        .filter(|w| w[1].1 > w[0].1 && w[1].1 >= w[2].1)
        .map(|w| w[1].0)
        .collect::<Vec<_>>();
    assert_eq!(peaks.len(), 1, "{peaks:?}");
    assert!((0.5..=2.0).contains(&peaks[0]));

    write(
        d,
        "bad.toml",
        "kind = \"gbm\"\nsigma-x = 0.5\nsigma-y = 0.5\ngamma = -1.0\n",
    );
    assert_eq!(
        code(&run(
            d,
            &["compile-belief", "--belief", "bad.toml", "--out", "x.csv"]
        )),
        2
    );
}

#[test]
fn config_file_values_yield_to_flags() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    write(
        d,
        "run.toml",
        "family = \"lmsr\"\nbudget = 4.0\ngrid = \"1e-3,1e3,301\"\n",
    );
    let from_file = run(d, &["optimize", "--config", "run.toml"]);
    assert_eq!(code(&from_file), 0, "{}", stderr(&from_file));
    let report = stderr(&from_file);
    assert!((number(&report, "X0") + number(&report, "Y0") - 4.0).abs() < 1e-9);
    let csv = stdout(&from_file);
    assert!(csv.contains("# budget = 4\n") && csv.contains("# grid = 0.001,1000,301\n"));

    let flagged = run(d, &["optimize", "--config", "run.toml", "--budget", "8"]);
    let report = stderr(&flagged);
    assert!((number(&report, "X0") + number(&report, "Y0") - 8.0).abs() < 1e-9);

    write(d, "typo.toml", "budgett = 4.0\n");
    let out = run(
        d,
        &["optimize", "--config", "typo.toml", "--family", "lmsr"],
    );
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("budgett"));
}

#[test]
fn linear_terms_and_fees_are_reported() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    let out = run(
        d,
        &[
            "optimize",
            "--family",
            "constant-product",
            "--linear-term",
            "kappa",
            "--fee",
            "0.003,0.01",
            "--out",
            "k.csv",
        ],
    );
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let report = stdout(&out);
    assert!(number(&report, "objective_gap") < 1e-3);
    assert!(number(&report, "linear_term_value").is_finite());
    assert!(number(&report, "fee_revenue") > 0.0);

    let out = run(
        d,
        &[
            "optimize",
            "--family",
            "constant-product",
            "--linear-term",
            "lvr:0.01",
            "--fee",
            "0.003,0.01",
            "--out",
            "l.csv",
        ],
    );
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert!(number(&stdout(&out), "net_profit").is_finite());
    assert_eq!(
        code(&run(
            d,
            &["optimize", "--family", "lmsr", "--linear-term", "lvr:-1"]
        )),
        2
    );
}
