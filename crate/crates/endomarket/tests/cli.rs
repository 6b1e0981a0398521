use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

fn golden(name: &str) -> String {
    let path = Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/golden")
        .join(name);
    std::fs::read_to_string(path).unwrap()
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_endomarket"))
        .args(args)
        .output()
        .unwrap()
}

fn run_with(sub: &str, config: &str, extra: &[&str]) -> Output {
    let cfg = fixture(config);
    let mut args = vec![sub, "--config", cfg.to_str().unwrap()];
    args.extend_from_slice(extra);
    run(&args)
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn solve_low_linear_matches_golden() {
    let o = run_with("solve", "low_linear.toml", &[]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), golden("low_linear_solve.csv"));
}

#[test]
fn sweep_matches_golden_tables() {
    for (config, table) in [
        ("moderate_sweep.toml", "moderate_sweep.csv"),
        ("special_sweep.toml", "special_sweep.csv"),
    ] {
        let o = run_with("sweep", config, &["--quiet"]);
        assert_eq!(o.status.code(), Some(0), "{config}");
        assert_eq!(stdout(&o), golden(table), "{config}");
    }
}

#[test]
fn csv_schema_is_pinned() {
    let text = golden("moderate_sweep.csv");
    assert!(!text.contains('\r'));
    let mut lines = text.lines();
    assert_eq!(
        lines.next(),
        Some("price,alpha_lo,alpha_hi,regime,k_star,source")
    );
    let mut regimes = Vec::new();
    for line in lines {
        let f: Vec<&str> = line.split(',').collect();
        assert_eq!(f.len(), 6);
        for num in &f[..3] {
            let digits = num.chars().filter(char::is_ascii_digit).collect::<String>();
            assert_eq!(digits.trim_start_matches('0').len(), 12, "{num}");
            assert!(!num.contains('e'));
        }
        regimes.push(f[3].to_string());
    }
    assert_eq!(regimes.len(), 50);
    let switch = regimes.iter().position(|r| r == "full").unwrap();
    assert!(regimes[..switch].iter().all(|r| r == "partial"));
    assert!(regimes[switch..].iter().all(|r| r == "full"));
}

#[test]
fn solve_high_constant_is_full() {
    let o = run_with("solve", "high_constant.toml", &[]);
    assert_eq!(o.status.code(), Some(0));
    let rows: Vec<String> = stdout(&o).lines().skip(1).map(String::from).collect();
    assert_eq!(
        rows,
        ["5.00000000000,1.00000000000,1.00000000000,full,2,analytic"]
    );
}

#[test]
fn solve_reports_empty_set_explicitly() {
    let o = run_with("solve", "empty_linear.toml", &[]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).ends_with("2.00000000000,,,empty,-1,analytic\n"));
}

#[test]
fn grid_flag_is_accepted() {
    let o = run_with("solve", "low_linear.toml", &["--grid", "1024"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("analytic"));
}

#[test]
fn config_errors_exit_2() {
    for config in ["unsorted_budgets.toml", "typo.toml", "missing.toml"] {
        let o = run_with("solve", config, &[]);
        assert_eq!(o.status.code(), Some(2), "{config}");
        assert!(!o.stderr.is_empty());
    }
    assert_eq!(
        run_with("sweep", "empty_prices.toml", &[]).status.code(),
        Some(2)
    );
    assert_eq!(
        run_with("solve", "moderate_sweep.toml", &[]).status.code(),
        Some(2)
    );
    assert_eq!(
        run_with("validate", "no_reference.toml", &[]).status.code(),
        Some(2)
    );
    assert_eq!(
        run_with("solve", "low_linear.toml", &["--grid", "4"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(run(&["solve"]).status.code(), Some(2));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn validation_passes_on_fixture_suite() {
    for config in [
        "validate_suite.toml",
        "special_sweep.toml",
        "low_linear.toml",
        "empty_linear.toml",
    ] {
        let o = run_with("validate", config, &[]);
        assert_eq!(o.status.code(), Some(0), "{config}: {}", stdout(&o));
        assert!(stdout(&o).contains("PASS"));
    }
}

#[test]
fn mutated_closed_form_fails_validation() {
    let o = run_with("validate", "mutated_analytic.toml", &[]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("FAIL"));
}

#[test]
fn oracle_validation_passes() {
    let o = run_with("validate", "oracle_personalized.toml", &["--seed", "11"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let q = run_with("validate", "oracle_personalized.toml", &["--quiet"]);
    assert_eq!(q.status.code(), Some(0));
    assert!(q.stdout.is_empty());
}

#[test]
fn unwritable_output_exits_3() {
    let o = run_with(
        "sweep",
        "special_sweep.toml",
        &["--out", "/nonexistent/dir/out.csv"],
    );
    assert_eq!(o.status.code(), Some(3));
    let o = run(&[
        "plot",
        "--input",
        "/nonexistent/in.csv",
        "--out",
        "/tmp/never.svg",
    ]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn sweep_writes_csv_and_svg_from_config_paths() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("sweep.csv");
    let svg = dir.path().join("sweep.svg");
    let text = std::fs::read_to_string(fixture("special_sweep.toml")).unwrap()
        + &format!("\n[outputs]\ncsv_path = {:?}\nsvg_path = {:?}\n", csv, svg);
    let cfg = dir.path().join("cfg.toml");
    std::fs::write(&cfg, text).unwrap();
    let o = run(&["sweep", "--config", cfg.to_str().unwrap()]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    assert_eq!(
        std::fs::read_to_string(&csv).unwrap(),
        golden("special_sweep.csv")
    );
    let drawn = std::fs::read_to_string(&svg).unwrap();
    assert!(drawn.starts_with("<svg"));
    assert_eq!(drawn.matches("<circle").count(), 4);

    let replot = dir.path().join("replot.svg");
    let o = run(&[
        "plot",
        "--config",
        cfg.to_str().unwrap(),
        "--input",
        csv.to_str().unwrap(),
        "--out",
        replot.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(std::fs::read_to_string(&replot).unwrap(), drawn);
}
