use clap::Parser;
use std::path::PathBuf;
use subharmonics_cli::{run, Cli};

fn tmp_dir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!(
        "subh-cli-{tag}-{}-{}",
        std::process::id(),
        std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .unwrap()
            .as_nanos()
    ));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn invoke(args: &[&str]) -> i32 {
    let cli = Cli::parse_from(args);
    run(cli).expect("command ran")
}

#[test]
fn chain_outputs_and_determinism() {
    let d1 = tmp_dir("chain1");
    let d2 = tmp_dir("chain2");
    let code = invoke(&[
        "subharmonics", "chain", "--n-max", "13", "--check",
        "--out", d1.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    let code2 = invoke(&[
        "subharmonics", "chain", "--n-max", "13", "--check",
        "--out", d2.to_str().unwrap(),
    ]);
    assert_eq!(code2, 0);
    let a = std::fs::read(d1.join("chain.json")).unwrap();
    let b = std::fs::read(d2.join("chain.json")).unwrap();
    assert_eq!(a, b, "chain.json must be bit-identical across runs");
    let report = std::fs::read_to_string(d1.join("structure_report.txt")).unwrap();
    assert!(report.contains("RESULT: all-pass"));
    assert!(d1.join("manifest.txt").exists());
}

#[test]
fn roots_csv_columns() {
    let dir = tmp_dir("roots");
    let code = invoke(&[
        "subharmonics", "roots", "--n-max", "6", "--width", "1e-12",
        "--out", dir.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    let csv = std::fs::read_to_string(dir.join("roots.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "n,index,lo,hi,is_exact_two");
    // nu(2..6) = 1 + 1 + 2 + 2 + 3 rows
    assert_eq!(lines.count(), 9);
    assert!(csv.contains("2,0,2,2,true"));
    assert!(dir.join("roots.svg").exists());
}

#[test]
fn fixed_points_csv() {
    let dir = tmp_dir("fp");
    let code = invoke(&[
        "subharmonics", "fixed-points", "--order", "2", "--a-value", "3",
        "--tol", "1e-10", "--out", dir.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    let csv = std::fs::read_to_string(dir.join("fixed_points.csv")).unwrap();
    assert!(csv.starts_with("n,A,x_lo,x_hi,residual_width\n"));
    assert_eq!(csv.lines().count(), 4); // header + three zeros
}

#[test]
fn two_periodic_files() {
    let dir = tmp_dir("twop");
    let code = invoke(&[
        "subharmonics", "two-periodic", "--a-value", "3", "--b-max", "6",
        "--steps", "4", "--tol", "1e-10", "--out", dir.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    let txt = std::fs::read_to_string(dir.join("two_periodic.txt")).unwrap();
    assert!(txt.contains("zeros_at_queried_parameters=2"));
    let csv = std::fs::read_to_string(dir.join("two_periodic_curve.csv")).unwrap();
    assert_eq!(csv.lines().next().unwrap(), "B,z1_lo,z1_hi,z2_lo,z2_hi");
    assert_eq!(csv.lines().count(), 5);
}

#[test]
fn branch_and_exit_codes() {
    let dir = tmp_dir("branch");
    let code = invoke(&[
        "subharmonics", "branch", "--order", "2", "--root-index", "0",
        "--side", "minus", "--a-max", "2.5", "--out", dir.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    let summary = std::fs::read_to_string(dir.join("branch.json")).unwrap();
    assert!(summary.contains("\"reached_a_max\": true"));
}

#[test]
fn atlas_census_file() {
    let dir = tmp_dir("atlas");
    let code = invoke(&[
        "subharmonics", "atlas", "--n-max", "4", "--a-max", "2.5",
        "--workers", "2", "--out", dir.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    let summary = std::fs::read_to_string(dir.join("atlas_summary.txt")).unwrap();
    assert!(summary.contains("invariant violations: 0"));
    assert!(dir.join("atlas.json").exists());
    assert!(dir.join("branch_n4_r0_plus.csv").exists());
}

#[test]
fn config_file_and_env_override() {
    let dir = tmp_dir("cfg");
    let cfg_path = dir.join("run.conf");
    std::fs::write(&cfg_path, "precision_bits=96\nseed=77\n# comment\n").unwrap();
    let cli = Cli::parse_from([
        "subharmonics",
        "chain",
        "--n-max",
        "3",
        "--config",
        cfg_path.to_str().unwrap(),
        "--out",
        dir.to_str().unwrap(),
    ]);
    let resolved = subharmonics_cli::resolve_config(&cli.run).unwrap();
    assert_eq!(resolved.precision_bits, 96);
    assert_eq!(resolved.seed, 77);
    // environment overrides the ceiling
    std::env::set_var(subharmonics_cli::PRECISION_CEILING_ENV, "4096");
    let resolved2 = subharmonics_cli::resolve_config(&cli.run).unwrap();
    std::env::remove_var(subharmonics_cli::PRECISION_CEILING_ENV);
    assert_eq!(resolved2.precision_ceiling, 4096);
}
