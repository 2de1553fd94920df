//! The numbered acceptance gate. Each test runs one criterion of the suite
//! at its stated tolerance and prints a single pass/fail line; run with
//! `--release` to respect the runtime budgets, and with `--nocapture` to see
//! every line.

use subharmonics::suite::{self, SuiteConfig};

fn run(criterion: fn(&SuiteConfig) -> suite::CheckResult) {
    let cfg = SuiteConfig::default();
    let result = criterion(&cfg);
    println!("ACCEPTANCE {}", result.line());
    assert!(result.pass, "{}", result.line());
}

#[test]
fn acceptance_01_table_fixture() {
    run(suite::criterion_1);
}

#[test]
fn acceptance_02_dual_construction() {
    run(suite::criterion_2);
}

#[test]
fn acceptance_03_structural_suite() {
    run(suite::criterion_3);
}

#[test]
fn acceptance_04_roots_and_interlacing() {
    run(suite::criterion_4);
}

#[test]
fn acceptance_05_known_roots() {
    run(suite::criterion_5);
}

#[test]
fn acceptance_06_pathology_magnitude() {
    run(suite::criterion_6);
}

#[test]
fn acceptance_07_linearization_identity() {
    run(suite::criterion_7);
}

#[test]
fn acceptance_08_oracle_equivalence() {
    run(suite::criterion_8);
}

#[test]
fn acceptance_09_exact_multiplicity() {
    run(suite::criterion_9);
}

#[test]
fn acceptance_10_expansion_coefficients() {
    run(suite::criterion_10);
}

#[test]
fn acceptance_11_atlas_census() {
    run(suite::criterion_11);
}

#[test]
fn acceptance_12_min_order() {
    run(suite::criterion_12);
}
