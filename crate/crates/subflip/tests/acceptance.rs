//! The gate suite: one test per criterion, each printing a pass/fail line.
//! Run with `cargo test --test acceptance -- --nocapture` to see the lines.

use subflip::verify::{run_criterion, VerifyConfig};

fn check(id: usize) {
    let cfg = VerifyConfig::default();
    let report = run_criterion(id, &cfg);
    let status = if report.passed { "PASS" } else { "FAIL" };
    println!("[{status}] criterion {:02} — {}: {}", report.id, report.name, report.details);
    assert!(report.passed, "criterion {id} ({}) failed: {}", report.name, report.details);
}

#[test]
fn criterion_01_subflip_vs_induce_example() {
    check(1);
}

#[test]
fn criterion_02_identity_lemma_suite() {
    check(2);
}

#[test]
fn criterion_03_co_matching_index_preservation() {
    check(3);
}

#[test]
fn criterion_04_transfer_refinement_guarantee() {
    check(4);
}

#[test]
fn criterion_05_matching_diameter_bound() {
    check(5);
}

#[test]
fn criterion_06_depth_sandwich() {
    check(6);
}

#[test]
fn criterion_07_sparsification_round_trip() {
    check(7);
}

#[test]
fn criterion_08_pure_flip_transduction_recovery() {
    check(8);
}

#[test]
fn criterion_09_normal_form_equivalence() {
    check(9);
}

#[test]
fn criterion_10_positive_mso_collapse() {
    check(10);
}

#[test]
fn criterion_11_nep_witnesses() {
    check(11);
}

#[test]
fn criterion_12_rank_solver_vs_oracle() {
    check(12);
}
