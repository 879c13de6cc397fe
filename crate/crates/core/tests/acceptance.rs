//! Acceptance gate: runs every numbered criterion at its pinned tolerance and
//! prints one pass/fail line per criterion.

use entflow_core::acceptance;

const SEED: u64 = 42;

fn check(id: usize) {
    let outcome = acceptance::run(id, SEED);
    println!("{}", outcome.line());
    assert!(outcome.passed, "{}", outcome.line());
}

#[test]
fn criterion_01_reference_numbers() {
    check(1);
}

#[test]
fn criterion_02_survival_integrator() {
    check(2);
}

#[test]
fn criterion_03_qutrit_counterexample() {
    check(3);
}

#[test]
fn criterion_04_monotone_invariance() {
    check(4);
}

#[test]
fn criterion_05_probability_routes() {
    check(5);
}

#[test]
fn criterion_06_lattice_axioms() {
    check(6);
}

#[test]
fn criterion_07_metric_axioms() {
    check(7);
}

#[test]
fn criterion_08_fourqubit_witness() {
    check(8);
}

#[test]
fn criterion_09_protocol_constructors() {
    check(9);
}

#[test]
fn criterion_10_fingerprint_roundtrip() {
    check(10);
}
