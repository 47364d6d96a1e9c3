//! Reproduction criteria, one test each. Every row prints a PASS/FAIL line.

use std::time::{Duration, Instant};

use dipolar_spin_sim::config::RegressParams;
use dipolar_spin_sim::config::DEFAULT_SEED;
use dipolar_spin_sim::regress::regress_all;

fn criterion(number: u32, budget: Duration) {
    let params = RegressParams { only: Some(vec![number]), ..Default::default() };
    let start = Instant::now();
    let report = regress_all(&params, DEFAULT_SEED).expect("criterion runs");
    let elapsed = start.elapsed();
    for row in &report.rows {
        println!("{}", row.line());
    }
    let failed: Vec<&str> = report.rows.iter().filter(|r| !r.pass).map(|r| r.id.as_str()).collect();
    let verdict = if failed.is_empty() && elapsed <= budget { "PASS" } else { "FAIL" };
    println!("{verdict} criterion {number} ({:.2} s, budget {} s)", elapsed.as_secs_f64(), budget.as_secs());
    assert!(failed.is_empty(), "criterion {number} failed rows: {failed:?}");
    assert!(elapsed <= budget, "criterion {number} took {elapsed:?}");
}

const SECOND: Duration = Duration::from_secs(1);

#[test]
fn criterion_01_lattice_constants() {
    criterion(1, SECOND);
}

#[test]
fn criterion_02_equal_coupling_point() {
    criterion(2, SECOND);
}

#[test]
fn criterion_03_sign_change() {
    criterion(3, SECOND);
}

#[test]
fn criterion_04_valid_regions() {
    criterion(4, SECOND);
}

#[test]
fn criterion_05_graph_state_fidelity() {
    criterion(5, 120 * SECOND);
}

#[test]
fn criterion_06_purity_scaling() {
    criterion(6, 120 * SECOND);
}

#[test]
fn criterion_07_phase_diagram_labels() {
    criterion(7, 60 * SECOND);
}

#[test]
fn criterion_08_adiabatic_preparation() {
    criterion(8, 120 * SECOND);
}

#[test]
fn criterion_09_ring_spectrum() {
    criterion(9, SECOND);
}

#[test]
fn criterion_10_ring_profiles() {
    criterion(10, 5 * SECOND);
}

#[test]
fn criterion_11_displacement_bound() {
    criterion(11, 60 * SECOND);
}

#[test]
fn criterion_12_stark_map() {
    criterion(12, 5 * SECOND);
}

#[test]
fn criterion_13_property_suites() {
    criterion(13, 180 * SECOND);
}
