//! The acceptance table, one test per criterion. Each check prints a
//! PASS/FAIL line with target, achieved value and tolerance.

use catsim_cli::verify::{criteria, VerifyOptions};

fn criterion(id: &str) {
    let c = criteria().into_iter().find(|c| c.id == id).unwrap_or_else(|| panic!("no criterion `{id}`"));
    let checks = c.run(&VerifyOptions::default()).unwrap_or_else(|e| panic!("FAIL {id}: {e}"));
    let mut report = format!("== {} ({})\n", c.id, c.title);
    for check in &checks {
        report += &format!("{check}\n");
    }
    print!("{report}");
    let failed: Vec<_> = checks.iter().filter(|c| !c.passed()).map(|c| c.id.as_str()).collect();
    assert!(failed.is_empty(), "{id}: failed checks {failed:?}");
}

#[test]
fn c01_overlap() {
    criterion("c01_overlap");
}

#[test]
fn c02_zeno_ideal() {
    criterion("c02_zeno_ideal");
}

#[test]
fn c03_single_step() {
    criterion("c03_single_step");
}

#[test]
fn c04_small_step() {
    criterion("c04_small_step");
}

#[test]
fn c05_best_outcome() {
    criterion("c05_best_outcome");
}

#[test]
fn c06_large_alpha() {
    criterion("c06_large_alpha");
}

#[test]
fn c07_postselection() {
    criterion("c07_postselection");
}

#[test]
fn c08_cat_generation() {
    criterion("c08_cat_generation");
}

#[test]
fn c09_bell_resource() {
    criterion("c09_bell_resource");
}

#[test]
fn c10_loss_model() {
    criterion("c10_loss_model");
}

#[test]
fn c11_loss_as_z() {
    criterion("c11_loss_as_z");
}

#[test]
fn c12_three_qubit() {
    criterion("c12_three_qubit");
}

#[test]
fn c13_properties() {
    criterion("c13_properties");
}

#[test]
fn zz_phase() {
    criterion("zz_phase");
}
