//! One PASS/FAIL line per acceptance criterion.
//!
//! Criteria 8 and 9 are expected to fail: the far field keeps an `F_2` share
//! that the quoted angular law leaves out, and the closed-form time function
//! halves one term of the endpoint sum. The test fails if the set of failing
//! criteria changes in either direction.

use lyman_core::solver::DecaySpectrum;
use lyman_core::units::make_atom_params;
use lyman_core::validation::{far_field_suite, hydrogen_suite, Check};

const KNOWN_RED: &[u32] = &[8, 9];

#[test]
fn acceptance() {
    let atom = make_atom_params(0).unwrap();
    let hydrogen = DecaySpectrum::hydrogen(&atom).unwrap();
    let synthetic = DecaySpectrum::synthetic(0.05, 0.3).unwrap();

    let mut checks: Vec<Check> = hydrogen_suite(&hydrogen);
    // the oracle check appears in both suites; keep one copy
    checks.extend(far_field_suite(&synthetic, 5.0).into_iter().filter(|c| c.id != 5));
    checks.sort_by_key(|c| c.id);

    for c in &checks {
        println!("{}", c.line());
    }
    let failed: Vec<u32> = checks.iter().filter(|c| !c.passed).map(|c| c.id).collect();
    assert_eq!(checks.len(), 11);
    assert_eq!(failed, KNOWN_RED, "failing criteria changed");
}
