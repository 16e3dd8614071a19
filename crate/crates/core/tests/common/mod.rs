//! Fixture loading and independent oracles shared by the integration tests.
//! Nothing here calls into the library's numeric code.

#![allow(dead_code)]

use std::path::PathBuf;

use ffbp::Dataset64;

/// District names as spelled in the shipped fixture.
pub const NILGIRIS: &str = "The-Nilgiris";
/// Karur appears as "Kanur" in the transcribed table.
pub const KARUR: &str = "Kanur";
pub const THANJAVUR: &str = "Thanjavur";
pub const KANYAKUMARI: &str = "Kanyakumari";

pub fn fixture_path() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/table3_testing.csv")
}

pub fn fixture_text() -> String {
    std::fs::read_to_string(fixture_path()).expect("fixture readable")
}

/// The fixture, parsed and preprocessed.
pub fn fixture() -> Dataset64 {
    ffbp::dataset::parse_csv(&fixture_text(), "table3_testing")
        .expect("fixture parses")
        .preprocess()
}

/// Textbook logistic, evaluated directly.
pub fn oracle_sigmoid(t: f64) -> f64 {
    1.0 / (1.0 + (-t).exp())
}

/// `1 + e^(-t)` rounds to one exactly when `e^(-t) <= 2^-53`, i.e. `t >= 53 ln 2`.
pub fn oracle_saturation_closed_form() -> f64 {
    53.0 * std::f64::consts::LN_2
}

/// First `t` on a 1e-4 grid from 30 at which the oracle sigmoid equals one.
pub fn oracle_saturation_scan() -> f64 {
    (0..200_000)
        .map(|i| 30.0 + i as f64 * 1e-4)
        .find(|t| oracle_sigmoid(*t) == 1.0)
        .expect("saturates before 50")
}

/// Convergence iteration of a single district whose six inputs all map to
/// sigmoid 1, with every weight shared: the smallest `n >= 1` such that
/// `sigmoid(6w(6w + 1)) == 1` where `w = w0 + (n - 1) * inc`.
pub fn oracle_convergence(w0: f64, inc: f64, bias: f64) -> usize {
    (1..100_000)
        .find(|&n| {
            let w = w0 + (n - 1) as f64 * inc;
            oracle_sigmoid(6.0 * w * (6.0 * w + bias)) == 1.0
        })
        .expect("oracle converges")
}

/// Distance in units of `f64::EPSILON`, the spacing of doubles just above 1.0.
/// Errors and sigmoid outputs live on the scale of 1.0, so ulp tolerances are
/// measured there.
pub fn ulps_at_one(a: f64, b: f64) -> f64 {
    (a - b).abs() / f64::EPSILON
}
