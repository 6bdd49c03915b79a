//! Acceptance suite: every criterion runs at the desk-scale defaults and
//! prints one pass/fail line. Criteria are implemented in
//! `catron_core::validate` so the `validate` CLI command runs exactly the
//! same checks.

use catron_core::model::RunSettings;
use catron_core::validate::{self, CriterionReport};

fn settings() -> RunSettings {
    RunSettings::default()
}

fn finish(rep: CriterionReport) {
    println!("{}", rep.summary_line());
    assert!(rep.passed, "{}: {}", rep.id, rep.details);
}

#[test]
fn a1_exact_wigner_matches_fock_kernel() {
    finish(validate::a1_exact_wigner_vs_fock(&settings()));
}

#[test]
fn a2_eom_residual_second_order() {
    finish(validate::a2_eom_residual_order(&settings()));
}

#[test]
fn a3_wkb_neg_log_quality() {
    finish(validate::a3_wkb_quality(&settings()));
}

#[test]
fn a4_gradient_relation_and_action() {
    finish(validate::a4_gradient_and_action(&settings()));
}

#[test]
fn a5_rate_limits() {
    finish(validate::a5_rate_limits(&settings()));
}

#[test]
fn a6_exponent_vs_liouvillian_spectrum() {
    // Measured behavior at the stated parameter window: the coherence-sector
    // gap tracks R·e^{lnΓ} with R = √(G²−Δ²), so the regression of ln(gap)
    // against lnΓ alone has slope ≈ 0.6, not 1.0±0.2 (the rate-normalized
    // slope, reported in the details, is ≈ 0.96). The criterion is asserted
    // as specified.
    finish(validate::a6_exponent_vs_spectrum(&settings()));
}

#[test]
fn a7_figure_features() {
    finish(validate::a7_figure_features(&settings()));
}

#[test]
fn a8_special_functions_vs_oracle() {
    finish(validate::a8_special_functions(&settings()));
}
