//! Cross-module property tests.

use num_complex::Complex64;
use proptest::prelude::*;

use catron_core::instanton;
use catron_core::model::{alpha_of_xy, xy_of_alpha, ModelParams};
use catron_core::wigner;

proptest! {
    #[test]
    fn coordinate_round_trip(x in -50.0f64..50.0, p in -50.0f64..50.0) {
        let (x2, p2) = xy_of_alpha(alpha_of_xy(x, p));
        let tol = 4.0 * f64::EPSILON * x.abs().max(p.abs()).max(1.0);
        prop_assert!((x2 - x).abs() <= tol && (p2 - p).abs() <= tol);
    }

    #[test]
    fn rate_exponent_is_scale_invariant(
        g in 1.0f64..20.0,
        ratio in 0.0f64..0.95,
        eta in 0.1f64..5.0,
        s in 0.1f64..10.0,
    ) {
        let p = ModelParams::new(g * eta, g * eta * ratio, eta).unwrap();
        let q = ModelParams::new(s * p.drive, s * p.detuning, s * p.eta).unwrap();
        let rp = instanton::ln_rate_closed_form(&p).unwrap().ln_rate;
        let rq = instanton::ln_rate_closed_form(&q).unwrap().ln_rate;
        prop_assert!((rp - rq).abs() <= 1e-9 * rp.abs().max(1.0));
        prop_assert!(rp <= 0.0);
    }

    #[test]
    fn fixed_point_and_chi_scale_invariant(
        g in 1.5f64..15.0,
        ratio in 0.05f64..0.9,
        eta in 0.2f64..4.0,
        re in 0.3f64..2.0,
        im in 0.3f64..2.0,
    ) {
        let p = ModelParams::new(g * eta, g * eta * ratio, eta).unwrap();
        let q = ModelParams::new(2.0 * p.drive, 2.0 * p.detuning, 2.0 * p.eta).unwrap();
        let a = instanton::fixed_points(&p).unwrap().alpha0;
        let b = instanton::fixed_points(&q).unwrap().alpha0;
        prop_assert!((a - b).norm() <= 1e-10 * a.norm());
        let alpha = Complex64::new(re, im);
        let cp = instanton::quantum_field_chi(&p, alpha).unwrap();
        let cq = instanton::quantum_field_chi(&q, alpha).unwrap();
        prop_assert!((cp - cq).norm() <= 1e-10 * (1.0 + cp.norm()));
        let php = wigner::effective_potential(&p, alpha).unwrap();
        let phq = wigner::effective_potential(&q, alpha).unwrap();
        prop_assert!((php - phq).abs() <= 1e-10 * (1.0 + php.abs()));
    }

    #[test]
    fn stationary_solution_is_even(
        re in -2.5f64..2.5,
        im in -2.5f64..2.5,
    ) {
        let p = ModelParams::new(10.0, 7.0, 1.0).unwrap();
        let ev = wigner::ExactEvaluator::new(p).unwrap();
        let alpha = Complex64::new(re, im);
        let a = ev.psi1(alpha).unwrap();
        let b = ev.psi1(-alpha).unwrap();
        prop_assert!((a - b).norm() <= 1e-11 * a.norm().max(1e-12));
    }

    #[test]
    fn wkb_exponents_share_the_eikonal_discriminant(
        re in 0.2f64..2.5,
        im in 0.2f64..2.5,
    ) {
        // φ₀₊ + φ₀₋ = −iδ ln(σ² − δ²) + const-free combination:
        // (σ−δ)(σ+δ) = −4gα², an identity of the shared principal branch
        let p = ModelParams::new(10.0, 7.0, 1.0).unwrap();
        let alpha = Complex64::new(re, im);
        let sigma = p.sigma(alpha);
        let lhs = (sigma - p.delta) * (sigma + p.delta);
        let rhs = -4.0 * p.g * alpha * alpha;
        prop_assert!((lhs - rhs).norm() <= 1e-10 * rhs.norm());
    }
}

#[test]
fn liouvillian_rates_scale_with_eta() {
    // Γ_num/η at (G, Δ, η) and (G/2, Δ/2, η/2) agree to 3 digits
    use catron_core::fock;
    let n = 30;
    let rate_over_eta = |p: &ModelParams| -> f64 {
        let sup = fock::build_liouvillian(p, n).unwrap();
        let (blocks, _) = fock::parity_project(&sup);
        let block = &blocks[2]; // even-odd coherence sector
        let eig = fock::block_eigenvalues(block).unwrap();
        fock::decay_rate(&eig, fock::frobenius(&block.matrix)).unwrap() / p.eta
    };
    let a = rate_over_eta(&ModelParams::new(4.0, 2.0, 1.0).unwrap());
    let b = rate_over_eta(&ModelParams::new(2.0, 1.0, 0.5).unwrap());
    assert!((a - b).abs() <= 1e-3 * a.abs(), "{a} vs {b}");
}

#[test]
fn instanton_action_equals_potential_difference_path_independently() {
    // iS from the trajectory equals Φ(α₀) − Φ(0) for several parameter sets
    for (g, d, eta) in [(10.0, 7.0, 1.0), (6.0, 2.0, 1.0), (8.0, 6.0, 2.0), (3.0, 0.5, 0.7)] {
        let p = ModelParams::new(g, d, eta).unwrap();
        let traj = instanton::integrate_instanton(&p, instanton::Attractor::Plus).unwrap();
        let rate = instanton::ln_rate_closed_form(&p).unwrap();
        assert!(
            (traj.action.re - rate.potential_difference).abs()
                <= 1e-3 * rate.potential_difference.abs(),
            "({g},{d},{eta}): {} vs {}",
            traj.action.re,
            rate.potential_difference
        );
    }
}
