//! Complex special functions needed by the stationary-state solution:
//! log-Gamma, Kummer's confluent hypergeometric ₁F₁(a;b;z) for imaginary
//! parameters, its large-|z| asymptotics, and an independent ODE-based
//! evaluator of the regular solution used as a cross-check oracle.
//!
//! ₁F₁ here is needed at a = iδ, b = 2iδ with δ up to ~10 and |z| up to ~80.
//! Two regimes are used, switched at |z| = max(25, 4|b|):
//!
//! * Maclaurin series, summed in complex double-double arithmetic (the
//!   oscillatory terms cancel down from ~e^{|z|} to O(1) magnitudes, which
//!   costs up to ~24 digits at the crossover);
//! * the two-exponential asymptotic expansion (DLMF 13.7.2), assembled in
//!   log-space because the Γ-function weights carry e^{±πδ/2} scale factors.

pub mod dd;

use num_complex::Complex64;
use thiserror::Error;

use crate::model::ModelParams;
use crate::ode::{self, Control, OdeOptions};
use dd::{Cdd, Dd};

#[derive(Debug, Error)]
pub enum SpecFunError {
    #[error("log-Gamma pole at non-positive integer z = {0}")]
    PoleAtNonPositiveInteger(Complex64),
    #[error("series did not converge after {terms} terms (|z| = {z_abs})")]
    NoConvergence { terms: usize, z_abs: f64 },
    #[error("asymptotic expansion needs |z| >= {required}, got {z_abs}")]
    DomainTooSmall { z_abs: f64, required: f64 },
    #[error("ODE oracle step size underflowed")]
    StiffnessFailure,
}

const LANCZOS_G: f64 = 7.0;
#[allow(clippy::excessive_precision)] // coefficients quoted at full published precision
const LANCZOS_COEF: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

fn is_nonpositive_integer(z: Complex64) -> bool {
    z.im.abs() < 1e-14 && z.re <= 0.5 && (z.re - z.re.round()).abs() < 1e-12
}

/// Log-Gamma for complex argument.
///
/// Lanczos approximation for Re z ≥ 0.5, extended to the left half-plane by
/// the recurrence ln Γ(z) = ln Γ(z+1) − Log z. Satisfies the recurrence and
/// reflection identities to ~1e−13 relative.
pub fn ln_gamma(z: Complex64) -> Result<Complex64, SpecFunError> {
    if is_nonpositive_integer(z) {
        return Err(SpecFunError::PoleAtNonPositiveInteger(z));
    }
    let mut shift = Complex64::new(0.0, 0.0);
    let mut w = z;
    while w.re < 0.5 {
        if is_nonpositive_integer(w) {
            return Err(SpecFunError::PoleAtNonPositiveInteger(z));
        }
        shift += w.ln();
        w += 1.0;
    }
    let zm1 = w - 1.0;
    let mut a = Complex64::new(LANCZOS_COEF[0], 0.0);
    for (k, c) in LANCZOS_COEF.iter().enumerate().skip(1) {
        a += c / (zm1 + k as f64);
    }
    let t = zm1 + LANCZOS_G + 0.5;
    let half_ln_2pi = 0.5 * (2.0 * std::f64::consts::PI).ln();
    Ok(half_ln_2pi + (zm1 + 0.5) * t.ln() - t + a.ln() - shift)
}

/// Parameter pair (a; b) of ₁F₁ together with the series accuracy target.
#[derive(Debug, Clone, Copy)]
pub struct KummerParams {
    pub a: Complex64,
    pub b: Complex64,
    pub eps_tol: f64,
}

const SERIES_TERM_CAP: usize = 100_000;

impl KummerParams {
    pub fn new(a: Complex64, b: Complex64) -> Result<Self, SpecFunError> {
        if is_nonpositive_integer(b) {
            return Err(SpecFunError::PoleAtNonPositiveInteger(b));
        }
        Ok(KummerParams { a, b, eps_tol: 1e-16 })
    }

    pub fn with_tolerance(mut self, eps_tol: f64) -> Self {
        self.eps_tol = eps_tol;
        self
    }

    /// Radius |z| at which evaluation switches from the series to the
    /// asymptotic expansion. Both sides stay accurate in an annulus around
    /// it: the double-double series keeps ≥ ~8 digits up to 4|b| for
    /// imaginary parameters, and the asymptotic optimal-truncation floor is
    /// already below 1e−12 there.
    pub fn crossover_radius(&self) -> f64 {
        25f64.max(4.0 * self.b.norm())
    }

    /// Maclaurin series for ₁F₁(a;b;z), accumulated in double-double.
    ///
    /// Terminates once three consecutive terms fall below `eps_tol` times the
    /// partial sum. Accuracy degrades with e^{|z|}-scale cancellation for
    /// Re z < 0; within |z| ≤ crossover it stays below ~1e−9 relative.
    pub fn series(&self, z: Complex64) -> Result<Complex64, SpecFunError> {
        let a = Cdd::from_c64(self.a);
        let b = Cdd::from_c64(self.b);
        let zz = Cdd::from_c64(z);
        let mut term = Cdd::ONE;
        let mut sum = Cdd::ONE;
        let mut small = 0u32;
        for n in 0..SERIES_TERM_CAP {
            let nf = n as f64;
            let num = Cdd { re: a.re + Dd::from_f64(nf), im: a.im } * zz;
            let bn = Cdd { re: b.re + Dd::from_f64(nf), im: b.im };
            let den = Cdd { re: bn.re * Dd::from_f64(nf + 1.0), im: bn.im * Dd::from_f64(nf + 1.0) };
            term = term * num / den;
            sum = sum + term;
            let bound = self.eps_tol * self.eps_tol * sum.norm_sqr_hi();
            if term.norm_sqr_hi() <= bound {
                small += 1;
                if small >= 3 {
                    return Ok(sum.to_c64());
                }
            } else {
                small = 0;
            }
        }
        Err(SpecFunError::NoConvergence { terms: SERIES_TERM_CAP, z_abs: z.norm() })
    }

    /// Log of the two-term asymptotic expansion of ₁F₁ for large |z|
    /// (DLMF 13.7.2), with each exponential's 1/z correction series summed to
    /// its optimal truncation. Branches: principal Log(−z) and Log(z).
    pub fn log_asymptotic(&self, z: Complex64) -> Result<Complex64, SpecFunError> {
        let required = self.crossover_radius();
        if z.norm() < required {
            return Err(SpecFunError::DomainTooSmall { z_abs: z.norm(), required });
        }
        let lgb = ln_gamma(self.b)?;
        // Correction series: S1 multiplies (−z)^{−a}/Γ(b−a), S2 multiplies e^z z^{a−b}/Γ(a).
        let s1 = asymptotic_tail(self.a, self.a - self.b + 1.0, -z);
        let s2 = asymptotic_tail(self.b - self.a, 1.0 - self.a, z);
        let log1 = match ln_gamma(self.b - self.a) {
            Ok(lg) => Some(lgb - lg - self.a * (-z).ln() + s1.ln()),
            Err(SpecFunError::PoleAtNonPositiveInteger(_)) => None,
            Err(e) => return Err(e),
        };
        let log2 = match ln_gamma(self.a) {
            Ok(lg) => Some(lgb - lg + z + (self.a - self.b) * z.ln() + s2.ln()),
            Err(SpecFunError::PoleAtNonPositiveInteger(_)) => None,
            Err(e) => return Err(e),
        };
        match (log1, log2) {
            (Some(l1), Some(l2)) => Ok(log_sum_exp(l1, l2)),
            (Some(l1), None) => Ok(l1),
            (None, Some(l2)) => Ok(l2),
            (None, None) => Err(SpecFunError::PoleAtNonPositiveInteger(self.a)),
        }
    }

    /// Value form of [`Self::log_asymptotic`]. May overflow for |z| ≳ 700.
    pub fn asymptotic(&self, z: Complex64) -> Result<Complex64, SpecFunError> {
        Ok(self.log_asymptotic(z)?.exp())
    }

    /// ₁F₁(a;b;z): series below the crossover radius, asymptotics above.
    ///
    /// For Re z < 0 the series side goes through the Kummer transformation
    /// ₁F₁(a;b;z) = e^z ₁F₁(b−a;b;−z): the reflected argument sits in the
    /// half-plane where the Maclaurin terms do not cancel at e^{|z|} scale.
    pub fn eval(&self, z: Complex64) -> Result<Complex64, SpecFunError> {
        if z.norm() < self.crossover_radius() {
            self.series_reflected(z)
        } else {
            self.asymptotic(z)
        }
    }

    fn series_reflected(&self, z: Complex64) -> Result<Complex64, SpecFunError> {
        if z.re >= 0.0 {
            self.series(z)
        } else {
            let flipped = KummerParams { a: self.b - self.a, b: self.b, eps_tol: self.eps_tol };
            Ok(z.exp() * flipped.series(-z)?)
        }
    }
}

/// Σ_s (p)_s (q)_s / (s! w^s), summed to tolerance or optimal truncation.
fn asymptotic_tail(p: Complex64, q: Complex64, w: Complex64) -> Complex64 {
    let mut term = Complex64::new(1.0, 0.0);
    let mut sum = term;
    let mut prev = f64::INFINITY;
    for s in 0..500 {
        let sf = s as f64;
        term = term * (p + sf) * (q + sf) / ((sf + 1.0) * w);
        let mag = term.norm();
        if mag > prev {
            // divergent tail reached; stop at the optimal truncation
            break;
        }
        sum += term;
        if mag <= 1e-16 * sum.norm() {
            break;
        }
        prev = mag;
    }
    sum
}

fn log_sum_exp(l1: Complex64, l2: Complex64) -> Complex64 {
    let (big, small) = if l1.re >= l2.re { (l1, l2) } else { (l2, l1) };
    big + (1.0 + (small - big).exp()).ln()
}

/// Power-series solution of the factorized stationary equation
/// α Ψ″ + 2iδ Ψ′ − 4g α Ψ = 0 around the regular singular point α = 0,
/// normalized to Ψ(0) = 1 (which forces Ψ′(0) = 0).
///
/// Returns (Ψ, Ψ′) at `alpha`; converges for any α but is used only to
/// bootstrap the ODE oracle away from the origin.
pub(crate) fn psi1_series_at(params: &ModelParams, alpha: Complex64) -> (Complex64, Complex64) {
    if alpha.norm() == 0.0 {
        return (Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0));
    }
    let two_i_delta = Complex64::new(0.0, 2.0 * params.delta);
    let four_g = 4.0 * params.g;
    let a2 = alpha * alpha;
    let mut c_m = Complex64::new(1.0, 0.0); // c_0; odd coefficients vanish
    let mut pow_m = Complex64::new(1.0, 0.0); // alpha^m
    let mut psi = c_m;
    let mut dpsi = Complex64::new(0.0, 0.0);
    let mut m = 0usize;
    loop {
        // c_{m+2} = 4 g c_m / ((m+2)(m+1+2iδ))
        let c_next =
            four_g * c_m / ((m as f64 + 2.0) * (Complex64::new(m as f64 + 1.0, 0.0) + two_i_delta));
        pow_m *= a2; // alpha^{m+2}
        let term = c_next * pow_m;
        psi += term;
        // derivative terms are (m+2) c_{m+2} alpha^{m+1}
        dpsi += (m as f64 + 2.0) * c_next * pow_m / alpha;
        m += 2;
        c_m = c_next;
        if term.norm() <= 1e-18 * psi.norm().max(1e-300) || m > 600 {
            break;
        }
    }
    (psi, dpsi)
}

/// Independent evaluator of the regular solution Ψ₁: integrates the
/// second-order equation as an initial-value problem along the ray from the
/// origin to `alpha`, bootstrapped by the local power series.
///
/// Shares nothing with the closed-form evaluator except the model
/// parameters, so agreement between the two is a genuine cross-check.
pub fn psi1_ode_oracle(params: &ModelParams, alpha: Complex64) -> Result<Complex64, SpecFunError> {
    let r = alpha.norm();
    if r < 0.2 {
        return Ok(psi1_series_at(params, if r == 0.0 { Complex64::new(0.0, 0.0) } else { alpha }).0);
    }
    let tau0 = (0.15 / r).min(0.5);
    let alpha_start = alpha * tau0;
    let (psi0, dpsi0) = psi1_series_at(params, alpha_start);
    let two_i_delta = Complex64::new(0.0, 2.0 * params.delta);
    let four_g = 4.0 * params.g;
    let rhs = |tau: f64, y: &[Complex64; 2]| -> [Complex64; 2] {
        let a = alpha * tau;
        let psi = y[0];
        let dpsi = y[1];
        // Ψ″ = (4 g α Ψ − 2iδ Ψ′)/α along the ray, d/dτ = α_target d/dα
        let ddpsi = (four_g * a * psi - two_i_delta * dpsi) / a;
        [alpha * dpsi, alpha * ddpsi]
    };
    let opts = OdeOptions { rtol: 1e-10, atol: 1e-14, max_steps: 2_000_000, h0: None, h_max: None };
    let (_, y) = ode::integrate_rk45(rhs, tau0, 1.0, [psi0, dpsi0], &opts, |_, _| Control::Continue)
        .map_err(|_| SpecFunError::StiffnessFailure)?;
    Ok(y[0])
}
