//! Semiclassical fixed points, the Keldysh saddle-point equations of motion,
//! the zero-energy quantum-field manifold, saddle (instanton) trajectories,
//! their action, and the closed-form switching-rate exponent.
//!
//! Two equivalent field bases are implemented and cross-checked:
//!
//! * the four Keldysh fields (α_cl, ᾱ_cl, α_q, ᾱ_q) with the Liouvillian
//!   density 𝓛 as generator, all four treated as independent;
//! * the (α, χ) basis reached by α_cl = √2 α, ᾱ_cl = √2 ᾱ, α_q = −√2 χ̄,
//!   ᾱ_q = √2 χ, where conjugacy is restored and the dynamics is generated
//!   by L = 𝓛/2 via ∂_t α = ∂L/∂χ, ∂_t χ = −∂L/∂α.
//!
//! On the zero-energy manifold χ = ᾱ + f₋(α), with
//! f±(α) = i(δ ± σ(α))/(2α) and σ the shared principal-branch square root,
//! the quantum field obeys χ = ½ ∂Φ/∂α, so the uphill trajectory's action
//! reduces to the potential difference Φ(α₀) − Φ(0):
//!
//!   ln Γ ≈ iS = −2√(g²−δ²) + 2δ arctan(√(g²−δ²)/δ)   (δ ≥ 0, dimensionless),
//!
//! which tends to −2g as δ → 0 and to 0 as −(4√2/3)(g−δ)^{3/2}/√g at the
//! bistability edge δ → g.
//!
//! The uphill trajectory connects a degenerate repelling node at ±α₀ to the
//! saddle at 0: shooting forward out of the node is ill-posed (the saddle
//! connection is a measure-zero target), so the orbit is produced by
//! integrating the time-reversed reduced flow out of the saddle along its
//! stable eigendirection, which converges onto ±α₀ to machine precision.

use num_complex::Complex64;
use thiserror::Error;

use crate::model::ModelParams;
use crate::ode::{self, Control, OdeOptions};
use crate::wigner::WignerError;

#[derive(Debug, Error)]
pub enum InstantonError {
    #[error("operation requires the bistable regime G > |Delta| (got G = {drive}, Delta = {detuning})")]
    NotBistable { drive: f64, detuning: f64 },
    #[error("plus-branch function f_+ is singular at alpha = 0")]
    SingularAtOrigin,
    #[error("point within {dist:.3e} of the discriminant branch cut")]
    BranchCutProximity { dist: f64 },
    #[error("no contracting direction at the saddle: eigenvalues {0:?}")]
    NoEscapeDirection([f64; 2]),
    #[error("effective-Hamiltonian drift {drift:.3e} exceeds {limit:.3e} along the trajectory")]
    DriftExceeded { drift: f64, limit: f64 },
    #[error("trajectory integration failed: {0}")]
    Integration(String),
    #[error("near-critical expansion holds only for 0 < (G-Delta)/G <= 0.05, got {0}")]
    OutsideAsymptoticWindow(f64),
    #[error(transparent)]
    Wigner(#[from] WignerError),
}

/// Which attractor the uphill trajectory leaves from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Attractor {
    Plus,
    Minus,
}

/// Semiclassical fixed points of ∂_t α = iΔα + Gα* − ηα²α*.
#[derive(Debug, Clone, Copy)]
pub struct FixedPoints {
    /// Stable attractor α₀ (the second is −α₀ by symmetry).
    pub alpha0: Complex64,
    /// The unstable point at the origin.
    pub saddle: Complex64,
}

/// α₀ = √(√(G²−Δ²)/η) · √((√(G²−Δ²) + iΔ)/G), saddle at 0.
pub fn fixed_points(params: &ModelParams) -> Result<FixedPoints, InstantonError> {
    require_bistable(params)?;
    let (p, reflected) = reflect_nonnegative_detuning(params);
    let r = (p.g * p.g - p.delta * p.delta).sqrt();
    let mut alpha0 = r.sqrt() * ((Complex64::new(r, p.delta)) / p.g).sqrt();
    if reflected {
        alpha0 = alpha0.conj();
    }
    Ok(FixedPoints { alpha0, saddle: Complex64::new(0.0, 0.0) })
}

/// Classical drift ∂_t α with the quantum field switched off.
pub fn semiclassical_flow(params: &ModelParams, alpha: Complex64) -> Complex64 {
    let ab = alpha.conj();
    Complex64::new(0.0, params.detuning) * alpha + params.drive * ab
        - params.eta * alpha * alpha * ab
}

/// The four Keldysh fields; conjugacy between barred and unbarred components
/// is *not* assumed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KeldyshFields {
    pub alpha_cl: Complex64,
    pub alpha_cl_bar: Complex64,
    pub alpha_q: Complex64,
    pub alpha_q_bar: Complex64,
}

/// State in the (α, χ) basis, all four components independent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChiAlphaState {
    pub alpha: Complex64,
    pub alpha_bar: Complex64,
    pub chi: Complex64,
    pub chi_bar: Complex64,
}

impl ChiAlphaState {
    /// Physical slice: ᾱ = α*, χ̄ = χ*.
    pub fn physical(alpha: Complex64, chi: Complex64) -> Self {
        ChiAlphaState { alpha, alpha_bar: alpha.conj(), chi, chi_bar: chi.conj() }
    }
}

impl KeldyshFields {
    /// Renaming map α_cl = √2α, ᾱ_cl = √2ᾱ, α_q = −√2χ̄, ᾱ_q = √2χ.
    pub fn from_chi_alpha(s: &ChiAlphaState) -> Self {
        let rt2 = std::f64::consts::SQRT_2;
        KeldyshFields {
            alpha_cl: rt2 * s.alpha,
            alpha_cl_bar: rt2 * s.alpha_bar,
            alpha_q: -rt2 * s.chi_bar,
            alpha_q_bar: rt2 * s.chi,
        }
    }

    /// Inverse of [`KeldyshFields::from_chi_alpha`]; exact bijection.
    pub fn to_chi_alpha(&self) -> ChiAlphaState {
        let rt2 = std::f64::consts::SQRT_2;
        ChiAlphaState {
            alpha: self.alpha_cl / rt2,
            alpha_bar: self.alpha_cl_bar / rt2,
            chi: self.alpha_q_bar / rt2,
            chi_bar: -self.alpha_q / rt2,
        }
    }
}

/// Liouvillian density functional 𝓛 on the four Keldysh fields.
pub fn liouvillian_density(params: &ModelParams, f: &KeldyshFields) -> Complex64 {
    let (d, g, eta) = (params.detuning, params.drive, params.eta);
    let i = Complex64::i();
    let (ac, acb, aq, aqb) = (f.alpha_cl, f.alpha_cl_bar, f.alpha_q, f.alpha_q_bar);
    i * d * (ac * aqb + aq * acb) + g * (acb * aqb - aq * ac)
        - 0.5
            * eta
            * (ac * ac * acb * aqb - acb * acb * ac * aq + aq * aq * acb * aqb
                - aqb * aqb * ac * aq
                + 4.0 * acb * ac * aqb * aq)
}

/// Variational equations of motion generated by 𝓛:
/// ∂_t α_cl = ∂𝓛/∂ᾱ_q, ∂_t ᾱ_cl = −∂𝓛/∂α_q,
/// ∂_t α_q = ∂𝓛/∂ᾱ_cl, ∂_t ᾱ_q = −∂𝓛/∂α_cl.
pub fn keldysh_rhs(params: &ModelParams, f: &KeldyshFields) -> KeldyshFields {
    let (d, g, eta) = (params.detuning, params.drive, params.eta);
    let i = Complex64::i();
    let (ac, acb, aq, aqb) = (f.alpha_cl, f.alpha_cl_bar, f.alpha_q, f.alpha_q_bar);
    let h = 0.5 * eta;
    KeldyshFields {
        alpha_cl: i * d * ac + g * acb
            - h * (acb * ac * ac + acb * aq * aq - 2.0 * aqb * aq * ac + 4.0 * acb * ac * aq),
        alpha_cl_bar: -i * d * acb + g * ac
            - h * (ac * acb * acb + ac * aqb * aqb - 2.0 * aq * aqb * acb - 4.0 * ac * acb * aqb),
        alpha_q: i * d * aq + g * aqb
            - h * (aqb * ac * ac + aqb * aq * aq - 2.0 * acb * aq * ac + 4.0 * aqb * ac * aq),
        alpha_q_bar: -i * d * aqb + g * aq
            - h * (aq * acb * acb + aq * aqb * aqb - 2.0 * ac * aqb * acb - 4.0 * aq * acb * aqb),
    }
}

/// Effective Hamiltonian L of the (α, χ) basis; equals 𝓛/2 under the
/// renaming map.
pub fn effective_hamiltonian(params: &ModelParams, s: &ChiAlphaState) -> Complex64 {
    let (d, g, eta) = (params.detuning, params.drive, params.eta);
    let i = Complex64::i();
    let (a, ab, c, cb) = (s.alpha, s.alpha_bar, s.chi, s.chi_bar);
    i * d * (a * c - ab * cb) + g * (ab * c + a * cb)
        - eta * (ab * a * a * c + cb * ab * ab * a + cb * c * c * a + ab * cb * cb * c
            - 4.0 * ab * a * cb * c)
}

/// Equations of motion in the (α, χ) basis:
/// ∂_t α = ∂L/∂χ, ∂_t ᾱ = ∂L/∂χ̄, ∂_t χ = −∂L/∂α, ∂_t χ̄ = −∂L/∂ᾱ.
pub fn chi_alpha_rhs(params: &ModelParams, s: &ChiAlphaState) -> ChiAlphaState {
    let (d, g, eta) = (params.detuning, params.drive, params.eta);
    let i = Complex64::i();
    let (a, ab, c, cb) = (s.alpha, s.alpha_bar, s.chi, s.chi_bar);
    ChiAlphaState {
        alpha: i * d * a + g * ab - eta * (ab * (a * a + cb * cb) + 2.0 * cb * c * a - 4.0 * cb * ab * a),
        alpha_bar: -i * d * ab + g * a
            - eta * (a * (ab * ab + c * c) + 2.0 * c * cb * ab - 4.0 * c * a * ab),
        chi: -i * d * c - g * cb + eta * (cb * (c * c + ab * ab) + 2.0 * ab * a * c - 4.0 * ab * cb * c),
        chi_bar: i * d * cb - g * c
            + eta * (c * (cb * cb + a * a) + 2.0 * a * ab * cb - 4.0 * a * c * cb),
    }
}

/// Zero-energy branch functions f±(α) = i(δ ± σ(α))/(2α), dimensionless.
///
/// The minus branch is regular at the origin (f₋ → igα/δ) and is evaluated
/// there by its Taylor series; the plus branch diverges at α = 0.
pub fn f_branch(
    params: &ModelParams,
    alpha: Complex64,
    branch: ZeroEnergyBranch,
) -> Result<Complex64, InstantonError> {
    let delta = params.delta;
    match branch {
        ZeroEnergyBranch::Plus => {
            if alpha.norm() < 1e-12 {
                return Err(InstantonError::SingularAtOrigin);
            }
            let sigma = params.sigma(alpha);
            Ok(Complex64::i() * (delta + sigma) / (2.0 * alpha))
        }
        ZeroEnergyBranch::Minus => Ok(f_minus(params, alpha)),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ZeroEnergyBranch {
    Plus,
    Minus,
}

fn f_minus(params: &ModelParams, alpha: Complex64) -> Complex64 {
    let delta = params.delta;
    let g = params.g;
    if delta == 0.0 {
        // At zero detuning the zero-energy branches are the constants
        // ±√g. The sheet continued from the upper half-plane, the one with
        // χ(+α₀) = 0, is f = −√g; it is entire, so the Δ = 0 trajectory has
        // no branch cut to fall off.
        return Complex64::new(-g.sqrt(), 0.0);
    }
    let u = 4.0 * g * alpha * alpha / (delta * delta);
    if u.norm() < 1e-4 {
        // f₋ = i(gα/δ)(1 + u/4 + u²/8 + …), regular through the origin
        let series = Complex64::new(1.0, 0.0) + u / 4.0 + u * u / 8.0;
        return Complex64::i() * (g * alpha / delta) * series;
    }
    let sigma = sigma_upper_half(params, alpha);
    Complex64::i() * (delta - sigma) / (2.0 * alpha)
}

/// σ on the sheet reached as the Im α → 0⁺ limit; identical to the principal
/// branch off the real axis.
fn sigma_upper_half(params: &ModelParams, alpha: Complex64) -> Complex64 {
    let a = if alpha.im == 0.0 { Complex64::new(alpha.re, 1e-300) } else { alpha };
    params.sigma(a)
}

/// Quantum field on the analytic zero-energy manifold, χ(α) = α* + f₋(α).
///
/// Vanishes at the saddle and at both attractors. Errors on the σ branch
/// cut (real axis beyond the turning points), where the manifold expression
/// is discontinuous.
pub fn quantum_field_chi(
    params: &ModelParams,
    alpha: Complex64,
) -> Result<Complex64, InstantonError> {
    require_bistable(params)?;
    let tp = params.turning_point();
    if alpha.im.abs() < 1e-12 * (1.0 + alpha.re.abs()) && alpha.re.abs() >= tp && params.delta != 0.0
    {
        return Err(InstantonError::BranchCutProximity { dist: alpha.im.abs() });
    }
    Ok(alpha.conj() + f_minus(params, alpha))
}

/// One recorded sample of the uphill trajectory.
#[derive(Debug, Clone, Copy)]
pub struct InstantonPoint {
    pub t: f64,
    pub alpha: Complex64,
    pub chi: Complex64,
    /// Effective Hamiltonian at the sample; conserved (≈ 0) on the manifold.
    pub l_value: Complex64,
    /// Action integrand −2(χ ∂_t α − ᾱ ∂_t χ̄) at the sample.
    pub integrand: Complex64,
}

#[derive(Debug, Clone)]
pub struct InstantonTrajectory {
    /// Samples ordered in forward time: from ±α₀ to the saddle.
    pub points: Vec<InstantonPoint>,
    /// iS accumulated by the integrator alongside the trajectory.
    pub action: Complex64,
    /// max |L| over the samples.
    pub max_l: f64,
    pub start: Complex64,
    pub end: Complex64,
}

/// Trapezoid quadrature of the action integrand over the stored samples,
/// independent of the integrator's own accumulator. Returns (Re iS, |Im iS|).
///
/// The imaginary residue here reflects the sample-quadrature error (~1e−5 at
/// the default sampling density); the integrator-accumulated
/// [`InstantonTrajectory::action`] carries a residue below 1e−8.
pub fn instanton_action(traj: &InstantonTrajectory) -> (f64, f64) {
    let mut acc = Complex64::new(0.0, 0.0);
    for w in traj.points.windows(2) {
        let dt = w[1].t - w[0].t;
        acc += 0.5 * dt * (w[0].integrand + w[1].integrand);
    }
    (acc.re, acc.im.abs())
}

struct ReducedFlow<'a> {
    params: &'a ModelParams,
}

impl ReducedFlow<'_> {
    /// Forward-time reduced dynamics with χ slaved to α on the manifold.
    fn eval(&self, alpha: Complex64) -> (Complex64, ChiAlphaState, ChiAlphaState) {
        let chi = alpha.conj() + f_minus(self.params, alpha);
        let state = ChiAlphaState::physical(alpha, chi);
        let rhs = chi_alpha_rhs(self.params, &state);
        (rhs.alpha, state, rhs)
    }
}

/// Uphill saddle trajectory from ±α₀ to the origin, integrated on the
/// zero-energy manifold.
///
/// The orbit is computed by running the time-reversed reduced flow from the
/// saddle along its contracting eigendirection (forward shooting out of the
/// degenerate node at ±α₀ cannot hit the saddle), then reporting samples in
/// forward-time order. Also accumulates the action iS and tracks |L|.
pub fn integrate_instanton(
    params: &ModelParams,
    which: Attractor,
) -> Result<InstantonTrajectory, InstantonError> {
    require_bistable(params)?;
    let (p, reflected) = reflect_nonnegative_detuning(params);
    let traj = integrate_instanton_nonneg(&p, which)?;
    if !reflected {
        return Ok(traj);
    }
    // Δ < 0 maps to (−Δ, ᾱ, χ̄): conjugate every complex sample.
    let mut points = traj.points;
    for pt in &mut points {
        pt.alpha = pt.alpha.conj();
        pt.chi = pt.chi.conj();
        pt.l_value = pt.l_value.conj();
        pt.integrand = pt.integrand.conj();
    }
    Ok(InstantonTrajectory {
        start: traj.start.conj(),
        end: traj.end.conj(),
        action: traj.action.conj(),
        max_l: traj.max_l,
        points,
    })
}

fn integrate_instanton_nonneg(
    params: &ModelParams,
    which: Attractor,
) -> Result<InstantonTrajectory, InstantonError> {
    // Every equation is odd under (α, χ) → (−α, −χ), so the orbit out of −α₀
    // is the negated orbit out of +α₀ with identical action and L.
    if which == Attractor::Minus {
        let base = integrate_instanton_nonneg(params, Attractor::Plus)?;
        let mut points = base.points;
        for pt in &mut points {
            pt.alpha = -pt.alpha;
            pt.chi = -pt.chi;
        }
        return Ok(InstantonTrajectory {
            start: -base.start,
            end: -base.end,
            action: base.action,
            max_l: base.max_l,
            points,
        });
    }
    let fp = fixed_points(params)?;
    let target = fp.alpha0;
    let scale = fp.alpha0.norm();
    let flow = ReducedFlow { params };

    // Jacobian of the reduced flow at the saddle by central differences.
    let h = 1e-6 * scale.max(1.0);
    let jac = {
        let mut j = [[0.0f64; 2]; 2];
        for (col, dv) in [Complex64::new(h, 0.0), Complex64::new(0.0, h)].iter().enumerate() {
            let fp_ = flow.eval(*dv).0;
            let fm_ = flow.eval(-*dv).0;
            j[0][col] = (fp_.re - fm_.re) / (2.0 * h);
            j[1][col] = (fp_.im - fm_.im) / (2.0 * h);
        }
        j
    };
    let (eigs, stable_dir) = stable_direction(&jac);
    let dir = match stable_dir {
        Some(v) => v,
        None => return Err(InstantonError::NoEscapeDirection(eigs)),
    };
    // A degenerate (isotropic) saddle Jacobian happens at Δ = 0, where the
    // manifold flow contracts at rate 2G in every direction; the orbit then
    // runs along the attractor's ray.
    let dir = if (eigs[0] - eigs[1]).abs() <= 1e-6 * eigs[0].abs().max(eigs[1].abs()) {
        Complex64::new(target.re, target.im) / target.norm()
    } else {
        let d = Complex64::new(dir[0], dir[1]);
        // orient toward the target attractor
        if d.re * target.re + d.im * target.im < 0.0 {
            -d
        } else {
            d
        }
    };

    let eps_end = 1e-6 * scale;
    let y0 = [eps_end * dir, Complex64::new(0.0, 0.0)];
    let r_rate = (params.g * params.g - params.delta * params.delta).sqrt() * params.eta;
    let tau_max = 80.0 / r_rate.max(1e-12);

    let mut samples: Vec<(f64, Complex64, Complex64, Complex64, Complex64)> = Vec::new();
    let mut max_l = 0.0f64;
    let record = |tau: f64,
                  y: &[Complex64; 2],
                  samples: &mut Vec<(f64, Complex64, Complex64, Complex64, Complex64)>,
                  max_l: &mut f64| {
        let (d_alpha, state, rhs) = flow.eval(y[0]);
        let l = effective_hamiltonian(params, &state);
        let integrand = -2.0 * (state.chi * d_alpha - state.alpha_bar * rhs.chi_bar);
        *max_l = max_l.max(l.norm());
        samples.push((tau, y[0], state.chi, l, integrand));
    };
    record(0.0, &y0, &mut samples, &mut max_l);

    let rhs = |_tau: f64, y: &[Complex64; 2]| -> [Complex64; 2] {
        let (d_alpha, state, full) = flow.eval(y[0]);
        // Backward time: dα/dτ = −∂_t α. The action integral keeps its
        // forward-time integrand: substituting t = T − τ flips both dt and
        // the integration limits, so d(iS)/dτ = −2(χ ∂_t α − ᾱ ∂_t χ̄).
        let integrand = -2.0 * (state.chi * d_alpha - state.alpha_bar * full.chi_bar);
        [-d_alpha, integrand]
    };
    let opts = OdeOptions {
        rtol: 1e-11,
        atol: 1e-13 * scale.max(1.0),
        h0: None,
        // dense sampling keeps the trapezoid requadrature of the action accurate
        h_max: Some(tau_max / 4000.0),
        max_steps: 400_000,
    };
    let (_, yf) = ode::integrate_rk45(rhs, 0.0, tau_max, y0, &opts, |tau, y| {
        record(tau, y, &mut samples, &mut max_l);
        if (y[0] - target).norm() < 1e-12 * scale {
            Control::Stop
        } else {
            Control::Continue
        }
    })
    .map_err(|e| InstantonError::Integration(format!("{e:?}")))?;

    let end_gap = (yf[0] - target).norm();
    if end_gap > 1e-7 * scale {
        return Err(InstantonError::Integration(format!(
            "backward orbit stalled {end_gap:.3e} away from the attractor"
        )));
    }
    // The integral misses the forward segment from the backward start point
    // down to the saddle. Over that stub the action is exactly
    // [Φ]_0^{a_s} − 2[ᾱχ̄]_0^{a_s}; at Δ = 0 the quantum field does not
    // vanish at the saddle, making this first order in the start offset.
    let a_start = y0[0];
    let chi_start = a_start.conj() + f_minus(params, a_start);
    let phi_diff = crate::wigner::effective_potential_uhp(params, a_start)
        - crate::wigner::effective_potential_uhp(params, Complex64::new(0.0, 0.0));
    let stub = Complex64::new(phi_diff, 0.0) - 2.0 * a_start.conj() * chi_start.conj();
    let action = yf[1] + stub;
    let drift_limit = 1e-6
        * (params.drive + params.detuning.abs() + params.eta)
        * (1.0 + scale).powi(4);
    if max_l > drift_limit {
        return Err(InstantonError::DriftExceeded { drift: max_l, limit: drift_limit });
    }

    // Reverse into forward-time order: attractor (t = 0) → saddle (t = τ_end).
    let tau_end = samples.last().map(|s| s.0).unwrap_or(0.0);
    let points: Vec<InstantonPoint> = samples
        .iter()
        .rev()
        .map(|&(tau, alpha, chi, l, integrand)| InstantonPoint {
            t: tau_end - tau,
            alpha,
            chi,
            l_value: l,
            integrand,
        })
        .collect();
    Ok(InstantonTrajectory {
        start: yf[0],
        end: points.last().map(|p| p.alpha).unwrap_or_default(),
        action,
        max_l,
        points,
    })
}

/// Eigenvalues of a real 2×2 matrix and, when they are real, the unit
/// eigenvector of the most negative one.
fn stable_direction(j: &[[f64; 2]; 2]) -> ([f64; 2], Option<[f64; 2]>) {
    let tr = j[0][0] + j[1][1];
    let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
    let disc = tr * tr / 4.0 - det;
    let scale = tr * tr + det.abs();
    // finite-difference noise can push a degenerate (repeated-eigenvalue)
    // Jacobian marginally below zero discriminant
    if disc < -1e-9 * scale {
        return ([f64::NAN, f64::NAN], None);
    }
    let root = disc.max(0.0).sqrt();
    let l1 = tr / 2.0 - root;
    let l2 = tr / 2.0 + root;
    if l1 >= 0.0 {
        return ([l1, l2], None);
    }
    // eigenvector for l1: (J − l1 I) v = 0
    let a = j[0][0] - l1;
    let b = j[0][1];
    let c = j[1][0];
    let d = j[1][1] - l1;
    let v = if b.abs().max(a.abs()) >= c.abs().max(d.abs()) {
        [-b, a]
    } else {
        [-d, c]
    };
    let n = (v[0] * v[0] + v[1] * v[1]).sqrt();
    if n == 0.0 {
        // isotropic: any direction contracts
        return ([l1, l2], Some([1.0, 0.0]));
    }
    ([l1, l2], Some([v[0] / n, v[1] / n]))
}

/// Downhill relaxation path from the saddle to an attractor under the
/// semiclassical flow (χ ≡ 0, so it carries no action).
pub fn downhill_path(
    params: &ModelParams,
    which: Attractor,
) -> Result<Vec<(f64, Complex64)>, InstantonError> {
    require_bistable(params)?;
    let fp = fixed_points(params)?;
    let target = match which {
        Attractor::Plus => fp.alpha0,
        Attractor::Minus => -fp.alpha0,
    };
    let scale = fp.alpha0.norm();
    // unstable direction of the linearized semiclassical flow at 0:
    // d/dt (u, v) = [[G, −Δ], [Δ, −G]] (u, v), eigenvalue +√(G²−Δ²)
    let (g, d) = (params.drive, params.detuning);
    let r = (g * g - d * d).sqrt();
    let v = if d.abs() > 1e-12 { Complex64::new(d, g - r) } else { Complex64::new(1.0, 0.0) };
    let mut v = v / v.norm();
    if v.re * target.re + v.im * target.im < 0.0 {
        v = -v;
    }
    let y0 = [1e-6 * scale * v];
    let mut samples = vec![(0.0, y0[0])];
    let t_max = 80.0 / (r * params.eta.max(1e-12)).max(1e-12);
    let opts = OdeOptions { rtol: 1e-10, atol: 1e-12 * scale, h0: None, h_max: None, max_steps: 200_000 };
    let (_, yf) = ode::integrate_rk45(
        |_t, y: &[Complex64; 1]| [semiclassical_flow(params, y[0])],
        0.0,
        t_max,
        y0,
        &opts,
        |t, y| {
            samples.push((t, y[0]));
            if (y[0] - target).norm() < 1e-9 * scale {
                Control::Stop
            } else {
                Control::Continue
            }
        },
    )
    .map_err(|e| InstantonError::Integration(format!("{e:?}")))?;
    if (yf[0] - target).norm() > 1e-6 * scale {
        return Err(InstantonError::Integration("downhill path missed the attractor".into()));
    }
    Ok(samples)
}

/// Closed-form switching-rate exponent and its potential-difference form.
#[derive(Debug, Clone, Copy)]
pub struct RateResult {
    /// ln Γ ≈ iS (exponent only; no prefactor).
    pub ln_rate: f64,
    /// Φ(α₀) − Φ(0), equal to `ln_rate` by construction.
    pub potential_difference: f64,
    pub params: ModelParams,
}

/// ln Γ = −2√(G²−Δ²)/η + (2|Δ|/η) arctan(√(G²−Δ²)/|Δ|) for G > |Δ|.
pub fn ln_rate_closed_form(params: &ModelParams) -> Result<RateResult, InstantonError> {
    require_bistable(params)?;
    let g = params.g;
    let d = params.delta.abs();
    let r = (g * g - d * d).sqrt();
    let ln_rate = if d == 0.0 { -2.0 * g } else { -2.0 * r + 2.0 * d * (r / d).atan() };
    let (p, _) = reflect_nonnegative_detuning(params);
    let fp = fixed_points(&p)?;
    let phi_a0 = crate::wigner::effective_potential_uhp(&p, fp.alpha0);
    let phi_0 = crate::wigner::effective_potential_uhp(&p, Complex64::new(0.0, 0.0));
    let potential_difference = phi_a0 - phi_0;
    debug_assert!(
        (ln_rate - potential_difference).abs() <= 1e-10 * ln_rate.abs().max(1.0),
        "closed form and potential difference disagree: {ln_rate} vs {potential_difference}"
    );
    Ok(RateResult { ln_rate, potential_difference, params: *params })
}

/// Near-critical expansion ln Γ ≈ −4√2 (G−Δ)^{3/2} / (3η√G), valid for
/// 0 < (G−Δ)/G ≤ 0.05.
pub fn ln_rate_critical(params: &ModelParams) -> Result<f64, InstantonError> {
    let g = params.g;
    let d = params.delta.abs();
    let eps = (g - d) / g;
    if !(eps > 0.0 && eps <= 0.05) {
        return Err(InstantonError::OutsideAsymptoticWindow(eps));
    }
    Ok(-4.0 * std::f64::consts::SQRT_2 * (g - d).powf(1.5) / (3.0 * g.sqrt()))
}

/// One row of a detuning sweep.
#[derive(Debug, Clone, Copy)]
pub struct RateSweepRow {
    pub drive: f64,
    pub detuning: f64,
    pub eta: f64,
    pub ln_rate: f64,
    /// Near-critical expansion where its window applies.
    pub ln_rate_critical: Option<f64>,
}

/// ln Γ(Δ) curves over Δ ∈ [0, G) for each drive amplitude.
pub fn rate_sweep(
    drives: &[f64],
    points_per_curve: usize,
    eta: f64,
) -> Result<Vec<RateSweepRow>, InstantonError> {
    let mut rows = Vec::new();
    for &drive in drives {
        for k in 0..points_per_curve {
            let detuning = drive * k as f64 / points_per_curve as f64;
            let params = ModelParams::new(drive, detuning, eta).map_err(|_| {
                InstantonError::NotBistable { drive, detuning }
            })?;
            let rate = ln_rate_closed_form(&params)?;
            let critical = ln_rate_critical(&params).ok();
            rows.push(RateSweepRow {
                drive,
                detuning,
                eta,
                ln_rate: rate.ln_rate,
                ln_rate_critical: critical,
            });
        }
    }
    Ok(rows)
}

fn require_bistable(params: &ModelParams) -> Result<(), InstantonError> {
    if !params.bistable {
        return Err(InstantonError::NotBistable {
            drive: params.drive,
            detuning: params.detuning,
        });
    }
    Ok(())
}

/// Map Δ < 0 to the reflected system (Δ, α, χ) → (−Δ, ᾱ, χ̄).
fn reflect_nonnegative_detuning(params: &ModelParams) -> (ModelParams, bool) {
    if params.detuning >= 0.0 {
        (*params, false)
    } else {
        (
            ModelParams::new(params.drive, -params.detuning, params.eta)
                .expect("reflection preserves validity"),
            true,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::prelude::*;

    fn reference_params() -> ModelParams {
        ModelParams::new(10.0, 7.0, 1.0).unwrap()
    }

    const LN_RATE_REF: f64 = -3.1472732345076902;

    #[test]
    fn fixed_points_reference_values() {
        let fp = fixed_points(&reference_params()).unwrap();
        assert_abs_diff_eq!(fp.alpha0.re, 2.4740077231632534, epsilon = 1e-12);
        assert_abs_diff_eq!(fp.alpha0.im, 1.0103040207142724, epsilon = 1e-12);
        assert_abs_diff_eq!(fp.alpha0.norm_sqr(), 51.0f64.sqrt(), epsilon = 1e-12);
        assert_eq!(fp.saddle, Complex64::new(0.0, 0.0));
    }

    #[test]
    fn fixed_points_delta_zero_is_real() {
        let p = ModelParams::new(10.0, 0.0, 1.0).unwrap();
        let fp = fixed_points(&p).unwrap();
        assert_abs_diff_eq!(fp.alpha0.re, 10.0f64.sqrt(), epsilon = 1e-12);
        assert_abs_diff_eq!(fp.alpha0.im, 0.0, epsilon = 1e-14);
    }

    #[test]
    fn fixed_points_scale_invariance_and_regime() {
        let a = fixed_points(&ModelParams::new(10.0, 7.0, 1.0).unwrap()).unwrap();
        let b = fixed_points(&ModelParams::new(20.0, 14.0, 2.0).unwrap()).unwrap();
        assert!((a.alpha0 - b.alpha0).norm() < 1e-12);
        assert!(matches!(
            fixed_points(&ModelParams::new(5.0, 5.0, 1.0).unwrap()),
            Err(InstantonError::NotBistable { .. })
        ));
    }

    #[test]
    fn flow_vanishes_at_fixed_points() {
        let p = reference_params();
        let fp = fixed_points(&p).unwrap();
        for a in [fp.alpha0, -fp.alpha0, fp.saddle] {
            assert!(semiclassical_flow(&p, a).norm() < 1e-12);
        }
    }

    #[test]
    fn saddle_linearization_eigenvalues() {
        // brute-force 2×2 Jacobian of the semiclassical flow at the origin
        let p = reference_params();
        let h = 1e-7;
        let mut j = [[0.0f64; 2]; 2];
        for (col, dv) in [Complex64::new(h, 0.0), Complex64::new(0.0, h)].iter().enumerate() {
            let fp_ = semiclassical_flow(&p, *dv);
            let fm_ = semiclassical_flow(&p, -*dv);
            j[0][col] = (fp_.re - fm_.re) / (2.0 * h);
            j[1][col] = (fp_.im - fm_.im) / (2.0 * h);
        }
        let tr = j[0][0] + j[1][1];
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        let r = (p.drive * p.drive - p.detuning * p.detuning).sqrt();
        assert_abs_diff_eq!(tr, 0.0, epsilon = 1e-6);
        assert_abs_diff_eq!(det, -r * r, epsilon = 1e-4);
    }

    #[test]
    fn renaming_map_round_trips() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2);
        for _ in 0..100 {
            let mut c = || Complex64::new(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
            let s = ChiAlphaState { alpha: c(), alpha_bar: c(), chi: c(), chi_bar: c() };
            let back = KeldyshFields::from_chi_alpha(&s).to_chi_alpha();
            assert!((back.alpha - s.alpha).norm() < 1e-15);
            assert!((back.alpha_bar - s.alpha_bar).norm() < 1e-15);
            assert!((back.chi - s.chi).norm() < 1e-15);
            assert!((back.chi_bar - s.chi_bar).norm() < 1e-15);
        }
    }

    #[test]
    fn keldysh_and_chi_alpha_bases_agree() {
        // the two independently coded right-hand sides agree under the
        // renaming bijection, and 𝓛 = 2L
        let p = reference_params();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(13);
        for _ in 0..1000 {
            let mut c = || Complex64::new(rng.random_range(-1.5..1.5), rng.random_range(-1.5..1.5));
            let s = ChiAlphaState { alpha: c(), alpha_bar: c(), chi: c(), chi_bar: c() };
            let f = KeldyshFields::from_chi_alpha(&s);
            let ds = chi_alpha_rhs(&p, &s);
            let df = keldysh_rhs(&p, &f);
            let df_mapped = KeldyshFields::from_chi_alpha(&ds);
            let scale = 1.0
                + df.alpha_cl.norm()
                + df.alpha_cl_bar.norm()
                + df.alpha_q.norm()
                + df.alpha_q_bar.norm();
            assert!((df.alpha_cl - df_mapped.alpha_cl).norm() < 1e-13 * scale);
            assert!((df.alpha_cl_bar - df_mapped.alpha_cl_bar).norm() < 1e-13 * scale);
            assert!((df.alpha_q - df_mapped.alpha_q).norm() < 1e-13 * scale);
            assert!((df.alpha_q_bar - df_mapped.alpha_q_bar).norm() < 1e-13 * scale);
            let ld = liouvillian_density(&p, &f);
            let l = effective_hamiltonian(&p, &s);
            assert!((ld - 2.0 * l).norm() < 1e-12 * (1.0 + ld.norm()));
        }
    }

    #[test]
    fn zero_fields_are_stationary() {
        let p = reference_params();
        let z = Complex64::new(0.0, 0.0);
        let f = KeldyshFields { alpha_cl: z, alpha_cl_bar: z, alpha_q: z, alpha_q_bar: z };
        let d = keldysh_rhs(&p, &f);
        assert_eq!(d.alpha_cl, z);
        assert_eq!(d.alpha_q_bar, z);
    }

    #[test]
    fn hamiltonian_structure_by_finite_differences() {
        // ∂_t α = ∂L/∂χ and ∂_t χ = −∂L/∂α with all fields independent
        let p = reference_params();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(37);
        let h = 1e-6;
        for _ in 0..200 {
            let mut c = || Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            let s = ChiAlphaState { alpha: c(), alpha_bar: c(), chi: c(), chi_bar: c() };
            let d = chi_alpha_rhs(&p, &s);
            // complex derivative of L in chi (L is polynomial, hence analytic
            // in each field separately)
            let mut sp = s;
            sp.chi += h;
            let mut sm = s;
            sm.chi -= h;
            let dl_dchi =
                (effective_hamiltonian(&p, &sp) - effective_hamiltonian(&p, &sm)) / (2.0 * h);
            assert!((d.alpha - dl_dchi).norm() <= 1e-7 * (1.0 + d.alpha.norm()));
            let mut sp = s;
            sp.alpha += h;
            let mut sm = s;
            sm.alpha -= h;
            let dl_da =
                (effective_hamiltonian(&p, &sp) - effective_hamiltonian(&p, &sm)) / (2.0 * h);
            assert!((d.chi + dl_da).norm() <= 1e-7 * (1.0 + d.chi.norm()));
        }
    }

    #[test]
    fn chi_equation_is_time_reversed_alpha_equation() {
        // swapping α ↔ χ (and bars) in the α equation gives −(χ equation)
        let p = reference_params();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(53);
        for _ in 0..200 {
            let mut c = || Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            let s = ChiAlphaState { alpha: c(), alpha_bar: c(), chi: c(), chi_bar: c() };
            let swapped = ChiAlphaState {
                alpha: s.chi,
                alpha_bar: s.chi_bar,
                chi: s.alpha,
                chi_bar: s.alpha_bar,
            };
            let d = chi_alpha_rhs(&p, &s);
            let d_swapped = chi_alpha_rhs(&p, &swapped);
            assert!((d_swapped.alpha + d.chi).norm() <= 1e-12 * (1.0 + d.chi.norm()));
        }
    }

    #[test]
    fn chi_zero_reduces_to_semiclassical_flow() {
        let p = reference_params();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(61);
        for _ in 0..100 {
            let a = Complex64::new(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
            let s = ChiAlphaState::physical(a, Complex64::new(0.0, 0.0));
            let d = chi_alpha_rhs(&p, &s);
            assert!((d.alpha - semiclassical_flow(&p, a)).norm() < 1e-13 * (1.0 + d.alpha.norm()));
        }
    }

    #[test]
    fn l_is_conserved_along_generic_trajectories() {
        // integrate the full four-field system from random initial data and
        // watch |L(t) − L(0)|
        let p = ModelParams::new(2.0, 1.2, 1.0).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(71);
        for _ in 0..10 {
            let mut c = || Complex64::new(rng.random_range(-0.4..0.4), rng.random_range(-0.4..0.4));
            let s0 = ChiAlphaState { alpha: c(), alpha_bar: c(), chi: c(), chi_bar: c() };
            let l0 = effective_hamiltonian(&p, &s0);
            let y0 = [s0.alpha, s0.alpha_bar, s0.chi, s0.chi_bar];
            let opts = OdeOptions { rtol: 1e-10, atol: 1e-12, h0: None, h_max: None, max_steps: 400_000 };
            let mut max_dev = 0.0f64;
            let res = ode::integrate_rk45(
                |_t, y: &[Complex64; 4]| {
                    let s = ChiAlphaState {
                        alpha: y[0],
                        alpha_bar: y[1],
                        chi: y[2],
                        chi_bar: y[3],
                    };
                    let d = chi_alpha_rhs(&p, &s);
                    [d.alpha, d.alpha_bar, d.chi, d.chi_bar]
                },
                0.0,
                2.0,
                y0,
                &opts,
                |_t, y| {
                    let s = ChiAlphaState {
                        alpha: y[0],
                        alpha_bar: y[1],
                        chi: y[2],
                        chi_bar: y[3],
                    };
                    let l = effective_hamiltonian(&p, &s);
                    max_dev = max_dev.max((l - l0).norm());
                    if y.iter().any(|v| v.norm() > 50.0) {
                        Control::Stop
                    } else {
                        Control::Continue
                    }
                },
            );
            assert!(res.is_ok());
            assert!(max_dev <= 1e-6, "L drift {max_dev}");
        }
    }

    #[test]
    fn zero_energy_manifold_kills_l() {
        let p = reference_params();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(83);
        for _ in 0..10_000 {
            let alpha =
                Complex64::new(rng.random_range(-2.5..2.5), rng.random_range(-2.5..2.5));
            let f = f_minus(&p, alpha);
            let fbar = f.conj();
            let s = ChiAlphaState {
                alpha,
                alpha_bar: alpha.conj(),
                chi: alpha.conj() + f,
                chi_bar: alpha + fbar,
            };
            let l = effective_hamiltonian(&p, &s);
            let scale = (p.drive + p.detuning.abs()) * (1.0 + alpha.norm()).powi(4);
            assert!(l.norm() <= 1e-10 * scale, "L = {l} at alpha = {alpha}");
        }
    }

    #[test]
    fn a3_vanishes_with_both_branch_functions() {
        // A₃(α, ᾱ) = f̄ α (G − ηf²) + ᾱ f (G − η f̄²) with f₋, f̄₋ substituted
        let p = reference_params();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(97);
        for _ in 0..500 {
            let alpha = Complex64::new(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
            let f = f_minus(&p, alpha);
            let fb = f.conj();
            let ab = alpha.conj();
            let a3 = fb * alpha * (p.drive - p.eta * f * f) + ab * f * (p.drive - p.eta * fb * fb);
            assert!(a3.norm() <= 1e-10 * (p.drive * (1.0 + alpha.norm()).powi(2)));
        }
    }

    #[test]
    fn f_branches_special_values() {
        let p = reference_params();
        // regular limit at the origin: f₋ → i g α / δ
        let a = Complex64::new(1e-6, 0.0);
        let f = f_branch(&p, a, ZeroEnergyBranch::Minus).unwrap();
        let expect = Complex64::i() * p.g * a / p.delta;
        assert!((f - expect).norm() <= 1e-12);
        assert!(matches!(
            f_branch(&p, Complex64::new(0.0, 0.0), ZeroEnergyBranch::Plus),
            Err(InstantonError::SingularAtOrigin)
        ));
        // Δ = 0, real α: the upper-half-plane sheet gives f₋ = −√(G/η), so
        // χ = α − √(G/η) (the branch through χ(α₀) = 0)
        let p0 = ModelParams::new(10.0, 0.0, 1.0).unwrap();
        let f = f_branch(&p0, Complex64::new(1.3, 0.0), ZeroEnergyBranch::Minus).unwrap();
        assert_abs_diff_eq!(f.re, -10.0f64.sqrt(), epsilon = 1e-12);
        assert_abs_diff_eq!(f.im, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn quantum_field_vanishes_at_fixed_points() {
        let p = reference_params();
        let fp = fixed_points(&p).unwrap();
        for a in [fp.alpha0, -fp.alpha0] {
            assert!(quantum_field_chi(&p, a).unwrap().norm() < 1e-10);
        }
        assert!(quantum_field_chi(&p, Complex64::new(1e-13, 1e-13)).unwrap().norm() < 1e-10);
    }

    #[test]
    fn gradient_relation_against_potential() {
        // χ = ½ ∂Φ/∂α via Wirtinger central differences
        let p = reference_params();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(101);
        let h = 1e-6;
        for _ in 0..1000 {
            let alpha = Complex64::new(rng.random_range(0.2..2.8), rng.random_range(0.2..2.8));
            let chi = quantum_field_chi(&p, alpha).unwrap();
            let f = |a: Complex64| crate::wigner::effective_potential(&p, a).unwrap();
            let dx = (f(alpha + h) - f(alpha - h)) / (2.0 * h);
            let dy = (f(alpha + Complex64::new(0.0, h)) - f(alpha - Complex64::new(0.0, h)))
                / (2.0 * h);
            let grad = 0.5 * Complex64::new(dx, -dy);
            assert!(
                (chi - 0.5 * grad).norm() <= 1e-6,
                "gradient relation at {alpha}: chi = {chi}, grad/2 = {}",
                0.5 * grad
            );
        }
    }

    #[test]
    fn instanton_reference_run() {
        let p = reference_params();
        let traj = integrate_instanton(&p, Attractor::Plus).unwrap();
        let fp = fixed_points(&p).unwrap();
        assert!((traj.start - fp.alpha0).norm() <= 1e-9 * fp.alpha0.norm());
        assert!(traj.end.norm() <= 1e-4 * fp.alpha0.norm());
        assert!(traj.max_l <= 1e-8, "L drift {}", traj.max_l);
        assert!(
            (traj.action.re - LN_RATE_REF).abs() <= 1e-6,
            "action {} vs {}",
            traj.action.re,
            LN_RATE_REF
        );
        assert!(traj.action.im.abs() <= 1e-8);
        // trapezoid requadrature over the samples agrees with the
        // integrator-accumulated action to its own (h²) accuracy
        let (quad, im_resid) = instanton_action(&traj);
        assert!((quad - LN_RATE_REF).abs() <= 1e-3 * LN_RATE_REF.abs());
        assert!(im_resid <= 1e-4, "quadrature imaginary residue {im_resid}");
        // trajectory stays in the first quadrant for these parameters
        for pt in &traj.points {
            assert!(pt.alpha.re >= -1e-9 && pt.alpha.im >= -1e-9);
        }
    }

    #[test]
    fn instanton_delta_zero_runs_on_real_axis() {
        let p = ModelParams::new(10.0, 0.0, 1.0).unwrap();
        let traj = integrate_instanton(&p, Attractor::Plus).unwrap();
        for pt in &traj.points {
            assert!(pt.alpha.im.abs() <= 1e-10, "left the real axis: {}", pt.alpha);
            assert!(pt.chi.im.abs() <= 1e-10);
        }
        assert!(
            (traj.action.re + 20.0).abs() <= 1e-8,
            "action {} vs -2G/eta = -20",
            traj.action.re
        );
    }

    #[test]
    fn instanton_minus_attractor_same_action() {
        let p = reference_params();
        let plus = integrate_instanton(&p, Attractor::Plus).unwrap();
        let minus = integrate_instanton(&p, Attractor::Minus).unwrap();
        let fp = fixed_points(&p).unwrap();
        assert!((minus.start + fp.alpha0).norm() <= 1e-9 * fp.alpha0.norm());
        assert!((plus.action.re - minus.action.re).abs() <= 1e-10);
    }

    #[test]
    fn instanton_negative_detuning_is_reflected() {
        let p = ModelParams::new(10.0, -7.0, 1.0).unwrap();
        let traj = integrate_instanton(&p, Attractor::Plus).unwrap();
        let q = reference_params();
        let base = integrate_instanton(&q, Attractor::Plus).unwrap();
        assert!((traj.start - base.start.conj()).norm() <= 1e-9);
        assert!((traj.action.re - base.action.re).abs() <= 1e-9);
    }

    #[test]
    fn downhill_path_reaches_other_attractor() {
        let p = reference_params();
        let fp = fixed_points(&p).unwrap();
        let path = downhill_path(&p, Attractor::Minus).unwrap();
        let last = path.last().unwrap().1;
        assert!((last + fp.alpha0).norm() <= 1e-6 * fp.alpha0.norm());
    }

    #[test]
    fn closed_form_rate_values() {
        let rr = ln_rate_closed_form(&reference_params()).unwrap();
        assert_abs_diff_eq!(rr.ln_rate, LN_RATE_REF, epsilon = 1e-12);
        assert_abs_diff_eq!(rr.potential_difference, LN_RATE_REF, epsilon = 1e-10);
        assert!(rr.ln_rate <= 0.0);
        // Δ → 0 limit
        let p0 = ModelParams::new(10.0, 0.0, 1.0).unwrap();
        assert_abs_diff_eq!(ln_rate_closed_form(&p0).unwrap().ln_rate, -20.0, epsilon = 1e-14);
        // symmetry in the detuning sign
        let pm = ModelParams::new(10.0, -7.0, 1.0).unwrap();
        assert_abs_diff_eq!(ln_rate_closed_form(&pm).unwrap().ln_rate, LN_RATE_REF, epsilon = 1e-12);
        // scale invariance
        let ps = ModelParams::new(5.0, 3.5, 0.5).unwrap();
        assert_abs_diff_eq!(ln_rate_closed_form(&ps).unwrap().ln_rate, LN_RATE_REF, epsilon = 1e-12);
    }

    #[test]
    fn rate_is_monotone_in_detuning() {
        let mut prev = f64::NEG_INFINITY;
        for k in 0..200 {
            let d = 10.0 * (k as f64) / 200.0;
            let p = ModelParams::new(10.0, d, 1.0).unwrap();
            let r = ln_rate_closed_form(&p).unwrap().ln_rate;
            assert!(r > prev, "not monotone at Delta = {d}");
            prev = r;
        }
    }

    #[test]
    fn critical_expansion_matches_closed_form() {
        let p = ModelParams::new(10.0, 9.99, 1.0).unwrap();
        let crit = ln_rate_critical(&p).unwrap();
        let full = ln_rate_closed_form(&p).unwrap().ln_rate;
        assert!((crit - full).abs() <= 0.02 * full.abs(), "crit {crit} vs full {full}");
        assert!(matches!(
            ln_rate_critical(&ModelParams::new(10.0, 5.0, 1.0).unwrap()),
            Err(InstantonError::OutsideAsymptoticWindow(_))
        ));
        assert!(matches!(
            ln_rate_critical(&ModelParams::new(10.0, 10.0, 1.0).unwrap()),
            Err(InstantonError::OutsideAsymptoticWindow(_))
        ));
    }

    #[test]
    fn sweep_endpoints_and_monotonicity() {
        let rows = rate_sweep(&[5.0, 6.0, 7.0], 64, 1.0).unwrap();
        for &(g, want) in &[(5.0, -10.0), (6.0, -12.0), (7.0, -14.0)] {
            let first = rows
                .iter()
                .find(|r| r.drive == g && r.detuning == 0.0)
                .expect("sweep contains the Delta = 0 endpoint");
            assert_abs_diff_eq!(first.ln_rate, want, epsilon = 1e-12);
        }
        for g in [5.0, 6.0, 7.0] {
            let curve: Vec<_> = rows.iter().filter(|r| r.drive == g).collect();
            for w in curve.windows(2) {
                assert!(w[1].ln_rate > w[0].ln_rate);
            }
        }
    }
}
