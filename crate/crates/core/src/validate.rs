//! Acceptance criteria and cross-module invariant checks, shared between the
//! integration test suite and the `validate` CLI command.
//!
//! Each check pins its tolerance here, returns a [`CriterionReport`] with the
//! measured numbers, and never panics on failure — the caller decides whether
//! a failed criterion is fatal.

use num_complex::Complex64;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::fock;
use crate::instanton::{self, Attractor};
use crate::model::{alpha_of_xy, ModelParams, PhaseGrid, RunSettings, WignerGrid};
use crate::specfun::{psi1_ode_oracle, KummerParams};
use crate::wigner::{self, ExactEvaluator};

#[derive(Debug, Clone, Serialize)]
pub struct CriterionReport {
    pub id: String,
    pub description: String,
    pub passed: bool,
    pub details: String,
}

impl CriterionReport {
    fn new(id: &str, description: &str, passed: bool, details: String) -> Self {
        CriterionReport {
            id: id.to_string(),
            description: description.to_string(),
            passed,
            details,
        }
    }

    pub fn summary_line(&self) -> String {
        format!(
            "{} {:<30} {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.details
        )
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ValidationReport {
    pub criteria: Vec<CriterionReport>,
    pub all_passed: bool,
}

/// Run the acceptance criteria A1–A8 at the given settings.
pub fn run_acceptance(settings: &RunSettings) -> ValidationReport {
    let criteria = vec![
        a1_exact_wigner_vs_fock(settings),
        a2_eom_residual_order(settings),
        a3_wkb_quality(settings),
        a4_gradient_and_action(settings),
        a5_rate_limits(settings),
        a6_exponent_vs_spectrum(settings),
        a7_figure_features(settings),
        a8_special_functions(settings),
    ];
    let all_passed = criteria.iter().all(|c| c.passed);
    ValidationReport { criteria, all_passed }
}

/// Cheap cross-module invariants, run alongside the acceptance suite by the
/// `validate` command.
pub fn run_invariants(settings: &RunSettings) -> Vec<CriterionReport> {
    vec![
        invariant_coordinate_round_trip(settings),
        invariant_parameter_scaling(settings),
        invariant_parity_block_structure(settings),
        invariant_l_conservation(settings),
        invariant_config_echo(settings),
    ]
}

fn err_report(id: &str, description: &str, e: impl std::fmt::Display) -> CriterionReport {
    CriterionReport::new(id, description, false, format!("errored: {e}"))
}

// ---------------------------------------------------------------------------
// A1: analytic stationary Wigner function vs the Fock-space kernel
// ---------------------------------------------------------------------------

pub fn a1_exact_wigner_vs_fock(settings: &RunSettings) -> CriterionReport {
    let desc = "exact Wigner vs least-squares-matched Fock kernel, max error <= 1e-3 max W";
    match ExactEvaluator::new(settings.params) {
        Ok(ev) => a1_impl(settings, &ev, "A1"),
        Err(e) => err_report("A1", desc, e),
    }
}

/// Fault-injected variant used to prove the criterion actually detects a
/// corrupted special-function evaluator.
#[doc(hidden)]
pub fn a1_with_sign_fault(settings: &RunSettings) -> CriterionReport {
    match ExactEvaluator::with_sign_fault(settings.params) {
        Ok(ev) => a1_impl(settings, &ev, "A1-fault"),
        Err(e) => err_report("A1-fault", "fault-injected A1", e),
    }
}

fn a1_impl(settings: &RunSettings, ev: &ExactEvaluator, id: &str) -> CriterionReport {
    let desc = "exact Wigner vs least-squares-matched Fock kernel, max error <= 1e-3 max W";
    let run = || -> Result<(f64, f64, f64), String> {
        let grid = settings.grid;
        let sw = wigner_exact(ev, &grid)?;
        let sup = fock::build_liouvillian(&settings.params, settings.fock_cutoff)
            .map_err(|e| e.to_string())?;
        let states = fock::steady_states(&sup).map_err(|e| e.to_string())?;
        let mut fock_grids = Vec::new();
        for st in &states {
            let w = fock::wigner_from_density(&st.rho, &grid).map_err(|e| e.to_string())?;
            fock_grids.push(w);
        }
        // least-squares match within the kernel span: W_exact ≈ Σ c_i W_i
        let (c, fit) = least_squares_mix(&sw.wigner, &fock_grids);
        let max_w = sw.wigner.max_value();
        let mut max_err = 0.0f64;
        for (k, v) in sw.wigner.values.iter().enumerate() {
            max_err = max_err.max((v - fit[k]).abs());
        }
        Ok((max_err / max_w, c[0], c[1]))
    };
    match run() {
        Ok((ratio, ce, co)) => CriterionReport::new(
            id,
            desc,
            ratio <= 1e-3,
            format!("max|dW|/maxW = {ratio:.3e} (mix even {ce:.4}, odd {co:.4})"),
        ),
        Err(e) => err_report(id, desc, e),
    }
}

fn wigner_exact(ev: &ExactEvaluator, grid: &PhaseGrid) -> Result<wigner::StationaryWigner, String> {
    wigner::wigner_exact(ev, grid).map_err(|e| e.to_string())
}

fn least_squares_mix(target: &WignerGrid, basis: &[WignerGrid]) -> (Vec<f64>, Vec<f64>) {
    let n = basis.len();
    let mut gram = vec![vec![0.0f64; n]; n];
    let mut rhs = vec![0.0f64; n];
    for i in 0..n {
        for j in 0..n {
            gram[i][j] = basis[i]
                .values
                .iter()
                .zip(basis[j].values.iter())
                .map(|(a, b)| a * b)
                .sum();
        }
        rhs[i] = basis[i]
            .values
            .iter()
            .zip(target.values.iter())
            .map(|(a, b)| a * b)
            .sum();
    }
    // tiny symmetric system; Gaussian elimination is plenty
    let c = solve_small(&mut gram, &mut rhs);
    let mut fit = vec![0.0f64; target.values.len()];
    for (i, ci) in c.iter().enumerate() {
        for (k, v) in basis[i].values.iter().enumerate() {
            fit[k] += ci * v;
        }
    }
    (c, fit)
}

fn solve_small(a: &mut [Vec<f64>], b: &mut [f64]) -> Vec<f64> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| a[i][col].abs().partial_cmp(&a[j][col].abs()).unwrap())
            .unwrap();
        a.swap(col, piv);
        b.swap(col, piv);
        let d = a[col][col];
        let pivot_row = a[col].clone();
        for row in 0..n {
            if row != col {
                let f = a[row][col] / d;
                for (x, y) in a[row].iter_mut().zip(pivot_row.iter()).skip(col) {
                    *x -= f * y;
                }
                b[row] -= f * b[col];
            }
        }
    }
    (0..n).map(|i| b[i] / a[i][i]).collect()
}

// ---------------------------------------------------------------------------
// A2: Wigner equation-of-motion residual converges at second order
// ---------------------------------------------------------------------------

pub fn a2_eom_residual_order(settings: &RunSettings) -> CriterionReport {
    match ExactEvaluator::new(settings.params) {
        Ok(ev) => a2_impl(settings, &ev, "A2"),
        Err(e) => err_report("A2", "EOM residual order", e),
    }
}

#[doc(hidden)]
pub fn a2_with_sign_fault(settings: &RunSettings) -> CriterionReport {
    match ExactEvaluator::with_sign_fault(settings.params) {
        Ok(ev) => a2_impl(settings, &ev, "A2-fault"),
        Err(e) => err_report("A2-fault", "fault-injected A2", e),
    }
}

fn a2_impl(settings: &RunSettings, ev: &ExactEvaluator, id: &str) -> CriterionReport {
    let desc = "discrete EOM residual on analytic W0 converges at order 2 (h = 0.1, 0.05, 0.025)";
    let run = || -> Result<(f64, f64, Vec<f64>), String> {
        let mut norms = Vec::new();
        for n in [41usize, 81, 161] {
            let grid = PhaseGrid::new(-2.0, 2.0, -2.0, 2.0, n, n).map_err(|e| e.to_string())?;
            let raw = try_grid(&grid, |x, p| {
                ev.log_wigner_raw(alpha_of_xy(x, p)).map(f64::exp).map_err(|e| e.to_string())
            })?;
            let res = fock::wigner_eom_residual(&raw, &settings.params).map_err(|e| e.to_string())?;
            // window interior to every margin so the three norms are comparable
            norms.push(res.max_norm_in(-1.5, 1.5, -1.5, 1.5));
        }
        let o1 = (norms[0] / norms[1]).log2();
        let o2 = (norms[1] / norms[2]).log2();
        Ok((o1, o2, norms))
    };
    match run() {
        Ok((o1, o2, norms)) => {
            let norm_text: Vec<String> = norms.iter().map(|v| format!("{v:.3e}")).collect();
            CriterionReport::new(
                id,
                desc,
                (1.7..=2.3).contains(&o1) && (1.7..=2.3).contains(&o2),
                format!("orders ({o1:.2}, {o2:.2}); residual norms [{}]", norm_text.join(", ")),
            )
        }
        Err(e) => err_report(id, desc, e),
    }
}

fn try_grid(
    grid: &PhaseGrid,
    mut f: impl FnMut(f64, f64) -> Result<f64, String>,
) -> Result<WignerGrid, String> {
    let mut values = Vec::with_capacity(grid.len());
    for i in 0..grid.nx {
        for j in 0..grid.np {
            values.push(f(grid.x_at(i), grid.p_at(j))?);
        }
    }
    Ok(WignerGrid { grid: *grid, values, quad_weight: grid.h_x() * grid.h_p() / 2.0 })
}

// ---------------------------------------------------------------------------
// A3: WKB -ln W matches the exact -ln W in the quadrant-I window
// ---------------------------------------------------------------------------

pub fn a3_wkb_quality(settings: &RunSettings) -> CriterionReport {
    let desc = "-ln W (WKB superposition) within 5% of exact over quadrant-I window (-ln W in [2,30])";
    let run = || -> Result<(f64, f64, usize), String> {
        let ev = ExactEvaluator::new(settings.params).map_err(|e| e.to_string())?;
        let grid = settings.grid;
        let sw = wigner_exact(&ev, &grid)?;
        let wkb = wigner::wigner_wkb(&settings.params, &grid, sw.log_norm)
            .map_err(|e| e.to_string())?;
        let pot = wigner::wigner_potential(&settings.params, &grid, sw.log_norm)
            .map_err(|e| e.to_string())?;
        let mut max_rel = 0.0f64;
        let mut max_rel_pot = 0.0f64;
        let mut count = 0usize;
        for i in 0..grid.nx {
            for j in 0..grid.np {
                let (x, p) = (grid.x_at(i), grid.p_at(j));
                if x <= 0.0 || p <= 0.0 {
                    continue;
                }
                let w_ex = sw.wigner.value(i, j);
                let nl_ex = -w_ex.ln();
                if !(2.0..=30.0).contains(&nl_ex) {
                    continue;
                }
                let w_wkb = wkb.value(i, j);
                if !w_wkb.is_finite() {
                    continue; // turning-point mask
                }
                let nl_wkb = -w_wkb.ln();
                max_rel = max_rel.max((nl_wkb - nl_ex).abs() / nl_ex);
                let nl_pot = -pot.value(i, j).ln();
                max_rel_pot = max_rel_pot.max((nl_pot - nl_ex).abs() / nl_ex);
                count += 1;
            }
        }
        if count < 100 {
            return Err(format!("window too small: {count} points"));
        }
        Ok((max_rel, max_rel_pot, count))
    };
    match run() {
        Ok((max_rel, max_rel_pot, count)) => CriterionReport::new(
            "A3",
            desc,
            max_rel <= 0.05,
            format!(
                "WKB max rel = {max_rel:.4} over {count} pts (minus-branch potential route: {max_rel_pot:.3})"
            ),
        ),
        Err(e) => err_report("A3", desc, e),
    }
}

// ---------------------------------------------------------------------------
// A4: gradient relation and instanton action vs closed form
// ---------------------------------------------------------------------------

pub fn a4_gradient_and_action(settings: &RunSettings) -> CriterionReport {
    let desc = "chi = dPhi/dalpha / 2 to 1e-6; instanton action = closed form to 1e-3 at 10 random parameter sets";
    let run = || -> Result<(f64, f64), String> {
        let p = settings.params;
        let mut rng = ChaCha8Rng::seed_from_u64(settings.seed ^ 0xA4);
        // gradient relation on 10^3 random quadrant-I points
        let h = 1e-6;
        let mut max_grad = 0.0f64;
        for _ in 0..1000 {
            let alpha = Complex64::new(rng.random_range(0.2..2.8), rng.random_range(0.2..2.8));
            let chi = instanton::quantum_field_chi(&p, alpha).map_err(|e| e.to_string())?;
            let f = |a: Complex64| wigner::effective_potential(&p, a).map_err(|e| e.to_string());
            let dx = (f(alpha + h)? - f(alpha - h)?) / (2.0 * h);
            let dy = (f(alpha + Complex64::new(0.0, h))? - f(alpha - Complex64::new(0.0, h))?)
                / (2.0 * h);
            let grad = 0.5 * Complex64::new(dx, -dy); // Wirtinger d/dalpha
            max_grad = max_grad.max((chi - 0.5 * grad).norm());
        }
        // action vs closed form at random bistable parameter sets
        let mut max_act = 0.0f64;
        for _ in 0..10 {
            let g = rng.random_range(2.0..12.0);
            let ratio = rng.random_range(0.1..0.85);
            let eta = rng.random_range(0.5..2.0);
            let params = ModelParams::new(g * eta, g * eta * ratio, eta).map_err(|e| e.to_string())?;
            let traj =
                instanton::integrate_instanton(&params, Attractor::Plus).map_err(|e| e.to_string())?;
            let closed = instanton::ln_rate_closed_form(&params).map_err(|e| e.to_string())?;
            let rel = (traj.action.re - closed.ln_rate).abs() / closed.ln_rate.abs();
            max_act = max_act.max(rel);
        }
        Ok((max_grad, max_act))
    };
    match run() {
        Ok((max_grad, max_act)) => CriterionReport::new(
            "A4",
            desc,
            max_grad <= 1e-6 && max_act <= 1e-3,
            format!("gradient max |chi - dPhi/2| = {max_grad:.2e}; action max rel = {max_act:.2e}"),
        ),
        Err(e) => err_report("A4", desc, e),
    }
}

// ---------------------------------------------------------------------------
// A5: rate limits (Delta -> 0 and the near-critical 3/2 power law)
// ---------------------------------------------------------------------------

pub fn a5_rate_limits(settings: &RunSettings) -> CriterionReport {
    let desc = "lnGamma(0) = -2G/eta exactly; linear piece pi*Delta/eta at Delta = 1e-6 G to 1e-8; critical slope 1.5 +- 0.015";
    let run = || -> Result<(f64, f64, f64), String> {
        let (g, eta) = (settings.params.drive, settings.params.eta);
        let p0 = ModelParams::new(g, 0.0, eta).map_err(|e| e.to_string())?;
        let at0 = instanton::ln_rate_closed_form(&p0).map_err(|e| e.to_string())?.ln_rate;
        let exact_limit_err = (at0 + 2.0 * g / eta).abs();
        // At Delta = 1e-6 G the exponent sits pi*Delta/eta above the limit;
        // the remainder is O(Delta^2/(G eta)) ~ 1e-9 here.
        let d = 1e-6 * g;
        let p1 = ModelParams::new(g, d, eta).map_err(|e| e.to_string())?;
        let at1 = instanton::ln_rate_closed_form(&p1).map_err(|e| e.to_string())?.ln_rate;
        let continuity_err = (at1 - (-2.0 * g / eta + std::f64::consts::PI * d / eta)).abs();
        // log-log slope of -lnGamma vs (G - Delta) over (G-Delta)/G in [1e-4, 1e-2]
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for k in 0..50 {
            let eps = 10f64.powf(-4.0 + 2.0 * k as f64 / 49.0);
            let params = ModelParams::new(g, g * (1.0 - eps), eta).map_err(|e| e.to_string())?;
            let r = instanton::ln_rate_closed_form(&params).map_err(|e| e.to_string())?.ln_rate;
            xs.push((g * eps).ln());
            ys.push((-r).ln());
        }
        let (slope, _intercept, _r2) = linear_fit(&xs, &ys);
        Ok((exact_limit_err, continuity_err, slope))
    };
    match run() {
        Ok((e0, e1, slope)) => CriterionReport::new(
            "A5",
            desc,
            e0 <= 1e-14 && e1 <= 1e-8 && (slope - 1.5).abs() <= 0.015,
            format!("limit err {e0:.1e}; continuity err {e1:.2e}; critical slope {slope:.4}"),
        ),
        Err(e) => err_report("A5", desc, e),
    }
}

fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r2 = if syy == 0.0 { 1.0 } else { (sxy * sxy) / (sxx * syy) };
    (slope, intercept, r2)
}

// ---------------------------------------------------------------------------
// A6: rate exponent vs the Liouvillian spectrum
// ---------------------------------------------------------------------------

pub fn a6_exponent_vs_spectrum(_settings: &RunSettings) -> CriterionReport {
    let desc =
        "regress ln(gap) of best parity block vs lnGamma over G in {3..5}, Delta = G/2: slope 1.0 +- 0.2, r2 >= 0.98";
    let run = || -> Result<String, String> {
        let eta = 1.0;
        let drives = [3.0, 3.5, 4.0, 4.5, 5.0];
        let mut ln_gamma = Vec::new();
        let mut gaps: [Vec<f64>; 4] = Default::default();
        let mut cutoffs = Vec::new();
        for &g in &drives {
            let params = ModelParams::new(g, g / 2.0, eta).map_err(|e| e.to_string())?;
            ln_gamma.push(instanton::ln_rate_closed_form(&params).map_err(|e| e.to_string())?.ln_rate);
            let (sector_gaps, n_used) = converged_block_gaps(&params)?;
            cutoffs.push(n_used);
            for (k, v) in sector_gaps.iter().enumerate() {
                gaps[k].push(*v);
            }
        }
        // regress each sector, keep the best-matching one
        let mut best: Option<(usize, f64, f64)> = None;
        let mut lines = Vec::new();
        for (k, sector_gaps) in gaps.iter().enumerate() {
            let ys: Vec<f64> = sector_gaps.iter().map(|v| v.ln()).collect();
            let (slope, _b, r2) = linear_fit(&ln_gamma, &ys);
            lines.push(format!(
                "{}: slope {slope:.3} r2 {r2:.4}",
                fock::ParitySector::ALL[k].label()
            ));
            let better = match best {
                None => true,
                Some((_, s, _)) => (slope - 1.0).abs() < (s - 1.0).abs(),
            };
            if better {
                best = Some((k, slope, r2));
            }
        }
        let (k, slope, r2) = best.unwrap();
        // attempt-rate-normalized slope, reported as a diagnostic: dividing
        // the measured gap by sqrt(G^2 - Delta^2) removes the prefactor's
        // leading parameter dependence
        let ys_norm: Vec<f64> = gaps[k]
            .iter()
            .zip(&drives)
            .map(|(v, g)| (v / (g * g - g * g / 4.0).sqrt()).ln())
            .collect();
        let (slope_norm, _b, _r) = linear_fit(&ln_gamma, &ys_norm);
        let passed = (slope - 1.0).abs() <= 0.2 && r2 >= 0.98;
        let details = format!(
            "best {} slope {slope:.3} r2 {r2:.4} (rate-normalized slope {slope_norm:.3}; cutoffs {cutoffs:?}; all: {})",
            fock::ParitySector::ALL[k].label(),
            lines.join(", ")
        );
        if passed {
            Ok(details)
        } else {
            Err(details)
        }
    };
    match run() {
        Ok(details) => CriterionReport::new("A6", desc, true, details),
        Err(details) => CriterionReport::new("A6", desc, false, details),
    }
}

/// Slowest nonzero |Re λ| of each parity sector, with the cutoff raised by 10
/// until every sector's rate is stable to 1e-3 relative.
fn converged_block_gaps(params: &ModelParams) -> Result<([f64; 4], usize), String> {
    let mut prev: Option<[f64; 4]> = None;
    let mut n = 30;
    loop {
        let sup = fock::build_liouvillian(params, n).map_err(|e| e.to_string())?;
        let (blocks, _) = fock::parity_project(&sup);
        let mut gaps = [0.0f64; 4];
        for (k, block) in blocks.iter().enumerate() {
            let eig = fock::block_eigenvalues(block).map_err(|e| e.to_string())?;
            gaps[k] = fock::decay_rate(&eig, fock::frobenius(&block.matrix))
                .map_err(|e| e.to_string())?;
        }
        if let Some(p) = prev {
            let worst = gaps
                .iter()
                .zip(p.iter())
                .map(|(a, b)| (a - b).abs() / a.abs().max(1e-300))
                .fold(0.0f64, f64::max);
            if worst < 1e-3 {
                return Ok((gaps, n));
            }
        }
        prev = Some(gaps);
        n += 10;
        if n > 60 {
            return Ok((prev.unwrap(), n - 10));
        }
    }
}

// ---------------------------------------------------------------------------
// A7: qualitative figure features
// ---------------------------------------------------------------------------

pub fn a7_figure_features(settings: &RunSettings) -> CriterionReport {
    let desc = "two -lnW minima at +-alpha0; ridge in quadrants II/IV; saddle at origin; three monotone rate curves ending at {-10,-12,-14}";
    let run = || -> Result<String, String> {
        let p = settings.params;
        let ev = ExactEvaluator::new(p).map_err(|e| e.to_string())?;
        let grid = settings.grid;
        let sw = wigner_exact(&ev, &grid)?;
        // feature 1: the two largest local maxima of W sit within a cell of ±α₀
        let fp = instanton::fixed_points(&p).map_err(|e| e.to_string())?;
        let (x0, p0) = crate::model::xy_of_alpha(fp.alpha0);
        let maxima = local_maxima(&sw.wigner);
        if maxima.len() < 2 {
            return Err(format!("found {} local maxima", maxima.len()));
        }
        // Φ is minimal exactly at ±α₀; the prefactor shifts the W maximum
        // itself by ~0.1 at the reference parameters, so the feature check
        // allows max(1.5 cells, 0.15).
        let cell = grid.h_x().hypot(grid.h_p());
        let tol = (1.5 * cell).max(0.15);
        let near = |target: (f64, f64)| {
            maxima[..2]
                .iter()
                .any(|&(x, pp, _)| (x - target.0).hypot(pp - target.1) <= tol)
        };
        if !(near((x0, p0)) && near((-x0, -p0))) {
            return Err(format!(
                "lobes {:?} not at +-({x0:.3},{p0:.3})",
                &maxima[..2.min(maxima.len())]
            ));
        }
        // feature 2: the WKB switching ridge lies in quadrants II/IV
        let locus = wigner::switching_locus(&p, &grid).map_err(|e| e.to_string())?;
        let ridge: Vec<_> =
            locus.iter().filter(|(x, pp)| x.abs() > 0.3 && pp.abs() > 0.3).collect();
        if ridge.is_empty() {
            return Err("no off-axis switching ridge found".into());
        }
        if !ridge.iter().all(|(x, pp)| x.signum() * pp.signum() < 0.0) {
            return Err("ridge leaks outside quadrants II/IV".into());
        }
        // feature 3: saddle character at the origin (eigenvalues ±√(G²−Δ²))
        let r = (p.drive * p.drive - p.detuning * p.detuning).sqrt();
        let h = 1e-6;
        let fxx = instanton::semiclassical_flow(&p, Complex64::new(h, 0.0));
        let fpp = instanton::semiclassical_flow(&p, Complex64::new(0.0, h));
        let j = [[fxx.re / h, fpp.re / h], [fxx.im / h, fpp.im / h]];
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        if !(det < 0.0 && (det + r * r).abs() <= 1e-4 * r * r) {
            return Err(format!("origin is not a saddle: det {det}, expected {}", -r * r));
        }
        // feature 4: rate curves
        let rows = instanton::rate_sweep(&[5.0, 6.0, 7.0], 200, 1.0).map_err(|e| e.to_string())?;
        for &(g, want) in &[(5.0f64, -10.0f64), (6.0, -12.0), (7.0, -14.0)] {
            let curve: Vec<f64> = rows
                .iter()
                .filter(|row| row.drive == g)
                .map(|row| row.ln_rate)
                .collect();
            if (curve[0] - want).abs() > 1e-12 {
                return Err(format!("G={g}: lnGamma(0) = {} != {want}", curve[0]));
            }
            if !curve.windows(2).all(|w| w[1] > w[0]) {
                return Err(format!("G={g}: curve not monotone"));
            }
            if *curve.last().unwrap() < -0.5 {
                return Err(format!("G={g}: curve does not approach 0 near Delta=G"));
            }
        }
        Ok(format!(
            "lobes at +-({x0:.2},{p0:.2}); ridge {} pts in II/IV; saddle det {det:.2}; 3 monotone curves",
            ridge.len()
        ))
    };
    match run() {
        Ok(details) => CriterionReport::new("A7", desc, true, details),
        Err(details) => CriterionReport::new("A7", desc, false, details),
    }
}

fn local_maxima(w: &WignerGrid) -> Vec<(f64, f64, f64)> {
    let g = &w.grid;
    let mut out = Vec::new();
    for i in 1..g.nx - 1 {
        for j in 1..g.np - 1 {
            let v = w.value(i, j);
            if !v.is_finite() {
                continue;
            }
            let mut is_max = true;
            for (di, dj) in [(0usize, 1usize), (1, 0), (1, 1)] {
                let lo = w.value(i - di, j - dj);
                let hi = w.value(i + di, j + dj);
                if !(v >= lo && v >= hi) {
                    is_max = false;
                    break;
                }
            }
            if is_max
                && v > w.value(i - 1, j + 1)
                && v > w.value(i + 1, j - 1)
                && v > 0.05 * w.max_value()
            {
                out.push((g.x_at(i), g.p_at(j), v));
            }
        }
    }
    out.sort_by(|a, b| b.2.partial_cmp(&a.2).unwrap());
    out
}

// ---------------------------------------------------------------------------
// A8: special functions vs the independent ODE oracle
// ---------------------------------------------------------------------------

pub fn a8_special_functions(settings: &RunSettings) -> CriterionReport {
    let desc = "psi1 evaluator vs ODE oracle <= 1e-7 rel; Kummer transformation <= 1e-9";
    let run = || -> Result<(f64, f64), String> {
        let p = settings.params;
        let ev = ExactEvaluator::new(p).map_err(|e| e.to_string())?;
        let mut max_rel = 0.0f64;
        for k in 0..5 {
            let theta = std::f64::consts::PI * (0.02 + 0.46 * k as f64 / 4.0);
            for r in [0.5, 1.0, 1.8, 2.6, 3.4, 4.2] {
                let alpha = Complex64::from_polar(r, theta);
                let closed = ev.psi1(alpha).map_err(|e| e.to_string())?;
                let oracle = psi1_ode_oracle(&p, alpha).map_err(|e| e.to_string())?;
                max_rel = max_rel.max((closed - oracle).norm() / oracle.norm());
            }
        }
        // Kummer transformation identity on random parameters
        let mut rng = ChaCha8Rng::seed_from_u64(settings.seed ^ 0xA8);
        let mut max_kummer = 0.0f64;
        let mut tested = 0;
        while tested < 1000 {
            let a = Complex64::new(rng.random_range(-4.0..4.0), rng.random_range(-8.0..8.0));
            let b = Complex64::new(rng.random_range(-4.0..4.0), rng.random_range(-8.0..8.0));
            let z = Complex64::new(rng.random_range(-12.0..12.0), rng.random_range(-12.0..12.0));
            let (Ok(kp), Ok(kp_t)) = (KummerParams::new(a, b), KummerParams::new(b - a, b)) else {
                continue;
            };
            let lhs = kp.series(z).map_err(|e| e.to_string())?;
            let rhs = z.exp() * kp_t.series(-z).map_err(|e| e.to_string())?;
            let denom = lhs.norm().max(rhs.norm()).max(1e-30);
            max_kummer = max_kummer.max((lhs - rhs).norm() / denom);
            tested += 1;
        }
        Ok((max_rel, max_kummer))
    };
    match run() {
        Ok((max_rel, max_kummer)) => CriterionReport::new(
            "A8",
            desc,
            max_rel <= 1e-7 && max_kummer <= 1e-9,
            format!("oracle max rel = {max_rel:.2e}; Kummer identity max = {max_kummer:.2e}"),
        ),
        Err(e) => err_report("A8", desc, e),
    }
}

// ---------------------------------------------------------------------------
// Cross-module invariants
// ---------------------------------------------------------------------------

fn invariant_coordinate_round_trip(settings: &RunSettings) -> CriterionReport {
    let desc = "quadrature map round-trips to 4 eps";
    let mut rng = ChaCha8Rng::seed_from_u64(settings.seed ^ 0xC0);
    let mut worst = 0.0f64;
    for _ in 0..100_000 {
        let x = rng.random_range(-50.0..50.0);
        let p = rng.random_range(-50.0..50.0);
        let (x2, p2) = crate::model::xy_of_alpha(alpha_of_xy(x, p));
        let tol = 4.0 * f64::EPSILON * x.abs().max(p.abs()).max(1.0);
        worst = worst.max(((x2 - x).abs().max((p2 - p).abs())) / tol);
    }
    CriterionReport::new("IV-coords", desc, worst <= 1.0, format!("worst/tol = {worst:.3}"))
}

fn invariant_parameter_scaling(settings: &RunSettings) -> CriterionReport {
    let desc = "alpha0, Phi, lnGamma, chi invariant under (G,D,eta) -> (sG,sD,s eta)";
    let p = settings.params;
    let run = || -> Result<f64, String> {
        let mut worst = 0.0f64;
        for s in [0.5, 2.0] {
            let q = ModelParams::new(s * p.drive, s * p.detuning, s * p.eta)
                .map_err(|e| e.to_string())?;
            let a0p = instanton::fixed_points(&p).map_err(|e| e.to_string())?.alpha0;
            let a0q = instanton::fixed_points(&q).map_err(|e| e.to_string())?.alpha0;
            worst = worst.max((a0p - a0q).norm());
            let rp = instanton::ln_rate_closed_form(&p).map_err(|e| e.to_string())?.ln_rate;
            let rq = instanton::ln_rate_closed_form(&q).map_err(|e| e.to_string())?.ln_rate;
            worst = worst.max((rp - rq).abs());
            for alpha in [Complex64::new(0.9, 0.7), Complex64::new(1.8, 0.4)] {
                let php = wigner::effective_potential(&p, alpha).map_err(|e| e.to_string())?;
                let phq = wigner::effective_potential(&q, alpha).map_err(|e| e.to_string())?;
                worst = worst.max((php - phq).abs());
                let cp = instanton::quantum_field_chi(&p, alpha).map_err(|e| e.to_string())?;
                let cq = instanton::quantum_field_chi(&q, alpha).map_err(|e| e.to_string())?;
                worst = worst.max((cp - cq).norm());
            }
        }
        Ok(worst)
    };
    match run() {
        Ok(worst) => {
            CriterionReport::new("IV-scaling", desc, worst <= 1e-10, format!("worst dev {worst:.2e}"))
        }
        Err(e) => err_report("IV-scaling", desc, e),
    }
}

fn invariant_parity_block_structure(settings: &RunSettings) -> CriterionReport {
    let desc = "Liouvillian is exactly block-diagonal over parity sectors";
    match fock::build_liouvillian(&settings.params, 16) {
        Ok(sup) => {
            let (_, off) = fock::parity_project(&sup);
            CriterionReport::new("IV-parity", desc, off == 0.0, format!("off-block max {off:.1e}"))
        }
        Err(e) => err_report("IV-parity", desc, e),
    }
}

fn invariant_l_conservation(settings: &RunSettings) -> CriterionReport {
    let desc = "zero-energy manifold: |L| <= 1e-10 scale on 10^4 random points";
    let p = settings.params;
    let mut rng = ChaCha8Rng::seed_from_u64(settings.seed ^ 0x11);
    let mut worst = 0.0f64;
    for _ in 0..10_000 {
        let alpha = Complex64::new(rng.random_range(-2.5..2.5), rng.random_range(-2.5..2.5));
        let chi = match instanton::quantum_field_chi(&p, alpha) {
            Ok(c) => c,
            Err(_) => continue,
        };
        let s = instanton::ChiAlphaState::physical(alpha, chi);
        let l = instanton::effective_hamiltonian(&p, &s);
        let scale = (p.drive + p.detuning.abs()) * (1.0 + alpha.norm()).powi(4);
        worst = worst.max(l.norm() / scale);
    }
    CriterionReport::new("IV-manifold", desc, worst <= 1e-10, format!("max |L|/scale = {worst:.2e}"))
}

fn invariant_config_echo(settings: &RunSettings) -> CriterionReport {
    let desc = "config echo round-trips exactly";
    match RunSettings::from_config_text(&settings.to_config_text()) {
        Ok(back) => CriterionReport::new("IV-config", desc, back == *settings, String::new()),
        Err(e) => err_report("IV-config", desc, e),
    }
}
