//! `catron` — deterministic file outputs for the two-photon cavity engine.
//!
//! Subcommands map onto the compute layers: `wigner` (stationary
//! quasiprobability maps from four sources), `phase-portrait` (classical
//! flow, fixed points, uphill/downhill trajectories), `rate` (switching-rate
//! exponent sweeps), `instanton` (the uphill trajectory with its action),
//! `spectrum` (Liouvillian parity-block spectra and steady states), and
//! `validate` (the invariant and acceptance suites with a JSON report).
//!
//! All outputs are UTF-8 CSV with `#`-prefixed metadata headers or JSON; a
//! config echo is written next to them so any artifact can be reproduced
//! byte-for-byte. Settings come from defaults < `--config` file < `CATRON_*`
//! environment overrides < command-line flags.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use catron_core::fock;
use catron_core::instanton::{self, Attractor};
use catron_core::model::{ModelParams, PhaseGrid, RunSettings};
use catron_core::output::{self, Metadata};
use catron_core::validate;
use catron_core::wigner;

const BUILD_ID: &str = env!("CATRON_BUILD_ID");

#[derive(Parser)]
#[command(name = "catron", version, about = "Two-photon cavity steady states, Wigner functions, and switching rates")]
struct Cli {
    /// Key/value config file (keys: G, Delta, eta, fock_cutoff, x_min, x_max,
    /// p_min, p_max, nx, np, seed)
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Fock cutoff override
    #[arg(long, global = true)]
    cutoff: Option<usize>,
    /// Grid override: `MIN:MAX:N` (both axes) or
    /// `XMIN:XMAX:NX,PMIN:PMAX:NP`
    #[arg(long, global = true, allow_hyphen_values = true)]
    grid: Option<String>,
    /// Seed for the randomized validation samples
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Stationary Wigner maps: `wigner_<source>.csv` and
    /// `neg_log_wigner_<source>.csv` (plus `branch_cuts.json` for the
    /// potential source)
    Wigner {
        #[arg(long, value_enum, default_value_t = WignerSource::Exact)]
        source: WignerSource,
    },
    /// Classical vector field, fixed points, and the uphill/downhill
    /// trajectory layers
    PhasePortrait,
    /// ln rate vs detuning tables
    Rate {
        /// Drive amplitudes, comma separated
        #[arg(long, value_delimiter = ',', default_values_t = [5.0, 6.0, 7.0])]
        drives: Vec<f64>,
        /// Samples per curve over Delta in [0, G)
        #[arg(long, default_value_t = 200)]
        points: usize,
        /// Additionally emit the near-critical window data
        #[arg(long)]
        critical_zoom: bool,
        /// Compare against the Liouvillian block gaps at Delta = G/2 for the
        /// given drive amplitude
        #[arg(long)]
        compare_fock: Option<f64>,
    },
    /// Uphill saddle trajectory and its action
    Instanton {
        #[arg(long, value_enum, default_value_t = AttractorArg::Plus)]
        attractor: AttractorArg,
    },
    /// Parity-block spectra and steady states of the Liouvillian
    Spectrum,
    /// Run the invariant and acceptance suites; exit code 0 iff every
    /// acceptance criterion passes
    Validate {
        /// Only run checks whose id starts with one of these prefixes
        /// (e.g. `A2,A5,IV`)
        #[arg(long, value_delimiter = ',')]
        only: Vec<String>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum WignerSource {
    Exact,
    Wkb,
    Potential,
    Fock,
}

#[derive(Clone, Copy, ValueEnum)]
enum AttractorArg {
    Plus,
    Minus,
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    let settings = load_settings(&cli)?;
    std::fs::create_dir_all(&cli.out)
        .with_context(|| format!("creating output directory {}", cli.out.display()))?;
    std::fs::write(cli.out.join("config_echo.txt"), settings.to_config_text())?;
    match &cli.command {
        Command::Wigner { source } => cmd_wigner(&cli.out, &settings, *source),
        Command::PhasePortrait => cmd_phase_portrait(&cli.out, &settings),
        Command::Rate { drives, points, critical_zoom, compare_fock } => {
            cmd_rate(&cli.out, &settings, drives, *points, *critical_zoom, *compare_fock)
        }
        Command::Instanton { attractor } => cmd_instanton(&cli.out, &settings, *attractor),
        Command::Spectrum => cmd_spectrum(&cli.out, &settings),
        Command::Validate { only } => cmd_validate(&cli.out, &settings, only),
    }
}

fn load_settings(cli: &Cli) -> Result<RunSettings> {
    let mut settings = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading config {}", path.display()))?;
            RunSettings::from_config_text(&text)?
        }
        None => RunSettings::from_env()?,
    };
    if let Some(n) = cli.cutoff {
        settings.fock_cutoff = n;
    }
    if let Some(seed) = cli.seed {
        settings.seed = seed;
    }
    if let Some(spec) = &cli.grid {
        settings.grid = parse_grid_spec(spec)?;
    }
    Ok(settings)
}

fn parse_grid_spec(spec: &str) -> Result<PhaseGrid> {
    let axes: Vec<&str> = spec.split(',').collect();
    let parse_axis = |s: &str| -> Result<(f64, f64, usize)> {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 3 {
            bail!("grid axis `{s}` is not MIN:MAX:N");
        }
        Ok((parts[0].parse()?, parts[1].parse()?, parts[2].parse()?))
    };
    let (grid, err_ctx) = match axes.len() {
        1 => {
            let (lo, hi, n) = parse_axis(axes[0])?;
            (PhaseGrid::new(lo, hi, lo, hi, n, n), spec)
        }
        2 => {
            let (xl, xh, nx) = parse_axis(axes[0])?;
            let (pl, ph, np) = parse_axis(axes[1])?;
            (PhaseGrid::new(xl, xh, pl, ph, nx, np), spec)
        }
        _ => bail!("grid spec `{spec}` must have one or two axes"),
    };
    grid.with_context(|| format!("invalid grid spec `{err_ctx}`"))
}

fn meta(settings: &RunSettings, layer: &str) -> Metadata {
    Metadata::new(settings, BUILD_ID).with("layer", layer)
}

fn cmd_wigner(out: &Path, settings: &RunSettings, source: WignerSource) -> Result<()> {
    let params = settings.params;
    let grid = settings.grid;
    let ev = wigner::ExactEvaluator::new(params)?;
    let exact = wigner::wigner_exact(&ev, &grid)?;
    let (name, w) = match source {
        WignerSource::Exact => ("exact", exact.wigner),
        WignerSource::Wkb => ("wkb", wigner::wigner_wkb(&params, &grid, exact.log_norm)?),
        WignerSource::Potential => {
            let w = wigner::wigner_potential(&params, &grid, exact.log_norm)?;
            let rays = wigner::branch_cut_rays(&params, &grid);
            output::write_json(&out.join("branch_cuts.json"), &rays)?;
            ("potential", w)
        }
        WignerSource::Fock => {
            let sup = fock::build_liouvillian(&params, settings.fock_cutoff)?;
            let states = fock::steady_states(&sup)?;
            let mut grids = Vec::new();
            for st in &states {
                grids.push(fock::wigner_from_density(&st.rho, &grid)?);
            }
            ("fock", least_squares_combination(&exact.wigner, &grids))
        }
    };
    let m = meta(settings, &format!("wigner_{name}"));
    output::write_wigner_csv(&out.join(format!("wigner_{name}.csv")), &w, &m)?;
    output::write_neg_log_wigner_csv(&out.join(format!("neg_log_wigner_{name}.csv")), &w, &m)?;
    println!("wrote wigner_{name}.csv and neg_log_wigner_{name}.csv to {}", out.display());
    Ok(())
}

/// Kernel-span combination closest to the analytic solution, as used by the
/// oracle-equivalence acceptance check.
fn least_squares_combination(
    target: &catron_core::model::WignerGrid,
    basis: &[catron_core::model::WignerGrid],
) -> catron_core::model::WignerGrid {
    let n = basis.len();
    let mut gram = vec![vec![0.0f64; n]; n];
    let mut rhs = vec![0.0f64; n];
    for i in 0..n {
        for j in 0..n {
            gram[i][j] =
                basis[i].values.iter().zip(&basis[j].values).map(|(a, b)| a * b).sum();
        }
        rhs[i] = basis[i].values.iter().zip(&target.values).map(|(a, b)| a * b).sum();
    }
    // 2×2 solve by elimination
    let det = gram[0][0] * gram[1][1] - gram[0][1] * gram[1][0];
    let c0 = (rhs[0] * gram[1][1] - gram[0][1] * rhs[1]) / det;
    let c1 = (gram[0][0] * rhs[1] - rhs[0] * gram[1][0]) / det;
    let mut out = basis[0].clone();
    for (k, v) in out.values.iter_mut().enumerate() {
        *v = c0 * basis[0].values[k] + c1 * basis[1].values[k];
    }
    out
}

fn cmd_phase_portrait(out: &Path, settings: &RunSettings) -> Result<()> {
    let params = settings.params;
    if !params.bistable {
        bail!("phase portrait requires the bistable regime G > |Delta|");
    }
    let grid = settings.grid;
    // vector field on a coarsened grid
    let stride = (grid.nx / 30).max(1);
    let m = meta(settings, "vector_field");
    let mut rows = Vec::new();
    for i in (0..grid.nx).step_by(stride) {
        for j in (0..grid.np).step_by(stride) {
            let alpha = grid.alpha_at(i, j);
            let v = instanton::semiclassical_flow(&params, alpha);
            // quadrature-frame components: dx = √2 Re(dα), dp = √2 Im(dα)
            rows.push(vec![
                grid.x_at(i),
                grid.p_at(j),
                catron_core::model::SQRT2 * v.re,
                catron_core::model::SQRT2 * v.im,
            ]);
        }
    }
    output::write_points_csv(&out.join("vector_field.csv"), "x,p,dx,dp", rows.into_iter(), &m)?;

    let fp = instanton::fixed_points(&params)?;
    let m = meta(settings, "fixed_points");
    let pts = [fp.alpha0, -fp.alpha0, fp.saddle];
    output::write_points_csv(
        &out.join("fixed_points.csv"),
        "x,p,kind",
        pts.iter().enumerate().map(|(k, a)| {
            let (x, p) = catron_core::model::xy_of_alpha(*a);
            vec![x, p, if k < 2 { 0.0 } else { 1.0 }]
        }),
        &m,
    )?;

    let traj = instanton::integrate_instanton(&params, Attractor::Plus)?;
    output::write_trajectory_csv(
        &out.join("instanton_uphill.csv"),
        &traj,
        &meta(settings, "instanton_uphill"),
    )?;

    let down = instanton::downhill_path(&params, Attractor::Minus)?;
    let m = meta(settings, "separatrix_downhill");
    output::write_points_csv(
        &out.join("separatrix_downhill.csv"),
        "t,x,p",
        down.iter().map(|(t, a)| {
            let (x, p) = catron_core::model::xy_of_alpha(*a);
            vec![*t, x, p]
        }),
        &m,
    )?;
    println!("wrote phase-portrait layers to {}", out.display());
    Ok(())
}

fn cmd_rate(
    out: &Path,
    settings: &RunSettings,
    drives: &[f64],
    points: usize,
    critical_zoom: bool,
    compare_fock: Option<f64>,
) -> Result<()> {
    let eta = settings.params.eta;
    let rows = instanton::rate_sweep(drives, points, eta)?;
    output::write_rate_csv(&out.join("rate_sweep.csv"), &rows, &meta(settings, "rate_sweep"))?;
    if critical_zoom {
        let mut zoom = Vec::new();
        for &g in drives {
            for k in 0..50 {
                let eps = 10f64.powf(-4.0 + 2.0 * k as f64 / 49.0);
                let params = ModelParams::new(g * eta, g * eta * (1.0 - eps), eta)?;
                let rate = instanton::ln_rate_closed_form(&params)?;
                let crit = instanton::ln_rate_critical(&params)?;
                zoom.push(instanton::RateSweepRow {
                    drive: params.drive,
                    detuning: params.detuning,
                    eta,
                    ln_rate: rate.ln_rate,
                    ln_rate_critical: Some(crit),
                });
            }
        }
        output::write_rate_csv(
            &out.join("rate_critical_zoom.csv"),
            &zoom,
            &meta(settings, "rate_critical_zoom"),
        )?;
    }
    if let Some(g) = compare_fock {
        let params = ModelParams::new(g * eta, g * eta / 2.0, eta)?;
        let rate = instanton::ln_rate_closed_form(&params)?;
        let mut rows = Vec::new();
        let mut n = 30usize;
        let mut prev: Option<[f64; 4]> = None;
        loop {
            let sup = fock::build_liouvillian(&params, n)?;
            let (blocks, _) = fock::parity_project(&sup);
            let mut gaps = [0.0f64; 4];
            for (k, b) in blocks.iter().enumerate() {
                let eig = fock::block_eigenvalues(b)?;
                gaps[k] = fock::decay_rate(&eig, fock::frobenius(&b.matrix))?;
            }
            let converged = prev.is_some_and(|p| {
                gaps.iter().zip(p.iter()).all(|(a, b)| (a - b).abs() <= 1e-3 * a.abs())
            });
            if converged || n >= 60 {
                for (k, b) in blocks.iter().enumerate() {
                    rows.push(vec![
                        params.drive,
                        params.detuning,
                        eta,
                        n as f64,
                        k as f64,
                        gaps[k],
                        gaps[k].ln(),
                        rate.ln_rate,
                    ]);
                    let _ = b;
                }
                break;
            }
            prev = Some(gaps);
            n += 10;
        }
        output::write_points_csv(
            &out.join("compare_fock.csv"),
            "G,Delta,eta,cutoff,sector,gap,ln_gap,ln_rate",
            rows.into_iter(),
            &meta(settings, "compare_fock"),
        )?;
    }
    println!("wrote rate tables to {}", out.display());
    Ok(())
}

fn cmd_instanton(out: &Path, settings: &RunSettings, attractor: AttractorArg) -> Result<()> {
    let params = settings.params;
    let which = match attractor {
        AttractorArg::Plus => Attractor::Plus,
        AttractorArg::Minus => Attractor::Minus,
    };
    let traj = instanton::integrate_instanton(&params, which)?;
    output::write_trajectory_csv(&out.join("instanton.csv"), &traj, &meta(settings, "instanton"))?;
    let rate = instanton::ln_rate_closed_form(&params)?;
    let (quad, quad_imag) = instanton::instanton_action(&traj);
    let summary = serde_summary(&traj, &rate, quad, quad_imag);
    output::write_json(&out.join("instanton_summary.json"), &summary)?;
    println!(
        "action iS = {:.9} (closed form {:.9}); wrote instanton.csv and instanton_summary.json",
        traj.action.re, rate.ln_rate
    );
    Ok(())
}

fn serde_summary(
    traj: &catron_core::instanton::InstantonTrajectory,
    rate: &catron_core::instanton::RateResult,
    quad: f64,
    quad_imag: f64,
) -> serde_json::Value {
    serde_json::json!({
        "action_re": traj.action.re,
        "action_im": traj.action.im,
        "action_requadrature": quad,
        "action_requadrature_imag_residue": quad_imag,
        "ln_rate_closed_form": rate.ln_rate,
        "potential_difference": rate.potential_difference,
        "max_abs_L": traj.max_l,
        "start": [traj.start.re, traj.start.im],
        "end": [traj.end.re, traj.end.im],
        "samples": traj.points.len(),
    })
}

fn cmd_spectrum(out: &Path, settings: &RunSettings) -> Result<()> {
    let params = settings.params;
    let sup = fock::build_liouvillian(&params, settings.fock_cutoff)?;
    let (blocks, off_max) = fock::parity_project(&sup);
    let mut rows = Vec::new();
    let mut gaps = Vec::new();
    for (k, b) in blocks.iter().enumerate() {
        let eig = fock::block_eigenvalues(b)?;
        let gap = fock::decay_rate(&eig, fock::frobenius(&b.matrix)).ok();
        gaps.push(serde_json::json!({
            "sector": b.sector.label(),
            "slowest_nonzero_rate": gap,
        }));
        for l in eig {
            rows.push(vec![k as f64, l.re, l.im]);
        }
    }
    output::write_points_csv(
        &out.join("spectrum.csv"),
        "sector,re,im",
        rows.into_iter(),
        &meta(settings, "spectrum"),
    )?;
    let states = fock::steady_states(&sup)?;
    let mut state_meta = Vec::new();
    for st in &states {
        let name = format!("steady_state_{}.csv", st.sector.label());
        output::write_matrix_csv(
            &out.join(&name),
            &st.rho.matrix,
            &meta(settings, &format!("steady_state_{}", st.sector.label())),
        )?;
        state_meta.push(serde_json::json!({
            "sector": st.sector.label(),
            "file": name,
            "residual": st.residual,
            "kernel_gap": st.kernel_gap,
            "purity": st.rho.purity(),
            "min_eigenvalue": st.rho.min_eigenvalue()?,
        }));
    }
    output::write_json(
        &out.join("spectrum_meta.json"),
        &serde_json::json!({
            "fock_cutoff": settings.fock_cutoff,
            "off_block_max": off_max,
            "block_gaps": gaps,
            "steady_states": state_meta,
        }),
    )?;
    println!("wrote spectrum.csv, steady-state matrices, and spectrum_meta.json to {}", out.display());
    Ok(())
}

fn cmd_validate(out: &Path, settings: &RunSettings, only: &[String]) -> Result<()> {
    let keep = |id: &str| only.is_empty() || only.iter().any(|p| id.starts_with(p.as_str()));
    let mut criteria = Vec::new();
    for rep in validate::run_invariants(settings) {
        if keep(&rep.id) {
            criteria.push(rep);
        }
    }
    let acceptance = [
        "A1", "A2", "A3", "A4", "A5", "A6", "A7", "A8",
    ];
    for id in acceptance {
        if !keep(id) {
            continue;
        }
        let rep = match id {
            "A1" => validate::a1_exact_wigner_vs_fock(settings),
            "A2" => validate::a2_eom_residual_order(settings),
            "A3" => validate::a3_wkb_quality(settings),
            "A4" => validate::a4_gradient_and_action(settings),
            "A5" => validate::a5_rate_limits(settings),
            "A6" => validate::a6_exponent_vs_spectrum(settings),
            "A7" => validate::a7_figure_features(settings),
            _ => validate::a8_special_functions(settings),
        };
        criteria.push(rep);
    }
    let all_passed = criteria.iter().all(|c| c.passed);
    for c in &criteria {
        println!("{}", c.summary_line());
    }
    let report = validate::ValidationReport { criteria, all_passed };
    output::write_json(&out.join("validate_report.json"), &report)?;
    println!("wrote validate_report.json to {}", out.display());
    if !all_passed {
        std::process::exit(1);
    }
    Ok(())
}
