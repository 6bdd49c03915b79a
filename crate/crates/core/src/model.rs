//! Model parameters, phase-space grids, and the coordinate convention shared
//! by every other module.
//!
//! The cavity is described by the triple (G, Δ, η): two-photon drive
//! amplitude, pump–cavity detuning Δ = ω_p − ω_c, and two-photon dissipation
//! rate (ħ = 1, all in rate units). Everything downstream depends on the
//! parameters only through the dimensionless ratios δ = Δ/η and g = G/η.
//!
//! Phase-space convention, fixed globally: α = (x + ip)/√2, so that
//! x = √2 Re α and p = √2 Im α. Wigner functions are normalized as
//! ∫ W d²α = 1 with d²α = d(Re α) d(Im α) = dx dp / 2.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Square root of two, used by the quadrature map.
pub const SQRT2: f64 = std::f64::consts::SQRT_2;

#[derive(Debug, Error, PartialEq)]
pub enum ModelError {
    #[error("two-photon dissipation rate must be positive, got eta = {0}")]
    NonPositiveEta(f64),
    #[error("two-photon drive amplitude must be non-negative, got G = {0}")]
    NegativeDrive(f64),
    #[error("degenerate grid: {0}")]
    DegenerateGrid(String),
    #[error("config error: {0}")]
    Config(String),
}

/// Physical parameters of the two-photon cavity.
///
/// Constructed through [`ModelParams::new`], which validates the inputs and
/// fills in the derived dimensionless ratios and the bistability flag.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// Two-photon drive amplitude G ≥ 0 (rate units).
    pub drive: f64,
    /// Pump–cavity detuning Δ = ω_p − ω_c (rate units, may be negative).
    pub detuning: f64,
    /// Two-photon dissipation rate η > 0.
    pub eta: f64,
    /// Derived ratio δ = Δ/η.
    pub delta: f64,
    /// Derived ratio g = G/η.
    pub g: f64,
    /// True iff G > |Δ|: two attractors ±α₀ coexist with the saddle at 0.
    pub bistable: bool,
}

impl ModelParams {
    /// Validate (G, Δ, η) and fill the derived fields.
    pub fn new(drive: f64, detuning: f64, eta: f64) -> Result<Self, ModelError> {
        // `!(eta > 0.0)` also catches NaN
        #[allow(clippy::neg_cmp_op_on_partial_ord)]
        if !(eta > 0.0) || !eta.is_finite() {
            return Err(ModelError::NonPositiveEta(eta));
        }
        if drive < 0.0 || !drive.is_finite() || !detuning.is_finite() {
            return Err(ModelError::NegativeDrive(drive));
        }
        Ok(ModelParams {
            drive,
            detuning,
            eta,
            delta: detuning / eta,
            g: drive / eta,
            bistable: drive > detuning.abs(),
        })
    }

    /// Principal branch of σ(α) = √(δ² − 4g α²).
    ///
    /// This single function backs both the WKB exponents/effective potential
    /// and the saddle-trajectory branch functions, so the two modules see
    /// bit-identical values for identical inputs. In rate units the
    /// discriminant reads √(Δ² − 4ηGα²) = η·σ(α).
    pub fn sigma(&self, alpha: Complex64) -> Complex64 {
        (Complex64::new(self.delta * self.delta, 0.0)
            - 4.0 * self.g * alpha * alpha)
            .sqrt()
    }

    /// Turning-point amplitude on the real axis, |α_tp| = δ/(2√g).
    ///
    /// σ(α)² vanishes at α = ±α_tp; the principal branch cut of σ in the
    /// α-plane runs along the real axis for |Re α| ≥ α_tp.
    pub fn turning_point(&self) -> f64 {
        if self.g == 0.0 {
            f64::INFINITY
        } else {
            self.delta.abs() / (2.0 * self.g.sqrt())
        }
    }
}

/// Map quadratures (x, p) to the complex amplitude α = (x + ip)/√2.
pub fn alpha_of_xy(x: f64, p: f64) -> Complex64 {
    Complex64::new(x / SQRT2, p / SQRT2)
}

/// Inverse of [`alpha_of_xy`]: α → (√2 Re α, √2 Im α).
pub fn xy_of_alpha(alpha: Complex64) -> (f64, f64) {
    (SQRT2 * alpha.re, SQRT2 * alpha.im)
}

/// Uniform rectangular grid over the (x, p) quadrature plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseGrid {
    pub x_min: f64,
    pub x_max: f64,
    pub p_min: f64,
    pub p_max: f64,
    pub nx: usize,
    pub np: usize,
}

impl PhaseGrid {
    /// Build a grid; `nx`, `np` are sample counts including both endpoints.
    pub fn new(
        x_min: f64,
        x_max: f64,
        p_min: f64,
        p_max: f64,
        nx: usize,
        np: usize,
    ) -> Result<Self, ModelError> {
        if !(x_min.is_finite() && x_max.is_finite() && p_min.is_finite() && p_max.is_finite()) {
            return Err(ModelError::DegenerateGrid("non-finite bounds".into()));
        }
        if nx < 3 || np < 3 {
            return Err(ModelError::DegenerateGrid(format!(
                "need at least 3 samples per axis, got nx={nx}, np={np}"
            )));
        }
        if x_max <= x_min || p_max <= p_min {
            return Err(ModelError::DegenerateGrid(format!(
                "zero or negative extent: x [{x_min}, {x_max}], p [{p_min}, {p_max}]"
            )));
        }
        Ok(PhaseGrid { x_min, x_max, p_min, p_max, nx, np })
    }

    /// Square grid [−r, r]² with n samples per axis.
    pub fn square(r: f64, n: usize) -> Result<Self, ModelError> {
        PhaseGrid::new(-r, r, -r, r, n, n)
    }

    pub fn h_x(&self) -> f64 {
        (self.x_max - self.x_min) / (self.nx - 1) as f64
    }

    pub fn h_p(&self) -> f64 {
        (self.p_max - self.p_min) / (self.np - 1) as f64
    }

    pub fn x_at(&self, i: usize) -> f64 {
        self.x_min + i as f64 * self.h_x()
    }

    pub fn p_at(&self, j: usize) -> f64 {
        self.p_min + j as f64 * self.h_p()
    }

    pub fn alpha_at(&self, i: usize, j: usize) -> Complex64 {
        alpha_of_xy(self.x_at(i), self.p_at(j))
    }

    pub fn len(&self) -> usize {
        self.nx * self.np
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Row-major flat index for sample (i, j) = (x index, p index).
    pub fn idx(&self, i: usize, j: usize) -> usize {
        i * self.np + j
    }
}

/// Real-valued Wigner samples over a [`PhaseGrid`].
///
/// `values[i * np + j]` holds W(x_i, p_j). `quad_weight` is the cell measure
/// h_x·h_p/2 used by the quadrature (d²α = dx dp / 2).
#[derive(Debug, Clone)]
pub struct WignerGrid {
    pub grid: PhaseGrid,
    pub values: Vec<f64>,
    pub quad_weight: f64,
}

impl WignerGrid {
    pub fn from_fn(grid: PhaseGrid, mut f: impl FnMut(f64, f64) -> f64) -> Self {
        let mut values = Vec::with_capacity(grid.len());
        for i in 0..grid.nx {
            for j in 0..grid.np {
                values.push(f(grid.x_at(i), grid.p_at(j)));
            }
        }
        let quad_weight = grid.h_x() * grid.h_p() / 2.0;
        WignerGrid { grid, values, quad_weight }
    }

    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.values[self.grid.idx(i, j)]
    }

    /// Trapezoid quadrature of ∫ W d²α over the grid (NaN samples count as 0).
    pub fn integral(&self) -> f64 {
        let mut total = 0.0;
        for i in 0..self.grid.nx {
            let wi = if i == 0 || i == self.grid.nx - 1 { 0.5 } else { 1.0 };
            for j in 0..self.grid.np {
                let wj = if j == 0 || j == self.grid.np - 1 { 0.5 } else { 1.0 };
                let v = self.value(i, j);
                if v.is_finite() {
                    total += wi * wj * v;
                }
            }
        }
        total * self.quad_weight
    }

    /// Scale all samples by `factor`.
    pub fn scale(&mut self, factor: f64) {
        for v in &mut self.values {
            *v *= factor;
        }
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().cloned().filter(|v| v.is_finite()).fold(f64::MIN, f64::max)
    }
}

/// Run settings shared by the CLI and the validation suite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSettings {
    pub params: ModelParams,
    pub fock_cutoff: usize,
    pub grid: PhaseGrid,
    pub seed: u64,
}

impl Default for RunSettings {
    /// Desk-scale defaults: the reference parameter set (G=10, Δ=7, η=1),
    /// N = 60, 241×241 grid over [−6, 6]².
    fn default() -> Self {
        RunSettings {
            params: ModelParams::new(10.0, 7.0, 1.0).expect("default params are valid"),
            fock_cutoff: 60,
            grid: PhaseGrid::square(6.0, 241).expect("default grid is valid"),
            seed: 1,
        }
    }
}

impl RunSettings {
    /// Parse a key/value config file, then apply `CATRON_*` environment
    /// overrides on top.
    pub fn from_config_text(text: &str) -> Result<Self, ModelError> {
        let mut map = parse_key_values(text)?;
        apply_env_overrides(&mut map);
        RunSettings::from_map(&map)
    }

    /// Settings from environment overrides alone.
    pub fn from_env() -> Result<Self, ModelError> {
        let mut map = BTreeMap::new();
        apply_env_overrides(&mut map);
        RunSettings::from_map(&map)
    }

    fn from_map(map: &BTreeMap<String, String>) -> Result<Self, ModelError> {
        let def = RunSettings::default();
        let f = |key: &str, d: f64| -> Result<f64, ModelError> {
            match map.get(key) {
                Some(s) => s
                    .parse::<f64>()
                    .map_err(|e| ModelError::Config(format!("{key}: {e}"))),
                None => Ok(d),
            }
        };
        let u = |key: &str, d: usize| -> Result<usize, ModelError> {
            match map.get(key) {
                Some(s) => s
                    .parse::<usize>()
                    .map_err(|e| ModelError::Config(format!("{key}: {e}"))),
                None => Ok(d),
            }
        };
        for key in map.keys() {
            const KNOWN: &[&str] = &[
                "G", "Delta", "eta", "fock_cutoff", "x_min", "x_max", "p_min", "p_max", "nx",
                "np", "seed",
            ];
            if !KNOWN.contains(&key.as_str()) {
                return Err(ModelError::Config(format!("unknown config key `{key}`")));
            }
        }
        let params = ModelParams::new(
            f("G", def.params.drive)?,
            f("Delta", def.params.detuning)?,
            f("eta", def.params.eta)?,
        )?;
        let grid = PhaseGrid::new(
            f("x_min", def.grid.x_min)?,
            f("x_max", def.grid.x_max)?,
            f("p_min", def.grid.p_min)?,
            f("p_max", def.grid.p_max)?,
            u("nx", def.grid.nx)?,
            u("np", def.grid.np)?,
        )?;
        Ok(RunSettings {
            params,
            fock_cutoff: u("fock_cutoff", def.fock_cutoff)?,
            grid,
            seed: u("seed", def.seed as usize)? as u64,
        })
    }

    /// Render the settings back to config-file syntax. Re-parsing the echo
    /// reproduces the settings exactly.
    pub fn to_config_text(&self) -> String {
        format!(
            "G = {}\nDelta = {}\neta = {}\nfock_cutoff = {}\nx_min = {}\nx_max = {}\n\
             p_min = {}\np_max = {}\nnx = {}\nnp = {}\nseed = {}\n",
            fmt_f64(self.params.drive),
            fmt_f64(self.params.detuning),
            fmt_f64(self.params.eta),
            self.fock_cutoff,
            fmt_f64(self.grid.x_min),
            fmt_f64(self.grid.x_max),
            fmt_f64(self.grid.p_min),
            fmt_f64(self.grid.p_max),
            self.grid.nx,
            self.grid.np,
            self.seed
        )
    }
}

/// Format a float so that the config echo round-trips bit-exactly.
fn fmt_f64(v: f64) -> String {
    let s = format!("{v}");
    debug_assert_eq!(s.parse::<f64>().ok(), Some(v));
    s
}

fn parse_key_values(text: &str) -> Result<BTreeMap<String, String>, ModelError> {
    let mut map = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| ModelError::Config(format!("line {}: expected `key = value`", lineno + 1)))?;
        map.insert(key.trim().to_string(), value.trim().to_string());
    }
    Ok(map)
}

/// Environment variables `CATRON_<KEY>` override file values. `<KEY>` is the
/// upper-cased config key, e.g. `CATRON_G`, `CATRON_DELTA`, `CATRON_FOCK_CUTOFF`.
fn apply_env_overrides(map: &mut BTreeMap<String, String>) {
    const KEYS: &[(&str, &str)] = &[
        ("CATRON_G", "G"),
        ("CATRON_DELTA", "Delta"),
        ("CATRON_ETA", "eta"),
        ("CATRON_FOCK_CUTOFF", "fock_cutoff"),
        ("CATRON_X_MIN", "x_min"),
        ("CATRON_X_MAX", "x_max"),
        ("CATRON_P_MIN", "p_min"),
        ("CATRON_P_MAX", "p_max"),
        ("CATRON_NX", "nx"),
        ("CATRON_NP", "np"),
        ("CATRON_SEED", "seed"),
    ];
    for (env, key) in KEYS {
        if let Ok(v) = std::env::var(env) {
            map.insert((*key).to_string(), v);
        }
    }
}

impl fmt::Display for ModelParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "G={}, Delta={}, eta={} (delta={}, g={}, {})",
            self.drive,
            self.detuning,
            self.eta,
            self.delta,
            self.g,
            if self.bistable { "bistable" } else { "monostable" }
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn validate_reference_params() {
        let p = ModelParams::new(10.0, 7.0, 1.0).unwrap();
        assert!(p.bistable);
        assert_eq!(p.delta, 7.0);
        assert_eq!(p.g, 10.0);
    }

    #[test]
    fn critical_point_is_not_bistable() {
        let p = ModelParams::new(5.0, 5.0, 1.0).unwrap();
        assert!(!p.bistable);
    }

    #[test]
    fn rejects_nonpositive_eta_and_negative_drive() {
        assert_eq!(
            ModelParams::new(10.0, 7.0, 0.0).unwrap_err(),
            ModelError::NonPositiveEta(0.0)
        );
        assert!(matches!(
            ModelParams::new(-1.0, 0.0, 1.0).unwrap_err(),
            ModelError::NegativeDrive(_)
        ));
    }

    #[test]
    fn coordinate_map_examples() {
        assert_eq!(alpha_of_xy(0.0, 0.0), Complex64::new(0.0, 0.0));
        assert_abs_diff_eq!(alpha_of_xy(SQRT2, 0.0).re, 1.0, epsilon = 1e-15);
        let a = alpha_of_xy(3.5, 1.43);
        assert_abs_diff_eq!(a.re, 2.4748737, epsilon = 1e-6);
        assert_abs_diff_eq!(a.im, 1.0111627, epsilon = 1e-6);
    }

    #[test]
    fn coordinate_round_trip_bulk() {
        use rand::prelude::*;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let eps = f64::EPSILON;
        for _ in 0..1_000_000 {
            let x = rng.random_range(-50.0..50.0);
            let p = rng.random_range(-50.0..50.0);
            let (x2, p2) = xy_of_alpha(alpha_of_xy(x, p));
            let tol = 4.0 * eps * x.abs().max(p.abs()).max(1.0);
            assert!((x2 - x).abs() <= tol && (p2 - p).abs() <= tol);
        }
    }

    #[test]
    fn grid_spacing_and_errors() {
        let g = PhaseGrid::square(6.0, 241).unwrap();
        assert_abs_diff_eq!(g.h_x(), 0.05, epsilon = 1e-15);
        assert_abs_diff_eq!(g.h_p(), 0.05, epsilon = 1e-15);
        assert!(matches!(
            PhaseGrid::new(-6.0, 6.0, -6.0, 6.0, 2, 241),
            Err(ModelError::DegenerateGrid(_))
        ));
        assert!(matches!(
            PhaseGrid::new(0.0, 0.0, -6.0, 6.0, 11, 11),
            Err(ModelError::DegenerateGrid(_))
        ));
        let q1 = PhaseGrid::new(0.0, 6.0, 0.0, 6.0, 121, 121).unwrap();
        assert_abs_diff_eq!(q1.h_x(), 0.05, epsilon = 1e-15);
    }

    #[test]
    fn vacuum_gaussian_normalizes() {
        // W(α) = (2/π) e^{-2|α|²} integrates to 1 in the d²α measure.
        let grid = PhaseGrid::square(5.0, 201).unwrap();
        let w = WignerGrid::from_fn(grid, |x, p| {
            let a = alpha_of_xy(x, p);
            (2.0 / std::f64::consts::PI) * (-2.0 * a.norm_sqr()).exp()
        });
        assert_abs_diff_eq!(w.integral(), 1.0, epsilon = 1e-9);
    }

    #[test]
    fn config_parse_echo_roundtrip() {
        let text = "# reference point\nG = 10\nDelta = 7\neta = 1\nfock_cutoff = 40\nnx = 61\nnp = 61\n";
        let s = RunSettings::from_config_text(text).unwrap();
        assert_eq!(s.fock_cutoff, 40);
        assert_eq!(s.grid.nx, 61);
        let echoed = RunSettings::from_config_text(&s.to_config_text()).unwrap();
        assert_eq!(echoed, s);
    }

    #[test]
    fn config_rejects_unknown_keys_and_bad_values() {
        assert!(RunSettings::from_config_text("Gee = 3\n").is_err());
        assert!(RunSettings::from_config_text("eta = zero\n").is_err());
        assert!(RunSettings::from_config_text("eta = -1\n").is_err());
    }

    #[test]
    fn sigma_principal_branch_at_attractor() {
        // σ(α₀) = δ − 2i√(g² − δ²) on the principal branch.
        let p = ModelParams::new(10.0, 7.0, 1.0).unwrap();
        let r = (p.g * p.g - p.delta * p.delta).sqrt();
        let alpha0 = (r).sqrt() * ((Complex64::new(r, p.delta)) / p.g).sqrt();
        let s = p.sigma(alpha0);
        assert_abs_diff_eq!(s.re, p.delta, epsilon = 1e-10);
        assert_abs_diff_eq!(s.im, -2.0 * r, epsilon = 1e-10);
    }
}
