//! Finite-difference residual of the Wigner-function equation of motion.
//!
//! The master equation maps onto
//!
//!   ∂_t W = −[∂_α (iΔα + Gα* − ηα(|α|² − 1)) + c.c.] W
//!           + 2η ∂²_{αα*} (|α|² − ½) W
//!           + (η/4)[∂_α ∂²_{α*} (α* W) + c.c.],
//!
//! whose right-hand side must vanish on a stationary W. All derivatives are
//! taken with second-order centered stencils in the quadratures,
//! ∂_α = (∂_x − i∂_p)/√2 and ∂_{α*} = (∂_x + i∂_p)/√2, so the discrete
//! residual of an exact stationary solution converges to zero as O(h²).
//! The third-derivative term is the non-classical piece with no
//! Fokker–Planck analog; it is kept in full.

use num_complex::Complex64;

use super::FockError;
use crate::model::{alpha_of_xy, ModelParams, PhaseGrid, WignerGrid};

/// Cells stripped from each edge: three derivative applications each lose one.
const MARGIN: usize = 3;

/// Discrete right-hand side of the Wigner equation of motion over the grid
/// interior.
#[derive(Debug, Clone)]
pub struct EomResidual {
    /// Grid the residual refers to (same axes as the input).
    pub grid: PhaseGrid,
    /// Margin of invalid cells on every edge.
    pub margin: usize,
    /// Residual samples over the full grid; only the interior (margin
    /// excluded) is meaningful.
    pub values: Vec<f64>,
    /// max |residual| over the interior window.
    pub max_norm: f64,
}

impl EomResidual {
    /// max |residual| restricted to a window, for refinement studies where
    /// the measured region must not depend on the margin width.
    pub fn max_norm_in(&self, x_lo: f64, x_hi: f64, p_lo: f64, p_hi: f64) -> f64 {
        let g = &self.grid;
        let mut best = 0.0f64;
        for i in self.margin..g.nx - self.margin {
            let x = g.x_at(i);
            if x < x_lo || x > x_hi {
                continue;
            }
            for j in self.margin..g.np - self.margin {
                let p = g.p_at(j);
                if p < p_lo || p > p_hi {
                    continue;
                }
                best = best.max(self.values[i * g.np + j].abs());
            }
        }
        best
    }
}

struct Field {
    nx: usize,
    np: usize,
    hx: f64,
    hp: f64,
    data: Vec<Complex64>,
}

impl Field {
    fn from_fn(grid: &PhaseGrid, mut f: impl FnMut(usize, usize) -> Complex64) -> Field {
        let mut data = Vec::with_capacity(grid.len());
        for i in 0..grid.nx {
            for j in 0..grid.np {
                data.push(f(i, j));
            }
        }
        Field { nx: grid.nx, np: grid.np, hx: grid.h_x(), hp: grid.h_p(), data }
    }

    fn at(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.np + j]
    }

    /// Centered ∂_x; edge cells are left as zero (consumed by the margin).
    fn dx(&self) -> Field {
        let mut out = vec![Complex64::new(0.0, 0.0); self.data.len()];
        for i in 1..self.nx - 1 {
            for j in 0..self.np {
                out[i * self.np + j] =
                    (self.at(i + 1, j) - self.at(i - 1, j)) / (2.0 * self.hx);
            }
        }
        Field { data: out, ..*self }
    }

    fn dp(&self) -> Field {
        let mut out = vec![Complex64::new(0.0, 0.0); self.data.len()];
        for i in 0..self.nx {
            for j in 1..self.np - 1 {
                out[i * self.np + j] =
                    (self.at(i, j + 1) - self.at(i, j - 1)) / (2.0 * self.hp);
            }
        }
        Field { data: out, ..*self }
    }

    /// ∂_α = (∂_x − i ∂_p)/√2.
    fn d_alpha(&self) -> Field {
        self.combine_deriv(false)
    }

    /// ∂_{α*} = (∂_x + i ∂_p)/√2.
    fn d_alpha_bar(&self) -> Field {
        self.combine_deriv(true)
    }

    fn combine_deriv(&self, conjugate: bool) -> Field {
        let dx = self.dx();
        let dp = self.dp();
        let sign = if conjugate { 1.0 } else { -1.0 };
        let inv_rt2 = 1.0 / std::f64::consts::SQRT_2;
        let data = dx
            .data
            .iter()
            .zip(dp.data.iter())
            .map(|(x, p)| inv_rt2 * (x + sign * Complex64::i() * p))
            .collect();
        Field { data, ..*self }
    }

    fn map_with(&self, other: &Field, f: impl Fn(Complex64, Complex64) -> Complex64) -> Field {
        let data = self.data.iter().zip(other.data.iter()).map(|(a, b)| f(*a, *b)).collect();
        Field { data, ..*self }
    }
}

/// Evaluate the stationary residual of the equation of motion on `w`.
///
/// The input must give the stencils room to work: at least 2·margin + 3
/// samples per axis.
pub fn wigner_eom_residual(w: &WignerGrid, params: &ModelParams) -> Result<EomResidual, FockError> {
    let grid = w.grid;
    if grid.nx < 2 * MARGIN + 3 || grid.np < 2 * MARGIN + 3 {
        return Err(FockError::GridTooCoarse(format!(
            "need at least {} samples per axis, got {}x{}",
            2 * MARGIN + 3,
            grid.nx,
            grid.np
        )));
    }
    let (d, g, eta) = (params.detuning, params.drive, params.eta);
    let wf = Field::from_fn(&grid, |i, j| Complex64::new(w.value(i, j), 0.0));
    let alpha = Field::from_fn(&grid, |i, j| alpha_of_xy(grid.x_at(i), grid.p_at(j)));

    // drift: F = iΔα + Gα* − ηα(|α|² − 1)
    let drift = Field {
        data: alpha
            .data
            .iter()
            .map(|&a| {
                Complex64::i() * d * a + g * a.conj() - eta * a * (a.norm_sqr() - 1.0)
            })
            .collect(),
        ..alpha
    };
    let t1a = drift.map_with(&wf, |f, w| f * w).d_alpha();
    let t1b = drift.map_with(&wf, |f, w| f.conj() * w).d_alpha_bar();

    // diffusion: 2η ∂α ∂α* [(|α|² − ½) W]
    let diff_arg = alpha.map_with(&wf, |a, w| (a.norm_sqr() - 0.5) * w);
    let t2 = diff_arg.d_alpha_bar().d_alpha();

    // third-order: (η/4)[∂α ∂α*² (α* W) + ∂α* ∂α² (α W)]
    let t3a = alpha.map_with(&wf, |a, w| a.conj() * w).d_alpha_bar().d_alpha_bar().d_alpha();
    let t3b = alpha.map_with(&wf, |a, w| a * w).d_alpha().d_alpha().d_alpha_bar();

    let mut values = Vec::with_capacity(grid.len());
    let mut max_norm = 0.0f64;
    for i in 0..grid.nx {
        for j in 0..grid.np {
            let k = i * grid.np + j;
            let r = -(t1a.data[k] + t1b.data[k])
                + 2.0 * eta * t2.data[k]
                + 0.25 * eta * (t3a.data[k] + t3b.data[k]);
            values.push(r.re);
            let interior = i >= MARGIN
                && i < grid.nx - MARGIN
                && j >= MARGIN
                && j < grid.np - MARGIN;
            if interior {
                max_norm = max_norm.max(r.re.abs());
            }
        }
    }
    Ok(EomResidual { grid, margin: MARGIN, values, max_norm })
}
