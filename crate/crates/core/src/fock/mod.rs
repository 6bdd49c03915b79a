//! Brute-force truth source on a truncated Fock space: Hamiltonian, jump
//! operator, Liouvillian superoperator, parity sectors, steady states, time
//! evolution, decay rates, Wigner transforms, and the Wigner
//! equation-of-motion residual.
//!
//! Operators act on the number basis {|0⟩, …, |N−1⟩}. Density matrices are
//! vectorized by column stacking, vec(ρ)[j + N·k] = ρ[j,k], so that
//! vec(AρB) = (Bᵀ ⊗ A) vec(ρ) and
//!
//!   𝓛 = −i(I⊗H − Hᵀ⊗I) + η[(ā²⊗a²) − ½ I⊗(a†²a²) − ½ (a†²a²)ᵀ⊗I].
//!
//! Both the Hamiltonian and the jump operator preserve photon-number parity,
//! so 𝓛 is exactly block diagonal over the four (bra, ket) parity sectors;
//! steady states live in the two diagonal sectors and the slow coherence
//! decay lives in the off-diagonal ones.

mod eom;
mod transform;

use faer::Mat;
use ndarray::{Array1, Array2};
use num_complex::Complex64;
use thiserror::Error;

use crate::model::ModelParams;

pub use eom::{wigner_eom_residual, EomResidual};
#[doc(hidden)]
pub use transform::wigner_point_with_residue;
pub use transform::wigner_from_density;

#[derive(Debug, Error)]
pub enum FockError {
    #[error("Fock cutoff too small: need N >= 4, got {0}")]
    CutoffTooSmall(usize),
    #[error("superoperator would need {required} bytes, over the {limit} budget")]
    MemoryBudgetExceeded { required: usize, limit: usize },
    #[error("kernel singular-value gap too small: {gap_ratio:.2e} < 1e3")]
    RankDeficiencyAmbiguous { gap_ratio: f64 },
    #[error("no nonzero decay eigenvalue above threshold {threshold:.3e}")]
    NoNonzeroEigenvalue { threshold: f64 },
    #[error("time step too large: dt·||L|| = {0:.3} > 0.1")]
    StepTooLarge(f64),
    #[error("state leaks into the truncation edge: tail occupation {tail:.3e} > 1e-6")]
    CutoffInadequate { tail: f64 },
    #[error("Wigner transform imaginary residue {residue:.3e} exceeds the noise budget")]
    TransformResidue { residue: f64 },
    #[error("grid too coarse for the finite-difference residual: {0}")]
    GridTooCoarse(String),
    #[error("eigendecomposition failed: {0}")]
    EigenFailed(String),
}

/// Annihilation operator on the truncated space, a[n−1, n] = √n.
pub fn annihilation(n: usize) -> Array2<Complex64> {
    let mut a = Array2::zeros((n, n));
    for m in 1..n {
        a[[m - 1, m]] = Complex64::new((m as f64).sqrt(), 0.0);
    }
    a
}

fn dagger(m: &Array2<Complex64>) -> Array2<Complex64> {
    m.t().mapv(|v| v.conj())
}

/// H = −Δ a†a + (iG/2)(a†² − a²).
pub fn build_hamiltonian(params: &ModelParams, n: usize) -> Result<Array2<Complex64>, FockError> {
    if n < 4 {
        return Err(FockError::CutoffTooSmall(n));
    }
    let a = annihilation(n);
    let ad = dagger(&a);
    let num = ad.dot(&a);
    let a2 = a.dot(&a);
    let ad2 = ad.dot(&ad);
    let half_ig = Complex64::new(0.0, 0.5 * params.drive);
    Ok(num.mapv(|v| -params.detuning * v) + (ad2 - a2).mapv(|v| half_ig * v))
}

/// Dense Liouvillian acting on column-stacked density matrices.
#[derive(Debug, Clone)]
pub struct Superoperator {
    /// Fock cutoff N; the matrix is N²×N².
    pub fock_dim: usize,
    pub matrix: Array2<Complex64>,
}

/// Default memory budget: an 80-cutoff superoperator (6400² complex entries).
const SUPEROP_BYTE_LIMIT: usize = 6400 * 6400 * 16;

/// 𝓛 = −i[H,·] + η 𝒟_{a²} in the column-stacking convention.
pub fn build_liouvillian(params: &ModelParams, n: usize) -> Result<Superoperator, FockError> {
    if n < 4 {
        return Err(FockError::CutoffTooSmall(n));
    }
    let required = n * n * n * n * std::mem::size_of::<Complex64>();
    if required > SUPEROP_BYTE_LIMIT {
        return Err(FockError::MemoryBudgetExceeded { required, limit: SUPEROP_BYTE_LIMIT });
    }
    let h = build_hamiltonian(params, n)?;
    let a = annihilation(n);
    let a2 = a.dot(&a);
    let m_op = dagger(&a2).dot(&a2); // a†²a²
    let dim = n * n;
    let mut sup = Array2::zeros((dim, dim));
    let i = Complex64::i();
    let eta = params.eta;
    for k in 0..n {
        for j in 0..n {
            let row = j + n * k;
            for kp in 0..n {
                for jp in 0..n {
                    let col = jp + n * kp;
                    let mut v = Complex64::new(0.0, 0.0);
                    if k == kp {
                        v -= i * h[[j, jp]];
                        v -= 0.5 * eta * m_op[[j, jp]];
                    }
                    if j == jp {
                        v += i * h[[kp, k]];
                        v -= 0.5 * eta * m_op[[kp, k]];
                    }
                    v += eta * a2[[k, kp]].conj() * a2[[j, jp]];
                    if v != Complex64::new(0.0, 0.0) {
                        sup[[row, col]] = v;
                    }
                }
            }
        }
    }
    Ok(Superoperator { fock_dim: n, matrix: sup })
}

impl Superoperator {
    pub fn dim(&self) -> usize {
        self.fock_dim * self.fock_dim
    }

    /// Row-sum (infinity) norm.
    pub fn inf_norm(&self) -> f64 {
        let mut best = 0.0f64;
        for row in self.matrix.rows() {
            let s: f64 = row.iter().map(|v| v.norm()).sum();
            best = best.max(s);
        }
        best
    }

    /// Apply to a vectorized density matrix.
    pub fn apply_vec(&self, v: &Array1<Complex64>) -> Array1<Complex64> {
        self.matrix.dot(v)
    }

    /// Apply to a density matrix.
    pub fn apply(&self, rho: &Array2<Complex64>) -> Array2<Complex64> {
        unvectorize(&self.apply_vec(&vectorize(rho)), self.fock_dim)
    }
}

/// vec(ρ)[j + N·k] = ρ[j,k] (column stacking).
pub fn vectorize(rho: &Array2<Complex64>) -> Array1<Complex64> {
    let n = rho.nrows();
    let mut v = Array1::zeros(n * n);
    for k in 0..n {
        for j in 0..n {
            v[j + n * k] = rho[[j, k]];
        }
    }
    v
}

pub fn unvectorize(v: &Array1<Complex64>, n: usize) -> Array2<Complex64> {
    let mut rho = Array2::zeros((n, n));
    for k in 0..n {
        for j in 0..n {
            rho[[j, k]] = v[j + n * k];
        }
    }
    rho
}

/// (bra parity, ket parity) sector label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ParitySector {
    EvenEven,
    OddOdd,
    EvenOdd,
    OddEven,
}

impl ParitySector {
    pub const ALL: [ParitySector; 4] =
        [ParitySector::EvenEven, ParitySector::OddOdd, ParitySector::EvenOdd, ParitySector::OddEven];

    pub fn label(&self) -> &'static str {
        match self {
            ParitySector::EvenEven => "even-even",
            ParitySector::OddOdd => "odd-odd",
            ParitySector::EvenOdd => "even-odd",
            ParitySector::OddEven => "odd-even",
        }
    }

    fn parities(&self) -> (usize, usize) {
        match self {
            ParitySector::EvenEven => (0, 0),
            ParitySector::OddOdd => (1, 1),
            ParitySector::EvenOdd => (0, 1),
            ParitySector::OddEven => (1, 0),
        }
    }

    pub fn is_diagonal(&self) -> bool {
        matches!(self, ParitySector::EvenEven | ParitySector::OddOdd)
    }
}

/// One parity block of the Liouvillian.
#[derive(Debug, Clone)]
pub struct ParityBlock {
    pub sector: ParitySector,
    /// Vectorized indices (into the full superoperator) of this block.
    pub indices: Vec<usize>,
    pub matrix: Array2<Complex64>,
}

/// Split the Liouvillian into its four exact parity blocks. Also returns the
/// largest |entry| found between different sectors (identically zero for the
/// two-photon model; reported so callers can assert it).
pub fn parity_project(sup: &Superoperator) -> (Vec<ParityBlock>, f64) {
    let n = sup.fock_dim;
    let mut blocks = Vec::with_capacity(4);
    let mut index_sets = Vec::with_capacity(4);
    for sector in ParitySector::ALL {
        let (pj, pk) = sector.parities();
        let mut idx = Vec::new();
        for k in 0..n {
            for j in 0..n {
                if j % 2 == pj && k % 2 == pk {
                    idx.push(j + n * k);
                }
            }
        }
        index_sets.push((sector, idx));
    }
    let mut sector_of = vec![0usize; n * n];
    for (s, (_, idx)) in index_sets.iter().enumerate() {
        for &m in idx {
            sector_of[m] = s;
        }
    }
    let mut off_block_max = 0.0f64;
    for (row, line) in sup.matrix.rows().into_iter().enumerate() {
        for (col, v) in line.iter().enumerate() {
            if sector_of[row] != sector_of[col] {
                off_block_max = off_block_max.max(v.norm());
            }
        }
    }
    for (sector, idx) in index_sets {
        let d = idx.len();
        let mut m = Array2::zeros((d, d));
        for (r, &mr) in idx.iter().enumerate() {
            for (c, &mc) in idx.iter().enumerate() {
                m[[r, c]] = sup.matrix[[mr, mc]];
            }
        }
        blocks.push(ParityBlock { sector, indices: idx, matrix: m });
    }
    (blocks, off_block_max)
}

/// Density matrix with its standard diagnostics.
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    pub matrix: Array2<Complex64>,
}

impl DensityMatrix {
    pub fn vacuum(n: usize) -> Self {
        let mut m = Array2::zeros((n, n));
        m[[0, 0]] = Complex64::new(1.0, 0.0);
        DensityMatrix { matrix: m }
    }

    pub fn fock(n: usize, level: usize) -> Self {
        let mut m = Array2::zeros((n, n));
        m[[level, level]] = Complex64::new(1.0, 0.0);
        DensityMatrix { matrix: m }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn trace(&self) -> Complex64 {
        self.matrix.diag().sum()
    }

    pub fn hermiticity_residual(&self) -> f64 {
        let d = &self.matrix - &dagger(&self.matrix);
        frobenius(&d) / frobenius(&self.matrix).max(1e-300)
    }

    pub fn purity(&self) -> f64 {
        self.matrix.dot(&self.matrix).diag().sum().re
    }

    /// Population in the top `levels` Fock states.
    pub fn tail_occupation(&self, levels: usize) -> f64 {
        let n = self.dim();
        (n.saturating_sub(levels)..n).map(|m| self.matrix[[m, m]].re).sum()
    }

    /// Smallest eigenvalue of the Hermitian part.
    pub fn min_eigenvalue(&self) -> Result<f64, FockError> {
        let n = self.dim();
        let herm = (&self.matrix + &dagger(&self.matrix)).mapv(|v| 0.5 * v);
        let m = to_faer(&herm);
        let evd = m
            .self_adjoint_eigen(faer::Side::Lower)
            .map_err(|e| FockError::EigenFailed(format!("{e:?}")))?;
        let mut min = f64::INFINITY;
        for k in 0..n {
            min = min.min(evd.S()[k].re);
        }
        Ok(min)
    }
}

pub fn frobenius(m: &Array2<Complex64>) -> f64 {
    m.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
}

pub fn to_faer(m: &Array2<Complex64>) -> Mat<Complex64> {
    Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[[i, j]])
}

/// Stationary density matrix of one diagonal parity block, with the kernel
/// extraction diagnostics.
#[derive(Debug, Clone)]
pub struct SteadyState {
    pub sector: ParitySector,
    pub rho: DensityMatrix,
    /// ‖𝓛 vec(ρ)‖ / (‖𝓛‖_F ‖vec(ρ)‖).
    pub residual: f64,
    /// Ratio of the second-smallest to smallest singular value.
    pub kernel_gap: f64,
}

/// Kernel basis of the diagonal parity blocks, as physical density matrices.
///
/// Uses an SVD per block; the kernel must be separated from the rest of the
/// spectrum by a factor ≥ 1e3 in singular value, otherwise the extraction is
/// ambiguous.
pub fn steady_states(sup: &Superoperator) -> Result<Vec<SteadyState>, FockError> {
    let (blocks, _) = parity_project(sup);
    let mut out = Vec::new();
    for block in blocks.iter().filter(|b| b.sector.is_diagonal()) {
        out.push(steady_state_of_block(sup.fock_dim, block)?);
    }
    Ok(out)
}

fn steady_state_of_block(n: usize, block: &ParityBlock) -> Result<SteadyState, FockError> {
    let d = block.matrix.nrows();
    let m = to_faer(&block.matrix);
    let svd = m.svd().map_err(|e| FockError::EigenFailed(format!("{e:?}")))?;
    let smallest = svd.S()[d - 1].re;
    let second = svd.S()[d - 2].re;
    let gap_ratio = second / smallest.max(1e-300);
    if gap_ratio < 1e3 {
        return Err(FockError::RankDeficiencyAmbiguous { gap_ratio });
    }
    // kernel vector = last right singular vector
    let v = svd.V();
    let mut rho = Array2::zeros((n, n));
    for (r, &m_idx) in block.indices.iter().enumerate() {
        let j = m_idx % n;
        let k = m_idx / n;
        rho[[j, k]] = v[(r, d - 1)];
    }
    // physical representative: hermitize and fix the trace
    let mut rho = (&rho + &dagger(&rho)).mapv(|x| 0.5 * x);
    let tr = rho.diag().sum();
    if tr.norm() < 1e-14 {
        return Err(FockError::RankDeficiencyAmbiguous { gap_ratio });
    }
    rho.mapv_inplace(|x| x / tr);
    // residual within the block
    let vec_rho = vectorize(&rho);
    let mut block_vec = Array1::zeros(d);
    for (r, &m_idx) in block.indices.iter().enumerate() {
        block_vec[r] = vec_rho[m_idx];
    }
    let resid_vec = block.matrix.dot(&block_vec);
    let resid = resid_vec.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
        / (frobenius(&block.matrix) * block_vec.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt())
            .max(1e-300);
    Ok(SteadyState {
        sector: block.sector,
        rho: DensityMatrix { matrix: rho },
        residual: resid,
        kernel_gap: gap_ratio,
    })
}

/// Eigenvalues of one parity block.
pub fn block_eigenvalues(block: &ParityBlock) -> Result<Vec<Complex64>, FockError> {
    let m = to_faer(&block.matrix);
    m.eigenvalues().map_err(|e| FockError::EigenFailed(format!("{e:?}")))
}

/// Slowest nonzero decay rate min{|Re λ| : |Re λ| > threshold} of a spectrum.
///
/// The zero threshold is 1e3 × the kernel residual scale ε_mach‖𝓛‖.
pub fn decay_rate(eigenvalues: &[Complex64], matrix_norm: f64) -> Result<f64, FockError> {
    let threshold = 1e3 * f64::EPSILON * matrix_norm;
    eigenvalues
        .iter()
        .map(|l| l.re.abs())
        .filter(|r| *r > threshold)
        .min_by(|a, b| a.partial_cmp(b).unwrap())
        .ok_or(FockError::NoNonzeroEigenvalue { threshold })
}

/// Fixed-step RK4 integration of ∂_t ρ = 𝓛ρ up to time `t_final`.
///
/// Requires dt·‖𝓛‖ ≤ 0.1. Trace is preserved automatically (the trace
/// functional is a left null vector of 𝓛).
pub fn evolve(
    rho0: &DensityMatrix,
    sup: &Superoperator,
    t_final: f64,
    dt: f64,
) -> Result<DensityMatrix, FockError> {
    let norm = sup.inf_norm();
    if dt * norm > 0.1 {
        return Err(FockError::StepTooLarge(dt * norm));
    }
    let steps = (t_final / dt).ceil().max(1.0) as usize;
    let h = t_final / steps as f64;
    let mut y = vectorize(&rho0.matrix);
    for _ in 0..steps {
        let k1 = sup.apply_vec(&y);
        let k2 = sup.apply_vec(&(&y + &k1.mapv(|v| v * 0.5 * h)));
        let k3 = sup.apply_vec(&(&y + &k2.mapv(|v| v * 0.5 * h)));
        let k4 = sup.apply_vec(&(&y + &k3.mapv(|v| v * h)));
        y = &y + &(k1 + k2.mapv(|v| 2.0 * v) + k3.mapv(|v| 2.0 * v) + k4).mapv(|v| v * (h / 6.0));
    }
    Ok(DensityMatrix { matrix: unvectorize(&y, sup.fock_dim) })
}

/// Propagate through the full eigendecomposition, ρ(t) = U e^{Λt} U⁻¹ vec(ρ₀).
/// Exact in time; preferable for long horizons when the spectrum is wanted
/// anyway.
pub fn evolve_spectral(
    rho0: &DensityMatrix,
    sup: &Superoperator,
    t_final: f64,
) -> Result<DensityMatrix, FockError> {
    let dim = sup.dim();
    let m = to_faer(&sup.matrix);
    let evd = m.eigen().map_err(|e| FockError::EigenFailed(format!("{e:?}")))?;
    let u = evd.U();
    let lam = evd.S();
    let v = vectorize(&rho0.matrix);
    let mut rhs = Mat::from_fn(dim, 1, |i, _| v[i]);
    let lu = u.partial_piv_lu();
    use faer::linalg::solvers::Solve;
    let coeffs = lu.solve(&mut rhs);
    let mut out = Array1::zeros(dim);
    for k in 0..dim {
        let w = (lam[k] * t_final).exp() * coeffs[(k, 0)];
        for i in 0..dim {
            out[i] += u[(i, k)] * w;
        }
    }
    Ok(DensityMatrix { matrix: unvectorize(&out, sup.fock_dim) })
}
