//! Pure and mixed states, validation, and unitarily invariant sampling.
//!
//! Pure states are drawn as normalized vectors of i.i.d. standard complex
//! Gaussians. Rank-k mixed states come from the induced measure realized by
//! the Ginibre construction `G·G†/Tr(G·G†)` with `G` a `dim × k` Gaussian
//! matrix.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, HermitianMatrix, C64};

pub const NORMALIZATION_TOL: f64 = 1e-12;
pub const TRACE_TOL: f64 = 1e-10;
pub const POSITIVITY_TOL: f64 = 1e-10;
pub const RANK_TOL: f64 = 1e-10;

/// Name of the generator behind [`RandomSeed::rng`], recorded in experiment
/// metadata.
pub const PRNG_IDENTITY: &str = "rand_chacha::ChaCha8Rng (seed_from_u64, per-sample stream)";

/// Normalized state vector.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    amplitudes: Vec<C64>,
}

impl PureState {
    pub fn new(amplitudes: Vec<C64>) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(Error::InvalidData("empty amplitude vector".into()));
        }
        let norm_sq: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if !norm_sq.is_finite() || (norm_sq - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::NotNormalized { norm_sq });
        }
        Ok(Self { amplitudes })
    }

    /// Normalizes the given (nonzero) vector.
    pub fn normalized(mut amplitudes: Vec<C64>) -> Result<Self> {
        let norm: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::NotNormalized { norm_sq: norm * norm });
        }
        for a in &mut amplitudes {
            *a /= norm;
        }
        Ok(Self { amplitudes })
    }

    /// `|k⟩` in dimension `dim`.
    pub fn basis(dim: usize, k: usize) -> Self {
        assert!(k < dim, "basis index {k} out of range for dimension {dim}");
        let mut amplitudes = vec![C64::new(0.0, 0.0); dim];
        amplitudes[k] = C64::new(1.0, 0.0);
        Self { amplitudes }
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn to_density(&self) -> DensityMatrix {
        density_from_pure(self)
    }
}

/// Positive semidefinite, unit-trace Hermitian matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    matrix: HermitianMatrix,
    eigenvalues: Vec<f64>,
}

impl DensityMatrix {
    /// Validates trace and positivity.
    pub fn new(matrix: HermitianMatrix) -> Result<Self> {
        let eigenvalues = matrix.eigenvalues()?;
        let trace = matrix.trace();
        if (trace - 1.0).abs() > TRACE_TOL {
            return Err(Error::InvalidState(format!("trace is {trace}, not 1")));
        }
        if eigenvalues[0] < -POSITIVITY_TOL {
            return Err(Error::InvalidState(format!("negative eigenvalue {:e}", eigenvalues[0])));
        }
        Ok(Self { matrix, eigenvalues })
    }

    pub fn from_matrix(m: ComplexMatrix) -> Result<Self> {
        Self::new(HermitianMatrix::new(m)?)
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Result<Self> {
        Self::new(HermitianMatrix::from_real_diagonal(diag))
    }

    /// `I/d`.
    pub fn maximally_mixed(dim: usize) -> Self {
        let m = HermitianMatrix::from_real_diagonal(&vec![1.0 / dim as f64; dim]);
        Self {
            matrix: m,
            eigenvalues: vec![1.0 / dim as f64; dim],
        }
    }

    /// Builds a state from a Hermitian matrix that is PSD and unit-trace up to
    /// rounding: negative eigenvalues are clipped and the trace renormalized.
    pub(crate) fn from_nearly_valid(matrix: &HermitianMatrix) -> Result<Self> {
        let eig = matrix.eigh()?;
        let clipped = eig.reconstruct_with(|x| x.max(0.0));
        let tr = clipped.trace();
        if tr.is_nan() || tr <= 0.0 {
            return Err(Error::InvalidState("zero matrix after clipping".into()));
        }
        let m = clipped.scale(1.0 / tr);
        let eigenvalues = m.eigenvalues()?;
        Ok(Self { matrix: m, eigenvalues })
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn hermitian(&self) -> &HermitianMatrix {
        &self.matrix
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        self.matrix.matrix()
    }

    /// Ascending.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// Number of eigenvalues above [`RANK_TOL`].
    pub fn rank(&self) -> usize {
        self.eigenvalues.iter().filter(|&&l| l > RANK_TOL).count()
    }

    pub fn purity(&self) -> f64 {
        self.eigenvalues.iter().map(|l| l * l).sum()
    }

    /// Real diagonal in the computational (energy) basis.
    pub fn populations(&self) -> Vec<f64> {
        self.matrix().diagonal().iter().map(|z| z.re).collect()
    }

    /// `λρ + (1−λ)σ`.
    pub fn mix(&self, other: &DensityMatrix, lambda: f64) -> Result<DensityMatrix> {
        let a = self.matrix.scale(lambda);
        let b = other.matrix.scale(1.0 - lambda);
        DensityMatrix::new(a.try_add(&b)?)
    }

    /// `UρU†`.
    pub fn conjugate_by(&self, u: &ComplexMatrix) -> Result<DensityMatrix> {
        DensityMatrix::from_nearly_valid(&self.matrix.conjugate_by(u)?)
    }
}

/// `|ψ⟩⟨ψ|`.
pub fn density_from_pure(psi: &PureState) -> DensityMatrix {
    let a = psi.amplitudes();
    let m = HermitianMatrix::new_unchecked(ComplexMatrix::outer(a, a));
    let mut eigenvalues = vec![0.0; a.len()];
    *eigenvalues.last_mut().unwrap() = 1.0;
    DensityMatrix { matrix: m, eigenvalues }
}

/// Diagnostic for a candidate density matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub hermiticity_defect: f64,
    pub trace_defect: f64,
    pub min_eigenvalue: f64,
    pub valid: bool,
}

/// Reports Hermiticity defect, trace defect and minimum eigenvalue of an
/// arbitrary square matrix. The eigenvalue is taken on the Hermitian part.
pub fn validate(m: &ComplexMatrix) -> ValidationReport {
    let hermiticity_defect = m.hermiticity_defect();
    let trace = m.trace();
    let trace_defect = (trace - C64::new(1.0, 0.0)).norm();
    let min_eigenvalue = HermitianMatrix::new_unchecked(m.clone())
        .eigenvalues()
        .map(|e| e[0])
        .unwrap_or(f64::NAN);
    let valid = hermiticity_defect <= crate::linalg::HERMITIAN_SILENT_TOL * (1.0 + m.max_abs())
        && trace_defect <= TRACE_TOL
        && min_eigenvalue >= -POSITIVITY_TOL;
    ValidationReport {
        hermiticity_defect,
        trace_defect,
        min_eigenvalue,
        valid,
    }
}

/// Reproducible seed; `stream` derives independent per-sample generators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RandomSeed(pub u64);

impl RandomSeed {
    pub fn rng(self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.0)
    }

    /// Generator for an independent stream (e.g. a worker or sample index).
    pub fn stream(self, index: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.0);
        rng.set_stream(index);
        rng
    }
}

pub(crate) fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im)
}

/// Haar-random pure state in dimension `dim`.
pub fn sample_haar_pure<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> PureState {
    assert!(dim >= 1);
    loop {
        let v: Vec<C64> = (0..dim).map(|_| complex_gaussian(rng)).collect();
        if let Ok(psi) = PureState::normalized(v) {
            return psi;
        }
    }
}

/// Random state of the given rank from the induced measure
/// (`dim × rank` Ginibre matrix).
pub fn sample_induced_mixed<R: Rng + ?Sized>(dim: usize, rank: usize, rng: &mut R) -> Result<DensityMatrix> {
    if rank == 0 || rank > dim {
        return Err(Error::InvalidRank { rank, dim });
    }
    let g: Vec<C64> = (0..dim * rank).map(|_| complex_gaussian(rng)).collect();
    let mut m = ComplexMatrix::zeros(dim);
    for i in 0..dim {
        for j in 0..dim {
            let mut acc = C64::new(0.0, 0.0);
            for k in 0..rank {
                acc += g[i * rank + k] * g[j * rank + k].conj();
            }
            m[(i, j)] = acc;
        }
    }
    let tr = m.trace().re;
    let h = HermitianMatrix::new_unchecked(m.scale_real(1.0 / tr));
    let eigenvalues = h.eigenvalues()?;
    Ok(DensityMatrix { matrix: h, eigenvalues })
}

/// Rank 1 goes through the pure-state sampler; higher ranks through the
/// induced measure.
pub fn sample_state_of_rank<R: Rng + ?Sized>(dim: usize, rank: usize, rng: &mut R) -> Result<DensityMatrix> {
    if rank == 1 {
        Ok(density_from_pure(&sample_haar_pure(dim, rng)))
    } else {
        sample_induced_mixed(dim, rank, rng)
    }
}

/// Haar-random unitary: eigenvectors of a random Hermitian matrix with
/// random column phases.
pub fn sample_unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(dim);
    for i in 0..dim {
        for j in 0..dim {
            m[(i, j)] = complex_gaussian(rng);
        }
    }
    let h = HermitianMatrix::new_unchecked(m);
    let v = h.eigh().expect("eigh of random Hermitian").eigenvectors;
    let phases: Vec<C64> = (0..dim)
        .map(|_| C64::from_polar(1.0, rng.random_range(0.0..std::f64::consts::TAU)))
        .collect();
    &v * &ComplexMatrix::from_diagonal(&phases)
}
