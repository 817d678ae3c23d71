//! Free, edge and resourceful states for a system with Hamiltonian
//! `H = Σ E_n |n⟩⟨n|` facing a detector threshold `E_th`.
//!
//! All energies are in units of ħω. A state is free when `Tr(ρH) ≤ E_th`,
//! so the free set is the state space cut by a single half-space and the
//! operator `W = H − E_th·I` is a complete witness.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::HermitianMatrix;
use crate::states::{DensityMatrix, PureState};

/// Absolute tolerance on the energy margin that separates edge states from
/// interior and resourceful ones.
pub const EPS_EDGE: f64 = 1e-9;

/// Energy spectrum of the incoming system and the detector threshold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemSpec {
    pub dim: usize,
    pub level_energies: Vec<f64>,
    pub threshold: f64,
    /// Count edge states as resourceful instead of free.
    #[serde(default)]
    pub strict_inequality: bool,
}

impl SystemSpec {
    /// Equally spaced levels `E_n = n` with unit threshold.
    pub fn zero_detuning(dim: usize) -> Self {
        Self {
            dim,
            level_energies: (0..dim).map(|n| n as f64).collect(),
            threshold: 1.0,
            strict_inequality: false,
        }
    }

    pub fn new(level_energies: Vec<f64>, threshold: f64) -> Result<Self> {
        let spec = Self {
            dim: level_energies.len(),
            level_energies,
            threshold,
            strict_inequality: false,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim == 0 || self.level_energies.len() != self.dim {
            return Err(Error::InvalidSpec(format!(
                "dim {} does not match {} level energies",
                self.dim,
                self.level_energies.len()
            )));
        }
        if self.level_energies[0] != 0.0 {
            return Err(Error::InvalidSpec("ground energy must be 0".into()));
        }
        if self.level_energies.iter().any(|e| !e.is_finite()) || self.level_energies.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::InvalidSpec(
                "level energies must be finite and non-decreasing".into(),
            ));
        }
        if !(self.threshold > 0.0 && self.threshold.is_finite()) {
            return Err(Error::InvalidSpec("threshold must be positive".into()));
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let spec: Self = serde_json::from_str(text)?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("spec serializes")
    }

    /// True for the equally spaced spectrum `0, 1, …, d−1` with unit threshold.
    pub fn is_zero_detuning(&self) -> bool {
        self.threshold == 1.0 && self.level_energies.iter().enumerate().all(|(n, &e)| e == n as f64)
    }

    pub fn hamiltonian(&self) -> HermitianMatrix {
        HermitianMatrix::from_real_diagonal(&self.level_energies)
    }

    pub fn max_energy(&self) -> f64 {
        *self.level_energies.last().expect("non-empty spectrum")
    }

    pub(crate) fn check_dim(&self, dim: usize) -> Result<()> {
        if dim != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: dim,
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Label {
    FreeInterior,
    Edge,
    Resourceful,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Classification {
    pub label: Label,
    pub energy: f64,
    /// `energy − threshold`.
    pub margin: f64,
    pub strict_inequality: bool,
}

impl Classification {
    /// Membership in the free set under the edge convention of `spec`.
    pub fn is_free(&self) -> bool {
        match self.label {
            Label::FreeInterior => true,
            Label::Edge => !self.strict_inequality,
            Label::Resourceful => false,
        }
    }
}

/// `Tr(ρH)`.
pub fn energy(rho: &DensityMatrix, spec: &SystemSpec) -> Result<f64> {
    spec.check_dim(rho.dim())?;
    Ok(rho
        .populations()
        .iter()
        .zip(&spec.level_energies)
        .map(|(p, e)| p * e)
        .sum())
}

pub fn classify(rho: &DensityMatrix, spec: &SystemSpec) -> Result<Classification> {
    classify_with(rho, spec, EPS_EDGE)
}

pub fn classify_with(rho: &DensityMatrix, spec: &SystemSpec, eps_edge: f64) -> Result<Classification> {
    let e = energy(rho, spec)?;
    let margin = e - spec.threshold;
    let label = if margin < -eps_edge {
        Label::FreeInterior
    } else if margin <= eps_edge {
        Label::Edge
    } else {
        Label::Resourceful
    };
    Ok(Classification {
        label,
        energy: e,
        margin,
        strict_inequality: spec.strict_inequality,
    })
}

/// `W = H − E_th·I`; `Tr(Wρ) > 0` exactly on resourceful states.
pub fn witness(spec: &SystemSpec) -> HermitianMatrix {
    let diag: Vec<f64> = spec.level_energies.iter().map(|e| e - spec.threshold).collect();
    HermitianMatrix::from_real_diagonal(&diag)
}

/// `Tr(Wρ)` for the complete witness.
pub fn witness_value(rho: &DensityMatrix, spec: &SystemSpec) -> Result<f64> {
    Ok(energy(rho, spec)? - spec.threshold)
}

/// Upper bound on `max_{σ ∈ F_S} Tr(Gσ)` with the multiplier that attains it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SupportBound {
    pub value: f64,
    pub multiplier: f64,
}

/// Support function of the free set: `max_{σ ∈ F_S} Tr(Gσ)`.
///
/// Computed through the one-dimensional dual
/// `min_{λ ≥ 0} λ_max(G − λ(H − E_th·I))`, which is convex in `λ` and exact
/// because `|0⟩⟨0|` is strictly feasible. Any `λ` gives a valid upper bound,
/// so the returned value never underestimates the support.
pub fn free_set_support(g: &HermitianMatrix, spec: &SystemSpec) -> Result<SupportBound> {
    spec.check_dim(g.dim())?;
    let w = witness(spec);
    let eval = |lam: f64| -> Result<f64> {
        let shifted = g.try_sub(&w.scale(lam))?;
        Ok(shifted.eigh()?.max())
    };
    // g(λ) ≥ λ·E_th − ‖G‖, so the minimizer lies below (λ_max(G) + ‖G‖)/E_th.
    let g_norm = crate::linalg::operator_norm(g)?;
    let mut lo = 0.0;
    let mut hi = 2.0 * g_norm / spec.threshold + 1.0;
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    let mut a = hi - phi * (hi - lo);
    let mut b = lo + phi * (hi - lo);
    let mut fa = eval(a)?;
    let mut fb = eval(b)?;
    for _ in 0..200 {
        if hi - lo <= 1e-13 * (1.0 + hi) {
            break;
        }
        if fa <= fb {
            hi = b;
            b = a;
            fb = fa;
            a = hi - phi * (hi - lo);
            fa = eval(a)?;
        } else {
            lo = a;
            a = b;
            fa = fb;
            b = lo + phi * (hi - lo);
            fb = eval(b)?;
        }
    }
    let mut best = SupportBound {
        value: f64::INFINITY,
        multiplier: 0.0,
    };
    for lam in [0.0, lo, 0.5 * (lo + hi), hi, a, b] {
        let v = eval(lam)?;
        if v < best.value {
            best = SupportBound {
                value: v,
                multiplier: lam,
            };
        }
    }
    Ok(best)
}

/// Maps a state into the free set: if `Tr(σH) = E > E_th`, mixes it toward
/// the ground state, `σ ← tσ + (1−t)|0⟩⟨0|` with `t = E_th/E`, which lands
/// exactly on the edge. Free inputs are returned unchanged.
pub fn project_into_free_set(sigma: &DensityMatrix, spec: &SystemSpec) -> Result<DensityMatrix> {
    let e = energy(sigma, spec)?;
    if e <= spec.threshold {
        return Ok(sigma.clone());
    }
    let t = spec.threshold / e;
    let mut m = sigma.matrix().scale_real(t);
    m[(0, 0)] += crate::linalg::C64::new(1.0 - t, 0.0);
    DensityMatrix::from_nearly_valid(&HermitianMatrix::new_unchecked(m))
}

fn require_qutrit(dim: usize) -> Result<()> {
    if dim != 3 {
        return Err(Error::WrongDimension { expected: 3, got: dim });
    }
    Ok(())
}

/// `|c| ≤ |a|` for `ψ = a|0⟩ + b|1⟩ + c|2⟩` under the default qutrit spectrum.
/// Equality (within [`EPS_EDGE`] on the energy) counts as free.
pub fn qutrit_pure_is_free(psi: &PureState) -> Result<bool> {
    require_qutrit(psi.dim())?;
    let a = psi.amplitudes()[0].norm_sqr();
    let c = psi.amplitudes()[2].norm_sqr();
    // Energy − 1 = |b|² + 2|c|² − 1 = |c|² − |a|².
    Ok(c - a <= EPS_EDGE)
}

/// `ρ₁₁ + 2ρ₂₂ ≤ 1` in the energy eigenbasis.
pub fn qutrit_mixed_is_free(rho: &DensityMatrix) -> Result<bool> {
    require_qutrit(rho.dim())?;
    let p = rho.populations();
    Ok(p[1] + 2.0 * p[2] <= 1.0 + EPS_EDGE)
}
