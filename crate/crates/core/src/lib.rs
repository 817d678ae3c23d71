//! Particleness of finite-dimensional quantum states.
//!
//! A `d`-level system with Hamiltonian `H = Σ E_n |n⟩⟨n|` shows a particle
//! aspect when its mean energy exceeds a detector threshold. States at or
//! below the threshold are free. This crate provides:
//!
//! * [`resource`]: the free set, edge states, the complete witness
//!   `H − E_th·I`, and closed-form qutrit tests;
//! * [`kraus`]: verification of free operations given as Kraus sets;
//! * [`measures`]: trace-norm particleness and coherence computed by a
//!   certified interior-point solver ([`sdp`]), plus analytic bounds;
//! * [`oracle`]: a stochastic search used to cross-check the solver;
//! * [`experiments`]: the rank-resolved Haar scan of particleness against
//!   coherence and the complementarity line `P + 1.3·C ≤ 1.8`.
//!
//! Energies are in units of ħω; the default spectrum is `E_n = n` with unit
//! threshold.

pub mod error;
pub mod experiments;
pub mod io;
pub mod kraus;
pub mod linalg;
pub mod measures;
pub mod oracle;
pub mod resource;
pub mod sdp;
pub mod states;

pub use error::{Error, Result};
pub use kraus::{FreeOpVerdict, KrausSet, Verdict};
pub use linalg::{trace_norm, ComplexMatrix, EigenDecomposition, HermitianMatrix, C64};
pub use measures::{coherence_trace, particleness_trace, BoundReport, MeasureResult};
pub use resource::{classify, energy, witness, Classification, Label, SystemSpec};
pub use states::{density_from_pure, DensityMatrix, PureState, RandomSeed};
