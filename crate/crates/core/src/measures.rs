//! Trace-norm particleness and coherence, and the analytic bounds around them.
//!
//! Both measures are `min ‖ρ − σ‖₁` over a convex set of states: the free
//! set for particleness, the diagonal states for coherence. They are solved
//! exactly as semidefinite programs over the blocks `(P, Q, σ)`:
//!
//! ```text
//! minimize Tr P + Tr Q   subject to   P − Q + σ = ρ,  P, Q ⪰ 0,  σ in the set
//! ```
//!
//! The reported value is the trace distance to a strictly feasible rounding
//! of the solver's `σ`, and the reported gap is that value minus a lower
//! bound built from the dual variable `W` (clipped to `‖W‖∞ ≤ 1`):
//! `‖ρ − σ‖₁ ≥ Tr(Wρ) − max_{σ' in set} Tr(Wσ')`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{trace_norm, ComplexMatrix, HermitianMatrix};
use crate::oracle::{self, OracleOptions};
use crate::resource::{self, SystemSpec, EPS_EDGE};
use crate::sdp::{hermitian_basis, BlockSdp, Constraint, SdpOptions};
use crate::states::{density_from_pure, DensityMatrix, PureState, RandomSeed};

/// Certified gaps above this are treated as a solver failure.
pub const MAX_ACCEPTED_GAP: f64 = 1e-6;
/// Off-diagonal magnitude below which a state counts as incoherent.
pub const INCOHERENT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    InteriorPoint,
    /// Input already in the target set; value is exactly zero.
    Trivial,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::InteriorPoint => "interior-point",
            Method::Trivial => "trivial",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Certificate {
    pub method: Method,
    /// Value minus the dual lower bound.
    pub gap: f64,
    pub lower_bound: f64,
    pub iterations: usize,
    /// `|value − oracle value|` when a cross-check ran.
    pub oracle_gap: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeasureResult {
    pub value: f64,
    /// Closest free (resp. incoherent) state found.
    pub optimizer: DensityMatrix,
    pub certificate: Certificate,
}

/// Wire form of a [`MeasureResult`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasureResultJson {
    pub value: f64,
    pub gap: f64,
    pub method: String,
    /// Row-major `[re, im]` entries of the optimizer.
    pub optimizer: Vec<[f64; 2]>,
}

impl MeasureResult {
    pub fn to_json(&self) -> MeasureResultJson {
        MeasureResultJson {
            value: self.value,
            gap: self.certificate.gap,
            method: self.certificate.method.as_str().to_string(),
            optimizer: flatten(self.optimizer.matrix()),
        }
    }
}

pub(crate) fn flatten(m: &ComplexMatrix) -> Vec<[f64; 2]> {
    m.as_slice().iter().map(|z| [z.re, z.im]).collect()
}

#[derive(Debug, Clone, Copy, Default)]
pub struct MeasureOptions {
    pub sdp: SdpOptions,
    /// Run the stochastic oracle and record the disagreement.
    pub cross_check: Option<OracleOptions>,
}

impl MeasureOptions {
    /// Solver tolerances scaled from a single target gap.
    pub fn with_tolerance(tol: f64) -> Self {
        Self {
            sdp: SdpOptions {
                gap_tol: tol,
                feas_tol: tol,
                ..SdpOptions::default()
            },
            cross_check: None,
        }
    }
}

/// Distance used by the upper bounds. Only the trace norm is implemented.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Distance {
    #[default]
    TraceNorm,
}

impl Distance {
    pub fn between(self, rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
        match self {
            Distance::TraceNorm => trace_norm(&rho.hermitian().try_sub(sigma.hermitian())?),
        }
    }
}

pub fn particleness_trace(rho: &DensityMatrix, spec: &SystemSpec) -> Result<MeasureResult> {
    particleness_trace_with(rho, spec, &MeasureOptions::default())
}

pub fn particleness_trace_with(rho: &DensityMatrix, spec: &SystemSpec, opts: &MeasureOptions) -> Result<MeasureResult> {
    spec.validate()?;
    spec.check_dim(rho.dim())?;
    if resource::classify(rho, spec)?.margin <= EPS_EDGE {
        return Ok(trivial(rho));
    }
    let d = rho.dim();
    let basis = hermitian_basis(d);
    let h = spec.hamiltonian();

    // Blocks: P, Q, σ (d×d) and the energy slack s ≥ 0.
    let mut constraints: Vec<Constraint> = basis
        .iter()
        .map(|e| Constraint {
            terms: vec![(0, e.clone()), (1, -e), (2, e.clone())],
        })
        .collect();
    let mut rhs: Vec<f64> = basis.iter().map(|e| e.re_trace_product(rho.matrix())).collect();
    constraints.push(Constraint {
        terms: vec![(2, ComplexMatrix::identity(d))],
    });
    rhs.push(1.0);
    constraints.push(Constraint {
        terms: vec![(2, h.matrix().clone()), (3, ComplexMatrix::from_real_diagonal(&[1.0]))],
    });
    rhs.push(spec.threshold);

    let sdp = BlockSdp {
        block_sizes: vec![d, d, d, 1],
        objective: vec![
            ComplexMatrix::identity(d),
            ComplexMatrix::identity(d),
            ComplexMatrix::zeros(d),
            ComplexMatrix::zeros(1),
        ],
        constraints,
        rhs,
    };
    let sol = sdp.solve(&opts.sdp)?;

    let sigma = DensityMatrix::from_nearly_valid(&HermitianMatrix::new_unchecked(sol.x[2].clone()))?;
    let sigma = resource::project_into_free_set(&sigma, spec)?;
    let value = Distance::TraceNorm.between(rho, &sigma)?;

    let w = dual_witness(&basis, &sol.y[..d * d])?;
    let support = resource::free_set_support(&w, spec)?.value;
    let lower = w.inner(rho.hermitian())? - support;

    let mut result = finish(value, lower, sigma, sol.iterations)?;
    if let Some(o) = &opts.cross_check {
        let oracle_value = oracle::particleness_oracle(rho, spec, o)?.value;
        result.certificate.oracle_gap = Some((oracle_value - result.value).abs());
    }
    Ok(result)
}

pub fn coherence_trace(rho: &DensityMatrix) -> Result<MeasureResult> {
    coherence_trace_with(rho, &MeasureOptions::default())
}

pub fn coherence_trace_with(rho: &DensityMatrix, opts: &MeasureOptions) -> Result<MeasureResult> {
    let d = rho.dim();
    let m = rho.matrix();
    let off_diag = (0..d)
        .flat_map(|i| (0..d).filter(move |&j| j != i).map(move |j| (i, j)))
        .map(|(i, j)| m[(i, j)].norm())
        .fold(0.0, f64::max);
    if off_diag <= INCOHERENT_TOL {
        let mut r = trivial(rho);
        r.optimizer = DensityMatrix::from_real_diagonal(&rho.populations())?;
        return Ok(r);
    }
    let basis = hermitian_basis(d);
    let one = ComplexMatrix::from_real_diagonal(&[1.0]);

    // Blocks: P, Q (d×d), then the d diagonal weights t_j ≥ 0.
    let mut constraints: Vec<Constraint> = basis
        .iter()
        .enumerate()
        .map(|(k, e)| {
            let mut terms = vec![(0, e.clone()), (1, -e)];
            if k < d {
                terms.push((2 + k, one.clone()));
            }
            Constraint { terms }
        })
        .collect();
    let mut rhs: Vec<f64> = basis.iter().map(|e| e.re_trace_product(m)).collect();
    constraints.push(Constraint {
        terms: (0..d).map(|j| (2 + j, one.clone())).collect(),
    });
    rhs.push(1.0);

    let mut block_sizes = vec![d, d];
    block_sizes.extend(std::iter::repeat_n(1, d));
    let mut objective = vec![ComplexMatrix::identity(d), ComplexMatrix::identity(d)];
    objective.extend(std::iter::repeat_n(ComplexMatrix::zeros(1), d));
    let sdp = BlockSdp {
        block_sizes,
        objective,
        constraints,
        rhs,
    };
    let sol = sdp.solve(&opts.sdp)?;

    let weights: Vec<f64> = (0..d).map(|j| sol.x[2 + j][(0, 0)].re.max(0.0)).collect();
    let total: f64 = weights.iter().sum();
    let weights: Vec<f64> = weights.iter().map(|w| w / total).collect();
    let sigma = DensityMatrix::from_real_diagonal(&weights)?;
    let value = Distance::TraceNorm.between(rho, &sigma)?;

    let w = dual_witness(&basis, &sol.y[..d * d])?;
    let support = w
        .matrix()
        .diagonal()
        .iter()
        .map(|z| z.re)
        .fold(f64::NEG_INFINITY, f64::max);
    let lower = w.inner(rho.hermitian())? - support;

    let mut result = finish(value, lower, sigma, sol.iterations)?;
    if let Some(o) = &opts.cross_check {
        let oracle_value = oracle::coherence_oracle(rho, o)?.value;
        result.certificate.oracle_gap = Some((oracle_value - result.value).abs());
    }
    Ok(result)
}

fn trivial(rho: &DensityMatrix) -> MeasureResult {
    MeasureResult {
        value: 0.0,
        optimizer: rho.clone(),
        certificate: Certificate {
            method: Method::Trivial,
            gap: 0.0,
            lower_bound: 0.0,
            iterations: 0,
            oracle_gap: None,
        },
    }
}

/// `W = Σ y_k E_k` with its spectrum clipped to `[−1, 1]`.
fn dual_witness(basis: &[ComplexMatrix], y: &[f64]) -> Result<HermitianMatrix> {
    let d = basis[0].dim();
    let mut w = ComplexMatrix::zeros(d);
    for (e, &yk) in basis.iter().zip(y) {
        w = &w + &e.scale_real(yk);
    }
    HermitianMatrix::new_unchecked(w).map_spectrum(|l| l.clamp(-1.0, 1.0))
}

fn finish(value: f64, lower: f64, sigma: DensityMatrix, iterations: usize) -> Result<MeasureResult> {
    let gap = (value - lower).max(0.0);
    if gap.is_nan() || gap > MAX_ACCEPTED_GAP {
        return Err(Error::SolverNotConverged {
            iterations,
            gap,
            best_value: value,
            best_iterate: flatten(sigma.matrix()),
        });
    }
    Ok(MeasureResult {
        value,
        optimizer: sigma,
        certificate: Certificate {
            method: Method::InteriorPoint,
            gap,
            lower_bound: lower,
            iterations,
            oracle_gap: None,
        },
    })
}

fn require_default_spec(spec: &SystemSpec) -> Result<()> {
    if !spec.is_zero_detuning() {
        return Err(Error::WrongSpec);
    }
    Ok(())
}

/// `D(ρ, Π)` with `Π = diag(1/3, 1/3, 1/3, 0, …)`, which is an edge state of
/// the default spectrum in every dimension `d ≥ 3`.
pub fn lemma_upper_bound(rho: &DensityMatrix, spec: &SystemSpec) -> Result<f64> {
    lemma_upper_bound_with(rho, spec, Distance::TraceNorm)
}

pub fn lemma_upper_bound_with(rho: &DensityMatrix, spec: &SystemSpec, distance: Distance) -> Result<f64> {
    require_default_spec(spec)?;
    spec.check_dim(rho.dim())?;
    let d = rho.dim();
    if d < 3 {
        return Err(Error::WrongDimension { expected: 3, got: d });
    }
    let mut diag = vec![0.0; d];
    diag[..3].fill(1.0 / 3.0);
    distance.between(rho, &DensityMatrix::from_real_diagonal(&diag)?)
}

/// `ρ(p, q) = q·(p|0⟩⟨0| + (1−p)|1⟩⟨1|) + (1−q)|ψ⟩⟨ψ|`.
pub fn line_state(psi: &PureState, p: f64, q: f64) -> Result<DensityMatrix> {
    let free = DensityMatrix::from_real_diagonal(&[p, 1.0 - p, 0.0])?;
    free.mix(&density_from_pure(psi), q)
}

/// `q_p = (|c|² − |a|²)/(p + |c|² − |a|²)`, the mixing weight that puts
/// `ρ(p, q)` on the edge.
pub fn edge_weight(psi: &PureState, p: f64) -> f64 {
    let a = psi.amplitudes()[0].norm_sqr();
    let c = psi.amplitudes()[2].norm_sqr();
    (c - a) / (p + c - a)
}

/// `{0.01, 0.02, …, 0.99, 1.0}`.
pub fn default_p_grid() -> Vec<f64> {
    (1..=100).map(|k| k as f64 / 100.0).collect()
}

/// Minimum over `p` of `‖|ψ⟩⟨ψ| − ρ(p, q_p)‖₁` for a resourceful pure
/// qutrit. Every `ρ(p, q_p)` used is checked to be an edge state. The best
/// grid point is refined by golden-section search on its neighbourhood.
pub fn line_upper_bound(psi: &PureState, spec: &SystemSpec, p_grid: &[f64]) -> Result<f64> {
    if psi.dim() != 3 {
        return Err(Error::WrongDimension {
            expected: 3,
            got: psi.dim(),
        });
    }
    require_default_spec(spec)?;
    if resource::qutrit_pure_is_free(psi)? {
        return Err(Error::NotResourceful);
    }
    let target = density_from_pure(psi);
    let eval = |p: f64| -> Result<f64> {
        let rho = line_state(psi, p, edge_weight(psi, p))?;
        let e = resource::energy(&rho, spec)?;
        if (e - spec.threshold).abs() > EPS_EDGE {
            return Err(Error::InvalidState(format!(
                "line state at p = {p} has energy {e}, not on the edge"
            )));
        }
        Distance::TraceNorm.between(&target, &rho)
    };
    let mut best = (f64::INFINITY, f64::NAN);
    for &p in p_grid {
        if !(p > 0.0 && p <= 1.0) {
            return Err(Error::Config(format!("p = {p} outside (0, 1]")));
        }
        let v = eval(p)?;
        if v < best.0 {
            best = (v, p);
        }
    }
    if best.0.is_infinite() {
        return Err(Error::EmptyInput);
    }
    let (mut lo, mut hi) = ((best.1 - 0.01).max(1e-6), (best.1 + 0.01).min(1.0));
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..60 {
        let a = hi - phi * (hi - lo);
        let b = lo + phi * (hi - lo);
        let (fa, fb) = (eval(a)?, eval(b)?);
        best.0 = best.0.min(fa).min(fb);
        if fa <= fb {
            hi = b;
        } else {
            lo = a;
        }
    }
    Ok(best.0)
}

/// `max(0, (Tr(ρH) − E_th)/‖H − c*·I‖∞)` with `c* = E_max/2`. Valid because
/// `ρ − σ` is traceless, so `Tr((ρ−σ)H) = Tr((ρ−σ)(H − c·I)) ≤ ‖ρ−σ‖₁‖H − c·I‖∞`.
pub fn witness_lower_bound(rho: &DensityMatrix, spec: &SystemSpec) -> Result<f64> {
    require_default_spec(spec)?;
    let excess = resource::witness_value(rho, spec)?;
    let half_span = 0.5 * spec.max_energy();
    if half_span == 0.0 {
        return Ok(0.0);
    }
    Ok((excess / half_span).max(0.0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub lemma_bound: f64,
    /// Pure resourceful qutrits only.
    pub line_bound: Option<f64>,
    pub witness_lower: f64,
}

impl BoundReport {
    pub fn upper(&self) -> f64 {
        self.line_bound.map_or(self.lemma_bound, |l| l.min(self.lemma_bound))
    }

    /// `witness_lower ≤ value ≤ min(upper bounds)` within `tol`.
    pub fn sandwiches(&self, value: f64, tol: f64) -> bool {
        self.witness_lower <= value + tol && value <= self.upper() + tol
    }
}

/// All bounds applicable to `rho`; `pure` enables the line bound when the
/// state is a resourceful pure qutrit.
pub fn bounds(rho: &DensityMatrix, spec: &SystemSpec, pure: Option<&PureState>) -> Result<BoundReport> {
    let line_bound = match pure {
        Some(psi) if psi.dim() == 3 && !resource::qutrit_pure_is_free(psi)? => {
            Some(line_upper_bound(psi, spec, &default_p_grid())?)
        }
        _ => None,
    };
    Ok(BoundReport {
        lemma_bound: lemma_upper_bound(rho, spec)?,
        line_bound,
        witness_lower: witness_lower_bound(rho, spec)?,
    })
}

/// `P_tr(ρ) + a·C_tr(ρ)` for a qutrit under the default spectrum.
pub fn complementarity_value(rho: &DensityMatrix, spec: &SystemSpec, a: f64) -> Result<f64> {
    complementarity_value_with(rho, spec, a, &MeasureOptions::default())
}

pub fn complementarity_value_with(
    rho: &DensityMatrix,
    spec: &SystemSpec,
    a: f64,
    opts: &MeasureOptions,
) -> Result<f64> {
    require_default_spec(spec)?;
    if rho.dim() != 3 {
        return Err(Error::WrongDimension {
            expected: 3,
            got: rho.dim(),
        });
    }
    let p = particleness_trace_with(rho, spec, opts)?.value;
    let c = coherence_trace_with(rho, opts)?.value;
    Ok(p + a * c)
}

/// Cross-check of both measures against the stochastic oracle; returns
/// `(particleness gap, coherence gap)`.
pub fn oracle_agreement(rho: &DensityMatrix, spec: &SystemSpec, seed: RandomSeed) -> Result<(f64, f64)> {
    let opts = MeasureOptions {
        cross_check: Some(OracleOptions {
            seed,
            ..OracleOptions::default()
        }),
        ..MeasureOptions::default()
    };
    let p = particleness_trace_with(rho, spec, &opts)?;
    let c = coherence_trace_with(rho, &opts)?;
    Ok((
        p.certificate.oracle_gap.unwrap_or(0.0),
        c.certificate.oracle_gap.unwrap_or(0.0),
    ))
}
