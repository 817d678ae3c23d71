//! Stochastic minimization of the trace distance to the free set or to the
//! incoherent states, independent of the interior-point path.
//!
//! Phase one draws random candidates (Ginibre states of random rank mapped
//! into the free set by [`project_into_free_set`], or Dirichlet weights for
//! diagonal states) and keeps the closest. Phase two is a local random
//! search from the best candidate whose step size grows on success and
//! shrinks on failure; for the free set it moves a factor `G` with
//! `σ ∝ G·G†`. A final polish runs accelerated projected gradient on a
//! smoothed trace norm. Used only to cross-check the solver.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::linalg::{trace_norm, ComplexMatrix, HermitianMatrix};
use crate::resource::{project_into_free_set, SystemSpec};
use crate::states::{complex_gaussian, sample_state_of_rank, DensityMatrix, RandomSeed};

#[derive(Debug, Clone, Copy)]
pub struct OracleOptions {
    pub samples: usize,
    pub refine_steps: usize,
    pub initial_step: f64,
    pub seed: RandomSeed,
}

impl Default for OracleOptions {
    fn default() -> Self {
        Self {
            samples: 100_000,
            refine_steps: 3_000,
            initial_step: 0.05,
            seed: RandomSeed(0x5eed),
        }
    }
}

#[derive(Debug, Clone)]
pub struct OracleResult {
    pub value: f64,
    pub optimizer: DensityMatrix,
}

fn distance(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    trace_norm(&rho.hermitian().try_sub(sigma.hermitian())?)
}

fn random_matrix(dim: usize, rng: &mut ChaCha8Rng) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(dim);
    for i in 0..dim {
        for j in 0..dim {
            m[(i, j)] = complex_gaussian(rng);
        }
    }
    m
}

/// Accepts improving moves only.
fn local_search<F>(
    start: DensityMatrix,
    start_value: f64,
    steps: usize,
    initial_step: f64,
    rng: &mut ChaCha8Rng,
    mut propose: F,
) -> Result<OracleResult>
where
    F: FnMut(&DensityMatrix, f64, &mut ChaCha8Rng) -> Result<Option<(DensityMatrix, f64)>>,
{
    let mut best = OracleResult {
        value: start_value,
        optimizer: start,
    };
    let mut step = initial_step;
    for _ in 0..steps {
        match propose(&best.optimizer, step, rng)? {
            Some((cand, v)) if v < best.value => {
                best = OracleResult {
                    value: v,
                    optimizer: cand,
                };
                step = (step * 1.5).min(1.0);
            }
            _ => step = (step * 0.9).max(1e-9),
        }
    }
    Ok(best)
}

/// Approximate `min_{σ ∈ F_S} ‖ρ − σ‖₁`.
pub fn particleness_oracle(rho: &DensityMatrix, spec: &SystemSpec, opts: &OracleOptions) -> Result<OracleResult> {
    let d = rho.dim();
    spec.check_dim(d)?;
    let mut rng = opts.seed.rng();
    let mut best: Option<(DensityMatrix, f64)> = None;
    for _ in 0..opts.samples {
        let rank = rng.random_range(1..=d);
        let sigma = project_into_free_set(&sample_state_of_rank(d, rank, &mut rng)?, spec)?;
        let v = distance(rho, &sigma)?;
        if best.as_ref().is_none_or(|(_, b)| v < *b) {
            best = Some((sigma, v));
        }
    }
    let (start, start_value) = match best {
        Some(b) => b,
        None => {
            let ground = crate::states::density_from_pure(&crate::states::PureState::basis(d, 0));
            let v = distance(rho, &ground)?;
            (ground, v)
        }
    };
    // Refine in the factor parameterization σ ∝ G·G†, seeded with the square
    // root of the best candidate, so rank-deficient faces are reachable.
    let factor = start.hermitian().map_spectrum(|l| l.max(0.0).sqrt())?.into_matrix();
    let mut current = (factor, start, start_value);
    let mut step = opts.initial_step;
    for k in 0..opts.refine_steps {
        if k % 2_000 == 0 {
            step = opts.initial_step;
        }
        let (g, _, v) = &current;
        let mut g2 = g.clone();
        if rng.random_bool(0.5) {
            let i = rng.random_range(0..d);
            let j = rng.random_range(0..d);
            g2[(i, j)] += complex_gaussian(&mut rng) * step;
        } else {
            g2 = &g2 + &random_matrix(d, &mut rng).scale_real(step);
        }
        let Some(cand) = factor_to_free_state(&g2, spec) else {
            continue;
        };
        let cv = distance(rho, &cand)?;
        if cv < *v {
            current = (g2, cand, cv);
            step = (step * 1.5).min(1.0);
        } else {
            step = (step * 0.95).max(1e-10);
        }
    }
    polish(rho, spec, current.1, current.2)
}

fn factor_to_free_state(g: &ComplexMatrix, spec: &SystemSpec) -> Option<DensityMatrix> {
    let gg = HermitianMatrix::new_unchecked(g * &g.adjoint());
    let tr = gg.trace();
    if tr.is_nan() || tr <= 1e-300 {
        return None;
    }
    let sigma = DensityMatrix::from_nearly_valid(&gg.scale(1.0 / tr)).ok()?;
    project_into_free_set(&sigma, spec).ok()
}

/// Euclidean projection of a density matrix's spectrum onto the probability simplex.
fn project_spectrum(x: &HermitianMatrix) -> Result<HermitianMatrix> {
    let eig = x.eigh()?;
    let mut sorted = eig.eigenvalues.clone();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut cumulative = 0.0;
    let mut shift = 0.0;
    for (k, v) in sorted.iter().enumerate() {
        cumulative += v;
        let candidate = (cumulative - 1.0) / (k + 1) as f64;
        if v - candidate > 0.0 {
            shift = candidate;
        }
    }
    Ok(eig.reconstruct_with(|l| (l - shift).max(0.0)))
}

/// Nearest point of the free set in Frobenius norm: `Π(X − νH)` with the
/// multiplier `ν ≥ 0` found by bisection on the energy.
fn frobenius_projection(x: &HermitianMatrix, spec: &SystemSpec) -> Result<HermitianMatrix> {
    let h = spec.hamiltonian();
    let energy = |m: &HermitianMatrix| m.inner(&h);
    let p0 = project_spectrum(x)?;
    if energy(&p0)? <= spec.threshold {
        return Ok(p0);
    }
    let mut hi = 1.0;
    while energy(&project_spectrum(&x.try_sub(&h.scale(hi))?)?)? > spec.threshold {
        hi *= 2.0;
        if hi > 1e12 {
            break;
        }
    }
    let mut lo = 0.0;
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if energy(&project_spectrum(&x.try_sub(&h.scale(mid))?)?)? > spec.threshold {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    project_spectrum(&x.try_sub(&h.scale(hi))?)
}

/// Accelerated projected gradient on `Tr √(Δ² + μ²)`, `Δ = ρ − σ`, with `μ`
/// shrinking tenfold per stage and the step set to `μ`.
fn polish(rho: &DensityMatrix, spec: &SystemSpec, start: DensityMatrix, start_value: f64) -> Result<OracleResult> {
    let mut best = OracleResult {
        value: start_value,
        optimizer: start,
    };
    let mut x = best.optimizer.hermitian().clone();
    for mu in [1e-2, 1e-3, 1e-4, 1e-5, 1e-6] {
        let mut y = x.clone();
        let mut t = 1.0_f64;
        let mut previous = f64::INFINITY;
        for _ in 0..400 {
            let diff = rho.hermitian().try_sub(&y)?;
            let grad = diff.eigh()?.reconstruct_with(|l| -l / (l * l + mu * mu).sqrt());
            let next = frobenius_projection(&y.try_sub(&grad.scale(mu))?, spec)?;
            let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
            let momentum = (t - 1.0) / t_next;
            y = next.try_add(&next.try_sub(&x)?.scale(momentum))?;
            x = next;
            t = t_next;
            let sigma = project_into_free_set(&DensityMatrix::from_nearly_valid(&x)?, spec)?;
            let v = distance(rho, &sigma)?;
            if v < best.value {
                best = OracleResult {
                    value: v,
                    optimizer: sigma,
                };
            }
            if v > previous {
                // Restart the momentum when the objective goes up.
                y = x.clone();
                t = 1.0;
            }
            previous = v;
        }
    }
    Ok(best)
}

/// Approximate `min ‖ρ − diag(t)‖₁` over probability vectors `t`.
pub fn coherence_oracle(rho: &DensityMatrix, opts: &OracleOptions) -> Result<OracleResult> {
    let d = rho.dim();
    let mut rng = opts.seed.rng();
    let mut best: Option<(DensityMatrix, f64)> = None;
    for _ in 0..opts.samples {
        // Uniform on the simplex: normalized exponentials.
        let w: Vec<f64> = (0..d).map(|_| -rng.random::<f64>().max(1e-300).ln()).collect();
        let total: f64 = w.iter().sum();
        let t: Vec<f64> = w.iter().map(|x| x / total).collect();
        let sigma = DensityMatrix::from_real_diagonal(&t)?;
        let v = distance(rho, &sigma)?;
        if best.as_ref().is_none_or(|(_, b)| v < *b) {
            best = Some((sigma, v));
        }
    }
    let (start, start_value) = match best {
        Some(b) => b,
        None => {
            let sigma = DensityMatrix::from_real_diagonal(&rho.populations())?;
            let v = distance(rho, &sigma)?;
            (sigma, v)
        }
    };
    local_search(
        start,
        start_value,
        opts.refine_steps,
        opts.initial_step,
        &mut rng,
        |cur, step, rng| {
            let mut t: Vec<f64> = cur
                .populations()
                .iter()
                .map(|p| (p + step * rng.sample::<f64, _>(rand_distr::StandardNormal)).max(0.0))
                .collect();
            let total: f64 = t.iter().sum();
            if total <= 0.0 {
                return Ok(None);
            }
            t.iter_mut().for_each(|x| *x /= total);
            let cand = DensityMatrix::from_real_diagonal(&t)?;
            let v = distance(rho, &cand)?;
            Ok(Some((cand, v)))
        },
    )
}
