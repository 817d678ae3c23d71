#![allow(dead_code)]

use particleness::kraus::KrausSet;
use particleness::resource::{classify, project_into_free_set};
use particleness::states::sample_state_of_rank;
use particleness::{ComplexMatrix, DensityMatrix, SystemSpec, C64};
use rand::Rng;
use rand_distr::StandardNormal;

/// Two-sample Kolmogorov–Smirnov statistic.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> f64 {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (mut i, mut j, mut d) = (0, 0, 0.0f64);
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / a.len() as f64 - j as f64 / b.len() as f64).abs());
    }
    d
}

/// One-sample KS statistic against a CDF.
pub fn ks_one_sample(xs: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut xs = xs.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    xs.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

pub fn random_state<R: Rng>(dim: usize, rng: &mut R) -> DensityMatrix {
    let rank = rng.random_range(1..=dim);
    sample_state_of_rank(dim, rank, rng).unwrap()
}

/// Random state mapped into the free set by mixing toward the ground state.
pub fn random_free_state<R: Rng>(spec: &SystemSpec, rng: &mut R) -> DensityMatrix {
    let rho = random_state(spec.dim, rng);
    let sigma = project_into_free_set(&rho, spec).unwrap();
    assert!(classify(&sigma, spec).unwrap().is_free());
    sigma
}

fn gaussian<R: Rng>(rng: &mut R) -> C64 {
    C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// Random complete set of `count` diagonal Kraus operators; these commute
/// with any diagonal Hamiltonian.
pub fn random_diagonal_channel<R: Rng>(dim: usize, count: usize, rng: &mut R) -> KrausSet {
    let mut columns: Vec<Vec<C64>> = Vec::with_capacity(dim);
    for _ in 0..dim {
        let v: Vec<C64> = (0..count).map(|_| gaussian(rng)).collect();
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        columns.push(v.into_iter().map(|z| z / norm).collect());
    }
    let ops = (0..count)
        .map(|n| ComplexMatrix::from_diagonal(&columns.iter().map(|c| c[n]).collect::<Vec<_>>()))
        .collect();
    KrausSet::new(ops).unwrap()
}

pub fn phase_unitary<R: Rng>(dim: usize, rng: &mut R) -> ComplexMatrix {
    let phases: Vec<C64> = (0..dim)
        .map(|_| C64::from_polar(1.0, rng.random_range(0.0..std::f64::consts::TAU)))
        .collect();
    ComplexMatrix::from_diagonal(&phases)
}

/// Amplitude damping of every excited level straight to the ground state.
pub fn amplitude_damping(dim: usize, gamma: f64) -> KrausSet {
    let mut k0 = ComplexMatrix::identity(dim);
    for n in 1..dim {
        k0[(n, n)] = C64::new((1.0 - gamma).sqrt(), 0.0);
    }
    let mut ops = vec![k0];
    for n in 1..dim {
        let mut k = ComplexMatrix::zeros(dim);
        k[(0, n)] = C64::new(gamma.sqrt(), 0.0);
        ops.push(k);
    }
    KrausSet::new(ops).unwrap()
}
