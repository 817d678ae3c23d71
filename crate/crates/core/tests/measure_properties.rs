mod common;

use common::{random_diagonal_channel, random_state};
use particleness::measures::{
    coherence_trace, default_p_grid, lemma_upper_bound, line_upper_bound, particleness_trace, witness_lower_bound,
};
use particleness::resource::{classify, qutrit_pure_is_free};
use particleness::states::sample_haar_pure;
use particleness::{density_from_pure, trace_norm, RandomSeed, SystemSpec};
use rand::Rng;

fn p(rho: &particleness::DensityMatrix) -> f64 {
    particleness_trace(rho, &SystemSpec::zero_detuning(rho.dim()))
        .unwrap()
        .value
}

#[test]
fn particleness_is_faithful() {
    let spec = SystemSpec::zero_detuning(3);
    let mut rng = RandomSeed(31).rng();
    for _ in 0..10_000 {
        let rho = random_state(3, &mut rng);
        let free = classify(&rho, &spec).unwrap().is_free();
        let value = p(&rho);
        assert_eq!(value <= 1e-7, free, "value {value}");
    }
}

#[test]
fn reported_value_is_the_distance_to_a_free_optimizer() {
    let spec = SystemSpec::zero_detuning(3);
    let mut rng = RandomSeed(32).rng();
    for _ in 0..500 {
        let rho = random_state(3, &mut rng);
        let r = particleness_trace(&rho, &spec).unwrap();
        assert!(classify(&r.optimizer, &spec).unwrap().is_free());
        let d = trace_norm(&rho.hermitian().try_sub(r.optimizer.hermitian()).unwrap()).unwrap();
        assert!((d - r.value).abs() < 1e-12);
        assert!(r.certificate.gap <= 1e-8, "gap {}", r.certificate.gap);
        assert!(r.certificate.lower_bound <= r.value + 1e-12);

        let c = coherence_trace(&rho).unwrap();
        let od = c.optimizer.matrix();
        assert!((0..3).all(|i| (0..3).all(|j| i == j || od[(i, j)].norm() == 0.0)));
        assert!(c.certificate.gap <= 1e-8);
    }
}

#[test]
fn upper_bounds_hold() {
    let spec = SystemSpec::zero_detuning(3);
    let mut rng = RandomSeed(33).rng();
    for _ in 0..1000 {
        let rho = random_state(3, &mut rng);
        let value = p(&rho);
        assert!(value <= lemma_upper_bound(&rho, &spec).unwrap() + 1e-8);
        assert!(witness_lower_bound(&rho, &spec).unwrap() <= value + 1e-8);
    }
    let grid = default_p_grid();
    let mut resourceful = 0;
    while resourceful < 1000 {
        let psi = sample_haar_pure(3, &mut rng);
        if qutrit_pure_is_free(&psi).unwrap() {
            continue;
        }
        resourceful += 1;
        let value = p(&density_from_pure(&psi));
        assert!(value <= line_upper_bound(&psi, &spec, &grid).unwrap() + 1e-8);
    }
}

#[test]
fn particleness_is_convex() {
    let mut rng = RandomSeed(34).rng();
    for _ in 0..500 {
        let a = random_state(3, &mut rng);
        let b = random_state(3, &mut rng);
        let lambda: f64 = rng.random();
        let mix = a.mix(&b, lambda).unwrap();
        assert!(p(&mix) <= lambda * p(&a) + (1.0 - lambda) * p(&b) + 1e-6);
    }
}

#[test]
fn coherence_is_convex_and_phase_invariant() {
    let mut rng = RandomSeed(35).rng();
    for _ in 0..300 {
        let a = random_state(3, &mut rng);
        let b = random_state(3, &mut rng);
        let lambda: f64 = rng.random();
        let c = |r: &particleness::DensityMatrix| coherence_trace(r).unwrap().value;
        assert!(c(&a.mix(&b, lambda).unwrap()) <= lambda * c(&a) + (1.0 - lambda) * c(&b) + 1e-6);
        let u = common::phase_unitary(3, &mut rng);
        assert!((c(&a.conjugate_by(&u).unwrap()) - c(&a)).abs() < 1e-7);
    }
}

#[test]
fn dephasing_channels_do_not_increase_particleness() {
    let mut rng = RandomSeed(36).rng();
    for _ in 0..20 {
        let count = rng.random_range(1..=4);
        let ks = random_diagonal_channel(3, count, &mut rng);
        for _ in 0..20 {
            let rho = random_state(3, &mut rng);
            assert!(p(&ks.apply(&rho).unwrap()) <= p(&rho) + 1e-6);
        }
    }
}

#[test]
fn larger_dimensions_solve() {
    let mut rng = RandomSeed(37).rng();
    for dim in [2, 4, 5] {
        for _ in 0..20 {
            let rho = random_state(dim, &mut rng);
            let spec = SystemSpec::zero_detuning(dim);
            let r = particleness_trace(&rho, &spec).unwrap();
            assert!(r.certificate.gap <= 1e-8);
            assert_eq!(r.value <= 1e-7, classify(&rho, &spec).unwrap().is_free());
            if dim == 2 {
                assert!(r.value <= 1e-7);
            }
        }
    }
}
