mod common;

use common::{amplitude_damping, random_diagonal_channel, random_free_state, random_state};
use particleness::kraus::{is_free_operation, FreeOpOptions, KrausSet, SubsetMode, Verdict};
use particleness::resource::{classify, qutrit_mixed_is_free, qutrit_pure_is_free, witness_value, Label, EPS_EDGE};
use particleness::states::{sample_haar_pure, sample_induced_mixed};
use particleness::{density_from_pure, ComplexMatrix, PureState, RandomSeed, SystemSpec, C64};
use rand::Rng;

#[test]
fn witness_sign_matches_classification() {
    let spec = SystemSpec::zero_detuning(3);
    let mut rng = RandomSeed(21).rng();
    for rank in 1..=3 {
        for _ in 0..10_000 {
            let rho = particleness::states::sample_state_of_rank(3, rank, &mut rng).unwrap();
            let resourceful = classify(&rho, &spec).unwrap().label == Label::Resourceful;
            assert_eq!(resourceful, witness_value(&rho, &spec).unwrap() > EPS_EDGE);
        }
    }
}

#[test]
fn free_set_is_convex() {
    let spec = SystemSpec::zero_detuning(3);
    let mut rng = RandomSeed(22).rng();
    for _ in 0..10_000 {
        let a = random_free_state(&spec, &mut rng);
        let b = random_free_state(&spec, &mut rng);
        let lambda: f64 = rng.random();
        assert!(classify(&a.mix(&b, lambda).unwrap(), &spec).unwrap().is_free());
    }
}

#[test]
fn qubits_are_never_resourceful() {
    let spec = SystemSpec::zero_detuning(2);
    let mut rng = RandomSeed(23).rng();
    for _ in 0..10_000 {
        let pure = density_from_pure(&sample_haar_pure(2, &mut rng));
        assert_ne!(classify(&pure, &spec).unwrap().label, Label::Resourceful);
        let mixed = sample_induced_mixed(2, 2, &mut rng).unwrap();
        assert_ne!(classify(&mixed, &spec).unwrap().label, Label::Resourceful);
    }
    let one = classify(&density_from_pure(&PureState::basis(2, 1)), &spec).unwrap();
    assert_eq!(one.label, Label::Edge);
    // Any other pure qubit has some ground population and sits strictly inside.
    let tilted = PureState::normalized(vec![C64::new(1e-3, 0.0), C64::new(1.0, 0.0)]).unwrap();
    assert_eq!(
        classify(&density_from_pure(&tilted), &spec).unwrap().label,
        Label::FreeInterior
    );
}

#[test]
fn qutrit_closed_forms_agree_with_energy() {
    let spec = SystemSpec::zero_detuning(3);
    let mut rng = RandomSeed(24).rng();
    for _ in 0..10_000 {
        let psi = sample_haar_pure(3, &mut rng);
        let free = classify(&density_from_pure(&psi), &spec).unwrap().is_free();
        assert_eq!(qutrit_pure_is_free(&psi).unwrap(), free);
        let rho = sample_induced_mixed(3, 3, &mut rng).unwrap();
        assert_eq!(
            qutrit_mixed_is_free(&rho).unwrap(),
            classify(&rho, &spec).unwrap().is_free()
        );
    }
}

fn assert_sound(ks: &KrausSet, spec: &SystemSpec, mode: SubsetMode, seed: u64) {
    let h = spec.hamiltonian();
    let mut rng = RandomSeed(seed).rng();
    let n = ks.len();
    let full: Vec<usize> = (0..n).collect();
    for _ in 0..1000 {
        let rho = random_free_state(spec, &mut rng);
        let subsets: Vec<Vec<usize>> = match mode {
            SubsetMode::AllSubsets => (1u32..(1 << n))
                .map(|mask| (0..n).filter(|k| mask & (1 << k) != 0).collect())
                .collect(),
            SubsetMode::FullChannel => vec![full.clone()],
        };
        for subset in subsets {
            let out = ks.apply_subset_unnormalized(&rho, &subset).unwrap();
            let p = out.trace();
            if p < 1e-12 {
                continue;
            }
            let e = out.inner(&h).unwrap() / p;
            assert!(e <= spec.threshold + 1e-6, "subset {subset:?} maps to energy {e}");
        }
    }
}

#[test]
fn free_verdicts_are_sound() {
    let spec = SystemSpec::zero_detuning(3);
    for (i, gamma) in [0.3, 1.0].into_iter().enumerate() {
        let ks = amplitude_damping(3, gamma);
        let v = is_free_operation(&ks, &spec, &FreeOpOptions::default()).unwrap();
        assert_eq!(v.verdict, Verdict::Free);
        assert_sound(&ks, &spec, SubsetMode::AllSubsets, 100 + i as u64);
    }
    let mut rng = RandomSeed(25).rng();
    let full = FreeOpOptions {
        mode: SubsetMode::FullChannel,
        ..FreeOpOptions::default()
    };
    for count in 1..=4 {
        let ks = random_diagonal_channel(3, count, &mut rng);
        let v = is_free_operation(&ks, &spec, &full).unwrap();
        assert_eq!(v.verdict, Verdict::Free, "{count} operators");
        assert!(v.commuting_fast_path);
        assert_sound(&ks, &spec, SubsetMode::FullChannel, 200 + count as u64);
    }
}

#[test]
fn post_selected_diagonal_operators_can_raise_energy() {
    let spec = SystemSpec::zero_detuning(3);
    let mut rng = RandomSeed(28).rng();
    let ks = random_diagonal_channel(3, 2, &mut rng);
    let v = is_free_operation(&ks, &spec, &FreeOpOptions::default()).unwrap();
    assert_eq!(v.verdict, Verdict::NotFree);
    assert!(classify(&v.worst_state, &spec).unwrap().is_free());
    let out = ks.apply_subset_unnormalized(&v.worst_state, &v.worst_subset).unwrap();
    let e = out.inner(&spec.hamiltonian()).unwrap() / out.trace();
    assert!((e - v.worst_energy).abs() < 1e-8 && e > spec.threshold);
}

#[test]
fn not_free_certificates_are_genuine() {
    let spec = SystemSpec::zero_detuning(3);
    let mut rng = RandomSeed(26).rng();
    let mut checked = 0;
    for _ in 0..20 {
        let u = particleness::states::sample_unitary(3, &mut rng);
        let ks = KrausSet::new(vec![u]).unwrap();
        let v = is_free_operation(&ks, &spec, &FreeOpOptions::default()).unwrap();
        if v.verdict != Verdict::NotFree {
            continue;
        }
        checked += 1;
        assert!(classify(&v.worst_state, &spec).unwrap().is_free());
        let out = ks.apply(&v.worst_state).unwrap();
        let e = particleness::energy(&out, &spec).unwrap();
        assert!((e - v.worst_energy).abs() < 1e-8);
        assert!(e > spec.threshold);
    }
    assert!(checked > 0);
}

#[test]
fn non_uniform_spectrum_changes_the_free_set() {
    let spec = SystemSpec::new(vec![0.0, 1.5, 2.0], 1.0).unwrap();
    let one = density_from_pure(&PureState::basis(3, 1));
    assert_eq!(classify(&one, &spec).unwrap().label, Label::Resourceful);
    let mut rng = RandomSeed(27).rng();
    for _ in 0..1000 {
        let rho = random_state(3, &mut rng);
        let resourceful = classify(&rho, &spec).unwrap().label == Label::Resourceful;
        assert_eq!(resourceful, witness_value(&rho, &spec).unwrap() > EPS_EDGE);
    }
    let identity = KrausSet::new(vec![ComplexMatrix::identity(3)]).unwrap();
    assert_eq!(
        is_free_operation(&identity, &spec, &FreeOpOptions::default())
            .unwrap()
            .verdict,
        Verdict::Free
    );
}
