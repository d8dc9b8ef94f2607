use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use rckit::circuit::{sample_random_circuit, Circuit, Cycle, CycleKind, RandomMode};
use rckit::gates::fold_to_u3;
use rckit::linalg::{identity, CMat};
use rckit::pauli::PauliString;
use rckit::rc::{randomize, twirl_correction, verify_equivalence};

fn factor(p: &PauliString, q: usize) -> CMat {
    PauliString::from_labels(&[p.get(q)]).to_matrix()
}

/// Folds `T_k` into the easy cycle before hard cycle `k` and `correct(G_k, T_k)`
/// into the one after, qubit by qubit.
fn compile(c: &Circuit, twirls: &[PauliString], correct: impl Fn(&Cycle, &PauliString) -> Vec<CMat>) -> Circuit {
    let n = c.n;
    let mut before: Vec<Vec<CMat>> = vec![vec![identity(2); n]; c.cycles.len()];
    let mut after: Vec<Vec<CMat>> = vec![vec![identity(2); n]; c.cycles.len()];
    for (k, t) in twirls.iter().enumerate() {
        let hard = &c.cycles[2 * k + 1];
        assert_eq!(hard.kind, CycleKind::Hard);
        after[2 * k] = (0..n).map(|q| factor(t, q)).collect();
        before[2 * k + 2] = correct(hard, t);
    }
    let cycles = c
        .cycles
        .iter()
        .enumerate()
        .map(|(i, cy)| {
            if cy.kind == CycleKind::Hard {
                return cy.clone();
            }
            let gates = (0..n)
                .map(|q| {
                    let u = cy.gate_on(q).map(|g| g.unitary()).unwrap_or_else(|| identity(2));
                    fold_to_u3(&(&after[i][q] * u * &before[i][q]), q)
                })
                .collect();
            Cycle::new(CycleKind::Easy, n, gates).unwrap()
        })
        .collect();
    Circuit::new(n, cycles).unwrap()
}

fn random_twirls(n: usize, k: usize, rng: &mut ChaCha8Rng) -> Vec<PauliString> {
    use rand::Rng;
    (0..k).map(|_| PauliString::from_index(n, rng.random_range(0..1usize << (2 * n)))).collect()
}

#[test]
fn tracked_corrections_preserve_the_circuit() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..30 {
        let c = sample_random_circuit(3, 6, RandomMode::Multiqubit, &mut rng).unwrap();
        let t = random_twirls(3, 6, &mut rng);
        let ours = compile(&c, &t, |g, t| twirl_correction(g, t).unwrap());
        assert!(verify_equivalence(&c, &ours).unwrap().equivalent);
    }
}

#[test]
fn dropping_corrections_breaks_equivalence() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..30 {
        let c = sample_random_circuit(3, 4, RandomMode::Multiqubit, &mut rng).unwrap();
        let mut t = random_twirls(3, 4, &mut rng);
        t[0] = "XYZ".parse().unwrap();
        let dropped = compile(&c, &t, |_, _| vec![identity(2); 3]);
        assert!(!verify_equivalence(&c, &dropped).unwrap().equivalent);
    }
}

#[test]
fn untracked_corrections_break_equivalence() {
    // undoing T itself instead of G T G† is wrong whenever G moves T
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut broken = 0;
    for _ in 0..30 {
        let c = sample_random_circuit(2, 3, RandomMode::Multiqubit, &mut rng).unwrap();
        let t = random_twirls(2, 3, &mut rng);
        let naive = compile(&c, &t, |_, t| (0..2).map(|q| factor(t, q)).collect());
        let moved = c.hard_cycles().zip(&t).any(|(g, t)| {
            let u = g.unitary(2);
            let p = t.to_matrix();
            (&u * &p * u.adjoint() - &p).iter().any(|z| z.norm() > 1e-9)
        });
        let eq = verify_equivalence(&c, &naive).unwrap().equivalent;
        if moved {
            broken += usize::from(!eq);
        }
    }
    assert!(broken > 10, "only {broken} mutated circuits detected");
}

#[test]
fn randomized_circuit_keeps_hard_cycles() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let c = sample_random_circuit(4, 8, RandomMode::Multiqubit, &mut rng).unwrap();
    let r = randomize(&c, &mut rng).unwrap();
    assert_eq!(r.twirls.len(), 8);
    let ours = compile(&c, &r.twirls, |g, t| twirl_correction(g, t).unwrap());
    let a = ours.unitary().unwrap();
    let b = r.compiled.unitary().unwrap();
    assert!(rckit::linalg::distance_up_to_phase(&a, &b) < 1e-9);
    for (x, y) in c.hard_cycles().zip(r.compiled.hard_cycles()) {
        assert_eq!(x, y);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn randomization_is_logically_equivalent(seed in any::<u64>(), n in 1usize..=4, k in 1usize..=8, multi in any::<bool>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mode = if multi && n >= 2 { RandomMode::Multiqubit } else { RandomMode::Singlequbit };
        let c = sample_random_circuit(n, k, mode, &mut rng).unwrap();
        let r = randomize(&c, &mut rng).unwrap();
        let eq = verify_equivalence(&c, &r.compiled).unwrap();
        prop_assert!(eq.deviation < 1e-9);
    }
}
