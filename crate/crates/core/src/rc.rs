//! The randomized-compiling pass: random Pauli twirls before every hard
//! cycle, their corrections after it, all folded into the easy cycles.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::circuit::{circuit_unitary, Circuit, Cycle};
use crate::clifford::clifford_conjugate;
use crate::compile::recompile_cycle_pair;
use crate::error::{Error, Result};
use crate::gates::Gate;
use crate::linalg::{distance_up_to_phase, identity, CMat};
use crate::pauli::PauliString;
use crate::seeding;

pub const EQUIVALENCE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomizedCircuit {
    pub base: Circuit,
    /// `T_k` inserted before hard cycle `k` (one per hard cycle).
    pub twirls: Vec<PauliString>,
    pub compiled: Circuit,
}

fn pauli_factors(p: &PauliString) -> Vec<CMat> {
    let mut out: Vec<CMat> = p
        .labels()
        .into_iter()
        .map(|l| PauliString::from_labels(&[l]).to_matrix())
        .collect();
    // keep the product exact; the sign is a global phase either way
    out[0] *= p.phase().to_complex();
    out
}

/// Per-qubit factors of `G T† G†` for the hard cycle `G`.
pub fn twirl_correction(hard: &Cycle, twirl: &PauliString) -> Result<Vec<CMat>> {
    if hard.is_clifford() {
        return Ok(pauli_factors(&clifford_conjugate(hard, &twirl.adjoint())?));
    }
    if hard.entangler().is_some() {
        return Err(Error::UnsupportedHardCycle(hard.signature()));
    }
    let n = hard.n();
    (0..n)
        .map(|q| {
            let g: &Gate = hard.gate_on(q).expect("cycle covers all qubits");
            let u = g.unitary();
            let t = PauliString::from_labels(&[twirl.get(q)]).to_matrix();
            Ok(&u * t.adjoint() * u.adjoint())
        })
        .collect()
}

/// Randomizes with caller-chosen twirls (one per hard cycle).
pub fn randomize_with_twirls(c: &Circuit, twirls: &[PauliString]) -> Result<RandomizedCircuit> {
    c.validate()?;
    let k = c.depth();
    if twirls.len() != k {
        return Err(Error::InvalidArgument(format!(
            "{} twirls for {k} hard cycles",
            twirls.len()
        )));
    }
    let n = c.n;
    let mut cycles = c.cycles.clone();
    let mut pending_correction = vec![identity(2); n];
    for layer in 0..=k {
        let easy_idx = 2 * layer;
        let after = if layer < k {
            pauli_factors(&twirls[layer])
        } else {
            vec![identity(2); n]
        };
        cycles[easy_idx] = recompile_cycle_pair(&c.cycles[easy_idx], &pending_correction, &after)?;
        if layer < k {
            pending_correction = twirl_correction(&c.cycles[easy_idx + 1], &twirls[layer])?;
        }
    }
    Ok(RandomizedCircuit {
        base: c.clone(),
        twirls: twirls.to_vec(),
        compiled: Circuit::new(n, cycles)?,
    })
}

/// One randomization with twirls drawn uniformly from the n-qubit Paulis.
pub fn randomize<R: Rng + ?Sized>(c: &Circuit, rng: &mut R) -> Result<RandomizedCircuit> {
    let np = 1usize << (2 * c.n);
    let twirls: Vec<PauliString> = (0..c.depth())
        .map(|_| PauliString::from_index(c.n, rng.random_range(0..np)))
        .collect();
    randomize_with_twirls(c, &twirls)
}

/// `count` independent randomizations; index `i` uses stream `i` of `seed`.
pub fn randomize_batch(c: &Circuit, count: usize, seed: u64) -> Result<Vec<RandomizedCircuit>> {
    if count == 0 {
        return Err(Error::InvalidArgument("need at least one randomization".into()));
    }
    (0..count)
        .into_par_iter()
        .map(|i| randomize(c, &mut seeding::stream(seed, i as u64)))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Equivalence {
    pub equivalent: bool,
    pub deviation: f64,
}

/// Compares circuit unitaries up to the global phase of the largest entry.
pub fn verify_equivalence(a: &Circuit, b: &Circuit) -> Result<Equivalence> {
    if a.n != b.n {
        return Err(Error::DimensionMismatch {
            expected: a.n,
            got: b.n,
        });
    }
    let (ua, ub) = (circuit_unitary(a)?, circuit_unitary(b)?);
    let deviation = distance_up_to_phase(&ua, &ub);
    Ok(Equivalence {
        equivalent: deviation < EQUIVALENCE_TOL,
        deviation,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{build_qft, sample_random_circuit, CycleKind, RandomMode};
    use crate::gates::GateKind;
    use crate::linalg::max_abs_diff;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn ps(s: &str) -> PauliString {
        s.parse().unwrap()
    }

    #[test]
    fn identity_circuit_stays_identity() {
        let c = Circuit::new(
            2,
            vec![
                Cycle::identity(CycleKind::Easy, 2),
                Cycle::identity(CycleKind::Hard, 2),
                Cycle::identity(CycleKind::Easy, 2),
            ],
        )
        .unwrap();
        for t in PauliString::all(2) {
            let r = randomize_with_twirls(&c, &[t]).unwrap();
            let u = r.compiled.unitary().unwrap();
            assert!(distance_up_to_phase(&identity(4), &u) < 1e-12);
        }
    }

    #[test]
    fn t_hard_gate_with_x_twirl() {
        let c = Circuit::new(
            1,
            vec![
                Cycle::new(CycleKind::Easy, 1, vec![Gate::single(GateKind::H, 0)]).unwrap(),
                Cycle::new(CycleKind::Hard, 1, vec![Gate::single(GateKind::Z45, 0)]).unwrap(),
                Cycle::identity(CycleKind::Easy, 1),
            ],
        )
        .unwrap();
        let corr = twirl_correction(&c.cycles[1], &ps("X")).unwrap();
        // Rz(π/4) X Rz(π/4)† = (X + Y)/√2
        let want = (ps("X").to_matrix() + ps("Y").to_matrix()).scale(std::f64::consts::FRAC_1_SQRT_2);
        assert!(max_abs_diff(&corr[0], &want) < 1e-12);
        let r = randomize_with_twirls(&c, &[ps("X")]).unwrap();
        assert!(verify_equivalence(&c, &r.compiled).unwrap().deviation < 1e-10);
    }

    #[test]
    fn z_twirl_before_cx_propagates_to_zz() {
        let cx = Cycle::new(CycleKind::Hard, 2, vec![Gate::two(GateKind::CX, 0, 1)]).unwrap();
        // Z on the target picks up Z on the control
        let corr = clifford_conjugate(&cx, &ps("IZ")).unwrap();
        assert_eq!(corr, ps("ZZ"));
        let dense = cx.unitary(2) * ps("IZ").to_matrix() * cx.unitary(2).adjoint();
        assert!(max_abs_diff(&corr.to_matrix(), &dense) < 1e-14);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let base = Circuit::new(
            2,
            vec![
                Cycle::new(CycleKind::Easy, 2, vec![Gate::single(GateKind::H, 0), Gate::single(GateKind::T, 1)]).unwrap(),
                cx.clone(),
                Cycle::new(CycleKind::Easy, 2, vec![Gate::single(GateKind::X45, 0)]).unwrap(),
                cx,
                Cycle::identity(CycleKind::Easy, 2),
            ],
        )
        .unwrap();
        for _ in 0..10 {
            let r = randomize(&base, &mut rng).unwrap();
            assert_eq!(r.twirls.len(), 2);
            assert!(verify_equivalence(&base, &r.compiled).unwrap().equivalent);
        }
    }

    #[test]
    fn batch_is_deterministic() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let c = sample_random_circuit(4, 10, RandomMode::Multiqubit, &mut rng).unwrap();
        let a = randomize_batch(&c, 20, 42).unwrap();
        let b = randomize_batch(&c, 20, 42).unwrap();
        assert_eq!(a, b);
        assert_eq!(randomize_batch(&c, 1, 42).unwrap().len(), 1);
        assert!(randomize_batch(&c, 0, 42).is_err());
        for r in &a {
            assert!(verify_equivalence(&c, &r.compiled).unwrap().equivalent);
        }
    }

    #[test]
    fn equivalence_detects_an_extra_x() {
        let c = build_qft(2).unwrap();
        let same = verify_equivalence(&c, &c).unwrap();
        assert!(same.equivalent && same.deviation == 0.0);
        let mut bad = c.clone();
        let last = bad.cycles.len() - 1;
        bad.cycles[last] = recompile_cycle_pair(
            &c.cycles[last],
            &[identity(2), identity(2)],
            &[Gate::single(GateKind::X, 0).unitary(), identity(2)],
        )
        .unwrap();
        assert!(!verify_equivalence(&c, &bad).unwrap().equivalent);
    }

    #[test]
    fn depth_and_hard_cycles_preserved() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let c = sample_random_circuit(3, 6, RandomMode::Multiqubit, &mut rng).unwrap();
        let r = randomize(&c, &mut rng).unwrap();
        assert_eq!(r.compiled.cycles.len(), c.cycles.len());
        for (a, b) in c.hard_cycles().zip(r.compiled.hard_cycles()) {
            assert_eq!(a, b);
        }
    }

    #[test]
    fn unsupported_hard_cycle_detected() {
        let weird = Cycle {
            kind: CycleKind::Hard,
            gates: vec![Gate::two(GateKind::CX, 0, 1), Gate::single(GateKind::T, 2)],
        };
        assert!(matches!(
            twirl_correction(&weird, &ps("XXX")),
            Err(Error::UnsupportedHardCycle(_))
        ));
    }
}
