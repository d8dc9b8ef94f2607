//! Folding of single-qubit gate sequences back into one easy cycle, and the
//! optional CY/CZ → CX rewrite.

use crate::circuit::{Circuit, Cycle, CycleKind};
use crate::error::{Error, Result};
use crate::gates::{fold_to_u3, Gate, GateKind};
use crate::linalg::{check_unitary, identity, CMat};

/// Per-qubit `after · C · before`, folded into one `U3` per qubit. The cycle
/// depth is unchanged.
pub fn recompile_cycle_pair(easy: &Cycle, before: &[CMat], after: &[CMat]) -> Result<Cycle> {
    if easy.kind != CycleKind::Easy {
        return Err(Error::InvalidCircuit("only easy cycles can be recompiled".into()));
    }
    let n = easy.n();
    for (what, v) in [("before", before), ("after", after)] {
        if v.len() != n {
            return Err(Error::InvalidArgument(format!(
                "{what}: {} corrections for a {n}-qubit cycle",
                v.len()
            )));
        }
        for m in v {
            if m.shape() != (2, 2) {
                return Err(Error::InvalidArgument(format!("{what}: correction is not 2×2")));
            }
            check_unitary(m, 1e-9)?;
        }
    }
    let gates = (0..n)
        .map(|q| {
            let g = easy.gate_on(q).expect("easy cycle covers all qubits");
            let u = &after[q] * g.unitary() * &before[q];
            fold_to_u3(&u, q)
        })
        .collect();
    Cycle::new(CycleKind::Easy, n, gates)
}

/// Rewrites CY and CZ hard cycles to CX with target-qubit basis changes
/// folded into the neighbouring easy cycles. Depth is preserved.
pub fn native_cx(c: &Circuit) -> Result<Circuit> {
    let n = c.n;
    let mut cycles = c.cycles.clone();
    for h in (1..cycles.len()).step_by(2) {
        let Some(g) = cycles[h].entangler().cloned() else {
            continue;
        };
        // CY = (I⊗S)·CX·(I⊗S†), CZ = (I⊗H)·CX·(I⊗H)
        let (pre, post) = match g.name {
            GateKind::CY => (GateKind::Sdg, GateKind::S),
            GateKind::CZ => (GateKind::H, GateKind::H),
            _ => continue,
        };
        let tgt = g.qubits[1];
        cycles[h] = Cycle::new(CycleKind::Hard, n, vec![Gate::two(GateKind::CX, g.qubits[0], tgt)])?;
        let mut after = vec![identity(2); n];
        after[tgt] = Gate::single(pre, tgt).unitary();
        cycles[h - 1] = recompile_cycle_pair(&cycles[h - 1], &vec![identity(2); n], &after)?;
        let mut before = vec![identity(2); n];
        before[tgt] = Gate::single(post, tgt).unitary();
        cycles[h + 1] = recompile_cycle_pair(&cycles[h + 1], &before, &vec![identity(2); n])?;
    }
    Circuit::new(n, cycles)
}

/// Replaces every gate of an easy cycle by its `U3` form (used when a cycle
/// must carry arbitrary angles).
pub fn easy_cycle_as_u3(easy: &Cycle) -> Result<Cycle> {
    let n = easy.n();
    recompile_cycle_pair(easy, &vec![identity(2); n], &vec![identity(2); n])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{sample_random_circuit, RandomMode};
    use crate::gates::{u3_matrix, zyz_angles};
    use crate::linalg::distance_up_to_phase;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn x() -> CMat {
        Gate::single(GateKind::X, 0).unitary()
    }

    #[test]
    fn x_then_x_folds_to_identity() {
        let easy = Cycle::new(CycleKind::Easy, 1, vec![Gate::single(GateKind::X, 0)]).unwrap();
        let out = recompile_cycle_pair(&easy, &[identity(2)], &[x()]).unwrap();
        let g = &out.gates[0];
        assert_eq!(g.name, GateKind::U3);
        assert!(g.params[0].abs() < 1e-12);
        assert!(distance_up_to_phase(&identity(2), &g.unitary()) < 1e-12);
    }

    #[test]
    fn z_twirl_into_h() {
        let easy = Cycle::new(CycleKind::Easy, 1, vec![Gate::single(GateKind::H, 0)]).unwrap();
        let z = Gate::single(GateKind::Z, 0).unitary();
        let out = recompile_cycle_pair(&easy, &[z.clone()], &[identity(2)]).unwrap();
        let want = Gate::single(GateKind::H, 0).unitary() * z;
        assert!(distance_up_to_phase(&want, &out.gates[0].unitary()) < 1e-12);
    }

    #[test]
    fn t_correction_through_x45() {
        // G T† G† with G = X45, folded into an idle easy cycle
        let g = Gate::single(GateKind::X45, 0).unitary();
        let t = Gate::single(GateKind::T, 0).unitary();
        let corr = &g * t.adjoint() * g.adjoint();
        let easy = Cycle::identity(CycleKind::Easy, 1);
        let out = recompile_cycle_pair(&easy, &[corr.clone()], &[identity(2)]).unwrap();
        let (th, ph, la) = zyz_angles(&corr);
        let p = &out.gates[0].params;
        assert!(distance_up_to_phase(&u3_matrix(th, ph, la), &u3_matrix(p[0], p[1], p[2])) < 1e-12);
        assert!(distance_up_to_phase(&corr, &out.gates[0].unitary()) < 1e-12);
    }

    #[test]
    fn rejects_non_unitary_corrections() {
        let easy = Cycle::identity(CycleKind::Easy, 1);
        let bad = identity(2).scale(2.0);
        assert!(recompile_cycle_pair(&easy, &[bad], &[identity(2)]).is_err());
    }

    #[test]
    fn native_cx_preserves_unitary_and_depth() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let c = sample_random_circuit(3, 6, RandomMode::Multiqubit, &mut rng).unwrap();
            let d = native_cx(&c).unwrap();
            assert_eq!(c.cycles.len(), d.cycles.len());
            assert!(d.hard_cycles().all(|h| h.entangler().unwrap().name == GateKind::CX));
            let (uc, ud) = (c.unitary().unwrap(), d.unitary().unwrap());
            assert!(distance_up_to_phase(&uc, &ud) < 1e-10);
        }
    }
}
