//! Symplectic conjugation of Pauli strings through Clifford cycles.

use crate::circuit::Cycle;
use crate::error::{Error, Result};
use crate::gates::{Gate, GateKind};
use crate::pauli::{Pauli, PauliString, Phase};

/// Images of the local generators `X` and `Z` (one entry per gate qubit, in
/// gate-qubit order) as signed local Pauli words.
fn generator_images(kind: GateKind) -> Option<&'static [(&'static str, &'static str)]> {
    // (image of X_k, image of Z_k) for each qubit k of the gate
    let table: &'static [(&'static str, &'static str)] = match kind {
        GateKind::I => &[("X", "Z")],
        GateKind::X => &[("X", "-Z")],
        GateKind::Y => &[("-X", "-Z")],
        GateKind::Z => &[("-X", "Z")],
        GateKind::H => &[("Z", "X")],
        GateKind::S => &[("Y", "Z")],
        GateKind::Sdg => &[("-Y", "Z")],
        GateKind::CX => &[("XX", "ZI"), ("IX", "ZZ")],
        GateKind::CY => &[("XY", "ZI"), ("ZX", "ZZ")],
        GateKind::CZ => &[("XZ", "ZI"), ("ZX", "IZ")],
        _ => return None,
    };
    Some(table)
}

/// Places a local signed word onto `qubits` of an `n`-qubit register.
fn lift(word: &str, qubits: &[usize], n: usize) -> PauliString {
    let local: PauliString = word.parse().expect("static table entries are valid");
    let mut out = PauliString::identity(n).with_phase(local.phase());
    for (k, &q) in qubits.iter().enumerate() {
        out.set(q, local.get(k));
    }
    out
}

/// `G P G†` for a single Clifford gate.
pub fn conjugate_gate(gate: &Gate, p: &PauliString) -> Result<PauliString> {
    let images = generator_images(gate.name)
        .ok_or_else(|| Error::UnsupportedConjugation(gate.name.to_string()))?;
    let n = p.n();
    let mut out = PauliString::identity(n).with_phase(p.phase());
    for q in 0..n {
        let label = p.get(q);
        if label == Pauli::I {
            continue;
        }
        let factor = match gate.qubits.iter().position(|&gq| gq == q) {
            None => PauliString::single(n, q, label),
            Some(k) => {
                let (ix, iz) = images[k];
                let gx = lift(ix, &gate.qubits, n);
                let gz = lift(iz, &gate.qubits, n);
                match label {
                    Pauli::X => gx,
                    Pauli::Z => gz,
                    // Y = i·X·Z
                    Pauli::Y => {
                        let xz = gx.mul(&gz)?;
                        xz.with_phase(xz.phase() * Phase::I)
                    }
                    Pauli::I => unreachable!(),
                }
            }
        };
        out = out.mul(&factor)?;
    }
    Ok(out)
}

/// `G P G†` for a whole Clifford cycle.
pub fn clifford_conjugate(cycle: &Cycle, p: &PauliString) -> Result<PauliString> {
    let n = cycle.n();
    if p.n() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: p.n(),
        });
    }
    let mut out = *p;
    for g in &cycle.gates {
        if g.is_identity() {
            continue;
        }
        out = conjugate_gate(g, &out)?;
    }
    Ok(out)
}
