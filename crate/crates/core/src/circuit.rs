//! Circuits as strictly alternating easy/hard cycles, plus the QFT and
//! random-circuit generators.

use std::f64::consts::PI;
use std::fmt::Write as _;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gates::{c1_gate, fold_to_u3, Gate, GateKind, C1};
use crate::linalg::{distance_up_to_phase, embed, identity, CMat, C64, ONE, ZERO};

/// Largest register for which dense unitaries are built.
pub const MAX_UNITARY_QUBITS: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CycleKind {
    Easy,
    Hard,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cycle {
    pub kind: CycleKind,
    pub gates: Vec<Gate>,
}

impl Cycle {
    /// Builds a cycle on `n` qubits, padding uncovered qubits with `I`.
    pub fn new(kind: CycleKind, n: usize, gates: Vec<Gate>) -> Result<Self> {
        let mut covered = vec![false; n];
        for g in &gates {
            for &q in &g.qubits {
                if q >= n {
                    return Err(Error::InvalidCircuit(format!("qubit {q} out of range for n={n}")));
                }
                covered[q] = true;
            }
        }
        let mut all = gates;
        for (q, done) in covered.iter().enumerate() {
            if !done {
                all.push(Gate::single(GateKind::I, q));
            }
        }
        all.sort_by_key(|g| g.qubits[0]);
        let cycle = Cycle { kind, gates: all };
        cycle.validate(n)?;
        Ok(cycle)
    }

    pub fn identity(kind: CycleKind, n: usize) -> Self {
        Cycle {
            kind,
            gates: (0..n).map(|q| Gate::single(GateKind::I, q)).collect(),
        }
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        let mut seen = vec![false; n];
        for g in &self.gates {
            g.validate()?;
            for &q in &g.qubits {
                if q >= n {
                    return Err(Error::InvalidCircuit(format!("qubit {q} out of range for n={n}")));
                }
                if seen[q] {
                    return Err(Error::InvalidCircuit(format!("qubit {q} used twice in one cycle")));
                }
                seen[q] = true;
            }
        }
        if let Some(q) = seen.iter().position(|s| !s) {
            return Err(Error::InvalidCircuit(format!("qubit {q} not covered by cycle")));
        }
        let two_qubit: Vec<&Gate> = self.gates.iter().filter(|g| g.is_two_qubit()).collect();
        match self.kind {
            CycleKind::Easy if !two_qubit.is_empty() => Err(Error::InvalidCircuit(
                "easy cycle contains a two-qubit gate".into(),
            )),
            CycleKind::Hard if two_qubit.len() > 1 => Err(Error::InvalidCircuit(
                "hard cycle contains more than one two-qubit gate".into(),
            )),
            CycleKind::Hard
                if two_qubit.len() == 1
                    && self.gates.iter().any(|g| !g.is_two_qubit() && !g.is_identity()) =>
            {
                Err(Error::InvalidCircuit(
                    "hard cycle mixes a two-qubit gate with non-identity single-qubit gates".into(),
                ))
            }
            _ => Ok(()),
        }
    }

    pub fn n(&self) -> usize {
        self.gates.iter().map(|g| g.qubits.len()).sum()
    }

    /// The two-qubit gate of a hard cycle, if any.
    pub fn entangler(&self) -> Option<&Gate> {
        self.gates.iter().find(|g| g.is_two_qubit())
    }

    /// Gate acting on qubit `q`.
    pub fn gate_on(&self, q: usize) -> Option<&Gate> {
        self.gates.iter().find(|g| g.qubits.contains(&q))
    }

    pub fn is_clifford(&self) -> bool {
        self.gates.iter().all(|g| g.name.is_clifford())
    }

    /// Canonical noise-model key: sorted `NAME(q,…)` terms joined by `;`.
    pub fn signature(&self) -> String {
        let mut terms: Vec<(String, Vec<usize>)> = self
            .gates
            .iter()
            .map(|g| (g.name.name().to_string(), g.qubits.clone()))
            .collect();
        terms.sort_by(|a, b| a.1[0].cmp(&b.1[0]).then_with(|| a.cmp(b)));
        let mut s = String::new();
        for (i, (name, qs)) in terms.iter().enumerate() {
            if i > 0 {
                s.push(';');
            }
            let qs: Vec<String> = qs.iter().map(|q| q.to_string()).collect();
            let _ = write!(s, "{name}({})", qs.join(","));
        }
        s
    }

    pub fn unitary(&self, n: usize) -> CMat {
        let mut u = identity(1 << n);
        for g in &self.gates {
            if g.is_identity() {
                continue;
            }
            u = embed(&g.unitary(), &g.qubits, n) * u;
        }
        u
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Circuit {
    pub n: usize,
    pub cycles: Vec<Cycle>,
}

impl Circuit {
    pub fn new(n: usize, cycles: Vec<Cycle>) -> Result<Self> {
        let c = Circuit { n, cycles };
        c.validate()?;
        Ok(c)
    }

    /// Checks gate validity, qubit coverage, and strict easy/hard alternation
    /// starting and ending with an easy cycle.
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidCircuit("circuit has no qubits".into()));
        }
        if self.cycles.len() % 2 == 0 {
            return Err(Error::InvalidCircuit(format!(
                "expected an odd number of alternating cycles, got {}",
                self.cycles.len()
            )));
        }
        for (i, cyc) in self.cycles.iter().enumerate() {
            let want = if i % 2 == 0 { CycleKind::Easy } else { CycleKind::Hard };
            if cyc.kind != want {
                return Err(Error::InvalidCircuit(format!("cycle {i} should be {want:?}")));
            }
            cyc.validate(self.n)?;
        }
        Ok(())
    }

    /// Number of hard cycles.
    pub fn depth(&self) -> usize {
        self.cycles.len() / 2
    }

    pub fn easy_cycles(&self) -> impl Iterator<Item = &Cycle> {
        self.cycles.iter().step_by(2)
    }

    pub fn hard_cycles(&self) -> impl Iterator<Item = &Cycle> {
        self.cycles.iter().skip(1).step_by(2)
    }

    pub fn unitary(&self) -> Result<CMat> {
        circuit_unitary(self)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let c: Circuit = serde_json::from_str(s)?;
        c.validate()?;
        Ok(c)
    }

    /// Prepends single-qubit state-preparation unitaries to the first easy
    /// cycle.
    pub fn with_input_unitaries(&self, prep: &[CMat]) -> Result<Circuit> {
        if prep.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: prep.len(),
            });
        }
        let mut out = self.clone();
        let first = &self.cycles[0];
        let identity2 = vec![identity(2); self.n];
        out.cycles[0] = crate::compile::recompile_cycle_pair(first, prep, &identity2)?;
        Ok(out)
    }
}

/// Ordered product of cycle unitaries, earliest cycle applied first.
pub fn circuit_unitary(c: &Circuit) -> Result<CMat> {
    if c.n > MAX_UNITARY_QUBITS {
        return Err(Error::TooManyQubits(c.n, MAX_UNITARY_QUBITS));
    }
    let mut u = identity(1 << c.n);
    for cyc in &c.cycles {
        u = cyc.unitary(c.n) * u;
    }
    Ok(u)
}

fn phase_gate(lambda: f64) -> CMat {
    CMat::from_row_slice(2, 2, &[ONE, ZERO, ZERO, C64::from_polar(1.0, lambda)])
}

enum Op {
    One(usize, Gate),
    Cx(usize, usize),
}

/// Greedy packing of a gate list into alternating form: single-qubit gates
/// accumulate per qubit until the next CX, which becomes its own hard cycle.
/// A qubit that accumulated exactly one named gate keeps it; longer runs are
/// folded into one `U3`.
fn pack_alternating(n: usize, ops: Vec<Op>) -> Result<Circuit> {
    let mut pending: Vec<Vec<Gate>> = vec![Vec::new(); n];
    let mut cycles = Vec::new();
    let flush = |pending: &mut Vec<Vec<Gate>>| -> Result<Cycle> {
        let gates = pending
            .iter_mut()
            .enumerate()
            .map(|(q, run)| {
                let g = match run.len() {
                    0 => Gate::single(GateKind::I, q),
                    1 => run[0].clone(),
                    _ => {
                        let u = run.iter().fold(identity(2), |acc, g| g.unitary() * acc);
                        fold_to_u3(&u, q)
                    }
                };
                run.clear();
                g
            })
            .collect();
        Cycle::new(CycleKind::Easy, n, gates)
    };
    for op in ops {
        match op {
            Op::One(q, g) => pending[q].push(g),
            Op::Cx(ctrl, tgt) => {
                cycles.push(flush(&mut pending)?);
                cycles.push(Cycle::new(CycleKind::Hard, n, vec![Gate::two(GateKind::CX, ctrl, tgt)])?);
            }
        }
    }
    cycles.push(flush(&mut pending)?);
    Circuit::new(n, cycles)
}

/// `NAME(q,…)` terms of a cycle signature.
pub fn parse_signature(sig: &str) -> Result<Vec<(String, Vec<usize>)>> {
    sig.split(';')
        .map(|term| {
            let bad = || Error::InvalidArgument(format!("bad signature term `{term}`"));
            let (name, rest) = term.split_once('(').ok_or_else(bad)?;
            let inner = rest.strip_suffix(')').ok_or_else(bad)?;
            let qubits = inner
                .split(',')
                .map(|q| q.trim().parse::<usize>().map_err(|_| bad()))
                .collect::<Result<Vec<_>>>()?;
            Ok((name.trim().to_string(), qubits))
        })
        .collect()
}

/// Hard cycle from a signature such as `CX(1,0);I(2)`. Qubits not named in
/// the signature idle.
pub fn hard_cycle_from_signature(signature: &str, n: usize) -> Result<Cycle> {
    let gates = parse_signature(signature)?
        .into_iter()
        .filter(|(name, _)| name != "I")
        .map(|(name, qs)| {
            let kind: GateKind = name.parse()?;
            Gate::new(kind, qs)
        })
        .collect::<Result<Vec<_>>>()?;
    Cycle::new(CycleKind::Hard, n, gates)
}

/// Textbook QFT (Hadamards plus controlled phases, each controlled phase
/// realized with two CX) in alternating easy/hard form. The final qubit
/// reversal is not emitted: the unitary equals `R · F` where `F` is the DFT
/// and `R` the bit-reversal permutation.
pub fn build_qft(n: usize) -> Result<Circuit> {
    if !(1..=5).contains(&n) {
        return Err(Error::InvalidArgument(format!("QFT size {n} outside 1..=5")));
    }
    let mut ops = Vec::new();
    for j in 0..n {
        ops.push(Op::One(j, Gate::single(GateKind::H, j)));
        for k in (j + 1)..n {
            let lambda = PI / (1u64 << (k - j)) as f64;
            let (ctrl, tgt) = (k, j);
            ops.push(Op::One(ctrl, fold_to_u3(&phase_gate(lambda / 2.0), ctrl)));
            ops.push(Op::Cx(ctrl, tgt));
            ops.push(Op::One(tgt, fold_to_u3(&phase_gate(-lambda / 2.0), tgt)));
            ops.push(Op::Cx(ctrl, tgt));
            ops.push(Op::One(tgt, fold_to_u3(&phase_gate(lambda / 2.0), tgt)));
        }
    }
    pack_alternating(n, ops)
}

/// Gate-set families for random circuits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RandomMode {
    /// Easy: C1 ∪ {X45, Y45, T} per qubit; hard: one CX/CY/CZ on a
    /// nearest-neighbour pair of a linear chain.
    Multiqubit,
    /// Easy: C1 per qubit; hard: X45/Y45/T per qubit.
    Singlequbit,
}

const HARD_1Q: [GateKind; 3] = [GateKind::X45, GateKind::Y45, GateKind::T];
const HARD_2Q: [GateKind; 3] = [GateKind::CX, GateKind::CY, GateKind::CZ];

fn random_easy_gate<R: Rng + ?Sized>(q: usize, mode: RandomMode, rng: &mut R) -> Gate {
    let extra = match mode {
        RandomMode::Multiqubit => HARD_1Q.len(),
        RandomMode::Singlequbit => 0,
    };
    let k = rng.random_range(0..C1.len() + extra);
    if k < C1.len() {
        c1_gate(k, q)
    } else {
        Gate::single(HARD_1Q[k - C1.len()], q)
    }
}

/// Samples `k` interleaved easy/hard cycles (K hard cycles, K+1 easy).
pub fn sample_random_circuit<R: Rng + ?Sized>(
    n: usize,
    k: usize,
    mode: RandomMode,
    rng: &mut R,
) -> Result<Circuit> {
    if k == 0 {
        return Err(Error::InvalidArgument("random circuit depth must be at least 1".into()));
    }
    if n == 0 || (mode == RandomMode::Multiqubit && n < 2) {
        return Err(Error::InvalidArgument(format!(
            "{n} qubit(s) is too few for {mode:?} random circuits"
        )));
    }
    let mut cycles = Vec::with_capacity(2 * k + 1);
    for layer in 0..=k {
        let easy = (0..n).map(|q| random_easy_gate(q, mode, rng)).collect();
        cycles.push(Cycle::new(CycleKind::Easy, n, easy)?);
        if layer == k {
            break;
        }
        let hard = match mode {
            RandomMode::Multiqubit => {
                let kind = HARD_2Q[rng.random_range(0..HARD_2Q.len())];
                let left = rng.random_range(0..n - 1);
                let (ctrl, tgt) = if rng.random_bool(0.5) {
                    (left, left + 1)
                } else {
                    (left + 1, left)
                };
                vec![Gate::two(kind, ctrl, tgt)]
            }
            RandomMode::Singlequbit => (0..n)
                .map(|q| Gate::single(HARD_1Q[rng.random_range(0..HARD_1Q.len())], q))
                .collect(),
        };
        cycles.push(Cycle::new(CycleKind::Hard, n, hard)?);
    }
    Circuit::new(n, cycles)
}

/// `true` when `u` is the identity up to global phase.
pub fn is_identity_up_to_phase(u: &CMat, tol: f64) -> bool {
    distance_up_to_phase(&identity(u.nrows()), u) < tol
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn signature_roundtrip() {
        assert_eq!(
            parse_signature("I(0);CX(2,1)").unwrap(),
            vec![("I".to_string(), vec![0]), ("CX".to_string(), vec![2, 1])]
        );
        assert!(parse_signature("CX(1").is_err());
        let c = hard_cycle_from_signature("CX(2,1)", 4).unwrap();
        assert_eq!(c.signature(), "I(0);CX(2,1);I(3)");
        assert!(hard_cycle_from_signature("FOO(0)", 1).is_err());
    }
    use crate::linalg::{max_abs_diff, I};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn dft(n: usize) -> CMat {
        let dim = 1usize << n;
        let w = 2.0 * PI / dim as f64;
        CMat::from_fn(dim, dim, |j, k| {
            C64::from_polar(1.0 / (dim as f64).sqrt(), w * (j * k) as f64)
        })
    }

    fn bit_reverse(i: usize, n: usize) -> usize {
        (0..n).fold(0, |acc, b| (acc << 1) | ((i >> b) & 1))
    }

    #[test]
    fn single_easy_cycle_of_h() {
        let c = Circuit::new(
            1,
            vec![Cycle::new(CycleKind::Easy, 1, vec![Gate::single(GateKind::H, 0)]).unwrap()],
        )
        .unwrap();
        let u = c.unitary().unwrap();
        assert!(max_abs_diff(&u, &Gate::single(GateKind::H, 0).unitary()) < 1e-15);
        let empty = Circuit::new(2, vec![Cycle::identity(CycleKind::Easy, 2)]).unwrap();
        assert!(max_abs_diff(&empty.unitary().unwrap(), &identity(4)) < 1e-15);
    }

    #[test]
    fn qft_matches_bit_reversed_dft() {
        for n in 1..=4 {
            let c = build_qft(n).unwrap();
            let f = dft(n);
            let dim = 1 << n;
            let want = CMat::from_fn(dim, dim, |r, col| f[(bit_reverse(r, n), col)]);
            let got = c.unitary().unwrap();
            assert!(distance_up_to_phase(&want, &got) < 1e-9, "n={n}");
        }
        // two-qubit DFT entries are i^{jk}/2
        let f2 = dft(2);
        assert!((f2[(1, 1)] - I * 0.5).norm() < 1e-15);
    }

    #[test]
    fn qft_structure() {
        let c1 = build_qft(1).unwrap();
        assert_eq!(c1.cycles.len(), 1);
        assert_eq!(c1.cycles[0].gates[0].name, GateKind::H);
        let c4 = build_qft(4).unwrap();
        assert_eq!(c4.depth(), 12);
        assert!(build_qft(0).is_err());
        assert!(build_qft(6).is_err());
    }

    #[test]
    fn seeded_random_circuit_is_reproducible() {
        let a = sample_random_circuit(1, 1, RandomMode::Singlequbit, &mut ChaCha8Rng::seed_from_u64(7)).unwrap();
        let b = sample_random_circuit(1, 1, RandomMode::Singlequbit, &mut ChaCha8Rng::seed_from_u64(7)).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.cycles.len(), 3);
        assert!(sample_random_circuit(2, 0, RandomMode::Multiqubit, &mut ChaCha8Rng::seed_from_u64(7)).is_err());
    }

    #[test]
    fn random_multiqubit_hard_cycles_use_adjacent_pairs() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..1000 {
            let c = sample_random_circuit(4, 10, RandomMode::Multiqubit, &mut rng).unwrap();
            for h in c.hard_cycles() {
                let two: Vec<_> = h.gates.iter().filter(|g| g.is_two_qubit()).collect();
                assert_eq!(two.len(), 1);
                assert_eq!(two[0].qubits[0].abs_diff(two[0].qubits[1]), 1);
            }
        }
    }

    #[test]
    fn validation_rejects_bad_shapes() {
        let easy = Cycle::identity(CycleKind::Easy, 2);
        let hard = Cycle::identity(CycleKind::Hard, 2);
        assert!(Circuit::new(2, vec![easy.clone(), hard.clone()]).is_err());
        assert!(Circuit::new(2, vec![hard.clone()]).is_err());
        assert!(Circuit::new(2, vec![easy.clone(), easy.clone(), easy.clone()]).is_err());
        assert!(Cycle::new(CycleKind::Easy, 2, vec![Gate::two(GateKind::CX, 0, 1)]).is_err());
        assert!(Cycle::new(
            CycleKind::Hard,
            3,
            vec![Gate::two(GateKind::CX, 0, 1), Gate::single(GateKind::T, 2)]
        )
        .is_err());
    }

    #[test]
    fn signature_is_canonical() {
        let a = Cycle::new(CycleKind::Hard, 3, vec![Gate::two(GateKind::CX, 2, 1)]).unwrap();
        assert_eq!(a.signature(), "I(0);CX(2,1)");
        let b = Cycle::new(CycleKind::Hard, 2, vec![Gate::single(GateKind::T, 1), Gate::single(GateKind::X45, 0)]).unwrap();
        assert_eq!(b.signature(), "X45(0);T(1)");
    }

    #[test]
    fn json_roundtrip_is_lossless() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let c = sample_random_circuit(3, 4, RandomMode::Multiqubit, &mut rng).unwrap();
        let back = Circuit::from_json(&c.to_json().unwrap()).unwrap();
        assert_eq!(c, back);
    }
}
