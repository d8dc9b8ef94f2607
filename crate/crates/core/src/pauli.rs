//! Signed Pauli strings in symplectic form, the Pauli index convention, and
//! the Walsh–Hadamard transform between Pauli error probabilities and Pauli
//! eigenvalues.
//!
//! Index convention: per-qubit labels are ordered `I < X < Y < Z` and qubit 0
//! is the most significant base-4 digit, so for two qubits the order is
//! `II, IX, IY, IZ, XI, XX, ...`. Every 4^n-long vector in this crate (PTM
//! rows, probability vectors, eigenvalue vectors) uses this order.

use std::fmt;
use std::ops::Mul;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{CMat, C64, ZERO};

pub const MAX_PAULI_QUBITS: usize = 32;

/// Power of `i`: 0 → +1, 1 → +i, 2 → −1, 3 → −i.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Phase(u8);

impl Phase {
    pub const ONE: Phase = Phase(0);
    pub const I: Phase = Phase(1);
    pub const MINUS_ONE: Phase = Phase(2);
    pub const MINUS_I: Phase = Phase(3);

    pub fn from_power(k: i32) -> Self {
        Phase(k.rem_euclid(4) as u8)
    }

    pub fn power(self) -> u8 {
        self.0
    }

    pub fn to_complex(self) -> C64 {
        match self.0 {
            0 => C64::new(1.0, 0.0),
            1 => C64::new(0.0, 1.0),
            2 => C64::new(-1.0, 0.0),
            _ => C64::new(0.0, -1.0),
        }
    }

    pub fn conj(self) -> Self {
        Phase::from_power(-(self.0 as i32))
    }

    /// `Some(±1)` for real phases.
    pub fn sign(self) -> Option<f64> {
        match self.0 {
            0 => Some(1.0),
            2 => Some(-1.0),
            _ => None,
        }
    }
}

impl Mul for Phase {
    type Output = Phase;
    fn mul(self, rhs: Phase) -> Phase {
        Phase((self.0 + rhs.0) % 4)
    }
}

/// Single-qubit Pauli label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub const ALL: [Pauli; 4] = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];

    pub fn from_bits(x: bool, z: bool) -> Self {
        match (x, z) {
            (false, false) => Pauli::I,
            (true, false) => Pauli::X,
            (true, true) => Pauli::Y,
            (false, true) => Pauli::Z,
        }
    }

    pub fn bits(self) -> (bool, bool) {
        match self {
            Pauli::I => (false, false),
            Pauli::X => (true, false),
            Pauli::Y => (true, true),
            Pauli::Z => (false, true),
        }
    }

    pub fn code(self) -> usize {
        self as usize
    }

    pub fn from_code(code: usize) -> Self {
        Pauli::ALL[code & 3]
    }

    pub fn as_char(self) -> char {
        ['I', 'X', 'Y', 'Z'][self as usize]
    }

    pub fn from_char(ch: char) -> Option<Self> {
        match ch {
            'I' => Some(Pauli::I),
            'X' => Some(Pauli::X),
            'Y' => Some(Pauli::Y),
            'Z' => Some(Pauli::Z),
            _ => None,
        }
    }
}

/// An n-qubit Pauli operator `phase · σ(x_0,z_0) ⊗ … ⊗ σ(x_{n-1},z_{n-1})`
/// where `σ(1,1) = Y` (Hermitian convention). Bit `q` of `x`/`z` is qubit `q`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PauliString {
    n: usize,
    x: u64,
    z: u64,
    phase: Phase,
}

/// Exponent of `i` in `σ_a σ_b = i^g σ_{a⊕b}`.
fn product_exponent(x1: bool, z1: bool, x2: bool, z2: bool) -> i32 {
    let (x2i, z2i) = (x2 as i32, z2 as i32);
    match (x1, z1) {
        (false, false) => 0,
        (true, true) => z2i - x2i,
        (true, false) => z2i * (2 * x2i - 1),
        (false, true) => x2i * (1 - 2 * z2i),
    }
}

impl PauliString {
    pub fn identity(n: usize) -> Self {
        assert!(n <= MAX_PAULI_QUBITS, "too many qubits for PauliString");
        PauliString {
            n,
            x: 0,
            z: 0,
            phase: Phase::ONE,
        }
    }

    pub fn from_bits(n: usize, x: u64, z: u64, phase: Phase) -> Self {
        assert!(n <= MAX_PAULI_QUBITS, "too many qubits for PauliString");
        let mask = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
        PauliString {
            n,
            x: x & mask,
            z: z & mask,
            phase,
        }
    }

    pub fn from_labels(labels: &[Pauli]) -> Self {
        let mut p = PauliString::identity(labels.len());
        for (q, l) in labels.iter().enumerate() {
            p.set(q, *l);
        }
        p
    }

    /// Single-qubit Pauli `label` on qubit `q` of an `n`-qubit register.
    pub fn single(n: usize, q: usize, label: Pauli) -> Self {
        let mut p = PauliString::identity(n);
        p.set(q, label);
        p
    }

    /// Unsigned Pauli with the given lexicographic index.
    pub fn from_index(n: usize, index: usize) -> Self {
        let mut p = PauliString::identity(n);
        for q in 0..n {
            let code = (index >> (2 * (n - 1 - q))) & 3;
            p.set(q, Pauli::from_code(code));
        }
        p
    }

    /// All 4^n unsigned Paulis in index order.
    pub fn all(n: usize) -> impl Iterator<Item = PauliString> {
        (0..1usize << (2 * n)).map(move |i| PauliString::from_index(n, i))
    }

    pub fn index(&self) -> usize {
        (0..self.n).fold(0, |acc, q| (acc << 2) | self.get(q).code())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn x_bits(&self) -> u64 {
        self.x
    }

    pub fn z_bits(&self) -> u64 {
        self.z
    }

    pub fn phase(&self) -> Phase {
        self.phase
    }

    pub fn with_phase(mut self, phase: Phase) -> Self {
        self.phase = phase;
        self
    }

    pub fn unsigned(self) -> Self {
        self.with_phase(Phase::ONE)
    }

    pub fn get(&self, q: usize) -> Pauli {
        Pauli::from_bits((self.x >> q) & 1 == 1, (self.z >> q) & 1 == 1)
    }

    pub fn set(&mut self, q: usize, label: Pauli) {
        assert!(q < self.n);
        let (xb, zb) = label.bits();
        self.x = (self.x & !(1 << q)) | ((xb as u64) << q);
        self.z = (self.z & !(1 << q)) | ((zb as u64) << q);
    }

    pub fn labels(&self) -> Vec<Pauli> {
        (0..self.n).map(|q| self.get(q)).collect()
    }

    pub fn is_identity(&self) -> bool {
        self.x == 0 && self.z == 0
    }

    /// Number of non-identity tensor factors.
    pub fn weight(&self) -> usize {
        (self.x | self.z).count_ones() as usize
    }

    pub fn support(&self) -> Vec<usize> {
        (0..self.n).filter(|&q| self.get(q) != Pauli::I).collect()
    }

    pub fn commutes_with(&self, other: &PauliString) -> bool {
        ((self.x & other.z).count_ones() + (self.z & other.x).count_ones()) % 2 == 0
    }

    /// Signed product `self · other`.
    pub fn mul(&self, other: &PauliString) -> Result<PauliString> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: other.n,
            });
        }
        let mut g: i32 = (self.phase.power() + other.phase.power()) as i32;
        for q in 0..self.n {
            let (x1, z1) = ((self.x >> q) & 1 == 1, (self.z >> q) & 1 == 1);
            let (x2, z2) = ((other.x >> q) & 1 == 1, (other.z >> q) & 1 == 1);
            g += product_exponent(x1, z1, x2, z2);
        }
        Ok(PauliString {
            n: self.n,
            x: self.x ^ other.x,
            z: self.z ^ other.z,
            phase: Phase::from_power(g),
        })
    }

    /// Adjoint: Paulis are Hermitian, so only the phase conjugates.
    pub fn adjoint(&self) -> PauliString {
        self.with_phase(self.phase.conj())
    }

    /// Restriction to `qubits` (in the given order), dropping the phase.
    pub fn restrict(&self, qubits: &[usize]) -> PauliString {
        PauliString::from_labels(&qubits.iter().map(|&q| self.get(q)).collect::<Vec<_>>())
    }

    /// Dense `2^n × 2^n` matrix including the phase.
    pub fn to_matrix(&self) -> CMat {
        let dim = 1usize << self.n;
        let mut m = CMat::from_element(dim, dim, ZERO);
        for col in 0..dim {
            let (row, v) = self.apply_to_basis(col);
            m[(row, col)] = v;
        }
        m
    }

    /// `P|col⟩ = v |row⟩`, with basis bit `n-1-q` holding qubit `q`.
    pub fn apply_to_basis(&self, col: usize) -> (usize, C64) {
        let n = self.n;
        let mut row = col;
        let mut ph = self.phase.power() as i32;
        for q in 0..n {
            let bit = (col >> (n - 1 - q)) & 1;
            match self.get(q) {
                Pauli::I => {}
                Pauli::X => row ^= 1 << (n - 1 - q),
                Pauli::Y => {
                    row ^= 1 << (n - 1 - q);
                    ph += if bit == 0 { 1 } else { 3 };
                }
                Pauli::Z => {
                    if bit == 1 {
                        ph += 2;
                    }
                }
            }
        }
        (row, Phase::from_power(ph).to_complex())
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let prefix = match self.phase.power() {
            0 => "+",
            1 => "+i",
            2 => "-",
            _ => "-i",
        };
        write!(f, "{prefix}")?;
        for q in 0..self.n {
            write!(f, "{}", self.get(q).as_char())?;
        }
        Ok(())
    }
}

impl FromStr for PauliString {
    type Err = Error;

    /// Accepts an optional sign prefix (`+`, `-`, `+i`, `-i`, `i`) followed by
    /// one label per qubit.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (phase, body) = if let Some(rest) = s.strip_prefix("+i") {
            (Phase::I, rest)
        } else if let Some(rest) = s.strip_prefix("-i") {
            (Phase::MINUS_I, rest)
        } else if let Some(rest) = s.strip_prefix('i') {
            (Phase::I, rest)
        } else if let Some(rest) = s.strip_prefix('+') {
            (Phase::ONE, rest)
        } else if let Some(rest) = s.strip_prefix('-') {
            (Phase::MINUS_ONE, rest)
        } else {
            (Phase::ONE, s)
        };
        let labels = body
            .chars()
            .map(|ch| {
                Pauli::from_char(ch)
                    .ok_or_else(|| Error::InvalidArgument(format!("bad Pauli label `{ch}` in `{s}`")))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(PauliString::from_labels(&labels).with_phase(phase))
    }
}

impl Serialize for PauliString {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for PauliString {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Qubit count for a vector of length 4^n.
pub fn qubits_of_len(len: usize) -> Result<usize> {
    if len == 0 || !len.is_power_of_two() || len.trailing_zeros() % 2 != 0 {
        return Err(Error::NotPowerOfFour(len));
    }
    Ok((len.trailing_zeros() / 2) as usize)
}

const W1: [[f64; 4]; 4] = [
    [1.0, 1.0, 1.0, 1.0],
    [1.0, 1.0, -1.0, -1.0],
    [1.0, -1.0, 1.0, -1.0],
    [1.0, -1.0, -1.0, 1.0],
];

fn transform_in_place(v: &mut [f64]) {
    let len = v.len();
    let mut stride = 1;
    while stride < len {
        for block in (0..len).step_by(4 * stride) {
            for off in 0..stride {
                let idx = [
                    block + off,
                    block + off + stride,
                    block + off + 2 * stride,
                    block + off + 3 * stride,
                ];
                let a = idx.map(|i| v[i]);
                for (r, &i) in idx.iter().enumerate() {
                    v[i] = (0..4).map(|k| W1[r][k] * a[k]).sum();
                }
            }
        }
        stride *= 4;
    }
}

/// `p_Q = Σ_P c_P (−1)^{⟨P,Q⟩}` where `⟨P,Q⟩` is 1 when P and Q anticommute.
pub fn walsh_hadamard(c: &[f64]) -> Result<Vec<f64>> {
    qubits_of_len(c.len())?;
    let mut v = c.to_vec();
    transform_in_place(&mut v);
    Ok(v)
}

/// Inverse of [`walsh_hadamard`]: the same transform scaled by `4^{-n}`.
pub fn inverse_walsh_hadamard(p: &[f64]) -> Result<Vec<f64>> {
    qubits_of_len(p.len())?;
    let mut v = p.to_vec();
    transform_in_place(&mut v);
    let scale = 1.0 / v.len() as f64;
    v.iter_mut().for_each(|x| *x *= scale);
    Ok(v)
}

/// Pauli error probabilities `c_P` of a Pauli channel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PauliProbabilities {
    n: usize,
    c: Vec<f64>,
}

impl PauliProbabilities {
    pub const SIMPLEX_TOL: f64 = 1e-9;

    /// Validates nonnegativity and unit sum (to [`Self::SIMPLEX_TOL`]).
    pub fn new(c: Vec<f64>) -> Result<Self> {
        let n = qubits_of_len(c.len())?;
        if let Some(bad) = c.iter().find(|x| !x.is_finite() || **x < -Self::SIMPLEX_TOL) {
            return Err(Error::InvalidProbabilities(format!("entry {bad} is negative")));
        }
        let sum: f64 = c.iter().sum();
        if (sum - 1.0).abs() > Self::SIMPLEX_TOL {
            return Err(Error::InvalidProbabilities(format!("entries sum to {sum}")));
        }
        Ok(PauliProbabilities { n, c })
    }

    pub fn identity(n: usize) -> Self {
        let mut c = vec![0.0; 1 << (2 * n)];
        c[0] = 1.0;
        PauliProbabilities { n, c }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.c
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.c
    }

    pub fn get(&self, p: &PauliString) -> f64 {
        self.c[p.index()]
    }

    pub fn to_eigenvalues(&self) -> PauliEigenvalues {
        PauliEigenvalues {
            n: self.n,
            p: walsh_hadamard(&self.c).expect("length checked at construction"),
        }
    }

    /// Probability mass on all Paulis whose restriction to `qubits` equals
    /// `labels` (in the same order), irrespective of the other qubits.
    pub fn marginal(&self, qubits: &[usize], labels: &[Pauli]) -> f64 {
        PauliString::all(self.n)
            .filter(|p| qubits.iter().zip(labels).all(|(&q, &l)| p.get(q) == l))
            .map(|p| self.c[p.index()])
            .sum()
    }

    /// Marginal distribution on `qubits`, as a probability vector on
    /// `qubits.len()` qubits.
    pub fn reduce(&self, qubits: &[usize]) -> PauliProbabilities {
        let k = qubits.len();
        let mut out = vec![0.0; 1 << (2 * k)];
        for p in PauliString::all(self.n) {
            out[p.restrict(qubits).index()] += self.c[p.index()];
        }
        PauliProbabilities { n: k, c: out }
    }
}

/// Pauli eigenvalues `p_P` (the diagonal of a Pauli channel's PTM).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PauliEigenvalues {
    n: usize,
    p: Vec<f64>,
}

impl PauliEigenvalues {
    pub fn new(p: Vec<f64>) -> Result<Self> {
        let n = qubits_of_len(p.len())?;
        Ok(PauliEigenvalues { n, p })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.p
    }

    /// Unclipped inverse transform; may contain small negative entries when
    /// the eigenvalues are noisy.
    pub fn to_raw_probabilities(&self) -> Vec<f64> {
        inverse_walsh_hadamard(&self.p).expect("length checked at construction")
    }
}
