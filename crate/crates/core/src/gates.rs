//! Gate vocabulary, unitary realizations, ZYZ folding into `U3`, and the
//! canonical table of the 24 single-qubit Cliffords.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_4, PI};
use std::fmt;
use std::sync::LazyLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{c, distance_up_to_phase, identity, mat2, CMat, C64, I, ONE, ZERO};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum GateKind {
    I,
    X,
    Y,
    Z,
    H,
    S,
    Sdg,
    T,
    X45,
    Y45,
    Z45,
    U3,
    CX,
    CY,
    CZ,
}

impl GateKind {
    pub fn arity(self) -> usize {
        match self {
            GateKind::CX | GateKind::CY | GateKind::CZ => 2,
            _ => 1,
        }
    }

    pub fn param_count(self) -> usize {
        if self == GateKind::U3 {
            3
        } else {
            0
        }
    }

    /// Clifford by name; `U3` is treated as non-Clifford regardless of angles.
    pub fn is_clifford(self) -> bool {
        !matches!(
            self,
            GateKind::T | GateKind::X45 | GateKind::Y45 | GateKind::Z45 | GateKind::U3
        )
    }

    pub fn name(self) -> &'static str {
        match self {
            GateKind::I => "I",
            GateKind::X => "X",
            GateKind::Y => "Y",
            GateKind::Z => "Z",
            GateKind::H => "H",
            GateKind::S => "S",
            GateKind::Sdg => "Sdg",
            GateKind::T => "T",
            GateKind::X45 => "X45",
            GateKind::Y45 => "Y45",
            GateKind::Z45 => "Z45",
            GateKind::U3 => "U3",
            GateKind::CX => "CX",
            GateKind::CY => "CY",
            GateKind::CZ => "CZ",
        }
    }
}

impl std::str::FromStr for GateKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        use GateKind::*;
        [I, X, Y, Z, H, S, Sdg, T, X45, Y45, Z45, U3, CX, CY, CZ]
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::InvalidGate(format!("unknown gate `{s}`")))
    }
}

impl fmt::Display for GateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A gate placed on specific qubits. For controlled gates `qubits = [control, target]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Gate {
    pub name: GateKind,
    pub qubits: Vec<usize>,
    #[serde(default)]
    pub params: Vec<f64>,
}

impl Gate {
    pub fn new(name: GateKind, qubits: Vec<usize>) -> Result<Self> {
        let g = Gate {
            name,
            qubits,
            params: Vec::new(),
        };
        g.validate()?;
        Ok(g)
    }

    pub fn single(name: GateKind, q: usize) -> Self {
        debug_assert_eq!(name.arity(), 1);
        Gate {
            name,
            qubits: vec![q],
            params: Vec::new(),
        }
    }

    pub fn two(name: GateKind, control: usize, target: usize) -> Self {
        debug_assert_eq!(name.arity(), 2);
        Gate {
            name,
            qubits: vec![control, target],
            params: Vec::new(),
        }
    }

    pub fn u3(q: usize, theta: f64, phi: f64, lambda: f64) -> Self {
        Gate {
            name: GateKind::U3,
            qubits: vec![q],
            params: vec![theta, phi, lambda],
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.qubits.len() != self.name.arity() {
            return Err(Error::InvalidGate(format!(
                "{} acts on {} qubit(s), got {:?}",
                self.name,
                self.name.arity(),
                self.qubits
            )));
        }
        if self.qubits.len() == 2 && self.qubits[0] == self.qubits[1] {
            return Err(Error::InvalidGate(format!(
                "{} needs two distinct qubits, got {:?}",
                self.name, self.qubits
            )));
        }
        if self.params.len() != self.name.param_count() {
            return Err(Error::InvalidGate(format!(
                "{} takes {} parameter(s), got {}",
                self.name,
                self.name.param_count(),
                self.params.len()
            )));
        }
        if self.params.iter().any(|p| !p.is_finite()) {
            return Err(Error::InvalidGate(format!("{} has non-finite parameters", self.name)));
        }
        Ok(())
    }

    pub fn is_identity(&self) -> bool {
        self.name == GateKind::I
    }

    pub fn is_two_qubit(&self) -> bool {
        self.qubits.len() == 2
    }

    /// Local unitary on `self.qubits` (first listed qubit most significant).
    pub fn unitary(&self) -> CMat {
        match self.name {
            GateKind::U3 => u3_matrix(self.params[0], self.params[1], self.params[2]),
            GateKind::CX => controlled(&pauli_x()),
            GateKind::CY => controlled(&pauli_y()),
            GateKind::CZ => controlled(&pauli_z()),
            kind => single_qubit_matrix(kind),
        }
    }
}

pub fn pauli_x() -> CMat {
    mat2(ZERO, ONE, ONE, ZERO)
}

pub fn pauli_y() -> CMat {
    mat2(ZERO, -I, I, ZERO)
}

pub fn pauli_z() -> CMat {
    mat2(ONE, ZERO, ZERO, -ONE)
}

pub fn rx(theta: f64) -> CMat {
    let (s, co) = (theta / 2.0).sin_cos();
    mat2(c(co, 0.0), c(0.0, -s), c(0.0, -s), c(co, 0.0))
}

pub fn ry(theta: f64) -> CMat {
    let (s, co) = (theta / 2.0).sin_cos();
    mat2(c(co, 0.0), c(-s, 0.0), c(s, 0.0), c(co, 0.0))
}

pub fn rz(theta: f64) -> CMat {
    mat2(
        C64::from_polar(1.0, -theta / 2.0),
        ZERO,
        ZERO,
        C64::from_polar(1.0, theta / 2.0),
    )
}

pub fn u3_matrix(theta: f64, phi: f64, lambda: f64) -> CMat {
    let (s, co) = (theta / 2.0).sin_cos();
    mat2(
        c(co, 0.0),
        -C64::from_polar(s, lambda),
        C64::from_polar(s, phi),
        C64::from_polar(co, phi + lambda),
    )
}

fn single_qubit_matrix(kind: GateKind) -> CMat {
    let h = FRAC_1_SQRT_2;
    match kind {
        GateKind::I => identity(2),
        GateKind::X => pauli_x(),
        GateKind::Y => pauli_y(),
        GateKind::Z => pauli_z(),
        GateKind::H => mat2(c(h, 0.0), c(h, 0.0), c(h, 0.0), c(-h, 0.0)),
        GateKind::S => mat2(ONE, ZERO, ZERO, I),
        GateKind::Sdg => mat2(ONE, ZERO, ZERO, -I),
        GateKind::T => mat2(ONE, ZERO, ZERO, C64::from_polar(1.0, FRAC_PI_4)),
        GateKind::X45 => rx(FRAC_PI_4),
        GateKind::Y45 => ry(FRAC_PI_4),
        GateKind::Z45 => rz(FRAC_PI_4),
        other => unreachable!("{other} is not a fixed single-qubit gate"),
    }
}

fn controlled(u: &CMat) -> CMat {
    let mut m = CMat::zeros(4, 4);
    m[(0, 0)] = ONE;
    m[(1, 1)] = ONE;
    for r in 0..2 {
        for col in 0..2 {
            m[(2 + r, 2 + col)] = u[(r, col)];
        }
    }
    m
}

/// ZYZ Euler angles `(θ, φ, λ)` with `u ≅ U3(θ, φ, λ)` up to global phase.
pub fn zyz_angles(u: &CMat) -> (f64, f64, f64) {
    let det = u[(0, 0)] * u[(1, 1)] - u[(0, 1)] * u[(1, 0)];
    let v = u.map(|x| x / det.sqrt());
    let (a, b) = (v[(0, 0)], v[(1, 0)]);
    let theta = 2.0 * b.norm().atan2(a.norm());
    let (phi, lambda) = if b.norm() < 1e-12 {
        (-2.0 * a.arg(), 0.0)
    } else if a.norm() < 1e-12 {
        (2.0 * b.arg(), 0.0)
    } else {
        let sum = -2.0 * a.arg();
        let diff = 2.0 * b.arg();
        ((sum + diff) / 2.0, (sum - diff) / 2.0)
    };
    (theta, wrap_angle(phi), wrap_angle(lambda))
}

fn wrap_angle(a: f64) -> f64 {
    let w = (a + PI).rem_euclid(2.0 * PI) - PI;
    if w.abs() < 1e-15 {
        0.0
    } else {
        w
    }
}

/// Folds an arbitrary single-qubit unitary into a `U3` gate on `q`.
pub fn fold_to_u3(u: &CMat, q: usize) -> Gate {
    let (t, p, l) = zyz_angles(u);
    Gate::u3(q, t, p, l)
}

/// The 24 single-qubit Cliffords in a fixed order: breadth-first words over
/// `{H, S}` starting from the identity, deduplicated up to global phase.
pub static C1: LazyLock<Vec<CMat>> = LazyLock::new(|| {
    let gens = [single_qubit_matrix(GateKind::H), single_qubit_matrix(GateKind::S)];
    let mut found: Vec<CMat> = vec![identity(2)];
    let mut frontier = 0;
    while frontier < found.len() {
        let cur = found[frontier].clone();
        frontier += 1;
        for g in &gens {
            let next = g * &cur;
            if !found.iter().any(|m| distance_up_to_phase(m, &next) < 1e-9) {
                found.push(next);
            }
        }
    }
    assert_eq!(found.len(), 24, "single-qubit Clifford group has 24 elements");
    found
});

/// Clifford `index` (0..24) on qubit `q` as a `U3` gate.
pub fn c1_gate(index: usize, q: usize) -> Gate {
    fold_to_u3(&C1[index], q)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{check_unitary, max_abs_diff};

    #[test]
    fn every_gate_is_unitary() {
        for kind in [
            GateKind::I,
            GateKind::X,
            GateKind::Y,
            GateKind::Z,
            GateKind::H,
            GateKind::S,
            GateKind::Sdg,
            GateKind::T,
            GateKind::X45,
            GateKind::Y45,
            GateKind::Z45,
        ] {
            check_unitary(&Gate::single(kind, 0).unitary(), 1e-12).unwrap();
        }
        for kind in [GateKind::CX, GateKind::CY, GateKind::CZ] {
            check_unitary(&Gate::two(kind, 0, 1).unitary(), 1e-12).unwrap();
        }
        check_unitary(&Gate::u3(0, 0.3, -1.2, 2.0).unitary(), 1e-12).unwrap();
    }

    #[test]
    fn z45_is_t_up_to_phase() {
        let t = Gate::single(GateKind::T, 0).unitary();
        let z45 = Gate::single(GateKind::Z45, 0).unitary();
        assert!(distance_up_to_phase(&t, &z45) < 1e-14);
        // X45 squared is a quarter turn
        let x45 = Gate::single(GateKind::X45, 0).unitary();
        assert!(max_abs_diff(&(&x45 * &x45), &rx(PI / 2.0)) < 1e-14);
    }

    #[test]
    fn arity_and_params_validated() {
        assert!(Gate::new(GateKind::CX, vec![0]).is_err());
        assert!(Gate::new(GateKind::CX, vec![1, 1]).is_err());
        assert!(Gate::new(GateKind::H, vec![0, 1]).is_err());
        assert!(Gate::new(GateKind::U3, vec![0]).is_err());
        assert!(Gate::new(GateKind::CZ, vec![2, 0]).is_ok());
    }

    #[test]
    fn zyz_roundtrip_on_fixed_gates() {
        for m in C1.iter().chain([rx(0.7), ry(-2.1), rz(1e-9), pauli_y()].iter()) {
            let (t, p, l) = zyz_angles(m);
            assert!(distance_up_to_phase(m, &u3_matrix(t, p, l)) < 1e-10);
        }
    }

    #[test]
    fn clifford_table_is_a_group_of_24() {
        assert_eq!(C1.len(), 24);
        assert!(max_abs_diff(&C1[0], &identity(2)) < 1e-15);
        // closure: product of any two is in the table
        for a in C1.iter() {
            for b in C1.iter() {
                let p = a * b;
                assert!(C1.iter().any(|m| distance_up_to_phase(m, &p) < 1e-9));
            }
        }
    }
}
