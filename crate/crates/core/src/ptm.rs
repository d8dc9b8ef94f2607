//! Pauli transfer matrices in the normalized Pauli basis `P/√(2^n)`.

use std::ops::Mul;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg::{check_unitary, qubits_of_dim, CMat, C64};
use crate::pauli::{qubits_of_len, PauliString};

#[derive(Debug, Clone, PartialEq)]
pub struct Ptm {
    n: usize,
    m: DMatrix<f64>,
}

/// `Tr[P X]` for an unsigned Pauli and dense `X`.
pub fn pauli_trace(p: &PauliString, x: &CMat) -> C64 {
    let dim = x.nrows();
    (0..dim)
        .map(|col| {
            let (row, v) = p.apply_to_basis(col);
            v * x[(col, row)]
        })
        .sum()
}

/// `P X P†` for a Pauli `P` without forming dense products.
pub fn pauli_conjugate(p: &PauliString, x: &CMat) -> CMat {
    let dim = x.nrows();
    let images: Vec<(usize, C64)> = (0..dim).map(|c| p.apply_to_basis(c)).collect();
    let mut out = CMat::zeros(dim, dim);
    for (c1, &(r1, v1)) in images.iter().enumerate() {
        for (c2, &(r2, v2)) in images.iter().enumerate() {
            out[(r1, r2)] = v1 * x[(c1, c2)] * v2.conj();
        }
    }
    out
}

impl Ptm {
    pub fn from_matrix(m: DMatrix<f64>) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::DimensionMismatch {
                expected: m.nrows(),
                got: m.ncols(),
            });
        }
        let n = qubits_of_len(m.nrows())?;
        Ok(Ptm { n, m })
    }

    pub fn identity(n: usize) -> Self {
        let d = 1usize << (2 * n);
        Ptm {
            n,
            m: DMatrix::identity(d, d),
        }
    }

    /// Diagonal PTM (a Pauli channel with the given eigenvalues).
    pub fn diagonal(eigenvalues: &[f64]) -> Result<Self> {
        let n = qubits_of_len(eigenvalues.len())?;
        Ok(Ptm {
            n,
            m: DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(eigenvalues)),
        })
    }

    /// `Λ_{QP} = 2^{-n} Σ_k Tr[Q K_k P K_k†]`.
    pub fn from_kraus(kraus: &[CMat]) -> Result<Self> {
        let first = kraus
            .first()
            .ok_or_else(|| Error::InvalidArgument("empty Kraus set".into()))?;
        let n = qubits_of_dim(first.nrows())?;
        let dim = 1usize << n;
        let np = 1usize << (2 * n);
        let mut m = DMatrix::zeros(np, np);
        let paulis: Vec<PauliString> = PauliString::all(n).collect();
        for (pi, p) in paulis.iter().enumerate() {
            let pm = p.to_matrix();
            let mut img = CMat::zeros(dim, dim);
            for k in kraus {
                img += k * &pm * k.adjoint();
            }
            for (qi, q) in paulis.iter().enumerate() {
                m[(qi, pi)] = pauli_trace(q, &img).re / dim as f64;
            }
        }
        Ok(Ptm { n, m })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.m
    }

    pub fn diagonal_entries(&self) -> Vec<f64> {
        self.m.diagonal().iter().copied().collect()
    }

    /// Zeroes every off-diagonal entry: the effect of a perfect Pauli twirl.
    pub fn twirled(&self) -> Ptm {
        Ptm {
            n: self.n,
            m: DMatrix::from_diagonal(&self.m.diagonal()),
        }
    }

    /// Mean of the diagonal: the process fidelity.
    pub fn process_fidelity(&self) -> f64 {
        self.m.trace() / self.m.nrows() as f64
    }

    /// Tensor product; `self` acts on the more significant qubits.
    pub fn tensor(&self, other: &Ptm) -> Ptm {
        Ptm {
            n: self.n + other.n,
            m: self.m.kronecker(&other.m),
        }
    }

    /// Composition `self ∘ other` (apply `other` first).
    pub fn compose(&self, other: &Ptm) -> Result<Ptm> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: other.n,
            });
        }
        Ok(Ptm {
            n: self.n,
            m: &self.m * &other.m,
        })
    }

    /// The unital block: the matrix with its first row and column removed.
    pub fn unital_block(&self) -> DMatrix<f64> {
        let d = self.m.nrows();
        self.m.view((1, 1), (d - 1, d - 1)).into_owned()
    }

    pub fn is_trace_preserving(&self, tol: f64) -> bool {
        let row = self.m.row(0);
        (row[0] - 1.0).abs() < tol && row.iter().skip(1).all(|x| x.abs() < tol)
    }
}

impl Mul for &Ptm {
    type Output = Ptm;
    fn mul(self, rhs: &Ptm) -> Ptm {
        self.compose(rhs).expect("PTM dimensions must match")
    }
}

/// `PTM_{Q,P} = 2^{-n} Tr[Q U P U†]`.
pub fn ptm_of_unitary(u: &CMat) -> Result<Ptm> {
    check_unitary(u, 1e-10)?;
    Ptm::from_kraus(std::slice::from_ref(u))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gates::{rz, Gate, GateKind};
    use crate::linalg::identity;

    #[test]
    fn identity_unitary_gives_identity_ptm() {
        let p = ptm_of_unitary(&identity(4)).unwrap();
        assert!((p.matrix() - DMatrix::<f64>::identity(16, 16)).abs().max() < 1e-14);
    }

    #[test]
    fn rz_ptm_has_rotation_block() {
        let th = 0.37;
        let p = ptm_of_unitary(&rz(th)).unwrap();
        let (s, c) = th.sin_cos();
        let want = DMatrix::from_row_slice(
            4,
            4,
            &[1.0, 0.0, 0.0, 0.0, 0.0, c, -s, 0.0, 0.0, s, c, 0.0, 0.0, 0.0, 0.0, 1.0],
        );
        assert!((p.matrix() - want).abs().max() < 1e-14);
    }

    #[test]
    fn cx_ptm_matches_kraus_route() {
        let u = Gate::two(GateKind::CX, 0, 1).unitary();
        let via_unitary = ptm_of_unitary(&u).unwrap();
        // explicit oracle: Λ_{QP} = Tr[Q U P U†]/4 term by term
        for (qi, q) in PauliString::all(2).enumerate() {
            for (pi, p) in PauliString::all(2).enumerate() {
                let prod = q.to_matrix() * &u * p.to_matrix() * u.adjoint();
                let want = prod.trace().re / 4.0;
                assert!((via_unitary.matrix()[(qi, pi)] - want).abs() < 1e-14);
            }
        }
        // CX maps Paulis to Paulis, so the PTM is a signed permutation
        for row in via_unitary.matrix().row_iter() {
            assert_eq!(row.iter().filter(|x| x.abs() > 0.5).count(), 1);
        }
    }

    #[test]
    fn non_unitary_rejected() {
        assert!(ptm_of_unitary(&identity(2).scale(0.5)).is_err());
    }

    #[test]
    fn pauli_conjugate_matches_dense() {
        let x = CMat::from_fn(4, 4, |r, c| C64::new((r * 3 + c) as f64, (r as f64) - (c as f64)));
        for p in PauliString::all(2) {
            let pm = p.to_matrix();
            let want = &pm * &x * pm.adjoint();
            assert!(crate::linalg::max_abs_diff(&pauli_conjugate(&p, &x), &want) < 1e-12);
        }
    }
}
