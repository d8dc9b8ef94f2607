//! Small dense complex linear-algebra helpers shared by the simulator,
//! the channel code, and the compiler.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMat = DMatrix<C64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn identity(dim: usize) -> CMat {
    CMat::identity(dim, dim)
}

pub fn mat2(a: C64, b: C64, c_: C64, d: C64) -> CMat {
    CMat::from_row_slice(2, 2, &[a, b, c_, d])
}

pub fn dagger(m: &CMat) -> CMat {
    m.adjoint()
}

pub fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

/// Largest entrywise modulus of `a - b`.
pub fn max_abs_diff(a: &CMat, b: &CMat) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

pub fn unitarity_deviation(u: &CMat) -> f64 {
    let n = u.nrows();
    max_abs_diff(&(u.adjoint() * u), &identity(n))
}

pub fn check_unitary(u: &CMat, tol: f64) -> Result<()> {
    if !u.is_square() {
        return Err(Error::DimensionMismatch {
            expected: u.nrows(),
            got: u.ncols(),
        });
    }
    let dev = unitarity_deviation(u);
    if dev > tol {
        return Err(Error::NotUnitary(dev));
    }
    Ok(())
}

pub fn hermitian_deviation(m: &CMat) -> f64 {
    max_abs_diff(m, &m.adjoint())
}

/// Number of qubits for a `2^n`-dimensional operator.
pub fn qubits_of_dim(dim: usize) -> Result<usize> {
    if dim == 0 || !dim.is_power_of_two() {
        return Err(Error::DimensionMismatch {
            expected: dim.next_power_of_two(),
            got: dim,
        });
    }
    Ok(dim.trailing_zeros() as usize)
}

/// Eigenvalues (ascending) of a Hermitian matrix.
pub fn hermitian_eigenvalues(m: &CMat) -> Vec<f64> {
    let h = (m + m.adjoint()).scale(0.5);
    let mut ev: Vec<f64> = h.symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(|a, b| a.total_cmp(b));
    ev
}

/// `exp(-i H)` for Hermitian `H`, through its spectral decomposition.
pub fn expm_neg_i_hermitian(h: &CMat) -> CMat {
    let sym = (h + h.adjoint()).scale(0.5);
    let eig = sym.symmetric_eigen();
    let v = &eig.eigenvectors;
    let phases = CMat::from_diagonal(&eig.eigenvalues.map(|l| C64::from_polar(1.0, -l)));
    v * phases * v.adjoint()
}

/// Lifts an operator on `targets` (first target most significant) to the
/// full `n`-qubit space. Qubit 0 is the most significant bit of a basis index.
pub fn embed(op: &CMat, targets: &[usize], n: usize) -> CMat {
    let k = targets.len();
    debug_assert_eq!(op.nrows(), 1 << k);
    if k == n && targets.iter().enumerate().all(|(i, &t)| i == t) {
        return op.clone();
    }
    let dim = 1usize << n;
    let shifts: Vec<usize> = targets.iter().map(|&t| n - 1 - t).collect();
    let mask: usize = shifts.iter().map(|s| 1usize << s).sum();
    let sub = |idx: usize| -> usize {
        shifts
            .iter()
            .fold(0usize, |acc, &s| (acc << 1) | ((idx >> s) & 1))
    };
    let mut out = CMat::zeros(dim, dim);
    for r in 0..dim {
        let rs = sub(r);
        let rest = r & !mask;
        for cs in 0..(1usize << k) {
            let v = op[(rs, cs)];
            if v == ZERO {
                continue;
            }
            let mut col = rest;
            for (j, &s) in shifts.iter().enumerate() {
                if (cs >> (k - 1 - j)) & 1 == 1 {
                    col |= 1 << s;
                }
            }
            out[(r, col)] = v;
        }
    }
    out
}

/// Global phase `e^{iφ}` that best aligns `b` onto `a`, read off the
/// largest-magnitude entry of `a`.
pub fn phase_alignment(a: &CMat, b: &CMat) -> C64 {
    let (idx, _) = a
        .iter()
        .enumerate()
        .fold((0, -1.0), |(bi, bv), (i, x)| {
            if x.norm() > bv {
                (i, x.norm())
            } else {
                (bi, bv)
            }
        });
    let (x, y) = (a[idx], b[idx]);
    if y.norm() < 1e-300 {
        return ONE;
    }
    let ratio = x / y;
    ratio / ratio.norm()
}

/// `max |a - e^{iφ} b|` with φ chosen by [`phase_alignment`].
pub fn distance_up_to_phase(a: &CMat, b: &CMat) -> f64 {
    let ph = phase_alignment(a, b);
    max_abs_diff(a, &b.map(|x| x * ph))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn embed_matches_kron_for_adjacent_targets() {
        let x = mat2(ZERO, ONE, ONE, ZERO);
        let z = mat2(ONE, ZERO, ZERO, -ONE);
        let xz = kron(&x, &z);
        let full = embed(&xz, &[1, 2], 3);
        let want = kron(&identity(2), &xz);
        assert!(max_abs_diff(&full, &want) < 1e-15);
        // reversed order swaps the factors
        let rev = embed(&xz, &[2, 1], 3);
        let want = kron(&identity(2), &kron(&z, &x));
        assert!(max_abs_diff(&rev, &want) < 1e-15);
    }

    #[test]
    fn expm_of_pauli_z() {
        let z = mat2(ONE, ZERO, ZERO, -ONE);
        let u = expm_neg_i_hermitian(&z.scale(0.3));
        assert!((u[(0, 0)] - C64::from_polar(1.0, -0.3)).norm() < 1e-14);
        assert!((u[(1, 1)] - C64::from_polar(1.0, 0.3)).norm() < 1e-14);
    }

    #[test]
    fn phase_distance_ignores_global_phase() {
        let h = mat2(ONE, ONE, ONE, -ONE).scale(1.0 / 2f64.sqrt());
        let g = h.map(|x| x * C64::from_polar(1.0, 1.234));
        assert!(distance_up_to_phase(&h, &g) < 1e-14);
    }
}
