//! Quantum channels on a small number of bodies, kept in Kraus and PTM form.

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg::{expm_neg_i_hermitian, hermitian_eigenvalues, identity, max_abs_diff, qubits_of_dim, CMat, C64};
use crate::pauli::{inverse_walsh_hadamard, PauliProbabilities, PauliString};
use crate::ptm::Ptm;

pub const CPTP_TOL: f64 = 1e-10;

/// A CPTP map on `n_body` qubits with a Kraus set and its cached PTM.
#[derive(Debug, Clone)]
pub struct Channel {
    n_body: usize,
    kraus: Vec<CMat>,
    ptm: Ptm,
}

impl Channel {
    /// Validates `Σ K†K = I` to [`CPTP_TOL`].
    pub fn from_kraus(kraus: Vec<CMat>) -> Result<Self> {
        let first = kraus
            .first()
            .ok_or_else(|| Error::InvalidArgument("empty Kraus set".into()))?;
        let dim = first.nrows();
        let n_body = qubits_of_dim(dim)?;
        let mut sum = CMat::zeros(dim, dim);
        for k in &kraus {
            if k.shape() != (dim, dim) {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: k.nrows(),
                });
            }
            sum += k.adjoint() * k;
        }
        let dev = max_abs_diff(&sum, &identity(dim));
        if dev > CPTP_TOL {
            return Err(Error::InvalidArgument(format!(
                "Kraus operators are not trace preserving (deviation {dev:e})"
            )));
        }
        let ptm = Ptm::from_kraus(&kraus)?;
        Ok(Channel { n_body, kraus, ptm })
    }

    pub fn identity(n_body: usize) -> Self {
        Channel::from_kraus(vec![identity(1 << n_body)]).expect("identity is CPTP")
    }

    pub fn unitary(u: CMat) -> Result<Self> {
        crate::linalg::check_unitary(&u, 1e-10)?;
        Channel::from_kraus(vec![u])
    }

    /// Rebuilds a Kraus form from a PTM through its Choi matrix.
    pub fn from_ptm(ptm: &Ptm) -> Result<Self> {
        let choi = choi_from_ptm(ptm);
        let eig = ((&choi + choi.adjoint()).scale(0.5)).symmetric_eigen();
        let min = eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
        if min < -CPTP_TOL {
            return Err(Error::InvalidArgument(format!(
                "PTM is not completely positive (Choi eigenvalue {min:e})"
            )));
        }
        let d = 1usize << ptm.n();
        let mut kraus = Vec::new();
        for (k, &lam) in eig.eigenvalues.iter().enumerate() {
            if lam <= 1e-14 {
                continue;
            }
            let v = eig.eigenvectors.column(k);
            // Choi index (i, a) = i*d + a carries K_{a,i}
            let op = CMat::from_fn(d, d, |a, i| v[i * d + a] * lam.sqrt());
            kraus.push(op);
        }
        Channel::from_kraus(kraus)
    }

    pub fn n_body(&self) -> usize {
        self.n_body
    }

    pub fn kraus(&self) -> &[CMat] {
        &self.kraus
    }

    pub fn ptm(&self) -> &Ptm {
        &self.ptm
    }

    pub fn apply(&self, rho: &CMat) -> CMat {
        let mut out = CMat::zeros(rho.nrows(), rho.ncols());
        for k in &self.kraus {
            out += k * rho * k.adjoint();
        }
        out
    }

    /// `self ∘ first`: apply `first`, then `self`.
    pub fn after(&self, first: &Channel) -> Result<Channel> {
        if self.n_body != first.n_body {
            return Err(Error::DimensionMismatch {
                expected: self.n_body,
                got: first.n_body,
            });
        }
        let mut kraus = Vec::with_capacity(self.kraus.len() * first.kraus.len());
        for a in &self.kraus {
            for b in &first.kraus {
                kraus.push(a * b);
            }
        }
        Channel::from_kraus(prune(kraus))
    }

    /// `self ⊗ other`, `self` on the more significant qubits.
    pub fn tensor(&self, other: &Channel) -> Result<Channel> {
        let mut kraus = Vec::with_capacity(self.kraus.len() * other.kraus.len());
        for a in &self.kraus {
            for b in &other.kraus {
                kraus.push(a.kronecker(b));
            }
        }
        Channel::from_kraus(prune(kraus))
    }

    /// Perfect Pauli twirl: the Pauli channel with the same PTM diagonal.
    pub fn pauli_twirl(&self) -> Result<Channel> {
        let c = inverse_walsh_hadamard(&self.ptm.diagonal_entries())?;
        let c: Vec<f64> = c.into_iter().map(|x| x.max(0.0)).collect();
        let total: f64 = c.iter().sum();
        make_pauli_channel(&PauliProbabilities::new(c.iter().map(|x| x / total).collect())?)
    }

    pub fn choi(&self) -> CMat {
        let d = 1usize << self.n_body;
        let mut j = CMat::zeros(d * d, d * d);
        for k in &self.kraus {
            let v = nalgebra::DVector::from_fn(d * d, |idx, _| k[(idx % d, idx / d)]);
            j += &v * v.adjoint();
        }
        j
    }

    pub fn min_choi_eigenvalue(&self) -> f64 {
        hermitian_eigenvalues(&self.choi())[0]
    }

    /// CPTP check: Kraus completeness, PSD Choi matrix, Kraus/PTM agreement.
    pub fn is_cptp(&self) -> bool {
        let d = 1usize << self.n_body;
        let mut sum = CMat::zeros(d, d);
        for k in &self.kraus {
            sum += k.adjoint() * k;
        }
        max_abs_diff(&sum, &identity(d)) < CPTP_TOL
            && self.min_choi_eigenvalue() > -CPTP_TOL
            && Ptm::from_kraus(&self.kraus)
                .map(|p| (p.matrix() - self.ptm.matrix()).abs().max() < CPTP_TOL)
                .unwrap_or(false)
    }
}

fn prune(kraus: Vec<CMat>) -> Vec<CMat> {
    let kept: Vec<CMat> = kraus
        .iter()
        .filter(|k| k.iter().any(|x| x.norm() > 1e-15))
        .cloned()
        .collect();
    if kept.is_empty() {
        kraus
    } else {
        kept
    }
}

/// Choi matrix `J = 2^{-n} Σ_{P,Q} Λ_{QP} Pᵀ ⊗ Q`.
pub fn choi_from_ptm(ptm: &Ptm) -> CMat {
    let n = ptm.n();
    let d = 1usize << n;
    let paulis: Vec<CMat> = PauliString::all(n).map(|p| p.to_matrix()).collect();
    let mut j = CMat::zeros(d * d, d * d);
    let m = ptm.matrix();
    for (pi, p) in paulis.iter().enumerate() {
        let pt = p.transpose();
        for (qi, q) in paulis.iter().enumerate() {
            let w = m[(qi, pi)];
            if w.abs() < 1e-16 {
                continue;
            }
            j += pt.kronecker(q).scale(w / d as f64);
        }
    }
    j
}

/// Pauli channel `ρ ↦ Σ q_i P_i ρ P_i`, Kraus operators `√q_i P_i`.
pub fn make_pauli_channel(q: &PauliProbabilities) -> Result<Channel> {
    let n = q.n();
    let mut kraus = Vec::new();
    for (i, &w) in q.as_slice().iter().enumerate() {
        if w <= 0.0 {
            continue;
        }
        kraus.push(PauliString::from_index(n, i).to_matrix().scale(w.sqrt()));
    }
    Channel::from_kraus(kraus)
}

/// `U_h = exp(-i Σ_{i≥1} h_i P_i)` over the non-identity Paulis in index order.
pub fn coherent_unitary(h: &[f64], n_body: usize) -> Result<CMat> {
    let np = 1usize << (2 * n_body);
    if h.len() != np - 1 {
        return Err(Error::DimensionMismatch {
            expected: np - 1,
            got: h.len(),
        });
    }
    if h.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidArgument("coherent generator has non-finite entries".into()));
    }
    let d = 1usize << n_body;
    let mut gen = CMat::zeros(d, d);
    for (i, &w) in h.iter().enumerate() {
        if w != 0.0 {
            gen += PauliString::from_index(n_body, i + 1).to_matrix().scale(w);
        }
    }
    Ok(expm_neg_i_hermitian(&gen))
}

pub fn make_coherent(h: &[f64], n_body: usize) -> Result<Channel> {
    Channel::from_kraus(vec![coherent_unitary(h, n_body)?])
}

/// `S(q,h) = U_h ∘ K_q`.
pub fn compose_sqh(q: &PauliProbabilities, h: &[f64]) -> Result<Channel> {
    let n = q.n();
    let u = coherent_unitary(h, n)?;
    let mut kraus = Vec::new();
    for (i, &w) in q.as_slice().iter().enumerate() {
        if w <= 0.0 {
            continue;
        }
        kraus.push(&u * PauliString::from_index(n, i).to_matrix().scale(w.sqrt()));
    }
    Channel::from_kraus(kraus)
}

/// `‖E_u‖_F² / (4^n − 1)` with `E_u` the unital PTM block.
pub fn unitarity(ch: &Channel) -> f64 {
    ptm_unitarity(ch.ptm())
}

pub fn ptm_unitarity(ptm: &Ptm) -> f64 {
    let block = ptm.unital_block();
    block.iter().map(|x| x * x).sum::<f64>() / block.nrows() as f64
}

/// Random CPTP map from a Haar-ish Stinespring isometry with `rank` Kraus
/// operators.
pub fn random_cptp<R: Rng + ?Sized>(n_body: usize, rank: usize, rng: &mut R) -> Channel {
    let d = 1usize << n_body;
    let g = CMat::from_fn(d * rank, d, |_, _| {
        C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    });
    let q = g.qr().q();
    let kraus = (0..rank)
        .map(|k| q.view((k * d, 0), (d, d)).into_owned())
        .collect();
    Channel::from_kraus(kraus).expect("isometry blocks form a CPTP map")
}

/// Random unitary (QR of a complex Gaussian matrix, phases fixed).
pub fn random_unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> CMat {
    let g = CMat::from_fn(dim, dim, |_, _| {
        C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    });
    let qr = g.qr();
    let (q, r) = (qr.q(), qr.r());
    let phases = DMatrix::from_fn(dim, dim, |i, j| {
        if i == j {
            let x = r[(i, i)];
            if x.norm() > 0.0 {
                x / x.norm()
            } else {
                C64::new(1.0, 0.0)
            }
        } else {
            C64::new(0.0, 0.0)
        }
    });
    q * phases
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gates::rz;
    use crate::pauli::walsh_hadamard;
    use crate::ptm::ptm_of_unitary;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn pp(v: &[f64]) -> PauliProbabilities {
        PauliProbabilities::new(v.to_vec()).unwrap()
    }

    #[test]
    fn identity_probabilities_give_identity_channel() {
        let ch = make_pauli_channel(&PauliProbabilities::identity(2)).unwrap();
        assert!((ch.ptm().matrix() - Ptm::identity(2).matrix()).abs().max() < 1e-15);
    }

    #[test]
    fn bit_flip_ptm_diagonal() {
        let eps = 0.1;
        let ch = make_pauli_channel(&pp(&[1.0 - eps, eps, 0.0, 0.0])).unwrap();
        let d = ch.ptm().diagonal_entries();
        let want = [1.0, 1.0, 1.0 - 2.0 * eps, 1.0 - 2.0 * eps];
        for (a, b) in d.iter().zip(want) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn uniform_pauli_channel_is_fully_depolarizing() {
        let ch = make_pauli_channel(&pp(&[0.25; 4])).unwrap();
        let d = ch.ptm().diagonal_entries();
        assert!((d[0] - 1.0).abs() < 1e-15 && d[1..].iter().all(|x| x.abs() < 1e-15));
        assert!(unitarity(&ch).abs() < 1e-15);
    }

    #[test]
    fn pauli_channel_rejects_invalid_probabilities() {
        assert!(PauliProbabilities::new(vec![1.1, -0.1, 0.0, 0.0]).is_err());
        assert!(PauliProbabilities::new(vec![0.5, 0.1, 0.0, 0.0]).is_err());
    }

    #[test]
    fn coherent_z_generator_is_rz() {
        assert!((make_coherent(&[0.0; 3], 1).unwrap().ptm().matrix() - Ptm::identity(1).matrix()).abs().max() < 1e-15);
        let th = 0.21;
        let ch = make_coherent(&[0.0, 0.0, th / 2.0], 1).unwrap();
        let want = ptm_of_unitary(&rz(th)).unwrap();
        assert!((ch.ptm().matrix() - want.matrix()).abs().max() < 1e-13);
    }

    #[test]
    fn coherent_channels_have_unit_unitarity() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for nb in 1..=2 {
            let h: Vec<f64> = (0..(1 << (2 * nb)) - 1).map(|_| rng.random_range(-0.5..0.5)).collect();
            let ch = make_coherent(&h, nb).unwrap();
            assert!((unitarity(&ch) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn dephasing_unitarity_closed_form() {
        let eps = 0.07;
        let ch = make_pauli_channel(&pp(&[1.0 - eps, 0.0, 0.0, eps])).unwrap();
        // direct Frobenius computation of the unital block
        let d = [1.0 - 2.0 * eps, 1.0 - 2.0 * eps, 1.0];
        let want: f64 = d.iter().map(|x| x * x).sum::<f64>() / 3.0;
        assert!((unitarity(&ch) - want).abs() < 1e-14);
        assert!((want - (1.0 + 2.0 * (1.0 - 2.0 * eps).powi(2)) / 3.0).abs() < 1e-15);
    }

    #[test]
    fn sqh_ptm_is_product_and_diag_matches_wht() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let raw: Vec<f64> = (0..16).map(|_| rng.random::<f64>()).collect();
        let s: f64 = raw.iter().sum();
        let q = pp(&raw.iter().map(|x| x / s).collect::<Vec<_>>());
        let h: Vec<f64> = (0..15).map(|_| rng.random_range(-0.3..0.3)).collect();
        let sqh = compose_sqh(&q, &h).unwrap();
        let prod = make_coherent(&h, 2).unwrap().ptm() * make_pauli_channel(&q).unwrap().ptm();
        assert!((sqh.ptm().matrix() - prod.matrix()).abs().max() < 1e-12);
        assert!(sqh.is_cptp());
        // brute-force diagonal: Tr[P S(P)] / 4
        for (i, p) in PauliString::all(2).enumerate() {
            let pm = p.to_matrix();
            let want = (&pm * sqh.apply(&pm)).trace().re / 4.0;
            assert!((sqh.ptm().matrix()[(i, i)] - want).abs() < 1e-12);
        }
        let no_coherence = compose_sqh(&q, &[0.0; 15]).unwrap();
        let wq = walsh_hadamard(q.as_slice()).unwrap();
        for (a, b) in no_coherence.ptm().diagonal_entries().iter().zip(wq) {
            assert!((a - b).abs() < 1e-13);
        }
    }

    #[test]
    fn cptp_is_closed_under_composition_and_tensor() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = random_cptp(1, 3, &mut rng);
        let b = random_cptp(1, 2, &mut rng);
        assert!(a.is_cptp() && b.is_cptp());
        let ab = a.after(&b).unwrap();
        assert!(ab.is_cptp());
        assert!((ab.ptm().matrix() - (a.ptm() * b.ptm()).matrix()).abs().max() < 1e-12);
        let t = a.tensor(&b).unwrap();
        assert!(t.is_cptp());
        assert!((t.ptm().matrix() - a.ptm().tensor(b.ptm()).matrix()).abs().max() < 1e-12);
    }

    #[test]
    fn ptm_roundtrip_through_choi() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let a = random_cptp(2, 3, &mut rng);
        let back = Channel::from_ptm(a.ptm()).unwrap();
        assert!((back.ptm().matrix() - a.ptm().matrix()).abs().max() < 1e-10);
        let tw = a.pauli_twirl().unwrap();
        assert!((tw.ptm().matrix() - a.ptm().twirled().matrix()).abs().max() < 1e-10);
    }
}
