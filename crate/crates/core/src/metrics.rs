//! Scoring quantities: distances between distributions and states, Bloch
//! tomography, infidelity conversions, worst-case probes and statistics.

use nalgebra::DVector;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use statrs::distribution::{Continuous, ContinuousCDF, Normal};

use crate::channel::Channel;
use crate::distribution::Distribution;
use crate::error::{Error, Result};
use crate::gates::{pauli_x, pauli_y, pauli_z, GateKind, Gate};
use crate::linalg::{hermitian_deviation, hermitian_eigenvalues, kron, CMat, C64};
use crate::seeding;

fn same_n(p: &Distribution, q: &Distribution) -> Result<()> {
    if p.n() != q.n() {
        return Err(Error::DimensionMismatch {
            expected: p.n(),
            got: q.n(),
        });
    }
    Ok(())
}

/// `½ Σ_x |p(x) − q(x)|`; counts are normalized first.
pub fn tvd(p: &Distribution, q: &Distribution) -> Result<f64> {
    same_n(p, q)?;
    Ok(0.5
        * p.probabilities()
            .iter()
            .zip(q.probabilities())
            .map(|(a, b)| (a - b).abs())
            .sum::<f64>())
}

pub fn uniformity_distance(p: &Distribution) -> f64 {
    tvd(p, &Distribution::uniform(p.n())).expect("same register size")
}

fn check_hermitian(m: &CMat) -> Result<()> {
    let dev = hermitian_deviation(m);
    if dev > 1e-9 {
        return Err(Error::NotHermitian(dev));
    }
    Ok(())
}

/// `½ Tr|ρ − σ|` from the eigenvalues of the difference.
pub fn trace_distance(rho: &CMat, sigma: &CMat) -> Result<f64> {
    if rho.shape() != sigma.shape() {
        return Err(Error::DimensionMismatch {
            expected: rho.nrows(),
            got: sigma.nrows(),
        });
    }
    check_hermitian(rho)?;
    check_hermitian(sigma)?;
    Ok(0.5 * hermitian_eigenvalues(&(rho - sigma)).iter().map(|x| x.abs()).sum::<f64>())
}

/// `⟨ψ|ρ|ψ⟩`.
pub fn state_fidelity(rho: &CMat, psi: &DVector<C64>) -> Result<f64> {
    if rho.nrows() != psi.len() {
        return Err(Error::DimensionMismatch {
            expected: rho.nrows(),
            got: psi.len(),
        });
    }
    check_hermitian(rho)?;
    Ok((psi.adjoint() * rho * psi)[(0, 0)].re)
}

pub fn purity(rho: &CMat) -> f64 {
    (rho * rho).trace().re
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlochState {
    pub r: [f64; 3],
    pub purity: f64,
}

impl BlochState {
    pub fn from_vector(r: [f64; 3]) -> Self {
        let norm2 = r.iter().map(|x| x * x).sum::<f64>();
        BlochState {
            r,
            purity: (1.0 + norm2) / 2.0,
        }
    }

    pub fn from_density(rho: &CMat) -> Result<Self> {
        if rho.shape() != (2, 2) {
            return Err(Error::DimensionMismatch {
                expected: 2,
                got: rho.nrows(),
            });
        }
        let e = |m: CMat| (m * rho).trace().re;
        Ok(BlochState::from_vector([e(pauli_x()), e(pauli_y()), e(pauli_z())]))
    }

    pub fn density(&self) -> CMat {
        let [x, y, z] = self.r;
        let mut rho = CMat::identity(2, 2) + pauli_x().scale(x) + pauli_y().scale(y) + pauli_z().scale(z);
        rho.scale_mut(0.5);
        rho
    }

    /// Fidelity with a pure state of Bloch vector `ideal`.
    pub fn fidelity(&self, ideal: [f64; 3]) -> f64 {
        0.5 * (1.0 + self.r.iter().zip(ideal).map(|(a, b)| a * b).sum::<f64>())
    }

    /// Half the Euclidean distance between Bloch vectors.
    pub fn trace_distance(&self, other: &BlochState) -> f64 {
        0.5 * self
            .r
            .iter()
            .zip(other.r)
            .map(|(a, b)| (a - b).powi(2))
            .sum::<f64>()
            .sqrt()
    }
}

/// `r_i = P(0) − P(1)` for measurements after rotating basis `i` onto Z.
pub fn bloch_from_tomography(x: &Distribution, y: &Distribution, z: &Distribution) -> Result<BlochState> {
    let mut r = [0.0; 3];
    for (i, d) in [x, y, z].into_iter().enumerate() {
        if d.n() != 1 {
            return Err(Error::DimensionMismatch { expected: 1, got: d.n() });
        }
        if d.shots() == Some(0) {
            return Err(Error::Missing("empty tomography counts".into()));
        }
        r[i] = d.parity_expectation(1);
    }
    Ok(BlochState::from_vector(r))
}

/// Easy-cycle rotation that maps the eigenbasis of `axis` (0=X, 1=Y, 2=Z)
/// onto the computational basis.
pub fn tomography_rotation(axis: usize) -> CMat {
    let h = Gate::single(GateKind::H, 0).unitary();
    match axis {
        0 => h,
        1 => h * Gate::single(GateKind::Sdg, 0).unitary(),
        _ => CMat::identity(2, 2),
    }
}

pub fn process_to_average_infidelity(e_f: f64, d: usize) -> f64 {
    e_f * d as f64 / (d as f64 + 1.0)
}

pub fn average_to_process_infidelity(r: f64, d: usize) -> f64 {
    r * (d as f64 + 1.0) / d as f64
}

pub fn process_fidelity(ch: &Channel) -> f64 {
    ch.ptm().process_fidelity()
}

/// `r = (1 − F_proc)·d/(d+1)` with `F_proc = Tr[PTM]/4^n`.
pub fn avg_gate_infidelity(ch: &Channel) -> f64 {
    process_to_average_infidelity(1.0 - process_fidelity(ch), 1 << ch.n_body())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorstCase {
    pub tvd: f64,
    /// Amplitudes of the maximizing input state as `(re, im)` pairs.
    pub state: Vec<(f64, f64)>,
    /// Measurement basis per qubit (`X`, `Y` or `Z`).
    pub basis: String,
}

fn haar_state<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> DVector<C64> {
    let v = DVector::from_fn(dim, |_, _| {
        C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    });
    let norm = v.norm();
    v / C64::new(norm, 0.0)
}

fn pauli_eigenstates() -> Vec<DVector<C64>> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let v = |a: C64, b: C64| DVector::from_vec(vec![a, b]);
    vec![
        v(C64::new(1.0, 0.0), C64::new(0.0, 0.0)),
        v(C64::new(0.0, 0.0), C64::new(1.0, 0.0)),
        v(C64::new(s, 0.0), C64::new(s, 0.0)),
        v(C64::new(s, 0.0), C64::new(-s, 0.0)),
        v(C64::new(s, 0.0), C64::new(0.0, s)),
        v(C64::new(s, 0.0), C64::new(0.0, -s)),
    ]
}

/// Largest TVD between ideal and noisy outcome distributions over probe
/// input states (all products of Pauli eigenstates plus `n_probe_states`
/// Haar-random states) and all product Pauli measurement bases.
pub fn worst_case_tvd(ch: &Channel, n_probe_states: usize, seed: u64) -> Result<WorstCase> {
    let n = ch.n_body();
    if n > 2 {
        return Err(Error::InvalidArgument("worst-case probe supports 1 or 2 qubits".into()));
    }
    let dim = 1usize << n;
    let mut states: Vec<DVector<C64>> = pauli_eigenstates();
    if n == 2 {
        let single = pauli_eigenstates();
        states = single
            .iter()
            .flat_map(|a| single.iter().map(move |b| a.kronecker(b)))
            .collect();
    }
    let mut rng = seeding::rng(seed);
    states.extend((0..n_probe_states).map(|_| haar_state(dim, &mut rng)));
    let bases: Vec<Vec<usize>> = (0..3usize.pow(n as u32))
        .map(|i| (0..n).map(|q| (i / 3usize.pow((n - 1 - q) as u32)) % 3).collect())
        .collect();
    let rotations: Vec<CMat> = bases
        .iter()
        .map(|b| {
            b.iter()
                .map(|&a| tomography_rotation(a))
                .reduce(|acc, m| kron(&acc, &m))
                .expect("at least one qubit")
        })
        .collect();
    let mut best = WorstCase {
        tvd: 0.0,
        state: Vec::new(),
        basis: String::new(),
    };
    for psi in &states {
        let rho = psi * psi.adjoint();
        let noisy = ch.apply(&rho);
        for (b, rot) in bases.iter().zip(&rotations) {
            let a = rot * &rho * rot.adjoint();
            let c = rot * &noisy * rot.adjoint();
            let t = 0.5 * (0..dim).map(|i| (a[(i, i)].re - c[(i, i)].re).abs()).sum::<f64>();
            if t > best.tvd {
                best = WorstCase {
                    tvd: t,
                    state: psi.iter().map(|z| (z.re, z.im)).collect(),
                    basis: b.iter().map(|&i| ['X', 'Y', 'Z'][i]).collect(),
                };
            }
        }
    }
    Ok(best)
}

/// Ordinary least-squares line; returns `(slope, intercept, r²)`.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> Result<(f64, f64, f64)> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(Error::InvalidArgument("need at least two paired points".into()));
    }
    let k = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidArgument("x values have zero variance".into()));
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_tot: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let ss_res: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    let r2 = if ss_tot == 0.0 { 1.0 } else { 1.0 - ss_res / ss_tot };
    Ok((slope, intercept, r2))
}

/// Slope of `ln y` against `ln x`.
pub fn loglog_exponent(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.iter().chain(ys).any(|&v| v <= 0.0) {
        return Err(Error::InvalidArgument("log-log fit needs positive values".into()));
    }
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    Ok(linear_fit(&lx, &ly)?.0)
}

fn mean_var(xs: &[f64]) -> (f64, f64) {
    let k = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / k;
    (m, xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (k - 1.0))
}

pub fn pearson_r(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() || xs.len() < 3 {
        return Err(Error::InvalidArgument("need at least three paired points".into()));
    }
    let (mx, vx) = mean_var(xs);
    let (my, vy) = mean_var(ys);
    if vx == 0.0 || vy == 0.0 {
        return Err(Error::InvalidArgument("zero variance".into()));
    }
    let cov = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum::<f64>() / (xs.len() as f64 - 1.0);
    Ok(cov / (vx * vy).sqrt())
}

fn ranks(xs: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..xs.len()).collect();
    idx.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]));
    let mut out = vec![0.0; xs.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && xs[idx[j + 1]] == xs[idx[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            out[k] = avg;
        }
        i = j + 1;
    }
    out
}

/// Pearson correlation of ranks (ties get average ranks).
pub fn spearman(xs: &[f64], ys: &[f64]) -> Result<f64> {
    pearson_r(&ranks(xs), &ranks(ys))
}

/// `∫ min(N(μ₁,σ₁), N(μ₂,σ₂))` for normals fitted to the two samples.
pub fn overlapping_index(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() < 3 || b.len() < 3 {
        return Err(Error::InvalidArgument("need at least three points per sample".into()));
    }
    let (m1, v1) = mean_var(a);
    let (m2, v2) = mean_var(b);
    if v1 == 0.0 || v2 == 0.0 {
        return Err(Error::InvalidArgument("zero variance".into()));
    }
    normal_overlap(m1, v1.sqrt(), m2, v2.sqrt())
}

/// Overlap of two normal densities from their crossing points.
pub fn normal_overlap(m1: f64, s1: f64, m2: f64, s2: f64) -> Result<f64> {
    let n1 = Normal::new(m1, s1).map_err(|e| Error::InvalidArgument(e.to_string()))?;
    let n2 = Normal::new(m2, s2).map_err(|e| Error::InvalidArgument(e.to_string()))?;
    // ln pdf1 = ln pdf2 is quadratic in x
    let a = 1.0 / (2.0 * s2 * s2) - 1.0 / (2.0 * s1 * s1);
    let b = m1 / (s1 * s1) - m2 / (s2 * s2);
    let c = m2 * m2 / (2.0 * s2 * s2) - m1 * m1 / (2.0 * s1 * s1) + (s2 / s1).ln();
    let mut cross: Vec<f64> = if a.abs() < 1e-12 * (1.0 / (s1 * s1) + 1.0 / (s2 * s2)) {
        if b.abs() < 1e-300 {
            return Ok(1.0);
        }
        vec![-c / b]
    } else {
        let disc = b * b - 4.0 * a * c;
        if disc < 0.0 {
            vec![]
        } else {
            let r = disc.sqrt();
            vec![(-b - r) / (2.0 * a), (-b + r) / (2.0 * a)]
        }
    };
    cross.sort_by(f64::total_cmp);
    let mut edges = vec![f64::NEG_INFINITY];
    edges.extend(&cross);
    edges.push(f64::INFINITY);
    let mut total = 0.0;
    for w in edges.windows(2) {
        let probe = match (w[0].is_finite(), w[1].is_finite()) {
            (true, true) => 0.5 * (w[0] + w[1]),
            (false, true) => w[1] - 1.0,
            (true, false) => w[0] + 1.0,
            (false, false) => m1,
        };
        let lower = if n1.pdf(probe) <= n2.pdf(probe) { &n1 } else { &n2 };
        total += lower.cdf(w[1]) - lower.cdf(w[0]);
    }
    Ok(total.clamp(0.0, 1.0))
}

/// Checks `|⟨A⟩_p − ⟨A⟩_q| ≤ 2·tvd(p,q)·‖A‖` for a diagonal observable.
pub fn expectation_error_bound_check(p: &Distribution, q: &Distribution, observable: &[f64]) -> Result<bool> {
    same_n(p, q)?;
    if observable.len() != 1 << p.n() {
        return Err(Error::DimensionMismatch {
            expected: 1 << p.n(),
            got: observable.len(),
        });
    }
    let e = |d: &Distribution| -> f64 { d.probabilities().iter().zip(observable).map(|(a, b)| a * b).sum() };
    let norm = observable.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    Ok((e(p) - e(q)).abs() <= 2.0 * tvd(p, q)? * norm + 1e-12)
}
