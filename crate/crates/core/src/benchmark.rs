//! Cycle benchmarking (Pauli decays of a dressed hard cycle) and cycle error
//! reconstruction (Pauli error rates by inverse Walsh–Hadamard transform).

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::circuit::{Circuit, Cycle, CycleKind};
use crate::clifford::clifford_conjugate;
use crate::distribution::{measure_distribution, sample_counts};
use crate::error::{Error, Result};
use crate::gates::{fold_to_u3, GateKind, Gate};
use crate::linalg::{identity, CMat};
use crate::noise::Readout;
use crate::pauli::{inverse_walsh_hadamard, Pauli, PauliString};
use crate::seeding;
use crate::sim::Simulator;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CbConfig {
    pub cycle: Cycle,
    pub lengths: Vec<usize>,
    pub randomizations: usize,
    pub shots: u64,
    /// Defaults to every non-identity Pauli.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bases: Option<Vec<PauliString>>,
}

impl CbConfig {
    pub fn new(cycle: Cycle, lengths: Vec<usize>) -> Self {
        CbConfig {
            cycle,
            lengths,
            randomizations: 10,
            shots: 400,
            bases: None,
        }
    }

    pub fn n(&self) -> usize {
        self.cycle.n()
    }

    pub fn bases(&self) -> Vec<PauliString> {
        match &self.bases {
            Some(b) => b.clone(),
            None => PauliString::all(self.n()).skip(1).collect(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.cycle.kind != CycleKind::Hard {
            return Err(Error::InvalidArgument("CB needs a hard cycle".into()));
        }
        if !self.cycle.is_clifford() {
            return Err(Error::UnsupportedConjugation(self.cycle.signature()));
        }
        let mut lengths = self.lengths.clone();
        lengths.sort_unstable();
        lengths.dedup();
        if lengths.len() < 2 || lengths[0] == 0 {
            return Err(Error::InvalidArgument(
                "CB needs at least two distinct positive lengths".into(),
            ));
        }
        let order = pauli_order(&self.cycle)?;
        if let Some(m) = self.lengths.iter().find(|&&m| m % order != 0) {
            return Err(Error::InvalidArgument(format!(
                "length {m} is not a multiple of the cycle's Pauli order {order}"
            )));
        }
        if self.randomizations == 0 || self.shots == 0 {
            return Err(Error::InvalidArgument("randomizations and shots must be positive".into()));
        }
        for b in self.bases() {
            if b.n() != self.n() || b.is_identity() {
                return Err(Error::InvalidArgument(format!("bad CB basis {b}")));
            }
        }
        Ok(())
    }
}

/// Smallest `r` with `G^r P G^{-r} = ±P` for every Pauli `P`.
pub fn pauli_order(cycle: &Cycle) -> Result<usize> {
    let n = cycle.n();
    let gens: Vec<PauliString> = (0..n)
        .flat_map(|q| [PauliString::single(n, q, Pauli::X), PauliString::single(n, q, Pauli::Z)])
        .collect();
    let mut cur = gens.clone();
    for r in 1..=24 {
        for p in &mut cur {
            *p = clifford_conjugate(cycle, p)?;
        }
        if cur.iter().zip(&gens).all(|(a, b)| a.clone().unsigned() == b.clone().unsigned()) {
            return Ok(r);
        }
    }
    Err(Error::InvalidArgument("cycle has no small Pauli order".into()))
}

/// One CB circuit with the bookkeeping needed to read out its signed
/// expectation value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CbSequence {
    pub circuit: Circuit,
    pub basis: PauliString,
    pub length: usize,
    pub randomization: usize,
    /// Pauli (with sign) that the ideal final state is a +1 eigenstate of,
    /// before the basis-change cycle.
    pub tracked: PauliString,
    /// Dense-index mask of the measured qubits.
    pub mask: usize,
    pub sign: f64,
}

impl CbSequence {
    pub fn signed_expectation(&self, probs: &crate::distribution::Distribution) -> f64 {
        self.sign * probs.parity_expectation(self.mask)
    }
}

fn prep_matrix(p: Pauli) -> CMat {
    let h = Gate::single(GateKind::H, 0).unitary();
    let s = Gate::single(GateKind::S, 0).unitary();
    match p {
        Pauli::X => h,
        Pauli::Y => s * h,
        Pauli::I | Pauli::Z => identity(2),
    }
}

fn measure_matrix(p: Pauli) -> CMat {
    let h = Gate::single(GateKind::H, 0).unitary();
    let sdg = Gate::single(GateKind::Sdg, 0).unitary();
    match p {
        Pauli::X => h,
        Pauli::Y => h * sdg,
        Pauli::I | Pauli::Z => identity(2),
    }
}

fn easy_from(mats: &[CMat]) -> Result<Cycle> {
    let n = mats.len();
    Cycle::new(
        CycleKind::Easy,
        n,
        mats.iter().enumerate().map(|(q, m)| fold_to_u3(m, q)).collect(),
    )
}

/// Builds one CB sequence from explicit twirls: `twirls[j]` precedes the
/// `j`-th application of the cycle and `twirls[m]` precedes the measurement.
pub fn build_cb_sequence(cycle: &Cycle, basis: &PauliString, twirls: &[PauliString]) -> Result<CbSequence> {
    let n = cycle.n();
    let m = twirls.len().checked_sub(1).filter(|&m| m >= 1).ok_or_else(|| {
        Error::InvalidArgument("CB sequences need at least one cycle".into())
    })?;
    if basis.is_identity() {
        return Err(Error::InvalidArgument("CB basis must not be the identity".into()));
    }
    let pauli_mats = |t: &PauliString| -> Vec<CMat> {
        t.labels()
            .into_iter()
            .map(|l| PauliString::from_labels(&[l]).to_matrix())
            .collect()
    };
    let mut tracked = basis.clone().unsigned();
    let mut cycles = Vec::with_capacity(2 * m + 1);
    for (j, t) in twirls.iter().enumerate() {
        let twirl = pauli_mats(t);
        if !t.commutes_with(&tracked) {
            tracked = tracked.with_phase(tracked.phase() * crate::pauli::Phase::MINUS_ONE);
        }
        if j == 0 {
            let mats: Vec<CMat> = (0..n).map(|q| &twirl[q] * prep_matrix(basis.get(q))).collect();
            cycles.push(easy_from(&mats)?);
        } else if j < m {
            cycles.push(easy_from(&twirl)?);
        } else {
            let mats: Vec<CMat> = (0..n)
                .map(|q| measure_matrix(tracked.get(q)) * &twirl[q])
                .collect();
            cycles.push(easy_from(&mats)?);
            break;
        }
        cycles.push(cycle.clone());
        tracked = clifford_conjugate(cycle, &tracked)?;
    }
    let sign = tracked
        .phase()
        .sign()
        .ok_or_else(|| Error::InvalidArgument("tracked Pauli picked up an imaginary phase".into()))?;
    let mask = tracked
        .support()
        .iter()
        .fold(0usize, |acc, &q| acc | (1 << (n - 1 - q)));
    Ok(CbSequence {
        circuit: Circuit::new(n, cycles)?,
        basis: basis.clone().unsigned(),
        length: m,
        randomization: 0,
        tracked,
        mask,
        sign,
    })
}

/// Every (basis, length, randomization) sequence; sequence `i` draws its
/// twirls from stream `i` of a seed taken from `rng`.
pub fn generate_cb_sequences<R: Rng + ?Sized>(cfg: &CbConfig, rng: &mut R) -> Result<Vec<CbSequence>> {
    cfg.validate()?;
    let seed = rng.next_u64();
    let jobs = cb_jobs(cfg);
    let n = cfg.n();
    let np = 1usize << (2 * n);
    jobs.par_iter()
        .enumerate()
        .map(|(i, (basis, m, r))| {
            let mut stream = seeding::stream(seed, i as u64);
            let twirls: Vec<PauliString> = (0..=*m)
                .map(|_| PauliString::from_index(n, stream.random_range(0..np)))
                .collect();
            let mut seq = build_cb_sequence(&cfg.cycle, basis, &twirls)?;
            seq.randomization = *r;
            Ok(seq)
        })
        .collect()
}

fn cb_jobs(cfg: &CbConfig) -> Vec<(PauliString, usize, usize)> {
    let mut jobs = Vec::new();
    for b in cfg.bases() {
        for &m in &cfg.lengths {
            for r in 0..cfg.randomizations {
                jobs.push((b.clone(), m, r));
            }
        }
    }
    jobs
}

/// Least-squares fit of `A·p^m`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExpFit {
    pub a: f64,
    pub p: f64,
    /// Covariance of `(A, p)` from the residual variance; zero when the fit
    /// has no degrees of freedom left.
    pub cov: [[f64; 2]; 2],
    pub rss: f64,
}

impl ExpFit {
    pub fn p_stderr(&self) -> f64 {
        self.cov[1][1].max(0.0).sqrt()
    }
}

/// Fits `A·p^m` to `(m, mean)` points: log-linear start, then damped
/// Gauss–Newton with `p` kept in `[−1, 1]`.
pub fn fit_exponential(points: &[(f64, f64)]) -> Result<ExpFit> {
    let mut ms: Vec<f64> = points.iter().map(|p| p.0).collect();
    ms.sort_by(f64::total_cmp);
    ms.dedup();
    if ms.len() < 2 {
        return Err(Error::InvalidArgument("need at least two distinct lengths".into()));
    }
    if points.iter().all(|&(_, y)| y == 0.0) {
        return Err(Error::FitDegenerate("all means are zero".into()));
    }
    let logs: Vec<(f64, f64)> = points
        .iter()
        .filter(|p| p.1.abs() > 1e-300)
        .map(|&(m, y)| (m, y.abs().ln()))
        .collect();
    let (mut a, mut p) = {
        let k = logs.len() as f64;
        let mx = logs.iter().map(|l| l.0).sum::<f64>() / k;
        let my = logs.iter().map(|l| l.1).sum::<f64>() / k;
        let sxx: f64 = logs.iter().map(|l| (l.0 - mx).powi(2)).sum();
        let slope = if sxx > 0.0 {
            logs.iter().map(|l| (l.0 - mx) * (l.1 - my)).sum::<f64>() / sxx
        } else {
            0.0
        };
        let first = points
            .iter()
            .min_by(|x, y| x.0.total_cmp(&y.0))
            .map(|x| x.1)
            .unwrap_or(1.0);
        let sign = if first < 0.0 { -1.0 } else { 1.0 };
        (sign * (my - slope * mx).exp(), slope.exp().min(1.0))
    };
    let model = |a: f64, p: f64| -> f64 {
        points.iter().map(|&(m, y)| (a * p.powf(m) - y).powi(2)).sum()
    };
    let mut rss = model(a, p);
    let mut lambda = 1e-3;
    for _ in 0..500 {
        let (mut jtj, mut jtr) = ([[0.0f64; 2]; 2], [0.0f64; 2]);
        for &(m, y) in points {
            let pm = p.powf(m);
            let dp = if m == 0.0 { 0.0 } else { a * m * p.powf(m - 1.0) };
            let j = [pm, dp];
            let r = a * pm - y;
            for u in 0..2 {
                jtr[u] += j[u] * r;
                for v in 0..2 {
                    jtj[u][v] += j[u] * j[v];
                }
            }
        }
        let mut improved = false;
        for _ in 0..30 {
            let m00 = jtj[0][0] * (1.0 + lambda);
            let m11 = jtj[1][1] * (1.0 + lambda) + 1e-300;
            let det = m00 * m11 - jtj[0][1] * jtj[1][0];
            if det.abs() < 1e-300 {
                lambda *= 10.0;
                continue;
            }
            let da = -(m11 * jtr[0] - jtj[0][1] * jtr[1]) / det;
            let dp = -(m00 * jtr[1] - jtj[1][0] * jtr[0]) / det;
            let (na, np) = (a + da, (p + dp).clamp(-1.0, 1.0));
            let nrss = model(na, np);
            if nrss <= rss {
                let small = (na - a).abs() < 1e-15 && (np - p).abs() < 1e-15;
                a = na;
                p = np;
                rss = nrss;
                lambda = (lambda / 10.0).max(1e-12);
                improved = !small;
                break;
            }
            lambda *= 10.0;
        }
        if !improved {
            break;
        }
    }
    let dof = points.len() as f64 - 2.0;
    let mut cov = [[0.0; 2]; 2];
    if dof > 0.0 {
        let s2 = rss / dof;
        let mut jtj = [[0.0f64; 2]; 2];
        for &(m, _) in points {
            let j = [p.powf(m), if m == 0.0 { 0.0 } else { a * m * p.powf(m - 1.0) }];
            for u in 0..2 {
                for v in 0..2 {
                    jtj[u][v] += j[u] * j[v];
                }
            }
        }
        let det = jtj[0][0] * jtj[1][1] - jtj[0][1] * jtj[1][0];
        if det.abs() > 1e-300 {
            cov = [
                [s2 * jtj[1][1] / det, -s2 * jtj[0][1] / det],
                [-s2 * jtj[1][0] / det, s2 * jtj[0][0] / det],
            ];
        }
    }
    Ok(ExpFit { a, p, cov, rss })
}

/// How CB expectations are obtained from the simulator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CbMode {
    /// Random twirls, finite shots per circuit.
    Sampled,
    /// Random twirls, exact outcome probabilities.
    Exact,
    /// Exact average over all twirls (Pauli-twirled noise, readout
    /// symmetrized as the final random Pauli layer would do); one circuit
    /// per (basis, length).
    ExactTwirl,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CbRecord {
    pub basis: usize,
    pub length: usize,
    pub randomization: usize,
    pub expectation: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shots: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PauliDecay {
    pub basis: PauliString,
    pub points: Vec<(usize, f64)>,
    pub fit: ExpFit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CbResult {
    pub n: usize,
    pub cycle: Cycle,
    pub mode: CbMode,
    pub lengths: Vec<usize>,
    pub bases: Vec<PauliString>,
    pub decays: Vec<PauliDecay>,
    /// Estimated PTM diagonal of the dressed cycle, identity entry first.
    pub eigenvalues: Vec<f64>,
    /// Dressed process infidelity `1 − 4^{-n}(1 + Σ p_P)`.
    pub process_infidelity: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub process_infidelity_ci: Option<(f64, f64)>,
    /// Bare-cycle infidelity computed directly from the simulator's channel.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub analytic_process_infidelity: Option<f64>,
    pub records: Vec<CbRecord>,
}

fn symmetrized(readout: &[Readout]) -> Vec<Readout> {
    readout
        .iter()
        .map(|r| {
            let s = 0.5 * (r.p00 + r.p11);
            Readout { p00: s, p11: s }
        })
        .collect()
}

fn process_infidelity(eigenvalues: &[f64]) -> f64 {
    1.0 - eigenvalues.iter().sum::<f64>() / eigenvalues.len() as f64
}

/// Runs CB for `cfg` on `sim`. The simulator must resolve the cycle.
pub fn run_cb(cfg: &CbConfig, sim: &Simulator, mode: CbMode, seed: u64) -> Result<CbResult> {
    cfg.validate()?;
    let n = cfg.n();
    if sim.n() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: sim.n(),
        });
    }
    let bases = cfg.bases();
    let records: Vec<CbRecord> = match mode {
        CbMode::ExactTwirl => {
            let tsim = sim.twirled_copy()?;
            let readout = symmetrized(sim.readout());
            let mut jobs = Vec::new();
            for (bi, b) in bases.iter().enumerate() {
                for &m in &cfg.lengths {
                    jobs.push((bi, b, m));
                }
            }
            jobs.par_iter()
                .map(|&(bi, b, m)| {
                    let seq = build_cb_sequence(&cfg.cycle, b, &vec![PauliString::identity(n); m + 1])?;
                    let rho = tsim.run(&seq.circuit)?;
                    let d = measure_distribution(&rho, &readout)?;
                    Ok(CbRecord {
                        basis: bi,
                        length: m,
                        randomization: 0,
                        expectation: seq.signed_expectation(&d),
                        shots: None,
                    })
                })
                .collect::<Result<_>>()?
        }
        CbMode::Exact | CbMode::Sampled => {
            let seqs = generate_cb_sequences(cfg, &mut seeding::rng(seed))?;
            let shot_seed = seeding::child_seed(seed, 1);
            seqs.par_iter()
                .enumerate()
                .map(|(i, seq)| {
                    let d = sim.distribution(&seq.circuit)?;
                    let (d, shots) = if mode == CbMode::Sampled {
                        let mut r = seeding::stream(shot_seed, i as u64);
                        (sample_counts(&d, cfg.shots, &mut r)?, Some(cfg.shots))
                    } else {
                        (d, None)
                    };
                    let bi = bases.iter().position(|b| *b == seq.basis).expect("basis from config");
                    Ok(CbRecord {
                        basis: bi,
                        length: seq.length,
                        randomization: seq.randomization,
                        expectation: seq.signed_expectation(&d),
                        shots,
                    })
                })
                .collect::<Result<_>>()?
        }
    };
    let mut result = assemble(cfg, mode, bases, records)?;
    result.analytic_process_infidelity = Some(1.0 - sim.cycle_process_fidelity(&cfg.cycle)?);
    Ok(result)
}

fn decays_from(records: &[CbRecord], bases: &[PauliString], lengths: &[usize]) -> Result<Vec<PauliDecay>> {
    bases
        .par_iter()
        .enumerate()
        .map(|(bi, b)| {
            let points: Vec<(usize, f64)> = lengths
                .iter()
                .map(|&m| {
                    let v: Vec<f64> = records
                        .iter()
                        .filter(|r| r.basis == bi && r.length == m)
                        .map(|r| r.expectation)
                        .collect();
                    (m, v.iter().sum::<f64>() / v.len().max(1) as f64)
                })
                .collect();
            let fpts: Vec<(f64, f64)> = points.iter().map(|&(m, y)| (m as f64, y)).collect();
            Ok(PauliDecay {
                basis: b.clone(),
                points,
                fit: fit_exponential(&fpts)?,
            })
        })
        .collect()
}

fn eigenvalues_from(n: usize, decays: &[PauliDecay]) -> Vec<f64> {
    let mut p = vec![f64::NAN; 1 << (2 * n)];
    p[0] = 1.0;
    for d in decays {
        p[d.basis.index()] = d.fit.p;
    }
    p
}

fn assemble(cfg: &CbConfig, mode: CbMode, bases: Vec<PauliString>, records: Vec<CbRecord>) -> Result<CbResult> {
    let n = cfg.n();
    let mut lengths = cfg.lengths.clone();
    lengths.sort_unstable();
    lengths.dedup();
    let decays = decays_from(&records, &bases, &lengths)?;
    let eigenvalues = eigenvalues_from(n, &decays);
    let complete = eigenvalues.iter().all(|x| x.is_finite());
    Ok(CbResult {
        n,
        cycle: cfg.cycle.clone(),
        mode,
        lengths,
        process_infidelity: if complete {
            process_infidelity(&eigenvalues)
        } else {
            f64::NAN
        },
        bases,
        decays,
        eigenvalues,
        process_infidelity_ci: None,
        analytic_process_infidelity: None,
        records,
    })
}

/// Percentile interval of `values` at confidence `level`.
pub fn percentile_interval(values: &[f64], level: f64) -> (f64, f64) {
    let mut v: Vec<f64> = values.iter().copied().filter(|x| x.is_finite()).collect();
    if v.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    v.sort_by(f64::total_cmp);
    let alpha = (1.0 - level) / 2.0;
    let pick = |q: f64| {
        let pos = q * (v.len() - 1) as f64;
        let (lo, hi) = (pos.floor() as usize, pos.ceil() as usize);
        v[lo] + (v[hi] - v[lo]) * (pos - lo as f64)
    };
    (pick(alpha), pick(1.0 - alpha))
}

/// Percentile bootstrap of the mean of `data`.
pub fn bootstrap_mean_ci<R: Rng + ?Sized>(data: &[f64], resamples: usize, rng: &mut R) -> Result<(f64, f64)> {
    if data.is_empty() {
        return Err(Error::Missing("no data to bootstrap".into()));
    }
    let k = data.len();
    let means: Vec<f64> = (0..resamples)
        .map(|_| (0..k).map(|_| data[rng.random_range(0..k)]).sum::<f64>() / k as f64)
        .collect();
    Ok(percentile_interval(&means, 0.95))
}

/// Bootstrap replicates of the eigenvalue vector, resampling circuits
/// (randomizations) with replacement inside every (basis, length) group.
pub fn bootstrap_eigenvalues(cb: &CbResult, resamples: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
    if cb.records.is_empty() {
        return Err(Error::Missing("CB result carries no records".into()));
    }
    let mut groups: std::collections::BTreeMap<(usize, usize), Vec<&CbRecord>> = Default::default();
    for r in &cb.records {
        groups.entry((r.basis, r.length)).or_default().push(r);
    }
    (0..resamples)
        .into_par_iter()
        .map(|i| {
            let mut rng = seeding::stream(seed, i as u64);
            let mut recs = Vec::with_capacity(cb.records.len());
            for g in groups.values() {
                for _ in 0..g.len() {
                    recs.push(g[rng.random_range(0..g.len())].clone());
                }
            }
            let decays = decays_from(&recs, &cb.bases, &cb.lengths)?;
            Ok(eigenvalues_from(cb.n, &decays))
        })
        .collect()
}

/// Adds a 95% bootstrap interval for the process infidelity.
pub fn with_infidelity_ci(mut cb: CbResult, resamples: usize, seed: u64) -> Result<CbResult> {
    let reps = bootstrap_eigenvalues(&cb, resamples, seed)?;
    let vals: Vec<f64> = reps.iter().map(|p| process_infidelity(p)).collect();
    cb.process_infidelity_ci = Some(percentile_interval(&vals, 0.95));
    Ok(cb)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarginalRate {
    pub error_label: String,
    pub qubits: Vec<usize>,
    pub rate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CerResult {
    pub n: usize,
    pub cycle: String,
    /// Reconstructed Pauli error probabilities after clipping.
    pub c: Vec<f64>,
    /// Unclipped linear inversion.
    pub raw: Vec<f64>,
    /// Total negative mass removed by clipping.
    pub clipped_mass: f64,
    /// Per-entry 95% intervals (same order as `c`), when bootstrapped.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub ci: Vec<(f64, f64)>,
    pub marginals: Vec<MarginalRate>,
}

impl CerResult {
    pub fn probabilities(&self) -> Result<crate::pauli::PauliProbabilities> {
        crate::pauli::PauliProbabilities::new(self.c.clone())
    }

    pub fn rate(&self, label: &str) -> Result<f64> {
        let p: PauliString = label.parse()?;
        Ok(self.c[p.index()])
    }
}

/// Clipped and renormalized inversion of a PTM diagonal.
pub fn clip_probabilities(p: &[f64]) -> Result<(Vec<f64>, Vec<f64>, f64)> {
    let raw = inverse_walsh_hadamard(p)?;
    let clipped_mass: f64 = raw.iter().filter(|&&x| x < 0.0).map(|x| -x).sum();
    let pos: Vec<f64> = raw.iter().map(|&x| x.max(0.0)).collect();
    let total: f64 = pos.iter().sum();
    if total <= 0.0 {
        return Err(Error::InvalidProbabilities("reconstruction has no positive mass".into()));
    }
    Ok((pos.iter().map(|x| x / total).collect(), raw, clipped_mass))
}

/// Rates of every fully non-identity label on every one- and two-qubit
/// subset, summed over the other qubits.
pub fn marginal_rates(n: usize, c: &[f64]) -> Vec<(String, Vec<usize>, f64)> {
    let mut subsets: Vec<Vec<usize>> = (0..n).map(|q| vec![q]).collect();
    for a in 0..n {
        for b in a + 1..n {
            subsets.push(vec![a, b]);
        }
    }
    let mut out = Vec::new();
    for s in subsets {
        let k = s.len();
        let mut acc = vec![0.0; 1 << (2 * k)];
        for p in PauliString::all(n) {
            acc[p.restrict(&s).index()] += c[p.index()];
        }
        for (i, &rate) in acc.iter().enumerate() {
            let label = PauliString::from_index(k, i);
            if label.weight() == k {
                let text: String = label.labels().iter().map(|l| l.as_char()).collect();
                out.push((text, s.clone(), rate));
            }
        }
    }
    out
}

/// Inverse Walsh–Hadamard reconstruction with clipping; bootstraps the
/// recorded circuits for intervals when `resamples > 0`.
pub fn reconstruct_error_rates(cb: &CbResult, resamples: usize, seed: u64) -> Result<CerResult> {
    if let Some(missing) = cb.eigenvalues.iter().position(|x| !x.is_finite()) {
        return Err(Error::Missing(format!(
            "no decay for basis {}",
            PauliString::from_index(cb.n, missing)
        )));
    }
    let (c, raw, clipped_mass) = clip_probabilities(&cb.eigenvalues)?;
    let marg = marginal_rates(cb.n, &c);
    let (ci, marg_ci) = if resamples > 0 {
        let reps = bootstrap_eigenvalues(cb, resamples, seed)?;
        let cs: Vec<Vec<f64>> = reps
            .iter()
            .map(|p| clip_probabilities(p).map(|x| x.0))
            .collect::<Result<_>>()?;
        let ci = (0..c.len())
            .map(|i| percentile_interval(&cs.iter().map(|v| v[i]).collect::<Vec<_>>(), 0.95))
            .collect();
        let margs: Vec<Vec<f64>> = cs
            .iter()
            .map(|v| marginal_rates(cb.n, v).into_iter().map(|m| m.2).collect())
            .collect();
        let mci = (0..marg.len())
            .map(|i| percentile_interval(&margs.iter().map(|v| v[i]).collect::<Vec<_>>(), 0.95))
            .collect();
        (ci, mci)
    } else {
        (Vec::new(), marg.iter().map(|m| (m.2, m.2)).collect::<Vec<_>>())
    };
    Ok(CerResult {
        n: cb.n,
        cycle: cb.cycle.signature(),
        c,
        raw,
        clipped_mass,
        ci,
        marginals: marg
            .into_iter()
            .zip(marg_ci)
            .map(|((error_label, qubits, rate), (lo, hi))| MarginalRate {
                error_label,
                qubits,
                rate,
                ci_low: lo,
                ci_high: hi,
            })
            .collect(),
    })
}
