//! Fitting `S(q,h)` channels to a target PTM diagonal and unitarity, and
//! assembling per-cycle noise models from reconstructed error rates.

use levenberg_marquardt::{LeastSquaresProblem, LevenbergMarquardt};
use nalgebra::{DMatrix, DVector, Dyn, VecStorage, U1};
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::benchmark::CerResult;
use crate::circuit::parse_signature;
use crate::channel::{coherent_unitary, compose_sqh, unitarity};
use crate::error::{Error, Result};
use crate::linalg::CMat;
use crate::noise::{BodyFitInfo, BodySpec, CycleRule, NoiseModel, Readout};
use crate::pauli::{inverse_walsh_hadamard, walsh_hadamard, PauliProbabilities, PauliString};
use crate::ptm::pauli_conjugate;
use crate::seeding;

pub const FIT_SUCCESS_RESIDUAL: f64 = 1e-10;
pub const DEFAULT_STARTS: usize = 8;
const JACOBIAN_STEP: f64 = 1e-6;
/// Remaining starts are skipped once a start reaches this level.
const CONVERGED_RESIDUAL: f64 = 1e-24;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitTarget {
    pub f: Vec<f64>,
    pub s0: f64,
    pub s1: f64,
}

impl FitTarget {
    pub fn new(f: Vec<f64>, s0: f64, s1: f64) -> Result<Self> {
        let t = FitTarget { f, s0, s1 };
        t.validate()?;
        Ok(t)
    }

    pub fn n_body(&self) -> usize {
        (self.f.len().trailing_zeros() / 2) as usize
    }

    pub fn validate(&self) -> Result<()> {
        if self.f.len() != 4 && self.f.len() != 16 {
            return Err(Error::InvalidArgument(format!(
                "targets cover one or two qubits, got length {}",
                self.f.len()
            )));
        }
        if (self.f[0] - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidArgument("identity entry of f must be 1".into()));
        }
        if self.f.iter().any(|x| !(-1.0 - 1e-9..=1.0 + 1e-9).contains(x)) {
            return Err(Error::InvalidArgument("f entries must lie in [-1, 1]".into()));
        }
        for (name, s) in [("s0", self.s0), ("s1", self.s1)] {
            if !(0.0..=1.0).contains(&s) {
                return Err(Error::InvalidArgument(format!("{name}={s} outside [0, 1]")));
            }
        }
        Ok(())
    }

    /// Scaled diagonal `1 − s0(1 − f)`.
    pub fn target_diagonal(&self) -> Vec<f64> {
        self.f.iter().map(|x| 1.0 - self.s0 * (1.0 - x)).collect()
    }

    /// `1 − (1 − s1)(1 − d̄²)` with `d̄` the mean of the scaled diagonal.
    pub fn target_unitarity(&self) -> f64 {
        let d = self.target_diagonal();
        let mean = d.iter().sum::<f64>() / d.len() as f64;
        1.0 - (1.0 - self.s1) * (1.0 - mean * mean)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub q: Vec<f64>,
    pub h: Vec<f64>,
    pub residual: f64,
    pub iterations: usize,
    /// PTM diagonal and unitarity of the returned channel.
    pub d: Vec<f64>,
    pub u: f64,
}

struct Objective {
    n_body: usize,
    paulis: Vec<PauliString>,
    d_target: Vec<f64>,
    u_target: f64,
}

fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = logits.iter().map(|x| (x - max).exp()).collect();
    let s: f64 = e.iter().sum();
    e.iter().map(|x| x / s).collect()
}

impl Objective {
    fn split<'a>(&self, x: &'a [f64]) -> (Vec<f64>, &'a [f64]) {
        let np = self.paulis.len();
        (softmax(&x[..np]), &x[np..])
    }

    /// Diagonal of `PTM(U_h)·diag(W q)` and the unitarity `Σ_{j≥1} λ_j²/(N−1)`
    /// (post-composition with a unitary leaves unitarity unchanged).
    fn forward(&self, q: &[f64], h: &[f64]) -> (Vec<f64>, f64) {
        let lambda = walsh_hadamard(q).expect("length is a power of 4");
        let u = coherent_unitary(h, self.n_body).expect("generator length checked");
        let d = (1usize << self.n_body) as f64;
        let diag: Vec<f64> = self
            .paulis
            .iter()
            .zip(&lambda)
            .map(|(p, &l)| l * rotation_diag(p, &u) / d)
            .collect();
        let np = lambda.len() as f64;
        let unit = lambda[1..].iter().map(|l| l * l).sum::<f64>() / (np - 1.0);
        (diag, unit)
    }

    /// Off-identity diagonal mismatches followed by the unitarity mismatch.
    fn residuals(&self, x: &[f64]) -> Option<Vec<f64>> {
        if x.iter().any(|v| !v.is_finite()) {
            return None;
        }
        let (q, h) = self.split(x);
        let (d, u) = self.forward(&q, h);
        let mut r: Vec<f64> = d.iter().zip(&self.d_target).skip(1).map(|(a, b)| a - b).collect();
        r.push(u - self.u_target);
        Some(r)
    }

    fn value(&self, x: &[f64]) -> f64 {
        self.residuals(x)
            .map_or(f64::INFINITY, |r| r.iter().map(|v| v * v).sum())
    }
}

/// `Re Tr[P U P U†]`.
fn rotation_diag(p: &PauliString, u: &CMat) -> f64 {
    let pup = pauli_conjugate(p, u);
    pup.iter().zip(u.iter()).map(|(a, b)| (a * b.conj()).re).sum()
}

struct Problem<'a> {
    obj: &'a Objective,
    x: DVector<f64>,
}

impl LeastSquaresProblem<f64, Dyn, Dyn> for Problem<'_> {
    type ResidualStorage = VecStorage<f64, Dyn, U1>;
    type JacobianStorage = VecStorage<f64, Dyn, Dyn>;
    type ParameterStorage = VecStorage<f64, Dyn, U1>;

    fn set_params(&mut self, x: &DVector<f64>) {
        self.x.copy_from(x);
    }

    fn params(&self) -> DVector<f64> {
        self.x.clone()
    }

    fn residuals(&self) -> Option<DVector<f64>> {
        self.obj.residuals(self.x.as_slice()).map(DVector::from_vec)
    }

    fn jacobian(&self) -> Option<DMatrix<f64>> {
        let x = self.x.as_slice();
        let m = self.obj.paulis.len();
        let mut jac = DMatrix::zeros(m, x.len());
        let mut y = x.to_vec();
        for i in 0..x.len() {
            y[i] = x[i] + JACOBIAN_STEP;
            let up = self.obj.residuals(&y)?;
            y[i] = x[i] - JACOBIAN_STEP;
            let down = self.obj.residuals(&y)?;
            y[i] = x[i];
            for r in 0..m {
                jac[(r, i)] = (up[r] - down[r]) / (2.0 * JACOBIAN_STEP);
            }
        }
        Some(jac)
    }
}

fn run_start(obj: &Objective, x0: Vec<f64>) -> (Vec<f64>, f64, usize) {
    let problem = Problem {
        obj,
        x: DVector::from_vec(x0),
    };
    let (solved, report) = LevenbergMarquardt::new()
        .with_ftol(1e-15)
        .with_xtol(1e-15)
        .with_gtol(1e-15)
        .with_patience(100)
        .minimize(problem);
    let x = solved.x.as_slice().to_vec();
    let cost = obj.value(&x);
    (x, cost, report.number_of_evaluations)
}

/// Multistart Levenberg–Marquardt fit of `(q, h)`. Start 0 is the Pauli channel
/// closest to the target; the rest are random perturbations from `seed`.
pub fn fit_channel_with(target: &FitTarget, starts: usize, seed: u64) -> Result<FitResult> {
    target.validate()?;
    let n_body = target.n_body();
    let obj = Objective {
        n_body,
        paulis: PauliString::all(n_body).collect(),
        d_target: target.target_diagonal(),
        u_target: target.target_unitarity(),
    };
    let np = obj.paulis.len();
    let guess: Vec<f64> = inverse_walsh_hadamard(&obj.d_target)?
        .into_iter()
        .map(|c| c.max(1e-8).ln())
        .collect();
    let mut best: Option<(Vec<f64>, f64, usize)> = None;
    let mut total_iters = 0;
    for s in 0..starts.max(1) {
        let mut rng = seeding::stream(seed, s as u64);
        let x0: Vec<f64> = (0..2 * np - 1)
            .map(|i| {
                let noise: f64 = rng.sample(StandardNormal);
                if i < np {
                    guess[i] + if s == 0 { 0.0 } else { noise }
                } else if s == 0 {
                    0.0
                } else {
                    0.3 * noise
                }
            })
            .collect();
        let (x, cost, iters) = run_start(&obj, x0);
        total_iters += iters;
        if best.as_ref().is_none_or(|b| cost < b.1) {
            best = Some((x, cost, iters));
        }
        if cost < CONVERGED_RESIDUAL {
            break;
        }
    }
    let (x, residual, _) = best.expect("at least one start");
    if !(residual < FIT_SUCCESS_RESIDUAL) {
        return Err(Error::FitFailed { residual });
    }
    let (q, h) = obj.split(&x);
    let (d, u) = obj.forward(&q, h);
    Ok(FitResult {
        q,
        h: h.to_vec(),
        residual,
        iterations: total_iters,
        d,
        u,
    })
}

pub fn fit_channel(target: &FitTarget) -> Result<FitResult> {
    fit_channel_with(target, DEFAULT_STARTS, 0)
}

/// Forward consistency of a body spec: achieved PTM diagonal and unitarity.
pub fn body_forward(b: &BodySpec) -> Result<(Vec<f64>, f64)> {
    let ch = b.channel()?;
    Ok((ch.ptm().diagonal_entries(), unitarity(&ch)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelScales {
    pub s0_1q: f64,
    pub s0_2q: f64,
    pub s1_1q: f64,
    pub s1_2q: f64,
}

impl ModelScales {
    pub const COMPLETE: ModelScales = ModelScales {
        s0_1q: 1.0,
        s0_2q: 1.0,
        s1_1q: 0.7,
        s1_2q: 0.9,
    };
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    /// `S(q,h)` fitted to scaled diagonals and unitarity targets.
    Complete,
    /// Reconstructed Pauli rates used directly, no coherent part.
    Pauli,
}

/// Body partition of a cycle: the entangling pair (if any) and singles.
pub fn cycle_bodies(sig: &str) -> Result<Vec<Vec<usize>>> {
    let mut out: Vec<Vec<usize>> = parse_signature(sig)?
        .into_iter()
        .map(|(_, qs)| if qs.len() == 2 { qs } else { vec![qs[0]] })
        .collect();
    out.sort();
    Ok(out)
}

/// One rule per CER result, with bodies fitted independently (in parallel).
pub fn build_noise_model(
    cers: &[CerResult],
    kind: ModelKind,
    scales: ModelScales,
    readout: Vec<Readout>,
    seed: u64,
) -> Result<NoiseModel> {
    let mut jobs = Vec::new();
    for (ci, cer) in cers.iter().enumerate() {
        let probs = PauliProbabilities::new(cer.c.clone())?;
        let bodies = cycle_bodies(&cer.cycle)?;
        let covered: usize = bodies.iter().map(|b| b.len()).sum();
        if covered != cer.n {
            return Err(Error::Missing(format!(
                "signature `{}` does not cover {} qubits",
                cer.cycle, cer.n
            )));
        }
        for (bi, qubits) in bodies.into_iter().enumerate() {
            let local = probs.reduce(&qubits);
            jobs.push((ci, bi, qubits, local));
        }
    }
    let fitted: Vec<(usize, BodySpec)> = jobs
        .par_iter()
        .map(|(ci, bi, qubits, local)| {
            let spec = match kind {
                ModelKind::Pauli => BodySpec::pauli(qubits.clone(), local.as_slice().to_vec()),
                ModelKind::Complete => {
                    let (s0, s1) = if qubits.len() == 2 {
                        (scales.s0_2q, scales.s1_2q)
                    } else {
                        (scales.s0_1q, scales.s1_1q)
                    };
                    let f = local.to_eigenvalues().as_slice().to_vec();
                    let target = FitTarget::new(f.clone(), s0, s1)?;
                    let body_seed = seeding::child_seed(seed, (*ci as u64) << 8 | *bi as u64);
                    let fit = fit_channel_with(&target, DEFAULT_STARTS, body_seed)?;
                    BodySpec {
                        qubits: qubits.clone(),
                        q: fit.q,
                        h: fit.h,
                        fit: Some(BodyFitInfo {
                            f,
                            s0,
                            s1,
                            residual: fit.residual,
                            iterations: fit.iterations,
                        }),
                    }
                }
            };
            Ok((*ci, spec))
        })
        .collect::<Result<_>>()?;
    let mut cycles: Vec<CycleRule> = cers
        .iter()
        .map(|c| CycleRule {
            signature: c.cycle.clone(),
            bodies: Vec::new(),
        })
        .collect();
    for (ci, spec) in fitted {
        cycles[ci].bodies.push(spec);
    }
    let default_bodies = cycles
        .iter()
        .find(|r| parse_signature(&r.signature).is_ok_and(|t| t.iter().all(|(name, _)| name == "I")))
        .map(|r| r.bodies.clone())
        .unwrap_or_default();
    let model = NoiseModel {
        cycles,
        default_bodies,
        readout,
    };
    model.validate()?;
    Ok(model)
}

/// Re-checks every fitted body: stored residual, CPTP, and forward match of
/// the scaled diagonal and unitarity targets.
pub fn audit_model(model: &NoiseModel, tol: f64) -> Result<Vec<String>> {
    let mut problems = Vec::new();
    for rule in &model.cycles {
        for b in &rule.bodies {
            let Some(info) = &b.fit else { continue };
            let ch = b.channel()?;
            let target = FitTarget::new(info.f.clone(), info.s0, info.s1)?;
            let (d, u) = (ch.ptm().diagonal_entries(), unitarity(&ch));
            let dd = d
                .iter()
                .zip(target.target_diagonal())
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            let du = (u - target.target_unitarity()).abs();
            let tag = format!("{} {:?}", rule.signature, b.qubits);
            if !(info.residual < FIT_SUCCESS_RESIDUAL) {
                problems.push(format!("{tag}: residual {:e}", info.residual));
            }
            if !ch.is_cptp() {
                problems.push(format!("{tag}: not CPTP"));
            }
            if dd > tol || du > tol {
                problems.push(format!("{tag}: |Δd|={dd:e} |Δu|={du:e}"));
            }
        }
    }
    Ok(problems)
}

/// `S(q,h)` for a fit result.
pub fn fitted_channel(fit: &FitResult) -> Result<crate::channel::Channel> {
    compose_sqh(&PauliProbabilities::new(fit.q.clone())?, &fit.h)
}
