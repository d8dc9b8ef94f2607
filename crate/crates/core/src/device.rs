//! Reference four-qubit device: readout confusion, published cycle process
//! infidelities, and a synthetic error-rate dataset built from them.
//!
//! Device qubits Q4–Q7 are relabeled 0–3.

use serde::{Deserialize, Serialize};

use crate::benchmark::{marginal_rates, CerResult, MarginalRate};
use crate::error::{Error, Result};
use crate::noise::{NoiseModel, Readout};
use crate::pauli::{PauliProbabilities, PauliString};
use crate::seeding;
use rand::Rng;

pub const N_QUBITS: usize = 4;

/// Seeds used for the shipped dataset and fitted models.
pub const CER_SEED: u64 = 2021;
pub const FIT_SEED: u64 = 7;

pub const READOUT: [Readout; N_QUBITS] = [
    Readout { p00: 0.9969, p11: 0.9872 },
    Readout { p00: 0.9970, p11: 0.9862 },
    Readout { p00: 0.9973, p11: 0.9786 },
    Readout { p00: 0.9958, p11: 0.9841 },
];

/// Process infidelity of the four-qubit idle cycle.
pub const IDLE_CYCLE_INFIDELITY: f64 = 2.2e-2;

/// Process infidelities of the benchmarked CX cycles, `(control, target, e_F)`.
pub const CX_CYCLE_INFIDELITY: [(usize, usize, f64); 3] =
    [(1, 0, 7.1e-2), (2, 1, 6.3e-2), (3, 2, 6.7e-2)];

/// Used for ordered pairs without a published value.
pub const DEFAULT_CX_INFIDELITY: f64 = 6.7e-2;

/// Relative X/Y/Z weights of single-qubit errors (dephasing-biased).
const SINGLE_WEIGHTS: [f64; 3] = [0.3, 0.2, 0.5];

/// Models fitted from [`synthetic_cer`] and shipped under `data/`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReferenceModel {
    /// `S(q,h)` bodies with `s0 = 1`, `s1 = 0.7 / 0.9`.
    Complete,
    /// As `Complete` with `s0 = 0.1`.
    Scaled,
    /// Reconstructed Pauli rates only.
    Pauli,
}

impl ReferenceModel {
    pub fn json(self) -> &'static str {
        match self {
            ReferenceModel::Complete => include_str!("../data/model_complete.json"),
            ReferenceModel::Scaled => include_str!("../data/model_scaled.json"),
            ReferenceModel::Pauli => include_str!("../data/model_pauli.json"),
        }
    }

    pub fn load(self) -> Result<NoiseModel> {
        let m: NoiseModel = serde_json::from_str(self.json())?;
        m.validate()?;
        Ok(m)
    }
}

pub fn reference_cer() -> Result<Vec<CerResult>> {
    Ok(serde_json::from_str(include_str!("../data/cer_reference.json"))?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CycleTarget {
    pub signature: String,
    pub entangler: Option<(usize, usize)>,
    pub process_infidelity: f64,
}

pub fn idle_signature(n: usize) -> String {
    (0..n).map(|q| format!("I({q})")).collect::<Vec<_>>().join(";")
}

pub fn cx_signature(n: usize, control: usize, target: usize) -> String {
    let mut terms: Vec<(usize, String)> = vec![(control, format!("CX({control},{target})"))];
    terms.extend((0..n).filter(|&q| q != control && q != target).map(|q| (q, format!("I({q})"))));
    terms.sort();
    terms.into_iter().map(|t| t.1).collect::<Vec<_>>().join(";")
}

/// Idle cycle plus CX on every ordered pair.
pub fn cycle_targets() -> Vec<CycleTarget> {
    let mut out = vec![CycleTarget {
        signature: idle_signature(N_QUBITS),
        entangler: None,
        process_infidelity: IDLE_CYCLE_INFIDELITY,
    }];
    for c in 0..N_QUBITS {
        for t in 0..N_QUBITS {
            if c == t {
                continue;
            }
            let e = CX_CYCLE_INFIDELITY
                .iter()
                .find(|x| x.0 == c && x.1 == t)
                .map_or(DEFAULT_CX_INFIDELITY, |x| x.2);
            out.push(CycleTarget {
                signature: cx_signature(N_QUBITS, c, t),
                entangler: Some((c, t)),
                process_infidelity: e,
            });
        }
    }
    out
}

fn single_body(e: f64) -> Vec<f64> {
    let mut v = vec![1.0 - e];
    v.extend(SINGLE_WEIGHTS.iter().map(|w| w * e));
    v
}

fn pair_body<R: Rng + ?Sized>(e: f64, rng: &mut R) -> Vec<f64> {
    let w: Vec<f64> = (0..15).map(|_| rng.random_range(0.5..1.5)).collect();
    let total: f64 = w.iter().sum();
    let mut v = vec![1.0 - e];
    v.extend(w.iter().map(|x| x / total * e));
    v
}

/// Product of independent body distributions (bodies must partition `0..n`).
pub fn product_probabilities(n: usize, bodies: &[(Vec<usize>, Vec<f64>)]) -> Result<PauliProbabilities> {
    let c = PauliString::all(n)
        .map(|p| {
            bodies
                .iter()
                .map(|(qs, q)| q[p.restrict(qs).index()])
                .product::<f64>()
        })
        .collect();
    PauliProbabilities::new(c)
}

/// Per-cycle error rates whose process infidelities equal the published
/// values. Spectators of a CX cycle carry the idle single-qubit rate; the CX
/// pair absorbs the remainder.
pub fn synthetic_cer(seed: u64) -> Result<Vec<CerResult>> {
    let e1 = 1.0 - (1.0 - IDLE_CYCLE_INFIDELITY).powf(1.0 / N_QUBITS as f64);
    cycle_targets()
        .into_iter()
        .enumerate()
        .map(|(i, t)| {
            let mut rng = seeding::stream(seed, i as u64);
            let mut bodies: Vec<(Vec<usize>, Vec<f64>)> = Vec::new();
            let mut spectators = 0;
            for q in 0..N_QUBITS {
                if t.entangler.is_some_and(|(c, tg)| q == c || q == tg) {
                    continue;
                }
                bodies.push((vec![q], single_body(e1)));
                spectators += 1;
            }
            if let Some((c, tg)) = t.entangler {
                let e2 = 1.0 - (1.0 - t.process_infidelity) / (1.0 - e1).powi(spectators);
                if !(0.0..1.0).contains(&e2) {
                    return Err(Error::InvalidArgument(format!("pair infidelity {e2} for {}", t.signature)));
                }
                bodies.push((vec![c, tg], pair_body(e2, &mut rng)));
            }
            let probs = product_probabilities(N_QUBITS, &bodies)?;
            let c = probs.into_vec();
            let marginals = marginal_rates(N_QUBITS, &c)
                .into_iter()
                .map(|(error_label, qubits, rate)| MarginalRate {
                    error_label,
                    qubits,
                    rate,
                    ci_low: rate,
                    ci_high: rate,
                })
                .collect();
            Ok(CerResult {
                n: N_QUBITS,
                cycle: t.signature,
                raw: c.clone(),
                c,
                clipped_mass: 0.0,
                ci: Vec::new(),
                marginals,
            })
        })
        .collect()
}
