//! Cycle-keyed noise models: per-body `S(q,h)` channels for every hard-cycle
//! signature, an optional default rule, and per-qubit readout confusion.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::channel::{compose_sqh, Channel};
use crate::error::{Error, Result};
use crate::pauli::PauliProbabilities;

/// Diagnostics attached to bodies produced by the model fitter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BodyFitInfo {
    pub f: Vec<f64>,
    pub s0: f64,
    pub s1: f64,
    pub residual: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BodySpec {
    pub qubits: Vec<usize>,
    pub q: Vec<f64>,
    /// Coherent generator over the non-identity Paulis; empty means zero.
    #[serde(default)]
    pub h: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fit: Option<BodyFitInfo>,
}

impl BodySpec {
    pub fn pauli(qubits: Vec<usize>, q: Vec<f64>) -> Self {
        BodySpec {
            qubits,
            q,
            h: Vec::new(),
            fit: None,
        }
    }

    pub fn noiseless(qubits: Vec<usize>) -> Self {
        let mut q = vec![0.0; 1 << (2 * qubits.len())];
        q[0] = 1.0;
        BodySpec::pauli(qubits, q)
    }

    pub fn channel(&self) -> Result<Channel> {
        let q = PauliProbabilities::new(self.q.clone())?;
        if q.n() != self.qubits.len() {
            return Err(Error::DimensionMismatch {
                expected: self.qubits.len(),
                got: q.n(),
            });
        }
        let h = if self.h.is_empty() {
            vec![0.0; self.q.len() - 1]
        } else {
            self.h.clone()
        };
        compose_sqh(&q, &h)
    }

    pub fn is_noiseless(&self) -> bool {
        self.q[0] == 1.0 && self.h.iter().all(|&x| x == 0.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CycleRule {
    pub signature: String,
    pub bodies: Vec<BodySpec>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Readout {
    pub p00: f64,
    pub p11: f64,
}

impl Readout {
    pub const PERFECT: Readout = Readout { p00: 1.0, p11: 1.0 };

    pub fn validate(&self) -> Result<()> {
        let ok = |x: f64| x.is_finite() && (0.0..=1.0).contains(&x);
        if ok(self.p00) && ok(self.p11) {
            Ok(())
        } else {
            Err(Error::InvalidReadout(format!(
                "p00={}, p11={} must lie in [0, 1]",
                self.p00, self.p11
            )))
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    #[serde(default)]
    pub cycles: Vec<CycleRule>,
    #[serde(default)]
    pub default_bodies: Vec<BodySpec>,
    #[serde(default)]
    pub readout: Vec<Readout>,
}

impl NoiseModel {
    /// No gate noise on `n` qubits and perfect readout.
    pub fn noiseless(n: usize) -> Self {
        NoiseModel {
            cycles: Vec::new(),
            default_bodies: (0..n).map(|q| BodySpec::noiseless(vec![q])).collect(),
            readout: vec![Readout::PERFECT; n],
        }
    }

    /// Single-qubit depolarizing `eps` on every qubit after every hard cycle.
    pub fn depolarizing(n: usize, eps: f64) -> Self {
        let body = |q| BodySpec::pauli(vec![q], vec![1.0 - eps, eps / 3.0, eps / 3.0, eps / 3.0]);
        NoiseModel {
            cycles: Vec::new(),
            default_bodies: (0..n).map(body).collect(),
            readout: vec![Readout::PERFECT; n],
        }
    }

    pub fn rule(&self, signature: &str) -> Option<&[BodySpec]> {
        self.cycles
            .iter()
            .find(|r| r.signature == signature)
            .map(|r| r.bodies.as_slice())
            .or(if self.default_bodies.is_empty() {
                None
            } else {
                Some(self.default_bodies.as_slice())
            })
    }

    pub fn readout_for(&self, n: usize) -> Result<Vec<Readout>> {
        if self.readout.is_empty() {
            return Ok(vec![Readout::PERFECT; n]);
        }
        if self.readout.len() < n {
            return Err(Error::InvalidReadout(format!(
                "{} readout entries for {n} qubits",
                self.readout.len()
            )));
        }
        for r in &self.readout[..n] {
            r.validate()?;
        }
        Ok(self.readout[..n].to_vec())
    }

    /// Checks disjointness of every rule and that all channels are valid.
    pub fn validate(&self) -> Result<()> {
        let mut seen = BTreeMap::new();
        for rule in &self.cycles {
            if seen.insert(rule.signature.as_str(), ()).is_some() {
                return Err(Error::InvalidArgument(format!(
                    "duplicate rule for `{}`",
                    rule.signature
                )));
            }
            check_bodies(&rule.bodies, None)?;
        }
        check_bodies(&self.default_bodies, None)?;
        for r in &self.readout {
            r.validate()?;
        }
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let model: NoiseModel = serde_json::from_str(&text)?;
        model.validate()?;
        Ok(model)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(self)?)?;
        Ok(())
    }

    /// Same model with every coherent generator dropped.
    pub fn without_coherence(&self) -> Self {
        let strip = |b: &BodySpec| BodySpec {
            h: Vec::new(),
            ..b.clone()
        };
        NoiseModel {
            cycles: self
                .cycles
                .iter()
                .map(|r| CycleRule {
                    signature: r.signature.clone(),
                    bodies: r.bodies.iter().map(strip).collect(),
                })
                .collect(),
            default_bodies: self.default_bodies.iter().map(strip).collect(),
            readout: self.readout.clone(),
        }
    }
}

/// Bodies must be pairwise disjoint; when `n` is given they must also cover
/// qubits `0..n` exactly.
pub fn check_bodies(bodies: &[BodySpec], n: Option<usize>) -> Result<()> {
    let mut used = 0u64;
    for b in bodies {
        if b.qubits.is_empty() || b.qubits.len() > 2 {
            return Err(Error::InvalidArgument(format!(
                "bodies act on one or two qubits, got {:?}",
                b.qubits
            )));
        }
        if b.q.len() != 1 << (2 * b.qubits.len()) {
            return Err(Error::DimensionMismatch {
                expected: 1 << (2 * b.qubits.len()),
                got: b.q.len(),
            });
        }
        if !b.h.is_empty() && b.h.len() != b.q.len() - 1 {
            return Err(Error::DimensionMismatch {
                expected: b.q.len() - 1,
                got: b.h.len(),
            });
        }
        PauliProbabilities::new(b.q.clone())?;
        for &q in &b.qubits {
            if q >= 64 || used & (1 << q) != 0 {
                return Err(Error::InvalidArgument(format!("qubit {q} appears in two bodies")));
            }
            used |= 1 << q;
        }
    }
    if let Some(n) = n {
        let want = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
        if used != want {
            return Err(Error::InvalidArgument(format!(
                "bodies {:?} do not cover qubits 0..{n}",
                bodies.iter().map(|b| &b.qubits).collect::<Vec<_>>()
            )));
        }
    }
    Ok(())
}
