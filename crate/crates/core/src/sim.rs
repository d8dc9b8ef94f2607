//! Exact density-matrix simulation under a cycle-keyed noise model.
//!
//! Easy cycles are applied ideally; each hard cycle is applied ideally and
//! then followed by the tensor product of its body channels. Operators are
//! applied locally on their target qubits, never as full-register matrices.

use std::collections::HashMap;
use std::sync::{Arc, RwLock};

use crate::channel::Channel;
use crate::circuit::{circuit_unitary, Circuit, Cycle, CycleKind};
use crate::distribution::{measure_distribution, Distribution};
use crate::error::{Error, Result};
use crate::linalg::{CMat, C64, ONE, ZERO};
use crate::noise::{check_bodies, NoiseModel, Readout};

pub const MAX_SIM_QUBITS: usize = 5;

/// Dense offsets of the `2^k` sub-basis states on `targets` and the base
/// indices of the remaining qubits.
fn layout(targets: &[usize], n: usize) -> (Vec<usize>, Vec<usize>) {
    let k = targets.len();
    let offsets: Vec<usize> = (0..1usize << k)
        .map(|s| {
            targets.iter().enumerate().fold(0, |acc, (j, &t)| {
                if (s >> (k - 1 - j)) & 1 == 1 {
                    acc | (1 << (n - 1 - t))
                } else {
                    acc
                }
            })
        })
        .collect();
    let mask = offsets[offsets.len() - 1];
    let rests = (0..1usize << n).filter(|i| i & mask == 0).collect();
    (offsets, rests)
}

/// `ρ ← U ρ U†` with `U` acting on `targets` (first target most significant).
pub fn apply_unitary(rho: &mut CMat, u: &CMat, targets: &[usize]) {
    let n = rho.nrows().trailing_zeros() as usize;
    let (offsets, rests) = layout(targets, n);
    let d = offsets.len();
    let dim = rho.nrows();
    let mut buf = vec![ZERO; d];
    for col in 0..dim {
        for &r in &rests {
            for (i, &o) in offsets.iter().enumerate() {
                buf[i] = rho[(r + o, col)];
            }
            for (i, &o) in offsets.iter().enumerate() {
                rho[(r + o, col)] = (0..d).map(|j| u[(i, j)] * buf[j]).sum();
            }
        }
    }
    for row in 0..dim {
        for &r in &rests {
            for (i, &o) in offsets.iter().enumerate() {
                buf[i] = rho[(row, r + o)];
            }
            for (i, &o) in offsets.iter().enumerate() {
                rho[(row, r + o)] = (0..d).map(|j| buf[j] * u[(i, j)].conj()).sum();
            }
        }
    }
}

/// Superoperator on `(row, col)` pairs: `S[(r'·d + c'), (r·d + c)] =
/// Σ_K K[r', r] · conj(K[c', c])`.
pub fn superoperator(ch: &Channel) -> CMat {
    let d = 1usize << ch.n_body();
    let mut s = CMat::zeros(d * d, d * d);
    for k in ch.kraus() {
        for r2 in 0..d {
            for c2 in 0..d {
                for r in 0..d {
                    let a = k[(r2, r)];
                    if a == ZERO {
                        continue;
                    }
                    for c in 0..d {
                        s[(r2 * d + c2, r * d + c)] += a * k[(c2, c)].conj();
                    }
                }
            }
        }
    }
    s
}

/// `ρ ← Λ(ρ)` with `Λ` given as a local superoperator on `targets`.
pub fn apply_superop(rho: &mut CMat, s: &CMat, targets: &[usize]) {
    let n = rho.nrows().trailing_zeros() as usize;
    let (offsets, rests) = layout(targets, n);
    let d = offsets.len();
    let mut v = vec![ZERO; d * d];
    let mut w = vec![ZERO; d * d];
    for &rr in &rests {
        for &cr in &rests {
            for (i, &oi) in offsets.iter().enumerate() {
                for (j, &oj) in offsets.iter().enumerate() {
                    v[i * d + j] = rho[(rr + oi, cr + oj)];
                }
            }
            for (a, out) in w.iter_mut().enumerate() {
                *out = (0..d * d).map(|b| s[(a, b)] * v[b]).sum();
            }
            for (i, &oi) in offsets.iter().enumerate() {
                for (j, &oj) in offsets.iter().enumerate() {
                    rho[(rr + oi, cr + oj)] = w[i * d + j];
                }
            }
        }
    }
}

pub fn ground_state(n: usize) -> CMat {
    let mut rho = CMat::zeros(1 << n, 1 << n);
    rho[(0, 0)] = ONE;
    rho
}

pub fn apply_cycle_ideal(rho: &mut CMat, cycle: &Cycle) {
    for g in &cycle.gates {
        if !g.is_identity() {
            apply_unitary(rho, &g.unitary(), &g.qubits);
        }
    }
}

#[derive(Debug)]
struct BodyOp {
    qubits: Vec<usize>,
    superop: CMat,
}

type CycleNoise = Arc<Vec<BodyOp>>;

fn body_ops(bodies: Vec<(Vec<usize>, Channel)>, twirl: bool) -> Result<CycleNoise> {
    let mut ops = Vec::new();
    for (qubits, ch) in bodies {
        let ch = if twirl { ch.pauli_twirl()? } else { ch };
        let superop = superoperator(&ch);
        let is_identity = (&superop - CMat::identity(superop.nrows(), superop.ncols()))
            .iter()
            .all(|x| x.norm() < 1e-15);
        if !is_identity {
            ops.push(BodyOp { qubits, superop });
        }
    }
    Ok(Arc::new(ops))
}

/// Simulator bound to a register size and a noise model.
#[derive(Debug)]
pub struct Simulator {
    n: usize,
    model: NoiseModel,
    readout: Vec<Readout>,
    twirl: bool,
    overrides: HashMap<String, CycleNoise>,
    cache: RwLock<HashMap<String, CycleNoise>>,
}

impl Simulator {
    pub fn new(model: &NoiseModel, n: usize) -> Result<Self> {
        if n == 0 || n > MAX_SIM_QUBITS {
            return Err(Error::TooManyQubits(n, MAX_SIM_QUBITS));
        }
        Ok(Simulator {
            n,
            model: model.clone(),
            readout: model.readout_for(n)?,
            twirl: false,
            overrides: HashMap::new(),
            cache: RwLock::new(HashMap::new()),
        })
    }

    pub fn noiseless(n: usize) -> Result<Self> {
        Simulator::new(&NoiseModel::noiseless(n), n)
    }

    /// Replaces every hard-cycle channel by its perfect Pauli twirl. This is
    /// the exact average of randomized compiling over all twirls.
    pub fn twirled(mut self) -> Result<Self> {
        self.twirl = true;
        self.cache = RwLock::new(HashMap::new());
        let mut rebuilt = HashMap::new();
        for (sig, ops) in &self.overrides {
            let mut out = Vec::new();
            for op in ops.iter() {
                let ch = superop_to_channel(&op.superop)?;
                out.push((op.qubits.clone(), ch));
            }
            rebuilt.insert(sig.clone(), body_ops(out, true)?);
        }
        self.overrides = rebuilt;
        Ok(self)
    }

    /// A twirled simulator sharing this one's model, overrides and readout.
    pub fn twirled_copy(&self) -> Result<Self> {
        Simulator {
            n: self.n,
            model: self.model.clone(),
            readout: self.readout.clone(),
            twirl: self.twirl,
            overrides: self.overrides.clone(),
            cache: RwLock::new(HashMap::new()),
        }
        .twirled()
    }

    /// Process fidelity of the noise that follows `cycle`.
    pub fn cycle_process_fidelity(&self, cycle: &Cycle) -> Result<f64> {
        Ok(self
            .cycle_noise(cycle)?
            .iter()
            .map(|op| {
                op.superop.trace().re / op.superop.nrows() as f64
            })
            .product())
    }

    /// Uses arbitrary body channels for the hard cycle with `signature`.
    pub fn with_cycle_channels(mut self, signature: &str, bodies: Vec<(Vec<usize>, Channel)>) -> Result<Self> {
        let mut used = vec![false; self.n];
        for (qs, ch) in &bodies {
            if qs.len() != ch.n_body() {
                return Err(Error::DimensionMismatch {
                    expected: qs.len(),
                    got: ch.n_body(),
                });
            }
            for &q in qs {
                if q >= self.n || std::mem::replace(&mut used[q], true) {
                    return Err(Error::InvalidArgument(format!("bad body qubit {q}")));
                }
            }
        }
        self.overrides
            .insert(signature.to_string(), body_ops(bodies, self.twirl)?);
        Ok(self)
    }

    pub fn with_readout(mut self, readout: Vec<Readout>) -> Result<Self> {
        if readout.len() != self.n {
            return Err(Error::InvalidReadout(format!(
                "{} entries for {} qubits",
                readout.len(),
                self.n
            )));
        }
        for r in &readout {
            r.validate()?;
        }
        self.readout = readout;
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn readout(&self) -> &[Readout] {
        &self.readout
    }

    pub fn model(&self) -> &NoiseModel {
        &self.model
    }

    fn cycle_noise(&self, cycle: &Cycle) -> Result<CycleNoise> {
        let sig = cycle.signature();
        if let Some(ops) = self.overrides.get(&sig) {
            return Ok(ops.clone());
        }
        if let Some(ops) = self.cache.read().expect("cache lock").get(&sig) {
            return Ok(ops.clone());
        }
        let bodies = self
            .model
            .rule(&sig)
            .ok_or_else(|| Error::MissingCycleRule(sig.clone()))?;
        check_bodies(bodies, Some(self.n))?;
        let channels = bodies
            .iter()
            .map(|b| Ok((b.qubits.clone(), b.channel()?)))
            .collect::<Result<Vec<_>>>()?;
        let ops = body_ops(channels, self.twirl)?;
        self.cache
            .write()
            .expect("cache lock")
            .insert(sig, ops.clone());
        Ok(ops)
    }

    /// Applies one cycle (with noise after hard cycles) in place.
    pub fn apply_cycle(&self, rho: &mut CMat, cycle: &Cycle) -> Result<()> {
        apply_cycle_ideal(rho, cycle);
        if cycle.kind == CycleKind::Hard {
            for op in self.cycle_noise(cycle)?.iter() {
                apply_superop(rho, &op.superop, &op.qubits);
            }
        }
        Ok(())
    }

    pub fn evolve(&self, c: &Circuit, mut rho: CMat) -> Result<CMat> {
        if c.n != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: c.n,
            });
        }
        for cycle in &c.cycles {
            self.apply_cycle(&mut rho, cycle)?;
        }
        Ok(rho)
    }

    /// Final state from `|0…0⟩`.
    pub fn run(&self, c: &Circuit) -> Result<CMat> {
        self.evolve(c, ground_state(self.n))
    }

    /// Exact outcome distribution including readout confusion.
    pub fn distribution(&self, c: &Circuit) -> Result<Distribution> {
        measure_distribution(&self.run(c)?, &self.readout)
    }
}

fn superop_to_channel(s: &CMat) -> Result<Channel> {
    // Choi matrix is a reshuffle of the superoperator
    let d2 = s.nrows();
    let d = (d2 as f64).sqrt().round() as usize;
    let mut choi = CMat::zeros(d2, d2);
    for r2 in 0..d {
        for c2 in 0..d {
            for r in 0..d {
                for c in 0..d {
                    choi[(r * d + r2, c * d + c2)] = s[(r2 * d + c2, r * d + c)];
                }
            }
        }
    }
    let eig = choi.symmetric_eigen();
    let mut kraus = Vec::new();
    for (i, &lambda) in eig.eigenvalues.iter().enumerate() {
        if lambda <= 1e-14 {
            continue;
        }
        let v = eig.eigenvectors.column(i);
        kraus.push(CMat::from_fn(d, d, |a, b| v[b * d + a] * C64::new(lambda.sqrt(), 0.0)));
    }
    Channel::from_kraus(kraus)
}

/// `ρ` after running `c` under `nm` from `|0…0⟩`.
pub fn simulate(c: &Circuit, nm: &NoiseModel) -> Result<CMat> {
    Simulator::new(nm, c.n)?.run(c)
}

/// Noiseless output distribution with perfect readout.
pub fn ideal_distribution(c: &Circuit) -> Result<Distribution> {
    let u = circuit_unitary(c)?;
    let p: Vec<f64> = (0..u.nrows()).map(|i| u[(i, 0)].norm_sqr()).collect();
    let total: f64 = p.iter().sum();
    Distribution::from_probs(c.n, p.iter().map(|x| x / total).collect())
}
