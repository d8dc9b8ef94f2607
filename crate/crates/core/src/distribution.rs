//! Outcome distributions over n-bit strings, exact or sampled.
//!
//! Bitstrings are written with qubit 0 leftmost, which is also the most
//! significant bit of the dense index.

use std::collections::BTreeMap;

use rand::Rng;
use rand_distr::{Binomial, Distribution as _};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::CMat;
use crate::noise::Readout;

pub const NORMALIZATION_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
enum Data {
    Probs(Vec<f64>),
    Counts(Vec<u64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Repr", into = "Repr")]
pub struct Distribution {
    n: usize,
    data: Data,
}

#[derive(Serialize, Deserialize)]
struct Repr {
    n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    probs: Option<BTreeMap<String, f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    counts: Option<BTreeMap<String, u64>>,
}

pub fn bitstring(n: usize, index: usize) -> String {
    (0..n)
        .map(|q| if (index >> (n - 1 - q)) & 1 == 1 { '1' } else { '0' })
        .collect()
}

pub fn parse_bitstring(s: &str) -> Result<usize> {
    s.chars().try_fold(0usize, |acc, ch| match ch {
        '0' => Ok(acc << 1),
        '1' => Ok((acc << 1) | 1),
        _ => Err(Error::InvalidArgument(format!("bad bitstring `{s}`"))),
    })
}

fn dense_from_map<T: Copy + Default>(n: usize, map: &BTreeMap<String, T>) -> Result<Vec<T>> {
    let mut out = vec![T::default(); 1 << n];
    for (k, &v) in map {
        if k.len() != n {
            return Err(Error::InvalidArgument(format!("bitstring `{k}` is not {n} bits")));
        }
        out[parse_bitstring(k)?] = v;
    }
    Ok(out)
}

impl TryFrom<Repr> for Distribution {
    type Error = Error;

    fn try_from(r: Repr) -> Result<Self> {
        match (r.probs, r.counts) {
            (Some(p), None) => Distribution::from_probs(r.n, dense_from_map(r.n, &p)?),
            (None, Some(c)) => Distribution::from_counts(r.n, dense_from_map(r.n, &c)?),
            _ => Err(Error::InvalidArgument(
                "distribution needs exactly one of `probs` or `counts`".into(),
            )),
        }
    }
}

impl From<Distribution> for Repr {
    fn from(d: Distribution) -> Self {
        let n = d.n;
        match d.data {
            Data::Probs(p) => Repr {
                n,
                probs: Some(
                    p.iter()
                        .enumerate()
                        .filter(|(_, &x)| x != 0.0)
                        .map(|(i, &x)| (bitstring(n, i), x))
                        .collect(),
                ),
                counts: None,
            },
            Data::Counts(c) => Repr {
                n,
                probs: None,
                counts: Some(
                    c.iter()
                        .enumerate()
                        .filter(|(_, &x)| x != 0)
                        .map(|(i, &x)| (bitstring(n, i), x))
                        .collect(),
                ),
            },
        }
    }
}

impl Distribution {
    /// Dense probabilities; tiny negative round-off is clamped to zero.
    pub fn from_probs(n: usize, mut p: Vec<f64>) -> Result<Self> {
        if p.len() != 1 << n {
            return Err(Error::DimensionMismatch {
                expected: 1 << n,
                got: p.len(),
            });
        }
        if p.iter().any(|x| !x.is_finite() || *x < -NORMALIZATION_TOL) {
            return Err(Error::InvalidProbabilities("negative or non-finite entry".into()));
        }
        let total: f64 = p.iter().sum();
        if (total - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::InvalidProbabilities(format!("sum is {total}")));
        }
        for x in &mut p {
            *x = x.max(0.0);
        }
        Ok(Distribution {
            n,
            data: Data::Probs(p),
        })
    }

    pub fn from_counts(n: usize, counts: Vec<u64>) -> Result<Self> {
        if counts.len() != 1 << n {
            return Err(Error::DimensionMismatch {
                expected: 1 << n,
                got: counts.len(),
            });
        }
        if counts.iter().all(|&c| c == 0) {
            return Err(Error::InvalidArgument("counts are empty".into()));
        }
        Ok(Distribution {
            n,
            data: Data::Counts(counts),
        })
    }

    pub fn point_mass(n: usize, index: usize) -> Self {
        let mut p = vec![0.0; 1 << n];
        p[index] = 1.0;
        Distribution {
            n,
            data: Data::Probs(p),
        }
    }

    pub fn uniform(n: usize) -> Self {
        let d = 1usize << n;
        Distribution {
            n,
            data: Data::Probs(vec![1.0 / d as f64; d]),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn is_counts(&self) -> bool {
        matches!(self.data, Data::Counts(_))
    }

    pub fn counts(&self) -> Option<&[u64]> {
        match &self.data {
            Data::Counts(c) => Some(c),
            Data::Probs(_) => None,
        }
    }

    pub fn shots(&self) -> Option<u64> {
        self.counts().map(|c| c.iter().sum())
    }

    /// Normalized probabilities (counts are divided by the shot total).
    pub fn probabilities(&self) -> Vec<f64> {
        match &self.data {
            Data::Probs(p) => p.clone(),
            Data::Counts(c) => {
                let total = c.iter().sum::<u64>() as f64;
                c.iter().map(|&x| x as f64 / total).collect()
            }
        }
    }

    pub fn probability(&self, bits: &str) -> Result<f64> {
        let idx = parse_bitstring(bits)?;
        Ok(self.probabilities().get(idx).copied().unwrap_or(0.0))
    }

    /// `Σ_x p(x) (−1)^{popcount(x & mask)}` with `mask` over dense indices.
    pub fn parity_expectation(&self, mask: usize) -> f64 {
        self.probabilities()
            .iter()
            .enumerate()
            .map(|(i, &p)| if (i & mask).count_ones() % 2 == 0 { p } else { -p })
            .sum()
    }
}

/// Pushes ideal probabilities through each qubit's confusion matrix
/// `[[p00, 1−p11], [1−p00, p11]]`.
pub fn apply_readout(probs: &[f64], readout: &[Readout]) -> Result<Vec<f64>> {
    let n = readout.len();
    if probs.len() != 1 << n {
        return Err(Error::DimensionMismatch {
            expected: 1 << n,
            got: probs.len(),
        });
    }
    let mut p = probs.to_vec();
    for (q, r) in readout.iter().enumerate() {
        r.validate()?;
        if r.p00 == 1.0 && r.p11 == 1.0 {
            continue;
        }
        let bit = 1usize << (n - 1 - q);
        for i in 0..p.len() {
            if i & bit != 0 {
                continue;
            }
            let (a, b) = (p[i], p[i | bit]);
            p[i] = r.p00 * a + (1.0 - r.p11) * b;
            p[i | bit] = (1.0 - r.p00) * a + r.p11 * b;
        }
    }
    Ok(p)
}

/// Outcome distribution of `rho` measured in the computational basis.
pub fn measure_distribution(rho: &CMat, readout: &[Readout]) -> Result<Distribution> {
    let n = readout.len();
    if rho.nrows() != 1 << n {
        return Err(Error::DimensionMismatch {
            expected: 1 << n,
            got: rho.nrows(),
        });
    }
    let ideal: Vec<f64> = (0..rho.nrows()).map(|i| rho[(i, i)].re).collect();
    let p = apply_readout(&ideal, readout)?;
    let total: f64 = p.iter().sum();
    Distribution::from_probs(n, p.iter().map(|x| x / total).collect())
}

/// Multinomial draw of `shots` outcomes via sequential binomials.
pub fn sample_counts<R: Rng + ?Sized>(d: &Distribution, shots: u64, rng: &mut R) -> Result<Distribution> {
    if shots == 0 {
        return Err(Error::InvalidArgument("shots must be positive".into()));
    }
    let p = d.probabilities();
    let mut counts = vec![0u64; p.len()];
    let mut remaining = shots;
    let mut mass = 1.0;
    for (i, &pi) in p.iter().enumerate() {
        if remaining == 0 {
            break;
        }
        if i + 1 == p.len() || mass <= pi {
            counts[i] = remaining;
            break;
        }
        let frac = (pi / mass).clamp(0.0, 1.0);
        let k = Binomial::new(remaining, frac)
            .map_err(|e| Error::InvalidProbabilities(e.to_string()))?
            .sample(rng);
        counts[i] = k;
        remaining -= k;
        mass -= pi;
    }
    Distribution::from_counts(d.n, counts)
}

/// Summed counts of several sampled distributions.
pub fn union_counts(ds: &[Distribution]) -> Result<Distribution> {
    let first = ds
        .first()
        .ok_or_else(|| Error::InvalidArgument("nothing to merge".into()))?;
    let mut total = vec![0u64; 1 << first.n];
    for d in ds {
        if d.n != first.n {
            return Err(Error::DimensionMismatch {
                expected: first.n,
                got: d.n,
            });
        }
        let c = d
            .counts()
            .ok_or_else(|| Error::InvalidArgument("union needs sampled counts".into()))?;
        for (t, &x) in total.iter_mut().zip(c) {
            *t += x;
        }
    }
    Distribution::from_counts(first.n, total)
}

/// Keeps `shots` of the recorded shots chosen uniformly without replacement.
pub fn subsample<R: Rng + ?Sized>(d: &Distribution, shots: u64, rng: &mut R) -> Result<Distribution> {
    let c = d
        .counts()
        .ok_or_else(|| Error::InvalidArgument("subsampling needs counts".into()))?;
    let total: u64 = c.iter().sum();
    if shots == 0 || shots > total {
        return Err(Error::InvalidArgument(format!(
            "cannot keep {shots} of {total} shots"
        )));
    }
    let cumulative: Vec<u64> = c
        .iter()
        .scan(0u64, |acc, &x| {
            *acc += x;
            Some(*acc)
        })
        .collect();
    let mut out = vec![0u64; c.len()];
    for s in rand::seq::index::sample(rng, total as usize, shots as usize) {
        let k = cumulative.partition_point(|&cum| cum <= s as u64);
        out[k] += 1;
    }
    Distribution::from_counts(d.n, out)
}
