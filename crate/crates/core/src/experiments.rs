//! End-to-end studies comparing bare circuits with their randomized-compiling
//! unions: QFT inputs, random-circuit depth and randomization sweeps, the
//! coherent-fraction study and single-qubit tomography.
//!
//! Every study is deterministic under its seed. Circuits (or inputs) run in
//! parallel; circuit `i` draws from stream `i` of the study seed.

use std::f64::consts::PI;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{coherent_unitary, compose_sqh, unitarity, Channel};
use crate::circuit::{build_qft, circuit_unitary, sample_random_circuit, Circuit, RandomMode};
use crate::compile::{native_cx, recompile_cycle_pair};
use crate::distribution::{sample_counts, subsample, union_counts, Distribution};
use crate::error::{Error, Result};
use crate::gates::u3_matrix;
use crate::linalg::{identity, CMat};
use crate::metrics::{
    bloch_from_tomography, linear_fit, pearson_r, spearman, tomography_rotation, tvd,
    uniformity_distance, BlochState,
};
use crate::noise::{BodySpec, NoiseModel};
use crate::pauli::PauliProbabilities;
use crate::rc::randomize_batch;
use crate::seeding;
use crate::sim::{ideal_distribution, Simulator};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub library: String,
    pub version: String,
    pub seed: u64,
}

impl Provenance {
    pub fn new(seed: u64) -> Self {
        Provenance {
            library: "rckit".into(),
            version: VERSION.into(),
            seed,
        }
    }
}

/// Shot budget for one bare-vs-RC comparison. `shots == 0` selects exact
/// distributions (the RC result is then the mean over randomizations).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShotPlan {
    pub shots: u64,
    pub randomizations: usize,
}

impl ShotPlan {
    pub fn new(shots: u64, randomizations: usize) -> Self {
        ShotPlan { shots, randomizations }
    }

    pub fn exact(randomizations: usize) -> Self {
        ShotPlan { shots: 0, randomizations }
    }

    pub fn is_exact(&self) -> bool {
        self.shots == 0
    }

    pub fn shots_per_randomization(&self) -> u64 {
        self.shots / self.randomizations.max(1) as u64
    }

    pub fn validate(&self) -> Result<()> {
        if self.randomizations == 0 {
            return Err(Error::InvalidArgument("need at least one randomization".into()));
        }
        if self.shots % self.randomizations as u64 != 0 {
            return Err(Error::InvalidArgument(format!(
                "{} shots do not split evenly over {} randomizations",
                self.shots, self.randomizations
            )));
        }
        Ok(())
    }
}

/// Outcome distributions of one bare circuit and its randomizations.
#[derive(Debug, Clone)]
pub struct RcRun {
    pub ideal: Distribution,
    pub bare: Distribution,
    pub randomizations: Vec<Distribution>,
    pub rc: Distribution,
}

impl RcRun {
    pub fn bare_tvd(&self) -> f64 {
        tvd(&self.bare, &self.ideal).expect("same register")
    }

    pub fn rc_tvd(&self) -> f64 {
        tvd(&self.rc, &self.ideal).expect("same register")
    }
}

pub fn mean_distribution(ds: &[Distribution]) -> Result<Distribution> {
    let first = ds
        .first()
        .ok_or_else(|| Error::InvalidArgument("nothing to average".into()))?;
    let mut acc = vec![0.0; 1 << first.n()];
    for d in ds {
        for (a, p) in acc.iter_mut().zip(d.probabilities()) {
            *a += p / ds.len() as f64;
        }
    }
    Distribution::from_probs(first.n(), acc)
}

fn draw(d: Distribution, shots: u64, seed: u64, index: u64) -> Result<Distribution> {
    if shots == 0 {
        Ok(d)
    } else {
        sample_counts(&d, shots, &mut seeding::stream(seed, index))
    }
}

/// Bare run with `plan.shots` shots against `plan.randomizations`
/// randomizations measured `shots / N` times each and unioned.
pub fn run_bare_and_rc(circuit: &Circuit, sim: &Simulator, plan: ShotPlan, seed: u64) -> Result<RcRun> {
    plan.validate()?;
    run_with_shots(circuit, sim, plan.shots, plan.randomizations, plan.shots_per_randomization(), seed)
}

fn run_with_shots(
    circuit: &Circuit,
    sim: &Simulator,
    bare_shots: u64,
    randomizations: usize,
    shots_each: u64,
    seed: u64,
) -> Result<RcRun> {
    let ideal = ideal_distribution(circuit)?;
    let bare = draw(sim.distribution(circuit)?, bare_shots, seed, 0)?;
    let rcs = randomize_batch(circuit, randomizations, seeding::child_seed(seed, 1))?;
    let draws = rcs
        .iter()
        .enumerate()
        .map(|(i, r)| draw(sim.distribution(&r.compiled)?, shots_each, seed, 2 + i as u64))
        .collect::<Result<Vec<_>>>()?;
    let rc = if shots_each == 0 {
        mean_distribution(&draws)?
    } else {
        union_counts(&draws)?
    };
    Ok(RcRun {
        ideal,
        bare,
        randomizations: draws,
        rc,
    })
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len().max(1) as f64
}

/// Linear-interpolated sample quantile.
pub fn quantile(xs: &[f64], q: f64) -> f64 {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    if v.is_empty() {
        return f64::NAN;
    }
    let pos = q.clamp(0.0, 1.0) * (v.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    v[lo] + (v[hi] - v[lo]) * (pos - lo as f64)
}

/// Haar-random SU(2) as ZYZ Euler angles `(θ, φ, λ)`.
pub fn haar_su2_angles<R: Rng + ?Sized>(rng: &mut R) -> (f64, f64, f64) {
    let u: f64 = rng.random();
    let theta = (1.0 - 2.0 * u).acos();
    (theta, rng.random_range(0.0..2.0 * PI), rng.random_range(0.0..2.0 * PI))
}

fn csv_line(fields: &[String]) -> String {
    let mut s = fields.join(",");
    s.push('\n');
    s
}

// ---------------------------------------------------------------- QFT

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum QftInputs {
    /// Independent Haar-random single-qubit unitaries on `|0…0⟩`.
    Haar { count: usize },
    /// Every product of `|0⟩`, `|1⟩`, `|+⟩`.
    Basis,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QftSpec {
    pub n: usize,
    pub inputs: QftInputs,
    pub plan: ShotPlan,
    pub seed: u64,
}

impl QftSpec {
    pub fn paper(seed: u64) -> Self {
        QftSpec {
            n: 4,
            inputs: QftInputs::Haar { count: 100 },
            plan: ShotPlan::new(10_000, 50),
            seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QftRow {
    pub input: usize,
    pub label: String,
    pub bare_tvd: f64,
    pub rc_tvd: f64,
    pub ratio: f64,
    pub uniformity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QftSummary {
    pub mean_bare_tvd: f64,
    pub mean_rc_tvd: f64,
    pub mean_ratio: f64,
    pub median_ratio: f64,
    pub fraction_improved: f64,
    pub pearson_bare_uniformity: f64,
    pub pearson_rc_uniformity: f64,
    pub pearson_ratio_uniformity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QftReport {
    pub provenance: Provenance,
    pub spec: QftSpec,
    pub rows: Vec<QftRow>,
    pub summary: QftSummary,
}

fn basis_prep(label: char) -> CMat {
    match label {
        '1' => u3_matrix(PI, 0.0, PI),
        '+' => u3_matrix(PI / 2.0, 0.0, PI),
        _ => identity(2),
    }
}

fn qft_inputs(spec: &QftSpec) -> Vec<(String, Vec<CMat>)> {
    match spec.inputs {
        QftInputs::Basis => (0..3usize.pow(spec.n as u32))
            .map(|mut k| {
                let mut label = String::new();
                for _ in 0..spec.n {
                    label.insert(0, ['0', '1', '+'][k % 3]);
                    k /= 3;
                }
                let preps = label.chars().map(basis_prep).collect();
                (label, preps)
            })
            .collect(),
        QftInputs::Haar { count } => (0..count)
            .map(|i| {
                let mut rng = seeding::stream(spec.seed, 1_000_000 + i as u64);
                let angles: Vec<(f64, f64, f64)> = (0..spec.n).map(|_| haar_su2_angles(&mut rng)).collect();
                let label = angles
                    .iter()
                    .map(|(t, p, l)| format!("{t:.4}/{p:.4}/{l:.4}"))
                    .collect::<Vec<_>>()
                    .join(" ");
                (label, angles.iter().map(|&(t, p, l)| u3_matrix(t, p, l)).collect())
            })
            .collect(),
    }
}

pub fn run_qft_experiment(spec: &QftSpec, model: &NoiseModel) -> Result<QftReport> {
    spec.plan.validate()?;
    let sim = Simulator::new(model, spec.n)?;
    let qft = native_cx(&build_qft(spec.n)?)?;
    let inputs = qft_inputs(spec);
    let rows = inputs
        .par_iter()
        .enumerate()
        .map(|(i, (label, preps))| {
            let c = qft.with_input_unitaries(preps)?;
            let run = run_bare_and_rc(&c, &sim, spec.plan, seeding::child_seed(spec.seed, i as u64))?;
            let (b, r) = (run.bare_tvd(), run.rc_tvd());
            Ok(QftRow {
                input: i,
                label: label.clone(),
                bare_tvd: b,
                rc_tvd: r,
                ratio: b / r,
                uniformity: uniformity_distance(&run.ideal),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let col = |f: fn(&QftRow) -> f64| rows.iter().map(f).collect::<Vec<_>>();
    let (bare, rc, ratio, unif) = (col(|r| r.bare_tvd), col(|r| r.rc_tvd), col(|r| r.ratio), col(|r| r.uniformity));
    let corr = |ys: &[f64]| pearson_r(&unif, ys).unwrap_or(f64::NAN);
    let summary = QftSummary {
        mean_bare_tvd: mean(&bare),
        mean_rc_tvd: mean(&rc),
        mean_ratio: mean(&ratio),
        median_ratio: quantile(&ratio, 0.5),
        fraction_improved: rows.iter().filter(|r| r.rc_tvd < r.bare_tvd).count() as f64 / rows.len().max(1) as f64,
        pearson_bare_uniformity: corr(&bare),
        pearson_rc_uniformity: corr(&rc),
        pearson_ratio_uniformity: corr(&ratio),
    };
    Ok(QftReport {
        provenance: Provenance::new(spec.seed),
        spec: spec.clone(),
        rows,
        summary,
    })
}

impl QftReport {
    pub fn to_csv(&self) -> String {
        let mut s = csv_line(&["input", "label", "bare_tvd", "rc_tvd", "ratio", "uniformity"].map(String::from));
        for r in &self.rows {
            s += &csv_line(&[
                r.input.to_string(),
                format!("\"{}\"", r.label),
                r.bare_tvd.to_string(),
                r.rc_tvd.to_string(),
                r.ratio.to_string(),
                r.uniformity.to_string(),
            ]);
        }
        s
    }
}

// ---------------------------------------------------------------- depth sweep

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DepthSweepSpec {
    pub n: usize,
    pub depths: Vec<usize>,
    pub circuits: usize,
    pub mode: RandomMode,
    pub plan: ShotPlan,
    pub seed: u64,
}

impl DepthSweepSpec {
    pub fn paper(seed: u64) -> Self {
        DepthSweepSpec {
            n: 4,
            depths: (1..=8).map(|k| 2 * k).collect(),
            circuits: 100,
            mode: RandomMode::Multiqubit,
            plan: ShotPlan::new(4000, 20),
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.plan.validate()?;
        if self.depths.is_empty() || self.depths.contains(&0) {
            return Err(Error::InvalidArgument("depths must be positive".into()));
        }
        if self.circuits == 0 {
            return Err(Error::InvalidArgument("need at least one circuit per depth".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CircuitRow {
    pub depth: usize,
    pub circuit: usize,
    pub bare_tvd: f64,
    pub rc_tvd: f64,
    pub uniformity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DepthSummary {
    pub depth: usize,
    pub mean_bare_tvd: f64,
    pub mean_rc_tvd: f64,
    pub bare_quantiles: [f64; 3],
    pub rc_quantiles: [f64; 3],
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
}

impl LineFit {
    pub fn of(xs: &[f64], ys: &[f64]) -> Result<Self> {
        let (slope, intercept, r2) = linear_fit(xs, ys)?;
        Ok(LineFit { slope, intercept, r2 })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DepthSweepReport {
    pub provenance: Provenance,
    pub spec: DepthSweepSpec,
    pub rows: Vec<CircuitRow>,
    pub per_depth: Vec<DepthSummary>,
    pub bare_fit: LineFit,
    pub rc_fit: LineFit,
    /// Mean bare TVD over mean RC TVD, all depths pooled.
    pub overall_ratio: f64,
    pub mean_circuit_ratio: f64,
}

fn random_circuit(n: usize, k: usize, mode: RandomMode, seed: u64) -> Result<Circuit> {
    let c = sample_random_circuit(n, k, mode, &mut seeding::rng(seed))?;
    match mode {
        RandomMode::Multiqubit => native_cx(&c),
        RandomMode::Singlequbit => Ok(c),
    }
}

pub fn run_depth_sweep(spec: &DepthSweepSpec, model: &NoiseModel) -> Result<DepthSweepReport> {
    spec.validate()?;
    let sim = Simulator::new(model, spec.n)?;
    let jobs: Vec<(usize, usize)> = spec
        .depths
        .iter()
        .flat_map(|&k| (0..spec.circuits).map(move |i| (k, i)))
        .collect();
    let rows = jobs
        .par_iter()
        .enumerate()
        .map(|(j, &(k, i))| {
            let seed = seeding::child_seed(spec.seed, j as u64);
            let c = random_circuit(spec.n, k, spec.mode, seeding::child_seed(seed, 0))?;
            let run = run_bare_and_rc(&c, &sim, spec.plan, seeding::child_seed(seed, 1))?;
            Ok(CircuitRow {
                depth: k,
                circuit: i,
                bare_tvd: run.bare_tvd(),
                rc_tvd: run.rc_tvd(),
                uniformity: uniformity_distance(&run.ideal),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let per_depth: Vec<DepthSummary> = spec
        .depths
        .iter()
        .map(|&k| {
            let sel: Vec<&CircuitRow> = rows.iter().filter(|r| r.depth == k).collect();
            let b: Vec<f64> = sel.iter().map(|r| r.bare_tvd).collect();
            let r: Vec<f64> = sel.iter().map(|r| r.rc_tvd).collect();
            let qs = |v: &[f64]| [quantile(v, 0.1), quantile(v, 0.5), quantile(v, 0.9)];
            DepthSummary {
                depth: k,
                mean_bare_tvd: mean(&b),
                mean_rc_tvd: mean(&r),
                bare_quantiles: qs(&b),
                rc_quantiles: qs(&r),
                ratio: mean(&b) / mean(&r),
            }
        })
        .collect();
    let ks: Vec<f64> = per_depth.iter().map(|d| d.depth as f64).collect();
    let mb: Vec<f64> = per_depth.iter().map(|d| d.mean_bare_tvd).collect();
    let mr: Vec<f64> = per_depth.iter().map(|d| d.mean_rc_tvd).collect();
    let (bare_fit, rc_fit) = if ks.len() >= 2 {
        (LineFit::of(&ks, &mb)?, LineFit::of(&ks, &mr)?)
    } else {
        let flat = LineFit { slope: 0.0, intercept: mb[0], r2: f64::NAN };
        (flat.clone(), LineFit { intercept: mr[0], ..flat })
    };
    let all_b: Vec<f64> = rows.iter().map(|r| r.bare_tvd).collect();
    let all_r: Vec<f64> = rows.iter().map(|r| r.rc_tvd).collect();
    let ratios: Vec<f64> = rows.iter().map(|r| r.bare_tvd / r.rc_tvd).collect();
    Ok(DepthSweepReport {
        provenance: Provenance::new(spec.seed),
        spec: spec.clone(),
        overall_ratio: mean(&all_b) / mean(&all_r),
        mean_circuit_ratio: mean(&ratios),
        rows,
        per_depth,
        bare_fit,
        rc_fit,
    })
}

impl DepthSweepReport {
    pub fn to_csv(&self) -> String {
        let mut s = csv_line(&["depth", "circuit", "bare_tvd", "rc_tvd", "uniformity"].map(String::from));
        for r in &self.rows {
            s += &csv_line(&[
                r.depth.to_string(),
                r.circuit.to_string(),
                r.bare_tvd.to_string(),
                r.rc_tvd.to_string(),
                r.uniformity.to_string(),
            ]);
        }
        s
    }
}

// ---------------------------------------------------------------- randomization sweep

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandSweepSpec {
    pub n: usize,
    pub depth: usize,
    pub circuits: usize,
    pub max_randomizations: usize,
    /// Shots per randomization, per bare circuit, and kept per union.
    pub shots: u64,
    pub seed: u64,
}

impl RandSweepSpec {
    pub fn paper(seed: u64) -> Self {
        RandSweepSpec {
            n: 4,
            depth: 10,
            circuits: 100,
            max_randomizations: 20,
            shots: 4000,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.depth == 0 || self.circuits == 0 || self.max_randomizations == 0 || self.shots == 0 {
            return Err(Error::InvalidArgument(
                "depth, circuits, randomizations and shots must be positive".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandSweepPoint {
    pub randomizations: usize,
    pub mean_rc_tvd: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandSweepReport {
    pub provenance: Provenance,
    pub spec: RandSweepSpec,
    pub points: Vec<RandSweepPoint>,
    pub mean_bare_tvd: f64,
    pub bare_quantile_10: f64,
    /// `|mean(N=max/2) − mean(N=max)| / mean(N=max)`.
    pub half_to_full_gap: f64,
    /// Per circuit: bare TVD then RC TVD for `N = 1..=max`.
    pub per_circuit: Vec<Vec<f64>>,
}

pub fn run_randomization_sweep(spec: &RandSweepSpec, model: &NoiseModel) -> Result<RandSweepReport> {
    spec.validate()?;
    let sim = Simulator::new(model, spec.n)?;
    let nmax = spec.max_randomizations;
    let per_circuit = (0..spec.circuits)
        .into_par_iter()
        .map(|i| {
            let seed = seeding::child_seed(spec.seed, i as u64);
            let c = random_circuit(spec.n, spec.depth, RandomMode::Multiqubit, seeding::child_seed(seed, 0))?;
            let run = run_with_shots(&c, &sim, spec.shots, nmax, spec.shots, seeding::child_seed(seed, 1))?;
            let mut row = vec![run.bare_tvd()];
            let mut rng = seeding::stream(seed, 2);
            for n in 1..=nmax {
                let merged = union_counts(&run.randomizations[..n])?;
                let kept = if n == 1 { merged } else { subsample(&merged, spec.shots, &mut rng)? };
                row.push(tvd(&kept, &run.ideal)?);
            }
            Ok(row)
        })
        .collect::<Result<Vec<Vec<f64>>>>()?;
    let points: Vec<RandSweepPoint> = (1..=nmax)
        .map(|n| RandSweepPoint {
            randomizations: n,
            mean_rc_tvd: mean(&per_circuit.iter().map(|r| r[n]).collect::<Vec<_>>()),
        })
        .collect();
    let bare: Vec<f64> = per_circuit.iter().map(|r| r[0]).collect();
    let full = points[nmax - 1].mean_rc_tvd;
    let half = points[(nmax / 2).max(1) - 1].mean_rc_tvd;
    Ok(RandSweepReport {
        provenance: Provenance::new(spec.seed),
        spec: spec.clone(),
        mean_bare_tvd: mean(&bare),
        bare_quantile_10: quantile(&bare, 0.1),
        half_to_full_gap: (half - full).abs() / full,
        points,
        per_circuit,
    })
}

impl RandSweepReport {
    pub fn to_csv(&self) -> String {
        let mut s = csv_line(&["randomizations", "mean_rc_tvd", "mean_bare_tvd", "bare_q10"].map(String::from));
        for p in &self.points {
            s += &csv_line(&[
                p.randomizations.to_string(),
                p.mean_rc_tvd.to_string(),
                self.mean_bare_tvd.to_string(),
                self.bare_quantile_10.to_string(),
            ]);
        }
        s
    }
}

// ---------------------------------------------------------------- coherent fraction

/// Single-qubit channel with process infidelity `e_f`, a fraction
/// `coherent` of which comes from a rotation about a fixed axis and the rest
/// from depolarizing noise.
pub fn mixed_error_channel(e_f: f64, coherent: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    if !(0.0..0.75).contains(&e_f) || !(0.0..=1.0).contains(&coherent) {
        return Err(Error::InvalidArgument(format!("e_F={e_f}, coherent fraction={coherent}")));
    }
    let e_inc = (1.0 - coherent) * e_f;
    let q = vec![1.0 - e_inc, e_inc / 3.0, e_inc / 3.0, e_inc / 3.0];
    // process fidelity of rotation then depolarizing: (1 + λ(1 + 2cos 2θ))/4
    let lambda = 1.0 - 4.0 * e_inc / 3.0;
    let target = 1.0 - e_f;
    let cos2t = ((4.0 * target - 1.0) / lambda - 1.0) / 2.0;
    let theta = cos2t.clamp(-1.0, 1.0).acos() / 2.0;
    let axis = [1.0, 1.0, 1.0].map(|x: f64| x / 3f64.sqrt());
    Ok((q, axis.iter().map(|a| a * theta).collect()))
}

/// Coherent share of the infidelity implied by unitarity:
/// `1 − (1 − 1/d²)(1 − √u)/e_F`.
pub fn coherent_fraction_from_unitarity(ch: &Channel) -> f64 {
    let d2 = (1usize << (2 * ch.n_body())) as f64;
    let e_f = 1.0 - ch.ptm().process_fidelity();
    if e_f <= 0.0 {
        return 0.0;
    }
    let e_inc = (1.0 - 1.0 / d2) * (1.0 - unitarity(ch).clamp(0.0, 1.0).sqrt());
    (1.0 - e_inc / e_f).clamp(0.0, 1.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoherentFractionSpec {
    pub process_infidelity: f64,
    pub fractions: Vec<f64>,
    pub depth: usize,
    pub circuits: usize,
    pub plan: ShotPlan,
    pub seed: u64,
}

impl CoherentFractionSpec {
    pub fn default_with_seed(seed: u64) -> Self {
        CoherentFractionSpec {
            process_infidelity: 0.01,
            fractions: vec![0.0, 0.2, 0.4, 0.6, 0.8, 1.0],
            depth: 5,
            circuits: 100,
            plan: ShotPlan::exact(20),
            seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoherentFractionPoint {
    pub requested_fraction: f64,
    pub unitarity: f64,
    pub coherent_fraction: f64,
    pub mean_bare_tvd: f64,
    pub mean_rc_tvd: f64,
    pub mean_ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoherentFractionReport {
    pub provenance: Provenance,
    pub spec: CoherentFractionSpec,
    pub points: Vec<CoherentFractionPoint>,
    pub spearman: f64,
}

pub fn single_qubit_model(q: Vec<f64>, h: Vec<f64>) -> NoiseModel {
    NoiseModel {
        cycles: Vec::new(),
        default_bodies: vec![BodySpec { qubits: vec![0], q, h, fit: None }],
        readout: Vec::new(),
    }
}

pub fn run_coherent_fraction_study(spec: &CoherentFractionSpec) -> Result<CoherentFractionReport> {
    spec.plan.validate()?;
    let points = spec
        .fractions
        .iter()
        .map(|&frac| {
            let (q, h) = mixed_error_channel(spec.process_infidelity, frac)?;
            let ch = compose_sqh(&PauliProbabilities::new(q.clone())?, &h)?;
            let sim = Simulator::new(&single_qubit_model(q, h), 1)?;
            let runs = (0..spec.circuits)
                .into_par_iter()
                .map(|i| {
                    let seed = seeding::child_seed(spec.seed, i as u64);
                    let c = random_circuit(1, spec.depth, RandomMode::Singlequbit, seeding::child_seed(seed, 0))?;
                    let run = run_bare_and_rc(&c, &sim, spec.plan, seeding::child_seed(seed, 1))?;
                    Ok((run.bare_tvd(), run.rc_tvd()))
                })
                .collect::<Result<Vec<_>>>()?;
            let b: Vec<f64> = runs.iter().map(|r| r.0).collect();
            let r: Vec<f64> = runs.iter().map(|r| r.1).collect();
            Ok(CoherentFractionPoint {
                requested_fraction: frac,
                unitarity: unitarity(&ch),
                coherent_fraction: coherent_fraction_from_unitarity(&ch),
                mean_bare_tvd: mean(&b),
                mean_rc_tvd: mean(&r),
                mean_ratio: mean(&b) / mean(&r),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let xs: Vec<f64> = points.iter().map(|p| p.coherent_fraction).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.mean_ratio).collect();
    Ok(CoherentFractionReport {
        provenance: Provenance::new(spec.seed),
        spec: spec.clone(),
        spearman: spearman(&xs, &ys).unwrap_or(f64::NAN),
        points,
    })
}

impl CoherentFractionReport {
    pub fn to_csv(&self) -> String {
        let mut s = csv_line(
            &["requested_fraction", "unitarity", "coherent_fraction", "mean_bare_tvd", "mean_rc_tvd", "mean_ratio"]
                .map(String::from),
        );
        for p in &self.points {
            s += &csv_line(&[
                p.requested_fraction.to_string(),
                p.unitarity.to_string(),
                p.coherent_fraction.to_string(),
                p.mean_bare_tvd.to_string(),
                p.mean_rc_tvd.to_string(),
                p.mean_ratio.to_string(),
            ]);
        }
        s
    }
}

// ---------------------------------------------------------------- tomography

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TomographySpec {
    pub depths: Vec<usize>,
    /// Shots per basis for the bare circuit; split evenly over randomizations.
    pub plan: ShotPlan,
    pub seed: u64,
}

impl TomographySpec {
    pub fn paper(seed: u64) -> Self {
        TomographySpec {
            depths: vec![5, 25, 50, 75, 100],
            plan: ShotPlan::new(6000, 12),
            seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TomographyRow {
    pub depth: usize,
    pub ideal: [f64; 3],
    pub bare: BlochState,
    pub rc: BlochState,
    pub randomizations: Vec<BlochState>,
    pub bare_fidelity: f64,
    pub rc_fidelity: f64,
    /// TVD from ideal in the X, Y and Z bases.
    pub bare_tvd: [f64; 3],
    pub rc_tvd: [f64; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TomographyReport {
    pub provenance: Provenance,
    pub spec: TomographySpec,
    pub rows: Vec<TomographyRow>,
}

/// Folds per-qubit rotations into the final easy cycle.
pub fn with_output_rotation(c: &Circuit, rotations: &[CMat]) -> Result<Circuit> {
    let mut out = c.clone();
    let last = out.cycles.len() - 1;
    out.cycles[last] = recompile_cycle_pair(&c.cycles[last], &vec![identity(2); c.n], rotations)?;
    Ok(out)
}

/// First `k` hard cycles with their surrounding easy cycles.
pub fn prefix(c: &Circuit, k: usize) -> Result<Circuit> {
    Circuit::new(c.n, c.cycles[..(2 * k + 1).min(c.cycles.len())].to_vec())
}

fn ideal_bloch(c: &Circuit) -> Result<[f64; 3]> {
    let u = circuit_unitary(c)?;
    let (a, b) = (u[(0, 0)], u[(1, 0)]);
    let xy = a.conj() * b;
    Ok([2.0 * xy.re, 2.0 * xy.im, a.norm_sqr() - b.norm_sqr()])
}

pub fn run_tomography_demo(spec: &TomographySpec, model: &NoiseModel) -> Result<TomographyReport> {
    spec.plan.validate()?;
    let kmax = *spec
        .depths
        .iter()
        .max()
        .ok_or_else(|| Error::InvalidArgument("no depths".into()))?;
    if spec.depths.contains(&0) {
        return Err(Error::InvalidArgument("depths must be positive".into()));
    }
    let sim = Simulator::new(model, 1)?;
    let full = random_circuit(1, kmax, RandomMode::Singlequbit, seeding::child_seed(spec.seed, 0))?;
    let each = spec.plan.shots_per_randomization();
    let rows = spec
        .depths
        .par_iter()
        .enumerate()
        .map(|(i, &k)| {
            let seed = seeding::child_seed(spec.seed, 1 + i as u64);
            let c = prefix(&full, k)?;
            let rcs = randomize_batch(&c, spec.plan.randomizations, seeding::child_seed(seed, 0))?;
            let mut bare_d = Vec::new();
            let mut rc_d = Vec::new();
            let mut per_rand: Vec<Vec<Distribution>> = vec![Vec::new(); rcs.len()];
            let mut bare_tvd = [0.0; 3];
            let mut rc_tvd = [0.0; 3];
            for axis in 0..3 {
                let rot = [tomography_rotation(axis)];
                let stream = 1 + axis as u64 * (rcs.len() as u64 + 1);
                let bare_c = with_output_rotation(&c, &rot)?;
                let ideal = ideal_distribution(&bare_c)?;
                let b = draw(sim.distribution(&bare_c)?, spec.plan.shots, seed, stream)?;
                let draws = rcs
                    .iter()
                    .enumerate()
                    .map(|(j, r)| {
                        let rc_c = with_output_rotation(&r.compiled, &rot)?;
                        draw(sim.distribution(&rc_c)?, each, seed, stream + 1 + j as u64)
                    })
                    .collect::<Result<Vec<_>>>()?;
                let merged = if each == 0 { mean_distribution(&draws)? } else { union_counts(&draws)? };
                bare_tvd[axis] = tvd(&b, &ideal)?;
                rc_tvd[axis] = tvd(&merged, &ideal)?;
                bare_d.push(b);
                rc_d.push(merged);
                for (j, d) in draws.into_iter().enumerate() {
                    per_rand[j].push(d);
                }
            }
            let ideal = ideal_bloch(&c)?;
            let bare = bloch_from_tomography(&bare_d[0], &bare_d[1], &bare_d[2])?;
            let rc = bloch_from_tomography(&rc_d[0], &rc_d[1], &rc_d[2])?;
            let randomizations = per_rand
                .iter()
                .map(|d| bloch_from_tomography(&d[0], &d[1], &d[2]))
                .collect::<Result<Vec<_>>>()?;
            Ok(TomographyRow {
                depth: k,
                ideal,
                bare_fidelity: bare.fidelity(ideal),
                rc_fidelity: rc.fidelity(ideal),
                bare,
                rc,
                randomizations,
                bare_tvd,
                rc_tvd,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(TomographyReport {
        provenance: Provenance::new(spec.seed),
        spec: spec.clone(),
        rows,
    })
}

impl TomographyReport {
    pub fn to_csv(&self) -> String {
        let mut s = csv_line(
            &[
                "depth", "bare_purity", "bare_fidelity", "rc_purity", "rc_fidelity", "bare_tvd_x", "bare_tvd_y",
                "bare_tvd_z", "rc_tvd_x", "rc_tvd_y", "rc_tvd_z",
            ]
            .map(String::from),
        );
        for r in &self.rows {
            let mut f = vec![
                r.depth.to_string(),
                r.bare.purity.to_string(),
                r.bare_fidelity.to_string(),
                r.rc.purity.to_string(),
                r.rc_fidelity.to_string(),
            ];
            f.extend(r.bare_tvd.iter().chain(&r.rc_tvd).map(|x| x.to_string()));
            s += &csv_line(&f);
        }
        s
    }
}

/// A coherent-dominated single-qubit model: rotation about a fixed axis
/// plus weak depolarizing noise, process infidelity `e_f`.
pub fn coherent_single_qubit_model(e_f: f64) -> Result<NoiseModel> {
    let (q, h) = mixed_error_channel(e_f, 0.9)?;
    Ok(single_qubit_model(q, h))
}

/// `exp(-i θ Z/2)` noise after every hard cycle.
pub fn z_rotation_model(n: usize, theta: f64) -> Result<NoiseModel> {
    let h = vec![0.0, 0.0, theta / 2.0];
    coherent_unitary(&h, 1)?;
    Ok(NoiseModel {
        cycles: Vec::new(),
        default_bodies: (0..n)
            .map(|q| BodySpec {
                qubits: vec![q],
                q: vec![1.0, 0.0, 0.0, 0.0],
                h: h.clone(),
                fit: None,
            })
            .collect(),
        readout: Vec::new(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::process_fidelity;

    #[test]
    fn mixed_channel_infidelity() {
        for frac in [0.0, 0.3, 1.0] {
            let (q, h) = mixed_error_channel(0.02, frac).unwrap();
            let ch = compose_sqh(&PauliProbabilities::new(q).unwrap(), &h).unwrap();
            assert!((1.0 - process_fidelity(&ch) - 0.02).abs() < 1e-12);
            let x = coherent_fraction_from_unitarity(&ch);
            if frac == 0.0 {
                assert!(x.abs() < 1e-9);
            }
            if frac == 1.0 {
                assert!((x - 1.0).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn noiseless_qft_is_exact() {
        let spec = QftSpec {
            n: 3,
            inputs: QftInputs::Haar { count: 3 },
            plan: ShotPlan::exact(4),
            seed: 2,
        };
        let rep = run_qft_experiment(&spec, &NoiseModel::noiseless(3)).unwrap();
        for r in &rep.rows {
            assert!(r.bare_tvd < 1e-10 && r.rc_tvd < 1e-10);
        }
    }

    #[test]
    fn shot_plan_divisibility() {
        assert!(ShotPlan::new(10_000, 50).validate().is_ok());
        assert!(ShotPlan::new(1000, 3).validate().is_err());
        assert_eq!(ShotPlan::new(6000, 12).shots_per_randomization(), 500);
    }

    #[test]
    fn quantiles() {
        let v = [3.0, 1.0, 2.0, 4.0];
        assert_eq!(quantile(&v, 0.0), 1.0);
        assert_eq!(quantile(&v, 1.0), 4.0);
        assert!((quantile(&v, 0.5) - 2.5).abs() < 1e-12);
    }

    #[test]
    fn ideal_bloch_of_hadamard() {
        use crate::circuit::{Cycle, CycleKind};
        use crate::gates::{Gate, GateKind};
        let c = Circuit::new(1, vec![Cycle::new(CycleKind::Easy, 1, vec![Gate::single(GateKind::H, 0)]).unwrap()])
            .unwrap();
        let r = ideal_bloch(&c).unwrap();
        assert!((r[0] - 1.0).abs() < 1e-12 && r[1].abs() < 1e-12 && r[2].abs() < 1e-12);
    }
}
