use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use rckit::benchmark::{reconstruct_error_rates, run_cb, with_infidelity_ci, CbConfig, CbMode, CbResult, CerResult};
use rckit::circuit::{hard_cycle_from_signature, Circuit, RandomMode};
use rckit::device::ReferenceModel;
use rckit::distribution::sample_counts;
use rckit::experiments::{
    run_coherent_fraction_study, run_depth_sweep, run_qft_experiment, run_randomization_sweep,
    run_tomography_demo, coherent_single_qubit_model, CoherentFractionSpec, DepthSweepSpec, QftInputs, QftSpec,
    RandSweepSpec, ShotPlan, TomographySpec,
};
use rckit::model_fit::{audit_model, build_noise_model, ModelKind, ModelScales};
use rckit::noise::{NoiseModel, Readout};
use rckit::rc::{randomize_batch, verify_equivalence};
use rckit::seeding;
use rckit::sim::Simulator;

#[derive(Parser)]
#[command(name = "rckit", version, about = "Randomized compiling, cycle benchmarking and noisy-circuit studies")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Master seed; every random choice derives from it.
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Output path (JSON). Printed to stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Write N logically equivalent randomizations of a circuit.
    Rc {
        #[arg(long)]
        circuit: PathBuf,
        #[arg(long, default_value_t = 20)]
        n_randomizations: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
    },
    /// Simulate a circuit under a noise model.
    Simulate {
        #[arg(long)]
        circuit: PathBuf,
        /// Noise model JSON, or one of: complete, scaled, pauli, noiseless.
        #[arg(long, default_value = "noiseless")]
        noise: String,
        /// Sampled shots; 0 gives the exact distribution.
        #[arg(long, default_value_t = 0)]
        shots: u64,
        #[command(flatten)]
        common: Common,
    },
    /// Cycle benchmarking of one hard cycle.
    Cb {
        /// Cycle signature, e.g. `CX(1,0)`; unnamed qubits idle.
        #[arg(long)]
        cycle: String,
        #[arg(long, default_value_t = 4)]
        qubits: usize,
        #[arg(long, value_delimiter = ',', default_value = "2,4,8,16")]
        lengths: Vec<usize>,
        #[arg(long, default_value_t = 10)]
        n_randomizations: usize,
        #[arg(long, default_value_t = 400)]
        shots: u64,
        #[arg(long, default_value = "complete")]
        noise: String,
        #[arg(long, value_enum, default_value_t = ModeArg::Sampled)]
        mode: ModeArg,
        /// Bootstrap resamples for the infidelity interval.
        #[arg(long, default_value_t = 200)]
        resamples: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Cycle error reconstruction from a CB result.
    Cer {
        #[arg(long)]
        cb: PathBuf,
        #[arg(long, default_value_t = 200)]
        resamples: usize,
        /// Also write the full reconstruction (input to fit-model).
        #[arg(long)]
        full: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Fit a noise model to reconstructed error rates.
    FitModel {
        /// JSON list of full reconstructions (one per cycle).
        #[arg(long)]
        cer: PathBuf,
        #[arg(long, default_value_t = 1.0)]
        s0_1q: f64,
        #[arg(long, default_value_t = 1.0)]
        s0_2q: f64,
        #[arg(long, default_value_t = 0.7)]
        s1_1q: f64,
        #[arg(long, default_value_t = 0.9)]
        s1_2q: f64,
        /// JSON list of `{p00, p11}`; perfect readout when omitted.
        #[arg(long)]
        readout: Option<PathBuf>,
        /// Use the reconstructed Pauli rates directly.
        #[arg(long)]
        pauli: bool,
        #[command(flatten)]
        common: Common,
    },
    /// QFT on random or basis product inputs, bare vs RC.
    Qft {
        #[arg(long, default_value_t = 4)]
        qubits: usize,
        #[arg(long, default_value_t = 100)]
        inputs: usize,
        /// Use every product of |0>, |1>, |+> instead of random inputs.
        #[arg(long)]
        basis_inputs: bool,
        #[arg(long, default_value_t = 10_000)]
        shots: u64,
        #[arg(long, default_value_t = 50)]
        n_randomizations: usize,
        #[arg(long, default_value = "complete")]
        noise: String,
        #[command(flatten)]
        common: Common,
    },
    /// Random circuits over a depth grid, bare vs RC.
    DepthSweep {
        #[arg(long, value_delimiter = ',', default_value = "2,4,6,8,10,12,14,16")]
        depths: Vec<usize>,
        #[arg(long, default_value_t = 100)]
        circuits: usize,
        #[arg(long, default_value_t = 4000)]
        shots: u64,
        #[arg(long, default_value_t = 20)]
        n_randomizations: usize,
        #[arg(long, default_value = "complete")]
        noise: String,
        #[command(flatten)]
        common: Common,
    },
    /// RC TVD as a function of the number of randomizations.
    RandSweep {
        #[arg(long, default_value_t = 10)]
        depth: usize,
        #[arg(long, default_value_t = 100)]
        circuits: usize,
        #[arg(long, default_value_t = 4000)]
        shots: u64,
        #[arg(long, default_value_t = 20)]
        n_randomizations: usize,
        #[arg(long, default_value = "complete")]
        noise: String,
        #[command(flatten)]
        common: Common,
    },
    /// RC benefit against the coherent share of a fixed single-qubit error.
    CoherentFraction {
        #[arg(long, default_value_t = 0.01)]
        process_infidelity: f64,
        #[arg(long, value_delimiter = ',', default_value = "0,0.2,0.4,0.6,0.8,1")]
        fractions: Vec<f64>,
        #[arg(long, default_value_t = 5)]
        depth: usize,
        #[arg(long, default_value_t = 100)]
        circuits: usize,
        /// 0 compares exact distributions.
        #[arg(long, default_value_t = 0)]
        shots: u64,
        #[arg(long, default_value_t = 20)]
        n_randomizations: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Single-qubit tomography of a random circuit, bare vs RC.
    Tomography {
        #[arg(long, value_delimiter = ',', default_value = "5,25,50,75,100")]
        depths: Vec<usize>,
        /// Shots per basis for the bare circuit.
        #[arg(long, default_value_t = 6000)]
        shots: u64,
        #[arg(long, default_value_t = 12)]
        n_randomizations: usize,
        /// Noise model JSON; a coherent-dominated model when omitted.
        #[arg(long)]
        noise: Option<String>,
        #[arg(long, default_value_t = 0.02)]
        process_infidelity: f64,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Sampled,
    Exact,
    ExactTwirl,
}

impl From<ModeArg> for CbMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Sampled => CbMode::Sampled,
            ModeArg::Exact => CbMode::Exact,
            ModeArg::ExactTwirl => CbMode::ExactTwirl,
        }
    }
}

fn load_noise(arg: &str, n: usize) -> Result<NoiseModel> {
    let model = match arg {
        "complete" => ReferenceModel::Complete.load()?,
        "scaled" => ReferenceModel::Scaled.load()?,
        "pauli" => ReferenceModel::Pauli.load()?,
        "noiseless" => NoiseModel::noiseless(n),
        path => NoiseModel::load(path).with_context(|| format!("loading noise model {path}"))?,
    };
    Ok(model)
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(serde_json::from_str(&text).map_err(rckit::Error::from)?)
}

fn emit<T: serde::Serialize>(value: &T, out: Option<&Path>) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    match out {
        Some(p) => std::fs::write(p, text + "\n").with_context(|| format!("writing {}", p.display()))?,
        None => println!("{text}"),
    }
    Ok(())
}

fn emit_report<T: serde::Serialize>(value: &T, csv: String, out: Option<&Path>) -> Result<()> {
    emit(value, out)?;
    if let Some(p) = out {
        let csv_path = p.with_extension("csv");
        std::fs::write(&csv_path, csv).with_context(|| format!("writing {}", csv_path.display()))?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Rc {
            circuit,
            n_randomizations,
            seed,
            out,
        } => {
            let c = Circuit::from_json(&std::fs::read_to_string(&circuit)?)?;
            let batch = randomize_batch(&c, n_randomizations, seed)?;
            std::fs::create_dir_all(&out)?;
            let mut entries = Vec::new();
            for (i, r) in batch.iter().enumerate() {
                let eq = verify_equivalence(&c, &r.compiled)?;
                if !eq.equivalent {
                    bail!("randomization {i} is not equivalent (deviation {:e})", eq.deviation);
                }
                let file = format!("randomization_{i:03}.json");
                std::fs::write(out.join(&file), r.compiled.to_json()?)?;
                entries.push(json!({
                    "index": i,
                    "file": file,
                    "twirls": r.twirls.iter().map(|t| t.to_string()).collect::<Vec<_>>(),
                    "deviation": eq.deviation,
                }));
            }
            emit(
                &json!({ "seed": seed, "source": circuit, "randomizations": entries }),
                Some(&out.join("manifest.json")),
            )
        }
        Command::Simulate {
            circuit,
            noise,
            shots,
            common,
        } => {
            let c = Circuit::from_json(&std::fs::read_to_string(&circuit)?)?;
            let model = load_noise(&noise, c.n)?;
            let exact = Simulator::new(&model, c.n)?.distribution(&c)?;
            let d = if shots == 0 {
                exact
            } else {
                sample_counts(&exact, shots, &mut seeding::rng(common.seed))?
            };
            emit(&d, common.out.as_deref())
        }
        Command::Cb {
            cycle,
            qubits,
            lengths,
            n_randomizations,
            shots,
            noise,
            mode,
            resamples,
            common,
        } => {
            let cycle = hard_cycle_from_signature(&cycle, qubits)?;
            let model = load_noise(&noise, qubits)?;
            let sim = Simulator::new(&model, qubits)?;
            let mut cfg = CbConfig::new(cycle, lengths);
            cfg.randomizations = n_randomizations;
            cfg.shots = shots;
            let mut res = run_cb(&cfg, &sim, mode.into(), common.seed)?;
            if matches!(mode, ModeArg::Sampled) && resamples > 0 {
                res = with_infidelity_ci(res, resamples, seeding::child_seed(common.seed, 1))?;
            }
            emit(&res, common.out.as_deref())
        }
        Command::Cer {
            cb,
            resamples,
            full,
            common,
        } => {
            let cb: CbResult = read_json(&cb)?;
            let cer = reconstruct_error_rates(&cb, resamples, common.seed)?;
            if let Some(p) = full {
                emit(&vec![cer.clone()], Some(&p))?;
            }
            emit(&cer.marginals, common.out.as_deref())
        }
        Command::FitModel {
            cer,
            s0_1q,
            s0_2q,
            s1_1q,
            s1_2q,
            readout,
            pauli,
            common,
        } => {
            let cers: Vec<CerResult> = read_json(&cer)?;
            let readout: Vec<Readout> = match readout {
                Some(p) => read_json(&p)?,
                None => Vec::new(),
            };
            let scales = ModelScales { s0_1q, s0_2q, s1_1q, s1_2q };
            let kind = if pauli { ModelKind::Pauli } else { ModelKind::Complete };
            let model = build_noise_model(&cers, kind, scales, readout, common.seed)?;
            let problems = audit_model(&model, 1e-6)?;
            if !problems.is_empty() {
                bail!("fitted model failed its audit: {}", problems.join("; "));
            }
            emit(&model, common.out.as_deref())
        }
        Command::Qft {
            qubits,
            inputs,
            basis_inputs,
            shots,
            n_randomizations,
            noise,
            common,
        } => {
            let spec = QftSpec {
                n: qubits,
                inputs: if basis_inputs { QftInputs::Basis } else { QftInputs::Haar { count: inputs } },
                plan: ShotPlan::new(shots, n_randomizations),
                seed: common.seed,
            };
            let rep = run_qft_experiment(&spec, &load_noise(&noise, qubits)?)?;
            emit_report(&rep, rep.to_csv(), common.out.as_deref())
        }
        Command::DepthSweep {
            depths,
            circuits,
            shots,
            n_randomizations,
            noise,
            common,
        } => {
            let spec = DepthSweepSpec {
                n: 4,
                depths,
                circuits,
                mode: RandomMode::Multiqubit,
                plan: ShotPlan::new(shots, n_randomizations),
                seed: common.seed,
            };
            let rep = run_depth_sweep(&spec, &load_noise(&noise, 4)?)?;
            emit_report(&rep, rep.to_csv(), common.out.as_deref())
        }
        Command::RandSweep {
            depth,
            circuits,
            shots,
            n_randomizations,
            noise,
            common,
        } => {
            let spec = RandSweepSpec {
                n: 4,
                depth,
                circuits,
                max_randomizations: n_randomizations,
                shots,
                seed: common.seed,
            };
            let rep = run_randomization_sweep(&spec, &load_noise(&noise, 4)?)?;
            emit_report(&rep, rep.to_csv(), common.out.as_deref())
        }
        Command::CoherentFraction {
            process_infidelity,
            fractions,
            depth,
            circuits,
            shots,
            n_randomizations,
            common,
        } => {
            let spec = CoherentFractionSpec {
                process_infidelity,
                fractions,
                depth,
                circuits,
                plan: ShotPlan::new(shots, n_randomizations),
                seed: common.seed,
            };
            let rep = run_coherent_fraction_study(&spec)?;
            emit_report(&rep, rep.to_csv(), common.out.as_deref())
        }
        Command::Tomography {
            depths,
            shots,
            n_randomizations,
            noise,
            process_infidelity,
            common,
        } => {
            let model = match noise {
                Some(arg) => load_noise(&arg, 1)?,
                None => coherent_single_qubit_model(process_infidelity)?,
            };
            let spec = TomographySpec {
                depths,
                plan: ShotPlan::new(shots, n_randomizations),
                seed: common.seed,
            };
            let rep = run_tomography_demo(&spec, &model)?;
            emit_report(&rep, rep.to_csv(), common.out.as_deref())
        }
    }
}

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<rckit::Error>() {
        Some(rckit::Error::FitFailed { .. }) => 3,
        Some(rckit::Error::Io(_)) | None => 1,
        Some(_) => 2,
    }
}

fn main() -> ExitCode {
    if let Some(threads) = std::env::var("RCKIT_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        // a pool that is already built keeps its size
        let _ = rayon::ThreadPoolBuilder::new().num_threads(threads.max(1)).build_global();
    }
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
