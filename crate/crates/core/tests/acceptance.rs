use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use rckit::benchmark::{reconstruct_error_rates, run_cb, CbConfig, CbMode};
use rckit::channel::{make_pauli_channel, random_cptp, Channel};
use rckit::circuit::{hard_cycle_from_signature, sample_random_circuit, Circuit, Cycle, CycleKind, RandomMode};
use rckit::device::ReferenceModel;
use rckit::experiments::{
    run_bare_and_rc, run_depth_sweep, run_qft_experiment, run_randomization_sweep, z_rotation_model, DepthSweepSpec,
    QftSpec, RandSweepSpec, ShotPlan,
};
use rckit::gates::{c1_gate, Gate, GateKind};
use rckit::linalg::CMat;
use rckit::metrics::{avg_gate_infidelity, worst_case_tvd};
use rckit::noise::NoiseModel;
use rckit::pauli::{PauliProbabilities, PauliString};
use rckit::ptm::Ptm;
use rckit::rc::{randomize_batch, randomize_with_twirls, verify_equivalence};
use rckit::sim::Simulator;

const SEED: u64 = 2021;

type Outcome = Result<(bool, String), Box<dyn std::error::Error>>;

fn max_diff(a: &CMat, b: &CMat) -> f64 {
    (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn slope(xs: &[f64], ys: &[f64]) -> f64 {
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let n = lx.len() as f64;
    let (mx, my) = (lx.iter().sum::<f64>() / n, ly.iter().sum::<f64>() / n);
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

fn r_squared(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    sxy * sxy / (sxx * syy)
}

fn random_easy(n: usize, rng: &mut ChaCha8Rng) -> Cycle {
    let gates = (0..n).map(|q| c1_gate(rng.random_range(0..24), q)).collect();
    Cycle::new(CycleKind::Easy, n, gates).unwrap()
}

fn logical_equivalence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut worst = 0.0f64;
    let mut failures = 0;
    for i in 0..200u64 {
        let n = rng.random_range(1..=4usize);
        let k = rng.random_range(1..=10usize);
        let mode = if n >= 2 && rng.random_bool(0.5) {
            RandomMode::Multiqubit
        } else {
            RandomMode::Singlequbit
        };
        let c = sample_random_circuit(n, k, mode, &mut rng)?;
        for r in randomize_batch(&c, 5, SEED + i)? {
            let eq = verify_equivalence(&c, &r.compiled)?;
            worst = worst.max(eq.deviation);
            if !(eq.deviation < 1e-9) {
                failures += 1;
            }
        }
    }
    Ok((failures == 0, format!("1000 randomizations, max deviation {worst:.1e}, {failures} above 1e-9")))
}

fn exact_twirl() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let cases: [(usize, &str); 5] = [(1, "I(0)"), (2, "I(0);I(1)"), (2, "CX(0,1)"), (2, "CX(1,0)"), (2, "CZ(0,1)")];
    let mut worst = 0.0f64;
    for (n, sig) in cases {
        let hard = hard_cycle_from_signature(sig, n)?;
        let c = Circuit::new(n, vec![random_easy(n, &mut rng), hard.clone(), random_easy(n, &mut rng)])?;
        let qubits: Vec<usize> = (0..n).collect();
        let noise = random_cptp(n, 3, &mut rng);
        let raw = Simulator::noiseless(n)?.with_cycle_channels(&hard.signature(), vec![(qubits.clone(), noise.clone())])?;
        let diag = Channel::from_ptm(&Ptm::diagonal(&noise.ptm().diagonal_entries())?)?;
        let pauli = Simulator::noiseless(n)?.with_cycle_channels(&hard.signature(), vec![(qubits, diag)])?;
        let twirls: Vec<PauliString> = PauliString::all(n).collect();
        let mut avg = CMat::zeros(1 << n, 1 << n);
        for t in &twirls {
            let r = randomize_with_twirls(&c, std::slice::from_ref(t))?;
            avg += raw.run(&r.compiled)?;
        }
        avg /= rckit::linalg::C64::new(twirls.len() as f64, 0.0);
        worst = worst.max(max_diff(&avg, &pauli.run(&c)?));
    }
    Ok((worst < 1e-10, format!("5 cycles, max density-matrix deviation {worst:.1e}")))
}

fn random_pauli_probs(n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let len = 1usize << (2 * n);
    let err = rng.random_range(0.02..0.08);
    let w: Vec<f64> = (1..len).map(|_| -rng.random::<f64>().ln()).collect();
    let total: f64 = w.iter().sum();
    std::iter::once(1.0 - err).chain(w.iter().map(|x| err * x / total)).collect()
}

fn cer_roundtrip() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let (mut exact_worst, mut sampled_worst) = (0.0f64, 0.0f64);
    for n in 1..=3usize {
        let c = random_pauli_probs(n, &mut rng);
        let ch = make_pauli_channel(&PauliProbabilities::new(c.clone())?)?;
        let cycle = Cycle::identity(CycleKind::Hard, n);
        let sim = Simulator::noiseless(n)?.with_cycle_channels(&cycle.signature(), vec![((0..n).collect(), ch)])?;
        let mut cfg = CbConfig::new(cycle, vec![2, 4, 8, 16]);
        cfg.randomizations = 5;
        cfg.shots = 10_000;
        for (mode, worst) in [(CbMode::Exact, &mut exact_worst), (CbMode::Sampled, &mut sampled_worst)] {
            let cb = run_cb(&cfg, &sim, mode, SEED + n as u64)?;
            let cer = reconstruct_error_rates(&cb, 0, SEED)?;
            let l1: f64 = cer.c.iter().zip(&c).map(|(a, b)| (a - b).abs()).sum();
            *worst = worst.max(l1);
        }
    }
    Ok((
        exact_worst < 1e-6 && sampled_worst < 0.01,
        format!("n=1..3, shot-free |dc|_1 {exact_worst:.1e} (< 1e-6), 10^4 shots {sampled_worst:.1e} (< 0.01)"),
    ))
}

fn coherent_scaling() -> Outcome {
    let thetas: Vec<f64> = (0..9).map(|i| 10f64.powf(-3.0 + 0.25 * i as f64)).collect();
    let (mut r, mut w, mut wt) = (Vec::new(), Vec::new(), Vec::new());
    for &t in &thetas {
        let ch = Channel::unitary(rckit::gates::rz(t))?;
        r.push(avg_gate_infidelity(&ch));
        w.push(worst_case_tvd(&ch, 20, SEED)?.tvd);
        wt.push(worst_case_tvd(&ch.pauli_twirl()?, 20, SEED)?.tvd);
    }
    let (er, ew, ewt) = (slope(&thetas, &r), slope(&thetas, &w), slope(&thetas, &wt));
    Ok((
        (er - 2.0).abs() <= 0.05 && (ew - 1.0).abs() <= 0.1 && (ewt - 2.0).abs() <= 0.1,
        format!("exponents: infidelity {er:.3}, worst-case TVD {ew:.3}, twirled worst-case TVD {ewt:.3}"),
    ))
}

fn cb_infidelity() -> Outcome {
    let model = ReferenceModel::Complete.load()?;
    let sim = Simulator::new(&model, 4)?;
    let mut ok = true;
    let mut parts = Vec::new();
    for (sig, lo, hi) in [("I(0)", 1.5e-2, 3.0e-2), ("CX(1,0)", 5e-2, 9e-2)] {
        let cycle = hard_cycle_from_signature(sig, 4)?;
        let cfg = CbConfig::new(cycle, vec![2, 4, 8, 16]);
        let sampled = run_cb(&cfg, &sim, CbMode::Sampled, SEED)?;
        let exact = run_cb(&cfg, &sim, CbMode::ExactTwirl, SEED)?;
        let analytic = exact.analytic_process_infidelity.unwrap_or(f64::NAN);
        let rel = (exact.process_infidelity - analytic).abs() / analytic;
        ok &= (lo..=hi).contains(&sampled.process_infidelity) && rel <= 0.1;
        parts.push(format!(
            "{sig}: sampled e_F {:.4} in [{lo}, {hi}], shot-free {:.4} vs analytic {analytic:.4} ({:.1}%)",
            sampled.process_infidelity,
            exact.process_infidelity,
            100.0 * rel
        ));
    }
    Ok((ok, parts.join("; ")))
}

fn qft(model: ReferenceModel) -> Result<(f64, f64), Box<dyn std::error::Error>> {
    let rep = run_qft_experiment(&QftSpec::paper(SEED), &model.load()?)?;
    Ok((rep.summary.mean_ratio, rep.summary.fraction_improved))
}

fn qft_improvement(unscaled: &mut f64) -> Outcome {
    let (ratio, frac) = qft(ReferenceModel::Complete)?;
    *unscaled = ratio;
    Ok((
        frac > 0.75 && (1.5..=2.8).contains(&ratio),
        format!("fraction improved {frac:.2} (> 0.75), mean ratio {ratio:.3} (in [1.5, 2.8])"),
    ))
}

fn scaled_prediction(unscaled: f64) -> Outcome {
    let (ratio, _) = qft(ReferenceModel::Scaled)?;
    Ok((
        ratio > unscaled && ratio >= 2.5,
        format!("scaled mean ratio {ratio:.3} vs unscaled {unscaled:.3} (>= 2.5)"),
    ))
}

fn depth_sweep() -> Outcome {
    let rep = run_depth_sweep(&DepthSweepSpec::paper(SEED), &ReferenceModel::Complete.load()?)?;
    let ks: Vec<f64> = rep.per_depth.iter().map(|d| d.depth as f64).collect();
    let bare: Vec<f64> = rep.per_depth.iter().map(|d| d.mean_bare_tvd).collect();
    let rc: Vec<f64> = rep.per_depth.iter().map(|d| d.mean_rc_tvd).collect();
    let (r2b, r2r) = (r_squared(&ks, &bare), r_squared(&ks, &rc));
    let ordered = bare.iter().zip(&rc).all(|(b, r)| r <= b);
    let ratio = bare.iter().sum::<f64>() / rc.iter().sum::<f64>();
    Ok((
        r2b > 0.9 && r2r > 0.9 && ordered && (1.2..=2.4).contains(&ratio),
        format!("R^2 bare {r2b:.3}, RC {r2r:.3} (> 0.9); RC <= bare at every K: {ordered}; overall ratio {ratio:.3} (in [1.2, 2.4])"),
    ))
}

fn randomization_convergence() -> Outcome {
    let rep = run_randomization_sweep(&RandSweepSpec::paper(SEED), &ReferenceModel::Complete.load()?)?;
    let at = |n: usize| rep.points.iter().find(|p| p.randomizations == n).map(|p| p.mean_rc_tvd).unwrap_or(f64::NAN);
    let (m10, m20) = (at(10), at(20));
    let gap = (m10 - m20).abs() / m20;
    Ok((
        gap <= 0.05,
        format!("mean RC TVD N=10 {m10:.4}, N=20 {m20:.4}, gap {:.1}% (<= 5%)", 100.0 * gap),
    ))
}

fn classical_circuit(n: usize, k: usize, rng: &mut ChaCha8Rng) -> Circuit {
    let easy = |rng: &mut ChaCha8Rng| {
        let gates = (0..n).filter(|_| rng.random_bool(0.5)).map(|q| Gate::single(GateKind::X, q)).collect();
        Cycle::new(CycleKind::Easy, n, gates).unwrap()
    };
    let mut cycles = vec![easy(rng)];
    for _ in 0..k {
        let a = rng.random_range(0..n - 1);
        let (c, t) = if rng.random_bool(0.5) { (a, a + 1) } else { (a + 1, a) };
        let kind = if rng.random_bool(0.5) { GateKind::CX } else { GateKind::CZ };
        cycles.push(Cycle::new(CycleKind::Hard, n, vec![Gate::two(kind, c, t)]).unwrap());
        cycles.push(easy(rng));
    }
    Circuit::new(n, cycles).unwrap()
}

fn eigenstate_null() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let model: NoiseModel = z_rotation_model(4, 0.2)?;
    let sim = Simulator::new(&model, 4)?;
    let mut worst = f64::NEG_INFINITY;
    for i in 0..20u64 {
        let c = classical_circuit(4, rng.random_range(1..=10), &mut rng);
        let run = run_bare_and_rc(&c, &sim, ShotPlan::exact(20), SEED + i)?;
        let ideal = run.ideal.probabilities();
        if ideal.iter().filter(|&&p| p > 1.0 - 1e-12).count() != 1 {
            return Ok((false, format!("circuit {i} does not end in a basis state")));
        }
        worst = worst.max(run.bare_tvd() - run.rc_tvd());
    }
    Ok((worst < 1e-3, format!("20 basis-state circuits, Rz(0.2) errors, max bare - RC TVD {worst:.1e}")))
}

fn model_fit_fidelity() -> Outcome {
    let mut bodies = 0;
    let mut problems = Vec::new();
    for kind in [ReferenceModel::Complete, ReferenceModel::Scaled, ReferenceModel::Pauli] {
        let model = kind.load()?;
        for rule in &model.cycles {
            for b in &rule.bodies {
                let Some(info) = &b.fit else { continue };
                bodies += 1;
                let tag = format!("{kind:?} {} {:?}", rule.signature, b.qubits);
                let ch = b.channel()?;
                let dim = 1usize << b.qubits.len();
                let mut tp = CMat::zeros(dim, dim);
                for k in ch.kraus() {
                    tp += k.adjoint() * k;
                }
                let tp_err = max_diff(&tp, &rckit::linalg::identity(dim));
                let q_ok = b.q.iter().all(|&x| x >= 0.0) && (b.q.iter().sum::<f64>() - 1.0).abs() < 1e-12;
                // targets and forward values from an explicit Pauli-basis PTM
                let paulis: Vec<CMat> = PauliString::all(b.qubits.len()).map(|p| p.to_matrix()).collect();
                let m = |i: usize, j: usize| -> f64 {
                    let out: CMat = ch.kraus().iter().map(|k| k * &paulis[j] * k.adjoint()).sum();
                    (&paulis[i] * out).trace().re / dim as f64
                };
                let d: Vec<f64> = (0..paulis.len()).map(|i| m(i, i)).collect();
                let mut u = 0.0;
                for i in 1..paulis.len() {
                    for j in 1..paulis.len() {
                        u += m(i, j).powi(2);
                    }
                }
                u /= (paulis.len() - 1) as f64;
                let dt: Vec<f64> = info.f.iter().map(|f| 1.0 - info.s0 * (1.0 - f)).collect();
                let dbar = dt.iter().sum::<f64>() / dt.len() as f64;
                let ut = 1.0 - (1.0 - info.s1) * (1.0 - dbar * dbar);
                let dd = d.iter().zip(&dt).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
                let du = (u - ut).abs();
                if !(info.residual < 1e-10) || tp_err > 1e-10 || !q_ok || dd > 1e-6 || du > 1e-6 {
                    problems.push(format!(
                        "{tag}: residual {:.1e}, TP error {tp_err:.1e}, |dd| {dd:.1e}, |du| {du:.1e}",
                        info.residual
                    ));
                }
            }
        }
    }
    let audit: usize = [ReferenceModel::Complete, ReferenceModel::Scaled, ReferenceModel::Pauli]
        .into_iter()
        .map(|k| rckit::model_fit::audit_model(&k.load().unwrap(), 1e-6).unwrap().len())
        .sum();
    let ok = bodies > 0 && problems.is_empty() && audit == 0;
    let detail = if problems.is_empty() {
        format!("{bodies} fitted bodies across the shipped models, all within tolerance")
    } else {
        problems.join("; ")
    };
    Ok((ok, detail))
}

fn report(id: usize, name: &str, limit: Duration, f: impl FnOnce() -> Outcome) -> bool {
    let start = Instant::now();
    let outcome = f();
    let elapsed = start.elapsed();
    let (pass, detail) = match outcome {
        Ok((pass, detail)) => (pass && elapsed <= limit, detail),
        Err(e) => (false, format!("error: {e}")),
    };
    println!(
        "criterion {id:>2} [{}] {name}: {detail} ({:.1}s, limit {}s)",
        if pass { "PASS" } else { "FAIL" },
        elapsed.as_secs_f64(),
        limit.as_secs()
    );
    pass
}

fn main() {
    let min = |m: u64| Duration::from_secs(60 * m);
    let mut results = vec![
        report(1, "logical equivalence", min(1), logical_equivalence),
        report(2, "exact twirl equals Pauli channel", min(1), exact_twirl),
        report(3, "Walsh-Hadamard / CER roundtrip", min(2), cer_roundtrip),
        report(4, "coherent-error scaling", min(1), coherent_scaling),
        report(5, "CB recovers cycle infidelity", min(5), cb_infidelity),
    ];
    let mut unscaled = f64::NAN;
    results.push(report(6, "QFT RC improvement", min(15), || qft_improvement(&mut unscaled)));
    results.push(report(7, "scaled-error prediction", min(15), || scaled_prediction(unscaled)));
    results.push(report(8, "depth sweep", min(20), depth_sweep));
    results.push(report(9, "randomization convergence", min(10), randomization_convergence));
    results.push(report(10, "eigenstate-target null result", min(1), eigenstate_null));
    results.push(report(11, "model-fit fidelity", min(1), model_fit_fidelity));
    let passed = results.iter().filter(|&&p| p).count();
    println!("acceptance: {passed}/{} criteria passed", results.len());
    if passed != results.len() {
        std::process::exit(1);
    }
}
