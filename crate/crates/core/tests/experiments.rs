use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use rckit::circuit::{sample_random_circuit, RandomMode};
use rckit::device::ReferenceModel;
use rckit::experiments::{
    run_bare_and_rc, run_depth_sweep, run_qft_experiment, DepthSweepSpec, QftInputs, QftSpec, ShotPlan,
};
use rckit::noise::NoiseModel;
use rckit::sim::Simulator;

#[test]
fn shot_accounting_balances() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let c = sample_random_circuit(4, 4, RandomMode::Multiqubit, &mut rng).unwrap();
    let model = ReferenceModel::Complete.load().unwrap();
    let sim = Simulator::new(&model, 4).unwrap();
    let run = run_bare_and_rc(&c, &sim, ShotPlan::new(1000, 10), 3).unwrap();
    assert_eq!(run.bare.shots(), Some(1000));
    assert_eq!(run.randomizations.len(), 10);
    assert!(run.randomizations.iter().all(|d| d.shots() == Some(100)));
    assert_eq!(run.rc.shots(), Some(1000));
    assert!(run_bare_and_rc(&c, &sim, ShotPlan::new(1001, 10), 3).is_err());
}

#[test]
fn reports_are_reproducible() {
    let spec = QftSpec {
        n: 4,
        inputs: QftInputs::Haar { count: 4 },
        plan: ShotPlan::new(2000, 10),
        seed: 12,
    };
    let model = ReferenceModel::Complete.load().unwrap();
    let a = serde_json::to_string(&run_qft_experiment(&spec, &model).unwrap()).unwrap();
    let b = serde_json::to_string(&run_qft_experiment(&spec, &model).unwrap()).unwrap();
    assert_eq!(a, b);
    assert!(a.contains("\"seed\":12"));
    let other = QftSpec { seed: 13, ..spec };
    let c = serde_json::to_string(&run_qft_experiment(&other, &model).unwrap()).unwrap();
    assert_ne!(a, c);
}

#[test]
fn noiseless_depth_sweep_is_flat_zero() {
    let spec = DepthSweepSpec {
        n: 3,
        depths: vec![2, 4],
        circuits: 3,
        mode: RandomMode::Multiqubit,
        plan: ShotPlan::exact(4),
        seed: 5,
    };
    let rep = run_depth_sweep(&spec, &NoiseModel::noiseless(3)).unwrap();
    for row in &rep.rows {
        assert!(row.bare_tvd < 1e-10 && row.rc_tvd < 1e-10);
    }
    let csv = rep.to_csv();
    assert_eq!(csv.lines().count(), 1 + rep.rows.len());
}

#[test]
fn exact_rc_beats_bare_under_coherent_noise() {
    // exact averaging removes shot noise; a coherent model is where RC helps
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let model = rckit::experiments::z_rotation_model(3, 0.15).unwrap();
    let sim = Simulator::new(&model, 3).unwrap();
    let (mut bare, mut rc) = (0.0, 0.0);
    for i in 0..10 {
        let c = sample_random_circuit(3, 8, RandomMode::Multiqubit, &mut rng).unwrap();
        let run = run_bare_and_rc(&c, &sim, ShotPlan::exact(20), i).unwrap();
        bare += run.bare_tvd();
        rc += run.rc_tvd();
    }
    assert!(rc < bare, "rc {rc} bare {bare}");
}
