use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use rckit::channel::{compose_sqh, unitarity};
use rckit::error::Error;
use rckit::model_fit::{fit_channel, fitted_channel, FitTarget};
use rckit::pauli::PauliProbabilities;

/// A coherent-dominated channel the model family can express exactly, with its d and u.
fn reachable(n_body: usize, rng: &mut ChaCha8Rng) -> (Vec<f64>, f64) {
    let len = 1usize << (2 * n_body);
    let err = rng.random_range(0.005..0.02);
    let w: Vec<f64> = (1..len).map(|_| rng.random_range(0.5..1.5)).collect();
    let s: f64 = w.iter().sum();
    let q: Vec<f64> = std::iter::once(1.0 - err).chain(w.iter().map(|x| err * x / s)).collect();
    let h: Vec<f64> = (1..len).map(|_| rng.random_range(-0.15..0.15)).collect();
    let ch = compose_sqh(&PauliProbabilities::new(q).unwrap(), &h).unwrap();
    (ch.ptm().diagonal_entries(), unitarity(&ch))
}

#[test]
fn recovers_reachable_targets() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let mut fitted = 0;
    for n_body in [1, 1, 1, 2, 2] {
        let (d, u) = reachable(n_body, &mut rng);
        let dbar = d.iter().sum::<f64>() / d.len() as f64;
        // choose s1 so that the target unitarity equals the channel's own
        let s1 = 1.0 - (1.0 - u) / (1.0 - dbar * dbar);
        if !(0.0..=1.0).contains(&s1) {
            continue;
        }
        let fit = fit_channel(&FitTarget::new(d.clone(), 1.0, s1).unwrap()).unwrap();
        let ch = fitted_channel(&fit).unwrap();
        assert!(ch.is_cptp());
        for (a, b) in ch.ptm().diagonal_entries().iter().zip(&d) {
            assert!((a - b).abs() < 1e-6, "{a} vs {b}");
        }
        assert!((unitarity(&ch) - u).abs() < 1e-6);
        fitted += 1;
    }
    assert!(fitted >= 3);
}

#[test]
fn scaling_s0_shrinks_the_error() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let (d, _) = reachable(1, &mut rng);
    let fit = fit_channel(&FitTarget::new(d.clone(), 0.1, 0.5).unwrap()).unwrap();
    for (a, b) in fit.d.iter().zip(&d) {
        assert!((a - (1.0 - 0.1 * (1.0 - b))).abs() < 1e-6);
    }
}

#[test]
fn invalid_targets_are_rejected() {
    assert!(matches!(FitTarget::new(vec![1.0; 5], 1.0, 0.5), Err(Error::InvalidArgument(_))));
    assert!(matches!(FitTarget::new(vec![0.9; 4], 1.0, 0.5), Err(Error::InvalidArgument(_))));
    assert!(matches!(FitTarget::new(vec![1.0; 4], 1.5, 0.5), Err(Error::InvalidArgument(_))));
}

#[test]
fn unreachable_target_reports_fit_failure() {
    // a certain bit flip: unit unitarity, but a zero coherent share asks for zero
    let t = FitTarget::new(vec![1.0, 1.0, -1.0, -1.0], 1.0, 0.0).unwrap();
    assert!(matches!(fit_channel(&t), Err(Error::FitFailed { .. })));
}
