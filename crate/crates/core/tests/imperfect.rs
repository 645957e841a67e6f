use cascade_core::exec::Execution;
use cascade_core::imperfect::{
    child_seed, ensemble_fidelity, noise_trajectory, perturb_pulses, rotating_frame_transform, FrameDirection,
    NoiseParams,
};
use cascade_core::metrics::{analytic_loss_fidelity, pulse_fidelity};
use cascade_core::network::NetworkConfig;
use cascade_core::numkit::{make_time_grid, named_unitary, UnitaryKind};
use cascade_core::synth::{emitter_pulses, synthesize_explicit, EmitterParams, PulseSet};
use cascade_core::C64;
use proptest::prelude::*;

#[test]
fn stationary_variance_and_correlation() {
    let grid = make_time_grid(0.0, 20_000.0, 0.01).unwrap();
    let params = NoiseParams::new(0.04, 1.0, 9).unwrap();
    let x = noise_trajectory(&params, &grid, 0);
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    let var = x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    assert!((var / 0.04 - 1.0).abs() < 0.05, "{var}");
    // <x(t) x(t + 2)> = eps e^{-1}
    let lag = 200;
    let c = x.iter().zip(&x[lag..]).map(|(a, b)| a * b).sum::<f64>() / (x.len() - lag) as f64;
    assert!((c / (0.04 * (-1.0f64).exp()) - 1.0).abs() < 0.1, "{c}");
}

#[test]
fn modes_and_runs_are_independent_streams() {
    let grid = make_time_grid(0.0, 10.0, 0.1).unwrap();
    let params = NoiseParams::new(0.01, 2.0, 1).unwrap();
    assert_ne!(noise_trajectory(&params, &grid, 0), noise_trajectory(&params, &grid, 1));
    assert_eq!(noise_trajectory(&params, &grid, 3), noise_trajectory(&params, &grid, 3));
    assert_ne!(child_seed(1, 0), child_seed(1, 1));
    assert_ne!(child_seed(1, 0), child_seed(2, 0));
}

fn hadamard_setup() -> (NetworkConfig, PulseSet) {
    let grid = make_time_grid(0.0, 40.0, 0.02).unwrap();
    let config = NetworkConfig::ideal(2, grid);
    let emitter = emitter_pulses(2, &EmitterParams::new(2.0, 1.0, 19.0).unwrap(), &grid).unwrap();
    let u = named_unitary(UnitaryKind::Hadamard, 2).unwrap();
    let pulses = synthesize_explicit(&config, &u, &emitter).unwrap().pulses;
    (config, pulses)
}

#[test]
fn zero_noise_reproduces_ideal_fidelity() {
    let (config, pulses) = hadamard_setup();
    let u = named_unitary(UnitaryKind::Hadamard, 2).unwrap();
    let ideal = pulse_fidelity(&config, &pulses, &u).unwrap();
    let params = NoiseParams::new(0.0, 1.0, 3).unwrap();
    let stats = ensemble_fidelity(&config, &pulses, &u, &params, 5, Execution::Sequential).unwrap();
    assert_eq!(stats.mean_fidelity, ideal);
    assert_eq!(stats.std_fidelity, 0.0);
}

#[test]
fn ensemble_is_independent_of_scheduling() {
    let (config, pulses) = hadamard_setup();
    let u = named_unitary(UnitaryKind::Hadamard, 2).unwrap();
    let params = NoiseParams::new(0.01, 1.0, 42).unwrap();
    let seq = ensemble_fidelity(&config, &pulses, &u, &params, 16, Execution::Sequential).unwrap();
    let par = ensemble_fidelity(&config, &pulses, &u, &params, 16, Execution::Parallel).unwrap();
    assert_eq!(seq, par);
    assert!(seq.mean_fidelity < pulse_fidelity(&config, &pulses, &u).unwrap());
}

#[test]
fn circulator_loss_matches_formula() {
    let (config, pulses) = hadamard_setup();
    let u = named_unitary(UnitaryKind::Hadamard, 2).unwrap();
    let ideal = pulse_fidelity(&config, &pulses, &u).unwrap();
    let mut lossy = config.clone();
    lossy.p_circulator = 0.002;
    let simulated = pulse_fidelity(&lossy, &pulses, &u).unwrap();
    let analytic = analytic_loss_fidelity(ideal, 0.0, config.grid.duration(), 0.0, 0.002, 2);
    assert!((simulated - analytic).abs() < 1e-3);
    // channel loss and local decay are exact
    let mut lossy = config.clone();
    lossy.p_channel = 0.05;
    lossy.local_decay = 0.001;
    let simulated = pulse_fidelity(&lossy, &pulses, &u).unwrap();
    let analytic = analytic_loss_fidelity(ideal, 0.001, config.grid.duration(), 0.05, 0.0, 2);
    assert!((simulated - analytic).abs() < 1e-3);
}

#[test]
fn perturbed_pulses_lose_clamp_info() {
    let (_, pulses) = hadamard_setup();
    let noisy = perturb_pulses(&pulses, &NoiseParams::new(0.01, 1.0, 1).unwrap()).unwrap();
    assert!((0..4).all(|mu| noisy.clamp_intervals(mu).is_empty() && !noisy.is_clamped(mu)));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn frame_round_trip(d in prop::collection::vec(-2.0..2.0f64, 4), re in -1.0..1.0f64, im in -1.0..1.0f64) {
        let grid = make_time_grid(0.0, 5.0, 0.1).unwrap();
        let samples = (0..4).map(|_| vec![C64::new(re, im); grid.len()]).collect();
        let pulses = PulseSet::from_samples(2, grid, samples).unwrap();
        let there = rotating_frame_transform(&pulses, &d, FrameDirection::ToRotating).unwrap();
        let back = rotating_frame_transform(&there, &d, FrameDirection::FromRotating).unwrap();
        for mu in 0..4 {
            for (a, b) in back.mode(mu).iter().zip(pulses.mode(mu)) {
                prop_assert!((a - b).norm() < 1e-14);
            }
            for (a, b) in there.mode(mu).iter().zip(pulses.mode(mu)) {
                prop_assert!((a.norm() - b.norm()).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn noise_is_deterministic_per_seed(seed in any::<u64>(), omega in 0.1..20.0f64) {
        let grid = make_time_grid(0.0, 3.0, 0.05).unwrap();
        let params = NoiseParams::new(0.01, omega, seed).unwrap();
        prop_assert_eq!(noise_trajectory(&params, &grid, 1), noise_trajectory(&params, &grid, 1));
    }
}
