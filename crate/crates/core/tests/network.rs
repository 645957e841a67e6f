use cascade_core::network::{coupling_matrix, final_green_ba, propagate_green, NetworkConfig};
use cascade_core::numkit::{make_time_grid, CMatrix, TimeGrid};
use cascade_core::synth::PulseSet;
use cascade_core::C64;
use proptest::prelude::*;

fn constant_pulses(n: usize, grid: TimeGrid, g: &[C64]) -> PulseSet {
    let samples = g.iter().map(|&z| vec![z; grid.len()]).collect();
    PulseSet::from_samples(n, grid, samples).unwrap()
}

fn max_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

// constant couplings: G(t) = exp(-M t), evaluated independently of the stepper
#[test]
fn constant_couplings_match_matrix_exponential() {
    let grid = make_time_grid(0.0, 6.0, 0.01).unwrap();
    let mut config = NetworkConfig::ideal(2, grid);
    config.detunings = vec![0.3, -0.2, 0.1, 0.4];
    config.local_decay = 0.05;
    config.p_channel = 0.1;
    config.p_circulator = 0.02;
    let g = [C64::new(0.9, 0.1), C64::new(0.3, -0.4), C64::new(0.5, 0.5), C64::new(-0.7, 0.2)];
    let pulses = constant_pulses(2, grid, &g);
    let traj = propagate_green(&config, &pulses).unwrap();
    let m = coupling_matrix(&config, &g).unwrap().0;
    let expected = (m * C64::new(-grid.tf, 0.0)).exp();
    assert!(max_diff(traj.final_green(), &expected) < 1e-10);
}

#[test]
fn single_pair_closed_form() {
    // g_A = g_B = 1: a = e^{-t/2}, b = -t e^{-t/2}
    let grid = make_time_grid(0.0, 5.0, 0.01).unwrap();
    let config = NetworkConfig::ideal(1, grid);
    let pulses = constant_pulses(1, grid, &[C64::new(1.0, 0.0), C64::new(1.0, 0.0)]);
    let traj = propagate_green(&config, &pulses).unwrap();
    for k in (0..grid.len()).step_by(50) {
        let t = grid.time(k);
        let g = traj.at(k).unwrap();
        assert!((g[(0, 0)].re - (-t / 2.0).exp()).abs() < 1e-10);
        assert!((g[(1, 0)].re + t * (-t / 2.0).exp()).abs() < 1e-10);
    }
    let g_ba = final_green_ba(&config, &pulses).unwrap();
    assert!((g_ba[(0, 0)].re + 5.0 * (-2.5f64).exp()).abs() < 1e-10);
}

#[test]
fn zero_couplings_give_identity_exactly() {
    let grid = make_time_grid(0.0, 10.0, 0.1).unwrap();
    let config = NetworkConfig::ideal(3, grid);
    let traj = propagate_green(&config, &PulseSet::zeros(3, grid)).unwrap();
    assert_eq!(traj.final_green(), &CMatrix::identity(6, 6));
}

#[test]
fn rk4_is_fourth_order() {
    // smooth time-dependent pulses, reference at dt/8
    let run = |dt: f64| {
        let grid = make_time_grid(0.0, 8.0, dt).unwrap();
        let samples = (0..4)
            .map(|mu| {
                grid.times()
                    .map(|t| C64::from_polar(0.8 / (1.0 + 0.1 * mu as f64), 0.3 * t + mu as f64) * (0.5 * t).sin())
                    .collect()
            })
            .collect();
        let pulses = PulseSet::from_samples(2, grid, samples).unwrap();
        propagate_green(&NetworkConfig::ideal(2, grid), &pulses).unwrap().final_green().clone()
    };
    let reference = run(0.0125);
    let e1 = max_diff(&run(0.2), &reference);
    let e2 = max_diff(&run(0.1), &reference);
    let ratio = e1 / e2;
    assert!((12.0..=20.0).contains(&ratio), "ratio {ratio}");
}

fn coupling() -> impl Strategy<Value = C64> {
    (0.0..1.0f64, -3.2..3.2f64).prop_map(|(r, p)| C64::from_polar(r, p))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn green_is_lower_triangular_and_contractive(
        n in 1usize..4,
        gs in prop::collection::vec(coupling(), 6),
        decay in 0.0..0.2f64,
        p in 0.0..0.3f64,
    ) {
        let grid = make_time_grid(0.0, 4.0, 0.02).unwrap();
        let mut config = NetworkConfig::ideal(n, grid);
        config.local_decay = decay;
        config.p_circulator = p;
        let pulses = constant_pulses(n, grid, &gs[..2 * n]);
        let traj = propagate_green(&config, &pulses).unwrap();
        for g in traj.samples() {
            for i in 0..2 * n {
                for j in i + 1..2 * n {
                    prop_assert_eq!(g[(i, j)], C64::new(0.0, 0.0));
                }
                let row: f64 = g.row(i).iter().map(|z| z.norm_sqr()).sum();
                prop_assert!(row <= 1.0 + 1e-9);
            }
        }
    }

    #[test]
    fn decoupled_mode_is_untouched(
        gs in prop::collection::vec(coupling(), 4),
    ) {
        let grid = make_time_grid(0.0, 2.0, 0.01).unwrap();
        let config = NetworkConfig::ideal(2, grid);
        let mut g = gs.clone();
        g[3] = C64::new(0.0, 0.0);
        let traj = propagate_green(&config, &constant_pulses(2, grid, &g)).unwrap();
        let fin = traj.final_green();
        prop_assert_eq!(fin[(3, 3)], C64::new(1.0, 0.0));
        for j in 0..3 {
            prop_assert_eq!(fin[(3, j)], C64::new(0.0, 0.0));
        }
    }
}
