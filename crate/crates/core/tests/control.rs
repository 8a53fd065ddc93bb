mod common;

use common::*;
use mgtlab::control::{
    boundary_form, control_pairing, duality_residual, laplace_f, laplace_f_envelope, laplace_kernels_eval,
    moment_gram_min_eigenvalues, moment_lhs, null_controllability_pairing, real_root_trajectory, spectral_matrices,
    ControlToStateMap,
};
use mgtlab::dual::{solve_dual, DualData};
use mgtlab::experiment::{low_mode_target, null_target};
use mgtlab::forward::{control_forcing, solve, solve_controlled};
use mgtlab::{solve_characteristic_cubic, ControlSignal, Error, KernelSet, ModelParams, Problem, StateTriple, Warning};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::Rng;
use std::sync::OnceLock;

fn seeded_dual(problem: &Problem, seed: u64) -> DualData {
    let mut r = rng(seed);
    let n = problem.n_modes();
    let mut draw = || -> Vec<f64> {
        (0..n).map(|i| r.random_range(-1.0..1.0) / problem.eigenvalue(i)).collect()
    };
    let (a, b, c) = (draw(), draw(), draw());
    DualData::new(a, b, c, T_REF).unwrap()
}

fn seeded_initial(problem: &Problem, seed: u64) -> StateTriple {
    let mut r = rng(seed);
    let n = problem.n_modes();
    let mut draw = || -> Vec<f64> {
        (0..n).map(|i| r.random_range(-1.0..1.0) / problem.eigenvalue(i)).collect()
    };
    let (a, b, c) = (draw(), draw(), draw());
    StateTriple::from_vecs(a, b, c, 0.0)
}

fn reference_map(size: usize) -> ControlToStateMap {
    ControlToStateMap::assemble(reference_problem(), &reference_controls(reference_problem(), 64), size).unwrap()
}

fn largest_map() -> &'static ControlToStateMap {
    static CELL: OnceLock<ControlToStateMap> = OnceLock::new();
    CELL.get_or_init(|| reference_map(32))
}

#[test]
fn determinant_formulas_over_seeded_modes() {
    let mut r = rng(9);
    for _ in 0..100 {
        let b = r.random_range(0.5f64.ln()..10f64.ln()).exp();
        let c = r.random_range(0.5..2.0);
        let gamma = r.random_range(0.1f64.ln()..2f64.ln()).exp();
        let params = ModelParams::new(gamma + c * c / b, b, c, 0.5).unwrap();
        let lam = r.random_range(0.0..(1e4f64).ln()).exp();
        let k = KernelSet::new(solve_characteristic_cubic(&params, lam).unwrap());
        let m = spectral_matrices(&k, &params);
        assert!(m.det_b_relative_error() <= 1e-10, "det B at λ = {lam}: {:e}", m.det_b_relative_error());
        assert!(m.det_a_relative_error() <= 1e-10, "det A at λ = {lam}: {:e}", m.det_a_relative_error());
        assert!(m.b_min_singular_value > 0.0);
    }
}

#[test]
fn laplace_transform_matches_quadrature() {
    let problem = small_problem();
    let mut r = rng(10);
    for n in [0, 3] {
        let k = problem.kernel(n);
        let decay = k.mode().roots().iter().map(|z| z.re.abs()).fold(f64::MAX, f64::min);
        let horizon = 40.0 / decay;
        for _ in 0..10 {
            let z = Complex64::new(r.random_range(0.1..3.0), r.random_range(-5.0..5.0));
            let closed = laplace_kernels_eval(k, z).unwrap();
            let parts: [&dyn Fn(f64) -> f64; 3] = [&|t| k.eval(t, 0).a, &|t| k.eval(t, 0).b, &|t| k.eval(t, 0).c];
            for (j, f) in parts.iter().enumerate() {
                let quad = laplace_oracle(f, z, horizon, 400);
                let err = (closed[j] - quad).norm() / closed[j].norm();
                assert!(err <= 1e-6, "mode {n}, z = {z}, kernel {j}: {err:e}");
            }
        }
    }
}

#[test]
fn laplace_transforms_decay_like_initial_values() {
    let k = small_problem().kernel(2);
    for scale in [1e3, 1e5] {
        let z = Complex64::new(scale, 0.3 * scale);
        let [g, h, i] = laplace_kernels_eval(k, z).unwrap();
        // A(0) = 1, B′(0) = 1, C″(0) = 1.
        assert!((z * g - 1.0).norm() <= 10.0 / scale);
        assert!((z * z * h - 1.0).norm() <= 10.0 / scale);
        assert!((z * z * z * i - 1.0).norm() <= 10.0 / scale);
        assert!((z * z * i).norm() <= 2.0 / scale);
    }
}

#[test]
fn laplace_evaluation_at_a_pole_is_refused() {
    let k = small_problem().kernel(1);
    let pole = k.mode().roots()[1];
    assert!(matches!(laplace_kernels_eval(k, pole), Err(Error::Domain(_))));
    assert!(laplace_kernels_eval(k, pole + 1e-6).is_ok());
}

#[test]
fn forcing_transform_against_quadrature_and_envelope() {
    let problem = reference_problem();
    let g = reference_signal(problem);
    let pairings = g.basis().trace_pairings(problem.basis());
    for n in [0, 5] {
        let oracle = adaptive_integral(|t| control_forcing(problem, &g, &pairings, t)[n], 0.0, T_REF, 16);
        let f0 = laplace_f(problem, &g, n, Complex64::new(0.0, 0.0)).unwrap();
        assert!((f0.re - oracle).abs() <= 1e-8 * oracle.abs().max(1e-3) && f0.im == 0.0, "{f0} vs {oracle}");
        for z in [Complex64::new(1.0, 0.0), Complex64::new(-2.0, 0.7), Complex64::new(0.3, -1.5)] {
            let f = laplace_f(problem, &g, n, z).unwrap();
            assert!(f.norm() <= laplace_f_envelope(problem, &g, n, z) * (1.0 + 1e-12));
        }
    }
    let zero = ControlSignal::zero(g.basis().clone());
    assert_eq!(laplace_f(problem, &zero, 0, Complex64::new(1.0, 1.0)).unwrap(), Complex64::new(0.0, 0.0));
    assert!(laplace_f(problem, &g, problem.n_modes(), Complex64::new(0.0, 0.0)).is_err());
}

#[test]
fn duality_identity_converges_under_time_refinement() {
    let problem = reference_problem();
    let dual = seeded_dual(problem, 20);
    let initial = seeded_initial(problem, 21);
    let g = reference_signal(problem);
    let residuals: Vec<f64> = [8, 16, 32, 64]
        .iter()
        .map(|&p| {
            let gp = ControlSignal::new(g.basis().with_panels(p), g.coeffs().to_vec());
            duality_residual(problem, &gp, &initial, &dual).unwrap().residual
        })
        .collect();
    for w in residuals.windows(2) {
        assert!(w[1] < w[0], "{residuals:?}");
    }
    assert!(*residuals.last().unwrap() <= 1e-4, "{residuals:?}");
}

#[test]
fn duality_degenerate_cases() {
    let problem = reference_problem();
    let n = problem.n_modes();
    let g = reference_signal(problem);
    let zero_g = ControlSignal::zero(g.basis().clone());
    let rest = StateTriple::zeros(n, 0.0);
    let report = duality_residual(problem, &zero_g, &rest, &seeded_dual(problem, 22)).unwrap();
    assert_eq!(report.residual, 0.0);
    let report = duality_residual(problem, &g, &rest, &DualData::zeros(n, T_REF).unwrap()).unwrap();
    assert_eq!((report.pairing, report.residual), (0.0, 0.0));
    let wrong_horizon = DualData::zeros(n, 2.0).unwrap();
    assert!(matches!(duality_residual(problem, &g, &rest, &wrong_horizon), Err(Error::Config(_))));
}

#[test]
fn null_pairing_equals_the_final_boundary_form() {
    let problem = reference_problem();
    let dual = seeded_dual(problem, 23);
    let initial = seeded_initial(problem, 24);
    let g = reference_signal(problem);
    let pairing = null_controllability_pairing(problem, &initial, &g, &dual).unwrap();
    let final_state = solve(problem, &initial, &g, T_REF).unwrap();
    let at_t = boundary_form(problem, &final_state, &solve_dual(problem, &dual, T_REF).unwrap());
    assert!((pairing - at_t).abs() <= 1e-8 * at_t.abs().max(1.0), "{pairing} vs {at_t}");
}

#[test]
fn real_root_moments_in_closed_form() {
    let problem = reference_problem();
    let zero = ControlSignal::zero(reference_controls(problem, 16));
    let n = problem.n_modes();
    for mode in [0, 3, 10] {
        let dual = real_root_trajectory(problem, mode, T_REF).unwrap();
        let mut initial = StateTriple::zeros(n, 0.0);
        let (u0, u1, u2) = (0.4, -1.1, 0.8);
        initial.u.coeffs[mode] = u0;
        initial.ut.coeffs[mode] = u1;
        initial.utt.coeffs[mode] = u2;
        let pairing = null_controllability_pairing(problem, &initial, &zero, &dual).unwrap();
        let closed = moment_lhs(problem, mode, u0, u1, u2, T_REF);
        assert!((pairing - closed).abs() <= 1e-12 * closed.abs().max(1.0), "{pairing} vs {closed}");
    }
    assert!(real_root_trajectory(problem, n, T_REF).is_err());
}

#[test]
fn control_pairing_vanishes_for_zero_control() {
    let problem = reference_problem();
    let zero = ControlSignal::zero(reference_controls(problem, 16));
    assert_eq!(control_pairing(problem, &zero, &seeded_dual(problem, 25)).unwrap(), 0.0);
}

#[test]
fn synthesized_control_reaches_its_reported_state() {
    let map = largest_map();
    let target = low_mode_target(reference_problem().n_modes(), T_REF);
    let synth = map.solve(&target, 1e-6).unwrap();
    let direct = solve_controlled(reference_problem(), &synth.control, T_REF).unwrap();
    let via_map = map.apply(synth.control.coeffs());
    assert!(rel_l2(&via_map.u.coeffs, &direct.u.coeffs) <= 1e-12);
    assert_eq!(synth.warning.is_some(), synth.condition_estimate > mgtlab::control::synthesis::CONDITIONING_LIMIT);
    if let Some(Warning::Conditioning { estimate }) = synth.warning {
        assert_eq!(estimate, synth.condition_estimate);
    }
}

#[test]
fn zero_target_gives_zero_control() {
    let synth = largest_map().solve(&StateTriple::zeros(reference_problem().n_modes(), T_REF), 1e-8).unwrap();
    assert_eq!(synth.control_norm, 0.0);
    assert_eq!(synth.misfit, 0.0);
    assert!(largest_map().solve(&StateTriple::zeros(1, T_REF), 0.0).is_err());
}

#[test]
fn approximate_controllability_signature() {
    let target = low_mode_target(reference_problem().n_modes(), T_REF);
    let misfits: Vec<f64> =
        [4, 8, 16, 32].iter().map(|&k| reference_map(k).solve(&target, 1e-8).unwrap().misfit).collect();
    for w in misfits.windows(2) {
        assert!(w[1] < w[0], "{misfits:?}");
    }
    assert!(misfits[3] <= 0.1, "{misfits:?}");
}

#[test]
fn null_controllability_signature() {
    let target = null_target(reference_problem(), T_REF).unwrap();
    let epsilons: Vec<f64> = (2..=10).map(|k| 10f64.powi(-k)).collect();
    let rows = largest_map().epsilon_sweep(&target, &epsilons).unwrap();
    let (first, last) = (rows[0], rows[rows.len() - 1]);
    assert!(last.control_norm >= 10.0 * first.control_norm, "{first:?} .. {last:?}");
    let tail: Vec<f64> = rows[rows.len() - 2..].iter().map(|r| r.misfit).collect();
    assert!(tail.iter().all(|&m| m > 0.1), "{tail:?}");
    assert!((tail[0] - tail[1]).abs() <= 0.05 * tail[1], "misfit still falling over the last decade: {tail:?}");
}

#[test]
fn moment_gram_loses_rank() {
    let problem = reference_problem();
    let mins = moment_gram_min_eigenvalues(problem, T_REF);
    let norm = mins[0];
    assert!(norm > 0.0);
    for w in mins.windows(2) {
        assert!(w[1] <= w[0] + 1e-13 * norm);
    }
    assert!(mins[7].abs() <= 1e-12 * norm);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn tikhonov_path_is_monotone(coeffs in proptest::collection::vec(-1.0f64..1.0, 6)) {
        let problem = reference_problem();
        let n = problem.n_modes();
        let mut target = StateTriple::zeros(n, T_REF);
        target.u.coeffs[..2].copy_from_slice(&coeffs[..2]);
        target.ut.coeffs[..2].copy_from_slice(&coeffs[2..4]);
        target.utt.coeffs[..2].copy_from_slice(&coeffs[4..]);
        let epsilons: Vec<f64> = (0..=12).map(|k| 10f64.powi(-k)).collect();
        let map = largest_map();
        let rows = map.epsilon_sweep(&target, &epsilons).unwrap();
        for w in rows.windows(2) {
            // ε decreases along the path.
            prop_assert!(w[1].misfit <= w[0].misfit * (1.0 + 1e-12) + 1e-15);
            prop_assert!(w[1].control_norm >= w[0].control_norm * (1.0 - 1e-12));
        }
        let direct = map.solve(&target, 1e-4).unwrap();
        prop_assert!((direct.misfit - rows[4].misfit).abs() <= 1e-8 * rows[4].misfit.max(1e-12));
        prop_assert!((direct.control_norm - rows[4].control_norm).abs() <= 1e-8 * rows[4].control_norm);
    }
}
