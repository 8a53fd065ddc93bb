mod common;

use common::*;
use mgtlab::{Space, SpectralCoefficients};
use nalgebra::DVector;
use proptest::prelude::*;

#[test]
fn eigenpairs_have_small_residuals_and_are_orthonormal() {
    let problem = reference_problem();
    let basis = problem.basis();
    let grid = problem.grid();
    let dd = problem.operator().matrix_dd();
    let mut last = 0.0;
    for n in 0..basis.n_modes() {
        let lam = basis.eigenvalue(n);
        assert!(lam > last);
        last = lam;
        let phi = DVector::from_vec(basis.eigenvector(n));
        let resid = (dd * &phi - &phi * lam).norm() / phi.norm();
        assert!(resid <= 1e-10 * lam, "mode {n}: {resid:e}");
    }
    for m in 0..8 {
        for n in 0..8 {
            let ip = grid.interior_dot(&basis.eigenvector(m), &basis.eigenvector(n));
            let expected = if m == n { 1.0 } else { 0.0 };
            assert!((ip - expected).abs() < 1e-10, "({m}, {n}): {ip}");
        }
    }
}

#[test]
fn sign_convention_makes_leading_entries_positive() {
    let basis = reference_problem().basis();
    for n in 0..basis.n_modes() {
        let v = basis.eigenvector(n);
        let first = v.iter().find(|x| x.abs() > 1e-12).unwrap();
        assert!(*first > 0.0, "mode {n}");
    }
}

#[test]
fn powers_follow_the_definition() {
    let basis = reference_problem().basis();
    let e1 = SpectralCoefficients::unit(basis.n_modes(), 0);
    assert_eq!(basis.fractional_power_apply(&e1, 0.0).unwrap(), e1);
    let p = basis.fractional_power_apply(&e1, 1.0).unwrap();
    assert_eq!(p.coeffs[0], basis.eigenvalue(0));
    assert!(p.coeffs[1..].iter().all(|&c| c == 0.0));
    assert!((basis.sobolev_norm(&e1, Space::Hs) - basis.eigenvalue(0).sqrt()).abs() < 1e-14);
    assert!((basis.sobolev_norm(&e1, Space::HminusS) - basis.eigenvalue(0).sqrt().recip()).abs() < 1e-14);
    assert!(basis.fractional_power_apply(&e1, -0.5).is_err());
}

#[test]
fn parseval_for_band_limited_functions() {
    let problem = reference_problem();
    let basis = problem.basis();
    let grid = problem.grid();
    let a: Vec<f64> = (0..basis.n_modes()).map(|n| (n as f64 + 1.0).recip()).collect();
    let b: Vec<f64> = (0..basis.n_modes()).map(|n| ((n as f64) * 0.7).cos()).collect();
    let grid_ip = grid.interior_dot(&basis.synthesize(&a), &basis.synthesize(&b));
    let coeff_ip: f64 = a.iter().zip(&b).map(|(x, y)| x * y).sum();
    assert!((grid_ip - coeff_ip).abs() < 1e-10 * coeff_ip.abs().max(1.0));
}

#[test]
fn traces_agree_with_normal_derivative_of_synthesized_field() {
    let problem = reference_problem();
    let basis = problem.basis();
    let coeffs: Vec<f64> = (0..basis.n_modes()).map(|n| (-(n as f64) / 6.0).exp()).collect();
    let field = mgtlab::GridFunction::from_interior(problem.grid(), basis.synthesize(&coeffs));
    let direct = problem.operator().normal_derivative(&field);
    let series = basis.synthesize_trace(&coeffs);
    assert!(rel_l2(&series, &direct) < 1e-10);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn gelfand_triple_embeddings(coeffs in prop::collection::vec(-10.0f64..10.0, 1..=16)) {
        let basis = small_problem().basis();
        let u = SpectralCoefficients::l2(coeffs);
        let l2 = basis.sobolev_norm(&u, Space::L2);
        let hs = basis.sobolev_norm(&u, Space::Hs);
        let hm = basis.sobolev_norm(&u, Space::HminusS);
        let c = basis.eigenvalue(0).sqrt().recip();
        prop_assert!(hm <= c * l2 * (1.0 + 1e-12));
        prop_assert!(l2 <= c * hs * (1.0 + 1e-12));
        prop_assert!(l2 * l2 <= hs * hm * (1.0 + 1e-12));
    }

    #[test]
    fn half_powers_compose(coeffs in prop::collection::vec(-10.0f64..10.0, 1..=16)) {
        let basis = small_problem().basis();
        let u = SpectralCoefficients::l2(coeffs);
        let twice = basis.fractional_power_apply(&basis.fractional_power_apply(&u, 0.5).unwrap(), 0.5).unwrap();
        let once = basis.fractional_power_apply(&u, 1.0).unwrap();
        for (a, b) in twice.coeffs.iter().zip(&once.coeffs) {
            prop_assert!((a - b).abs() <= 1e-12 * b.abs().max(1.0));
        }
    }

    #[test]
    fn projection_inverts_synthesis(coeffs in prop::collection::vec(-5.0f64..5.0, 16)) {
        let basis = small_problem().basis();
        let back = basis.project(&basis.synthesize(&coeffs));
        for (a, b) in back.iter().zip(&coeffs) {
            prop_assert!((a - b).abs() < 1e-10);
        }
    }
}
