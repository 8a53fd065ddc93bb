//! Laplace transforms of the dual kernels and the transform `F(z)` of the
//! exterior forcing.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::forward::{control_forcing, ControlSignal, POINTS_PER_PANEL};
use crate::modes::KernelSet;
use crate::problem::Problem;
use crate::quadrature::PanelRule;

/// Evaluation is refused within this distance of a pole.
pub const POLE_EXCLUSION: f64 = 1e-8;

/// `(G_k, H_k, I_k)(z) = Σ_j coef_j / (z − λ_{k,j})` for the coefficients of
/// `A_k, B_k, C_k`; `G_k` is the Laplace transform of `D_k = A_k`.
pub fn laplace_kernels_eval(kernels: &KernelSet, z: Complex64) -> Result<[Complex64; 3]> {
    let roots = kernels.mode().roots();
    if let Some(r) = roots.iter().find(|r| (z - **r).norm() < POLE_EXCLUSION) {
        return Err(Error::Domain(format!("z = {z} lies within {POLE_EXCLUSION:e} of the pole {r}")));
    }
    let (a, b, c) = (kernels.coefficients_a(), kernels.coefficients_b(), kernels.coefficients_c());
    let mut out = [Complex64::new(0.0, 0.0); 3];
    for j in 0..3 {
        let p = (z - roots[j]).inv();
        out[0] += a[j] * p;
        out[1] += b[j] * p;
        out[2] += c[j] * p;
    }
    Ok(out)
}

/// `F(z) = ∫_0^T (c² g + b g_t, N_s φ_n) e^{izt} dt` for mode `n`.
pub fn laplace_f(problem: &Problem, g: &ControlSignal, n: usize, z: Complex64) -> Result<Complex64> {
    if n >= problem.n_modes() {
        return Err(Error::Domain(format!("mode {n} out of range")));
    }
    if g.is_zero() {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let rule = PanelRule::new(0.0, g.horizon(), g.basis().time_panels(), POINTS_PER_PANEL);
    let pairings = g.basis().trace_pairings(problem.basis());
    Ok(rule
        .nodes()
        .iter()
        .zip(rule.weights())
        .map(|(&t, &w)| w * control_forcing(problem, g, &pairings, t)[n] * (Complex64::i() * z * t).exp())
        .sum())
}

/// `e^{|Im z| T} ∫_0^T |(c² g + b g_t, N_s φ_n)| dt`, an upper bound for `|F(z)|`.
pub fn laplace_f_envelope(problem: &Problem, g: &ControlSignal, n: usize, z: Complex64) -> f64 {
    let rule = PanelRule::new(0.0, g.horizon(), g.basis().time_panels(), POINTS_PER_PANEL);
    let pairings = g.basis().trace_pairings(problem.basis());
    let mass: f64 = rule
        .nodes()
        .iter()
        .zip(rule.weights())
        .map(|(&t, &w)| w * control_forcing(problem, g, &pairings, t)[n].abs())
        .sum();
    (z.im.abs() * g.horizon()).exp() * mass
}
