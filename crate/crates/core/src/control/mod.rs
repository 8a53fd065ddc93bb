//! Duality between the controlled forward problem and the backward dual
//! problem, and the controllability experiments built on it.
//!
//! For a forward state `u` driven by `g` and any dual trajectory `ψ`, the
//! boundary form
//!
//! ```text
//! 𝔅(t) = (u_tt, ψ) − (u_t, ψ_t) + (u, ψ_tt) + α[(u_t, ψ) − (u, ψ_t)] + b((−Δ)^{s/2}u, (−Δ)^{s/2}ψ)
//! ```
//!
//! satisfies `𝔅′(t) = −∫ (c² g + b g_t) N_s ψ dx`, hence
//! `𝔅(T) − 𝔅(0) = −∫_0^T ∫ (c² g + b g_t) N_s ψ dx dt`.

pub mod laplace;
pub mod matrices;
pub mod synthesis;

use crate::dual::{solve_dual, DualData};
use crate::error::{Error, Result};
use crate::forward::{control_forcing, solve, ControlSignal, StateTriple, POINTS_PER_PANEL};
use crate::problem::Problem;
use crate::quadrature::PanelRule;

pub use laplace::{laplace_f, laplace_f_envelope, laplace_kernels_eval};
pub use matrices::{moment_gram_min_eigenvalues, spectral_matrices, ControllabilityMatrices};
pub use synthesis::{synthesize_control, ControlToStateMap, SweepRow, Synthesis};

/// `𝔅` for a forward state and a dual state given in the same basis.
pub fn boundary_form(problem: &Problem, u: &StateTriple, psi: &StateTriple) -> f64 {
    let alpha = problem.params().alpha();
    let b = problem.params().b();
    (0..problem.n_modes())
        .map(|n| {
            let get = |c: &crate::spectral::SpectralCoefficients| c.coeffs.get(n).copied().unwrap_or(0.0);
            let (u0, u1, u2) = (get(&u.u), get(&u.ut), get(&u.utt));
            let (p0, p1, p2) = (get(&psi.u), get(&psi.ut), get(&psi.utt));
            u2 * p0 - u1 * p1 + u0 * p2 + alpha * (u1 * p0 - u0 * p1) + b * problem.eigenvalue(n) * u0 * p0
        })
        .sum()
}

/// `∫_0^T ∫ (c² g + b g_t) N_s ψ dx dt` by panel quadrature on the control's
/// time grid.
pub fn control_pairing(problem: &Problem, g: &ControlSignal, dual: &DualData) -> Result<f64> {
    if g.is_zero() {
        return Ok(0.0);
    }
    let horizon = g.horizon();
    let rule = PanelRule::new(0.0, horizon, g.basis().time_panels(), POINTS_PER_PANEL);
    let pairings = g.basis().trace_pairings(problem.basis());
    let mut total = 0.0;
    for (&t, &w) in rule.nodes().iter().zip(rule.weights()) {
        let forcing = control_forcing(problem, g, &pairings, t);
        let psi = solve_dual(problem, dual, t)?;
        total += w * forcing.iter().zip(&psi.u.coeffs).map(|(f, p)| f * p).sum::<f64>();
    }
    Ok(total)
}

fn check_horizons(g: &ControlSignal, dual: &DualData) -> Result<()> {
    if (g.horizon() - dual.horizon).abs() > 1e-12 * dual.horizon {
        return Err(Error::Config(format!(
            "control horizon {} differs from dual horizon {}",
            g.horizon(),
            dual.horizon
        )));
    }
    Ok(())
}

/// Both sides of the duality identity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DualityReport {
    pub boundary_initial: f64,
    pub boundary_final: f64,
    pub pairing: f64,
    /// `|𝔅(T) − 𝔅(0) + pairing| / max(|𝔅(T) − 𝔅(0)|, |pairing|)`.
    pub residual: f64,
}

pub fn duality_residual(
    problem: &Problem,
    g: &ControlSignal,
    initial: &StateTriple,
    dual: &DualData,
) -> Result<DualityReport> {
    check_horizons(g, dual)?;
    let horizon = dual.horizon;
    let u_final = solve(problem, initial, g, horizon)?;
    let boundary_initial = boundary_form(problem, initial, &solve_dual(problem, dual, 0.0)?);
    let boundary_final = boundary_form(problem, &u_final, &solve_dual(problem, dual, horizon)?);
    let pairing = control_pairing(problem, g, dual)?;
    let jump = boundary_final - boundary_initial;
    let scale = jump.abs().max(pairing.abs());
    let residual = if scale == 0.0 { 0.0 } else { (jump + pairing).abs() / scale };
    Ok(DualityReport { boundary_initial, boundary_final, pairing, residual })
}

/// `𝔅(0) − ∫∫ (c² g + b g_t) N_s ψ`: zero for every dual trajectory exactly
/// when `g` steers `(u0, u1, u2)` to rest at `T`.
pub fn null_controllability_pairing(
    problem: &Problem,
    initial: &StateTriple,
    g: &ControlSignal,
    dual: &DualData,
) -> Result<f64> {
    check_horizons(g, dual)?;
    let at_zero = boundary_form(problem, initial, &solve_dual(problem, dual, 0.0)?);
    Ok(at_zero - control_pairing(problem, g, dual)?)
}

/// Final data of the dual trajectory `ψ = e^{λ_{n,1}(T−t)} φ_n`.
pub fn real_root_trajectory(problem: &Problem, n: usize, horizon: f64) -> Result<DualData> {
    let m = problem.n_modes();
    if n >= m {
        return Err(Error::Domain(format!("mode {n} out of range (basis has {m})")));
    }
    let l1 = problem.kernel(n).mode().root_real();
    let mut psi = [vec![0.0; m], vec![0.0; m], vec![0.0; m]];
    psi[0][n] = 1.0;
    psi[1][n] = l1;
    psi[2][n] = l1 * l1;
    let [a, b, c] = psi;
    DualData::new(a, b, c, horizon)
}

/// `𝔅(0)` for the trajectory `e^{λ_{n,1}(T−t)} φ_n` in closed form:
/// `e^{λ_{n,1}T} (u2 + λ_{n,1}u1 + λ_{n,1}²u0 + α(u1 + λ_{n,1}u0) + bλ_n u0)`.
pub fn moment_lhs(problem: &Problem, n: usize, u0: f64, u1: f64, u2: f64, horizon: f64) -> f64 {
    let l1 = problem.kernel(n).mode().root_real();
    let alpha = problem.params().alpha();
    let b = problem.params().b();
    (l1 * horizon).exp() * (u2 + l1 * u1 + l1 * l1 * u0 + alpha * (u1 + l1 * u0) + b * problem.eigenvalue(n) * u0)
}
