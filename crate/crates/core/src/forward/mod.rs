//! Series solutions of the forward problem: the homogeneous solution driven by
//! initial data and the solution driven by an exterior control.

pub mod control;
pub mod stepping;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::modes::KernelSet;
use crate::problem::Problem;
use crate::quadrature::PanelRule;
use crate::spectral::{Space, SpectralCoefficients};

pub use control::{build_lifted_field, lift_constant, ControlBasis, ControlSignal, ControlSpec, LiftedField};

/// Gauss points per time panel of every Duhamel integral.
pub const POINTS_PER_PANEL: usize = 4;

/// Spectral coefficients of `(u, u_t, u_tt)` at one time.
#[derive(Debug, Clone, PartialEq)]
pub struct StateTriple {
    pub u: SpectralCoefficients,
    pub ut: SpectralCoefficients,
    pub utt: SpectralCoefficients,
    pub time: f64,
}

impl StateTriple {
    pub fn zeros(n_modes: usize, time: f64) -> Self {
        StateTriple {
            u: SpectralCoefficients::zeros(n_modes),
            ut: SpectralCoefficients::zeros(n_modes),
            utt: SpectralCoefficients::zeros(n_modes),
            time,
        }
    }

    pub fn from_vecs(u: Vec<f64>, ut: Vec<f64>, utt: Vec<f64>, time: f64) -> Self {
        StateTriple {
            u: SpectralCoefficients::l2(u),
            ut: SpectralCoefficients::l2(ut),
            utt: SpectralCoefficients::l2(utt),
            time,
        }
    }

    pub fn len(&self) -> usize {
        self.u.len()
    }

    pub fn is_empty(&self) -> bool {
        self.u.is_empty()
    }

    /// Mode-wise sum; the time of `self` is kept.
    pub fn add(&self, other: &StateTriple) -> StateTriple {
        let sum = |a: &SpectralCoefficients, b: &SpectralCoefficients| {
            SpectralCoefficients::new(a.coeffs.iter().zip(&b.coeffs).map(|(x, y)| x + y).collect(), a.space)
        };
        StateTriple { u: sum(&self.u, &other.u), ut: sum(&self.ut, &other.ut), utt: sum(&self.utt, &other.utt), time: self.time }
    }

    pub fn scaled(&self, factor: f64) -> StateTriple {
        let sc = |a: &SpectralCoefficients| SpectralCoefficients::new(a.coeffs.iter().map(|x| x * factor).collect(), a.space);
        StateTriple { u: sc(&self.u), ut: sc(&self.ut), utt: sc(&self.utt), time: self.time }
    }

    pub fn truncated(&self, n: usize) -> StateTriple {
        StateTriple { u: self.u.truncated(n), ut: self.ut.truncated(n), utt: self.utt.truncated(n), time: self.time }
    }

    /// Largest absolute coefficient over the three components.
    pub fn max_abs(&self) -> f64 {
        self.u.coeffs.iter().chain(&self.ut.coeffs).chain(&self.utt.coeffs).fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `(u, u_t, u_tt)` stacked mode by mode with weights `(1, λ_n^{−1/2}, λ_n^{−1/2})`,
    /// the coordinates of `L² × H^{−s} × H^{−s}`.
    pub fn weighted(&self, eigenvalues: &[f64]) -> Vec<f64> {
        let mut out = Vec::with_capacity(3 * self.len());
        for n in 0..self.len() {
            let w = eigenvalues[n].sqrt().recip();
            out.extend([self.u.coeffs[n], w * self.ut.coeffs[n], w * self.utt.coeffs[n]]);
        }
        out
    }
}

/// Amplitudes `a_{n,j}` of `w_n(t) = Σ_j a_{n,j} e^{λ_{n,j} t}` for the data
/// `(u_{0,n}, u_{1,n}, u_{2,n})`.
pub fn mode_coefficients(kernels: &KernelSet, u0: f64, u1: f64, u2: f64) -> [Complex64; 3] {
    let (a, b, c) = (kernels.coefficients_a(), kernels.coefficients_b(), kernels.coefficients_c());
    [0, 1, 2].map(|j| a[j] * u0 + b[j] * u1 + c[j] * u2)
}

fn check_len(problem: &Problem, c: &SpectralCoefficients, what: &str) -> Result<()> {
    if c.len() > problem.n_modes() {
        return Err(Error::Domain(format!("{what} has {} coefficients, basis has {}", c.len(), problem.n_modes())));
    }
    Ok(())
}

/// `w_n(t) = A_n(t) u_{0,n} + B_n(t) u_{1,n} + C_n(t) u_{2,n}` with its first
/// two time derivatives.
pub fn solve_homogeneous(
    problem: &Problem,
    u0: &SpectralCoefficients,
    u1: &SpectralCoefficients,
    u2: &SpectralCoefficients,
    t: f64,
) -> Result<StateTriple> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::Domain(format!("time t = {t} must be non-negative")));
    }
    for (c, name) in [(u0, "u0"), (u1, "u1"), (u2, "u2")] {
        check_len(problem, c, name)?;
    }
    let n = problem.n_modes();
    let get = |c: &SpectralCoefficients, i: usize| c.coeffs.get(i).copied().unwrap_or(0.0);
    let mut out = [vec![0.0; n], vec![0.0; n], vec![0.0; n]];
    for i in 0..n {
        let (x0, x1, x2) = (get(u0, i), get(u1, i), get(u2, i));
        if x0 == 0.0 && x1 == 0.0 && x2 == 0.0 {
            continue;
        }
        for (d, o) in out.iter_mut().enumerate() {
            let k = problem.kernel(i).eval(t, d as u32);
            o[i] = k.a * x0 + k.b * x1 + k.c * x2;
        }
    }
    let [u, ut, utt] = out;
    Ok(StateTriple::from_vecs(u, ut, utt, t))
}

/// `v_n(t) = λ_n^{−1} ∫_0^t G_n(τ) (C_n‴ + αC_n″)(t − τ) dτ` with
/// `G_n = (g, N_s φ_n)` over the band, plus
/// `v_n′ = λ_n^{−1} ∫ G_n (C_n⁗ + αC_n‴)(t − τ) dτ` and
/// `v_n″ = −b G_n(t) + λ_n^{−1} ∫ G_n (C_n⁽⁵⁾ + αC_n⁽⁴⁾)(t − τ) dτ`.
///
/// Integrals use `POINTS_PER_PANEL`-point Gauss–Legendre panels on the
/// control's time grid.
pub fn solve_controlled(problem: &Problem, g: &ControlSignal, t: f64) -> Result<StateTriple> {
    let horizon = g.horizon();
    if !(0.0..=horizon).contains(&t) {
        return Err(Error::Domain(format!("time t = {t} outside [0, {horizon}]")));
    }
    let n = problem.n_modes();
    if g.is_zero() || t == 0.0 {
        return Ok(StateTriple::zeros(n, t));
    }
    let rule = PanelRule::clipped(horizon, g.basis().time_panels(), POINTS_PER_PANEL, t);
    if rule.is_empty() {
        return Err(Error::Quad(format!("no quadrature panels cover [0, {t}]")));
    }
    let pairings = g.basis().trace_pairings(problem.basis());
    let forcing: Vec<Vec<f64>> = rule.nodes().iter().map(|&tau| g.mode_pairings(&pairings, tau, 0)).collect();
    let now = g.mode_pairings(&pairings, t, 0);
    let alpha = problem.params().alpha();
    let b = problem.params().b();

    let rows: Vec<[f64; 3]> = (0..n)
        .into_par_iter()
        .map(|i| {
            let k = problem.kernel(i);
            let lam = problem.eigenvalue(i);
            let mut acc = [0.0; 3];
            for (q, (&tau, &w)) in rule.nodes().iter().zip(rule.weights()).enumerate() {
                let gn = forcing[q][i];
                if gn == 0.0 {
                    continue;
                }
                let c: Vec<f64> = (2..=5).map(|d| k.eval(t - tau, d).c).collect();
                acc[0] += w * gn * (c[1] + alpha * c[0]);
                acc[1] += w * gn * (c[2] + alpha * c[1]);
                acc[2] += w * gn * (c[3] + alpha * c[2]);
            }
            [acc[0] / lam, acc[1] / lam, acc[2] / lam - b * now[i]]
        })
        .collect();
    Ok(StateTriple::from_vecs(
        rows.iter().map(|r| r[0]).collect(),
        rows.iter().map(|r| r[1]).collect(),
        rows.iter().map(|r| r[2]).collect(),
        t,
    ))
}

/// Superposition of the homogeneous and controlled solutions.
pub fn solve(problem: &Problem, initial: &StateTriple, g: &ControlSignal, t: f64) -> Result<StateTriple> {
    let free = solve_homogeneous(problem, &initial.u, &initial.ut, &initial.utt, t)?;
    let forced = solve_controlled(problem, g, t)?;
    Ok(free.add(&forced))
}

/// `G̃_n(t) = (c² g + b g_t, N_s φ_n)`: the exterior forcing of mode `n`.
pub fn control_forcing(problem: &Problem, g: &ControlSignal, pairings: &[Vec<f64>], t: f64) -> Vec<f64> {
    let c2 = problem.params().c().powi(2);
    let b = problem.params().b();
    let g0 = g.mode_pairings(pairings, t, 0);
    let g1 = g.mode_pairings(pairings, t, 1);
    g0.iter().zip(&g1).map(|(x, y)| c2 * x + b * y).collect()
}

/// Outcome of the regularity probe.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegularityReport {
    /// `sup_t ‖v(·,t)‖_{H^s} / (S + ‖g(·,t)‖)` with `S = sup_t ‖g_ttt + α g_tt‖`.
    pub ratio: f64,
    pub state_sup: f64,
    pub forcing_sup: f64,
}

pub fn regularity_estimate_probe(problem: &Problem, g: &ControlSignal, t_grid: &[f64]) -> Result<RegularityReport> {
    if g.is_zero() {
        return Ok(RegularityReport { ratio: 0.0, state_sup: 0.0, forcing_sup: 0.0 });
    }
    let grid = problem.grid();
    let alpha = problem.params().alpha();
    let forcing_sup = t_grid
        .iter()
        .map(|&t| {
            let v3 = g.values(t, 3);
            let v2 = g.values(t, 2);
            let f: Vec<f64> = v3.iter().zip(&v2).map(|(a, b)| a + alpha * b).collect();
            grid.exterior_norm(&f)
        })
        .fold(0.0, f64::max);
    let mut ratio: f64 = 0.0;
    let mut state_sup: f64 = 0.0;
    for &t in t_grid {
        let state = solve_controlled(problem, g, t)?;
        let hs = problem.basis().sobolev_norm(&state.u, Space::Hs);
        let gn = grid.exterior_norm(&g.values(t, 0));
        state_sup = state_sup.max(hs);
        if forcing_sup + gn > 0.0 {
            ratio = ratio.max(hs / (forcing_sup + gn));
        }
    }
    Ok(RegularityReport { ratio, state_sup, forcing_sup })
}
