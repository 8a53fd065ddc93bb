//! The backward dual problem
//!
//! ```text
//! −ψ_ttt + α ψ_tt + c² (−Δ)^s ψ − b (−Δ)^s ψ_t = 0  in Ω × (0, T),
//! ψ = 0 outside Ω,  (ψ, ψ_t, ψ_tt)(T) = (ψ0, −ψ1, ψ2),
//! ```
//!
//! solved mode by mode. The final condition `ψ_t(T) = −ψ1` fixes the sign of
//! the middle kernel: `ψ_n(t) = ψ_{0,n} A_n(T−t) + ψ_{1,n} B_n(T−t) + ψ_{2,n} C_n(T−t)`,
//! i.e. `ψ_{0,n} D_n − ψ_{1,n} E_n + ψ_{2,n} F_n` in the dual aliases.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::forward::StateTriple;
use crate::problem::Problem;
use crate::spectral::{Space, SpectralCoefficients};

/// Complex-time margin as a fraction of the horizon.
pub const DEFAULT_MARGIN_FRACTION: f64 = 0.05;

/// Final data `(ψ0, ψ1, ψ2)` imposed at `t = T`.
#[derive(Debug, Clone, PartialEq)]
pub struct DualData {
    pub psi0: SpectralCoefficients,
    pub psi1: SpectralCoefficients,
    pub psi2: SpectralCoefficients,
    pub horizon: f64,
}

impl DualData {
    pub fn new(psi0: Vec<f64>, psi1: Vec<f64>, psi2: Vec<f64>, horizon: f64) -> Result<Self> {
        if !(horizon > 0.0 && horizon.is_finite()) {
            return Err(Error::Domain(format!("horizon T = {horizon} must be positive")));
        }
        Ok(DualData {
            psi0: SpectralCoefficients::new(psi0, Space::Hs),
            psi1: SpectralCoefficients::new(psi1, Space::Hs),
            psi2: SpectralCoefficients::l2(psi2),
            horizon,
        })
    }

    pub fn zeros(n_modes: usize, horizon: f64) -> Result<Self> {
        DualData::new(vec![0.0; n_modes], vec![0.0; n_modes], vec![0.0; n_modes], horizon)
    }

    fn get(&self, n: usize) -> (f64, f64, f64) {
        let g = |c: &SpectralCoefficients| c.coeffs.get(n).copied().unwrap_or(0.0);
        (g(&self.psi0), g(&self.psi1), g(&self.psi2))
    }

    fn len(&self) -> usize {
        self.psi0.len().max(self.psi1.len()).max(self.psi2.len())
    }

    /// `‖ψ0‖²_{H^s} + ‖ψ1‖²_{H^s} + ‖ψ2‖²_{L²}`.
    pub fn energy(&self, eigenvalues: &[f64]) -> f64 {
        (0..self.len())
            .map(|n| {
                let (a, b, c) = self.get(n);
                eigenvalues[n] * (a * a + b * b) + c * c
            })
            .sum()
    }
}

fn check(problem: &Problem, data: &DualData, t: f64) -> Result<()> {
    if data.len() > problem.n_modes() {
        return Err(Error::Domain(format!("dual data has {} modes, basis has {}", data.len(), problem.n_modes())));
    }
    if !(0.0..=data.horizon).contains(&t) {
        return Err(Error::Domain(format!("time t = {t} outside [0, {}]", data.horizon)));
    }
    Ok(())
}

/// `d^order/dt^order ψ_n(t)` for every mode; each derivative in `t` flips
/// the sign of the kernel derivative in `T − t`.
fn mode_values(problem: &Problem, data: &DualData, t: f64, order: u32) -> Vec<f64> {
    let sign = if order % 2 == 0 { 1.0 } else { -1.0 };
    (0..problem.n_modes())
        .map(|n| {
            let (a, b, c) = data.get(n);
            if a == 0.0 && b == 0.0 && c == 0.0 {
                return 0.0;
            }
            let k = problem.kernel(n).eval(data.horizon - t, order);
            sign * (a * k.a + b * k.b + c * k.c)
        })
        .collect()
}

pub fn solve_dual(problem: &Problem, data: &DualData, t: f64) -> Result<StateTriple> {
    check(problem, data, t)?;
    Ok(StateTriple::from_vecs(
        mode_values(problem, data, t, 0),
        mode_values(problem, data, t, 1),
        mode_values(problem, data, t, 2),
        t,
    ))
}

/// `ψ_ttt` in spectral coordinates.
pub fn dual_third_derivative(problem: &Problem, data: &DualData, t: f64) -> Result<Vec<f64>> {
    check(problem, data, t)?;
    Ok(mode_values(problem, data, t, 3))
}

/// Energy ratios of the dual trajectory relative to its final data.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DualEnergyCertificate {
    /// `sup_t (‖ψ‖²_{H^s} + ‖ψ_t‖²_{H^s} + ‖ψ_tt‖²_{L²}) / E(T)`.
    pub energy_ratio: f64,
    /// `sup_t ‖ψ_ttt‖²_{H^{−s}} / E(T)`.
    pub third_derivative_ratio: f64,
    /// `E(T) = ‖ψ0‖²_{H^s} + ‖ψ1‖²_{H^s} + ‖ψ2‖²_{L²}`.
    pub data_energy: f64,
}

pub fn dual_energy_check(problem: &Problem, data: &DualData, t_grid: &[f64]) -> Result<DualEnergyCertificate> {
    let basis = problem.basis();
    let data_energy = data.energy(basis.eigenvalues());
    let mut energy_ratio: f64 = 0.0;
    let mut third: f64 = 0.0;
    if data_energy == 0.0 {
        return Ok(DualEnergyCertificate { energy_ratio, third_derivative_ratio: third, data_energy });
    }
    for &t in t_grid {
        let s = solve_dual(problem, data, t)?;
        let e = basis.sobolev_norm(&s.u, Space::Hs).powi(2)
            + basis.sobolev_norm(&s.ut, Space::Hs).powi(2)
            + basis.sobolev_norm(&s.utt, Space::L2).powi(2);
        let p3 = SpectralCoefficients::l2(dual_third_derivative(problem, data, t)?);
        energy_ratio = energy_ratio.max(e / data_energy);
        third = third.max(basis.sobolev_norm(&p3, Space::HminusS).powi(2) / data_energy);
    }
    Ok(DualEnergyCertificate { energy_ratio, third_derivative_ratio: third, data_energy })
}

/// `N_s ψ(·, t) = Σ_n ψ_n(t) N_s φ_n` on the exterior band.
pub fn dual_ns_series(problem: &Problem, data: &DualData, t: f64) -> Result<Vec<f64>> {
    check(problem, data, t)?;
    Ok(problem.basis().synthesize_trace(&mode_values(problem, data, t, 0)))
}

/// `Σ_n ‖N_s φ_n‖² / λ_n`: with the energy ratio `R` it bounds
/// `‖N_s ψ(·, t)‖² ≤ (Σ_n ‖N_s φ_n‖² / λ_n) · R · E(T)`.
pub fn trace_constant(problem: &Problem) -> f64 {
    let basis = problem.basis();
    let grid = problem.grid();
    (0..basis.n_modes()).map(|n| grid.exterior_norm(&basis.trace(n)).powi(2) / basis.eigenvalue(n)).sum()
}

/// Per-mode complex amplitudes `ψ_n(z)` at complex time `z`.
fn complex_mode_values(problem: &Problem, data: &DualData, z: Complex64) -> Vec<Complex64> {
    let w = Complex64::new(data.horizon, 0.0) - z;
    (0..problem.n_modes())
        .map(|n| {
            let (a, b, c) = data.get(n);
            if a == 0.0 && b == 0.0 && c == 0.0 {
                return Complex64::new(0.0, 0.0);
            }
            let [ka, kb, kc] = problem.kernel(n).eval_complex(w, 0);
            ka * a + kb * b + kc * c
        })
        .collect()
}

fn check_margin(data: &DualData, z: Complex64, margin: f64) -> Result<()> {
    if z.re > data.horizon - margin {
        return Err(Error::Domain(format!(
            "Re z = {} exceeds T − τ = {} (margin τ = {margin})",
            z.re,
            data.horizon - margin
        )));
    }
    Ok(())
}

/// `N_s ψ(·, z)` for complex `z` with `Re z ≤ T − margin`.
pub fn complex_time_ns(problem: &Problem, data: &DualData, z: Complex64, margin: f64) -> Result<Vec<Complex64>> {
    check_margin(data, z, margin)?;
    if data.len() > problem.n_modes() {
        return Err(Error::Domain(format!("dual data has {} modes, basis has {}", data.len(), problem.n_modes())));
    }
    let amps = complex_mode_values(problem, data, z);
    let basis = problem.basis();
    let mut out = vec![Complex64::new(0.0, 0.0); problem.grid().n_exterior()];
    for (n, a) in amps.iter().enumerate() {
        if a.norm() == 0.0 {
            continue;
        }
        for (o, v) in out.iter_mut().zip(basis.traces().column(n).iter()) {
            *o += a * v;
        }
    }
    Ok(out)
}

/// Termwise bound on `‖N_s ψ(·, z)‖`: each partial-fraction term is bounded by
/// its coefficient modulus times `e^{Re(λ_{n,j}(T − z))}`.
pub fn complex_time_envelope(problem: &Problem, data: &DualData, z: Complex64, margin: f64) -> Result<f64> {
    check_margin(data, z, margin)?;
    let w = Complex64::new(data.horizon, 0.0) - z;
    let grid = problem.grid();
    let basis = problem.basis();
    Ok((0..problem.n_modes())
        .map(|n| {
            let (a, b, c) = data.get(n);
            let k = problem.kernel(n);
            let roots = k.mode().roots();
            let (ca, cb, cc) = (k.coefficients_a(), k.coefficients_b(), k.coefficients_c());
            let amp: f64 = (0..3)
                .map(|j| {
                    (ca[j].norm() * a.abs() + cb[j].norm() * b.abs() + cc[j].norm() * c.abs()) * (roots[j] * w).re.exp()
                })
                .sum();
            amp * grid.exterior_norm(&basis.trace(n))
        })
        .sum())
}

/// Result of the Cauchy–Riemann probe on one band node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalyticityProbe {
    /// `|∂_x f + i ∂_y f|` (vanishes for analytic `f`).
    pub cauchy_riemann: f64,
    /// `|f′(z)|` from the same stencil, for scale.
    pub derivative: f64,
}

/// Centred differences of `z ↦ N_s ψ(x_k, z)` along both axes.
pub fn cauchy_riemann_probe(
    problem: &Problem,
    data: &DualData,
    z: Complex64,
    node: usize,
    step: f64,
    margin: f64,
) -> Result<AnalyticityProbe> {
    if node >= problem.grid().n_exterior() {
        return Err(Error::Grid(format!("band node {node} out of range")));
    }
    let f = |z: Complex64| complex_time_ns(problem, data, z, margin).map(|v| v[node]);
    let dx = (f(z + step)? - f(z - step)?) / (2.0 * step);
    let iy = Complex64::new(0.0, step);
    let dy = (f(z + iy)? - f(z - iy)?) / (2.0 * step);
    Ok(AnalyticityProbe { cauchy_riemann: (dx + Complex64::i() * dy).norm(), derivative: dx.norm() })
}
