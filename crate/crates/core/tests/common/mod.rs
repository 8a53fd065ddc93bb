//! Independent oracles and fixtures shared by the integration tests.
// Frozen oracle values keep every digit of the high-precision source.
#![allow(dead_code, clippy::excessive_precision, clippy::approx_constant)]

use std::sync::OnceLock;

use mgtlab::forward::{ControlBasis, ControlSignal};
use mgtlab::{GridSpec, ModelParams, Problem};
use num_complex::Complex64;
use ode_solvers::{Dop853, System, Vector3};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Horizon of the reference configuration.
pub const T_REF: f64 = 4.0;
/// Exterior control set of the reference configuration.
pub const REGION: (f64, f64) = (1.2, 1.8);

pub fn reference_params() -> ModelParams {
    ModelParams::new(1.2, 10.0, 1.0, 0.6).unwrap()
}

/// s = 0.6, α = 1.2, b = 10, c = 1 on Ω = (−1, 1) with 256 cells and 64 modes.
pub fn reference_problem() -> &'static Problem {
    static CELL: OnceLock<Problem> = OnceLock::new();
    CELL.get_or_init(|| Problem::new(reference_params(), &GridSpec::default(), 64).unwrap())
}

/// The reference configuration with 128 modes, for mode-doubling checks.
pub fn doubled_problem() -> &'static Problem {
    static CELL: OnceLock<Problem> = OnceLock::new();
    CELL.get_or_init(|| Problem::new(reference_params(), &GridSpec::default(), 128).unwrap())
}

/// A small configuration for property tests.
pub fn small_problem() -> &'static Problem {
    static CELL: OnceLock<Problem> = OnceLock::new();
    CELL.get_or_init(|| {
        let params = ModelParams::new(4.0, 2.0, 1.0, 0.5).unwrap();
        Problem::new(params, &GridSpec { n_interior: 64, ..GridSpec::default() }, 16).unwrap()
    })
}

pub fn reference_controls(problem: &Problem, panels: usize) -> ControlBasis {
    ControlBasis::new(problem.grid(), REGION, T_REF, 2, panels).unwrap()
}

/// A fixed smooth control used across tests.
pub fn reference_signal(problem: &Problem) -> ControlSignal {
    ControlSignal::new(reference_controls(problem, 64), vec![0.3, -0.7, 1.1, 0.4, -0.2, 0.9])
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn rel_l2(a: &[f64], reference: &[f64]) -> f64 {
    let num: f64 = a.iter().zip(reference).map(|(x, y)| (x - y).powi(2)).sum();
    let den: f64 = reference.iter().map(|y| y * y).sum();
    (num / den).sqrt()
}

/// Roots of λ³ + 4λ² + 20λ + 10 (α = 4, b = 2, c = 1, λ_n = 10), frozen from a
/// 40-digit polynomial root finder.
pub const FROZEN_ROOTS: [(f64, f64); 3] = [
    (-0.5526437320261593142247616, 0.0),
    (-1.723678133986920342887619, 3.888929654398306599833387),
    (-1.723678133986920342887619, -3.888929654398306599833387),
];

/// `C_{1,1/2} = 1/π` and `C_{2,1/2} = 1/(2π)`, frozen at 25 digits.
pub const CNS_1D_HALF: f64 = 0.3183098861837906715377675;
pub const CNS_2D_HALF: f64 = 0.1591549430918953357688838;

/// `(−Δ)^s (1 − x²)_+^s = Γ(2s + 1)` on (−1, 1); frozen for s = 0.6.
pub const TORSION_CONSTANT_S06: f64 = 1.101802490879712732769142;

struct ModeOde {
    alpha: f64,
    b: f64,
    c2: f64,
    lambda: f64,
}

impl System<f64, Vector3<f64>> for ModeOde {
    fn system(&self, _t: f64, y: &Vector3<f64>, dy: &mut Vector3<f64>) {
        dy[0] = y[1];
        dy[1] = y[2];
        dy[2] = -self.alpha * y[2] - self.b * self.lambda * y[1] - self.c2 * self.lambda * y[0];
    }
}

/// `(w, w′, w″)` of `w‴ + αw″ + bλw′ + c²λw = 0` at each of `times`
/// (ascending, starting at or after 0) by an 8th-order Dormand–Prince
/// integrator.
pub fn mode_ode_oracle(params: &ModelParams, lambda: f64, data: [f64; 3], times: &[f64]) -> Vec<[f64; 3]> {
    let sys = || ModeOde { alpha: params.alpha(), b: params.b(), c2: params.c().powi(2), lambda };
    let mut y = Vector3::new(data[0], data[1], data[2]);
    let mut t0 = 0.0;
    let mut out = Vec::with_capacity(times.len());
    for &t in times {
        if t > t0 {
            let mut solver = Dop853::new(sys(), t0, t, 0.0, y, 1e-13, 1e-15);
            solver.integrate().expect("oracle integration");
            y = *solver.results().get().1.last().unwrap();
            t0 = t;
        }
        out.push([y[0], y[1], y[2]]);
    }
    out
}

/// `∫_a^b f` by tanh–sinh quadrature on `pieces` equal subintervals.
pub fn adaptive_integral(f: impl Fn(f64) -> f64, a: f64, b: f64, pieces: usize) -> f64 {
    let h = (b - a) / pieces as f64;
    (0..pieces)
        .map(|i| {
            let lo = a + i as f64 * h;
            quadrature::double_exponential::integrate(&f, lo, lo + h, 1e-14).integral
        })
        .sum()
}

/// `∫_0^H e^{−zτ} k(τ) dτ` with both parts integrated separately.
pub fn laplace_oracle(k: impl Fn(f64) -> f64, z: Complex64, horizon: f64, pieces: usize) -> Complex64 {
    let re = adaptive_integral(|t| (-z.re * t).exp() * (z.im * t).cos() * k(t), 0.0, horizon, pieces);
    let im = adaptive_integral(|t| -(-z.re * t).exp() * (z.im * t).sin() * k(t), 0.0, horizon, pieces);
    Complex64::new(re, im)
}

/// `C ∫_0^∞ (2u(x) − u(x+r) − u(x−r)) r^{−1−2s} dr` for `u` supported in
/// [−1, 1], split at the points where `x ± r` leaves the support. Below
/// `r = δ` the second difference is replaced by its Taylor term `−u″(x) r²`,
/// which avoids cancellation.
pub fn fractional_laplacian_oracle(u: impl Fn(f64) -> f64, u_xx: f64, x: f64, s: f64, cns: f64) -> f64 {
    const DELTA: f64 = 1e-4;
    let f = |r: f64| (2.0 * u(x) - u(x + r) - u(x - r)) * r.powf(-1.0 - 2.0 * s);
    let (near, far) = (1.0 - x.abs(), 1.0 + x.abs());
    let small = -u_xx * DELTA.powf(2.0 - 2.0 * s) / (2.0 - 2.0 * s);
    let inner = adaptive_integral(f, DELTA, near, 4) + adaptive_integral(f, near, far, 4);
    let tail = 2.0 * u(x) * far.powf(-2.0 * s) / (2.0 * s);
    cns * (small + inner + tail)
}
