//! Per-mode algebra: roots of the characteristic cubic
//! `λ³ + αλ² + bλ_n λ + c²λ_n = 0`, the ξ factors and the time kernels
//! `A_n, B_n, C_n` (and their dual aliases `D = A`, `E = −B`, `F = C`).

use nalgebra::Matrix3;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::params::ModelParams;

/// Relative root separation below which the kernels are refused.
pub const REPEATED_ROOT_TOL: f64 = 1e-8;

/// Safety factor on the first-order root error bound.
const RESOLUTION_FACTOR: f64 = 100.0;

/// The roots `λ_{n,1}` (real) and `λ_{n,2} = conj(λ_{n,3})` with `Im λ_{n,2} > 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeTriple {
    lambda_n: f64,
    roots: [Complex64; 3],
    xi: [Complex64; 3],
}

fn cubic(params: &ModelParams, lambda_n: f64, z: Complex64) -> (Complex64, Complex64) {
    let (a, b, c2) = (params.alpha(), params.b() * lambda_n, params.c() * params.c() * lambda_n);
    let p = ((z + a) * z + b) * z + c2;
    let dp = (3.0 * z + 2.0 * a) * z + b;
    (p, dp)
}

/// Companion-matrix roots of the cubic, one Newton step each, then
/// symmetrization of the conjugate pair.
pub fn solve_characteristic_cubic(params: &ModelParams, lambda_n: f64) -> Result<ModeTriple> {
    if !(lambda_n > 0.0 && lambda_n.is_finite()) {
        return Err(Error::Domain(format!("lambda_n = {lambda_n} must be positive and finite")));
    }
    // Roots scale like √(bλ_n); solving for μ = λ/σ keeps the companion
    // matrix balanced across the whole spectrum.
    let sigma = (params.b() * lambda_n).sqrt().max(1.0);
    let a2 = params.alpha() / sigma;
    let a1 = params.b() * lambda_n / (sigma * sigma);
    let a0 = params.c() * params.c() * lambda_n / (sigma * sigma * sigma);
    #[rustfmt::skip]
    let companion = Matrix3::new(
        -a2, -a1, -a0,
        1.0, 0.0, 0.0,
        0.0, 1.0, 0.0,
    );
    let eig = companion.complex_eigenvalues();
    let mut raw: Vec<Complex64> = eig.iter().map(|z| z * sigma).collect();
    for z in raw.iter_mut() {
        let (p, dp) = cubic(params, lambda_n, *z);
        if dp.norm() > 0.0 {
            *z -= p / dp;
        }
    }

    // Clustered roots are computed with errors far above 1e−8 (about ε^{1/k}
    // for a k-fold cluster), so a pair also counts as repeated when it is not
    // resolved by the first-order error bound ε·Σ|terms| / |p′|.
    let uncertainty: Vec<f64> = raw
        .iter()
        .map(|&z| {
            let r = z.norm();
            let terms = r.powi(3) + params.alpha() * r * r + params.b() * lambda_n * r + params.c().powi(2) * lambda_n;
            RESOLUTION_FACTOR * f64::EPSILON * terms / cubic(params, lambda_n, z).1.norm()
        })
        .collect();
    let max_abs = raw.iter().map(|z| z.norm()).fold(0.0, f64::max);
    for i in 0..3 {
        for j in i + 1..3 {
            let sep = (raw[i] - raw[j]).norm();
            if sep < REPEATED_ROOT_TOL * (1.0 + max_abs) || sep < uncertainty[i] + uncertainty[j] {
                return Err(Error::NearlyRepeatedRoots { lambda_n, separation: sep / (1.0 + max_abs) });
            }
        }
    }

    raw.sort_by(|x, y| x.im.abs().total_cmp(&y.im.abs()));
    if raw[1].im == 0.0 || raw[2].im == 0.0 {
        return Err(Error::RootPattern { lambda_n, roots: [raw[0], raw[1], raw[2]] });
    }
    let real = Complex64::new(raw[0].re, 0.0);
    let re = 0.5 * (raw[1].re + raw[2].re);
    let im = 0.5 * (raw[1].im.abs() + raw[2].im.abs());
    let l2 = Complex64::new(re, im);
    let roots = [real, l2, l2.conj()];
    Ok(ModeTriple::from_roots(lambda_n, roots))
}

impl ModeTriple {
    fn from_roots(lambda_n: f64, roots: [Complex64; 3]) -> Self {
        let [l1, l2, l3] = roots;
        let xi = [(l1 - l2) * (l1 - l3), (l1 - l2) * (l2 - l3), (l1 - l3) * (l2 - l3)];
        ModeTriple { lambda_n, roots, xi }
    }

    pub fn lambda_n(&self) -> f64 {
        self.lambda_n
    }

    pub fn roots(&self) -> [Complex64; 3] {
        self.roots
    }

    /// `λ_{n,1}`.
    pub fn root_real(&self) -> f64 {
        self.roots[0].re
    }

    /// `λ_{n,2}`, the member of the pair with positive imaginary part.
    pub fn root_complex(&self) -> Complex64 {
        self.roots[1]
    }

    pub fn xi(&self) -> [Complex64; 3] {
        self.xi
    }

    /// Largest `|p(λ_{n,j})|` over the three roots.
    pub fn residual(&self, params: &ModelParams) -> f64 {
        self.roots.iter().map(|&z| cubic(params, self.lambda_n, z).0.norm()).fold(0.0, f64::max)
    }

    pub fn min_separation(&self) -> f64 {
        let [l1, l2, l3] = self.roots;
        (l1 - l2).norm().min((l1 - l3).norm()).min((l2 - l3).norm())
    }

    /// The largest real part among the roots (the slowest decay rate).
    pub fn max_real_part(&self) -> f64 {
        self.roots.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Values of the three kernels (or of one derivative of them) at a time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KernelValues {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

/// Partial-fraction coefficients of `A_n, B_n, C_n`: each kernel is
/// `Σ_j coef_j e^{λ_{n,j} t}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelSet {
    mode: ModeTriple,
    a: [Complex64; 3],
    b: [Complex64; 3],
    c: [Complex64; 3],
}

impl KernelSet {
    pub fn new(mode: ModeTriple) -> Self {
        let [l1, l2, l3] = mode.roots;
        let [x1, x2, x3] = mode.xi;
        KernelSet {
            mode,
            a: [l2 * l3 / x1, -(l1 * l3) / x2, l1 * l2 / x3],
            b: [-(l2 + l3) / x1, (l1 + l3) / x2, -(l1 + l2) / x3],
            c: [x1.inv(), -x2.inv(), x3.inv()],
        }
    }

    pub fn for_mode(params: &ModelParams, lambda_n: f64) -> Result<Self> {
        Ok(KernelSet::new(solve_characteristic_cubic(params, lambda_n)?))
    }

    pub fn mode(&self) -> &ModeTriple {
        &self.mode
    }

    pub fn coefficients_a(&self) -> [Complex64; 3] {
        self.a
    }

    pub fn coefficients_b(&self) -> [Complex64; 3] {
        self.b
    }

    pub fn coefficients_c(&self) -> [Complex64; 3] {
        self.c
    }

    /// `k`-th derivatives of `(A, B, C)` at complex time `z`.
    pub fn eval_complex(&self, z: Complex64, order: u32) -> [Complex64; 3] {
        let mut out = [Complex64::new(0.0, 0.0); 3];
        for j in 0..3 {
            let l = self.mode.roots[j];
            let w = l.powu(order) * (l * z).exp();
            out[0] += self.a[j] * w;
            out[1] += self.b[j] * w;
            out[2] += self.c[j] * w;
        }
        out
    }

    /// Real kernel values together with the largest discarded imaginary part
    /// relative to the magnitude of the terms.
    pub fn eval_with_residue(&self, t: f64, order: u32) -> (KernelValues, f64) {
        let mut out = [Complex64::new(0.0, 0.0); 3];
        let mut scale = [0.0f64; 3];
        for j in 0..3 {
            let l = self.mode.roots[j];
            let w = l.powu(order) * (l * t).exp();
            for (k, coef) in [self.a[j], self.b[j], self.c[j]].into_iter().enumerate() {
                let term = coef * w;
                out[k] += term;
                scale[k] += term.norm();
            }
        }
        let residue = (0..3)
            .map(|k| if scale[k] > 0.0 { out[k].im.abs() / scale[k] } else { 0.0 })
            .fold(0.0, f64::max);
        (KernelValues { a: out[0].re, b: out[1].re, c: out[2].re }, residue)
    }

    /// `k`-th derivatives of `(A, B, C)` at real time `t`.
    pub fn eval(&self, t: f64, order: u32) -> KernelValues {
        self.eval_with_residue(t, order).0
    }

    /// `k`-th derivatives of the dual kernels `(D, E, F) = (A, −B, C)`.
    pub fn eval_dual(&self, t: f64, order: u32) -> KernelValues {
        let k = self.eval(t, order);
        KernelValues { a: k.a, b: -k.b, c: k.c }
    }

    /// Left side of the mode ODE `K‴ + αK″ + bλ_n K′ + c²λ_n K` for each kernel.
    pub fn ode_residual(&self, params: &ModelParams, t: f64) -> KernelValues {
        let lam = self.mode.lambda_n;
        let k: Vec<KernelValues> = (0..4).map(|d| self.eval(t, d)).collect();
        let r = |f: fn(&KernelValues) -> f64| {
            f(&k[3]) + params.alpha() * f(&k[2]) + params.b() * lam * f(&k[1]) + params.c().powi(2) * lam * f(&k[0])
        };
        KernelValues { a: r(|v| v.a), b: r(|v| v.b), c: r(|v| v.c) }
    }
}

/// Deviation of the roots from their large-`λ_n` limits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AsymptoticsRow {
    pub lambda_n: f64,
    /// `λ_{n,1} + c²/b`.
    pub real_root_gap: f64,
    /// `Re λ_{n,2} + γ/2`.
    pub real_part_gap: f64,
    /// `|Im λ_{n,2}|/√(bλ_n) − 1`.
    pub imag_ratio_gap: f64,
    /// `λ_n/(Im λ_{n,2})² − 1/b`.
    pub growth_gap: f64,
}

pub fn asymptotics_report(params: &ModelParams, lambdas: &[f64]) -> Result<Vec<AsymptoticsRow>> {
    let cb = params.c() * params.c() / params.b();
    lambdas
        .iter()
        .map(|&lambda_n| {
            let m = solve_characteristic_cubic(params, lambda_n)?;
            let l2 = m.root_complex();
            Ok(AsymptoticsRow {
                lambda_n,
                real_root_gap: m.root_real() + cb,
                real_part_gap: l2.re + params.gamma() / 2.0,
                imag_ratio_gap: l2.im.abs() / (params.b() * lambda_n).sqrt() - 1.0,
                growth_gap: lambda_n / (l2.im * l2.im) - 1.0 / params.b(),
            })
        })
        .collect()
}

/// Names of the thirteen scaled kernel quantities, in certificate order.
pub const BOUND_NAMES: [&str; 13] = [
    "|D|",
    "|D'|",
    "|D''|/lambda^(1/2)",
    "|D''|/lambda^(3/2)",
    "|E|",
    "|E'|",
    "|E''|/lambda^(1/2)",
    "|E''|/lambda^(3/2)",
    "lambda^(1/2)|F|",
    "lambda|F|",
    "lambda^(1/2)|F'|",
    "|F''|",
    "|F''|/lambda^(1/2)",
];

/// Empirical suprema of the scaled dual kernels.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelBounds {
    /// Row `n` holds the suprema over the time grid for mode `n`.
    pub per_mode: Vec<[f64; 13]>,
}

impl KernelBounds {
    /// Suprema over the first `n` modes.
    pub fn sup_over_first(&self, n: usize) -> [f64; 13] {
        let mut out = [0.0f64; 13];
        for row in self.per_mode.iter().take(n) {
            for (o, v) in out.iter_mut().zip(row) {
                *o = (*o).max(*v);
            }
        }
        out
    }

    pub fn sup(&self) -> [f64; 13] {
        self.sup_over_first(self.per_mode.len())
    }

    pub fn all_finite(&self) -> bool {
        self.per_mode.iter().flatten().all(|v| v.is_finite())
    }
}

pub fn kernel_bounds_check(params: &ModelParams, eigenvalues: &[f64], t_grid: &[f64]) -> Result<KernelBounds> {
    let per_mode = eigenvalues
        .par_iter()
        .map(|&lam| {
            let k = KernelSet::for_mode(params, lam)?;
            let mut row = [0.0f64; 13];
            let (r, r3) = (lam.sqrt(), lam.powf(1.5));
            for &t in t_grid {
                let v0 = k.eval_dual(t, 0);
                let v1 = k.eval_dual(t, 1);
                let v2 = k.eval_dual(t, 2);
                let q = [
                    v0.a.abs(),
                    v1.a.abs(),
                    v2.a.abs() / r,
                    v2.a.abs() / r3,
                    v0.b.abs(),
                    v1.b.abs(),
                    v2.b.abs() / r,
                    v2.b.abs() / r3,
                    r * v0.c.abs(),
                    lam * v0.c.abs(),
                    r * v1.c.abs(),
                    v2.c.abs(),
                    v2.c.abs() / r,
                ];
                for (o, v) in row.iter_mut().zip(q) {
                    *o = o.max(v);
                }
            }
            Ok(row)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(KernelBounds { per_mode })
}
