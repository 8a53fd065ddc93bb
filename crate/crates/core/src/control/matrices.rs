//! The per-mode moment matrix `B` and residue matrix `A`, with their
//! determinant formulas.

use nalgebra::{DMatrix, Matrix3, SymmetricEigen};
use num_complex::Complex64;

use crate::modes::KernelSet;
use crate::params::ModelParams;
use crate::problem::Problem;

#[derive(Debug, Clone, PartialEq)]
pub struct ControllabilityMatrices {
    /// Rows `[αλ_{n,j} − λ_{n,j}² − bλ_n, λ_{n,j} − α, −1]`.
    pub b_matrix: Matrix3<Complex64>,
    /// Rows: the partial-fraction coefficients of `A_n, B_n, C_n` at root `j`.
    pub a_matrix: Matrix3<Complex64>,
    pub det_b: Complex64,
    pub det_a: Complex64,
    /// `(λ1 − λ2)(λ1 − λ3)(λ2 − λ3)`.
    pub det_b_formula: Complex64,
    /// `i / (2 Im λ2 [(Re λ2 − λ1)² + (Im λ2)²])`.
    pub det_a_formula: Complex64,
    pub b_min_singular_value: f64,
}

impl ControllabilityMatrices {
    pub fn det_b_relative_error(&self) -> f64 {
        (self.det_b - self.det_b_formula).norm() / self.det_b_formula.norm()
    }

    pub fn det_a_relative_error(&self) -> f64 {
        (self.det_a - self.det_a_formula).norm() / self.det_a_formula.norm()
    }
}

pub fn spectral_matrices(kernels: &KernelSet, params: &ModelParams) -> ControllabilityMatrices {
    let mode = kernels.mode();
    let [l1, l2, l3] = mode.roots();
    let lam = mode.lambda_n();
    let (alpha, b) = (params.alpha(), params.b());
    let row = |l: Complex64| [alpha * l - l * l - b * lam, l - alpha, Complex64::new(-1.0, 0.0)];
    let [r1, r2, r3] = [row(l1), row(l2), row(l3)];
    #[rustfmt::skip]
    let b_matrix = Matrix3::new(
        r1[0], r1[1], r1[2],
        r2[0], r2[1], r2[2],
        r3[0], r3[1], r3[2],
    );
    let (ca, cb, cc) = (kernels.coefficients_a(), kernels.coefficients_b(), kernels.coefficients_c());
    #[rustfmt::skip]
    let a_matrix = Matrix3::new(
        ca[0], cb[0], cc[0],
        ca[1], cb[1], cc[1],
        ca[2], cb[2], cc[2],
    );
    let det_b_formula = (l1 - l2) * (l1 - l3) * (l2 - l3);
    let (re, im) = (l2.re, l2.im);
    let det_a_formula = Complex64::i() / (2.0 * im * ((re - l1.re).powi(2) + im * im));
    let b_min_singular_value = b_matrix.singular_values().min();
    ControllabilityMatrices {
        det_b: b_matrix.determinant(),
        det_a: a_matrix.determinant(),
        b_matrix,
        a_matrix,
        det_b_formula,
        det_a_formula,
        b_min_singular_value,
    }
}

/// Smallest eigenvalue of the Gram matrix `∫_0^T e^{−(λ_{n,1} + λ_{m,1}) t} dt`,
/// `n, m < N`, for `N = 1..=n_modes`.
///
/// These exponentials are the real-root moment functionals; since
/// `λ_{n,1} → −c²/b` they become nearly collinear and the Gram matrix loses
/// rank as modes are appended.
pub fn moment_gram_min_eigenvalues(problem: &Problem, horizon: f64) -> Vec<f64> {
    let rates: Vec<f64> = problem.kernels().iter().map(|k| -k.mode().root_real()).collect();
    let n = rates.len();
    let gram = DMatrix::from_fn(n, n, |i, j| {
        let k = rates[i] + rates[j];
        (k * horizon).exp_m1() / k
    });
    (1..=n)
        .map(|m| {
            let sub = gram.view((0, 0), (m, m)).into_owned();
            SymmetricEigen::new(sub).eigenvalues.min()
        })
        .collect()
}
