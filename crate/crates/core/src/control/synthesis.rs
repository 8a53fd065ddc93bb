//! Regularized synthesis of exterior controls.
//!
//! `Λ` maps control coefficients to the weighted final state. Minimizing
//! `‖Λx − d‖² + ε‖x‖²` is done through the thin SVD `Λ = UΣVᵀ`, which is the
//! eigendecomposition of the normal matrix `ΛᵀΛ` computed without forming it:
//! `x = V diag(σ/(σ² + ε)) Uᵀd`. The factorization is shared by every `ε` of a
//! sweep, and the misfit and control norm are then monotone in `ε` to
//! rounding.

use nalgebra::{DMatrix, DVector, SVD};
use rayon::prelude::*;

use crate::error::{Error, Result, Warning};
use crate::forward::{solve_controlled, ControlBasis, ControlSignal, StateTriple};
use crate::problem::Problem;

/// Condition estimates of the regularized normal matrix beyond this are flagged.
pub const CONDITIONING_LIMIT: f64 = 1e14;

#[derive(Debug, Clone)]
pub struct ControlToStateMap {
    basis: ControlBasis,
    eigenvalues: Vec<f64>,
    columns: Vec<StateTriple>,
    matrix: DMatrix<f64>,
    u: DMatrix<f64>,
    singular_values: DVector<f64>,
    v_t: DMatrix<f64>,
}

/// Outcome of one regularized solve.
#[derive(Debug, Clone)]
pub struct Synthesis {
    pub control: ControlSignal,
    /// `‖Λx − d‖ / ‖d‖` in the weighted norm (absolute when `d = 0`).
    pub misfit: f64,
    /// `‖x‖₂` of the control coefficients.
    pub control_norm: f64,
    /// `(σ_max² + ε) / (σ_min² + ε)`.
    pub condition_estimate: f64,
    pub warning: Option<Warning>,
}

/// One row of an ε-sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub epsilon: f64,
    pub misfit: f64,
    pub control_norm: f64,
    pub condition_estimate: f64,
}

impl ControlToStateMap {
    /// Final states of the first `size` basis controls, one controlled solve
    /// per column.
    pub fn assemble(problem: &Problem, basis: &ControlBasis, size: usize) -> Result<Self> {
        if size == 0 {
            return Err(Error::Domain("control basis size must be positive".into()));
        }
        let horizon = basis.horizon();
        let columns = (0..size)
            .into_par_iter()
            .map(|j| solve_controlled(problem, &ControlSignal::element(basis.clone(), j), horizon))
            .collect::<Result<Vec<_>>>()?;
        let eigenvalues = problem.basis().eigenvalues().to_vec();
        let weighted: Vec<Vec<f64>> = columns.iter().map(|c| c.weighted(&eigenvalues)).collect();
        let matrix = DMatrix::from_fn(3 * problem.n_modes(), size, |i, j| weighted[j][i]);
        let svd = SVD::try_new(matrix.clone(), true, true, f64::EPSILON, 10_000)
            .ok_or_else(|| Error::LinAlg("SVD of the control-to-state map did not converge".into()))?;
        let u = svd.u.ok_or_else(|| Error::LinAlg("SVD returned no left factor".into()))?;
        let v_t = svd.v_t.ok_or_else(|| Error::LinAlg("SVD returned no right factor".into()))?;
        Ok(ControlToStateMap {
            basis: basis.clone(),
            eigenvalues,
            columns,
            matrix,
            u,
            singular_values: svd.singular_values,
            v_t,
        })
    }

    pub fn size(&self) -> usize {
        self.columns.len()
    }

    /// The weighted matrix `Λ`.
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn columns(&self) -> &[StateTriple] {
        &self.columns
    }

    pub fn singular_values(&self) -> &[f64] {
        self.singular_values.as_slice()
    }

    /// Final state reached from rest by the control with these coefficients.
    pub fn apply(&self, coeffs: &[f64]) -> StateTriple {
        let n = self.eigenvalues.len();
        let time = self.basis.horizon();
        coeffs.iter().zip(&self.columns).fold(StateTriple::zeros(n, time), |acc, (&x, col)| {
            if x == 0.0 {
                acc
            } else {
                acc.add(&col.scaled(x))
            }
        })
    }

    fn weighted_target(&self, target: &StateTriple) -> Result<DVector<f64>> {
        let n = self.eigenvalues.len();
        if target.len() > n {
            return Err(Error::Domain(format!("target has {} modes, map has {n}", target.len())));
        }
        let pad = |c: &[f64]| {
            let mut v = c.to_vec();
            v.resize(n, 0.0);
            v
        };
        let full = StateTriple::from_vecs(pad(&target.u.coeffs), pad(&target.ut.coeffs), pad(&target.utt.coeffs), target.time);
        Ok(DVector::from_vec(full.weighted(&self.eigenvalues)))
    }

    pub fn solve(&self, target: &StateTriple, epsilon: f64) -> Result<Synthesis> {
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(Error::Domain(format!("regularization ε = {epsilon} must be positive")));
        }
        let d = self.weighted_target(target)?;
        let beta = self.u.transpose() * &d;
        let filtered = DVector::from_iterator(
            beta.len(),
            beta.iter().zip(self.singular_values.iter()).map(|(b, s)| s / (s * s + epsilon) * b),
        );
        let x = self.v_t.transpose() * filtered;
        let residual = &self.matrix * &x - &d;
        let d_norm = d.norm();
        let misfit = if d_norm == 0.0 { residual.norm() } else { residual.norm() / d_norm };
        let condition_estimate = self.condition_estimate(epsilon);
        let warning = (condition_estimate > CONDITIONING_LIMIT).then_some(Warning::Conditioning { estimate: condition_estimate });
        let coeffs: Vec<f64> = x.iter().copied().collect();
        Ok(Synthesis {
            control_norm: x.norm(),
            control: ControlSignal::new(self.basis.clone(), coeffs),
            misfit,
            condition_estimate,
            warning,
        })
    }

    fn condition_estimate(&self, epsilon: f64) -> f64 {
        let smax = self.singular_values.max();
        // Rank-deficient maps have fewer than `size` singular values.
        let smin = if self.singular_values.len() < self.size() { 0.0 } else { self.singular_values.min() };
        (smax * smax + epsilon) / (smin * smin + epsilon)
    }

    /// Misfit and control norm along the regularization path.
    ///
    /// Evaluated from the spectral filter factors, so misfit is
    /// non-decreasing and control norm non-increasing in `ε` up to rounding.
    pub fn epsilon_sweep(&self, target: &StateTriple, epsilons: &[f64]) -> Result<Vec<SweepRow>> {
        let d = self.weighted_target(target)?;
        let beta = self.u.transpose() * &d;
        let d_perp = &d - &self.u * &beta;
        let perp2 = d_perp.norm_squared();
        let d_norm = d.norm();
        epsilons
            .iter()
            .map(|&epsilon| {
                if !(epsilon > 0.0 && epsilon.is_finite()) {
                    return Err(Error::Domain(format!("regularization ε = {epsilon} must be positive")));
                }
                let (mut r2, mut x2) = (perp2, 0.0);
                for (b, s) in beta.iter().zip(self.singular_values.iter()) {
                    let denom = s * s + epsilon;
                    r2 += (epsilon / denom * b).powi(2);
                    x2 += (s / denom * b).powi(2);
                }
                let misfit = if d_norm == 0.0 { r2.sqrt() } else { r2.sqrt() / d_norm };
                Ok(SweepRow { epsilon, misfit, control_norm: x2.sqrt(), condition_estimate: self.condition_estimate(epsilon) })
            })
            .collect()
    }
}

/// Assemble `Λ` for the first `size` controls of `basis` and solve once.
pub fn synthesize_control(
    problem: &Problem,
    basis: &ControlBasis,
    target: &StateTriple,
    size: usize,
    epsilon: f64,
) -> Result<Synthesis> {
    ControlToStateMap::assemble(problem, basis, size)?.solve(target, epsilon)
}
