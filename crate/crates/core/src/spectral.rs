//! Eigenpairs of the discrete Dirichlet fractional Laplacian and spectral
//! coordinates.
//!
//! Eigenvectors are normalized in the grid inner product `(u, v) = h Σ u_i v_i`,
//! so spectral coefficients are `u_n = (u, φ_n)` and Parseval holds exactly.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result, Warning};
use crate::fractional::NonlocalOperator;
use crate::grid::{Grid, GridFunction};

/// Relative gap below which neighbouring eigenvalues are reported as a cluster.
pub const CLUSTER_TOL: f64 = 1e-8;

/// Norm weighting carried by a coefficient vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Space {
    L2,
    Hs,
    HminusS,
}

/// Spectral coordinates `u_n = (u, φ_n)` tagged with the space they live in.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralCoefficients {
    pub coeffs: Vec<f64>,
    pub space: Space,
}

impl SpectralCoefficients {
    pub fn new(coeffs: Vec<f64>, space: Space) -> Self {
        SpectralCoefficients { coeffs, space }
    }

    pub fn l2(coeffs: Vec<f64>) -> Self {
        SpectralCoefficients { coeffs, space: Space::L2 }
    }

    pub fn zeros(n: usize) -> Self {
        SpectralCoefficients::l2(vec![0.0; n])
    }

    /// The unit vector of mode `n` (zero-based).
    pub fn unit(len: usize, n: usize) -> Self {
        let mut c = vec![0.0; len];
        c[n] = 1.0;
        SpectralCoefficients::l2(c)
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Keeps the first `n` coefficients.
    pub fn truncated(&self, n: usize) -> Self {
        SpectralCoefficients { coeffs: self.coeffs[..n.min(self.len())].to_vec(), space: self.space }
    }
}

#[derive(Debug, Clone)]
pub struct SpectralBasis {
    grid: Grid,
    eigenvalues: Vec<f64>,
    /// Column `n` holds `φ_n` at the interior nodes.
    eigenvectors: DMatrix<f64>,
    /// Column `n` holds `N_s φ_n` at the band nodes.
    traces: DMatrix<f64>,
    warnings: Vec<Warning>,
}

impl SpectralBasis {
    /// The `n_modes` smallest eigenpairs of the interior block.
    pub fn eigendecompose(op: &NonlocalOperator, n_modes: usize) -> Result<Self> {
        let grid = op.grid().clone();
        let n = grid.n_interior();
        if n_modes == 0 || n_modes > n {
            return Err(Error::Domain(format!("n_modes = {n_modes} must lie in 1..={n}")));
        }
        let max_iter = 10_000;
        let eig = SymmetricEigen::try_new(op.matrix_dd().clone(), f64::EPSILON, max_iter).ok_or_else(|| {
            Error::LinAlg(format!("symmetric eigensolver did not converge within {max_iter} sweeps on a {n}×{n} block"))
        })?;
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));

        let scale = 1.0 / grid.h().sqrt();
        let mut eigenvalues = Vec::with_capacity(n_modes);
        let mut eigenvectors = DMatrix::zeros(n, n_modes);
        for (col, &idx) in order.iter().take(n_modes).enumerate() {
            let lambda = eig.eigenvalues[idx];
            if !(lambda > 0.0) {
                return Err(Error::LinAlg(format!("non-positive eigenvalue {lambda} in mode {}", col + 1)));
            }
            let v = eig.eigenvectors.column(idx);
            let peak = v.amax();
            let first = v.iter().copied().find(|x| x.abs() > 1e-8 * peak).unwrap_or(1.0);
            let sign = if first < 0.0 { -scale } else { scale };
            eigenvectors.set_column(col, &(v * sign));
            eigenvalues.push(lambda);
        }

        let mut warnings = Vec::new();
        for n in 1..eigenvalues.len() {
            let gap = eigenvalues[n] - eigenvalues[n - 1];
            if gap < CLUSTER_TOL * eigenvalues[n] {
                warnings.push(Warning::EigenCluster { mode: n, gap });
            }
        }

        let n_ext = grid.n_exterior();
        let mut traces = DMatrix::zeros(n_ext, n_modes);
        for col in 0..n_modes {
            let phi = GridFunction::from_interior(&grid, eigenvectors.column(col).iter().copied().collect());
            let t = op.normal_derivative(&phi);
            traces.set_column(col, &nalgebra::DVector::from_vec(t));
        }
        Ok(SpectralBasis { grid, eigenvalues, eigenvectors, traces, warnings })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn n_modes(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenvalue(&self, n: usize) -> f64 {
        self.eigenvalues[n]
    }

    pub fn eigenvectors(&self) -> &DMatrix<f64> {
        &self.eigenvectors
    }

    /// `φ_n` at the interior nodes.
    pub fn eigenvector(&self, n: usize) -> Vec<f64> {
        self.eigenvectors.column(n).iter().copied().collect()
    }

    /// `N_s φ_n` at the band nodes.
    pub fn trace(&self, n: usize) -> Vec<f64> {
        self.traces.column(n).iter().copied().collect()
    }

    pub fn traces(&self) -> &DMatrix<f64> {
        &self.traces
    }

    pub fn warnings(&self) -> &[Warning] {
        &self.warnings
    }

    /// Keeps the first `n` modes.
    pub fn truncated(&self, n: usize) -> Self {
        let n = n.min(self.n_modes());
        SpectralBasis {
            grid: self.grid.clone(),
            eigenvalues: self.eigenvalues[..n].to_vec(),
            eigenvectors: self.eigenvectors.columns(0, n).into_owned(),
            traces: self.traces.columns(0, n).into_owned(),
            warnings: self.warnings.iter().filter(|w| !matches!(w, Warning::EigenCluster { mode, .. } if *mode >= n)).cloned().collect(),
        }
    }

    /// `(u, φ_n)` for every retained mode.
    pub fn project(&self, interior: &[f64]) -> Vec<f64> {
        let h = self.grid.h();
        (0..self.n_modes())
            .map(|n| h * self.eigenvectors.column(n).iter().zip(interior).map(|(a, b)| a * b).sum::<f64>())
            .collect()
    }

    /// `Σ u_n φ_n` at the interior nodes.
    pub fn synthesize(&self, coeffs: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.grid.n_interior()];
        for (n, &c) in coeffs.iter().enumerate().take(self.n_modes()) {
            if c == 0.0 {
                continue;
            }
            for (o, v) in out.iter_mut().zip(self.eigenvectors.column(n).iter()) {
                *o += c * v;
            }
        }
        out
    }

    /// `Σ u_n N_s φ_n` at the band nodes.
    pub fn synthesize_trace(&self, coeffs: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.grid.n_exterior()];
        for (n, &c) in coeffs.iter().enumerate().take(self.n_modes()) {
            for (o, v) in out.iter_mut().zip(self.traces.column(n).iter()) {
                *o += c * v;
            }
        }
        out
    }

    /// `(f, N_s φ_n)` over the band for every mode.
    pub fn trace_pairings(&self, band_values: &[f64]) -> Vec<f64> {
        (0..self.n_modes())
            .map(|n| {
                self.grid.h() * self.traces.column(n).iter().zip(band_values).map(|(a, b)| a * b).sum::<f64>()
            })
            .collect()
    }

    /// `A^γ u`: multiplies coefficient `n` by `λ_n^γ`.
    pub fn fractional_power_apply(&self, u: &SpectralCoefficients, gamma_exp: f64) -> Result<SpectralCoefficients> {
        if !(gamma_exp >= 0.0) {
            return Err(Error::Domain(format!("power {gamma_exp} must be non-negative")));
        }
        if u.len() > self.n_modes() {
            return Err(Error::Domain(format!("{} coefficients exceed {} modes", u.len(), self.n_modes())));
        }
        let coeffs = u.coeffs.iter().zip(&self.eigenvalues).map(|(c, l)| c * l.powf(gamma_exp)).collect();
        Ok(SpectralCoefficients { coeffs, space: u.space })
    }

    /// Norm of `u` in the requested space of the Gelfand triple.
    pub fn sobolev_norm(&self, u: &SpectralCoefficients, space: Space) -> f64 {
        let exponent = match space {
            Space::L2 => 0.0,
            Space::Hs => 1.0,
            Space::HminusS => -1.0,
        };
        u.coeffs
            .iter()
            .zip(&self.eigenvalues)
            .map(|(c, l)| c * c * l.powf(exponent))
            .sum::<f64>()
            .sqrt()
    }
}
