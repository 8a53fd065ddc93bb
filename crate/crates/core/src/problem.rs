//! A discretized model instance: parameters, operator, spectral basis and the
//! kernels of every retained mode.

use rayon::prelude::*;

use crate::error::Result;
use crate::fractional::NonlocalOperator;
use crate::grid::{Grid, GridSpec};
use crate::modes::KernelSet;
use crate::params::ModelParams;
use crate::spectral::SpectralBasis;

#[derive(Debug, Clone)]
pub struct Problem {
    params: ModelParams,
    op: NonlocalOperator,
    basis: SpectralBasis,
    kernels: Vec<KernelSet>,
}

impl Problem {
    pub fn new(params: ModelParams, grid: &GridSpec, n_modes: usize) -> Result<Self> {
        let grid = Grid::new(grid)?;
        let op = NonlocalOperator::assemble(&grid, params.s())?;
        let basis = SpectralBasis::eigendecompose(&op, n_modes)?;
        Problem::from_parts(params, op, basis)
    }

    pub fn from_parts(params: ModelParams, op: NonlocalOperator, basis: SpectralBasis) -> Result<Self> {
        let kernels = basis
            .eigenvalues()
            .par_iter()
            .map(|&lam| KernelSet::for_mode(&params, lam))
            .collect::<Result<Vec<_>>>()?;
        Ok(Problem { params, op, basis, kernels })
    }

    /// The same discretization keeping only the first `n` modes.
    pub fn truncated(&self, n: usize) -> Self {
        let basis = self.basis.truncated(n);
        let kernels = self.kernels[..basis.n_modes()].to_vec();
        Problem { params: self.params, op: self.op.clone(), basis, kernels }
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn grid(&self) -> &Grid {
        self.op.grid()
    }

    pub fn operator(&self) -> &NonlocalOperator {
        &self.op
    }

    pub fn basis(&self) -> &SpectralBasis {
        &self.basis
    }

    pub fn kernels(&self) -> &[KernelSet] {
        &self.kernels
    }

    pub fn kernel(&self, n: usize) -> &KernelSet {
        &self.kernels[n]
    }

    pub fn n_modes(&self) -> usize {
        self.basis.n_modes()
    }

    pub fn eigenvalue(&self, n: usize) -> f64 {
        self.basis.eigenvalue(n)
    }
}
