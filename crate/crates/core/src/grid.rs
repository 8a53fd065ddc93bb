//! Uniform cell-centred mesh of Ω = (lo, hi) with a collocation band outside.
//!
//! Nodes sit at cell midpoints, so no node falls on ∂Ω. The band carries
//! `m = ⌈R_ext/h⌉` cells on each side; beyond its outer edge the kernel tail is
//! integrated in closed form. Global node order is: left band, interior,
//! right band, each ascending.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// User-facing grid description.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    #[serde(default = "GridSpec::default_lo")]
    pub omega_lo: f64,
    #[serde(default = "GridSpec::default_hi")]
    pub omega_hi: f64,
    #[serde(default = "GridSpec::default_n")]
    pub n_interior: usize,
    /// Half-width of the exterior collocation band on each side of Ω.
    #[serde(default = "GridSpec::default_band")]
    pub exterior_half_width: f64,
}

impl GridSpec {
    fn default_lo() -> f64 {
        -1.0
    }
    fn default_hi() -> f64 {
        1.0
    }
    fn default_n() -> usize {
        256
    }
    fn default_band() -> f64 {
        1.0
    }
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec { omega_lo: -1.0, omega_hi: 1.0, n_interior: 256, exterior_half_width: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    omega_lo: f64,
    omega_hi: f64,
    h: f64,
    band_cells: usize,
    interior: Vec<f64>,
    exterior: Vec<f64>,
}

impl Grid {
    pub fn new(spec: &GridSpec) -> Result<Self> {
        let GridSpec { omega_lo, omega_hi, n_interior, exterior_half_width } = *spec;
        if !(omega_lo.is_finite() && omega_hi.is_finite()) || omega_hi <= omega_lo {
            return Err(Error::Grid(format!("empty interval ({omega_lo}, {omega_hi})")));
        }
        if n_interior == 0 {
            return Err(Error::Grid("n_interior must be positive".into()));
        }
        if !(exterior_half_width > 0.0) {
            return Err(Error::Grid(format!(
                "exterior_half_width must be positive, got {exterior_half_width}"
            )));
        }
        let h = (omega_hi - omega_lo) / n_interior as f64;
        if !(h > 0.0) {
            return Err(Error::Grid(format!("mesh width {h} is not positive")));
        }
        let band_cells = ((exterior_half_width / h) - 1e-9).ceil().max(1.0) as usize;
        let interior = (0..n_interior).map(|i| omega_lo + (i as f64 + 0.5) * h).collect();
        let left = (0..band_cells).rev().map(|k| omega_lo - (k as f64 + 0.5) * h);
        let right = (0..band_cells).map(|k| omega_hi + (k as f64 + 0.5) * h);
        let exterior = left.chain(right).collect();
        Ok(Grid { omega_lo, omega_hi, h, band_cells, interior, exterior })
    }

    pub fn omega(&self) -> (f64, f64) {
        (self.omega_lo, self.omega_hi)
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn n_interior(&self) -> usize {
        self.interior.len()
    }

    pub fn n_exterior(&self) -> usize {
        self.exterior.len()
    }

    pub fn n_nodes(&self) -> usize {
        self.interior.len() + self.exterior.len()
    }

    /// Cells in the band on each side.
    pub fn band_cells(&self) -> usize {
        self.band_cells
    }

    pub fn interior_nodes(&self) -> &[f64] {
        &self.interior
    }

    pub fn exterior_nodes(&self) -> &[f64] {
        &self.exterior
    }

    /// Effective band half-width `m·h` (at least the requested one).
    pub fn exterior_half_width(&self) -> f64 {
        self.band_cells as f64 * self.h
    }

    pub fn center(&self) -> f64 {
        0.5 * (self.omega_lo + self.omega_hi)
    }

    /// Distance from the centre of Ω to the outer band edge; the kernel tail
    /// beyond it is integrated analytically.
    pub fn tail_cutoff(&self) -> f64 {
        0.5 * (self.omega_hi - self.omega_lo) + self.exterior_half_width()
    }

    /// Global position of exterior node `k`.
    pub fn exterior_global(&self, k: usize) -> usize {
        if k < self.band_cells {
            k
        } else {
            k + self.interior.len()
        }
    }

    /// Global position of interior node `i`.
    pub fn interior_global(&self, i: usize) -> usize {
        i + self.band_cells
    }

    /// Every node in global order.
    pub fn all_nodes(&self) -> Vec<f64> {
        let m = self.band_cells;
        let mut out = Vec::with_capacity(self.n_nodes());
        out.extend_from_slice(&self.exterior[..m]);
        out.extend_from_slice(&self.interior);
        out.extend_from_slice(&self.exterior[m..]);
        out
    }

    /// True when `x` lies in the closed interval cl(Ω).
    pub fn in_closure(&self, x: f64) -> bool {
        x >= self.omega_lo && x <= self.omega_hi
    }

    /// Indices of exterior nodes strictly inside `(lo, hi)`.
    pub fn exterior_indices_in(&self, lo: f64, hi: f64) -> Vec<usize> {
        (0..self.exterior.len()).filter(|&k| self.exterior[k] > lo && self.exterior[k] < hi).collect()
    }

    /// `∫_Ω u v` by the midpoint rule.
    pub fn interior_dot(&self, u: &[f64], v: &[f64]) -> f64 {
        self.h * u.iter().zip(v).map(|(a, b)| a * b).sum::<f64>()
    }

    /// `∫_{band} f g` by the midpoint rule.
    pub fn exterior_dot(&self, f: &[f64], g: &[f64]) -> f64 {
        self.h * f.iter().zip(g).map(|(a, b)| a * b).sum::<f64>()
    }

    pub fn interior_norm(&self, u: &[f64]) -> f64 {
        self.interior_dot(u, u).sqrt()
    }

    pub fn exterior_norm(&self, f: &[f64]) -> f64 {
        self.exterior_dot(f, f).sqrt()
    }
}

/// A grid function: interior values, band values and the constant value it is
/// assumed to take beyond the tail cutoff.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    pub interior: Vec<f64>,
    pub exterior: Vec<f64>,
    pub tail: f64,
}

impl GridFunction {
    pub fn zeros(grid: &Grid) -> Self {
        GridFunction { interior: vec![0.0; grid.n_interior()], exterior: vec![0.0; grid.n_exterior()], tail: 0.0 }
    }

    pub fn constant(grid: &Grid, value: f64) -> Self {
        GridFunction {
            interior: vec![value; grid.n_interior()],
            exterior: vec![value; grid.n_exterior()],
            tail: value,
        }
    }

    /// Samples `f` at every node; the tail is set to zero.
    pub fn from_fn(grid: &Grid, f: impl Fn(f64) -> f64) -> Self {
        GridFunction {
            interior: grid.interior_nodes().iter().map(|&x| f(x)).collect(),
            exterior: grid.exterior_nodes().iter().map(|&x| f(x)).collect(),
            tail: 0.0,
        }
    }

    /// Interior values extended by zero outside Ω.
    pub fn from_interior(grid: &Grid, interior: Vec<f64>) -> Self {
        assert_eq!(interior.len(), grid.n_interior());
        GridFunction { interior, exterior: vec![0.0; grid.n_exterior()], tail: 0.0 }
    }

    /// Values in global node order.
    pub fn global(&self, grid: &Grid) -> Vec<f64> {
        let m = grid.band_cells();
        let mut out = Vec::with_capacity(grid.n_nodes());
        out.extend_from_slice(&self.exterior[..m]);
        out.extend_from_slice(&self.interior);
        out.extend_from_slice(&self.exterior[m..]);
        out
    }
}
