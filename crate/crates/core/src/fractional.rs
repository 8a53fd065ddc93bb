//! Restricted fractional Laplacian on a 1-D grid, the nonlocal normal
//! derivative and the exterior Dirichlet lift.
//!
//! The principal-value integral at a node `x_p` is split three ways:
//!
//! * every other node `q` of the grid contributes `(u_p − u_q)·W(|p−q|)`, where
//!   `W(m) = C ∫_{cell q} |x_p − y|^{−1−2s} dy` is the exact kernel mass of the
//!   cell of `q` (a punctured rule: the node's own cell is skipped);
//! * the skipped cell `|y − x_p| < h/2` is handled by a second-order Taylor
//!   model of `u`, giving `−κ (u_{p+1} − 2u_p + u_{p−1})` with
//!   `κ = C (h/2)^{2−2s} / ((2−2s) h²)`;
//! * beyond the band edge `u` equals a constant tail value and the kernel is
//!   integrated in closed form.
//!
//! All three pieces are translation invariant, so the interaction weight
//! `M(m) = W(m) + κ·[m = 1]` is a single symmetric table and the interior
//! block is symmetric by construction.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use rayon::prelude::*;
use statrs::function::gamma::gamma;

use crate::error::{Error, Result};
use crate::grid::{Grid, GridFunction};

/// `C_{N,s} = s·2^{2s}·Γ((N+2s)/2) / (π^{N/2}·Γ(1−s))`.
pub fn normalization_constant(dim: usize, s: f64) -> Result<f64> {
    if !(s > 0.0 && s < 1.0) {
        return Err(Error::Domain(format!("fractional order s = {s} must lie in (0, 1)")));
    }
    if dim == 0 {
        return Err(Error::Domain("dimension must be at least 1".into()));
    }
    let n = dim as f64;
    Ok(s * 4f64.powf(s) * gamma((n + 2.0 * s) / 2.0)
        / (std::f64::consts::PI.powf(n / 2.0) * gamma(1.0 - s)))
}

/// Discrete `(−Δ)^s` with its interior and interior–exterior blocks.
#[derive(Debug, Clone)]
pub struct NonlocalOperator {
    grid: Grid,
    s: f64,
    cns: f64,
    /// `M(m)` for `m = 0..n_nodes`; entry 0 is unused.
    interaction: Vec<f64>,
    tail: Vec<f64>,
    dd: DMatrix<f64>,
    de: DMatrix<f64>,
    cholesky: Cholesky<f64, Dyn>,
}

impl NonlocalOperator {
    pub fn assemble(grid: &Grid, s: f64) -> Result<Self> {
        let cns = normalization_constant(1, s)?;
        let h = grid.h();
        if !(h > 0.0) || grid.n_interior() == 0 {
            return Err(Error::Grid("degenerate grid".into()));
        }
        let n = grid.n_interior();
        let n_ext = grid.n_exterior();
        let n_all = grid.n_nodes();
        let m_band = grid.band_cells();

        let kappa = cns * (0.5 * h).powf(2.0 - 2.0 * s) / ((2.0 - 2.0 * s) * h * h);
        let mut interaction = vec![0.0; n_all];
        for (m, w) in interaction.iter_mut().enumerate().skip(1) {
            *w = cell_mass(cns, s, h, m);
        }
        interaction[1] += kappa;

        let cutoff = grid.tail_cutoff();
        let center = grid.center();
        let tail: Vec<f64> = grid
            .interior_nodes()
            .iter()
            .map(|&x| {
                let r = x - center;
                cns / (2.0 * s) * ((cutoff - r).powf(-2.0 * s) + (cutoff + r).powf(-2.0 * s))
            })
            .collect();

        // Row-wise assembly; every row sums in ascending global order so the
        // result does not depend on the thread count.
        let rows: Vec<(Vec<f64>, Vec<f64>)> = (0..n)
            .into_par_iter()
            .map(|i| {
                let p = i + m_band;
                let mut diag = 0.0;
                for q in 0..n_all {
                    if q != p {
                        diag += interaction[p.abs_diff(q)];
                    }
                }
                let mut dd_row = vec![0.0; n];
                for (j, v) in dd_row.iter_mut().enumerate() {
                    *v = if j == i { diag + tail[i] } else { -interaction[i.abs_diff(j)] };
                }
                let de_row = (0..n_ext).map(|k| -interaction[p.abs_diff(grid.exterior_global(k))]).collect();
                (dd_row, de_row)
            })
            .collect();
        let dd = DMatrix::from_fn(n, n, |i, j| rows[i].0[j]);
        let de = DMatrix::from_fn(n, n_ext, |i, k| rows[i].1[k]);
        let cholesky = Cholesky::new(dd.clone())
            .ok_or_else(|| Error::LinAlg("interior block is not positive definite".into()))?;
        Ok(NonlocalOperator { grid: grid.clone(), s, cns, interaction, tail, dd, de, cholesky })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn order(&self) -> f64 {
        self.s
    }

    pub fn cns(&self) -> f64 {
        self.cns
    }

    /// Interior × interior block (zero exterior condition).
    pub fn matrix_dd(&self) -> &DMatrix<f64> {
        &self.dd
    }

    /// Interior × exterior coupling block.
    pub fn matrix_de(&self) -> &DMatrix<f64> {
        &self.de
    }

    /// Closed-form tail coefficient at each interior node.
    pub fn tail_coefficients(&self) -> &[f64] {
        &self.tail
    }

    /// Interaction weight between two nodes `m` cells apart (`m ≥ 1`).
    pub fn interaction(&self, m: usize) -> f64 {
        self.interaction[m]
    }

    /// `(−Δ)^s u` at the interior nodes: `DD·u + DE·e − tail·u_∞`.
    pub fn apply(&self, u: &GridFunction) -> Vec<f64> {
        let ui = DVector::from_column_slice(&u.interior);
        let ue = DVector::from_column_slice(&u.exterior);
        let mut out = &self.dd * ui + &self.de * ue;
        for (o, t) in out.iter_mut().zip(&self.tail) {
            *o -= t * u.tail;
        }
        out.as_slice().to_vec()
    }

    /// `N_s u` at the band nodes, integrating over interior nodes only.
    pub fn normal_derivative(&self, u: &GridFunction) -> Vec<f64> {
        let n = self.grid.n_interior();
        (0..self.grid.n_exterior())
            .map(|k| {
                let mut acc = 0.0;
                for i in 0..n {
                    acc += -self.de[(i, k)] * (u.exterior[k] - u.interior[i]);
                }
                acc
            })
            .collect()
    }

    /// `N_s u(x)` at an arbitrary point outside cl(Ω), using the exact kernel
    /// mass of each interior cell.
    pub fn normal_derivative_at(&self, x: f64, u_at_x: f64, interior: &[f64]) -> Result<f64> {
        if self.grid.in_closure(x) {
            return Err(Error::Grid(format!("point {x} is not exterior to Ω")));
        }
        let h = self.grid.h();
        let s = self.s;
        let mut acc = 0.0;
        for (&y, &uy) in self.grid.interior_nodes().iter().zip(interior) {
            let near = (x - y).abs() - 0.5 * h;
            let mass = self.cns / (2.0 * s) * (near.powf(-2.0 * s) - (near + h).powf(-2.0 * s));
            acc += mass * (u_at_x - uy);
        }
        Ok(acc)
    }

    /// Solves `DD·U + DE·g − tail·g_∞ = 0` and checks the discrete maximum
    /// principle.
    pub fn solve_exterior_dirichlet(&self, g: &[f64], tail_value: f64) -> Result<GridFunction> {
        if g.len() != self.grid.n_exterior() {
            return Err(Error::Grid(format!(
                "exterior data has {} values, band has {}",
                g.len(),
                self.grid.n_exterior()
            )));
        }
        let mut rhs = -(&self.de * DVector::from_column_slice(g));
        for (r, t) in rhs.iter_mut().zip(&self.tail) {
            *r += t * tail_value;
        }
        let u = self.cholesky.solve(&rhs);
        if u.iter().any(|v| !v.is_finite()) {
            return Err(Error::LinAlg("exterior Dirichlet solve produced non-finite values".into()));
        }
        let lo = g.iter().copied().fold(tail_value, f64::min);
        let hi = g.iter().copied().fold(tail_value, f64::max);
        let tol = 1e-10 * (1.0 + lo.abs().max(hi.abs()));
        if let Some(v) = u.iter().find(|&&v| v < lo - tol || v > hi + tol) {
            return Err(Error::LinAlg(format!(
                "maximum principle violated: interior value {v} outside [{lo}, {hi}]"
            )));
        }
        Ok(GridFunction { interior: u.as_slice().to_vec(), exterior: g.to_vec(), tail: tail_value })
    }

    /// Solves `DD·x = rhs`.
    pub fn solve_interior(&self, rhs: &DVector<f64>) -> DVector<f64> {
        self.cholesky.solve(rhs)
    }

    /// The lift matrix `−DD⁻¹·DE` mapping band data to interior values.
    pub fn lift_matrix(&self) -> DMatrix<f64> {
        -self.cholesky.solve(&self.de)
    }

    /// Left side of the integration-by-parts formula: the discrete double
    /// integral `(C/2)∬ (u(x)−u(y))(v(x)−v(y))|x−y|^{−1−2s}` over all pairs not
    /// both exterior, plus the interior–tail pairs.
    pub fn bilinear_form(&self, u: &GridFunction, v: &GridFunction) -> f64 {
        let grid = &self.grid;
        let ug = u.global(grid);
        let vg = v.global(grid);
        let n_all = grid.n_nodes();
        let m = grid.band_cells();
        let is_ext = |p: usize| p < m || p >= m + grid.n_interior();
        let mut total = 0.0;
        for p in 0..n_all {
            let mut row = 0.0;
            for q in 0..n_all {
                if q == p || (is_ext(p) && is_ext(q)) {
                    continue;
                }
                row += self.interaction[p.abs_diff(q)] * (ug[p] - ug[q]) * (vg[p] - vg[q]);
            }
            total += row;
        }
        let mut tail = 0.0;
        for i in 0..grid.n_interior() {
            tail += self.tail[i] * (u.interior[i] - u.tail) * (v.interior[i] - v.tail);
        }
        grid.h() * (0.5 * total + tail)
    }

    /// Evaluates both sides of the integration-by-parts formula for `v = 0`
    /// outside Ω.
    pub fn integration_by_parts(&self, u: &GridFunction, v: &GridFunction) -> Result<IbpReport> {
        if v.exterior.iter().any(|&x| x != 0.0) || v.tail != 0.0 {
            return Err(Error::Domain("v must vanish outside Ω".into()));
        }
        let bilinear = self.bilinear_form(u, v);
        let volume = self.grid.interior_dot(&v.interior, &self.apply(u));
        let boundary = self.grid.exterior_dot(&v.exterior, &self.normal_derivative(u));
        Ok(IbpReport { bilinear, volume, boundary, residual: (bilinear - volume - boundary).abs() })
    }
}

/// Both sides of the nonlocal integration-by-parts identity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IbpReport {
    pub bilinear: f64,
    pub volume: f64,
    pub boundary: f64,
    pub residual: f64,
}

impl IbpReport {
    pub fn relative_residual(&self) -> f64 {
        let scale = self.bilinear.abs().max(self.volume.abs()).max(self.boundary.abs());
        if scale == 0.0 {
            0.0
        } else {
            self.residual / scale
        }
    }
}

/// `C ∫_{(m−½)h}^{(m+½)h} r^{−1−2s} dr`, written to avoid cancellation.
fn cell_mass(cns: f64, s: f64, h: f64, m: usize) -> f64 {
    let a = (m as f64 - 0.5) * h;
    let ratio = 1.0 / (m as f64 - 0.5);
    cns / (2.0 * s) * a.powf(-2.0 * s) * -(-2.0 * s * ratio.ln_1p()).exp_m1()
}
