//! Exterior controls `g(x, t) = Σ_j g_j P_{p(j)}(x) θ_{k(j)}(t)` built from
//! spatial bumps on the control region 𝒪 and temporal bumps on `(0, T)`, and
//! their harmonic lifts into Ω.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fractional::NonlocalOperator;
use crate::grid::{Grid, GridFunction};
use crate::spectral::SpectralBasis;

/// `64 (u(1−u))³ = 64 (u³ − 3u⁴ + 3u⁵ − u⁶)`, ascending coefficients.
const ENVELOPE: [f64; 7] = [0.0, 0.0, 0.0, 64.0, -192.0, 192.0, -64.0];

/// `d^order/du^order` of the envelope polynomial.
fn envelope(order: u32, u: f64) -> f64 {
    (order as usize..ENVELOPE.len())
        .map(|i| {
            let falling: f64 = (0..order).map(|m| (i as u32 - m) as f64).product();
            ENVELOPE[i] * falling * u.powi((i as u32 - order) as i32)
        })
        .sum()
}

fn binomial(n: u32, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// The tensor-product control family on `𝒪 × (0, T)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ControlBasis {
    region: (f64, f64),
    horizon: f64,
    profiles: usize,
    time_panels: usize,
    /// `P_p` sampled on the exterior band.
    samples: Vec<Vec<f64>>,
}

/// Serializable description of a control family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ControlSpec {
    pub region: (f64, f64),
    #[serde(default = "ControlSpec::default_profiles")]
    pub profiles: usize,
    #[serde(default = "ControlSpec::default_panels")]
    pub time_panels: usize,
}

impl ControlSpec {
    fn default_profiles() -> usize {
        2
    }
    fn default_panels() -> usize {
        64
    }
}

impl ControlBasis {
    pub fn new(grid: &Grid, region: (f64, f64), horizon: f64, profiles: usize, time_panels: usize) -> Result<Self> {
        let (lo, hi) = region;
        if !(lo < hi) {
            return Err(Error::Domain(format!("control region ({lo}, {hi}) is empty")));
        }
        let (a, b) = grid.omega();
        if hi > a && lo < b {
            return Err(Error::Domain(format!("control region ({lo}, {hi}) meets cl(Ω) = [{a}, {b}]")));
        }
        let r = grid.exterior_half_width();
        if lo < a - r || hi > b + r {
            return Err(Error::Domain(format!(
                "control region ({lo}, {hi}) leaves the exterior band [{}, {a}) ∪ ({b}, {}]",
                a - r,
                b + r
            )));
        }
        if !(horizon > 0.0 && horizon.is_finite()) {
            return Err(Error::Domain(format!("horizon T = {horizon} must be positive")));
        }
        if profiles == 0 || time_panels == 0 {
            return Err(Error::Domain("control basis needs at least one profile and one time panel".into()));
        }
        let samples = (0..profiles)
            .map(|p| grid.exterior_nodes().iter().map(|&x| profile(region, p, x)).collect())
            .collect();
        Ok(ControlBasis { region, horizon, profiles, time_panels, samples })
    }

    pub fn from_spec(grid: &Grid, spec: &ControlSpec, horizon: f64) -> Result<Self> {
        ControlBasis::new(grid, spec.region, horizon, spec.profiles, spec.time_panels)
    }

    /// The same family with a different number of quadrature panels in time.
    pub fn with_panels(&self, time_panels: usize) -> Self {
        ControlBasis { time_panels: time_panels.max(1), ..self.clone() }
    }

    pub fn region(&self) -> (f64, f64) {
        self.region
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn profiles(&self) -> usize {
        self.profiles
    }

    pub fn time_panels(&self) -> usize {
        self.time_panels
    }

    /// Spatial and temporal indices of basis element `j`; the ordering is
    /// nested so the first `N` elements of a larger family form the smaller one.
    pub fn indices(&self, j: usize) -> (usize, usize) {
        (j % self.profiles, j / self.profiles)
    }

    pub fn profile_samples(&self, p: usize) -> &[f64] {
        &self.samples[p]
    }

    /// `d^order θ_k / dt^order` with `θ_k(t) = 64 (u(1−u))³ cos(kπu)`, `u = t/T`,
    /// extended by zero outside `[0, T]`.
    pub fn temporal(&self, k: usize, t: f64, order: u32) -> f64 {
        if !(0.0..=self.horizon).contains(&t) {
            return 0.0;
        }
        let u = t / self.horizon;
        let w = k as f64 * PI;
        let sum: f64 = (0..=order)
            .map(|i| {
                let r = order - i;
                let trig = w.powi(r as i32) * (w * u + r as f64 * PI / 2.0).cos();
                binomial(order, i) * envelope(i, u) * trig
            })
            .sum();
        sum / self.horizon.powi(order as i32)
    }

    /// `(P_p, N_s φ_n)` over the band, indexed `[p][n]`.
    pub fn trace_pairings(&self, basis: &SpectralBasis) -> Vec<Vec<f64>> {
        self.samples.iter().map(|s| basis.trace_pairings(s)).collect()
    }
}

/// `16 (z(1−z))² cos(pπz)` on the region, `z` its affine coordinate.
fn profile(region: (f64, f64), p: usize, x: f64) -> f64 {
    let (lo, hi) = region;
    if x <= lo || x >= hi {
        return 0.0;
    }
    let z = (x - lo) / (hi - lo);
    16.0 * (z * (1.0 - z)).powi(2) * (p as f64 * PI * z).cos()
}

/// A control expressed in a [`ControlBasis`].
#[derive(Debug, Clone, PartialEq)]
pub struct ControlSignal {
    basis: ControlBasis,
    coeffs: Vec<f64>,
}

impl ControlSignal {
    pub fn new(basis: ControlBasis, coeffs: Vec<f64>) -> Self {
        ControlSignal { basis, coeffs }
    }

    pub fn zero(basis: ControlBasis) -> Self {
        ControlSignal { basis, coeffs: vec![] }
    }

    /// Basis element `j` with unit coefficient.
    pub fn element(basis: ControlBasis, j: usize) -> Self {
        let mut coeffs = vec![0.0; j + 1];
        coeffs[j] = 1.0;
        ControlSignal { basis, coeffs }
    }

    pub fn basis(&self) -> &ControlBasis {
        &self.basis
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn horizon(&self) -> f64 {
        self.basis.horizon
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0.0)
    }

    /// Time factor multiplying each spatial profile: `Σ_{j: p(j) = p} g_j θ_{k(j)}^{(order)}(t)`.
    pub fn profile_weights(&self, t: f64, order: u32) -> Vec<f64> {
        let mut w = vec![0.0; self.basis.profiles];
        for (j, &c) in self.coeffs.iter().enumerate() {
            if c != 0.0 {
                let (p, k) = self.basis.indices(j);
                w[p] += c * self.basis.temporal(k, t, order);
            }
        }
        w
    }

    /// `∂_t^order g(·, t)` on the exterior band.
    pub fn values(&self, t: f64, order: u32) -> Vec<f64> {
        let w = self.profile_weights(t, order);
        let n = self.basis.samples.first().map_or(0, Vec::len);
        let mut out = vec![0.0; n];
        for (wp, samples) in w.iter().zip(&self.basis.samples) {
            if *wp != 0.0 {
                for (o, s) in out.iter_mut().zip(samples) {
                    *o += wp * s;
                }
            }
        }
        out
    }

    /// Band × time matrix of samples.
    pub fn sample(&self, t_grid: &[f64]) -> DMatrix<f64> {
        let cols: Vec<Vec<f64>> = t_grid.iter().map(|&t| self.values(t, 0)).collect();
        let rows = cols.first().map_or(0, Vec::len);
        DMatrix::from_fn(rows, t_grid.len(), |i, j| cols[j][i])
    }

    /// True when `g`, `g_t` and `g_tt` vanish at both ends of `[0, T]`.
    pub fn is_compactly_supported(&self) -> bool {
        let t_end = self.horizon();
        (0..3).all(|d| {
            self.values(0.0, d).iter().chain(self.values(t_end, d).iter()).all(|v| v.abs() < 1e-12)
        })
    }

    /// `(∂_t^order g(·, t), N_s φ_n)` for every mode, given the profile
    /// pairings from [`ControlBasis::trace_pairings`].
    pub fn mode_pairings(&self, pairings: &[Vec<f64>], t: f64, order: u32) -> Vec<f64> {
        let w = self.profile_weights(t, order);
        let n_modes = pairings.first().map_or(0, Vec::len);
        let mut out = vec![0.0; n_modes];
        for (wp, row) in w.iter().zip(pairings) {
            if *wp != 0.0 {
                for (o, r) in out.iter_mut().zip(row) {
                    *o += wp * r;
                }
            }
        }
        out
    }

    /// The sum of two controls on the same family.
    pub fn add(&self, other: &ControlSignal) -> ControlSignal {
        let n = self.coeffs.len().max(other.coeffs.len());
        let coeffs = (0..n)
            .map(|j| self.coeffs.get(j).copied().unwrap_or(0.0) + other.coeffs.get(j).copied().unwrap_or(0.0))
            .collect();
        ControlSignal { basis: self.basis.clone(), coeffs }
    }
}

/// Harmonic lift `φ(·, t)` of a control: each spatial profile is lifted once
/// and combined with the exact temporal factors.
#[derive(Debug, Clone)]
pub struct LiftedField {
    signal: ControlSignal,
    lifts: Vec<Vec<f64>>,
}

pub fn build_lifted_field(signal: &ControlSignal, op: &NonlocalOperator) -> Result<LiftedField> {
    let lifts = signal
        .basis
        .samples
        .iter()
        .map(|s| op.solve_exterior_dirichlet(s, 0.0).map(|f| f.interior))
        .collect::<Result<Vec<_>>>()?;
    Ok(LiftedField { signal: signal.clone(), lifts })
}

impl LiftedField {
    /// `∂_t^order φ(·, t)` on every node.
    pub fn at(&self, t: f64, order: u32) -> GridFunction {
        let w = self.signal.profile_weights(t, order);
        let n = self.lifts.first().map_or(0, Vec::len);
        let mut interior = vec![0.0; n];
        for (wp, lift) in w.iter().zip(&self.lifts) {
            for (o, l) in interior.iter_mut().zip(lift) {
                *o += wp * l;
            }
        }
        GridFunction { interior, exterior: self.signal.values(t, order), tail: 0.0 }
    }

    pub fn signal(&self) -> &ControlSignal {
        &self.signal
    }
}

/// Largest ratio `‖φ‖_{L²(Ω)} / ‖g‖_{L²(band)}` over all band data: the
/// spectral norm of the lift matrix.
pub fn lift_constant(op: &NonlocalOperator) -> f64 {
    op.lift_matrix().singular_values().max()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridSpec;

    fn family() -> ControlBasis {
        let grid = Grid::new(&GridSpec { n_interior: 32, ..GridSpec::default() }).unwrap();
        ControlBasis::new(&grid, (1.2, 1.8), 4.0, 2, 16).unwrap()
    }

    #[test]
    fn envelope_derivatives_match_expansion() {
        let u: f64 = 0.3;
        let exact = 64.0 * (u * (1.0 - u)).powi(3);
        assert!((envelope(0, u) - exact).abs() < 1e-13);
        let d1 = 64.0 * 3.0 * (u * (1.0 - u)).powi(2) * (1.0 - 2.0 * u);
        assert!((envelope(1, u) - d1).abs() < 1e-12);
        assert_eq!(envelope(7, u), 0.0);
    }

    #[test]
    fn temporal_derivative_matches_finite_difference() {
        let b = family();
        let h = 1e-5;
        for k in 0..4 {
            for order in 0..4 {
                let t = 1.37;
                let fd = (b.temporal(k, t + h, order) - b.temporal(k, t - h, order)) / (2.0 * h);
                let exact = b.temporal(k, t, order + 1);
                assert!((fd - exact).abs() < 1e-5 * (1.0 + exact.abs()), "k={k} order={order}");
            }
        }
    }

    #[test]
    fn controls_vanish_at_both_ends() {
        let g = ControlSignal::new(family(), vec![0.4, -1.0, 2.0, 0.5, 0.1]);
        assert!(g.is_compactly_supported());
        assert!(g.values(2.0, 0).iter().any(|v| v.abs() > 0.0));
    }

    #[test]
    fn region_must_avoid_the_domain() {
        let grid = Grid::new(&GridSpec { n_interior: 32, ..GridSpec::default() }).unwrap();
        assert!(ControlBasis::new(&grid, (0.5, 1.5), 4.0, 2, 8).is_err());
        assert!(ControlBasis::new(&grid, (1.5, 2.5), 4.0, 2, 8).is_err());
        assert!(ControlBasis::new(&grid, (-1.8, -1.2), 4.0, 1, 8).is_ok());
    }
}
