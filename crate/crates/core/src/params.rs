//! Physical constants of the MGT model.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Coefficients of `u_ttt + α u_tt + c² (−Δ)^s u + b (−Δ)^s u_t = 0`.
///
/// Construction enforces `b > 0`, `0 < s < 1` and the stability margin
/// `γ = α − c²/b > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawParams", into = "RawParams")]
pub struct ModelParams {
    alpha: f64,
    b: f64,
    c: f64,
    s: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawParams {
    alpha: f64,
    b: f64,
    c: f64,
    s: f64,
}

impl TryFrom<RawParams> for ModelParams {
    type Error = Error;
    fn try_from(r: RawParams) -> Result<Self> {
        ModelParams::new(r.alpha, r.b, r.c, r.s)
    }
}

impl From<ModelParams> for RawParams {
    fn from(p: ModelParams) -> Self {
        RawParams { alpha: p.alpha, b: p.b, c: p.c, s: p.s }
    }
}

impl ModelParams {
    pub fn new(alpha: f64, b: f64, c: f64, s: f64) -> Result<Self> {
        for (name, v) in [("alpha", alpha), ("b", b), ("c", c), ("s", s)] {
            if !v.is_finite() {
                return Err(Error::InvalidParams(format!("{name} must be finite, got {v}")));
            }
        }
        if b <= 0.0 {
            return Err(Error::InvalidParams(format!(
                "b = {b}: the standing assumption b > 0 is violated"
            )));
        }
        if !(s > 0.0 && s < 1.0) {
            return Err(Error::InvalidParams(format!(
                "s = {s}: the fractional order must satisfy 0 < s < 1"
            )));
        }
        let gamma = alpha - c * c / b;
        if gamma <= 0.0 {
            return Err(Error::InvalidParams(format!(
                "gamma = alpha - c^2/b = {gamma}: the standing assumption gamma > 0 is violated"
            )));
        }
        Ok(ModelParams { alpha, b, c, s })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    /// `γ = α − c²/b`.
    pub fn gamma(&self) -> f64 {
        self.alpha - self.c * self.c / self.b
    }

    /// Same physics with a different fractional order.
    pub fn with_order(&self, s: f64) -> Result<Self> {
        ModelParams::new(self.alpha, self.b, self.c, s)
    }
}
