//! Spectral simulation and exterior-controllability laboratory for the
//! nonlocal Moore–Gibson–Thompson equation
//!
//! ```text
//! u_ttt + α u_tt + c² (−Δ)^s u + b (−Δ)^s u_t = 0   in Ω × (0, T),
//! u = g χ_{𝒪×(0,T)}                                  in (ℝ \ Ω) × (0, T),
//! ```
//!
//! on an interval Ω with the control acting on an exterior set 𝒪.

// Negated comparisons reject NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod control;
pub mod dual;
pub mod error;
pub mod experiment;
pub mod forward;
pub mod fractional;
pub mod grid;
pub mod modes;
pub mod params;
pub mod problem;
pub mod quadrature;
pub mod spectral;

pub use error::{Error, Result, Warning};
pub use fractional::{normalization_constant, NonlocalOperator};
pub use grid::{Grid, GridFunction, GridSpec};
pub use modes::{solve_characteristic_cubic, KernelSet, ModeTriple};
pub use params::ModelParams;
pub use problem::Problem;
pub use forward::{ControlBasis, ControlSignal, StateTriple};
pub use spectral::{Space, SpectralBasis, SpectralCoefficients};

/// The guide's chapters, compiled so that `cargo test --doc` runs their
/// snippets.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/operator.md")]
    mod operator {}
    #[doc = include_str!("../../../book/src/modes.md")]
    mod modes {}
    #[doc = include_str!("../../../book/src/forward.md")]
    mod forward {}
    #[doc = include_str!("../../../book/src/duality.md")]
    mod duality {}
    #[doc = include_str!("../../../book/src/controllability.md")]
    mod controllability {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
