//! Independent time-stepping route for the controlled problem.
//!
//! With `u = w + φ`, `φ(·,t)` the harmonic lift of `g(·,t)`, the interior field
//! `w` satisfies `w‴ + αw″ + c² K w + b K w′ = −(φ‴ + αφ″)` with zero data,
//! `K` the interior block of the discrete operator. The first-order form
//! `y = (w, w′, w″)` is advanced with the implicit trapezoidal rule.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::forward::control::{build_lifted_field, ControlSignal};
use crate::forward::StateTriple;
use crate::problem::Problem;

/// Interior fields at the final time and their spectral projections.
#[derive(Debug, Clone)]
pub struct SteppedState {
    pub u: Vec<f64>,
    pub ut: Vec<f64>,
    pub utt: Vec<f64>,
    pub projected: StateTriple,
}

pub fn time_step_controlled(problem: &Problem, g: &ControlSignal, steps: usize) -> Result<SteppedState> {
    if steps == 0 {
        return Err(Error::Domain("time stepping needs at least one step".into()));
    }
    let op = problem.operator();
    let params = problem.params();
    let n = problem.grid().n_interior();
    let horizon = g.horizon();
    let dt = horizon / steps as f64;
    let lift = build_lifted_field(g, op)?;

    let k = op.matrix_dd();
    let mut system = DMatrix::<f64>::zeros(3 * n, 3 * n);
    for i in 0..n {
        system[(i, n + i)] = 1.0;
        system[(n + i, 2 * n + i)] = 1.0;
        system[(2 * n + i, 2 * n + i)] = -params.alpha();
    }
    let c2 = params.c().powi(2);
    for i in 0..n {
        for j in 0..n {
            system[(2 * n + i, j)] = -c2 * k[(i, j)];
            system[(2 * n + i, n + j)] = -params.b() * k[(i, j)];
        }
    }
    let eye = DMatrix::<f64>::identity(3 * n, 3 * n);
    let implicit = (&eye - &system * (0.5 * dt)).lu();
    let explicit = &eye + &system * (0.5 * dt);

    let forcing = |t: f64| {
        let p3 = lift.at(t, 3).interior;
        let p2 = lift.at(t, 2).interior;
        let mut f = DVector::zeros(3 * n);
        for i in 0..n {
            f[2 * n + i] = -(p3[i] + params.alpha() * p2[i]);
        }
        f
    };

    let mut y = DVector::<f64>::zeros(3 * n);
    let mut f_prev = forcing(0.0);
    for step in 0..steps {
        let t_next = (step + 1) as f64 * dt;
        let f_next = forcing(t_next.min(horizon));
        let rhs = &explicit * &y + (&f_prev + &f_next) * (0.5 * dt);
        y = implicit
            .solve(&rhs)
            .ok_or_else(|| Error::LinAlg(format!("implicit trapezoid step {step} is singular")))?;
        f_prev = f_next;
    }

    let phi: Vec<Vec<f64>> = (0..3).map(|d| lift.at(horizon, d).interior).collect();
    let field = |block: usize| -> Vec<f64> { (0..n).map(|i| y[block * n + i] + phi[block][i]).collect() };
    let (u, ut, utt) = (field(0), field(1), field(2));
    let basis = problem.basis();
    let projected = StateTriple::from_vecs(basis.project(&u), basis.project(&ut), basis.project(&utt), horizon);
    Ok(SteppedState { u, ut, utt, projected })
}
