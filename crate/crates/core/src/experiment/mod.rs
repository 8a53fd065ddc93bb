//! Configuration-driven experiment runs with deterministic artifacts.
//!
//! Every subcommand writes into its own directory `<out>/<subcommand>/`,
//! finishing with `manifest.json`. Numeric outputs depend only on the
//! configuration, so reruns produce byte-identical CSV files.

pub mod config;
pub mod output;

use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::control::{
    duality_residual, moment_gram_min_eigenvalues, moment_lhs, null_controllability_pairing, real_root_trajectory,
    spectral_matrices, ControlToStateMap,
};
use crate::dual::{dual_energy_check, dual_ns_series, DualData};
use crate::error::{Error, Result};
use crate::forward::{
    regularity_estimate_probe, solve_controlled, solve_homogeneous, stepping::time_step_controlled, ControlBasis,
    ControlSignal, StateTriple,
};
use crate::fractional::NonlocalOperator;
use crate::grid::Grid;
use crate::modes::{asymptotics_report, kernel_bounds_check, solve_characteristic_cubic, BOUND_NAMES};
use crate::problem::Problem;
use crate::spectral::{SpectralBasis, SpectralCoefficients};

pub use config::{ExperimentConfig, OracleToggles};
pub use output::{atomic_write, sha256_hex, write_json, Cell, Manifest, Table};

/// Number of leading modes carrying seeded dual or initial data.
const SEEDED_MODES: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Subcommand {
    Basis,
    Roots,
    Kernels,
    Simulate,
    Dual,
    DualityCheck,
    Control,
}

impl Subcommand {
    pub const ALL: [Subcommand; 7] = [
        Subcommand::Basis,
        Subcommand::Roots,
        Subcommand::Kernels,
        Subcommand::Simulate,
        Subcommand::Dual,
        Subcommand::DualityCheck,
        Subcommand::Control,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Subcommand::Basis => "basis",
            Subcommand::Roots => "roots",
            Subcommand::Kernels => "kernels",
            Subcommand::Simulate => "simulate",
            Subcommand::Dual => "dual",
            Subcommand::DualityCheck => "duality-check",
            Subcommand::Control => "control",
        }
    }
}

impl FromStr for Subcommand {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Subcommand::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown subcommand {s:?}")))
    }
}

/// Artifacts produced by one run, relative to the run directory.
#[derive(Debug, Clone)]
pub struct RunSummary {
    pub directory: PathBuf,
    pub files: Vec<PathBuf>,
    pub manifest: PathBuf,
}

struct Sink {
    dir: PathBuf,
    files: Vec<PathBuf>,
}

impl Sink {
    fn csv(&mut self, name: &str, table: &Table) -> Result<()> {
        atomic_write(&self.dir.join(name), &table.to_csv()?)?;
        self.files.push(name.into());
        Ok(())
    }

    fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        write_json(&self.dir.join(name), value)?;
        self.files.push(name.into());
        Ok(())
    }
}

/// Run `sub` with `config`, writing under `out/<sub>/`. `config_bytes` is the
/// raw configuration text, hashed into the manifest.
pub fn run(sub: Subcommand, config: &ExperimentConfig, config_bytes: &[u8], out: &Path) -> Result<RunSummary> {
    config.validate()?;
    let started = Instant::now();
    let mut sink = Sink { dir: out.join(sub.name()), files: Vec::new() };
    std::fs::create_dir_all(&sink.dir)?;
    match sub {
        Subcommand::Roots => run_roots(config, &mut sink)?,
        Subcommand::Kernels => run_kernels(config, &mut sink)?,
        _ => {
            let problem = Problem::new(config.model, &config.grid, config.n_modes)?;
            match sub {
                Subcommand::Basis => run_basis(&problem, &mut sink)?,
                Subcommand::Simulate => run_simulate(config, &problem, &mut sink)?,
                Subcommand::Dual => run_dual(config, &problem, &mut sink)?,
                Subcommand::DualityCheck => run_duality(config, &problem, &mut sink)?,
                Subcommand::Control => run_control(config, &problem, &mut sink)?,
                Subcommand::Roots | Subcommand::Kernels => unreachable!(),
            }
        }
    }
    let manifest = Manifest {
        subcommand: sub.name().into(),
        config_sha256: sha256_hex(config_bytes),
        config: serde_json::to_value(config).map_err(|e| Error::Io(e.to_string()))?,
        mgtlab_version: env!("CARGO_PKG_VERSION").into(),
        seed: config.seed,
        threads: rayon::current_num_threads(),
        wall_time_seconds: started.elapsed().as_secs_f64(),
        files: sink.files.clone(),
    };
    let manifest_path = sink.dir.join("manifest.json");
    write_json(&manifest_path, &manifest)?;
    Ok(RunSummary { directory: sink.dir, files: sink.files, manifest: manifest_path })
}

fn rng(config: &ExperimentConfig, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(config.seed);
    r.set_stream(stream);
    r
}

fn control_basis(config: &ExperimentConfig, problem: &Problem) -> Result<ControlBasis> {
    ControlBasis::from_spec(problem.grid(), &config.control, config.horizon)
}

fn seeded_control(config: &ExperimentConfig, problem: &Problem) -> Result<ControlSignal> {
    let mut r = rng(config, 1);
    let size = config.control_sizes[0];
    let coeffs = (0..size).map(|_| r.random_range(-1.0..1.0)).collect();
    Ok(ControlSignal::new(control_basis(config, problem)?, coeffs))
}

/// Dual data on the leading modes with `H^s`-scaled decay.
fn seeded_dual(config: &ExperimentConfig, problem: &Problem) -> Result<DualData> {
    let mut r = rng(config, 2);
    let m = problem.n_modes();
    let mut psi = [vec![0.0; m], vec![0.0; m], vec![0.0; m]];
    for n in 0..SEEDED_MODES.min(m) {
        let scale = problem.eigenvalue(n).sqrt().recip();
        psi[0][n] = scale * r.random_range(-1.0..1.0);
        psi[1][n] = scale * r.random_range(-1.0..1.0);
        psi[2][n] = r.random_range(-1.0..1.0);
    }
    let [a, b, c] = psi;
    DualData::new(a, b, c, config.horizon)
}

/// The spatial spectrum without the per-mode kernel tables of a [`Problem`].
fn spectrum_only(config: &ExperimentConfig) -> Result<SpectralBasis> {
    let op = NonlocalOperator::assemble(&Grid::new(&config.grid)?, config.model.s())?;
    SpectralBasis::eigendecompose(&op, config.n_modes)
}

fn run_basis(problem: &Problem, sink: &mut Sink) -> Result<()> {
    let basis = problem.basis();
    let grid = problem.grid();
    let mut t = Table::new(["n", "lambda_n", "trace_norm"]);
    for n in 0..basis.n_modes() {
        t.push(vec![n.into(), basis.eigenvalue(n).into(), grid.exterior_norm(&basis.trace(n)).into()]);
    }
    sink.csv("eigenvalues.csv", &t)?;
    let mut modes = Table::new(["x", "phi_0", "phi_1", "phi_2", "phi_3"]);
    let shown = basis.n_modes().min(4);
    let vecs: Vec<Vec<f64>> = (0..shown).map(|n| basis.eigenvector(n)).collect();
    for (i, &x) in grid.interior_nodes().iter().enumerate() {
        let mut row = vec![Cell::Real(x)];
        row.extend((0..4).map(|n| Cell::Real(vecs.get(n).map_or(0.0, |v| v[i]))));
        modes.push(row);
    }
    sink.csv("eigenfunctions.csv", &modes)
}

fn run_roots(config: &ExperimentConfig, sink: &mut Sink) -> Result<()> {
    let params = config.model;
    let basis = spectrum_only(config)?;
    let mut t = Table::new(["n", "lambda_n", "re_l1", "re_l2", "im_l2", "residual"]);
    for (n, &lam) in basis.eigenvalues().iter().enumerate() {
        let m = solve_characteristic_cubic(&params, lam)?;
        let l2 = m.root_complex();
        t.push(vec![n.into(), lam.into(), m.root_real().into(), l2.re.into(), l2.im.into(), m.residual(&params).into()]);
    }
    sink.csv("roots.csv", &t)?;
    let lambdas: Vec<f64> = (0..=16).map(|k| 10f64.powf(0.5 * k as f64)).collect();
    let mut a = Table::new(["lambda_n", "real_root_gap", "real_part_gap", "imag_ratio_gap", "growth_gap"]);
    for row in asymptotics_report(&params, &lambdas)? {
        a.push(vec![
            row.lambda_n.into(),
            row.real_root_gap.into(),
            row.real_part_gap.into(),
            row.imag_ratio_gap.into(),
            row.growth_gap.into(),
        ]);
    }
    sink.csv("asymptotics.csv", &a)
}

fn run_kernels(config: &ExperimentConfig, sink: &mut Sink) -> Result<()> {
    let basis = spectrum_only(config)?;
    let t_grid: Vec<f64> = (0..=2000).map(|i| config.horizon * i as f64 / 2000.0).collect();
    let bounds = kernel_bounds_check(&config.model, basis.eigenvalues(), &t_grid)?;
    let mut header = vec!["n".to_string(), "lambda_n".to_string()];
    header.extend(BOUND_NAMES.iter().map(|s| s.to_string()));
    let mut t = Table::new(header);
    for (n, row) in bounds.per_mode.iter().enumerate() {
        let mut cells = vec![n.into(), basis.eigenvalue(n).into()];
        cells.extend(row.iter().map(|&v| Cell::Real(v)));
        t.push(cells);
    }
    sink.csv("bounds.csv", &t)
}

#[derive(Serialize)]
struct SimulateReport {
    control_coefficients: Vec<f64>,
    regularity_ratio: f64,
    state_sup: f64,
    forcing_sup: f64,
    time_stepping_relative_error: Option<f64>,
}

fn state_table(state: &StateTriple) -> Table {
    let mut t = Table::new(["n", "u", "u_t", "u_tt"]);
    for n in 0..state.len() {
        t.push(vec![n.into(), state.u.coeffs[n].into(), state.ut.coeffs[n].into(), state.utt.coeffs[n].into()]);
    }
    t
}

fn run_simulate(config: &ExperimentConfig, problem: &Problem, sink: &mut Sink) -> Result<()> {
    let g = seeded_control(config, problem)?;
    let horizon = config.horizon;
    let state = solve_controlled(problem, &g, horizon)?;
    sink.csv("final_state.csv", &state_table(&state))?;
    let mut traj = Table::new(["t", "u_0", "u_1", "u_2"]);
    for i in 0..=64 {
        let t = horizon * i as f64 / 64.0;
        let s = solve_controlled(problem, &g, t)?;
        let c = |n: usize| Cell::Real(s.u.coeffs.get(n).copied().unwrap_or(0.0));
        traj.push(vec![t.into(), c(0), c(1), c(2)]);
    }
    sink.csv("trajectory.csv", &traj)?;
    let t_grid: Vec<f64> = (0..=64).map(|i| horizon * i as f64 / 64.0).collect();
    let reg = regularity_estimate_probe(problem, &g, &t_grid)?;
    let oracle = if config.oracles.time_stepping {
        let stepped = time_step_controlled(problem, &g, config.oracles.time_steps)?;
        Some(relative_l2(&state.u.coeffs, &stepped.projected.u.coeffs))
    } else {
        None
    };
    sink.json(
        "report.json",
        &SimulateReport {
            control_coefficients: g.coeffs().to_vec(),
            regularity_ratio: reg.ratio,
            state_sup: reg.state_sup,
            forcing_sup: reg.forcing_sup,
            time_stepping_relative_error: oracle,
        },
    )
}

pub(crate) fn relative_l2(a: &[f64], reference: &[f64]) -> f64 {
    let num: f64 = a.iter().zip(reference).map(|(x, y)| (x - y).powi(2)).sum();
    let den: f64 = reference.iter().map(|y| y * y).sum();
    (num / den).sqrt()
}

#[derive(Serialize)]
struct DualReport {
    energy_ratio: f64,
    third_derivative_ratio: f64,
    data_energy: f64,
}

fn run_dual(config: &ExperimentConfig, problem: &Problem, sink: &mut Sink) -> Result<()> {
    let data = seeded_dual(config, problem)?;
    let horizon = config.horizon;
    let t_grid: Vec<f64> = (0..=200).map(|i| horizon * i as f64 / 200.0).collect();
    let cert = dual_energy_check(problem, &data, &t_grid)?;
    sink.json(
        "energy.json",
        &DualReport {
            energy_ratio: cert.energy_ratio,
            third_derivative_ratio: cert.third_derivative_ratio,
            data_energy: cert.data_energy,
        },
    )?;
    let times = [0.0, 0.5 * horizon, horizon];
    let traces = times.iter().map(|&t| dual_ns_series(problem, &data, t)).collect::<Result<Vec<_>>>()?;
    let mut t = Table::new(["x", "ns_psi_t0", "ns_psi_half", "ns_psi_final"]);
    for (i, &x) in problem.grid().exterior_nodes().iter().enumerate() {
        t.push(vec![x.into(), traces[0][i].into(), traces[1][i].into(), traces[2][i].into()]);
    }
    sink.csv("ns_trace.csv", &t)
}

fn run_duality(config: &ExperimentConfig, problem: &Problem, sink: &mut Sink) -> Result<()> {
    let g = seeded_control(config, problem)?;
    let data = seeded_dual(config, problem)?;
    let zero = StateTriple::zeros(problem.n_modes(), 0.0);
    let mut t = Table::new(["panels", "boundary_initial", "boundary_final", "pairing", "residual"]);
    for &panels in &config.oracles.refinement_panels {
        let gp = ControlSignal::new(g.basis().with_panels(panels), g.coeffs().to_vec());
        let r = duality_residual(problem, &gp, &zero, &data)?;
        t.push(vec![panels.into(), r.boundary_initial.into(), r.boundary_final.into(), r.pairing.into(), r.residual.into()]);
    }
    sink.csv("refinement.csv", &t)?;

    // Single-mode moment identity: with g = 0 the pairing reduces to 𝔅(0) for
    // ψ = e^{λ_{n,1}(T−t)} φ_n, which has a closed form.
    let mut r = rng(config, 3);
    let m = problem.n_modes();
    let u: Vec<Vec<f64>> = (0..3).map(|_| (0..m).map(|_| r.random_range(-1.0..1.0)).collect()).collect();
    let initial = StateTriple::from_vecs(u[0].clone(), u[1].clone(), u[2].clone(), 0.0);
    let silent = ControlSignal::zero(g.basis().clone());
    let mut mt = Table::new(["n", "pairing", "closed_form", "relative_difference"]);
    for n in 0..SEEDED_MODES.min(m) {
        let psi = real_root_trajectory(problem, n, config.horizon)?;
        let pairing = null_controllability_pairing(problem, &initial, &silent, &psi)?;
        let closed = moment_lhs(problem, n, u[0][n], u[1][n], u[2][n], config.horizon);
        mt.push(vec![n.into(), pairing.into(), closed.into(), ((pairing - closed).abs() / closed.abs()).into()]);
    }
    sink.csv("moments.csv", &mt)
}

fn run_control(config: &ExperimentConfig, problem: &Problem, sink: &mut Sink) -> Result<()> {
    let params = problem.params();
    let mut det = Table::new(["n", "lambda_n", "det_b_relative_error", "det_a_relative_error", "b_min_singular_value"]);
    for (n, k) in problem.kernels().iter().enumerate() {
        let mats = spectral_matrices(k, params);
        det.push(vec![
            n.into(),
            k.mode().lambda_n().into(),
            mats.det_b_relative_error().into(),
            mats.det_a_relative_error().into(),
            mats.b_min_singular_value.into(),
        ]);
    }
    sink.csv("determinants.csv", &det)?;

    let mut gram = Table::new(["modes", "min_eigenvalue"]);
    for (i, v) in moment_gram_min_eigenvalues(problem, config.horizon).into_iter().enumerate() {
        gram.push(vec![(i + 1).into(), v.into()]);
    }
    sink.csv("moment_gram.csv", &gram)?;

    let basis = control_basis(config, problem)?;
    let epsilon = config.synthesis_epsilon;
    let target = low_mode_target(problem.n_modes(), config.horizon);
    let mut sizes = Table::new(["size", "epsilon", "misfit", "control_norm", "condition_estimate"]);
    let mut largest = None;
    for &size in &config.control_sizes {
        let map = ControlToStateMap::assemble(problem, &basis, size)?;
        let s = map.solve(&target, epsilon)?;
        sizes.push(vec![size.into(), epsilon.into(), s.misfit.into(), s.control_norm.into(), s.condition_estimate.into()]);
        if size == config.largest_control_size() {
            largest = Some(map);
        }
    }
    sink.csv("approximate.csv", &sizes)?;

    let map = largest.expect("the largest size is among the swept sizes");
    let null_target = null_target(problem, config.horizon)?;
    let mut sweep = Table::new(["epsilon", "misfit", "control_norm", "condition_estimate"]);
    for row in map.epsilon_sweep(&null_target, &config.epsilons)? {
        sweep.push(vec![row.epsilon.into(), row.misfit.into(), row.control_norm.into(), row.condition_estimate.into()]);
    }
    sink.csv("null_sweep.csv", &sweep)
}

/// `(0, 0, φ_1)` at the horizon.
pub fn low_mode_target(n_modes: usize, horizon: f64) -> StateTriple {
    let mut t = StateTriple::zeros(n_modes, horizon);
    t.utt.coeffs[0] = 1.0;
    t
}

/// Negated free final state from `(φ_1 + φ_2/2, 0, 0)`: reaching it drives
/// that data to rest.
pub fn null_target(problem: &Problem, horizon: f64) -> Result<StateTriple> {
    let m = problem.n_modes();
    let mut u0 = vec![0.0; m];
    u0[0] = 1.0;
    if m > 1 {
        u0[1] = 0.5;
    }
    let free = solve_homogeneous(
        problem,
        &SpectralCoefficients::l2(u0),
        &SpectralCoefficients::zeros(m),
        &SpectralCoefficients::zeros(m),
        horizon,
    )?;
    Ok(free.scaled(-1.0))
}
