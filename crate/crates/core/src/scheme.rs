//! Three-stage splitting step (transport, Poisson, momentum source) and the
//! time integrator with exact snapshot landing.

use crate::config::{GuessPolicy, SchemeConfig, SourceTreatment, Variant};
use crate::error::{Error, Result};
use crate::grid::Grid1D;
use crate::hydro::{compute_dt, hydro_step_with};
use crate::poisson::{quasineutral_potential, solve_poisson_boltzmann, FieldBoundary, PoissonSolveStats};
use crate::source::{epb_force_update, repb_source, repb_source_update};
use crate::state::{FluidState, PotentialField};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepRecord {
    pub t_before: f64,
    pub dt: f64,
    pub newton: PoissonSolveStats,
    pub max_density: f64,
    pub min_density: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub t: f64,
    pub state: FluidState,
    pub phi: PotentialField,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub snapshots: Vec<Snapshot>,
    pub step_log: Vec<StepRecord>,
    pub config: SchemeConfig,
}

impl RunResult {
    pub fn last(&self) -> &Snapshot {
        self.snapshots.last().expect("a run always has its initial snapshot")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepOutput {
    pub state: FluidState,
    pub phi: PotentialField,
    pub dt: f64,
    pub newton: PoissonSolveStats,
}

/// Potential consistent with `state`, solved from a quasineutral guess.
pub fn initial_potential(
    state: &FluidState,
    config: &SchemeConfig,
    grid: &Grid1D,
) -> Result<(PotentialField, PoissonSolveStats)> {
    let bc = FieldBoundary::from_boundary(&config.boundary);
    let guess = quasineutral_potential(state.density())?;
    solve_poisson_boltzmann(state.density(), config.lambda, grid.h(), &bc, &guess, &config.newton)
}

/// One step with the CFL time step.
pub fn step(state: &FluidState, phi_prev: &PotentialField, config: &SchemeConfig, grid: &Grid1D) -> Result<StepOutput> {
    let dt = compute_dt(state, grid, &config.boundary, config.cfl);
    step_with_dt(state, phi_prev, config, grid, dt)
}

/// One step with a caller-chosen `dt` (which should not exceed the CFL step).
pub fn step_with_dt(
    state: &FluidState,
    phi_prev: &PotentialField,
    config: &SchemeConfig,
    grid: &Grid1D,
    dt: f64,
) -> Result<StepOutput> {
    let bc = FieldBoundary::from_boundary(&config.boundary);
    let hydro = hydro_step_with(state, grid, config.variant, &config.boundary, config.dissipation, dt)?;

    let quasineutral;
    let guess = match config.newton.guess_policy {
        GuessPolicy::PreviousPotential => phi_prev,
        GuessPolicy::QuasiNeutral => {
            quasineutral = quasineutral_potential(hydro.density())?;
            &quasineutral
        }
    };
    let (phi, newton) = solve_poisson_boltzmann(hydro.density(), config.lambda, grid.h(), &bc, guess, &config.newton)?;

    let state = match (config.sources, config.variant) {
        (SourceTreatment::Disabled, _) => hydro,
        (SourceTreatment::Coupled, Variant::Epb) => epb_force_update(&hydro, &phi, dt, grid.h(), &bc)?,
        (SourceTreatment::Coupled, Variant::Repb) => {
            let q = repb_source(&phi, config.lambda, grid.h(), &bc)?;
            repb_source_update(&hydro, &q, dt)?
        }
    };
    if let Some(cell) = state.momentum().iter().position(|q| !q.is_finite()) {
        return Err(Error::NonFinite {
            cell,
            value: state.momentum()[cell],
        });
    }
    Ok(StepOutput { state, phi, dt, newton })
}

/// A single simulation advancing in time.
#[derive(Debug, Clone)]
pub struct Simulation {
    grid: Grid1D,
    config: SchemeConfig,
    state: FluidState,
    phi: PotentialField,
    t: f64,
    log: Vec<StepRecord>,
}

impl Simulation {
    pub fn new(initial: FluidState, config: SchemeConfig, grid: Grid1D) -> Result<Self> {
        config.validate()?;
        if initial.len() != grid.n_cells() {
            return Err(Error::LengthMismatch {
                expected: grid.n_cells(),
                found: initial.len(),
            });
        }
        let (phi, _) = initial_potential(&initial, &config, &grid).map_err(|e| e.at_time(0.0))?;
        Ok(Self {
            grid,
            config,
            state: initial,
            phi,
            t: 0.0,
            log: Vec::new(),
        })
    }

    pub fn time(&self) -> f64 {
        self.t
    }

    pub fn state(&self) -> &FluidState {
        &self.state
    }

    pub fn potential(&self) -> &PotentialField {
        &self.phi
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    pub fn config(&self) -> &SchemeConfig {
        &self.config
    }

    pub fn step_log(&self) -> &[StepRecord] {
        &self.log
    }

    pub fn snapshot(&self) -> Snapshot {
        Snapshot {
            t: self.t,
            state: self.state.clone(),
            phi: self.phi.clone(),
        }
    }

    /// Takes one step, shortened if needed so as not to pass `t_target`.
    /// Returns false when already at `t_target`.
    pub fn step_toward(&mut self, t_target: f64) -> Result<bool> {
        let remaining = t_target - self.t;
        if remaining <= 0.0 {
            return Ok(false);
        }
        let dt_cfl = compute_dt(&self.state, &self.grid, &self.config.boundary, self.config.cfl);
        let lands = dt_cfl >= remaining;
        let dt = if lands { remaining } else { dt_cfl };
        let out = step_with_dt(&self.state, &self.phi, &self.config, &self.grid, dt).map_err(|e| e.at_time(self.t))?;
        self.log.push(StepRecord {
            t_before: self.t,
            dt,
            newton: out.newton,
            max_density: out.state.max_density(),
            min_density: out.state.min_density(),
        });
        self.state = out.state;
        self.phi = out.phi;
        self.t = if lands { t_target } else { self.t + dt };
        Ok(true)
    }

    pub fn advance_to(&mut self, t_target: f64) -> Result<()> {
        while self.step_toward(t_target)? {}
        Ok(())
    }

    pub fn into_log(self) -> Vec<StepRecord> {
        self.log
    }
}

/// Integrates to `t_end`, landing exactly on every snapshot time. The first
/// snapshot is the initial state with its Poisson potential.
pub fn run(
    initial: FluidState,
    config: &SchemeConfig,
    grid: &Grid1D,
    t_end: f64,
    snapshot_times: &[f64],
) -> Result<RunResult> {
    if !(t_end >= 0.0) {
        return Err(Error::InvalidConfig(format!("t_end must be >= 0, got {t_end}")));
    }
    if let Some(t) = snapshot_times.iter().find(|&&t| !(0.0..=t_end).contains(&t)) {
        return Err(Error::InvalidConfig(format!("snapshot time {t} outside [0, {t_end}]")));
    }
    let mut times: Vec<f64> = snapshot_times.iter().copied().filter(|&t| t > 0.0).collect();
    times.sort_by(f64::total_cmp);
    times.dedup();

    let mut sim = Simulation::new(initial, *config, grid.clone())?;
    let mut snapshots = vec![sim.snapshot()];
    for t in times {
        sim.advance_to(t)?;
        snapshots.push(sim.snapshot());
    }
    sim.advance_to(t_end)?;
    Ok(RunResult {
        snapshots,
        step_log: sim.into_log(),
        config: *config,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Boundary;
    use crate::grid::{make_grid, sample_on_grid};
    use crate::source::centered_gradient;
    use std::f64::consts::PI;

    fn smooth_state(grid: &Grid1D) -> FluidState {
        let n = sample_on_grid(|x| 1.0 + 0.3 * x.sin(), grid).unwrap();
        let u = sample_on_grid(|x| 0.2 * (2.0 * x).cos(), grid).unwrap();
        FluidState::from_velocity(n, &u).unwrap()
    }

    #[test]
    fn rest_state_is_fixed_point() {
        let g = make_grid(64, 0.0, 1.0).unwrap();
        for v in Variant::ALL {
            for lambda in [1.0, 1e-4] {
                let cfg = SchemeConfig::new(v, lambda, Boundary::Periodic);
                let out = step(&FluidState::rest(64), &PotentialField::zeros(64), &cfg, &g).unwrap();
                assert_eq!(out.state, FluidState::rest(64));
                assert!(out.phi.values().iter().all(|&p| p == 0.0));
            }
        }
    }

    #[test]
    fn repb_with_tiny_lambda_is_ice() {
        let g = make_grid(200, 0.0, 2.0 * PI).unwrap();
        let s = smooth_state(&g);
        let cfg = SchemeConfig::new(Variant::Repb, 1e-8, Boundary::Periodic);
        let (phi0, _) = initial_potential(&s, &cfg, &g).unwrap();
        let full = step(&s, &phi0, &cfg, &g).unwrap();
        let ice = step(&s, &phi0, &cfg.without_sources(), &g).unwrap();
        let diff = full
            .state
            .momentum()
            .iter()
            .zip(ice.state.momentum())
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        assert!(diff <= 1e-10, "max diff {diff}");
        assert_eq!(full.state.density(), ice.state.density());
    }

    #[test]
    fn epb_with_tiny_lambda_uses_log_density_gradient() {
        let g = make_grid(200, 0.0, 2.0 * PI).unwrap();
        let n = sample_on_grid(|x| 1.0 + 0.3 * x.sin(), &g).unwrap();
        let s = FluidState::new(n, vec![0.0; 200]).unwrap();
        let cfg = SchemeConfig::new(Variant::Epb, 1e-8, Boundary::Periodic);
        let (phi0, _) = initial_potential(&s, &cfg, &g).unwrap();
        let out = step(&s, &phi0, &cfg, &g).unwrap();
        let hydro = hydro_step_with(&s, &g, Variant::Epb, &cfg.boundary, cfg.dissipation, out.dt).unwrap();
        let log_potential = quasineutral_potential(hydro.density()).unwrap();
        let grad = centered_gradient(&log_potential, g.h(), &FieldBoundary::Periodic);
        for j in 0..200 {
            let expect = hydro.momentum()[j] + out.dt * hydro.density()[j] * grad[j];
            assert!((out.state.momentum()[j] - expect).abs() < 1e-9);
        }
    }

    #[test]
    fn density_is_transport_only() {
        let g = make_grid(100, 0.0, 2.0 * PI).unwrap();
        let s = smooth_state(&g);
        for v in Variant::ALL {
            let cfg = SchemeConfig::new(v, 1.0, Boundary::Periodic);
            let (phi0, _) = initial_potential(&s, &cfg, &g).unwrap();
            let out = step(&s, &phi0, &cfg, &g).unwrap();
            let hydro = hydro_step_with(&s, &g, v, &cfg.boundary, cfg.dissipation, out.dt).unwrap();
            assert_eq!(out.state.density(), hydro.density());
        }
    }

    #[test]
    fn run_zero_time_and_rest() {
        let g = make_grid(32, 0.0, 1.0).unwrap();
        let cfg = SchemeConfig::new(Variant::Repb, 0.5, Boundary::Periodic);
        let r = run(FluidState::rest(32), &cfg, &g, 0.0, &[]).unwrap();
        assert_eq!(r.snapshots.len(), 1);
        assert!(r.step_log.is_empty());

        let r = run(FluidState::rest(32), &cfg, &g, 1.0, &[0.25, 0.5, 1.0]).unwrap();
        assert_eq!(r.snapshots.len(), 4);
        for s in &r.snapshots {
            assert_eq!(s.state, FluidState::rest(32));
        }
        let times: Vec<f64> = r.snapshots.iter().map(|s| s.t).collect();
        assert_eq!(times, vec![0.0, 0.25, 0.5, 1.0]);
    }

    #[test]
    fn run_is_deterministic_and_conserves_mass() {
        let g = make_grid(128, 0.0, 2.0 * PI).unwrap();
        for v in Variant::ALL {
            let cfg = SchemeConfig::new(v, 0.5, Boundary::Periodic);
            let a = run(smooth_state(&g), &cfg, &g, 0.5, &[0.1, 0.3]).unwrap();
            let b = run(smooth_state(&g), &cfg, &g, 0.5, &[0.1, 0.3]).unwrap();
            assert_eq!(a, b);
            let m0 = a.snapshots[0].state.mass(g.h());
            let m1 = a.last().state.mass(g.h());
            assert!((m1 - m0).abs() <= 1e-13 * m0);
            assert!(a.step_log.iter().all(|r| r.dt > 0.0 && r.newton.converged));
            let t: Vec<f64> = a.snapshots.iter().map(|s| s.t).collect();
            assert_eq!(t, vec![0.0, 0.1, 0.3]);
        }
    }

    #[test]
    fn rejects_bad_snapshot_times() {
        let g = make_grid(8, 0.0, 1.0).unwrap();
        let cfg = SchemeConfig::new(Variant::Repb, 0.5, Boundary::Periodic);
        assert!(run(FluidState::rest(8), &cfg, &g, 1.0, &[2.0]).is_err());
        assert!(run(FluidState::rest(8), &cfg, &g, -1.0, &[]).is_err());
    }

    #[test]
    fn newton_failure_carries_time() {
        let g = make_grid(64, 0.0, 2.0 * PI).unwrap();
        let mut cfg = SchemeConfig::new(Variant::Epb, 1.0, Boundary::Periodic);
        let mut sim = Simulation::new(smooth_state(&g), cfg, g.clone()).unwrap();
        sim.advance_to(0.05).unwrap();
        cfg.newton.max_iter = 1;
        cfg.newton.tol_residual = 1e-300;
        cfg.newton.guess_policy = GuessPolicy::QuasiNeutral;
        let mut broken = Simulation { config: cfg, ..sim };
        let t = broken.time();
        match broken.step_toward(1.0).unwrap_err() {
            Error::Step { t: at, source } => {
                assert_eq!(at, t);
                assert!(matches!(*source, Error::NonConvergence(_)));
            }
            other => panic!("unexpected {other:?}"),
        }
    }
}
