//! Benchmark campaigns (soliton, Riemann, branch tests), error metrics and
//! CSV report emission.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use sha2::{Digest, Sha256};

use crate::config::{Boundary, Dissipation, NewtonParams, SchemeConfig, Variant, DEFAULT_CFL};
use crate::error::{Error, Result};
use crate::grid::{make_grid, sample_on_grid, Grid1D};
use crate::scheme::{run, Snapshot, StepRecord};
use crate::soliton::{integrate_sagdeev, resample_profile, translated_reference, SolitonParams};
use crate::state::{Conserved, FluidState};

/// `max|num - ref| / max|ref|`.
pub fn linf_rel_error(num: &[f64], reference: &[f64]) -> Result<f64> {
    if num.len() != reference.len() {
        return Err(Error::LengthMismatch {
            expected: reference.len(),
            found: num.len(),
        });
    }
    let norm = reference.iter().fold(0.0f64, |m, r| m.max(r.abs()));
    if norm == 0.0 {
        return Err(Error::ZeroReferenceNorm);
    }
    let diff = num.iter().zip(reference).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    Ok(diff / norm)
}

/// Logarithmic decay rate of a peak amplitude over `dt_increment`.
pub fn damping_decrement(amp_prev: f64, amp_next: f64, dt_increment: f64) -> Result<f64> {
    for a in [amp_prev, amp_next] {
        if !(a > 0.0) {
            return Err(Error::NonPositiveAmplitude(a));
        }
    }
    if !(dt_increment > 0.0) {
        return Err(Error::InvalidConfig(format!(
            "time increment must be positive, got {dt_increment}"
        )));
    }
    Ok((amp_next / amp_prev).ln().abs() / dt_increment)
}

/// `log2(eps[i] / eps[i + 1])` for successive grid halvings.
pub fn observed_orders(eps: &[f64]) -> Vec<f64> {
    eps.windows(2).map(|w| (w[0] / w[1]).log2()).collect()
}

pub fn total_variation(values: &[f64]) -> f64 {
    values.windows(2).map(|w| (w[1] - w[0]).abs()).sum()
}

/// Linear interpolation of cell values of a periodic grid at position `x`.
pub fn sample_periodic(values: &[f64], grid: &Grid1D, x: f64) -> f64 {
    let n = values.len();
    let s = (x - grid.x_min()) / grid.h() - 0.5;
    let k = s.floor();
    let w = s - k;
    let i = (k as i64).rem_euclid(n as i64) as usize;
    let a = values[i];
    if w == 0.0 {
        a
    } else {
        (1.0 - w) * a + w * values[(i + 1) % n]
    }
}

fn resample_periodic(values: &[f64], from: &Grid1D, to: &Grid1D) -> Vec<f64> {
    to.centers().iter().map(|&x| sample_periodic(values, from, x)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorRow {
    pub variant: Variant,
    pub lambda: f64,
    pub n_cells: usize,
    pub eps_n: f64,
    pub eps_q: f64,
    pub eps_phi: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DampingSeries {
    pub variant: Variant,
    pub n_cells: usize,
    pub dt_increment: f64,
    pub amplitudes: Vec<f64>,
    pub decrements: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellFailure {
    pub variant: Variant,
    pub lambda: f64,
    pub n_cells: usize,
    pub message: String,
}

impl CellFailure {
    fn new(variant: Variant, lambda: f64, n_cells: usize, err: &Error) -> Self {
        let mut message = err.to_string();
        let mut source = std::error::Error::source(err);
        while let Some(s) = source {
            let _ = write!(message, ": {s}");
            source = s.source();
        }
        Self {
            variant,
            lambda,
            n_cells,
            message,
        }
    }
}

/// A labelled field snapshot for output.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldSnapshot {
    pub label: String,
    pub grid: Grid1D,
    pub snapshot: Snapshot,
}

/// Scheme settings shared by every run of a campaign.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SchemeTuning {
    pub cfl: f64,
    pub newton: NewtonParams,
    pub dissipation: Dissipation,
}

impl Default for SchemeTuning {
    fn default() -> Self {
        Self {
            cfl: DEFAULT_CFL,
            newton: NewtonParams::default(),
            dissipation: Dissipation::default(),
        }
    }
}

impl SchemeTuning {
    pub fn config(&self, variant: Variant, lambda: f64, boundary: Boundary) -> SchemeConfig {
        SchemeConfig::new(variant, lambda, boundary)
            .with_cfl(self.cfl)
            .with_newton(self.newton)
            .with_dissipation(self.dissipation)
    }
}

// ---------------------------------------------------------------------------
// Soliton

#[derive(Debug, Clone, PartialEq)]
pub struct SolitonCampaign {
    pub params: SolitonParams,
    pub grids: Vec<usize>,
    pub variants: Vec<Variant>,
    /// Grids on which the long damping run is made.
    pub damping_grids: Vec<usize>,
    /// Number of `t_L / 5` intervals in the damping run.
    pub damping_intervals: usize,
    pub tuning: SchemeTuning,
}

impl Default for SolitonCampaign {
    fn default() -> Self {
        Self {
            params: SolitonParams::default(),
            grids: vec![250, 500, 1000, 2000, 4000, 8000, 16000],
            variants: Variant::ALL.to_vec(),
            damping_grids: vec![1000, 16000],
            damping_intervals: 10,
            tuning: SchemeTuning::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolitonOutcome {
    pub support: f64,
    pub t_l: f64,
    pub errors: Vec<ErrorRow>,
    pub damping: Vec<DampingSeries>,
    pub snapshots: Vec<FieldSnapshot>,
    pub failures: Vec<CellFailure>,
}

enum SolitonJob {
    Errors(Variant, usize),
    Damping(Variant, usize),
}

enum SolitonResult {
    Errors(ErrorRow, FieldSnapshot),
    Damping(DampingSeries),
}

/// Errors at `t_L / 5` against the translated initial profile on each grid,
/// and peak-density decrements every `t_L / 5` on the damping grids.
pub fn soliton_campaign(campaign: &SolitonCampaign) -> Result<SolitonOutcome> {
    let profile = integrate_sagdeev(&campaign.params)?;
    let support = profile.support();
    let t_l = profile.t_l;
    let t_err = t_l / 5.0;

    let mut jobs = Vec::new();
    for &v in &campaign.variants {
        jobs.extend(campaign.grids.iter().map(|&n| SolitonJob::Errors(v, n)));
        jobs.extend(campaign.damping_grids.iter().map(|&n| SolitonJob::Damping(v, n)));
    }
    let results: Vec<(Variant, usize, Result<SolitonResult>)> = jobs
        .par_iter()
        .map(|job| {
            let (v, n) = match *job {
                SolitonJob::Errors(v, n) | SolitonJob::Damping(v, n) => (v, n),
            };
            let res = (|| {
                let grid = make_grid(n, 0.0, support)?;
                let (state, phi) = resample_profile(&profile, &grid)?;
                let config = campaign.tuning.config(v, 1.0, Boundary::Periodic);
                match job {
                    SolitonJob::Errors(..) => {
                        let out = run(state.clone(), &config, &grid, t_err, &[t_err])?;
                        let last = out.last();
                        let (ref_state, ref_phi) =
                            translated_reference(&state, &phi, campaign.params.u0 * t_err, &grid)?;
                        let row = ErrorRow {
                            variant: v,
                            lambda: 1.0,
                            n_cells: n,
                            eps_n: linf_rel_error(last.state.density(), ref_state.density())?,
                            eps_q: linf_rel_error(last.state.momentum(), ref_state.momentum())?,
                            eps_phi: linf_rel_error(last.phi.values(), ref_phi.values())?,
                        };
                        let snap = FieldSnapshot {
                            label: format!("soliton_{}_n{n}", v.name()),
                            grid: grid.clone(),
                            snapshot: last.clone(),
                        };
                        Ok(SolitonResult::Errors(row, snap))
                    }
                    SolitonJob::Damping(..) => {
                        let k = campaign.damping_intervals;
                        let times: Vec<f64> = (1..=k).map(|i| i as f64 * t_err).collect();
                        let out = run(state, &config, &grid, k as f64 * t_err, &times)?;
                        let amplitudes: Vec<f64> = out.snapshots.iter().map(|s| s.state.max_density()).collect();
                        let decrements = amplitudes
                            .windows(2)
                            .map(|w| damping_decrement(w[0], w[1], t_err))
                            .collect::<Result<Vec<f64>>>()?;
                        Ok(SolitonResult::Damping(DampingSeries {
                            variant: v,
                            n_cells: n,
                            dt_increment: t_err,
                            amplitudes,
                            decrements,
                        }))
                    }
                }
            })();
            (v, n, res)
        })
        .collect();

    let mut outcome = SolitonOutcome {
        support,
        t_l,
        errors: Vec::new(),
        damping: Vec::new(),
        snapshots: Vec::new(),
        failures: Vec::new(),
    };
    for (v, n, res) in results {
        match res {
            Ok(SolitonResult::Errors(row, snap)) => {
                outcome.errors.push(row);
                outcome.snapshots.push(snap);
            }
            Ok(SolitonResult::Damping(series)) => outcome.damping.push(series),
            Err(e) => {
                log::warn!("soliton {v} N={n} failed: {e}");
                outcome.failures.push(CellFailure::new(v, 1.0, n, &e));
            }
        }
    }
    Ok(outcome)
}

// ---------------------------------------------------------------------------
// Riemann

pub const RIEMANN_DOMAIN: (f64, f64) = (-0.2, 0.2);

#[derive(Debug, Clone, PartialEq)]
pub struct RiemannCampaign {
    pub lambdas: Vec<f64>,
    pub grids: Vec<usize>,
    pub variants: Vec<Variant>,
    pub t_snapshots: Vec<f64>,
    pub tuning: SchemeTuning,
}

impl Default for RiemannCampaign {
    fn default() -> Self {
        Self {
            lambdas: vec![1e-2, 1e-3, 1e-4],
            grids: vec![2000, 32000],
            variants: Variant::ALL.to_vec(),
            t_snapshots: vec![0.1, 0.2],
            tuning: SchemeTuning::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RiemannMetrics {
    pub variant: Variant,
    pub lambda: f64,
    pub n_cells: usize,
    pub t: f64,
    /// Median density over the central fifth of the domain.
    pub plateau: f64,
    pub left_shock: f64,
    pub right_shock: f64,
    /// Mean outward shock speed measured from the origin.
    pub shock_speed: f64,
    pub total_variation: f64,
    pub max_density: f64,
    pub mass: f64,
    /// Initial mass plus the constant boundary influx.
    pub expected_mass: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RiemannOutcome {
    pub metrics: Vec<RiemannMetrics>,
    pub snapshots: Vec<FieldSnapshot>,
    pub failures: Vec<CellFailure>,
}

/// Colliding streams `u = +1 | -1` over uniform density, with the constant
/// ghost states used as boundary.
pub fn riemann_setup(n_cells: usize) -> Result<(Grid1D, FluidState, Boundary)> {
    let grid = make_grid(n_cells, RIEMANN_DOMAIN.0, RIEMANN_DOMAIN.1)?;
    let u = sample_on_grid(|x| if x < 0.0 { 1.0 } else { -1.0 }, &grid)?;
    let state = FluidState::from_velocity(vec![1.0; n_cells], &u)?;
    let boundary = Boundary::FictitiousStates {
        left: Conserved::new(1.0, 1.0),
        right: Conserved::new(1.0, -1.0),
    };
    Ok((grid, state, boundary))
}

/// Measures plateau, shock positions and mass on a Riemann snapshot.
pub fn riemann_metrics(
    variant: Variant,
    lambda: f64,
    grid: &Grid1D,
    snapshot: &Snapshot,
    initial_mass: f64,
    influx_rate: f64,
) -> RiemannMetrics {
    let n = snapshot.state.density();
    let centers = grid.centers();
    let mid = 0.5 * (grid.x_min() + grid.x_max());
    let half_width = 0.1 * grid.length();
    let mut central: Vec<f64> = centers
        .iter()
        .zip(n)
        .filter(|(x, _)| (**x - mid).abs() < half_width)
        .map(|(_, &v)| v)
        .collect();
    central.sort_by(f64::total_cmp);
    let plateau = match central.len() {
        0 => f64::NAN,
        len if len % 2 == 1 => central[len / 2],
        len => 0.5 * (central[len / 2 - 1] + central[len / 2]),
    };
    let steepest = |range: std::ops::Range<usize>| {
        range
            .max_by(|&a, &b| (n[a + 1] - n[a]).abs().total_cmp(&(n[b + 1] - n[b]).abs()))
            .map(|j| grid.interface(j + 1))
            .unwrap_or(f64::NAN)
    };
    let half = n.len() / 2;
    let left_shock = steepest(0..half.saturating_sub(1));
    let right_shock = steepest(half..n.len() - 1);
    let t = snapshot.t;
    RiemannMetrics {
        variant,
        lambda,
        n_cells: n.len(),
        t,
        plateau,
        left_shock,
        right_shock,
        shock_speed: if t > 0.0 {
            ((right_shock - mid) - (left_shock - mid)) / (2.0 * t)
        } else {
            0.0
        },
        total_variation: total_variation(n),
        max_density: snapshot.state.max_density(),
        mass: snapshot.state.mass(grid.h()),
        expected_mass: initial_mass + influx_rate * t,
    }
}

pub fn riemann_campaign(campaign: &RiemannCampaign) -> RiemannOutcome {
    let t_end = campaign.t_snapshots.iter().copied().fold(0.0, f64::max);
    let cells: Vec<(Variant, f64, usize)> = campaign
        .variants
        .iter()
        .flat_map(|&v| {
            campaign
                .lambdas
                .iter()
                .flat_map(move |&l| campaign.grids.iter().map(move |&n| (v, l, n)))
        })
        .collect();
    let results: Vec<_> = cells
        .par_iter()
        .map(|&(v, lambda, n)| {
            let res = (|| {
                let (grid, state, boundary) = riemann_setup(n)?;
                let m0 = state.mass(grid.h());
                let influx = match boundary {
                    Boundary::FictitiousStates { left, right } => left.q - right.q,
                    // the setup only builds fictitious states
                    Boundary::Periodic | Boundary::Outflow => 0.0,
                };
                let config = campaign.tuning.config(v, lambda, boundary);
                let out = run(state, &config, &grid, t_end, &campaign.t_snapshots)?;
                let mut metrics = Vec::new();
                let mut snaps = Vec::new();
                for s in out.snapshots.iter().filter(|s| s.t > 0.0) {
                    metrics.push(riemann_metrics(v, lambda, &grid, s, m0, influx));
                    snaps.push(FieldSnapshot {
                        label: format!("riemann_{}_lambda{lambda:e}_n{n}_t{}", v.name(), s.t),
                        grid: grid.clone(),
                        snapshot: s.clone(),
                    });
                }
                Ok((metrics, snaps))
            })();
            (v, lambda, n, res)
        })
        .collect();
    let mut outcome = RiemannOutcome {
        metrics: Vec::new(),
        snapshots: Vec::new(),
        failures: Vec::new(),
    };
    for (v, lambda, n, res) in results {
        match res {
            Ok((m, s)) => {
                outcome.metrics.extend(m);
                outcome.snapshots.extend(s);
            }
            Err(e) => {
                log::warn!("riemann {v} lambda={lambda} N={n} failed: {e}");
                outcome.failures.push(CellFailure::new(v, lambda, n, &e));
            }
        }
    }
    outcome
}

// ---------------------------------------------------------------------------
// Branch tests

pub const BRANCH_REFERENCE_CELLS: usize = 32000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BranchCase {
    FiveBranch,
    SevenBranch,
}

impl BranchCase {
    pub fn name(self) -> &'static str {
        match self {
            BranchCase::FiveBranch => "branch5",
            BranchCase::SevenBranch => "branch7",
        }
    }

    fn density(x: f64) -> f64 {
        (-(x - PI).powi(2)).exp() / PI
    }

    fn velocity(self, x: f64) -> f64 {
        match self {
            BranchCase::FiveBranch => x.sin().powi(3),
            BranchCase::SevenBranch => (2.0 * x).sin() * x.cos(),
        }
    }

    /// Gaussian density bump on `[0, 2 pi]` with the case's velocity.
    pub fn initial_state(self, grid: &Grid1D) -> Result<FluidState> {
        let n = sample_on_grid(Self::density, grid)?;
        let u = sample_on_grid(|x| self.velocity(x), grid)?;
        FluidState::from_velocity(n, &u)
    }

    /// Periodic on `[0, 2 pi]`; the Gaussian is used as printed.
    pub fn boundary(self) -> Boundary {
        Boundary::Periodic
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BranchCampaign {
    pub case: BranchCase,
    pub lambdas: Vec<f64>,
    pub grids: Vec<usize>,
    pub variants: Vec<Variant>,
    pub t_end: f64,
    /// Reference resolution; defaults to the larger of 32000 and four times
    /// the finest grid.
    pub reference_cells: Option<usize>,
    pub tuning: SchemeTuning,
}

impl BranchCampaign {
    pub fn new(case: BranchCase) -> Self {
        Self {
            case,
            lambdas: vec![1.0, 1e-2],
            grids: vec![2000, 4000, 8000],
            variants: Variant::ALL.to_vec(),
            t_end: 1.0,
            reference_cells: None,
            tuning: SchemeTuning::default(),
        }
    }

    pub fn reference_resolution(&self) -> usize {
        self.reference_cells.unwrap_or_else(|| {
            let finest = self.grids.iter().copied().max().unwrap_or(0);
            BRANCH_REFERENCE_CELLS.max(4 * finest)
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BranchOutcome {
    pub errors: Vec<ErrorRow>,
    pub snapshots: Vec<FieldSnapshot>,
    pub references: Vec<FieldSnapshot>,
    pub failures: Vec<CellFailure>,
}

fn branch_run(campaign: &BranchCampaign, variant: Variant, lambda: f64, n: usize) -> Result<FieldSnapshot> {
    let (case, t_end) = (campaign.case, campaign.t_end);
    let grid = make_grid(n, 0.0, 2.0 * PI)?;
    let state = case.initial_state(&grid)?;
    let config = campaign.tuning.config(variant, lambda, case.boundary());
    let out = run(state, &config, &grid, t_end, &[t_end])?;
    Ok(FieldSnapshot {
        label: format!("{}_{}_lambda{lambda:e}_n{n}", case.name(), variant.name()),
        grid,
        snapshot: out.last().clone(),
    })
}

/// Errors at `t_end` against a fine EPB reference interpolated to each grid.
pub fn branch_campaign(campaign: &BranchCampaign) -> BranchOutcome {
    let n_ref = campaign.reference_resolution();
    let mut outcome = BranchOutcome {
        errors: Vec::new(),
        snapshots: Vec::new(),
        references: Vec::new(),
        failures: Vec::new(),
    };
    for &lambda in &campaign.lambdas {
        let reference = match branch_run(campaign, Variant::Epb, lambda, n_ref) {
            Ok(r) => r,
            Err(e) => {
                log::warn!("{} reference lambda={lambda} failed: {e}", campaign.case.name());
                outcome.failures.push(CellFailure::new(Variant::Epb, lambda, n_ref, &e));
                continue;
            }
        };
        let cells: Vec<(Variant, usize)> = campaign
            .variants
            .iter()
            .flat_map(|&v| campaign.grids.iter().map(move |&n| (v, n)))
            .collect();
        let results: Vec<_> = cells
            .par_iter()
            .map(|&(v, n)| {
                let res = branch_run(campaign, v, lambda, n).and_then(|snap| {
                    let r = &reference.snapshot;
                    let on = |values: &[f64]| resample_periodic(values, &reference.grid, &snap.grid);
                    let row = ErrorRow {
                        variant: v,
                        lambda,
                        n_cells: n,
                        eps_n: linf_rel_error(snap.snapshot.state.density(), &on(r.state.density()))?,
                        eps_q: linf_rel_error(snap.snapshot.state.momentum(), &on(r.state.momentum()))?,
                        eps_phi: linf_rel_error(snap.snapshot.phi.values(), &on(r.phi.values()))?,
                    };
                    Ok((row, snap))
                });
                (v, n, res)
            })
            .collect();
        for (v, n, res) in results {
            match res {
                Ok((row, snap)) => {
                    outcome.errors.push(row);
                    outcome.snapshots.push(snap);
                }
                Err(e) => {
                    log::warn!("{} {v} lambda={lambda} N={n} failed: {e}", campaign.case.name());
                    outcome.failures.push(CellFailure::new(v, lambda, n, &e));
                }
            }
        }
        outcome.references.push(reference);
    }
    outcome
}

// ---------------------------------------------------------------------------
// Tables and reports

/// A CSV table with a one-line header.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(name: impl Into<String>, header: &[&str]) -> Self {
        Self {
            name: name.into(),
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }
}

fn f(v: f64) -> String {
    v.to_string()
}

pub fn errors_table(name: &str, rows: &[ErrorRow]) -> Table {
    let mut t = Table::new(name, &["variant", "lambda", "n_cells", "eps_n", "eps_q", "eps_phi"]);
    for r in rows {
        t.push(vec![
            r.variant.name().into(),
            f(r.lambda),
            r.n_cells.to_string(),
            f(r.eps_n),
            f(r.eps_q),
            f(r.eps_phi),
        ]);
    }
    t
}

/// Side-by-side EPB / REPB errors per grid for one `lambda`.
pub fn comparison_table(name: &str, rows: &[ErrorRow], lambda: f64) -> Table {
    let mut t = Table::new(
        name,
        &[
            "n_cells",
            "epb_eps_n",
            "epb_eps_q",
            "epb_eps_phi",
            "repb_eps_n",
            "repb_eps_q",
            "repb_eps_phi",
        ],
    );
    let mut grids: Vec<usize> = rows.iter().filter(|r| r.lambda == lambda).map(|r| r.n_cells).collect();
    grids.sort_unstable();
    grids.dedup();
    for n in grids {
        let mut row = vec![n.to_string()];
        for v in Variant::ALL {
            match rows
                .iter()
                .find(|r| r.lambda == lambda && r.n_cells == n && r.variant == v)
            {
                Some(r) => row.extend([f(r.eps_n), f(r.eps_q), f(r.eps_phi)]),
                None => row.extend(std::iter::repeat_n(String::new(), 3)),
            }
        }
        t.push(row);
    }
    t
}

pub fn damping_table(name: &str, series: &[DampingSeries]) -> Table {
    let mut t = Table::new(name, &["variant", "n_cells", "k", "t", "amplitude", "decrement"]);
    for s in series {
        for (k, d) in s.decrements.iter().enumerate() {
            t.push(vec![
                s.variant.name().into(),
                s.n_cells.to_string(),
                k.to_string(),
                f(k as f64 * s.dt_increment),
                f(s.amplitudes[k]),
                f(*d),
            ]);
        }
    }
    t
}

pub fn riemann_table(name: &str, metrics: &[RiemannMetrics]) -> Table {
    let mut t = Table::new(
        name,
        &[
            "variant",
            "lambda",
            "n_cells",
            "t",
            "plateau",
            "left_shock",
            "right_shock",
            "shock_speed",
            "total_variation",
            "max_density",
            "mass",
            "expected_mass",
        ],
    );
    for m in metrics {
        t.push(vec![
            m.variant.name().into(),
            f(m.lambda),
            m.n_cells.to_string(),
            f(m.t),
            f(m.plateau),
            f(m.left_shock),
            f(m.right_shock),
            f(m.shock_speed),
            f(m.total_variation),
            f(m.max_density),
            f(m.mass),
            f(m.expected_mass),
        ]);
    }
    t
}

pub fn failures_table(name: &str, failures: &[CellFailure]) -> Table {
    let mut t = Table::new(name, &["variant", "lambda", "n_cells", "message"]);
    for c in failures {
        t.push(vec![
            c.variant.name().into(),
            f(c.lambda),
            c.n_cells.to_string(),
            c.message.clone(),
        ]);
    }
    t
}

/// Fields of one snapshot: `x, n, q, u, phi`.
pub fn snapshot_table(name: &str, grid: &Grid1D, snapshot: &Snapshot) -> Table {
    let mut t = Table::new(name, &["x", "n", "q", "u", "phi"]);
    let s = &snapshot.state;
    for j in 0..s.len() {
        let (n, q) = (s.density()[j], s.momentum()[j]);
        t.push(vec![
            f(grid.centers()[j]),
            f(n),
            f(q),
            f(q / n),
            f(snapshot.phi.values()[j]),
        ]);
    }
    t
}

pub fn step_log_table(name: &str, log: &[StepRecord]) -> Table {
    let mut t = Table::new(name, &["t", "dt", "newton_iters", "residual"]);
    for r in log {
        t.push(vec![
            f(r.t_before),
            f(r.dt),
            r.newton.iterations.to_string(),
            f(r.newton.final_residual),
        ]);
    }
    t
}

pub fn field_tables(snapshots: &[FieldSnapshot]) -> Vec<Table> {
    snapshots
        .iter()
        .map(|s| snapshot_table(&s.label, &s.grid, &s.snapshot))
        .collect()
}

/// Hex SHA-256 of a configuration description.
pub fn config_hash(config_text: &str) -> String {
    hex::encode(Sha256::digest(config_text.as_bytes()))
}

/// Writes each table to `<name>.csv` and a `manifest.csv` listing every file
/// with the hash of `config_text`. Returns the written paths.
pub fn emit_report(tables: &[Table], config_text: &str, out_dir: &Path) -> Result<Vec<PathBuf>> {
    let io_err = |path: &Path| {
        let path = path.to_path_buf();
        move |source| Error::Io { path, source }
    };
    fs::create_dir_all(out_dir).map_err(io_err(out_dir))?;
    let hash = config_hash(config_text);
    let mut written = Vec::with_capacity(tables.len() + 1);
    let mut manifest = Table::new("manifest", &["file", "rows", "config_sha256"]);
    for table in tables {
        let path = out_dir.join(format!("{}.csv", table.name));
        write_table(table, &path)?;
        manifest.push(vec![
            format!("{}.csv", table.name),
            table.rows.len().to_string(),
            hash.clone(),
        ]);
        written.push(path);
    }
    let path = out_dir.join("manifest.csv");
    write_table(&manifest, &path)?;
    written.push(path);
    Ok(written)
}

fn write_table(table: &Table, path: &Path) -> Result<()> {
    let csv_err = |source| Error::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    w.write_record(&table.header).map_err(csv_err)?;
    for row in &table.rows {
        w.write_record(row).map_err(csv_err)?;
    }
    w.flush().map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linf_examples() {
        assert_eq!(linf_rel_error(&[1.0, -2.0], &[1.0, -2.0]).unwrap(), 0.0);
        let r = [1.0, -2.0, 0.5];
        let num: Vec<f64> = r.iter().map(|x| x + 0.1).collect();
        assert!((linf_rel_error(&num, &r).unwrap() - 0.05).abs() < 1e-15);
        let num: Vec<f64> = r.iter().map(|x| 2.0 * x).collect();
        assert_eq!(linf_rel_error(&num, &r).unwrap(), 1.0);
        assert!(matches!(linf_rel_error(&[1.0], &[0.0]), Err(Error::ZeroReferenceNorm)));
        assert!(matches!(
            linf_rel_error(&[1.0], &[1.0, 2.0]),
            Err(Error::LengthMismatch { .. })
        ));
    }

    #[test]
    fn damping_examples() {
        assert_eq!(damping_decrement(2.0, 2.0, 1.0).unwrap(), 0.0);
        assert!((damping_decrement(2.0, 1.0, 1.0).unwrap() - 2f64.ln()).abs() < 1e-15);
        assert!((damping_decrement(1.0, (-1f64).exp(), 2.0).unwrap() - 0.5).abs() < 1e-15);
        assert!(matches!(
            damping_decrement(0.0, 1.0, 1.0),
            Err(Error::NonPositiveAmplitude(_))
        ));
        assert!(damping_decrement(1.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn orders_and_variation() {
        let o = observed_orders(&[0.4, 0.2, 0.1]);
        assert_eq!(o, vec![1.0, 1.0]);
        assert_eq!(total_variation(&[1.0, 3.0, 2.0]), 3.0);
    }

    #[test]
    fn periodic_sampling() {
        let g = make_grid(4, 0.0, 4.0).unwrap();
        let v = [0.0, 1.0, 2.0, 3.0];
        assert_eq!(sample_periodic(&v, &g, 1.5), 1.0);
        assert_eq!(sample_periodic(&v, &g, 2.0), 1.5);
        assert_eq!(sample_periodic(&v, &g, 4.0), 1.5);
        assert_eq!(sample_periodic(&v, &g, 0.0), 1.5);
    }

    #[test]
    fn riemann_metrics_on_initial_data() {
        let (grid, state, _) = riemann_setup(200).unwrap();
        let snap = Snapshot {
            t: 0.0,
            phi: crate::state::PotentialField::zeros(200),
            state,
        };
        let m = riemann_metrics(Variant::Repb, 1e-4, &grid, &snap, 0.4, 2.0);
        assert_eq!(m.plateau, 1.0);
        assert_eq!(m.total_variation, 0.0);
        assert!((m.mass - 0.4).abs() < 1e-15);
    }

    #[test]
    fn tables_have_expected_shape() {
        let rows: Vec<ErrorRow> = [250, 500, 1000, 2000, 4000, 8000, 16000]
            .iter()
            .flat_map(|&n| {
                Variant::ALL.into_iter().map(move |variant| ErrorRow {
                    variant,
                    lambda: 1.0,
                    n_cells: n,
                    eps_n: 1.0 / n as f64,
                    eps_q: 2.0 / n as f64,
                    eps_phi: 3.0 / n as f64,
                })
            })
            .collect();
        let t = comparison_table("table", &rows, 1.0);
        assert_eq!(t.rows.len(), 7);
        assert_eq!(t.header.len(), 7);
        assert!(t.rows.iter().all(|r| r.len() == 7 && r.iter().all(|c| !c.is_empty())));
    }

    #[test]
    fn report_is_deterministic_and_header_only_when_empty() {
        let dir = tempfile::tempdir().unwrap();
        let tables = vec![
            errors_table("empty", &[]),
            errors_table(
                "one",
                &[ErrorRow {
                    variant: Variant::Epb,
                    lambda: 1.0,
                    n_cells: 10,
                    eps_n: 0.1,
                    eps_q: 0.2,
                    eps_phi: 0.3,
                }],
            ),
        ];
        let files = emit_report(&tables, "cfg", dir.path()).unwrap();
        assert_eq!(files.len(), 3);
        let empty = fs::read_to_string(dir.path().join("empty.csv")).unwrap();
        assert_eq!(empty, "variant,lambda,n_cells,eps_n,eps_q,eps_phi\n");
        let first: Vec<Vec<u8>> = files.iter().map(|p| fs::read(p).unwrap()).collect();
        emit_report(&tables, "cfg", dir.path()).unwrap();
        let second: Vec<Vec<u8>> = files.iter().map(|p| fs::read(p).unwrap()).collect();
        assert_eq!(first, second);
        let manifest = fs::read_to_string(dir.path().join("manifest.csv")).unwrap();
        assert!(manifest.contains(&config_hash("cfg")));
        assert_eq!(config_hash("cfg").len(), 64);
    }

    #[test]
    fn emit_report_surfaces_path() {
        let dir = tempfile::tempdir().unwrap();
        let blocker = dir.path().join("file");
        fs::write(&blocker, "x").unwrap();
        let err = emit_report(&[], "cfg", &blocker.join("sub")).unwrap_err();
        assert!(err.to_string().contains("sub"));
    }

    #[test]
    fn small_soliton_campaign_runs() {
        let c = SolitonCampaign {
            grids: vec![250, 500],
            damping_grids: vec![250],
            damping_intervals: 2,
            ..Default::default()
        };
        let out = soliton_campaign(&c).unwrap();
        assert!(out.failures.is_empty(), "{:?}", out.failures);
        assert_eq!(out.errors.len(), 4);
        assert_eq!(out.damping.len(), 2);
        for s in &out.damping {
            assert_eq!(s.decrements.len(), 2);
            assert!(s.decrements.iter().all(|d| d.is_finite() && *d >= 0.0));
        }
        for v in Variant::ALL {
            let e: Vec<&ErrorRow> = out.errors.iter().filter(|r| r.variant == v).collect();
            assert!(e[1].eps_n < e[0].eps_n);
        }
    }

    #[test]
    fn seven_branch_stays_symmetric() {
        let c = BranchCampaign {
            lambdas: vec![1.0],
            grids: vec![200],
            reference_cells: Some(400),
            ..BranchCampaign::new(BranchCase::SevenBranch)
        };
        let out = branch_campaign(&c);
        assert!(out.failures.is_empty());
        for s in out.snapshots.iter().chain(&out.references) {
            let tol = 1e-10;
            let st = &s.snapshot.state;
            let mirrored = st.mirrored();
            for j in 0..st.len() {
                assert!((st.density()[j] - mirrored.density()[j]).abs() <= tol);
                assert!((st.momentum()[j] - mirrored.momentum()[j]).abs() <= tol);
            }
            let phi = s.snapshot.phi.values();
            for j in 0..phi.len() {
                assert!((phi[j] - phi[phi.len() - 1 - j]).abs() <= tol, "{} {j}", s.label);
            }
        }
    }
}
