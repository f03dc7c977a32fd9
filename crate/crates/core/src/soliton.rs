//! Sagdeev solitary-wave reference profiles: ODE march, single-pulse
//! truncation, resampling onto grids and periodic translation.

use std::path::Path;

use crate::error::{Error, Result};
use crate::grid::Grid1D;
use crate::state::{FluidState, PotentialField};

/// Lower and upper ends of the admissible wave-speed window.
pub const BOHM_WINDOW: (f64, f64) = (1.0, 1.6);

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolitonParams {
    pub u0: f64,
    pub eta: f64,
    pub dx_ref: f64,
    pub tail_tol: f64,
    pub max_nodes: usize,
}

impl Default for SolitonParams {
    fn default() -> Self {
        Self {
            u0: 1.3,
            eta: -1e-4,
            dx_ref: 1e-3,
            tail_tol: 1e-6,
            max_nodes: 10_000_000,
        }
    }
}

impl SolitonParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidSolitonParams(msg));
        if !(self.u0 > BOHM_WINDOW.0 && self.u0 < BOHM_WINDOW.1) {
            return bad(format!(
                "u0 = {} outside the window ({}, {})",
                self.u0, BOHM_WINDOW.0, BOHM_WINDOW.1
            ));
        }
        if !(self.eta < 0.0) || !self.eta.is_finite() {
            return bad(format!("eta must be negative, got {}", self.eta));
        }
        if !(self.dx_ref > 0.0) || !self.dx_ref.is_finite() {
            return bad(format!("dx_ref must be positive, got {}", self.dx_ref));
        }
        if !(self.tail_tol > 0.0) || !self.tail_tol.is_finite() {
            return bad(format!("tail_tol must be positive, got {}", self.tail_tol));
        }
        if self.max_nodes < 3 {
            return bad(format!("max_nodes must be at least 3, got {}", self.max_nodes));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolitonProfile {
    pub x: Vec<f64>,
    pub phi: Vec<f64>,
    pub n: Vec<f64>,
    pub u_lab: Vec<f64>,
    pub u0: f64,
    pub eta: f64,
    pub t_l: f64,
}

impl SolitonProfile {
    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn dx(&self) -> f64 {
        if self.x.len() < 2 {
            0.0
        } else {
            self.x[1] - self.x[0]
        }
    }

    /// Length of the pulse support.
    pub fn support(&self) -> f64 {
        self.x.last().copied().unwrap_or(0.0) - self.x.first().copied().unwrap_or(0.0)
    }

    pub fn max_density(&self) -> f64 {
        self.n.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let csv_err = |source| Error::Csv {
            path: path.to_path_buf(),
            source,
        };
        let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
        w.write_record(["x", "phi", "n", "u_lab"]).map_err(csv_err)?;
        for k in 0..self.len() {
            w.write_record([
                self.x[k].to_string(),
                self.phi[k].to_string(),
                self.n[k].to_string(),
                self.u_lab[k].to_string(),
            ])
            .map_err(csv_err)?;
        }
        w.flush().map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })
    }
}

/// `(1 + 2 phi / u0^2)^(-1/2) - exp(-phi)`.
pub fn sagdeev_rhs(phi: f64, u0: f64) -> Result<f64> {
    Ok(ion_density(phi, u0)? - (-phi).exp())
}

fn ion_density(phi: f64, u0: f64) -> Result<f64> {
    let arg = 1.0 + 2.0 * phi / (u0 * u0);
    if !(arg > 0.0) {
        return Err(Error::BreakdownReached { node: 0, phi });
    }
    Ok(1.0 / arg.sqrt())
}

pub fn integrate_sagdeev(params: &SolitonParams) -> Result<SolitonProfile> {
    params.validate()?;
    march(params)
}

fn march(p: &SolitonParams) -> Result<SolitonProfile> {
    let dx2 = p.dx_ref * p.dx_ref;
    let mut phi = vec![0.0, p.eta * p.dx_ref];
    let mut peak = phi[1].abs();
    let mut past_peak = false;
    loop {
        let k = phi.len() - 1;
        let (cur, prev) = (phi[k], phi[k - 1]);
        if past_peak && cur.abs() <= p.tail_tol {
            break;
        }
        if cur == 0.0 && prev == 0.0 {
            // Trivial orbit.
            break;
        }
        if phi.len() >= p.max_nodes {
            return Err(Error::MaxNodesExceeded { max_nodes: p.max_nodes });
        }
        let rhs = sagdeev_rhs(cur, p.u0).map_err(|_| Error::BreakdownReached { node: k, phi: cur })?;
        let next = 2.0 * cur - prev + dx2 * rhs;
        if next.abs() > peak {
            peak = next.abs();
        } else if next.abs() < cur.abs() {
            past_peak = true;
        }
        if past_peak && next.signum() != cur.signum() && next != 0.0 && cur != 0.0 {
            return Err(Error::TruncationMissed { node: k + 1 });
        }
        phi.push(next);
    }

    let x: Vec<f64> = (0..phi.len()).map(|k| k as f64 * p.dx_ref).collect();
    let n = phi
        .iter()
        .enumerate()
        .map(|(k, &f)| ion_density(f, p.u0).map_err(|_| Error::BreakdownReached { node: k, phi: f }))
        .collect::<Result<Vec<f64>>>()?;
    // Wave-frame flux is -u0; laboratory velocity is u0 + q / n.
    let u_lab = n.iter().map(|&n| p.u0 - p.u0 / n).collect();
    let support = *x.last().expect("march keeps at least two nodes");
    Ok(SolitonProfile {
        x,
        phi,
        n,
        u_lab,
        u0: p.u0,
        eta: p.eta,
        t_l: support / p.u0,
    })
}

/// Linear interpolation of `values` sampled at `k * dx`, evaluated at `s * dx`.
/// Returns `None` outside the sampled range.
fn interpolate(values: &[f64], s: f64) -> Option<f64> {
    let last = values.len().checked_sub(1)? as f64;
    let snapped = s.round();
    let s = if (s - snapped).abs() <= 1e-9 { snapped } else { s };
    if s < 0.0 || s > last {
        return None;
    }
    let k = s.floor() as usize;
    let w = s - k as f64;
    if w == 0.0 {
        Some(values[k])
    } else {
        Some((1.0 - w) * values[k] + w * values[k + 1])
    }
}

/// Resamples the profile onto cell centers in its own coordinates.
pub fn resample_profile(profile: &SolitonProfile, grid: &Grid1D) -> Result<(FluidState, PotentialField)> {
    resample_profile_shifted(profile, grid, 0.0)
}

/// Resamples the profile with node `k` placed at `shift + x[k]`; cells outside
/// the support get the undisturbed state.
pub fn resample_profile_shifted(
    profile: &SolitonProfile,
    grid: &Grid1D,
    shift: f64,
) -> Result<(FluidState, PotentialField)> {
    let support = profile.support();
    if grid.length() < support * (1.0 - 1e-12) {
        return Err(Error::DomainTooShort {
            domain: grid.length(),
            support,
        });
    }
    let dx = profile.dx();
    let x0 = profile.x.first().copied().unwrap_or(0.0) + shift;
    let n_cells = grid.n_cells();
    let (mut n, mut u, mut phi) = (vec![1.0; n_cells], vec![0.0; n_cells], vec![0.0; n_cells]);
    if dx > 0.0 {
        for (j, &xc) in grid.centers().iter().enumerate() {
            let s = (xc - x0) / dx;
            if let Some(v) = interpolate(&profile.n, s) {
                n[j] = v;
                u[j] = interpolate(&profile.u_lab, s).expect("same support");
                phi[j] = interpolate(&profile.phi, s).expect("same support");
            }
        }
    }
    Ok((FluidState::from_velocity(n, &u)?, PotentialField::new(phi)?))
}

/// Periodic shift to the right by `distance`: `out(x) = values(x - distance)`.
pub fn translate_periodic(values: &[f64], distance: f64, h: f64) -> Vec<f64> {
    let len = values.len();
    if len == 0 {
        return Vec::new();
    }
    let s = distance / h;
    let snapped = s.round();
    let s = if (s - snapped).abs() <= 1e-9 { snapped } else { s };
    let m = s.floor();
    let w = s - m;
    let m = (m as i64).rem_euclid(len as i64) as usize;
    (0..len)
        .map(|j| {
            let a = values[(j + len - m) % len];
            if w == 0.0 {
                a
            } else {
                let b = values[(j + 2 * len - m - 1) % len];
                (1.0 - w) * a + w * b
            }
        })
        .collect()
}

/// The initial fields moved by `distance` on a periodic grid.
pub fn translated_reference(
    state: &FluidState,
    phi: &PotentialField,
    distance: f64,
    grid: &Grid1D,
) -> Result<(FluidState, PotentialField)> {
    let h = grid.h();
    let n = translate_periodic(state.density(), distance, h);
    let q = translate_periodic(state.momentum(), distance, h);
    let phi = translate_periodic(phi.values(), distance, h);
    Ok((FluidState::new(n, q)?, PotentialField::new(phi)?))
}
