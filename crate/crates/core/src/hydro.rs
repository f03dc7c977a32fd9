//! Conservative transport stage: Rusanov (local Lax-Friedrichs) fluxes for the
//! pressureless (EPB) and isothermal (REPB) systems.

use crate::config::{Boundary, Dissipation, Variant};
use crate::error::{Error, Result};
use crate::grid::Grid1D;
use crate::state::{Conserved, FluidState};

/// Numerical fluxes at the `n_cells + 1` interfaces, left boundary first.
#[derive(Debug, Clone, PartialEq)]
pub struct InterfaceFluxes {
    pub f_n: Vec<f64>,
    pub f_q: Vec<f64>,
}

pub fn physical_flux(cell: Conserved, variant: Variant) -> Result<Conserved> {
    if !(cell.n > 0.0) {
        return Err(Error::NonPositiveDensity { cell: 0, value: cell.n });
    }
    Ok(flux(cell, variant))
}

#[inline]
fn flux(cell: Conserved, variant: Variant) -> Conserved {
    let convective = cell.q * cell.q / cell.n;
    match variant {
        Variant::Epb => Conserved::new(cell.q, convective),
        Variant::Repb => Conserved::new(cell.q, convective + cell.n),
    }
}

/// Local maximal characteristic speed at an interface, from the left, mean and
/// right velocities, with unit sound speed.
#[inline]
pub fn wave_speed(u_left: f64, u_mid: f64, u_right: f64) -> f64 {
    wave_speed_with(u_left, u_mid, u_right, 1.0)
}

/// [`wave_speed`] for sound speed `c`.
#[inline]
pub fn wave_speed_with(u_left: f64, u_mid: f64, u_right: f64, c: f64) -> f64 {
    let a_plus = (u_mid + c).max(u_right + c);
    let a_minus = (u_left - c).min(u_mid - c);
    a_minus.abs().max(a_plus.abs())
}

#[inline]
fn interface_speed(left: Conserved, right: Conserved, c: f64) -> f64 {
    let ul = left.q / left.n;
    let ur = right.q / right.n;
    wave_speed_with(ul, 0.5 * (ul + ur), ur, c)
}

/// Rusanov flux with the default dissipation.
pub fn rusanov_flux(left: Conserved, right: Conserved, variant: Variant) -> Result<Conserved> {
    rusanov_flux_with(left, right, variant, Dissipation::default())
}

pub fn rusanov_flux_with(
    left: Conserved,
    right: Conserved,
    variant: Variant,
    dissipation: Dissipation,
) -> Result<Conserved> {
    physical_flux(left, variant)?;
    physical_flux(right, variant)?;
    Ok(rusanov(left, right, variant, dissipation.sound_speed(variant)))
}

#[inline]
fn rusanov(left: Conserved, right: Conserved, variant: Variant, c: f64) -> Conserved {
    let fl = flux(left, variant);
    let fr = flux(right, variant);
    let a = interface_speed(left, right, c);
    Conserved::new(
        0.5 * (fl.n + fr.n + a * (left.n - right.n)),
        0.5 * (fl.q + fr.q + a * (left.q - right.q)),
    )
}

/// Ghost beyond cell `edge`: density extrapolated in `ln n`, velocity
/// extrapolated linearly, both from the neighbour `inner`.
#[inline]
fn outflow_ghost(state: &FluidState, edge: usize, inner: usize) -> Conserved {
    let (e, i) = (state.cell(edge), state.cell(inner));
    let n = e.n * (e.n / i.n);
    Conserved::new(n, n * (2.0 * e.velocity() - i.velocity()))
}

/// States on both sides of interface `j - 1/2`, ghosts included.
#[inline]
fn interface_states(state: &FluidState, boundary: &Boundary, j: usize) -> (Conserved, Conserved) {
    let n = state.len();
    let left = if j == 0 {
        match boundary {
            Boundary::Periodic => state.cell(n - 1),
            Boundary::FictitiousStates { left, .. } => *left,
            Boundary::Outflow => outflow_ghost(state, 0, 1.min(n - 1)),
        }
    } else {
        state.cell(j - 1)
    };
    let right = if j == n {
        match boundary {
            Boundary::Periodic => state.cell(0),
            Boundary::FictitiousStates { right, .. } => *right,
            Boundary::Outflow => outflow_ghost(state, n - 1, n.saturating_sub(2)),
        }
    } else {
        state.cell(j)
    };
    (left, right)
}

pub fn interface_fluxes(
    state: &FluidState,
    boundary: &Boundary,
    variant: Variant,
    dissipation: Dissipation,
) -> InterfaceFluxes {
    let c = dissipation.sound_speed(variant);
    let n = state.len();
    let mut f_n = Vec::with_capacity(n + 1);
    let mut f_q = Vec::with_capacity(n + 1);
    if let Boundary::Periodic = boundary {
        // the wrapped interface is shared by both ends
        let f = rusanov(state.cell(n - 1), state.cell(0), variant, c);
        f_n.push(f.n);
        f_q.push(f.q);
        for j in 1..n {
            let f = rusanov(state.cell(j - 1), state.cell(j), variant, c);
            f_n.push(f.n);
            f_q.push(f.q);
        }
        f_n.push(f_n[0]);
        f_q.push(f_q[0]);
    } else {
        for j in 0..=n {
            let (l, r) = interface_states(state, boundary, j);
            let f = rusanov(l, r, variant, c);
            f_n.push(f.n);
            f_q.push(f.q);
        }
    }
    InterfaceFluxes { f_n, f_q }
}

/// One explicit finite-volume step `U# = U - dt/h (F_{j+1/2} - F_{j-1/2})`
/// with the default dissipation.
pub fn hydro_step(
    state: &FluidState,
    grid: &Grid1D,
    variant: Variant,
    boundary: &Boundary,
    dt: f64,
) -> Result<FluidState> {
    hydro_step_with(state, grid, variant, boundary, Dissipation::default(), dt)
}

pub fn hydro_step_with(
    state: &FluidState,
    grid: &Grid1D,
    variant: Variant,
    boundary: &Boundary,
    dissipation: Dissipation,
    dt: f64,
) -> Result<FluidState> {
    if state.len() != grid.n_cells() {
        return Err(Error::LengthMismatch {
            expected: grid.n_cells(),
            found: state.len(),
        });
    }
    let c = dissipation.sound_speed(variant);
    let n_cells = state.len();
    let ratio = dt / grid.h();
    let (rho, mom) = (state.density(), state.momentum());
    let mut n_new = Vec::with_capacity(n_cells);
    let mut q_new = Vec::with_capacity(n_cells);
    // fluxes are streamed: `f_left` is the flux through the left face of cell j
    let (mut f_left, mut cell) = {
        let (l, r) = interface_states(state, boundary, 0);
        (rusanov(l, r, variant, c), r)
    };
    let first_flux = f_left;
    for j in 0..n_cells {
        let f_right = match (j + 1 == n_cells, boundary) {
            (true, Boundary::Periodic) => first_flux,
            (true, Boundary::FictitiousStates { right, .. }) => rusanov(cell, *right, variant, c),
            (true, Boundary::Outflow) => rusanov(cell, outflow_ghost(state, j, j.saturating_sub(1)), variant, c),
            (false, _) => {
                let next = state.cell(j + 1);
                let f = rusanov(cell, next, variant, c);
                cell = next;
                f
            }
        };
        let n = rho[j] - ratio * (f_right.n - f_left.n);
        if !(n > 0.0) {
            return Err(Error::NonPositiveDensity { cell: j, value: n });
        }
        n_new.push(n);
        q_new.push(mom[j] - ratio * (f_right.q - f_left.q));
        f_left = f_right;
    }
    if let Some(cell) = q_new.iter().position(|q| !q.is_finite()) {
        return Err(Error::NonFinite {
            cell,
            value: q_new[cell],
        });
    }
    Ok(FluidState::from_parts_unchecked(n_new, q_new))
}

/// Largest interface speed estimate with unit sound speed, boundary
/// interfaces included.
pub fn max_wave_speed(state: &FluidState, boundary: &Boundary) -> f64 {
    let n = state.len();
    if n == 0 {
        return 0.0;
    }
    let (left, right) = match boundary {
        Boundary::Periodic => (state.cell(n - 1), state.cell(0)),
        Boundary::FictitiousStates { left, right } => (*left, *right),
        Boundary::Outflow => (
            outflow_ghost(state, 0, 1.min(n - 1)),
            outflow_ghost(state, n - 1, n.saturating_sub(2)),
        ),
    };
    let (rho, q) = (state.density(), state.momentum());
    let mut u_prev = left.velocity();
    let mut a_max = 0.0f64;
    for (rho, q) in rho.iter().zip(q) {
        let u = q / rho;
        a_max = a_max.max(wave_speed(u_prev, 0.5 * (u_prev + u), u));
        u_prev = u;
    }
    match boundary {
        // the wrapped interface was the first one visited
        Boundary::Periodic => a_max,
        Boundary::FictitiousStates { .. } | Boundary::Outflow => {
            let u = right.velocity();
            a_max.max(wave_speed(u_prev, 0.5 * (u_prev + u), u))
        }
    }
}

/// CFL time step `cfl * h / max a`.
pub fn compute_dt(state: &FluidState, grid: &Grid1D, boundary: &Boundary, cfl: f64) -> f64 {
    cfl * grid.h() / max_wave_speed(state, boundary)
}
