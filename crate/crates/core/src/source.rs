//! Momentum source stages: implicit electric force (EPB) and dispersive
//! stress (REPB).

use crate::error::{Error, Result};
use crate::poisson::FieldBoundary;
use crate::state::{FluidState, PotentialField};

/// Momentum source density per cell.
#[derive(Debug, Clone, PartialEq)]
pub struct SourceTermField {
    pub values: Vec<f64>,
}

/// Centered difference `(phi_{j+1} - phi_{j-1}) / 2h` with ghost values from `bc`.
pub fn centered_gradient(phi: &PotentialField, h: f64, bc: &FieldBoundary) -> Vec<f64> {
    let p = phi.values();
    let inv = 0.5 / h;
    (0..p.len() as isize)
        .map(|j| (bc.at(p, j + 1) - bc.at(p, j - 1)) * inv)
        .collect()
}

/// `q += dt * n * D phi`; density is untouched.
pub fn epb_force_update(
    state: &FluidState,
    phi_new: &PotentialField,
    dt: f64,
    h: f64,
    bc: &FieldBoundary,
) -> Result<FluidState> {
    check_len(state.len(), phi_new.len())?;
    let grad = centered_gradient(phi_new, h, bc);
    let q = state
        .momentum()
        .iter()
        .zip(state.density())
        .zip(&grad)
        .map(|((q, n), g)| q + dt * n * g)
        .collect();
    Ok(FluidState::from_parts_unchecked(state.density().to_vec(), q))
}

/// The two pieces of the dispersive source: the third-derivative term and the
/// product `D phi * D2 phi`. Their sum is [`repb_source`].
#[derive(Debug, Clone, PartialEq)]
pub struct DispersiveParts {
    pub linear: Vec<f64>,
    pub nonlinear: Vec<f64>,
}

pub fn dispersive_parts(phi: &PotentialField, lambda: f64, h: f64, bc: &FieldBoundary) -> Result<DispersiveParts> {
    let p = phi.values();
    let len = p.len();
    if len < crate::grid::MIN_CELLS {
        return Err(Error::InvalidGrid(format!(
            "dispersive source needs at least {} cells, got {len}",
            crate::grid::MIN_CELLS
        )));
    }
    let at = |j: isize| bc.at(p, j);
    let centered = lambda * lambda / (2.0 * h * h * h);
    let one_sided = lambda * lambda / (h * h * h);
    let mut linear = Vec::with_capacity(len);
    let mut nonlinear = Vec::with_capacity(len);
    let last = len as isize - 1;
    for j in 0..len as isize {
        match bc {
            FieldBoundary::Dirichlet { left, .. } if j == 0 => {
                let (g, p1, p2, p3) = (*left, p[0], p[1], p[2]);
                linear.push(one_sided * (p3 - 3.0 * p2 + 3.0 * p1 - g));
                nonlinear.push(0.5 * one_sided * ((p2 - 2.0 * p1 + g) * (p2 - g)));
            }
            FieldBoundary::Dirichlet { right, .. } if j == last => {
                let n = len;
                let (g, p1, p2, p3) = (*right, p[n - 1], p[n - 2], p[n - 3]);
                linear.push(one_sided * (g - 3.0 * p1 + 3.0 * p2 - p3));
                nonlinear.push(0.5 * one_sided * ((p2 - 2.0 * p1 + g) * (g - p2)));
            }
            _ => {
                let third = at(j + 2) - 2.0 * at(j + 1) + 2.0 * at(j - 1) - at(j - 2);
                let second = at(j + 1) - 2.0 * at(j) + at(j - 1);
                let first = at(j + 1) - at(j - 1);
                linear.push(centered * third);
                nonlinear.push(centered * (second * first));
            }
        }
    }
    Ok(DispersiveParts { linear, nonlinear })
}

/// Discrete `lambda^2 (phi''' + phi' phi'')`: centered five-point stencil in
/// the interior, one-sided stencils in the first and last cell under
/// Dirichlet closure.
pub fn repb_source(phi: &PotentialField, lambda: f64, h: f64, bc: &FieldBoundary) -> Result<SourceTermField> {
    let parts = dispersive_parts(phi, lambda, h, bc)?;
    Ok(SourceTermField {
        values: parts.linear.iter().zip(&parts.nonlinear).map(|(a, b)| a + b).collect(),
    })
}

/// `q += dt * Q`; density is untouched.
pub fn repb_source_update(state: &FluidState, source: &SourceTermField, dt: f64) -> Result<FluidState> {
    check_len(state.len(), source.values.len())?;
    let q = state
        .momentum()
        .iter()
        .zip(&source.values)
        .map(|(q, s)| q + dt * s)
        .collect();
    Ok(FluidState::from_parts_unchecked(state.density().to_vec(), q))
}

fn check_len(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::LengthMismatch { expected, found });
    }
    Ok(())
}
