//! Uniform cell-centered 1D grids.

use crate::error::{Error, Result};

/// Smallest grid accepted: the one-sided dispersive stencils reach three cells in.
pub const MIN_CELLS: usize = 4;

#[derive(Debug, Clone, PartialEq)]
pub struct Grid1D {
    n_cells: usize,
    x_min: f64,
    x_max: f64,
    h: f64,
    centers: Vec<f64>,
}

impl Grid1D {
    pub fn n_cells(&self) -> usize {
        self.n_cells
    }

    pub fn x_min(&self) -> f64 {
        self.x_min
    }

    pub fn x_max(&self) -> f64 {
        self.x_max
    }

    pub fn length(&self) -> f64 {
        self.x_max - self.x_min
    }

    /// Cell width.
    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn centers(&self) -> &[f64] {
        &self.centers
    }

    /// Position of interface `j - 1/2`, for `j` in `0..=n_cells`.
    pub fn interface(&self, j: usize) -> f64 {
        self.x_min + j as f64 * self.h
    }
}

pub fn make_grid(n_cells: usize, x_min: f64, x_max: f64) -> Result<Grid1D> {
    if n_cells < MIN_CELLS {
        return Err(Error::InvalidGrid(format!(
            "need at least {MIN_CELLS} cells, got {n_cells}"
        )));
    }
    if !(x_min.is_finite() && x_max.is_finite()) || x_max <= x_min {
        return Err(Error::InvalidGrid(format!(
            "empty or non-finite interval [{x_min}, {x_max}]"
        )));
    }
    let h = (x_max - x_min) / n_cells as f64;
    let centers = (0..n_cells).map(|j| x_min + (j as f64 + 0.5) * h).collect();
    Ok(Grid1D {
        n_cells,
        x_min,
        x_max,
        h,
        centers,
    })
}

/// Evaluates `f` at every cell center.
pub fn sample_on_grid<F>(f: F, grid: &Grid1D) -> Result<Vec<f64>>
where
    F: Fn(f64) -> f64,
{
    grid.centers
        .iter()
        .enumerate()
        .map(|(index, &x)| {
            let value = f(x);
            if value.is_finite() {
                Ok(value)
            } else {
                Err(Error::NonFiniteSample { index, x, value })
            }
        })
        .collect()
}
