//! Cell-averaged fluid state and potential containers.

use crate::error::{Error, Result};

/// Conserved variables of one cell: density and momentum `n u`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Conserved {
    pub n: f64,
    pub q: f64,
}

impl Conserved {
    pub const fn new(n: f64, q: f64) -> Self {
        Self { n, q }
    }

    pub fn velocity(&self) -> f64 {
        self.q / self.n
    }
}

/// Ion density and momentum per cell, in scaled units.
#[derive(Debug, Clone, PartialEq)]
pub struct FluidState {
    n: Vec<f64>,
    q: Vec<f64>,
}

impl FluidState {
    /// Builds a state, rejecting mismatched lengths, non-finite entries and
    /// non-positive densities.
    pub fn new(n: Vec<f64>, q: Vec<f64>) -> Result<Self> {
        if n.len() != q.len() {
            return Err(Error::LengthMismatch {
                expected: n.len(),
                found: q.len(),
            });
        }
        check_positive(&n)?;
        check_finite(&q)?;
        Ok(Self { n, q })
    }

    /// Builds a state from density and velocity.
    pub fn from_velocity(n: Vec<f64>, u: &[f64]) -> Result<Self> {
        if n.len() != u.len() {
            return Err(Error::LengthMismatch {
                expected: n.len(),
                found: u.len(),
            });
        }
        let q = n.iter().zip(u).map(|(n, u)| n * u).collect();
        Self::new(n, q)
    }

    /// Uniform plasma at rest: `n = 1`, `q = 0`.
    pub fn rest(n_cells: usize) -> Self {
        Self {
            n: vec![1.0; n_cells],
            q: vec![0.0; n_cells],
        }
    }

    /// Assembles a state whose density is known to be valid.
    pub(crate) fn from_parts_unchecked(n: Vec<f64>, q: Vec<f64>) -> Self {
        debug_assert_eq!(n.len(), q.len());
        Self { n, q }
    }

    pub fn len(&self) -> usize {
        self.n.len()
    }

    pub fn is_empty(&self) -> bool {
        self.n.is_empty()
    }

    pub fn density(&self) -> &[f64] {
        &self.n
    }

    pub fn momentum(&self) -> &[f64] {
        &self.q
    }

    pub fn cell(&self, j: usize) -> Conserved {
        Conserved::new(self.n[j], self.q[j])
    }

    pub fn velocity(&self) -> Vec<f64> {
        self.n.iter().zip(&self.q).map(|(n, q)| q / n).collect()
    }

    /// Total mass `sum_j n_j h`, with compensated summation.
    pub fn mass(&self, h: f64) -> f64 {
        neumaier_sum(&self.n) * h
    }

    /// Total momentum `sum_j q_j h`, with compensated summation.
    pub fn total_momentum(&self, h: f64) -> f64 {
        neumaier_sum(&self.q) * h
    }

    pub fn max_density(&self) -> f64 {
        self.n.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min_density(&self) -> f64 {
        self.n.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Reflected state: arrays reversed and momentum negated.
    pub fn mirrored(&self) -> Self {
        Self {
            n: self.n.iter().rev().copied().collect(),
            q: self.q.iter().rev().map(|q| -q).collect(),
        }
    }

    pub fn into_parts(self) -> (Vec<f64>, Vec<f64>) {
        (self.n, self.q)
    }
}

/// Electron potential energy per cell.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialField(Vec<f64>);

impl PotentialField {
    pub fn new(phi: Vec<f64>) -> Result<Self> {
        check_finite(&phi)?;
        Ok(Self(phi))
    }

    pub fn zeros(n_cells: usize) -> Self {
        Self(vec![0.0; n_cells])
    }

    pub(crate) fn from_vec_unchecked(phi: Vec<f64>) -> Self {
        Self(phi)
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }
}

pub(crate) fn check_positive(n: &[f64]) -> Result<()> {
    match n.iter().position(|&v| !(v > 0.0 && v.is_finite())) {
        Some(cell) => Err(Error::NonPositiveDensity { cell, value: n[cell] }),
        None => Ok(()),
    }
}

pub(crate) fn check_finite(v: &[f64]) -> Result<()> {
    match v.iter().position(|x| !x.is_finite()) {
        Some(cell) => Err(Error::NonFinite { cell, value: v[cell] }),
        None => Ok(()),
    }
}

pub(crate) fn neumaier_sum(values: &[f64]) -> f64 {
    let mut sum = 0.0;
    let mut c = 0.0;
    for &v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            c += (sum - t) + v;
        } else {
            c += (v - t) + sum;
        }
        sum = t;
    }
    sum + c
}
