//! Linearized stability analysis of the viscous semi-discrete schemes.
//!
//! The recursion `U^{m+1} = U^m + ...` for a Fourier mode `exp(i xi x)` with
//! numerical viscosity `beta = c h` has the characteristic polynomial
//! `q^2 + b q + c0`; the scheme is stable when both roots lie in the closed
//! unit disc for every resolvable wavenumber `|xi| <= pi / h`.

use std::f64::consts::PI;

use crate::config::Variant;
use crate::error::{Error, Result};

pub const DEFAULT_XI_SAMPLES: usize = 1024;
pub const STABLE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Complex {
    pub re: f64,
    pub im: f64,
}

impl Complex {
    pub const fn new(re: f64, im: f64) -> Self {
        Self { re, im }
    }

    pub fn abs(self) -> f64 {
        self.re.hypot(self.im)
    }

    pub fn mul(self, o: Complex) -> Complex {
        Complex::new(self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re)
    }
}

/// Rates `s` of `exp(s t + i xi x)` for the linearized continuous model.
pub fn continuous_wave_rates(xi: f64, lambda: f64) -> (Complex, Complex) {
    let w = xi / (1.0 + lambda * lambda * xi * xi).sqrt();
    (Complex::new(0.0, w), Complex::new(0.0, -w))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StabilityQuery {
    pub variant: Variant,
    pub lambda: f64,
    pub delta: f64,
    pub h: f64,
    pub c: f64,
}

impl StabilityQuery {
    pub fn validate(&self) -> Result<()> {
        let ok = self.lambda >= 0.0
            && self.c >= 0.0
            && self.delta > 0.0
            && self.h > 0.0
            && [self.lambda, self.c, self.delta, self.h].iter().all(|v| v.is_finite());
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidConfig(format!("invalid stability query {self:?}")))
        }
    }

    pub fn beta(&self) -> f64 {
        self.c * self.h
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StabilityReport {
    pub query: StabilityQuery,
    pub max_modulus: f64,
    pub argmax_xi: f64,
    pub stable: bool,
}

/// `(b, c0)` with the characteristic polynomial `q^2 + b q + c0`.
pub fn char_poly_coeffs(query: &StabilityQuery, xi: f64) -> (f64, f64) {
    let (beta, d, l2) = (query.beta(), query.delta, query.lambda * query.lambda);
    let xi2 = xi * xi;
    let k = 1.0 + l2 * xi2;
    let damp = 1.0 - beta * xi2 * d;
    match query.variant {
        Variant::Epb => (-2.0 * (damp - xi2 * d * d / (2.0 * k)), damp * damp),
        Variant::Repb => (
            -2.0 * (damp + l2 * xi2 * xi2 * d * d / (2.0 * k)),
            damp * damp + xi2 * d * d,
        ),
    }
}

/// Roots of `q^2 + b q + c0`, larger modulus first in the real case.
pub fn quadratic_roots(b: f64, c0: f64) -> (Complex, Complex) {
    let half = -0.5 * b;
    let disc = half.mul_add(half, -c0);
    if disc >= 0.0 {
        let q1 = half + half.signum() * disc.sqrt();
        if q1 == 0.0 {
            return (Complex::new(0.0, 0.0), Complex::new(0.0, 0.0));
        }
        (Complex::new(q1, 0.0), Complex::new(c0 / q1, 0.0))
    } else {
        let im = (-disc).sqrt();
        (Complex::new(half, im), Complex::new(half, -im))
    }
}

pub fn char_roots(query: &StabilityQuery, xi: f64) -> (Complex, Complex) {
    let (b, c0) = char_poly_coeffs(query, xi);
    quadratic_roots(b, c0)
}

/// Largest root modulus over uniformly spaced `xi^2` in `[0, (pi/h)^2]`.
pub fn max_growth(query: &StabilityQuery, n_xi_samples: usize) -> Result<StabilityReport> {
    query.validate()?;
    if n_xi_samples < 64 {
        return Err(Error::InvalidConfig(format!(
            "need at least 64 wavenumber samples, got {n_xi_samples}"
        )));
    }
    let xi2_max = (PI / query.h).powi(2);
    let mut best = (f64::NEG_INFINITY, 0.0);
    for k in 0..=n_xi_samples {
        let xi = if k == n_xi_samples {
            PI / query.h
        } else {
            (xi2_max * k as f64 / n_xi_samples as f64).sqrt()
        };
        let (qp, qm) = char_roots(query, xi);
        let m = qp.abs().max(qm.abs());
        if m > best.0 {
            best = (m, xi);
        }
    }
    Ok(StabilityReport {
        query: *query,
        max_modulus: best.0,
        argmax_xi: best.1,
        stable: best.0 <= 1.0 + STABLE_TOL,
    })
}

/// Bound constants `(C1, C2, C)` for `delta <= C h` at viscosity `beta = c h`.
pub fn stability_bound(variant: Variant, c: f64) -> Result<(f64, f64, f64)> {
    if !(c > 0.0) || !c.is_finite() {
        return Err(Error::InvalidConfig(format!(
            "viscosity coefficient must be positive, got {c}"
        )));
    }
    let (c1, c2) = match variant {
        Variant::Epb => (1.0 / (2.0 * c * PI * PI), 2f64.sqrt() / PI),
        Variant::Repb => (2.0 * c / (1.0 + c * c * PI * PI), 4.0 * c),
    };
    Ok((c1, c2, c1.min(c2)))
}

/// Viscosity coefficient that maximizes the bound constant.
pub fn optimal_viscosity(variant: Variant) -> f64 {
    match variant {
        Variant::Epb => 1.0 / (2.0 * 2f64.sqrt() * PI),
        Variant::Repb => 1.0 / PI,
    }
}

/// A function of `delta` with the sign of the discriminant `b^2 - 4 c0`.
pub fn discriminant_f(query: &StabilityQuery, xi: f64, delta: f64) -> Result<f64> {
    if xi == 0.0 {
        return Err(Error::InvalidConfig("discriminant form needs xi != 0".into()));
    }
    let (beta, l2) = (query.beta(), query.lambda * query.lambda);
    let xi2 = xi * xi;
    let k = 1.0 + l2 * xi2;
    match query.variant {
        Variant::Epb => Ok(delta * delta + 4.0 * beta * k * delta - 4.0 * k / xi2),
        Variant::Repb => {
            if l2 == 0.0 {
                return Err(Error::InvalidConfig("REPB discriminant form needs lambda > 0".into()));
            }
            Ok(delta * delta - 4.0 * beta * k * delta / (l2 * xi2) - 4.0 * k / (l2 * l2 * xi2 * xi2 * xi2))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MapRow {
    pub variant: Variant,
    pub lambda: f64,
    pub h: f64,
    pub delta: f64,
    pub c: f64,
    pub max_modulus: f64,
    pub stable: bool,
}

/// Evaluates each `(lambda, h)` at the optimal viscosity and
/// `delta = fraction * C * h`.
pub fn stability_map(variant: Variant, lambdas: &[f64], hs: &[f64], fraction: f64) -> Result<Vec<MapRow>> {
    let c = optimal_viscosity(variant);
    let (_, _, bound) = stability_bound(variant, c)?;
    let mut rows = Vec::with_capacity(lambdas.len() * hs.len());
    for &lambda in lambdas {
        for &h in hs {
            let query = StabilityQuery {
                variant,
                lambda,
                delta: fraction * bound * h,
                h,
                c,
            };
            let r = max_growth(&query, DEFAULT_XI_SAMPLES)?;
            rows.push(MapRow {
                variant,
                lambda,
                h,
                delta: query.delta,
                c,
                max_modulus: r.max_modulus,
                stable: r.stable,
            });
        }
    }
    Ok(rows)
}
