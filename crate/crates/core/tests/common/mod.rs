//! Independent oracles shared by the integration tests.

#![allow(dead_code)]

/// Star state and wave speeds of an isothermal (unit sound speed) Riemann
/// problem whose solution consists of two shocks.
#[derive(Debug, Clone, Copy)]
pub struct TwoShock {
    pub n_star: f64,
    pub u_star: f64,
    pub left_speed: f64,
    pub right_speed: f64,
}

/// Solves the two-shock Riemann problem by bisection on the star density,
/// using the isothermal Hugoniot loci
/// `u* = u_l - (n* - n_l) / sqrt(n* n_l)` and `u* = u_r + (n* - n_r) / sqrt(n* n_r)`.
pub fn isothermal_two_shock(n_l: f64, u_l: f64, n_r: f64, u_r: f64) -> TwoShock {
    let left = |n: f64| u_l - (n - n_l) / (n * n_l).sqrt();
    let right = |n: f64| u_r + (n - n_r) / (n * n_r).sqrt();
    let gap = |n: f64| left(n) - right(n);
    let mut lo = n_l.max(n_r);
    assert!(gap(lo) > 0.0, "data do not produce two shocks");
    let mut hi = 2.0 * lo;
    while gap(hi) > 0.0 {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if gap(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let n_star = 0.5 * (lo + hi);
    let u_star = 0.5 * (left(n_star) + right(n_star));
    // Mass jump condition s [n] = [n u] across each shock.
    let left_speed = (n_star * u_star - n_l * u_l) / (n_star - n_l);
    let right_speed = (n_star * u_star - n_r * u_r) / (n_star - n_r);
    TwoShock {
        n_star,
        u_star,
        left_speed,
        right_speed,
    }
}

/// Momentum jump residual `s [q] - [q^2/n + n]` across a shock.
pub fn momentum_jump(n_a: f64, u_a: f64, n_b: f64, u_b: f64, s: f64) -> f64 {
    let flux = |n: f64, u: f64| n * u * u + n;
    s * (n_b * u_b - n_a * u_a) - (flux(n_b, u_b) - flux(n_a, u_a))
}
