//! Nonlinear Poisson-Boltzmann solve
//! `lambda^2 h^-2 (phi_{j-1} - 2 phi_j + phi_{j+1}) + exp(-phi_j) = n_j`
//! by Newton iteration on a (cyclic) tridiagonal Jacobian.

use crate::config::{Boundary, NewtonParams};
use crate::error::{Error, Result};
use crate::linalg::TridiagWorkspace;
use crate::state::{check_positive, PotentialField};

/// Closure for the potential: wrap-around, fixed or extrapolated ghost values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FieldBoundary {
    Periodic,
    Dirichlet {
        left: f64,
        right: f64,
    },
    /// The Poisson rows at the edge cells drop the curvature term, and stencils
    /// reaching past the ends read the cubic through the four edge values.
    Extrapolated,
}

impl FieldBoundary {
    /// Potential closure matching a hydrodynamic boundary: fictitious states
    /// fix the ghosts at their quasineutral potentials `-ln n_l`, `-ln n_r`.
    pub fn from_boundary(boundary: &Boundary) -> Self {
        match boundary {
            Boundary::Periodic => FieldBoundary::Periodic,
            Boundary::FictitiousStates { left, right } => FieldBoundary::Dirichlet {
                left: -left.n.ln(),
                right: -right.n.ln(),
            },
            Boundary::Outflow => FieldBoundary::Extrapolated,
        }
    }

    /// Value at cell index `j`, which may fall outside `0..values.len()`.
    /// Dirichlet ghosts repeat the boundary value for every out-of-range index;
    /// extrapolated ghosts continue the cubic through the four edge values.
    #[inline]
    pub(crate) fn at(&self, values: &[f64], j: isize) -> f64 {
        let n = values.len() as isize;
        if (0..n).contains(&j) {
            return values[j as usize];
        }
        match *self {
            FieldBoundary::Periodic => values[j.rem_euclid(n) as usize],
            FieldBoundary::Dirichlet { left, right } => {
                if j < 0 {
                    left
                } else {
                    right
                }
            }
            FieldBoundary::Extrapolated => {
                let last = values.len() - 1;
                let pick = |k: usize| {
                    if j < 0 {
                        values[k.min(last)]
                    } else {
                        values[last - k.min(last)]
                    }
                };
                let (p0, p1, p2, p3) = (pick(0), pick(1), pick(2), pick(3));
                let d = (if j < 0 { -j } else { j - n + 1 }) as f64;
                // Newton form of the cubic through the edge values at distance d outside
                let first = p0 - p1;
                let second = if last >= 2 { p0 - 2.0 * p1 + p2 } else { 0.0 };
                let third = if last >= 3 { p0 - 3.0 * p1 + 3.0 * p2 - p3 } else { 0.0 };
                p0 + d * first + d * (d + 1.0) / 2.0 * second + d * (d + 1.0) * (d + 2.0) / 6.0 * third
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoissonSolveStats {
    /// Newton updates applied.
    pub iterations: usize,
    /// Max-norm residual of the returned potential.
    pub final_residual: f64,
    /// Tolerance actually enforced: `tol_residual`, raised to the rounding
    /// floor of the discrete operator when that floor is larger.
    pub tolerance: f64,
    pub converged: bool,
}

pub fn quasineutral_potential(n: &[f64]) -> Result<PotentialField> {
    check_positive(n)?;
    Ok(PotentialField::from_vec_unchecked(n.iter().map(|v| -v.ln()).collect()))
}

/// Pointwise residual of the discrete Poisson-Boltzmann equation.
pub fn residual(phi: &PotentialField, n: &[f64], lambda: f64, h: f64, bc: &FieldBoundary) -> Result<Vec<f64>> {
    if phi.len() != n.len() {
        return Err(Error::LengthMismatch {
            expected: n.len(),
            found: phi.len(),
        });
    }
    Ok(residual_raw(phi.values(), n, lambda * lambda / (h * h), bc))
}

fn residual_raw(phi: &[f64], n: &[f64], k: f64, bc: &FieldBoundary) -> Vec<f64> {
    let mut e = vec![0.0; phi.len()];
    let mut r = vec![0.0; phi.len()];
    evaluate(phi, n, k, bc, &mut e, &mut r);
    r
}

/// Max norms gathered while evaluating the residual.
struct Norms {
    residual: f64,
    phi: f64,
    exp: f64,
}

/// Fills `e = exp(-phi)` and the residual `r` in one pass.
fn evaluate(phi: &[f64], n: &[f64], k: f64, bc: &FieldBoundary, e: &mut [f64], r: &mut [f64]) -> Norms {
    let len = phi.len();
    let mut norms = Norms {
        residual: 0.0,
        phi: 0.0,
        exp: 0.0,
    };
    // `max` skips NaN, so it is tracked separately
    let mut nan = false;
    let mut cell = |j: usize, lo: f64, hi: f64| {
        let p = phi[j];
        let ej = (-p).exp();
        let rj = k * ((lo - p) + (hi - p)) + ej - n[j];
        e[j] = ej;
        r[j] = rj;
        norms.residual = norms.residual.max(rj.abs());
        nan |= rj.is_nan();
        norms.phi = norms.phi.max(p.abs());
        norms.exp = norms.exp.max(ej);
    };
    let last = len - 1;
    if let FieldBoundary::Extrapolated = bc {
        // edge rows carry no curvature term
        cell(0, phi[0], phi[0]);
        if len > 1 {
            cell(last, phi[last], phi[last]);
        }
    } else if len == 1 {
        cell(0, bc.at(phi, -1), bc.at(phi, 1));
    } else {
        cell(0, bc.at(phi, -1), phi[1]);
        cell(last, phi[last - 1], bc.at(phi, len as isize));
    }
    for j in 1..last {
        cell(j, phi[j - 1], phi[j + 1]);
    }
    if nan {
        norms.residual = f64::NAN;
    }
    norms
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Smallest residual the floating-point operator can resolve near `phi`.
fn rounding_floor(norms: &Norms, n_max: f64, k: f64, bc: &FieldBoundary) -> f64 {
    let mut phi_max = norms.phi;
    if let FieldBoundary::Dirichlet { left, right } = bc {
        phi_max = phi_max.max(left.abs()).max(right.abs());
    }
    32.0 * f64::EPSILON * (4.0 * k * phi_max + n_max + norms.exp)
}

pub fn solve_poisson_boltzmann(
    n: &[f64],
    lambda: f64,
    h: f64,
    bc: &FieldBoundary,
    guess: &PotentialField,
    params: &NewtonParams,
) -> Result<(PotentialField, PoissonSolveStats)> {
    check_positive(n)?;
    if guess.len() != n.len() {
        return Err(Error::LengthMismatch {
            expected: n.len(),
            found: guess.len(),
        });
    }
    if !(lambda >= 0.0 && lambda.is_finite()) || !(h > 0.0) {
        return Err(Error::InvalidConfig(format!(
            "Poisson solve needs lambda >= 0 and h > 0, got lambda = {lambda}, h = {h}"
        )));
    }
    if let FieldBoundary::Periodic = bc {
        if n.len() < 3 {
            return Err(Error::InvalidGrid(
                "periodic Poisson solve needs at least 3 cells".into(),
            ));
        }
    }
    crate::state::check_finite(guess.values())?;

    let len = n.len();
    let k = lambda * lambda / (h * h);
    let n_max = max_abs(n);
    let mut phi = guess.values().to_vec();
    if let FieldBoundary::Extrapolated = bc {
        // the edge rows reduce to exp(-phi) = n and are solved in closed form
        phi[0] = -n[0].ln();
        phi[len - 1] = -n[len - 1].ln();
    }
    let mut sub = vec![k; len];
    let mut sup = vec![k; len];
    let mut diag = vec![0.0; len];
    let mut e = vec![0.0; len];
    let mut r = vec![0.0; len];
    let mut step = vec![0.0; len];
    let mut workspace = TridiagWorkspace::new();
    let mut iterations = 0;
    loop {
        let norms = evaluate(&phi, n, k, bc, &mut e, &mut r);
        let norm = norms.residual;
        let tolerance = params.tol_residual.max(rounding_floor(&norms, n_max, k, bc));
        let stats = PoissonSolveStats {
            iterations,
            final_residual: norm,
            tolerance,
            converged: norm <= tolerance,
        };
        if stats.converged {
            return Ok((PotentialField::from_vec_unchecked(phi), stats));
        }
        if iterations >= params.max_iter || !norm.is_finite() {
            return Err(Error::NonConvergence(stats));
        }
        for ((d, r), e) in diag.iter_mut().zip(r.iter_mut()).zip(&e) {
            *d = -2.0 * k - e;
            *r = -*r;
        }
        if let FieldBoundary::Extrapolated = bc {
            for j in [0, len - 1] {
                (diag[j], r[j]) = (1.0, 0.0);
            }
            sup[0] = 0.0;
            sub[len - 1] = 0.0;
        }
        match bc {
            FieldBoundary::Periodic => workspace.cyclic(&sub, &diag, &sup, &r, &mut step)?,
            _ => workspace.thomas(&sub, &diag, &sup, &r, &mut step)?,
        }
        for (p, d) in phi.iter_mut().zip(&step) {
            *p += d;
        }
        iterations += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{make_grid, sample_on_grid};
    use std::f64::consts::{E, PI};

    fn params() -> NewtonParams {
        NewtonParams::default()
    }

    #[test]
    fn quasineutral_examples() {
        assert_eq!(quasineutral_potential(&[1.0; 4]).unwrap().values(), &[0.0; 4]);
        let p = quasineutral_potential(&[(-2.0f64).exp(); 3]).unwrap();
        assert!(p.values().iter().all(|v| (v - 2.0).abs() < 1e-15));
        let p = quasineutral_potential(&[1.0, E, 1.0]).unwrap();
        assert_eq!(p.values(), &[0.0, -1.0, 0.0]);
        assert!(matches!(
            quasineutral_potential(&[1.0, 0.0]),
            Err(Error::NonPositiveDensity { cell: 1, .. })
        ));
    }

    #[test]
    fn residual_examples() {
        let zero = PotentialField::zeros(8);
        let r = residual(&zero, &[1.0; 8], 0.7, 0.1, &FieldBoundary::Periodic).unwrap();
        assert!(r.iter().all(|&v| v == 0.0));
        let r = residual(&zero, &[2.0; 8], 0.7, 0.1, &FieldBoundary::Periodic).unwrap();
        assert!(r.iter().all(|&v| v == -1.0));
    }

    #[test]
    fn residual_of_quasineutral_is_scaled_laplacian() {
        let n = [1.0, 1.5, 2.0, 1.2, 0.8];
        let (lambda, h) = (0.3, 0.5);
        let phi = quasineutral_potential(&n).unwrap();
        let r = residual(&phi, &n, lambda, h, &FieldBoundary::Periodic).unwrap();
        let p = phi.values();
        let m = p.len();
        for j in 0..m {
            let lap = p[(j + m - 1) % m] - 2.0 * p[j] + p[(j + 1) % m];
            let expect = lambda * lambda / (h * h) * lap;
            assert!((r[j] - expect).abs() < 1e-14);
        }
        assert!(r.iter().any(|v| v.abs() > 1e-3));
    }

    #[test]
    fn rest_state_needs_no_iteration() {
        let (phi, stats) = solve_poisson_boltzmann(
            &[1.0; 16],
            1.0,
            0.1,
            &FieldBoundary::Periodic,
            &PotentialField::zeros(16),
            &params(),
        )
        .unwrap();
        assert!(stats.iterations <= 1);
        assert!(stats.converged);
        assert!(phi.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn constant_density_gives_log_potential() {
        for &lambda in &[1e-6, 1e-2, 1.0, 10.0] {
            let c = 2.5;
            let (phi, _) = solve_poisson_boltzmann(
                &[c; 12],
                lambda,
                0.05,
                &FieldBoundary::Periodic,
                &PotentialField::zeros(12),
                &params(),
            )
            .unwrap();
            assert!(phi.values().iter().all(|v| (v + c.ln()).abs() < 1e-12));
        }
    }

    /// Scalar bisection on a decreasing function.
    fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
        assert!(f(lo) > 0.0 && f(hi) < 0.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if f(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn three_cell_dirichlet_matches_bisection_oracle() {
        // Outer cells share phi_1 = phi_3 by symmetry. For a given phi_2 the
        // outer equation -2 p + phi_2 + exp(-p) - 1 = 0 is decreasing in p;
        // the middle equation 2 p1(phi_2) - 2 phi_2 + exp(-phi_2) - 2 is then
        // decreasing in phi_2.
        let outer = |p2: f64| bisect(|p| -2.0 * p + p2 + (-p).exp() - 1.0, -50.0, 50.0);
        let p2 = bisect(|p2| 2.0 * outer(p2) - 2.0 * p2 + (-p2).exp() - 2.0, -50.0, 50.0);
        let p1 = outer(p2);

        let bc = FieldBoundary::Dirichlet { left: 0.0, right: 0.0 };
        let (phi, stats) =
            solve_poisson_boltzmann(&[1.0, 2.0, 1.0], 1.0, 1.0, &bc, &PotentialField::zeros(3), &params()).unwrap();
        assert!(stats.converged);
        let v = phi.values();
        assert!((v[0] - p1).abs() < 1e-12, "{} vs {p1}", v[0]);
        assert!((v[1] - p2).abs() < 1e-12, "{} vs {p2}", v[1]);
        assert!((v[2] - p1).abs() < 1e-12);
    }

    #[test]
    fn small_lambda_is_quasineutral() {
        let g = make_grid((2.0 * PI / 1e-2).round() as usize, 0.0, 2.0 * PI).unwrap();
        // The periodic extension of the Gaussian has a slope kink at the
        // edges, so the ghosts carry the exact field of the smooth profile.
        let gauss = |x: f64| (-(x - PI).powi(2)).exp() / PI;
        let n = sample_on_grid(gauss, &g).unwrap();
        let qn = quasineutral_potential(&n).unwrap();
        let bc = FieldBoundary::Dirichlet {
            left: -gauss(-0.5 * g.h()).ln(),
            right: -gauss(g.x_max() + 0.5 * g.h()).ln(),
        };
        let (phi, _) = solve_poisson_boltzmann(&n, 1e-6, g.h(), &bc, &qn, &params()).unwrap();
        let dev = phi
            .values()
            .iter()
            .zip(qn.values())
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        assert!(dev <= 1e-6, "max deviation {dev}");
    }

    #[test]
    fn residual_certificate_and_rotation() {
        let g = make_grid(64, 0.0, 2.0 * PI).unwrap();
        let n = sample_on_grid(|x| 1.0 + 0.4 * (x.sin() + 0.3 * (3.0 * x).cos()), &g).unwrap();
        let bc = FieldBoundary::Periodic;
        let guess = quasineutral_potential(&n).unwrap();
        let (phi, stats) = solve_poisson_boltzmann(&n, 0.5, g.h(), &bc, &guess, &params()).unwrap();
        assert!(stats.converged && stats.final_residual <= stats.tolerance);
        let r = residual(&phi, &n, 0.5, g.h(), &bc).unwrap();
        assert_eq!(max_abs(&r), stats.final_residual);

        let shift = 13;
        let mut rotated = n.clone();
        rotated.rotate_right(shift);
        let guess = quasineutral_potential(&rotated).unwrap();
        let (phi_rot, _) = solve_poisson_boltzmann(&rotated, 0.5, g.h(), &bc, &guess, &params()).unwrap();
        let mut expect = phi.values().to_vec();
        expect.rotate_right(shift);
        for (a, b) in phi_rot.values().iter().zip(&expect) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn stiff_operator_converges() {
        // lambda^2/h^2 ~ 2.6e7: the residual floor is far above 1e-12
        let g = make_grid(32000, 0.0, 2.0 * PI).unwrap();
        let n = sample_on_grid(|x| (-(x - PI).powi(2)).exp() / PI, &g).unwrap();
        let guess = quasineutral_potential(&n).unwrap();
        let (_, stats) = solve_poisson_boltzmann(&n, 1.0, g.h(), &FieldBoundary::Periodic, &guess, &params()).unwrap();
        assert!(stats.converged);
        assert!(stats.iterations < 20);
    }

    #[test]
    fn non_convergence_is_reported() {
        let p = NewtonParams {
            max_iter: 1,
            ..params()
        };
        let n = [1.0, 3.0, 0.2, 5.0, 1.0];
        let err =
            solve_poisson_boltzmann(&n, 1.0, 0.1, &FieldBoundary::Periodic, &PotentialField::zeros(5), &p).unwrap_err();
        match err {
            Error::NonConvergence(stats) => {
                assert_eq!(stats.iterations, 1);
                assert!(!stats.converged);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn extrapolated_ghosts_continue_edge_cubics() {
        // cubic data is reproduced exactly past both ends
        let q = |x: f64| 2.0 - x + 0.5 * x * x - 0.25 * x * x * x;
        let v: Vec<f64> = (0..6).map(|j| q(j as f64)).collect();
        let bc = FieldBoundary::Extrapolated;
        for j in [-2isize, -1, 6, 7] {
            assert_eq!(bc.at(&v, j), q(j as f64));
        }
        assert_eq!(bc.at(&[5.0], -1), 5.0);
        assert_eq!(bc.at(&[1.0, 3.0], -1), -1.0);
        assert_eq!(FieldBoundary::from_boundary(&Boundary::Outflow), bc);
    }

    #[test]
    fn extrapolated_closure_is_quasineutral_at_edges() {
        let g = make_grid(200, 0.0, 2.0 * PI).unwrap();
        let n = sample_on_grid(|x| (-(x - PI).powi(2)).exp() / PI, &g).unwrap();
        let bc = FieldBoundary::Extrapolated;
        for lambda in [1e-6, 0.1, 1.0] {
            let guess = quasineutral_potential(&n).unwrap();
            let (phi, stats) = solve_poisson_boltzmann(&n, lambda, g.h(), &bc, &guess, &params()).unwrap();
            assert!(stats.converged);
            let p = phi.values();
            for j in [0, p.len() - 1] {
                assert!(((-p[j]).exp() - n[j]).abs() <= stats.tolerance);
            }
            let r = residual(&phi, &n, lambda, g.h(), &bc).unwrap();
            assert!(r.iter().all(|v| v.abs() <= stats.tolerance));
        }
    }

    #[test]
    fn rejects_non_positive_density() {
        let err = solve_poisson_boltzmann(
            &[1.0, -1.0, 1.0],
            1.0,
            0.1,
            &FieldBoundary::Periodic,
            &PotentialField::zeros(3),
            &params(),
        )
        .unwrap_err();
        assert!(matches!(err, Error::NonPositiveDensity { cell: 1, .. }));
    }
}
