//! The parametrizing system of a polygon whose limit shape touches every side:
//!
//! ```text
//! f_j (f_j + f_{j-1}) (f_j + f_{j+1}) = r_j r_{j+1} sin(theta_j),   j = 1..kappa
//! ```
//!
//! Its unique positive solution gives the corner triangles of the limit shape
//! (`f_j^3 = 2 T_j`), the tangency fractions `w_j = f_j / (f_j + f_{j-1})` and
//! the maximal affine perimeter `AP* = 2^{2/3} sum f_j`.
//!
//! `w_j` is the fraction of side `j` between its tangency point and its end
//! vertex `v_{j+1}`, so the corner triangle `T_j = (p_j, v_{j+1}, p_{j+1})` has
//! legs `w_j r_j` and `(1 - w_{j+1}) r_{j+1}`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::geom::{Point, Polygon};

const NEWTON_MAX_ITER: usize = 200;
const NEWTON_TOL: f64 = 1e-12;
const FALLBACK_SWEEPS: usize = 10_000;

/// Positive solution of the parametrizing system and the quantities derived
/// from it.
#[derive(Debug, Clone, PartialEq)]
pub struct PsSolution {
    pub f: Vec<f64>,
    /// Tangency fractions, measured back from the end vertex of each side.
    pub w: Vec<f64>,
    /// `f` normalized to sum to one.
    pub g: Vec<f64>,
    pub ap_star: f64,
    /// Largest absolute residual of the system at `f`.
    pub residual_inf: f64,
    /// Corner triangle areas computed from `w` and the polygon data.
    pub triangles: Vec<f64>,
}

impl PsSolution {
    pub fn for_polygon(poly: &Polygon) -> Result<Self> {
        solve_ps(poly.sides(), poly.angles())
    }

    pub fn kappa(&self) -> usize {
        self.f.len()
    }
}

/// Right-hand sides `r_j r_{j+1} sin(theta_j)`.
pub fn ps_rhs(r: &[f64], theta: &[f64]) -> Vec<f64> {
    let k = r.len();
    (0..k).map(|j| r[j] * r[(j + 1) % k] * theta[j].sin()).collect()
}

fn lhs(f: &[f64], j: usize) -> f64 {
    let k = f.len();
    let (prev, next) = (f[(j + k - 1) % k], f[(j + 1) % k]);
    f[j] * (f[j] + prev) * (f[j] + next)
}

fn relative_residual(f: &[f64], rhs: &[f64]) -> f64 {
    (0..f.len())
        .map(|j| (lhs(f, j) / rhs[j] - 1.0).abs())
        .fold(0.0, f64::max)
}

fn log_residual(y: &[f64], rhs: &[f64]) -> Vec<f64> {
    let f: Vec<f64> = y.iter().map(|v| v.exp()).collect();
    let k = f.len();
    (0..k)
        .map(|j| {
            let (prev, next) = (f[(j + k - 1) % k], f[(j + 1) % k]);
            y[j] + (f[j] + prev).ln() + (f[j] + next).ln() - rhs[j].ln()
        })
        .collect()
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Damped Newton in `y = ln f`. Returns `None` when a step fails to reduce
/// the residual after repeated halving.
fn newton(y: &mut [f64], rhs: &[f64]) -> Option<()> {
    let k = y.len();
    let mut res = log_residual(y, rhs);
    for _ in 0..NEWTON_MAX_ITER {
        let f: Vec<f64> = y.iter().map(|v| v.exp()).collect();
        if relative_residual(&f, rhs) < NEWTON_TOL {
            return Some(());
        }
        // Cyclic tridiagonal Jacobian of the log residual.
        let mut jac = DMatrix::<f64>::zeros(k, k);
        for j in 0..k {
            let (jp, jn) = ((j + k - 1) % k, (j + 1) % k);
            let a = f[j] / (f[j] + f[jp]);
            let b = f[j] / (f[j] + f[jn]);
            jac[(j, j)] += 1.0 + a + b;
            jac[(j, jp)] += 1.0 - a;
            jac[(j, jn)] += 1.0 - b;
        }
        let step = jac.lu().solve(&DVector::from_column_slice(&res))?;
        let norm0 = inf_norm(&res);
        let mut t = 1.0;
        let mut accepted = false;
        for _ in 0..40 {
            let trial: Vec<f64> = (0..k).map(|j| y[j] - t * step[j]).collect();
            let r = log_residual(&trial, rhs);
            if inf_norm(&r) < norm0 || inf_norm(&r) < 1e-15 {
                y.copy_from_slice(&trial);
                res = r;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if !accepted {
            return None;
        }
    }
    let f: Vec<f64> = y.iter().map(|v| v.exp()).collect();
    (relative_residual(&f, rhs) < NEWTON_TOL).then_some(())
}

/// Solves `x (x + a) (x + b) = c` for `x > 0` by bisection; the left side is
/// increasing in `x`.
fn solve_coordinate(a: f64, b: f64, c: f64) -> f64 {
    let (mut lo, mut hi) = (0.0, c.cbrt().max(1e-300));
    while hi * (hi + a) * (hi + b) < c {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid * (mid + a) * (mid + b) < c {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-16 * hi {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// Gauss-Seidel sweeps solving each equation for its own unknown.
fn fixed_point(f: &mut [f64], rhs: &[f64]) {
    let k = f.len();
    for _ in 0..FALLBACK_SWEEPS {
        for j in 0..k {
            let (prev, next) = (f[(j + k - 1) % k], f[(j + 1) % k]);
            f[j] = solve_coordinate(prev, next, rhs[j]);
        }
        if relative_residual(f, rhs) < 1e-6 {
            break;
        }
    }
}

/// Initial guess `(r_j r_{j+1} sin(theta_j) / 4)^{1/3}`, exact for regular
/// polygons.
pub fn initial_guess(r: &[f64], theta: &[f64]) -> Vec<f64> {
    ps_rhs(r, theta).iter().map(|c| (c / 4.0).cbrt()).collect()
}

/// Solves the parametrizing system from the default starting point.
pub fn solve_ps(r: &[f64], theta: &[f64]) -> Result<PsSolution> {
    solve_ps_from(r, theta, &initial_guess(r, theta))
}

/// Solves the parametrizing system from a given positive starting point.
pub fn solve_ps_from(r: &[f64], theta: &[f64], start: &[f64]) -> Result<PsSolution> {
    let k = r.len();
    if k < 3 || theta.len() != k || start.len() != k {
        return Err(Error::InvalidInput(format!(
            "system needs matching lengths >= 3 (r: {k}, theta: {}, start: {})",
            theta.len(),
            start.len()
        )));
    }
    if r.iter().any(|&x| !(x > 0.0 && x.is_finite()))
        || theta.iter().any(|&t| !(t > 0.0 && t < std::f64::consts::PI))
        || start.iter().any(|&x| !(x > 0.0 && x.is_finite()))
    {
        return Err(Error::InvalidInput(
            "sides and start must be positive, angles in (0, pi)".into(),
        ));
    }
    let rhs = ps_rhs(r, theta);
    let mut y: Vec<f64> = start.iter().map(|v| v.ln()).collect();
    if newton(&mut y, &rhs).is_none() {
        let mut f: Vec<f64> = y.iter().map(|v| v.exp()).collect();
        if f.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            f = initial_guess(r, theta);
        }
        fixed_point(&mut f, &rhs);
        y = f.iter().map(|v| v.ln()).collect();
        if newton(&mut y, &rhs).is_none() {
            return Err(Error::NoConvergence(format!(
                "parametrizing system did not converge (kappa = {k})"
            )));
        }
    }
    let f: Vec<f64> = y.iter().map(|v| v.exp()).collect();
    Ok(derive(f, r, theta, &rhs))
}

fn derive(f: Vec<f64>, r: &[f64], theta: &[f64], rhs: &[f64]) -> PsSolution {
    let k = f.len();
    let total: f64 = f.iter().sum();
    let w: Vec<f64> = (0..k).map(|j| f[j] / (f[j] + f[(j + k - 1) % k])).collect();
    let g = f.iter().map(|v| v / total).collect();
    let triangles = (0..k)
        .map(|j| {
            let jn = (j + 1) % k;
            w[j] * r[j] * (1.0 - w[jn]) * r[jn] * theta[j].sin() / 2.0
        })
        .collect();
    let residual_inf = (0..k)
        .map(|j| (lhs(&f, j) - rhs[j]).abs())
        .fold(0.0, f64::max);
    PsSolution {
        ap_star: 2f64.powf(2.0 / 3.0) * total,
        f,
        w,
        g,
        residual_inf,
        triangles,
    }
}

/// Tangency points `p_j`, with `|p_j - v_{j+1}| = w_j r_j`.
pub fn tangency_points(poly: &Polygon, sol: &PsSolution) -> Vec<Point> {
    let k = poly.kappa();
    (0..k)
        .map(|j| poly.vertex(j + 1).lerp(poly.vertex(j), sol.w[j]))
        .collect()
}

/// Affine perimeter of the parabola-arc chain touching side `j` at the point
/// a fraction `u_j` of the side away from its end vertex:
/// `2^{2/3} sum_i (r_i u_i r_{i+1} (1 - u_{i+1}) sin(theta_i))^{1/3}`.
pub fn affine_perimeter_of_chain(poly: &Polygon, u: &[f64]) -> f64 {
    let (r, th) = (poly.sides(), poly.angles());
    let k = r.len();
    let s: f64 = (0..k)
        .map(|i| {
            let i1 = (i + 1) % k;
            (r[i] * u[i] * r[i1] * (1.0 - u[i1]) * th[i].sin())
                .max(0.0)
                .cbrt()
        })
        .sum();
    2f64.powf(2.0 / 3.0) * s
}
