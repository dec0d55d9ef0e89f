//! Constants of the asymptotic equivalent of `P_K(n)` and exact reference
//! values for the square, the triangle and the bi-pointed triangle.
//!
//! All probabilities are carried as natural logarithms.

use std::f64::consts::{LN_2, PI};
use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive};
use serde::Serialize;
use statrs::function::gamma::ln_gamma;

use crate::domfinder::{find_dom, DomReport};
use crate::error::{Error, Result};
use crate::geom::Polygon;
use crate::pssolver::PsSolution;

/// Rates `m_j` of the exponential limits of the rescaled side distances.
/// `poly` must be tangent to all its sides, with `sol` its solution.
pub fn mixing_rates(poly: &Polygon, sol: &PsSolution) -> Vec<f64> {
    let (r, th, g) = (poly.sides(), poly.angles(), &sol.g);
    let k = r.len();
    let at = |j: isize| ((j % k as isize + k as isize) % k as isize) as usize;
    (0..k as isize)
        .map(|j| {
            let (jm2, jm1, j0, jp1) = (at(j - 2), at(j - 1), at(j), at(j + 1));
            let cot = |t: f64| t.cos() / t.sin();
            (cot(th[jm1]) + cot(th[j0])) / r[j0] * (g[j0] + g[jm1])
                + (g[jp1] + g[j0]) / (th[j0].sin() * r[jp1])
                + (g[jm1] + g[jm2]) / (th[jm1].sin() * r[jm1])
        })
        .collect()
}

/// Quadratic form `sum_j x_j^2/g_j + (x_j + x_{j+1})^2/(g_j + g_{j+1})` on
/// the full cyclic vector.
pub fn gaussian_form(g: &[f64], x_full: &[f64]) -> f64 {
    let k = g.len();
    (0..k)
        .map(|j| {
            let jn = (j + 1) % k;
            x_full[j].powi(2) / g[j] + (x_full[j] + x_full[jn]).powi(2) / (g[j] + g[jn])
        })
        .sum()
}

/// Matrix of the quadratic form restricted to `x_kappa = -sum x_i`, and its
/// determinant.
pub fn precision_matrix(g: &[f64]) -> Result<(DMatrix<f64>, f64)> {
    let k = g.len();
    if k < 3 || g.iter().any(|&v| !(v > 0.0 && v.is_finite())) {
        return Err(Error::SingularMatrix);
    }
    let mut full = DMatrix::<f64>::zeros(k, k);
    for j in 0..k {
        let jn = (j + 1) % k;
        let h = 1.0 / (g[j] + g[jn]);
        full[(j, j)] += 1.0 / g[j] + h;
        full[(jn, jn)] += h;
        full[(j, jn)] += h;
        full[(jn, j)] += h;
    }
    let mut embed = DMatrix::<f64>::zeros(k, k - 1);
    for i in 0..k - 1 {
        embed[(i, i)] = 1.0;
        embed[(k - 1, i)] = -1.0;
    }
    let m = embed.transpose() * full * embed;
    let chol = m.clone().cholesky().ok_or(Error::SingularMatrix)?;
    let det = chol.l().diagonal().iter().map(|d| d * d).product::<f64>();
    if !(det > 0.0 && det.is_finite()) {
        return Err(Error::SingularMatrix);
    }
    Ok((m, det))
}

/// The componentwise matrix as printed alongside the theorem, kept for
/// comparison with [`precision_matrix`]. On the unit square it gives
/// determinant 1600 instead of 1024.
pub fn printed_precision_matrix(g: &[f64]) -> DMatrix<f64> {
    let k = g.len();
    // 1-based accessor.
    let gg = |i: usize| g[i - 1];
    let ind = |b: bool| if b { 1.0 } else { 0.0 };
    let mut m = DMatrix::<f64>::zeros(k - 1, k - 1);
    for j in 1..k {
        let mut v = 1.0 / gg(j) + 1.0 / gg(k) + 1.0 / (gg(1) + gg(k)) + 1.0 / (gg(k - 1) + gg(k));
        if j != 1 {
            v += 1.0 / (gg(j - 1) + gg(j));
        }
        if j != k - 1 {
            v += 1.0 / (gg(j + 1) + gg(j));
        }
        m[(j - 1, j - 1)] = v;
    }
    for i in 1..k {
        for j in i + 1..k {
            let v = 1.0 / gg(k)
                + ind(j == i + 1) / (gg(j - 1) + gg(j))
                + ind(i != 1) / (gg(k) + gg(1))
                + ind(j != k - 1) / (gg(k - 1) + gg(k));
            m[(i - 1, j - 1)] = v;
            m[(j - 1, i - 1)] = v;
        }
    }
    m
}

/// `ln C` for a polygon tangent to all its sides.
pub fn log_constant_c(poly: &Polygon, sol: &PsSolution, m_rates: &[f64], d_k: f64) -> f64 {
    let k = poly.kappa();
    let (r, th) = (poly.sides(), poly.angles());
    let prod: f64 = (0..k)
        .map(|j| 0.5 * sol.w[j].ln() + (m_rates[j] * th[j].sin() * r[j]).ln())
        .sum();
    -(k as f64) / 2.0 * (2.0 * PI).ln() - 0.5 * d_k.ln() - prod
}

pub fn constant_c(poly: &Polygon, sol: &PsSolution, m_rates: &[f64], d_k: f64) -> f64 {
    log_constant_c(poly, sol, m_rates, d_k).exp()
}

/// Everything needed to evaluate the asymptotic equivalent of `P_K(n)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AsymptoticModel {
    pub m_rates: Vec<f64>,
    pub sigma_inv: Vec<Vec<f64>>,
    pub d_k: f64,
    /// Determinant of the printed componentwise matrix, for comparison.
    pub d_k_printed: f64,
    pub c_k: f64,
    pub log_c_k: f64,
    pub ap_star: f64,
    /// Area of the polygon the model was requested for.
    pub area: f64,
    /// Number of sides touched by the limit shape, i.e. the sides of `K_T`.
    pub m_tangency: usize,
    pub kappa: usize,
}

impl AsymptoticModel {
    /// Model for `K` from its domain report.
    pub fn from_report(poly: &Polygon, report: &DomReport) -> Result<Self> {
        let mut model = Self::for_tangent_polygon(&report.k_t, &report.solution)?;
        model.area = poly.area();
        Ok(model)
    }

    pub fn for_polygon(poly: &Polygon) -> Result<Self> {
        Self::from_report(poly, &find_dom(poly)?)
    }

    /// Model for a polygon whose limit shape touches every side.
    pub fn for_tangent_polygon(k_t: &Polygon, sol: &PsSolution) -> Result<Self> {
        let m_rates = mixing_rates(k_t, sol);
        let (sigma, d_k) = precision_matrix(&sol.g)?;
        let d_k_printed = printed_precision_matrix(&sol.g).determinant();
        let log_c_k = log_constant_c(k_t, sol, &m_rates, d_k);
        let k = k_t.kappa();
        Ok(AsymptoticModel {
            sigma_inv: (0..k - 1)
                .map(|i| (0..k - 1).map(|j| sigma[(i, j)]).collect())
                .collect(),
            m_rates,
            d_k,
            d_k_printed,
            c_k: log_c_k.exp(),
            log_c_k,
            ap_star: sol.ap_star,
            area: k_t.area(),
            m_tangency: k,
            kappa: k,
        })
    }

    pub fn sigma_inv_matrix(&self) -> DMatrix<f64> {
        let k = self.sigma_inv.len();
        DMatrix::from_fn(k, k, |i, j| self.sigma_inv[i][j])
    }

    /// `ln` of `C e^{2n} 4^{-n} AP*^{3n} Area^{-n} n^{-(2n + m/2)}`.
    pub fn log_prob(&self, n: u64) -> f64 {
        let nf = n as f64;
        self.log_c_k + 2.0 * nf - nf * 4f64.ln() + 3.0 * nf * self.ap_star.ln()
            - nf * self.area.ln()
            - (2.0 * nf + self.m_tangency as f64 / 2.0) * nf.ln()
    }

    /// `lim n^2 P(n)^{1/n} = e^2 AP*^3 / (4 Area)`.
    pub fn barany_limit(&self) -> f64 {
        std::f64::consts::E.powi(2) * self.ap_star.powi(3) / (4.0 * self.area)
    }
}

pub fn log_prob_asymptotic(poly: &Polygon, n: u64) -> Result<f64> {
    if n < 3 {
        return Err(Error::InvalidInput(format!("n must be at least 3, got {n}")));
    }
    Ok(AsymptoticModel::for_polygon(poly)?.log_prob(n))
}

pub fn barany_limit(poly: &Polygon) -> Result<f64> {
    Ok(AsymptoticModel::for_polygon(poly)?.barany_limit())
}

/// `n^2 P^{1/n}`, which tends to the Barany limit.
pub fn barany_proxy(log_p: f64, n: u64) -> f64 {
    (log_p / n as f64 + 2.0 * (n as f64).ln()).exp()
}

/// Shapes with a closed-form convex-position probability.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ExactShape {
    Square,
    Triangle,
    /// Triangle with two vertices added to the point set.
    Bipointed,
}

impl ExactShape {
    pub fn min_n(self) -> u64 {
        match self {
            ExactShape::Bipointed => 1,
            _ => 3,
        }
    }
}

impl FromStr for ExactShape {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "square" => Ok(ExactShape::Square),
            "triangle" => Ok(ExactShape::Triangle),
            "bipointed" => Ok(ExactShape::Bipointed),
            other => Err(Error::InvalidInput(format!("unknown shape {other:?}"))),
        }
    }
}

impl fmt::Display for ExactShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ExactShape::Square => "square",
            ExactShape::Triangle => "triangle",
            ExactShape::Bipointed => "bipointed",
        })
    }
}

/// Largest `n` for which the exact rational is returned.
pub const RATIONAL_MAX_N: u64 = 30;
/// Largest `n` for which the logarithm is taken from big integers rather
/// than log-gamma.
pub const BIGINT_LOG_MAX_N: u64 = 2000;

#[derive(Debug, Clone, PartialEq)]
pub struct ExactValue {
    pub log: f64,
    pub rational: Option<BigRational>,
}

fn factorial(n: u64) -> BigUint {
    (2..=n).fold(BigUint::one(), |acc, i| acc * i)
}

/// Natural log of a positive big integer.
fn ln_biguint(x: &BigUint) -> (f64, i64) {
    let bits = x.bits();
    let shift = bits.saturating_sub(60);
    let top = (x >> shift).to_f64().expect("fits in f64");
    (top.ln(), shift as i64)
}

/// Natural log of a positive rational, accurate to a few ulps of the result.
pub fn ln_rational(q: &BigRational) -> f64 {
    let num = q.numer().magnitude();
    let den = q.denom().magnitude();
    let (ln_n, sh_n) = ln_biguint(num);
    let (ln_d, sh_d) = ln_biguint(den);
    (ln_n - ln_d) + (sh_n - sh_d) as f64 * LN_2
}

fn exact_rational(shape: ExactShape, n: u64) -> BigRational {
    let (num, den) = match shape {
        ExactShape::Square => {
            // binom(2n-2, n-1)^2 / (n!)^2
            let b = factorial(2 * n - 2) / (factorial(n - 1) * factorial(n - 1));
            let f = factorial(n);
            (&b * &b, &f * &f)
        }
        ExactShape::Triangle => {
            let f = factorial(n - 1);
            (
                (BigUint::one() << n) * factorial(3 * n - 3),
                factorial(2 * n) * &f * &f * &f,
            )
        }
        ExactShape::Bipointed => (BigUint::one() << n, factorial(n) * factorial(n + 1)),
    };
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// Log of the closed form via log-gamma.
pub fn log_exact_lgamma(shape: ExactShape, n: u64) -> f64 {
    let nf = n as f64;
    match shape {
        ExactShape::Square => {
            2.0 * (ln_gamma(2.0 * nf - 1.0) - 2.0 * ln_gamma(nf) - ln_gamma(nf + 1.0))
        }
        ExactShape::Triangle => {
            nf * LN_2 + ln_gamma(3.0 * nf - 2.0) - ln_gamma(2.0 * nf + 1.0) - 3.0 * ln_gamma(nf)
        }
        ExactShape::Bipointed => nf * LN_2 - ln_gamma(nf + 1.0) - ln_gamma(nf + 2.0),
    }
}

pub fn exact_reference(shape: ExactShape, n: u64) -> Result<ExactValue> {
    if n < shape.min_n() {
        return Err(Error::InvalidInput(format!(
            "{shape} needs n >= {}, got {n}",
            shape.min_n()
        )));
    }
    if n > BIGINT_LOG_MAX_N {
        return Ok(ExactValue {
            log: log_exact_lgamma(shape, n),
            rational: None,
        });
    }
    let q = exact_rational(shape, n);
    Ok(ExactValue {
        log: ln_rational(&q),
        rational: (n <= RATIONAL_MAX_N).then_some(q),
    })
}

/// Formats a rational as `p/q`, or `p` when the denominator is one.
pub fn format_rational(q: &BigRational) -> String {
    if q.denom().is_one() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}
