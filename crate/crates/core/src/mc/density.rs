//! Joint density of the side distances and size vector of a full-sided PCP,
//! its integral over the feasible region, and the Gaussian-exponential limit
//! density.

use statrs::function::gamma::ln_gamma;

use crate::asymptotics::AsymptoticModel;
use crate::error::{Error, Result};
use crate::geom::Polygon;
use crate::mc::pcp::side_lengths_from_distances;

/// Largest number of sides accepted by [`ptilde_quadrature`].
pub const QUADRATURE_MAX_SIDES: usize = 4;
/// Largest `n` accepted by [`ptilde_quadrature`].
pub const QUADRATURE_MAX_N: usize = 8;

/// Size vectors of `n` points on `kappa` sides: nonnegative, summing to `n`,
/// with no two cyclically adjacent zeros.
pub fn size_vectors(kappa: usize, n: usize) -> Vec<Vec<usize>> {
    fn rec(kappa: usize, left: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() + 1 == kappa {
            cur.push(left);
            if is_size_vector(cur) {
                out.push(cur.clone());
            }
            cur.pop();
            return;
        }
        for v in 0..=left {
            if v == 0 && cur.last() == Some(&0) {
                continue;
            }
            cur.push(v);
            rec(kappa, left - v, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if kappa >= 1 {
        rec(kappa, n, &mut Vec::with_capacity(kappa), &mut out);
    }
    out
}

fn is_size_vector(s: &[usize]) -> bool {
    let k = s.len();
    (0..k).all(|j| s[j] + s[(j + 1) % k] > 0)
}

/// Exponent of `c_j` for size vector `s`: `s_{j-1} + s_j - 1`, or
/// `s_j + s_{j+1} - 1` with the `shifted-exponent` feature.
fn exponent(s: &[usize], j: usize) -> isize {
    let k = s.len();
    if cfg!(feature = "shifted-exponent") {
        (s[j] + s[(j + 1) % k]) as isize - 1
    } else {
        (s[(j + k - 1) % k] + s[j]) as isize - 1
    }
}

fn ln_factorial(k: usize) -> f64 {
    ln_gamma(k as f64 + 1.0)
}

/// `ln` of the constant factor `n! prod sin(th_j)^{s_j - 1} / (s_j! e_j!)`,
/// or `None` when some exponent is negative.
fn ln_coefficient(poly: &Polygon, s: &[usize], n: usize) -> Option<f64> {
    let th = poly.angles();
    let mut acc = ln_factorial(n);
    for j in 0..s.len() {
        let e = exponent(s, j);
        if e < 0 {
            return None;
        }
        acc += (s[j] as f64 - 1.0) * th[j].sin().ln() - ln_factorial(s[j]) - ln_factorial(e as usize);
    }
    Some(acc)
}

/// `n! prod_j sin(th_j)^{s_j-1} c_j^{s_{j-1}+s_j-1} / (s_j! (s_{j-1}+s_j-1)!)`,
/// with `c` computed from `ell`; zero outside the feasible region.
pub fn density_unnormalized(poly: &Polygon, ell: &[f64], s: &[usize], n: usize) -> Result<f64> {
    let k = poly.kappa();
    if ell.len() != k {
        return Err(Error::InvalidInput(format!("expected {k} distances, got {}", ell.len())));
    }
    if s.len() != k || s.iter().sum::<usize>() != n || !is_size_vector(s) {
        return Err(Error::InvalidSizeVector(format!(
            "{s:?} is not a size vector of {n} points on {k} sides"
        )));
    }
    if ell.iter().any(|&l| l < 0.0) {
        return Ok(0.0);
    }
    let c = side_lengths_from_distances(poly, ell);
    if c.iter().any(|&cj| cj < 0.0) {
        return Ok(0.0);
    }
    let Some(mut log) = ln_coefficient(poly, s, n) else {
        return Ok(0.0);
    };
    for j in 0..k {
        let e = exponent(s, j);
        if e > 0 {
            if c[j] == 0.0 {
                return Ok(0.0);
            }
            log += e as f64 * c[j].ln();
        }
    }
    Ok(log.exp())
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`, by Newton iteration on
/// the Legendre three-term recurrence.
pub fn gauss_legendre(q: usize) -> Vec<(f64, f64)> {
    // Returns (P_q(x), P'_q(x)).
    let legendre = |x: f64| {
        let (mut p0, mut p1) = (1.0, x);
        for k in 2..=q {
            let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
            p0 = p1;
            p1 = p2;
        }
        (p1, q as f64 * (x * p1 - p0) / (x * x - 1.0))
    };
    (0..q)
        .map(|i| {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (q as f64 + 0.5)).cos();
            for _ in 0..100 {
                let (p, dp) = legendre(x);
                let dx = p / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, dp) = legendre(x);
            (x, 2.0 / ((1.0 - x * x) * dp * dp))
        })
        .collect()
}

/// Linear constraint `a . ell >= b`.
#[derive(Clone, Copy)]
struct Constraint {
    a: [f64; QUADRATURE_MAX_SIDES],
    b: f64,
}

struct Integrand {
    kappa: usize,
    /// (coefficient, exponents) per size vector.
    terms: Vec<(f64, Vec<usize>)>,
    max_exp: usize,
    poly: Polygon,
}

impl Integrand {
    fn eval(&self, ell: &[f64]) -> f64 {
        let c = side_lengths_from_distances(&self.poly, &ell[..self.kappa]);
        let mut pow = [[0.0f64; 2 * QUADRATURE_MAX_N + 1]; QUADRATURE_MAX_SIDES];
        for j in 0..self.kappa {
            let cj = c[j].max(0.0);
            pow[j][0] = 1.0;
            for e in 1..=self.max_exp {
                pow[j][e] = pow[j][e - 1] * cj;
            }
        }
        self.terms
            .iter()
            .map(|(coef, e)| coef * (0..self.kappa).map(|j| pow[j][e[j]]).product::<f64>())
            .sum()
    }
}

/// Solves the `d x d` system in place by Gaussian elimination with partial
/// pivoting; `None` when singular.
fn solve_small(m: &mut [[f64; QUADRATURE_MAX_SIDES + 1]], d: usize) -> Option<[f64; QUADRATURE_MAX_SIDES]> {
    for col in 0..d {
        let piv = (col..d).max_by(|&a, &b| m[a][col].abs().total_cmp(&m[b][col].abs()))?;
        if m[piv][col].abs() < 1e-13 {
            return None;
        }
        m.swap(col, piv);
        for r in 0..d {
            if r != col {
                let f = m[r][col] / m[col][col];
                for c in col..=d {
                    m[r][c] -= f * m[col][c];
                }
            }
        }
    }
    let mut x = [0.0; QUADRATURE_MAX_SIDES];
    for i in 0..d {
        x[i] = m[i][d] / m[i][i];
    }
    Some(x)
}

struct Quadrature<'a> {
    integrand: &'a Integrand,
    constraints: Vec<Constraint>,
    rules: Vec<Vec<(f64, f64)>>,
    tol: f64,
}

impl Quadrature<'_> {
    /// Constraints restricted to variables `level..`, with earlier variables
    /// fixed to `ell[..level]`.
    fn reduced(&self, level: usize, ell: &[f64]) -> Vec<([f64; QUADRATURE_MAX_SIDES], f64)> {
        self.constraints
            .iter()
            .map(|c| {
                let fixed: f64 = (0..level).map(|i| c.a[i] * ell[i]).sum();
                let mut a = [0.0; QUADRATURE_MAX_SIDES];
                a[..self.integrand.kappa - level].copy_from_slice(&c.a[level..self.integrand.kappa]);
                (a, c.b - fixed)
            })
            .collect()
    }

    /// Coordinates along the first free variable of the vertices of the
    /// slice polytope.
    fn breakpoints(&self, rows: &[([f64; QUADRATURE_MAX_SIDES], f64)], d: usize) -> Vec<f64> {
        let m = rows.len();
        let mut out = Vec::new();
        let mut idx: Vec<usize> = (0..d).collect();
        loop {
            let mut mat = [[0.0; QUADRATURE_MAX_SIDES + 1]; QUADRATURE_MAX_SIDES];
            for (r, &i) in idx.iter().enumerate() {
                mat[r][..d].copy_from_slice(&rows[i].0[..d]);
                mat[r][d] = rows[i].1;
            }
            if let Some(x) = solve_small(&mut mat[..d], d) {
                let feasible = rows
                    .iter()
                    .all(|(a, b)| (0..d).map(|i| a[i] * x[i]).sum::<f64>() >= b - self.tol);
                if feasible {
                    out.push(x[0]);
                }
            }
            // Next combination of d rows out of m.
            let mut i = d;
            while i > 0 && idx[i - 1] == m - d + i - 1 {
                i -= 1;
            }
            if i == 0 {
                break;
            }
            idx[i - 1] += 1;
            for j in i..d {
                idx[j] = idx[j - 1] + 1;
            }
        }
        out.sort_by(f64::total_cmp);
        out.dedup_by(|a, b| (*a - *b).abs() <= self.tol);
        out
    }

    fn integrate(&self, level: usize, ell: &mut [f64; QUADRATURE_MAX_SIDES]) -> f64 {
        let k = self.integrand.kappa;
        let d = k - level;
        let rows = self.reduced(level, ell);
        let rule = &self.rules[d - 1];
        let mut pieces: Vec<(f64, f64)> = Vec::new();
        if d == 1 {
            let (mut lo, mut hi) = (f64::NEG_INFINITY, f64::INFINITY);
            for (a, b) in &rows {
                if a[0] > 0.0 {
                    lo = lo.max(b / a[0]);
                } else if a[0] < 0.0 {
                    hi = hi.min(b / a[0]);
                } else if *b > self.tol {
                    return 0.0;
                }
            }
            if hi > lo {
                pieces.push((lo, hi));
            }
        } else {
            let bp = self.breakpoints(&rows, d);
            pieces.extend(bp.windows(2).map(|w| (w[0], w[1])));
        }
        let mut total = 0.0;
        for (lo, hi) in pieces {
            let (mid, half) = ((lo + hi) / 2.0, (hi - lo) / 2.0);
            for &(x, w) in rule {
                ell[level] = mid + half * x;
                let v = if d == 1 {
                    self.integrand.eval(&ell[..k])
                } else {
                    self.integrate(level + 1, ell)
                };
                total += w * half * v;
            }
        }
        total
    }
}

/// Probability that `n` uniform points in `poly` are in convex position with
/// a full-sided PCP, from the joint density summed over size vectors and
/// integrated over the feasible side distances, divided by `Area^n`.
///
/// The integrand is a polynomial on the feasible polytope, and each nested
/// slice integral is piecewise polynomial between the projections of the
/// slice's vertices, so Gauss-Legendre on those pieces is exact up to
/// rounding.
pub fn ptilde_quadrature(poly: &Polygon, n: usize) -> Result<f64> {
    let k = poly.kappa();
    if k > QUADRATURE_MAX_SIDES || n > QUADRATURE_MAX_N {
        return Err(Error::TooLarge(format!(
            "quadrature supports kappa <= {QUADRATURE_MAX_SIDES} and n <= {QUADRATURE_MAX_N}, got kappa = {k}, n = {n}"
        )));
    }
    if n < 2 {
        return Err(Error::InvalidInput(format!("n must be at least 2, got {n}")));
    }
    let mut terms = Vec::new();
    let mut max_exp = 0;
    for s in size_vectors(k, n) {
        let Some(coef) = ln_coefficient(poly, &s, n) else { continue };
        let e: Vec<usize> = (0..k).map(|j| exponent(&s, j) as usize).collect();
        max_exp = max_exp.max(*e.iter().max().unwrap());
        terms.push((coef.exp(), e));
    }
    let degree = 2 * n;
    let integrand = Integrand {
        kappa: k,
        terms,
        max_exp,
        poly: poly.clone(),
    };

    // ell_i >= 0 and c_j(ell) >= 0, with c_j = r_j - coef_j . ell.
    let mut constraints = Vec::with_capacity(2 * k);
    for i in 0..k {
        let mut a = [0.0; QUADRATURE_MAX_SIDES];
        a[i] = 1.0;
        constraints.push(Constraint { a, b: 0.0 });
    }
    let zero = vec![0.0; k];
    let r0 = side_lengths_from_distances(poly, &zero);
    for j in 0..k {
        let mut a = [0.0; QUADRATURE_MAX_SIDES];
        for i in 0..k {
            let mut unit = zero.clone();
            unit[i] = 1.0;
            a[i] = side_lengths_from_distances(poly, &unit)[j] - r0[j];
        }
        constraints.push(Constraint { a, b: -r0[j] });
    }
    let rules = (1..=k)
        .map(|d| gauss_legendre((degree + d) / 2 + 1))
        .collect();
    let quad = Quadrature {
        integrand: &integrand,
        constraints,
        rules,
        tol: 1e-12 * poly.diameter(),
    };
    let mut ell = [0.0; QUADRATURE_MAX_SIDES];
    let integral = quad.integrate(0, &mut ell);
    Ok(integral / poly.area().powi(n as i32))
}

/// `prod m_j e^{-m_j lbar_j} * sqrt(d_K / (2 pi)^{kappa-1}) * exp(-x' S x / 2)`.
pub fn limit_density(model: &AsymptoticModel, ell_bar: &[f64], x: &[f64]) -> f64 {
    if ell_bar.iter().any(|&l| l < 0.0) {
        return 0.0;
    }
    let k = model.m_rates.len();
    let exp_part: f64 = model
        .m_rates
        .iter()
        .zip(ell_bar)
        .map(|(m, l)| m * (-m * l).exp())
        .product();
    let mut quad = 0.0;
    for i in 0..k - 1 {
        for j in 0..k - 1 {
            quad += x[i] * model.sigma_inv[i][j] * x[j];
        }
    }
    let norm = (model.d_k / (2.0 * std::f64::consts::PI).powi(k as i32 - 1)).sqrt();
    exp_part * norm * (-0.5 * quad).exp()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::{parse_polygon, regular_polygon, Point};
    use crate::mc::estimate_full_sided;
    use approx::assert_relative_eq;

    #[test]
    fn size_vector_enumeration_matches_brute_force() {
        for k in 3..=5 {
            for n in 0usize..=7 {
                let mut brute = 0;
                let total = (n + 1).pow(k as u32);
                for code in 0..total {
                    let mut c = code;
                    let s: Vec<usize> = (0..k)
                        .map(|_| {
                            let v = c % (n + 1);
                            c /= n + 1;
                            v
                        })
                        .collect();
                    if s.iter().sum::<usize>() == n && is_size_vector(&s) {
                        brute += 1;
                    }
                }
                let v = size_vectors(k, n);
                assert_eq!(v.len(), brute, "k={k} n={n}");
                assert!(v.iter().all(|s| s.iter().sum::<usize>() == n && is_size_vector(s)));
            }
        }
        assert_eq!(size_vectors(3, 3).len(), 7);
    }

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        for q in 1..=12 {
            let rule = gauss_legendre(q);
            assert_relative_eq!(rule.iter().map(|p| p.1).sum::<f64>(), 2.0, epsilon = 1e-14);
            for deg in 0..2 * q {
                let got: f64 = rule.iter().map(|&(x, w)| w * x.powi(deg as i32)).sum();
                let exact = if deg % 2 == 1 { 0.0 } else { 2.0 / (deg as f64 + 1.0) };
                assert!((got - exact).abs() < 1e-13, "q={q} deg={deg}");
            }
        }
    }

    #[cfg(not(feature = "shifted-exponent"))]
    #[test]
    fn density_examples() {
        let sq = regular_polygon(4, 1.0);
        let v = density_unnormalized(&sq, &[0.0; 4], &[1, 1, 1, 0], 3).unwrap();
        assert_relative_eq!(v, 6.0, max_relative = 1e-14);
        assert_eq!(density_unnormalized(&sq, &[0.6, 0.0, 0.6, 0.0], &[1, 1, 1, 0], 3).unwrap(), 0.0);
        assert!(matches!(
            density_unnormalized(&sq, &[0.0; 4], &[1, 0, 0, 2], 3),
            Err(Error::InvalidSizeVector(_))
        ));
        assert!(density_unnormalized(&sq, &[0.0; 4], &[1, 1, 1, 1], 3).is_err());
    }

    #[test]
    fn quadrature_reproduces_exact_values() {
        // In the square and the triangle every convex sample is full-sided,
        // so the quadrature must return the exact probability.
        let sq = regular_polygon(4, 1.0);
        for (n, exact) in [(3usize, 1.0), (4, 25.0 / 36.0), (5, 49.0 / 144.0)] {
            let v = ptilde_quadrature(&sq, n).unwrap();
            assert_relative_eq!(v, exact, max_relative = 1e-9);
        }
        let tri = regular_polygon(3, 2.5);
        assert_relative_eq!(ptilde_quadrature(&tri, 4).unwrap(), 2.0 / 3.0, max_relative = 1e-9);
        assert_relative_eq!(ptilde_quadrature(&tri, 5).unwrap(), 11.0 / 36.0, max_relative = 1e-9);
    }

    #[test]
    fn quadrature_matches_mc_on_quadrilateral() {
        let q = parse_polygon(&[
            Point::new(0.0, 0.0),
            Point::new(3.0, 0.0),
            Point::new(2.0, 2.0),
            Point::new(0.0, 1.0),
        ])
        .unwrap();
        for n in [4, 5] {
            let quad = ptilde_quadrature(&q, n).unwrap();
            let mc = estimate_full_sided(&q, n, 200_000, 70 + n as u64, 1).unwrap();
            assert!(mc.full_sided.within_sigma(quad, 4.0), "{n}: {quad} vs {:?}", mc.full_sided);
            assert!(mc.conditional_fraction < 1.0);
            assert!(quad <= mc.convex.ci_high);
        }
    }

    #[test]
    fn quadrature_guards() {
        let sq = regular_polygon(4, 1.0);
        assert!(matches!(ptilde_quadrature(&sq, 9), Err(Error::TooLarge(_))));
        assert!(matches!(ptilde_quadrature(&regular_polygon(5, 1.0), 4), Err(Error::TooLarge(_))));
    }

    #[test]
    fn limit_density_at_origin() {
        let model = AsymptoticModel::for_polygon(&regular_polygon(4, 1.0)).unwrap();
        let v = limit_density(&model, &[0.0; 4], &[0.0; 3]);
        assert_relative_eq!(v, (1024.0 / (2.0 * std::f64::consts::PI).powi(3)).sqrt(), max_relative = 1e-12);
        assert!((v - 2.031).abs() < 1e-2);
        assert_eq!(limit_density(&model, &[-0.1, 0.0, 0.0, 0.0], &[0.0; 3]), 0.0);
    }
}
