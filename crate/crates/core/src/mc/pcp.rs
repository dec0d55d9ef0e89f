//! The parallel containing polygon (PCP) of a point set: the smallest polygon
//! with sides parallel to those of `K` that contains the points.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geom::{convex_hull, is_convex_position, Point, Polygon};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PcpData {
    /// Distance from the points to each side line of `K`.
    pub ell: Vec<f64>,
    /// Side lengths read off the clipped polygon.
    pub c: Vec<f64>,
    /// Side lengths from the closed-form relation with `ell`.
    pub c_formula: Vec<f64>,
    /// Index of the contact point on each PCP side.
    pub contact_idx: Vec<usize>,
    /// Vertices `b_j`, intersections of consecutive offset lines.
    pub b: Vec<Point>,
    /// Hull steps between consecutive contact points; `None` when the points
    /// are not in convex position.
    pub s: Option<Vec<usize>>,
}

/// `c_j = r_j - (l_{j-1}/sin th_{j-1} + l_{j+1}/sin th_j + l_j (cot th_{j-1} + cot th_j))`.
pub fn side_lengths_from_distances(poly: &Polygon, ell: &[f64]) -> Vec<f64> {
    let (r, th) = (poly.sides(), poly.angles());
    let k = r.len();
    (0..k)
        .map(|j| {
            let (jp, jn) = ((j + k - 1) % k, (j + 1) % k);
            let cot = |t: f64| t.cos() / t.sin();
            r[j] - (ell[jp] / th[jp].sin()
                + ell[jn] / th[j].sin()
                + ell[j] * (cot(th[jp]) + cot(th[j])))
        })
        .collect()
}

/// Side distances and formula side lengths, without contact points.
pub(crate) fn side_data(poly: &Polygon, points: &[Point]) -> (Vec<f64>, Vec<f64>) {
    let ell: Vec<f64> = poly
        .lines()
        .iter()
        .map(|line| {
            points
                .iter()
                .map(|&p| line.distance(p))
                .fold(f64::INFINITY, f64::min)
        })
        .collect();
    let c = side_lengths_from_distances(poly, &ell);
    (ell, c)
}

/// Clips `poly` by the inward offsets of its side lines and returns the
/// clipped vertex cycle.
fn clip_offsets(poly: &Polygon, ell: &[f64], tol: f64) -> Vec<Point> {
    let mut pts = poly.vertices().to_vec();
    for (line, &d) in poly.lines().iter().zip(ell) {
        let hp = line.half_plane().shifted(d);
        let mut out = Vec::with_capacity(pts.len() + 1);
        for i in 0..pts.len() {
            let (p, q) = (pts[i], pts[(i + 1) % pts.len()]);
            let (dp, dq) = (hp.signed_distance(p), hp.signed_distance(q));
            if dp >= -tol {
                out.push(p);
            }
            if (dp > tol && dq < -tol) || (dp < -tol && dq > tol) {
                out.push(p.lerp(q, dp / (dp - dq)));
            }
        }
        out.dedup_by(|a, b| a.dist(*b) <= tol);
        while out.len() > 1 && out[0].dist(out[out.len() - 1]) <= tol {
            out.pop();
        }
        pts = out;
        if pts.is_empty() {
            break;
        }
    }
    pts
}

pub fn compute_pcp(poly: &Polygon, points: &[Point]) -> Result<PcpData> {
    if points.is_empty() {
        return Err(Error::EmptyInput);
    }
    let diam = poly.diameter();
    let tol = 1e-12 * diam;
    if let Some(index) = points.iter().position(|&p| !poly.contains(p, tol)) {
        return Err(Error::PointOutsidePolygon { index });
    }
    let k = poly.kappa();
    let (ell, c_formula) = side_data(poly, points);

    // Lengths of the clipped boundary lying on each offset line, counting
    // only edges running in the side's own direction.
    let clipped = clip_offsets(poly, &ell, tol);
    let on_line_tol = 1e-9 * diam;
    let mut c = vec![0.0; k];
    let m = clipped.len();
    if m >= 2 {
        for i in 0..m {
            let (p, q) = (clipped[i], clipped[(i + 1) % m]);
            for j in 0..k {
                let line = &poly.lines()[j];
                if (line.distance(p) - ell[j]).abs() <= on_line_tol
                    && (line.distance(q) - ell[j]).abs() <= on_line_tol
                    && (q - p).dot(line.dir) > 0.0
                {
                    c[j] += p.dist(q);
                }
            }
        }
    }

    let b = (0..k)
        .map(|j| {
            let a = poly.lines()[j].half_plane().shifted(ell[j]);
            let n = poly.lines()[(j + 1) % k].half_plane().shifted(ell[(j + 1) % k]);
            crate::geom::line_intersection(&a, &n).expect("consecutive sides are not parallel")
        })
        .collect();

    // Lexicographically smallest point among the minimizers of each distance.
    let contact_idx: Vec<usize> = (0..k)
        .map(|j| {
            let line = &poly.lines()[j];
            (0..points.len())
                .filter(|&i| line.distance(points[i]) - ell[j] <= tol)
                .min_by(|&a, &b| {
                    let (p, q) = (points[a], points[b]);
                    p.x.total_cmp(&q.x).then(p.y.total_cmp(&q.y))
                })
                .expect("the minimizer itself qualifies")
        })
        .collect();

    let s = is_convex_position(points).then(|| {
        let n = points.len();
        let order = convex_hull(points);
        let mut pos = vec![0usize; n];
        for (rank, &i) in order.iter().enumerate() {
            pos[i] = rank;
        }
        (0..k)
            .map(|j| (pos[contact_idx[(j + 1) % k]] + n - pos[contact_idx[j]]) % n)
            .collect()
    });

    Ok(PcpData {
        ell,
        c,
        c_formula,
        contact_idx,
        b,
        s,
    })
}
