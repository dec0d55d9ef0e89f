//! Boundary of the limit shape as a closed chain of parabola arcs.

use crate::geom::{HalfPlane, Point, Polygon};
use crate::pssolver::{tangency_points, PsSolution};

/// Quadratic Bezier `(1-t)^2 start + 2t(1-t) control + t^2 end`, tangent to
/// `control - start` at `t = 0` and to `end - control` at `t = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParabolaArc {
    pub start: Point,
    pub control: Point,
    pub end: Point,
}

impl ParabolaArc {
    pub fn point(&self, t: f64) -> Point {
        let s = 1.0 - t;
        self.start * (s * s) + self.control * (2.0 * s * t) + self.end * (t * t)
    }

    /// Derivative with respect to `t`.
    pub fn tangent(&self, t: f64) -> Point {
        (self.control - self.start) * (2.0 * (1.0 - t)) + (self.end - self.control) * (2.0 * t)
    }

    /// Area of the triangle `(start, control, end)`.
    pub fn triangle_area(&self) -> f64 {
        (self.control - self.start).cross(self.end - self.start).abs() / 2.0
    }

    /// Minimum over `t in [0, 1]` of `a (1-t)^2 + 2 b t (1-t) + c t^2`,
    /// returning `(min, argmin)`.
    fn min_quadratic(a: f64, b: f64, c: f64) -> (f64, f64) {
        let eval = |t: f64| {
            let s = 1.0 - t;
            a * s * s + 2.0 * b * s * t + c * t * t
        };
        let mut best = if a <= c { (a, 0.0) } else { (c, 1.0) };
        let curv = a - 2.0 * b + c;
        if curv > 0.0 {
            let t = (a - b) / curv;
            if t > 0.0 && t < 1.0 {
                let v = eval(t);
                if v < best.0 {
                    best = (v, t);
                }
            }
        }
        best
    }

    /// Exact minimum of `normal . B(t) - offset` over the arc.
    pub fn min_signed_distance(&self, hp: &HalfPlane) -> (f64, f64) {
        Self::min_quadratic(
            hp.signed_distance(self.start),
            hp.signed_distance(self.control),
            hp.signed_distance(self.end),
        )
    }

    /// Support value `max_t direction . B(t)`.
    pub fn support(&self, direction: Point) -> f64 {
        let (m, _) = Self::min_quadratic(
            -direction.dot(self.start),
            -direction.dot(self.control),
            -direction.dot(self.end),
        );
        -m
    }
}

/// Closed convex curve made of one arc per side of the polygon it was built on.
#[derive(Debug, Clone, PartialEq)]
pub struct LimitShape {
    pub arcs: Vec<ParabolaArc>,
    pub tangency_points: Vec<Point>,
    pub ap: f64,
}

/// Result of testing an arc against a half-plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Clearance {
    pub contained: bool,
    pub min_clearance: f64,
}

pub fn build_limit_shape(poly: &Polygon, sol: &PsSolution) -> LimitShape {
    let pts = tangency_points(poly, sol);
    let k = pts.len();
    let arcs = (0..k)
        .map(|j| ParabolaArc {
            start: pts[j],
            control: poly.vertex(j + 1),
            end: pts[(j + 1) % k],
        })
        .collect();
    LimitShape {
        arcs,
        tangency_points: pts,
        ap: sol.ap_star,
    }
}

/// Minimum signed clearance of the arc from the half-plane boundary. The
/// clearance is measured in units of the half-plane's normal.
pub fn arc_in_halfplane(arc: &ParabolaArc, hp: &HalfPlane, tolerance: f64) -> Clearance {
    let (m, _) = arc.min_signed_distance(hp);
    Clearance {
        contained: m >= -tolerance,
        min_clearance: m,
    }
}

/// Default containment tolerance for a polygon.
pub fn default_tolerance(poly: &Polygon) -> f64 {
    1e-9 * poly.diameter()
}

pub fn shape_in_polygon(shape: &LimitShape, poly: &Polygon, tolerance: f64) -> bool {
    poly.lines().iter().all(|line| {
        let hp = line.half_plane();
        shape
            .arcs
            .iter()
            .all(|arc| arc_in_halfplane(arc, &hp, tolerance).contained)
    })
}

impl LimitShape {
    pub fn kappa(&self) -> usize {
        self.arcs.len()
    }

    /// Support function `h(u) = max over the curve of u . x`.
    pub fn support(&self, direction: Point) -> f64 {
        self.arcs
            .iter()
            .map(|a| a.support(direction))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// `2 sum (T_j)^{1/3}` over the corner triangles.
    pub fn ap_from_triangles(&self) -> f64 {
        self.arcs
            .iter()
            .map(|a| 2.0 * a.triangle_area().cbrt())
            .sum()
    }

    /// `per_arc` points on each arc, `t` from 0 inclusive to 1 exclusive.
    pub fn sample(&self, per_arc: usize) -> Vec<Point> {
        let mut out = Vec::with_capacity(per_arc * self.arcs.len());
        for arc in &self.arcs {
            for i in 0..per_arc {
                out.push(arc.point(i as f64 / per_arc as f64));
            }
        }
        out
    }
}
