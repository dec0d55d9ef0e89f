//! Planar geometry: validated convex polygons, affine maps, hulls and
//! uniform sampling.
//!
//! Side `j` of a polygon runs from `v_j` to `v_{j+1}` (cyclic) and has length
//! `r_j`; `theta_j` is the internal angle at `v_{j+1}`, between side `j` and
//! side `j+1`. Vertices are always stored counterclockwise.

use std::f64::consts::PI;
use std::ops::{Add, Mul, Neg, Sub};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative threshold on cross products (scaled by the squared diameter)
/// below which three vertices count as collinear.
pub const COLLINEAR_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const ORIGIN: Point = Point { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn dot(self, other: Point) -> f64 {
        self.x * other.x + self.y * other.y
    }

    pub fn cross(self, other: Point) -> f64 {
        self.x * other.y - self.y * other.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn dist(self, other: Point) -> f64 {
        (self - other).norm()
    }

    /// Counterclockwise quarter turn.
    pub fn perp(self) -> Point {
        Point::new(-self.y, self.x)
    }

    pub fn lerp(self, other: Point, t: f64) -> Point {
        self + (other - self) * t
    }

    fn lex_cmp(&self, other: &Point) -> std::cmp::Ordering {
        self.x
            .total_cmp(&other.x)
            .then_with(|| self.y.total_cmp(&other.y))
    }
}

impl Add for Point {
    type Output = Point;
    fn add(self, o: Point) -> Point {
        Point::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Point {
    type Output = Point;
    fn sub(self, o: Point) -> Point {
        Point::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Point {
    type Output = Point;
    fn mul(self, s: f64) -> Point {
        Point::new(self.x * s, self.y * s)
    }
}

impl Neg for Point {
    type Output = Point;
    fn neg(self) -> Point {
        Point::new(-self.x, -self.y)
    }
}

impl From<[f64; 2]> for Point {
    fn from(p: [f64; 2]) -> Self {
        Point::new(p[0], p[1])
    }
}

impl From<Point> for [f64; 2] {
    fn from(p: Point) -> Self {
        [p.x, p.y]
    }
}

/// Orientation of the triple `(a, b, c)`: positive for a left turn.
pub fn orient(a: Point, b: Point, c: Point) -> f64 {
    (b - a).cross(c - a)
}

/// Closed half-plane `{x : normal·x >= offset}`.
///
/// With a unit normal, [`HalfPlane::signed_distance`] is a Euclidean distance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HalfPlane {
    pub normal: Point,
    pub offset: f64,
}

impl HalfPlane {
    /// Normalizes `normal` (and the offset with it).
    pub fn new(normal: Point, offset: f64) -> Self {
        let n = normal.norm();
        HalfPlane {
            normal: normal * (1.0 / n),
            offset: offset / n,
        }
    }

    pub fn signed_distance(&self, p: Point) -> f64 {
        self.normal.dot(p) - self.offset
    }

    /// Same boundary direction, pushed inward by `dist`.
    pub fn shifted(&self, dist: f64) -> HalfPlane {
        HalfPlane {
            normal: self.normal,
            offset: self.offset + dist,
        }
    }
}

/// Supporting line of one side, oriented so that the polygon is on the
/// nonnegative side.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SideLine {
    pub base: Point,
    /// Unit direction from `v_j` to `v_{j+1}`.
    pub dir: Point,
    /// Inward unit normal.
    pub normal: Point,
    pub offset: f64,
}

impl SideLine {
    fn through(a: Point, b: Point) -> Self {
        let dir = (b - a) * (1.0 / a.dist(b));
        let normal = dir.perp();
        SideLine {
            base: a,
            dir,
            normal,
            offset: normal.dot(a),
        }
    }

    pub fn half_plane(&self) -> HalfPlane {
        HalfPlane {
            normal: self.normal,
            offset: self.offset,
        }
    }

    /// Inward signed distance.
    pub fn distance(&self, p: Point) -> f64 {
        self.normal.dot(p) - self.offset
    }
}

/// Intersection point of the boundaries of two half-planes, `None` when they
/// are parallel.
pub fn line_intersection(a: &HalfPlane, b: &HalfPlane) -> Option<Point> {
    let det = a.normal.cross(b.normal);
    if det.abs() < 1e-15 {
        return None;
    }
    let x = (a.offset * b.normal.y - b.offset * a.normal.y) / det;
    let y = (a.normal.x * b.offset - b.normal.x * a.offset) / det;
    Some(Point::new(x, y))
}

/// A validated, strictly convex polygon with counterclockwise vertices and
/// cached side data.
#[derive(Debug, Clone, PartialEq)]
pub struct Polygon {
    vertices: Vec<Point>,
    sides: Vec<f64>,
    angles: Vec<f64>,
    area: f64,
    lines: Vec<SideLine>,
    diameter: f64,
}

impl Polygon {
    pub fn kappa(&self) -> usize {
        self.vertices.len()
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn vertex(&self, j: usize) -> Point {
        self.vertices[j % self.vertices.len()]
    }

    /// Side lengths `r_j = |v_{j+1} - v_j|`.
    pub fn sides(&self) -> &[f64] {
        &self.sides
    }

    /// Internal angles, `theta_j` at `v_{j+1}`.
    pub fn angles(&self) -> &[f64] {
        &self.angles
    }

    pub fn area(&self) -> f64 {
        self.area
    }

    pub fn lines(&self) -> &[SideLine] {
        &self.lines
    }

    pub fn diameter(&self) -> f64 {
        self.diameter
    }

    /// Containment with an absolute slack `tol` on every side.
    pub fn contains(&self, p: Point, tol: f64) -> bool {
        self.lines.iter().all(|l| l.distance(p) >= -tol)
    }

    /// Largest inward distance of a vertex from the `j`-th side line.
    pub fn width(&self, j: usize) -> f64 {
        let line = &self.lines[j];
        self.vertices
            .iter()
            .map(|&v| line.distance(v))
            .fold(0.0, f64::max)
    }

    pub fn centroid(&self) -> Point {
        let mut c = Point::ORIGIN;
        let mut a = 0.0;
        let o = self.vertices[0];
        for i in 1..self.kappa() - 1 {
            let (p, q) = (self.vertices[i], self.vertices[i + 1]);
            let t = orient(o, p, q) / 2.0;
            c = c + (o + p + q) * (t / 3.0);
            a += t;
        }
        c * (1.0 / a)
    }

    /// Short stable identifier: SHA-256 of the vertex bit patterns.
    pub fn hash_hex(&self) -> String {
        use sha2::{Digest, Sha256};
        let mut h = Sha256::new();
        for v in &self.vertices {
            h.update(v.x.to_bits().to_le_bytes());
            h.update(v.y.to_bits().to_le_bytes());
        }
        h.finalize()
            .iter()
            .take(8)
            .map(|b| format!("{b:02x}"))
            .collect()
    }

    pub fn from_json_str(s: &str) -> Result<Polygon> {
        let file: PolygonFile =
            serde_json::from_str(s).map_err(|e| Error::InvalidInput(e.to_string()))?;
        let pts: Vec<Point> = file.vertices.into_iter().map(Point::from).collect();
        parse_polygon(&pts)
    }

    pub fn to_json_string(&self) -> String {
        let file = PolygonFile {
            vertices: self.vertices.iter().map(|&p| p.into()).collect(),
        };
        serde_json::to_string(&file).expect("plain data serializes")
    }
}

/// On-disk polygon format: `{"vertices": [[x, y], ...]}`.
///
/// `serde_json` writes the shortest decimal that round-trips to the same
/// double, so a write/read cycle is bit-exact.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct PolygonFile {
    pub vertices: Vec<[f64; 2]>,
}

/// Validates a raw vertex list and builds a [`Polygon`]. Clockwise input is
/// reversed.
pub fn parse_polygon(raw: &[Point]) -> Result<Polygon> {
    let k = raw.len();
    if k < 3 {
        return Err(Error::TooFewVertices(k));
    }
    if raw.iter().any(|p| !p.x.is_finite() || !p.y.is_finite()) {
        return Err(Error::InvalidInput("non-finite coordinate".into()));
    }
    let mut diameter = 0.0f64;
    for i in 0..k {
        for j in i + 1..k {
            diameter = diameter.max(raw[i].dist(raw[j]));
        }
    }
    for i in 0..k {
        let j = (i + 1) % k;
        if raw[i].dist(raw[j]) <= 1e-12 * diameter {
            return Err(Error::DuplicateVertex(i, j));
        }
    }

    let signed_area: f64 = (0..k)
        .map(|i| raw[i].cross(raw[(i + 1) % k]))
        .sum::<f64>()
        / 2.0;
    let mut vertices = raw.to_vec();
    if signed_area < 0.0 {
        vertices.reverse();
    }

    let scale = COLLINEAR_TOL * diameter * diameter;
    let mut angles = Vec::with_capacity(k);
    for j in 0..k {
        let a = vertices[j];
        let b = vertices[(j + 1) % k];
        let c = vertices[(j + 2) % k];
        let cr = orient(a, b, c);
        // Report indices in the caller's order.
        let idx = if signed_area < 0.0 {
            k - 1 - (j + 1) % k
        } else {
            (j + 1) % k
        };
        if cr.abs() <= scale {
            return Err(Error::CollinearVertices(idx));
        }
        if cr < 0.0 {
            return Err(Error::NonConvex(format!("reflex turn at vertex {idx}")));
        }
        let (e1, e2) = (b - a, c - b);
        let turn = e1.cross(e2).atan2(e1.dot(e2));
        angles.push(PI - turn);
    }
    let total: f64 = angles.iter().sum();
    if (total - (k as f64 - 2.0) * PI).abs() > 1e-9 {
        return Err(Error::NonConvex("boundary winds more than once".into()));
    }

    let sides = (0..k)
        .map(|j| vertices[j].dist(vertices[(j + 1) % k]))
        .collect();
    let lines = (0..k)
        .map(|j| SideLine::through(vertices[j], vertices[(j + 1) % k]))
        .collect();
    Ok(Polygon {
        vertices,
        sides,
        angles,
        area: signed_area.abs(),
        lines,
        diameter,
    })
}

/// Rigidly moves the polygon so that `v_1 = (0,0)` and `v_2` lies on the
/// positive x-axis.
pub fn canonicalize(poly: &Polygon) -> Polygon {
    let v0 = poly.vertices[0];
    let v1 = poly.vertices[1];
    if v0 == Point::ORIGIN && v1.y == 0.0 && v1.x > 0.0 {
        return poly.clone();
    }
    let d = poly.lines[0].dir;
    let (c, s) = (d.x, -d.y);
    let mut out: Vec<Point> = poly
        .vertices
        .iter()
        .map(|&p| {
            let q = p - v0;
            Point::new(c * q.x - s * q.y, s * q.x + c * q.y)
        })
        .collect();
    out[0] = Point::ORIGIN;
    out[1] = Point::new(poly.sides[0], 0.0);
    parse_polygon(&out).expect("rigid motion preserves validity")
}

/// Invertible affine map `x -> A x + t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AffineMap {
    pub linear: [[f64; 2]; 2],
    pub translation: Point,
}

impl AffineMap {
    pub fn new(linear: [[f64; 2]; 2], translation: Point) -> Result<Self> {
        let m = AffineMap {
            linear,
            translation,
        };
        let det = m.det();
        if det == 0.0 || !det.is_finite() {
            return Err(Error::SingularMap(det));
        }
        Ok(m)
    }

    pub fn scaling(s: f64) -> Result<Self> {
        Self::new([[s, 0.0], [0.0, s]], Point::ORIGIN)
    }

    pub fn det(&self) -> f64 {
        let a = &self.linear;
        a[0][0] * a[1][1] - a[0][1] * a[1][0]
    }

    pub fn apply(&self, p: Point) -> Point {
        let a = &self.linear;
        Point::new(
            a[0][0] * p.x + a[0][1] * p.y + self.translation.x,
            a[1][0] * p.x + a[1][1] * p.y + self.translation.y,
        )
    }
}

/// Image of a polygon; orientation is restored to counterclockwise when the
/// map reverses it.
pub fn apply_affine(poly: &Polygon, map: &AffineMap) -> Result<Polygon> {
    let det = map.det();
    if det == 0.0 || !det.is_finite() {
        return Err(Error::SingularMap(det));
    }
    let pts: Vec<Point> = poly.vertices.iter().map(|&p| map.apply(p)).collect();
    parse_polygon(&pts)
}

/// Counterclockwise hull vertex indices (Andrew's monotone chain), starting
/// from the lexicographically smallest point. Collinear boundary points and
/// duplicates are dropped.
pub fn convex_hull(points: &[Point]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..points.len()).collect();
    idx.sort_by(|&a, &b| points[a].lex_cmp(&points[b]));
    idx.dedup_by(|a, b| points[*a] == points[*b]);
    if idx.len() < 3 {
        return idx;
    }
    let mut hull: Vec<usize> = Vec::with_capacity(idx.len() + 1);
    for pass in 0..2 {
        let start = hull.len();
        let iter: Box<dyn Iterator<Item = &usize>> = if pass == 0 {
            Box::new(idx.iter())
        } else {
            Box::new(idx.iter().rev())
        };
        for &i in iter {
            while hull.len() >= start + 2 {
                let a = points[hull[hull.len() - 2]];
                let b = points[hull[hull.len() - 1]];
                if orient(a, b, points[i]) <= 0.0 {
                    hull.pop();
                } else {
                    break;
                }
            }
            hull.push(i);
        }
        hull.pop();
    }
    if hull.len() < 3 {
        // All points collinear: keep the two extremes.
        return vec![idx[0], *idx.last().unwrap()];
    }
    hull
}

/// True iff every point is a vertex of the convex hull of the set.
pub fn is_convex_position(points: &[Point]) -> bool {
    match points.len() {
        0 | 1 => true,
        2 => points[0] != points[1],
        n => convex_hull(points).len() == n,
    }
}

/// Fan triangulation of a polygon from `v_1` with cumulative area weights.
#[derive(Debug, Clone)]
pub struct UniformSampler {
    triangles: Vec<[Point; 3]>,
    cumulative: Vec<f64>,
}

impl UniformSampler {
    pub fn new(poly: &Polygon) -> Self {
        let o = poly.vertices[0];
        let mut triangles = Vec::with_capacity(poly.kappa() - 2);
        let mut cumulative = Vec::with_capacity(poly.kappa() - 2);
        let mut acc = 0.0;
        for i in 1..poly.kappa() - 1 {
            let (p, q) = (poly.vertices[i], poly.vertices[i + 1]);
            acc += orient(o, p, q) / 2.0;
            triangles.push([o, p, q]);
            cumulative.push(acc);
        }
        for c in &mut cumulative {
            *c /= acc;
        }
        UniformSampler {
            triangles,
            cumulative,
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Point {
        let t = if self.triangles.len() == 1 {
            0
        } else {
            let x: f64 = rng.random();
            self.cumulative
                .iter()
                .position(|&c| x < c)
                .unwrap_or(self.triangles.len() - 1)
        };
        let [a, b, c] = self.triangles[t];
        let (mut u, mut v): (f64, f64) = (rng.random(), rng.random());
        if u + v > 1.0 {
            u = 1.0 - u;
            v = 1.0 - v;
        }
        a + (b - a) * u + (c - a) * v
    }

    pub fn fill<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [Point]) {
        for p in out {
            *p = self.sample(rng);
        }
    }
}

/// `count` i.i.d. uniform points in `poly`, deterministic in `seed`.
pub fn sample_uniform(poly: &Polygon, count: usize, seed: u64) -> Vec<Point> {
    let sampler = UniformSampler::new(poly);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| sampler.sample(&mut rng)).collect()
}

/// Random strictly convex polygon with `kappa` vertices: sorted angles on an
/// ellipse, then a random rotation and translation. Angular gaps are kept
/// above a fifth of the uniform spacing so no side degenerates.
pub fn random_convex_polygon<R: Rng + ?Sized>(kappa: usize, rng: &mut R) -> Polygon {
    assert!(kappa >= 3);
    let min_gap = 2.0 * PI / kappa as f64 / 5.0;
    loop {
        let mut t: Vec<f64> = (0..kappa).map(|_| rng.random::<f64>() * 2.0 * PI).collect();
        t.sort_by(f64::total_cmp);
        let ok = (0..kappa).all(|i| {
            let next = if i + 1 == kappa { t[0] + 2.0 * PI } else { t[i + 1] };
            next - t[i] > min_gap
        });
        if !ok {
            continue;
        }
        let a = 0.5 + rng.random::<f64>() * 1.5;
        let b = 0.5 + rng.random::<f64>() * 1.5;
        let phi = rng.random::<f64>() * 2.0 * PI;
        let shift = Point::new(rng.random::<f64>() * 4.0 - 2.0, rng.random::<f64>() * 4.0 - 2.0);
        let pts: Vec<Point> = t
            .iter()
            .map(|&s| {
                let (x, y) = (a * s.cos(), b * s.sin());
                Point::new(x * phi.cos() - y * phi.sin(), x * phi.sin() + y * phi.cos()) + shift
            })
            .collect();
        if let Ok(p) = parse_polygon(&pts) {
            return p;
        }
    }
}

/// Regular `kappa`-gon of the given area, first side on the x-axis.
pub fn regular_polygon(kappa: usize, area: f64) -> Polygon {
    let k = kappa as f64;
    let side = (4.0 * area * (PI / k).tan() / k).sqrt();
    let mut pts = Vec::with_capacity(kappa);
    let mut p = Point::ORIGIN;
    for j in 0..kappa {
        pts.push(p);
        let a = 2.0 * PI * j as f64 / k;
        p = p + Point::new(a.cos(), a.sin()) * side;
    }
    parse_polygon(&pts).expect("regular polygon is convex")
}
