//! Hausdorff distance between the convex hull of a sample and the limit shape.
//!
//! Both sets are convex, so the distance is the largest gap between their
//! support functions over unit directions. The hull's support function is a
//! maximum over its points and the limit shape's is exact per arc.

use std::f64::consts::TAU;

use crate::domfinder::find_dom;
use crate::error::{Error, Result};
use crate::geom::{Point, Polygon};
use crate::limitshape::LimitShape;

/// Coarse directions scanned before local refinement.
pub const COARSE_DIRECTIONS: usize = 1024;

fn gap(shape: &LimitShape, points: &[Point], angle: f64) -> f64 {
    let u = Point::new(angle.cos(), angle.sin());
    let hull = points
        .iter()
        .map(|p| u.dot(*p))
        .fold(f64::NEG_INFINITY, f64::max);
    (hull - shape.support(u)).abs()
}

/// Golden-section maximization of `f` on `[a, b]`.
fn golden_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - phi * (b - a);
    let mut d = a + phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..60 {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + phi * (b - a);
            fd = f(d);
        }
    }
    fc.max(fd)
}

/// Hausdorff distance between the convex hull of `points` and the region
/// bounded by `shape`.
pub fn hausdorff_to_shape(shape: &LimitShape, points: &[Point]) -> Result<f64> {
    if points.is_empty() {
        return Err(Error::EmptyInput);
    }
    let step = TAU / COARSE_DIRECTIONS as f64;
    let coarse: Vec<f64> = (0..COARSE_DIRECTIONS)
        .map(|i| gap(shape, points, i as f64 * step))
        .collect();
    let mut best = coarse.iter().cloned().fold(0.0, f64::max);
    // Refine around every coarse local maximum within reach of the best.
    for i in 0..COARSE_DIRECTIONS {
        let prev = coarse[(i + COARSE_DIRECTIONS - 1) % COARSE_DIRECTIONS];
        let next = coarse[(i + 1) % COARSE_DIRECTIONS];
        if coarse[i] >= prev && coarse[i] >= next && coarse[i] > 0.5 * best {
            let centre = i as f64 * step;
            let v = golden_max(|a| gap(shape, points, a), centre - step, centre + step);
            best = best.max(v);
        }
    }
    Ok(best)
}

/// Hausdorff distance from the hull of `points` to the limit shape of `poly`.
pub fn hausdorff_to_limit_shape(poly: &Polygon, points: &[Point]) -> Result<f64> {
    if points.len() < 3 {
        return Err(Error::InvalidInput(format!(
            "need at least 3 points, got {}",
            points.len()
        )));
    }
    let report = find_dom(poly)?;
    hausdorff_to_shape(&report.limit_shape, points)
}
