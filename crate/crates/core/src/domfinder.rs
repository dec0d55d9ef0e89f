//! Finds the limit shape of an arbitrary convex polygon by searching over the
//! polygons cut out by subsets of its side lines.
//!
//! For each subset `I` whose lines bound a polygon `K_I`, the curve built from
//! the parametrizing system of `K_I` is a candidate. Candidates that do not fit
//! inside `K` are rejected; the one with the largest affine perimeter wins.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geom::{line_intersection, parse_polygon, Point, Polygon};
use crate::limitshape::{build_limit_shape, default_tolerance, shape_in_polygon, LimitShape};
use crate::pssolver::PsSolution;

/// Largest number of sides for which subsets are enumerated.
pub const MAX_ENUMERATED_SIDES: usize = 24;

const PARALLEL_TOL: f64 = 1e-12;
const TIE_TOL: f64 = 1e-10;

/// Sorted side indices (0-based) of at least three sides.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SideSubset(Vec<usize>);

impl SideSubset {
    pub fn new(mut indices: Vec<usize>, kappa: usize) -> Result<Self> {
        indices.sort_unstable();
        indices.dedup();
        if indices.len() < 3 || indices.iter().any(|&i| i >= kappa) {
            return Err(Error::InvalidInput(format!(
                "side subset {indices:?} needs at least 3 indices below {kappa}"
            )));
        }
        Ok(SideSubset(indices))
    }

    fn from_mask(mask: u32, kappa: usize) -> Self {
        SideSubset((0..kappa).filter(|&i| mask >> i & 1 == 1).collect())
    }

    pub fn indices(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

fn mask_is_valid(poly: &Polygon, mask: u32) -> bool {
    if mask.count_ones() < 3 {
        return false;
    }
    let k = poly.kappa();
    let chosen: Vec<usize> = (0..k).filter(|&i| mask >> i & 1 == 1).collect();
    let lines = poly.lines();
    (0..chosen.len()).all(|a| {
        let b = (a + 1) % chosen.len();
        lines[chosen[a]].normal.cross(lines[chosen[b]].normal) > PARALLEL_TOL
    })
}

fn check_cap(poly: &Polygon) -> Result<()> {
    if poly.kappa() > MAX_ENUMERATED_SIDES {
        return Err(Error::TooManySides(poly.kappa(), MAX_ENUMERATED_SIDES));
    }
    Ok(())
}

/// Subsets whose side lines bound a polygon with one edge per chosen line.
///
/// Each chosen line carries a side of `K`, and `K` lies in the intersection,
/// so every chosen line supports an edge. The intersection is bounded exactly
/// when consecutive inward normals turn by strictly less than a half turn.
pub fn enumerate_valid(poly: &Polygon) -> Result<Vec<SideSubset>> {
    check_cap(poly)?;
    let k = poly.kappa();
    Ok((0..1u32 << k)
        .filter(|&m| mask_is_valid(poly, m))
        .map(|m| SideSubset::from_mask(m, k))
        .collect())
}

/// The polygon `K_I`; its side `t` lies on the line of side `I[t]` of `K`.
pub fn build_candidate(poly: &Polygon, subset: &SideSubset) -> Result<Polygon> {
    let idx = subset.indices();
    let n = idx.len();
    let lines = poly.lines();
    let mut verts = Vec::with_capacity(n);
    for t in 0..n {
        let prev = lines[idx[(t + n - 1) % n]].half_plane();
        let cur = lines[idx[t]].half_plane();
        let v = line_intersection(&prev, &cur)
            .ok_or_else(|| Error::UnboundedCandidate(idx.to_vec()))?;
        verts.push(v);
    }
    let cand = parse_polygon(&verts).map_err(|_| Error::UnboundedCandidate(idx.to_vec()))?;
    // parse_polygon only reverses clockwise input; a bounded candidate is
    // already counterclockwise, so the first vertex stays first.
    if cand.vertex(0) != verts[0] {
        return Err(Error::UnboundedCandidate(idx.to_vec()));
    }
    Ok(cand)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DomReport {
    pub i_star: SideSubset,
    /// The polygon cut out by the winning side lines; it contains `K`.
    pub k_t: Polygon,
    /// Sides of `K` touched by the limit shape.
    pub tangency_set: Vec<usize>,
    /// Parametrizing-system solution on `k_t`.
    pub solution: PsSolution,
    pub limit_shape: LimitShape,
    pub ap_star: f64,
    pub m: usize,
}

/// Affine perimeter of the candidate for `subset`, or `None` when the
/// candidate is rejected.
fn evaluate(poly: &Polygon, subset: &SideSubset, tol: f64) -> Option<f64> {
    let cand = build_candidate(poly, subset).ok()?;
    let sol = PsSolution::for_polygon(&cand).ok()?;
    if sol.w.iter().any(|&w| !(w > 0.0 && w < 1.0)) {
        return None;
    }
    let shape = build_limit_shape(&cand, &sol);
    shape_in_polygon(&shape, poly, tol).then_some(sol.ap_star)
}

pub fn find_dom(poly: &Polygon) -> Result<DomReport> {
    check_cap(poly)?;
    let k = poly.kappa();
    let tol = default_tolerance(poly);
    let accepted: Vec<(f64, SideSubset)> = (0..1u32 << k)
        .into_par_iter()
        .filter(|&m| mask_is_valid(poly, m))
        .filter_map(|m| {
            let s = SideSubset::from_mask(m, k);
            evaluate(poly, &s, tol).map(|ap| (ap, s))
        })
        .collect();
    let best_ap = accepted
        .iter()
        .map(|(ap, _)| *ap)
        .fold(f64::NEG_INFINITY, f64::max);
    let i_star = accepted
        .into_iter()
        .filter(|(ap, _)| *ap >= best_ap * (1.0 - TIE_TOL))
        .map(|(_, s)| s)
        .min_by(|a, b| b.len().cmp(&a.len()).then_with(|| a.cmp(b)))
        .ok_or(Error::NoValidSubset)?;

    let k_t = build_candidate(poly, &i_star)?;
    let solution = PsSolution::for_polygon(&k_t)?;
    let limit_shape = build_limit_shape(&k_t, &solution);
    let tangency_set = matching_sides(poly, &k_t);
    Ok(DomReport {
        m: tangency_set.len(),
        ap_star: solution.ap_star,
        i_star,
        k_t,
        tangency_set,
        solution,
        limit_shape,
    })
}

/// Sides of `poly` lying on a side line of `outer`.
fn matching_sides(poly: &Polygon, outer: &Polygon) -> Vec<usize> {
    let scale = poly.diameter().max(1.0);
    (0..poly.kappa())
        .filter(|&j| {
            let a = &poly.lines()[j];
            outer.lines().iter().any(|b| {
                a.normal.dot(b.normal) > 1.0 - 1e-8 && (a.offset - b.offset).abs() <= 1e-8 * scale
            })
        })
        .collect()
}

impl DomReport {
    /// True when the limit shape touches every side, so `k_t` is `K` itself.
    pub fn is_full_sided(&self) -> bool {
        self.m == self.k_t.kappa() && self.tangency_set.len() == self.m
    }

    pub fn tangency_points(&self) -> &[Point] {
        &self.limit_shape.tangency_points
    }
}
