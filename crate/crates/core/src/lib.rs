//! Convex position of uniform points in convex polygons.
//!
//! Given a convex polygon `K`, this crate computes the limit shape `Dom(K)` of
//! uniform points conditioned to be in convex position, the maximal affine
//! perimeter `AP*(K)`, and the asymptotic equivalent of the probability
//! `P_K(n)` that `n` uniform points in `K` are in convex position. Monte Carlo
//! estimators and exact reference formulas are provided to check them.

pub mod error;
pub mod geom;
pub mod asymptotics;
pub mod domfinder;
pub mod limitshape;
pub mod mc;
pub mod pssolver;

pub use error::{Error, ErrorKind, Result};
pub use geom::{AffineMap, HalfPlane, Point, Polygon};
pub use asymptotics::{exact_reference, AsymptoticModel, ExactShape};
pub use domfinder::{find_dom, DomReport};
pub use limitshape::{LimitShape, ParabolaArc};
pub use mc::MCEstimate;
pub use pssolver::{solve_ps, PsSolution};
