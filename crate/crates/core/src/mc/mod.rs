//! Monte Carlo estimators and the finite-n machinery around the parallel
//! containing polygon (PCP) of a sample.
//!
//! Trials run in batches of [`BATCH`]. Batch `b` draws from a ChaCha8 stream
//! seeded with the master seed and stream number `b`, so totals depend only on
//! the seed and the trial count, never on the number of workers.

pub mod density;
pub mod hausdorff;
pub mod pcp;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geom::{is_convex_position, orient, parse_polygon, Point, Polygon, UniformSampler};

pub use density::{density_unnormalized, limit_density, ptilde_quadrature, size_vectors};
pub use hausdorff::{hausdorff_to_limit_shape, hausdorff_to_shape};
pub use pcp::{compute_pcp, PcpData};

/// Trials per random stream.
pub const BATCH: u64 = 4096;

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.959_963_984_540_054;

/// Largest `n` accepted by the conditioned sampler.
pub const CONDITIONED_MAX_N: usize = 12;

/// Binomial estimate with its Wilson 95% interval.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MCEstimate {
    pub trials: u64,
    pub successes: u64,
    pub p_hat: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub seed: u64,
}

/// Wilson score interval at normal quantile `z`.
pub fn wilson_interval(successes: u64, trials: u64, z: f64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

impl MCEstimate {
    pub fn new(successes: u64, trials: u64, seed: u64) -> Self {
        let (ci_low, ci_high) = wilson_interval(successes, trials, Z95);
        MCEstimate {
            trials,
            successes,
            p_hat: if trials == 0 { 0.0 } else { successes as f64 / trials as f64 },
            ci_low,
            ci_high,
            seed,
        }
    }

    /// True when `reference` lies in the Wilson interval at `k` standard
    /// deviations.
    pub fn within_sigma(&self, reference: f64, k: f64) -> bool {
        let (lo, hi) = wilson_interval(self.successes, self.trials, k);
        (lo..=hi).contains(&reference)
    }

    /// Distance from `p_hat` to `reference` in binomial standard deviations
    /// evaluated at `reference`.
    pub fn z_score(&self, reference: f64) -> f64 {
        let sd = (reference * (1.0 - reference) / self.trials as f64).sqrt();
        if sd == 0.0 {
            if self.p_hat == reference { 0.0 } else { f64::INFINITY }
        } else {
            (self.p_hat - reference) / sd
        }
    }
}

fn check_trials(trials: u64, workers: usize) -> Result<()> {
    if trials == 0 {
        return Err(Error::InvalidInput("trials must be at least 1".into()));
    }
    if workers == 0 {
        return Err(Error::InvalidInput("workers must be at least 1".into()));
    }
    Ok(())
}

fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Runs `trials` trials of `trial`, which returns a tuple of counters, on
/// `workers` threads. The trial gets its batch's generator and a scratch
/// buffer created once per batch by `scratch`.
fn run_batches<S, F, const K: usize>(
    trials: u64,
    seed: u64,
    workers: usize,
    scratch: impl Fn() -> S + Sync,
    trial: F,
) -> Result<[u64; K]>
where
    F: Fn(&mut ChaCha8Rng, &mut S) -> [bool; K] + Sync,
{
    let batches = trials.div_ceil(BATCH);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::InvalidInput(format!("thread pool: {e}")))?;
    let counts = pool.install(|| {
        (0..batches)
            .into_par_iter()
            .map(|b| {
                let mut rng = stream_rng(seed, b);
                let mut buf = scratch();
                let size = BATCH.min(trials - b * BATCH);
                let mut acc = [0u64; K];
                for _ in 0..size {
                    let hits = trial(&mut rng, &mut buf);
                    for (a, h) in acc.iter_mut().zip(hits) {
                        *a += h as u64;
                    }
                }
                acc
            })
            .reduce(
                || [0u64; K],
                |mut a, b| {
                    for (x, y) in a.iter_mut().zip(b) {
                        *x += y;
                    }
                    a
                },
            )
    });
    Ok(counts)
}

/// Probability that `n` uniform points in `poly` are in convex position.
pub fn estimate_convex_probability(
    poly: &Polygon,
    n: usize,
    trials: u64,
    seed: u64,
    workers: usize,
) -> Result<MCEstimate> {
    if n < 3 {
        return Err(Error::InvalidInput(format!("n must be at least 3, got {n}")));
    }
    check_trials(trials, workers)?;
    let sampler = UniformSampler::new(poly);
    let [hits] = run_batches(
        trials,
        seed,
        workers,
        || vec![Point::ORIGIN; n],
        |rng, pts| {
            sampler.fill(rng, pts);
            [is_convex_position(pts)]
        },
    )?;
    Ok(MCEstimate::new(hits, trials, seed))
}

/// The triangle used for the bi-pointed estimator, with its two anchors.
pub fn bipointed_triangle() -> (Polygon, Point, Point) {
    let tri = parse_polygon(&[Point::new(0.0, 0.0), Point::new(1.0, 0.0), Point::new(0.0, 1.0)])
        .expect("valid triangle");
    (tri, Point::new(0.0, 0.0), Point::new(1.0, 0.0))
}

/// Probability that `n` uniform points in a triangle, together with two of
/// its vertices, are in convex position.
pub fn estimate_bipointed(n: usize, trials: u64, seed: u64, workers: usize) -> Result<MCEstimate> {
    if n < 1 {
        return Err(Error::InvalidInput("n must be at least 1".into()));
    }
    check_trials(trials, workers)?;
    let (tri, a, b) = bipointed_triangle();
    let sampler = UniformSampler::new(&tri);
    let [hits] = run_batches(
        trials,
        seed,
        workers,
        || vec![Point::ORIGIN; n + 2],
        |rng, pts| {
            pts[0] = a;
            pts[1] = b;
            sampler.fill(rng, &mut pts[2..]);
            [is_convex_position(pts)]
        },
    )?;
    Ok(MCEstimate::new(hits, trials, seed))
}

/// Convex-position probability, full-sided convex-position probability, and
/// the fraction of convex samples that are full-sided.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FullSidedEstimate {
    pub convex: MCEstimate,
    pub full_sided: MCEstimate,
    pub conditional_fraction: f64,
}

pub fn estimate_full_sided(
    poly: &Polygon,
    n: usize,
    trials: u64,
    seed: u64,
    workers: usize,
) -> Result<FullSidedEstimate> {
    if n < 3 {
        return Err(Error::InvalidInput(format!("n must be at least 3, got {n}")));
    }
    check_trials(trials, workers)?;
    let sampler = UniformSampler::new(poly);
    let tol = 1e-12 * poly.diameter();
    let [convex, full] = run_batches(
        trials,
        seed,
        workers,
        || vec![Point::ORIGIN; n],
        |rng, pts| {
            sampler.fill(rng, pts);
            if !is_convex_position(pts) {
                return [false, false];
            }
            let (_, c) = pcp::side_data(poly, pts);
            [true, c.iter().all(|&cj| cj > tol)]
        },
    )?;
    Ok(FullSidedEstimate {
        convex: MCEstimate::new(convex, trials, seed),
        full_sided: MCEstimate::new(full, trials, seed),
        conditional_fraction: if convex == 0 { 0.0 } else { full as f64 / convex as f64 },
    })
}

/// Draws `n` uniform points in `poly` conditioned on convex position, by
/// rejection. Points are added one at a time and the attempt restarts as
/// soon as the prefix leaves convex position, which leaves the conditioned
/// law unchanged since every subset of a convex-position set is in convex
/// position. Returned in counterclockwise hull order.
pub fn sample_conditioned<R: Rng + ?Sized>(
    sampler: &UniformSampler,
    n: usize,
    rng: &mut R,
) -> Result<Vec<Point>> {
    if !(3..=CONDITIONED_MAX_N).contains(&n) {
        return Err(Error::TooLarge(format!(
            "conditioned sampling needs 3 <= n <= {CONDITIONED_MAX_N}, got {n}"
        )));
    }
    let mut hull: Vec<Point> = Vec::with_capacity(n);
    'attempt: loop {
        hull.clear();
        let (a, b, c) = (sampler.sample(rng), sampler.sample(rng), sampler.sample(rng));
        let o = orient(a, b, c);
        if o == 0.0 {
            continue;
        }
        hull.extend(if o > 0.0 { [a, b, c] } else { [a, c, b] });
        while hull.len() < n {
            let q = sampler.sample(rng);
            let m = hull.len();
            let mut visible = None;
            for i in 0..m {
                let side = orient(hull[i], hull[(i + 1) % m], q);
                if side == 0.0 {
                    continue 'attempt;
                }
                if side < 0.0 {
                    if visible.is_some() {
                        continue 'attempt;
                    }
                    visible = Some(i);
                }
            }
            match visible {
                Some(i) => hull.insert(i + 1, q),
                None => continue 'attempt,
            }
        }
        return Ok(hull);
    }
}
