//! Local statistics for graph-kernel pairs: decorated rooted balls, the
//! distance-resolved tightness profile, and convergence diagnostics for
//! sequences.
//!
//! A decorated ball is the rooted r-ball in the kernel's base graph
//! together with the kernel submatrix on the ball's elements; comparing
//! decorated balls up to root-preserving isomorphism is the local sampling
//! the convergence notion is built on. The tightness profile resolves the
//! squared kernel mass by base-graph distance; a heavy tail means local
//! sampling misses kernel mass no matter the radius.

use crate::error::{Error, Result};
use crate::graph::{ball, RootedBall};
use crate::kernels::Kernel;
use crate::rng;
use nalgebra::DMatrix;
use rand::Rng;
use std::collections::BTreeMap;

/// Isomorphism search refuses balls larger than this.
pub const MAX_BALL_VERTICES: usize = 64;
/// Default matching threshold for [`sequence_report`].
pub const DEFAULT_MATCH_TOL: f64 = 1e-6;
/// An item is flagged non-tight when its tail mass beyond the reported
/// radius stays above this.
pub const NON_TIGHT_THRESHOLD: f64 = 0.05;

/// A rooted ball together with the kernel submatrix on its elements
/// (ball vertex major, label minor — the same layout as a kernel over the
/// ball).
#[derive(Debug, Clone)]
pub struct DecoratedBall {
    pub ball: RootedBall,
    pub submatrix: DMatrix<f64>,
    pub radius: usize,
    pub label_count: usize,
}

/// Extracts the decorated radius-r ball of `k` rooted at `root`.
pub fn decorated_ball(k: &Kernel, root: usize, radius: usize) -> Result<DecoratedBall> {
    let b = ball(k.ground().base(), root, radius)?;
    let labels = k.ground().label_count();
    let ids: Vec<usize> = b
        .vertex_map
        .iter()
        .flat_map(|&v| (0..labels).map(move |l| v * labels + l))
        .collect();
    let submatrix = k.matrix().select_rows(&ids).select_columns(&ids);
    Ok(DecoratedBall {
        ball: b,
        submatrix,
        radius,
        label_count: labels,
    })
}

/// The distance-resolved squared kernel mass per base vertex:
/// `mass(t) = |V|^-1 * sum of M[e1,e2]^2 over element pairs at base
/// distance t`, with pairs in different components collected at infinity.
/// Total mass is `trace(M^2) / |V|`.
#[derive(Debug, Clone, Default)]
pub struct TightnessProfile {
    pub finite: BTreeMap<usize, f64>,
    pub infinite: f64,
}

impl TightnessProfile {
    pub fn total_mass(&self) -> f64 {
        self.finite.values().sum::<f64>() + self.infinite
    }

    /// Mass at distances strictly greater than `r`, including infinity.
    pub fn tail_mass_beyond(&self, r: usize) -> f64 {
        self.finite.range(r + 1..).map(|(_, &m)| m).sum::<f64>() + self.infinite
    }

    pub fn mass_at(&self, t: usize) -> f64 {
        self.finite.get(&t).copied().unwrap_or(0.0)
    }
}

pub fn tightness_profile(k: &Kernel) -> Result<TightnessProfile> {
    let base = k.ground().base();
    let labels = k.ground().label_count();
    let n = base.vertex_count();
    let mut profile = TightnessProfile::default();
    let scale = 1.0 / n as f64;
    for v1 in 0..n {
        let dist = base.distances_from(v1)?;
        for (v2, d2) in dist.iter().enumerate() {
            let mut sq = 0.0;
            for l1 in 0..labels {
                for l2 in 0..labels {
                    let x = k.matrix()[(v1 * labels + l1, v2 * labels + l2)];
                    sq += x * x;
                }
            }
            match d2 {
                Some(d) => *profile.finite.entry(*d).or_insert(0.0) += sq * scale,
                None => profile.infinite += sq * scale,
            }
        }
    }
    profile.finite.retain(|_, m| *m != 0.0);
    Ok(profile)
}

/// Adjacency multiplicities of a ball graph, dense for the backtracker.
fn multiplicity_matrix(b: &RootedBall) -> Vec<Vec<u8>> {
    let n = b.ball_graph.vertex_count();
    let mut m = vec![vec![0u8; n]; n];
    for e in b.ball_graph.edges() {
        m[e.u][e.v] += 1;
        m[e.v][e.u] += 1;
    }
    m
}

struct IsoSearch<'a> {
    a: &'a DecoratedBall,
    b: &'a DecoratedBall,
    mult_a: Vec<Vec<u8>>,
    mult_b: Vec<Vec<u8>>,
    order: Vec<usize>,
    mapping: Vec<usize>,
    used: Vec<bool>,
    best: f64,
    found: bool,
}

impl<'a> IsoSearch<'a> {
    /// Max deviation added by mapping `a_v -> b_v` given the current map:
    /// kernel entries between the new pair and every mapped pair (itself
    /// included), over all label combinations.
    fn extension_deviation(&self, depth: usize, b_v: usize) -> f64 {
        let k = self.a.label_count;
        let mut dev: f64 = 0.0;
        let a_v = self.order[depth];
        for d in 0..=depth {
            let a_u = self.order[d];
            let b_u = if d == depth { b_v } else { self.mapping[a_u] };
            for la in 0..k {
                for lb in 0..k {
                    let x = self.a.submatrix[(a_v * k + la, a_u * k + lb)];
                    let y = self.b.submatrix[(b_v * k + la, b_u * k + lb)];
                    dev = dev.max((x - y).abs());
                }
            }
        }
        dev
    }

    fn descend(&mut self, depth: usize, current: f64) {
        if self.found && self.best == 0.0 {
            return;
        }
        if depth == self.order.len() {
            self.found = true;
            self.best = self.best.min(current);
            return;
        }
        let a_v = self.order[depth];
        for b_v in 0..self.b.ball.ball_graph.vertex_count() {
            if self.used[b_v]
                || self.a.ball.distances[a_v] != self.b.ball.distances[b_v]
                || self.a.ball.ball_graph.degree(a_v) != self.b.ball.ball_graph.degree(b_v)
            {
                continue;
            }
            // Adjacency multiplicities to already-mapped vertices must agree.
            let consistent = (0..depth).all(|d| {
                let a_u = self.order[d];
                self.mult_a[a_v][a_u] == self.mult_b[b_v][self.mapping[a_u]]
            });
            if !consistent {
                continue;
            }
            let dev = current.max(self.extension_deviation(depth, b_v));
            if self.found && dev >= self.best {
                continue;
            }
            self.mapping[a_v] = b_v;
            self.used[b_v] = true;
            self.descend(depth + 1, dev);
            self.used[b_v] = false;
        }
    }
}

/// Infimum over root-preserving graph isomorphisms of the max entrywise
/// kernel deviation between two decorated balls of equal radius and label
/// set. Returns `(false, infinity)` when no isomorphism exists.
///
/// Exact backtracking with distance/degree/multiplicity pruning and
/// branch-and-bound on the deviation; capped at 64-vertex balls.
pub fn ball_distance(a: &DecoratedBall, b: &DecoratedBall) -> Result<(bool, f64)> {
    if a.radius != b.radius {
        return Err(Error::BadParams(format!(
            "ball radii differ: {} vs {}",
            a.radius, b.radius
        )));
    }
    if a.label_count != b.label_count {
        return Err(Error::BadParams(format!(
            "label counts differ: {} vs {}",
            a.label_count, b.label_count
        )));
    }
    for ball in [a, b] {
        let size = ball.ball.ball_graph.vertex_count();
        if size > MAX_BALL_VERTICES {
            return Err(Error::BallTooLarge {
                size,
                max: MAX_BALL_VERTICES,
            });
        }
    }
    let na = a.ball.ball_graph.vertex_count();
    if na != b.ball.ball_graph.vertex_count()
        || a.ball.ball_graph.edge_count() != b.ball.ball_graph.edge_count()
    {
        return Ok((false, f64::INFINITY));
    }
    // Shell profiles (distance, degree) must match as multisets.
    let profile = |d: &DecoratedBall| {
        let mut p: Vec<(usize, usize)> = (0..d.ball.ball_graph.vertex_count())
            .map(|v| (d.ball.distances[v], d.ball.ball_graph.degree(v)))
            .collect();
        p.sort_unstable();
        p
    };
    if profile(a) != profile(b) {
        return Ok((false, f64::INFINITY));
    }

    // Ball vertices are already sorted by (distance, original index), so the
    // identity order maps shells outward from the root.
    let mut search = IsoSearch {
        mult_a: multiplicity_matrix(&a.ball),
        mult_b: multiplicity_matrix(&b.ball),
        order: (0..na).collect(),
        mapping: vec![usize::MAX; na],
        used: vec![false; na],
        best: f64::INFINITY,
        found: false,
        a,
        b,
    };
    search.descend(0, 0.0);
    if search.found {
        Ok((true, search.best))
    } else {
        Ok((false, f64::INFINITY))
    }
}

/// Decorated balls at `n_roots` uniform-with-replacement random roots.
pub fn empirical_stats(
    k: &Kernel,
    radius: usize,
    n_roots: usize,
    seed: u64,
) -> Result<Vec<DecoratedBall>> {
    let mut rng = rng::stream(seed);
    empirical_stats_with_stream(k, radius, n_roots, &mut rng)
}

fn empirical_stats_with_stream<R: Rng>(
    k: &Kernel,
    radius: usize,
    n_roots: usize,
    rng: &mut R,
) -> Result<Vec<DecoratedBall>> {
    let n = k.ground().base().vertex_count();
    if n == 0 {
        return Err(Error::BadParams("base graph has no vertices".into()));
    }
    (0..n_roots)
        .map(|_| decorated_ball(k, rng.gen_range(0..n), radius))
        .collect()
}

/// Matching diagnostics for one consecutive pair of a sequence.
#[derive(Debug, Clone)]
pub struct PairReport {
    /// Mean deviation over greedily matched (isomorphic) ball pairs.
    pub empirical_distance: f64,
    /// Fraction of balls without an isomorphic partner within `match_tol`.
    pub unmatched_fraction: f64,
}

/// Tightness diagnostics for one item of a sequence.
#[derive(Debug, Clone)]
pub struct ItemReport {
    /// Tail mass beyond each radius `0..=reported_radius`.
    pub tail_mass: BTreeMap<usize, f64>,
    pub infinite_mass: f64,
    pub flagged_non_tight: bool,
}

#[derive(Debug, Clone)]
pub struct SequenceReport {
    pub pairs: Vec<PairReport>,
    pub items: Vec<ItemReport>,
    /// Radius the tail masses run up to.
    pub reported_radius: usize,
}

/// Empirical convergence/tightness diagnostics across a sequence of
/// kernels: a greedy minimum-deviation matching of sampled decorated balls
/// for each consecutive pair, and tightness tail masses per item. Items
/// whose tail mass beyond the reported radius exceeds `0.05` are flagged.
pub fn sequence_report(
    items: &[&Kernel],
    radius: usize,
    n_roots: usize,
    match_tol: f64,
    seed: u64,
) -> Result<SequenceReport> {
    if items.len() < 2 {
        return Err(Error::BadParams(
            "sequence_report needs at least 2 items".into(),
        ));
    }
    // Common random numbers: every item draws its roots from a fresh copy of
    // the same stream, so a constant sequence matches ball-for-ball.
    let sampled: Vec<Vec<DecoratedBall>> = items
        .iter()
        .map(|k| empirical_stats_with_stream(k, radius, n_roots, &mut rng::stream(seed)))
        .collect::<Result<_>>()?;

    let mut pairs = Vec::new();
    for pair in sampled.windows(2) {
        pairs.push(match_balls(&pair[0], &pair[1], match_tol)?);
    }

    let reported_radius = radius.max(10);
    let items_out: Vec<ItemReport> = items
        .iter()
        .map(|k| {
            let profile = tightness_profile(k)?;
            let tail_mass: BTreeMap<usize, f64> = (0..=reported_radius)
                .map(|r| (r, profile.tail_mass_beyond(r)))
                .collect();
            let beyond = profile.tail_mass_beyond(reported_radius);
            Ok(ItemReport {
                tail_mass,
                infinite_mass: profile.infinite,
                flagged_non_tight: beyond > NON_TIGHT_THRESHOLD,
            })
        })
        .collect::<Result<_>>()?;

    Ok(SequenceReport {
        pairs,
        items: items_out,
        reported_radius,
    })
}

fn match_balls(
    left: &[DecoratedBall],
    right: &[DecoratedBall],
    match_tol: f64,
) -> Result<PairReport> {
    let total = left.len().max(right.len());
    if total == 0 {
        return Ok(PairReport {
            empirical_distance: 0.0,
            unmatched_fraction: 0.0,
        });
    }
    let mut deviations = Vec::new();
    for (i, a) in left.iter().enumerate() {
        for (j, b) in right.iter().enumerate() {
            let (iso, dev) = ball_distance(a, b)?;
            if iso {
                deviations.push((dev, i, j));
            }
        }
    }
    deviations.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let mut used_left = vec![false; left.len()];
    let mut used_right = vec![false; right.len()];
    let mut matched = Vec::new();
    for (dev, i, j) in deviations {
        if !used_left[i] && !used_right[j] {
            used_left[i] = true;
            used_right[j] = true;
            matched.push(dev);
        }
    }
    let within_tol = matched.iter().filter(|&&d| d <= match_tol).count();
    let paired = matched.len();
    let empirical_distance = if paired == 0 {
        0.0
    } else {
        matched.iter().sum::<f64>() / paired as f64
    };
    // Unpaired balls on either side count once each against the larger side.
    let unmatched = total - paired.min(total) + (paired - within_tol);
    Ok(PairReport {
        empirical_distance,
        unmatched_fraction: unmatched as f64 / total as f64,
    })
}
