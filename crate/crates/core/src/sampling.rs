//! Exact sampling from determinantal measures, inclusion probabilities,
//! full pmf enumeration, and an independent spanning-tree sampler.
//!
//! The sampler is the sequential-conditioning chain: visit the ground set
//! in order, include each element with probability equal to the current
//! conditioned kernel's diagonal entry, and apply the matching rank-one
//! include/exclude update. Conditioning and sampling therefore share one
//! code path, and the chain's conditional probabilities are exactly the
//! quantities the entropy estimators integrate.

use crate::conditioning::{exclude_in_place, include_in_place};
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::kernels::{dilate, Kernel, KernelClass};
use crate::rng;
use nalgebra::DMatrix;
use rand::Rng;
use rayon::prelude::*;

/// Probabilities within this distance of 0 or 1 are snapped to the endpoint.
pub const PROB_SNAP_TOL: f64 = 1e-12;
/// Probabilities outside `[-tol, 1 + tol]` abort: the kernel has drifted.
pub const PROB_GUARD_TOL: f64 = 1e-9;
/// Ground sets above this size are refused by the exact enumerator.
pub const MAX_ENUMERATION: usize = 24;

/// Validates a diagonal entry as a probability: snaps near-degenerate
/// values to 0 or 1, clamps small overshoot, and errors beyond the guard.
pub(crate) fn clip_probability(p: f64) -> Result<f64> {
    if !(-PROB_GUARD_TOL..=1.0 + PROB_GUARD_TOL).contains(&p) {
        return Err(Error::NumericalGuard(format!(
            "conditional probability {p} outside [-{PROB_GUARD_TOL:e}, 1+{PROB_GUARD_TOL:e}]"
        )));
    }
    if p <= PROB_SNAP_TOL {
        Ok(0.0)
    } else if p >= 1.0 - PROB_SNAP_TOL {
        Ok(1.0)
    } else {
        Ok(p)
    }
}

/// One draw from a determinantal measure.
#[derive(Debug, Clone)]
pub struct SampleDraw {
    /// Membership per ground-set element.
    pub subset: Vec<bool>,
    /// `(element, conditional inclusion probability)` per visited element,
    /// in visit order.
    pub trace: Option<Vec<(usize, f64)>>,
}

impl SampleDraw {
    pub fn cardinality(&self) -> usize {
        self.subset.iter().filter(|&&b| b).count()
    }

    /// Element ids of the subset, ascending.
    pub fn elements(&self) -> Vec<usize> {
        self.subset
            .iter()
            .enumerate()
            .filter_map(|(i, &b)| b.then_some(i))
            .collect()
    }
}

/// Membership plus the `(element, conditional probability)` chain trace.
pub(crate) type WalkOutcome = (Vec<bool>, Vec<(usize, f64)>);

/// Runs the sequential chain over `order`, mutating `m` into the kernel
/// conditioned on the realized outcomes. Returns membership and the trace.
pub(crate) fn walk_order<R: Rng>(
    m: &mut DMatrix<f64>,
    order: &[usize],
    rng: &mut R,
) -> Result<WalkOutcome> {
    let n = m.nrows();
    let mut subset = vec![false; n];
    let mut trace = Vec::with_capacity(order.len());
    for &e in order {
        let p = clip_probability(m[(e, e)])?;
        let include = match p {
            0.0 => false,
            1.0 => true,
            _ => rng.gen::<f64>() < p,
        };
        if include {
            include_in_place(m, e)?;
            subset[e] = true;
        } else {
            exclude_in_place(m, e)?;
        }
        trace.push((e, p));
    }
    Ok((subset, trace))
}

/// One exact draw from the determinantal measure of `k`.
///
/// Projection kernels are sampled directly. A contraction is first lifted
/// to its projection dilation; the draw is restricted back to the original
/// labels, whose marginal law is the contraction's measure. In that case
/// the trace keeps only the steps at original-label elements.
pub fn sample_dpp(k: &Kernel, seed: u64) -> Result<SampleDraw> {
    sample_with_stream(k, &mut rng::stream(seed))
}

pub(crate) fn sample_with_stream<R: Rng>(k: &Kernel, rng: &mut R) -> Result<SampleDraw> {
    match k.class() {
        KernelClass::Projection => {
            let mut m = k.matrix().clone();
            let order: Vec<usize> = (0..k.size()).collect();
            let (subset, trace) = walk_order(&mut m, &order, rng)?;
            Ok(SampleDraw {
                subset,
                trace: Some(trace),
            })
        }
        KernelClass::Contraction => {
            let lifted = dilate(k)?;
            let mut m = lifted.matrix().clone();
            let order: Vec<usize> = (0..lifted.size()).collect();
            let (big_subset, big_trace) = walk_order(&mut m, &order, rng)?;
            let kc = k.ground().label_count();
            let kc2 = lifted.ground().label_count();
            let original = |idx: usize| {
                let (v, l) = lifted.ground().element(idx);
                (l < kc).then(|| v * kc + l)
            };
            let mut subset = vec![false; k.size()];
            for (idx, &b) in big_subset.iter().enumerate() {
                if let Some(small) = original(idx) {
                    subset[small] = b;
                }
            }
            debug_assert_eq!(kc2, 2 * kc);
            let trace = big_trace
                .into_iter()
                .filter_map(|(idx, p)| original(idx).map(|small| (small, p)))
                .collect();
            Ok(SampleDraw {
                subset,
                trace: Some(trace),
            })
        }
    }
}

/// `n` independent draws on substreams `0..n` of `seed`, evaluated in
/// parallel; draw `i` is identical no matter where it runs.
pub fn sample_many(k: &Kernel, n: usize, seed: u64) -> Result<Vec<SampleDraw>> {
    (0..n as u64)
        .into_par_iter()
        .map(|i| sample_with_stream(k, &mut rng::substream(seed, i)))
        .collect()
}

/// `P[F subset of B] = det of the principal submatrix on F`. Tiny negative
/// determinants (above `-1e-12`) are clipped to zero.
pub fn inclusion_probability(k: &Kernel, elements: &[usize]) -> Result<f64> {
    let mut f: Vec<usize> = elements.to_vec();
    f.sort_unstable();
    f.dedup();
    if let Some(&bad) = f.iter().find(|&&e| e >= k.size()) {
        return Err(Error::BadParams(format!(
            "element {bad} out of range (ground set has {} elements)",
            k.size()
        )));
    }
    if f.is_empty() {
        return Ok(1.0);
    }
    let sub = k.matrix().select_rows(&f).select_columns(&f);
    let det = sub.determinant();
    if (-1e-12..0.0).contains(&det) {
        Ok(0.0)
    } else {
        Ok(det)
    }
}

/// The full probability mass function of a determinantal measure on a small
/// ground set. Subsets are bitmasks: bit `i` set means element `i` present.
#[derive(Debug, Clone)]
pub struct ExactPmf {
    size: usize,
    /// `(subset mask, probability)`, ascending by mask.
    atoms: Vec<(u32, f64)>,
}

impl ExactPmf {
    pub fn ground_size(&self) -> usize {
        self.size
    }

    pub fn atoms(&self) -> &[(u32, f64)] {
        &self.atoms
    }

    pub fn probability_of(&self, mask: u32) -> f64 {
        self.atoms
            .binary_search_by_key(&mask, |&(m, _)| m)
            .map(|i| self.atoms[i].1)
            .unwrap_or(0.0)
    }

    pub fn total_variation(&self, other: &ExactPmf) -> f64 {
        let mut tv = 0.0;
        let mut i = 0;
        let mut j = 0;
        while i < self.atoms.len() || j < other.atoms.len() {
            match (self.atoms.get(i), other.atoms.get(j)) {
                (Some(&(ma, pa)), Some(&(mb, pb))) => {
                    if ma == mb {
                        tv += (pa - pb).abs();
                        i += 1;
                        j += 1;
                    } else if ma < mb {
                        tv += pa;
                        i += 1;
                    } else {
                        tv += pb;
                        j += 1;
                    }
                }
                (Some(&(_, pa)), None) => {
                    tv += pa;
                    i += 1;
                }
                (None, Some(&(_, pb))) => {
                    tv += pb;
                    j += 1;
                }
                (None, None) => break,
            }
        }
        tv / 2.0
    }

    /// Builds a pmf from observed draws (for sampler consistency checks).
    pub fn from_draws(size: usize, draws: &[SampleDraw]) -> ExactPmf {
        assert!(size <= MAX_ENUMERATION);
        let mut counts = std::collections::BTreeMap::new();
        for d in draws {
            let mut mask = 0u32;
            for (i, &b) in d.subset.iter().enumerate() {
                if b {
                    mask |= 1 << i;
                }
            }
            *counts.entry(mask).or_insert(0usize) += 1;
        }
        let total = draws.len() as f64;
        ExactPmf {
            size,
            atoms: counts
                .into_iter()
                .map(|(m, c)| (m, c as f64 / total))
                .collect(),
        }
    }
}

/// Enumerates the pmf by depth-first recursion over include/exclude
/// decisions in ground-set order, multiplying the chain's conditional
/// probabilities. Branches lighter than `1e-12` are pruned as zero.
pub fn enumerate_pmf(k: &Kernel) -> Result<ExactPmf> {
    let n = k.size();
    if n > MAX_ENUMERATION {
        return Err(Error::GroundSetTooLarge {
            size: n,
            max: MAX_ENUMERATION,
        });
    }
    let mut atoms = Vec::new();
    descend(k.matrix().clone(), 0, 0u32, 1.0, &mut atoms)?;
    let total: f64 = atoms.iter().map(|&(_, p)| p).sum();
    if (total - 1.0).abs() > PROB_GUARD_TOL {
        return Err(Error::NumericalGuard(format!(
            "enumerated pmf mass {total} is not within 1e-9 of 1"
        )));
    }
    for atom in &mut atoms {
        atom.1 /= total;
    }
    atoms.sort_unstable_by_key(|&(m, _)| m);
    Ok(ExactPmf { size: n, atoms })
}

fn descend(
    m: DMatrix<f64>,
    depth: usize,
    mask: u32,
    prob: f64,
    out: &mut Vec<(u32, f64)>,
) -> Result<()> {
    if depth == m.nrows() {
        out.push((mask, prob));
        return Ok(());
    }
    let p = clip_probability(m[(depth, depth)])?;
    let p_in = prob * p;
    let p_out = prob * (1.0 - p);
    if p_in >= PROB_SNAP_TOL {
        let mut next = m.clone();
        include_in_place(&mut next, depth)?;
        descend(next, depth + 1, mask | (1 << depth), p_in, out)?;
    }
    if p_out >= PROB_SNAP_TOL {
        let mut next = m;
        exclude_in_place(&mut next, depth)?;
        descend(next, depth + 1, mask, p_out, out)?;
    }
    Ok(())
}

/// Samples a spanning tree with probability proportional to its weight via
/// loop-erased random walks. Independent of the kernel machinery, so it
/// serves as an oracle for the transfer-current sampler.
pub fn wilson_ust(g: &Graph, seed: u64) -> Result<Vec<usize>> {
    wilson_with_stream(g, &mut rng::stream(seed))
}

pub(crate) fn wilson_with_stream<R: Rng>(g: &Graph, rng: &mut R) -> Result<Vec<usize>> {
    if !g.is_connected() {
        return Err(Error::Disconnected);
    }
    let n = g.vertex_count();
    if n <= 1 {
        return Ok(Vec::new());
    }
    let mut in_tree = vec![false; n];
    let mut exit_edge: Vec<usize> = vec![usize::MAX; n];
    in_tree[0] = true;
    for start in 1..n {
        let mut u = start;
        while !in_tree[u] {
            // Pick an incident edge with probability proportional to weight.
            let total = g.weighted_degree(u);
            let mut r = rng.gen::<f64>() * total;
            let mut chosen = g.neighbors(u)[0];
            for &(nbr, eid) in g.neighbors(u) {
                r -= g.edges()[eid].weight;
                chosen = (nbr, eid);
                if r <= 0.0 {
                    break;
                }
            }
            exit_edge[u] = chosen.1;
            u = chosen.0;
        }
        let mut v = start;
        while !in_tree[v] {
            in_tree[v] = true;
            let e = &g.edges()[exit_edge[v]];
            v = if e.u == v { e.v } else { e.u };
        }
    }
    let mut edges: Vec<usize> = (1..n).map(|v| exit_edge[v]).collect();
    edges.sort_unstable();
    Ok(edges)
}
