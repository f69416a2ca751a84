//! Shannon entropy of determinantal measures.
//!
//! Exact values come from pmf enumeration or the conditional chain rule;
//! Monte-Carlo estimators average the binary entropy of the chain's
//! conditional probabilities, which is unbiased for the total entropy under
//! any element ordering. The local estimators condition only on a Bernoulli
//! percolation of the ground set (optionally truncated to a ball around the
//! marked element), which is the random-label conditional entropy in
//! disguise and needs no bookkeeping of label order. The return-probability
//! formula and the weighted partition function cover the spanning-tree
//! specialization.
//!
//! All entropies are in nats.

use crate::conditioning::{exclude_in_place, include_in_place};
use crate::error::{Error, Result};
use crate::graph::{ball, Graph};
use crate::kernels::{weighted_laplacian, Kernel};
use crate::rng;
use crate::sampling::{clip_probability, enumerate_pmf, MAX_ENUMERATION, PROB_SNAP_TOL};
use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;

/// How an [`EntropyEstimate`] was produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Exact,
    ChainExact,
    McChain,
    HbarPercolation,
    HbarLocal,
    LyonsFormula,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Exact => "exact",
            Method::ChainExact => "chain_exact",
            Method::McChain => "mc_chain",
            Method::HbarPercolation => "hbar_percolation",
            Method::HbarLocal => "hbar_local",
            Method::LyonsFormula => "lyons_formula",
        }
    }
}

/// An entropy value with its sampling error. Exact methods report
/// `std_error = 0` and `replicates = 0`.
#[derive(Debug, Clone)]
pub struct EntropyEstimate {
    pub value: f64,
    pub std_error: f64,
    pub replicates: usize,
    pub method: Method,
}

impl EntropyEstimate {
    fn exact(value: f64, method: Method) -> EntropyEstimate {
        EntropyEstimate {
            value,
            std_error: 0.0,
            replicates: 0,
            method,
        }
    }

    /// Mean and standard error of replicate values, by compensated
    /// summation so the reported value is independent of accumulation
    /// order.
    fn from_replicates(values: &[f64], method: Method) -> EntropyEstimate {
        let n = values.len();
        let mean = kahan_sum(values.iter().copied()) / n as f64;
        let std_error = if n > 1 {
            let ss = kahan_sum(values.iter().map(|&v| (v - mean) * (v - mean)));
            (ss / (n as f64 - 1.0)).sqrt() / (n as f64).sqrt()
        } else {
            0.0
        };
        EntropyEstimate {
            value: mean,
            std_error,
            replicates: n,
            method,
        }
    }
}

pub(crate) fn kahan_sum(values: impl Iterator<Item = f64>) -> f64 {
    let mut sum = 0.0;
    let mut carry = 0.0;
    for v in values {
        let y = v - carry;
        let t = sum + y;
        carry = (t - sum) - y;
        sum = t;
    }
    sum
}

/// Natural-log binary entropy `g(x) = -x ln x - (1-x) ln(1-x)`, with
/// `g(0) = g(1) = 0`. Values within `1e-12` of the endpoints contribute
/// exactly zero; values further outside `[0, 1]` are rejected.
pub fn binary_entropy(x: f64) -> Result<f64> {
    if !(-PROB_SNAP_TOL..=1.0 + PROB_SNAP_TOL).contains(&x) {
        return Err(Error::OutOfRange(x));
    }
    if x <= PROB_SNAP_TOL || x >= 1.0 - PROB_SNAP_TOL {
        return Ok(0.0);
    }
    Ok(-x * x.ln() - (1.0 - x) * (1.0 - x).ln())
}

/// `-sum p log p` over the enumerated pmf. Ground sets of at most
/// 24 elements.
pub fn exact_entropy(k: &Kernel) -> Result<EntropyEstimate> {
    let pmf = enumerate_pmf(k)?;
    let h = -kahan_sum(
        pmf.atoms()
            .iter()
            .filter(|&&(_, p)| p > 0.0)
            .map(|&(_, p)| p * p.ln()),
    );
    Ok(EntropyEstimate::exact(h, Method::Exact))
}

/// An element ordering: either an explicit permutation or distinct real
/// labels sorted ascending.
#[derive(Debug, Clone)]
pub enum LabelOrder {
    Permutation(Vec<usize>),
    Labels(Vec<f64>),
}

impl LabelOrder {
    /// Uniformly random permutation of `m` elements.
    pub fn random<R: Rng>(m: usize, rng: &mut R) -> LabelOrder {
        let mut perm: Vec<usize> = (0..m).collect();
        perm.shuffle(rng);
        LabelOrder::Permutation(perm)
    }

    /// Resolves to a visiting order over `0..m`.
    pub fn permutation(&self, m: usize) -> Result<Vec<usize>> {
        match self {
            LabelOrder::Permutation(perm) => {
                if perm.len() != m {
                    return Err(Error::BadParams(format!(
                        "permutation has {} entries, ground set has {m}",
                        perm.len()
                    )));
                }
                let mut seen = vec![false; m];
                for &e in perm {
                    if e >= m || seen[e] {
                        return Err(Error::BadParams(format!(
                            "not a permutation: element {e} repeated or out of range"
                        )));
                    }
                    seen[e] = true;
                }
                Ok(perm.clone())
            }
            LabelOrder::Labels(labels) => {
                if labels.len() != m {
                    return Err(Error::BadParams(format!(
                        "label vector has {} entries, ground set has {m}",
                        labels.len()
                    )));
                }
                let mut idx: Vec<usize> = (0..m).collect();
                idx.sort_by(|&a, &b| labels[a].partial_cmp(&labels[b]).unwrap());
                for w in idx.windows(2) {
                    if labels[w[0]] == labels[w[1]] {
                        return Err(Error::BadParams(
                            "tied labels; resample to make them distinct".to_string(),
                        ));
                    }
                }
                Ok(idx)
            }
        }
    }
}

/// Exact entropy via the conditional chain rule along a fixed order:
/// the sum over branches of the conditioning tree of
/// `P(branch) * g(conditional probability)`. Equals [`exact_entropy`] for
/// every order.
pub fn chain_entropy_exact(k: &Kernel, order: &LabelOrder) -> Result<EntropyEstimate> {
    let n = k.size();
    if n > MAX_ENUMERATION {
        return Err(Error::GroundSetTooLarge {
            size: n,
            max: MAX_ENUMERATION,
        });
    }
    let perm = order.permutation(n)?;
    let mut total = 0.0;
    chain_descend(k.matrix().clone(), &perm, 0, 1.0, &mut total)?;
    Ok(EntropyEstimate::exact(total, Method::ChainExact))
}

fn chain_descend(
    m: DMatrix<f64>,
    perm: &[usize],
    depth: usize,
    prob: f64,
    total: &mut f64,
) -> Result<()> {
    if depth == perm.len() {
        return Ok(());
    }
    let e = perm[depth];
    let p = clip_probability(m[(e, e)])?;
    *total += prob * binary_entropy(p)?;
    let p_in = prob * p;
    let p_out = prob * (1.0 - p);
    if p_in >= PROB_SNAP_TOL {
        let mut next = m.clone();
        include_in_place(&mut next, e)?;
        chain_descend(next, perm, depth + 1, p_in, total)?;
    }
    if p_out >= PROB_SNAP_TOL {
        let mut next = m;
        exclude_in_place(&mut next, e)?;
        chain_descend(next, perm, depth + 1, p_out, total)?;
    }
    Ok(())
}

/// Unbiased Monte-Carlo entropy: each replicate draws a uniform random
/// element order, runs the sequential sampler along it, and sums
/// `g(conditional probability)` over the steps. The replicate mean is the
/// entropy; the standard error is the replicate standard deviation over
/// `sqrt(n)`.
pub fn mc_entropy(k: &Kernel, n_samples: usize, seed: u64) -> Result<EntropyEstimate> {
    if n_samples == 0 {
        return Err(Error::BadParams("mc_entropy needs n_samples >= 1".into()));
    }
    let values: Vec<f64> = (0..n_samples as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = rng::substream(seed, i);
            let order = LabelOrder::random(k.size(), &mut rng).permutation(k.size())?;
            let mut m = k.matrix().clone();
            let (_, trace) = crate::sampling::walk_order(&mut m, &order, &mut rng)?;
            trace.iter().map(|&(_, p)| binary_entropy(p)).sum()
        })
        .collect::<Result<_>>()?;
    Ok(EntropyEstimate::from_replicates(&values, Method::McChain))
}

/// Runs one percolation-conditioning replicate on the raw kernel matrix:
/// draws `t` uniformly, visits every element of `eligible` independently
/// with probability `t`, samples its indicator from the current conditioned
/// kernel, and applies the matching update. Returns the binary entropy of
/// the conditioned diagonal at `target`.
fn percolation_replicate<R: Rng>(
    base: &DMatrix<f64>,
    eligible: &[usize],
    target: usize,
    rng: &mut R,
) -> Result<f64> {
    let t: f64 = rng.gen();
    let mut m = base.clone();
    for &f in eligible {
        if f == target {
            continue;
        }
        if rng.gen::<f64>() >= t {
            continue;
        }
        let p = clip_probability(m[(f, f)])?;
        let include = match p {
            0.0 => false,
            1.0 => true,
            _ => rng.gen::<f64>() < p,
        };
        if include {
            include_in_place(&mut m, f)?;
        } else {
            exclude_in_place(&mut m, f)?;
        }
    }
    binary_entropy(clip_probability(m[(target, target)])?)
}

/// Local entropy of one marked element: the expected conditional entropy of
/// its indicator given the indicators of all elements with smaller i.i.d.
/// uniform label. Estimated by Bernoulli(t) percolation with `t` uniform,
/// which has the same law at the marked element.
pub fn hbar_percolation(
    k: &Kernel,
    element: usize,
    n_samples: usize,
    seed: u64,
) -> Result<EntropyEstimate> {
    if element >= k.size() {
        return Err(Error::BadParams(format!(
            "element {element} out of range (ground set has {} elements)",
            k.size()
        )));
    }
    if n_samples == 0 {
        return Err(Error::BadParams("hbar needs n_samples >= 1".into()));
    }
    let eligible: Vec<usize> = (0..k.size()).collect();
    let values: Vec<f64> = (0..n_samples as u64)
        .into_par_iter()
        .map(|i| {
            percolation_replicate(k.matrix(), &eligible, element, &mut rng::substream(seed, i))
        })
        .collect::<Result<_>>()?;
    Ok(EntropyEstimate::from_replicates(
        &values,
        Method::HbarPercolation,
    ))
}

/// Per-vertex local entropy: Monte-Carlo average over the given roots and
/// replicates of the summed local entropies of the root's elements, with
/// the percolation (and hence the conditioning) restricted to the radius-r
/// ball around the root in the kernel's base graph. `radius = None` means
/// no truncation; on a finite graph the value then estimates
/// `H(B) / |V(base)|` exactly, while finite radii give upper-bound
/// estimates that decrease in `r`.
///
/// Conditioning pivots all lie inside the ball, so each replicate runs on
/// the ball's principal submatrix; the truncated estimator depends on the
/// kernel only through that block.
pub fn hbar_graph_sum(
    k: &Kernel,
    roots: &[usize],
    radius: Option<usize>,
    n_samples: usize,
    seed: u64,
) -> Result<EntropyEstimate> {
    let base = k.ground().base();
    let labels = k.ground().label_count();
    if roots.is_empty() {
        return Err(Error::BadParams(
            "hbar_graph_sum needs at least one root".into(),
        ));
    }
    if n_samples == 0 {
        return Err(Error::BadParams(
            "hbar_graph_sum needs n_samples >= 1".into(),
        ));
    }
    for &v in roots {
        if v >= base.vertex_count() {
            return Err(Error::InvalidVertex {
                vertex: v,
                vertex_count: base.vertex_count(),
            });
        }
    }

    // Per root: the ball's element block and the positions of the root's
    // elements inside it.
    let mut blocks = Vec::with_capacity(roots.len());
    for &v in roots {
        let ids: Vec<usize> = match radius {
            Some(r) => {
                let b = ball(base, v, r)?;
                let mut vs = b.vertex_map.clone();
                vs.sort_unstable();
                vs.iter()
                    .flat_map(|&u| (0..labels).map(move |l| u * labels + l))
                    .collect()
            }
            None => (0..k.size()).collect(),
        };
        let positions: Vec<usize> = (0..labels)
            .map(|l| {
                ids.binary_search(&(v * labels + l))
                    .expect("root elements are inside their own ball")
            })
            .collect();
        let block = k.matrix().select_rows(&ids).select_columns(&ids);
        blocks.push((block, positions));
    }

    let per_root = n_samples as u64;
    let values: Vec<f64> = (0..roots.len() as u64 * per_root)
        .into_par_iter()
        .map(|job| {
            let root_idx = (job / per_root) as usize;
            let (block, positions) = &blocks[root_idx];
            let eligible: Vec<usize> = (0..block.nrows()).collect();
            let mut sum = 0.0;
            for (l, &pos) in positions.iter().enumerate() {
                let mut rng = rng::substream(seed, job * labels as u64 + l as u64);
                sum += percolation_replicate(block, &eligible, pos, &mut rng)?;
            }
            Ok(sum)
        })
        .collect::<Result<_>>()?;
    Ok(EntropyEstimate::from_replicates(&values, Method::HbarLocal))
}

/// Return-probability tree-entropy value at the given roots, truncated at
/// `k_max` walk steps: `log pi(o) - sum_{k<=k_max} p_k(o)/k`, with `p_k`
/// computed by the exact k-step transition recursion of the (weighted)
/// random walk. Returns the estimate and the last partial-sum increment as
/// a truncation indicator.
pub fn lyons_formula(g: &Graph, roots: &[usize], k_max: usize) -> Result<(EntropyEstimate, f64)> {
    if !g.is_connected() {
        return Err(Error::Disconnected);
    }
    if g.edge_count() == 0 {
        return Err(Error::EmptyGraph);
    }
    if k_max == 0 {
        return Err(Error::BadParams("lyons_formula needs k_max >= 1".into()));
    }
    if roots.is_empty() {
        return Err(Error::BadParams(
            "lyons_formula needs at least one root".into(),
        ));
    }
    for &v in roots {
        if v >= g.vertex_count() {
            return Err(Error::InvalidVertex {
                vertex: v,
                vertex_count: g.vertex_count(),
            });
        }
    }
    let n = g.vertex_count();
    let pi: Vec<f64> = (0..n).map(|v| g.weighted_degree(v)).collect();
    let results: Vec<(f64, f64)> = roots
        .par_iter()
        .map(|&o| {
            let mut x = vec![0.0f64; n];
            x[o] = 1.0;
            let mut sum = 0.0;
            let mut last = 0.0;
            let mut y = vec![0.0f64; n];
            for step in 1..=k_max {
                y.iter_mut().for_each(|v| *v = 0.0);
                for e in g.edges() {
                    y[e.v] += x[e.u] * e.weight / pi[e.u];
                    y[e.u] += x[e.v] * e.weight / pi[e.v];
                }
                std::mem::swap(&mut x, &mut y);
                last = x[o] / step as f64;
                sum += last;
            }
            (pi[o].ln() - sum, last)
        })
        .collect();
    let values: Vec<f64> = results.iter().map(|&(v, _)| v).collect();
    let last_increment = kahan_sum(results.iter().map(|&(_, l)| l)) / results.len() as f64;
    let mut est = EntropyEstimate::from_replicates(&values, Method::LyonsFormula);
    est.replicates = roots.len();
    Ok((est, last_increment))
}

/// Log of the weighted spanning-tree partition function, via the eigenvalue
/// product of the weighted Laplacian in the log domain: the sum of the logs
/// of the nonzero eigenvalues minus `log n`. Unweighted graphs get
/// `log tau(G)`.
pub fn matrix_tree_log_z(g: &Graph) -> Result<f64> {
    if !g.is_connected() {
        return Err(Error::Disconnected);
    }
    let n = g.vertex_count();
    if n <= 1 {
        return Ok(0.0);
    }
    let lap = weighted_laplacian(g);
    let mut eigenvalues: Vec<f64> = lap.symmetric_eigen().eigenvalues.iter().cloned().collect();
    eigenvalues.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let lambda_max = eigenvalues[n - 1];
    if eigenvalues[1] <= 1e-10 * lambda_max {
        return Err(Error::NumericalGuard(
            "Laplacian has more than one vanishing eigenvalue on a connected graph".to_string(),
        ));
    }
    Ok(kahan_sum(eigenvalues[1..].iter().map(|&l| l.ln())) - (n as f64).ln())
}
