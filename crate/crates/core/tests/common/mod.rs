//! Shared oracles for the integration suites: brute-force spanning-tree
//! enumeration, independent total-variation arithmetic on subset pmfs, and
//! seeded random kernel generators. Everything here is independent of the
//! kernel/conditioning code paths it is used to check.
#![allow(dead_code)]

use detent_core::graph::{build_weighted_graph, generate_family, Family, Graph};
use detent_core::kernels::{validate_kernel, GroundSet, Kernel};
use detent_core::rng;
use nalgebra::DMatrix;
use rand::Rng;

/// All spanning trees of `g` as edge-id bitmasks, by exhaustive search over
/// (n-1)-subsets with a union-find spanning check.
pub fn spanning_tree_masks(g: &Graph) -> Vec<u32> {
    let n = g.vertex_count();
    let m = g.edge_count();
    assert!(m <= 24, "oracle meant for tiny graphs");
    if n <= 1 {
        return vec![0];
    }
    let mut trees = Vec::new();
    let mut choose = vec![0usize; n - 1];
    fn rec(g: &Graph, choose: &mut Vec<usize>, depth: usize, start: usize, trees: &mut Vec<u32>) {
        let need = choose.len();
        if depth == need {
            let mut parent: Vec<usize> = (0..g.vertex_count()).collect();
            fn find(parent: &mut [usize], mut x: usize) -> usize {
                while parent[x] != x {
                    parent[x] = parent[parent[x]];
                    x = parent[x];
                }
                x
            }
            let mut components = g.vertex_count();
            for &e in choose.iter() {
                let (a, b) = (g.edges()[e].u, g.edges()[e].v);
                let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
                if ra == rb {
                    return;
                }
                parent[ra] = rb;
                components -= 1;
            }
            if components == 1 {
                trees.push(choose.iter().fold(0u32, |mask, &e| mask | (1 << e)));
            }
            return;
        }
        for e in start..g.edge_count() {
            choose[depth] = e;
            rec(g, choose, depth + 1, e + 1, trees);
        }
    }
    rec(g, &mut choose, 0, 0, &mut trees);
    trees.sort_unstable();
    trees
}

pub fn subset_weight(g: &Graph, mask: u32) -> f64 {
    (0..g.edge_count())
        .filter(|&e| mask >> e & 1 == 1)
        .map(|e| g.edges()[e].weight)
        .product()
}

/// The spanning-tree measure as `(mask, probability)` pairs, ascending.
pub fn tree_pmf(g: &Graph) -> Vec<(u32, f64)> {
    let trees = spanning_tree_masks(g);
    let z: f64 = trees.iter().map(|&t| subset_weight(g, t)).sum();
    trees
        .into_iter()
        .map(|t| (t, subset_weight(g, t) / z))
        .collect()
}

/// Total variation distance between two mask pmfs (sorted by mask).
pub fn tv_masks(a: &[(u32, f64)], b: &[(u32, f64)]) -> f64 {
    let mut tv = 0.0;
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        match (a.get(i), b.get(j)) {
            (Some(&(ma, pa)), Some(&(mb, pb))) if ma == mb => {
                tv += (pa - pb).abs();
                i += 1;
                j += 1;
            }
            (Some(&(ma, pa)), Some(&(mb, _))) if ma < mb => {
                tv += pa;
                i += 1;
            }
            (Some(_), Some(&(_, pb))) => {
                tv += pb;
                j += 1;
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

fn random_matrix(rows: usize, cols: usize, rng: &mut impl Rng) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| rng.gen_range(-1.0..1.0))
}

/// Random rank-`rank` orthogonal projection kernel on an edgeless base.
pub fn random_projection_kernel(size: usize, rank: usize, seed: u64) -> Kernel {
    assert!(rank <= size);
    let mut rng = rng::stream(seed);
    let q = nalgebra::linalg::QR::new(random_matrix(size, rank, &mut rng)).q();
    let p = &q * q.transpose();
    validate_kernel(p, GroundSet::singleton(Graph::edgeless(size))).expect("qr projection")
}

/// Random positive contraction with eigenvalues uniform in [margin, 1-margin].
pub fn random_contraction_kernel(size: usize, seed: u64, margin: f64) -> Kernel {
    let mut rng = rng::stream(seed);
    let q = nalgebra::linalg::QR::new(random_matrix(size, size, &mut rng)).q();
    let eigenvalues = DMatrix::from_diagonal(&nalgebra::DVector::from_fn(size, |_, _| {
        rng.gen_range(margin..1.0 - margin)
    }));
    let t = &q * eigenvalues * q.transpose();
    validate_kernel(t, GroundSet::singleton(Graph::edgeless(size))).expect("contraction")
}

/// Random connected weighted graph: a random spanning path plus extra
/// random edges, weights uniform in `[w_lo, w_hi]`.
pub fn random_connected_weighted_graph(
    n: usize,
    extra_edges: usize,
    w_lo: f64,
    w_hi: f64,
    seed: u64,
) -> Graph {
    let mut rng = rng::stream(seed);
    let mut order: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        let j = rng.gen_range(0..=i);
        order.swap(i, j);
    }
    let mut edges: Vec<(usize, usize, f64)> = Vec::new();
    let mut seen = std::collections::HashSet::new();
    for w in order.windows(2) {
        let (a, b) = (w[0].min(w[1]), w[0].max(w[1]));
        seen.insert((a, b));
        edges.push((a, b, rng.gen_range(w_lo..w_hi)));
    }
    let mut attempts = 0;
    while edges.len() < n - 1 + extra_edges && attempts < 200 {
        attempts += 1;
        let a = rng.gen_range(0..n);
        let b = rng.gen_range(0..n);
        if a == b {
            continue;
        }
        let key = (a.min(b), a.max(b));
        if seen.insert(key) {
            edges.push((key.0, key.1, rng.gen_range(w_lo..w_hi)));
        }
    }
    build_weighted_graph(&edges, n - 1).expect("random graph")
}

/// A fixed list of connected graphs on at most 6 vertices, >= 20 entries.
pub fn small_graph_list() -> Vec<(&'static str, Graph)> {
    let build = |edges: &[(usize, usize)], bound: usize| {
        detent_core::graph::build_graph(edges, bound).unwrap()
    };
    let mut out: Vec<(&'static str, Graph)> = vec![
        ("p2", build(&[(0, 1)], 1)),
        ("p3", build(&[(0, 1), (1, 2)], 2)),
        ("p4", build(&[(0, 1), (1, 2), (2, 3)], 2)),
        ("p5", build(&[(0, 1), (1, 2), (2, 3), (3, 4)], 2)),
        ("star3", build(&[(0, 1), (0, 2), (0, 3)], 3)),
        ("star4", build(&[(0, 1), (0, 2), (0, 3), (0, 4)], 4)),
        ("star5", build(&[(0, 1), (0, 2), (0, 3), (0, 4), (0, 5)], 5)),
        ("paw", build(&[(0, 1), (1, 2), (2, 0), (2, 3)], 3)),
        (
            "diamond",
            build(&[(0, 1), (1, 2), (2, 0), (0, 3), (2, 3)], 3),
        ),
        ("bull", build(&[(0, 1), (1, 2), (2, 0), (0, 3), (1, 4)], 3)),
        (
            "butterfly",
            build(&[(0, 1), (1, 2), (2, 0), (0, 3), (0, 4), (3, 4)], 4),
        ),
        (
            "house",
            build(&[(0, 1), (1, 2), (2, 3), (3, 4), (4, 0), (2, 4)], 3),
        ),
        (
            "k23",
            build(&[(0, 2), (0, 3), (0, 4), (1, 2), (1, 3), (1, 4)], 3),
        ),
        (
            "wheel5",
            build(
                &[
                    (0, 1),
                    (0, 2),
                    (0, 3),
                    (0, 4),
                    (1, 2),
                    (2, 3),
                    (3, 4),
                    (4, 1),
                ],
                4,
            ),
        ),
        (
            "prism",
            build(
                &[
                    (0, 1),
                    (1, 2),
                    (2, 0),
                    (3, 4),
                    (4, 5),
                    (5, 3),
                    (0, 3),
                    (1, 4),
                    (2, 5),
                ],
                3,
            ),
        ),
        (
            "k33",
            build(
                &[
                    (0, 3),
                    (0, 4),
                    (0, 5),
                    (1, 3),
                    (1, 4),
                    (1, 5),
                    (2, 3),
                    (2, 4),
                    (2, 5),
                ],
                3,
            ),
        ),
        (
            "parallel_triangle",
            build(&[(0, 1), (0, 1), (1, 2), (2, 0)], 3),
        ),
    ];
    for n in [3usize, 4, 5, 6] {
        let g = generate_family(&Family::Cycle { n }).unwrap();
        out.push((Box::leak(format!("c{n}").into_boxed_str()), g));
    }
    for n in [4usize, 5, 6] {
        let g = generate_family(&Family::Complete { n }).unwrap();
        out.push((Box::leak(format!("k{n}").into_boxed_str()), g));
    }
    out.push((
        "doubled_star",
        generate_family(&Family::DoubledStar).unwrap(),
    ));
    out
}
