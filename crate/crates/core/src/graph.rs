//! Finite bounded-degree multigraphs, deterministic families, rooted balls,
//! line graphs, and oriented incidence matrices.
//!
//! Parallel edges are first-class: every edge carries a stable integer id
//! (its position in the edge list), so ground sets indexed by edges are
//! reproducible. Self-loops are rejected everywhere.

use crate::error::{Error, Result};
use crate::rng;
use nalgebra::DMatrix;
use rand::seq::SliceRandom;

/// One oriented, weighted edge. The stored direction is `u -> v`.
#[derive(Debug, Clone, PartialEq)]
pub struct Edge {
    pub u: usize,
    pub v: usize,
    pub weight: f64,
}

/// A finite undirected multigraph with a degree bound, optional positive
/// edge weights, and a fixed orientation per edge.
///
/// Immutable after construction.
#[derive(Debug, Clone)]
pub struct Graph {
    vertex_count: usize,
    degree_bound: usize,
    edges: Vec<Edge>,
    /// adjacency[v] = (neighbor, edge id), in edge-id order.
    adjacency: Vec<Vec<(usize, usize)>>,
}

impl PartialEq for Graph {
    fn eq(&self, other: &Self) -> bool {
        self.vertex_count == other.vertex_count
            && self.degree_bound == other.degree_bound
            && self.edges == other.edges
    }
}

impl Graph {
    /// Full constructor: explicit vertex count, bound, and weighted edge list.
    pub fn new(
        vertex_count: usize,
        degree_bound: usize,
        edges: Vec<(usize, usize, f64)>,
    ) -> Result<Graph> {
        let mut edge_list = Vec::with_capacity(edges.len());
        for &(u, v, w) in &edges {
            if u == v {
                return Err(Error::SelfLoop(u));
            }
            if u >= vertex_count || v >= vertex_count {
                return Err(Error::InvalidVertex {
                    vertex: u.max(v),
                    vertex_count,
                });
            }
            if w <= 0.0 || !w.is_finite() {
                return Err(Error::NonpositiveWeight { u, v, weight: w });
            }
            edge_list.push(Edge { u, v, weight: w });
        }
        let mut adjacency = vec![Vec::new(); vertex_count];
        for (id, e) in edge_list.iter().enumerate() {
            adjacency[e.u].push((e.v, id));
            adjacency[e.v].push((e.u, id));
        }
        for (v, nbrs) in adjacency.iter().enumerate() {
            if nbrs.len() > degree_bound {
                return Err(Error::DegreeBoundExceeded {
                    vertex: v,
                    degree: nbrs.len(),
                    bound: degree_bound,
                });
            }
        }
        Ok(Graph {
            vertex_count,
            degree_bound,
            edges: edge_list,
            adjacency,
        })
    }

    /// Graph with `vertex_count` vertices and no edges.
    pub fn edgeless(vertex_count: usize) -> Graph {
        Graph::new(vertex_count, 0, Vec::new()).expect("edgeless graph is always valid")
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn degree_bound(&self) -> usize {
        self.degree_bound
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Degree of `v`, counting parallel edges with multiplicity.
    pub fn degree(&self, v: usize) -> usize {
        self.adjacency[v].len()
    }

    /// Total weight of the edges incident to `v`.
    pub fn weighted_degree(&self, v: usize) -> f64 {
        self.adjacency[v]
            .iter()
            .map(|&(_, id)| self.edges[id].weight)
            .sum()
    }

    /// Neighbors of `v` as (neighbor, edge id) pairs, in edge-id order.
    pub fn neighbors(&self, v: usize) -> &[(usize, usize)] {
        &self.adjacency[v]
    }

    pub fn is_weighted(&self) -> bool {
        self.edges.iter().any(|e| e.weight != 1.0)
    }

    /// BFS distances from `root`; `None` for unreachable vertices.
    pub fn distances_from(&self, root: usize) -> Result<Vec<Option<usize>>> {
        if root >= self.vertex_count {
            return Err(Error::InvalidVertex {
                vertex: root,
                vertex_count: self.vertex_count,
            });
        }
        let mut dist = vec![None; self.vertex_count];
        dist[root] = Some(0);
        let mut queue = std::collections::VecDeque::from([root]);
        while let Some(u) = queue.pop_front() {
            let du = dist[u].unwrap();
            for &(w, _) in &self.adjacency[u] {
                if dist[w].is_none() {
                    dist[w] = Some(du + 1);
                    queue.push_back(w);
                }
            }
        }
        Ok(dist)
    }

    pub fn is_connected(&self) -> bool {
        if self.vertex_count == 0 {
            return true;
        }
        self.distances_from(0)
            .map(|d| d.iter().all(|x| x.is_some()))
            .unwrap_or(false)
    }

    /// Renders the text format: a `graph <n> <D>` header, one `u v [w]` line
    /// per edge in id order. Weights are printed only when not 1.
    pub fn to_text(&self) -> String {
        let mut out = format!("graph {} {}\n", self.vertex_count, self.degree_bound);
        for e in &self.edges {
            if e.weight == 1.0 {
                out.push_str(&format!("{} {}\n", e.u, e.v));
            } else {
                out.push_str(&format!("{} {} {}\n", e.u, e.v, e.weight));
            }
        }
        out
    }

    /// Parses the text format. `path` is used only in error messages.
    pub fn from_text(text: &str, path: &str) -> Result<Graph> {
        let parse_err = |line: usize, message: String| Error::ParseGraph {
            path: path.to_string(),
            line,
            message,
        };
        let mut header: Option<(usize, usize)> = None;
        let mut edges = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            if header.is_none() {
                if fields.len() != 3 || fields[0] != "graph" {
                    return Err(parse_err(
                        line_no,
                        format!(
                            "expected header `graph <n_vertices> <degree_bound>`, got `{line}`"
                        ),
                    ));
                }
                let n = fields[1]
                    .parse::<usize>()
                    .map_err(|e| parse_err(line_no, format!("bad vertex count: {e}")))?;
                let d = fields[2]
                    .parse::<usize>()
                    .map_err(|e| parse_err(line_no, format!("bad degree bound: {e}")))?;
                header = Some((n, d));
            } else {
                if fields.len() != 2 && fields.len() != 3 {
                    return Err(parse_err(
                        line_no,
                        format!("expected `u v [w]`, got `{line}`"),
                    ));
                }
                let u = fields[0]
                    .parse::<usize>()
                    .map_err(|e| parse_err(line_no, format!("bad vertex: {e}")))?;
                let v = fields[1]
                    .parse::<usize>()
                    .map_err(|e| parse_err(line_no, format!("bad vertex: {e}")))?;
                let w = if fields.len() == 3 {
                    fields[2]
                        .parse::<f64>()
                        .map_err(|e| parse_err(line_no, format!("bad weight: {e}")))?
                } else {
                    1.0
                };
                edges.push((u, v, w));
            }
        }
        let (n, d) = header.ok_or_else(|| parse_err(1, "missing `graph` header".to_string()))?;
        Graph::new(n, d, edges)
    }
}

/// Unweighted construction from an edge list. The vertex count is one plus
/// the largest index mentioned; the stored orientation is the listed order.
pub fn build_graph(edge_list: &[(usize, usize)], degree_bound: usize) -> Result<Graph> {
    let n = edge_list
        .iter()
        .map(|&(u, v)| u.max(v) + 1)
        .max()
        .unwrap_or(0);
    Graph::new(
        n,
        degree_bound,
        edge_list.iter().map(|&(u, v)| (u, v, 1.0)).collect(),
    )
}

/// Weighted variant of [`build_graph`].
pub fn build_weighted_graph(
    edge_list: &[(usize, usize, f64)],
    degree_bound: usize,
) -> Result<Graph> {
    let n = edge_list
        .iter()
        .map(|&(u, v, _)| u.max(v) + 1)
        .max()
        .unwrap_or(0);
    Graph::new(n, degree_bound, edge_list.to_vec())
}

/// Deterministic graph families. Generated edge lists orient `u -> v` with
/// `u < v` and are identical across calls with equal parameters.
#[derive(Debug, Clone, PartialEq)]
pub enum Family {
    Cycle { n: usize },
    Path { n: usize },
    Complete { n: usize },
    Torus2d { side: usize },
    DoubledStar,
    Hypercube { dim: usize },
    RandomRegular { n: usize, d: usize, seed: u64 },
}

/// Builds a member of a named family.
pub fn generate_family(family: &Family) -> Result<Graph> {
    match *family {
        Family::Cycle { n } => {
            if n < 3 {
                return Err(Error::BadParams(format!("cycle needs n >= 3, got {n}")));
            }
            let edges = (0..n)
                .map(|i| (i.min((i + 1) % n), i.max((i + 1) % n)))
                .collect::<Vec<_>>();
            build_graph(&edges, 2)
        }
        Family::Path { n } => {
            if n < 2 {
                return Err(Error::BadParams(format!("path needs n >= 2, got {n}")));
            }
            let edges: Vec<_> = (0..n - 1).map(|i| (i, i + 1)).collect();
            build_graph(&edges, 2)
        }
        Family::Complete { n } => {
            if n < 2 {
                return Err(Error::BadParams(format!("complete needs n >= 2, got {n}")));
            }
            let mut edges = Vec::new();
            for u in 0..n {
                for v in u + 1..n {
                    edges.push((u, v));
                }
            }
            build_graph(&edges, n - 1)
        }
        Family::Torus2d { side } => {
            if side < 3 {
                return Err(Error::BadParams(format!(
                    "torus2d needs side >= 3 to stay simple, got {side}"
                )));
            }
            let at = |i: usize, j: usize| (i % side) * side + (j % side);
            let mut edges = Vec::new();
            for i in 0..side {
                for j in 0..side {
                    let a = at(i, j);
                    let right = at(i, j + 1);
                    let down = at(i + 1, j);
                    edges.push((a.min(right), a.max(right)));
                    edges.push((a.min(down), a.max(down)));
                }
            }
            build_graph(&edges, 4)
        }
        Family::DoubledStar => {
            // A star with three spokes, each spoke doubled.
            let edges = [(0, 1), (0, 1), (0, 2), (0, 2), (0, 3), (0, 3)];
            build_graph(&edges, 6)
        }
        Family::Hypercube { dim } => {
            if dim == 0 {
                return Err(Error::BadParams("hypercube needs dim >= 1".to_string()));
            }
            let n = 1usize << dim;
            let mut edges = Vec::new();
            for u in 0..n {
                for b in 0..dim {
                    let v = u ^ (1 << b);
                    if u < v {
                        edges.push((u, v));
                    }
                }
            }
            build_graph(&edges, dim)
        }
        Family::RandomRegular { n, d, seed } => random_regular(n, d, seed),
    }
}

/// Configuration model with rejection of self-loops and multi-edges.
fn random_regular(n: usize, d: usize, seed: u64) -> Result<Graph> {
    if d == 0 || n <= d || !(n * d).is_multiple_of(2) {
        return Err(Error::BadParams(format!(
            "random_regular needs 0 < d < n and n*d even, got n={n} d={d}"
        )));
    }
    let mut rng = rng::stream(seed);
    let mut stubs: Vec<usize> = (0..n).flat_map(|v| std::iter::repeat_n(v, d)).collect();
    'attempt: for _ in 0..1000 {
        stubs.shuffle(&mut rng);
        let mut seen = std::collections::HashSet::new();
        let mut edges = Vec::with_capacity(n * d / 2);
        for pair in stubs.chunks_exact(2) {
            let (u, v) = (pair[0].min(pair[1]), pair[0].max(pair[1]));
            if u == v || !seen.insert((u, v)) {
                continue 'attempt;
            }
            edges.push((u, v));
        }
        edges.sort_unstable();
        return build_graph(&edges, d);
    }
    Err(Error::BadParams(format!(
        "random_regular(n={n}, d={d}) found no simple pairing in 1000 attempts"
    )))
}

/// The induced subgraph on all vertices within distance `radius` of a root.
///
/// Ball vertices are ordered by (distance from root, original index), so the
/// root is always local vertex 0 and the layout is reproducible.
#[derive(Debug, Clone)]
pub struct RootedBall {
    pub ball_graph: Graph,
    pub root: usize,
    pub radius: usize,
    /// Ball vertex -> original vertex.
    pub vertex_map: Vec<usize>,
    /// Distance from the root per ball vertex.
    pub distances: Vec<usize>,
}

/// BFS ball of `radius` around `root`.
pub fn ball(g: &Graph, root: usize, radius: usize) -> Result<RootedBall> {
    let dist = g.distances_from(root)?;
    let mut members: Vec<(usize, usize)> = dist
        .iter()
        .enumerate()
        .filter_map(|(v, d)| d.filter(|&d| d <= radius).map(|d| (d, v)))
        .collect();
    members.sort_unstable();
    let vertex_map: Vec<usize> = members.iter().map(|&(_, v)| v).collect();
    let distances: Vec<usize> = members.iter().map(|&(d, _)| d).collect();
    let mut local = vec![usize::MAX; g.vertex_count()];
    for (i, &v) in vertex_map.iter().enumerate() {
        local[v] = i;
    }
    let edges: Vec<(usize, usize, f64)> = g
        .edges()
        .iter()
        .filter(|e| local[e.u] != usize::MAX && local[e.v] != usize::MAX)
        .map(|e| (local[e.u], local[e.v], e.weight))
        .collect();
    let ball_graph = Graph::new(vertex_map.len(), g.degree_bound(), edges)?;
    Ok(RootedBall {
        ball_graph,
        root: 0,
        radius,
        vertex_map,
        distances,
    })
}

/// The line graph: one vertex per edge of `g`, one edge per shared endpoint
/// (so a parallel pair, sharing both endpoints, is joined by two edges).
/// Also returns the map from edge ids of `g` to vertices of the line graph,
/// which is the identity under this construction.
pub fn line_graph(g: &Graph) -> Result<(Graph, Vec<usize>)> {
    let m = g.edge_count();
    if m == 0 {
        return Err(Error::EmptyGraph);
    }
    let mut edges = Vec::new();
    for e in 0..m {
        let (eu, ev) = (g.edges()[e].u, g.edges()[e].v);
        for f in e + 1..m {
            let (fu, fv) = (g.edges()[f].u, g.edges()[f].v);
            let shared = [eu, ev]
                .iter()
                .map(|&x| (x == fu) as usize + (x == fv) as usize)
                .sum::<usize>();
            for _ in 0..shared {
                edges.push((e, f, 1.0));
            }
        }
    }
    let bound = 2 * g.degree_bound().saturating_sub(1);
    let lg = Graph::new(m, bound, edges)?;
    Ok((lg, (0..m).collect()))
}

/// Oriented vertex-edge incidence matrix: column `e` of edge `u -> v` holds
/// `-1` at `u` and `+1` at `v` (scaled by `sqrt(w(e))` in the weighted
/// variant).
#[derive(Debug, Clone)]
pub struct IncidenceMatrix {
    matrix: DMatrix<f64>,
}

impl IncidenceMatrix {
    pub fn unweighted(g: &Graph) -> IncidenceMatrix {
        Self::build(g, false)
    }

    pub fn weighted(g: &Graph) -> IncidenceMatrix {
        Self::build(g, true)
    }

    fn build(g: &Graph, weighted: bool) -> IncidenceMatrix {
        let mut matrix = DMatrix::zeros(g.vertex_count(), g.edge_count());
        for (id, e) in g.edges().iter().enumerate() {
            let s = if weighted { e.weight.sqrt() } else { 1.0 };
            matrix[(e.u, id)] = -s;
            matrix[(e.v, id)] = s;
        }
        IncidenceMatrix { matrix }
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }
}

/// Shorthand for [`IncidenceMatrix::unweighted`].
pub fn incidence_matrix(g: &Graph) -> IncidenceMatrix {
    IncidenceMatrix::unweighted(g)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn build_triangle() {
        let g = build_graph(&[(0, 1), (1, 2), (2, 0)], 4).unwrap();
        assert_eq!(g.vertex_count(), 3);
        assert_eq!(g.edge_count(), 3);
        assert!(g.is_connected());
        assert_eq!(g.degree(0), 2);
    }

    #[test]
    fn build_single_edge() {
        let g = build_graph(&[(0, 1)], 1).unwrap();
        assert_eq!(g.vertex_count(), 2);
        assert_eq!(g.edge_count(), 1);
    }

    #[test]
    fn self_loop_rejected() {
        assert!(matches!(build_graph(&[(0, 0)], 4), Err(Error::SelfLoop(0))));
    }

    #[test]
    fn degree_bound_enforced() {
        let err = build_graph(&[(0, 1), (0, 2), (0, 3)], 2).unwrap_err();
        assert!(matches!(
            err,
            Error::DegreeBoundExceeded {
                vertex: 0,
                degree: 3,
                bound: 2
            }
        ));
    }

    #[test]
    fn nonpositive_weight_rejected() {
        assert!(matches!(
            build_weighted_graph(&[(0, 1, 0.0)], 2),
            Err(Error::NonpositiveWeight { .. })
        ));
        assert!(matches!(
            build_weighted_graph(&[(0, 1, -1.5)], 2),
            Err(Error::NonpositiveWeight { .. })
        ));
    }

    #[test]
    fn complete_four() {
        let g = generate_family(&Family::Complete { n: 4 }).unwrap();
        assert_eq!(g.vertex_count(), 4);
        assert_eq!(g.edge_count(), 6);
        assert!((0..4).all(|v| g.degree(v) == 3));
    }

    #[test]
    fn doubled_star_shape() {
        let g = generate_family(&Family::DoubledStar).unwrap();
        assert_eq!(g.vertex_count(), 4);
        assert_eq!(g.edge_count(), 6);
        assert_eq!(g.degree(0), 6);
        // Three parallel pairs.
        let mut pairs = std::collections::HashMap::new();
        for e in g.edges() {
            *pairs.entry((e.u, e.v)).or_insert(0) += 1;
        }
        assert_eq!(pairs.len(), 3);
        assert!(pairs.values().all(|&c| c == 2));
    }

    #[test]
    fn torus_is_four_regular() {
        let g = generate_family(&Family::Torus2d { side: 3 }).unwrap();
        assert_eq!(g.vertex_count(), 9);
        assert_eq!(g.edge_count(), 18);
        assert!((0..9).all(|v| g.degree(v) == 4));
        assert!(matches!(
            generate_family(&Family::Torus2d { side: 2 }),
            Err(Error::BadParams(_))
        ));
    }

    #[test]
    fn hypercube_three() {
        let g = generate_family(&Family::Hypercube { dim: 3 }).unwrap();
        assert_eq!(g.vertex_count(), 8);
        assert_eq!(g.edge_count(), 12);
        assert!((0..8).all(|v| g.degree(v) == 3));
    }

    #[test]
    fn random_regular_is_regular_and_deterministic() {
        let f = Family::RandomRegular {
            n: 10,
            d: 3,
            seed: 42,
        };
        let g = generate_family(&f).unwrap();
        assert!((0..10).all(|v| g.degree(v) == 3));
        let h = generate_family(&f).unwrap();
        assert_eq!(g, h);
        assert!(matches!(
            generate_family(&Family::RandomRegular {
                n: 5,
                d: 3,
                seed: 1
            }),
            Err(Error::BadParams(_))
        ));
    }

    #[test]
    fn families_are_deterministic() {
        for f in [
            Family::Cycle { n: 7 },
            Family::Path { n: 5 },
            Family::Complete { n: 5 },
            Family::Torus2d { side: 4 },
            Family::DoubledStar,
            Family::Hypercube { dim: 4 },
        ] {
            assert_eq!(generate_family(&f).unwrap(), generate_family(&f).unwrap());
        }
    }

    #[test]
    fn ball_radius_zero() {
        let g = generate_family(&Family::Cycle { n: 6 }).unwrap();
        let b = ball(&g, 0, 0).unwrap();
        assert_eq!(b.vertex_map, vec![0]);
        assert_eq!(b.ball_graph.edge_count(), 0);
    }

    #[test]
    fn ball_on_cycle() {
        let g = generate_family(&Family::Cycle { n: 6 }).unwrap();
        let b = ball(&g, 0, 2).unwrap();
        let mut verts = b.vertex_map.clone();
        verts.sort_unstable();
        assert_eq!(verts, vec![0, 1, 2, 4, 5]);
        // A path: 4 edges among 5 vertices.
        assert_eq!(b.ball_graph.edge_count(), 4);
        assert_eq!(b.vertex_map[b.root], 0);
        assert_eq!(b.distances[b.root], 0);
    }

    #[test]
    fn ball_covers_k4_at_radius_one() {
        let g = generate_family(&Family::Complete { n: 4 }).unwrap();
        let b = ball(&g, 0, 1).unwrap();
        assert_eq!(b.vertex_map.len(), 4);
        assert_eq!(b.ball_graph.edge_count(), 6);
    }

    #[test]
    fn ball_matches_independent_bfs() {
        // Second, simpler BFS to cross-check the vertex set.
        let g = generate_family(&Family::RandomRegular {
            n: 16,
            d: 3,
            seed: 9,
        })
        .unwrap();
        for root in [0, 5, 11] {
            for r in 0..4 {
                let b = ball(&g, root, r).unwrap();
                let mut expected: Vec<usize> = (0..g.vertex_count())
                    .filter(|&v| {
                        let mut frontier = vec![root];
                        let mut seen = vec![false; g.vertex_count()];
                        seen[root] = true;
                        for _ in 0..r {
                            let mut next = Vec::new();
                            for &u in &frontier {
                                for &(w, _) in g.neighbors(u) {
                                    if !seen[w] {
                                        seen[w] = true;
                                        next.push(w);
                                    }
                                }
                            }
                            frontier = next;
                        }
                        seen[v]
                    })
                    .collect();
                expected.sort_unstable();
                let mut got = b.vertex_map.clone();
                got.sort_unstable();
                assert_eq!(got, expected);
            }
        }
    }

    #[test]
    fn invalid_ball_root() {
        let g = generate_family(&Family::Cycle { n: 3 }).unwrap();
        assert!(matches!(ball(&g, 9, 1), Err(Error::InvalidVertex { .. })));
    }

    #[test]
    fn line_graph_of_triangle_is_triangle() {
        let g = generate_family(&Family::Cycle { n: 3 }).unwrap();
        let (lg, map) = line_graph(&g).unwrap();
        assert_eq!(map, vec![0, 1, 2]);
        assert_eq!(lg.vertex_count(), 3);
        assert_eq!(lg.edge_count(), 3);
    }

    #[test]
    fn line_graph_of_k4_is_octahedron() {
        let g = generate_family(&Family::Complete { n: 4 }).unwrap();
        let (lg, _) = line_graph(&g).unwrap();
        assert_eq!(lg.vertex_count(), 6);
        assert_eq!(lg.edge_count(), 12);
        assert!((0..6).all(|v| lg.degree(v) == 4));
    }

    #[test]
    fn line_graph_of_single_edge() {
        let g = build_graph(&[(0, 1)], 1).unwrap();
        let (lg, _) = line_graph(&g).unwrap();
        assert_eq!(lg.vertex_count(), 1);
        assert_eq!(lg.edge_count(), 0);
    }

    #[test]
    fn line_graph_parallel_edges_count_both_endpoints() {
        let g = generate_family(&Family::DoubledStar).unwrap();
        let (lg, _) = line_graph(&g).unwrap();
        // 15 pairs share the center once; 3 parallel pairs share a leaf too.
        assert_eq!(lg.edge_count(), 18);
    }

    #[test]
    fn line_graph_degree_formula_on_simple_graphs() {
        let g = generate_family(&Family::RandomRegular {
            n: 12,
            d: 3,
            seed: 3,
        })
        .unwrap();
        let (lg, _) = line_graph(&g).unwrap();
        for (id, e) in g.edges().iter().enumerate() {
            assert_eq!(lg.degree(id), g.degree(e.u) + g.degree(e.v) - 2);
        }
    }

    #[test]
    fn line_graph_of_edgeless_errors() {
        assert!(matches!(
            line_graph(&Graph::edgeless(3)),
            Err(Error::EmptyGraph)
        ));
    }

    #[test]
    fn incidence_sign_convention() {
        let g = build_graph(&[(0, 1)], 1).unwrap();
        let inc = incidence_matrix(&g);
        assert_eq!(inc.matrix()[(0, 0)], -1.0);
        assert_eq!(inc.matrix()[(1, 0)], 1.0);
    }

    #[test]
    fn incidence_columns_sum_to_zero() {
        let g = generate_family(&Family::Torus2d { side: 3 }).unwrap();
        let inc = incidence_matrix(&g);
        for c in 0..g.edge_count() {
            assert_eq!(inc.matrix().column(c).sum(), 0.0);
        }
    }

    #[test]
    fn incidence_rank_is_vertices_minus_one() {
        let g = generate_family(&Family::Complete { n: 4 }).unwrap();
        let inc = incidence_matrix(&g);
        assert_eq!(inc.matrix().clone().rank(1e-10), 3);
    }

    #[test]
    fn weighted_incidence_scales_columns() {
        let g = build_weighted_graph(&[(0, 1, 4.0)], 1).unwrap();
        let inc = IncidenceMatrix::weighted(&g);
        assert_eq!(inc.matrix()[(0, 0)], -2.0);
        assert_eq!(inc.matrix()[(1, 0)], 2.0);
    }

    #[test]
    fn text_round_trip() {
        let g = build_weighted_graph(&[(0, 1, 1.0), (1, 2, 2.5), (0, 2, 1.0)], 3).unwrap();
        let text = g.to_text();
        let h = Graph::from_text(&text, "mem").unwrap();
        assert_eq!(g, h);
    }

    #[test]
    fn text_parses_comments_and_blanks() {
        let text = "# a triangle\n\ngraph 3 2\n0 1\n1 2 # second\n0 2\n";
        let g = Graph::from_text(text, "mem").unwrap();
        assert_eq!(g.vertex_count(), 3);
        assert_eq!(g.edge_count(), 3);
    }

    #[test]
    fn text_errors_carry_line_numbers() {
        let err = Graph::from_text("graph 3 2\n0 x\n", "bad.gr").unwrap_err();
        match err {
            Error::ParseGraph { path, line, .. } => {
                assert_eq!(path, "bad.gr");
                assert_eq!(line, 2);
            }
            other => panic!("unexpected error {other:?}"),
        }
    }
}
