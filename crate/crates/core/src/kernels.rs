//! Kernel construction, validation, and spectral inspection.
//!
//! A kernel is a dense symmetric real matrix indexed by a ground set
//! `V x K` (vertices of a base graph times a finite label set), classified
//! as an orthogonal projection or a positive contraction. The base graph
//! carries the distances used by locality statistics; the matrix carries
//! the probabilities.

use crate::error::{Error, Result};
use crate::graph::{line_graph, Graph};
use nalgebra::{DMatrix, DVector};

/// Max entrywise asymmetry accepted before rejecting a matrix.
pub const SYMMETRY_TOL: f64 = 1e-10;
/// Slack on the eigenvalue range `[0, 1]` accepted before clipping.
pub const EIGENVALUE_TOL: f64 = 1e-8;
/// Max entrywise `|M^2 - M|` for the projection classification.
pub const IDEMPOTENCE_TOL: f64 = 1e-8;
/// Laplacian eigenvalues below this fraction of the largest are treated as
/// zero by the pseudoinverse.
pub const PSEUDOINVERSE_RELATIVE_TOL: f64 = 1e-10;

/// The ground set `V x K`: vertices of a base graph times a label set,
/// totally ordered by (vertex index, label index).
#[derive(Debug, Clone, PartialEq)]
pub struct GroundSet {
    base: Graph,
    labels: Vec<String>,
}

impl GroundSet {
    pub fn new(base: Graph, labels: Vec<String>) -> Result<GroundSet> {
        if labels.is_empty() {
            return Err(Error::EmptyLabelSet);
        }
        let mut seen = std::collections::HashSet::new();
        for l in &labels {
            if !seen.insert(l) {
                return Err(Error::BadParams(format!("duplicate label `{l}`")));
            }
        }
        Ok(GroundSet { base, labels })
    }

    /// Ground set with the default singleton label set.
    pub fn singleton(base: Graph) -> GroundSet {
        GroundSet {
            base,
            labels: vec!["k0".to_string()],
        }
    }

    pub fn base(&self) -> &Graph {
        &self.base
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label_count(&self) -> usize {
        self.labels.len()
    }

    /// Number of elements, `|V| * |K|`.
    pub fn len(&self) -> usize {
        self.base.vertex_count() * self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Element index of `(vertex, label)`.
    pub fn index(&self, vertex: usize, label: usize) -> usize {
        debug_assert!(vertex < self.base.vertex_count() && label < self.labels.len());
        vertex * self.labels.len() + label
    }

    /// Inverse of [`GroundSet::index`].
    pub fn element(&self, index: usize) -> (usize, usize) {
        (index / self.labels.len(), index % self.labels.len())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelClass {
    Projection,
    Contraction,
}

impl KernelClass {
    pub fn as_str(self) -> &'static str {
        match self {
            KernelClass::Projection => "projection",
            KernelClass::Contraction => "contraction",
        }
    }
}

impl std::str::FromStr for KernelClass {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "projection" => Ok(KernelClass::Projection),
            "contraction" => Ok(KernelClass::Contraction),
            other => Err(Error::BadParams(format!("unknown kernel class `{other}`"))),
        }
    }
}

/// A validated symmetric kernel over a ground set.
#[derive(Debug, Clone)]
pub struct Kernel {
    ground: GroundSet,
    matrix: DMatrix<f64>,
    class: KernelClass,
}

impl Kernel {
    pub fn ground(&self) -> &GroundSet {
        &self.ground
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn class(&self) -> KernelClass {
        self.class
    }

    /// Number of ground-set elements (matrix dimension).
    pub fn size(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace()
    }

    /// Rank of a projection kernel, read off the trace.
    pub fn projection_rank(&self) -> Option<usize> {
        match self.class {
            KernelClass::Projection => Some(self.trace().round() as usize),
            KernelClass::Contraction => None,
        }
    }

    /// Wraps a matrix known to be a projection by construction: checks
    /// symmetry and idempotence, then classifies without an eigensolve.
    pub(crate) fn new_projection(ground: GroundSet, matrix: DMatrix<f64>) -> Result<Kernel> {
        check_dims(&matrix, &ground)?;
        check_symmetry(&matrix)?;
        let matrix = symmetrize(matrix);
        let dev = idempotence_deviation(&matrix);
        if dev > IDEMPOTENCE_TOL {
            return Err(Error::NumericalGuard(format!(
                "constructed projection fails idempotence: |M^2 - M| = {dev:e}"
            )));
        }
        Ok(Kernel {
            ground,
            matrix,
            class: KernelClass::Projection,
        })
    }

    /// Wraps a matrix known to be a contraction by construction (e.g. a
    /// principal submatrix of a validated kernel); classifies by the
    /// idempotence test only.
    pub(crate) fn new_contraction_unclipped(
        ground: GroundSet,
        matrix: DMatrix<f64>,
    ) -> Result<Kernel> {
        check_dims(&matrix, &ground)?;
        check_symmetry(&matrix)?;
        let matrix = symmetrize(matrix);
        let class = if idempotence_deviation(&matrix) <= IDEMPOTENCE_TOL {
            KernelClass::Projection
        } else {
            KernelClass::Contraction
        };
        Ok(Kernel {
            ground,
            matrix,
            class,
        })
    }
}

fn check_dims(matrix: &DMatrix<f64>, ground: &GroundSet) -> Result<()> {
    if matrix.nrows() != matrix.ncols() || matrix.nrows() != ground.len() {
        return Err(Error::BadParams(format!(
            "matrix is {}x{} but the ground set has {} elements",
            matrix.nrows(),
            matrix.ncols(),
            ground.len()
        )));
    }
    Ok(())
}

fn check_symmetry(matrix: &DMatrix<f64>) -> Result<()> {
    let n = matrix.nrows();
    for i in 0..n {
        for j in i + 1..n {
            let dev = (matrix[(i, j)] - matrix[(j, i)]).abs();
            if dev > SYMMETRY_TOL {
                return Err(Error::NotSymmetric {
                    i,
                    j,
                    deviation: dev,
                });
            }
        }
    }
    Ok(())
}

pub(crate) fn symmetrize(mut m: DMatrix<f64>) -> DMatrix<f64> {
    let n = m.nrows();
    for i in 0..n {
        for j in i + 1..n {
            let avg = 0.5 * (m[(i, j)] + m[(j, i)]);
            m[(i, j)] = avg;
            m[(j, i)] = avg;
        }
    }
    m
}

fn idempotence_deviation(m: &DMatrix<f64>) -> f64 {
    let sq = m * m;
    (sq - m).amax()
}

/// Validates and classifies a candidate kernel matrix.
///
/// Symmetry must hold to `1e-10` entrywise and all eigenvalues must lie in
/// `[-1e-8, 1 + 1e-8]`; eigenvalues are then clipped into `[0, 1]` and the
/// matrix reassembled, so downstream probability formulas see exact-range
/// inputs. The class is `projection` iff `|M^2 - M|` stays within `1e-8`.
pub fn validate_kernel(matrix: DMatrix<f64>, ground: GroundSet) -> Result<Kernel> {
    check_dims(&matrix, &ground)?;
    check_symmetry(&matrix)?;
    let matrix = symmetrize(matrix);
    let eigen = matrix.symmetric_eigen();
    for &lambda in eigen.eigenvalues.iter() {
        if !(-EIGENVALUE_TOL..=1.0 + EIGENVALUE_TOL).contains(&lambda) {
            return Err(Error::NotContraction { eigenvalue: lambda });
        }
    }
    let clipped = DVector::from_iterator(
        eigen.eigenvalues.len(),
        eigen.eigenvalues.iter().map(|&l| l.clamp(0.0, 1.0)),
    );
    let rebuilt =
        &eigen.eigenvectors * DMatrix::from_diagonal(&clipped) * eigen.eigenvectors.transpose();
    let rebuilt = symmetrize(rebuilt);
    let class = if idempotence_deviation(&rebuilt) <= IDEMPOTENCE_TOL {
        KernelClass::Projection
    } else {
        KernelClass::Contraction
    };
    Ok(Kernel {
        ground,
        matrix: rebuilt,
        class,
    })
}

/// Weighted graph Laplacian `L = A W A^T` (diagonal = weighted degrees).
pub fn weighted_laplacian(g: &Graph) -> DMatrix<f64> {
    let n = g.vertex_count();
    let mut l = DMatrix::zeros(n, n);
    for e in g.edges() {
        l[(e.u, e.u)] += e.weight;
        l[(e.v, e.v)] += e.weight;
        l[(e.u, e.v)] -= e.weight;
        l[(e.v, e.u)] -= e.weight;
    }
    l
}

/// Moore-Penrose pseudoinverse of a symmetric PSD matrix via its
/// eigendecomposition; eigenvalues below `1e-10 * lambda_max` count as zero.
pub(crate) fn symmetric_pseudoinverse(m: &DMatrix<f64>) -> DMatrix<f64> {
    let eigen = m.clone().symmetric_eigen();
    let lambda_max = eigen.eigenvalues.iter().cloned().fold(0.0_f64, f64::max);
    let cutoff = PSEUDOINVERSE_RELATIVE_TOL * lambda_max;
    let inv = DVector::from_iterator(
        eigen.eigenvalues.len(),
        eigen
            .eigenvalues
            .iter()
            .map(|&l| if l > cutoff { 1.0 / l } else { 0.0 }),
    );
    let rebuilt =
        &eigen.eigenvectors * DMatrix::from_diagonal(&inv) * eigen.eigenvectors.transpose();
    symmetrize(rebuilt)
}

/// Transfer-current projection of a connected graph: the orthogonal
/// projection onto the row space of the (weighted) oriented incidence
/// matrix. Its determinantal measure is the spanning-tree measure with
/// weights proportional to `prod w(e)`.
///
/// The ground set is the edge set of `g`, with the line graph of `g` as the
/// base graph, so locality statistics measure line-graph distances.
pub fn transfer_current(g: &Graph) -> Result<Kernel> {
    if g.edge_count() == 0 {
        return Err(Error::EmptyGraph);
    }
    if !g.is_connected() {
        return Err(Error::Disconnected);
    }
    let lap = weighted_laplacian(g);
    let lap_pinv = symmetric_pseudoinverse(&lap);
    let m = g.edge_count();
    let mut p = DMatrix::zeros(m, m);
    // P[e,f] = a_e^T L+ a_f with a_e = sqrt(w_e) (chi_v - chi_u); expanding
    // needs only four pseudoinverse entries per pair.
    for e in 0..m {
        let (eu, ev, we) = {
            let ed = &g.edges()[e];
            (ed.u, ed.v, ed.weight)
        };
        for f in e..m {
            let ed = &g.edges()[f];
            let (fu, fv, wf) = (ed.u, ed.v, ed.weight);
            let val = (we * wf).sqrt()
                * (lap_pinv[(ev, fv)] - lap_pinv[(ev, fu)] - lap_pinv[(eu, fv)]
                    + lap_pinv[(eu, fu)]);
            p[(e, f)] = val;
            p[(f, e)] = val;
        }
    }
    let (lg, _) = line_graph(g)?;
    Kernel::new_projection(GroundSet::singleton(lg), p)
}

/// Mirrored label names used by [`dilate`] for the added copy of `K`.
fn dilated_labels(labels: &[String]) -> Vec<String> {
    let mut out = labels.to_vec();
    out.extend(labels.iter().map(|l| format!("{l}~")));
    out
}

/// Standard projection dilation of a contraction: with `q(x) = sqrt(x(1-x))`
/// applied spectrally, the block operator
///
/// ```text
/// [ T      q(T)  ]
/// [ q(T)   I - T ]
/// ```
///
/// is an orthogonal projection on the doubled label set, and restricting it
/// back to the original labels returns `T` entrywise.
pub fn dilate(t: &Kernel) -> Result<Kernel> {
    let m = t.size();
    let k = t.ground().label_count();
    let eigen = t.matrix().clone().symmetric_eigen();
    let q_vals = DVector::from_iterator(
        m,
        eigen.eigenvalues.iter().map(|&l| {
            let l = l.clamp(0.0, 1.0);
            (l * (1.0 - l)).sqrt()
        }),
    );
    let q = symmetrize(
        &eigen.eigenvectors * DMatrix::from_diagonal(&q_vals) * eigen.eigenvectors.transpose(),
    );

    let ground = GroundSet::new(
        t.ground().base().clone(),
        dilated_labels(t.ground().labels()),
    )?;
    let k2 = 2 * k;
    let n = t.ground().base().vertex_count();
    let mut p = DMatrix::zeros(m * 2, m * 2);
    for v in 0..n {
        for a in 0..k2 {
            let row = v * k2 + a;
            for v2 in 0..n {
                for b in 0..k2 {
                    let col = v2 * k2 + b;
                    let old = |la: usize, lb: usize| (v * k + la, v2 * k + lb);
                    p[(row, col)] = match (a < k, b < k) {
                        (true, true) => {
                            let (i, j) = old(a, b);
                            t.matrix()[(i, j)]
                        }
                        (true, false) => {
                            let (i, j) = old(a, b - k);
                            q[(i, j)]
                        }
                        (false, true) => {
                            let (i, j) = old(a - k, b);
                            q[(i, j)]
                        }
                        (false, false) => {
                            let (i, j) = old(a - k, b - k);
                            let id = if i == j { 1.0 } else { 0.0 };
                            id - t.matrix()[(i, j)]
                        }
                    };
                }
            }
        }
    }
    Kernel::new_projection(ground, p)
}

/// Principal submatrix on the elements whose label index lies in `label_set`.
/// The result is a positive contraction on the reduced ground set.
pub fn restrict(k: &Kernel, label_set: &[usize]) -> Result<Kernel> {
    let mut labels: Vec<usize> = label_set.to_vec();
    labels.sort_unstable();
    labels.dedup();
    if labels.is_empty() {
        return Err(Error::EmptyLabelSet);
    }
    let kc = k.ground().label_count();
    if let Some(&bad) = labels.iter().find(|&&l| l >= kc) {
        return Err(Error::BadParams(format!(
            "label index {bad} out of range (kernel has {kc} labels)"
        )));
    }
    let n = k.ground().base().vertex_count();
    let indices: Vec<usize> = (0..n)
        .flat_map(|v| labels.iter().map(move |&l| v * kc + l))
        .collect();
    let sub = k.matrix().select_rows(&indices).select_columns(&indices);
    let names: Vec<String> = labels
        .iter()
        .map(|&l| k.ground().labels()[l].clone())
        .collect();
    let ground = GroundSet::new(k.ground().base().clone(), names)?;
    Kernel::new_contraction_unclipped(ground, sub)
}

/// Eigenvalues and the normalized trace of a kernel. Each eigenvalue
/// carries spectral-measure weight `1 / |V(base)|`, so the total mass of
/// the measure is `|K|`.
#[derive(Debug, Clone)]
pub struct SpectralSummary {
    /// Eigenvalues in ascending order.
    pub eigenvalues: Vec<f64>,
    /// `trace / |V(base)|`.
    pub normalized_trace: f64,
    /// Weight of each eigenvalue atom.
    pub atom_weight: f64,
}

pub fn spectral_summary(k: &Kernel) -> SpectralSummary {
    let eigen = k.matrix().clone().symmetric_eigen();
    let mut eigenvalues: Vec<f64> = eigen.eigenvalues.iter().cloned().collect();
    eigenvalues.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = k.ground().base().vertex_count() as f64;
    SpectralSummary {
        normalized_trace: eigenvalues.iter().sum::<f64>() / n,
        atom_weight: 1.0 / n,
        eigenvalues,
    }
}
