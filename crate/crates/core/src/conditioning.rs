//! Conditional kernels and the permitted-pair predicates.
//!
//! Conditioning a projection DPP on "the elements of `C` are present and the
//! elements of `D` are absent" is an event of positive probability exactly
//! when the pair is permitted: the Gram matrix of the kernel on `C` and the
//! Gram matrix of the complementary kernel on `D` are both nonsingular. The
//! conditioned law is again determinantal, with a projection kernel obtained
//! by rank-one updates, one conditioned element at a time.

use crate::error::{Error, Result};
use crate::kernels::{Kernel, KernelClass};
use nalgebra::DMatrix;

/// Gram eigenvalues at or below this threshold count as singular; this is
/// also the smallest pivot accepted by an elimination step. Matches the
/// pseudoinverse threshold so the two notions of rank agree.
pub const INDEPENDENCE_TOL: f64 = 1e-10;

/// Disjoint index sets: `C` conditioned in (present), `D` conditioned out
/// (absent). The stored order is the elimination order; the conditioned
/// kernel is order-invariant, which the tests verify rather than assume.
/// Ascending order is the convention for canonical results.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ConditionPair {
    conditioned_in: Vec<usize>,
    conditioned_out: Vec<usize>,
}

impl ConditionPair {
    pub fn new(conditioned_in: &[usize], conditioned_out: &[usize]) -> Result<ConditionPair> {
        let mut seen = std::collections::HashSet::new();
        let dedup_keep_order = |xs: &[usize]| {
            let mut out = Vec::with_capacity(xs.len());
            let mut local = std::collections::HashSet::new();
            for &x in xs {
                if local.insert(x) {
                    out.push(x);
                }
            }
            out
        };
        let c = dedup_keep_order(conditioned_in);
        let d = dedup_keep_order(conditioned_out);
        for &x in &c {
            seen.insert(x);
        }
        if let Some(&x) = d.iter().find(|x| seen.contains(x)) {
            return Err(Error::BadParams(format!(
                "element {x} appears in both C and D"
            )));
        }
        Ok(ConditionPair {
            conditioned_in: c,
            conditioned_out: d,
        })
    }

    /// Ascending-order pair, the canonical elimination order.
    pub fn sorted(conditioned_in: &[usize], conditioned_out: &[usize]) -> Result<ConditionPair> {
        let mut c = conditioned_in.to_vec();
        let mut d = conditioned_out.to_vec();
        c.sort_unstable();
        d.sort_unstable();
        ConditionPair::new(&c, &d)
    }

    pub fn conditioned_in(&self) -> &[usize] {
        &self.conditioned_in
    }

    pub fn conditioned_out(&self) -> &[usize] {
        &self.conditioned_out
    }

    pub fn is_empty(&self) -> bool {
        self.conditioned_in.is_empty() && self.conditioned_out.is_empty()
    }

    fn check_indices(&self, size: usize) -> Result<()> {
        for &x in self.conditioned_in.iter().chain(&self.conditioned_out) {
            if x >= size {
                return Err(Error::BadParams(format!(
                    "conditioned element {x} out of range (ground set has {size} elements)"
                )));
            }
        }
        Ok(())
    }
}

/// Outcome of the permitted-pair test, with the minimal Gram eigenvalues
/// that witnessed it (`None` when the corresponding set is empty).
#[derive(Debug, Clone)]
pub struct PermittedReport {
    pub independent: bool,
    pub dually_independent: bool,
    pub permitted: bool,
    pub min_gram_eigenvalue_c: Option<f64>,
    pub min_gram_eigenvalue_d: Option<f64>,
}

fn min_gram_eigenvalue(m: &DMatrix<f64>, set: &[usize], complement: bool) -> Option<f64> {
    if set.is_empty() {
        return None;
    }
    let k = set.len();
    let mut gram = DMatrix::zeros(k, k);
    for (a, &i) in set.iter().enumerate() {
        for (b, &j) in set.iter().enumerate() {
            let v = if complement {
                let id = if i == j { 1.0 } else { 0.0 };
                id - m[(i, j)]
            } else {
                m[(i, j)]
            };
            gram[(a, b)] = v;
        }
    }
    let eigen = gram.symmetric_eigen();
    eigen.eigenvalues.iter().cloned().reduce(f64::min)
}

/// Tests whether `(C, D)` is a permitted pair for `k`: `C` independent
/// (the Gram of the kernel on `C` is nonsingular) and `D` dually
/// independent (the Gram of the complementary kernel on `D` is).
pub fn check_permitted(k: &Kernel, cp: &ConditionPair) -> Result<PermittedReport> {
    cp.check_indices(k.size())?;
    let min_c = min_gram_eigenvalue(k.matrix(), cp.conditioned_in(), false);
    let min_d = min_gram_eigenvalue(k.matrix(), cp.conditioned_out(), true);
    let independent = min_c.is_none_or(|l| l > INDEPENDENCE_TOL);
    let dually_independent = min_d.is_none_or(|l| l > INDEPENDENCE_TOL);
    Ok(PermittedReport {
        independent,
        dually_independent,
        permitted: independent && dually_independent,
        min_gram_eigenvalue_c: min_c,
        min_gram_eigenvalue_d: min_d,
    })
}

/// Re-symmetrizes and clips the diagonal into `[0, 1]`, suppressing drift
/// over long conditioning chains.
pub(crate) fn stabilize(m: &mut DMatrix<f64>) {
    let n = m.nrows();
    let data = m.as_mut_slice();
    for j in 0..n {
        for i in 0..j {
            let avg = 0.5 * (data[j * n + i] + data[i * n + j]);
            data[j * n + i] = avg;
            data[i * n + j] = avg;
        }
        let d = &mut data[j * n + j];
        *d = d.clamp(0.0, 1.0);
    }
}

/// Subtracts the outer product `v v^T / pivot` column by column (the
/// storage is column-major) and zeroes row and column `c` exactly.
fn rank_one_downdate(m: &mut DMatrix<f64>, v: &[f64], pivot: f64, c: usize) {
    let n = m.nrows();
    let data = m.as_mut_slice();
    for j in 0..n {
        let scale = v[j] / pivot;
        if scale != 0.0 {
            let col = &mut data[j * n..(j + 1) * n];
            for (dst, &vi) in col.iter_mut().zip(v) {
                *dst -= scale * vi;
            }
        }
    }
    for i in 0..n {
        data[c * n + i] = 0.0;
        data[i * n + c] = 0.0;
    }
}

/// Rank-one downdate removing `c` from the range: `M - (Mc)(Mc)^T / M[c,c]`.
/// Row and column `c` become exactly zero. The pivot `M[c,c]` must exceed
/// the independence threshold.
pub(crate) fn eliminate_in_place(m: &mut DMatrix<f64>, c: usize) -> Result<()> {
    let pivot = m[(c, c)];
    if pivot <= INDEPENDENCE_TOL {
        return Err(Error::PivotTooSmall { element: c, pivot });
    }
    let col: Vec<f64> = m.column(c).iter().copied().collect();
    rank_one_downdate(m, &col, pivot, c);
    stabilize(m);
    Ok(())
}

/// Conditions element `e` in: eliminate, then put the identity back on `e`.
/// The pivot is the inclusion probability of `e` under the current kernel.
pub(crate) fn include_in_place(m: &mut DMatrix<f64>, e: usize) -> Result<()> {
    eliminate_in_place(m, e)?;
    m[(e, e)] = 1.0;
    Ok(())
}

/// Conditions element `e` out via the complementary kernel: the update is
/// `M + qq^T / (1 - M[e,e])` with `q = chi_e - Me`, after which row and
/// column `e` are exactly zero.
pub(crate) fn exclude_in_place(m: &mut DMatrix<f64>, e: usize) -> Result<()> {
    let pivot = 1.0 - m[(e, e)];
    if pivot <= INDEPENDENCE_TOL {
        return Err(Error::PivotTooSmall { element: e, pivot });
    }
    let mut q: Vec<f64> = m.column(e).iter().map(|x| -x).collect();
    q[e] += 1.0;
    rank_one_downdate(m, &q, -pivot, e);
    stabilize(m);
    Ok(())
}

/// Removes one element `c` from the range of a projection kernel (the
/// cross-section kernel): the result is a projection of rank one less whose
/// row and column at `c` vanish.
pub fn eliminate_one(k: &Kernel, c: usize) -> Result<Kernel> {
    if k.class() != KernelClass::Projection {
        return Err(Error::BadParams(
            "eliminate_one expects a projection kernel".to_string(),
        ));
    }
    if c >= k.size() {
        return Err(Error::BadParams(format!(
            "element {c} out of range (ground set has {} elements)",
            k.size()
        )));
    }
    let mut m = k.matrix().clone();
    eliminate_in_place(&mut m, c)?;
    Kernel::new_projection(k.ground().clone(), m)
}

/// The conditional kernel for "all of `C` present, all of `D` absent",
/// computed by eliminating `C` one element at a time and restoring the
/// identity on `C`, then doing the dual on `D` through the complement.
/// Requires a permitted pair; rank is preserved.
pub fn condition_pair(k: &Kernel, cp: &ConditionPair) -> Result<Kernel> {
    if k.class() != KernelClass::Projection {
        return Err(Error::BadParams(
            "condition_pair expects a projection kernel".to_string(),
        ));
    }
    let report = check_permitted(k, cp)?;
    if !report.permitted {
        let (side, min_eigenvalue) = if !report.independent {
            ("C", report.min_gram_eigenvalue_c.unwrap())
        } else {
            ("D", report.min_gram_eigenvalue_d.unwrap())
        };
        return Err(Error::NotPermitted {
            side,
            min_eigenvalue,
        });
    }
    let mut m = k.matrix().clone();
    apply_pair_in_place(&mut m, cp)?;
    Kernel::new_projection(k.ground().clone(), m)
}

/// Raw-matrix version of [`condition_pair`], without the permitted check.
pub(crate) fn apply_pair_in_place(m: &mut DMatrix<f64>, cp: &ConditionPair) -> Result<()> {
    for &c in cp.conditioned_in() {
        include_in_place(m, c)?;
    }
    for &d in cp.conditioned_out() {
        exclude_in_place(m, d)?;
    }
    Ok(())
}
