//! Symmetric and symmetric-definite eigendecompositions.
//!
//! The symmetric solver is Householder tridiagonalization followed by the
//! implicit QL method with Wilkinson-style shifts (the EISPACK `tred2`/`tql2`
//! pair). The generalized problem `A u = lambda B u` is reduced to a symmetric
//! one by whitening with the Cholesky factor of `B`.

use ndarray::{Array1, Array2};

use super::{spd_cholesky, SymmetricMatrix};
use crate::error::{Error, Result};

/// Eigenvalues in non-increasing order with their unit-norm eigenvectors as
/// columns. Each vector is signed so that its largest-magnitude entry is
/// positive. Within a (near-)degenerate eigenspace the choice of basis is
/// arbitrary but deterministic.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenPairs {
    pub values: Array1<f64>,
    pub vectors: Array2<f64>,
}

impl EigenPairs {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

const MAX_QL_SWEEPS: usize = 60;

/// Column-major square matrix scratch space; `at(r, c)` is `data[c * n + r]`
/// so the hot loops below walk contiguous memory.
struct ColMajor {
    n: usize,
    data: Vec<f64>,
}

impl ColMajor {
    #[inline]
    fn at(&self, r: usize, c: usize) -> f64 {
        self.data[c * self.n + r]
    }

    #[inline]
    fn set(&mut self, r: usize, c: usize, v: f64) {
        self.data[c * self.n + r] = v;
    }
}

/// Householder reduction to tridiagonal form. On return `d` holds the
/// diagonal, `e[1..]` the subdiagonal and `v` the accumulated transform.
fn tridiagonalize(v: &mut ColMajor, d: &mut [f64], e: &mut [f64]) {
    let n = v.n;
    for j in 0..n {
        d[j] = v.at(n - 1, j);
    }
    for i in (1..n).rev() {
        let mut scale = 0.0;
        let mut h = 0.0;
        for dk in d.iter().take(i) {
            scale += dk.abs();
        }
        if scale == 0.0 {
            e[i] = d[i - 1];
            for j in 0..i {
                d[j] = v.at(i - 1, j);
                v.set(i, j, 0.0);
                v.set(j, i, 0.0);
            }
        } else {
            for dk in d.iter_mut().take(i) {
                *dk /= scale;
                h += *dk * *dk;
            }
            let mut f = d[i - 1];
            let mut g = h.sqrt();
            if f > 0.0 {
                g = -g;
            }
            e[i] = scale * g;
            h -= f * g;
            d[i - 1] = f - g;
            for ej in e.iter_mut().take(i) {
                *ej = 0.0;
            }
            for j in 0..i {
                f = d[j];
                v.set(j, i, f);
                g = e[j] + v.at(j, j) * f;
                for k in (j + 1)..i {
                    let vkj = v.at(k, j);
                    g += vkj * d[k];
                    e[k] += vkj * f;
                }
                e[j] = g;
            }
            f = 0.0;
            for j in 0..i {
                e[j] /= h;
                f += e[j] * d[j];
            }
            let hh = f / (h + h);
            for j in 0..i {
                e[j] -= hh * d[j];
            }
            for j in 0..i {
                f = d[j];
                g = e[j];
                let col = &mut v.data[j * n..j * n + n];
                for k in j..i {
                    col[k] -= f * e[k] + g * d[k];
                }
                d[j] = v.at(i - 1, j);
                v.set(i, j, 0.0);
            }
        }
        d[i] = h;
    }

    for i in 0..n.saturating_sub(1) {
        v.set(n - 1, i, v.at(i, i));
        v.set(i, i, 1.0);
        let h = d[i + 1];
        if h != 0.0 {
            for k in 0..=i {
                d[k] = v.at(k, i + 1) / h;
            }
            for j in 0..=i {
                let mut g = 0.0;
                for k in 0..=i {
                    g += v.at(k, i + 1) * v.at(k, j);
                }
                let col = &mut v.data[j * n..j * n + n];
                for k in 0..=i {
                    col[k] -= g * d[k];
                }
            }
        }
        for k in 0..=i {
            v.set(k, i + 1, 0.0);
        }
    }
    for j in 0..n {
        d[j] = v.at(n - 1, j);
        v.set(n - 1, j, 0.0);
    }
    v.set(n - 1, n - 1, 1.0);
    e[0] = 0.0;
}

/// Implicit QL iterations on the tridiagonal matrix left by
/// [`tridiagonalize`], accumulating rotations into `v`.
fn ql_implicit(v: &mut ColMajor, d: &mut [f64], e: &mut [f64]) -> Result<()> {
    let n = v.n;
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;

    let eps = f64::EPSILON;
    let mut f = 0.0;
    let mut tst1 = 0.0f64;
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n - 1 {
            if e[m].abs() <= eps * tst1 {
                break;
            }
            m += 1;
        }
        if m > l {
            let mut sweeps = 0;
            loop {
                sweeps += 1;
                if sweeps > MAX_QL_SWEEPS {
                    return Err(Error::NoConvergence { index: l });
                }
                let mut g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = p.hypot(1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in d.iter_mut().skip(l + 2) {
                    *di -= h;
                }
                f += h;

                p = d[m];
                let mut c = 1.0;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = 0.0;
                let mut s2 = 0.0;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    g = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    let (left, right) = v.data.split_at_mut((i + 1) * n);
                    let col_i = &mut left[i * n..];
                    let col_i1 = &mut right[..n];
                    for k in 0..n {
                        let hk = col_i1[k];
                        col_i1[k] = s * col_i[k] + c * hk;
                        col_i[k] = c * col_i[k] - s * hk;
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }
    Ok(())
}

/// Flips `col` so its entry of largest magnitude (first on ties) is positive.
pub(crate) fn fix_sign(mut col: ndarray::ArrayViewMut1<f64>) {
    let mut best = 0usize;
    let mut best_abs = -1.0;
    for (i, v) in col.iter().enumerate() {
        if v.abs() > best_abs {
            best_abs = v.abs();
            best = i;
        }
    }
    if col[best] < 0.0 {
        col.mapv_inplace(|v| -v);
    }
}

/// Full eigendecomposition, eigenvalues non-increasing.
pub fn sym_eig(matrix: &SymmetricMatrix) -> Result<EigenPairs> {
    let a = matrix.as_array();
    let n = a.nrows();
    let mut v = ColMajor {
        n,
        data: vec![0.0; n * n],
    };
    for c in 0..n {
        for r in 0..n {
            v.set(r, c, a[[r, c]]);
        }
    }
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    tridiagonalize(&mut v, &mut d, &mut e);
    ql_implicit(&mut v, &mut d, &mut e)?;

    // stable sort: equal eigenvalues keep solver order
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| d[j].partial_cmp(&d[i]).unwrap_or(std::cmp::Ordering::Equal));

    let mut values = Array1::zeros(n);
    let mut vectors = Array2::zeros((n, n));
    for (dst, &src) in order.iter().enumerate() {
        values[dst] = d[src];
        let col = &v.data[src * n..src * n + n];
        let mut out = vectors.column_mut(dst);
        for r in 0..n {
            out[r] = col[r];
        }
        fix_sign(out);
    }
    Ok(EigenPairs { values, vectors })
}

fn check_count(d: usize, order: usize) -> Result<()> {
    if d == 0 || d > order {
        return Err(Error::InvalidComponentCount {
            requested: d,
            max: order,
        });
    }
    Ok(())
}

fn truncate(pairs: EigenPairs, d: usize) -> EigenPairs {
    EigenPairs {
        values: pairs.values.slice(ndarray::s![..d]).to_owned(),
        vectors: pairs.vectors.slice(ndarray::s![.., ..d]).to_owned(),
    }
}

/// The `d` leading eigenpairs of a symmetric matrix.
pub fn sym_eig_top(matrix: &SymmetricMatrix, d: usize) -> Result<EigenPairs> {
    check_count(d, matrix.order())?;
    Ok(truncate(sym_eig(matrix)?, d))
}

/// The `d` leading pairs of the pencil `(a, b)`: `a u = lambda b u`.
///
/// `b` must be positive definite. With `L L^T = b`, the symmetric matrix
/// `L^{-1} a L^{-T}` is diagonalized and its eigenvectors `v` are mapped back
/// through `u = L^{-T} v`, then rescaled to unit Euclidean norm.
pub fn generalized_eig_top(a: &SymmetricMatrix, b: &SymmetricMatrix, d: usize) -> Result<EigenPairs> {
    if a.order() != b.order() {
        return Err(Error::DimensionMismatch {
            expected: a.order(),
            found: b.order(),
        });
    }
    check_count(d, a.order())?;
    let l = spd_cholesky(b).map_err(|e| match e {
        Error::NotPositiveDefinite { pivot } => Error::SingularBackground { pivot },
        other => other,
    })?;

    let w = l.solve_lower_matrix(a.as_array());
    let whitened = l.solve_lower_matrix(w.t());
    let whitened = SymmetricMatrix::symmetrize(whitened)?;
    let inner = sym_eig_top(&whitened, d)?;

    let n = a.order();
    let mut vectors = Array2::zeros((n, d));
    for (j, v) in inner.vectors.columns().into_iter().enumerate() {
        let mut u = l.solve_upper(v);
        let norm = u.dot(&u).sqrt();
        u /= norm;
        let mut col = vectors.column_mut(j);
        col.assign(&u);
        fix_sign(col);
    }
    Ok(EigenPairs {
        values: inner.values,
        vectors,
    })
}

/// [`generalized_eig_top`] on the regularized pencil
/// `(a, b + delta * (tr(b)/D) * I)`.
pub fn generalized_eig_top_ridged(
    a: &SymmetricMatrix,
    b: &SymmetricMatrix,
    d: usize,
    delta: f64,
) -> Result<EigenPairs> {
    if !(delta >= 0.0) {
        return Err(Error::NegativeRidge(delta));
    }
    let shift = delta * b.trace() / b.order() as f64;
    generalized_eig_top(a, &b.add_diagonal(shift), d)
}
