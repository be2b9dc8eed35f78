#![allow(dead_code)]

pub mod properties;

use dpca::linalg::SymmetricMatrix;
use dpca::{Dataset, SeededRng};
use nalgebra::DMatrix;
use ndarray::{Array1, Array2, ArrayView1, ArrayView2};

pub fn gaussian(rng: &mut SeededRng, rows: usize, cols: usize) -> Array2<f64> {
    Array2::from_shape_simple_fn((rows, cols), || rng.normal())
}

/// `G^T G / p + shift I`, a well-conditioned random SPD matrix.
pub fn random_spd(rng: &mut SeededRng, dim: usize, shift: f64) -> SymmetricMatrix {
    let p = dim + 5;
    let g = gaussian(rng, p, dim);
    let mut a = g.t().dot(&g) / p as f64;
    for i in 0..dim {
        a[[i, i]] += shift;
    }
    SymmetricMatrix::symmetrize(a).unwrap()
}

/// Gaussian samples with per-column standard deviations `sd`, plus `offset`.
pub fn scaled_samples(rng: &mut SeededRng, n: usize, sd: &[f64], offset: f64) -> Dataset {
    let mut x = gaussian(rng, n, sd.len());
    for mut row in x.rows_mut() {
        for (v, s) in row.iter_mut().zip(sd) {
            *v = *v * s + offset;
        }
    }
    Dataset::from_rows(x).unwrap()
}

pub fn to_na(a: ArrayView2<f64>) -> DMatrix<f64> {
    DMatrix::from_fn(a.nrows(), a.ncols(), |i, j| a[[i, j]])
}

pub fn from_na(m: &DMatrix<f64>) -> Array2<f64> {
    Array2::from_shape_fn((m.nrows(), m.ncols()), |(i, j)| m[(i, j)])
}

pub fn cos_gap(a: ArrayView1<f64>, b: ArrayView1<f64>) -> f64 {
    let c = a.dot(&b) / (a.dot(&a).sqrt() * b.dot(&b).sqrt());
    1.0 - c.abs()
}

pub fn frobenius(a: ArrayView2<f64>) -> f64 {
    a.iter().map(|v| v * v).sum::<f64>().sqrt()
}

pub fn norm(v: ArrayView1<f64>) -> f64 {
    v.dot(&v).sqrt()
}

/// Top eigenvalue of a symmetric matrix from nalgebra's solver.
pub fn na_top_eigenvalue(a: ArrayView2<f64>) -> f64 {
    to_na(a).symmetric_eigen().eigenvalues.max()
}

/// Top-`d` eigenpairs of `b^{-1} a` from the dense non-symmetric route:
/// eigenvalues from a real Schur form, vectors as the null vectors of
/// `b^{-1} a - lambda I` via SVD.
pub fn dense_inverse_route(a: ArrayView2<f64>, b: ArrayView2<f64>, d: usize) -> (Vec<f64>, Vec<Array1<f64>>) {
    let m = to_na(b).try_inverse().expect("invertible background") * to_na(a);
    let n = m.nrows();
    let mut values: Vec<f64> = m.clone().schur().complex_eigenvalues().iter().map(|c| c.re).collect();
    values.sort_by(|x, y| y.total_cmp(x));
    values.truncate(d);
    let vectors = values
        .iter()
        .map(|&lambda| {
            let shifted = &m - DMatrix::<f64>::identity(n, n) * lambda;
            let svd = shifted.svd(false, true);
            let vt = svd.v_t.expect("right singular vectors");
            let (idx, _) = svd
                .singular_values
                .iter()
                .enumerate()
                .min_by(|x, y| x.1.total_cmp(y.1))
                .unwrap();
            Array1::from_iter(vt.row(idx).iter().copied())
        })
        .collect();
    (values, vectors)
}

/// Explicit feature map of the homogeneous degree-2 polynomial kernel:
/// `[z_i^2, sqrt(2) z_i z_j (i < j)]`.
pub fn quadratic_features(z: ArrayView2<f64>) -> Array2<f64> {
    let dim = z.ncols();
    let width = dim * (dim + 1) / 2;
    let mut out = Array2::zeros((z.nrows(), width));
    for (r, row) in z.outer_iter().enumerate() {
        let mut c = 0;
        for i in 0..dim {
            out[[r, c]] = row[i] * row[i];
            c += 1;
        }
        for i in 0..dim {
            for j in i + 1..dim {
                out[[r, c]] = 2f64.sqrt() * row[i] * row[j];
                c += 1;
            }
        }
    }
    out
}

/// Rows minus their column means.
pub fn center_rows(a: ArrayView2<f64>) -> Array2<f64> {
    let mean = a.mean_axis(ndarray::Axis(0)).unwrap();
    &a - &mean.insert_axis(ndarray::Axis(0))
}

/// Random `rows x cols` matrix with orthonormal columns.
pub fn random_orthonormal(rng: &mut SeededRng, rows: usize, cols: usize) -> Array2<f64> {
    let g = to_na(gaussian(rng, rows, cols).view());
    let q = g.qr().q();
    from_na(&q)
}
