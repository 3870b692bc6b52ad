//! Small dense complex linear algebra helpers: rank by Gaussian elimination
//! and orthonormal bases by modified Gram-Schmidt. Everything here works at
//! desk scale (dimensions in the hundreds) and is deterministic.

use ndarray::{Array1, Array2};
use num_complex::Complex64;

/// Rank of a dense complex matrix by row elimination with partial pivoting.
/// Entries with absolute value at most `tol` count as zero.
pub(crate) fn rank(mat: &Array2<Complex64>, tol: f64) -> usize {
    let mut a = mat.clone();
    let (nrows, ncols) = a.dim();
    let mut r = 0;
    for c in 0..ncols {
        if r == nrows {
            break;
        }
        // partial pivot: largest remaining entry in column c
        let mut best = r;
        let mut best_abs = a[[r, c]].norm();
        for i in r + 1..nrows {
            let v = a[[i, c]].norm();
            if v > best_abs {
                best = i;
                best_abs = v;
            }
        }
        if best_abs <= tol {
            continue;
        }
        if best != r {
            for j in 0..ncols {
                a.swap([r, j], [best, j]);
            }
        }
        let pivot = a[[r, c]];
        for i in r + 1..nrows {
            let f = a[[i, c]] / pivot;
            if f.norm() == 0.0 {
                continue;
            }
            for j in c..ncols {
                let v = a[[r, j]];
                a[[i, j]] -= f * v;
            }
        }
        r += 1;
    }
    r
}

/// Orthonormal basis of the span of the given columns, by modified
/// Gram-Schmidt in column order. Columns whose residual norm falls at or
/// below `tol` are dropped.
pub(crate) fn orthonormal_span(columns: &Array2<Complex64>, tol: f64) -> Array2<Complex64> {
    let nrows = columns.nrows();
    let mut basis: Vec<Array1<Complex64>> = Vec::new();
    for col in columns.columns() {
        let mut v = col.to_owned();
        for b in &basis {
            let proj: Complex64 = b.iter().zip(v.iter()).map(|(b, v)| b.conj() * v).sum();
            v.zip_mut_with(b, |vi, bi| *vi -= proj * bi);
        }
        // a second pass tightens orthogonality against rounding
        for b in &basis {
            let proj: Complex64 = b.iter().zip(v.iter()).map(|(b, v)| b.conj() * v).sum();
            v.zip_mut_with(b, |vi, bi| *vi -= proj * bi);
        }
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm > tol {
            basis.push(v.mapv(|z| z / norm));
        }
    }
    let mut out = Array2::zeros((nrows, basis.len()));
    for (j, b) in basis.iter().enumerate() {
        out.column_mut(j).assign(b);
    }
    out
}

/// Project the columns of `mat` onto the orthogonal complement of the span
/// of the (orthonormal) columns of `basis`.
pub(crate) fn project_out(basis: &Array2<Complex64>, mat: &Array2<Complex64>) -> Array2<Complex64> {
    let mut out = mat.clone();
    for mut col in out.columns_mut() {
        for b in basis.columns() {
            let proj: Complex64 = b.iter().zip(col.iter()).map(|(b, v)| b.conj() * v).sum();
            col.zip_mut_with(&b, |vi, bi| *vi -= proj * bi);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn rank_of_simple_matrices() {
        let id = Array2::from_shape_fn((4, 4), |(i, j)| c(f64::from(i == j), 0.0));
        assert_eq!(rank(&id, 1e-9), 4);
        let mut low = id.clone();
        low.row_mut(3).fill(c(0.0, 0.0));
        assert_eq!(rank(&low, 1e-9), 3);
        // rank-1 outer product
        let outer = Array2::from_shape_fn((3, 5), |(i, j)| c((i + 1) as f64 * (j + 1) as f64, 0.0));
        assert_eq!(rank(&outer, 1e-9), 1);
    }

    #[test]
    fn gram_schmidt_produces_orthonormal_columns() {
        let m = Array2::from_shape_fn((5, 4), |(i, j)| {
            c((i * j + 1) as f64, (i as f64 - j as f64) * 0.5)
        });
        let b = orthonormal_span(&m, 1e-9);
        assert_eq!(b.ncols(), rank(&m, 1e-9));
        for i in 0..b.ncols() {
            for j in 0..b.ncols() {
                let dot: Complex64 = b
                    .column(i)
                    .iter()
                    .zip(b.column(j).iter())
                    .map(|(x, y)| x.conj() * y)
                    .sum();
                let expect = c(f64::from(i == j), 0.0);
                assert!((dot - expect).norm() < 1e-10);
            }
        }
    }
}
