//! Small dense linear-algebra helpers over row-major `Vec<Vec<f64>>`.

use nalgebra::{DMatrix, DVector};

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn max_abs(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, v| m.max(v.abs()))
}

/// Reduced row echelon form of a row-major matrix with `cols` columns.
#[derive(Clone, Debug)]
pub struct RowReduced {
    pub rref: Vec<Vec<f64>>,
    pub pivot_cols: Vec<usize>,
    /// Original indices of the rows that produced each pivot.
    pub pivot_rows: Vec<usize>,
    pub cols: usize,
}

impl RowReduced {
    pub fn rank(&self) -> usize {
        self.pivot_cols.len()
    }

    /// Null-space basis with a unit entry at each free column.
    pub fn null_space(&self) -> Vec<Vec<f64>> {
        (0..self.cols)
            .filter(|c| !self.pivot_cols.contains(c))
            .map(|free| {
                let mut v = vec![0.0; self.cols];
                v[free] = 1.0;
                for (row, &pc) in self.pivot_cols.iter().enumerate() {
                    v[pc] = -self.rref[row][free];
                }
                v
            })
            .collect()
    }
}

/// Gauss-Jordan elimination; in each column the largest remaining entry is
/// the pivot, entries at or below `tol` count as zero.
pub fn row_reduce(rows: &[Vec<f64>], cols: usize, tol: f64) -> RowReduced {
    let mut m: Vec<Vec<f64>> = rows.to_vec();
    let mut origin: Vec<usize> = (0..rows.len()).collect();
    let mut pivot_cols = Vec::new();
    let mut pivot_rows = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == m.len() {
            break;
        }
        let (best, value) = (r..m.len())
            .map(|i| (i, m[i][c].abs()))
            .fold((r, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        if value <= tol {
            for row in m.iter_mut().skip(r) {
                row[c] = 0.0;
            }
            continue;
        }
        m.swap(r, best);
        origin.swap(r, best);
        let p = m[r][c];
        for v in m[r].iter_mut() {
            *v /= p;
        }
        for i in 0..m.len() {
            if i != r {
                let f = m[i][c];
                if f != 0.0 {
                    for j in 0..cols {
                        m[i][j] -= f * m[r][j];
                    }
                }
            }
        }
        pivot_cols.push(c);
        pivot_rows.push(origin[r]);
        r += 1;
    }
    m.truncate(r);
    RowReduced {
        rref: m,
        pivot_cols,
        pivot_rows,
        cols,
    }
}

/// Modified Gram-Schmidt with one re-orthogonalization pass; vectors whose
/// residual norm is at most `tol` are dropped.
pub fn gram_schmidt(vectors: &[Vec<f64>], tol: f64) -> Vec<Vec<f64>> {
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for v in vectors {
        let mut w = v.clone();
        for _ in 0..2 {
            for b in &basis {
                let p = dot(&w, b);
                for (wi, bi) in w.iter_mut().zip(b) {
                    *wi -= p * bi;
                }
            }
        }
        let n = norm(&w);
        if n > tol {
            basis.push(w.into_iter().map(|x| x / n).collect());
        }
    }
    basis
}

pub fn to_matrix(rows: &[Vec<f64>], cols: usize) -> DMatrix<f64> {
    DMatrix::from_fn(rows.len(), cols, |i, j| rows[i][j])
}

/// Minimum-norm least-squares solution of `A z = b` via the SVD, together
/// with the residual `max |A z - b|`.
pub fn min_norm_solve(rows: &[Vec<f64>], cols: usize, rhs: &[f64]) -> (Vec<f64>, f64) {
    if rows.is_empty() {
        return (vec![0.0; cols], 0.0);
    }
    let a = to_matrix(rows, cols);
    let b = DVector::from_column_slice(rhs);
    let svd = a.clone().svd(true, true);
    let scale = svd.singular_values.iter().fold(0.0f64, |m, &s| m.max(s));
    let eps = 1e-12 * scale.max(1.0);
    let z = svd.solve(&b, eps).expect("u and v were computed");
    let residual = (&a * &z - &b).amax();
    (z.iter().copied().collect(), residual)
}

/// Solves a square system by LU; `None` when singular.
pub fn solve_square(rows: &[Vec<f64>], rhs: &[f64]) -> Option<Vec<f64>> {
    let n = rhs.len();
    let a = to_matrix(rows, n);
    let b = DVector::from_column_slice(rhs);
    a.lu().solve(&b).map(|x| x.iter().copied().collect())
}

pub fn determinant(rows: &[Vec<f64>]) -> f64 {
    if rows.is_empty() {
        return 1.0;
    }
    to_matrix(rows, rows.len()).determinant()
}
