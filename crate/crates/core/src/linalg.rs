//! Exact Gauss–Jordan elimination over the rationals, and SVD-based rank
//! helpers for float Jacobians.

use nalgebra::DMatrix;
use num::{BigRational, Zero};

/// Default relative threshold under which a singular value counts as zero.
pub const DEFAULT_RANK_TOL: f64 = 1e-8;

/// Solution set of `A x = b` over `Q`.
#[derive(Debug, Clone, PartialEq)]
pub enum LinearSolution {
    Unique(Vec<BigRational>),
    Inconsistent,
    /// `x = particular + Σ_k t_k · nullspace[k]`.
    Underdetermined { particular: Vec<BigRational>, nullspace: Vec<Vec<BigRational>>, rank: usize },
}

/// Reduced row echelon form of `[A | b]` by exact Gauss–Jordan elimination.
pub fn solve_exact(a: &[Vec<BigRational>], b: &[BigRational], unknowns: usize) -> LinearSolution {
    let rows = a.len();
    let mut m: Vec<Vec<BigRational>> = a
        .iter()
        .zip(b)
        .map(|(row, rhs)| {
            let mut r = row.clone();
            r.push(rhs.clone());
            r
        })
        .collect();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..unknowns {
        let Some(p) = (r..rows).find(|&i| !m[i][c].is_zero()) else { continue };
        m.swap(r, p);
        let inv = m[r][c].recip();
        for x in m[r].iter_mut() {
            *x = &*x * &inv;
        }
        let pivot_row = m[r].clone();
        for (i, row) in m.iter_mut().enumerate() {
            if i == r || row[c].is_zero() {
                continue;
            }
            let f = row[c].clone();
            for (x, p) in row.iter_mut().zip(&pivot_row) {
                *x = &*x - &f * p;
            }
        }
        pivots.push(c);
        r += 1;
        if r == rows {
            break;
        }
    }
    if m[r..].iter().any(|row| !row[unknowns].is_zero()) {
        return LinearSolution::Inconsistent;
    }
    let mut particular = vec![BigRational::zero(); unknowns];
    for (i, &c) in pivots.iter().enumerate() {
        particular[c] = m[i][unknowns].clone();
    }
    if pivots.len() == unknowns {
        return LinearSolution::Unique(particular);
    }
    let free: Vec<usize> = (0..unknowns).filter(|c| !pivots.contains(c)).collect();
    let nullspace = free
        .iter()
        .map(|&f| {
            let mut v = vec![BigRational::zero(); unknowns];
            v[f] = num::One::one();
            for (i, &c) in pivots.iter().enumerate() {
                v[c] = -m[i][f].clone();
            }
            v
        })
        .collect();
    LinearSolution::Underdetermined { particular, nullspace, rank: pivots.len() }
}

/// Point of `{particular + N t}` closest (Euclidean) to `target`.
pub fn closest_in_affine(
    particular: &[BigRational],
    nullspace: &[Vec<BigRational>],
    target: &[BigRational],
) -> Vec<BigRational> {
    let k = nullspace.len();
    let diff: Vec<BigRational> = target.iter().zip(particular).map(|(t, p)| t - p).collect();
    let dot = |u: &[BigRational], v: &[BigRational]| {
        u.iter().zip(v).fold(BigRational::zero(), |acc, (a, b)| acc + a * b)
    };
    let gram: Vec<Vec<BigRational>> =
        (0..k).map(|a| (0..k).map(|b| dot(&nullspace[a], &nullspace[b])).collect()).collect();
    let rhs: Vec<BigRational> = (0..k).map(|a| dot(&nullspace[a], &diff)).collect();
    let t = match solve_exact(&gram, &rhs, k) {
        LinearSolution::Unique(t) => t,
        LinearSolution::Underdetermined { particular, .. } => particular,
        LinearSolution::Inconsistent => vec![BigRational::zero(); k],
    };
    let mut x = particular.to_vec();
    for (tk, v) in t.iter().zip(nullspace) {
        for (xi, vi) in x.iter_mut().zip(v) {
            *xi = &*xi + tk * vi;
        }
    }
    x
}

pub fn to_matrix(rows: &[Vec<f64>], cols: usize) -> DMatrix<f64> {
    DMatrix::from_fn(rows.len(), cols, |r, c| rows[r][c])
}

/// Singular values in decreasing order.
pub fn singular_values(m: &DMatrix<f64>) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    let mut sv: Vec<f64> = m.clone().svd(false, false).singular_values.iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    sv
}

/// Number of singular values above `rank_tol · max(1, σ_max)`.
pub fn numerical_rank(m: &DMatrix<f64>, rank_tol: f64) -> usize {
    rank_of_values(&singular_values(m), rank_tol)
}

pub fn rank_of_values(sv: &[f64], rank_tol: f64) -> usize {
    let thresh = rank_tol * sv.first().copied().unwrap_or(0.0).max(1.0);
    sv.iter().filter(|&&s| s > thresh).count()
}

/// Orthonormal basis of the null space of `m` (as columns), using the same
/// rank threshold.
pub fn null_space(m: &DMatrix<f64>, rank_tol: f64) -> DMatrix<f64> {
    let n = m.ncols();
    if m.nrows() == 0 {
        return DMatrix::identity(n, n);
    }
    // Pad to at least n rows so the SVD returns a full V.
    let padded = if m.nrows() < n {
        let mut p = DMatrix::zeros(n, n);
        p.view_mut((0, 0), (m.nrows(), n)).copy_from(m);
        p
    } else {
        m.clone()
    };
    let svd = padded.svd(false, true);
    let v_t = svd.v_t.expect("requested V");
    let sv = &svd.singular_values;
    let smax = sv.iter().copied().fold(0.0, f64::max).max(1.0);
    let cols: Vec<_> = (0..sv.len())
        .filter(|&i| sv[i] <= rank_tol * smax)
        .map(|i| v_t.row(i).transpose())
        .collect();
    if cols.is_empty() {
        DMatrix::zeros(n, 0)
    } else {
        DMatrix::from_columns(&cols)
    }
}

/// Minimum-norm least-squares solution of `J x = r`.
pub fn pseudo_solve(j: &DMatrix<f64>, r: &[f64], rank_tol: f64) -> Option<Vec<f64>> {
    let rhs = nalgebra::DVector::from_column_slice(r);
    let svd = j.clone().svd(true, true);
    let smax = svd.singular_values.iter().copied().fold(0.0, f64::max);
    let eps = (rank_tol * smax.max(1.0)).max(1e-300);
    svd.solve(&rhs, eps).ok().map(|x| x.iter().copied().collect())
}
