//! Dense linear algebra helpers built on the SVD.

use nalgebra::{DMatrix, DVector};

/// Relative singular-value threshold used for every rank decision.
pub const RANK_THRESHOLD: f64 = 1e-9;

/// Thin SVD `a = u diag(s) v^T`.
pub struct Svd {
    pub u: DMatrix<f64>,
    pub s: DVector<f64>,
    pub v: DMatrix<f64>,
}

/// nalgebra's SVD occasionally returns factors that do not reproduce the
/// input when `a` is rank deficient. Such results are recomputed with faer.
pub fn svd(a: &DMatrix<f64>) -> Svd {
    checked_svd(a).unwrap_or_else(|| faer_svd(a, false))
}

fn checked_svd(a: &DMatrix<f64>) -> Option<Svd> {
    let d = a.clone().svd(true, true);
    let (u, v_t, s) = (d.u?, d.v_t?, d.singular_values);
    if !s.iter().all(|x| x.is_finite()) {
        return None;
    }
    let k = s.len();
    let scale = s.max().max(f64::MIN_POSITIVE);
    let size = a.nrows().max(a.ncols()) as f64;
    let back = &u * DMatrix::from_diagonal(&s) * &v_t;
    let id = DMatrix::<f64>::identity(k, k);
    let ok = max_abs(&(back - a)) <= 1e-12 * size * scale
        && max_abs(&(u.transpose() * &u - &id)) <= 1e-12 * size
        && max_abs(&(&v_t * v_t.transpose() - &id)) <= 1e-12 * size;
    ok.then(|| Svd {
        u,
        s,
        v: v_t.transpose(),
    })
}

/// With `full`, `v` is square (the trailing columns span the nullspace).
fn faer_svd(a: &DMatrix<f64>, full: bool) -> Svd {
    let (m, n) = a.shape();
    let k = m.min(n);
    let f = faer::Mat::<f64>::from_fn(m, n, |i, j| a[(i, j)]);
    let parts = if full {
        f.svd()
            .map(|d| (to_nalgebra(d.U()), diag(d.S()), to_nalgebra(d.V())))
    } else {
        f.thin_svd()
            .map(|d| (to_nalgebra(d.U()), diag(d.S()), to_nalgebra(d.V())))
    };
    match parts {
        Ok((u, s, v)) => Svd { u, s, v },
        // no convergence: poison the result so that every downstream check fails
        Err(_) => Svd {
            u: DMatrix::from_element(m, if full { m } else { k }, f64::NAN),
            s: DVector::from_element(k, f64::NAN),
            v: DMatrix::from_element(n, if full { n } else { k }, f64::NAN),
        },
    }
}

fn to_nalgebra(m: faer::MatRef<'_, f64>) -> DMatrix<f64> {
    DMatrix::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

fn diag(d: faer::diag::DiagRef<'_, f64>) -> DVector<f64> {
    let c = d.column_vector();
    DVector::from_fn(c.nrows(), |i, _| c[i])
}

pub fn singular_values(a: &DMatrix<f64>) -> DVector<f64> {
    if a.is_empty() {
        return DVector::zeros(0);
    }
    a.singular_values()
}

/// Orthonormal basis (as columns) of `{x : a x = 0}`.
pub fn nullspace(a: &DMatrix<f64>) -> DMatrix<f64> {
    let (rows, cols) = a.shape();
    if rows == 0 || cols == 0 {
        return DMatrix::identity(cols, cols);
    }
    nalgebra_nullspace(a).unwrap_or_else(|| {
        let d = faer_svd(a, true);
        null_columns(&d.s, &d.v)
    })
}

fn null_columns(s: &DVector<f64>, v: &DMatrix<f64>) -> DMatrix<f64> {
    let cols = v.nrows();
    let smax = s.max();
    let kept: Vec<usize> = (0..cols)
        .filter(|&i| i >= s.len() || smax == 0.0 || s[i] <= RANK_THRESHOLD * smax)
        .collect();
    let mut out = DMatrix::zeros(cols, kept.len());
    for (k, &i) in kept.iter().enumerate() {
        out.set_column(k, &v.column(i));
    }
    out
}

/// Right factor only, padded with zero rows so that it is square; the result
/// is kept only if the returned columns really are (nearly) annihilated by `a`.
fn nalgebra_nullspace(a: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    let (rows, cols) = a.shape();
    let padded = if rows < cols {
        let mut m = DMatrix::zeros(cols, cols);
        m.view_mut((0, 0), (rows, cols)).copy_from(a);
        m
    } else {
        a.clone()
    };
    let d = padded.svd(false, true);
    let s = d.singular_values;
    if !s.iter().all(|x| x.is_finite()) {
        return None;
    }
    let out = null_columns(&s, &d.v_t?.transpose());
    let k = out.ncols();
    let slack = 1e-12 * rows.max(cols) as f64;
    let smax = s.max();
    let ok = max_abs(&(out.transpose() * &out - DMatrix::<f64>::identity(k, k))) <= slack
        && max_abs(&(a * &out)) <= (RANK_THRESHOLD + slack) * smax;
    ok.then_some(out)
}

/// Numerical rank with the global relative threshold.
pub fn rank(a: &DMatrix<f64>) -> usize {
    let sv = singular_values(a);
    if sv.is_empty() {
        return 0;
    }
    let smax = sv.max();
    if smax == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > RANK_THRESHOLD * smax).count()
}

/// Orthonormal basis of the column space of `a`.
pub fn orthonormal_basis(a: &DMatrix<f64>) -> DMatrix<f64> {
    if a.ncols() == 0 {
        return DMatrix::zeros(a.nrows(), 0);
    }
    let d = svd(a);
    let smax = d.s.max();
    let kept: Vec<usize> = (0..d.s.len())
        .filter(|&i| smax > 0.0 && d.s[i] > RANK_THRESHOLD * smax)
        .collect();
    let mut out = DMatrix::zeros(a.nrows(), kept.len());
    for (k, &i) in kept.iter().enumerate() {
        out.set_column(k, &d.u.column(i));
    }
    out
}

pub fn spectral_norm(a: &DMatrix<f64>) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    singular_values(a).max()
}

/// Largest principal angle between the column spaces of `a` and `b`.
///
/// Returns `pi/2` when the spaces have different dimensions.
pub fn max_principal_angle(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    let qa = orthonormal_basis(a);
    let qb = orthonormal_basis(b);
    if qa.ncols() != qb.ncols() {
        return std::f64::consts::FRAC_PI_2;
    }
    if qa.ncols() == 0 {
        return 0.0;
    }
    // sin of the largest angle is the norm of the part of `qb` outside span(qa).
    let resid = &qb - &qa * (qa.transpose() * &qb);
    spectral_norm(&resid).min(1.0).asin()
}

/// Minimum-norm solution of `a x = b`.
pub fn solve_min_norm(a: &DMatrix<f64>, b: &DVector<f64>) -> Option<DVector<f64>> {
    let (m, n) = a.shape();
    if m <= n {
        let gram = a * a.transpose();
        if let Some(y) = gram.clone().lu().solve(b) {
            if y.iter().all(|v| v.is_finite()) {
                return Some(a.transpose() * y);
            }
        }
    }
    let d = svd(a);
    let smax = d.s.max();
    if !smax.is_finite() {
        return None;
    }
    // x = V diag(1/s) U^T b over the singular values above the threshold
    let mut coef = d.u.transpose() * b;
    for (c, &s) in coef.iter_mut().zip(d.s.iter()) {
        *c = if s > RANK_THRESHOLD * smax {
            *c / s
        } else {
            0.0
        };
    }
    Some(&d.v * coef)
}

/// Maximum absolute entry.
pub fn max_abs(a: &DMatrix<f64>) -> f64 {
    a.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nullspace_of_wide_matrix() {
        let a = DMatrix::from_row_slice(1, 3, &[1.0, 1.0, 0.0]);
        let n = nullspace(&a);
        assert_eq!(n.ncols(), 2);
        assert!(max_abs(&(&a * &n)) < 1e-14);
        assert!(max_abs(&(n.transpose() * &n - DMatrix::identity(2, 2))) < 1e-12);
    }

    #[test]
    fn nullspace_of_zero_matrix_is_everything() {
        let n = nullspace(&DMatrix::zeros(2, 4));
        assert_eq!(n.ncols(), 4);
    }

    #[test]
    fn principal_angle_detects_equal_and_orthogonal_spans() {
        let a = DMatrix::from_row_slice(3, 1, &[1.0, 0.0, 0.0]);
        let b = DMatrix::from_row_slice(3, 1, &[2.0, 0.0, 0.0]);
        let c = DMatrix::from_row_slice(3, 1, &[0.0, 1.0, 0.0]);
        assert!(max_principal_angle(&a, &b) < 1e-12);
        assert!((max_principal_angle(&a, &c) - std::f64::consts::FRAC_PI_2).abs() < 1e-12);
    }

    #[test]
    fn rank_deficient_column_space() {
        // two columns repeated with different scales: rank 2
        let b = DMatrix::from_fn(12, 2, |i, j| {
            ((i * 7 + j * 3) % 11) as f64 - 5.0 + 0.1 * j as f64
        });
        let a = DMatrix::from_fn(12, 4, |i, j| b[(i, j % 2)] * (j as f64 + 1.0));
        let q = orthonormal_basis(&a);
        assert_eq!(q.ncols(), 2);
        assert!(max_abs(&(&b - &q * (q.transpose() * &b))) < 1e-12);
        let d = svd(&a);
        let back = &d.u * DMatrix::from_diagonal(&d.s) * d.v.transpose();
        assert!(max_abs(&(back - &a)) < 1e-12);
        assert_eq!(nullspace(&a.transpose()).ncols(), 10);
    }

    #[test]
    fn min_norm_solution() {
        let a = DMatrix::from_row_slice(1, 2, &[1.0, 1.0]);
        let x = solve_min_norm(&a, &DVector::from_vec(vec![2.0])).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-14 && (x[1] - 1.0).abs() < 1e-14);
    }
}
