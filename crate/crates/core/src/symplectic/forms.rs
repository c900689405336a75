use nalgebra::{DMatrix, DVector};

use super::jacobian::{jacobian, SmoothMap};
use super::linalg::{nullspace, rank, singular_values};
use crate::{Error, Result};

const MIN_SINGULAR_VALUE: f64 = 1e-12;
const SUBSPACE_CONDITION: f64 = 1e-8;

/// Multiplication by `i` on `C^N` in interleaved real coordinates.
pub fn j0(complex_dim: usize) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(2 * complex_dim, 2 * complex_dim);
    for k in 0..complex_dim {
        m[(2 * k, 2 * k + 1)] = -1.0;
        m[(2 * k + 1, 2 * k)] = 1.0;
    }
    m
}

/// A constant, nondegenerate 2-form `(v, w) -> v^T M w` on `R^{2N}`.
#[derive(Debug, Clone, PartialEq)]
pub struct AmbientForm {
    matrix: DMatrix<f64>,
}

impl AmbientForm {
    /// The standard form `(i/2) sum dz_j ^ dz_j-bar = sum dx_j ^ dy_j` on `C^N`.
    pub fn standard(complex_dim: usize) -> Self {
        let mut m = DMatrix::zeros(2 * complex_dim, 2 * complex_dim);
        for k in 0..complex_dim {
            m[(2 * k, 2 * k + 1)] = 1.0;
            m[(2 * k + 1, 2 * k)] = -1.0;
        }
        Self { matrix: m }
    }

    /// `-sum du_j ^ dv_j` on `R^m x R^m` with coordinates `(u, v)` in blocks.
    pub fn cotangent(m: usize) -> Self {
        let mut mat = DMatrix::zeros(2 * m, 2 * m);
        for j in 0..m {
            mat[(j, m + j)] = -1.0;
            mat[(m + j, j)] = 1.0;
        }
        Self { matrix: mat }
    }

    /// Wraps an antisymmetric matrix. The strictly upper triangle is taken as
    /// given and the lower triangle is rebuilt from it.
    pub fn from_matrix(matrix: DMatrix<f64>) -> Result<Self> {
        let (r, c) = matrix.shape();
        if r != c {
            return Err(Error::DimensionMismatch {
                expected: r,
                got: c,
            });
        }
        if r % 2 != 0 {
            return Err(Error::InvalidParameter(format!("odd dimension {r}")));
        }
        let mut m = DMatrix::zeros(r, r);
        for i in 0..r {
            for j in (i + 1)..r {
                m[(i, j)] = matrix[(i, j)];
                m[(j, i)] = -matrix[(i, j)];
            }
        }
        let smin = singular_values(&m).min();
        if !(smin > MIN_SINGULAR_VALUE) {
            return Err(Error::DegenerateForm(smin));
        }
        Ok(Self { matrix: m })
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn eval(&self, v: &DVector<f64>, w: &DVector<f64>) -> Result<f64> {
        form_eval(self, v, w)
    }

    /// Gram matrix `B^T M B` of the form on the columns of `basis`.
    pub fn restrict(&self, basis: &DMatrix<f64>) -> DMatrix<f64> {
        basis.transpose() * &self.matrix * basis
    }
}

pub fn form_eval(form: &AmbientForm, v: &DVector<f64>, w: &DVector<f64>) -> Result<f64> {
    for len in [v.len(), w.len()] {
        if len != form.dim() {
            return Err(Error::DimensionMismatch {
                expected: form.dim(),
                got: len,
            });
        }
    }
    Ok(v.dot(&(&form.matrix * w)))
}

/// `J^T Omega J` for the Jacobian `J` of `f` at `p`.
pub fn pullback(form: &AmbientForm, f: &dyn SmoothMap, p: &DVector<f64>) -> Result<DMatrix<f64>> {
    if f.codomain_dim() != form.dim() {
        return Err(Error::DimensionMismatch {
            expected: form.dim(),
            got: f.codomain_dim(),
        });
    }
    let jac = jacobian(f, p)?;
    Ok(form.restrict(&jac))
}

/// A linear subspace given by a full-rank basis (columns).
#[derive(Debug, Clone, PartialEq)]
pub struct Subspace {
    basis: DMatrix<f64>,
}

impl Subspace {
    pub fn new(basis: DMatrix<f64>) -> Result<Self> {
        let k = basis.ncols();
        if k > 0 {
            let sv = singular_values(&basis);
            let (smin, smax) = (sv.min(), sv.max());
            if k > basis.nrows() || !(smin > SUBSPACE_CONDITION * smax) {
                return Err(Error::RankDeficient {
                    rank: rank(&basis),
                    expected: k,
                });
            }
        }
        Ok(Self { basis })
    }

    pub fn from_vectors(ambient_dim: usize, vectors: &[DVector<f64>]) -> Result<Self> {
        let mut basis = DMatrix::zeros(ambient_dim, vectors.len());
        for (k, v) in vectors.iter().enumerate() {
            if v.len() != ambient_dim {
                return Err(Error::DimensionMismatch {
                    expected: ambient_dim,
                    got: v.len(),
                });
            }
            basis.set_column(k, v);
        }
        Self::new(basis)
    }

    pub fn ambient_dim(&self) -> usize {
        self.basis.nrows()
    }

    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    pub fn basis(&self) -> &DMatrix<f64> {
        &self.basis
    }

    /// Largest principal angle to `other` (`pi/2` for different dimensions).
    pub fn max_angle_to(&self, other: &Subspace) -> f64 {
        super::linalg::max_principal_angle(&self.basis, &other.basis)
    }

    /// Distance of `v` from the subspace relative to `|v|`.
    pub fn relative_residual(&self, v: &DVector<f64>) -> f64 {
        let q = super::linalg::orthonormal_basis(&self.basis);
        let r = v - &q * (q.transpose() * v);
        let n = v.norm();
        if n == 0.0 {
            0.0
        } else {
            r.norm() / n
        }
    }
}

/// `{w : Omega(w, s) = 0 for all s in S}`, the SVD nullspace of the rows `s^T M`.
pub fn symplectic_complement(form: &AmbientForm, s: &Subspace) -> Result<Subspace> {
    if s.ambient_dim() != form.dim() {
        return Err(Error::DimensionMismatch {
            expected: form.dim(),
            got: s.ambient_dim(),
        });
    }
    let rows = s.basis().transpose() * form.matrix();
    let r = rank(&rows);
    if r < s.dim() {
        return Err(Error::RankDeficient {
            rank: r,
            expected: s.dim(),
        });
    }
    Subspace::new(nullspace(&rows))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LagrangianTest {
    pub is_lagrangian: bool,
    pub residual: f64,
}

/// Checks `max |Omega(s_i, s_j)| <= tol` over basis pairs of a half-dimensional subspace.
pub fn is_lagrangian(form: &AmbientForm, s: &Subspace, tol: f64) -> Result<LagrangianTest> {
    if s.ambient_dim() != form.dim() {
        return Err(Error::DimensionMismatch {
            expected: form.dim(),
            got: s.ambient_dim(),
        });
    }
    if 2 * s.dim() != form.dim() {
        return Err(Error::NotHalfDimensional {
            dim: s.dim(),
            ambient: form.dim(),
        });
    }
    let residual = super::linalg::max_abs(&form.restrict(s.basis()));
    Ok(LagrangianTest {
        is_lagrangian: residual <= tol,
        residual,
    })
}
