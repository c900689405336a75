use nalgebra::{DMatrix, DVector};

use crate::{Error, Result};

/// Base finite-difference step; scaled by `1 + |p|` at each evaluation point.
pub const FD_STEP: f64 = 1e-6;

const MAX_STEP_SHRINKS: usize = 4;

/// A smooth map `R^m -> R^k` defined on some open domain.
pub trait SmoothMap: Sync {
    fn domain_dim(&self) -> usize;
    fn codomain_dim(&self) -> usize;

    /// Evaluates the map, or returns `None` when `p` lies outside the domain.
    fn eval(&self, p: &DVector<f64>) -> Option<DVector<f64>>;

    fn fd_step(&self) -> f64 {
        FD_STEP
    }
}

/// Closure-backed [`SmoothMap`].
pub struct FnMap<F> {
    domain_dim: usize,
    codomain_dim: usize,
    step: f64,
    f: F,
}

impl<F> FnMap<F>
where
    F: Fn(&DVector<f64>) -> Option<DVector<f64>> + Sync,
{
    pub fn new(domain_dim: usize, codomain_dim: usize, f: F) -> Self {
        Self {
            domain_dim,
            codomain_dim,
            step: FD_STEP,
            f,
        }
    }

    pub fn with_step(mut self, step: f64) -> Self {
        self.step = step;
        self
    }
}

impl<F> SmoothMap for FnMap<F>
where
    F: Fn(&DVector<f64>) -> Option<DVector<f64>> + Sync,
{
    fn domain_dim(&self) -> usize {
        self.domain_dim
    }

    fn codomain_dim(&self) -> usize {
        self.codomain_dim
    }

    fn eval(&self, p: &DVector<f64>) -> Option<DVector<f64>> {
        (self.f)(p)
    }

    fn fd_step(&self) -> f64 {
        self.step
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum Differencing {
    #[default]
    Central,
    /// Central differences at `h` and `h/2` combined to cancel the `h^2` term.
    Richardson,
}

/// Central-difference Jacobian; entry `(i, j)` is `df_i/dx_j`.
pub fn jacobian(f: &dyn SmoothMap, p: &DVector<f64>) -> Result<DMatrix<f64>> {
    jacobian_with(f, p, Differencing::Central)
}

pub fn jacobian_with(
    f: &dyn SmoothMap,
    p: &DVector<f64>,
    scheme: Differencing,
) -> Result<DMatrix<f64>> {
    if p.len() != f.domain_dim() {
        return Err(Error::DimensionMismatch {
            expected: f.domain_dim(),
            got: p.len(),
        });
    }
    let k = f.codomain_dim();
    let base = f.fd_step() * (1.0 + p.norm());
    let mut jac = DMatrix::zeros(k, p.len());
    for j in 0..p.len() {
        let col = match scheme {
            Differencing::Central => central_column(f, p, j, base)?,
            Differencing::Richardson => {
                let coarse = central_column(f, p, j, base)?;
                let fine = central_column(f, p, j, 0.5 * base)?;
                (fine * 4.0 - coarse) / 3.0
            }
        };
        if col.len() != k {
            return Err(Error::DimensionMismatch {
                expected: k,
                got: col.len(),
            });
        }
        jac.set_column(j, &col);
    }
    Ok(jac)
}

fn central_column(
    f: &dyn SmoothMap,
    p: &DVector<f64>,
    j: usize,
    step: f64,
) -> Result<DVector<f64>> {
    let mut h = step;
    for _ in 0..=MAX_STEP_SHRINKS {
        let mut plus = p.clone();
        plus[j] += h;
        let mut minus = p.clone();
        minus[j] -= h;
        if let (Some(fp), Some(fm)) = (f.eval(&plus), f.eval(&minus)) {
            return Ok((fp - fm) / (2.0 * h));
        }
        h *= 0.5;
    }
    Err(Error::OutsideDomain(format!(
        "finite-difference stencil along coordinate {j}"
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symplectic::linalg::max_abs;

    #[test]
    fn identity_map_has_identity_jacobian() {
        let id = FnMap::new(3, 3, |p: &DVector<f64>| Some(p.clone()));
        let p = DVector::from_vec(vec![0.3, -1.2, 5.0]);
        let j = jacobian(&id, &p).unwrap();
        assert!(max_abs(&(j - DMatrix::identity(3, 3))) < 1e-9);
    }

    #[test]
    fn linear_map_recovers_matrix() {
        let a = DMatrix::from_row_slice(2, 3, &[1.0, 2.0, -3.0, 0.5, 0.0, 4.0]);
        let a2 = a.clone();
        let f = FnMap::new(3, 2, move |p: &DVector<f64>| Some(&a2 * p));
        let p = DVector::from_vec(vec![1.0, 2.0, 3.0]);
        let j = jacobian(&f, &p).unwrap();
        assert!(max_abs(&(j - a)) < 1e-9);
    }

    #[test]
    fn complex_square_at_one() {
        // z -> z^2 in the real model; d(z^2) = 2 z dz, so the Jacobian at 1 is 2 I.
        let sq = FnMap::new(2, 2, |p: &DVector<f64>| {
            Some(DVector::from_vec(vec![
                p[0] * p[0] - p[1] * p[1],
                2.0 * p[0] * p[1],
            ]))
        });
        let j = jacobian(&sq, &DVector::from_vec(vec![1.0, 0.0])).unwrap();
        assert!(max_abs(&(j - DMatrix::identity(2, 2) * 2.0)) < 1e-6);
    }

    #[test]
    fn stencil_shrinks_near_boundary_then_fails() {
        // Domain x < 1; the base step at 1 - 1e-7 crosses the boundary.
        let f = FnMap::new(1, 1, |p: &DVector<f64>| (p[0] < 1.0).then(|| p.clone()));
        let near = DVector::from_vec(vec![1.0 - 3e-7]);
        let j = jacobian(&f, &near).unwrap();
        assert!((j[(0, 0)] - 1.0).abs() < 1e-9);
        let too_close = DVector::from_vec(vec![1.0 - 1e-12]);
        assert!(matches!(
            jacobian(&f, &too_close),
            Err(Error::OutsideDomain(_))
        ));
    }

    #[test]
    fn richardson_is_more_accurate_on_cubic() {
        let f = FnMap::new(1, 1, |p: &DVector<f64>| {
            Some(DVector::from_vec(vec![p[0].powi(3)]))
        })
        .with_step(1e-3);
        let p = DVector::from_vec(vec![1.0]);
        let c = jacobian_with(&f, &p, Differencing::Central).unwrap()[(0, 0)];
        let r = jacobian_with(&f, &p, Differencing::Richardson).unwrap()[(0, 0)];
        assert!((r - 3.0).abs() < (c - 3.0).abs());
    }
}
