//! Numerical substrate shared by every construction in the crate.

mod chart;
mod forms;
mod jacobian;
pub mod linalg;
mod ode;
mod quadrature;

pub use chart::ConstraintChart;
pub use forms::{
    form_eval, is_lagrangian, j0, pullback, symplectic_complement, AmbientForm, LagrangianTest,
    Subspace,
};
pub use jacobian::{jacobian, jacobian_with, Differencing, FnMap, SmoothMap, FD_STEP};
pub use ode::{
    ode_transport, project_onto, ConstraintSet, TracePoint, Transport, MAX_PROJECTION_ITERS,
    PROJECTION_TOL,
};
pub use quadrature::{
    gauss_legendre, integrate_2form, integrate_polar, PolarDomain, QuadratureSpec, MAX_REFINEMENTS,
};

use nalgebra::DVector;

use crate::{Error, Result};

/// A point of `R^D` with finite coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct RealPoint(DVector<f64>);

impl RealPoint {
    pub fn new(coords: DVector<f64>) -> Result<Self> {
        if coords.iter().all(|c| c.is_finite()) {
            Ok(Self(coords))
        } else {
            Err(Error::InvalidParameter("non-finite coordinate".into()))
        }
    }

    pub fn from_slice(coords: &[f64]) -> Result<Self> {
        Self::new(DVector::from_column_slice(coords))
    }

    pub fn with_dim(coords: DVector<f64>, dim: usize) -> Result<Self> {
        if coords.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: coords.len(),
            });
        }
        Self::new(coords)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &DVector<f64> {
        &self.0
    }

    pub fn into_inner(self) -> DVector<f64> {
        self.0
    }
}

impl AsRef<DVector<f64>> for RealPoint {
    fn as_ref(&self) -> &DVector<f64> {
        &self.0
    }
}
