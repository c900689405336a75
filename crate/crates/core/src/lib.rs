//! Numerical constructions behind a Lefschetz fibration over `CP^1` whose
//! monodromy realizes a Dehn twist on `CP^n x CP^{n+1}`.
//!
//! The crate is organized bottom-up:
//!
//! * [`symplectic`]: constant symplectic forms, finite-difference Jacobians,
//!   pullbacks, symplectic complements, 2-form quadrature and constrained
//!   RK4 transport.
//! * [`dehn`]: the cotangent bundle `T*S^N`, the normalized geodesic flow and
//!   the model Dehn twist.
//! * [`lefschetz_std`]: the quadratic model `z -> sum z_j^2` on `C^N`, its
//!   parallel transport and monodromy.
//! * [`toric`]: the toric manifold `F = Psi^{-1}(kappa)/T^2`, projective
//!   spaces with Fubini-Study forms and the Lagrangian sphere `L^mu`.
//! * [`fibration`]: the fibration `X -> CP^1`, its Darboux chart, both
//!   transport backends and the vanishing cycle.
//!
//! Real coordinates of `C^N` are interleaved: `(Re z_1, Im z_1, ..., Re z_N, Im z_N)`.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dehn;
pub mod error;
pub mod fibration;
pub mod lefschetz_std;
pub mod path;
pub mod sampling;
pub mod symplectic;
pub mod toric;

pub use error::{Error, Result};

pub use nalgebra::{DMatrix, DVector};
pub use num_complex::Complex64;
