//! The cotangent bundle `T*S^N`, its normalized geodesic flow, and the model
//! Dehn twist obtained from a twist profile `R`.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::sampling::unit_vector;
use crate::symplectic::linalg::{max_abs, nullspace};
use crate::symplectic::{pullback, AmbientForm, FnMap};
use crate::{Error, Result};

const ON_BUNDLE_TOL: f64 = 1e-10;

/// A covector `(u, v)` on the round sphere: `|u| = 1`, `<u, v> = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct CotangentPoint {
    u: DVector<f64>,
    v: DVector<f64>,
}

impl CotangentPoint {
    pub fn new(u: DVector<f64>, v: DVector<f64>) -> Result<Self> {
        if u.len() != v.len() {
            return Err(Error::DimensionMismatch {
                expected: u.len(),
                got: v.len(),
            });
        }
        if u.iter().chain(v.iter()).any(|x| !x.is_finite()) {
            return Err(Error::InvalidParameter("non-finite covector".into()));
        }
        if (u.norm() - 1.0).abs() > ON_BUNDLE_TOL {
            return Err(Error::InvariantViolated(format!("|u| = {}", u.norm())));
        }
        if u.dot(&v).abs() > ON_BUNDLE_TOL {
            return Err(Error::InvariantViolated(format!(
                "<u, v> = {:e}",
                u.dot(&v)
            )));
        }
        Ok(Self { u, v })
    }

    /// Point of the zero section.
    pub fn zero_section(u: DVector<f64>) -> Result<Self> {
        let n = u.len();
        Self::new(u, DVector::zeros(n))
    }

    pub fn u(&self) -> &DVector<f64> {
        &self.u
    }

    pub fn v(&self) -> &DVector<f64> {
        &self.v
    }

    /// The length function `h(u, v) = |v|`.
    pub fn length(&self) -> f64 {
        self.v.norm()
    }

    /// `N + 1`, the dimension of the ambient space of the sphere.
    pub fn ambient_dim(&self) -> usize {
        self.u.len()
    }

    /// Concatenated coordinates `(u, v)`.
    pub fn to_vector(&self) -> DVector<f64> {
        let n = self.u.len();
        DVector::from_fn(2 * n, |i, _| if i < n { self.u[i] } else { self.v[i - n] })
    }

    pub fn distance(&self, other: &CotangentPoint) -> f64 {
        (self.to_vector() - other.to_vector()).norm()
    }
}

/// Normalized geodesic flow, the circle action generated by `|v|`.
pub fn geodesic_flow(p: &CotangentPoint, theta: f64) -> Result<CotangentPoint> {
    let len = p.length();
    if len == 0.0 {
        return Err(Error::ZeroCovector);
    }
    let (s, c) = theta.sin_cos();
    let u = &p.u * c + &p.v * (s / len);
    let v = &p.v * c - &p.u * (s * len);
    Ok(CotangentPoint { u, v })
}

type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A function `R` with `R(s) = 0` for `s >= s_R` and `R(-s) = R(s) - s`,
/// together with its derivative.
#[derive(Clone)]
pub struct TwistProfile {
    support: f64,
    value: ScalarFn,
    derivative: ScalarFn,
}

impl fmt::Debug for TwistProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TwistProfile")
            .field("support", &self.support)
            .finish_non_exhaustive()
    }
}

pub const DEFAULT_SUPPORT: f64 = 0.5;

/// Even `C^2` blend of `|x|`: equal to `|x|` outside `[-1, 1]`, the even
/// quartic `3/8 + 3/4 x^2 - 1/8 x^4` inside.
fn blend(x: f64) -> f64 {
    let a = x.abs();
    if a >= 1.0 {
        a
    } else {
        let x2 = x * x;
        0.375 + 0.75 * x2 - 0.125 * x2 * x2
    }
}

fn blend_derivative(x: f64) -> f64 {
    if x.abs() >= 1.0 {
        x.signum()
    } else {
        1.5 * x - 0.5 * x * x * x
    }
}

impl TwistProfile {
    /// Validates a user-supplied profile on a sample grid over `[-2 s_R, 2 s_R]`.
    pub fn new(
        support: f64,
        value: impl Fn(f64) -> f64 + Send + Sync + 'static,
        derivative: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Result<Self> {
        if !(support > 0.0) {
            return Err(Error::InvalidParameter(
                "support radius must be positive".into(),
            ));
        }
        let prof = Self {
            support,
            value: Arc::new(value),
            derivative: Arc::new(derivative),
        };
        prof.check_invariants()?;
        Ok(prof)
    }

    /// `R(s) = s/2 - q(s)/2` with `q(s) = s_R c(s/s_R)` and `c` the even `C^2`
    /// blend of `|x|` matching value, slope and curvature at `x = 1`.
    pub fn default_blend(support: f64) -> Result<Self> {
        if !(support > 0.0) || !support.is_finite() {
            return Err(Error::InvalidParameter(format!("support radius {support}")));
        }
        let value = move |s: f64| {
            if s.abs() >= support {
                // exact: q(s) = |s| here
                0.5 * s - 0.5 * s.abs()
            } else {
                0.5 * s - 0.5 * support * blend(s / support)
            }
        };
        let derivative = move |s: f64| 0.5 - 0.5 * blend_derivative(s / support);
        Ok(Self {
            support,
            value: Arc::new(value),
            derivative: Arc::new(derivative),
        })
    }

    pub fn support(&self) -> f64 {
        self.support
    }

    pub fn value(&self, s: f64) -> f64 {
        (self.value)(s)
    }

    pub fn derivative(&self, s: f64) -> f64 {
        (self.derivative)(s)
    }

    pub fn check_invariants(&self) -> Result<()> {
        let sr = self.support;
        for k in 0..=40 {
            let s = sr * (1.0 + k as f64 * 0.25);
            if self.value(s) != 0.0 {
                return Err(Error::InvariantViolated(format!(
                    "R({s}) = {}",
                    self.value(s)
                )));
            }
        }
        if (self.derivative(0.0) - 0.5).abs() > 1e-10 {
            return Err(Error::InvariantViolated("R'(0) != 1/2".into()));
        }
        for k in 0..=80 {
            let s = -2.0 * sr + k as f64 * sr / 20.0;
            let defect = self.value(-s) - self.value(s) + s;
            if defect.abs() > 1e-10 {
                return Err(Error::InvariantViolated(format!(
                    "R(-s) - R(s) + s = {defect:e}"
                )));
            }
        }
        Ok(())
    }
}

/// The default profile with the given support radius.
pub fn profile_default(support: f64) -> Result<TwistProfile> {
    TwistProfile::default_blend(support)
}

/// Random covector with `u` uniform on `S^{m-1}`, `v` in a uniform tangent
/// direction and `|v| = len`.
pub fn random_cotangent_point<R: Rng>(rng: &mut R, m: usize, len: f64) -> Result<CotangentPoint> {
    if m < 2 {
        return Err(Error::InvalidParameter(format!(
            "S^{} has no cotangent directions",
            m as i64 - 1
        )));
    }
    let u = unit_vector(rng, m);
    loop {
        let w = unit_vector(rng, m);
        let v = &w - &u * u.dot(&w);
        let norm = v.norm();
        if norm > 1e-8 {
            return CotangentPoint::new(u, &v / norm * len);
        }
    }
}

/// Time-`2 pi` flow of `R(|v|)`, extended by the antipodal map over the zero section.
pub fn model_twist(p: &CotangentPoint, profile: &TwistProfile) -> CotangentPoint {
    let len = p.length();
    if len == 0.0 {
        return CotangentPoint {
            u: -&p.u,
            v: p.v.clone(),
        };
    }
    let theta = 2.0 * PI * profile.derivative(len);
    geodesic_flow(p, theta).expect("nonzero covector")
}

/// Inverse of [`model_twist`]: the flow by `-2 pi R'(|v|)`.
pub fn model_twist_inverse(p: &CotangentPoint, profile: &TwistProfile) -> CotangentPoint {
    let len = p.length();
    if len == 0.0 {
        return CotangentPoint {
            u: -&p.u,
            v: p.v.clone(),
        };
    }
    geodesic_flow(p, -2.0 * PI * profile.derivative(len)).expect("nonzero covector")
}

/// Orthonormal local chart of `T*S^N` centered at `p`: `(a, b) in R^N x R^N`
/// maps to `u = (u0 + E a)/|u0 + E a|` and `v` the projection of `v0 + E b`
/// onto `u^perp`, where `E` is an orthonormal basis of `u0^perp`.
#[derive(Debug, Clone)]
pub struct LocalChart {
    u0: DVector<f64>,
    v0: DVector<f64>,
    frame: DMatrix<f64>,
}

impl LocalChart {
    pub fn at(p: &CotangentPoint) -> Self {
        let row = DMatrix::from_row_slice(1, p.u.len(), p.u.as_slice());
        Self {
            u0: p.u.clone(),
            v0: p.v.clone(),
            frame: nullspace(&row),
        }
    }

    /// `N`, the sphere dimension.
    pub fn dim(&self) -> usize {
        self.frame.ncols()
    }

    pub fn point(&self, coords: &DVector<f64>) -> CotangentPoint {
        let n = self.dim();
        let a = coords.rows(0, n);
        let b = coords.rows(n, n);
        let u = &self.u0 + &self.frame * a;
        let u = &u / u.norm();
        let w = &self.v0 + &self.frame * b;
        let v = &w - &u * u.dot(&w);
        CotangentPoint { u, v }
    }
}

/// `max |(T o phi)^* omega - phi^* omega|` in the local chart `phi` at `p`,
/// with `omega = -sum du ^ dv`. Zero for a symplectic map `T`.
pub fn symplectic_defect<T>(map: T, p: &CotangentPoint) -> Result<f64>
where
    T: Fn(&CotangentPoint) -> CotangentPoint + Sync,
{
    let chart = LocalChart::at(p);
    let n = chart.dim();
    let m = p.ambient_dim();
    let form = AmbientForm::cotangent(m);
    let plain = FnMap::new(2 * n, 2 * m, |c: &DVector<f64>| {
        Some(chart.point(c).to_vector())
    });
    let mapped = FnMap::new(2 * n, 2 * m, |c: &DVector<f64>| {
        Some(map(&chart.point(c)).to_vector())
    });
    let origin = DVector::zeros(2 * n);
    let before = pullback(&form, &plain, &origin)?;
    let after = pullback(&form, &mapped, &origin)?;
    Ok(max_abs(&(after - before)))
}
