//! Complex projective spaces, Fubini-Study forms, and the submanifolds of the
//! toric manifold that are compared against them.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::{Kappa, Layout, ToricPoint};
use crate::symplectic::linalg::{max_abs, nullspace};
use crate::symplectic::{
    integrate_2form, pullback, AmbientForm, FnMap, PolarDomain, QuadratureSpec,
};
use crate::{Error, Result};

const PHASE_THRESHOLD: f64 = 1e-12;
const HORIZONTAL_TOL: f64 = 1e-10;
const Q0_TOL: f64 = 1e-10;

fn cdot(a: &DVector<f64>, b: &DVector<f64>) -> Complex64 {
    // <a, b> = sum conj(a_j) b_j
    a.as_slice()
        .chunks_exact(2)
        .zip(b.as_slice().chunks_exact(2))
        .map(|(x, y)| Complex64::new(x[0], -x[1]) * Complex64::new(y[0], y[1]))
        .sum()
}

fn scale(z: &DVector<f64>, c: Complex64) -> DVector<f64> {
    let mut out = z.clone();
    for k in 0..z.len() / 2 {
        let v = Complex64::new(z[2 * k], z[2 * k + 1]) * c;
        out[2 * k] = v.re;
        out[2 * k + 1] = v.im;
    }
    out
}

fn times_i(z: &DVector<f64>) -> DVector<f64> {
    scale(z, Complex64::i())
}

/// A point of `CP^m` stored as a unit representative whose first nonzero
/// coordinate is real and positive.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectivePoint {
    z: DVector<f64>,
}

impl ProjectivePoint {
    pub fn from_representative(z: &DVector<f64>) -> Result<Self> {
        if !z.len().is_multiple_of(2) || z.len() < 4 {
            return Err(Error::InvalidParameter(format!(
                "real length {} is not C^(m+1)",
                z.len()
            )));
        }
        let norm = z.norm();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::InvalidParameter(
                "zero or non-finite representative".into(),
            ));
        }
        let u = z / norm;
        let lead = u
            .as_slice()
            .chunks_exact(2)
            .map(|c| Complex64::new(c[0], c[1]))
            .find(|c| c.norm() > PHASE_THRESHOLD)
            .unwrap_or(Complex64::new(1.0, 0.0));
        let mut out = scale(&u, lead.conj() / lead.norm());
        if let Some(k) = (0..out.len() / 2)
            .find(|&k| Complex64::new(out[2 * k], out[2 * k + 1]).norm() > PHASE_THRESHOLD)
        {
            out[2 * k] = Complex64::new(out[2 * k], out[2 * k + 1]).norm();
            out[2 * k + 1] = 0.0;
        }
        Ok(Self { z: out })
    }

    pub fn from_complex(coords: &[Complex64]) -> Result<Self> {
        let z = DVector::from_iterator(2 * coords.len(), coords.iter().flat_map(|c| [c.re, c.im]));
        Self::from_representative(&z)
    }

    pub fn representative(&self) -> &DVector<f64> {
        &self.z
    }

    /// `m` in `CP^m`.
    pub fn dim(&self) -> usize {
        self.z.len() / 2 - 1
    }

    /// Fubini-Study distance `arccos |<a, b>|`, evaluated as
    /// `atan2(|a - <b,a> b|, |<a, b>|)` to stay accurate near zero.
    pub fn distance(&self, other: &ProjectivePoint) -> f64 {
        if self.z.len() != other.z.len() {
            return f64::NAN;
        }
        let c = cdot(&other.z, &self.z);
        let perp = &self.z - scale(&other.z, c);
        perp.norm().atan2(c.norm())
    }
}

/// A point of `CP^n x CP^{n+1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductPoint {
    pub first: ProjectivePoint,
    pub second: ProjectivePoint,
}

impl ProductPoint {
    pub fn distance(&self, other: &ProductPoint) -> f64 {
        self.first
            .distance(&other.first)
            .hypot(self.second.distance(&other.second))
    }
}

/// What [`fubini_study_eval`] does with vectors that are not horizontal lifts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HorizontalPolicy {
    Project,
    Reject,
}

/// Component of `v` orthogonal to `z` and `i z` (`z` a unit vector).
pub fn horizontal_part(z: &DVector<f64>, v: &DVector<f64>) -> DVector<f64> {
    let iz = times_i(z);
    v - z * z.dot(v) - &iz * iz.dot(v)
}

/// `sigma_FS(d pi V, d pi W)` for horizontal lifts `V`, `W` at the unit vector `z`.
pub fn fubini_study_eval(
    z: &DVector<f64>,
    v: &DVector<f64>,
    w: &DVector<f64>,
    policy: HorizontalPolicy,
) -> Result<f64> {
    if v.len() != z.len() || w.len() != z.len() {
        return Err(Error::DimensionMismatch {
            expected: z.len(),
            got: v.len().min(w.len()),
        });
    }
    if (z.norm() - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidParameter(format!("|z| = {}", z.norm())));
    }
    let iz = times_i(z);
    let mut vs = [v.clone(), w.clone()];
    for x in vs.iter_mut() {
        let off = z.dot(x).abs().max(iz.dot(x).abs());
        if off > HORIZONTAL_TOL * x.norm().max(1.0) {
            match policy {
                HorizontalPolicy::Reject => {
                    return Err(Error::NotTangent(format!("vertical component {off:e}")))
                }
                HorizontalPolicy::Project => {
                    log::warn!("projecting a non-horizontal vector (vertical part {off:e})");
                    *x = horizontal_part(z, x);
                }
            }
        }
    }
    AmbientForm::standard(z.len() / 2).eval(&vs[0], &vs[1])
}

/// `kappa_1 sigma + kappa_2 sigma` on `CP^n x CP^{n+1}`, evaluated on the
/// images of level-set vectors at a `q = 0` point.
pub fn product_form_eval(p: &ToricPoint, v: &DVector<f64>, w: &DVector<f64>) -> Result<f64> {
    let (s_part, x_part) = split_q0(p)?;
    let l = Layout { n: p.n() };
    let pick = |u: &DVector<f64>| -> (DVector<f64>, DVector<f64>) {
        let s = DVector::from_iterator(
            2 * (l.n + 1),
            (0..=l.n).flat_map(|j| [u[2 * l.s(j)], u[2 * l.s(j) + 1]]),
        );
        let x = DVector::from_iterator(
            2 * (l.n + 2),
            (0..=l.n + 1).flat_map(|j| [u[2 * l.x(j)], u[2 * l.x(j) + 1]]),
        );
        (s, x)
    };
    let (vs, vx) = pick(v);
    let (ws, wx) = pick(w);
    let kappa = p.kappa();
    let term = |z: &DVector<f64>, a: &DVector<f64>, b: &DVector<f64>, k: f64| -> Result<f64> {
        // unit lifts of tangent vectors are u / sqrt(k)
        let (ha, hb) = (horizontal_part(z, a), horizontal_part(z, b));
        Ok(k * fubini_study_eval(
            z,
            &(ha / k.sqrt()),
            &(hb / k.sqrt()),
            HorizontalPolicy::Reject,
        )?)
    };
    Ok(term(&s_part, &vs, &ws, kappa.k1)? + term(&x_part, &vx, &wx, kappa.k2)?)
}

fn split_q0(p: &ToricPoint) -> Result<(DVector<f64>, DVector<f64>)> {
    let l = Layout { n: p.n() };
    let w = p.w();
    let q = l.get(w, l.q()).norm();
    if q > Q0_TOL {
        return Err(Error::OutsideDomain(format!("|q| = {q:e} is not zero")));
    }
    let s = DVector::from_iterator(
        2 * (l.n + 1),
        (0..=l.n).flat_map(|j| [w[2 * l.s(j)], w[2 * l.s(j) + 1]]),
    );
    let x = DVector::from_iterator(
        2 * (l.n + 2),
        (0..=l.n + 1).flat_map(|j| [w[2 * l.x(j)], w[2 * l.x(j) + 1]]),
    );
    let (ns, nx) = (s.norm(), x.norm());
    Ok((s / ns, x / nx))
}

/// `([s_0 : ... : s_n], [x_0 : ... : x_{n+1}])` on the locus `q = 0`.
pub fn q0_product_iso(p: &ToricPoint) -> Result<ProductPoint> {
    let (s, x) = split_q0(p)?;
    Ok(ProductPoint {
        first: ProjectivePoint::from_representative(&s)?,
        second: ProjectivePoint::from_representative(&x)?,
    })
}

/// `z -> (1, w) / sqrt(1 + |w|^2)`, a lift of the affine chart of `CP^1`.
fn cp1_affine_lift(p: &DVector<f64>) -> DVector<f64> {
    let d = (1.0 + p[0] * p[0] + p[1] * p[1]).sqrt();
    DVector::from_vec(vec![1.0 / d, 0.0, p[0] / d, p[1] / d])
}

/// Total Fubini-Study area of `CP^1`, integrated over the affine chart.
pub fn fubini_study_total_cp1(spec: &QuadratureSpec) -> Result<f64> {
    let chart = FnMap::new(2, 4, |p: &DVector<f64>| Some(cp1_affine_lift(p)));
    integrate_2form(&chart, &AmbientForm::standard(2), PolarDomain::Plane, spec)
}

fn line_integral(kappa: Kappa, n: usize, spec: &QuadratureSpec, fiber: bool) -> Result<f64> {
    let l = Layout::new(n)?;
    let (r1, r2) = (kappa.k1.sqrt(), kappa.k2.sqrt());
    let lift = move |p: &DVector<f64>| -> Option<DVector<f64>> {
        let c = cp1_affine_lift(p);
        let (a, b) = (Complex64::new(c[0], c[1]), Complex64::new(c[2], c[3]));
        let mut w = DVector::zeros(l.real_dim());
        if fiber {
            l.set(&mut w, l.s(0), a * r1);
            l.set(&mut w, l.s(1), b * r1);
            l.set(&mut w, l.x(n + 1), Complex64::new(r2, 0.0));
        } else {
            l.set(&mut w, l.s(n), Complex64::new(r1, 0.0));
            l.set(&mut w, l.x(n), b * r2);
            l.set(&mut w, l.x(n + 1), a * r2);
        }
        Some(w)
    };
    let chart = FnMap::new(2, l.real_dim(), lift);
    integrate_2form(
        &chart,
        &AmbientForm::standard(l.complex_dim()),
        PolarDomain::Plane,
        spec,
    )
}

/// Area of the line `q = s_2 = ... = s_n = 0`, `x = 0` (expected `kappa_1 pi`).
pub fn line_integral_fiber(kappa: Kappa, n: usize, spec: &QuadratureSpec) -> Result<f64> {
    line_integral(kappa, n, spec, true)
}

/// Area of the line `q = s_0 = ... = s_{n-1} = x_0 = ... = x_{n-1} = 0`
/// (expected `kappa_2 pi`).
pub fn line_integral_section(kappa: Kappa, n: usize, spec: &QuadratureSpec) -> Result<f64> {
    line_integral(kappa, n, spec, false)
}

/// `(z / sqrt(mu), sqrt(1 - |z|^2 / mu))`.
pub fn hopf_lift(mu: f64, z: &DVector<f64>) -> Result<DVector<f64>> {
    if !(mu > 0.0) {
        return Err(Error::InvalidParameter(format!("mu = {mu}")));
    }
    let r2 = z.norm_squared();
    if !(r2 < mu) {
        return Err(Error::OutsideDomain(format!("|z|^2 = {r2} >= mu = {mu}")));
    }
    let mut out = DVector::zeros(z.len() + 2);
    out.rows_mut(0, z.len()).copy_from(&(z / mu.sqrt()));
    out[z.len()] = (1.0 - r2 / mu).sqrt();
    Ok(out)
}

/// `[z_0 : ... : z_n : sqrt(mu - |z|^2)]`.
pub fn hopf_embedding(mu: f64, z: &DVector<f64>) -> Result<ProjectivePoint> {
    ProjectivePoint::from_representative(&hopf_lift(mu, z)?)
}

/// `max |i^*(mu sigma) - omega|` at `z`.
pub fn hopf_pullback_defect(mu: f64, z: &DVector<f64>) -> Result<f64> {
    hopf_lift(mu, z)?;
    let d = z.len();
    let lift = FnMap::new(d, d + 2, |p: &DVector<f64>| hopf_lift(mu, p).ok());
    let pulled = pullback(&AmbientForm::standard(d / 2 + 1), &lift, z)? * mu;
    let flat = AmbientForm::standard(d / 2).matrix().clone();
    Ok(max_abs(&(pulled - flat)))
}

fn conj(z: &DVector<f64>) -> DVector<f64> {
    DVector::from_fn(z.len(), |i, _| if i % 2 == 0 { z[i] } else { -z[i] })
}

/// The point `([conj z], [z : sqrt(mu - 1)])` of `L^mu`.
pub fn l_mu_point(mu: f64, z: &DVector<f64>) -> Result<ProductPoint> {
    let (a, b) = l_mu_lifts(mu, z);
    Ok(ProductPoint {
        first: ProjectivePoint::from_representative(&a)?,
        second: ProjectivePoint::from_representative(&b)?,
    })
}

fn l_mu_lifts(mu: f64, z: &DVector<f64>) -> (DVector<f64>, DVector<f64>) {
    let mut b = DVector::zeros(z.len() + 2);
    b.rows_mut(0, z.len()).copy_from(z);
    b[z.len()] = (mu - 1.0).sqrt();
    (conj(z), b / mu.sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LagrangianCheck {
    /// `max |sigma_mu|` over pairs of the tangent basis.
    pub residual: f64,
    /// `max |sigma_{CP^n} part + omega restricted to the sphere|`.
    pub sign_defect: f64,
}

/// Lagrangian test for `L^mu` at the image of `z` in `S^{2n+1}`.
pub fn l_mu_tangent_check(mu: f64, n: usize, z: &DVector<f64>) -> Result<LagrangianCheck> {
    if z.len() != 2 * (n + 1) {
        return Err(Error::DimensionMismatch {
            expected: 2 * (n + 1),
            got: z.len(),
        });
    }
    if !(mu > 1.0) {
        return Err(Error::InvalidParameter(format!("mu = {mu} must exceed 1")));
    }
    if (z.norm() - 1.0).abs() > 1e-10 {
        return Err(Error::OutsideDomain(format!("|z| = {}", z.norm())));
    }
    let frame = nullspace(&DMatrix::from_row_slice(1, z.len(), z.as_slice()));
    let on_sphere = |a: &DVector<f64>| {
        let p = z + &frame * a;
        &p / p.norm()
    };
    let k = frame.ncols();
    let sphere = FnMap::new(k, z.len(), |a: &DVector<f64>| Some(on_sphere(a)));
    let first = FnMap::new(k, z.len(), |a: &DVector<f64>| {
        Some(l_mu_lifts(mu, &on_sphere(a)).0)
    });
    let second = FnMap::new(k, z.len() + 2, |a: &DVector<f64>| {
        Some(l_mu_lifts(mu, &on_sphere(a)).1)
    });
    let origin = DVector::zeros(k);
    let s1 = pullback(&AmbientForm::standard(n + 1), &first, &origin)?;
    let s2 = pullback(&AmbientForm::standard(n + 2), &second, &origin)? * mu;
    let flat = pullback(&AmbientForm::standard(n + 1), &sphere, &origin)?;
    Ok(LagrangianCheck {
        residual: max_abs(&(&s1 + &s2)),
        sign_defect: max_abs(&(&s1 + &flat)),
    })
}
