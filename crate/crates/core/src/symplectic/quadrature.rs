use std::f64::consts::{FRAC_PI_2, PI};

use nalgebra::DVector;

use super::forms::{pullback, AmbientForm};
use super::jacobian::SmoothMap;
use crate::{Error, Result};

pub const MAX_REFINEMENTS: usize = 8;

/// Polar Gauss-Legendre rule with refinement until the relative change is small.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    pub radial: usize,
    pub angular: usize,
    pub refinement: usize,
    pub stop: f64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            radial: 16,
            angular: 16,
            refinement: 2,
            stop: 1e-10,
        }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<()> {
        if self.radial < 4 || self.angular < 4 {
            return Err(Error::InvalidParameter(
                "quadrature node counts must be >= 4".into(),
            ));
        }
        if self.refinement < 2 {
            return Err(Error::InvalidParameter(
                "refinement factor must be >= 2".into(),
            ));
        }
        if !(self.stop > 0.0) {
            return Err(Error::InvalidParameter(
                "stop threshold must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Integration domains in polar form. `Plane` is all of `R^2`, compactified
/// by `r = tan(rho)` with `rho` in `[0, pi/2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PolarDomain {
    Disk { radius: f64 },
    Annulus { inner: f64, outer: f64 },
    Plane,
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

fn polar_rule(
    f: &dyn Fn(f64, f64) -> Result<f64>,
    domain: PolarDomain,
    radial: usize,
    angular: usize,
) -> Result<f64> {
    let (rn, rw) = gauss_legendre(radial);
    let (an, aw) = gauss_legendre(angular);
    let (lo, hi) = match domain {
        PolarDomain::Disk { radius } => (0.0, radius),
        PolarDomain::Annulus { inner, outer } => (inner, outer),
        PolarDomain::Plane => (0.0, FRAC_PI_2),
    };
    let rmid = 0.5 * (hi + lo);
    let rhalf = 0.5 * (hi - lo);
    let mut total = 0.0;
    for (xr, wr) in rn.iter().zip(&rw) {
        let s = rmid + rhalf * xr;
        let (r, jac) = match domain {
            PolarDomain::Plane => {
                let c = s.cos();
                (s.tan(), 1.0 / (c * c))
            }
            _ => (s, 1.0),
        };
        let mut ring = 0.0;
        for (xa, wa) in an.iter().zip(&aw) {
            let theta = PI * (1.0 + xa);
            ring += wa * f(r * theta.cos(), r * theta.sin())?;
        }
        total += wr * ring * PI * r * jac;
    }
    Ok(total * rhalf)
}

/// Integrates a scalar density `f(x, y) dx dy` over a polar domain with refinement.
pub fn integrate_polar(
    f: &dyn Fn(f64, f64) -> Result<f64>,
    domain: PolarDomain,
    spec: &QuadratureSpec,
) -> Result<f64> {
    spec.validate()?;
    match domain {
        PolarDomain::Disk { radius } if !(radius > 0.0) => {
            return Err(Error::InvalidParameter(
                "disk radius must be positive".into(),
            ))
        }
        PolarDomain::Annulus { inner, outer } if !(0.0 <= inner && inner < outer) => {
            return Err(Error::InvalidParameter(
                "annulus needs 0 <= inner < outer".into(),
            ))
        }
        _ => {}
    }
    let (mut nr, mut na) = (spec.radial, spec.angular);
    let mut prev = polar_rule(f, domain, nr, na)?;
    let mut change = f64::INFINITY;
    for _ in 0..MAX_REFINEMENTS {
        nr *= spec.refinement;
        na *= spec.refinement;
        let next = polar_rule(f, domain, nr, na)?;
        change = (next - prev).abs() / next.abs().max(1e-14);
        if change < spec.stop {
            return Ok(next);
        }
        prev = next;
    }
    Err(Error::QuadratureNotConverged {
        refinements: MAX_REFINEMENTS,
        change,
    })
}

/// Integral of `chart^* form` over a planar domain; `chart` maps `R^2` into the
/// ambient space of `form`.
pub fn integrate_2form(
    chart: &dyn SmoothMap,
    form: &AmbientForm,
    domain: PolarDomain,
    spec: &QuadratureSpec,
) -> Result<f64> {
    if chart.domain_dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            got: chart.domain_dim(),
        });
    }
    let density = |x: f64, y: f64| -> Result<f64> {
        let pb = pullback(form, chart, &DVector::from_vec(vec![x, y]))?;
        Ok(pb[(0, 1)])
    };
    integrate_polar(&density, domain, spec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symplectic::FnMap;

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        let (x, w) = gauss_legendre(5);
        let s: f64 = w.iter().sum();
        assert!((s - 2.0).abs() < 1e-14);
        // degree 8 <= 2n - 1 = 9
        let i8: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(8)).sum();
        assert!((i8 - 2.0 / 9.0).abs() < 1e-14);
    }

    #[test]
    fn unit_disk_area() {
        let id = FnMap::new(2, 2, |p: &DVector<f64>| Some(p.clone()));
        let v = integrate_2form(
            &id,
            &AmbientForm::standard(1),
            PolarDomain::Disk { radius: 1.0 },
            &QuadratureSpec::default(),
        )
        .unwrap();
        assert!((v - PI).abs() / PI <= 1e-8);
    }

    #[test]
    fn annulus_area() {
        // r dr ^ dtheta over 1 <= r <= 2 is pi (4 - 1).
        let id = FnMap::new(2, 2, |p: &DVector<f64>| Some(p.clone()));
        let v = integrate_2form(
            &id,
            &AmbientForm::standard(1),
            PolarDomain::Annulus {
                inner: 1.0,
                outer: 2.0,
            },
            &QuadratureSpec::default(),
        )
        .unwrap();
        assert!((v - 3.0 * PI).abs() / (3.0 * PI) <= 1e-8);
    }

    #[test]
    fn fubini_study_area_of_cp1() {
        // Lift w -> (1, w)/sqrt(1 + |w|^2) into S^3; the pullback of the flat
        // form through any section of the Hopf map is the Fubini-Study form.
        let lift = FnMap::new(2, 4, |p: &DVector<f64>| {
            let n = (1.0 + p[0] * p[0] + p[1] * p[1]).sqrt();
            Some(DVector::from_vec(vec![1.0 / n, 0.0, p[0] / n, p[1] / n]))
        });
        let v = integrate_2form(
            &lift,
            &AmbientForm::standard(2),
            PolarDomain::Plane,
            &QuadratureSpec::default(),
        )
        .unwrap();
        assert!((v - PI).abs() / PI <= 1e-6, "{v}");
    }

    #[test]
    fn bad_spec_and_nonconvergence() {
        let bad = QuadratureSpec {
            radial: 2,
            ..Default::default()
        };
        let f = |_: f64, _: f64| Ok(1.0);
        assert!(integrate_polar(&f, PolarDomain::Plane, &bad).is_err());
        // 1/r^2 on the plane is not integrable; the rule never settles.
        let g = |x: f64, y: f64| Ok(1.0 / (x * x + y * y));
        let spec = QuadratureSpec {
            radial: 4,
            angular: 4,
            refinement: 2,
            stop: 1e-12,
        };
        assert!(matches!(
            integrate_polar(&g, PolarDomain::Plane, &spec),
            Err(Error::QuadratureNotConverged { .. })
        ));
    }
}
