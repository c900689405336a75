//! Global consequences: the vanishing cycle at infinity, invariance of the
//! hypersurface `S` under transport, and monodromy around the critical value.

use std::f64::consts::PI;

use nalgebra::DVector;
use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;

use super::ambient::{circle, transport_ambient, ExtendedPath};
use super::local::{darboux_lift, local_from_level_set, one_minus_g, transport_local};
use super::{phi_t, projectivize, x_residual_raw, BasePoint, SHypersurfacePoint, XPoint};
use crate::path::BasePath;
use crate::sampling::standard_normal_vector;
use crate::toric::{gauge_fix, Kappa, Layout, LevelSetPoint, ProductPoint};
use crate::{Error, Result};

/// Level-set representative `(conj x, 0, x, sqrt(mu - 1))` of a point of the
/// vanishing cycle at infinity (`|x| = 1`).
pub fn vanishing_cycle_level_point(mu: f64, n: usize, x: &DVector<f64>) -> Result<XPoint> {
    let l = Layout::new(n)?;
    if x.len() != 2 * (n + 1) {
        return Err(Error::DimensionMismatch {
            expected: 2 * (n + 1),
            got: x.len(),
        });
    }
    if (x.norm() - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidParameter(format!(
            "|x| = {} is not 1",
            x.norm()
        )));
    }
    let xs: Vec<Complex64> = (0..=n)
        .map(|j| Complex64::new(x[2 * j], x[2 * j + 1]))
        .collect();
    let s: Vec<Complex64> = xs.iter().map(|c| c.conj()).collect();
    let w = l.assemble(
        &s,
        Complex64::new(0.0, 0.0),
        &xs,
        Complex64::new((mu - 1.0).sqrt(), 0.0),
    )?;
    XPoint::from_level(w, n, Kappa::from_mu(mu)?, BasePoint::infinity())
}

/// `Phi_infinity` of the vanishing-cycle points over `t = infinity`.
pub fn vanishing_cycle_at_infinity(
    mu: f64,
    n: usize,
    samples: &[DVector<f64>],
) -> Result<Vec<ProductPoint>> {
    samples
        .iter()
        .map(|x| phi_t(&vanishing_cycle_level_point(mu, n, x)?))
        .collect()
}

/// Gauge-fixed drift of a point of `S` transported along `path` with the
/// ambient backend.
pub fn s_transport_check(p: &SHypersurfacePoint, path: &ExtendedPath, step: f64) -> Result<f64> {
    let tp = p.point();
    let run = transport_ambient(tp.w(), tp.n(), tp.kappa(), path, step, false)?;
    let end = gauge_fix(&LevelSetPoint::new(run.end, tp.n(), tp.kappa())?);
    Ok(end.distance(tp))
}

/// Phase by which monodromy around `|t| = radius` rotates `x` on the vanishing
/// cycle: `2 pi (1 - g) / (2 - g)` with `g = g(radius)`.
pub fn expected_vanishing_phase(radius: f64) -> Result<f64> {
    let h = one_minus_g(radius)?;
    Ok(2.0 * PI * h / (1.0 + h))
}

/// A random point of `S` (`q = 0`, `sum s_j x_j = 0`) on the level set of
/// `kappa = (1, mu)`, gauge fixed.
pub fn random_s_point<R: Rng>(rng: &mut R, n: usize, mu: f64) -> Result<SHypersurfacePoint> {
    let l = Layout::new(n)?;
    let mut w = standard_normal_vector(rng, l.real_dim());
    l.set(&mut w, l.q(), Complex64::new(0.0, 0.0));
    // drop the component of x along conj(s)
    let s = l.s_vec(&w);
    let x = l.x_vec(&w);
    let s2: f64 = s.iter().map(|c| c.norm_sqr()).sum();
    let sum: Complex64 = s.iter().zip(&x).map(|(a, b)| a * b).sum();
    for j in 0..=n {
        l.set(&mut w, l.x(j), x[j] - s[j].conj() * sum / s2);
    }
    let p = LevelSetPoint::normalized_q0(w, n, Kappa::from_mu(mu)?)?;
    SHypersurfacePoint::new(gauge_fix(&p))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SampleKind {
    Hypersurface,
    VanishingCycle,
    Generic,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MonodromyOutcome {
    pub start: XPoint,
    pub end: XPoint,
    /// Gauge-fixed distance between start and end.
    pub displacement: f64,
    /// Level-set and defining-equation residual of the end point.
    pub residual: f64,
    /// Whether the loop around the critical value ran in the Darboux chart.
    pub loop_in_chart: bool,
}

impl MonodromyOutcome {
    /// Projective images of start and end.
    pub fn images(&self) -> Result<(ProductPoint, ProductPoint)> {
        Ok((phi_t(&self.start)?, phi_t(&self.end)?))
    }
}

fn monodromy_one(sample: &XPoint, mu: f64, radius: f64, step: f64) -> Result<MonodromyOutcome> {
    let n = sample.n();
    let kappa = sample.point().kappa();
    let inward = ExtendedPath::real(f64::INFINITY, radius)?;
    let outward = ExtendedPath::real(radius, f64::INFINITY)?;
    let a = transport_ambient(sample.point().w(), n, kappa, &inward, step, false)?;
    let (around, loop_in_chart) = match local_from_level_set(&a.end, n, mu) {
        Ok(local) => {
            let run = transport_local(&local, &BasePath::arc(radius, 0.0, 2.0 * PI), step, false)?;
            (darboux_lift(run.end.y(), n, mu)?, true)
        }
        Err(_) => {
            let lp = ExtendedPath::new(vec![circle(radius)])?;
            (
                transport_ambient(&a.end, n, kappa, &lp, step, false)?.end,
                false,
            )
        }
    };
    let b = transport_ambient(&around, n, kappa, &outward, step, false)?;
    let level = LevelSetPoint::new(b.end.clone(), n, kappa)?;
    let residual = level
        .moment_residual()
        .max(x_residual_raw(&b.end, n, &BasePoint::infinity()));
    let end = XPoint::new(gauge_fix(&level), BasePoint::infinity())?;
    let displacement = end.point().distance(sample.point());
    Ok(MonodromyOutcome {
        start: sample.clone(),
        end,
        displacement,
        residual,
        loop_in_chart,
    })
}

/// Monodromy of the loop based at infinity around `|t| = radius`, applied to
/// points of the fiber at infinity. The loop itself runs in the Darboux chart
/// when the point is inside it and in level-set coordinates otherwise.
pub fn monodromy_x(
    mu: f64,
    radius: f64,
    samples: &[XPoint],
    step: f64,
) -> Result<Vec<MonodromyOutcome>> {
    if !(radius > 0.0) {
        return Err(Error::InvalidParameter(format!("loop radius {radius}")));
    }
    for s in samples {
        if !s.base().is_infinity() {
            return Err(Error::InvalidParameter(
                "samples must lie over t = infinity".into(),
            ));
        }
    }
    samples
        .par_iter()
        .map(|s| monodromy_one(s, mu, radius, step))
        .collect()
}

/// Where the monodromy should send the vanishing-cycle point with direction `x`:
/// `x -> e^{i beta} x` with `beta` from [`expected_vanishing_phase`].
pub fn expected_vanishing_image(
    mu: f64,
    n: usize,
    x: &DVector<f64>,
    radius: f64,
) -> Result<XPoint> {
    let beta = expected_vanishing_phase(radius)?;
    let rotated = rotate(x, beta);
    vanishing_cycle_level_point(mu, n, &rotated)
}

/// The antipodal image `x -> -x` of a vanishing-cycle point.
pub fn antipodal_vanishing_image(mu: f64, n: usize, x: &DVector<f64>) -> Result<XPoint> {
    vanishing_cycle_level_point(mu, n, &(-x))
}

fn rotate(x: &DVector<f64>, phase: f64) -> DVector<f64> {
    let c = Complex64::from_polar(1.0, phase);
    let mut out = x.clone();
    for k in 0..x.len() / 2 {
        let v = Complex64::new(x[2 * k], x[2 * k + 1]) * c;
        out[2 * k] = v.re;
        out[2 * k + 1] = v.im;
    }
    out
}

/// Transports the vanishing-cycle point with direction `x` from `t = 1` up to
/// `t = to` in the chart and returns its projective image.
pub fn transported_vanishing_image(
    mu: f64,
    n: usize,
    x: &DVector<f64>,
    to: f64,
    step: f64,
) -> Result<ProductPoint> {
    let start = super::local::vanishing_cycle_point(1.0, mu, n, x)?;
    let run = transport_local(&start, &BasePath::real_line(1.0, to), step, false)?;
    projectivize(&darboux_lift(run.end.y(), n, mu)?, n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::{seeded_rng, unit_vector};
    use crate::toric::l_mu_point;

    #[test]
    fn vanishing_cycle_at_infinity_is_l_mu() {
        let mut rng = seeded_rng(70);
        let e1 = DVector::from_vec(vec![1.0, 0.0, 0.0, 0.0]);
        let img = vanishing_cycle_at_infinity(2.0, 1, std::slice::from_ref(&e1)).unwrap();
        let h = 0.5f64.sqrt();
        assert_eq!(
            img[0].first.representative().as_slice(),
            &[1.0, 0.0, 0.0, 0.0]
        );
        assert!(
            (img[0].second.representative() - DVector::from_vec(vec![h, 0.0, 0.0, 0.0, h, 0.0]))
                .norm()
                < 1e-15
        );
        let xs: Vec<DVector<f64>> = (0..20).map(|_| unit_vector(&mut rng, 4)).collect();
        let img = vanishing_cycle_at_infinity(2.0, 1, &xs).unwrap();
        for (x, p) in xs.iter().zip(&img) {
            assert!(p.distance(&l_mu_point(2.0, x).unwrap()) <= 1e-10);
        }
        assert!(vanishing_cycle_at_infinity(2.0, 1, &[e1 * 2.0]).is_err());
    }

    #[test]
    fn transported_samples_approach_l_mu() {
        let x = DVector::from_vec(vec![0.6, 0.0, 0.0, 0.8]);
        let p = transported_vanishing_image(2.0, 1, &x, 50.0, 1e-2).unwrap();
        assert!(p.distance(&l_mu_point(2.0, &x).unwrap()) <= 5e-3);
    }

    #[test]
    fn s_points_stay_put() {
        let mut rng = seeded_rng(71);
        let path = ExtendedPath::infinity_round_trip(1.0).unwrap();
        for _ in 0..3 {
            let p = random_s_point(&mut rng, 1, 2.0).unwrap();
            assert!(s_transport_check(&p, &path, 5e-2).unwrap() <= 1e-5);
        }
        let constant = ExtendedPath::constant(BasePoint::infinity(), 1.0);
        let p = random_s_point(&mut rng, 1, 2.0).unwrap();
        assert!(s_transport_check(&p, &constant, 1e-1).unwrap() <= 1e-12);
    }

    #[test]
    fn monodromy_on_vanishing_cycle_has_the_derived_phase() {
        let (mu, n, radius) = (2.0, 1, 20.0);
        let x = DVector::from_vec(vec![0.6, 0.0, 0.0, 0.8]);
        let sample = vanishing_cycle_level_point(mu, n, &x).unwrap();
        let out = monodromy_x(mu, radius, &[sample], 2.5e-3).unwrap();
        assert!(out[0].loop_in_chart);
        assert!(out[0].residual <= 1e-9);
        let expect = expected_vanishing_image(mu, n, &x, radius).unwrap();
        let d = out[0].end.point().distance(expect.point());
        assert!(d <= 1e-4, "{d}");
        let anti = antipodal_vanishing_image(mu, n, &x).unwrap();
        assert!(out[0].end.point().distance(anti.point()) > 1.0);
    }
}
