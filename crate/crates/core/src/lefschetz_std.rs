//! The standard Lefschetz model `pi_std(z) = sum z_j^2` on `C^N`: fibers, the
//! identification `Phi_r` of a regular fiber with `T*S^{N-1}`, the spheres
//! `Sigma_t`, symplectic parallel transport and monodromy.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector, Matrix2, Vector2};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::dehn::CotangentPoint;
use crate::path::BasePath;
use crate::symplectic::linalg::{max_abs, nullspace};
use crate::symplectic::{
    ode_transport, pullback, symplectic_complement, AmbientForm, ConstraintChart, ConstraintSet,
    FnMap, SmoothMap, Subspace, Transport,
};
use crate::{Error, Result};

pub const FIBER_TOL: f64 = 1e-9;

/// `sum z_j^2` with `z` in interleaved real coordinates.
pub fn pi_std(z: &DVector<f64>) -> Complex64 {
    z.as_slice()
        .chunks_exact(2)
        .map(|c| Complex64::new(c[0], c[1]).powi(2))
        .sum()
}

/// Rows `d Re pi_std`, `d Im pi_std`.
pub fn pi_std_jacobian(z: &DVector<f64>) -> DMatrix<f64> {
    let mut d = DMatrix::zeros(2, z.len());
    for (j, c) in z.as_slice().chunks_exact(2).enumerate() {
        let (a, b) = (c[0], c[1]);
        d[(0, 2 * j)] = 2.0 * a;
        d[(0, 2 * j + 1)] = -2.0 * b;
        d[(1, 2 * j)] = 2.0 * b;
        d[(1, 2 * j + 1)] = 2.0 * a;
    }
    d
}

/// A point of `pi_std^{-1}(t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct StdFiberPoint {
    z: DVector<f64>,
    t: Complex64,
}

impl StdFiberPoint {
    pub fn new(z: DVector<f64>, t: Complex64) -> Result<Self> {
        if !z.len().is_multiple_of(2) || z.is_empty() {
            return Err(Error::InvalidParameter(format!(
                "odd real dimension {}",
                z.len()
            )));
        }
        if z.iter().any(|x| !x.is_finite()) || !t.is_finite() {
            return Err(Error::InvalidParameter("non-finite fiber point".into()));
        }
        let r = pi_std(&z) - t;
        if r.re.abs() > FIBER_TOL || r.im.abs() > FIBER_TOL {
            return Err(Error::InvariantViolated(format!(
                "fiber residual {:e}",
                r.norm()
            )));
        }
        Ok(Self { z, t })
    }

    /// The point over its own value of `pi_std`.
    pub fn on_own_fiber(z: DVector<f64>) -> Result<Self> {
        let t = pi_std(&z);
        Self::new(z, t)
    }

    pub fn z(&self) -> &DVector<f64> {
        &self.z
    }

    pub fn t(&self) -> Complex64 {
        self.t
    }

    /// Complex dimension `N`.
    pub fn n(&self) -> usize {
        self.z.len() / 2
    }

    pub fn residual(&self) -> f64 {
        (pi_std(&self.z) - self.t).norm()
    }
}

fn interleave(re: &DVector<f64>, im: &DVector<f64>) -> DVector<f64> {
    DVector::from_fn(
        2 * re.len(),
        |i, _| if i % 2 == 0 { re[i / 2] } else { im[i / 2] },
    )
}

fn positive_real(t: Complex64) -> Result<f64> {
    if t.im.abs() <= 1e-12 && t.re > 0.0 {
        Ok(t.re)
    } else {
        Err(Error::OutsideDomain(format!(
            "fiber value {t} is not a positive real"
        )))
    }
}

/// `Phi_r(z) = (Re z / |Re z|, -|Re z| Im z)`.
pub fn phi_r(p: &StdFiberPoint) -> Result<CotangentPoint> {
    positive_real(p.t)?;
    phi_r_raw(&p.z)
}

fn phi_r_raw(z: &DVector<f64>) -> Result<CotangentPoint> {
    let n = z.len() / 2;
    let x = DVector::from_fn(n, |j, _| z[2 * j]);
    let y = DVector::from_fn(n, |j, _| z[2 * j + 1]);
    let len = x.norm();
    if len == 0.0 {
        return Err(Error::OutsideDomain("Re z = 0".into()));
    }
    let u = &x / len;
    let v = &y * (-len);
    // <u, v> = -Im(pi_std)/2 vanishes on the fiber; remove the rounding part
    let v = &v - &u * u.dot(&v);
    CotangentPoint::new(u, v)
}

/// Inverse of [`phi_r`]: `Re z = a u`, `Im z = -v / a`, `a^2 = (r + sqrt(r^2 + 4|v|^2))/2`.
pub fn phi_r_inverse(p: &CotangentPoint, r: f64) -> Result<StdFiberPoint> {
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::InvalidParameter(format!("fiber value r = {r}")));
    }
    let a = ((r + (r * r + 4.0 * p.v().norm_squared()).sqrt()) / 2.0).sqrt();
    let z = interleave(&(p.u() * a), &(p.v() / (-a)));
    StdFiberPoint::new(z, Complex64::new(r, 0.0))
}

/// `sqrt(r) e^{i theta/2} w`, a point of `Sigma_t` over `t = r e^{i theta}`.
pub fn sigma_sample(r: f64, theta: f64, w: &DVector<f64>) -> Result<StdFiberPoint> {
    if !(r > 0.0) || !r.is_finite() || !theta.is_finite() {
        return Err(Error::InvalidParameter(format!("r = {r}, theta = {theta}")));
    }
    if (w.norm() - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidParameter(format!("|w| = {}", w.norm())));
    }
    let c = Complex64::from_polar(r.sqrt(), theta / 2.0);
    let re = w * c.re;
    let im = w * c.im;
    StdFiberPoint::new(interleave(&re, &im), Complex64::from_polar(r, theta))
}

/// Tangent basis of `Sigma_t` at `sigma_sample(r, theta, w)`, the image of an
/// orthonormal basis of `w^perp` under multiplication by `sqrt(r) e^{i theta/2}`.
pub fn sigma_tangent(r: f64, theta: f64, w: &DVector<f64>) -> Result<Subspace> {
    let row = DMatrix::from_row_slice(1, w.len(), w.as_slice());
    let perp = nullspace(&row);
    let c = Complex64::from_polar(r.sqrt(), theta / 2.0);
    let cols: Vec<DVector<f64>> = perp
        .column_iter()
        .map(|e| interleave(&(e * c.re), &(e * c.im)))
        .collect();
    Subspace::from_vectors(2 * w.len(), &cols)
}

pub fn fiber_tangent_std(z: &DVector<f64>) -> Result<Subspace> {
    if z.iter().all(|&x| x == 0.0) {
        return Err(Error::OutsideDomain("critical point z = 0".into()));
    }
    Subspace::new(nullspace(&pi_std_jacobian(z)))
}

/// Symplectic complement of the fiber tangent space.
pub fn horizontal_space_std(p: &StdFiberPoint) -> Result<Subspace> {
    horizontal_at(&p.z)
}

fn horizontal_at(z: &DVector<f64>) -> Result<Subspace> {
    let fiber = fiber_tangent_std(z)?;
    let form = AmbientForm::standard(z.len() / 2);
    let h = symplectic_complement(&form, &fiber)?;
    if h.dim() != 2 {
        return Err(Error::RankDeficient {
            rank: h.dim(),
            expected: 2,
        });
    }
    Ok(h)
}

/// The horizontal vector at `z` whose image under `d pi_std` is `dt`.
pub fn horizontal_lift_std(z: &DVector<f64>, dt: Complex64) -> Result<DVector<f64>> {
    let h = horizontal_at(z)?;
    let image = pi_std_jacobian(z) * h.basis();
    let m = Matrix2::new(image[(0, 0)], image[(0, 1)], image[(1, 0)], image[(1, 1)]);
    let c = m
        .lu()
        .solve(&Vector2::new(dt.re, dt.im))
        .ok_or_else(|| Error::FieldFailure("horizontal space not transverse".into()))?;
    Ok(h.basis() * DVector::from_column_slice(c.as_slice()))
}

struct FiberOverPath<'a> {
    path: &'a BasePath,
}

impl ConstraintSet for FiberOverPath<'_> {
    fn residual(&self, p: &DVector<f64>, sigma: f64) -> DVector<f64> {
        let r = pi_std(p) - self.path.at(sigma);
        DVector::from_vec(vec![r.re, r.im])
    }

    fn jacobian(&self, p: &DVector<f64>, _: f64) -> DMatrix<f64> {
        pi_std_jacobian(p)
    }
}

/// Result of a transport in the standard model.
#[derive(Debug, Clone, PartialEq)]
pub struct StdTransport {
    pub end: StdFiberPoint,
    pub run: Transport,
}

/// Symplectic parallel transport along `path`, projected back to the moving
/// fiber after every step.
pub fn transport_std(
    start: &StdFiberPoint,
    path: &BasePath,
    step: f64,
    record_trace: bool,
) -> Result<StdTransport> {
    let path = path.avoiding_origin()?;
    if (path.start() - start.t).norm() > FIBER_TOL {
        return Err(Error::InvalidParameter(format!(
            "path starts at {} but the point lies over {}",
            path.start(),
            start.t
        )));
    }
    let constraints = FiberOverPath { path: &path };
    let field = |z: &DVector<f64>, sigma: f64| horizontal_lift_std(z, path.velocity(sigma));
    let run = ode_transport(
        field,
        path.span(),
        &start.z,
        step,
        Some(&constraints),
        record_trace,
    )?;
    let end = StdFiberPoint::new(run.end.clone(), path.end())?;
    Ok(StdTransport { end, run })
}

pub fn monodromy_loop(r: f64) -> BasePath {
    BasePath::arc(r, 0.0, 2.0 * PI)
}

/// Monodromy `rho_r` of the loop `r e^{i theta}` applied to each sample, in order.
pub fn monodromy_std(r: f64, samples: &[StdFiberPoint], step: f64) -> Result<Vec<StdFiberPoint>> {
    positive_real(Complex64::new(r, 0.0))?;
    let lp = monodromy_loop(r);
    samples
        .par_iter()
        .map(|p| transport_std(p, &lp, step, false).map(|t| t.end))
        .collect()
}

/// `Phi_r o rho_r o Phi_r^{-1}` on `T*S^{N-1}`.
pub fn conjugated_monodromy(p: &CotangentPoint, r: f64, step: f64) -> Result<CotangentPoint> {
    let z = phi_r_inverse(p, r)?;
    let image = transport_std(&z, &monodromy_loop(r), step, false)?;
    phi_r(&image.end)
}

/// `max |(Phi_r o c)^*(-sum du^dv) - c^* omega|` over a local fiber chart `c` at `p`.
pub fn phi_r_symplectic_defect(p: &StdFiberPoint) -> Result<f64> {
    positive_real(p.t)?;
    let n = p.n();
    let path = BasePath::constant(p.t, 0.0);
    let fiber = FiberOverPath { path: &path };
    let chart = ConstraintChart::new(&fiber, p.z.clone(), 0.0);
    let mapped = FnMap::new(chart.dim(), 2 * n, |a: &DVector<f64>| {
        phi_r_raw(&chart.eval(a)?).ok().map(|c| c.to_vector())
    });
    let before = pullback(
        &AmbientForm::standard(n),
        &chart,
        &DVector::zeros(chart.dim()),
    )?;
    let after = pullback(
        &AmbientForm::cotangent(n),
        &mapped,
        &DVector::zeros(chart.dim()),
    )?;
    Ok(max_abs(&(after - before)))
}

/// Change of the fiber form under `rho_r`, from transported chart perturbations.
pub fn monodromy_symplectic_defect(p: &StdFiberPoint, step: f64) -> Result<f64> {
    let r = positive_real(p.t)?;
    let n = p.n();
    let path = BasePath::constant(p.t, 0.0);
    let fiber = FiberOverPath { path: &path };
    let chart = ConstraintChart::new(&fiber, p.z.clone(), 0.0);
    let lp = monodromy_loop(r);
    let mapped = FnMap::new(chart.dim(), 2 * n, |a: &DVector<f64>| {
        let q = StdFiberPoint::new(chart.eval(a)?, p.t).ok()?;
        transport_std(&q, &lp, step, false).ok().map(|t| t.end.z)
    })
    .with_step(1e-5);
    let form = AmbientForm::standard(n);
    let origin = DVector::zeros(chart.dim());
    let before = pullback(&form, &chart, &origin)?;
    let after = pullback(&form, &mapped, &origin)?;
    Ok(max_abs(&(after - before)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::{seeded_rng, standard_normal_vector, uniform, unit_vector};
    use crate::symplectic::form_eval;

    fn e(n: usize, k: usize) -> DVector<f64> {
        DVector::from_fn(n, |i, _| if i == k { 1.0 } else { 0.0 })
    }

    fn random_fiber_point(rng: &mut crate::sampling::SampleRng, n: usize, r: f64) -> StdFiberPoint {
        let u = unit_vector(rng, n);
        let w = standard_normal_vector(rng, n);
        let v = (&w - &u * u.dot(&w)) * uniform(rng, 0.0, 1.0);
        phi_r_inverse(&CotangentPoint::new(u, v).unwrap(), r).unwrap()
    }

    #[test]
    fn pi_std_examples() {
        assert_eq!(
            pi_std(&DVector::from_vec(vec![1.0, 0.0, 0.0, 0.0])),
            Complex64::new(1.0, 0.0)
        );
        assert_eq!(
            pi_std(&DVector::from_vec(vec![0.0, 1.0, 0.0, 0.0])),
            Complex64::new(-1.0, 0.0)
        );
        let s = 0.5f64.sqrt();
        assert!(pi_std(&DVector::from_vec(vec![s, 0.0, 0.0, s])).norm() < 1e-15);
    }

    #[test]
    fn jacobian_matches_finite_differences() {
        let mut rng = seeded_rng(4);
        let z = standard_normal_vector(&mut rng, 6);
        let f = FnMap::new(6, 2, |p: &DVector<f64>| {
            let c = pi_std(p);
            Some(DVector::from_vec(vec![c.re, c.im]))
        });
        let fd = crate::symplectic::jacobian(&f, &z).unwrap();
        assert!(max_abs(&(fd - pi_std_jacobian(&z))) < 1e-8);
    }

    #[test]
    fn phi_r_examples() {
        let r = 2.0;
        let z = interleave(&(e(3, 0) * f64::sqrt(r)), &DVector::zeros(3));
        let p = StdFiberPoint::new(z, Complex64::new(r, 0.0)).unwrap();
        let c = phi_r(&p).unwrap();
        assert!((c.u() - e(3, 0)).norm() < 1e-15 && c.v().norm() == 0.0);
        let mut rng = seeded_rng(9);
        for _ in 0..50 {
            let w = unit_vector(&mut rng, 3);
            let q = sigma_sample(1.0, 0.0, &w).unwrap();
            assert!(phi_r(&q).unwrap().length() < 1e-15);
        }
        let off = StdFiberPoint::on_own_fiber(interleave(&e(2, 0), &(e(2, 0) * 0.5))).unwrap();
        assert!(phi_r(&off).is_err());
    }

    #[test]
    fn phi_r_inverse_examples() {
        let p = CotangentPoint::zero_section(e(2, 0)).unwrap();
        assert_eq!(
            phi_r_inverse(&p, 1.0).unwrap().z(),
            &interleave(&e(2, 0), &DVector::zeros(2))
        );
        let q = CotangentPoint::new(e(2, 0), e(2, 1)).unwrap();
        let z = phi_r_inverse(&q, 1.0).unwrap();
        let a2 = z.z()[0] * z.z()[0];
        assert!((a2 - (1.0 + 5f64.sqrt()) / 2.0).abs() < 1e-14);
        assert!(phi_r_inverse(&q, 0.0).is_err());
    }

    #[test]
    fn phi_r_round_trip() {
        let mut rng = seeded_rng(10);
        for r in [0.5, 1.0, 2.0] {
            for _ in 0..100 {
                let u = unit_vector(&mut rng, 3);
                let w = standard_normal_vector(&mut rng, 3);
                let v = &w - &u * u.dot(&w);
                let p = CotangentPoint::new(u, v).unwrap();
                let back = phi_r(&phi_r_inverse(&p, r).unwrap()).unwrap();
                assert!(back.distance(&p) < 1e-10);
            }
        }
    }

    #[test]
    fn phi_r_is_symplectic() {
        let mut rng = seeded_rng(11);
        for n in [2, 3] {
            for _ in 0..50 {
                let p = random_fiber_point(&mut rng, n, 1.0);
                let d = phi_r_symplectic_defect(&p).unwrap();
                assert!(d <= 1e-5, "defect {d}");
            }
        }
    }

    #[test]
    fn sigma_examples() {
        let p = sigma_sample(1.0, 0.0, &e(2, 0)).unwrap();
        assert_eq!(p.z(), &interleave(&e(2, 0), &DVector::zeros(2)));
        let q = sigma_sample(1.0, PI, &e(2, 0)).unwrap();
        assert!((q.z() - interleave(&DVector::zeros(2), &e(2, 0))).norm() < 1e-15);
        assert!(sigma_sample(1.0, 0.0, &(e(2, 0) * 2.0)).is_err());
        let mut rng = seeded_rng(12);
        for _ in 0..20 {
            let w = unit_vector(&mut rng, 3);
            let (r, th) = (
                uniform(&mut rng, 0.1, 3.0),
                uniform(&mut rng, 0.0, 2.0 * PI),
            );
            assert!(sigma_sample(r, th, &w).unwrap().residual() <= 1e-12);
            let t = sigma_tangent(r, th, &w).unwrap();
            // isotropic in C^N, hence Lagrangian in the fiber
            assert!(max_abs(&AmbientForm::standard(3).restrict(t.basis())) <= 1e-8);
        }
    }

    #[test]
    fn horizontal_space_examples() {
        let p = StdFiberPoint::new(
            interleave(&e(2, 0), &DVector::zeros(2)),
            Complex64::new(1.0, 0.0),
        )
        .unwrap();
        let h = horizontal_space_std(&p).unwrap();
        let expect = Subspace::from_vectors(4, &[e(4, 0), e(4, 1)]).unwrap();
        assert!(h.max_angle_to(&expect) < 1e-9);
        let mut rng = seeded_rng(13);
        let form = AmbientForm::standard(3);
        for _ in 0..100 {
            let len = uniform(&mut rng, 0.2, 2.0);
            let q = random_fiber_point(&mut rng, 3, len);
            let h = horizontal_space_std(&q).unwrap();
            assert_eq!(h.dim(), 2);
            let f = fiber_tangent_std(q.z()).unwrap();
            for a in h.basis().column_iter() {
                for b in f.basis().column_iter() {
                    assert!(
                        form_eval(&form, &a.into_owned(), &b.into_owned())
                            .unwrap()
                            .abs()
                            <= 1e-9
                    );
                }
            }
        }
        assert!(horizontal_space_std(
            &StdFiberPoint::new(DVector::zeros(4), Complex64::new(0.0, 0.0)).unwrap()
        )
        .is_err());
    }

    #[test]
    fn constant_path_is_identity() {
        let mut rng = seeded_rng(14);
        let p = random_fiber_point(&mut rng, 2, 1.0);
        let out = transport_std(&p, &BasePath::constant(p.t(), 1.0), 1e-2, false).unwrap();
        assert!((out.end.z() - p.z()).norm() < 1e-12);
    }

    #[test]
    fn half_and_full_loop_on_sigma() {
        let r = 1.0;
        let start = sigma_sample(r, 0.0, &e(2, 0)).unwrap();
        let half = transport_std(&start, &BasePath::arc(r, 0.0, PI), 1e-2, true).unwrap();
        let target = interleave(&DVector::zeros(2), &e(2, 0));
        assert!((half.end.z() - target).norm() < 1e-6);
        let trace = half.run.trace.unwrap();
        assert!(trace.iter().all(|t| t.residual <= 1e-9));
        let full = monodromy_std(r, std::slice::from_ref(&start), 1e-2).unwrap();
        assert!((full[0].z() + start.z()).norm() < 1e-6);
    }

    #[test]
    fn transport_rejects_mismatched_start_and_origin() {
        let start = sigma_sample(1.0, 0.0, &e(2, 0)).unwrap();
        assert!(transport_std(&start, &BasePath::real_line(2.0, 3.0), 1e-2, false).is_err());
        assert!(transport_std(&start, &BasePath::real_line(1.0, -1.0), 1e-2, false).is_err());
    }

    #[test]
    fn conjugated_monodromy_is_antipodal_on_zero_section() {
        let mut rng = seeded_rng(15);
        for _ in 0..3 {
            let u = unit_vector(&mut rng, 3);
            let p = CotangentPoint::zero_section(u.clone()).unwrap();
            let q = conjugated_monodromy(&p, 1.0, 1e-2).unwrap();
            assert!((q.u() + &u).norm() < 1e-6 && q.length() < 1e-6);
        }
    }

    #[test]
    fn monodromy_preserves_fiber_form() {
        let mut rng = seeded_rng(16);
        for _ in 0..2 {
            let p = random_fiber_point(&mut rng, 2, 1.0);
            assert!(monodromy_symplectic_defect(&p, 2e-2).unwrap() <= 1e-3);
        }
    }
}
