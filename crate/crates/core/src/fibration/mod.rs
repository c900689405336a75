//! The Lefschetz fibration `X -> CP^1` cut out of `F x CP^1` by
//! `t_1 (s_0 x_0 + ... + s_n x_n) = t_0 q`.
//!
//! Points of `X` are handled in level-set coordinates (see [`crate::toric`]);
//! near the critical point the Darboux chart of [`local`] gives flat
//! coordinates `(s, x)` in which most of the computations happen.

pub mod ambient;
pub mod local;
pub mod monodromy;

pub use ambient::{
    backend_gap, transport_ambient, AmbientTransport, ExtendedPath, Segment, SWITCH_RADIUS,
};
pub use local::{
    darboux_chart, darboux_lift, darboux_pullback_defect, explicit_lift, fiber_constraints,
    fiber_gradients, g_of_t, horizontal_lift_local, horizontal_space_local, lift_velocity_residual,
    local_from_level_set, one_minus_g, pi_loc, pi_loc_differential, random_fiber_point,
    random_w_mu_point, transport_local, vanishing_cycle_point, vanishing_cycle_sample,
    LocalFiberPoint, LocalTransport,
};
pub use monodromy::{
    antipodal_vanishing_image, expected_vanishing_image, expected_vanishing_phase, monodromy_x,
    random_s_point, s_transport_check, transported_vanishing_image, vanishing_cycle_at_infinity,
    vanishing_cycle_level_point, MonodromyOutcome, SampleKind,
};

use nalgebra::DVector;
use num_complex::Complex64;

use crate::toric::{
    gauge_fix, Kappa, Layout, LevelSetPoint, ProductPoint, ProjectivePoint, ToricPoint,
};
use crate::{Error, Result};

pub const X_TOL: f64 = 1e-9;
pub const S_Q_TOL: f64 = 1e-10;
pub const S_SUM_TOL: f64 = 1e-9;

/// `[t_0 : t_1]` scaled so that the larger coordinate is `1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BasePoint {
    t0: Complex64,
    t1: Complex64,
}

impl BasePoint {
    pub fn new(t0: Complex64, t1: Complex64) -> Result<Self> {
        if !(t0.is_finite() && t1.is_finite()) {
            return Err(Error::InvalidParameter("non-finite base point".into()));
        }
        let big = if t0.norm() >= t1.norm() { t0 } else { t1 };
        if big.norm() == 0.0 {
            return Err(Error::InvalidParameter("[0 : 0] is not a point".into()));
        }
        Ok(Self {
            t0: t0 / big,
            t1: t1 / big,
        })
    }

    pub fn affine(t: Complex64) -> Result<Self> {
        Self::new(t, Complex64::new(1.0, 0.0))
    }

    pub fn infinity() -> Self {
        Self {
            t0: Complex64::new(1.0, 0.0),
            t1: Complex64::new(0.0, 0.0),
        }
    }

    pub fn t0(&self) -> Complex64 {
        self.t0
    }

    pub fn t1(&self) -> Complex64 {
        self.t1
    }

    /// `t = t_0 / t_1`, `None` at infinity.
    pub fn t(&self) -> Option<Complex64> {
        (self.t1.norm() > 0.0).then(|| self.t0 / self.t1)
    }

    /// `w = t_1 / t_0 = 1 / t`, `None` at zero.
    pub fn w(&self) -> Option<Complex64> {
        (self.t0.norm() > 0.0).then(|| self.t1 / self.t0)
    }

    pub fn is_infinity(&self) -> bool {
        self.t1.norm() == 0.0
    }
}

fn sx_sum(w: &DVector<f64>, n: usize) -> Complex64 {
    let l = Layout { n };
    (0..=n).map(|j| l.get(w, l.s(j)) * l.get(w, l.x(j))).sum()
}

/// `|t_1 (s_0 x_0 + ... + s_n x_n) - t_0 q|`.
pub fn x_residual(p: &ToricPoint, b: &BasePoint) -> f64 {
    x_residual_raw(p.w(), p.n(), b)
}

pub(crate) fn x_residual_raw(w: &DVector<f64>, n: usize, b: &BasePoint) -> f64 {
    let l = Layout { n };
    (b.t1 * sx_sum(w, n) - b.t0 * l.get(w, l.q())).norm()
}

/// A point of `X`.
#[derive(Debug, Clone, PartialEq)]
pub struct XPoint {
    p: ToricPoint,
    b: BasePoint,
}

impl XPoint {
    pub fn new(p: ToricPoint, b: BasePoint) -> Result<Self> {
        let r = x_residual(&p, &b);
        if r > X_TOL {
            return Err(Error::InvariantViolated(format!("X residual {r:e}")));
        }
        Ok(Self { p, b })
    }

    pub fn from_level(w: DVector<f64>, n: usize, kappa: Kappa, b: BasePoint) -> Result<Self> {
        Self::new(gauge_fix(&LevelSetPoint::new(w, n, kappa)?), b)
    }

    pub fn point(&self) -> &ToricPoint {
        &self.p
    }

    pub fn base(&self) -> BasePoint {
        self.b
    }

    pub fn n(&self) -> usize {
        self.p.n()
    }

    pub fn residual(&self) -> f64 {
        x_residual(&self.p, &self.b)
    }
}

/// A point of `S = {q = 0, s_0 x_0 + ... + s_n x_n = 0}`, which lies in every fiber.
#[derive(Debug, Clone, PartialEq)]
pub struct SHypersurfacePoint(ToricPoint);

impl SHypersurfacePoint {
    pub fn new(p: ToricPoint) -> Result<Self> {
        let l = Layout { n: p.n() };
        let q = l.get(p.w(), l.q()).norm();
        let sum = sx_sum(p.w(), p.n()).norm();
        if q > S_Q_TOL || sum > S_SUM_TOL {
            return Err(Error::InvariantViolated(format!(
                "|q| = {q:e}, |sum s x| = {sum:e}"
            )));
        }
        Ok(Self(p))
    }

    pub fn point(&self) -> &ToricPoint {
        &self.0
    }

    pub fn in_fiber(&self, b: BasePoint) -> XPoint {
        XPoint {
            p: self.0.clone(),
            b,
        }
    }
}

fn block(w: &DVector<f64>, idx: impl Iterator<Item = usize>) -> DVector<f64> {
    let v: Vec<f64> = idx.flat_map(|k| [w[2 * k], w[2 * k + 1]]).collect();
    DVector::from_vec(v)
}

/// `Phi_t`: `([s_0 : ... : s_n], [x_0 : ... : x_{n+1}])` on a fiber over `t != 0`.
pub fn phi_t(xp: &XPoint) -> Result<ProductPoint> {
    if xp.b.t0.norm() == 0.0 {
        return Err(Error::OutsideDomain(
            "Phi_t is undefined on the singular fiber t = 0".into(),
        ));
    }
    projectivize(xp.p.w(), xp.n())
}

/// `([s], [x, x_{n+1}])` for any level-set representative `w`.
pub fn projectivize(w: &DVector<f64>, n: usize) -> Result<ProductPoint> {
    let l = Layout { n };
    Ok(ProductPoint {
        first: ProjectivePoint::from_representative(&block(w, (0..=n).map(|j| l.s(j))))?,
        second: ProjectivePoint::from_representative(&block(w, (0..=n + 1).map(|j| l.x(j))))?,
    })
}

/// `Phi`: the point of `CP^n x CP^{n+1}` together with the base coordinate `1/t`.
pub fn phi_global(xp: &XPoint) -> Result<(ProductPoint, Complex64)> {
    let image = phi_t(xp)?;
    let w = xp.b.w().expect("t != 0 was checked");
    Ok((image, w))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::{seeded_rng, standard_normal_vector, uniform};
    use crate::toric::{act, q0_product_iso};

    pub(crate) fn z_crit(n: usize, mu: f64) -> DVector<f64> {
        let l = Layout { n };
        let zero = vec![Complex64::new(0.0, 0.0); n + 1];
        l.assemble(
            &zero,
            Complex64::new(1.0, 0.0),
            &zero,
            Complex64::new((mu - 1.0).sqrt(), 0.0),
        )
        .unwrap()
    }

    fn random_q0(rng: &mut crate::sampling::SampleRng, n: usize, kappa: Kappa) -> ToricPoint {
        let l = Layout { n };
        let w = standard_normal_vector(rng, l.real_dim());
        gauge_fix(&LevelSetPoint::normalized_q0(w, n, kappa).unwrap())
    }

    #[test]
    fn base_point_normalization() {
        let b = BasePoint::affine(Complex64::new(0.0, 4.0)).unwrap();
        assert_eq!(b.t0(), Complex64::new(1.0, 0.0));
        assert!((b.t().unwrap() - Complex64::new(0.0, 4.0)).norm() < 1e-15);
        assert!(BasePoint::infinity().t().is_none());
        assert_eq!(BasePoint::infinity().w(), Some(Complex64::new(0.0, 0.0)));
        assert!(BasePoint::new(Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)).is_err());
    }

    #[test]
    fn x_residual_examples() {
        let mu = 2.0;
        let kappa = Kappa::from_mu(mu).unwrap();
        let crit = gauge_fix(&LevelSetPoint::new(z_crit(1, mu), 1, kappa).unwrap());
        let zero = BasePoint::affine(Complex64::new(0.0, 0.0)).unwrap();
        assert_eq!(x_residual(&crit, &zero), 0.0);

        let l = Layout { n: 1 };
        let c = |re: f64, im: f64| Complex64::new(re, im);
        let s = [c(0.6, 0.0), c(0.0, 0.8)];
        let x = [c(0.8, 0.0), c(0.0, 0.6)];
        // s_0 x_0 + s_1 x_1 = 0.48 - 0.48 = 0
        let w = l.assemble(&s, c(0.0, 0.0), &x, c(1.0, 0.0)).unwrap();
        let sp = gauge_fix(&LevelSetPoint::new(w, 1, kappa).unwrap());
        let mut rng = seeded_rng(40);
        for _ in 0..10 {
            let t = Complex64::new(uniform(&mut rng, -3.0, 3.0), uniform(&mut rng, -3.0, 3.0));
            assert!(x_residual(&sp, &BasePoint::affine(t).unwrap()) < 1e-15);
        }
        assert!(SHypersurfacePoint::new(sp).is_ok());

        for _ in 0..20 {
            let p = random_q0(&mut rng, 2, Kappa::new(1.0, 3.0).unwrap());
            let b = BasePoint::new(
                Complex64::new(uniform(&mut rng, -1.0, 1.0), uniform(&mut rng, -1.0, 1.0)),
                Complex64::new(uniform(&mut rng, -1.0, 1.0), 0.3),
            )
            .unwrap();
            let ll = Layout { n: 2 };
            let mut brute = Complex64::new(0.0, 0.0);
            for j in 0..3 {
                brute += ll.get(p.w(), ll.s(j)) * ll.get(p.w(), ll.x(j));
            }
            let expect = (b.t1() * brute - b.t0() * ll.get(p.w(), ll.q())).norm();
            assert!((x_residual(&p, &b) - expect).abs() < 1e-14);
        }
    }

    #[test]
    fn phi_at_infinity_is_the_q0_iso() {
        let mut rng = seeded_rng(41);
        let kappa = Kappa::from_mu(2.0).unwrap();
        for _ in 0..20 {
            let p = random_q0(&mut rng, 1, kappa);
            let xp = XPoint::new(p.clone(), BasePoint::infinity()).unwrap();
            let a = phi_t(&xp).unwrap();
            let b = q0_product_iso(&p).unwrap();
            assert!(a.distance(&b) < 1e-14);
            let (_, w) = phi_global(&xp).unwrap();
            assert_eq!(w, Complex64::new(0.0, 0.0));
        }
    }

    #[test]
    fn phi_is_gauge_independent() {
        let mut rng = seeded_rng(42);
        let mu = 2.0;
        for t in [Complex64::new(1.0, 0.0), Complex64::new(0.0, 1.0)] {
            for _ in 0..50 {
                let xp =
                    darboux_chart(&local::random_fiber_point(&mut rng, 1, mu, t, 0.7)).unwrap();
                let moved = act(
                    xp.point().w(),
                    1,
                    uniform(&mut rng, -3.0, 3.0),
                    uniform(&mut rng, -3.0, 3.0),
                );
                let a = phi_t(&xp).unwrap();
                let b = projectivize(&moved, 1).unwrap();
                assert!(a.distance(&b) < 1e-10);
            }
        }
        let b = phi_global(
            &XPoint::new(
                gauge_fix(
                    &LevelSetPoint::new(z_crit(1, mu), 1, Kappa::from_mu(mu).unwrap()).unwrap(),
                ),
                BasePoint::affine(Complex64::new(0.0, 0.0)).unwrap(),
            )
            .unwrap(),
        );
        assert!(b.is_err());
        for (t, w) in [(1.0, 1.0), (2.0, 0.5)] {
            let xp = darboux_chart(&local::random_fiber_point(
                &mut rng,
                1,
                mu,
                Complex64::new(t, 0.0),
                0.7,
            ))
            .unwrap();
            assert!((phi_global(&xp).unwrap().1 - Complex64::new(w, 0.0)).norm() < 1e-12);
        }
    }
}
