//! The toric manifold `F = Psi^{-1}(kappa)/T^2` in level-set coordinates on
//! `C^{2n+4}`, ordered `(s_0..s_n, q, x_0..x_{n+1})`.
//!
//! The first circle rotates `s` and `q`, the second rotates `q` and `x`.

mod projective;

pub use projective::{
    fubini_study_eval, fubini_study_total_cp1, hopf_embedding, hopf_lift, hopf_pullback_defect,
    horizontal_part, l_mu_point, l_mu_tangent_check, line_integral_fiber, line_integral_section,
    product_form_eval, q0_product_iso, HorizontalPolicy, LagrangianCheck, ProductPoint,
    ProjectivePoint,
};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::symplectic::linalg::nullspace;
use crate::symplectic::{j0, AmbientForm};
use crate::{Error, Result};

pub const LEVEL_TOL: f64 = 1e-9;
pub const GAUGE_THRESHOLD: f64 = 1e-12;
pub const TANGENT_TOL: f64 = 1e-8;
const POLYTOPE_TOL: f64 = 1e-10;

/// Moment-map level `(kappa_1, kappa_2)` in the chamber `kappa_2 > kappa_1 > 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Kappa {
    pub k1: f64,
    pub k2: f64,
}

impl Kappa {
    pub fn new(k1: f64, k2: f64) -> Result<Self> {
        if !(k1.is_finite() && k2.is_finite() && k2 > k1 && k1 > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "kappa = ({k1}, {k2}) is outside the chamber kappa_2 > kappa_1 > 0"
            )));
        }
        Ok(Self { k1, k2 })
    }

    /// `(1, mu)` for `mu > 1`.
    pub fn from_mu(mu: f64) -> Result<Self> {
        Self::new(1.0, mu)
    }

    pub fn scaled(&self, c: f64) -> Result<Self> {
        Self::new(self.k1 * c, self.k2 * c)
    }
}

/// Index bookkeeping for `C^{2n+4}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Layout {
    pub n: usize,
}

impl Layout {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("n must be at least 1".into()));
        }
        Ok(Self { n })
    }

    pub fn complex_dim(&self) -> usize {
        2 * self.n + 4
    }

    pub fn real_dim(&self) -> usize {
        2 * self.complex_dim()
    }

    pub fn s(&self, j: usize) -> usize {
        j
    }

    pub fn q(&self) -> usize {
        self.n + 1
    }

    /// `x_j` for `j = 0..=n+1`; `x(n + 1)` is `x_{n+1}`.
    pub fn x(&self, j: usize) -> usize {
        self.n + 2 + j
    }

    pub fn get(&self, w: &DVector<f64>, k: usize) -> Complex64 {
        Complex64::new(w[2 * k], w[2 * k + 1])
    }

    pub fn set(&self, w: &mut DVector<f64>, k: usize, c: Complex64) {
        w[2 * k] = c.re;
        w[2 * k + 1] = c.im;
    }

    pub fn s_vec(&self, w: &DVector<f64>) -> Vec<Complex64> {
        (0..=self.n).map(|j| self.get(w, self.s(j))).collect()
    }

    /// `x_0..x_n` (without `x_{n+1}`).
    pub fn x_vec(&self, w: &DVector<f64>) -> Vec<Complex64> {
        (0..=self.n).map(|j| self.get(w, self.x(j))).collect()
    }

    pub fn x_last(&self, w: &DVector<f64>) -> Complex64 {
        self.get(w, self.x(self.n + 1))
    }

    /// Assembles `(s, q, x, x_{n+1})`.
    pub fn assemble(
        &self,
        s: &[Complex64],
        q: Complex64,
        x: &[Complex64],
        x_last: Complex64,
    ) -> Result<DVector<f64>> {
        if s.len() != self.n + 1 || x.len() != self.n + 1 {
            return Err(Error::DimensionMismatch {
                expected: self.n + 1,
                got: s.len().min(x.len()),
            });
        }
        let mut w = DVector::zeros(self.real_dim());
        for j in 0..=self.n {
            self.set(&mut w, self.s(j), s[j]);
            self.set(&mut w, self.x(j), x[j]);
        }
        self.set(&mut w, self.q(), q);
        self.set(&mut w, self.x(self.n + 1), x_last);
        Ok(w)
    }

    fn check(&self, w: &DVector<f64>) -> Result<()> {
        if w.len() != self.real_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.real_dim(),
                got: w.len(),
            });
        }
        Ok(())
    }
}

fn abs2(w: &DVector<f64>, k: usize) -> f64 {
    w[2 * k] * w[2 * k] + w[2 * k + 1] * w[2 * k + 1]
}

/// `Psi = (sum |s_j|^2 + |q|^2, |q|^2 + sum |x_j|^2)`.
pub fn moment_map(w: &DVector<f64>, n: usize) -> (f64, f64) {
    let l = Layout { n };
    let q = abs2(w, l.q());
    let s: f64 = (0..=n).map(|j| abs2(w, l.s(j))).sum();
    let x: f64 = (0..=n + 1).map(|j| abs2(w, l.x(j))).sum();
    (s + q, q + x)
}

/// The `2 x 2(2n+4)` Jacobian of `Psi`.
pub fn moment_jacobian(w: &DVector<f64>, n: usize) -> DMatrix<f64> {
    let l = Layout { n };
    let mut d = DMatrix::zeros(2, w.len());
    for j in 0..=n {
        let k = l.s(j);
        d[(0, 2 * k)] = 2.0 * w[2 * k];
        d[(0, 2 * k + 1)] = 2.0 * w[2 * k + 1];
    }
    for j in 0..=n + 1 {
        let k = l.x(j);
        d[(1, 2 * k)] = 2.0 * w[2 * k];
        d[(1, 2 * k + 1)] = 2.0 * w[2 * k + 1];
    }
    let k = l.q();
    for row in 0..2 {
        d[(row, 2 * k)] = 2.0 * w[2 * k];
        d[(row, 2 * k + 1)] = 2.0 * w[2 * k + 1];
    }
    d
}

/// Weight action: `s -> e^{i t1} s`, `q -> e^{i(t1+t2)} q`, `x -> e^{i t2} x`.
pub fn act(w: &DVector<f64>, n: usize, theta1: f64, theta2: f64) -> DVector<f64> {
    let l = Layout { n };
    let (e1, e2) = (
        Complex64::from_polar(1.0, theta1),
        Complex64::from_polar(1.0, theta2),
    );
    let mut out = w.clone();
    for j in 0..=n {
        l.set(&mut out, l.s(j), l.get(w, l.s(j)) * e1);
    }
    l.set(&mut out, l.q(), l.get(w, l.q()) * e1 * e2);
    for j in 0..=n + 1 {
        l.set(&mut out, l.x(j), l.get(w, l.x(j)) * e2);
    }
    out
}

/// Generators of the two circle actions at `w`.
pub fn orbit_directions(w: &DVector<f64>, n: usize) -> [DVector<f64>; 2] {
    let l = Layout { n };
    let mut a = DVector::zeros(w.len());
    let mut b = DVector::zeros(w.len());
    let rot = |v: &mut DVector<f64>, k: usize| {
        v[2 * k] = -w[2 * k + 1];
        v[2 * k + 1] = w[2 * k];
    };
    for j in 0..=n {
        rot(&mut a, l.s(j));
    }
    rot(&mut a, l.q());
    rot(&mut b, l.q());
    for j in 0..=n + 1 {
        rot(&mut b, l.x(j));
    }
    [a, b]
}

/// `A(w)`: coordinatewise `|.|^2`, ordered `(xi_0..xi_n, nu, eta_0..eta_{n+1})`.
pub fn moment_image(w: &DVector<f64>, n: usize) -> Vec<f64> {
    (0..2 * n + 4).map(|k| abs2(w, k)).collect()
}

/// Membership in the Delzant polytope of `kappa`.
pub fn polytope_membership(p: &[f64], kappa: Kappa, n: usize) -> bool {
    if p.len() != 2 * n + 4 {
        return false;
    }
    let l = Layout { n };
    let nu = p[l.q()];
    let xi: f64 = (0..=n).map(|j| p[l.s(j)]).sum();
    let eta: f64 = (0..=n + 1).map(|j| p[l.x(j)]).sum();
    p.iter().all(|&c| c >= -POLYTOPE_TOL)
        && (nu + xi - kappa.k1).abs() <= POLYTOPE_TOL
        && (nu + eta - kappa.k2).abs() <= POLYTOPE_TOL
}

/// The vertex `(0, kappa_1, 0, kappa_2 - kappa_1)` of the polytope.
pub fn polytope_vertex(kappa: Kappa, n: usize) -> Vec<f64> {
    let l = Layout { n };
    let mut v = vec![0.0; 2 * n + 4];
    v[l.q()] = kappa.k1;
    v[l.x(n + 1)] = kappa.k2 - kappa.k1;
    v
}

/// A point of `Psi^{-1}(kappa)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelSetPoint {
    w: DVector<f64>,
    n: usize,
    kappa: Kappa,
}

impl LevelSetPoint {
    pub fn new(w: DVector<f64>, n: usize, kappa: Kappa) -> Result<Self> {
        let l = Layout::new(n)?;
        l.check(&w)?;
        if w.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidParameter("non-finite level-set point".into()));
        }
        let (a, b) = moment_map(&w, n);
        let res = (a - kappa.k1).abs().max((b - kappa.k2).abs());
        if res > LEVEL_TOL {
            return Err(Error::InvariantViolated(format!("moment residual {res:e}")));
        }
        let sq: f64 = (0..=n).map(|j| abs2(&w, l.s(j))).sum::<f64>() + abs2(&w, l.q());
        let xs: f64 = (0..=n + 1).map(|j| abs2(&w, l.x(j))).sum();
        if sq == 0.0 || xs == 0.0 {
            return Err(Error::InvariantViolated("(s, q) or x vanishes".into()));
        }
        Ok(Self { w, n, kappa })
    }

    /// Rescales `(s, q)` and `(x, x_{n+1})` onto the level set. Only valid
    /// when `q = 0`, where the two blocks decouple.
    pub fn normalized_q0(w: DVector<f64>, n: usize, kappa: Kappa) -> Result<Self> {
        let l = Layout::new(n)?;
        l.check(&w)?;
        let mut w = w;
        l.set(&mut w, l.q(), Complex64::new(0.0, 0.0));
        let (a, b) = moment_map(&w, n);
        if a == 0.0 || b == 0.0 {
            return Err(Error::InvariantViolated("(s, q) or x vanishes".into()));
        }
        let (fa, fb) = ((kappa.k1 / a).sqrt(), (kappa.k2 / b).sqrt());
        for j in 0..=n {
            let k = l.s(j);
            w[2 * k] *= fa;
            w[2 * k + 1] *= fa;
        }
        for j in 0..=n + 1 {
            let k = l.x(j);
            w[2 * k] *= fb;
            w[2 * k + 1] *= fb;
        }
        Self::new(w, n, kappa)
    }

    pub fn w(&self) -> &DVector<f64> {
        &self.w
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn kappa(&self) -> Kappa {
        self.kappa
    }

    pub fn layout(&self) -> Layout {
        Layout { n: self.n }
    }

    pub fn moment_residual(&self) -> f64 {
        let (a, b) = moment_map(&self.w, self.n);
        (a - self.kappa.k1).abs().max((b - self.kappa.k2).abs())
    }
}

/// Gauge-fixed representative of a `T^2`-orbit in the level set.
#[derive(Debug, Clone, PartialEq)]
pub struct ToricPoint(LevelSetPoint);

impl ToricPoint {
    pub fn level(&self) -> &LevelSetPoint {
        &self.0
    }

    pub fn w(&self) -> &DVector<f64> {
        &self.0.w
    }

    pub fn n(&self) -> usize {
        self.0.n
    }

    pub fn kappa(&self) -> Kappa {
        self.0.kappa
    }

    /// Euclidean distance between gauge-fixed representatives.
    pub fn distance(&self, other: &ToricPoint) -> f64 {
        (self.w() - other.w()).norm()
    }
}

fn first_above(vals: &[Complex64]) -> Option<usize> {
    vals.iter().position(|c| c.norm() > GAUGE_THRESHOLD)
}

/// Phases `(theta_1, theta_2)` that bring `w` into gauge, if any anchor exists.
pub fn gauge_phases(w: &DVector<f64>, n: usize) -> Option<(f64, f64)> {
    let l = Layout { n };
    let xl = l.x_last(w);
    let theta2 = if xl.norm() > GAUGE_THRESHOLD {
        -xl.arg()
    } else {
        let xs: Vec<Complex64> = (0..=n + 1).map(|j| l.get(w, l.x(j))).collect();
        -xs[first_above(&xs)?].arg()
    };
    let q = l.get(w, l.q());
    let theta1 = if q.norm() > GAUGE_THRESHOLD {
        -q.arg() - theta2
    } else {
        let s = l.s_vec(w);
        -s[first_above(&s)?].arg()
    };
    Some((theta1, theta2))
}

/// Rotates `w` into gauge and sets the anchor coordinates to their moduli.
pub fn gauge_fix_raw(w: &DVector<f64>, n: usize) -> Option<DVector<f64>> {
    let l = Layout { n };
    let (t1, t2) = gauge_phases(w, n)?;
    let mut out = act(w, n, t1, t2);
    let mut pin = |k: usize| {
        let m = l.get(&out, k).norm();
        l.set(&mut out, k, Complex64::new(m, 0.0));
    };
    let xl = l.x(n + 1);
    if abs2(w, xl).sqrt() > GAUGE_THRESHOLD {
        pin(xl);
    } else {
        let xs: Vec<Complex64> = (0..=n + 1).map(|j| l.get(w, l.x(j))).collect();
        pin(l.x(first_above(&xs)?));
    }
    if abs2(w, l.q()).sqrt() > GAUGE_THRESHOLD {
        pin(l.q());
    } else {
        pin(l.s(first_above(&l.s_vec(w))?));
    }
    Some(out)
}

/// Canonical representative of the orbit of `p`.
pub fn gauge_fix(p: &LevelSetPoint) -> ToricPoint {
    // (s, q) and x are nonzero on the level set, so both anchors exist
    let w = gauge_fix_raw(&p.w, p.n).expect("anchors exist on the level set");
    ToricPoint(LevelSetPoint {
        w,
        n: p.n,
        kappa: p.kappa,
    })
}

/// Orthonormal basis of `ker dPsi` at `w`.
pub fn level_tangent_basis(w: &DVector<f64>, n: usize) -> DMatrix<f64> {
    nullspace(&moment_jacobian(w, n))
}

/// Orthogonal projection onto `ker dPsi` at `w`.
pub fn project_to_level_tangent(w: &DVector<f64>, n: usize, v: &DVector<f64>) -> DVector<f64> {
    let t = level_tangent_basis(w, n);
    &t * (t.transpose() * v)
}

fn check_tangent(w: &DVector<f64>, n: usize, v: &DVector<f64>) -> Result<()> {
    let d = moment_jacobian(w, n) * v;
    let r = d.amax();
    if r > TANGENT_TOL * v.norm().max(1.0) {
        return Err(Error::NotTangent(format!("|dPsi(V)| = {r:e}")));
    }
    Ok(())
}

/// Value of the reduced form on the classes of level-set tangent vectors `v`, `w2`.
pub fn omega_f_eval(p: &ToricPoint, v: &DVector<f64>, w2: &DVector<f64>) -> Result<f64> {
    let layout = p.0.layout();
    for x in [v, w2] {
        layout.check(x)?;
        check_tangent(p.w(), p.n(), x)?;
    }
    AmbientForm::standard(layout.complex_dim()).eval(v, w2)
}

/// `J_0` on `C^{2n+4}`.
pub fn complex_structure(n: usize) -> DMatrix<f64> {
    j0(2 * n + 4)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::{seeded_rng, standard_normal_vector, uniform, SampleRng};

    fn random_level_point(rng: &mut SampleRng, n: usize, kappa: Kappa) -> LevelSetPoint {
        let l = Layout { n };
        // pick |q|^2 < kappa_1, then scale the s and x blocks
        let nu = uniform(rng, 0.0, kappa.k1);
        let mut w = standard_normal_vector(rng, l.real_dim());
        let qc = l.get(&w, l.q());
        l.set(&mut w, l.q(), qc / qc.norm() * nu.sqrt());
        let s2: f64 = (0..=n).map(|j| abs2(&w, l.s(j))).sum();
        let x2: f64 = (0..=n + 1).map(|j| abs2(&w, l.x(j))).sum();
        let (fs, fx) = (((kappa.k1 - nu) / s2).sqrt(), ((kappa.k2 - nu) / x2).sqrt());
        for j in 0..=n {
            let k = l.s(j);
            w[2 * k] *= fs;
            w[2 * k + 1] *= fs;
        }
        for j in 0..=n + 1 {
            let k = l.x(j);
            w[2 * k] *= fx;
            w[2 * k + 1] *= fx;
        }
        LevelSetPoint::new(w, n, kappa).unwrap()
    }

    fn z_crit(n: usize, mu: f64) -> DVector<f64> {
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

    #[test]
    fn chamber() {
        assert!(Kappa::new(1.0, 2.0).is_ok());
        assert!(Kappa::new(2.0, 1.0).is_err());
        assert!(Kappa::new(0.0, 1.0).is_err());
        assert!(Kappa::from_mu(1.0).is_err());
    }

    #[test]
    fn moment_map_examples() {
        assert_eq!(moment_map(&z_crit(1, 2.0), 1), (1.0, 2.0));
        assert_eq!(moment_map(&DVector::zeros(12), 1), (0.0, 0.0));
        let mut rng = seeded_rng(20);
        let kappa = Kappa::new(1.0, 2.0).unwrap();
        for _ in 0..50 {
            let p = random_level_point(&mut rng, 2, kappa);
            let (a, b) = (uniform(&mut rng, -5.0, 5.0), uniform(&mut rng, -5.0, 5.0));
            let m = moment_map(&act(p.w(), 2, a, b), 2);
            let m0 = moment_map(p.w(), 2);
            assert!((m.0 - m0.0).abs() < 1e-14 && (m.1 - m0.1).abs() < 1e-14);
        }
    }

    #[test]
    fn polytope_examples() {
        let kappa = Kappa::new(1.0, 3.0).unwrap();
        let v = polytope_vertex(kappa, 1);
        assert!(polytope_membership(&v, kappa, 1));
        let l = Layout { n: 1 };
        let mut bad = v.clone();
        bad[l.q()] += 1.0;
        bad[l.x(2)] -= 1.0;
        assert!(!polytope_membership(&bad, kappa, 1));
        let mut rng = seeded_rng(21);
        for _ in 0..100 {
            let p = random_level_point(&mut rng, 1, kappa);
            assert!(polytope_membership(&moment_image(p.w(), 1), kappa, 1));
        }
    }

    #[test]
    fn gauge_fix_examples() {
        let mu = 2.0;
        let kappa = Kappa::from_mu(mu).unwrap();
        let l = Layout { n: 1 };
        let zero = vec![Complex64::new(0.0, 0.0); 2];
        let w = l
            .assemble(
                &zero,
                Complex64::from_polar(1.0, 0.7),
                &zero,
                Complex64::from_polar(1.0, -2.1),
            )
            .unwrap();
        let g = gauge_fix(&LevelSetPoint::new(w, 1, kappa).unwrap());
        assert!((g.w() - z_crit(1, mu)).norm() < 1e-15);
        let again = gauge_fix(g.level());
        assert_eq!(again, g);
        let mut rng = seeded_rng(22);
        for _ in 0..50 {
            let p = random_level_point(&mut rng, 2, Kappa::new(1.0, 3.0).unwrap());
            let (a, b) = (uniform(&mut rng, -5.0, 5.0), uniform(&mut rng, -5.0, 5.0));
            let moved = LevelSetPoint::new(act(p.w(), 2, a, b), 2, p.kappa()).unwrap();
            assert!(gauge_fix(&p).distance(&gauge_fix(&moved)) < 1e-10);
            let g = gauge_fix(&p);
            assert_eq!(gauge_fix(g.level()), g);
        }
    }

    #[test]
    fn gauge_with_vanishing_anchors() {
        let kappa = Kappa::new(1.0, 2.0).unwrap();
        let l = Layout { n: 1 };
        let s = vec![Complex64::new(0.0, 0.0), Complex64::from_polar(1.0, 1.0)];
        let x = vec![
            Complex64::new(0.0, 0.0),
            Complex64::from_polar(2f64.sqrt(), -0.5),
        ];
        let w = l
            .assemble(&s, Complex64::new(0.0, 0.0), &x, Complex64::new(0.0, 0.0))
            .unwrap();
        let g = gauge_fix(&LevelSetPoint::new(w, 1, kappa).unwrap());
        assert_eq!(l.get(g.w(), l.s(1)), Complex64::new(1.0, 0.0));
        assert_eq!(l.get(g.w(), l.x(1)), Complex64::new(2f64.sqrt(), 0.0));
    }

    #[test]
    fn orbit_directions_are_tangent_and_degenerate() {
        let mut rng = seeded_rng(23);
        let kappa = Kappa::new(1.0, 2.0).unwrap();
        for _ in 0..20 {
            let p = gauge_fix(&random_level_point(&mut rng, 1, kappa));
            let dirs = orbit_directions(p.w(), 1);
            let v = project_to_level_tangent(p.w(), 1, &standard_normal_vector(&mut rng, 12));
            let u = project_to_level_tangent(p.w(), 1, &standard_normal_vector(&mut rng, 12));
            let base = omega_f_eval(&p, &v, &u).unwrap();
            assert_eq!(omega_f_eval(&p, &v, &v).unwrap(), 0.0);
            for d in &dirs {
                assert!((moment_jacobian(p.w(), 1) * d).amax() < 1e-14);
                let shifted = omega_f_eval(&p, &(&v + d), &u).unwrap();
                assert!((shifted - base).abs() <= 1e-8);
            }
        }
    }

    #[test]
    fn non_tangent_vectors_are_rejected() {
        let kappa = Kappa::from_mu(2.0).unwrap();
        let p = gauge_fix(&LevelSetPoint::new(z_crit(1, 2.0), 1, kappa).unwrap());
        let l = Layout { n: 1 };
        let mut radial = DVector::zeros(12);
        radial[2 * l.q()] = 1.0;
        assert!(matches!(
            omega_f_eval(&p, &radial, &radial),
            Err(Error::NotTangent(_))
        ));
    }

    #[test]
    fn level_set_rejects_bad_points() {
        let kappa = Kappa::from_mu(2.0).unwrap();
        assert!(LevelSetPoint::new(DVector::zeros(12), 1, kappa).is_err());
        assert!(LevelSetPoint::new(z_crit(1, 3.0), 1, kappa).is_err());
        assert!(LevelSetPoint::new(DVector::zeros(10), 1, kappa).is_err());
    }
}
