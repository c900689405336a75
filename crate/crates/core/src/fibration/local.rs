//! The Darboux chart `(s, x) -> (s, sqrt(1 - |s|^2), x, sqrt(mu - 1 + |s|^2 - |x|^2))`
//! around the critical point, the local fibration `pi_loc`, its connection and
//! the vanishing cycle.

use nalgebra::{DMatrix, DVector, Matrix2, Vector2};
use num_complex::Complex64;
use rand::Rng;

use super::{BasePoint, XPoint};
use crate::path::BasePath;
use crate::sampling::ball_point;
use crate::symplectic::linalg::{max_abs, nullspace};
use crate::symplectic::{
    j0, ode_transport, project_onto, pullback, AmbientForm, ConstraintSet, FnMap, Subspace,
    Transport,
};
use crate::toric::{act, gauge_fix, Kappa, Layout, LevelSetPoint};
use crate::{Error, Result};

pub const LOCAL_FIBER_TOL: f64 = 1e-9;
const ANCHOR_THRESHOLD: f64 = 1e-12;

/// Real length of a chart point for a given `n`.
fn chart_dim(n: usize) -> usize {
    4 * (n + 1)
}

fn get(y: &DVector<f64>, k: usize) -> Complex64 {
    Complex64::new(y[2 * k], y[2 * k + 1])
}

fn s_norm2(y: &DVector<f64>, n: usize) -> f64 {
    y.rows(0, 2 * (n + 1)).norm_squared()
}

fn x_norm2(y: &DVector<f64>, n: usize) -> f64 {
    y.rows(2 * (n + 1), 2 * (n + 1)).norm_squared()
}

fn sx(y: &DVector<f64>, n: usize) -> Complex64 {
    (0..=n).map(|j| get(y, j) * get(y, n + 1 + j)).sum()
}

/// Membership in `W^mu = {|s|^2 < 1, |x|^2 - |s|^2 < mu - 1}`.
pub fn in_w_mu(y: &DVector<f64>, n: usize, mu: f64) -> bool {
    let s2 = s_norm2(y, n);
    s2 < 1.0 && x_norm2(y, n) - s2 < mu - 1.0
}

/// A point `(s, x)` of `W^mu`, coordinates interleaved as `(s_0..s_n, x_0..x_n)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalFiberPoint {
    y: DVector<f64>,
    n: usize,
    mu: f64,
}

impl LocalFiberPoint {
    pub fn new(y: DVector<f64>, n: usize, mu: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("n must be at least 1".into()));
        }
        if !(mu > 1.0) {
            return Err(Error::InvalidParameter(format!("mu = {mu} must exceed 1")));
        }
        if y.len() != chart_dim(n) {
            return Err(Error::DimensionMismatch {
                expected: chart_dim(n),
                got: y.len(),
            });
        }
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("non-finite chart point".into()));
        }
        if !in_w_mu(&y, n, mu) {
            return Err(Error::OutsideDomain("point is outside W^mu".into()));
        }
        Ok(Self { y, n, mu })
    }

    pub fn from_parts(s: &[Complex64], x: &[Complex64], mu: f64) -> Result<Self> {
        if s.len() != x.len() || s.is_empty() {
            return Err(Error::DimensionMismatch {
                expected: s.len(),
                got: x.len(),
            });
        }
        let y = DVector::from_iterator(
            2 * (s.len() + x.len()),
            s.iter().chain(x).flat_map(|c| [c.re, c.im]),
        );
        Self::new(y, s.len() - 1, mu)
    }

    pub fn y(&self) -> &DVector<f64> {
        &self.y
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn s(&self) -> Vec<Complex64> {
        (0..=self.n).map(|j| get(&self.y, j)).collect()
    }

    pub fn x(&self) -> Vec<Complex64> {
        (0..=self.n).map(|j| get(&self.y, self.n + 1 + j)).collect()
    }

    /// Real coordinates of `x` alone.
    pub fn x_real(&self) -> DVector<f64> {
        self.y.rows(2 * (self.n + 1), 2 * (self.n + 1)).into_owned()
    }

    pub fn t(&self) -> Complex64 {
        pi_loc(&self.y, self.n).expect("|s| < 1 in W^mu")
    }

    /// `max(|f_1|, |f_2|)` relative to the fiber over `t`.
    pub fn fiber_residual(&self, t: Complex64) -> f64 {
        let (a, b) = fiber_constraints(&self.y, self.n, t).expect("|s| < 1 in W^mu");
        a.abs().max(b.abs())
    }

    pub fn distance(&self, other: &LocalFiberPoint) -> f64 {
        (&self.y - &other.y).norm()
    }
}

/// Level-set representative `(s, sqrt(1 - |s|^2), x, sqrt(mu - 1 + |s|^2 - |x|^2))`.
pub fn darboux_lift(y: &DVector<f64>, n: usize, mu: f64) -> Result<DVector<f64>> {
    if y.len() != chart_dim(n) {
        return Err(Error::DimensionMismatch {
            expected: chart_dim(n),
            got: y.len(),
        });
    }
    if !in_w_mu(y, n, mu) {
        return Err(Error::OutsideDomain("point is outside W^mu".into()));
    }
    let l = Layout { n };
    let s2 = s_norm2(y, n);
    let mut w = DVector::zeros(l.real_dim());
    for j in 0..=n {
        l.set(&mut w, l.s(j), get(y, j));
        l.set(&mut w, l.x(j), get(y, n + 1 + j));
    }
    l.set(&mut w, l.q(), Complex64::new((1.0 - s2).sqrt(), 0.0));
    l.set(
        &mut w,
        l.x(n + 1),
        Complex64::new((mu - 1.0 + s2 - x_norm2(y, n)).sqrt(), 0.0),
    );
    Ok(w)
}

/// The Darboux chart: the point of `X` over `pi_loc(s, x)`.
pub fn darboux_chart(p: &LocalFiberPoint) -> Result<XPoint> {
    let w = darboux_lift(&p.y, p.n, p.mu)?;
    let kappa = Kappa::from_mu(p.mu)?;
    XPoint::new(
        gauge_fix(&LevelSetPoint::new(w, p.n, kappa)?),
        BasePoint::affine(p.t())?,
    )
}

/// `max |psi^* omega - omega_0|` at `p`.
pub fn darboux_pullback_defect(p: &LocalFiberPoint) -> Result<f64> {
    let (n, mu) = (p.n, p.mu);
    let lift = FnMap::new(chart_dim(n), 2 * (2 * n + 4), |y: &DVector<f64>| {
        darboux_lift(y, n, mu).ok()
    });
    let pulled = pullback(&AmbientForm::standard(2 * n + 4), &lift, &p.y)?;
    Ok(max_abs(
        &(pulled - AmbientForm::standard(2 * n + 2).matrix()),
    ))
}

/// Inverse of the chart on any level-set representative with `q != 0` and
/// `x_{n+1} != 0`: rotate both to the positive reals and read off `(s, x)`.
pub fn local_from_level_set(w: &DVector<f64>, n: usize, mu: f64) -> Result<LocalFiberPoint> {
    let l = Layout::new(n)?;
    let (q, xl) = (l.get(w, l.q()), l.x_last(w));
    if q.norm() <= ANCHOR_THRESHOLD || xl.norm() <= ANCHOR_THRESHOLD {
        return Err(Error::OutsideDomain(
            "the chart needs q != 0 and x_{n+1} != 0".into(),
        ));
    }
    let theta2 = -xl.arg();
    let theta1 = -q.arg() - theta2;
    let r = act(w, n, theta1, theta2);
    let mut y = DVector::zeros(chart_dim(n));
    for j in 0..=n {
        let (a, b) = (l.get(&r, l.s(j)), l.get(&r, l.x(j)));
        y[2 * j] = a.re;
        y[2 * j + 1] = a.im;
        y[2 * (n + 1 + j)] = b.re;
        y[2 * (n + 1 + j) + 1] = b.im;
    }
    LocalFiberPoint::new(y, n, mu)
}

/// `pi_loc(s, x) = (s_0 x_0 + ... + s_n x_n) / sqrt(1 - |s|^2)`.
pub fn pi_loc(y: &DVector<f64>, n: usize) -> Result<Complex64> {
    let s2 = s_norm2(y, n);
    if !(s2 < 1.0) {
        return Err(Error::OutsideDomain(format!("|s|^2 = {s2} >= 1")));
    }
    Ok(sx(y, n) / (1.0 - s2).sqrt())
}

/// `(f_1, f_2)`: real and imaginary parts of `sum s_j x_j - t sqrt(1 - |s|^2)`.
pub fn fiber_constraints(y: &DVector<f64>, n: usize, t: Complex64) -> Result<(f64, f64)> {
    let s2 = s_norm2(y, n);
    if !(s2 < 1.0) {
        return Err(Error::OutsideDomain(format!("|s|^2 = {s2} >= 1")));
    }
    let q = (1.0 - s2).sqrt();
    let p = sx(y, n);
    Ok((p.re - t.re * q, p.im - t.im * q))
}

/// Analytic gradients of `f_1` and `f_2`.
pub fn fiber_gradients(
    y: &DVector<f64>,
    n: usize,
    t: Complex64,
) -> Result<(DVector<f64>, DVector<f64>)> {
    let s2 = s_norm2(y, n);
    if !(s2 < 1.0) {
        return Err(Error::OutsideDomain(format!("|s|^2 = {s2} >= 1")));
    }
    let q = (1.0 - s2).sqrt();
    let mut g1 = DVector::zeros(y.len());
    let mut g2 = DVector::zeros(y.len());
    for j in 0..=n {
        let (is, ix) = (2 * j, 2 * (n + 1 + j));
        let (a, b, c, d) = (y[is], y[is + 1], y[ix], y[ix + 1]);
        g1[is] = c + t.re * a / q;
        g1[is + 1] = -d + t.re * b / q;
        g1[ix] = a;
        g1[ix + 1] = -b;
        g2[is] = d + t.im * a / q;
        g2[is + 1] = c + t.im * b / q;
        g2[ix] = b;
        g2[ix + 1] = a;
    }
    Ok((g1, g2))
}

/// Rows `Re d pi_loc`, `Im d pi_loc`.
pub fn pi_loc_differential(y: &DVector<f64>, n: usize) -> Result<DMatrix<f64>> {
    let t = pi_loc(y, n)?;
    let q = (1.0 - s_norm2(y, n)).sqrt();
    let (g1, g2) = fiber_gradients(y, n, t)?;
    let mut d = DMatrix::zeros(2, y.len());
    d.set_row(0, &(g1 / q).transpose());
    d.set_row(1, &(g2 / q).transpose());
    Ok(d)
}

/// `span {J_0 grad f_1, J_0 grad f_2}` at `p`, with `t = pi_loc(p)`.
pub fn horizontal_space_local(p: &LocalFiberPoint) -> Result<Subspace> {
    horizontal_basis(&p.y, p.n)
}

fn horizontal_basis(y: &DVector<f64>, n: usize) -> Result<Subspace> {
    let t = pi_loc(y, n)?;
    let (g1, g2) = fiber_gradients(y, n, t)?;
    let j = j0(2 * n + 2);
    let mut basis = DMatrix::zeros(y.len(), 2);
    basis.set_column(0, &(&j * g1));
    basis.set_column(1, &(&j * g2));
    Subspace::new(basis)
}

/// Tangent space of the fiber through `y` (nullspace of the gradients).
pub fn fiber_tangent_local(y: &DVector<f64>, n: usize) -> Result<Subspace> {
    Subspace::new(nullspace(&pi_loc_differential(y, n)?))
}

/// The horizontal vector at `y` whose image under `d pi_loc` is `dt`.
pub fn horizontal_lift_local(y: &DVector<f64>, n: usize, dt: Complex64) -> Result<DVector<f64>> {
    let h = horizontal_basis(y, n)?;
    let image = pi_loc_differential(y, n)? * h.basis();
    let m = Matrix2::new(image[(0, 0)], image[(0, 1)], image[(1, 0)], image[(1, 1)]);
    let c = m
        .lu()
        .solve(&Vector2::new(dt.re, dt.im))
        .ok_or_else(|| Error::FieldFailure("horizontal space does not cover the base".into()))?;
    Ok(h.basis() * DVector::from_column_slice(c.as_slice()))
}

/// `g(t) = (-t^2 + sqrt(t^4 + 4t^2))/2`, evaluated as `2t / (t + sqrt(t^2 + 4))`.
pub fn g_of_t(t: f64) -> Result<f64> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "g(t) needs t > 0, got {t}"
        )));
    }
    Ok(2.0 * t / (t + (t * t + 4.0).sqrt()))
}

/// `1 - g(t) = 4 / (t + sqrt(t^2 + 4))^2`, without cancellation.
pub fn one_minus_g(t: f64) -> Result<f64> {
    g_of_t(t)?;
    let d = t + (t * t + 4.0).sqrt();
    Ok(4.0 / (d * d))
}

fn conj_pair(x: &DVector<f64>) -> DVector<f64> {
    let m = x.len();
    DVector::from_fn(2 * m, |i, _| {
        if i < m {
            if i % 2 == 0 {
                x[i]
            } else {
                -x[i]
            }
        } else {
            x[i - m]
        }
    })
}

/// The point `(conj x, x)` of `L^mu_t`; requires `|x|^2 = g(t)`.
pub fn vanishing_cycle_sample(
    t: f64,
    mu: f64,
    n: usize,
    x: &DVector<f64>,
) -> Result<LocalFiberPoint> {
    let g = g_of_t(t)?;
    if x.len() != 2 * (n + 1) {
        return Err(Error::DimensionMismatch {
            expected: 2 * (n + 1),
            got: x.len(),
        });
    }
    let r = x.norm_squared();
    if (r - g).abs() > 1e-10 {
        return Err(Error::InvalidParameter(format!(
            "|x|^2 = {r} but g(t) = {g}"
        )));
    }
    LocalFiberPoint::new(conj_pair(x), n, mu)
}

/// `(conj x, x)` with `x = sqrt(g(t)) * direction`.
pub fn vanishing_cycle_point(
    t: f64,
    mu: f64,
    n: usize,
    direction: &DVector<f64>,
) -> Result<LocalFiberPoint> {
    let norm = direction.norm();
    if (norm - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidParameter(format!("|direction| = {norm}")));
    }
    let x = direction * g_of_t(t)?.sqrt();
    vanishing_cycle_sample(t, mu, n, &x)
}

/// `h_t(r) (conj x, x)` with `h_t(r) = sqrt(g(r) / g(t))`.
pub fn explicit_lift(t: f64, r: f64, sample: &LocalFiberPoint) -> Result<LocalFiberPoint> {
    if !(r > 0.0 && r <= t) {
        return Err(Error::InvalidParameter(format!(
            "r = {r} is outside (0, {t}]"
        )));
    }
    let h = if r == t {
        1.0
    } else {
        (g_of_t(r)? / g_of_t(t)?).sqrt()
    };
    LocalFiberPoint::new(&sample.y * h, sample.n, sample.mu)
}

/// Distance of the velocity of `r -> h_t(r) (conj x, x)` from the horizontal
/// space, relative to its length. The velocity is a multiple of the point itself.
pub fn lift_velocity_residual(t: f64, r: f64, sample: &LocalFiberPoint) -> Result<f64> {
    let p = explicit_lift(t, r, sample)?;
    Ok(horizontal_space_local(&p)?.relative_residual(&p.y))
}

struct LocalFiberOverPath<'a> {
    path: &'a BasePath,
    n: usize,
}

impl ConstraintSet for LocalFiberOverPath<'_> {
    fn residual(&self, y: &DVector<f64>, sigma: f64) -> DVector<f64> {
        match fiber_constraints(y, self.n, self.path.at(sigma)) {
            Ok((a, b)) => DVector::from_vec(vec![a, b]),
            Err(_) => DVector::from_element(2, f64::NAN),
        }
    }

    fn jacobian(&self, y: &DVector<f64>, sigma: f64) -> DMatrix<f64> {
        match fiber_gradients(y, self.n, self.path.at(sigma)) {
            Ok((g1, g2)) => {
                let mut d = DMatrix::zeros(2, y.len());
                d.set_row(0, &g1.transpose());
                d.set_row(1, &g2.transpose());
                d
            }
            Err(_) => DMatrix::from_element(2, y.len(), f64::NAN),
        }
    }
}

/// Newton projection of `y` onto the fiber `pi_loc = t`.
pub fn project_to_local_fiber(y: &DVector<f64>, n: usize, t: Complex64) -> Result<DVector<f64>> {
    let path = BasePath::constant(t, 0.0);
    let c = LocalFiberOverPath { path: &path, n };
    Ok(project_onto(&c, y, 0.0)?.0)
}

/// A point of `W^mu` with `|s| <= frac` and `|x|^2 <= frac^2 (mu - 1 + |s|^2)`.
pub fn random_w_mu_point<R: Rng>(rng: &mut R, n: usize, mu: f64, frac: f64) -> DVector<f64> {
    let m = 2 * (n + 1);
    let s = ball_point(rng, m, frac);
    let x = ball_point(rng, m, frac * (mu - 1.0 + s.norm_squared()).sqrt());
    let mut y = DVector::zeros(2 * m);
    y.rows_mut(0, m).copy_from(&s);
    y.rows_mut(m, m).copy_from(&x);
    y
}

/// A random point of `W^mu` on the fiber over `t`: a [`random_w_mu_point`]
/// projected onto the fiber, redrawn until the projection stays in `W^mu`.
pub fn random_fiber_point<R: Rng>(
    rng: &mut R,
    n: usize,
    mu: f64,
    t: Complex64,
    frac: f64,
) -> LocalFiberPoint {
    loop {
        let y = random_w_mu_point(rng, n, mu, frac);
        if let Some(p) = project_to_local_fiber(&y, n, t)
            .ok()
            .and_then(|y| LocalFiberPoint::new(y, n, mu).ok())
        {
            return p;
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LocalTransport {
    pub end: LocalFiberPoint,
    pub run: Transport,
}

/// Parallel transport in the chart along `path`, projected onto the moving
/// fiber after every step.
pub fn transport_local(
    start: &LocalFiberPoint,
    path: &BasePath,
    step: f64,
    record_trace: bool,
) -> Result<LocalTransport> {
    let path = path.avoiding_origin()?;
    let (n, mu) = (start.n, start.mu);
    if start.fiber_residual(path.start()) > LOCAL_FIBER_TOL {
        return Err(Error::InvalidParameter(format!(
            "start lies over {} but the path starts at {}",
            start.t(),
            path.start()
        )));
    }
    let constraints = LocalFiberOverPath { path: &path, n };
    let field = |y: &DVector<f64>, sigma: f64| {
        if !in_w_mu(y, n, mu) {
            return Err(Error::OutsideDomain("transport left W^mu".into()));
        }
        horizontal_lift_local(y, n, path.velocity(sigma))
    };
    let run = ode_transport(
        field,
        path.span(),
        &start.y,
        step,
        Some(&constraints),
        record_trace,
    )?;
    let end = LocalFiberPoint::new(run.end.clone(), n, mu)?;
    Ok(LocalTransport { end, run })
}
