//! Parallel transport on `X` in level-set coordinates.
//!
//! The fiber over `t` is cut out of `C^{2n+4}` by `Psi = kappa` and
//! `E = t_1 sum s_j x_j - t_0 q = 0`. In the affine chart `t` we use
//! `E = sum s_j x_j - t q`, near infinity `E = w sum s_j x_j - q` with `w = 1/t`.
//! Horizontal vectors are taken from the symplectic complement of the fiber
//! tangent space, with the torus-orbit directions projected out.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector, Matrix2, Vector2};
use num_complex::Complex64;

use super::local::{darboux_lift, local_from_level_set, transport_local, LocalFiberPoint};
use super::{sx_sum, x_residual_raw, BasePoint, X_TOL};
use crate::path::BasePath;
use crate::symplectic::linalg::{nullspace, orthonormal_basis};
use crate::symplectic::{
    ode_transport, symplectic_complement, AmbientForm, ConstraintSet, Subspace, TracePoint,
};
use crate::toric::{moment_jacobian, moment_map, orbit_directions, Kappa, Layout};
use crate::{Error, Result};

/// `|t|` beyond which paths are followed in the coordinate `w = 1/t`.
pub const SWITCH_RADIUS: f64 = 10.0;

/// A piece of a base path, either in the affine coordinate `t` or in `w = 1/t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Segment {
    T(BasePath),
    W(BasePath),
}

impl Segment {
    pub fn path(&self) -> &BasePath {
        match self {
            Segment::T(p) | Segment::W(p) => p,
        }
    }

    pub fn base_at(&self, sigma: f64) -> BasePoint {
        let one = Complex64::new(1.0, 0.0);
        match self {
            Segment::T(p) => BasePoint::new(p.at(sigma), one),
            Segment::W(p) => BasePoint::new(one, p.at(sigma)),
        }
        .expect("one coordinate is 1")
    }

    pub fn start(&self) -> BasePoint {
        self.base_at(self.path().span().0)
    }

    pub fn end(&self) -> BasePoint {
        self.base_at(self.path().span().1)
    }
}

/// A path in `CP^1` made of consecutive segments.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtendedPath {
    segments: Vec<Segment>,
}

fn same_base(a: &BasePoint, b: &BasePoint) -> bool {
    (a.t0() * b.t1() - a.t1() * b.t0()).norm() <= 1e-12
}

fn inv(r: f64) -> f64 {
    if r.is_infinite() {
        0.0
    } else {
        1.0 / r
    }
}

impl ExtendedPath {
    pub fn new(segments: Vec<Segment>) -> Result<Self> {
        if segments.is_empty() {
            return Err(Error::InvalidParameter("empty path".into()));
        }
        for pair in segments.windows(2) {
            if !same_base(&pair[0].end(), &pair[1].start()) {
                return Err(Error::InvalidParameter(
                    "path segments do not join up".into(),
                ));
            }
        }
        Ok(Self { segments })
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn start(&self) -> BasePoint {
        self.segments[0].start()
    }

    pub fn end(&self) -> BasePoint {
        self.segments[self.segments.len() - 1].end()
    }

    pub fn constant(b: BasePoint, duration: f64) -> Self {
        let seg = match b.t() {
            Some(t) if t.norm() <= SWITCH_RADIUS => Segment::T(BasePath::constant(t, duration)),
            _ => Segment::W(BasePath::constant(b.w().expect("|t| > 0"), duration)),
        };
        Self {
            segments: vec![seg],
        }
    }

    /// Along the positive real axis between `from` and `to`, either of which
    /// may be `f64::INFINITY`.
    pub fn real(from: f64, to: f64) -> Result<Self> {
        if !(from > 0.0 && to > 0.0) {
            return Err(Error::InvalidParameter("real paths run over t > 0".into()));
        }
        let r = SWITCH_RADIUS;
        let w = |a: f64, b: f64| Segment::W(BasePath::real_line(inv(a), inv(b)));
        let t = |a: f64, b: f64| Segment::T(BasePath::real_line(a, b));
        let segments = match (from > r, to > r) {
            (true, true) => vec![w(from, to)],
            (false, false) => vec![t(from, to)],
            (true, false) => vec![w(from, r), t(r, to)],
            (false, true) => vec![t(from, r), w(r, to)],
        };
        Self::new(segments)
    }

    /// `infinity -> via -> infinity` along the real axis.
    pub fn infinity_round_trip(via: f64) -> Result<Self> {
        let mut segs = Self::real(f64::INFINITY, via)?.segments;
        segs.extend(Self::real(via, f64::INFINITY)?.segments);
        Self::new(segs)
    }

    /// The loop based at infinity that circles `0` once: in along the real
    /// axis to `radius`, once around `|t| = radius`, and back out.
    pub fn loop_at_infinity(radius: f64) -> Result<Self> {
        let mut segs = Self::real(f64::INFINITY, radius)?.segments;
        segs.push(circle(radius));
        segs.extend(Self::real(radius, f64::INFINITY)?.segments);
        Self::new(segs)
    }

    pub fn then(mut self, other: ExtendedPath) -> Result<Self> {
        self.segments.extend(other.segments);
        Self::new(self.segments)
    }
}

/// Counterclockwise circle `|t| = radius` starting at `t = radius`.
pub fn circle(radius: f64) -> Segment {
    if radius > SWITCH_RADIUS {
        // t = R e^{i theta}  <=>  w = (1/R) e^{-i theta}
        Segment::W(BasePath::arc(1.0 / radius, 0.0, -2.0 * PI))
    } else {
        Segment::T(BasePath::arc(radius, 0.0, 2.0 * PI))
    }
}

struct XConstraints<'a> {
    n: usize,
    kappa: Kappa,
    seg: &'a Segment,
}

/// `(dE/dz_k)` for the holomorphic defining function of the current chart.
fn holomorphic_partials(w: &DVector<f64>, n: usize, seg: &Segment, sigma: f64) -> Vec<Complex64> {
    let l = Layout { n };
    let mut d = vec![Complex64::new(0.0, 0.0); l.complex_dim()];
    let (scale, dq) = match seg {
        Segment::T(p) => (Complex64::new(1.0, 0.0), -p.at(sigma)),
        Segment::W(p) => (p.at(sigma), Complex64::new(-1.0, 0.0)),
    };
    for j in 0..=n {
        d[l.s(j)] = scale * l.get(w, l.x(j));
        d[l.x(j)] = scale * l.get(w, l.s(j));
    }
    d[l.q()] = dq;
    d
}

fn defining_value(w: &DVector<f64>, n: usize, seg: &Segment, sigma: f64) -> Complex64 {
    let l = Layout { n };
    let (sum, q) = (sx_sum(w, n), l.get(w, l.q()));
    match seg {
        Segment::T(p) => sum - p.at(sigma) * q,
        Segment::W(p) => p.at(sigma) * sum - q,
    }
}

/// `dE / dsigma` with the point held fixed.
fn defining_rate(w: &DVector<f64>, n: usize, seg: &Segment, sigma: f64) -> Complex64 {
    let l = Layout { n };
    match seg {
        Segment::T(p) => -p.velocity(sigma) * l.get(w, l.q()),
        Segment::W(p) => p.velocity(sigma) * sx_sum(w, n),
    }
}

fn defining_rows(w: &DVector<f64>, n: usize, seg: &Segment, sigma: f64) -> DMatrix<f64> {
    let partials = holomorphic_partials(w, n, seg, sigma);
    let mut d = DMatrix::zeros(2, w.len());
    for (k, f) in partials.iter().enumerate() {
        d[(0, 2 * k)] = f.re;
        d[(0, 2 * k + 1)] = -f.im;
        d[(1, 2 * k)] = f.im;
        d[(1, 2 * k + 1)] = f.re;
    }
    d
}

impl ConstraintSet for XConstraints<'_> {
    fn residual(&self, w: &DVector<f64>, sigma: f64) -> DVector<f64> {
        let (a, b) = moment_map(w, self.n);
        let e = defining_value(w, self.n, self.seg, sigma);
        DVector::from_vec(vec![a - self.kappa.k1, b - self.kappa.k2, e.re, e.im])
    }

    fn jacobian(&self, w: &DVector<f64>, sigma: f64) -> DMatrix<f64> {
        let mut d = DMatrix::zeros(4, w.len());
        d.rows_mut(0, 2).copy_from(&moment_jacobian(w, self.n));
        d.rows_mut(2, 2)
            .copy_from(&defining_rows(w, self.n, self.seg, sigma));
        d
    }
}

/// Horizontal velocity at `w` covering the base motion of `seg` at `sigma`.
fn horizontal_velocity(
    w: &DVector<f64>,
    n: usize,
    kappa: Kappa,
    seg: &Segment,
    sigma: f64,
) -> Result<DVector<f64>> {
    let c = XConstraints { n, kappa, seg };
    let fiber = Subspace::new(nullspace(&c.jacobian(w, sigma)))
        .map_err(|e| Error::FieldFailure(format!("fiber tangent: {e}")))?;
    if fiber.dim() + 4 != w.len() {
        return Err(Error::FieldFailure(format!(
            "fiber tangent has dimension {}",
            fiber.dim()
        )));
    }
    let form = AmbientForm::standard(w.len() / 2);
    let comp = symplectic_complement(&form, &fiber)?;
    let [o1, o2] = orbit_directions(w, n);
    let mut orbits = DMatrix::zeros(w.len(), 2);
    orbits.set_column(0, &o1);
    orbits.set_column(1, &o2);
    let o = orthonormal_basis(&orbits);
    let reduced = comp.basis() - &o * (o.transpose() * comp.basis());
    let h = orthonormal_basis(&reduced);
    if h.ncols() != 2 {
        return Err(Error::RankDeficient {
            rank: h.ncols(),
            expected: 2,
        });
    }
    let image = defining_rows(w, n, seg, sigma) * &h;
    let rate = defining_rate(w, n, seg, sigma);
    let m = Matrix2::new(image[(0, 0)], image[(0, 1)], image[(1, 0)], image[(1, 1)]);
    let coef = m
        .lu()
        .solve(&Vector2::new(-rate.re, -rate.im))
        .ok_or_else(|| Error::FieldFailure("horizontal space does not cover the base".into()))?;
    Ok(h * DVector::from_column_slice(coef.as_slice()))
}

#[derive(Debug, Clone, PartialEq)]
pub struct AmbientTransport {
    /// Level-set representative of the endpoint (not gauge-fixed).
    pub end: DVector<f64>,
    pub base: BasePoint,
    pub steps: usize,
    pub max_residual: f64,
    /// Concatenated over segments; `param` is the accumulated path parameter.
    pub trace: Option<Vec<TracePoint>>,
}

/// Symplectic parallel transport of a level-set representative along `path`.
pub fn transport_ambient(
    start: &DVector<f64>,
    n: usize,
    kappa: Kappa,
    path: &ExtendedPath,
    step: f64,
    record_trace: bool,
) -> Result<AmbientTransport> {
    let l = Layout::new(n)?;
    if start.len() != l.real_dim() {
        return Err(Error::DimensionMismatch {
            expected: l.real_dim(),
            got: start.len(),
        });
    }
    let r = x_residual_raw(start, n, &path.start());
    if r > X_TOL {
        return Err(Error::InvalidParameter(format!(
            "start is off the first fiber by {r:e}"
        )));
    }
    let mut p = start.clone();
    let mut steps = 0;
    let mut max_residual = 0.0_f64;
    let mut trace: Option<Vec<TracePoint>> = record_trace.then(Vec::new);
    let mut offset = 0.0;
    for seg in path.segments() {
        let c = XConstraints { n, kappa, seg };
        let field = |w: &DVector<f64>, sigma: f64| horizontal_velocity(w, n, kappa, seg, sigma);
        let run = ode_transport(field, seg.path().span(), &p, step, Some(&c), record_trace)?;
        let (a, _) = seg.path().span();
        if let (Some(all), Some(part)) = (trace.as_mut(), run.trace) {
            let skip = usize::from(!all.is_empty());
            all.extend(part.into_iter().skip(skip).map(|tp| TracePoint {
                param: offset + (tp.param - a).abs(),
                ..tp
            }));
        }
        offset += (seg.path().span().1 - a).abs();
        steps += run.steps;
        max_residual = max_residual.max(run.max_residual);
        p = run.end;
    }
    Ok(AmbientTransport {
        end: p,
        base: path.end(),
        steps,
        max_residual,
        trace,
    })
}

/// Transports `start` along an affine `path` with both backends (the Darboux
/// chart and level-set coordinates) and returns the chart distance between
/// the two endpoints.
pub fn backend_gap(start: &LocalFiberPoint, path: &BasePath, step: f64) -> Result<f64> {
    let (n, mu) = (start.n(), start.mu());
    let chart = transport_local(start, path, step, false)?;
    let xp = ExtendedPath::new(vec![Segment::T(*path)])?;
    let amb = transport_ambient(
        &darboux_lift(start.y(), n, mu)?,
        n,
        Kappa::from_mu(mu)?,
        &xp,
        step,
        false,
    )?;
    Ok(local_from_level_set(&amb.end, n, mu)?.distance(&chart.end))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fibration::local::{
        darboux_lift, local_from_level_set, project_to_local_fiber, random_w_mu_point,
        transport_local, LocalFiberPoint,
    };
    use crate::sampling::seeded_rng;

    #[test]
    fn real_paths_split_at_the_switch_radius() {
        let p = ExtendedPath::infinity_round_trip(1.0).unwrap();
        assert_eq!(p.segments().len(), 4);
        assert!(p.start().is_infinity() && p.end().is_infinity());
        assert!(matches!(p.segments()[0], Segment::W(_)));
        assert!(matches!(p.segments()[1], Segment::T(_)));
        let lp = ExtendedPath::loop_at_infinity(50.0).unwrap();
        assert_eq!(lp.segments().len(), 3);
        assert!(ExtendedPath::real(-1.0, 2.0).is_err());
        let gap = ExtendedPath::new(vec![
            Segment::T(BasePath::real_line(1.0, 2.0)),
            Segment::T(BasePath::real_line(3.0, 4.0)),
        ]);
        assert!(gap.is_err());
    }

    #[test]
    fn constraint_jacobian_matches_finite_differences() {
        let mut rng = seeded_rng(60);
        let n = 1;
        let kappa = Kappa::from_mu(2.0).unwrap();
        let y = random_w_mu_point(&mut rng, n, 2.0, 0.8);
        let w = darboux_lift(&y, n, 2.0).unwrap();
        for seg in [
            Segment::T(BasePath::line(
                Complex64::new(0.3, 0.1),
                Complex64::new(1.0, 2.0),
            )),
            Segment::W(BasePath::arc(0.05, 0.0, 1.0)),
        ] {
            let c = XConstraints {
                n,
                kappa,
                seg: &seg,
            };
            let f = crate::symplectic::FnMap::new(w.len(), 4, |p: &DVector<f64>| {
                Some(c.residual(p, 0.4))
            });
            let fd = crate::symplectic::jacobian(&f, &w).unwrap();
            assert!((fd - c.jacobian(&w, 0.4)).amax() < 1e-8);
        }
    }

    #[test]
    fn agrees_with_the_chart_backend() {
        let mut rng = seeded_rng(61);
        let (n, mu) = (1, 2.0);
        let kappa = Kappa::from_mu(mu).unwrap();
        let t0 = Complex64::new(0.5, 0.2);
        let y = project_to_local_fiber(&random_w_mu_point(&mut rng, n, mu, 0.6), n, t0).unwrap();
        let p = LocalFiberPoint::new(y, n, mu).unwrap();
        let path = BasePath::line(t0, Complex64::new(1.2, -0.3));
        let chart = transport_local(&p, &path, 1e-2, false).unwrap();
        let xp = ExtendedPath::new(vec![Segment::T(path)]).unwrap();
        let amb = transport_ambient(
            &darboux_lift(p.y(), n, mu).unwrap(),
            n,
            kappa,
            &xp,
            1e-2,
            true,
        )
        .unwrap();
        let back = local_from_level_set(&amb.end, n, mu).unwrap();
        assert!(
            back.distance(&chart.end) <= 1e-5,
            "{}",
            back.distance(&chart.end)
        );
        assert!(amb.max_residual <= 1e-12);
        assert_eq!(amb.trace.unwrap().len(), amb.steps + 1);
    }
}
