use nalgebra::{DMatrix, DVector};

use super::linalg::solve_min_norm;
use crate::{Error, Result};

pub const PROJECTION_TOL: f64 = 1e-12;
pub const MAX_PROJECTION_ITERS: usize = 20;

/// Constraints `c(p, t) = 0` defining the manifold a transport must stay on.
pub trait ConstraintSet: Sync {
    fn residual(&self, p: &DVector<f64>, t: f64) -> DVector<f64>;
    fn jacobian(&self, p: &DVector<f64>, t: f64) -> DMatrix<f64>;
}

fn inf_norm(v: &DVector<f64>) -> f64 {
    v.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
}

/// Gauss-Newton projection with minimum-norm corrections.
/// Returns the projected point and its final residual.
pub fn project_onto(
    constraints: &dyn ConstraintSet,
    p: &DVector<f64>,
    t: f64,
) -> Result<(DVector<f64>, f64)> {
    let mut x = p.clone();
    let mut r = constraints.residual(&x, t);
    let mut res = inf_norm(&r);
    for _ in 0..MAX_PROJECTION_ITERS {
        if res <= PROJECTION_TOL {
            return Ok((x, res));
        }
        let jac = constraints.jacobian(&x, t);
        let dx = solve_min_norm(&jac, &r).ok_or(Error::ProjectionFailed {
            residual: res,
            iterations: 0,
        })?;
        x -= dx;
        r = constraints.residual(&x, t);
        res = inf_norm(&r);
        if !res.is_finite() {
            break;
        }
    }
    if res <= PROJECTION_TOL {
        Ok((x, res))
    } else {
        Err(Error::ProjectionFailed {
            residual: res,
            iterations: MAX_PROJECTION_ITERS,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TracePoint {
    pub param: f64,
    pub point: DVector<f64>,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Transport {
    pub end: DVector<f64>,
    pub steps: usize,
    /// Largest constraint residual seen after projection (0 without a projector).
    pub max_residual: f64,
    pub trace: Option<Vec<TracePoint>>,
}

/// Classical RK4 over `t_span` with a fixed step (rounded down so that the span
/// splits into equal steps). With a projector, every accepted step is pulled
/// back onto the constraint set.
pub fn ode_transport<F>(
    field: F,
    t_span: (f64, f64),
    start: &DVector<f64>,
    step: f64,
    projector: Option<&dyn ConstraintSet>,
    record_trace: bool,
) -> Result<Transport>
where
    F: Fn(&DVector<f64>, f64) -> Result<DVector<f64>>,
{
    if !(step > 0.0) || !step.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "step must be positive, got {step}"
        )));
    }
    let (t0, t1) = t_span;
    let span = t1 - t0;
    let steps = if span == 0.0 {
        0
    } else {
        (span.abs() / step).ceil() as usize
    };
    let h = if steps == 0 { 0.0 } else { span / steps as f64 };

    let mut p = start.clone();
    let mut max_residual = 0.0_f64;
    if let Some(c) = projector {
        let (q, r) = project_onto(c, &p, t0)?;
        p = q;
        max_residual = r;
    }
    let mut trace = record_trace.then(|| {
        vec![TracePoint {
            param: t0,
            point: p.clone(),
            residual: max_residual,
        }]
    });

    let check = |v: DVector<f64>| -> Result<DVector<f64>> {
        if v.iter().all(|x| x.is_finite()) {
            Ok(v)
        } else {
            Err(Error::FieldFailure("non-finite velocity".into()))
        }
    };
    for i in 0..steps {
        let t = t0 + h * i as f64;
        let k1 = check(field(&p, t)?)?;
        let k2 = check(field(&(&p + &k1 * (0.5 * h)), t + 0.5 * h)?)?;
        let k3 = check(field(&(&p + &k2 * (0.5 * h)), t + 0.5 * h)?)?;
        let k4 = check(field(&(&p + &k3 * h), t + h)?)?;
        p += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
        let t_next = if i + 1 == steps { t1 } else { t + h };
        let mut residual = 0.0;
        if let Some(c) = projector {
            let (q, r) = project_onto(c, &p, t_next)?;
            p = q;
            residual = r;
            max_residual = max_residual.max(r);
        }
        if let Some(tr) = trace.as_mut() {
            tr.push(TracePoint {
                param: t_next,
                point: p.clone(),
                residual,
            });
        }
    }
    Ok(Transport {
        end: p,
        steps,
        max_residual,
        trace,
    })
}
