use nalgebra::DVector;

use super::jacobian::SmoothMap;
use super::linalg::{nullspace, solve_min_norm};
use super::ode::ConstraintSet;

const NEWTON_STEPS: usize = 8;

/// Local chart of a constraint level `c(., t) = 0` around a point `p` on it:
/// a coefficient vector `a` maps to the fixed-step Newton projection of
/// `p + T a`, with `T` an orthonormal basis of the tangent space at `p`.
/// A fixed number of minimum-norm steps keeps the chart a smooth function of `a`.
pub struct ConstraintChart<'a> {
    constraints: &'a dyn ConstraintSet,
    param: f64,
    center: DVector<f64>,
    frame: nalgebra::DMatrix<f64>,
}

impl<'a> ConstraintChart<'a> {
    pub fn new(constraints: &'a dyn ConstraintSet, center: DVector<f64>, param: f64) -> Self {
        let frame = nullspace(&constraints.jacobian(&center, param));
        Self {
            constraints,
            param,
            center,
            frame,
        }
    }

    pub fn dim(&self) -> usize {
        self.frame.ncols()
    }

    pub fn frame(&self) -> &nalgebra::DMatrix<f64> {
        &self.frame
    }

    pub fn point(&self, a: &DVector<f64>) -> Option<DVector<f64>> {
        let mut x = &self.center + &self.frame * a;
        for _ in 0..NEWTON_STEPS {
            let r = self.constraints.residual(&x, self.param);
            let jac = self.constraints.jacobian(&x, self.param);
            x -= solve_min_norm(&jac, &r)?;
        }
        x.iter().all(|v| v.is_finite()).then_some(x)
    }
}

impl SmoothMap for ConstraintChart<'_> {
    fn domain_dim(&self) -> usize {
        self.dim()
    }

    fn codomain_dim(&self) -> usize {
        self.center.len()
    }

    fn eval(&self, a: &DVector<f64>) -> Option<DVector<f64>> {
        self.point(a)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;

    struct Sphere;

    impl ConstraintSet for Sphere {
        fn residual(&self, p: &DVector<f64>, _: f64) -> DVector<f64> {
            DVector::from_element(1, p.norm_squared() - 1.0)
        }

        fn jacobian(&self, p: &DVector<f64>, _: f64) -> DMatrix<f64> {
            DMatrix::from_row_slice(1, p.len(), (p * 2.0).as_slice())
        }
    }

    #[test]
    fn chart_lands_on_the_sphere() {
        let c = ConstraintChart::new(&Sphere, DVector::from_vec(vec![0.0, 0.0, 1.0]), 0.0);
        assert_eq!(c.dim(), 2);
        let p = c.point(&DVector::from_vec(vec![0.3, -0.2])).unwrap();
        assert!((p.norm() - 1.0).abs() < 1e-15);
        assert_eq!(
            c.point(&DVector::zeros(2)).unwrap(),
            DVector::from_vec(vec![0.0, 0.0, 1.0])
        );
    }
}
