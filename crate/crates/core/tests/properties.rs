use std::f64::consts::PI;

use proptest::prelude::*;
use sflab_core::dehn::{
    geodesic_flow, model_twist, model_twist_inverse, profile_default, CotangentPoint,
};
use sflab_core::fibration::{g_of_t, one_minus_g, BasePoint};
use sflab_core::symplectic::{symplectic_complement, AmbientForm, Subspace};
use sflab_core::toric::{act, gauge_fix, moment_map, Kappa, LevelSetPoint};
use sflab_core::{Complex64, DVector};

fn vector(dim: usize) -> impl Strategy<Value = DVector<f64>> {
    prop::collection::vec(-2.0f64..2.0, dim).prop_map(DVector::from_vec)
}

/// A covector on `S^2` built from two generic vectors.
fn cotangent() -> impl Strategy<Value = CotangentPoint> {
    (vector(3), vector(3), 0.0f64..1.5).prop_filter_map("degenerate", |(a, b, len)| {
        let u = &a / a.norm();
        let v = &b - &u * u.dot(&b);
        if a.norm() < 1e-3 || v.norm() < 1e-3 {
            return None;
        }
        CotangentPoint::new(u, v.normalize() * len).ok()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn standard_form_is_antisymmetric(v in vector(6), w in vector(6)) {
        let f = AmbientForm::standard(3);
        let a = f.eval(&v, &w).unwrap();
        let b = f.eval(&w, &v).unwrap();
        prop_assert!((a + b).abs() <= 1e-12);
        prop_assert!(f.eval(&v, &v).unwrap().abs() <= 1e-12);
    }

    #[test]
    fn complement_is_an_involution(a in vector(6), b in vector(6)) {
        prop_assume!(a.norm() > 1e-2 && b.norm() > 1e-2);
        let f = AmbientForm::standard(3);
        let s = Subspace::from_vectors(6, &[a, b]);
        prop_assume!(s.is_ok());
        let s = s.unwrap();
        let c = symplectic_complement(&f, &s).unwrap();
        prop_assert_eq!(c.dim(), 4);
        let cc = symplectic_complement(&f, &c).unwrap();
        prop_assert!(cc.max_angle_to(&s) <= 1e-8);
    }

    #[test]
    fn geodesic_flow_is_a_group_action(p in cotangent(), a in -4.0f64..4.0, b in -4.0f64..4.0) {
        prop_assume!(p.length() > 1e-3);
        let two_steps = geodesic_flow(&geodesic_flow(&p, a).unwrap(), b).unwrap();
        let one_step = geodesic_flow(&p, a + b).unwrap();
        prop_assert!(two_steps.distance(&one_step) <= 1e-12);
        prop_assert!(geodesic_flow(&p, 2.0 * PI).unwrap().distance(&p) <= 1e-12);
    }

    #[test]
    fn twist_inverts_and_preserves_length(p in cotangent()) {
        let prof = profile_default(0.5).unwrap();
        let q = model_twist(&p, &prof);
        prop_assert!((q.length() - p.length()).abs() <= 1e-12);
        prop_assert!(model_twist_inverse(&q, &prof).distance(&p) <= 1e-10);
    }

    #[test]
    fn g_is_increasing_and_bounded(t in 1e-3f64..1e3, dt in 1e-6f64..1.0) {
        let g = g_of_t(t).unwrap();
        prop_assert!(g > 0.0 && g < 1.0);
        prop_assert!(g_of_t(t + dt).unwrap() > g);
        prop_assert!(((1.0 - g) - one_minus_g(t).unwrap()).abs() <= 1e-15);
    }

    #[test]
    fn gauge_fix_is_constant_on_orbits(w in vector(12), a in -PI..PI, b in -PI..PI) {
        // n = 1: C^6 = (s_0, s_1, q, x_0, x_1, x_2)
        let kappa = Kappa::from_mu(2.0).unwrap();
        let p = LevelSetPoint::normalized_q0(w, 1, kappa);
        prop_assume!(p.is_ok());
        let p = p.unwrap();
        let moved = act(p.w(), 1, a, b);
        let (m0, m1) = moment_map(p.w(), 1);
        let (n0, n1) = moment_map(&moved, 1);
        prop_assert!((m0 - n0).abs() <= 1e-12 && (m1 - n1).abs() <= 1e-12);
        let q = LevelSetPoint::new(moved, 1, kappa).unwrap();
        prop_assert!(gauge_fix(&p).distance(&gauge_fix(&q)) <= 1e-10);
    }

    #[test]
    fn base_points_are_projective(re in -5.0f64..5.0, im in -5.0f64..5.0, c in 0.1f64..10.0, phase in -PI..PI) {
        let t = Complex64::new(re, im);
        let scale = Complex64::from_polar(c, phase);
        let a = BasePoint::affine(t).unwrap();
        let b = BasePoint::new(t * scale, scale).unwrap();
        prop_assert!((a.t().unwrap() - b.t().unwrap()).norm() <= 1e-12 * (1.0 + t.norm()));
    }
}
