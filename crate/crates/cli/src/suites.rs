//! The verification suites behind `lab run`.

use std::f64::consts::PI;
use std::time::Instant;

use rayon::prelude::*;
use sflab_core::dehn::{
    model_twist, model_twist_inverse, profile_default, random_cotangent_point, CotangentPoint,
};
use sflab_core::fibration::local::{
    explicit_lift, g_of_t, lift_velocity_residual, random_w_mu_point, transport_local,
    vanishing_cycle_point,
};
use sflab_core::fibration::monodromy::{
    antipodal_vanishing_image, expected_vanishing_image, expected_vanishing_phase, monodromy_x,
    random_s_point, s_transport_check, transported_vanishing_image, vanishing_cycle_at_infinity,
    vanishing_cycle_level_point,
};
use sflab_core::fibration::{
    darboux_pullback_defect, transport_ambient, BasePoint, ExtendedPath, LocalFiberPoint,
};
use sflab_core::lefschetz_std::{
    conjugated_monodromy, monodromy_loop, sigma_sample, transport_std,
};
use sflab_core::path::BasePath;
use sflab_core::sampling::{seeded_rng, uniform, unit_vector};
use sflab_core::symplectic::{QuadratureSpec, TracePoint};
use sflab_core::toric::{
    fubini_study_total_cp1, l_mu_point, l_mu_tangent_check, line_integral_fiber,
    line_integral_section, Kappa,
};
use sflab_core::DVector;

use crate::config::{SuiteConfig, SuiteName};
use crate::report::{Check, Report};
use crate::CliError;

#[derive(Debug, Clone)]
pub struct SuiteOutput {
    pub report: Report,
    /// Present when the config asks for a trace.
    pub trace: Option<Vec<TracePoint>>,
}

/// Validates `cfg`, runs the suite and returns its report with the checks
/// sorted by name.
pub fn run_suite(cfg: &SuiteConfig) -> Result<SuiteOutput, CliError> {
    cfg.validate()?;
    let clock = Instant::now();
    let mut out = match cfg.suite {
        SuiteName::Darboux => darboux(cfg),
        SuiteName::LagrangianLmu => lagrangian_lmu(cfg),
        SuiteName::GOfT => g_of_t_suite(cfg),
        SuiteName::VanishingCycle => vanishing_cycle(cfg),
        SuiteName::StdMonodromy => std_monodromy(cfg),
        SuiteName::ModelTwist => model_twist_suite(cfg),
        SuiteName::LineIntegrals => line_integrals(cfg),
        SuiteName::SInvariance => s_invariance(cfg),
        SuiteName::XMonodromy => x_monodromy(cfg),
    }?;
    if let Some(tol) = cfg.tol {
        out.report.override_tolerance(tol);
    }
    out.report.sort_checks();
    out.report.duration_s = if cfg.reproducible {
        0.0
    } else {
        clock.elapsed().as_secs_f64()
    };
    Ok(out)
}

/// Largest value; NaN if any value is NaN.
fn worst(values: impl IntoIterator<Item = f64>) -> f64 {
    values.into_iter().fold(0.0, |acc, v| {
        if v.is_nan() || acc.is_nan() {
            f64::NAN
        } else {
            acc.max(v)
        }
    })
}

fn grid<T: Copy>(given: Option<T>, default: &[T]) -> Vec<T> {
    given.map_or_else(|| default.to_vec(), |v| vec![v])
}

fn output(report: Report, trace: Option<Vec<TracePoint>>) -> Result<SuiteOutput, CliError> {
    Ok(SuiteOutput { report, trace })
}

fn darboux(cfg: &SuiteConfig) -> Result<SuiteOutput, CliError> {
    let ns = grid(cfg.n, &[1, 2]);
    let mus = grid(cfg.mu, &[1.5, 2.0, 4.0]);
    let samples = cfg.samples.unwrap_or(200);
    let mut rng = seeded_rng(cfg.seed);
    let mut report = Report::new(cfg.suite.as_str(), cfg.seed);
    report.param("n", ns.iter().map(|&n| n as f64).collect::<Vec<_>>());
    report.param("mu", mus.clone());
    report.param("samples", samples);
    for &n in &ns {
        for &mu in &mus {
            let points = (0..samples)
                .map(|_| LocalFiberPoint::new(random_w_mu_point(&mut rng, n, mu, 0.95), n, mu))
                .collect::<sflab_core::Result<Vec<_>>>()?;
            let defects = points
                .par_iter()
                .map(darboux_pullback_defect)
                .collect::<sflab_core::Result<Vec<_>>>()?;
            report.check(Check::at_most(
                format!("pullback_defect.n{n}.mu{mu}"),
                worst(defects),
                1e-5,
            ));
        }
    }
    output(report, None)
}

fn lagrangian_lmu(cfg: &SuiteConfig) -> Result<SuiteOutput, CliError> {
    let ns = grid(cfg.n, &[1, 2]);
    let mus = grid(cfg.mu, &[1.5, 2.0, 4.0]);
    let samples = cfg.samples.unwrap_or(100);
    let mut rng = seeded_rng(cfg.seed);
    let mut report = Report::new(cfg.suite.as_str(), cfg.seed);
    report.param("n", ns.iter().map(|&n| n as f64).collect::<Vec<_>>());
    report.param("mu", mus.clone());
    report.param("samples", samples);
    for &n in &ns {
        for &mu in &mus {
            let zs: Vec<DVector<f64>> = (0..samples)
                .map(|_| unit_vector(&mut rng, 2 * (n + 1)))
                .collect();
            let checks = zs
                .par_iter()
                .map(|z| l_mu_tangent_check(mu, n, z))
                .collect::<sflab_core::Result<Vec<_>>>()?;
            report.check(Check::at_most(
                format!("lmu_residual.n{n}.mu{mu}"),
                worst(checks.iter().map(|c| c.residual)),
                1e-6,
            ));
            report.check(Check::at_most(
                format!("first_factor_sign.n{n}.mu{mu}"),
                worst(checks.iter().map(|c| c.sign_defect)),
                1e-6,
            ));
        }
    }
    output(report, None)
}

/// Root of `g / sqrt(1 - g) = t` on `[0, 1)` by bisection.
pub fn g_by_bisection(t: f64) -> f64 {
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid / (1.0 - mid).sqrt() < t {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn g_of_t_suite(cfg: &SuiteConfig) -> Result<SuiteOutput, CliError> {
    let ts: Vec<f64> = if cfg.t.is_empty() {
        (0..30)
            .map(|k| 0.1 * 1000f64.powf(k as f64 / 29.0))
            .collect()
    } else {
        cfg.t.clone()
    };
    let mut report = Report::new(cfg.suite.as_str(), cfg.seed);
    report.param("t", ts.clone());
    let mut quadratic = Vec::new();
    let mut oracle = Vec::new();
    for &t in &ts {
        let g = g_of_t(t)?;
        quadratic.push((g * g + t * t * g - t * t).abs());
        oracle.push((g - g_by_bisection(t)).abs());
    }
    report.check(Check::at_most(
        "quadratic_residual",
        worst(quadratic),
        1e-10,
    ));
    report.check(Check::at_most("bisection_oracle", worst(oracle), 1e-10));
    let golden = (5f64.sqrt() - 1.0) / 2.0;
    report.check(Check::at_most(
        "golden_ratio_at_1",
        (g_of_t(1.0)? - golden).abs(),
        1e-12,
    ));
    report.check(Check::at_most(
        "limit_gap_at_100",
        1.0 - g_of_t(100.0)?,
        1e-4,
    ));
    output(report, None)
}

fn vanishing_cycle(cfg: &SuiteConfig) -> Result<SuiteOutput, CliError> {
    let n = cfg.n.unwrap_or(1);
    let mu = cfg.mu.unwrap_or(2.0);
    let samples = cfg.samples.unwrap_or(20);
    let step = cfg.step.unwrap_or(1e-3);
    let (from, to) = match cfg.t.as_slice() {
        [] => (1.0, 0.01),
        [a, b] if *a > *b && *b > 0.0 => (*a, *b),
        _ => {
            return Err(CliError::Usage(
                "vanishing-cycle needs t = FROM,TO with FROM > TO > 0".into(),
            ))
        }
    };
    let mut rng = seeded_rng(cfg.seed);
    let dirs: Vec<DVector<f64>> = (0..samples)
        .map(|_| unit_vector(&mut rng, 2 * (n + 1)))
        .collect();
    let path = BasePath::real_line(from, to);
    let g_end = g_of_t(to)?;
    let runs = dirs
        .par_iter()
        .enumerate()
        .map(|(i, x)| -> sflab_core::Result<_> {
            let start = vanishing_cycle_point(from, mu, n, x)?;
            let run = transport_local(&start, &path, step, true)?;
            let trace = run.run.trace.unwrap_or_default();
            let mut deviation = 0.0f64;
            for tp in &trace {
                let r = path.at(tp.param).re.min(from);
                deviation = deviation.max((&tp.point - explicit_lift(from, r, &start)?.y()).norm());
            }
            let radius = (run.end.x_real().norm_squared() - g_end).abs();
            let horizontal = worst(
                [to, (from * to).sqrt(), from]
                    .iter()
                    .map(|&r| lift_velocity_residual(from, r, &start))
                    .collect::<sflab_core::Result<Vec<_>>>()?,
            );
            let kept = (i == 0 && cfg.trace.is_some()).then_some(trace);
            Ok((deviation, radius, run.run.max_residual, horizontal, kept))
        })
        .collect::<sflab_core::Result<Vec<_>>>()?;
    let mut report = Report::new(cfg.suite.as_str(), cfg.seed);
    report.param("n", n);
    report.param("mu", mu);
    report.param("samples", samples);
    report.param("step", step);
    report.param("t", vec![from, to]);
    report.check(Check::at_most(
        "lift_deviation",
        worst(runs.iter().map(|r| r.0)),
        1e-4,
    ));
    report.check(Check::at_most(
        "endpoint_radius",
        worst(runs.iter().map(|r| r.1)),
        1e-4,
    ));
    report.check(Check::at_most(
        "fiber_residual",
        worst(runs.iter().map(|r| r.2)),
        1e-9,
    ));
    report.check(Check::at_most(
        "lift_horizontality",
        worst(runs.iter().map(|r| r.3)),
        1e-9,
    ));
    let trace = runs.into_iter().next().and_then(|r| r.4);
    output(report, trace)
}

fn unit_complex(dim: usize, k: usize, value: f64) -> DVector<f64> {
    DVector::from_fn(2 * dim, |i, _| if i == k { value } else { 0.0 })
}

fn std_monodromy(cfg: &SuiteConfig) -> Result<SuiteOutput, CliError> {
    let dims = grid(cfg.n, &[2, 3]);
    let r = cfg.t.first().copied().unwrap_or(1.0);
    if !(r > 0.0) {
        return Err(CliError::Usage(format!(
            "std-monodromy needs t = r > 0, got {r}"
        )));
    }
    let step = cfg.step.unwrap_or(1e-3);
    let samples = cfg.samples.unwrap_or(20);
    let mut rng = seeded_rng(cfg.seed);
    let mut report = Report::new(cfg.suite.as_str(), cfg.seed);
    report.param("n", dims.iter().map(|&d| d as f64).collect::<Vec<_>>());
    report.param("r", r);
    report.param("step", step);
    report.param("samples", samples);
    let mut trace = None;
    for (k, &dim) in dims.iter().enumerate() {
        let e1 = DVector::from_fn(dim, |i, _| if i == 0 { 1.0 } else { 0.0 });
        let start = sigma_sample(r, 0.0, &e1)?;
        let record = k == 0 && cfg.trace.is_some();
        let full = transport_std(&start, &monodromy_loop(r), step, record)?;
        let half = transport_std(&start, &BasePath::arc(r, 0.0, PI), step, false)?;
        let minus = unit_complex(dim, 0, -r.sqrt());
        let plus_i = unit_complex(dim, 1, r.sqrt());
        report.check(Check::at_most(
            format!("loop_endpoint.n{dim}"),
            (full.end.z() - minus).norm(),
            1e-4,
        ));
        report.check(Check::at_most(
            format!("half_loop_endpoint.n{dim}"),
            (half.end.z() - plus_i).norm(),
            1e-4,
        ));
        let us: Vec<DVector<f64>> = (0..samples).map(|_| unit_vector(&mut rng, dim)).collect();
        let gaps = us
            .par_iter()
            .map(|u| -> sflab_core::Result<f64> {
                let q = conjugated_monodromy(&CotangentPoint::zero_section(u.clone())?, r, step)?;
                Ok((q.u() + u).norm().hypot(q.v().norm()))
            })
            .collect::<sflab_core::Result<Vec<_>>>()?;
        report.check(Check::at_most(
            format!("conjugated_antipodal.n{dim}"),
            worst(gaps),
            1e-4,
        ));
        if record {
            trace = full.run.trace;
        }
    }
    output(report, trace)
}

fn model_twist_suite(cfg: &SuiteConfig) -> Result<SuiteOutput, CliError> {
    let m = cfg.n.unwrap_or(2) + 1;
    let support = cfg.support.unwrap_or(sflab_core::dehn::DEFAULT_SUPPORT);
    let samples = cfg.samples.unwrap_or(100);
    let profile = profile_default(support)?;
    let mut rng = seeded_rng(cfg.seed);
    let mut report = Report::new(cfg.suite.as_str(), cfg.seed);
    report.param("n", m - 1);
    report.param("support", support);
    report.param("samples", samples);

    let mut outside = Vec::new();
    let mut antipodal = Vec::new();
    let mut inside = Vec::new();
    for k in 0..samples {
        let len = if k == 0 {
            support
        } else {
            uniform(&mut rng, support, 4.0 * support)
        };
        outside.push(random_cotangent_point(&mut rng, m, len)?);
        antipodal.push(CotangentPoint::zero_section(unit_vector(&mut rng, m))?);
        let len = uniform(&mut rng, 0.02 * support, 2.0 * support);
        inside.push(random_cotangent_point(&mut rng, m, len)?);
    }
    let identity = worst(outside.iter().map(|p| model_twist(p, &profile).distance(p)));
    let zero = worst(antipodal.iter().map(|p| {
        let q = model_twist(p, &profile);
        (q.u() + p.u()).norm().hypot(q.v().norm())
    }));
    let defects = inside
        .par_iter()
        .map(|p| sflab_core::dehn::symplectic_defect(|q| model_twist(q, &profile), p))
        .collect::<sflab_core::Result<Vec<_>>>()?;
    let lengths = worst(
        inside
            .iter()
            .map(|p| (model_twist(p, &profile).length() - p.length()).abs()),
    );
    let round_trip = worst(
        inside
            .iter()
            .map(|p| model_twist_inverse(&model_twist(p, &profile), &profile).distance(p)),
    );
    report.check(Check::at_most("identity_outside_support", identity, 1e-14));
    report.check(Check::at_most("antipodal_on_zero_section", zero, 0.0));
    report.check(Check::at_most("symplectic_defect", worst(defects), 1e-5));
    report.check(Check::at_most("covector_length_preserved", lengths, 1e-12));
    report.check(Check::at_most("inverse_round_trip", round_trip, 1e-10));
    output(report, None)
}

fn line_integrals(cfg: &SuiteConfig) -> Result<SuiteOutput, CliError> {
    let n = cfg.n.unwrap_or(1);
    let kappa = match (cfg.kappa, cfg.mu) {
        (Some((a, b)), _) => Kappa::new(a, b)?,
        (None, Some(mu)) => Kappa::from_mu(mu)?,
        (None, None) => Kappa::new(1.0, 2.0)?,
    };
    let spec = QuadratureSpec::default();
    let fiber = line_integral_fiber(kappa, n, &spec)?;
    let section = line_integral_section(kappa, n, &spec)?;
    let total = fubini_study_total_cp1(&spec)?;
    let mut report = Report::new(cfg.suite.as_str(), cfg.seed);
    report.param("n", n);
    report.param("kappa", vec![kappa.k1, kappa.k2]);
    report.param("fiber_line_area", fiber);
    report.param("section_line_area", section);
    report.check(Check::at_most(
        "fiber_line_relative",
        (fiber / (kappa.k1 * PI) - 1.0).abs(),
        1e-3,
    ));
    report.check(Check::at_most(
        "section_line_relative",
        (section / (kappa.k2 * PI) - 1.0).abs(),
        1e-3,
    ));
    report.check(Check::at_most("cp1_total", (total - PI).abs(), 1e-6));
    output(report, None)
}

fn s_invariance(cfg: &SuiteConfig) -> Result<SuiteOutput, CliError> {
    let n = cfg.n.unwrap_or(1);
    let mu = cfg.mu.unwrap_or(2.0);
    let samples = cfg.samples.unwrap_or(20);
    let step = cfg.step.unwrap_or(1e-2);
    let via = cfg.t.first().copied().unwrap_or(1.0);
    let path = ExtendedPath::infinity_round_trip(via)?;
    let mut rng = seeded_rng(cfg.seed);
    let points = (0..samples)
        .map(|_| random_s_point(&mut rng, n, mu))
        .collect::<sflab_core::Result<Vec<_>>>()?;
    let drifts = points
        .par_iter()
        .map(|p| s_transport_check(p, &path, step))
        .collect::<sflab_core::Result<Vec<_>>>()?;
    let trace = match (&cfg.trace, points.first()) {
        (Some(_), Some(p)) => {
            let tp = p.point();
            transport_ambient(tp.w(), n, tp.kappa(), &path, step, true)?.trace
        }
        _ => None,
    };
    let mut report = Report::new(cfg.suite.as_str(), cfg.seed);
    report.param("n", n);
    report.param("mu", mu);
    report.param("samples", samples);
    report.param("step", step);
    report.param("via", via);
    report.check(Check::at_most("max_drift", worst(drifts), 1e-5));
    output(report, trace)
}

fn x_monodromy(cfg: &SuiteConfig) -> Result<SuiteOutput, CliError> {
    let n = cfg.n.unwrap_or(1);
    let mu = cfg.mu.unwrap_or(2.0);
    let samples = cfg.samples.unwrap_or(8);
    let step = cfg.step.unwrap_or(2.5e-3);
    let radius = cfg.t.first().copied().unwrap_or(20.0);
    let outer = 50.0;
    let mut rng = seeded_rng(cfg.seed);
    let dirs: Vec<DVector<f64>> = (0..samples)
        .map(|_| unit_vector(&mut rng, 2 * (n + 1)))
        .collect();
    let s_points = (0..samples)
        .map(|_| random_s_point(&mut rng, n, mu))
        .collect::<sflab_core::Result<Vec<_>>>()?;

    let at_infinity = vanishing_cycle_at_infinity(mu, n, &dirs)?;
    let mut l_mu = Vec::new();
    for (x, img) in dirs.iter().zip(&at_infinity) {
        l_mu.push(img.distance(&l_mu_point(mu, x)?));
    }
    let transported = dirs
        .par_iter()
        .map(|x| -> sflab_core::Result<f64> {
            Ok(transported_vanishing_image(mu, n, x, outer, step)?.distance(&l_mu_point(mu, x)?))
        })
        .collect::<sflab_core::Result<Vec<_>>>()?;

    let v_samples = dirs
        .iter()
        .map(|x| vanishing_cycle_level_point(mu, n, x))
        .collect::<sflab_core::Result<Vec<_>>>()?;
    let v_out = monodromy_x(mu, radius, &v_samples, step)?;
    let s_in: Vec<_> = s_points
        .iter()
        .map(|p| p.in_fiber(BasePoint::infinity()))
        .collect();
    let s_out = monodromy_x(mu, radius, &s_in, step)?;
    let mut phase = Vec::new();
    let mut antipodal = Vec::new();
    for (x, o) in dirs.iter().zip(&v_out) {
        phase.push(
            o.end
                .point()
                .distance(expected_vanishing_image(mu, n, x, radius)?.point()),
        );
        antipodal.push(
            o.end
                .point()
                .distance(antipodal_vanishing_image(mu, n, x)?.point()),
        );
    }
    let residual = worst(v_out.iter().chain(&s_out).map(|o| o.residual));
    let trace = match (&cfg.trace, v_samples.first()) {
        (Some(_), Some(p)) => {
            let path = ExtendedPath::real(f64::INFINITY, radius)?;
            transport_ambient(p.point().w(), n, p.point().kappa(), &path, step, true)?.trace
        }
        _ => None,
    };

    let mut report = Report::new(cfg.suite.as_str(), cfg.seed);
    report.param("n", n);
    report.param("mu", mu);
    report.param("samples", samples);
    report.param("step", step);
    report.param("radius", radius);
    report.param("outer_t", outer);
    report.param("derived_phase", expected_vanishing_phase(radius)?);
    report.param(
        "min_distance_to_antipodal_image",
        antipodal.iter().copied().fold(f64::INFINITY, f64::min),
    );
    report.param(
        "loops_in_chart",
        v_out
            .iter()
            .chain(&s_out)
            .filter(|o| o.loop_in_chart)
            .count(),
    );
    report.check(Check::at_most(
        "vanishing_cycle_is_l_mu",
        worst(l_mu),
        1e-10,
    ));
    report.check(Check::at_most(
        "transported_from_t50",
        worst(transported),
        5e-3,
    ));
    report.check(Check::at_most(
        "monodromy.derived_phase",
        worst(phase),
        1e-4,
    ));
    report.check(Check::at_most("monodromy.residual", residual, 1e-9));
    report.check(Check::at_most(
        "monodromy.s_points_fixed",
        worst(s_out.iter().map(|o| o.displacement)),
        1e-5,
    ));
    output(report, trace)
}
