//! Named verification suites on fixed fixture plans.

use crate::algebra::CdNumber;
use crate::error::{Error, Result};
use crate::kernel::{CoordMode, KernelSpec};
use crate::originals::{standard_original, Growth, OriginalFn, OriginalParams, SupportSpec};
use crate::transform::{ClosedForm, ImageFn, QuadSpec};

use super::checks::*;
use super::{algebra_suite, AlgebraSuiteSpec, CheckReport, SamplePlan, TheoremCheck, Verdict};

/// Identifiers accepted by [`run_suite`] (plus `all`).
pub const SUITE_IDS: [&str; 18] = [
    "algebra",
    "holomorphy",
    "scaling",
    "derivative-cartesian",
    "derivative-spherical",
    "image-derivative",
    "shift",
    "exp-shift",
    "initial-value",
    "final-value",
    "second-derivative",
    "box-boundary",
    "box-iterated",
    "integration",
    "periodicity",
    "restricted",
    "delta-image",
    "kernel-iterated-exponent",
];

/// Shared controls for the suites.
#[derive(Clone, Debug)]
pub struct SuiteOptions {
    pub seed: u64,
    /// Sample points per fixture.
    pub samples: usize,
    pub quad: QuadSpec,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        SuiteOptions { seed: 1, samples: 6, quad: QuadSpec::default() }
    }
}

const MODES: [CoordMode; 2] = [CoordMode::Cartesian, CoordMode::Spherical];

fn spec(mode: CoordMode, n: usize) -> KernelSpec {
    KernelSpec::minimal(mode, n).expect("valid fixture dimension")
}

fn std_orig(name: &str, n: usize, edit: impl FnOnce(&mut OriginalParams)) -> OriginalFn {
    let mut p = OriginalParams::new(n);
    edit(&mut p);
    standard_original(name, &p).expect("valid fixture")
}

fn exp_decay(n: usize) -> OriginalFn {
    std_orig("exp_decay", n, |_| {})
}

fn gaussian(n: usize) -> OriginalFn {
    std_orig("gaussian", n, |p| {
        p.center = (0..n).map(|j| 0.2 - 0.3 * j as f64).collect();
        p.width = 0.8;
    })
}

impl SuiteOptions {
    fn plan(&self, spec: &KernelSpec, re: (f64, f64), salt: u64) -> SamplePlan {
        SamplePlan::random(spec, self.samples, re, 2.0, 1.0, self.seed.wrapping_mul(1000).wrapping_add(salt))
    }
}

fn run_all(checks: Vec<TheoremCheck>) -> Result<Vec<CheckReport>> {
    checks.iter().map(|c| c.run()).collect()
}

/// `g(t) = int_0^t f` for the integration fixtures.
fn antiderivative(name: &str, n: usize) -> Result<OriginalFn> {
    match name {
        "exp_decay" => Ok(OriginalFn::new(n, 1, SupportSpec::positive(n), Growth::new(0.0, f64::INFINITY, 1.0), |t: &[f64]| {
            CdNumber::real(1, t.iter().map(|x| 1.0 - (-x).exp()).product())
        })?
        .with_name("int exp_decay")),
        "box_indicator" => Ok(OriginalFn::new(n, 1, SupportSpec::positive(n), Growth::new(0.0, f64::INFINITY, 1.0), |t: &[f64]| {
            CdNumber::real(1, t.iter().map(|x| x.min(1.0)).product())
        })?
        .with_name("int box_indicator")
        .with_breakpoints(vec![vec![1.0]; n])),
        other => Err(Error::InvalidArgument(format!("no antiderivative fixture for '{other}'"))),
    }
}

/// Runs one named suite (or `all`).
pub fn run_suite(id: &str, opts: &SuiteOptions) -> Result<Vec<CheckReport>> {
    if id == "all" {
        let mut out = Vec::new();
        for s in SUITE_IDS {
            out.extend(run_suite(s, opts)?);
        }
        return Ok(out);
    }
    let q = &opts.quad;
    match id {
        "algebra" => Ok(algebra_suite(&AlgebraSuiteSpec { seed: opts.seed, ..AlgebraSuiteSpec::default() })),
        "kernel-iterated-exponent" => Ok(vec![iterated_exponent_report(opts.seed, 100)]),
        "holomorphy" => run_all(vec![
            check_holomorphy(&exp_decay(1), 1e-2, &spec(CoordMode::Cartesian, 1), q, opts.plan(&spec(CoordMode::Cartesian, 1), (0.3, 2.0), 1))?,
            check_holomorphy(&gaussian(2), 1e-2, &spec(CoordMode::Spherical, 2), q, opts.plan(&spec(CoordMode::Spherical, 2), (0.3, 2.0), 2))?,
        ]),
        "scaling" => {
            let mut v = Vec::new();
            for (i, mode) in MODES.into_iter().enumerate() {
                let s = spec(mode, 2);
                v.push(check_scaling(&exp_decay(2), 0.7, &s, q, opts.plan(&s, (0.3, 2.0), 10 + i as u64))?);
                v.push(check_scaling(&exp_decay(2), 1.6, &s, q, opts.plan(&s, (0.3, 2.0), 12 + i as u64))?);
                v.push(check_scaling(&gaussian(2), 1.3, &s, q, opts.plan(&s, (-1.0, 1.0), 14 + i as u64))?);
            }
            run_all(v)
        }
        "derivative-cartesian" => {
            let s1 = spec(CoordMode::Cartesian, 1);
            let s2 = spec(CoordMode::Cartesian, 2);
            let pe = std_orig("poly_exp", 2, |_| {});
            run_all(vec![
                check_derivative_cartesian(&exp_decay(1), 1, &s1, q, opts.plan(&s1, (0.3, 2.0), 20))?,
                check_derivative_cartesian(&exp_decay(2), 1, &s2, q, opts.plan(&s2, (0.3, 2.0), 21))?,
                check_derivative_cartesian(&exp_decay(2), 2, &s2, q, opts.plan(&s2, (0.3, 2.0), 22))?,
                check_derivative_cartesian(&pe, 1, &s2, q, opts.plan(&s2, (0.3, 2.0), 23))?,
            ])
        }
        "derivative-spherical" => {
            let s2 = spec(CoordMode::Spherical, 2);
            let s3 = spec(CoordMode::Spherical, 3);
            run_all(vec![
                check_derivative_spherical(&exp_decay(2), 1, 1, &s2, q, opts.plan(&s2, (0.3, 2.0), 30))?,
                check_derivative_spherical(&exp_decay(2), 2, 1, &s2, q, opts.plan(&s2, (0.3, 2.0), 31))?,
                check_derivative_spherical(&exp_decay(3), 3, 1, &s3, q, opts.plan(&s3, (0.3, 2.0), 32))?,
                check_s_derivative(&gaussian(2), 1, &s2, q, opts.plan(&s2, (-1.0, 1.0), 33))?,
                check_s_derivative(&gaussian(2), 2, &s2, q, opts.plan(&s2, (-1.0, 1.0), 34))?,
            ])
        }
        "second-derivative" => {
            let mut v = Vec::new();
            let sp = std_orig("sine_packet", 2, |p| p.omega = 1.5);
            for (i, mode) in MODES.into_iter().enumerate() {
                let s = spec(mode, 2);
                let k = i as u64 * 10;
                v.push(check_iterated_derivatives_box(&exp_decay(2), &[2, 0], &s, q, opts.plan(&s, (0.3, 2.0), 40 + k))?);
                v.push(check_iterated_derivatives_box(&exp_decay(2), &[0, 2], &s, q, opts.plan(&s, (0.3, 2.0), 41 + k))?);
                v.push(check_iterated_derivatives_box(&sp, &[2, 0], &s, q, opts.plan(&s, (0.3, 2.0), 42 + k))?);
            }
            let reports = run_all(v)?;
            Ok(reports.into_iter().map(|r| CheckReport { id: "second-derivative".into(), ..r }).collect())
        }
        "box-boundary" => {
            let mut v = Vec::new();
            let gb = gaussian(2).restricted(SupportSpec::Box(vec![(0.0, 1.0), (-0.5, 1.0)]))?;
            let bi = std_orig("box_indicator", 2, |_| {});
            for (i, mode) in MODES.into_iter().enumerate() {
                let s = spec(mode, 2);
                let k = i as u64 * 10;
                v.push(check_boundary_box(&gb, 1, &s, q, opts.plan(&s, (-1.0, 1.0), 60 + k))?);
                v.push(check_boundary_box(&gb, 2, &s, q, opts.plan(&s, (-1.0, 1.0), 61 + k))?);
                v.push(check_boundary_box(&bi, 1, &s, q, opts.plan(&s, (-1.0, 1.0), 62 + k))?);
            }
            run_all(v)
        }
        "box-iterated" => {
            let mut v = Vec::new();
            let half = exp_decay(2).restricted(SupportSpec::Box(vec![(0.0, 1.0), (0.0, f64::INFINITY)]))?;
            let gb = gaussian(2).restricted(SupportSpec::Box(vec![(0.0, 1.0), (-0.5, 1.0)]))?;
            for (i, mode) in MODES.into_iter().enumerate() {
                let s = spec(mode, 2);
                let k = i as u64 * 10;
                v.push(check_iterated_derivatives_box(&exp_decay(2), &[1, 1], &s, q, opts.plan(&s, (0.3, 2.0), 80 + k))?);
                v.push(check_iterated_derivatives_box(&half, &[2, 0], &s, q, opts.plan(&s, (0.3, 2.0), 81 + k))?);
                v.push(check_iterated_derivatives_box(&gb, &[1, 2], &s, q, opts.plan(&s, (-1.0, 1.0), 82 + k))?);
            }
            run_all(v)
        }
        "integration" => {
            let mut v = Vec::new();
            let s1 = spec(CoordMode::Cartesian, 1);
            v.push(check_integration(&exp_decay(1), &antiderivative("exp_decay", 1)?, &s1, q, opts.plan(&s1, (0.3, 2.0), 100))?);
            for (i, mode) in MODES.into_iter().enumerate() {
                let s = spec(mode, 2);
                let k = i as u64 * 10;
                let bi = std_orig("box_indicator", 2, |_| {});
                v.push(check_integration(&bi, &antiderivative("box_indicator", 2)?, &s, q, opts.plan(&s, (0.3, 2.0), 101 + k))?);
                v.push(check_integration(&exp_decay(2), &antiderivative("exp_decay", 2)?, &s, q, opts.plan(&s, (0.3, 2.0), 102 + k))?);
            }
            run_all(v)
        }
        "shift" => {
            let mut v = Vec::new();
            for (i, mode) in MODES.into_iter().enumerate() {
                let s = spec(mode, 2);
                let k = i as u64 * 10;
                v.push(check_shift(&gaussian(2), &[0.4, -0.3], &s, q, opts.plan(&s, (-1.0, 1.0), 120 + k))?);
                v.push(check_shift(&exp_decay(2), &[0.5, 0.2], &s, q, opts.plan(&s, (0.3, 2.0), 121 + k))?);
            }
            run_all(v)
        }
        "exp-shift" => {
            let mut v = Vec::new();
            let f = std_orig("exp_decay", 2, |p| p.b = 1.5);
            for (i, mode) in MODES.into_iter().enumerate() {
                let s = spec(mode, 2);
                v.push(check_exp_shift(&f, 0.5, &s, q, opts.plan(&s, (-0.4, 2.0), 140 + i as u64))?);
                v.push(check_exp_shift(&gaussian(2), -0.7, &s, q, opts.plan(&s, (-1.0, 1.0), 142 + i as u64))?);
            }
            run_all(v)
        }
        "image-derivative" => {
            let mut v = Vec::new();
            for (i, mode) in MODES.into_iter().enumerate() {
                let s = spec(mode, 2);
                v.push(check_image_derivative(&exp_decay(2), &[0.3, 0.5, -0.4], 1e-2, &s, q, opts.plan(&s, (0.3, 2.0), 160 + i as u64))?);
                v.push(check_image_derivative(&gaussian(2), &[0.0, 1.0, 0.0], 1e-2, &s, q, opts.plan(&s, (-1.0, 1.0), 162 + i as u64))?);
            }
            run_all(v)
        }
        "periodicity" => {
            let s = spec(CoordMode::Spherical, 2);
            let mut v = check_periodicity(&exp_decay(2), &s, q, opts.plan(&s, (0.3, 2.0), 180))?;
            v.extend(check_periodicity(&gaussian(2), &s, q, opts.plan(&s, (-1.0, 1.0), 181))?);
            run_all(v)
        }
        "initial-value" => {
            let ladder = [10.0, 20.0, 40.0, 80.0];
            let mut out = vec![check_limit_values(&exp_decay(1), LimitMode::Initial, &spec(CoordMode::Cartesian, 1), q, &ladder, 5e-2, None)?];
            for mode in MODES {
                out.push(check_limit_values(&exp_decay(2), LimitMode::Initial, &spec(mode, 2), q, &ladder, 5e-2, None)?);
            }
            Ok(out)
        }
        "final-value" => {
            let f = OriginalFn::new(1, 1, SupportSpec::positive(1), Growth::new(0.0, f64::INFINITY, 1.0), |t: &[f64]| {
                CdNumber::real(1, 1.0 - (-t[0]).exp())
            })?
            .with_name("1 - e^-t");
            let ladder = [0.1, 0.05, 0.025, 0.0125];
            Ok(vec![check_limit_values(&f, LimitMode::Final, &spec(CoordMode::Cartesian, 1), q, &ladder, 1e-3, Some(CdNumber::one(1)))?])
        }
        "restricted" => {
            let mut v = Vec::new();
            for (i, mode) in MODES.into_iter().enumerate() {
                for (k, active) in [vec![1], vec![2]].into_iter().enumerate() {
                    let s = spec(mode, 2).with_active(active.clone())?;
                    let salt = 200 + 10 * i as u64 + k as u64;
                    let j = active[0];
                    let c = check_iterated_derivatives_box(&exp_decay(2), &(1..=2).map(|k| u32::from(k == j)).collect::<Vec<_>>(), &s, q, opts.plan(&s, (0.3, 2.0), salt))?;
                    v.push(TheoremCheck { id: "restricted".into(), ..c });
                    let c = check_scaling(&exp_decay(2), 1.4, &s, q, opts.plan(&s, (0.3, 2.0), salt + 5))?;
                    v.push(TheoremCheck { id: "restricted".into(), ..c });
                }
            }
            run_all(v)
        }
        "delta-image" => {
            let mut out = Vec::new();
            for mode in MODES {
                out.push(delta_convergence(&spec(mode, 2), &[0.3, 0.5], &[1e-1, 5e-2, 2.5e-2], q, &opts.plan(&spec(mode, 2), (-1.0, 1.0), 300))?);
            }
            Ok(out)
        }
        other => Err(Error::InvalidArgument(format!("unknown check id '{other}'"))),
    }
}

/// Mollified delta images against `exp(-u(p, tau; zeta))` over a sequence of
/// widths; the residual reported is the smallest fitted convergence order
/// between consecutive widths and the verdict requires order >= 2 up to 0.05.
pub fn delta_convergence(spec: &KernelSpec, tau: &[f64], eps: &[f64], quad: &QuadSpec, plan: &SamplePlan) -> Result<CheckReport> {
    let n = spec.n();
    let mut errs = Vec::new();
    let mut qerr: f64 = 0.0;
    for &e in eps {
        let f = std_orig("mollified_delta", n, |p| {
            p.center = tau.to_vec();
            p.eps = e;
        });
        let mut worst: f64 = 0.0;
        for (p, z) in &plan.samples {
            let s = spec.with_zeta(z)?;
            let img = ImageFn::quadrature(&f, &s, quad)?.eval(p)?;
            let exact = ImageFn::closed(&s, ClosedForm::Delta { tau: tau.to_vec(), weight: CdNumber::one(0) }, (f64::NEG_INFINITY, f64::INFINITY), true)
                .eval(p)?;
            worst = worst.max((&img.value - &exact.value).norm());
            qerr = qerr.max(img.error);
        }
        errs.push(worst);
    }
    let orders: Vec<f64> = errs.windows(2).zip(eps.windows(2)).map(|(e, h)| (e[0] / e[1]).ln() / (h[0] / h[1]).ln()).collect();
    let order = orders.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok(CheckReport {
        id: "delta-image".into(),
        description: format!("mollified delta at {tau:?}, {} kernel, errors {errs:?}", spec.mode()),
        samples: plan.len() * eps.len(),
        max_residual: order,
        mean_residual: orders.iter().sum::<f64>() / orders.len().max(1) as f64,
        quad_error: qerr,
        tolerance: 2.0,
        verdict: if order >= 1.95 { Verdict::Pass } else { Verdict::Fail },
        note: Some(format!("empirical orders {orders:.3?}")),
    })
}

/// Spherical `exp(-u)` for `n = 3`, `r = 3` against the iterated exponent
/// `exp(i_1 rho exp(-i_3 phi_2 exp(-i_1 phi_3)))` with the real factor.
fn iterated_exponent_report(seed: u64, count: usize) -> CheckReport {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let spec = KernelSpec::new(CoordMode::Spherical, 3, 3).expect("valid");
    let i1 = CdNumber::unit(3, 1);
    let i3 = CdNumber::unit(3, 3);
    let mut worst: f64 = 0.0;
    for _ in 0..count {
        let mut p = CdNumber::zero(3);
        let mut z = CdNumber::zero(3);
        for j in 0..=3 {
            p[j] = rng.gen_range(-2.0..2.0);
            z[j] = rng.gen_range(-1.0..1.0);
        }
        let t: Vec<f64> = (0..3).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let s = crate::kernel::partial_sums(&t);
        let sp = spec.with_zeta(&z).expect("level matches");
        let k = sp.exp_neg_u(&p, &t).expect("valid");
        let rho = -(p[1] * s[0] + z[1]);
        let inner = (&i1 * -(p[3] * s[2] + z[3])).exp();
        let mid = (&(&i3 * &inner) * -(p[2] * s[1] + z[2])).exp();
        let it = (&(&i1 * &mid) * rho).exp() * (-p[0] * s[0] - z[0]).exp();
        worst = worst.max((&k - &it).max_abs());
    }
    CheckReport {
        id: "kernel-iterated-exponent".into(),
        description: "spherical exp(-u) against the iterated exponent, n = 3, r = 3".into(),
        samples: count,
        max_residual: worst,
        mean_residual: worst,
        quad_error: 0.0,
        tolerance: 1e-12,
        verdict: if worst <= 1e-12 { Verdict::Pass } else { Verdict::Fail },
        note: None,
    }
}
