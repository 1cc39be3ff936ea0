use std::f64::consts::PI;

use cdlaplace::kernel::{CoordMode, KernelSpec};
use cdlaplace::originals::{
    standard_original, validate_original, Growth, OriginalFn, OriginalParams, SupportSpec, ValidationPlan,
    STANDARD_NAMES,
};
use cdlaplace::transform::{forward, QuadSpec};
use cdlaplace::{CdNumber, Error};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn c2cd(z: Complex64) -> CdNumber {
    CdNumber::from_coords(vec![z.re, z.im]).unwrap()
}

fn params(n: usize) -> OriginalParams {
    OriginalParams::new(n)
}

#[test]
fn exp_decay_validates_with_its_strip() {
    let f = standard_original("exp_decay", &params(2)).unwrap();
    let rep = validate_original(&f, &ValidationPlan::default());
    assert!(rep.ok(), "{rep:?}");
    assert_eq!(rep.strip, (-1.0, f64::INFINITY));
    let mut p = params(1);
    p.b = 2.5;
    assert_eq!(standard_original("exp_decay", &p).unwrap().strip().0, -2.5);
}

#[test]
fn gaussian_accepts_any_strip() {
    let f = standard_original("gaussian", &params(2)).unwrap();
    let rep = validate_original(&f, &ValidationPlan::default());
    assert!(rep.ok());
    assert_eq!(rep.strip, (f64::NEG_INFINITY, f64::INFINITY));
    assert!(rep.holder_exponents.iter().all(|&a| a > 0.9));
}

#[test]
fn superexponential_growth_is_flagged() {
    let f = OriginalFn::new(1, 0, SupportSpec::positive(1), Growth::new(3.0, f64::INFINITY, 1.0), |t: &[f64]| {
        CdNumber::real(0, (t[0] * t[0]).exp())
    })
    .unwrap();
    let rep = validate_original(&f, &ValidationPlan::default());
    assert!(!rep.ok());
    assert!(!rep.growth_violations.is_empty());
    assert!(rep.superexponential);
}

#[test]
fn box_indicator_has_first_kind_jumps() {
    let f = standard_original("box_indicator", &params(1)).unwrap();
    let rep = validate_original(&f, &ValidationPlan { radius: 2.0, ..Default::default() });
    assert!(rep.ok());
    // probes stay inside the support, where the indicator is constant
    assert_eq!(rep.holder_exponents, vec![1.0]);
    assert_eq!(f.strip(), (f64::NEG_INFINITY, f64::INFINITY));
}

#[test]
fn degenerate_strip_is_rejected() {
    let r = OriginalFn::new(1, 0, SupportSpec::WholeSpace, Growth::new(1.0, 1.0, 1.0), |_| CdNumber::one(0));
    assert!(matches!(r, Err(Error::InvalidArgument(_))));
}

#[test]
fn unknown_name_is_an_error() {
    assert!(standard_original("heaviside", &params(1)).is_err());
    for name in STANDARD_NAMES {
        assert!(standard_original(name, &params(2)).is_ok(), "{name}");
    }
}

#[test]
fn support_validation() {
    assert!(SupportSpec::Box(vec![(1.0, 0.0)]).validate(1).is_err());
    assert!(SupportSpec::Quadrant(vec![1, 0]).validate(2).is_err());
    assert!(SupportSpec::Quadrant(vec![1]).validate(2).is_err());
    assert!(SupportSpec::Box(vec![(0.0, f64::INFINITY), (-1.0, 1.0)]).validate(2).is_ok());
}

#[test]
fn quadrants_partition_space() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let n = 3;
    let quadrants: Vec<SupportSpec> = (0..1 << n)
        .map(|m: usize| SupportSpec::Quadrant((0..n).map(|j| if m >> j & 1 == 1 { -1 } else { 1 }).collect()))
        .collect();
    for _ in 0..1000 {
        let t: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let hits = quadrants.iter().filter(|q| q.contains(&t)).count();
        assert_eq!(hits, 1, "{t:?}");
    }
    // overlaps only on coordinate hyperplanes
    let t = [0.0, 0.5, -0.5];
    assert_eq!(quadrants.iter().filter(|q| q.contains(&t)).count(), 2);
}

#[test]
fn restriction_keeps_values_inside_the_box() {
    let f = standard_original("exp_decay", &params(2)).unwrap();
    let g = f.restricted(SupportSpec::Box(vec![(0.0, 1.0), (0.0, 2.0)])).unwrap();
    assert_eq!(g.eval(&[0.5, 0.5]), f.eval(&[0.5, 0.5]));
    assert_eq!(g.eval(&[1.5, 0.5]), CdNumber::zero(1));
    assert!(validate_original(&g, &ValidationPlan::default()).ok());
}

#[test]
fn closed_form_derivatives_match_differences() {
    let mut p = params(2);
    p.center = vec![0.3, -0.2];
    p.width = 0.7;
    let h = 1e-5;
    for name in ["gaussian", "poly_exp", "sine_packet"] {
        let f = standard_original(name, &p).unwrap();
        let t = [0.6, 0.9];
        for j in 0..2 {
            let mut a = [0u32; 2];
            a[j] = 1;
            let (mut tp, mut tm) = (t, t);
            tp[j] += h;
            tm[j] -= h;
            let fd = (&f.eval(&tp) - &f.eval(&tm)).scale(0.5 / h);
            assert!((&f.deriv_at(&a, &t).unwrap() - &fd).norm() < 1e-8, "{name}, axis {j}");
        }
    }
}

#[test]
fn mollified_delta_has_unit_mass() {
    let mut p = params(1);
    p.center = vec![0.4];
    p.eps = 0.05;
    let f = standard_original("mollified_delta", &p).unwrap();
    let h = 1e-3;
    let mass: f64 = (-1000..=1000).map(|k| f.eval(&[0.4 + k as f64 * h])[0] * h).sum();
    assert!((mass - 1.0).abs() < 1e-10);
}

/// The five one-dimensional fixtures against complex Laplace oracles.
#[test]
fn one_dimensional_fixtures_match_complex_laplace() {
    let spec = KernelSpec::new(CoordMode::Cartesian, 1, 1).unwrap();
    let quad = QuadSpec::default();
    let one = Complex64::new(1.0, 0.0);
    let mut gp = params(1);
    gp.center = vec![0.4];
    gp.width = 0.8;
    let mut sp = params(1);
    sp.omega = 1.5;
    let mut pp = params(1);
    pp.degree = 2;
    type Oracle = Box<dyn Fn(Complex64) -> Complex64>;
    let cases: Vec<(OriginalFn, Oracle)> = vec![
        (standard_original("exp_decay", &params(1)).unwrap(), Box::new(move |s| one / (s + 1.0))),
        (standard_original("poly_exp", &pp).unwrap(), Box::new(move |s| 2.0 * one / (s + 1.0).powi(3))),
        (standard_original("box_indicator", &params(1)).unwrap(), Box::new(move |s| (one - (-s).exp()) / s)),
        (
            standard_original("sine_packet", &sp).unwrap(),
            Box::new(move |s| 1.5 * one / ((s + 1.0) * (s + 1.0) + 2.25)),
        ),
        (
            standard_original("gaussian", &gp).unwrap(),
            Box::new(move |s| 0.8 * (2.0 * PI).sqrt() * (-s * 0.4 + s * s * 0.32).exp()),
        ),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(19);
    for (f, oracle) in &cases {
        for _ in 0..20 {
            let s = Complex64::new(rng.gen_range(0.2..3.0), rng.gen_range(-4.0..4.0));
            let e = forward(f, &spec, &c2cd(s), &quad).unwrap();
            let err = (&e.value - &c2cd(oracle(s))).norm();
            assert!(err <= 1e-8, "{} at {s}: {err:e}", f.name());
        }
    }
}
