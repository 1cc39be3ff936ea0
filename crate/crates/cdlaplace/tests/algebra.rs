use std::f64::consts::PI;
use std::time::Instant;

use cdlaplace::opcalc::{algebra_suite, AlgebraSuiteSpec, Verdict};
use cdlaplace::{CdNumber, Error};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

// Reference doubling product on pairs (a, b)(c, d) = (ac - d* b, da + b c*),
// written independently of the library's slice kernel.
fn oracle_mul(x: &[f64], y: &[f64]) -> Vec<f64> {
    if x.len() == 1 {
        return vec![x[0] * y[0]];
    }
    let h = x.len() / 2;
    let (a, b) = x.split_at(h);
    let (c, d) = y.split_at(h);
    let conj = |v: &[f64]| -> Vec<f64> { v.iter().enumerate().map(|(k, z)| if k == 0 { *z } else { -z }).collect() };
    let sub = |u: Vec<f64>, v: Vec<f64>| -> Vec<f64> { u.iter().zip(&v).map(|(p, q)| p - q).collect() };
    let add = |u: Vec<f64>, v: Vec<f64>| -> Vec<f64> { u.iter().zip(&v).map(|(p, q)| p + q).collect() };
    let mut out = sub(oracle_mul(a, c), oracle_mul(&conj(d), b));
    out.extend(add(oracle_mul(d, a), oracle_mul(b, &conj(c))));
    out
}

fn random(rng: &mut ChaCha8Rng, r: u32) -> CdNumber {
    CdNumber::from_coords((0..1usize << r).map(|_| rng.gen_range(-1.0..1.0)).collect()).unwrap()
}

fn close(a: &CdNumber, b: &CdNumber, tol: f64) -> bool {
    (a - b).norm() <= tol
}

#[test]
fn product_matches_reference_doubling() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for r in 0..=5 {
        for _ in 0..50 {
            let (a, b) = (random(&mut rng, r), random(&mut rng, r));
            let want = oracle_mul(a.coords(), b.coords());
            let got = &a * &b;
            let err: f64 = got.coords().iter().zip(&want).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
            assert!(err < 1e-14, "r = {r}: {err}");
        }
    }
}

#[test]
fn unit_products() {
    let q = |j| CdNumber::unit(2, j);
    assert_eq!(&q(1) * &q(2), q(3));
    for r in 2..=4 {
        let dim = 1usize << r;
        for j in 1..dim {
            for k in 1..dim {
                if j == k {
                    continue;
                }
                let (ij, ik) = (CdNumber::unit(r, j), CdNumber::unit(r, k));
                assert_eq!(&ij * &ik, -(&ik * &ij), "r = {r}, ({j}, {k})");
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for r in 0..=5 {
        let z = random(&mut rng, r);
        assert_eq!(&CdNumber::one(r) * &z, z);
    }
}

#[test]
fn small_levels_are_real_and_complex() {
    let a = CdNumber::from_coords(vec![1.5, -0.5]).unwrap();
    let b = CdNumber::from_coords(vec![0.25, 2.0]).unwrap();
    let p = &a * &b;
    assert!((p[0] - (1.5 * 0.25 + 0.5 * 2.0)).abs() < 1e-15);
    assert!((p[1] - (1.5 * 2.0 - 0.5 * 0.25)).abs() < 1e-15);
    assert_eq!((&CdNumber::real(0, 3.0) * &CdNumber::real(0, -2.0))[0], -6.0);
}

#[test]
fn level_mismatch_is_an_error() {
    let a = CdNumber::unit(2, 1);
    let b = CdNumber::unit(3, 1);
    assert!(matches!(a.try_mul(&b), Err(Error::LevelMismatch(2, 3))));
    // the operator promotes by zero padding
    assert_eq!(&a * &b, &CdNumber::unit(3, 1) * &CdNumber::unit(3, 1));
}

#[test]
fn conjugation() {
    assert_eq!(CdNumber::unit(3, 5).conj(), -CdNumber::unit(3, 5));
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for r in 0..=4 {
        let z = random(&mut rng, r);
        assert_eq!(z.conj().conj(), z);
        let zz = &z * &z.conj();
        assert!(close(&zz, &CdNumber::real(r, z.norm_sqr()), 1e-14));
        assert!((zz.re() - z.norm_sqr()).abs() < 1e-14);
    }
}

// Truncated power series, used only as an oracle for the closed form.
fn exp_series(z: &CdNumber) -> CdNumber {
    let mut term = CdNumber::one(z.level());
    let mut sum = term.clone();
    for k in 1..80 {
        term = (&term * z).scale(1.0 / k as f64);
        sum += &term;
    }
    sum
}

#[test]
fn exponential() {
    assert_eq!(CdNumber::zero(3).exp(), CdNumber::one(3));
    let e = CdNumber::unit(2, 1).scale(PI).exp();
    assert!(close(&e, &CdNumber::real(2, -1.0), 1e-12));
    assert!(close(&exp_series(&CdNumber::unit(2, 1).scale(PI)), &CdNumber::real(2, -1.0), 1e-12));
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for r in 0..=4 {
        for _ in 0..20 {
            let z = random(&mut rng, r).scale(2.0);
            let e = z.exp();
            assert!((e.norm() - z.re().exp()).abs() < 1e-13 * e.norm());
            assert!(close(&e, &exp_series(&z), 1e-12 * e.norm().max(1.0)));
        }
    }
}

#[test]
fn inverse() {
    assert_eq!(CdNumber::unit(2, 2).inv().unwrap(), -CdNumber::unit(2, 2));
    assert_eq!(CdNumber::real(2, 2.0).inv().unwrap(), CdNumber::real(2, 0.5));
    assert!(matches!(CdNumber::zero(3).inv(), Err(Error::ZeroDivisor(_))));
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for _ in 0..100 {
        let z = random(&mut rng, 3);
        let one = &z * &z.inv().unwrap();
        assert!(close(&one, &CdNumber::one(3), 1e-12));
        assert!(z.inverse_residual().unwrap() < 1e-12);
    }
    // the inverse formula still gives a two-sided inverse of a single sedenion
    let z = random(&mut rng, 4);
    assert!(z.inverse_residual().unwrap() < 1e-12);
}

// Literal evaluation of the projection identities with the oracle product.
fn literal_projection(h: &CdNumber, j: usize) -> f64 {
    let r = h.level();
    let dim = 1usize << r;
    let mut bracket: Vec<f64> = h.coords().iter().map(|x| -x).collect();
    for k in 1..dim {
        let ik = CdNumber::unit(r, k);
        let t = oracle_mul(ik.coords(), &oracle_mul(h.coords(), ik.conj().coords()));
        for (b, x) in bracket.iter_mut().zip(t) {
            *b += x;
        }
    }
    let bracket: Vec<f64> = bracket.iter().map(|x| x / (dim as f64 - 2.0)).collect();
    if j == 0 {
        0.5 * (h[0] + bracket[0])
    } else {
        let ij = CdNumber::unit(r, j);
        let a = oracle_mul(ij.coords(), &bracket);
        let b = oracle_mul(h.coords(), ij.coords());
        0.5 * (a[0] - b[0])
    }
}

#[test]
fn component_projection() {
    let mut h = CdNumber::zero(2);
    h[0] = 3.0;
    h[1] = 4.0;
    assert!((h.component_project(1).unwrap() - 4.0).abs() < 1e-14);
    for j in 0..8 {
        for k in 0..8 {
            let v = CdNumber::unit(3, k).component_project(j).unwrap();
            let want = if j == k { 1.0 } else { 0.0 };
            assert!((v - want).abs() < 1e-14, "({j}, {k})");
            assert!((literal_projection(&CdNumber::unit(3, k), j) - want).abs() < 1e-14);
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for r in 2..=4 {
        for _ in 0..10 {
            let h = random(&mut rng, r);
            for j in 0..h.dim() {
                let v = h.component_project(j).unwrap();
                assert!((v - h[j]).abs() < 1e-13, "r = {r}, j = {j}");
                assert!((literal_projection(&h, j) - h[j]).abs() < 1e-13);
            }
        }
    }
    assert!(CdNumber::unit(1, 1).component_project(0).is_err());
    assert!(CdNumber::unit(2, 1).component_project(4).is_err());
}

#[test]
fn polar_form() {
    let p = CdNumber::one(2).polar();
    assert_eq!((p.magnitude, p.angle), (1.0, 0.0));
    assert_eq!(p.axis, CdNumber::unit(2, 1));
    let p = CdNumber::unit(2, 1).polar();
    assert!((p.magnitude - 1.0).abs() < 1e-15 && (p.angle - PI / 2.0).abs() < 1e-15);
    assert_eq!(p.axis, CdNumber::unit(2, 1));
    let p = CdNumber::real(3, -2.0).polar();
    assert!((p.magnitude - 2.0).abs() < 1e-15 && (p.angle - PI).abs() < 1e-15);
    assert!(close(&p.reconstruct(), &CdNumber::real(3, -2.0), 1e-14));
    let mut rng = ChaCha8Rng::seed_from_u64(34);
    for r in 0..=5 {
        for _ in 0..20 {
            let z = random(&mut rng, r);
            let p = z.polar();
            assert!((0.0..=PI).contains(&p.angle));
            assert!(close(&p.reconstruct(), &z, 1e-12 * z.norm()));
        }
    }
}

#[test]
fn sedenion_norm_is_not_multiplicative() {
    // (i1 + i10)(i5 + i14) = 0 in the standard sedenion basis
    let a = &CdNumber::unit(4, 1) + &CdNumber::unit(4, 10);
    let b = &CdNumber::unit(4, 5) + &CdNumber::unit(4, 14);
    let ab = &a * &b;
    let reference = oracle_mul(a.coords(), b.coords());
    assert!(ab.coords().iter().zip(&reference).all(|(x, y)| (x - y).abs() < 1e-15));
    assert!((ab.norm() - a.norm() * b.norm()).abs() > 0.5);
}

#[test]
fn algebra_suite_meets_tolerance() {
    let start = Instant::now();
    let reports = algebra_suite(&AlgebraSuiteSpec::default());
    let elapsed = start.elapsed().as_secs_f64();
    for r in &reports {
        println!("{:<34} {:<8} max {:.2e} ({} samples)", r.id, r.verdict.to_string(), r.max_residual, r.samples);
        if r.id.ends_with("sedenion") {
            assert_eq!(r.verdict, Verdict::Flagged, "{}", r.id);
        } else {
            assert_eq!(r.verdict, Verdict::Pass, "{}", r.id);
            assert!(r.max_residual <= 1e-12);
        }
    }
    assert!(elapsed < 5.0, "{elapsed} s");
}
