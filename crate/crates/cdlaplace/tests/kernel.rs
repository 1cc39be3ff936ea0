use cdlaplace::kernel::{partial_sums, CoordMode, KernelOp, KernelSpec, SPoly};
use cdlaplace::CdNumber;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_p(rng: &mut ChaCha8Rng, r: u32, n: usize) -> CdNumber {
    let mut p = CdNumber::zero(r);
    p[0] = rng.gen_range(-0.5..1.5);
    for j in 1..=n {
        p[j] = rng.gen_range(-2.0..2.0);
    }
    p
}

fn random_zeta(rng: &mut ChaCha8Rng, r: u32, n: usize) -> CdNumber {
    let mut z = CdNumber::zero(r);
    for j in 0..=n {
        z[j] = rng.gen_range(-1.0..1.0);
    }
    z
}

#[test]
fn partial_sum_examples() {
    assert_eq!(partial_sums(&[1.0, 2.0, 3.0]), vec![6.0, 5.0, 3.0]);
    assert_eq!(partial_sums(&[0.0; 4]), vec![0.0; 4]);
    assert_eq!(partial_sums(&[0.0, 0.0, 1.0]), vec![1.0, 1.0, 1.0]);
}

#[test]
fn cartesian_kernel_examples() {
    let spec = KernelSpec::new(CoordMode::Cartesian, 3, 2).unwrap();
    let t = [0.3, -0.2, 1.1];
    let u = spec.u(&CdNumber::real(2, 1.7), &t).unwrap();
    assert!((u[0] - 1.7 * 1.2).abs() < 1e-15 && u.im().norm() == 0.0);

    let spec1 = KernelSpec::new(CoordMode::Cartesian, 1, 1).unwrap();
    let zeta = CdNumber::from_coords(vec![0.2, -0.4]).unwrap();
    let s1 = spec1.with_zeta(&zeta).unwrap();
    let p = CdNumber::from_coords(vec![0.5, 2.0]).unwrap();
    let u = s1.u(&p, &[0.7]).unwrap();
    assert!((u[0] - (0.35 + 0.2)).abs() < 1e-15);
    assert!((u[1] - (1.4 - 0.4)).abs() < 1e-15);

    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..20 {
        let p = random_p(&mut rng, 2, 3);
        let z = random_zeta(&mut rng, 2, 3);
        let s = spec.with_zeta(&z).unwrap();
        let t: Vec<f64> = (0..3).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let u = s.u(&p, &t).unwrap();
        assert!((u.re() - (p.re() * t.iter().sum::<f64>() + z.re())).abs() < 1e-14);
    }
}

#[test]
fn spherical_kernel_examples() {
    let spec = KernelSpec::new(CoordMode::Spherical, 1, 1).unwrap();
    let zeta = CdNumber::from_coords(vec![0.1, 0.3]).unwrap();
    let s = spec.with_zeta(&zeta).unwrap();
    let p = CdNumber::from_coords(vec![0.5, -1.0]).unwrap();
    let u = s.u(&p, &[0.4]).unwrap();
    assert!((u[0] - (0.2 + 0.1)).abs() < 1e-15 && (u[1] - (-0.4 + 0.3)).abs() < 1e-15);

    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let spec = KernelSpec::new(CoordMode::Spherical, 5, 3).unwrap();
    for _ in 0..50 {
        let p = random_p(&mut rng, 3, 5);
        let z = random_zeta(&mut rng, 3, 5);
        let s = spec.with_zeta(&z).unwrap();
        let t: Vec<f64> = (0..5).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let u = s.u(&p, &t).unwrap();
        let rho = p[1] * t.iter().sum::<f64>() + z[1];
        assert!((u.im().norm() - rho.abs()).abs() < 1e-12);
    }

    let mut p = CdNumber::real(3, 0.7);
    p[2] = 1.3;
    let u = spec.u(&p, &[0.1, 0.2, 0.3, 0.4, 0.5]).unwrap();
    assert!((u[0] - 1.05).abs() < 1e-15 && u.im().norm() == 0.0);
}

#[test]
fn exp_neg_u_matches_algebra_exponential() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for mode in [CoordMode::Cartesian, CoordMode::Spherical] {
        for (n, r) in [(1, 1), (2, 2), (3, 2), (3, 3), (5, 3)] {
            let spec = KernelSpec::new(mode, n, r).unwrap();
            for _ in 0..20 {
                let p = random_p(&mut rng, r, n);
                let s = spec.with_zeta(&random_zeta(&mut rng, r, n)).unwrap();
                let t: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let k = s.exp_neg_u(&p, &t).unwrap();
                let oracle = (-s.u(&p, &t).unwrap()).exp();
                assert!((&k - &oracle).norm() < 1e-13 * oracle.norm().max(1.0));
                let expect = (-p.re() * t.iter().sum::<f64>() - s.zeta().re()).exp();
                assert!((k.norm() - expect).abs() < 1e-12 * expect);
            }
        }
    }
    let spec = KernelSpec::new(CoordMode::Spherical, 2, 2).unwrap();
    let k = spec.exp_neg_u(&CdNumber::zero(2), &[0.3, 0.4]).unwrap();
    assert_eq!(k, CdNumber::one(2));
}

/// `exp(i_1 a exp(-i_3 b exp(-i_1 c)))`, left products as written.
fn iterated(r: u32, rho: f64, phi2: f64, phi3: f64) -> CdNumber {
    let i1 = CdNumber::unit(r, 1);
    let i3 = CdNumber::unit(r, 3);
    let inner = (&i1 * -phi3).exp();
    let mid = (&i3 * &inner * -phi2).exp();
    (&i1 * &mid * rho).exp()
}

#[test]
fn spherical_kernel_is_the_iterated_exponent() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for r in [2, 3] {
        let spec = KernelSpec::new(CoordMode::Spherical, 3, r).unwrap();
        for _ in 0..100 {
            let p = random_p(&mut rng, r, 3);
            let z = random_zeta(&mut rng, r, 3);
            let s = spec.with_zeta(&z).unwrap();
            let t: Vec<f64> = (0..3).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let sv = partial_sums(&t);
            let k = s.exp_neg_u(&p, &t).unwrap();
            let rho = p[1] * sv[0] + z[1];
            let it = iterated(r, -rho, p[2] * sv[1] + z[2], p[3] * sv[2] + z[3])
                * (-p[0] * sv[0] - z[0]).exp();
            assert!((&k - &it).max_abs() < 1e-12, "r={r}");
        }
    }
}

fn fd_zeta(spec: &KernelSpec, p: &CdNumber, t: &[f64], alpha: &[u32], h: f64) -> CdNumber {
    let Some(j) = alpha.iter().position(|&e| e > 0) else {
        return spec.exp_neg_u(p, t).unwrap();
    };
    let mut rest = alpha.to_vec();
    rest[j] -= 1;
    let mut dz = CdNumber::zero(spec.r());
    dz[j + 1] = h;
    let a = fd_zeta(&spec.zeta_added(&dz), p, t, &rest, h);
    dz[j + 1] = -h;
    let b = fd_zeta(&spec.zeta_added(&dz), p, t, &rest, h);
    // S = -d/dzeta
    (&b - &a) * (0.5 / h)
}

#[test]
fn s_operators_are_minus_zeta_derivatives() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let alphas: [&[u32]; 5] = [&[1, 0], &[0, 1], &[1, 1], &[2, 0], &[0, 2]];
    for mode in [CoordMode::Cartesian, CoordMode::Spherical] {
        let spec = KernelSpec::new(mode, 2, 2).unwrap();
        for _ in 0..10 {
            let p = random_p(&mut rng, 2, 2);
            let s = spec.with_zeta(&random_zeta(&mut rng, 2, 2)).unwrap();
            let t = [rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0)];
            for alpha in alphas {
                let op = KernelOp::new(&s, SPoly::monomial(2, alpha.to_vec(), 1.0));
                let exact = op.eval(&p, &t).unwrap();
                let fd = fd_zeta(&s, &p, &t, alpha, 1e-4);
                assert!((&exact - &fd).max_abs() < 1e-6, "{mode} {alpha:?}");
            }
        }
    }
}

#[test]
fn spherical_s_annihilates_independent_components() {
    let spec = KernelSpec::new(CoordMode::Spherical, 3, 2).unwrap();
    let p = CdNumber::from_coords(vec![0.3, 1.0, -0.5, 0.8]).unwrap();
    let t = [0.2, 0.5, 0.1];
    let k3 = KernelOp::new(&spec, SPoly::s_power(3, 3, 1)).eval(&p, &t).unwrap();
    assert_eq!(k3[0], 0.0);
    assert_eq!(k3[1], 0.0);
    let k2 = KernelOp::new(&spec, SPoly::s_power(3, 2, 1)).eval(&p, &t).unwrap();
    assert_eq!(k2[0], 0.0);
    assert!(k2[1] != 0.0);
}

#[test]
fn r_operator_forms() {
    let cart = KernelSpec::new(CoordMode::Cartesian, 3, 2).unwrap();
    let sph = KernelSpec::new(CoordMode::Spherical, 3, 2).unwrap();
    let p = [1.5, 0.0, 0.0, 0.0];
    assert_eq!(SPoly::r_operator(&cart, 2, &p), SPoly::scalar(3, 1.5));
    let p = [0.4, 1.0, -2.0, 3.0];
    assert_eq!(SPoly::r_operator(&cart, 1, &p), SPoly::r_operator(&sph, 1, &p));
    let r3 = SPoly::r_operator(&sph, 3, &p);
    assert_eq!(r3.coeff(&[0, 1, 0]), -2.0);
    assert_eq!(r3.coeff(&[0, 0, 1]), 3.0);
    assert_eq!(SPoly::r_operator(&cart, 3, &p).coeff(&[1, 0, 0]), 0.0);
}

#[test]
fn phase_shifts_compose_and_are_periodic() {
    let spec = KernelSpec::new(CoordMode::Spherical, 2, 2).unwrap();
    let z = CdNumber::from_coords(vec![0.1, 0.2, 0.3, 0.0]).unwrap();
    let s = spec.with_zeta(&z).unwrap();
    let a = s.shifted(&[1.0, 2.0]).shifted(&[3.0, -1.0]);
    let b = s.shifted(&[4.0, 1.0]);
    assert!((a.zeta() - b.zeta()).norm() < 1e-15);
    let p = CdNumber::from_coords(vec![0.3, 1.0, -0.5, 0.0]).unwrap();
    let t = [0.4, 0.7];
    let k = s.exp_neg_u(&p, &t).unwrap();
    let k4 = s.shifted(&[0.0, 4.0]).exp_neg_u(&p, &t).unwrap();
    let k2 = s.shifted(&[2.0, 0.0]).exp_neg_u(&p, &t).unwrap();
    assert!((&k - &k4).max_abs() < 1e-14);
    assert!((&k + &k2).max_abs() < 1e-14);
}

#[test]
fn restricted_kernel_zeroes_inactive_axes() {
    let spec = KernelSpec::new(CoordMode::Cartesian, 3, 2).unwrap().with_active(vec![1, 3]).unwrap();
    let p = CdNumber::from_coords(vec![0.5, 1.0, 2.0, 3.0]).unwrap();
    let u = spec.u(&p, &[0.1, 0.2, 0.3]).unwrap();
    assert_eq!(u[2], 0.0);
    assert!((u[0] - 0.5 * 0.4).abs() < 1e-15);
    assert!(KernelSpec::new(CoordMode::Cartesian, 3, 2).unwrap().with_active(vec![2, 1]).is_err());
}
