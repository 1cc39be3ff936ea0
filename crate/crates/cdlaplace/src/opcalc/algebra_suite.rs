//! Sampled algebraic properties of the Cayley-Dickson algebras.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::algebra::CdNumber;

use super::{CheckReport, Verdict};

/// Sample counts and tolerance for [`algebra_suite`].
#[derive(Clone, Debug, PartialEq)]
pub struct AlgebraSuiteSpec {
    pub samples: usize,
    pub tol: f64,
    pub seed: u64,
}

impl Default for AlgebraSuiteSpec {
    fn default() -> Self {
        AlgebraSuiteSpec { samples: 1000, tol: 1e-12, seed: 7 }
    }
}

fn random(rng: &mut ChaCha8Rng, r: u32) -> CdNumber {
    let coords = (0..1usize << r).map(|_| rng.gen_range(-1.0..1.0)).collect();
    CdNumber::from_coords(coords).expect("power-of-two length")
}

struct Probe {
    id: &'static str,
    description: String,
    /// Relative residual of one random sample at level `r`.
    residual: Box<dyn Fn(&mut ChaCha8Rng, u32) -> f64>,
    levels: Vec<u32>,
    /// Levels where the identity is known to fail; reported, not asserted.
    expected_failure: bool,
}

fn run_probe(probe: &Probe, spec: &AlgebraSuiteSpec, rng: &mut ChaCha8Rng) -> CheckReport {
    let mut max: f64 = 0.0;
    let mut sum = 0.0;
    let mut count = 0;
    for &r in &probe.levels {
        for _ in 0..spec.samples {
            let x = (probe.residual)(rng, r);
            max = max.max(x);
            sum += x;
            count += 1;
        }
    }
    let verdict = match (max <= spec.tol, probe.expected_failure) {
        (true, _) => Verdict::Pass,
        (false, true) => Verdict::Flagged,
        (false, false) => Verdict::Fail,
    };
    let note = (probe.expected_failure && verdict == Verdict::Flagged)
        .then(|| "identity does not hold at this level (algebra is not alternative)".to_string());
    CheckReport {
        id: probe.id.into(),
        description: probe.description.clone(),
        samples: count,
        max_residual: max,
        mean_residual: sum / count.max(1) as f64,
        quad_error: 0.0,
        tolerance: spec.tol,
        verdict,
        note,
    }
}

/// Conjugation, norm multiplicativity and alternativity (`r <= 3`), power
/// associativity (`r <= 5`), centrality of the reals, and the two
/// polarization identities `(ay)z* + (az)y* = 2a Re(yz*)` and its four-term
/// consequence for `v <= 3`. The sedenion cases of norm multiplicativity and
/// of both identities are sampled as well and reported as flagged.
pub fn algebra_suite(spec: &AlgebraSuiteSpec) -> Vec<CheckReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let two_re = |y: &CdNumber, z: &CdNumber| 2.0 * (y * &z.conj()).re();
    let eq2 = move |rng: &mut ChaCha8Rng, r: u32| {
        let (a, y, z) = (random(rng, r), random(rng, r), random(rng, r));
        let lhs = &(&(&a * &y) * &z.conj()) + &(&(&a * &z) * &y.conj());
        (&lhs - &a.scale(two_re(&y, &z))).norm() / (a.norm() * y.norm() * z.norm())
    };
    let eq4 = move |rng: &mut ChaCha8Rng, r: u32| {
        let (a, b, y, z) = (random(rng, r), random(rng, r), random(rng, r), random(rng, r));
        let half = |a: &CdNumber, b: &CdNumber| {
            let x = &(&(a * &y) * &z.conj()) * &b.conj();
            let w = &(&(a * &z) * &y.conj()) * &b.conj();
            &x + &w
        };
        let lhs = &half(&a, &b) + &half(&b, &a);
        let rhs = CdNumber::real(r, 4.0 * (&a * &b.conj()).re() * (&y * &z.conj()).re());
        (&lhs - &rhs).norm() / (a.norm() * b.norm() * y.norm() * z.norm())
    };
    let norm_mult = |rng: &mut ChaCha8Rng, r: u32| {
        let (a, b) = (random(rng, r), random(rng, r));
        ((&a * &b).norm() - a.norm() * b.norm()).abs() / (a.norm() * b.norm())
    };
    let probes = vec![
        Probe {
            id: "conjugation",
            description: "conj(conj z) = z, z z* = |z|^2, r = 0..5".into(),
            residual: Box::new(|rng, r| {
                let z = random(rng, r);
                let back = (&z.conj().conj() - &z).norm();
                let zz = &z * &z.conj();
                let n2 = (&zz - &CdNumber::real(r, z.norm_sqr())).norm();
                (back / z.norm()).max(n2 / z.norm_sqr())
            }),
            levels: (0..=5).collect(),
            expected_failure: false,
        },
        Probe {
            id: "norm-multiplicative",
            description: "|ab| = |a||b|, r = 0..3".into(),
            residual: Box::new(norm_mult),
            levels: (0..=3).collect(),
            expected_failure: false,
        },
        Probe {
            id: "norm-multiplicative-sedenion",
            description: "|ab| = |a||b|, r = 4".into(),
            residual: Box::new(norm_mult),
            levels: vec![4],
            expected_failure: true,
        },
        Probe {
            id: "alternativity",
            description: "(aa)b = a(ab) and (ba)a = b(aa), r = 0..3".into(),
            residual: Box::new(|rng, r| {
                let (a, b) = (random(rng, r), random(rng, r));
                let aa = &a * &a;
                let left = (&(&aa * &b) - &(&a * &(&a * &b))).norm();
                let right = (&(&(&b * &a) * &a) - &(&b * &aa)).norm();
                left.max(right) / (a.norm_sqr() * b.norm())
            }),
            levels: (0..=3).collect(),
            expected_failure: false,
        },
        Probe {
            id: "power-associativity",
            description: "z^2 z^3 = ((z^2)^2) z, r = 0..5".into(),
            residual: Box::new(|rng, r| {
                let z = random(rng, r);
                let z2 = &z * &z;
                let z3 = &z2 * &z;
                let a = &z2 * &z3;
                let b = &(&z2 * &z2) * &z;
                (&a - &b).norm() / z.norm().powi(5)
            }),
            levels: (0..=5).collect(),
            expected_failure: false,
        },
        Probe {
            id: "real-centrality",
            description: "(la)b = l(ab) = a(lb), r = 0..5".into(),
            residual: Box::new(|rng, r| {
                let (a, b) = (random(rng, r), random(rng, r));
                let l: f64 = rng.gen_range(-3.0..3.0);
                let ab = (&a * &b).scale(l);
                let x = (&(&a.scale(l) * &b) - &ab).norm();
                let y = (&(&a * &b.scale(l)) - &ab).norm();
                x.max(y) / (a.norm() * b.norm() * l.abs().max(1.0))
            }),
            levels: (0..=5).collect(),
            expected_failure: false,
        },
        Probe {
            id: "polarization",
            description: "(ay)z* + (az)y* = 2a Re(yz*), v = 0..3".into(),
            residual: Box::new(eq2),
            levels: (0..=3).collect(),
            expected_failure: false,
        },
        Probe {
            id: "polarization-four-term",
            description: "four-term polarization identity = 4 Re(ab*) Re(yz*), v = 0..3".into(),
            residual: Box::new(eq4),
            levels: (0..=3).collect(),
            expected_failure: false,
        },
        Probe {
            id: "polarization-sedenion",
            description: "(ay)z* + (az)y* = 2a Re(yz*), v = 4".into(),
            residual: Box::new(eq2),
            levels: vec![4],
            expected_failure: true,
        },
        Probe {
            id: "polarization-four-term-sedenion",
            description: "four-term polarization identity, v = 4".into(),
            residual: Box::new(eq4),
            levels: vec![4],
            expected_failure: true,
        },
    ];
    probes.iter().map(|p| run_probe(p, spec, &mut rng)).collect()
}
