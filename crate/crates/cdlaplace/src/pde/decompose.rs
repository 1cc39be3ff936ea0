//! Order-halving decomposition `A ~ Upsilon Upsilon^1` of elliptic operators
//! whose principal part is a sum of even powers, with factor coefficients in
//! a larger Cayley-Dickson algebra.

use std::collections::{BTreeMap, BTreeSet};

use rand::Rng;

use super::OperatorSpec;
use crate::algebra::{CdNumber, MAX_LEVEL};
use crate::error::{Error, Result};

/// Polynomial in `n` real variables with algebra-valued coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct CdPoly {
    n: usize,
    level: u32,
    terms: BTreeMap<Vec<u32>, CdNumber>,
}

impl CdPoly {
    pub fn zero(n: usize, level: u32) -> Self {
        CdPoly { n, level, terms: BTreeMap::new() }
    }

    /// Every monomial of total degree `<= degree` with coordinates uniform in `[-1, 1]`.
    pub fn random<R: Rng>(n: usize, level: u32, degree: u32, rng: &mut R) -> Self {
        let mut out = Self::zero(n, level);
        let mut idx = vec![0u32; n];
        loop {
            if idx.iter().sum::<u32>() <= degree {
                let c: Vec<f64> = (0..1usize << level).map(|_| rng.gen_range(-1.0..1.0)).collect();
                out.terms.insert(idx.clone(), CdNumber::from_slice(level, &c).expect("power-of-two length"));
            }
            let mut k = 0;
            while k < n {
                idx[k] += 1;
                if idx[k] <= degree {
                    break;
                }
                idx[k] = 0;
                k += 1;
            }
            if k == n {
                return out;
            }
        }
    }

    pub fn from_terms(n: usize, terms: Vec<(Vec<u32>, CdNumber)>) -> Result<Self> {
        let level = terms.iter().map(|(_, c)| c.level()).max().unwrap_or(0);
        let mut out = Self::zero(n, level);
        for (j, c) in terms {
            if j.len() != n {
                return Err(Error::Dimension { expected: n, got: j.len() });
            }
            out.add_term(j, &c.promote(level)?);
        }
        Ok(out)
    }

    fn add_term(&mut self, j: Vec<u32>, c: &CdNumber) {
        let entry = self.terms.entry(j).or_insert_with(|| CdNumber::zero(c.level()));
        let (a, b) = CdNumber::promote_pair(entry, c);
        *entry = &a + &b;
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u32>, &CdNumber)> {
        self.terms.iter()
    }

    pub fn degree(&self) -> u32 {
        self.terms.keys().map(|j| j.iter().sum()).max().unwrap_or(0)
    }

    /// `d^j` of the polynomial.
    pub fn derivative(&self, j: &[u32]) -> Self {
        let mut out = Self::zero(self.n, self.level);
        'terms: for (m, c) in &self.terms {
            let mut factor = 1.0;
            let mut e = m.clone();
            for k in 0..self.n {
                if m[k] < j[k] {
                    continue 'terms;
                }
                for q in 0..j[k] {
                    factor *= (m[k] - q) as f64;
                }
                e[k] = m[k] - j[k];
            }
            out.add_term(e, &c.scale(factor));
        }
        out
    }

    /// `c f` coefficientwise.
    pub fn left_mul(&self, c: &CdNumber) -> Self {
        self.map(|x| c * x, c.level())
    }

    /// `f c` coefficientwise.
    pub fn right_mul(&self, c: &CdNumber) -> Self {
        self.map(|x| x * c, c.level())
    }

    fn map(&self, f: impl Fn(&CdNumber) -> CdNumber, level: u32) -> Self {
        let level = level.max(self.level);
        let terms = self.terms.iter().map(|(j, x)| (j.clone(), f(x))).collect();
        CdPoly { n: self.n, level, terms }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        out.level = out.level.max(other.level);
        for (j, c) in &other.terms {
            out.add_term(j.clone(), c);
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.map(|x| -x, other.level))
    }

    pub fn eval(&self, x: &[f64]) -> CdNumber {
        let mut acc = CdNumber::zero(self.level);
        for (j, c) in &self.terms {
            let m: f64 = j.iter().zip(x).map(|(&e, &xi)| xi.powi(e as i32)).product();
            acc += &c.scale(m);
        }
        acc
    }
}

/// `coeff d^index` in one factor, acting by right multiplication.
#[derive(Clone, Debug, PartialEq)]
pub struct FactorTerm {
    pub index: Vec<u32>,
    pub coeff: CdNumber,
}

/// `Upsilon f = sum (d^alpha f) eta_alpha` and
/// `Upsilon^1 f = sum (d^beta f) eta^1_beta` with `Upsilon Upsilon^1`
/// reproducing the principal part of the operator on real-valued functions.
#[derive(Clone, Debug)]
pub struct Decomposition {
    pub n: usize,
    /// Level of the coefficients of `A`.
    pub r: u32,
    /// Level of the factor coefficients.
    pub v: u32,
    /// Smallest level that still has a unit for every principal term.
    pub v_min: u32,
    /// Connected groups of variables (0-based) of the principal part.
    pub blocks: Vec<Vec<usize>>,
    pub upsilon: Vec<FactorTerm>,
    pub upsilon1: Vec<FactorTerm>,
    /// All blocks share one unit `c_p`. Otherwise the cross-block products
    /// `(b (w_p l))(w_q^* l') + (b (w_q l'))(w_p^* l)` survive and the
    /// residual keeps the full order.
    pub shared_unit: bool,
}

fn apply(terms: &[FactorTerm], f: &CdPoly) -> CdPoly {
    let mut out = CdPoly::zero(f.n(), f.level());
    for t in terms {
        out = out.add(&f.derivative(&t.index).right_mul(&t.coeff));
    }
    out
}

impl Decomposition {
    pub fn apply_upsilon(&self, f: &CdPoly) -> CdPoly {
        apply(&self.upsilon, f)
    }

    pub fn apply_upsilon1(&self, f: &CdPoly) -> CdPoly {
        apply(&self.upsilon1, f)
    }

    /// `Upsilon (Upsilon^1 f)`.
    pub fn compose(&self, f: &CdPoly) -> CdPoly {
        self.apply_upsilon(&self.apply_upsilon1(f))
    }
}

fn binom(n: u64, k: u64) -> u64 {
    (0..k).fold(1u64, |acc, i| acc * (n - i) / (i + 1))
}

/// Square root on the plane of `1` and the axis of `c`.
fn sqrt_cd(c: &CdNumber) -> CdNumber {
    let pol = c.polar();
    let m = pol.magnitude.sqrt();
    let h = pol.angle / 2.0;
    let axis = if pol.axis.level() == 0 { CdNumber::unit(1, 1) } else { pol.axis.clone() };
    let re = CdNumber::real(axis.level(), m * h.cos());
    if h.sin() == 0.0 {
        return CdNumber::real(c.level(), m * h.cos());
    }
    &re + &axis.scale(m * h.sin())
}

/// Splits the principal part into blocks and builds the two first-order-halving
/// factors. Each principal index must be `2 alpha`; inside a block the
/// coefficients must be nonnegative multiples of one unit `c_p`, with the
/// pure powers `d_k^m` present for every variable of the block.
pub fn decompose_operator(op: &OperatorSpec) -> Result<Decomposition> {
    let n = op.n();
    let m = op.order();
    if m == 0 {
        return Err(Error::InvalidArgument("order-zero operators have no decomposition".into()));
    }
    if m % 2 == 1 {
        return Err(Error::InvalidArgument(format!("odd order {m} cannot be halved")));
    }
    let u = m / 2;
    let principal = op.principal();
    if let Some((j, _)) = principal.iter().find(|(j, _)| j.iter().any(|e| e % 2 == 1)) {
        return Err(Error::Unsupported(format!("principal index {j:?} is not of the form 2 alpha")));
    }
    // union-find over the variables of principal terms
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], x: usize) -> usize {
        if parent[x] != x {
            let r = find(parent, parent[x]);
            parent[x] = r;
        }
        parent[x]
    }
    let mut used = BTreeSet::new();
    for (j, _) in &principal {
        let vars: Vec<usize> = (0..n).filter(|&k| j[k] > 0).collect();
        used.extend(vars.iter().copied());
        for w in vars.windows(2) {
            let (a, b) = (find(&mut parent, w[0]), find(&mut parent, w[1]));
            parent[a] = b;
        }
    }
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for &k in &used {
        let root = find(&mut parent, k);
        groups.entry(root).or_default().push(k);
    }
    let blocks: Vec<Vec<usize>> = groups.into_values().collect();

    let r = op.level();
    let mut units: Vec<(Vec<u32>, f64, CdNumber)> = Vec::new();
    let mut block_units: Vec<CdNumber> = Vec::new();
    let mut wlevel = r;
    for block in &blocks {
        let terms: Vec<_> = principal.iter().filter(|(j, _)| j.iter().enumerate().any(|(k, &e)| e > 0 && block.contains(&k))).collect();
        let c0 = terms[0].1;
        let cp = c0.scale(1.0 / c0.norm());
        let cinv = cp.inv()?;
        for &k in block {
            let mut j = vec![0; n];
            j[k] = m;
            let ok = op.terms().find(|(i, _)| **i == j).map(|(_, c)| {
                let a = c * &cinv;
                a.re() > 0.0 && a.im().norm() <= 1e-12 * a.norm()
            });
            if ok != Some(true) {
                return Err(Error::InvalidArgument(format!("block {block:?} is not elliptic in variable {}", k + 1)));
            }
        }
        block_units.push(cp.clone());
        let w = sqrt_cd(&cp);
        wlevel = wlevel.max(w.level());
        for (j, c) in &terms {
            let a = *c * &cinv;
            if a.im().norm() > 1e-12 * a.norm() || a.re() < 0.0 {
                return Err(Error::InvalidArgument(format!("coefficient of d^{j:?} is not a nonnegative multiple of {cp}")));
            }
            let alpha: Vec<u32> = j.iter().map(|e| e / 2).collect();
            units.push((alpha, a.re(), w.clone()));
        }
    }
    let r = wlevel;
    // 2^{v-r} - 1 >= sum_p sum_{q<=u} C(m_p + q - 1, q)
    let need: u64 = blocks
        .iter()
        .map(|b| (0..=u as u64).map(|q| binom(b.len() as u64 + q - 1, q)).sum::<u64>())
        .sum();
    let mut v = r;
    while (1u64 << (v - r)) - 1 < need {
        v += 1;
    }
    let mut v_min = r;
    while (1u64 << (v_min - r)) - 1 < units.len() as u64 {
        v_min += 1;
    }
    if v > MAX_LEVEL {
        return Err(Error::Unsupported(format!("factor level {v} exceeds the largest algebra")));
    }
    let mut upsilon = Vec::new();
    let mut upsilon1 = Vec::new();
    for (q, (alpha, a, w)) in units.into_iter().enumerate() {
        let psi = CdNumber::unit(v, (q + 1) << r).scale(a.sqrt());
        let w = w.promote(v)?;
        upsilon.push(FactorTerm { index: alpha.clone(), coeff: &w.conj() * &psi });
        upsilon1.push(FactorTerm { index: alpha, coeff: &w * &psi.conj() });
    }
    let shared_unit = block_units.windows(2).all(|c| {
        let (a, b) = CdNumber::promote_pair(&c[0], &c[1]);
        (&a - &b).norm() < 1e-12
    });
    Ok(Decomposition { n, r, v, v_min, blocks, upsilon, upsilon1, shared_unit })
}

/// Order of `A - Upsilon Upsilon^1` seen by `f`: the log-slope in `lambda`
/// of `|(A f_lambda - Upsilon Upsilon^1 f_lambda)(x0)|` with
/// `f_lambda(x) = f(x0 + lambda (x - x0))`, between `lambda = 1e2` and `1e3`.
/// Returns `None` when the difference vanishes.
pub fn residual_order(op: &OperatorSpec, dec: &Decomposition, f: &CdPoly, x0: &[f64]) -> Result<Option<f64>> {
    let n = op.n();
    if f.n() != n || x0.len() != n {
        return Err(Error::Dimension { expected: n, got: x0.len() });
    }
    let level = dec.v.max(f.level());
    // d^j f_lambda (x0) = lambda^{|j|} (d^j f)(x0): group by degree
    let mut by_degree: BTreeMap<u32, CdNumber> = BTreeMap::new();
    let mut push = |d: u32, z: CdNumber| -> Result<()> {
        let e = by_degree.entry(d).or_insert_with(|| CdNumber::zero(level));
        *e += &z.promote(level)?;
        Ok(())
    };
    for (j, c) in op.terms() {
        push(j.iter().sum(), c * &f.derivative(j).eval(x0))?;
    }
    for b in &dec.upsilon1 {
        for a in &dec.upsilon {
            let idx: Vec<u32> = a.index.iter().zip(&b.index).map(|(x, y)| x + y).collect();
            let z = &(&f.derivative(&idx).eval(x0) * &b.coeff) * &a.coeff;
            push(idx.iter().sum(), -z)?;
        }
    }
    let scale: f64 = by_degree.values().map(|z| z.norm()).fold(1.0, f64::max);
    let value = |lam: f64| {
        let mut acc = CdNumber::zero(level);
        for (d, z) in &by_degree {
            if z.norm() > 1e-12 * scale {
                acc += &z.scale(lam.powi(*d as i32));
            }
        }
        acc.norm()
    };
    let (v1, v2) = (value(1e2), value(1e3));
    if v1 == 0.0 || v2 == 0.0 {
        return Ok(None);
    }
    Ok(Some((v2 / v1).log10()))
}

/// Principal symbol of `(Upsilon + beta)^* (Upsilon + beta)` sampled on unit directions.
#[derive(Clone, Debug, PartialEq)]
pub struct ProbeReport {
    pub samples: usize,
    /// Smallest real part of `sigma(xi) = sum xi^{alpha+gamma} eta_gamma^* eta_alpha`.
    pub min_re: f64,
    /// Largest imaginary norm of `sigma(xi)`.
    pub max_imag: f64,
    /// Smallest `Re(b^* S(b)) / |b|^2` with `S(b) = (b E^*) E`, `E = sum xi^alpha eta_alpha`.
    pub min_action: f64,
}

/// Samples the principal symbol of `(Upsilon + beta)^* (Upsilon + beta)` at
/// `samples` random unit frequencies. The top-order terms of `upsilon` give
/// `E(xi)`; `beta` only enters when `upsilon` has no term of positive order.
pub fn adjoint_ellipticity_probe<R: Rng>(upsilon: &[FactorTerm], beta: &CdNumber, samples: usize, rng: &mut R) -> ProbeReport {
    let n = upsilon.first().map(|t| t.index.len()).unwrap_or(0);
    let level = upsilon.iter().map(|t| t.coeff.level()).fold(beta.level(), u32::max);
    let top = upsilon.iter().map(|t| t.index.iter().sum::<u32>()).max().unwrap_or(0);
    let principal: Vec<&FactorTerm> = upsilon.iter().filter(|t| t.index.iter().sum::<u32>() == top).collect();
    let mut rep = ProbeReport { samples, min_re: f64::INFINITY, max_imag: 0.0, min_action: f64::INFINITY };
    for _ in 0..samples {
        let mut xi: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let norm = xi.iter().map(|x| x * x).sum::<f64>().sqrt().max(1e-300);
        xi.iter_mut().for_each(|x| *x /= norm);
        let mono = |alpha: &[u32]| -> f64 { alpha.iter().zip(&xi).map(|(&e, &x)| x.powi(e as i32)).product() };
        let mut e = CdNumber::zero(level);
        if top == 0 {
            e += &beta.promote(level).expect("level is the maximum");
        }
        let mut sigma = CdNumber::zero(level);
        for a in &principal {
            let ca = a.coeff.promote(level).expect("level is the maximum");
            e += &ca.scale(mono(&a.index));
            for b in &principal {
                let cb = b.coeff.promote(level).expect("level is the maximum");
                sigma += &(&cb.conj() * &ca).scale(mono(&a.index) * mono(&b.index));
            }
        }
        if top == 0 {
            sigma = &e.conj() * &e;
        }
        rep.min_re = rep.min_re.min(sigma.re());
        rep.max_imag = rep.max_imag.max(sigma.im().norm());
        let c: Vec<f64> = (0..1usize << level).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let b = CdNumber::from_slice(level, &c).expect("power-of-two length");
        let s = &(&b * &e.conj()) * &e;
        rep.min_action = rep.min_action.min((&b.conj() * &s).re() / b.norm_sqr());
    }
    rep
}
