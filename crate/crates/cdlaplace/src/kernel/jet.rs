//! Truncated multivariate Taylor jets, used to differentiate the Cartesian
//! kernel exactly in the phase variables.

use std::collections::HashMap;

/// Monomial bookkeeping for polynomials in `nv` variables of total degree `<= deg`.
#[derive(Debug, Clone)]
pub(crate) struct JetSpace {
    pub nv: usize,
    pub deg: u32,
    pub monos: Vec<Vec<u32>>,
    index: HashMap<Vec<u32>, usize>,
    table: Vec<(usize, usize, usize)>,
}

pub(crate) type Jet = Vec<f64>;

impl JetSpace {
    pub fn new(nv: usize, deg: u32) -> Self {
        let mut monos = Vec::new();
        let mut cur = vec![0u32; nv];
        enumerate(&mut cur, 0, deg, &mut monos);
        monos.sort_by_key(|m| m.iter().sum::<u32>());
        let index: HashMap<Vec<u32>, usize> =
            monos.iter().cloned().enumerate().map(|(i, m)| (m, i)).collect();
        let mut table = Vec::new();
        for (i, a) in monos.iter().enumerate() {
            for (j, b) in monos.iter().enumerate() {
                let c: Vec<u32> = a.iter().zip(b).map(|(x, y)| x + y).collect();
                if let Some(&k) = index.get(&c) {
                    table.push((i, j, k));
                }
            }
        }
        JetSpace { nv, deg, monos, index, table }
    }

    pub fn len(&self) -> usize {
        self.monos.len()
    }

    pub fn constant(&self, c: f64) -> Jet {
        let mut j = vec![0.0; self.len()];
        j[0] = c;
        j
    }

    /// `c + eps_var`.
    pub fn variable(&self, var: usize, c: f64) -> Jet {
        let mut j = self.constant(c);
        if self.deg > 0 {
            let mut m = vec![0u32; self.nv];
            m[var] = 1;
            j[self.index[&m]] = 1.0;
        }
        j
    }

    pub fn position(&self, mono: &[u32]) -> Option<usize> {
        self.index.get(mono).copied()
    }

    pub fn mul(&self, a: &Jet, b: &Jet) -> Jet {
        let mut out = vec![0.0; self.len()];
        for &(i, j, k) in &self.table {
            out[k] += a[i] * b[j];
        }
        out
    }

    /// `g(x0 + delta)` from the derivatives `g^{(k)}(x0)`, `delta` having no constant term.
    pub fn compose(&self, derivs: &[f64], delta: &Jet) -> Jet {
        let mut out = self.constant(derivs[0]);
        let mut power = self.constant(1.0);
        let mut fact = 1.0;
        for k in 1..=self.deg as usize {
            power = self.mul(&power, delta);
            fact *= k as f64;
            let c = derivs[k] / fact;
            for (o, p) in out.iter_mut().zip(&power) {
                *o += c * p;
            }
        }
        out
    }
}

fn enumerate(cur: &mut Vec<u32>, pos: usize, left: u32, out: &mut Vec<Vec<u32>>) {
    if pos == cur.len() {
        out.push(cur.clone());
        return;
    }
    for e in 0..=left {
        cur[pos] = e;
        enumerate(cur, pos + 1, left - e, out);
    }
    cur[pos] = 0;
}

/// `j_k(y) / y^k` for `k = 0..=kmax` (spherical Bessel functions).
pub(crate) fn bessel_ratio(y: f64, kmax: usize) -> Vec<f64> {
    let mut out = vec![0.0; kmax + 1];
    if y < 4.0 {
        let z = -0.5 * y * y;
        for (k, o) in out.iter_mut().enumerate() {
            // sum_m z^m / (m! (2k+2m+1)!!)
            let mut dfact = 1.0;
            for q in (1..=2 * k + 1).step_by(2) {
                dfact *= q as f64;
            }
            let mut term = 1.0 / dfact;
            let mut sum = term;
            let mut m = 0usize;
            while term.abs() > 1e-18 * sum.abs().max(1e-300) && m < 80 {
                m += 1;
                term *= z / (m as f64 * (2 * k + 2 * m + 1) as f64);
                sum += term;
            }
            *o = sum;
        }
    } else {
        let (s, c) = y.sin_cos();
        let mut jm1 = s / y;
        out[0] = jm1;
        if kmax >= 1 {
            let mut j = s / (y * y) - c / y;
            out[1] = j / y;
            for k in 1..kmax {
                let jn = (2 * k + 1) as f64 / y * j - jm1;
                jm1 = j;
                j = jn;
                out[k + 1] = j / y.powi(k as i32 + 1);
            }
        }
    }
    out
}

/// Derivatives in `x` of `g0(x) = cos(sqrt x)` and `g1(x) = sin(sqrt x)/sqrt x`.
pub(crate) fn radial_derivs(x: f64, kmax: usize) -> (Vec<f64>, Vec<f64>) {
    let y = x.max(0.0).sqrt();
    let ratio = bessel_ratio(y, kmax);
    let mut g1 = vec![0.0; kmax + 1];
    let mut f = 1.0;
    for k in 0..=kmax {
        g1[k] = f * ratio[k];
        f *= -0.5;
    }
    let mut g0 = vec![0.0; kmax + 1];
    g0[0] = y.cos();
    for k in 1..=kmax {
        g0[k] = -0.5 * g1[k - 1];
    }
    (g0, g1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bessel_ratio_branches_agree() {
        for &y in &[3.9, 4.0, 4.1] {
            let a = bessel_ratio(y, 4);
            // series evaluated directly past its switch point
            let z = -0.5 * y * y;
            for k in 0..=4usize {
                let mut dfact = 1.0;
                for q in (1..=2 * k + 1).step_by(2) {
                    dfact *= q as f64;
                }
                let mut term = 1.0 / dfact;
                let mut sum = term;
                for m in 1..60 {
                    term *= z / (m as f64 * (2 * k + 2 * m + 1) as f64);
                    sum += term;
                }
                assert!((a[k] - sum).abs() < 1e-11 * sum.abs().max(1e-3), "k={k} y={y}");
            }
        }
    }

    #[test]
    fn radial_derivative_matches_difference() {
        let x = 2.3;
        let h = 1e-5;
        let (g0, g1) = radial_derivs(x, 2);
        let f1 = |x: f64| x.sqrt().sin() / x.sqrt();
        let d = (f1(x + h) - f1(x - h)) / (2.0 * h);
        assert!((g1[1] - d).abs() < 1e-9);
        let d0 = ((x + h).sqrt().cos() - (x - h).sqrt().cos()) / (2.0 * h);
        assert!((g0[1] - d0).abs() < 1e-9);
    }

    #[test]
    fn jet_product_truncates() {
        let s = JetSpace::new(2, 2);
        let a = s.variable(0, 1.0);
        let b = s.variable(1, 2.0);
        let p = s.mul(&a, &b);
        assert_eq!(p[0], 2.0);
        assert_eq!(p[s.position(&[1, 1]).unwrap()], 1.0);
        assert_eq!(p[s.position(&[1, 0]).unwrap()], 2.0);
    }
}
