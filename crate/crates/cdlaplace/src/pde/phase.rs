//! Phase-shift linear systems `sum_l psi_l T_l F = phi`.
//!
//! Applying the shifts `T_m` for every `m` in the group generated by the
//! occurring `l` gives a square system in the unknowns `x_k = T_k F`, with
//! `T_1^2 = -1` and `T_h^4 = 1`. Closed forms cover the paired and cyclic
//! structures with commuting coefficients; a dense solve in the real regular
//! representation always runs as a cross-check.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use nalgebra::{DMatrix, DVector};

use super::CoeffDomain;
use crate::algebra::CdNumber;
use crate::error::{Error, Result};
use crate::kernel::SPoly;
use crate::transform::PhaseShift;

/// Relative pivot and denominator threshold below which a system is singular.
const SINGULAR_TOL: f64 = 1e-12;

/// Coefficients `psi_l` indexed by canonical shifts.
#[derive(Clone, Debug, PartialEq)]
pub struct PhaseTable {
    n: usize,
    entries: BTreeMap<Vec<i64>, CdNumber>,
}

impl PhaseTable {
    /// Reduces `sum_j a_j P_j(S)` to shifts: `S^alpha -> T_alpha` in canonical form.
    pub fn from_symbol(n: usize, terms: &[(CdNumber, SPoly)]) -> Self {
        let mut entries: BTreeMap<Vec<i64>, CdNumber> = BTreeMap::new();
        for (a, poly) in terms {
            for (alpha, c) in poly.terms() {
                let (sign, l) = PhaseShift(alpha.iter().map(|&e| e as i64).collect()).canonical();
                let v = a.scale(sign * c);
                match entries.get_mut(&l.0) {
                    Some(x) => *x += &v,
                    None => {
                        entries.insert(l.0, v);
                    }
                }
            }
        }
        let scale = entries.values().map(|v| v.norm()).fold(0.0, f64::max);
        entries.retain(|_, v| v.norm() > 1e-15 * scale);
        PhaseTable { n, entries }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// `psi_l` (zero when absent).
    pub fn coefficient(&self, l: &PhaseShift) -> CdNumber {
        let (sign, c) = l.canonical();
        self.entries.get(&c.0).map(|v| v.scale(sign)).unwrap_or_else(|| CdNumber::zero(0))
    }

    pub fn entries(&self) -> impl Iterator<Item = (PhaseShift, &CdNumber)> {
        self.entries.iter().map(|(k, v)| (PhaseShift(k.clone()), v))
    }

    /// Canonical representatives of the group generated by the occurring
    /// shifts, in lexicographic order (zero first).
    pub fn group(&self) -> Vec<PhaseShift> {
        let zero = vec![0i64; self.n];
        let gens: Vec<PhaseShift> =
            self.entries.keys().filter(|k| **k != zero).map(|k| PhaseShift(k.clone())).collect();
        let mut seen: BTreeSet<Vec<i64>> = BTreeSet::new();
        seen.insert(zero.clone());
        let mut queue = VecDeque::from([PhaseShift(zero)]);
        while let Some(x) = queue.pop_front() {
            for g in &gens {
                let (_, y) = x.add(g).canonical();
                if seen.insert(y.0.clone()) {
                    queue.push_back(y);
                }
            }
        }
        seen.into_iter().map(PhaseShift).collect()
    }

    /// Square system over the group: row `m` is `T_m` applied to the equation.
    pub fn system(&self) -> PhaseSystem {
        let shifts = self.group();
        let index: BTreeMap<Vec<i64>, usize> = shifts.iter().enumerate().map(|(i, s)| (s.0.clone(), i)).collect();
        let level = self.entries.values().map(|v| v.level()).max().unwrap_or(0);
        let k = shifts.len();
        let mut matrix = vec![vec![CdNumber::zero(level); k]; k];
        for (row, m) in shifts.iter().enumerate() {
            for (l, psi) in &self.entries {
                let (sign, c) = m.add(&PhaseShift(l.clone())).canonical();
                let col = index[&c.0];
                matrix[row][col] += &psi.scale(sign);
            }
        }
        PhaseSystem { shifts, matrix }
    }
}

/// Which path produced the reported solution.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PhaseMethod {
    /// One unknown: `x = psi^{-1} b`.
    Scalar,
    /// Paired unknowns `(x, T_1 x)`.
    Pair,
    /// Cyclic unknowns `(x, T_h x, T_h^2 x, T_h^3 x)`.
    Cyclic4,
    Dense,
}

#[derive(Clone, Debug)]
pub struct PhaseSolution {
    /// `x_k = T_k F` in the order of [`PhaseSystem::shifts`].
    pub x: Vec<CdNumber>,
    pub method: PhaseMethod,
    /// Largest difference between the closed form (or quaternion Gauss
    /// elimination) and the dense solve.
    pub cross_check: f64,
    /// `max_m |sum_k M_mk x_k - b_m| / max(1, |b|)`.
    pub residual: f64,
}

/// `M x = b` with left-acting coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct PhaseSystem {
    pub shifts: Vec<PhaseShift>,
    pub matrix: Vec<Vec<CdNumber>>,
}

impl PhaseSystem {
    pub fn len(&self) -> usize {
        self.shifts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.shifts.is_empty()
    }

    pub fn domain(&self) -> CoeffDomain {
        self.matrix.iter().flatten().map(CoeffDomain::of).max().unwrap_or(CoeffDomain::Real)
    }

    fn level(&self) -> u32 {
        self.matrix.iter().flatten().map(|v| v.level()).max().unwrap_or(0)
    }

    /// Solves for one right side per shift (`b_m = T_m phi`).
    pub fn solve(&self, rhs: &[CdNumber]) -> Result<PhaseSolution> {
        let k = self.len();
        if rhs.len() != k {
            return Err(Error::Dimension { expected: k, got: rhs.len() });
        }
        let dense = solve_dense(&self.matrix, rhs)?;
        let mut cross_check = 0.0;
        let (x, method) = match self.closed_form(rhs)? {
            Some((x, m)) => {
                cross_check = max_diff(&x, &dense);
                (x, m)
            }
            None => (dense.clone(), PhaseMethod::Dense),
        };
        let rhs_level = rhs.iter().map(|b| b.level()).max().unwrap_or(0);
        if self.domain() == CoeffDomain::Quaternion && rhs_level <= 2 && self.level() <= 2 {
            let g = solve_quaternion_gauss(&self.matrix, rhs)?;
            cross_check = cross_check.max(max_diff(&g, &dense));
        }
        let residual = self.residual(&x, rhs);
        Ok(PhaseSolution { x, method, cross_check, residual })
    }

    /// `max_m |sum_k M_mk x_k - b_m| / max(1, max |b|)`.
    pub fn residual(&self, x: &[CdNumber], rhs: &[CdNumber]) -> f64 {
        let bmax = rhs.iter().map(|b| b.norm()).fold(1.0, f64::max);
        let mut worst = 0.0f64;
        for (row, b) in self.matrix.iter().zip(rhs) {
            let mut acc = -b;
            for (m, xk) in row.iter().zip(x) {
                acc += &(m * xk);
            }
            worst = worst.max(acc.norm());
        }
        worst / bmax
    }

    /// `||M^{-1}||_inf` of the real regular representation.
    pub fn amplification(&self) -> Result<f64> {
        let (m, _) = regular_representation(&self.matrix, self.level());
        let inv = m.try_inverse().ok_or_else(|| Error::Singular("phase system is not invertible".into()))?;
        Ok(inv.row_iter().map(|r| r.iter().map(|x| x.abs()).sum::<f64>()).fold(0.0, f64::max))
    }

    fn closed_form(&self, rhs: &[CdNumber]) -> Result<Option<(Vec<CdNumber>, PhaseMethod)>> {
        let k = self.len();
        let m = &self.matrix;
        let level = self.level().max(rhs.iter().map(|b| b.level()).max().unwrap_or(0));
        if level > 3 {
            return Ok(None);
        }
        if k == 1 {
            let inv = m[0][0].inv().map_err(|_| Error::Singular("zero phase coefficient".into()))?;
            return Ok(Some((vec![&inv * &rhs[0]], PhaseMethod::Scalar)));
        }
        let n = self.shifts[0].0.len();
        let e1 = {
            let mut v = vec![0; n];
            v[0] = 1;
            v
        };
        if k == 2 && self.shifts[1].0 == e1 {
            let (a, b) = (&m[0][0], &m[0][1]);
            if close(&m[1][0], &-b) && close(&m[1][1], a) && commute(a, b) {
                let (x1, x2) = solve_pair(a, b, &rhs[0], &rhs[1])?;
                return Ok(Some((vec![x1, x2], PhaseMethod::Pair)));
            }
        }
        if k == 4 {
            if let Some(h) = (1..n).find(|&h| self.shifts[1].0.iter().enumerate().all(|(i, &v)| v == if i == h { 1 } else { 0 })) {
                let cyclic = (0..4).all(|q| self.shifts[q].0.iter().enumerate().all(|(i, &v)| v == if i == h { q as i64 } else { 0 }));
                let row0 = &m[0];
                let circulant = (0..4).all(|r| (0..4).all(|c| close(&m[r][c], &row0[(c + 4 - r) % 4])));
                let dom = self.domain();
                if cyclic && circulant && dom <= CoeffDomain::Complex {
                    let x = solve_cyclic4(&row0[0], &row0[1], &row0[2], &row0[3], [&rhs[0], &rhs[1], &rhs[2], &rhs[3]])?;
                    return Ok(Some((x.to_vec(), PhaseMethod::Cyclic4)));
                }
            }
        }
        Ok(None)
    }
}

fn close(a: &CdNumber, b: &CdNumber) -> bool {
    (a - b).norm() <= 1e-14 * (1.0 + a.norm().max(b.norm()))
}

fn commute(a: &CdNumber, b: &CdNumber) -> bool {
    close(&(a * b), &(b * a))
}

fn max_diff(a: &[CdNumber], b: &[CdNumber]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// Closed form for `alpha x_1 + beta x_2 = b_1`, `-beta x_1 + alpha x_2 = b_2`
/// with commuting `alpha, beta`.
pub fn solve_pair(alpha: &CdNumber, beta: &CdNumber, b1: &CdNumber, b2: &CdNumber) -> Result<(CdNumber, CdNumber)> {
    let den = &(alpha * alpha) + &(beta * beta);
    let scale = alpha.norm_sqr() + beta.norm_sqr();
    if den.norm() <= SINGULAR_TOL * scale || scale == 0.0 {
        return Err(Error::Singular(format!("alpha^2 + beta^2 = {den}")));
    }
    let inv = den.inv()?;
    let c1 = alpha * &inv;
    let c2 = beta * &inv;
    let x1 = &(&c1 * b1) - &(&c2 * b2);
    let x2 = &(&c1 * b2) + &(&c2 * b1);
    Ok((x1, x2))
}

/// Cramer-type closed form for the cyclic system with rows
/// `[a b c d], [d a b c], [c d a b], [b c d a]` and real or complex entries.
pub fn solve_cyclic4(a: &CdNumber, b: &CdNumber, c: &CdNumber, d: &CdNumber, rhs: [&CdNumber; 4]) -> Result<[CdNumber; 4]> {
    let m = |x: &CdNumber, y: &CdNumber| x * y;
    let m3 = |x: &CdNumber, y: &CdNumber, z: &CdNumber| &(x * y) * z;
    let two = |x: CdNumber| x.scale(2.0);
    let xi1 = &(&(&(&m3(a, a, a) + &m3(b, b, c)) + &m3(c, d, d)) - &m3(a, c, c)) - &two(m3(a, b, d));
    let xi2 = &(&(&(&m3(a, a, b) + &m3(b, c, c)) + &m3(d, d, d)) - &m3(b, b, d)) - &two(m3(a, c, d));
    let xi3 = &(&(&(&m3(a, b, b) + &m3(c, c, c)) + &m3(a, d, d)) - &m3(a, a, c)) - &two(m3(b, c, d));
    let xi4 = &(&(&(&m3(a, a, d) + &m3(b, b, b)) + &m3(c, c, d)) - &m3(b, d, d)) - &two(m3(a, b, c));
    let delta = &(&(&m(a, &xi1) - &m(d, &xi2)) + &m(c, &xi3)) - &m(b, &xi4);
    let scale = [a, b, c, d].iter().map(|x| x.norm()).fold(0.0, f64::max).powi(4);
    if delta.norm() <= SINGULAR_TOL * scale || scale == 0.0 {
        return Err(Error::Singular(format!("cyclic determinant {delta}")));
    }
    let inv = delta.inv()?;
    // row j of the adjugate: signed xi's applied to b_1..b_4
    let pattern: [[(f64, &CdNumber); 4]; 4] = [
        [(1.0, &xi1), (-1.0, &xi2), (1.0, &xi3), (-1.0, &xi4)],
        [(-1.0, &xi4), (1.0, &xi1), (-1.0, &xi2), (1.0, &xi3)],
        [(1.0, &xi3), (-1.0, &xi4), (1.0, &xi1), (-1.0, &xi2)],
        [(-1.0, &xi2), (1.0, &xi3), (-1.0, &xi4), (1.0, &xi1)],
    ];
    let solve_row = |row: &[(f64, &CdNumber); 4]| {
        let mut acc = CdNumber::zero(0);
        for ((s, xi), bj) in row.iter().zip(rhs) {
            let c = (&inv * *xi).scale(*s);
            acc += &(&c * bj);
        }
        acc
    };
    Ok([solve_row(&pattern[0]), solve_row(&pattern[1]), solve_row(&pattern[2]), solve_row(&pattern[3])])
}

/// Real `(K 2^L) x (K 2^L)` matrix whose block `(m, k)` is left
/// multiplication by `M_mk`.
fn regular_representation(matrix: &[Vec<CdNumber>], level: u32) -> (DMatrix<f64>, usize) {
    let k = matrix.len();
    let d = 1usize << level;
    let mut out = DMatrix::zeros(k * d, k * d);
    for (r, row) in matrix.iter().enumerate() {
        for (c, psi) in row.iter().enumerate() {
            let psi = psi.promote(level).expect("level within bound");
            for col in 0..d {
                let v = &psi * &CdNumber::unit(level, col);
                for (i, x) in v.coords().iter().enumerate() {
                    out[(r * d + i, c * d + col)] = *x;
                }
            }
        }
    }
    (out, d)
}

/// Dense LU solve in the real regular representation.
pub fn solve_dense(matrix: &[Vec<CdNumber>], rhs: &[CdNumber]) -> Result<Vec<CdNumber>> {
    let k = matrix.len();
    if rhs.len() != k || matrix.iter().any(|r| r.len() != k) {
        return Err(Error::Dimension { expected: k, got: rhs.len() });
    }
    let level = matrix
        .iter()
        .flatten()
        .chain(rhs)
        .map(|v| v.level())
        .max()
        .unwrap_or(0);
    let (m, d) = regular_representation(matrix, level);
    let mut b = DVector::zeros(k * d);
    for (j, v) in rhs.iter().enumerate() {
        for (i, x) in v.promote(level)?.coords().iter().enumerate() {
            b[j * d + i] = *x;
        }
    }
    let lu = m.lu();
    let diag = lu.u().diagonal();
    let big = diag.iter().map(|x| x.abs()).fold(0.0, f64::max);
    let small = diag.iter().map(|x| x.abs()).fold(f64::INFINITY, f64::min);
    if !(small > SINGULAR_TOL * big) {
        return Err(Error::Singular(format!("pivot ratio {:.3e}", small / big)));
    }
    let x = lu.solve(&b).ok_or_else(|| Error::Singular("LU solve failed".into()))?;
    (0..k).map(|j| CdNumber::from_slice(level, &x.as_slice()[j * d..(j + 1) * d])).collect()
}

/// Gauss elimination with left inverses and partial pivoting for
/// quaternion coefficients and right sides.
pub fn solve_quaternion_gauss(matrix: &[Vec<CdNumber>], rhs: &[CdNumber]) -> Result<Vec<CdNumber>> {
    let k = matrix.len();
    if rhs.len() != k || matrix.iter().any(|r| r.len() != k) {
        return Err(Error::Dimension { expected: k, got: rhs.len() });
    }
    if matrix.iter().flatten().chain(rhs).any(|v| v.level() > 2) {
        return Err(Error::InvalidArgument("quaternion elimination needs level <= 2 entries".into()));
    }
    let q = |v: &CdNumber| v.promote(2).expect("level <= 2");
    let mut a: Vec<Vec<CdNumber>> = matrix.iter().map(|r| r.iter().map(q).collect()).collect();
    let mut b: Vec<CdNumber> = rhs.iter().map(q).collect();
    let scale = a.iter().flatten().map(|v| v.norm()).fold(0.0, f64::max);
    for col in 0..k {
        let piv = (col..k)
            .max_by(|&i, &j| a[i][col].norm().total_cmp(&a[j][col].norm()))
            .expect("nonempty");
        if a[piv][col].norm() <= SINGULAR_TOL * scale {
            return Err(Error::Singular(format!("zero pivot in column {col}")));
        }
        a.swap(col, piv);
        b.swap(col, piv);
        let inv = a[col][col].inv()?;
        for row in col + 1..k {
            let f = &a[row][col] * &inv;
            if f.norm() == 0.0 {
                continue;
            }
            for c in col..k {
                let t = &f * &a[col][c];
                a[row][c] -= &t;
            }
            let t = &f * &b[col];
            b[row] -= &t;
        }
    }
    let mut x = vec![CdNumber::zero(2); k];
    for row in (0..k).rev() {
        let mut acc = b[row].clone();
        for c in row + 1..k {
            acc -= &(&a[row][c] * &x[c]);
        }
        x[row] = &a[row][row].inv()? * &acc;
    }
    Ok(x)
}
