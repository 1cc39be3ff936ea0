//! Cayley-Dickson algebras `A_r` of dimension `2^r`.
//!
//! Elements are stored as `2^r` real coordinates in the basis
//! `i_0 = 1, i_1, ..., i_{2^r - 1}` produced by the doubling recursion,
//! `i_{2^r + j} = i_j i_{2^r}`. A level-`r+1` number is the pair `(xi, eta)`
//! of level-`r` halves and represents `xi + eta l` with `l = i_{2^r}`.

use std::f64::consts::PI;
use std::fmt;
use std::ops::{Add, AddAssign, Index, IndexMut, Mul, Neg, Sub, SubAssign};

use crate::error::{Error, Result};

/// Largest level accepted by constructors (`2^12` coordinates).
pub const MAX_LEVEL: u32 = 12;

/// An element of the Cayley-Dickson algebra `A_r`.
#[derive(Clone, PartialEq)]
pub struct CdNumber {
    level: u32,
    coords: Vec<f64>,
}

impl CdNumber {
    /// The zero element of `A_r`.
    pub fn zero(level: u32) -> Self {
        assert!(level <= MAX_LEVEL, "algebra level {level} too large");
        CdNumber { level, coords: vec![0.0; 1 << level] }
    }

    /// The unit `1 = i_0`.
    pub fn one(level: u32) -> Self {
        Self::real(level, 1.0)
    }

    /// A real scalar embedded in `A_r`.
    pub fn real(level: u32, x: f64) -> Self {
        let mut z = Self::zero(level);
        z.coords[0] = x;
        z
    }

    /// The basis generator `i_j`.
    pub fn unit(level: u32, j: usize) -> Self {
        let mut z = Self::zero(level);
        assert!(j < z.coords.len(), "generator i_{j} not in A_{level}");
        z.coords[j] = 1.0;
        z
    }

    /// Builds a number from its coordinates; the length must be a power of two.
    pub fn from_coords(coords: Vec<f64>) -> Result<Self> {
        let len = coords.len();
        if len == 0 || !len.is_power_of_two() || len > (1 << MAX_LEVEL) {
            return Err(Error::InvalidArgument(format!(
                "coordinate count {len} is not a power of two"
            )));
        }
        Ok(CdNumber { level: len.trailing_zeros(), coords })
    }

    /// Builds a level-`r` number from a possibly shorter coordinate list (zero padded).
    pub fn from_slice(level: u32, coords: &[f64]) -> Result<Self> {
        let mut z = Self::zero(level);
        if coords.len() > z.coords.len() {
            return Err(Error::Dimension { expected: z.coords.len(), got: coords.len() });
        }
        z.coords[..coords.len()].copy_from_slice(coords);
        Ok(z)
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn coords_mut(&mut self) -> &mut [f64] {
        &mut self.coords
    }

    pub fn into_coords(self) -> Vec<f64> {
        self.coords
    }

    /// Real part `coords[0]`.
    pub fn re(&self) -> f64 {
        self.coords[0]
    }

    /// Imaginary part `z - re(z)`.
    pub fn im(&self) -> Self {
        let mut z = self.clone();
        z.coords[0] = 0.0;
        z
    }

    pub fn norm_sqr(&self) -> f64 {
        self.coords.iter().map(|c| c * c).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// Largest coordinate magnitude.
    pub fn max_abs(&self) -> f64 {
        self.coords.iter().fold(0.0, |m, c| m.max(c.abs()))
    }

    pub fn is_real(&self) -> bool {
        self.coords[1..].iter().all(|&c| c == 0.0)
    }

    pub fn scale(&self, s: f64) -> Self {
        CdNumber { level: self.level, coords: self.coords.iter().map(|c| c * s).collect() }
    }

    /// Embeds into `A_level` by zero padding (`A_r` is a subalgebra of `A_{r+1}`).
    pub fn promote(&self, level: u32) -> Result<Self> {
        if level < self.level {
            return Err(Error::LevelMismatch(self.level, level));
        }
        let mut z = Self::zero(level);
        z.coords[..self.coords.len()].copy_from_slice(&self.coords);
        Ok(z)
    }

    /// Brings two numbers to their common (larger) level.
    pub fn promote_pair(a: &Self, b: &Self) -> (Self, Self) {
        let level = a.level.max(b.level);
        (a.promote(level).unwrap(), b.promote(level).unwrap())
    }

    /// Doubling product; both factors must share a level.
    pub fn try_mul(&self, rhs: &Self) -> Result<Self> {
        if self.level != rhs.level {
            return Err(Error::LevelMismatch(self.level, rhs.level));
        }
        let mut out = vec![0.0; self.coords.len()];
        mul_into(&self.coords, &rhs.coords, &mut out);
        Ok(CdNumber { level: self.level, coords: out })
    }

    /// Conjugate `z* = xi* - eta l`, i.e. every imaginary coordinate negated.
    pub fn conj(&self) -> Self {
        let mut z = self.clone();
        for c in &mut z.coords[1..] {
            *c = -*c;
        }
        z
    }

    /// Closed-form exponential `e^{re z}(cos phi + (im z / phi) sin phi)`, `phi = |im z|`.
    pub fn exp(&self) -> Self {
        let mut out = vec![0.0; self.coords.len()];
        exp_into(&self.coords, &mut out);
        CdNumber { level: self.level, coords: out }
    }

    /// Inverse `z*/|z|^2`. Exact two-sided inverse for `r <= 3`; for higher
    /// levels the same formula is used, see [`CdNumber::inverse_residual`].
    pub fn inv(&self) -> Result<Self> {
        let n2 = self.norm_sqr();
        if n2 == 0.0 || !n2.is_finite() {
            return Err(Error::ZeroDivisor(n2.sqrt()));
        }
        Ok(self.conj().scale(1.0 / n2))
    }

    /// `|z inv(z) - 1|`, which is round-off for alternative algebras.
    pub fn inverse_residual(&self) -> Result<f64> {
        let inv = self.inv()?;
        Ok((self * &inv - Self::one(self.level)).norm())
    }

    /// Coefficient `h_j` through the projection identities
    /// `h_j = (-h i_j + i_j (2^r-2)^{-1}{-h + sum_k i_k (h i_k*)})/2` and
    /// `h_0 = (h + (2^r-2)^{-1}{-h + sum_k i_k (h i_k*)})/2`.
    pub fn component_project(&self, j: usize) -> Result<f64> {
        let r = self.level;
        if r < 2 {
            return Err(Error::InvalidArgument(format!(
                "component projection needs r >= 2, got r = {r}"
            )));
        }
        let dim = self.dim();
        if j >= dim {
            return Err(Error::InvalidArgument(format!("index {j} out of range for A_{r}")));
        }
        let mut bracket = -self;
        for k in 1..dim {
            let ik = Self::unit(r, k);
            bracket += &(&ik * &(self * &ik.conj()));
        }
        let bracket = bracket.scale(1.0 / (dim as f64 - 2.0));
        let value = if j == 0 {
            (self + &bracket).scale(0.5)
        } else {
            let ij = Self::unit(r, j);
            (&(&ij * &bracket) - &(self * &ij)).scale(0.5)
        };
        Ok(value.coords[0])
    }

    /// Polar form `z = |z| exp(angle * axis)` with `angle` in `[0, pi]`.
    pub fn polar(&self) -> PurePolar {
        let magnitude = self.norm();
        let im = self.im();
        let im_norm = im.norm();
        let axis_default = || {
            if self.level == 0 {
                CdNumber::zero(0)
            } else {
                CdNumber::unit(self.level, 1)
            }
        };
        if im_norm == 0.0 {
            let angle = if self.re() < 0.0 { PI } else { 0.0 };
            return PurePolar { magnitude, axis: axis_default(), angle };
        }
        PurePolar { magnitude, axis: im.scale(1.0 / im_norm), angle: im_norm.atan2(self.re()) }
    }
}

/// Polar decomposition `magnitude * exp(angle * axis)`.
#[derive(Clone, Debug, PartialEq)]
pub struct PurePolar {
    pub magnitude: f64,
    /// Purely imaginary unit (for `A_0` there is no imaginary unit and the axis is zero).
    pub axis: CdNumber,
    pub angle: f64,
}

impl PurePolar {
    pub fn reconstruct(&self) -> CdNumber {
        if self.axis.level() == 0 {
            return CdNumber::real(0, self.magnitude * self.angle.cos());
        }
        self.axis.scale(self.angle).exp().scale(self.magnitude)
    }
}

/// Doubling product on raw coordinate slices of equal power-of-two length.
pub fn mul_into(a: &[f64], b: &[f64], out: &mut [f64]) {
    let n = a.len();
    debug_assert!(b.len() == n && out.len() == n);
    match n {
        1 => out[0] = a[0] * b[0],
        2 => {
            out[0] = a[0] * b[0] - a[1] * b[1];
            out[1] = a[0] * b[1] + a[1] * b[0];
        }
        4 => {
            // quaternion table of the doubling recursion
            let (a0, a1, a2, a3) = (a[0], a[1], a[2], a[3]);
            let (b0, b1, b2, b3) = (b[0], b[1], b[2], b[3]);
            out[0] = a0 * b0 - a1 * b1 - a2 * b2 - a3 * b3;
            out[1] = a0 * b1 + a1 * b0 + a2 * b3 - a3 * b2;
            out[2] = a0 * b2 - a1 * b3 + a2 * b0 + a3 * b1;
            out[3] = a0 * b3 + a1 * b2 - a2 * b1 + a3 * b0;
        }
        _ => {
            // (xi + eta l)(gamma + delta l) = (xi gamma - delta* eta) + (delta xi + eta gamma*) l
            let h = n / 2;
            let (xi, eta) = a.split_at(h);
            let (gamma, delta) = b.split_at(h);
            let mut tmp = vec![0.0; 3 * h];
            let (t1, rest) = tmp.split_at_mut(h);
            let (t2, conj) = rest.split_at_mut(h);
            let (lo, hi) = out.split_at_mut(h);

            mul_into(xi, gamma, t1);
            conj_into(delta, conj);
            mul_into(conj, eta, t2);
            for k in 0..h {
                lo[k] = t1[k] - t2[k];
            }
            mul_into(delta, xi, t1);
            conj_into(gamma, conj);
            mul_into(eta, conj, t2);
            for k in 0..h {
                hi[k] = t1[k] + t2[k];
            }
        }
    }
}

fn conj_into(a: &[f64], out: &mut [f64]) {
    out[0] = a[0];
    for k in 1..a.len() {
        out[k] = -a[k];
    }
}

/// Closed-form exponential on raw coordinates.
pub fn exp_into(z: &[f64], out: &mut [f64]) {
    let er = z[0].exp();
    let phi = z[1..].iter().map(|c| c * c).sum::<f64>().sqrt();
    out[0] = er * phi.cos();
    let s = if phi == 0.0 { er } else { er * phi.sin() / phi };
    for k in 1..z.len() {
        out[k] = s * z[k];
    }
}

impl fmt::Debug for CdNumber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "A{}{:?}", self.level, self.coords)
    }
}

impl fmt::Display for CdNumber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (j, c) in self.coords.iter().enumerate() {
            if *c == 0.0 && !(first && j + 1 == self.coords.len()) {
                continue;
            }
            if !first {
                write!(f, " {} ", if *c < 0.0 { '-' } else { '+' })?;
                write!(f, "{}", c.abs())?;
            } else {
                write!(f, "{c}")?;
            }
            if j > 0 {
                write!(f, "*i{j}")?;
            }
            first = false;
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

impl Index<usize> for CdNumber {
    type Output = f64;
    fn index(&self, j: usize) -> &f64 {
        &self.coords[j]
    }
}

impl IndexMut<usize> for CdNumber {
    fn index_mut(&mut self, j: usize) -> &mut f64 {
        &mut self.coords[j]
    }
}

macro_rules! binop {
    ($trait:ident, $method:ident, $op:tt) => {
        impl $trait<&CdNumber> for &CdNumber {
            type Output = CdNumber;
            fn $method(self, rhs: &CdNumber) -> CdNumber {
                if self.level == rhs.level {
                    let coords = self.coords.iter().zip(&rhs.coords).map(|(a, b)| a $op b).collect();
                    CdNumber { level: self.level, coords }
                } else {
                    let (a, b) = CdNumber::promote_pair(self, rhs);
                    &a $op &b
                }
            }
        }
        impl $trait<CdNumber> for CdNumber {
            type Output = CdNumber;
            fn $method(self, rhs: CdNumber) -> CdNumber {
                &self $op &rhs
            }
        }
        impl $trait<&CdNumber> for CdNumber {
            type Output = CdNumber;
            fn $method(self, rhs: &CdNumber) -> CdNumber {
                &self $op rhs
            }
        }
    };
}

binop!(Add, add, +);
binop!(Sub, sub, -);

impl AddAssign<&CdNumber> for CdNumber {
    fn add_assign(&mut self, rhs: &CdNumber) {
        if self.level < rhs.level {
            *self = self.promote(rhs.level).unwrap();
        }
        for (a, b) in self.coords.iter_mut().zip(&rhs.coords) {
            *a += b;
        }
    }
}

impl SubAssign<&CdNumber> for CdNumber {
    fn sub_assign(&mut self, rhs: &CdNumber) {
        if self.level < rhs.level {
            *self = self.promote(rhs.level).unwrap();
        }
        for (a, b) in self.coords.iter_mut().zip(&rhs.coords) {
            *a -= b;
        }
    }
}

/// Product with implicit promotion to the common level.
impl Mul<&CdNumber> for &CdNumber {
    type Output = CdNumber;
    fn mul(self, rhs: &CdNumber) -> CdNumber {
        if self.level == rhs.level {
            self.try_mul(rhs).unwrap()
        } else {
            let (a, b) = CdNumber::promote_pair(self, rhs);
            a.try_mul(&b).unwrap()
        }
    }
}

impl Mul<CdNumber> for CdNumber {
    type Output = CdNumber;
    fn mul(self, rhs: CdNumber) -> CdNumber {
        &self * &rhs
    }
}

impl Mul<f64> for &CdNumber {
    type Output = CdNumber;
    fn mul(self, rhs: f64) -> CdNumber {
        self.scale(rhs)
    }
}

impl Mul<f64> for CdNumber {
    type Output = CdNumber;
    fn mul(self, rhs: f64) -> CdNumber {
        self.scale(rhs)
    }
}

impl Neg for &CdNumber {
    type Output = CdNumber;
    fn neg(self) -> CdNumber {
        self.scale(-1.0)
    }
}

impl Neg for CdNumber {
    type Output = CdNumber;
    fn neg(self) -> CdNumber {
        self.scale(-1.0)
    }
}
