//! Transform kernels `u(p,t;zeta)` and `exp(-u)` in Cartesian and spherical
//! coordinates, together with the phase-shift operators `T` and the
//! derivative-shift operators `S = -d/dzeta` acting on them.
//!
//! Axis indices are 1-based (`j = 1..=n` refers to `t_j`, `p_j`, `zeta_j`),
//! while `t` vectors are ordinary 0-based slices of length `n`.

mod jet;

use std::collections::BTreeMap;
use std::f64::consts::FRAC_PI_2;

use crate::algebra::{exp_into, CdNumber};
use crate::error::{Error, Result};
use jet::{radial_derivs, JetSpace};

/// Coordinate system of the kernel.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CoordMode {
    Cartesian,
    Spherical,
}

impl std::str::FromStr for CoordMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cartesian" => Ok(CoordMode::Cartesian),
            "spherical" => Ok(CoordMode::Spherical),
            other => Err(Error::InvalidArgument(format!("unknown coordinate mode '{other}'"))),
        }
    }
}

impl std::fmt::Display for CoordMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            CoordMode::Cartesian => "cartesian",
            CoordMode::Spherical => "spherical",
        })
    }
}

/// Kernel description: mode, dimension `n`, level `r`, phase `zeta` and an
/// optional set of active axes for restricted transforms.
#[derive(Clone, Debug, PartialEq)]
pub struct KernelSpec {
    mode: CoordMode,
    n: usize,
    r: u32,
    zeta: CdNumber,
    active: Option<Vec<usize>>,
}

impl KernelSpec {
    /// Requires `1 <= n <= 2^r - 1` so that `i_1..i_n` exist in `A_r`.
    pub fn new(mode: CoordMode, n: usize, r: u32) -> Result<Self> {
        if n == 0 || r > 10 || n > (1usize << r) - 1 {
            return Err(Error::InvalidArgument(format!(
                "dimension n = {n} needs 1 <= n <= 2^r - 1 (r = {r})"
            )));
        }
        Ok(KernelSpec { mode, n, r, zeta: CdNumber::zero(r), active: None })
    }

    /// Kernel over the smallest algebra holding `n` imaginary generators.
    pub fn minimal(mode: CoordMode, n: usize) -> Result<Self> {
        Self::new(mode, n, Self::minimal_level(n))
    }

    /// Smallest `r` with `2^{r-1} <= n <= 2^r - 1`.
    pub fn minimal_level(n: usize) -> u32 {
        (usize::BITS - n.leading_zeros()).max(1)
    }

    pub fn mode(&self) -> CoordMode {
        self.mode
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn r(&self) -> u32 {
        self.r
    }

    /// `2^r`.
    pub fn dim(&self) -> usize {
        1 << self.r
    }

    pub fn zeta(&self) -> &CdNumber {
        &self.zeta
    }

    pub fn active(&self) -> Option<&[usize]> {
        self.active.as_deref()
    }

    pub fn is_active(&self, axis: usize) -> bool {
        match &self.active {
            None => axis >= 1 && axis <= self.n,
            Some(a) => a.contains(&axis),
        }
    }

    /// Derived spec with another phase; components above `zeta_n` are dropped.
    pub fn with_zeta(&self, zeta: &CdNumber) -> Result<Self> {
        if zeta.level() > self.r {
            return Err(Error::LevelMismatch(zeta.level(), self.r));
        }
        let mut z = zeta.promote(self.r)?;
        self.mask_coords(z.coords_mut());
        Ok(KernelSpec { zeta: z, ..self.clone() })
    }

    /// Derived spec with `zeta_j` replaced by `zeta_j - m_j pi/2` for `j = 1..=n`.
    pub fn shifted(&self, m: &[f64]) -> Self {
        let mut z = self.zeta.clone();
        for (j, mj) in m.iter().enumerate().take(self.n) {
            z[j + 1] -= mj * FRAC_PI_2;
        }
        self.mask_coords(z.coords_mut());
        KernelSpec { zeta: z, ..self.clone() }
    }

    /// Derived spec with `zeta` increased by `delta` (any level up to `r`).
    pub fn zeta_added(&self, delta: &CdNumber) -> Self {
        let mut z = &self.zeta + delta;
        self.mask_coords(z.coords_mut());
        KernelSpec { zeta: z, ..self.clone() }
    }

    /// Restricted transform over the listed axes only; the other `t_m`, `p_m`,
    /// `zeta_m` are held at zero.
    pub fn with_active(&self, axes: Vec<usize>) -> Result<Self> {
        if axes.is_empty() || axes.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidArgument(
                "active axes must be a non-empty strictly increasing list".into(),
            ));
        }
        if axes.iter().any(|&a| a == 0 || a > self.n) {
            return Err(Error::InvalidArgument(format!("active axes must lie in 1..={}", self.n)));
        }
        let mut spec = KernelSpec { active: Some(axes), ..self.clone() };
        let mut z = spec.zeta.clone();
        spec.mask_coords(z.coords_mut());
        spec.zeta = z;
        Ok(spec)
    }

    /// Zeroes coordinates `j` that are inactive or above `n` (keeps `j = 0`).
    fn mask_coords(&self, c: &mut [f64]) {
        for (j, v) in c.iter_mut().enumerate().skip(1) {
            if !self.is_active(j) {
                *v = 0.0;
            }
        }
    }

    /// `p` as masked coordinates of length `2^r`.
    pub fn masked_p(&self, p: &CdNumber) -> Result<Vec<f64>> {
        if p.level() > self.r {
            return Err(Error::LevelMismatch(p.level(), self.r));
        }
        let mut c = p.promote(self.r)?.into_coords();
        self.mask_coords(&mut c);
        Ok(c)
    }

    fn masked_t(&self, t: &[f64]) -> Vec<f64> {
        let mut tt = t.to_vec();
        if self.active.is_some() {
            for (k, v) in tt.iter_mut().enumerate() {
                if !self.is_active(k + 1) {
                    *v = 0.0;
                }
            }
        }
        tt
    }

    fn check_t(&self, t: &[f64]) -> Result<()> {
        if t.len() != self.n {
            return Err(Error::Dimension { expected: self.n, got: t.len() });
        }
        Ok(())
    }

    /// `u(p,t;zeta)` in the configured coordinates.
    pub fn u(&self, p: &CdNumber, t: &[f64]) -> Result<CdNumber> {
        self.check_t(t)?;
        let pc = self.masked_p(p)?;
        let t = self.masked_t(t);
        let s = partial_sums(&t);
        let z = self.zeta.coords();
        let mut u = vec![0.0; self.dim()];
        u[0] = pc[0] * s[0] + z[0];
        match self.mode {
            CoordMode::Cartesian => {
                for j in 1..=self.n {
                    u[j] = pc[j] * t[j - 1] + z[j];
                }
            }
            CoordMode::Spherical => {
                let rho = pc[1] * s[0] + z[1];
                let mut prod = rho;
                for k in 1..self.n {
                    let phi = pc[k + 1] * s[k] + z[k + 1];
                    u[k] = prod * phi.cos();
                    prod *= phi.sin();
                }
                u[self.n] = prod;
            }
        }
        CdNumber::from_coords(u)
    }

    /// `exp(-u(p,t;zeta))`.
    pub fn exp_neg_u(&self, p: &CdNumber, t: &[f64]) -> Result<CdNumber> {
        self.check_t(t)?;
        let pc = self.masked_p(p)?;
        let mut out = vec![0.0; self.dim()];
        self.kernel_into(&pc, &self.masked_t(t), &mut out);
        CdNumber::from_coords(out)
    }

    /// Kernel value into `out`, with `p` given as masked coordinates and
    /// `t` already masked. No validation; used by quadrature loops.
    pub fn kernel_into(&self, p: &[f64], t: &[f64], out: &mut [f64]) {
        let n = self.n;
        let z = self.zeta.coords();
        out.iter_mut().for_each(|o| *o = 0.0);
        let s1: f64 = t.iter().sum();
        let scale = (-p[0] * s1 - z[0]).exp();
        match self.mode {
            CoordMode::Cartesian => {
                let mut w = vec![0.0; out.len()];
                for j in 1..=n {
                    w[j] = -(p[j] * t[j - 1] + z[j]);
                }
                exp_into(&w, out);
                out.iter_mut().for_each(|o| *o *= scale);
            }
            CoordMode::Spherical => {
                let mut s = s1;
                let mut angles = [0.0f64; 16];
                let angles: &mut [f64] = if n <= 16 { &mut angles[..n] } else { unreachable!() };
                angles[0] = p[1] * s + z[1];
                for k in 1..n {
                    s -= t[k - 1];
                    angles[k] = p[k + 1] * s + z[k + 1];
                }
                spherical_components(scale, angles, &[], out);
            }
        }
    }
}

/// Kernel components from the angles `theta_1 = rho, theta_j = phi_j`:
/// `K_0 = e cos rho`, `K_k = -e sin rho sin phi_2..sin phi_k cos phi_{k+1}`,
/// `K_n = -e sin rho sin phi_2..sin phi_n`. Each angle is shifted by
/// `-shift_j pi/2` (quarter periods, exact trigonometry).
fn spherical_components(scale: f64, angles: &[f64], shift: &[u32], out: &mut [f64]) {
    let n = angles.len();
    let q = |j: usize| shift.get(j).copied().unwrap_or(0);
    let (c0, s0) = shifted_cos_sin(angles[0], q(0));
    out[0] = scale * c0;
    let mut prod = -scale * s0;
    for k in 1..n {
        let (c, s) = shifted_cos_sin(angles[k], q(k));
        out[k] = prod * c;
        prod *= s;
    }
    out[n] = prod;
}

/// `(cos(x - m pi/2), sin(x - m pi/2))`.
#[inline]
fn shifted_cos_sin(x: f64, m: u32) -> (f64, f64) {
    let (s, c) = x.sin_cos();
    match m % 4 {
        0 => (c, s),
        1 => (s, -c),
        2 => (-c, -s),
        _ => (-s, c),
    }
}

/// `s_j = t_j + ... + t_n`.
pub fn partial_sums(t: &[f64]) -> Vec<f64> {
    let mut s = vec![0.0; t.len()];
    let mut acc = 0.0;
    for k in (0..t.len()).rev() {
        acc += t[k];
        s[k] = acc;
    }
    s
}

/// A polynomial `sum_alpha c_alpha S^alpha` in the commuting operators
/// `S_1..S_n` with real coefficients. Exponent vectors are 0-based
/// (`alpha[j-1]` is the power of `S_j`).
#[derive(Clone, Debug, PartialEq)]
pub struct SPoly {
    n: usize,
    terms: BTreeMap<Vec<u32>, f64>,
}

impl SPoly {
    pub fn zero(n: usize) -> Self {
        SPoly { n, terms: BTreeMap::new() }
    }

    pub fn scalar(n: usize, c: f64) -> Self {
        Self::monomial(n, vec![0; n], c)
    }

    pub fn identity(n: usize) -> Self {
        Self::scalar(n, 1.0)
    }

    pub fn monomial(n: usize, alpha: Vec<u32>, c: f64) -> Self {
        assert_eq!(alpha.len(), n);
        let mut terms = BTreeMap::new();
        if c != 0.0 {
            terms.insert(alpha, c);
        }
        SPoly { n, terms }
    }

    /// `S_j^x` (1-based axis).
    pub fn s_power(n: usize, j: usize, x: u32) -> Self {
        let mut a = vec![0; n];
        a[j - 1] = x;
        Self::monomial(n, a, 1.0)
    }

    /// `R_{e_j}(p)`: `p_0 + sum_{k<=j} p_k S_k` (spherical) or `p_0 + p_j S_j` (Cartesian).
    pub fn r_operator(spec: &KernelSpec, j: usize, p: &[f64]) -> Self {
        let n = spec.n();
        let mut poly = Self::scalar(n, p[0]);
        let range = match spec.mode() {
            CoordMode::Spherical => 1..=j,
            CoordMode::Cartesian => j..=j,
        };
        for k in range {
            poly = poly.add(&Self::s_power(n, k, 1).scale(p[k]));
        }
        poly
    }

    /// `R^{m} = prod_j R_{e_j}^{m_j}` for a 0-based exponent vector `m`.
    pub fn r_monomial(spec: &KernelSpec, m: &[u32], p: &[f64]) -> Self {
        let mut poly = Self::identity(spec.n());
        for (k, &e) in m.iter().enumerate() {
            if e > 0 {
                poly = poly.mul(&Self::r_operator(spec, k + 1, p).pow(e));
            }
        }
        poly
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u32>, &f64)> {
        self.terms.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.terms.keys().map(|a| a.iter().sum()).max().unwrap_or(0)
    }

    pub fn coeff(&self, alpha: &[u32]) -> f64 {
        self.terms.get(alpha).copied().unwrap_or(0.0)
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut terms = self.terms.clone();
        for (a, c) in &other.terms {
            let e = terms.entry(a.clone()).or_insert(0.0);
            *e += c;
        }
        terms.retain(|_, c| *c != 0.0);
        SPoly { n: self.n, terms }
    }

    pub fn scale(&self, s: f64) -> Self {
        let mut terms: BTreeMap<_, _> = self.terms.iter().map(|(a, c)| (a.clone(), c * s)).collect();
        terms.retain(|_, c| *c != 0.0);
        SPoly { n: self.n, terms }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut terms = BTreeMap::new();
        for (a, ca) in &self.terms {
            for (b, cb) in &other.terms {
                let k: Vec<u32> = a.iter().zip(b).map(|(x, y)| x + y).collect();
                *terms.entry(k).or_insert(0.0) += ca * cb;
            }
        }
        terms.retain(|_, c: &mut f64| *c != 0.0);
        SPoly { n: self.n, terms }
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut out = Self::identity(self.n);
        for _ in 0..e {
            out = out.mul(self);
        }
        out
    }

    /// Keeps only terms whose exponents vanish above axis `w` (1-based), the
    /// restriction `p_b = 0 for b > w`.
    pub fn truncate_axes(&self, w: usize) -> Self {
        let mut terms = self.terms.clone();
        terms.retain(|a, _| a[w..].iter().all(|&e| e == 0));
        SPoly { n: self.n, terms }
    }
}

/// Evaluates `sum_alpha c_alpha S^alpha exp(-u(p,t;zeta))` at quadrature nodes.
///
/// Spherical mode: every kernel component is a product of single-angle
/// factors, so `S_j` shifts `phi_j` by a quarter period in the components
/// depending on it and annihilates the others; this is the exact
/// `-d/dzeta_j`. Cartesian mode: the derivative of the radial kernel is taken
/// from a truncated Taylor jet in the phase variables.
#[derive(Clone, Debug)]
pub struct KernelOp {
    spec: KernelSpec,
    poly: SPoly,
    jets: Option<JetSpace>,
}

impl KernelOp {
    pub fn new(spec: &KernelSpec, poly: SPoly) -> Self {
        let jets = match spec.mode() {
            CoordMode::Cartesian if poly.degree() > 0 => {
                Some(JetSpace::new(spec.n(), poly.degree()))
            }
            _ => None,
        };
        KernelOp { spec: spec.clone(), poly, jets }
    }

    pub fn identity(spec: &KernelSpec) -> Self {
        Self::new(spec, SPoly::identity(spec.n()))
    }

    pub fn spec(&self) -> &KernelSpec {
        &self.spec
    }

    pub fn poly(&self) -> &SPoly {
        &self.poly
    }

    /// `p` masked coordinates, `t` of length `n` (masked by the caller when restricted).
    pub fn eval_into(&self, p: &[f64], t: &[f64], out: &mut [f64]) {
        let spec = &self.spec;
        let n = spec.n();
        if self.poly.degree() == 0 {
            spec.kernel_into(p, t, out);
            let c = self.poly.coeff(&vec![0; n]);
            out.iter_mut().for_each(|o| *o *= c);
            return;
        }
        let z = spec.zeta.coords();
        let s1: f64 = t.iter().sum();
        let scale = (-p[0] * s1 - z[0]).exp();
        out.iter_mut().for_each(|o| *o = 0.0);
        match spec.mode() {
            CoordMode::Spherical => {
                let mut angles = vec![0.0; n];
                let mut s = s1;
                angles[0] = p[1] * s + z[1];
                for k in 1..n {
                    s -= t[k - 1];
                    angles[k] = p[k + 1] * s + z[k + 1];
                }
                let mut buf = vec![0.0; n + 1];
                for (alpha, c) in self.poly.terms() {
                    spherical_components(scale * c, &angles, alpha, &mut buf);
                    // components not depending on an axis with alpha_j > 0 vanish
                    let top = alpha.iter().rposition(|&e| e > 0).map(|j| j + 1).unwrap_or(0);
                    for (k, b) in buf.iter().enumerate() {
                        let reach = if k == 0 { 1 } else if k < n { k + 1 } else { n };
                        if top <= reach {
                            out[k] += b;
                        }
                    }
                }
            }
            CoordMode::Cartesian => {
                let js = self.jets.as_ref().expect("jet space");
                let mut v = vec![0.0; n];
                for j in 1..=n {
                    v[j - 1] = p[j] * t[j - 1] + z[j];
                }
                let x0: f64 = v.iter().map(|a| a * a).sum();
                // x(eps) = sum (v_j + eps_j)^2
                let mut delta = js.constant(0.0);
                let lin: Vec<_> = (0..n).map(|j| js.variable(j, v[j])).collect();
                for l in &lin {
                    let sq = js.mul(l, l);
                    for (d, s) in delta.iter_mut().zip(&sq) {
                        *d += s;
                    }
                }
                delta[0] -= x0;
                let (g0, g1) = radial_derivs(x0, js.deg as usize);
                let g0j = js.compose(&g0, &delta);
                let g1j = js.compose(&g1, &delta);
                let comps: Vec<Vec<f64>> = lin.iter().map(|l| js.mul(l, &g1j)).collect();
                for (alpha, c) in self.poly.terms() {
                    let pos = js.position(alpha).expect("monomial within jet degree");
                    let order: u32 = alpha.iter().sum();
                    let fact: f64 = alpha.iter().map(|&e| (1..=e).product::<u32>() as f64).product();
                    let sign = if order % 2 == 0 { 1.0 } else { -1.0 };
                    let w = scale * c * sign * fact;
                    out[0] += w * g0j[pos];
                    for j in 0..n {
                        out[j + 1] -= w * comps[j][pos];
                    }
                }
            }
        }
    }

    pub fn eval(&self, p: &CdNumber, t: &[f64]) -> Result<CdNumber> {
        self.spec.check_t(t)?;
        let pc = self.spec.masked_p(p)?;
        let mut out = vec![0.0; self.spec.dim()];
        self.eval_into(&pc, &self.spec.masked_t(t), &mut out);
        CdNumber::from_coords(out)
    }
}
