//! Function-originals `f: R^n -> A_r`, their supports, growth and Hölder
//! metadata, and a small library of closed-form test originals.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::algebra::CdNumber;
use crate::error::{Error, Result};

pub type EvalFn = Arc<dyn Fn(&[f64]) -> CdNumber + Send + Sync>;
/// `(alpha, t) -> d^alpha f / dt^alpha (t)` for `|alpha| <= smoothness`.
pub type DerivFn = Arc<dyn Fn(&[u32], &[f64]) -> CdNumber + Send + Sync>;

/// Where an original may be nonzero.
#[derive(Clone, Debug, PartialEq)]
pub enum SupportSpec {
    WholeSpace,
    /// `U_v = {t : v_j t_j >= 0}` with `v_j = +-1`.
    Quadrant(Vec<i8>),
    /// `prod [a_j, b_j]`, infinite bounds allowed.
    Box(Vec<(f64, f64)>),
}

impl SupportSpec {
    /// The positive quadrant `U_{1,...,1}`.
    pub fn positive(n: usize) -> Self {
        SupportSpec::Quadrant(vec![1; n])
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        match self {
            SupportSpec::WholeSpace => Ok(()),
            SupportSpec::Quadrant(v) => {
                if v.len() != n {
                    return Err(Error::Dimension { expected: n, got: v.len() });
                }
                if v.iter().any(|&s| s != 1 && s != -1) {
                    return Err(Error::InvalidArgument("quadrant signs must be +1 or -1".into()));
                }
                Ok(())
            }
            SupportSpec::Box(b) => {
                if b.len() != n {
                    return Err(Error::Dimension { expected: n, got: b.len() });
                }
                if b.iter().any(|&(lo, hi)| !(lo < hi) || lo.is_nan() || hi.is_nan()) {
                    return Err(Error::InvalidArgument("box bounds need a_j < b_j".into()));
                }
                Ok(())
            }
        }
    }

    /// Per-axis interval `[lo, hi]`.
    pub fn bounds(&self, n: usize) -> Vec<(f64, f64)> {
        match self {
            SupportSpec::WholeSpace => vec![(f64::NEG_INFINITY, f64::INFINITY); n],
            SupportSpec::Quadrant(v) => v
                .iter()
                .map(|&s| if s > 0 { (0.0, f64::INFINITY) } else { (f64::NEG_INFINITY, 0.0) })
                .collect(),
            SupportSpec::Box(b) => b.clone(),
        }
    }

    pub fn contains(&self, t: &[f64]) -> bool {
        match self {
            SupportSpec::WholeSpace => true,
            SupportSpec::Quadrant(v) => v.iter().zip(t).all(|(&s, &x)| s as f64 * x >= 0.0),
            SupportSpec::Box(b) => b.iter().zip(t).all(|(&(lo, hi), &x)| x >= lo && x <= hi),
        }
    }

    /// Intersection, expressed as a box.
    pub fn intersect(&self, other: &Self, n: usize) -> Self {
        let a = self.bounds(n);
        let b = other.bounds(n);
        SupportSpec::Box(a.iter().zip(&b).map(|(x, y)| (x.0.max(y.0), x.1.min(y.1))).collect())
    }
}

/// Growth bound `|f(t)| <= C exp(a_1 s_1)` for `s_1 >= 0` and
/// `|f(t)| <= C exp(a_{-1} s_1)` for `s_1 < 0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Growth {
    pub a1: f64,
    pub a_neg1: f64,
    pub c: f64,
}

impl Growth {
    pub fn new(a1: f64, a_neg1: f64, c: f64) -> Self {
        Growth { a1, a_neg1, c }
    }

    /// Decay faster than any exponential in every direction.
    pub fn rapid() -> Self {
        Growth { a1: f64::NEG_INFINITY, a_neg1: f64::INFINITY, c: 1.0 }
    }

    pub fn strip(&self) -> (f64, f64) {
        (self.a1, self.a_neg1)
    }
}

/// Hölder exponents and constants per axis (metadata only).
#[derive(Clone, Debug, PartialEq)]
pub struct Holder {
    pub alpha: Vec<f64>,
    pub a: Vec<f64>,
}

/// A function-original together with its metadata.
#[derive(Clone)]
pub struct OriginalFn {
    name: String,
    n: usize,
    level: u32,
    eval: EvalFn,
    deriv: Option<DerivFn>,
    smoothness: u32,
    support: SupportSpec,
    growth: Growth,
    holder: Holder,
    extent: Option<Vec<(f64, f64)>>,
    s_extent: Option<Vec<(f64, f64)>>,
    breaks: Option<Vec<Vec<f64>>>,
}

impl fmt::Debug for OriginalFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("OriginalFn")
            .field("name", &self.name)
            .field("n", &self.n)
            .field("level", &self.level)
            .field("support", &self.support)
            .field("growth", &self.growth)
            .field("smoothness", &self.smoothness)
            .finish()
    }
}

impl OriginalFn {
    pub fn new(
        n: usize,
        level: u32,
        support: SupportSpec,
        growth: Growth,
        eval: impl Fn(&[f64]) -> CdNumber + Send + Sync + 'static,
    ) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("originals need n >= 1".into()));
        }
        support.validate(n)?;
        if !(growth.a1 < growth.a_neg1) {
            return Err(Error::InvalidArgument(format!(
                "empty strip: a_1 = {} must be below a_-1 = {}",
                growth.a1, growth.a_neg1
            )));
        }
        Ok(OriginalFn {
            name: "custom".into(),
            n,
            level,
            eval: Arc::new(eval),
            deriv: None,
            smoothness: 0,
            support,
            growth,
            holder: Holder { alpha: vec![1.0; n], a: vec![f64::NAN; n] },
            extent: None,
            s_extent: None,
            breaks: None,
        })
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    /// Attaches exact derivatives up to total order `smoothness`.
    pub fn with_derivatives(
        mut self,
        smoothness: u32,
        deriv: impl Fn(&[u32], &[f64]) -> CdNumber + Send + Sync + 'static,
    ) -> Self {
        self.smoothness = smoothness;
        self.deriv = Some(Arc::new(deriv));
        self
    }

    pub fn with_holder(mut self, holder: Holder) -> Self {
        self.holder = holder;
        self
    }

    /// Box outside of which `f` is negligible (used to truncate quadrature).
    pub fn with_extent(mut self, extent: Vec<(f64, f64)>) -> Self {
        self.extent = Some(extent);
        self
    }

    /// Same hint in the partial sums `s_k = t_k + ... + t_n`.
    pub fn with_s_extent(mut self, s_extent: Vec<(f64, f64)>) -> Self {
        self.s_extent = Some(s_extent);
        self
    }

    /// Per-axis points where `f` or a derivative jumps; quadrature panels
    /// are split there.
    pub fn with_breakpoints(mut self, breaks: Vec<Vec<f64>>) -> Self {
        self.breaks = Some(breaks);
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn support(&self) -> &SupportSpec {
        &self.support
    }

    pub fn growth(&self) -> Growth {
        self.growth
    }

    pub fn holder(&self) -> &Holder {
        &self.holder
    }

    pub fn smoothness(&self) -> u32 {
        self.smoothness
    }

    pub fn extent(&self) -> Option<&[(f64, f64)]> {
        self.extent.as_deref()
    }

    pub fn s_extent(&self) -> Option<&[(f64, f64)]> {
        self.s_extent.as_deref()
    }

    /// Breakpoints on the 0-based axis `j`.
    pub fn breakpoints(&self, j: usize) -> &[f64] {
        self.breaks.as_ref().and_then(|b| b.get(j)).map(|v| v.as_slice()).unwrap_or(&[])
    }

    pub fn strip(&self) -> (f64, f64) {
        self.growth.strip()
    }

    /// `f(t) chi_support(t)`.
    pub fn eval(&self, t: &[f64]) -> CdNumber {
        if self.support.contains(t) {
            (self.eval)(t)
        } else {
            CdNumber::zero(self.level)
        }
    }

    /// The underlying expression without the support indicator.
    pub fn eval_raw(&self, t: &[f64]) -> CdNumber {
        (self.eval)(t)
    }

    pub fn has_derivative(&self, alpha: &[u32]) -> bool {
        let order: u32 = alpha.iter().sum();
        order == 0 || (self.deriv.is_some() && order <= self.smoothness)
    }

    /// `d^alpha f / dt^alpha (t)` on the support (one-sided at its boundary).
    pub fn deriv_at(&self, alpha: &[u32], t: &[f64]) -> Result<CdNumber> {
        if alpha.len() != self.n {
            return Err(Error::Dimension { expected: self.n, got: alpha.len() });
        }
        if alpha.iter().all(|&a| a == 0) {
            return Ok(self.eval_raw(t));
        }
        match &self.deriv {
            Some(d) if alpha.iter().sum::<u32>() <= self.smoothness => Ok(d(alpha, t)),
            _ => Err(Error::Unsupported(format!(
                "derivative {alpha:?} of '{}' is not available",
                self.name
            ))),
        }
    }

    /// The original `d^alpha f / dt^alpha`, restricted to the same support.
    pub fn derivative(&self, alpha: &[u32]) -> Result<OriginalFn> {
        if !self.has_derivative(alpha) {
            return Err(Error::Unsupported(format!(
                "derivative {alpha:?} of '{}' is not available",
                self.name
            )));
        }
        let order: u32 = alpha.iter().sum();
        let base = alpha.to_vec();
        let me = self.clone();
        let eval = move |t: &[f64]| me.deriv_at(&base, t).expect("checked derivative");
        let mut out = OriginalFn {
            name: format!("d{alpha:?} {}", self.name),
            eval: Arc::new(eval),
            deriv: None,
            smoothness: self.smoothness - order.min(self.smoothness),
            ..self.clone()
        };
        if let Some(d) = self.deriv.clone() {
            let base = alpha.to_vec();
            out.deriv = Some(Arc::new(move |b: &[u32], t: &[f64]| {
                let s: Vec<u32> = base.iter().zip(b).map(|(x, y)| x + y).collect();
                d(&s, t)
            }));
        }
        Ok(out)
    }

    /// `d^beta f / ds^beta` for the partial sums `s_k = t_k + ... + t_n`,
    /// via `d/ds_1 = d/dt_1` and `d/ds_k = d/dt_k - d/dt_{k-1}`.
    pub fn s_derivative(&self, beta: &[u32]) -> Result<OriginalFn> {
        let terms = s_to_t_derivative(beta);
        let mut parts = Vec::new();
        for (alpha, c) in &terms {
            parts.push((c * 1.0, self.derivative(alpha)?));
        }
        let level = self.level;
        let eval_parts = parts.clone();
        let eval = move |t: &[f64]| {
            let mut acc = CdNumber::zero(level);
            for (c, g) in &eval_parts {
                acc += &(g.eval_raw(t) * *c);
            }
            acc
        };
        Ok(OriginalFn {
            name: format!("ds{beta:?} {}", self.name),
            eval: Arc::new(eval),
            deriv: None,
            smoothness: 0,
            ..self.clone()
        })
    }

    /// `a f + b g` (same dimension and level). The support is the common one,
    /// or the whole space with both indicators kept inside the expression.
    pub fn combine(a: f64, f: &OriginalFn, b: f64, g: &OriginalFn) -> Result<OriginalFn> {
        if f.n != g.n {
            return Err(Error::Dimension { expected: f.n, got: g.n });
        }
        if f.level != g.level {
            return Err(Error::LevelMismatch(f.level, g.level));
        }
        let same = f.support == g.support;
        let (f2, g2) = (f.clone(), g.clone());
        let eval = move |t: &[f64]| {
            if same {
                &(f2.eval_raw(t) * a) + &(g2.eval_raw(t) * b)
            } else {
                &(f2.eval(t) * a) + &(g2.eval(t) * b)
            }
        };
        let growth = Growth {
            a1: f.growth.a1.max(g.growth.a1),
            a_neg1: f.growth.a_neg1.min(g.growth.a_neg1),
            c: a.abs() * f.growth.c + b.abs() * g.growth.c,
        };
        let support = if same { f.support.clone() } else { SupportSpec::WholeSpace };
        let mut out = OriginalFn::new(f.n, f.level, support, growth, eval)?
            .with_name(format!("{a}*{} + {b}*{}", f.name, g.name));
        if let (Some(df), Some(dg)) = (f.deriv.clone(), g.deriv.clone()) {
            if same {
                out = out.with_derivatives(f.smoothness.min(g.smoothness), move |al, t| {
                    &(df(al, t) * a) + &(dg(al, t) * b)
                });
            }
        }
        if let (Some(ef), Some(eg)) = (&f.extent, &g.extent) {
            out.extent = Some(ef.iter().zip(eg).map(|(x, y)| (x.0.min(y.0), x.1.max(y.1))).collect());
        }
        if let (Some(ef), Some(eg)) = (&f.s_extent, &g.s_extent) {
            out.s_extent = Some(ef.iter().zip(eg).map(|(x, y)| (x.0.min(y.0), x.1.max(y.1))).collect());
        }
        Ok(out)
    }

    /// `f(alpha t)` for `alpha > 0`.
    pub fn scaled(&self, alpha: f64) -> Result<OriginalFn> {
        if !(alpha > 0.0) {
            return Err(Error::InvalidArgument("scale factor must be positive".into()));
        }
        let me = self.clone();
        let eval = move |t: &[f64]| {
            let u: Vec<f64> = t.iter().map(|x| alpha * x).collect();
            me.eval_raw(&u)
        };
        let support = match &self.support {
            SupportSpec::Box(b) => SupportSpec::Box(b.iter().map(|&(lo, hi)| (lo / alpha, hi / alpha)).collect()),
            other => other.clone(),
        };
        let growth = Growth { a1: self.growth.a1 * alpha, a_neg1: self.growth.a_neg1 * alpha, c: self.growth.c };
        let mut out = OriginalFn {
            name: format!("{}(({alpha})t)", self.name),
            eval: Arc::new(eval),
            deriv: None,
            smoothness: 0,
            support,
            growth,
            extent: self.extent.as_ref().map(|e| e.iter().map(|&(lo, hi)| (lo / alpha, hi / alpha)).collect()),
            s_extent: self.s_extent.as_ref().map(|e| e.iter().map(|&(lo, hi)| (lo / alpha, hi / alpha)).collect()),
            ..self.clone()
        };
        if let Some(d) = self.deriv.clone() {
            out.smoothness = self.smoothness;
            out.deriv = Some(Arc::new(move |al: &[u32], t: &[f64]| {
                let u: Vec<f64> = t.iter().map(|x| alpha * x).collect();
                d(al, &u) * alpha.powi(al.iter().sum::<u32>() as i32)
            }));
        }
        Ok(out)
    }

    /// `f(t - tau)`.
    pub fn shifted(&self, tau: &[f64]) -> Result<OriginalFn> {
        if tau.len() != self.n {
            return Err(Error::Dimension { expected: self.n, got: tau.len() });
        }
        let tau = tau.to_vec();
        let me = self.clone();
        let tt = tau.clone();
        let eval = move |t: &[f64]| {
            let u: Vec<f64> = t.iter().zip(&tt).map(|(x, y)| x - y).collect();
            me.eval_raw(&u)
        };
        let support = match &self.support {
            SupportSpec::WholeSpace => SupportSpec::WholeSpace,
            s => SupportSpec::Box(s.bounds(self.n).iter().zip(&tau).map(|(&(lo, hi), x)| (lo + x, hi + x)).collect()),
        };
        // |f(t - tau)| <= C e^{a (s_1 - sigma)} with sigma = s_1(tau)
        let sigma: f64 = tau.iter().sum();
        let mut c = self.growth.c;
        for a in [self.growth.a1, self.growth.a_neg1] {
            if a.is_finite() {
                c = c.max(self.growth.c * (-a * sigma).exp());
            }
        }
        let mut out = OriginalFn {
            name: format!("{}(t - tau)", self.name),
            eval: Arc::new(eval),
            deriv: None,
            smoothness: 0,
            support,
            growth: Growth { c, ..self.growth },
            extent: self.extent.as_ref().map(|e| e.iter().zip(&tau).map(|(&(lo, hi), x)| (lo + x, hi + x)).collect()),
            s_extent: self.s_extent.as_ref().map(|e| {
                let st = crate::kernel::partial_sums(&tau);
                e.iter().zip(&st).map(|(&(lo, hi), x)| (lo + x, hi + x)).collect()
            }),
            ..self.clone()
        };
        if let Some(d) = self.deriv.clone() {
            out.smoothness = self.smoothness;
            out.deriv = Some(Arc::new(move |al: &[u32], t: &[f64]| {
                let u: Vec<f64> = t.iter().zip(&tau).map(|(x, y)| x - y).collect();
                d(al, &u)
            }));
        }
        Ok(out)
    }

    /// `e^{b s_1} f(t)`.
    pub fn exp_weighted(&self, b: f64) -> OriginalFn {
        let me = self.clone();
        let eval = move |t: &[f64]| me.eval_raw(t) * (b * t.iter().sum::<f64>()).exp();
        let mut out = OriginalFn {
            name: format!("e^({b} s1) {}", self.name),
            eval: Arc::new(eval),
            deriv: None,
            smoothness: 0,
            growth: Growth { a1: self.growth.a1 + b, a_neg1: self.growth.a_neg1 + b, c: self.growth.c },
            ..self.clone()
        };
        if let Some(d) = self.deriv.clone() {
            let level = self.level;
            out.smoothness = self.smoothness;
            out.deriv = Some(Arc::new(move |al: &[u32], t: &[f64]| {
                // Leibniz: sum_{beta <= alpha} C(alpha, beta) b^{|alpha - beta|} d^beta f
                let mut acc = CdNumber::zero(level);
                for beta in sub_indices(al) {
                    let mut c = 1.0;
                    for (a, bb) in al.iter().zip(&beta) {
                        c *= binomial(*a, *bb) * b.powi((a - bb) as i32);
                    }
                    acc += &(d(&beta, t) * c);
                }
                acc * (b * t.iter().sum::<f64>()).exp()
            }));
        }
        out
    }

    /// `t_j f(t)` (`spherical = false`) or `s_j f(t)` (`spherical = true`), 1-based `j`.
    pub fn times_coordinate(&self, j: usize, spherical: bool) -> Result<OriginalFn> {
        if j == 0 || j > self.n {
            return Err(Error::InvalidArgument(format!("axis {j} outside 1..={}", self.n)));
        }
        let me = self.clone();
        let eval = move |t: &[f64]| {
            let w = if spherical { t[j - 1..].iter().sum() } else { t[j - 1] };
            me.eval_raw(t) * w
        };
        Ok(OriginalFn {
            name: format!("{}{j} {}", if spherical { "s" } else { "t" }, self.name),
            eval: Arc::new(eval),
            deriv: None,
            smoothness: 0,
            ..self.clone()
        })
    }

    /// Same expression with a new support.
    pub fn restricted(&self, support: SupportSpec) -> Result<OriginalFn> {
        support.validate(self.n)?;
        Ok(OriginalFn { support, ..self.clone() })
    }

    /// Real coordinate `q` of the values.
    pub fn component(&self, q: usize) -> Result<OriginalFn> {
        if q >= 1 << self.level {
            return Err(Error::InvalidArgument(format!("component {q} outside A_{}", self.level)));
        }
        let me = self.clone();
        let level = self.level;
        let eval = move |t: &[f64]| CdNumber::real(level, me.eval_raw(t)[q]);
        let mut out = OriginalFn {
            name: format!("[{}]_{q}", self.name),
            eval: Arc::new(eval),
            deriv: None,
            ..self.clone()
        };
        if let Some(d) = self.deriv.clone() {
            out.deriv = Some(Arc::new(move |al: &[u32], t: &[f64]| CdNumber::real(level, d(al, t)[q])));
        }
        Ok(out)
    }

    /// True when every value lies on the real axis (checked on the extent or a unit box).
    pub fn is_real_valued(&self) -> bool {
        if self.level == 0 {
            return true;
        }
        let bounds = self.sample_box(2.0);
        let mut t = vec![0.0; self.n];
        for k in 0..7usize.pow(self.n.min(3) as u32) {
            let mut idx = k;
            for (j, x) in t.iter_mut().enumerate() {
                let (lo, hi) = bounds[j];
                *x = lo + (hi - lo) * ((idx % 7) as f64 + 0.5) / 7.0;
                idx /= 7;
            }
            if !self.eval_raw(&t).im().coords().iter().all(|&c| c == 0.0) {
                return false;
            }
        }
        true
    }

    fn sample_box(&self, radius: f64) -> Vec<(f64, f64)> {
        let b = self.support.bounds(self.n);
        (0..self.n)
            .map(|j| {
                let (mut lo, mut hi) = self.extent.as_ref().map(|e| e[j]).unwrap_or((-radius, radius));
                lo = lo.max(b[j].0);
                hi = hi.min(b[j].1);
                (lo, hi)
            })
            .collect()
    }
}

/// Expands `d^beta/ds^beta` into t-derivatives: a list of (alpha, coefficient).
pub fn s_to_t_derivative(beta: &[u32]) -> Vec<(Vec<u32>, f64)> {
    let n = beta.len();
    let mut terms: Vec<(Vec<u32>, f64)> = vec![(vec![0; n], 1.0)];
    for (k, &e) in beta.iter().enumerate() {
        for _ in 0..e {
            let mut next: Vec<(Vec<u32>, f64)> = Vec::new();
            let mut push = |a: Vec<u32>, c: f64| {
                if let Some(x) = next.iter_mut().find(|(b, _)| *b == a) {
                    x.1 += c;
                } else {
                    next.push((a, c));
                }
            };
            for (a, c) in &terms {
                let mut a1 = a.clone();
                a1[k] += 1;
                push(a1, *c);
                if k > 0 {
                    let mut a2 = a.clone();
                    a2[k - 1] += 1;
                    push(a2, -c);
                }
            }
            terms = next;
        }
    }
    terms.retain(|(_, c)| *c != 0.0);
    terms
}

/// All multi-indices `beta <= alpha` componentwise.
pub(crate) fn sub_indices(alpha: &[u32]) -> Vec<Vec<u32>> {
    let mut out = vec![Vec::new()];
    for &a in alpha {
        out = out
            .into_iter()
            .flat_map(|v| {
                (0..=a).map(move |b| {
                    let mut w = v.clone();
                    w.push(b);
                    w
                })
            })
            .collect();
    }
    out
}

pub(crate) fn binomial(n: u32, k: u32) -> f64 {
    let mut c = 1.0;
    for i in 0..k {
        c = c * (n - i) as f64 / (i + 1) as f64;
    }
    c
}

/// One-dimensional factor of a separable standard original.
#[derive(Clone, Copy, Debug, PartialEq)]
enum Factor {
    One,
    Exp { b: f64 },
    PolyExp { m: u32, b: f64 },
    Gauss { c: f64, w: f64, norm: f64 },
    SinExp { b: f64, omega: f64, phase: f64 },
}

impl Factor {
    fn deriv(&self, k: u32, x: f64) -> f64 {
        match *self {
            Factor::One => {
                if k == 0 {
                    1.0
                } else {
                    0.0
                }
            }
            Factor::Exp { b } => (-b).powi(k as i32) * (-b * x).exp(),
            Factor::PolyExp { m, b } => {
                let mut acc = 0.0;
                let mut falling = 1.0;
                for i in 0..=k.min(m) {
                    acc += binomial(k, i) * falling * x.powi((m - i) as i32) * (-b).powi((k - i) as i32);
                    falling *= (m - i) as f64;
                }
                acc * (-b * x).exp()
            }
            Factor::Gauss { c, w, norm } => {
                let y = (x - c) / w;
                let (mut h0, mut h1) = (1.0, y);
                let he = if k == 0 {
                    1.0
                } else {
                    for q in 1..k {
                        let h2 = y * h1 - q as f64 * h0;
                        h0 = h1;
                        h1 = h2;
                    }
                    h1
                };
                norm * (-1.0f64 / w).powi(k as i32) * he * (-0.5 * y * y).exp()
            }
            Factor::SinExp { b, omega, phase } => {
                let z = Complex64::new(-b, omega);
                (z.powu(k) * (z * x).exp() * Complex64::from_polar(1.0, phase)).im
            }
        }
    }
}

/// Parameters for [`standard_original`]. Unused fields are ignored.
#[derive(Clone, Debug, PartialEq)]
pub struct OriginalParams {
    pub n: usize,
    /// Algebra level of the values.
    pub level: u32,
    /// Decay rate for `exp_decay`, `poly_exp`, `sine_packet`.
    pub b: f64,
    /// Center (`gaussian`) or location `tau` (`mollified_delta`); zero when empty.
    pub center: Vec<f64>,
    pub width: f64,
    pub degree: u32,
    pub omega: f64,
    pub phase: f64,
    pub eps: f64,
    /// Box for `box_indicator`; `[0,1]^n` when empty.
    pub bounds: Vec<(f64, f64)>,
    /// Constant left factor of the values.
    pub amplitude: Option<CdNumber>,
}

impl OriginalParams {
    pub fn new(n: usize) -> Self {
        OriginalParams {
            n,
            level: 1,
            b: 1.0,
            center: Vec::new(),
            width: 1.0,
            degree: 1,
            omega: 1.0,
            phase: 0.0,
            eps: 1e-2,
            bounds: Vec::new(),
            amplitude: None,
        }
    }
}

/// Names accepted by [`standard_original`].
pub const STANDARD_NAMES: [&str; 6] =
    ["exp_decay", "gaussian", "poly_exp", "box_indicator", "mollified_delta", "sine_packet"];

/// Closed-form originals with exact derivatives and growth data:
///
/// * `exp_decay`: `e^{-b s_1}` on `U_{1..1}`
/// * `gaussian`: `prod exp(-(t_j - c_j)^2 / (2 w^2))` on `R^n`
/// * `poly_exp`: `prod t_j^m e^{-b t_j}` on `U_{1..1}`
/// * `box_indicator`: `1` on a box
/// * `mollified_delta`: normalized product Gaussian of width `eps` at `tau`
/// * `sine_packet`: `prod e^{-b t_j} sin(omega t_j + phase)` on `U_{1..1}`
pub fn standard_original(name: &str, params: &OriginalParams) -> Result<OriginalFn> {
    let n = params.n;
    if n == 0 {
        return Err(Error::InvalidArgument("n must be at least 1".into()));
    }
    let center = if params.center.is_empty() { vec![0.0; n] } else { params.center.clone() };
    if center.len() != n {
        return Err(Error::Dimension { expected: n, got: center.len() });
    }
    let positive = |x: f64, what: &str| -> Result<()> {
        if x > 0.0 && x.is_finite() {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!("{what} must be positive, got {x}")))
        }
    };
    let (factors, support, growth, extent): (Vec<Factor>, SupportSpec, Growth, Option<Vec<(f64, f64)>>) =
        match name {
            "exp_decay" => (
                vec![Factor::Exp { b: params.b }; n],
                SupportSpec::positive(n),
                Growth::new(-params.b, f64::INFINITY, 1.0),
                None,
            ),
            "gaussian" => {
                positive(params.width, "width")?;
                let w = params.width;
                (
                    center.iter().map(|&c| Factor::Gauss { c, w, norm: 1.0 }).collect(),
                    SupportSpec::WholeSpace,
                    Growth::rapid(),
                    Some(center.iter().map(|&c| (c - 9.0 * w, c + 9.0 * w)).collect()),
                )
            }
            "poly_exp" => {
                positive(params.b, "b")?;
                let m = params.degree;
                let b = params.b;
                // x^m e^{-b x} <= (2m/(b e))^m e^{-b x/2}
                let c1 = if m == 0 { 1.0 } else { (2.0 * m as f64 / (b * std::f64::consts::E)).powi(m as i32) };
                (
                    vec![Factor::PolyExp { m, b }; n],
                    SupportSpec::positive(n),
                    Growth::new(-b / 2.0, f64::INFINITY, c1.powi(n as i32)),
                    None,
                )
            }
            "box_indicator" => {
                let bounds = if params.bounds.is_empty() { vec![(0.0, 1.0); n] } else { params.bounds.clone() };
                if bounds.len() != n {
                    return Err(Error::Dimension { expected: n, got: bounds.len() });
                }
                if bounds.iter().any(|b| !b.0.is_finite() || !b.1.is_finite()) {
                    return Err(Error::InvalidArgument("box_indicator needs finite bounds".into()));
                }
                (vec![Factor::One; n], SupportSpec::Box(bounds), Growth::rapid(), None)
            }
            "mollified_delta" => {
                positive(params.eps, "eps")?;
                let w = params.eps;
                let norm = 1.0 / (w * (2.0 * PI).sqrt());
                (
                    center.iter().map(|&c| Factor::Gauss { c, w, norm }).collect(),
                    SupportSpec::WholeSpace,
                    Growth::new(f64::NEG_INFINITY, f64::INFINITY, norm.powi(n as i32)),
                    Some(center.iter().map(|&c| (c - 8.0 * w, c + 8.0 * w)).collect()),
                )
            }
            "sine_packet" => (
                vec![Factor::SinExp { b: params.b, omega: params.omega, phase: params.phase }; n],
                SupportSpec::positive(n),
                Growth::new(-params.b, f64::INFINITY, 1.0),
                None,
            ),
            other => {
                return Err(Error::InvalidArgument(format!(
                    "unknown original '{other}' (expected one of {STANDARD_NAMES:?})"
                )))
            }
        };
    let level = params.level;
    let amp = match &params.amplitude {
        Some(a) => a.promote(level.max(a.level()))?,
        None => CdNumber::one(level),
    };
    let level = amp.level();
    let c = growth.c * amp.norm();
    let fs = factors.clone();
    let a1 = amp.clone();
    let eval = move |t: &[f64]| {
        let v: f64 = fs.iter().zip(t).map(|(f, &x)| f.deriv(0, x)).product();
        a1.clone() * v
    };
    let fs = factors.clone();
    let a2 = amp;
    let deriv = move |alpha: &[u32], t: &[f64]| {
        let v: f64 = fs.iter().zip(alpha).zip(t).map(|((f, &k), &x)| f.deriv(k, x)).product();
        a2.clone() * v
    };
    let holder = Holder { alpha: vec![1.0; n], a: vec![1.0; n] };
    let mut f = OriginalFn::new(n, level, support, Growth { c, ..growth }, eval)?
        .with_name(name)
        .with_derivatives(8, deriv)
        .with_holder(holder);
    f.extent = extent;
    Ok(f)
}

/// Sampling plan for [`validate_original`].
#[derive(Clone, Debug, PartialEq)]
pub struct ValidationPlan {
    /// Half-width of the sampled cube.
    pub radius: f64,
    pub points_per_axis: usize,
    /// Dyadic steps `2^-k`, `k = 4..4+levels`, used for Hölder fits.
    pub holder_levels: u32,
}

impl Default for ValidationPlan {
    fn default() -> Self {
        ValidationPlan { radius: 6.0, points_per_axis: 13, holder_levels: 6 }
    }
}

/// Outcome of [`validate_original`].
#[derive(Clone, Debug, PartialEq)]
pub struct ValidationReport {
    pub strip: (f64, f64),
    pub strip_nonempty: bool,
    /// Samples `t` where `|f(t)|` exceeds the declared bound, with the ratio.
    pub growth_violations: Vec<(Vec<f64>, f64)>,
    /// The fitted exponential rate keeps increasing with the radius.
    pub superexponential: bool,
    /// Estimated Hölder exponent per axis (clamped to `[0, 1]`).
    pub holder_exponents: Vec<f64>,
    pub samples: usize,
}

impl ValidationReport {
    pub fn ok(&self) -> bool {
        self.strip_nonempty && self.growth_violations.is_empty() && !self.superexponential
    }
}

/// Samples `f` to check Condition-style growth and estimate Hölder exponents.
/// Report-only: never fails.
pub fn validate_original(f: &OriginalFn, plan: &ValidationPlan) -> ValidationReport {
    let n = f.n();
    let g = f.growth();
    let bounds = f.support().bounds(n);
    let m = plan.points_per_axis.max(2);
    let ranges: Vec<(f64, f64)> = bounds
        .iter()
        .map(|&(lo, hi)| (lo.max(-plan.radius), hi.min(plan.radius)))
        .collect();
    let total = m.pow(n as u32);
    let mut violations = Vec::new();
    let shells = 4usize;
    let mut shell_rate = vec![f64::NEG_INFINITY; shells];
    let mut t = vec![0.0; n];
    for k in 0..total {
        let mut idx = k;
        for (j, x) in t.iter_mut().enumerate() {
            let (lo, hi) = ranges[j];
            *x = lo + (hi - lo) * (idx % m) as f64 / (m - 1) as f64;
            idx /= m;
        }
        let v = f.eval(&t).norm();
        let s1: f64 = t.iter().sum();
        let a = if s1 >= 0.0 { g.a1 } else { g.a_neg1 };
        if a.is_finite() {
            let bound = g.c * (a * s1).exp();
            if v > bound * (1.0 + 1e-9) + 1e-300 {
                violations.push((t.clone(), v / bound));
            }
        }
        if s1 > 0.5 && v > 0.0 {
            let rate = (v.ln() - g.c.ln()) / s1;
            let sh = (((s1 / (n as f64 * plan.radius)) * shells as f64) as usize).min(shells - 1);
            shell_rate[sh] = shell_rate[sh].max(rate);
        }
    }
    let finite: Vec<f64> = shell_rate.iter().copied().filter(|r| r.is_finite()).collect();
    let superexponential = finite.len() >= 3 && finite.windows(2).all(|w| w[1] > w[0] + 0.5);

    let holder_exponents = (0..n).map(|j| holder_fit(f, j, &ranges, plan.holder_levels)).collect();
    ValidationReport {
        strip: g.strip(),
        strip_nonempty: g.a1 < g.a_neg1,
        growth_violations: violations,
        superexponential,
        holder_exponents,
        samples: total,
    }
}

/// Fits `log max|f(t + h e_j) - f(t)|` against `log h` over dyadic `h`.
fn holder_fit(f: &OriginalFn, j: usize, ranges: &[(f64, f64)], levels: u32) -> f64 {
    let n = f.n();
    let probes = 9usize;
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for k in 4..4 + levels.max(2) {
        let h = 0.5f64.powi(k as i32);
        let mut worst: f64 = 0.0;
        for q in 0..probes {
            let t: Vec<f64> = (0..n)
                .map(|i| {
                    let (lo, hi) = ranges[i];
                    let frac = ((q * (2 * i + 3) + 1) % probes) as f64 / probes as f64;
                    lo + (hi - lo) * (0.1 + 0.8 * frac)
                })
                .collect();
            let mut t2 = t.clone();
            t2[j] += h;
            worst = worst.max((&f.eval(&t2) - &f.eval(&t)).norm());
        }
        if worst > 0.0 {
            xs.push(h.ln());
            ys.push(worst.ln());
        }
    }
    if xs.len() < 2 {
        return 1.0;
    }
    let mx = xs.iter().sum::<f64>() / xs.len() as f64;
    let my = ys.iter().sum::<f64>() / ys.len() as f64;
    let num: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let den: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    (num / den).clamp(0.0, 1.0)
}
