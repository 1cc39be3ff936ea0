//! Forward transform `F^n_u(p;zeta) = int f(t) exp(-u(p,t;zeta)) dt` by tensor
//! quadrature, lazily evaluated images, and the inverse transform.

mod inverse;
pub mod quad;

use std::sync::{Arc, Mutex};

use rayon::prelude::*;

use crate::algebra::{mul_into, CdNumber};
use crate::error::{Error, Result};
use crate::kernel::{KernelOp, KernelSpec, SPoly};
use crate::originals::OriginalFn;
use quad::{composite_gauss_legendre, tanh_sinh, AxisNodes};

pub use inverse::{
    inverse, inverse_batch, phase_resolved_h0, spherical_grid_h0, spherical_points_h0, InverseMethod, InverseSpec, PGrid,
};

/// One-dimensional rule used on every panel of an axis.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum AxisRule {
    GaussLegendre { panels: usize, order: usize },
    TanhSinh { level: u32 },
}

/// Treatment of semi-infinite axes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SemiInfinite {
    /// `t = a - log(1 - x)/mu` with `mu` half the integrand decay rate, then panels on `[0,1]`.
    ExpSubstitution,
    /// Cut where the integrand bound falls below `e^-decay_digits`.
    DirectTruncation,
}

/// Quadrature controls for the forward transform.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadSpec {
    /// Per-axis rules; a single entry applies to every axis.
    pub rules: Vec<AxisRule>,
    /// Largest truncation length per axis (single entry broadcasts).
    pub radius: Vec<f64>,
    /// Truncation length for faster-than-exponential decay without an extent hint.
    pub rapid_radius: f64,
    pub semi_infinite: SemiInfinite,
    /// Refinement stops once `|I_L - I_{L-1}| <= target_tol max(1, |I_L|)`.
    pub target_tol: f64,
    pub max_evals: usize,
    pub decay_digits: f64,
}

impl Default for QuadSpec {
    fn default() -> Self {
        QuadSpec {
            rules: vec![AxisRule::GaussLegendre { panels: 4, order: 12 }],
            radius: vec![80.0],
            rapid_radius: 10.0,
            semi_infinite: SemiInfinite::DirectTruncation,
            target_tol: 1e-10,
            max_evals: 20_000_000,
            decay_digits: 38.0,
        }
    }
}

impl QuadSpec {
    pub fn with_tol(mut self, tol: f64) -> Self {
        self.target_tol = tol;
        self
    }

    pub fn with_rule(mut self, rule: AxisRule) -> Self {
        self.rules = vec![rule];
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.target_tol > 0.0) {
            return Err(Error::InvalidArgument("target_tol must be positive".into()));
        }
        if self.rules.is_empty() || self.radius.is_empty() {
            return Err(Error::InvalidArgument("quadrature rules and radii must be non-empty".into()));
        }
        if self.radius.iter().any(|r| !(*r > 0.0)) || !(self.rapid_radius > 0.0) {
            return Err(Error::InvalidArgument("truncation radii must be positive".into()));
        }
        for r in &self.rules {
            if let AxisRule::GaussLegendre { panels, order } = r {
                if *panels == 0 || *order < 2 {
                    return Err(Error::InvalidArgument("Gauss-Legendre needs panels >= 1, order >= 2".into()));
                }
            }
        }
        Ok(())
    }

    fn rule(&self, j: usize) -> AxisRule {
        self.rules[j.min(self.rules.len() - 1)]
    }

    fn radius(&self, j: usize) -> f64 {
        self.radius[j.min(self.radius.len() - 1)]
    }

    fn finite_nodes(&self, j: usize, lo: f64, hi: f64, level: u32) -> AxisNodes {
        match self.rule(j) {
            AxisRule::GaussLegendre { panels, order } => composite_gauss_legendre(lo, hi, panels << level, order),
            AxisRule::TanhSinh { level: l } => tanh_sinh(lo, hi, l + level),
        }
    }

    /// Nodes on `[lo, hi]` (possibly infinite) where the integrand decays like
    /// `e^{-rate_hi t}` at `+inf` and `e^{rate_lo t}` at `-inf`.
    pub fn axis_nodes(&self, j: usize, lo: f64, hi: f64, rate_lo: f64, rate_hi: f64, level: u32) -> AxisNodes {
        if lo.is_finite() && hi.is_finite() {
            return self.finite_nodes(j, lo, hi, level);
        }
        if !lo.is_finite() && !hi.is_finite() {
            let mut a = self.axis_nodes(j, f64::NEG_INFINITY, 0.0, rate_lo, rate_hi, level);
            a.append(self.axis_nodes(j, 0.0, f64::INFINITY, rate_lo, rate_hi, level));
            return a;
        }
        let upper = !hi.is_finite();
        let anchor = if upper { lo } else { hi };
        let rate = if upper { rate_hi } else { rate_lo };
        let dir = if upper { 1.0 } else { -1.0 };
        if rate.is_infinite() {
            let len = self.rapid_radius.min(self.radius(j));
            let (a, b) = if upper { (anchor, anchor + len) } else { (anchor - len, anchor) };
            return self.finite_nodes(j, a, b, level);
        }
        match self.semi_infinite {
            SemiInfinite::DirectTruncation => {
                let len = (self.decay_digits / rate).min(self.radius(j));
                let (a, b) = if upper { (anchor, anchor + len) } else { (anchor - len, anchor) };
                self.finite_nodes(j, a, b, level)
            }
            SemiInfinite::ExpSubstitution => {
                let mu = 0.5 * rate;
                self.finite_nodes(j, 0.0, 1.0, level).mapped(|x| {
                    let d = -(1.0 - x).ln() / mu;
                    (anchor + dir * d, 1.0 / (mu * (1.0 - x)))
                })
            }
        }
    }
}

/// A value with its quadrature error estimate and evaluation count.
#[derive(Clone, Debug, PartialEq)]
pub struct Estimate {
    pub value: CdNumber,
    pub error: f64,
    pub evals: usize,
}

impl Estimate {
    pub fn exact(value: CdNumber) -> Self {
        Estimate { value, error: 0.0, evals: 0 }
    }

    /// `sum c_k E_k` with errors added in absolute value.
    pub fn combine(terms: &[(f64, &Estimate)]) -> Estimate {
        let level = terms.iter().map(|(_, e)| e.value.level()).max().unwrap_or(0);
        let mut value = CdNumber::zero(level);
        let mut error = 0.0;
        let mut evals = 0;
        for (c, e) in terms {
            value += &(&e.value * *c);
            error += c.abs() * e.error;
            evals += e.evals;
        }
        Estimate { value, error, evals }
    }
}

/// How `S = -d/dzeta` is applied to images.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SMode {
    /// Exact application inside the kernel (quarter-period shifts on the
    /// spherical kernel, Taylor jets on the Cartesian one).
    Phase,
    /// Richardson-extrapolated central differences in `zeta` with step `h`.
    FiniteDifference { h: f64 },
}

/// Closed-form image sources.
#[derive(Clone)]
pub enum ClosedForm {
    Zero,
    /// `w exp(-u(p, tau; zeta))`, the image of `w delta(t - tau)`.
    Delta { tau: Vec<f64>, weight: CdNumber },
    /// Any image given as a function of the kernel spec (for its `zeta`) and `p`.
    Custom(Arc<dyn Fn(&KernelSpec, &CdNumber) -> Result<Estimate> + Send + Sync>),
}

impl std::fmt::Debug for ClosedForm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ClosedForm::Zero => f.write_str("Zero"),
            ClosedForm::Delta { tau, weight } => write!(f, "Delta({tau:?}, {weight})"),
            ClosedForm::Custom(_) => f.write_str("Custom"),
        }
    }
}

struct SampledGrid {
    axes: Vec<AxisNodes>,
    /// Weighted values `w(t) f(t)`, `fdim` reals per node, row-major in `axes`.
    fw: Vec<f64>,
    fdim: usize,
}

type GridCache = Arc<Mutex<Vec<((u64, u32), Arc<SampledGrid>)>>>;

#[derive(Clone)]
enum Source {
    Quadrature {
        f: OriginalFn,
        quad: QuadSpec,
        /// 1-based axes held at fixed values (traces and restricted transforms).
        fixed: Vec<(usize, f64)>,
        cache: GridCache,
    },
    Closed(ClosedForm),
}

/// A lazily evaluated image `sum_alpha c_alpha S^alpha F^n(p; zeta)`.
#[derive(Clone)]
pub struct ImageFn {
    spec: KernelSpec,
    source: Source,
    op: SPoly,
    s_mode: SMode,
    strip: (f64, f64),
    real_valued: bool,
}

impl std::fmt::Debug for ImageFn {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let src = match &self.source {
            Source::Quadrature { f: g, fixed, .. } => format!("quadrature({}, fixed {fixed:?})", g.name()),
            Source::Closed(c) => format!("{c:?}"),
        };
        f.debug_struct("ImageFn")
            .field("spec", &self.spec)
            .field("source", &src)
            .field("op", &self.op)
            .field("strip", &self.strip)
            .finish()
    }
}

impl ImageFn {
    /// Image of `f` by quadrature. Restricted specs integrate over their active
    /// axes only, with the inactive `t_m` held at zero.
    pub fn quadrature(f: &OriginalFn, spec: &KernelSpec, quad: &QuadSpec) -> Result<ImageFn> {
        let fixed = match spec.active() {
            Some(_) => (1..=spec.n()).filter(|&m| !spec.is_active(m)).map(|m| (m, 0.0)).collect(),
            None => Vec::new(),
        };
        Self::with_fixed(f, spec, quad, fixed)
    }

    /// Trace transform: `f` restricted to the face where each listed axis
    /// (1-based) equals its value, integrated over the remaining axes with the
    /// full kernel.
    pub fn face(f: &OriginalFn, spec: &KernelSpec, quad: &QuadSpec, fixed: Vec<(usize, f64)>) -> Result<ImageFn> {
        let mut fixed = fixed;
        if let Some(_) = spec.active() {
            for m in (1..=spec.n()).filter(|&m| !spec.is_active(m)) {
                if !fixed.iter().any(|(a, _)| *a == m) {
                    fixed.push((m, 0.0));
                }
            }
        }
        Self::with_fixed(f, spec, quad, fixed)
    }

    fn with_fixed(f: &OriginalFn, spec: &KernelSpec, quad: &QuadSpec, mut fixed: Vec<(usize, f64)>) -> Result<ImageFn> {
        quad.validate()?;
        if f.n() != spec.n() {
            return Err(Error::Dimension { expected: spec.n(), got: f.n() });
        }
        if f.level() > spec.r() {
            return Err(Error::LevelMismatch(f.level(), spec.r()));
        }
        fixed.sort_by_key(|x| x.0);
        if fixed.windows(2).any(|w| w[0].0 == w[1].0) || fixed.iter().any(|x| x.0 == 0 || x.0 > spec.n()) {
            return Err(Error::InvalidArgument("fixed axes must be distinct and within 1..=n".into()));
        }
        Ok(ImageFn {
            spec: spec.clone(),
            strip: f.strip(),
            real_valued: f.is_real_valued(),
            source: Source::Quadrature { f: f.clone(), quad: quad.clone(), fixed, cache: Arc::default() },
            op: SPoly::identity(spec.n()),
            s_mode: SMode::Phase,
        })
    }

    pub fn closed(spec: &KernelSpec, form: ClosedForm, strip: (f64, f64), real_valued: bool) -> ImageFn {
        ImageFn {
            spec: spec.clone(),
            source: Source::Closed(form),
            op: SPoly::identity(spec.n()),
            s_mode: SMode::Phase,
            strip,
            real_valued,
        }
    }

    /// The zero image.
    pub fn zero(spec: &KernelSpec) -> ImageFn {
        Self::closed(spec, ClosedForm::Zero, (f64::NEG_INFINITY, f64::INFINITY), true)
    }

    pub fn spec(&self) -> &KernelSpec {
        &self.spec
    }

    pub fn strip(&self) -> (f64, f64) {
        self.strip
    }

    pub fn op(&self) -> &SPoly {
        &self.op
    }

    /// Values come from a real-valued original.
    pub fn is_real_valued(&self) -> bool {
        self.real_valued
    }

    pub fn original(&self) -> Option<&OriginalFn> {
        match &self.source {
            Source::Quadrature { f, .. } => Some(f),
            Source::Closed(_) => None,
        }
    }

    pub(crate) fn quad_spec(&self) -> Option<&QuadSpec> {
        match &self.source {
            Source::Quadrature { quad, .. } => Some(quad),
            Source::Closed(_) => None,
        }
    }

    pub(crate) fn fixed_axes(&self) -> &[(usize, f64)] {
        match &self.source {
            Source::Quadrature { fixed, .. } => fixed,
            Source::Closed(_) => &[],
        }
    }

    pub fn with_s_mode(&self, mode: SMode) -> ImageFn {
        ImageFn { s_mode: mode, ..self.clone() }
    }

    /// Same image for another phase `zeta`.
    pub fn with_zeta(&self, zeta: &CdNumber) -> Result<ImageFn> {
        Ok(ImageFn { spec: self.spec.with_zeta(zeta)?, ..self.clone() })
    }

    /// `T_(m) F (p; zeta) = F(p; zeta - (i_1 m_1 + ... + i_n m_n) pi/2)`.
    pub fn t_shift(&self, m: &PhaseShift) -> ImageFn {
        let mf: Vec<f64> = m.0.iter().map(|&x| x as f64).collect();
        ImageFn { spec: self.spec.shifted(&mf), ..self.clone() }
    }

    /// `S_{e_j}^x F`.
    pub fn s_apply(&self, j: usize, x: u32) -> ImageFn {
        self.apply_poly(&SPoly::s_power(self.spec.n(), j, x))
    }

    /// `P(S) F` for a polynomial in the `S` operators.
    pub fn apply_poly(&self, poly: &SPoly) -> ImageFn {
        ImageFn { op: poly.mul(&self.op), ..self.clone() }
    }

    /// Image of the real coordinate `q` of the original (quadrature sources only).
    pub fn component_image(&self, q: usize) -> Result<ImageFn> {
        match &self.source {
            Source::Quadrature { f, quad, fixed, .. } => {
                let fq = f.component(q)?;
                let mut out = Self::with_fixed(&fq, &self.spec, quad, fixed.clone())?;
                out.op = self.op.clone();
                out.s_mode = self.s_mode;
                Ok(out)
            }
            Source::Closed(_) => Err(Error::Unsupported("components of a closed-form image".into())),
        }
    }

    pub fn check_strip(&self, p: &CdNumber) -> Result<()> {
        let re = p.re();
        let (lo, hi) = self.strip;
        if !(re > lo && re < hi) {
            return Err(Error::OutOfStrip { re, lo, hi });
        }
        Ok(())
    }

    /// Evaluates the image at `p`.
    pub fn eval(&self, p: &CdNumber) -> Result<Estimate> {
        self.check_strip(p)?;
        match self.s_mode {
            SMode::Phase => self.eval_exact(p),
            SMode::FiniteDifference { h } => self.eval_fd(p, h),
        }
    }

    fn eval_exact(&self, p: &CdNumber) -> Result<Estimate> {
        match &self.source {
            Source::Quadrature { .. } => self.eval_quadrature(p),
            Source::Closed(ClosedForm::Zero) => Ok(Estimate::exact(CdNumber::zero(self.spec.r()))),
            Source::Closed(ClosedForm::Delta { tau, weight }) => {
                let k = KernelOp::new(&self.spec, self.op.clone()).eval(p, tau)?;
                Ok(Estimate::exact(weight.promote(self.spec.r().max(weight.level()))? * k))
            }
            Source::Closed(ClosedForm::Custom(func)) => {
                if self.op == SPoly::identity(self.spec.n()) {
                    func(&self.spec, p)
                } else {
                    self.eval_fd(p, 1e-3)
                }
            }
        }
    }

    /// `sum c_alpha (-1)^|alpha| d^alpha/dzeta^alpha F` by nested central differences.
    fn eval_fd(&self, p: &CdNumber, h: f64) -> Result<Estimate> {
        let base = ImageFn { op: SPoly::identity(self.spec.n()), s_mode: SMode::Phase, ..self.clone() };
        let mut parts = Vec::new();
        for (alpha, c) in self.op.terms() {
            let e = fd_derivative(&base, p, alpha, h)?;
            let sign = if alpha.iter().sum::<u32>() % 2 == 0 { 1.0 } else { -1.0 };
            parts.push((sign * c, e));
        }
        let refs: Vec<(f64, &Estimate)> = parts.iter().map(|(c, e)| (*c, e)).collect();
        Ok(Estimate::combine(&refs))
    }

    fn eval_quadrature(&self, p: &CdNumber) -> Result<Estimate> {
        let Source::Quadrature { f, quad, fixed, cache } = &self.source else {
            unreachable!()
        };
        let pc = self.spec.masked_p(p)?;
        let op = KernelOp::new(&self.spec, self.op.clone());
        let p0 = pc[0];
        let mut prev = self.integrate(f, quad, fixed, cache, &op, &pc, 0)?;
        let mut evals = prev.1;
        let mut level = 1;
        loop {
            let cost = self.grid_size(f, quad, fixed, p0, level);
            if evals + cost > quad.max_evals {
                let err = if level == 1 { f64::INFINITY } else { prev.2 };
                return Err(Error::Budget { evals, err });
            }
            let (cur, used, _) = self.integrate(f, quad, fixed, cache, &op, &pc, level)?;
            evals += used;
            let diff = (&cur - &prev.0).norm();
            if diff <= quad.target_tol * cur.norm().max(1.0) {
                let tail = self.truncation_tail(f, quad, fixed, p0) * self.op_scale();
                return Ok(Estimate { value: cur, error: diff + tail, evals });
            }
            prev = (cur, used, diff);
            level += 1;
        }
    }

    fn free_axes(&self, fixed: &[(usize, f64)]) -> Vec<usize> {
        (1..=self.spec.n()).filter(|m| !fixed.iter().any(|x| x.0 == *m)).collect()
    }

    fn axis_grids(&self, f: &OriginalFn, quad: &QuadSpec, fixed: &[(usize, f64)], p0: f64, level: u32) -> Vec<AxisNodes> {
        let (a1, am1) = f.strip();
        let bounds = f.support().bounds(f.n());
        self.free_axes(fixed)
            .into_iter()
            .map(|m| {
                let (mut lo, mut hi) = bounds[m - 1];
                if let Some(e) = f.extent() {
                    lo = lo.max(e[m - 1].0);
                    hi = hi.min(e[m - 1].1);
                }
                if !(lo < hi) {
                    return AxisNodes::default();
                }
                let mut cuts: Vec<f64> = f.breakpoints(m - 1).iter().copied().filter(|&b| b > lo && b < hi).collect();
                cuts.sort_by(f64::total_cmp);
                let mut edges = vec![lo];
                edges.extend(cuts);
                edges.push(hi);
                let mut nodes = AxisNodes::default();
                for w in edges.windows(2) {
                    nodes.append(quad.axis_nodes(m - 1, w[0], w[1], am1 - p0, p0 - a1, level));
                }
                nodes
            })
            .collect()
    }

    /// Rough bound on the integrand mass cut off by truncating semi-infinite
    /// axes, from `|f(t)| <= C e^{a_1 s_1}`: the mass beyond each cut times
    /// the mass of the other axes (width of finite ones, `1/rate` per
    /// infinite side).
    fn truncation_tail(&self, f: &OriginalFn, quad: &QuadSpec, fixed: &[(usize, f64)], p0: f64) -> f64 {
        if quad.semi_infinite != SemiInfinite::DirectTruncation {
            return 0.0;
        }
        let g = f.growth();
        let bounds = f.support().bounds(f.n());
        let free = self.free_axes(fixed);
        let mut sides = Vec::new();
        let mut mass = Vec::new();
        for &m in &free {
            let (mut lo, mut hi) = bounds[m - 1];
            if let Some(e) = f.extent() {
                lo = lo.max(e[m - 1].0);
                hi = hi.min(e[m - 1].1);
            }
            let rl = if lo.is_finite() { f64::NAN } else { g.a_neg1 - p0 };
            let rh = if hi.is_finite() { f64::NAN } else { p0 - g.a1 };
            let mut w = if lo.is_finite() && hi.is_finite() { hi - lo } else { 0.0 };
            for r in [rl, rh] {
                if r.is_finite() && r > 0.0 {
                    w += 1.0 / r;
                    sides.push((mass.len(), r, quad.radius(m - 1)));
                }
            }
            mass.push(w.max(0.0));
        }
        let mut tail = 0.0;
        for (k, rate, radius) in sides {
            let len = (quad.decay_digits / rate).min(radius);
            let others: f64 = mass.iter().enumerate().filter(|(q, _)| *q != k).map(|(_, w)| *w).product();
            tail += (-rate * len).exp() / rate * others;
        }
        g.c * tail
    }

    fn op_scale(&self) -> f64 {
        self.op.terms().map(|(_, c)| c.abs()).sum()
    }

    fn grid_size(&self, f: &OriginalFn, quad: &QuadSpec, fixed: &[(usize, f64)], p0: f64, level: u32) -> usize {
        self.axis_grids(f, quad, fixed, p0, level).iter().map(|a| a.len()).product()
    }

    fn sampled(&self, f: &OriginalFn, quad: &QuadSpec, fixed: &[(usize, f64)], cache: &GridCache, p0: f64, level: u32) -> Arc<SampledGrid> {
        let key = (p0.to_bits(), level);
        if let Some((_, g)) = cache.lock().expect("grid cache").iter().find(|(k, _)| *k == key) {
            return g.clone();
        }
        let axes = self.axis_grids(f, quad, fixed, p0, level);
        let n = self.spec.n();
        let free = self.free_axes(fixed);
        let total: usize = axes.iter().map(|a| a.len()).product();
        let fdim = 1usize << f.level();
        let mut fw = vec![0.0; total * fdim];
        fw.par_chunks_mut(fdim).enumerate().for_each(|(idx, out)| {
            let mut t = vec![0.0; n];
            for &(m, v) in fixed {
                t[m - 1] = v;
            }
            let mut rem = idx;
            let mut w = 1.0;
            for (k, ax) in axes.iter().enumerate().rev() {
                let i = rem % ax.len();
                rem /= ax.len();
                t[free[k] - 1] = ax.t[i];
                w *= ax.w[i];
            }
            let v = f.eval(&t);
            for (o, c) in out.iter_mut().zip(v.coords()) {
                *o = w * c;
            }
        });
        let grid = Arc::new(SampledGrid { axes, fw, fdim });
        let mut guard = cache.lock().expect("grid cache");
        if guard.len() >= 6 {
            guard.remove(0);
        }
        guard.push((key, grid.clone()));
        grid
    }

    #[allow(clippy::too_many_arguments)]
    fn integrate(
        &self,
        f: &OriginalFn,
        quad: &QuadSpec,
        fixed: &[(usize, f64)],
        cache: &GridCache,
        op: &KernelOp,
        pc: &[f64],
        level: u32,
    ) -> Result<(CdNumber, usize, f64)> {
        let grid = self.sampled(f, quad, fixed, cache, pc[0], level);
        let n = self.spec.n();
        let dim = self.spec.dim();
        let free = self.free_axes(fixed);
        let total = grid.fw.len() / grid.fdim.max(1);
        if total == 0 || grid.axes.iter().any(|a| a.is_empty()) {
            return Ok((CdNumber::zero(self.spec.r()), 0, 0.0));
        }
        let fdim = grid.fdim;
        let chunk = (total / 64).max(256);
        let sum = (0..total)
            .into_par_iter()
            .with_min_len(chunk)
            .fold(
                || (vec![0.0; dim], vec![0.0; dim], vec![0.0; dim], vec![0.0; dim], vec![0.0; n]),
                |(mut acc, mut k, mut fbuf, mut prod, mut t), idx| {
                    let fv = &grid.fw[idx * fdim..(idx + 1) * fdim];
                    if fv.iter().all(|&x| x == 0.0) {
                        return (acc, k, fbuf, prod, t);
                    }
                    for &(m, v) in fixed {
                        t[m - 1] = v;
                    }
                    let mut rem = idx;
                    for (q, ax) in grid.axes.iter().enumerate().rev() {
                        let i = rem % ax.len();
                        rem /= ax.len();
                        t[free[q] - 1] = ax.t[i];
                    }
                    op.eval_into(pc, &t, &mut k);
                    if fdim == 1 {
                        for (a, kv) in acc.iter_mut().zip(&k) {
                            *a += fv[0] * kv;
                        }
                    } else {
                        fbuf.iter_mut().for_each(|x| *x = 0.0);
                        fbuf[..fdim].copy_from_slice(fv);
                        mul_into(&fbuf, &k, &mut prod);
                        for (a, v) in acc.iter_mut().zip(&prod) {
                            *a += v;
                        }
                    }
                    (acc, k, fbuf, prod, t)
                },
            )
            .map(|x| x.0)
            .reduce(|| vec![0.0; dim], |mut a, b| {
                for (x, y) in a.iter_mut().zip(&b) {
                    *x += y;
                }
                a
            });
        Ok((CdNumber::from_coords(sum)?, total, 0.0))
    }
}

fn fd_derivative(base: &ImageFn, p: &CdNumber, alpha: &[u32], h: f64) -> Result<Estimate> {
    let Some(j) = alpha.iter().position(|&e| e > 0) else {
        return base.eval_exact(p);
    };
    let mut rest = alpha.to_vec();
    rest[j] -= 1;
    let central = |step: f64| -> Result<Estimate> {
        let mut dz = CdNumber::zero(base.spec.r());
        dz[j + 1] = step;
        let plus = ImageFn { spec: base.spec.zeta_added(&dz), ..base.clone() };
        dz[j + 1] = -step;
        let minus = ImageFn { spec: base.spec.zeta_added(&dz), ..base.clone() };
        let a = fd_derivative(&plus, p, &rest, h)?;
        let b = fd_derivative(&minus, p, &rest, h)?;
        Ok(Estimate::combine(&[(0.5 / step, &a), (-0.5 / step, &b)]))
    };
    let d1 = central(h)?;
    let d2 = central(0.5 * h)?;
    let mut e = Estimate::combine(&[(4.0 / 3.0, &d2), (-1.0 / 3.0, &d1)]);
    e.error += (&d2.value - &d1.value).norm() / 15.0;
    Ok(e)
}

/// Integer multi-order of quarter-period phase shifts.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PhaseShift(pub Vec<i64>);

impl PhaseShift {
    pub fn zero(n: usize) -> Self {
        PhaseShift(vec![0; n])
    }

    pub fn add(&self, other: &Self) -> Self {
        PhaseShift(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    /// Canonical representative for spherical images: `m_1` reduced mod 2 with
    /// the sign `T_1^2 = -1`, and `m_j` (`j >= 2`) reduced mod 4.
    pub fn canonical(&self) -> (f64, PhaseShift) {
        let mut m = self.0.clone();
        let mut sign = 1.0;
        if let Some(m1) = m.first_mut() {
            let half = m1.div_euclid(2);
            if half % 2 != 0 {
                sign = -1.0;
            }
            *m1 = m1.rem_euclid(2);
        }
        for x in m.iter_mut().skip(1) {
            *x = x.rem_euclid(4);
        }
        (sign, PhaseShift(m))
    }
}

/// Forward transform of `f` at `p`.
pub fn forward(f: &OriginalFn, spec: &KernelSpec, p: &CdNumber, quad: &QuadSpec) -> Result<Estimate> {
    ImageFn::quadrature(f, spec, quad)?.eval(p)
}

/// Strip of convergence `(a_1, a_-1)` of an original.
pub fn strip_of(f: &OriginalFn) -> (f64, f64) {
    f.strip()
}
