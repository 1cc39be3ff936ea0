//! Inverse transform on a truncated cube `a + [-P, P]^n` of imaginary directions.
//!
//! `Direct` evaluates `(2 pi)^-n int F(a+p) exp(u(a+p,t)) dp` literally; for
//! `n = 1` this is complex Laplace inversion. For the spherical kernel with
//! `n >= 2` the product `F exp(u)` does not isolate `f`, so `PhaseResolved`
//! first combines the `2^n` quarter-period shifts of the `i_n` component into
//! `H(p) = int f(t) e^{-a s_1} e^{-i p.s} dt` and inverts that by Fourier
//! inversion in the partial sums `s`.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use rayon::prelude::*;

use super::quad::{composite_gauss_legendre, AxisNodes};
use super::{Estimate, ImageFn, PhaseShift};
use crate::algebra::CdNumber;
use crate::error::{Error, Result};
use crate::kernel::{CoordMode, SPoly};
use crate::originals::SupportSpec;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InverseMethod {
    /// `Direct` for `n = 1`, `PhaseResolved` for spherical `n >= 2`.
    Auto,
    Direct,
    PhaseResolved,
}

/// Controls for the inverse transform.
#[derive(Clone, Debug, PartialEq)]
pub struct InverseSpec {
    /// Truncation half-width `P` in every imaginary direction.
    pub radius: f64,
    /// Gauss-Legendre panels on `[-P, P]` (rounded up to a multiple of 4).
    pub panels: usize,
    pub order: usize,
    pub method: InverseMethod,
    /// Evaluate whole-space spherical quadrature images by separable
    /// quadrature in `s` instead of one transform per node.
    pub fast_path: bool,
    /// Spatial panels and order of the separable path.
    pub s_panels: usize,
    pub s_order: usize,
    /// Radius-doubling estimates above `flag_tol max(1, |f|)` raise `NonConvergent`.
    pub flag_tol: f64,
}

impl Default for InverseSpec {
    fn default() -> Self {
        InverseSpec {
            radius: 8.0,
            panels: 8,
            order: 6,
            method: InverseMethod::Auto,
            fast_path: true,
            s_panels: 6,
            s_order: 10,
            flag_tol: 0.5,
        }
    }
}

/// Tensor p-grid on `[-P, P]^n` with the middle half marked for the
/// radius-halving estimate.
#[derive(Clone, Debug, PartialEq)]
pub struct PGrid {
    pub axis: AxisNodes,
    pub inner: Vec<bool>,
    pub n: usize,
}

impl PGrid {
    pub fn new(n: usize, spec: &InverseSpec) -> Self {
        let panels = spec.panels.max(4).div_ceil(4) * 4;
        let axis = composite_gauss_legendre(-spec.radius, spec.radius, panels, spec.order);
        let per = spec.order.max(2);
        let inner = (0..axis.len())
            .map(|i| {
                let k = i / per;
                k >= panels / 4 && k < 3 * panels / 4
            })
            .collect();
        PGrid { axis, inner, n }
    }

    pub fn len(&self) -> usize {
        self.axis.len().pow(self.n as u32)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Node `idx` (row-major, axis 1 slowest): `(p, weight, inner)`.
    pub fn node(&self, idx: usize) -> (Vec<f64>, f64, bool) {
        let m = self.axis.len();
        let mut p = vec![0.0; self.n];
        let mut w = 1.0;
        let mut inner = true;
        let mut rem = idx;
        for j in (0..self.n).rev() {
            let i = rem % m;
            rem /= m;
            p[j] = self.axis.t[i];
            w *= self.axis.w[i];
            inner &= self.inner[i];
        }
        (p, w, inner)
    }
}

fn resolve_method(f: &ImageFn, spec: &InverseSpec) -> Result<InverseMethod> {
    let ks = f.spec();
    match spec.method {
        InverseMethod::Auto => {
            if ks.n() == 1 {
                Ok(InverseMethod::Direct)
            } else if ks.mode() == CoordMode::Spherical {
                Ok(InverseMethod::PhaseResolved)
            } else {
                Err(Error::Unsupported(
                    "no inversion formula for the Cartesian kernel with n >= 2".into(),
                ))
            }
        }
        InverseMethod::PhaseResolved if ks.mode() == CoordMode::Cartesian && ks.n() >= 2 => Err(
            Error::Unsupported("phase-resolved inversion needs the spherical kernel".into()),
        ),
        m => Ok(m),
    }
}

/// `f(t)` from its image at one point.
pub fn inverse(f: &ImageFn, a: f64, t: &[f64], spec: &InverseSpec) -> Result<Estimate> {
    Ok(inverse_batch(f, a, &[t.to_vec()], spec)?.remove(0))
}

/// `f` at several points, sharing the image evaluations.
pub fn inverse_batch(f: &ImageFn, a: f64, ts: &[Vec<f64>], spec: &InverseSpec) -> Result<Vec<Estimate>> {
    let ks = f.spec();
    let n = ks.n();
    if let Some(t) = ts.iter().find(|t| t.len() != n) {
        return Err(Error::Dimension { expected: n, got: t.len() });
    }
    if !(spec.radius > 0.0) {
        return Err(Error::InvalidArgument("inverse radius must be positive".into()));
    }
    f.check_strip(&CdNumber::real(ks.r(), a))?;
    let out = match resolve_method(f, spec)? {
        InverseMethod::Direct => direct(f, a, ts, spec)?,
        _ => phase_resolved(f, a, ts, spec)?,
    };
    for e in &out {
        if e.error > spec.flag_tol * e.value.norm().max(1.0) {
            return Err(Error::NonConvergent(format!(
                "radius-doubling difference {:.3e} at P = {}",
                e.error, spec.radius
            )));
        }
    }
    Ok(out)
}

fn direct(f: &ImageFn, a: f64, ts: &[Vec<f64>], spec: &InverseSpec) -> Result<Vec<Estimate>> {
    let ks = f.spec();
    let n = ks.n();
    let r = ks.r();
    let grid = PGrid::new(n, spec);
    let nodes: Vec<(CdNumber, f64, bool, Estimate)> = (0..grid.len())
        .into_par_iter()
        .map(|idx| {
            let (pv, w, inner) = grid.node(idx);
            let mut p = CdNumber::real(r, a);
            for (j, x) in pv.iter().enumerate() {
                p[j + 1] = *x;
            }
            let v = f.eval(&p)?;
            Ok((p, w, inner, v))
        })
        .collect::<Result<_>>()?;
    let scale = (2.0 * PI).powi(-(n as i32));
    ts.iter()
        .map(|t| {
            let mut full = CdNumber::zero(r);
            let mut half = CdNumber::zero(r);
            let mut qerr = 0.0;
            for (p, w, inner, v) in &nodes {
                let e = ks.u(p, t)?.exp();
                let term = (&v.value * &e) * *w;
                if *inner {
                    half += &term;
                }
                full += &term;
                qerr += w * v.error * e.norm();
            }
            let diff = (&full - &half).norm() * scale;
            Ok(Estimate { value: full * scale, error: diff + qerr * scale, evals: nodes.len() })
        })
        .collect()
}

/// Coefficients `c_m = -(-1)^|m| (-i)^{n-|m|}` of the shift combination.
fn shift_coefficient(m: usize, n: usize) -> Complex64 {
    let k = m.count_ones() as i32;
    let minus_i = Complex64::new(0.0, -1.0);
    -Complex64::new((-1.0f64).powi(k), 0.0) * minus_i.powi(n as i32 - k)
}

/// `H(p) = e^{zeta_0 + i sum zeta_j} sum_m c_m [T_m F(a + p)]_n` from `2^n`
/// shifted image evaluations (spherical kernel, real original).
pub fn phase_resolved_h0(f: &ImageFn, a: f64, p: &[f64]) -> Result<(Complex64, f64)> {
    let ks = f.spec();
    let n = ks.n();
    let mut pc = CdNumber::real(ks.r(), a);
    for (j, x) in p.iter().enumerate() {
        pc[j + 1] = *x;
    }
    let mut h = Complex64::new(0.0, 0.0);
    let mut err = 0.0;
    for m in 0..1usize << n {
        let shift = PhaseShift((0..n).map(|j| ((m >> (n - 1 - j)) & 1) as i64).collect());
        let v = f.t_shift(&shift).eval(&pc)?;
        let c = shift_coefficient(m, n);
        h += c * v.value[n];
        err += v.error;
    }
    let z = ks.zeta().coords();
    let phase: f64 = z[1..=n].iter().sum();
    Ok((h * Complex64::from_polar(z[0].exp(), phase), err * z[0].exp()))
}

fn fast_eligible(f: &ImageFn, spec: &InverseSpec) -> bool {
    let ks = f.spec();
    spec.fast_path
        && ks.mode() == CoordMode::Spherical
        && ks.active().is_none()
        && f.fixed_axes().is_empty()
        && *f.op() == SPoly::identity(ks.n())
        && matches!(f.original().map(|g| g.support()), Some(SupportSpec::WholeSpace))
}

fn phase_resolved(f: &ImageFn, a: f64, ts: &[Vec<f64>], spec: &InverseSpec) -> Result<Vec<Estimate>> {
    let ks = f.spec();
    let r = ks.r();
    if !f.is_real_valued() {
        let Some(orig) = f.original() else {
            return Err(Error::Unsupported("phase-resolved inversion of a non-real closed-form image".into()));
        };
        let mut acc: Vec<Estimate> = ts.iter().map(|_| Estimate::exact(CdNumber::zero(r))).collect();
        for q in 0..1usize << orig.level() {
            let fq = f.component_image(q)?;
            let part = phase_resolved(&fq, a, ts, spec)?;
            for (e, pq) in acc.iter_mut().zip(part) {
                let mut v = CdNumber::zero(r);
                v[q] = pq.value.re();
                e.value += &v;
                e.error += pq.error;
                e.evals += pq.evals;
            }
        }
        return Ok(acc);
    }
    let n = ks.n();
    let grid = PGrid::new(n, spec);
    let (h, qerr): (Vec<Complex64>, f64) = if fast_eligible(f, spec) {
        (spherical_grid_h0(f, a, &grid, spec.s_panels, spec.s_order)?, 0.0)
    } else {
        let vals: Vec<(Complex64, f64)> = (0..grid.len())
            .into_par_iter()
            .map(|idx| phase_resolved_h0(f, a, &grid.node(idx).0))
            .collect::<Result<_>>()?;
        let e = vals.iter().enumerate().map(|(i, v)| v.1 * grid.node(i).1).sum();
        (vals.into_iter().map(|v| v.0).collect(), e)
    };
    let scale = (2.0 * PI).powi(-(n as i32));
    let out = ts
        .iter()
        .map(|t| {
            let s = crate::kernel::partial_sums(t);
            let mut full = Complex64::new(0.0, 0.0);
            let mut half = Complex64::new(0.0, 0.0);
            for (idx, hv) in h.iter().enumerate() {
                let (p, w, inner) = grid.node(idx);
                let ph: f64 = p.iter().zip(&s).map(|(x, y)| x * y).sum();
                let term = hv * Complex64::from_polar(w, ph);
                full += term;
                if inner {
                    half += term;
                }
            }
            let g = (a * s[0]).exp() * scale;
            Estimate {
                value: CdNumber::real(r, g * full.re),
                error: g * ((full - half).re.abs() + qerr),
                evals: h.len() << n,
            }
        })
        .collect();
    Ok(out)
}

/// Weighted samples `-w f(t) e^{-a s_1 - zeta_0}` of a whole-space quadrature
/// image on a tensor grid in the partial sums.
fn separable_samples(f: &ImageFn, a: f64, s_panels: usize, s_order: usize) -> Result<(Vec<AxisNodes>, Vec<f64>)> {
    let ks = f.spec();
    let n = ks.n();
    let orig = f
        .original()
        .ok_or_else(|| Error::Unsupported("separable evaluation needs a quadrature image".into()))?;
    let quad = f.quad_spec().expect("quadrature source");
    let tbox: Vec<(f64, f64)> = (0..n)
        .map(|j| match orig.extent() {
            Some(e) => e[j],
            None => (-quad.rapid_radius, quad.rapid_radius),
        })
        .collect();
    // s_k = t_k + ... + t_n ranges over the sum of the t-intervals
    let saxes: Vec<AxisNodes> = (0..n)
        .map(|k| {
            let (lo, hi) = match orig.s_extent() {
                Some(e) => e[k],
                None => (tbox[k..].iter().map(|b| b.0).sum(), tbox[k..].iter().map(|b| b.1).sum()),
            };
            composite_gauss_legendre(lo, hi, s_panels, s_order)
        })
        .collect();
    let sn: Vec<usize> = saxes.iter().map(|a| a.len()).collect();
    let total: usize = sn.iter().product();
    let z = ks.zeta().coords().to_vec();
    let data: Vec<f64> = (0..total)
        .into_par_iter()
        .map(|idx| {
            let mut rem = idx;
            let mut s = vec![0.0; n];
            let mut w = 1.0;
            for k in (0..n).rev() {
                let i = rem % sn[k];
                rem /= sn[k];
                s[k] = saxes[k].t[i];
                w *= saxes[k].w[i];
            }
            let t: Vec<f64> = (0..n).map(|k| if k + 1 < n { s[k] - s[k + 1] } else { s[k] }).collect();
            // -E0 = -e^{-a s_1 - zeta_0}
            -w * orig.eval(&t).re() * (-a * s[0] - z[0]).exp()
        })
        .collect();
    Ok((saxes, data))
}

/// `H(p)` on a whole p-grid for a whole-space spherical quadrature image:
/// the shifted images `[T_m F(a+p)]_n` are separable in the partial sums
/// (unit Jacobian `dt = ds`), so they are computed by tensor contraction over
/// an `s`-grid and then combined as in [`phase_resolved_h0`].
pub fn spherical_grid_h0(f: &ImageFn, a: f64, grid: &PGrid, s_panels: usize, s_order: usize) -> Result<Vec<Complex64>> {
    let ks = f.spec();
    let n = ks.n();
    let (saxes, data) = separable_samples(f, a, s_panels, s_order)?;
    let sn: Vec<usize> = saxes.iter().map(|a| a.len()).collect();
    let z = ks.zeta().coords().to_vec();
    let m = grid.axis.len();
    // tables[k][shift][q * S_k + i] = sin(p_q s_i + zeta_{k+1} - shift pi/2)
    let tables: Vec<[Vec<f64>; 2]> = (0..n)
        .map(|k| {
            let mk = |shift: f64| {
                let mut v = Vec::with_capacity(m * sn[k]);
                for q in 0..m {
                    for i in 0..sn[k] {
                        v.push((grid.axis.t[q] * saxes[k].t[i] + z[k + 1] - shift * FRAC_PI_2).sin());
                    }
                }
                v
            };
            [mk(0.0), mk(1.0)]
        })
        .collect();
    // contract axes n..1; each stage doubles the shift branches
    let mut branches: Vec<(usize, Vec<f64>)> = vec![(0, data)];
    let mut shape = sn.clone();
    for k in (0..n).rev() {
        let mut next = Vec::with_capacity(branches.len() * 2);
        for (bits, arr) in &branches {
            for shift in 0..2usize {
                let out = contract(arr, &shape, k, &tables[k][shift], m);
                next.push((bits | (shift << (n - 1 - k)), out));
            }
        }
        shape[k] = m;
        branches = next;
    }
    let phase: f64 = z[1..=n].iter().sum();
    let pref = Complex64::from_polar(z[0].exp(), phase);
    let len = m.pow(n as u32);
    let mut h = vec![Complex64::new(0.0, 0.0); len];
    for (bits, arr) in &branches {
        let c = shift_coefficient(*bits, n) * pref;
        for (hv, x) in h.iter_mut().zip(arr) {
            *hv += c * x;
        }
    }
    Ok(h)
}

/// `out[.., q, ..] = sum_i table[q, i] data[.., i, ..]` along axis `k`.
fn contract(data: &[f64], shape: &[usize], k: usize, table: &[f64], m: usize) -> Vec<f64> {
    let outer: usize = shape[..k].iter().product();
    let inner: usize = shape[k + 1..].iter().product();
    let sk = shape[k];
    let mut out = vec![0.0; outer * m * inner];
    out.par_chunks_mut(m * inner).enumerate().for_each(|(o, block)| {
        let src = &data[o * sk * inner..(o + 1) * sk * inner];
        for q in 0..m {
            let row = &table[q * sk..(q + 1) * sk];
            let dst = &mut block[q * inner..(q + 1) * inner];
            for (i, &c) in row.iter().enumerate() {
                let s = &src[i * inner..(i + 1) * inner];
                for (d, x) in dst.iter_mut().zip(s) {
                    *d += c * x;
                }
            }
        }
    });
    out
}

/// `H(p)` at arbitrary points for a whole-space spherical quadrature image.
/// Combined over the `2^n` shifts, the kernel sines of axis `k` sum to
/// `e^{-i (p_k s_k + zeta_k)}`, so each point is one separable contraction
/// of the same `s`-grid samples as [`spherical_grid_h0`].
pub fn spherical_points_h0(f: &ImageFn, a: f64, points: &[Vec<f64>], s_panels: usize, s_order: usize) -> Result<Vec<Complex64>> {
    let ks = f.spec();
    let n = ks.n();
    if ks.mode() != CoordMode::Spherical {
        return Err(Error::Unsupported("phase-resolved evaluation needs the spherical kernel".into()));
    }
    if let Some(p) = points.iter().find(|p| p.len() != n) {
        return Err(Error::Dimension { expected: n, got: p.len() });
    }
    let (saxes, data) = separable_samples(f, a, s_panels, s_order)?;
    let z0 = ks.zeta().coords()[0].exp();
    Ok(points
        .par_iter()
        .map(|p| {
            // contract the last axis first: data is row-major with axis n-1 fastest
            let mut acc: Vec<Complex64> = data.iter().map(|&x| Complex64::new(x, 0.0)).collect();
            for k in (0..n).rev() {
                let ax = &saxes[k];
                let e: Vec<Complex64> = ax.t.iter().map(|&s| Complex64::from_polar(1.0, -p[k] * s)).collect();
                acc = acc.chunks(ax.len()).map(|row| row.iter().zip(&e).map(|(x, y)| x * y).sum()).collect();
            }
            -z0 * acc[0]
        })
        .collect())
}
