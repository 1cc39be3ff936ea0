//! Particular solutions of `A f = g`.
//!
//! The phase-system route builds the solved image `F` node by node (branch
//! by branch on the spherical kernel) and inverts it. The channel route works
//! on the phase-resolved component `H(w) = int f e^{-a s_1 - i w.s} dt`,
//! where every `S_k` acts as `i`, so that `H_f = H_g / sigma`; a zero of
//! `sigma` at the origin is handled by the finite part of `1/sigma` in
//! whitened polar coordinates.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};

use nalgebra::Matrix2;
use num_complex::Complex64;
use rayon::prelude::*;

use super::assemble::{assemble_image_equation, branch_projections, eval_rhs, BoundaryData, ImageEquation, RhsTerm};
use super::phase::PhaseTable;
use super::{DerivVars, OperatorSpec};
use crate::algebra::CdNumber;
use crate::error::{Error, Result};
use crate::kernel::{partial_sums, CoordMode, KernelSpec};
use crate::originals::{s_to_t_derivative, OriginalFn, SupportSpec};
use crate::transform::quad::composite_gauss_legendre;
use crate::transform::{
    inverse_batch, phase_resolved_h0, spherical_grid_h0, spherical_points_h0, ClosedForm, Estimate, ImageFn, InverseMethod, InverseSpec,
    PGrid, QuadSpec,
};

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
const MAX_S_PANELS: usize = 96;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolveMethod {
    /// Phase system with direct inversion for `n = 1`, the channel for
    /// whole-space spherical problems with real coefficients, and the phase
    /// system with phase-resolved inversion otherwise.
    Auto,
    PhaseSystem,
    Channel,
}

/// Quadrature for the finite-part integral in whitened polar coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct PolarSpec {
    pub rho_max: f64,
    /// Gauss-Legendre order on `[0, kappa]`.
    pub inner_order: usize,
    pub outer_panels: usize,
    pub outer_order: usize,
    /// Trapezoid nodes on the full circle (even).
    pub theta: usize,
}

impl Default for PolarSpec {
    fn default() -> Self {
        PolarSpec { rho_max: 12.0, inner_order: 16, outer_panels: 6, outer_order: 10, theta: 48 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolveSpec {
    pub mode: CoordMode,
    /// Real part of the inversion abscissa.
    pub a: f64,
    pub quad: QuadSpec,
    pub inverse: InverseSpec,
    pub polar: PolarSpec,
    pub method: SolveMethod,
    /// Shift of `p_1` applied at singular nodes of the phase system.
    pub perturb: f64,
    /// Step of the finite-difference residual.
    pub fd_step: f64,
}

impl Default for SolveSpec {
    fn default() -> Self {
        SolveSpec {
            mode: CoordMode::Spherical,
            a: 0.0,
            quad: QuadSpec::default(),
            inverse: InverseSpec::default(),
            polar: PolarSpec::default(),
            method: SolveMethod::Auto,
            perturb: 1e-3,
            fd_step: 0.1,
        }
    }
}

/// Sampled particular solution with its residual.
#[derive(Clone, Debug)]
pub struct SolveReport {
    pub points: Vec<Vec<f64>>,
    pub values: Vec<CdNumber>,
    pub errors: Vec<f64>,
    /// `|A f - g|` by finite differences where the stencil fits inside the domain.
    pub residuals: Vec<Option<f64>>,
    pub max_residual: f64,
    pub method: SolveMethod,
    pub perturbed_nodes: usize,
    /// Largest closed-form versus dense gap seen in the phase systems.
    pub cross_check: f64,
}

#[derive(Default)]
struct Stats {
    perturbed: AtomicUsize,
    cross: Mutex<f64>,
}

/// `F` at `p` from the branch phase systems.
fn solve_at(eq: &ImageEquation, terms: &[RhsTerm], ks: &KernelSpec, p: &CdNumber, stats: &Stats) -> Result<Estimate> {
    let n = ks.n();
    let pc = ks.masked_p(p)?;
    let projections: Vec<_> = if n == 1 { vec![None] } else { branch_projections(n).into_iter().map(Some).collect() };
    let mut value = CdNumber::zero(ks.r());
    let mut error = 0.0;
    let mut evals = 0;
    for (w, proj) in projections.iter().enumerate() {
        let symbol: Vec<_> = eq
            .symbol(ks, &pc)?
            .into_iter()
            .map(|(a, poly)| (a, if n == 1 { poly } else { poly.truncate_axes(w + 1) }))
            .collect();
        let system = PhaseTable::from_symbol(n, &symbol).system();
        let mut rhs = Vec::with_capacity(system.len());
        let mut rhs_err = 0.0f64;
        for m in &system.shifts {
            let shift: Vec<f64> = m.0.iter().map(|&x| x as f64).collect();
            let e = eval_rhs(terms, &ks.shifted(&shift), p, proj.as_ref())?;
            rhs_err = rhs_err.max(e.error);
            evals += e.evals;
            rhs.push(e.value);
        }
        let sol = system.solve(&rhs)?;
        {
            let mut c = stats.cross.lock().expect("stats lock");
            *c = c.max(sol.cross_check);
        }
        let bnorm = rhs.iter().map(|b| b.norm()).fold(0.0, f64::max);
        let gain = if bnorm > 0.0 { sol.x[0].norm() / bnorm } else { 0.0 };
        error += rhs_err * gain.max(1.0) + sol.residual * bnorm;
        value += &sol.x[0];
    }
    Ok(Estimate { value, error, evals })
}

fn solved_image_with(eq: &ImageEquation, terms: Vec<RhsTerm>, ks: &KernelSpec, perturb: f64, stats: Arc<Stats>) -> ImageFn {
    let eq2 = eq.clone();
    let strip = terms.iter().fold((f64::NEG_INFINITY, f64::INFINITY), |s, t| {
        let (lo, hi) = t.image.strip();
        (s.0.max(lo), s.1.min(hi))
    });
    let real = terms.iter().all(|t| t.image.is_real_valued() && t.coeff.is_real())
        && eq.operator().terms().all(|(_, c)| c.is_real());
    let func = move |spec: &KernelSpec, p: &CdNumber| match solve_at(&eq2, &terms, spec, p, &stats) {
        Err(Error::Singular(msg)) => {
            let mut q = p.promote(spec.r())?;
            q.coords_mut()[1] += perturb;
            log::warn!("singular phase system at {p} ({msg}); p_1 shifted by {perturb}");
            stats.perturbed.fetch_add(1, Ordering::Relaxed);
            solve_at(&eq2, &terms, spec, &q, &stats)
        }
        other => other,
    };
    ImageFn::closed(ks, ClosedForm::Custom(Arc::new(func)), strip, real)
}

/// The image of the particular solution: at each `p` and phase, the phase
/// systems are solved with right sides `T_m` of the assembled right side.
pub fn solved_image(eq: &ImageEquation, terms: Vec<RhsTerm>, ks: &KernelSpec, perturb: f64) -> ImageFn {
    solved_image_with(eq, terms, ks, perturb, Arc::default())
}

fn resolve(eq: &ImageEquation, g: &OriginalFn, spec: &SolveSpec) -> Result<SolveMethod> {
    let n = eq.operator().n();
    let whole = matches!(eq.domain(), SupportSpec::WholeSpace);
    let real = eq.operator().terms().all(|(_, c)| c.is_real()) && g.is_real_valued();
    match spec.method {
        SolveMethod::Auto if n == 1 => Ok(SolveMethod::PhaseSystem),
        SolveMethod::Auto if spec.mode == CoordMode::Cartesian => {
            Err(Error::Unsupported("no inversion formula for the Cartesian kernel with n >= 2".into()))
        }
        SolveMethod::Auto if whole && real => Ok(SolveMethod::Channel),
        SolveMethod::Auto => Ok(SolveMethod::PhaseSystem),
        SolveMethod::Channel if spec.mode != CoordMode::Spherical || !whole || !real || n == 1 => Err(Error::Unsupported(
            "the channel route needs a whole-space spherical problem with n >= 2 and real data".into(),
        )),
        m => Ok(m),
    }
}

/// Samples a particular solution of `A f = g` on `points` and reports the
/// finite-difference residual `|A f - g|`.
pub fn solve_pde_particular(
    op: &OperatorSpec,
    g: &OriginalFn,
    domain: &SupportSpec,
    data: &BoundaryData,
    points: &[Vec<f64>],
    spec: &SolveSpec,
) -> Result<SolveReport> {
    let n = op.n();
    if let Some(t) = points.iter().find(|t| t.len() != n) {
        return Err(Error::Dimension { expected: n, got: t.len() });
    }
    let eq = assemble_image_equation(op, domain)?;
    let method = resolve(&eq, g, spec)?;
    let ks = KernelSpec::minimal(spec.mode, n)?;
    let (stencils, extra) = residual_plan(op, domain, points, spec.fd_step);
    let mut all: Vec<Vec<f64>> = points.to_vec();
    all.extend(extra);
    let stats = Arc::new(Stats::default());
    let est = match method {
        SolveMethod::Channel => channel_solve(&eq, g, &ks, spec, &all)?,
        _ => {
            let terms = eq.rhs_terms(g, data, &ks, &spec.quad)?;
            let img = solved_image_with(&eq, terms, &ks, spec.perturb, stats.clone());
            let mut inv = spec.inverse.clone();
            if inv.method == InverseMethod::Auto && n >= 2 {
                inv.method = InverseMethod::PhaseResolved;
            }
            inverse_batch(&img, spec.a, &all, &inv)?
        }
    };
    let values: Vec<CdNumber> = est.iter().map(|e| e.value.clone()).collect();
    let residuals: Vec<Option<f64>> = stencils
        .iter()
        .enumerate()
        .map(|(i, st)| {
            st.as_ref().map(|terms| {
                let mut acc = -g.eval(&points[i]);
                for (c, idx) in terms {
                    acc += &(c * &values[*idx]);
                }
                acc.norm()
            })
        })
        .collect();
    let max_residual = residuals.iter().flatten().fold(0.0, |a: f64, &b| a.max(b));
    let cross_check = *stats.cross.lock().expect("stats lock");
    Ok(SolveReport {
        points: points.to_vec(),
        values: values[..points.len()].to_vec(),
        errors: est[..points.len()].iter().map(|e| e.error).collect(),
        residuals,
        max_residual,
        method,
        perturbed_nodes: stats.perturbed.load(Ordering::Relaxed),
        cross_check,
    })
}

/// Finite-difference weights for derivative `m` at 0 on `nodes` (Fornberg).
pub(crate) fn fd_weights(nodes: &[f64], m: usize) -> Vec<f64> {
    let np = nodes.len();
    let mut c = vec![vec![0.0; m + 1]; np];
    c[0][0] = 1.0;
    let mut c1 = 1.0;
    let mut c4 = nodes[0];
    for i in 1..np {
        let mn = i.min(m);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = nodes[i];
        for j in 0..i {
            let c3 = nodes[i] - nodes[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[i][k] = c1 * (k as f64 * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                }
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for k in (1..=mn).rev() {
                c[j][k] = (c4 * c[j][k] - k as f64 * c[j][k - 1]) / c3;
            }
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    c.iter().map(|row| row[m]).collect()
}

/// Centered stencil of fourth-order accuracy for derivative `m`: `(offset, weight)`.
fn stencil(m: u32) -> Vec<(i64, f64)> {
    if m == 0 {
        return vec![(0, 1.0)];
    }
    let half = ((m as i64 + 1) / 2) * 2 - 1 + 4;
    let r = (half - 1) / 2;
    let offs: Vec<i64> = (-r..=r).collect();
    let nodes: Vec<f64> = offs.iter().map(|&o| o as f64).collect();
    offs.into_iter().zip(fd_weights(&nodes, m as usize)).filter(|(_, w)| w.abs() > 1e-14).collect()
}

type Stencil = Vec<(CdNumber, usize)>;

/// For every point: the `(coefficient, sample index)` list of `A f` by
/// tensor finite differences, and the extra sample points it needs.
fn residual_plan(op: &OperatorSpec, domain: &SupportSpec, points: &[Vec<f64>], h: f64) -> (Vec<Option<Stencil>>, Vec<Vec<f64>>) {
    let n = op.n();
    let bounds = domain.bounds(n);
    let mut t_terms: Vec<(Vec<u32>, CdNumber)> = Vec::new();
    for (j, a) in op.terms() {
        match op.vars() {
            DerivVars::T => t_terms.push((j.clone(), a.clone())),
            DerivVars::S => {
                for (alpha, c) in s_to_t_derivative(j) {
                    t_terms.push((alpha, a.scale(c)));
                }
            }
        }
    }
    let mut extra: Vec<Vec<f64>> = Vec::new();
    let mut index: HashMap<(usize, Vec<i64>), usize> = HashMap::new();
    let base = points.len();
    let plans = points
        .iter()
        .enumerate()
        .map(|(i, t)| {
            let mut out: Stencil = Vec::new();
            for (alpha, a) in &t_terms {
                let axes: Vec<Vec<(i64, f64)>> = alpha.iter().map(|&m| stencil(m)).collect();
                let mut idx = vec![0usize; n];
                loop {
                    let offs: Vec<i64> = (0..n).map(|k| axes[k][idx[k]].0).collect();
                    let w: f64 = (0..n).map(|k| axes[k][idx[k]].1 / h.powi(alpha[k] as i32)).product();
                    let x: Vec<f64> = (0..n).map(|k| t[k] + offs[k] as f64 * h).collect();
                    // one spare step of margin to the boundary
                    if (0..n).any(|k| x[k] - h < bounds[k].0 || x[k] + h > bounds[k].1) {
                        return None;
                    }
                    let slot = if offs.iter().all(|&o| o == 0) {
                        i
                    } else {
                        *index.entry((i, offs.clone())).or_insert_with(|| {
                            extra.push(x.clone());
                            base + extra.len() - 1
                        })
                    };
                    out.push((a.scale(w), slot));
                    let mut k = 0;
                    while k < n {
                        idx[k] += 1;
                        if idx[k] < axes[k].len() {
                            break;
                        }
                        idx[k] = 0;
                        k += 1;
                    }
                    if k == n {
                        break;
                    }
                }
            }
            Some(out)
        })
        .collect();
    (plans, extra)
}

/// Inverse Fourier sum in the partial sums with `H_f = H_g / sigma`.
fn channel_solve(eq: &ImageEquation, g: &OriginalFn, ks: &KernelSpec, spec: &SolveSpec, ts: &[Vec<f64>]) -> Result<Vec<Estimate>> {
    let n = ks.n();
    let a = spec.a;
    let gimg = ImageFn::quadrature(g, ks, &spec.quad)?;
    let zero = vec![0.0; n];
    let sigma0 = eq.channel_symbol(ks, a, &zero)?;
    let unit_scale = (0..n)
        .map(|k| {
            let mut e = zero.clone();
            e[k] = 1.0;
            eq.channel_symbol(ks, a, &e).map(|s| s.norm())
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold(sigma0.norm(), f64::max);
    if sigma0.norm() <= 1e-12 * unit_scale {
        return finite_part_solve(eq, &gimg, ks, spec, ts);
    }
    let grid = PGrid::new(n, &spec.inverse);
    let (h, qerr): (Vec<Complex64>, Vec<f64>) = if matches!(g.support(), SupportSpec::WholeSpace) && spec.inverse.fast_path {
        let h = spherical_grid_h0(&gimg, a, &grid, spec.inverse.s_panels, spec.inverse.s_order)?;
        let z = vec![0.0; h.len()];
        (h, z)
    } else {
        (0..grid.len())
            .into_par_iter()
            .map(|idx| phase_resolved_h0(&gimg, a, &grid.node(idx).0))
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .unzip()
    };
    let mut smax = 0.0f64;
    let mut smin = f64::INFINITY;
    let mut hf = Vec::with_capacity(h.len());
    for (idx, hv) in h.iter().enumerate() {
        let sigma = eq.channel_symbol(ks, a, &grid.node(idx).0)?;
        smax = smax.max(sigma.norm());
        smin = smin.min(sigma.norm());
        hf.push(hv / sigma);
    }
    if !(smin > 1e-12 * smax) {
        return Err(Error::Singular(format!("symbol vanishes on the inversion grid (min |sigma| = {smin:.3e})")));
    }
    let scale = (2.0 * PI).powi(-(n as i32));
    let qsum: f64 = qerr.iter().enumerate().map(|(i, e)| e * grid.node(i).1 / smin).sum();
    let out = ts
        .par_iter()
        .map(|t| {
            let s = partial_sums(t);
            let mut full = Complex64::new(0.0, 0.0);
            let mut half = Complex64::new(0.0, 0.0);
            for (idx, hv) in hf.iter().enumerate() {
                let (p, w, inner) = grid.node(idx);
                let ph: f64 = p.iter().zip(&s).map(|(x, y)| x * y).sum();
                let term = hv * Complex64::from_polar(w, ph);
                full += term;
                if inner {
                    half += term;
                }
            }
            let e = (a * s[0]).exp() * scale;
            Estimate { value: CdNumber::real(ks.r(), e * full.re), error: e * ((full - half).re.abs() + qsum), evals: hf.len() }
        })
        .collect();
    Ok(out)
}

/// Finite part `(2 pi)^-2 int [H_g(w) e^{i w.s} - H_g(0) 1_{|xi| < kappa}] / sigma(w) dw`
/// in whitened coordinates `w = L^{-T} xi`, `B = L L^T` the Hessian form of
/// `-sigma` at the origin and `kappa = 2 e^{-gamma}`, so that the quadratic
/// part of `1/sigma` inverts to `(1/2 pi) ln |L^{-1} s| / sqrt(det B)`.
fn finite_part_solve(eq: &ImageEquation, gimg: &ImageFn, ks: &KernelSpec, spec: &SolveSpec, ts: &[Vec<f64>]) -> Result<Vec<Estimate>> {
    let n = ks.n();
    if n != 2 || spec.a != 0.0 {
        return Err(Error::Unsupported("finite-part regularization is implemented for n = 2 at a = 0".into()));
    }
    let lin: f64 = [[1.0, 0.0], [0.0, 1.0]]
        .iter()
        .map(|e| eq.channel_part(ks, 0.0, e, Some(1)).map(|s| s.norm()))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    let q = |w: [f64; 2]| eq.channel_part(ks, 0.0, &w, Some(2));
    let (q1, q2, q12) = (q([1.0, 0.0])?, q([0.0, 1.0])?, q([1.0, 1.0])?);
    if lin > 0.0 || [q1, q2, q12].iter().any(|z| z.im.abs() > 1e-12 * (1.0 + z.re.abs())) {
        return Err(Error::Unsupported("the zero of the symbol is not a nondegenerate quadratic one".into()));
    }
    let b = Matrix2::new(-q1.re, -(q12.re - q1.re - q2.re) / 2.0, -(q12.re - q1.re - q2.re) / 2.0, -q2.re);
    let chol = b
        .cholesky()
        .ok_or_else(|| Error::Unsupported("the quadratic part of the symbol is not definite".into()))?;
    let l = chol.l();
    let lt_inv = l.transpose().try_inverse().expect("triangular factor of a definite form");
    let det = b.determinant();
    let kappa = 2.0 * (-EULER_GAMMA).exp();
    let ps = &spec.polar;
    if ps.theta < 4 || ps.theta % 4 != 0 {
        return Err(Error::InvalidArgument("theta nodes must be a positive multiple of 4".into()));
    }
    let mut radial = composite_gauss_legendre(0.0, kappa, 1, ps.inner_order);
    radial.append(composite_gauss_legendre(kappa, ps.rho_max, ps.outer_panels, ps.outer_order));
    let half_theta = ps.theta / 2;
    let dtheta = 2.0 * PI / ps.theta as f64;
    struct Node {
        omega: [f64; 2],
        weight: f64,
        inside: bool,
        even: bool,
        hs: Complex64,
        h0s: Complex64,
        err: f64,
    }
    let coords: Vec<(f64, f64, usize)> = radial
        .t
        .iter()
        .zip(&radial.w)
        .flat_map(|(&r, &w)| (0..half_theta).map(move |j| (r, w, j)))
        .collect();
    let omegas: Vec<Vec<f64>> = coords
        .iter()
        .map(|&(rho, _, j)| {
            let th = j as f64 * dtheta;
            let om = lt_inv * nalgebra::Vector2::new(rho * th.cos(), rho * th.sin());
            vec![om[0], om[1]]
        })
        .chain(std::iter::once(vec![0.0, 0.0]))
        .collect();
    let separable = spec.inverse.fast_path && gimg.original().is_some_and(|g| matches!(g.support(), SupportSpec::WholeSpace));
    let mut hvals: Vec<(Complex64, f64)> = if separable {
        // refine the s-grid until two successive grids agree
        let mut panels = spec.inverse.s_panels.max(1);
        let mut prev = spherical_points_h0(gimg, 0.0, &omegas, panels, spec.inverse.s_order)?;
        loop {
            panels *= 2;
            let next = spherical_points_h0(gimg, 0.0, &omegas, panels, spec.inverse.s_order)?;
            let top = next.iter().map(|h| h.norm()).fold(0.0, f64::max);
            let gap = next.iter().zip(&prev).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
            let done = gap <= 1e-8 * top || panels >= MAX_S_PANELS;
            let out: Vec<(Complex64, f64)> = next.iter().zip(&prev).map(|(a, b)| (*a, (a - b).norm())).collect();
            prev = next;
            if done {
                break out;
            }
        }
    } else {
        omegas.par_iter().map(|om| phase_resolved_h0(gimg, 0.0, om)).collect::<Result<_>>()?
    };
    let (h0, h0_err) = hvals.pop().expect("origin sample");
    let nodes: Vec<Node> = coords
        .par_iter()
        .zip(&omegas)
        .zip(&hvals)
        .map(|((&(rho, wr, j), om), &(hv, err))| {
            let omega = [om[0], om[1]];
            let sigma = eq.channel_symbol(ks, 0.0, &omega)?;
            if sigma.norm() <= 1e-12 * rho * rho {
                return Err(Error::Singular(format!("symbol vanishes at {omega:?}")));
            }
            Ok(Node {
                omega,
                weight: wr * rho * dtheta,
                inside: rho < kappa,
                even: j % 2 == 0,
                hs: hv / sigma,
                h0s: h0 / sigma,
                err: (err + if rho < kappa { h0_err } else { 0.0 }) / sigma.norm(),
            })
        })
        .collect::<Result<_>>()?;
    // conjugate symmetry: the other half circle contributes the complex conjugate
    let scale = 2.0 / ((2.0 * PI).powi(2) * det.sqrt());
    let qerr: f64 = nodes.iter().map(|nd| nd.weight * nd.err).sum::<f64>() * scale;
    let out = ts
        .par_iter()
        .map(|t| {
            let s = partial_sums(t);
            let mut full = 0.0;
            let mut coarse = 0.0;
            for nd in &nodes {
                let ph = nd.omega[0] * s[0] + nd.omega[1] * s[1];
                let mut v = nd.hs * Complex64::from_polar(1.0, ph);
                if nd.inside {
                    v -= nd.h0s;
                }
                let x = nd.weight * v.re;
                full += x;
                if nd.even {
                    coarse += 2.0 * x;
                }
            }
            Estimate {
                value: CdNumber::real(ks.r(), scale * full),
                error: scale * (full - coarse).abs() + qerr,
                evals: nodes.len(),
            }
        })
        .collect();
    Ok(out)
}
