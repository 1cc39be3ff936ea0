//! Constructors for the individual identities.

use std::sync::Arc;

use crate::algebra::CdNumber;
use crate::error::{Error, Result};
use crate::kernel::{partial_sums, CoordMode, KernelSpec, SPoly};
use crate::originals::OriginalFn;
use crate::transform::{Estimate, ImageFn, PhaseShift, QuadSpec};

use super::{CheckReport, SamplePlan, Side, TheoremCheck, Verdict};

/// `F(f)` at `p`.
fn image_side(f: &OriginalFn, quad: &QuadSpec) -> Side {
    let (f, quad) = (f.clone(), quad.clone());
    Arc::new(move |spec: &KernelSpec, p: &CdNumber| ImageFn::quadrature(&f, spec, &quad)?.eval(p))
}

fn sum_estimates(terms: Vec<Estimate>, r: u32) -> Estimate {
    let mut value = CdNumber::zero(r);
    let mut error = 0.0;
    let mut evals = 0;
    for t in terms {
        value += &t.value.promote(r.max(t.value.level())).unwrap_or(t.value);
        error += t.error;
        evals += t.evals;
    }
    Estimate { value, error, evals }
}

/// Face-sum expansion of `F(d^alpha f chi)` over the support box of `f`:
/// each axis either stays interior (`R_k^{alpha_k}`) or contributes a face
/// term `+-R_k^{alpha_k - 1 - q} F^{face}(d_k^q ...)` at a finite bound
/// (`-` at the lower, `+` at the upper bound). Returns `(P(S), image)` pairs
/// whose sum equals the transform of the derivative.
pub fn derivative_expansion(
    f: &OriginalFn,
    spec: &KernelSpec,
    quad: &QuadSpec,
    alpha: &[u32],
    p: &[f64],
) -> Result<Vec<(SPoly, ImageFn)>> {
    let n = spec.n();
    if alpha.len() != n {
        return Err(Error::Dimension { expected: n, got: alpha.len() });
    }
    let bounds = f.support().bounds(n);
    // per axis: (exponent of R, derivative order, face, sign)
    let mut options: Vec<Vec<(u32, u32, Option<f64>, f64)>> = Vec::with_capacity(n);
    for k in 0..n {
        let a = alpha[k];
        if a > 0 && !spec.is_active(k + 1) {
            return Err(Error::InvalidArgument(format!("derivative along inactive axis {}", k + 1)));
        }
        let mut opts = vec![(a, 0, None, 1.0)];
        for (bound, sign) in [(bounds[k].0, -1.0), (bounds[k].1, 1.0)] {
            if bound.is_finite() {
                for q in 0..a {
                    opts.push((a - 1 - q, q, Some(bound), sign));
                }
            }
        }
        options.push(opts);
    }
    let mut out = Vec::new();
    let mut idx = vec![0usize; n];
    loop {
        let mut poly = SPoly::identity(n);
        let mut d = vec![0u32; n];
        let mut faces = Vec::new();
        for k in 0..n {
            let (e, q, face, sign) = options[k][idx[k]];
            if e > 0 {
                poly = poly.mul(&SPoly::r_operator(spec, k + 1, p).pow(e));
            }
            poly = poly.scale(sign);
            d[k] = q;
            if let Some(b) = face {
                faces.push((k + 1, b));
            }
        }
        let g = if d.iter().all(|&x| x == 0) { f.clone() } else { f.derivative(&d)? };
        let img = if faces.is_empty() { ImageFn::quadrature(&g, spec, quad)? } else { ImageFn::face(&g, spec, quad, faces)? };
        out.push((poly, img));
        let mut k = 0;
        while k < n {
            idx[k] += 1;
            if idx[k] < options[k].len() {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
        if k == n {
            break;
        }
    }
    Ok(out)
}

fn derivative_check(
    id: &str,
    description: String,
    f: &OriginalFn,
    spec: &KernelSpec,
    quad: &QuadSpec,
    alpha: &[u32],
    plan: SamplePlan,
) -> Result<TheoremCheck> {
    if alpha.len() != spec.n() {
        return Err(Error::Dimension { expected: spec.n(), got: alpha.len() });
    }
    let df = f.derivative(alpha)?;
    let lhs = image_side(&df, quad);
    let (f2, q2, a2) = (f.clone(), quad.clone(), alpha.to_vec());
    let rhs: Side = Arc::new(move |spec: &KernelSpec, p: &CdNumber| {
        let pc = spec.masked_p(p)?;
        let mut terms = Vec::new();
        for (poly, img) in derivative_expansion(&f2, spec, &q2, &a2, &pc)? {
            terms.push(img.apply_poly(&poly).eval(p)?);
        }
        Ok(sum_estimates(terms, spec.r()))
    });
    Ok(TheoremCheck::new(id, description, spec, lhs, rhs, plan))
}

/// First-order derivative identity for the Cartesian kernel:
/// `F(d_j f) = -F^{t_j = 0}(f) + (p_0 + p_j S_j) F(f)` on `U_{1..1}`
/// (faces at every finite bound of the support in general).
pub fn check_derivative_cartesian(f: &OriginalFn, j: usize, spec: &KernelSpec, quad: &QuadSpec, plan: SamplePlan) -> Result<TheoremCheck> {
    if spec.mode() != CoordMode::Cartesian {
        return Err(Error::InvalidArgument("Cartesian derivative check needs the Cartesian kernel".into()));
    }
    let alpha = unit_index(spec.n(), j, 1)?;
    derivative_check("derivative-cartesian", format!("F(d_{j} f) on {}", f.name()), f, spec, quad, &alpha, plan)
}

/// Derivative identity of order `order` along `t_j` for the spherical kernel,
/// with `R_j = p_0 + sum_{k<=j} p_k S_k`; order 2 is the binomial form
/// `R_j^2 F - R_j F^{face}(f) - F^{face}(d_j f)`.
pub fn check_derivative_spherical(
    f: &OriginalFn,
    j: usize,
    order: u32,
    spec: &KernelSpec,
    quad: &QuadSpec,
    plan: SamplePlan,
) -> Result<TheoremCheck> {
    if spec.mode() != CoordMode::Spherical {
        return Err(Error::InvalidArgument("spherical derivative check needs the spherical kernel".into()));
    }
    let alpha = unit_index(spec.n(), j, order)?;
    derivative_check("derivative-spherical", format!("F(d_{j}^{order} f) on {}", f.name()), f, spec, quad, &alpha, plan)
}

/// Two-trace identity on a box along axis `j`:
/// `F(d_j f chi_Q) = F^{t_j = b_j}(f) - F^{t_j = a_j}(f) + R_j F(f chi_Q)`.
pub fn check_boundary_box(f: &OriginalFn, j: usize, spec: &KernelSpec, quad: &QuadSpec, plan: SamplePlan) -> Result<TheoremCheck> {
    let b = f.support().bounds(spec.n());
    if j == 0 || j > spec.n() || !(b[j - 1].0.is_finite() || b[j - 1].1.is_finite()) {
        return Err(Error::InvalidArgument(format!("axis {j} has no finite face")));
    }
    let alpha = unit_index(spec.n(), j, 1)?;
    derivative_check("box-boundary", format!("two-trace identity along t_{j} on {}", f.name()), f, spec, quad, &alpha, plan)
}

/// `R^alpha F(f chi_Q)` against `F(d^alpha f chi_Q)` plus the face sum.
pub fn check_iterated_derivatives_box(
    f: &OriginalFn,
    alpha: &[u32],
    spec: &KernelSpec,
    quad: &QuadSpec,
    plan: SamplePlan,
) -> Result<TheoremCheck> {
    derivative_check("box-iterated", format!("R^{alpha:?} with face sum on {}", f.name()), f, spec, quad, alpha, plan)
}

/// Whole-space identities in the partial sums for the spherical kernel:
/// `F(d f/d s_1) = (p_0 + p_1 S_1) F` and `F(d f/d s_k) = p_k S_k F` for `k >= 2`.
pub fn check_s_derivative(f: &OriginalFn, k: usize, spec: &KernelSpec, quad: &QuadSpec, plan: SamplePlan) -> Result<TheoremCheck> {
    if spec.mode() != CoordMode::Spherical {
        return Err(Error::InvalidArgument("partial-sum derivatives need the spherical kernel".into()));
    }
    if !f.support().bounds(spec.n()).iter().all(|b| !b.0.is_finite() && !b.1.is_finite()) {
        return Err(Error::InvalidArgument("partial-sum derivative check needs a whole-space original".into()));
    }
    let beta = unit_index(spec.n(), k, 1)?;
    let lhs = image_side(&f.s_derivative(&beta)?, quad);
    let (f2, q2) = (f.clone(), quad.clone());
    let rhs: Side = Arc::new(move |spec: &KernelSpec, p: &CdNumber| {
        let pc = spec.masked_p(p)?;
        let n = spec.n();
        let mut poly = SPoly::s_power(n, k, 1).scale(pc[k]);
        if k == 1 {
            poly = poly.add(&SPoly::scalar(n, pc[0]));
        }
        ImageFn::quadrature(&f2, spec, &q2)?.apply_poly(&poly).eval(p)
    });
    Ok(TheoremCheck::new("derivative-spherical", format!("F(d f/d s_{k}) on {}", f.name()), spec, lhs, rhs, plan))
}

fn unit_index(n: usize, j: usize, order: u32) -> Result<Vec<u32>> {
    if j == 0 || j > n {
        return Err(Error::InvalidArgument(format!("axis {j} outside 1..={n}")));
    }
    let mut a = vec![0; n];
    a[j - 1] = order;
    Ok(a)
}

/// `F(f(alpha t))(p) = F(f)(p / alpha) / alpha^m` with `m` the number of active axes.
pub fn check_scaling(f: &OriginalFn, alpha: f64, spec: &KernelSpec, quad: &QuadSpec, plan: SamplePlan) -> Result<TheoremCheck> {
    let lhs = image_side(&f.scaled(alpha)?, quad);
    let (f2, q2) = (f.clone(), quad.clone());
    let rhs: Side = Arc::new(move |spec: &KernelSpec, p: &CdNumber| {
        let e = ImageFn::quadrature(&f2, spec, &q2)?.eval(&p.scale(1.0 / alpha))?;
        let c = alpha.powi(-((1..=spec.n()).filter(|&j| spec.is_active(j)).count() as i32));
        Ok(Estimate { value: e.value.scale(c), error: e.error * c, evals: e.evals })
    });
    Ok(TheoremCheck::new("scaling", format!("f({alpha} t) for {}", f.name()), spec, lhs, rhs, plan))
}

/// `F(f(t - tau))(p; zeta) = F(f)(p; zeta + <p, tau])` with the phase
/// increment `p_0 s_1(tau) + sum p_j s_j(tau) i_j` (spherical) or
/// `p_0 s_1(tau) + sum p_j tau_j i_j` (Cartesian).
pub fn check_shift(f: &OriginalFn, tau: &[f64], spec: &KernelSpec, quad: &QuadSpec, plan: SamplePlan) -> Result<TheoremCheck> {
    let lhs = image_side(&f.shifted(tau)?, quad);
    let (f2, q2, tau2) = (f.clone(), quad.clone(), tau.to_vec());
    let rhs: Side = Arc::new(move |spec: &KernelSpec, p: &CdNumber| {
        let pc = spec.masked_p(p)?;
        let s = partial_sums(&tau2);
        let mut dz = CdNumber::zero(spec.r());
        dz[0] = pc[0] * s[0];
        for j in 1..=spec.n() {
            let x = match spec.mode() {
                CoordMode::Spherical => s[j - 1],
                CoordMode::Cartesian => tau2[j - 1],
            };
            dz[j] = pc[j] * x;
        }
        ImageFn::quadrature(&f2, &spec.zeta_added(&dz), &q2)?.eval(p)
    });
    Ok(TheoremCheck::new("shift", format!("f(t - {tau:?}) for {}", f.name()), spec, lhs, rhs, plan))
}

/// `F(e^{b s_1} f)(p) = F(f)(p - b)`.
pub fn check_exp_shift(f: &OriginalFn, b: f64, spec: &KernelSpec, quad: &QuadSpec, plan: SamplePlan) -> Result<TheoremCheck> {
    let lhs = image_side(&f.exp_weighted(b), quad);
    let (f2, q2) = (f.clone(), quad.clone());
    let rhs: Side = Arc::new(move |spec: &KernelSpec, p: &CdNumber| {
        let mut q = p.clone();
        q[0] -= b;
        ImageFn::quadrature(&f2, spec, &q2)?.eval(&q)
    });
    Ok(TheoremCheck::new("exp-shift", format!("e^({b} s_1) f for {}", f.name()), spec, lhs, rhs, plan))
}

/// Richardson-extrapolated central difference of `F` along `h` at `p`.
fn directional_fd(img: &ImageFn, p: &CdNumber, h: &CdNumber, eps: f64) -> Result<Estimate> {
    let at = |x: f64| -> Result<Estimate> { img.eval(&(p + &h.scale(x))) };
    let d = |e: f64| -> Result<(CdNumber, f64)> {
        let (a, b) = (at(e)?, at(-e)?);
        Ok(((&a.value - &b.value).scale(0.5 / e), (a.error + b.error) * 0.5 / e))
    };
    let (d1, e1) = d(eps)?;
    let (d2, e2) = d(0.5 * eps)?;
    let value = (&d2.scale(4.0) - &d1).scale(1.0 / 3.0);
    Ok(Estimate { value, error: (4.0 * e2 + e1) / 3.0, evals: 0 })
}

/// Image derivative along `h`: `(dF/dp).h = -F(s_1 f) h_0 - sum_j S_j F(xi_j f) h_j`
/// with `xi = s` (spherical) or `xi = t` (Cartesian). The left side is a
/// finite difference with step `eps`.
pub fn check_image_derivative(f: &OriginalFn, h: &[f64], eps: f64, spec: &KernelSpec, quad: &QuadSpec, plan: SamplePlan) -> Result<TheoremCheck> {
    let n = spec.n();
    if h.len() != n + 1 {
        return Err(Error::Dimension { expected: n + 1, got: h.len() });
    }
    let spherical = spec.mode() == CoordMode::Spherical;
    let (f1, q1, h1) = (f.clone(), quad.clone(), h.to_vec());
    let lhs: Side = Arc::new(move |spec: &KernelSpec, p: &CdNumber| {
        let hv = CdNumber::from_slice(spec.r(), &h1)?;
        directional_fd(&ImageFn::quadrature(&f1, spec, &q1)?, p, &hv, eps)
    });
    let mut weighted = vec![f.times_coordinate(1, true)?];
    for j in 1..=n {
        weighted.push(f.times_coordinate(j, spherical)?);
    }
    let (q2, h2) = (quad.clone(), h.to_vec());
    let rhs: Side = Arc::new(move |spec: &KernelSpec, p: &CdNumber| {
        let mut terms = Vec::new();
        for (k, g) in weighted.iter().enumerate() {
            if h2[k] == 0.0 {
                continue;
            }
            let mut img = ImageFn::quadrature(g, spec, &q2)?;
            if k > 0 {
                img = img.s_apply(k, 1);
            }
            let e = img.eval(p)?;
            terms.push(Estimate { value: e.value.scale(-h2[k]), error: e.error * h2[k].abs(), evals: e.evals });
        }
        Ok(sum_estimates(terms, spec.r()))
    });
    Ok(TheoremCheck::new("image-derivative", format!("dF/dp along {h:?} for {}", f.name()), spec, lhs, rhs, plan)
        .with_floor(1e-5))
}

/// `F(f chi_U) = R_1 ... R_n F(g)` with `g(t) = int_0^{t} f`, supplied by the caller.
pub fn check_integration(f: &OriginalFn, g: &OriginalFn, spec: &KernelSpec, quad: &QuadSpec, plan: SamplePlan) -> Result<TheoremCheck> {
    let lhs = image_side(f, quad);
    let (g2, q2) = (g.clone(), quad.clone());
    let rhs: Side = Arc::new(move |spec: &KernelSpec, p: &CdNumber| {
        let pc = spec.masked_p(p)?;
        let m: Vec<u32> = (1..=spec.n()).map(|j| u32::from(spec.is_active(j))).collect();
        let poly = SPoly::r_monomial(spec, &m, &pc);
        ImageFn::quadrature(&g2, spec, &q2)?.apply_poly(&poly).eval(p)
    });
    Ok(TheoremCheck::new("integration", format!("R_1..R_n F(int f) for {}", f.name()), spec, lhs, rhs, plan))
}

/// Periodicity in the phase: `T_{4 e_j} F = F` for every axis and
/// `T_{2 e_1} F = -F` (spherical kernel).
pub fn check_periodicity(f: &OriginalFn, spec: &KernelSpec, quad: &QuadSpec, plan: SamplePlan) -> Result<Vec<TheoremCheck>> {
    if spec.mode() != CoordMode::Spherical {
        return Err(Error::InvalidArgument("phase periodicity is a property of the spherical kernel".into()));
    }
    let n = spec.n();
    let mut out = Vec::new();
    let cases: Vec<(Vec<i64>, f64, String)> = (1..=n)
        .map(|j| {
            let mut m = vec![0; n];
            m[j - 1] = 4;
            (m, 1.0, format!("T_(4 e_{j}) F = F"))
        })
        .chain(std::iter::once({
            let mut m = vec![0; n];
            m[0] = 2;
            (m, -1.0, "T_(2 e_1) F = -F".to_string())
        }))
        .collect();
    for (m, sign, desc) in cases {
        let (f1, q1) = (f.clone(), quad.clone());
        let shift = PhaseShift(m);
        let lhs: Side = Arc::new(move |spec: &KernelSpec, p: &CdNumber| ImageFn::quadrature(&f1, spec, &q1)?.t_shift(&shift).eval(p));
        let (f2, q2) = (f.clone(), quad.clone());
        let rhs: Side = Arc::new(move |spec: &KernelSpec, p: &CdNumber| {
            let e = ImageFn::quadrature(&f2, spec, &q2)?.eval(p)?;
            Ok(Estimate { value: e.value.scale(sign), ..e })
        });
        out.push(TheoremCheck::new("periodicity", format!("{desc} for {}", f.name()), spec, lhs, rhs, plan.clone()));
    }
    Ok(out)
}

/// Cauchy-Riemann residual on the slice `(p_0, p_1)` with `p_k = 0` for
/// `k >= 2`: there the kernel lives in the complex plane spanned by `1` and
/// the unit `v` of `M`, and `dF/dp_1 = (dF/dp_0) v`. Valid for `n = 1` and
/// for the spherical kernel.
pub fn check_holomorphy(f: &OriginalFn, eps: f64, spec: &KernelSpec, quad: &QuadSpec, plan: SamplePlan) -> Result<TheoremCheck> {
    if spec.mode() == CoordMode::Cartesian && spec.n() > 1 {
        return Err(Error::Unsupported("the Cartesian kernel has no complex slice for n >= 2".into()));
    }
    let slice = |p: &CdNumber| {
        let mut q = CdNumber::zero(p.level());
        q[0] = p[0];
        q[1] = p[1];
        q
    };
    let (f1, q1) = (f.clone(), quad.clone());
    let lhs: Side = Arc::new(move |spec: &KernelSpec, p: &CdNumber| {
        directional_fd(&ImageFn::quadrature(&f1, spec, &q1)?, &slice(p), &CdNumber::unit(spec.r(), 1), eps)
    });
    let (f2, q2) = (f.clone(), quad.clone());
    let rhs: Side = Arc::new(move |spec: &KernelSpec, p: &CdNumber| {
        let r = spec.r();
        let mut t = vec![0.0; spec.n()];
        t[0] = 1.0;
        let v = (&spec.u(&CdNumber::unit(r, 1), &t)? - &spec.u(&CdNumber::unit(r, 1), &vec![0.0; spec.n()])?).im();
        let d0 = directional_fd(&ImageFn::quadrature(&f2, spec, &q2)?, &slice(p), &CdNumber::one(r), eps)?;
        Ok(Estimate { value: &d0.value * &v, ..d0 })
    });
    Ok(TheoremCheck::new("holomorphy", format!("complex slice (p_0, p_1) for {}", f.name()), spec, lhs, rhs, plan))
}

/// Direction of a limit-value ladder.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LimitMode {
    /// Real rays `p_0 -> inf`: `sum_{L != all} (-1)^{|L|} prod_{j not in L} R_j F^{L}(f)`
    /// tends to `(-1)^{n+1} f(0) e^{-u(0,0;zeta)}`, where `F^L` fixes the axes in `L` at 0.
    Initial,
    /// `n = 1`, `p_0 -> 0`: `p F(p)` tends to `lim_{t -> inf} f(t)`.
    Final,
}

/// Evaluates the limit statement along a geometric ladder of real `p_0`,
/// extrapolates with a Richardson table (ratio 2) and compares with the
/// target. `target` is required for [`LimitMode::Final`]; for the initial
/// value it defaults to the expression in `f(0)`. A miss whose ladder is
/// still contracting is flagged as slow convergence rather than failed.
pub fn check_limit_values(
    f: &OriginalFn,
    mode: LimitMode,
    spec: &KernelSpec,
    quad: &QuadSpec,
    ladder: &[f64],
    tol: f64,
    target: Option<CdNumber>,
) -> Result<CheckReport> {
    let n = spec.n();
    let r = spec.r();
    if ladder.len() < 2 {
        return Err(Error::InvalidArgument("limit ladder needs at least two points".into()));
    }
    let mut quad = quad.clone();
    if mode == LimitMode::Final {
        // small Re p decays slowly: the truncation must follow 1/p_0
        let pmin = ladder.iter().cloned().fold(f64::INFINITY, f64::min);
        let need = quad.decay_digits / (pmin - f.strip().0);
        quad.radius = quad.radius.iter().map(|r| r.max(need)).collect();
    }
    let quad = &quad;
    let mut values = Vec::new();
    let mut qerr: f64 = 0.0;
    for &p0 in ladder {
        let p = CdNumber::real(r, p0);
        let pc = spec.masked_p(&p)?;
        let (v, e) = match mode {
            LimitMode::Initial => {
                let mut acc = CdNumber::zero(r);
                let mut err = 0.0;
                for mask in 0..(1usize << n) - 1 {
                    let faces: Vec<(usize, f64)> = (0..n).filter(|k| mask >> k & 1 == 1).map(|k| (k + 1, 0.0)).collect();
                    let mut m = vec![0u32; n];
                    for (k, e) in m.iter_mut().enumerate() {
                        *e = u32::from(mask >> k & 1 == 0);
                    }
                    let sign = if faces.len() % 2 == 0 { 1.0 } else { -1.0 };
                    let img = if faces.is_empty() { ImageFn::quadrature(f, spec, quad)? } else { ImageFn::face(f, spec, quad, faces)? };
                    let est = img.apply_poly(&SPoly::r_monomial(spec, &m, &pc).scale(sign)).eval(&p)?;
                    acc += &est.value.promote(r)?;
                    err += est.error;
                }
                (acc, err)
            }
            LimitMode::Final => {
                if n != 1 {
                    return Err(Error::Unsupported("the final-value ladder is implemented for n = 1".into()));
                }
                let est = ImageFn::quadrature(f, spec, quad)?.eval(&p)?;
                (est.value.scale(p0), est.error * p0)
            }
        };
        values.push(v);
        qerr = qerr.max(e);
    }
    // Richardson in h = 1/p_0 (initial) or h = p_0 (final), ladder ratio 2.
    let mut table = values.clone();
    for k in 1..table.len() {
        let w = 2f64.powi(k as i32);
        table = table.windows(2).map(|x| (&x[1].scale(w) - &x[0]).scale(1.0 / (w - 1.0))).collect();
    }
    let extrapolated = table.remove(0);
    let target = match (mode, target) {
        (_, Some(t)) => t.promote(r)?,
        (LimitMode::Initial, None) => {
            let sign = if n % 2 == 1 { 1.0 } else { -1.0 };
            let f0 = f.eval(&vec![0.0; n]);
            (&f0 * &spec.exp_neg_u(&CdNumber::zero(r), &vec![0.0; n])?).scale(sign)
        }
        (LimitMode::Final, None) => return Err(Error::InvalidArgument("final-value check needs a target".into())),
    };
    let residual = (&extrapolated - &target).norm();
    let raw = (values.last().unwrap() - &target).norm();
    let diffs: Vec<f64> = values.windows(2).map(|w| (&w[1] - &w[0]).norm()).collect();
    let contracting = diffs.windows(2).all(|w| w[1] < w[0]);
    let tolerance = tol.max(10.0 * qerr);
    let (verdict, note) = if residual <= tolerance {
        (Verdict::Pass, None)
    } else if contracting {
        (Verdict::Flagged, Some(format!("slow convergence: last ladder value misses by {raw:.3e}")))
    } else {
        (Verdict::Fail, None)
    };
    Ok(CheckReport {
        id: match mode {
            LimitMode::Initial => "initial-value",
            LimitMode::Final => "final-value",
        }
        .into(),
        description: format!("limit ladder {ladder:?} for {}", f.name()),
        samples: ladder.len(),
        max_residual: residual,
        mean_residual: residual,
        quad_error: qerr,
        tolerance,
        verdict,
        note,
    })
}
