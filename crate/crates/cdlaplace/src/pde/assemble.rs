//! Image equation `sum_j a_j R^j F = G - sum (face terms)` for constant
//! coefficients on the whole space, a quadrant or a box.

use num_complex::Complex64;

use super::{DerivVars, OperatorSpec};
use crate::algebra::CdNumber;
use crate::error::{Error, Result};
use crate::kernel::{CoordMode, KernelSpec, SPoly};
use crate::originals::{OriginalFn, SupportSpec};
use crate::transform::{Estimate, ImageFn, QuadSpec};

/// Values on the faces of the domain, given in trace form by any smooth
/// original whose derivatives restrict to the prescribed traces.
#[derive(Clone, Debug)]
pub enum BoundaryData {
    Zero,
    Extension(OriginalFn),
}

/// One signed face contribution `coeff R^{r_exp} F^{faces}(d^deriv phi)`.
#[derive(Clone, Debug, PartialEq)]
pub struct FaceTerm {
    /// `a_j` times the product of face signs.
    pub coeff: CdNumber,
    pub r_exp: Vec<u32>,
    pub deriv: Vec<u32>,
    /// 1-based axes and the bound they are held at.
    pub faces: Vec<(usize, f64)>,
}

/// Assembled image equation of `A f = g` on a domain.
#[derive(Clone, Debug)]
pub struct ImageEquation {
    op: OperatorSpec,
    domain: SupportSpec,
    faces: Vec<FaceTerm>,
}

/// A term `coeff (R^{r_exp} image)` of the right side.
#[derive(Clone, Debug)]
pub struct RhsTerm {
    pub coeff: CdNumber,
    pub image: ImageFn,
    pub r_exp: Vec<u32>,
}

/// Builds the symbolic image equation. `t`-derivatives take faces at every
/// finite bound; `s`-derivatives are only accepted on the whole space.
pub fn assemble_image_equation(op: &OperatorSpec, domain: &SupportSpec) -> Result<ImageEquation> {
    let n = op.n();
    domain.validate(n)?;
    let bounds = domain.bounds(n);
    let finite = bounds.iter().any(|b| b.0.is_finite() || b.1.is_finite());
    if op.vars() == DerivVars::S && finite {
        return Err(Error::Unsupported("s-derivatives are only assembled on the whole space".into()));
    }
    let mut faces = Vec::new();
    for (j, a) in op.terms() {
        // per axis: (R exponent, trace derivative, face, sign)
        let options: Vec<Vec<(u32, u32, Option<f64>, f64)>> = (0..n)
            .map(|k| {
                let e = j[k];
                let mut opts = vec![(e, 0, None, 1.0)];
                for (bound, sign) in [(bounds[k].0, -1.0), (bounds[k].1, 1.0)] {
                    if bound.is_finite() {
                        for q in 0..e {
                            opts.push((e - 1 - q, q, Some(bound), sign));
                        }
                    }
                }
                opts
            })
            .collect();
        let mut idx = vec![0usize; n];
        loop {
            if idx.iter().any(|&i| i > 0) {
                let mut sign = 1.0;
                let mut r_exp = vec![0; n];
                let mut deriv = vec![0; n];
                let mut fs = Vec::new();
                for k in 0..n {
                    let (e, q, face, s) = options[k][idx[k]];
                    r_exp[k] = e;
                    deriv[k] = q;
                    sign *= s;
                    if let Some(b) = face {
                        fs.push((k + 1, b));
                    }
                }
                faces.push(FaceTerm { coeff: a.scale(sign), r_exp, deriv, faces: fs });
            }
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
    }
    Ok(ImageEquation { op: op.clone(), domain: domain.clone(), faces })
}

/// `R`-type factor of one derivative: `R_{e_k}` for `t`-variables,
/// `p_0 + p_1 S_1` or `p_k S_k` for the partial sums.
fn factor(spec: &KernelSpec, vars: DerivVars, k: usize, p: &[f64]) -> SPoly {
    let n = spec.n();
    match vars {
        DerivVars::T => SPoly::r_operator(spec, k, p),
        DerivVars::S => {
            let mut poly = SPoly::s_power(n, k, 1).scale(p[k]);
            if k == 1 {
                poly = poly.add(&SPoly::scalar(n, p[0]));
            }
            poly
        }
    }
}

fn monomial(spec: &KernelSpec, vars: DerivVars, j: &[u32], p: &[f64]) -> SPoly {
    let mut poly = SPoly::identity(spec.n());
    for (k, &e) in j.iter().enumerate() {
        if e > 0 {
            poly = poly.mul(&factor(spec, vars, k + 1, p).pow(e));
        }
    }
    poly
}

impl ImageEquation {
    pub fn operator(&self) -> &OperatorSpec {
        &self.op
    }

    pub fn domain(&self) -> &SupportSpec {
        &self.domain
    }

    pub fn faces(&self) -> &[FaceTerm] {
        &self.faces
    }

    fn check_spec(&self, spec: &KernelSpec) -> Result<()> {
        if spec.n() != self.op.n() {
            return Err(Error::Dimension { expected: self.op.n(), got: spec.n() });
        }
        if self.op.vars() == DerivVars::S && spec.mode() != CoordMode::Spherical && spec.n() > 1 {
            return Err(Error::Unsupported("s-derivatives need the spherical kernel".into()));
        }
        Ok(())
    }

    /// Symbol terms `(a_j, R^j(p))` with `p` given as masked coordinates.
    pub fn symbol(&self, spec: &KernelSpec, p: &[f64]) -> Result<Vec<(CdNumber, SPoly)>> {
        self.check_spec(spec)?;
        Ok(self.op.terms().map(|(j, a)| (a.clone(), monomial(spec, self.op.vars(), j, p))).collect())
    }

    /// The symbol on the phase-resolved channel, where every `S_k` acts as
    /// the imaginary unit: `R_{e_j} -> a + i(w_1 + ... + w_j)` (spherical).
    /// Needs real coefficients.
    pub fn channel_symbol(&self, spec: &KernelSpec, a: f64, omega: &[f64]) -> Result<Complex64> {
        self.channel_part(spec, a, omega, None)
    }

    /// Channel symbol restricted to the terms of order `order` (all terms for `None`).
    pub fn channel_part(&self, spec: &KernelSpec, a: f64, omega: &[f64], order: Option<u32>) -> Result<Complex64> {
        if omega.len() != self.op.n() {
            return Err(Error::Dimension { expected: self.op.n(), got: omega.len() });
        }
        if self.op.terms().any(|(_, c)| !c.is_real()) {
            return Err(Error::Unsupported("the channel symbol needs real coefficients".into()));
        }
        let mut p = vec![a];
        p.extend_from_slice(omega);
        let mut out = Complex64::new(0.0, 0.0);
        for (j, c) in self.op.terms() {
            if order.is_some_and(|o| j.iter().sum::<u32>() != o) {
                continue;
            }
            self.check_spec(spec)?;
            for (alpha, x) in monomial(spec, self.op.vars(), j, &p).terms() {
                let k: u32 = alpha.iter().sum();
                out += c.re() * x * Complex64::i().powu(k);
            }
        }
        Ok(out)
    }

    /// Right-side terms: the image of `g chi_U` and the face terms built
    /// from the boundary data, moved to the right with a minus sign.
    pub fn rhs_terms(&self, g: &OriginalFn, data: &BoundaryData, spec: &KernelSpec, quad: &QuadSpec) -> Result<Vec<RhsTerm>> {
        self.check_spec(spec)?;
        let n = self.op.n();
        if g.n() != n {
            return Err(Error::Dimension { expected: n, got: g.n() });
        }
        let gu = match (&self.domain, g.support()) {
            (SupportSpec::WholeSpace, _) => g.clone(),
            (d, SupportSpec::WholeSpace) => g.restricted(d.clone())?,
            (d, s) => g.restricted(d.intersect(s, n))?,
        };
        let mut out = vec![RhsTerm { coeff: CdNumber::one(0), image: ImageFn::quadrature(&gu, spec, quad)?, r_exp: vec![0; n] }];
        if let BoundaryData::Extension(phi) = data {
            if phi.n() != n {
                return Err(Error::Dimension { expected: n, got: phi.n() });
            }
            for face in &self.faces {
                let d = if face.deriv.iter().all(|&q| q == 0) { phi.clone() } else { phi.derivative(&face.deriv)? };
                out.push(RhsTerm {
                    coeff: -&face.coeff,
                    image: ImageFn::face(&d, spec, quad, face.faces.clone())?,
                    r_exp: face.r_exp.clone(),
                });
            }
        }
        Ok(out)
    }
}

/// `sum coeff (proj R^{r_exp} image)` at `p` for the phase carried by `spec`.
pub(crate) fn eval_rhs(terms: &[RhsTerm], spec: &KernelSpec, p: &CdNumber, proj: Option<&SPoly>) -> Result<Estimate> {
    let pc = spec.masked_p(p)?;
    let mut value = CdNumber::zero(spec.r());
    let mut error = 0.0;
    let mut evals = 0;
    for t in terms {
        let mut poly = SPoly::r_monomial(spec, &t.r_exp, &pc);
        if let Some(pr) = proj {
            poly = pr.mul(&poly);
        }
        let e = t.image.with_zeta(spec.zeta())?.apply_poly(&poly).eval(p)?;
        value += &(&t.coeff * &e.value);
        error += t.coeff.norm() * e.error;
        evals += e.evals;
    }
    Ok(Estimate { value, error, evals })
}

/// Branch projections `S_w^4 - S_{w+1}^4` (`w < n`) and `S_n^4`; on the
/// spherical kernel they split an image into parts whose kernel components
/// depend on exactly the angles `1..=w`.
pub fn branch_projections(n: usize) -> Vec<SPoly> {
    (1..=n)
        .map(|w| {
            let p = SPoly::s_power(n, w, 4);
            if w < n {
                p.add(&SPoly::s_power(n, w + 1, 4).scale(-1.0))
            } else {
                p
            }
        })
        .collect()
}

/// The branch images `F_w` of `f`; their sum reproduces `f` on kernel-backed images.
pub fn branch_images(f: &ImageFn) -> Vec<ImageFn> {
    branch_projections(f.spec().n()).iter().map(|p| f.apply_poly(p)).collect()
}
