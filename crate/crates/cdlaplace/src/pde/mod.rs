//! Constant-coefficient linear PDEs through the transform: image equations,
//! phase-shift linear systems, particular solutions, elliptic fundamental
//! solutions and the order-halving operator decomposition.

mod assemble;
mod decompose;
mod fundsol;
mod phase;
mod solve;

use std::collections::BTreeMap;
use std::fmt;

use crate::algebra::CdNumber;
use crate::error::{Error, Result};

pub use assemble::{assemble_image_equation, branch_images, branch_projections, RhsTerm, BoundaryData, FaceTerm, ImageEquation};
pub use decompose::{
    adjoint_ellipticity_probe, decompose_operator, residual_order, CdPoly, Decomposition, FactorTerm, ProbeReport,
};
pub use fundsol::{
    delta_test, fundamental_constant, fundamental_solution_elliptic, sphere_area_numeric, sigma_report,
    ConstantConvention, SigmaReport,
};
pub use phase::{
    solve_cyclic4, solve_dense, solve_pair, solve_quaternion_gauss, PhaseMethod, PhaseSolution, PhaseSystem,
    PhaseTable,
};
pub use solve::{solve_pde_particular, solved_image, PolarSpec, SolveMethod, SolveReport, SolveSpec};

/// Variables the derivatives are taken in.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DerivVars {
    /// `d/dt_j`.
    T,
    /// `d/ds_j` in the partial sums `s_j = t_j + ... + t_n`.
    S,
}

/// Smallest algebra containing every coefficient.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum CoeffDomain {
    Real,
    /// `span(1, i_1)`.
    Complex,
    /// `span(1, i_1, i_2, i_3)`.
    Quaternion,
    General,
}

impl CoeffDomain {
    pub fn of(z: &CdNumber) -> Self {
        let c = z.coords();
        let last = c.iter().rposition(|&x| x != 0.0).unwrap_or(0);
        match last {
            0 => CoeffDomain::Real,
            1 => CoeffDomain::Complex,
            2 | 3 => CoeffDomain::Quaternion,
            _ => CoeffDomain::General,
        }
    }
}

/// `A = sum_j a_j d^j` with constant coefficients acting from the left.
#[derive(Clone, PartialEq)]
pub struct OperatorSpec {
    n: usize,
    vars: DerivVars,
    terms: BTreeMap<Vec<u32>, CdNumber>,
}

impl fmt::Debug for OperatorSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "OperatorSpec({:?}, n = {}, {})", self.vars, self.n, self)
    }
}

impl fmt::Display for OperatorSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let v = match self.vars {
            DerivVars::T => "t",
            DerivVars::S => "s",
        };
        let parts: Vec<String> = self.terms.iter().map(|(j, c)| format!("({c}) d{v}^{j:?}")).collect();
        f.write_str(&parts.join(" + "))
    }
}

impl OperatorSpec {
    /// Zero coefficients are dropped; the operator needs at least one term.
    pub fn new(n: usize, vars: DerivVars, terms: Vec<(Vec<u32>, CdNumber)>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("operators need n >= 1".into()));
        }
        let mut map: BTreeMap<Vec<u32>, CdNumber> = BTreeMap::new();
        for (j, c) in terms {
            if j.len() != n {
                return Err(Error::Dimension { expected: n, got: j.len() });
            }
            if c.coords().iter().any(|x| !x.is_finite()) {
                return Err(Error::InvalidArgument(format!("non-finite coefficient for {j:?}")));
            }
            match map.get_mut(&j) {
                Some(prev) => {
                    let (a, b) = CdNumber::promote_pair(prev, &c);
                    *prev = &a + &b;
                }
                None => {
                    map.insert(j, c);
                }
            }
        }
        map.retain(|_, c| c.norm() > 0.0);
        if map.is_empty() {
            return Err(Error::InvalidArgument("operator has no nonzero terms".into()));
        }
        Ok(OperatorSpec { n, vars, terms: map })
    }

    /// `sum_j d^2/dt_j^2`.
    pub fn laplacian(n: usize) -> Self {
        let terms = (0..n)
            .map(|j| {
                let mut a = vec![0; n];
                a[j] = 2;
                (a, CdNumber::one(0))
            })
            .collect();
        Self::new(n, DerivVars::T, terms).expect("nonempty")
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn vars(&self) -> DerivVars {
        self.vars
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u32>, &CdNumber)> {
        self.terms.iter()
    }

    /// Natural order: the largest `|j|` with a nonzero coefficient.
    pub fn order(&self) -> u32 {
        self.terms.keys().map(|j| j.iter().sum()).max().unwrap_or(0)
    }

    /// Terms of order `order()`.
    pub fn principal(&self) -> Vec<(&Vec<u32>, &CdNumber)> {
        let o = self.order();
        self.terms.iter().filter(|(j, _)| j.iter().sum::<u32>() == o).collect()
    }

    pub fn level(&self) -> u32 {
        self.terms.values().map(|c| c.level()).max().unwrap_or(0)
    }

    pub fn coeff_domain(&self) -> CoeffDomain {
        self.terms.values().map(CoeffDomain::of).max().unwrap_or(CoeffDomain::Real)
    }

    /// `A` applied to a polynomial (left coefficients).
    pub fn apply_poly(&self, f: &CdPoly) -> Result<CdPoly> {
        if self.vars != DerivVars::T {
            return Err(Error::Unsupported("polynomial action is defined for t-derivatives".into()));
        }
        let mut out = CdPoly::zero(self.n, f.level().max(self.level()));
        for (j, c) in &self.terms {
            out = out.add(&f.derivative(j).left_mul(c));
        }
        Ok(out)
    }
}
