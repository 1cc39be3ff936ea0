use std::path::Path;

use cdlaplace::algebra::CdNumber;
use cdlaplace::kernel::{CoordMode, KernelSpec};
use cdlaplace::originals::{standard_original, OriginalFn, OriginalParams, SupportSpec};
use cdlaplace::pde::{DerivVars, OperatorSpec, SolveMethod, SolveSpec};
use cdlaplace::transform::{InverseMethod, InverseSpec, QuadSpec};
use serde::{Deserialize, Serialize};

use crate::CliError;

/// Everything a run needs besides the command-line flags. Every section is
/// optional so one file can drive several subcommands.
#[derive(Clone, Debug, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub seed: Option<u64>,
    pub mode: Option<String>,
    pub kernel: Option<KernelConfig>,
    pub original: Option<OriginalConfig>,
    pub p: Option<GridConfig>,
    pub quad: Option<QuadConfig>,
    pub suites: Option<Vec<String>>,
    pub samples: Option<usize>,
    pub operator: Option<OperatorConfig>,
    pub source: Option<OriginalConfig>,
    pub domain: Option<DomainConfig>,
    /// Extension of the boundary data; zero data when absent.
    pub boundary: Option<OriginalConfig>,
    pub grid: Option<GridConfig>,
    pub solver: Option<SolverConfig>,
    pub residual_tol: Option<f64>,
    pub fundsol: Option<FundsolConfig>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct KernelConfig {
    pub n: usize,
    /// Smallest admissible level when absent.
    pub r: Option<u32>,
    pub zeta: Option<Vec<f64>>,
}

impl KernelConfig {
    pub fn build(&self, mode: CoordMode) -> Result<KernelSpec, CliError> {
        let r = self.r.unwrap_or_else(|| KernelSpec::minimal_level(self.n));
        let spec = KernelSpec::new(mode, self.n, r)?;
        match &self.zeta {
            Some(z) => Ok(spec.with_zeta(&padded(z, spec.dim(), "zeta")?)?),
            None => Ok(spec),
        }
    }
}

/// A named original from the library plus its parameters.
#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct OriginalConfig {
    pub name: String,
    pub level: Option<u32>,
    pub b: Option<f64>,
    pub center: Option<Vec<f64>>,
    pub width: Option<f64>,
    pub degree: Option<u32>,
    pub omega: Option<f64>,
    pub phase: Option<f64>,
    pub eps: Option<f64>,
    pub bounds: Option<Vec<(f64, f64)>>,
    pub amplitude: Option<Vec<f64>>,
}

impl OriginalConfig {
    pub fn build(&self, n: usize) -> Result<OriginalFn, CliError> {
        let mut pa = OriginalParams::new(n);
        if let Some(v) = self.level {
            pa.level = v;
        }
        if let Some(v) = self.b {
            pa.b = v;
        }
        if let Some(v) = &self.center {
            pa.center = v.clone();
        }
        if let Some(v) = self.width {
            pa.width = v;
        }
        if let Some(v) = self.degree {
            pa.degree = v;
        }
        if let Some(v) = self.omega {
            pa.omega = v;
        }
        if let Some(v) = self.phase {
            pa.phase = v;
        }
        if let Some(v) = self.eps {
            pa.eps = v;
        }
        if let Some(v) = &self.bounds {
            pa.bounds = v.clone();
        }
        if let Some(v) = &self.amplitude {
            pa.amplitude = Some(CdNumber::from_coords(v.clone())?);
        }
        Ok(standard_original(&self.name, &pa)?)
    }
}

/// Either explicit points or a tensor grid `lo..hi` with `count` nodes per axis.
#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(untagged)]
pub enum GridConfig {
    Points { points: Vec<Vec<f64>> },
    Tensor { lo: Vec<f64>, hi: Vec<f64>, count: Vec<usize> },
}

impl GridConfig {
    /// Points with `dim` coordinates, shorter inputs padded with zeros.
    /// Also returns the tensor shape when the grid has one.
    pub fn points(&self, dim: usize) -> Result<(Vec<Vec<f64>>, Option<Vec<usize>>), CliError> {
        match self {
            GridConfig::Points { points } => {
                if points.is_empty() {
                    return Err(CliError::Config("grid has no points".into()));
                }
                let pts = points.iter().map(|p| padded(p, dim, "point").map(CdNumber::into_coords)).collect::<Result<_, _>>()?;
                Ok((pts, None))
            }
            GridConfig::Tensor { lo, hi, count } => {
                let k = lo.len();
                if k == 0 || hi.len() != k || count.len() != k || k > dim {
                    return Err(CliError::Config("grid lo, hi and count need the same nonzero length".into()));
                }
                if count.contains(&0) {
                    return Err(CliError::Config("grid counts must be positive".into()));
                }
                let axes: Vec<Vec<f64>> = (0..k)
                    .map(|j| {
                        let c = count[j];
                        (0..c)
                            .map(|i| if c == 1 { lo[j] } else { lo[j] + (hi[j] - lo[j]) * i as f64 / (c - 1) as f64 })
                            .collect()
                    })
                    .collect();
                let total: usize = count.iter().product();
                let mut pts = Vec::with_capacity(total);
                for flat in 0..total {
                    let mut rem = flat;
                    let mut p = vec![0.0; dim];
                    for j in (0..k).rev() {
                        p[j] = axes[j][rem % count[j]];
                        rem /= count[j];
                    }
                    pts.push(p);
                }
                Ok((pts, Some(count.clone())))
            }
        }
    }
}

#[derive(Clone, Debug, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct QuadConfig {
    pub tol: Option<f64>,
    pub max_evals: Option<usize>,
    pub rapid_radius: Option<f64>,
}

impl QuadConfig {
    pub fn build(&self, tol: Option<f64>) -> Result<QuadSpec, CliError> {
        let mut q = QuadSpec::default();
        if let Some(t) = tol.or(self.tol) {
            q.target_tol = t;
        }
        if let Some(m) = self.max_evals {
            q.max_evals = m;
        }
        if let Some(r) = self.rapid_radius {
            q.rapid_radius = r;
        }
        q.validate()?;
        Ok(q)
    }
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct TermConfig {
    pub index: Vec<u32>,
    pub coeff: Vec<f64>,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct OperatorConfig {
    pub terms: Vec<TermConfig>,
    /// `"t"` for `d/dt_j`, `"s"` for derivatives in the partial sums.
    #[serde(default = "default_vars")]
    pub mode: String,
}

fn default_vars() -> String {
    "t".into()
}

impl OperatorConfig {
    pub fn build(&self) -> Result<OperatorSpec, CliError> {
        let vars = match self.mode.as_str() {
            "t" => DerivVars::T,
            "s" => DerivVars::S,
            other => return Err(CliError::Config(format!("operator mode must be \"t\" or \"s\", got \"{other}\""))),
        };
        let n = self.terms.first().map(|t| t.index.len()).ok_or_else(|| CliError::Config("operator has no terms".into()))?;
        let terms = self
            .terms
            .iter()
            .map(|t| Ok((t.index.clone(), CdNumber::from_coords(t.coeff.clone())?)))
            .collect::<Result<Vec<_>, CliError>>()?;
        Ok(OperatorSpec::new(n, vars, terms)?)
    }
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum DomainConfig {
    Whole,
    Positive,
    Quadrant(Vec<i8>),
    Box(Vec<(f64, f64)>),
}

impl DomainConfig {
    pub fn build(&self, n: usize) -> Result<SupportSpec, CliError> {
        let s = match self {
            DomainConfig::Whole => SupportSpec::WholeSpace,
            DomainConfig::Positive => SupportSpec::positive(n),
            DomainConfig::Quadrant(v) => SupportSpec::Quadrant(v.clone()),
            DomainConfig::Box(b) => SupportSpec::Box(b.clone()),
        };
        s.validate(n)?;
        Ok(s)
    }
}

#[derive(Clone, Debug, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    pub a: Option<f64>,
    pub method: Option<String>,
    pub inverse_method: Option<String>,
    pub radius: Option<f64>,
    pub panels: Option<usize>,
    pub order: Option<usize>,
    pub perturb: Option<f64>,
    pub fd_step: Option<f64>,
}

impl SolverConfig {
    pub fn build(&self, mode: CoordMode, quad: QuadSpec) -> Result<SolveSpec, CliError> {
        let mut s = SolveSpec { mode, quad, ..SolveSpec::default() };
        if let Some(v) = self.a {
            s.a = v;
        }
        if let Some(m) = &self.method {
            s.method = match m.as_str() {
                "auto" => SolveMethod::Auto,
                "phase_system" => SolveMethod::PhaseSystem,
                "channel" => SolveMethod::Channel,
                other => return Err(CliError::Config(format!("unknown solve method \"{other}\""))),
            };
        }
        let inv: &mut InverseSpec = &mut s.inverse;
        if let Some(m) = &self.inverse_method {
            inv.method = match m.as_str() {
                "auto" => InverseMethod::Auto,
                "direct" => InverseMethod::Direct,
                "phase_resolved" => InverseMethod::PhaseResolved,
                other => return Err(CliError::Config(format!("unknown inverse method \"{other}\""))),
            };
        }
        if let Some(v) = self.radius {
            inv.radius = v;
        }
        if let Some(v) = self.panels {
            inv.panels = v;
        }
        if let Some(v) = self.order {
            inv.order = v;
        }
        if let Some(v) = self.perturb {
            s.perturb = v;
        }
        if let Some(v) = self.fd_step {
            s.fd_step = v;
        }
        Ok(s)
    }
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct FundsolConfig {
    pub n: usize,
    pub radii: GridConfig,
    /// `"standard"` or `"scaled"` normalisation for `n >= 3`.
    pub convention: Option<String>,
}

fn padded(v: &[f64], dim: usize, what: &str) -> Result<CdNumber, CliError> {
    if v.len() > dim {
        return Err(CliError::Config(format!("{what} has {} coordinates, at most {dim} allowed", v.len())));
    }
    let mut c = v.to_vec();
    c.resize(dim, 0.0);
    Ok(CdNumber::from_coords(c)?)
}
