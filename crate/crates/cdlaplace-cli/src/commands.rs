use cdlaplace::algebra::CdNumber;
use cdlaplace::kernel::CoordMode;
use cdlaplace::opcalc::{run_suite, SuiteOptions, Verdict, SUITE_IDS};
use cdlaplace::originals::SupportSpec;
use cdlaplace::pde::{
    delta_test, fundamental_constant, fundamental_solution_elliptic, sigma_report, solve_pde_particular, BoundaryData,
    ConstantConvention, SolveMethod,
};
use cdlaplace::transform::ImageFn;
use serde_json::{json, Value};

use crate::config::RunConfig;
use crate::output::{heatmap_svg, json_num, line_svg, num, write_csv, write_json, write_text};
use crate::{Cli, CliError, Command, ModeArg};

const SCHEMA: u32 = 1;
const DEFAULT_SEED: u64 = 1;
const DEFAULT_RESIDUAL_TOL: f64 = 1e-2;

struct Ctx<'a> {
    cli: &'a Cli,
    cfg: RunConfig,
}

impl Ctx<'_> {
    fn mode(&self) -> Result<CoordMode, CliError> {
        match (self.cli.mode, &self.cfg.mode) {
            (Some(ModeArg::Cartesian), _) => Ok(CoordMode::Cartesian),
            (Some(ModeArg::Spherical), _) => Ok(CoordMode::Spherical),
            (None, Some(m)) => Ok(m.parse::<CoordMode>()?),
            (None, None) => Ok(CoordMode::Spherical),
        }
    }

    fn seed(&self) -> u64 {
        self.cli.seed.or(self.cfg.seed).unwrap_or(DEFAULT_SEED)
    }

    fn quad(&self) -> Result<cdlaplace::transform::QuadSpec, CliError> {
        self.cfg.quad.clone().unwrap_or_default().build(self.cli.tol)
    }

    fn path(&self, name: &str) -> std::path::PathBuf {
        self.cli.out.join(name)
    }
}

fn missing(what: &str) -> CliError {
    CliError::Config(format!("config has no \"{what}\" section"))
}

pub fn run(cli: &Cli) -> Result<(), CliError> {
    let cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    let ctx = Ctx { cli, cfg };
    // validate the config before touching the file system
    ctx.mode()?;
    ctx.quad()?;
    std::fs::create_dir_all(&cli.out).map_err(|e| CliError::Io(format!("{}: {e}", cli.out.display())))?;
    match &cli.command {
        Command::Transform => transform(&ctx),
        Command::Verify { ids } => verify(&ctx, ids),
        Command::Solve => solve(&ctx),
        Command::Fundsol => fundsol(&ctx),
    }
}

fn transform(ctx: &Ctx) -> Result<(), CliError> {
    let kc = ctx.cfg.kernel.as_ref().ok_or_else(|| missing("kernel"))?;
    let spec = kc.build(ctx.mode()?)?;
    let f = ctx.cfg.original.as_ref().ok_or_else(|| missing("original"))?.build(kc.n)?;
    let (ps, _) = ctx.cfg.p.as_ref().ok_or_else(|| missing("p"))?.points(spec.dim())?;
    let img = ImageFn::quadrature(&f, &spec, &ctx.quad()?)?;
    let dim = spec.dim();
    let mut header: Vec<String> = (0..dim).map(|k| format!("p{k}")).collect();
    header.extend((0..dim).map(|k| format!("f{k}")));
    header.push("error".into());
    let mut rows = Vec::with_capacity(ps.len());
    let mut re_part = Vec::with_capacity(ps.len());
    for p in &ps {
        let est = img.eval(&CdNumber::from_coords(p.clone())?)?;
        let mut row: Vec<String> = p.iter().map(|&x| num(x)).collect();
        row.extend(est.value.coords().iter().map(|&x| num(x)));
        row.push(num(est.error));
        rows.push(row);
        re_part.push(est.value.re());
    }
    write_csv(&ctx.path("transform.csv"), &header, &rows)?;
    if ctx.cli.svg {
        let xs: Vec<f64> = (0..ps.len()).map(|i| i as f64).collect();
        let title = format!("{} image, {} kernel", f.name(), spec.mode());
        write_text(&ctx.path("transform.svg"), &line_svg(&title, "p-grid index", "Re F", &xs, &re_part))?;
    }
    println!("transform: {} points written to {}", rows.len(), ctx.path("transform.csv").display());
    Ok(())
}

fn verify(ctx: &Ctx, ids: &[String]) -> Result<(), CliError> {
    let ids: Vec<String> = if !ids.is_empty() {
        ids.to_vec()
    } else {
        ctx.cfg.suites.clone().unwrap_or_else(|| vec!["all".into()])
    };
    for id in &ids {
        if id != "all" && !SUITE_IDS.contains(&id.as_str()) {
            return Err(CliError::Config(format!("unknown check id '{id}' (known: all, {})", SUITE_IDS.join(", "))));
        }
    }
    let opts = SuiteOptions { seed: ctx.seed(), samples: ctx.cfg.samples.unwrap_or(6), quad: ctx.quad()? };
    let mut reports = Vec::new();
    for id in &ids {
        reports.extend(run_suite(id, &opts)?);
    }
    let count = |v: Verdict| reports.iter().filter(|r| r.verdict == v).count();
    let (pass, fail, flagged) = (count(Verdict::Pass), count(Verdict::Fail), count(Verdict::Flagged));
    let checks: Vec<Value> = reports
        .iter()
        .map(|r| {
            json!({
                "theorem": r.id,
                "description": r.description,
                "samples": r.samples,
                "residual": json_num(r.max_residual),
                "mean_residual": json_num(r.mean_residual),
                "quad_error": json_num(r.quad_error),
                "tolerance": json_num(r.tolerance),
                "verdict": r.verdict.to_string(),
                "note": r.note,
            })
        })
        .collect();
    let report = json!({
        "schema": SCHEMA,
        "seed": opts.seed,
        "samples": opts.samples,
        "suites": ids,
        "checks": checks,
        "summary": {"pass": pass, "fail": fail, "flagged": flagged},
    });
    write_json(&ctx.path("verify.json"), &report)?;
    for r in &reports {
        println!("{:<8} {:<26} residual {:.3e} (tol {:.3e})", r.verdict.to_string(), r.id, r.max_residual, r.tolerance);
    }
    println!("verify: {pass} pass, {fail} fail, {flagged} flagged");
    if fail > 0 {
        return Err(CliError::Verification(format!("{fail} check(s) failed")));
    }
    Ok(())
}

fn solve(ctx: &Ctx) -> Result<(), CliError> {
    let op = ctx.cfg.operator.as_ref().ok_or_else(|| missing("operator"))?.build()?;
    let n = op.n();
    let g = ctx.cfg.source.as_ref().ok_or_else(|| missing("source"))?.build(n)?;
    let domain = match &ctx.cfg.domain {
        Some(d) => d.build(n)?,
        None => SupportSpec::WholeSpace,
    };
    let data = match &ctx.cfg.boundary {
        Some(b) => BoundaryData::Extension(b.build(n)?),
        None => BoundaryData::Zero,
    };
    let (pts, shape) = ctx.cfg.grid.as_ref().ok_or_else(|| missing("grid"))?.points(n)?;
    let spec = ctx.cfg.solver.clone().unwrap_or_default().build(ctx.mode()?, ctx.quad()?)?;
    let tol = ctx.cfg.residual_tol.unwrap_or(DEFAULT_RESIDUAL_TOL);
    let rep = solve_pde_particular(&op, &g, &domain, &data, &pts, &spec)?;

    let dim = rep.values.iter().map(|v| v.dim()).max().unwrap_or(1);
    let mut header: Vec<String> = (1..=n).map(|j| format!("t{j}")).collect();
    header.extend((0..dim).map(|k| format!("f{k}")));
    header.push("error".into());
    header.push("residual".into());
    let rows: Vec<Vec<String>> = (0..pts.len())
        .map(|i| {
            let mut row: Vec<String> = pts[i].iter().map(|&x| num(x)).collect();
            let c = rep.values[i].coords();
            row.extend((0..dim).map(|k| num(c.get(k).copied().unwrap_or(0.0))));
            row.push(num(rep.errors[i]));
            row.push(rep.residuals[i].map(num).unwrap_or_default());
            row
        })
        .collect();
    write_csv(&ctx.path("solve.csv"), &header, &rows)?;
    let method = match rep.method {
        SolveMethod::Auto => "auto",
        SolveMethod::PhaseSystem => "phase_system",
        SolveMethod::Channel => "channel",
    };
    let summary = json!({
        "schema": SCHEMA,
        "method": method,
        "points": pts.len(),
        "max_residual": json_num(rep.max_residual),
        "residual_tol": json_num(tol),
        "max_error": json_num(rep.errors.iter().fold(0.0, |a: f64, &b| a.max(b))),
        "perturbed_nodes": rep.perturbed_nodes,
        "cross_check": json_num(rep.cross_check),
    });
    write_json(&ctx.path("solve.json"), &summary)?;
    if ctx.cli.svg {
        let re: Vec<f64> = rep.values.iter().map(|v| v.re()).collect();
        let svg = match (n, &shape) {
            (1, _) => Some(line_svg("particular solution", "t_1", "Re f", &pts.iter().map(|t| t[0]).collect::<Vec<_>>(), &re)),
            (2, Some(s)) => {
                let xs: Vec<f64> = (0..s[0]).map(|i| pts[i * s[1]][0]).collect();
                let ys: Vec<f64> = (0..s[1]).map(|j| pts[j][1]).collect();
                Some(heatmap_svg("particular solution, Re f", &xs, &ys, &re))
            }
            _ => None,
        };
        match svg {
            Some(s) => write_text(&ctx.path("solve.svg"), &s)?,
            None => eprintln!("cdlaplace: no plot for n = {n} without a tensor grid"),
        }
    }
    println!("solve: {} points, method {method}, max residual {:.3e}", pts.len(), rep.max_residual);
    if rep.max_residual > tol {
        return Err(CliError::Verification(format!("residual {:.3e} exceeds {tol:.3e}", rep.max_residual)));
    }
    Ok(())
}

fn fundsol(ctx: &Ctx) -> Result<(), CliError> {
    let fc = ctx.cfg.fundsol.as_ref().ok_or_else(|| missing("fundsol"))?;
    let n = fc.n;
    if n < 2 {
        return Err(CliError::Config(format!("fundamental solutions need n >= 2, got {n}")));
    }
    let conv = match fc.convention.as_deref().unwrap_or("standard") {
        "standard" => ConstantConvention::Standard,
        "scaled" => ConstantConvention::Scaled,
        other => return Err(CliError::Config(format!("unknown convention \"{other}\""))),
    };
    let (rs, _) = fc.radii.points(1)?;
    let mut rows = Vec::with_capacity(rs.len());
    let mut psi = Vec::with_capacity(rs.len());
    for r in &rs {
        let mut z = vec![0.0; n];
        z[0] = r[0].abs();
        let v = fundamental_solution_elliptic(&z, conv)?;
        // closed form: no quadrature involved
        rows.push(vec![num(r[0].abs()), num(v), num(0.0)]);
        psi.push(v);
    }
    write_csv(&ctx.path("fundsol.csv"), &["r".into(), "psi".into(), "error".into()], &rows)?;
    let delta = delta_test(n, conv)?;
    let target = (-1.0f64).exp();
    let mut report = json!({
        "schema": SCHEMA,
        "n": n,
        "convention": fc.convention.as_deref().unwrap_or("standard"),
        "delta_test": {"value": json_num(delta), "target": json_num(target), "error": json_num((delta - target).abs())},
    });
    if n >= 3 {
        report["constant"] = json_num(fundamental_constant(n, conv)?);
        let s = sigma_report(n)?;
        report["sigma"] = json!({
            "sphere_area": json_num(s.area_exact),
            "sphere_area_numeric": json_num(s.area_numeric),
            "sigma_scaled": json_num(s.sigma_scaled),
            "constant_standard": json_num(s.standard),
            "constant_scaled": json_num(s.scaled),
            "delta_standard": json_num(s.delta_standard),
            "delta_scaled": json_num(s.delta_scaled),
            "delta_target": json_num(s.delta_target),
        });
    }
    write_json(&ctx.path("fundsol.json"), &report)?;
    if ctx.cli.svg {
        let xs: Vec<f64> = rs.iter().map(|r| r[0].abs()).collect();
        write_text(&ctx.path("fundsol.svg"), &line_svg(&format!("fundamental solution, n = {n}"), "r", "psi", &xs, &psi))?;
    }
    println!("fundsol: n = {n}, {} radii, delta test {delta:.6} (target {target:.6})", rows.len());
    Ok(())
}
