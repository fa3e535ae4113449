//! Command-line front end.
//!
//! Subcommands: `eigen`, `dlambda`, `d2lambda`, `kernel`, `oracle`,
//! `concavity`. Results go to stdout as JSON (optionally duplicated to a
//! file); plot data is plain CSV. Exit codes: 0 success, 2 bad input,
//! 3 solver failure, 4 route-agreement failure.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::json;

use crate::eigen::{eigenpair, BoundaryData, Eigenpair};
use crate::error::{Error, Result};
use crate::frechet::{
    self, build_g, build_jn, first_derivative, quadratic_form, Routes, DEFAULT_ROUTE_TOL,
};
use crate::mesh::{Grid, SampledFn};
use crate::oracle;

#[derive(Debug, Parser)]
#[command(name = "sl-frechet", version, about = "Sturm-Liouville eigenvalues and their derivatives in the potential")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compute one indexed eigenvalue and its normalized eigenfunction.
    Eigen(EigenArgs),
    /// First derivative L of the eigenvalue in a direction h.
    Dlambda(DlambdaArgs),
    /// Second derivative M by the requested routes.
    D2lambda(D2lambdaArgs),
    /// Tabulate the quadratic-form kernel J_n as CSV.
    Kernel(KernelArgs),
    /// Finite-difference check of L and M.
    Oracle(OracleArgs),
    /// Concavity probe along a segment of potentials.
    Concavity(ConcavityArgs),
}

/// Flags shared by every subcommand.
#[derive(Debug, Args)]
pub struct ProblemArgs {
    /// Interval length; `pi` is accepted.
    #[arg(long, default_value = "pi")]
    pub ell: String,
    /// Number of grid cells (even).
    #[arg(long = "n-cells", default_value_t = 4000)]
    pub n_cells: usize,
    /// Left boundary angle alpha in [0, pi); `pi/2` is accepted.
    #[arg(long)]
    pub alpha: Option<String>,
    /// Right boundary angle beta in (0, pi]; `pi` is accepted.
    #[arg(long)]
    pub beta: Option<String>,
    /// Shorthand for alpha = 0, beta = pi.
    #[arg(long, conflicts_with_all = ["alpha", "beta", "neumann"])]
    pub dirichlet: bool,
    /// Shorthand for alpha = pi/2, beta = pi/2.
    #[arg(long, conflicts_with_all = ["alpha", "beta", "dirichlet"])]
    pub neumann: bool,
    /// Eigenvalue index k >= 0 (number of interior zeros).
    #[arg(long)]
    pub index: Option<usize>,
    /// 1-based Dirichlet numbering: n means index k = n - 1.
    #[arg(long = "dirichlet-n", conflicts_with = "index")]
    pub dirichlet_n: Option<usize>,
    /// Potential: builtin expression or `csv:PATH`.
    #[arg(long, default_value = "zero")]
    pub q: String,
    /// PRNG seed recorded in reports; env SL_FRECHET_SEED overrides.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Duplicate the JSON report to this path.
    #[arg(long = "json-out")]
    pub json_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EigenArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    /// Write the eigenfunction as `x,value` CSV.
    #[arg(long = "efn-out")]
    pub efn_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DlambdaArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    /// Direction h: builtin expression or `csv:PATH`.
    #[arg(long)]
    pub h: String,
}

#[derive(Debug, Args)]
pub struct D2lambdaArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    #[arg(long)]
    pub h: String,
    /// Comma-separated subset of {direct, energy, kernel}.
    #[arg(long, default_value = "direct")]
    pub routes: String,
    /// Relative tolerance for route agreement.
    #[arg(long = "route-tol", default_value_t = DEFAULT_ROUTE_TOL)]
    pub route_tol: f64,
    /// Write U_n as `x,value` CSV.
    #[arg(long = "un-out")]
    pub un_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct KernelArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    /// Output CSV path for J_n (`x,y,value` rows).
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    #[arg(long)]
    pub h: String,
    /// Finite-difference step.
    #[arg(long, default_value_t = 1e-3)]
    pub s: f64,
}

#[derive(Debug, Args)]
pub struct ConcavityArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    /// First endpoint potential.
    #[arg(long)]
    pub q1: String,
    /// Second endpoint potential.
    #[arg(long)]
    pub q2: String,
    /// Comma-separated tau values in [0, 1].
    #[arg(long, default_value = "0,0.25,0.5,0.75,1")]
    pub taus: String,
    /// Write the per-tau slack table as CSV.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Accept plain floats plus the literals `pi`, `pi/2`, `pi/4`, `2pi` and
/// `-pi`-style prefixes.
pub fn parse_real(text: &str) -> Result<f64> {
    let t = text.trim();
    if let Ok(v) = t.parse::<f64>() {
        return Ok(v);
    }
    let (sign, rest) = match t.strip_prefix('-') {
        Some(r) => (-1.0, r),
        None => (1.0, t),
    };
    let pi = std::f64::consts::PI;
    let v = match rest {
        "pi" => pi,
        "pi/2" => pi / 2.0,
        "pi/4" => pi / 4.0,
        "2pi" | "2*pi" => 2.0 * pi,
        _ => return Err(Error::BadInput(format!("cannot parse real value {text:?}"))),
    };
    Ok(sign * v)
}

/// Builtin sampled-function grammar `name[:param[,param...]]`:
/// `zero`, `const:c`, `sin:k[,amp]`, `cos:k[,amp]`, `poly:c0,c1,...`,
/// `step:a,v`, `csv:path`.
pub fn parse_builtin(expr: &str, grid: Grid) -> Result<SampledFn> {
    let (name, params) = match expr.split_once(':') {
        Some((n, p)) => (n.trim(), p.trim()),
        None => (expr.trim(), ""),
    };
    let nums = || -> Result<Vec<f64>> {
        if params.is_empty() {
            return Err(Error::BadInput(format!("expression {name:?} needs parameters")));
        }
        params.split(',').map(parse_real).collect()
    };
    match name {
        "zero" => Ok(SampledFn::zeros(grid)),
        "const" => {
            let p = nums()?;
            if p.len() != 1 {
                return Err(Error::BadInput("const takes one parameter".into()));
            }
            SampledFn::constant(grid, p[0])
        }
        "sin" | "cos" => {
            let p = nums()?;
            let (k, amp) = match p.as_slice() {
                [k] => (*k, 1.0),
                [k, a] => (*k, *a),
                _ => return Err(Error::BadInput(format!("{name} takes one or two parameters"))),
            };
            if name == "sin" {
                SampledFn::from_fn(grid, |x| amp * (k * x).sin())
            } else {
                SampledFn::from_fn(grid, |x| amp * (k * x).cos())
            }
        }
        "poly" => {
            let coeffs = nums()?;
            SampledFn::from_fn(grid, |x| {
                coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c)
            })
        }
        "step" => {
            let p = nums()?;
            if p.len() != 2 {
                return Err(Error::BadInput("step takes parameters a,v".into()));
            }
            let (a, v) = (p[0], p[1]);
            SampledFn::from_fn(grid, |x| if x >= a { v } else { 0.0 })
        }
        "csv" => {
            if params.is_empty() {
                return Err(Error::BadInput("csv needs a path".into()));
            }
            let f = SampledFn::read_csv_path(Path::new(params))?;
            if f.grid() != grid {
                return Err(Error::BadInput(format!(
                    "csv grid ({} cells on [0, {}]) does not match the job grid",
                    f.grid().n_cells(),
                    f.grid().ell()
                )));
            }
            Ok(f)
        }
        other => Err(Error::BadInput(format!("unknown expression name {other:?}"))),
    }
}

struct Problem {
    grid: Grid,
    bc: BoundaryData,
    index: usize,
    q: SampledFn,
    seed: u64,
}

fn resolve_problem(args: &ProblemArgs) -> Result<Problem> {
    let ell = parse_real(&args.ell)?;
    let grid = Grid::new(ell, args.n_cells)?;
    let bc = if args.dirichlet {
        BoundaryData::dirichlet()
    } else if args.neumann {
        BoundaryData::neumann()
    } else {
        match (&args.alpha, &args.beta) {
            (Some(a), Some(b)) => BoundaryData::new(parse_real(a)?, parse_real(b)?)?,
            (None, None) => BoundaryData::dirichlet(),
            _ => return Err(Error::BadInput("give both --alpha and --beta, or a shorthand".into())),
        }
    };
    let index = match (args.index, args.dirichlet_n) {
        (Some(k), None) => k,
        (None, Some(n)) => {
            if n == 0 {
                return Err(Error::BadInput("--dirichlet-n is 1-based".into()));
            }
            n - 1
        }
        (None, None) => 0,
        (Some(_), Some(_)) => unreachable!("clap conflict"),
    };
    let q = parse_builtin(&args.q, grid)?;
    let seed = match std::env::var("SL_FRECHET_SEED") {
        Ok(v) => v
            .parse()
            .map_err(|_| Error::BadInput(format!("SL_FRECHET_SEED is not an integer: {v:?}")))?,
        Err(_) => args.seed,
    };
    Ok(Problem { grid, bc, index, q, seed })
}

#[derive(Serialize)]
struct Provenance {
    n_cells: usize,
    ell: f64,
    alpha: f64,
    beta: f64,
    index: usize,
    seed: u64,
    angle_tol: f64,
}

fn provenance(p: &Problem) -> Provenance {
    Provenance {
        n_cells: p.grid.n_cells(),
        ell: p.grid.ell(),
        alpha: p.bc.alpha(),
        beta: p.bc.beta(),
        index: p.index,
        seed: p.seed,
        angle_tol: crate::eigen::ANGLE_TOL,
    }
}

fn eigen_json(ep: &Eigenpair) -> serde_json::Value {
    json!({
        "index": ep.index,
        "lambda": ep.lambda,
        "residuals": {
            "normalization": ep.norm_residual,
            "boundary": ep.boundary_residual,
        },
        "interior_sign_changes": ep.interior_sign_changes(),
        "solver": ep.stats,
    })
}

fn emit(report: &serde_json::Value, json_out: &Option<PathBuf>) -> Result<()> {
    let text = serde_json::to_string_pretty(report).expect("json serialization");
    println!("{text}");
    if let Some(path) = json_out {
        std::fs::write(path, text + "\n")?;
    }
    Ok(())
}

/// Run one job; the returned value is the JSON report already emitted.
pub fn run(cli: Cli) -> Result<serde_json::Value> {
    match cli.command {
        Command::Eigen(args) => {
            let p = resolve_problem(&args.problem)?;
            let ep = eigenpair(&p.q, &p.bc, p.index)?;
            if let Some(path) = &args.efn_out {
                ep.efn.write_csv_path(path)?;
            }
            let mut report = eigen_json(&ep);
            report["provenance"] = serde_json::to_value(provenance(&p)).unwrap();
            emit(&report, &args.problem.json_out)?;
            Ok(report)
        }
        Command::Dlambda(args) => {
            let p = resolve_problem(&args.problem)?;
            let h = parse_builtin(&args.h, p.grid)?;
            let ep = eigenpair(&p.q, &p.bc, p.index)?;
            let l = first_derivative(&ep, &h)?;
            let mut report = eigen_json(&ep);
            report["L"] = json!(l);
            report["provenance"] = serde_json::to_value(provenance(&p)).unwrap();
            emit(&report, &args.problem.json_out)?;
            Ok(report)
        }
        Command::D2lambda(args) => {
            let p = resolve_problem(&args.problem)?;
            let h = parse_builtin(&args.h, p.grid)?;
            let routes = parse_routes(&args.routes)?;
            let ep = eigenpair(&p.q, &p.bc, p.index)?;
            let res = frechet::compute(&ep, &p.q, &h, &p.bc, routes, args.route_tol)?;
            if let Some(path) = &args.un_out {
                res.u.z.write_csv_path(path)?;
            }
            let mut report = eigen_json(&ep);
            report["L"] = json!(res.l);
            report["M_direct"] = json!(res.m_direct);
            report["M_energy"] = json!(res.m_energy);
            report["M_kernel"] = json!(res.m_kernel);
            report["route_gaps"] = json!({
                "energy": res.m_energy.map(|m| (res.m_direct - m).abs()),
                "kernel": res.m_kernel.map(|m| (res.m_direct - m).abs()),
                "tolerance": args.route_tol * (1.0 + res.m_direct.abs()),
            });
            report["residuals"]["fredholm_f1"] = json!(res.fredholm_residual_f1);
            report["residuals"]["u_boundary"] = json!(res.u_boundary_residual);
            report["provenance"] = serde_json::to_value(provenance(&p)).unwrap();
            emit(&report, &args.problem.json_out)?;
            Ok(report)
        }
        Command::Kernel(args) => {
            let p = resolve_problem(&args.problem)?;
            let ep = eigenpair(&p.q, &p.bc, p.index)?;
            let g = build_g(&p.q, ep.lambda)?;
            let jn = build_jn(&ep, &g)?;
            let file = std::fs::File::create(&args.out)?;
            jn.write_csv(std::io::BufWriter::new(file))?;
            let ones = SampledFn::constant(p.grid, 1.0)?;
            let mut report = eigen_json(&ep);
            report["kernel"] = json!({
                "path": args.out.display().to_string(),
                "symmetry_residual": jn.symmetry_defect(),
                "constant_direction_form": quadratic_form(&jn, &ones)?,
            });
            report["provenance"] = serde_json::to_value(provenance(&p)).unwrap();
            emit(&report, &args.problem.json_out)?;
            Ok(report)
        }
        Command::Oracle(args) => {
            let p = resolve_problem(&args.problem)?;
            let h = parse_builtin(&args.h, p.grid)?;
            let fd = oracle::fd_derivatives(&p.q, &p.bc, p.index, &h, args.s)?;
            let mut report = serde_json::to_value(&fd).unwrap();
            report["provenance"] = serde_json::to_value(provenance(&p)).unwrap();
            emit(&report, &args.problem.json_out)?;
            Ok(report)
        }
        Command::Concavity(args) => {
            let p = resolve_problem(&args.problem)?;
            let q1 = parse_builtin(&args.q1, p.grid)?;
            let q2 = parse_builtin(&args.q2, p.grid)?;
            let taus: Vec<f64> = args
                .taus
                .split(',')
                .map(|t| parse_real(t))
                .collect::<Result<_>>()?;
            let rep = oracle::concavity_probe(&q1, &q2, &p.bc, p.index, &taus)?;
            if let Some(path) = &args.out {
                use std::io::Write;
                let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
                writeln!(w, "tau,lambda_mix,lambda_chord,slack")?;
                for row in &rep.rows {
                    writeln!(
                        w,
                        "{:.17e},{:.17e},{:.17e},{:.17e}",
                        row.tau, row.lambda_mix, row.lambda_chord, row.slack
                    )?;
                }
            }
            let mut report = serde_json::to_value(&rep).unwrap();
            report["provenance"] = serde_json::to_value(provenance(&p)).unwrap();
            emit(&report, &args.problem.json_out)?;
            Ok(report)
        }
    }
}

fn parse_routes(text: &str) -> Result<Routes> {
    let mut routes = Routes::default();
    for part in text.split(',') {
        match part.trim() {
            "direct" | "" => {}
            "energy" => routes.energy = true,
            "kernel" => routes.kernel = true,
            other => return Err(Error::BadInput(format!("unknown route {other:?}"))),
        }
    }
    Ok(routes)
}
