//! Command-line driver: argument handling, orchestration and report output.

pub mod checks;

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use wentzell_core::assembly::AssemblyError;
use wentzell_core::dtn::HarmonicExtensionSolver;
use wentzell_core::export::{solution_csv, solution_vtk};
use wentzell_core::functional::{compute_depth, evaluate, DepthEstimate, EnergyReport};
use wentzell_core::mesh::MeshError;
use wentzell_core::oracle::{radial_interpolant, radial_solution};
use wentzell_core::solvers::{mountain_pass_on, multiplicity, Backend, CriticalPoint, Seed};
use wentzell_core::{generate_annulus_mesh, load_mesh, save_mesh, AssembledSystem, Mesh, SolverConfig, SolverError};

#[derive(Debug, Parser)]
#[command(
    name = "wentzell",
    version,
    about = "Laplace equation with a nonlinear Goldstein-Wentzell boundary condition"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a structured annulus mesh.
    MeshAnnulus {
        #[arg(long, num_args = 4, value_names = ["R0", "R", "N_R", "N_THETA"], required = true)]
        annulus: Vec<String>,
        /// Mesh file to write; the mesh text goes to stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Validate a mesh and run the numerical invariant checks on it.
    Check {
        #[command(flatten)]
        mesh: MeshArgs,
        #[command(flatten)]
        solver: SolverArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Mountain-pass solve.
    Solve {
        #[command(flatten)]
        mesh: MeshArgs,
        #[command(flatten)]
        solver: SolverArgs,
        /// Seed profile; defaults to `radial` on annulus meshes and `random` otherwise.
        #[arg(long, value_enum)]
        init: Option<Init>,
        #[arg(long, value_enum, default_value = "full")]
        backend: BackendArg,
        #[command(flatten)]
        export: ExportArgs,
    },
    /// Best trace constant and the depth d.
    Depth {
        #[command(flatten)]
        mesh: MeshArgs,
        #[command(flatten)]
        solver: SolverArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Ground state plus further critical points with increasing energies.
    Multiplicity {
        #[command(flatten)]
        mesh: MeshArgs,
        #[command(flatten)]
        solver: SolverArgs,
        #[arg(long, default_value_t = 3)]
        count: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Closed-form radial solution on an annulus.
    Oracle {
        #[arg(long)]
        r0: f64,
        #[arg(long = "R")]
        r_outer: f64,
        #[arg(long)]
        p: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Mountain pass from random and radial seeds against the oracle and the depth.
    Compare {
        #[command(flatten)]
        mesh: MeshArgs,
        #[command(flatten)]
        solver: SolverArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct MeshArgs {
    /// Structured annulus `r0 R n_r n_theta`.
    #[arg(long, num_args = 4, value_names = ["R0", "R", "N_R", "N_THETA"], conflicts_with = "mesh")]
    pub annulus: Option<Vec<String>>,
    /// Mesh file in the plain-text format.
    #[arg(long)]
    pub mesh: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct SolverArgs {
    /// Exponent of the boundary nonlinearity, p > 2.
    #[arg(long)]
    pub p: Option<f64>,
    /// Stop when the dual gradient norm falls below this [default: 1e-9].
    #[arg(long)]
    pub grad_tol: Option<f64>,
    /// Descent iteration budget [default: 5000].
    #[arg(long)]
    pub max_iters: Option<usize>,
    /// Mountain-pass path nodes, at least 16 [default: 24].
    #[arg(long)]
    pub path_points: Option<usize>,
    /// Residual below which Newton takes over from descent [default: 1e-3].
    #[arg(long)]
    pub newton_switch: Option<f64>,
    /// [default: 60]
    #[arg(long)]
    pub newton_max_iters: Option<usize>,
    /// [default: 1]
    #[arg(long)]
    pub initial_step: Option<f64>,
    /// Step reduction factor in (0, 1) [default: 0.5].
    #[arg(long)]
    pub backtrack: Option<f64>,
    /// Sufficient-decrease constant [default: 1e-4].
    #[arg(long)]
    pub armijo: Option<f64>,
    /// Deflation shift sigma [default: 1].
    #[arg(long)]
    pub deflation_shift: Option<f64>,
    /// Deflation power q [default: 2].
    #[arg(long)]
    pub deflation_power: Option<f64>,
    /// Random starts for the depth and restarts for the solvers [default: 4].
    #[arg(long)]
    pub multistart: Option<usize>,
    /// [default: 0]
    #[arg(long)]
    pub rng_seed: Option<u64>,
}

#[derive(Debug, Clone, Args)]
pub struct ExportArgs {
    /// Report JSON file (also printed to stdout).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Solution as `vertex_index,x,y,u`.
    #[arg(long)]
    pub csv: Option<PathBuf>,
    /// Solution as a legacy VTK unstructured grid.
    #[arg(long)]
    pub vtk: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Init {
    Radial,
    Random,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BackendArg {
    Full,
    Dtn,
}

impl From<BackendArg> for Backend {
    fn from(b: BackendArg) -> Self {
        match b {
            BackendArg::Full => Backend::FullSpace,
            BackendArg::Dtn => Backend::BoundaryDtn,
        }
    }
}

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Mesh(String),
    Convergence { message: String, partial: Option<Value> },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 1,
            CliError::Mesh(_) => 2,
            CliError::Convergence { .. } => 3,
        }
    }

    pub fn to_json(&self) -> Value {
        let (kind, message) = match self {
            CliError::Config(m) => ("config", m),
            CliError::Mesh(m) => ("mesh", m),
            CliError::Convergence { message, .. } => ("convergence", message),
        };
        let mut v = json!({ "error": { "kind": kind, "message": message, "exit_code": self.exit_code() } });
        if let CliError::Convergence { partial: Some(p), .. } = self {
            v["partial"] = p.clone();
        }
        v
    }
}

impl From<MeshError> for CliError {
    fn from(e: MeshError) -> Self {
        CliError::Mesh(e.to_string())
    }
}

impl From<AssemblyError> for CliError {
    fn from(e: AssemblyError) -> Self {
        match e {
            AssemblyError::Exponent(_) => CliError::Config(e.to_string()),
            _ => CliError::Mesh(e.to_string()),
        }
    }
}

impl From<SolverError> for CliError {
    fn from(e: SolverError) -> Self {
        match e {
            SolverError::Config(_) | SolverError::Domain(_) => CliError::Config(e.to_string()),
            SolverError::Linear(_) | SolverError::Convergence { .. } => {
                CliError::Convergence { message: e.to_string(), partial: None }
            }
        }
    }
}

/// What a run printed and how it ended.
#[derive(Debug)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                return Outcome { code: 0, stdout: e.to_string(), stderr: String::new() };
            }
            let text = e.to_string();
            let first = text.lines().next().unwrap_or_default();
            let err = CliError::Config(first.strip_prefix("error: ").unwrap_or(first).to_string());
            return Outcome { code: 1, stdout: pretty(&err.to_json()), stderr: e.to_string() };
        }
    };
    match execute(cli.command) {
        Ok(stdout) => Outcome { code: 0, stdout, stderr: String::new() },
        Err(e) => {
            let stderr = match &e {
                CliError::Config(m) | CliError::Mesh(m) | CliError::Convergence { message: m, .. } => {
                    format!("error: {m}\n")
                }
            };
            Outcome { code: e.exit_code(), stdout: pretty(&e.to_json()), stderr }
        }
    }
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("JSON values serialize");
    s.push('\n');
    s
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|e| CliError::Config(format!("cannot write {}: {e}", path.display())))
}

/// Prints the report and optionally stores it.
fn emit(report: Value, out: Option<&Path>) -> Result<String, CliError> {
    let text = pretty(&report);
    if let Some(path) = out {
        write_file(path, &text)?;
    }
    Ok(text)
}

struct Annulus {
    r0: f64,
    r_outer: f64,
    n_r: usize,
    n_theta: usize,
}

fn parse_annulus(values: &[String]) -> Result<Annulus, CliError> {
    let real =
        |s: &String| s.parse::<f64>().map_err(|_| CliError::Config(format!("annulus radius `{s}` is not a number")));
    let count = |s: &String| {
        s.parse::<usize>().map_err(|_| CliError::Config(format!("annulus resolution `{s}` is not a count")))
    };
    Ok(Annulus {
        r0: real(&values[0])?,
        r_outer: real(&values[1])?,
        n_r: count(&values[2])?,
        n_theta: count(&values[3])?,
    })
}

fn annulus_mesh(a: &Annulus) -> Result<Mesh, CliError> {
    generate_annulus_mesh(a.r0, a.r_outer, a.n_r, a.n_theta).map_err(|e| match e {
        MeshError::Parameter(m) => CliError::Config(m),
        other => other.into(),
    })
}

fn load_source(args: &MeshArgs) -> Result<(Mesh, Option<Annulus>), CliError> {
    match (&args.annulus, &args.mesh) {
        (Some(values), None) => {
            let a = parse_annulus(values)?;
            Ok((annulus_mesh(&a)?, Some(a)))
        }
        (None, Some(path)) => {
            let text =
                fs::read_to_string(path).map_err(|e| CliError::Mesh(format!("cannot read {}: {e}", path.display())))?;
            Ok((load_mesh(&text)?, None))
        }
        _ => Err(CliError::Config("give exactly one of --annulus or --mesh".into())),
    }
}

fn mesh_json(args: &MeshArgs) -> Value {
    match (&args.annulus, &args.mesh) {
        (Some(v), _) => json!({ "annulus": v }),
        (_, Some(p)) => json!({ "file": p.display().to_string() }),
        _ => Value::Null,
    }
}

fn solver_config(args: &SolverArgs) -> Result<SolverConfig, CliError> {
    let p = args.p.ok_or_else(|| CliError::Config("--p is required".into()))?;
    let mut c = SolverConfig::new(p);
    macro_rules! set {
        ($($field:ident).+ = $arg:ident) => {
            if let Some(v) = args.$arg {
                c.$($field).+ = v;
            }
        };
    }
    set!(grad_tol = grad_tol);
    set!(max_iters = max_iters);
    set!(path_points = path_points);
    set!(newton_switch = newton_switch);
    set!(newton_max_iters = newton_max_iters);
    set!(descent.initial_step = initial_step);
    set!(descent.backtrack = backtrack);
    set!(descent.armijo = armijo);
    set!(deflation.shift = deflation_shift);
    set!(deflation.power = deflation_power);
    set!(multistart_count = multistart);
    set!(rng_seed = rng_seed);
    c.validate()?;
    Ok(c)
}

/// Mesh, validated config and assembled operators.
fn prepare(
    mesh_args: &MeshArgs,
    solver: &SolverArgs,
) -> Result<(AssembledSystem, SolverConfig, Option<Annulus>), CliError> {
    // The exponent is checked before anything is assembled.
    let config = solver_config(solver)?;
    let (mesh, annulus) = load_source(mesh_args)?;
    let sys = AssembledSystem::new(mesh, config.p)?;
    Ok((sys, config, annulus))
}

fn report_json(report: &EnergyReport) -> Value {
    serde_json::to_value(report).expect("report serializes")
}

fn depth_json(depth: &DepthEstimate) -> Value {
    serde_json::to_value(depth).expect("depth serializes")
}

fn point_json(cp: &CriticalPoint, depth: &DepthEstimate) -> Value {
    let mut v = report_json(&cp.report.clone().with_depth(depth));
    v["iterations"] = json!(cp.iterations);
    v["backend"] = json!(cp.backend.name());
    v
}

fn execute(command: Command) -> Result<String, CliError> {
    match command {
        Command::MeshAnnulus { annulus, out } => {
            let a = parse_annulus(&annulus)?;
            let mesh = annulus_mesh(&a)?;
            let text = save_mesh(&mesh);
            match out {
                None => Ok(text),
                Some(path) => {
                    write_file(&path, &text)?;
                    emit(
                        json!({
                            "command": "mesh-annulus",
                            "num_vertices": mesh.num_vertices(),
                            "num_triangles": mesh.triangles.len(),
                            "num_boundary_edges": mesh.boundary_edges.len(),
                            "area": mesh.total_area(),
                            "config": { "annulus": annulus, "out": path.display().to_string() },
                        }),
                        None,
                    )
                }
            }
        }
        Command::Check { mesh, solver, out } => check(&mesh, &solver, out.as_deref()),
        Command::Solve { mesh, solver, init, backend, export } => solve(&mesh, &solver, init, backend, &export),
        Command::Depth { mesh, solver, out } => {
            let (sys, config, _) = prepare(&mesh, &solver)?;
            let depth = compute_depth(&sys, &config)?;
            let via_lambda2 = (0.5 - 1.0 / config.p) * depth.lambda2.powf(config.p);
            let mut report = depth_json(&depth);
            report["command"] = json!("depth");
            report["depth_via_lambda2"] = json!(via_lambda2);
            report["identity_rel_error"] = json!((depth.depth_d - via_lambda2).abs() / depth.depth_d);
            report["mesh_dependent"] = json!(true);
            report["num_vertices"] = json!(sys.num_vertices());
            report["config"] = json!({ "mesh": mesh_json(&mesh), "solver": config });
            emit(report, out.as_deref())
        }
        Command::Multiplicity { mesh, solver, count, out } => {
            if count == 0 {
                return Err(CliError::Config("--count must be positive".into()));
            }
            let (sys, config, _) = prepare(&mesh, &solver)?;
            let depth = compute_depth(&sys, &config)?;
            let levels = multiplicity(&sys, &config, count)?;
            let energies: Vec<f64> = levels.iter().map(|l| l.energy()).collect();
            let report = json!({
                "command": "multiplicity",
                "requested": count,
                "found": levels.len(),
                "energies": energies,
                "strictly_increasing": energies.windows(2).all(|w| w[0] < w[1]),
                "depth_d": depth.depth_d,
                "points": levels.iter().map(|l| point_json(l, &depth)).collect::<Vec<_>>(),
                "config": { "mesh": mesh_json(&mesh), "solver": config, "count": count },
            });
            if levels.len() < count {
                return Err(CliError::Convergence {
                    message: format!(
                        "found {} of {count} distinct critical levels before continuation ran dry",
                        levels.len()
                    ),
                    partial: Some(report),
                });
            }
            emit(report, out.as_deref())
        }
        Command::Oracle { r0, r_outer, p, out } => {
            let sol = radial_solution(r0, r_outer, p)?;
            let mut report = serde_json::to_value(&sol).expect("oracle serializes");
            report["command"] = json!("oracle");
            report["config"] = json!({ "r0": r0, "R": r_outer, "p": p });
            emit(report, out.as_deref())
        }
        Command::Compare { mesh, solver, out } => compare(&mesh, &solver, out.as_deref()),
    }
}

fn radial_seed(sys: &AssembledSystem, annulus: Option<&Annulus>) -> Result<Seed, CliError> {
    let a = annulus.ok_or_else(|| CliError::Config("--init radial needs an --annulus mesh".into()))?;
    let sol = radial_solution(a.r0, a.r_outer, sys.p)?;
    Ok(Seed::Function(radial_interpolant(&sys.mesh, &sys.dofs, &sol)?))
}

fn solve(
    mesh: &MeshArgs,
    solver: &SolverArgs,
    init: Option<Init>,
    backend: BackendArg,
    export: &ExportArgs,
) -> Result<String, CliError> {
    let (sys, config, annulus) = prepare(mesh, solver)?;
    let init = init.unwrap_or(if annulus.is_some() { Init::Radial } else { Init::Random });
    let seed = match init {
        Init::Radial => radial_seed(&sys, annulus.as_ref())?,
        Init::Random => Seed::Random,
    };
    let depth = compute_depth(&sys, &config)?;
    let run = mountain_pass_on(&sys, &config, seed, backend.into())?;
    let mut report = point_json(&run.point, &depth);
    report["command"] = json!("solve");
    report["restarts"] = json!(run.restarts);
    report["path_max_initial"] = json!(run.path_max_history.first());
    report["path_max_final"] = json!(run.path_max_history.last());
    report["path_max_nonincreasing"] = json!(run.path_max_history.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-12)));
    report["depth_d"] = json!(depth.depth_d);
    report["B"] = json!(depth.B);
    report["lambda1"] = json!(depth.lambda1);
    report["lambda2"] = json!(depth.lambda2);
    report["num_vertices"] = json!(sys.num_vertices());
    if let Some(a) = &annulus {
        let sol = radial_solution(a.r0, a.r_outer, sys.p)?;
        report["oracle_energy"] = json!(sol.energy);
        report["oracle_rel_gap"] = json!((run.point.energy() - sol.energy).abs() / sol.energy);
    }
    report["config"] = json!({
        "mesh": mesh_json(mesh),
        "solver": config,
        "init": init,
        "backend": Backend::from(backend).name(),
        "out": export.out.as_ref().map(|p| p.display().to_string()),
        "csv": export.csv.as_ref().map(|p| p.display().to_string()),
        "vtk": export.vtk.as_ref().map(|p| p.display().to_string()),
    });
    if let Some(path) = &export.csv {
        write_file(path, &solution_csv(&sys.mesh, &run.point.u))?;
    }
    if let Some(path) = &export.vtk {
        write_file(path, &solution_vtk(&sys.mesh, &run.point.u))?;
    }
    emit(report, export.out.as_deref())
}

fn check(mesh: &MeshArgs, solver: &SolverArgs, out: Option<&Path>) -> Result<String, CliError> {
    let config = solver_config(solver)?;
    let (m, _) = load_source(mesh)?;
    let sys = AssembledSystem::new(m, config.p)?;
    let ext = HarmonicExtensionSolver::new(&sys)?;
    let seed = config.rng_seed;
    let depth = compute_depth(&sys, &config)?;
    let via_lambda2 = (0.5 - 1.0 / config.p) * depth.lambda2.powf(config.p);
    let results = vec![
        checks::Check::at_most("h1_operator_asymmetry", if sys.h1_operator.is_symmetric() { 0.0 } else { 1.0 }, 0.0),
        checks::Check::at_most("energy_gradient_fd", checks::energy_gradient_error(&sys, 20, 1e-6, seed), 1e-5),
        checks::Check::at_most(
            "boundary_gradient_fd",
            checks::boundary_gradient_error(&sys, &ext, 20, 1e-6, seed)?,
            1e-5,
        ),
        checks::Check::at_most("dtn_consistency", checks::dtn_consistency_error(&sys, &ext, 10, seed)?, 1e-10),
        checks::Check::at_most("splitting_orthogonality", checks::splitting_error(&sys, &ext, 10, seed)?, 1e-10),
        checks::Check::at_most("depth_identity", (depth.depth_d - via_lambda2).abs() / depth.depth_d, 1e-12),
        checks::Check { name: "depth_positive", value: depth.depth_d, tolerance: 0.0, passed: depth.depth_d > 0.0 },
    ];
    let passed = results.iter().all(|c| c.passed);
    let report = json!({
        "command": "check",
        "num_vertices": sys.num_vertices(),
        "num_triangles": sys.mesh.triangles.len(),
        "area": sys.mesh.total_area(),
        "checks": results,
        "passed": passed,
        "config": { "mesh": mesh_json(mesh), "solver": config },
    });
    if !passed {
        return Err(CliError::Convergence { message: "invariant checks failed".into(), partial: Some(report) });
    }
    emit(report, out)
}

fn compare(mesh: &MeshArgs, solver: &SolverArgs, out: Option<&Path>) -> Result<String, CliError> {
    let (sys, config, annulus) = prepare(mesh, solver)?;
    let a = annulus.as_ref().ok_or_else(|| CliError::Config("compare needs an --annulus mesh".into()))?;
    let sol = radial_solution(a.r0, a.r_outer, sys.p)?;
    let interpolant = radial_interpolant(&sys.mesh, &sys.dofs, &sol)?;
    let depth = compute_depth(&sys, &config)?;
    let random = mountain_pass_on(&sys, &config, Seed::Random, Backend::FullSpace)?.point;
    let radial = mountain_pass_on(&sys, &config, Seed::Function(interpolant.clone()), Backend::FullSpace)?.point;
    let rel = |x: f64, y: f64| (x - y).abs() / y.abs();
    let report = json!({
        "command": "compare",
        "oracle_energy": sol.energy,
        "oracle_c": sol.c,
        "interpolant_energy": evaluate(&sys, &interpolant).energy_I,
        "depth_d": depth.depth_d,
        "mountain_pass_energy": random.energy(),
        "radial_seed_energy": radial.energy(),
        "mountain_pass_vs_depth_rel": rel(random.energy(), depth.depth_d),
        "radial_seed_vs_oracle_rel": rel(radial.energy(), sol.energy),
        "depth_at_most_oracle": depth.depth_d <= sol.energy * (1.0 + 1e-6),
        "ground_state_is_radial": rel(random.energy(), radial.energy()) <= 1e-4,
        "mountain_pass": point_json(&random, &depth),
        "radial_seed": point_json(&radial, &depth),
        "config": { "mesh": mesh_json(mesh), "solver": config },
    });
    emit(report, out)
}
