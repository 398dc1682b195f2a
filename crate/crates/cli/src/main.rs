//! `hpfem` driver: reads control, physics and geometry files, then runs the
//! interactive menu (`-job 0`) or a batch job.

mod jobs;
mod menu;

use std::io::{BufRead, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Parser, ValueEnum};

use hpfem::adapt::{MarkingConfig, MarkingStrategy};
use hpfem::assembly::{SolverKind, SolverOptions};
use hpfem::exec::ExecMode;
use hpfem::masterel::{OrderTriple, MAXP};
use hpfem::mesh::{GeometryFile, Mesh};
use hpfem::physics::{read_control, read_physics, space_tag, Parameters, PhysicsTable};
use hpfem::poisson::{ManufacturedSolution, Problem, ProblemKind};
use hpfem::vtu::{Paraview, ParaviewConfig};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ProbArg {
    Galerkin,
    Primal,
    Uw,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum MarkArg {
    Greedy,
    Doerfler,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SolverArg {
    Cg,
    Dense,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SolutionArg {
    Linear,
    Quadratic,
    Smooth,
    Layer,
}

#[derive(Debug, Parser)]
#[command(name = "hpfem", about = "hp-adaptive Poisson solver on hexahedral meshes")]
struct Args {
    #[arg(long = "file-control")]
    file_control: Option<PathBuf>,
    #[arg(long = "file-phys")]
    file_phys: Option<PathBuf>,
    #[arg(long = "file-geometry")]
    file_geometry: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "galerkin")]
    prob: ProbArg,
    /// Initial uniform order.
    #[arg(short = 'p', long, default_value_t = 2, value_parser = clap::value_parser!(u32).range(1..=MAXP as i64))]
    p: u32,
    /// Test-space enrichment (defaults to NORD_ADD from the control file).
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..=3))]
    dp: Option<u32>,
    /// 0 = interactive, 1 = uniform convergence, 2 = adaptive run, 3 = patch tests.
    #[arg(long, default_value_t = 0)]
    job: i64,
    /// Manufactured solution used when NEXACT=1.
    #[arg(long, value_enum, default_value = "smooth")]
    solution: SolutionArg,
    #[arg(long, value_enum, default_value = "doerfler")]
    mark: MarkArg,
    #[arg(long, default_value_t = 0.5)]
    perc: f64,
    #[arg(long, default_value_t = 0.0)]
    tol: f64,
    #[arg(long = "maxsteps", default_value_t = 3)]
    max_steps: usize,
    #[arg(long = "paraview-dir")]
    paraview_dir: Option<PathBuf>,
    #[arg(long, default_value_t = 0, value_parser = clap::value_parser!(u32).range(0..=4))]
    vlevel: u32,
    #[arg(long, value_enum)]
    solver: Option<SolverArg>,
    /// Worker threads for element loops (1 = sequential).
    #[arg(long)]
    workers: Option<usize>,
}

/// Everything a job or the menu needs.
pub struct Session {
    pub problem: Problem,
    pub mesh: Mesh,
    pub params: Parameters,
    pub opts: SolverOptions,
    pub marking: MarkingConfig,
    pub tol: f64,
    pub max_steps: usize,
    pub paraview: Option<Paraview>,
    pub solved: bool,
}

/// Single-dash long flags (`-job 1`) become `--job 1`; negative numbers stay.
fn normalize_args<I: IntoIterator<Item = String>>(argv: I) -> Vec<String> {
    argv.into_iter()
        .enumerate()
        .map(|(i, a)| {
            let long = a.len() > 2
                && a.starts_with('-')
                && !a.starts_with("--")
                && a[1..].starts_with(|c: char| c.is_ascii_alphabetic());
            if i > 0 && long {
                format!("-{a}")
            } else {
                a
            }
        })
        .collect()
}

/// Exit code 2 with a message naming the flag.
#[derive(Debug)]
struct UsageError(String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn required_file<'a>(path: &'a Option<PathBuf>, flag: &str) -> Result<&'a Path> {
    match path {
        None => Err(UsageError(format!("missing required flag -{flag}")).into()),
        Some(p) if !p.is_file() => Err(UsageError(format!("-{flag}: file {} not found", p.display())).into()),
        Some(p) => Ok(p),
    }
}

/// The problem's built-in table with nicknames and flags taken from the file.
fn merge_physics(kind: ProblemKind, file: PhysicsTable) -> Result<PhysicsTable> {
    let mut table = kind.physics();
    if file.attrs.len() != table.attrs.len() {
        bail!(
            "physics file declares {} attributes, problem '{}' needs {}",
            file.attrs.len(),
            kind.name(),
            table.attrs.len()
        );
    }
    for (want, got) in table.attrs.iter_mut().zip(file.attrs) {
        if want.space != got.space || want.ncomp != got.ncomp {
            bail!(
                "physics attribute '{}' does not match problem '{}' (expected {} with {} component(s))",
                got.nickname,
                kind.name(),
                space_tag(want.space),
                want.ncomp
            );
        }
        want.nickname = got.nickname;
    }
    table.maxnods = file.maxnods.max(1);
    Ok(table)
}

fn build_session(args: &Args) -> Result<Session> {
    let control = required_file(&args.file_control, "file-control")?;
    let phys = required_file(&args.file_phys, "file-phys")?;
    let geometry = required_file(&args.file_geometry, "file-geometry")?;
    let params = read_control(control).with_context(|| format!("reading {}", control.display()))?;
    let kind = match args.prob {
        ProbArg::Galerkin => ProblemKind::Galerkin,
        ProbArg::Primal => ProblemKind::PrimalDpg,
        ProbArg::Uw => ProblemKind::UwDpg,
    };
    let physics = merge_physics(kind, read_physics(phys).with_context(|| format!("reading {}", phys.display()))?)?;
    let geom = GeometryFile::read(geometry).with_context(|| format!("reading {}", geometry.display()))?;
    let exact = (params.nexact == 1).then_some(match args.solution {
        SolutionArg::Linear => ManufacturedSolution::Linear,
        SolutionArg::Quadratic => ManufacturedSolution::Quadratic,
        SolutionArg::Smooth => ManufacturedSolution::Smooth,
        SolutionArg::Layer => ManufacturedSolution::BoundaryLayer,
    });
    let exec = match args.workers {
        Some(0) => bail!(UsageError("-workers must be at least 1".into())),
        Some(1) => ExecMode::Sequential,
        _ => ExecMode::Parallel,
    };
    #[cfg(feature = "parallel")]
    if let Some(n) = args.workers.filter(|&n| n > 1) {
        // a second initialization (tests in one process) keeps the first pool
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let mut problem = Problem::new(kind, exact, args.dp.unwrap_or(params.nord_add));
    problem.physics = physics;
    problem.exec = exec;
    if args.p + problem.dp > MAXP && kind.is_dpg() {
        bail!("-p {} with enrichment {} exceeds the maximum order {MAXP}", args.p, problem.dp);
    }
    let mesh = problem.mesh(&geom, OrderTriple::iso(args.p))?;
    let opts = SolverOptions {
        solver: match args.solver {
            None => SolverKind::Auto,
            Some(SolverArg::Cg) => SolverKind::Cg,
            Some(SolverArg::Dense) => SolverKind::Dense,
        },
        istc: params.istc_flag,
        store_stc: params.store_stc,
        exec,
        ..Default::default()
    };
    let marking = MarkingConfig::new(
        match args.mark {
            MarkArg::Greedy => MarkingStrategy::Greedy,
            MarkArg::Doerfler => MarkingStrategy::Doerfler,
        },
        args.perc,
    )?;
    let paraview = match &args.paraview_dir {
        Some(dir) => {
            let mut cfg = ParaviewConfig::new(dir, args.vlevel);
            cfg.exec = exec;
            Some(Paraview::new(cfg)?)
        }
        None => None,
    };
    Ok(Session {
        problem,
        mesh,
        params,
        opts,
        marking,
        tol: args.tol,
        max_steps: args.max_steps,
        paraview,
        solved: false,
    })
}

/// Run the driver; returns the process exit code.
pub fn run_main(argv: Vec<String>, input: &mut dyn BufRead, out: &mut dyn Write) -> i32 {
    let args = match Args::try_parse_from(normalize_args(argv)) {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let result = build_session(&args).and_then(|mut s| {
        if args.job == 0 {
            menu::interactive_menu(&mut s, input, out)
        } else {
            jobs::exec_job(args.job, &mut s, out)
        }
    });
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("hpfem: {e:#}");
            if e.downcast_ref::<UsageError>().is_some() {
                2
            } else {
                1
            }
        }
    }
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let stdin = std::io::stdin();
    let mut input = stdin.lock();
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    let code = run_main(std::env::args().collect(), &mut input, &mut out);
    let _ = out.flush();
    std::process::exit(code);
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_dash_flags() {
        let v = normalize_args(["hpfem", "-job", "1", "-perc", "0.5", "-tol", "-1e-3", "--p", "2"].map(String::from));
        assert_eq!(v, ["hpfem", "--job", "1", "--perc", "0.5", "--tol", "-1e-3", "--p", "2"]);
        // a lone single-letter flag is left for clap
        assert_eq!(normalize_args(["x", "-p"].map(String::from)), ["x", "-p"]);
    }
}
