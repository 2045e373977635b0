//! Command-line front end.
//!
//! Exit codes: 0 on success, 1 for invalid input or an inadmissible mesh,
//! 2 for solver or certification failures.

use std::ffi::OsString;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

use crate::assembly::{assemble, ElementKind};
use crate::bounds::{compute_bounds, convergence_rates, reference_for, BoundsReport, DEFAULT_K};
use crate::eigensolve::{certify, solve_largest, spectrum_csv, Pencil};
use crate::error::{AssemblyError, BoundsError, MeshError, SolverError};
use crate::mesh::{
    check_admissibility, generate_graded_lshape_with_target, generate_uniform_square, read_mesh,
    write_mesh_string, DomainTag, Mesh,
};
use crate::report::{csv, markdown_detail, markdown_table, DEFAULT_DIGITS};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_SOLVER: i32 = 2;

/// Environment variable capping the worker thread count.
pub const THREADS_ENV: &str = "STEKLOV_THREADS";

#[derive(Debug, Parser)]
#[command(
    name = "steklov",
    version,
    about = "Guaranteed two-sided bounds for Steklov eigenvalues"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Uniform meshes of the unit square, one table column per n (h = 1/n).
    Square {
        #[arg(long, num_args = 1.., default_values_t = [8usize, 16, 32, 64])]
        n: Vec<usize>,
        #[command(flatten)]
        opts: BoundOpts,
    },
    /// Graded mesh of the L-shaped domain (0,2)^2 \ [1,2]^2.
    Lshape {
        /// Element sizes scale like r^(1/grading) near the re-entrant corner.
        #[arg(long, default_value_t = 3.0)]
        grading: f64,
        #[arg(long, default_value_t = 5000)]
        target_elems: usize,
        #[command(flatten)]
        opts: BoundOpts,
        /// Write assembled matrices and spectra into this directory.
        #[arg(long)]
        dump: Option<PathBuf>,
    },
    /// Print counts and the admissibility verdict for a mesh file.
    MeshInfo {
        #[arg(long)]
        file: PathBuf,
    },
    /// Bound eigenvalues on a mesh read from a file.
    BoundFile {
        #[arg(long)]
        file: PathBuf,
        #[command(flatten)]
        opts: BoundOpts,
        /// Write assembled matrices and spectra into this directory.
        #[arg(long)]
        dump: Option<PathBuf>,
    },
    /// Write a generated mesh in the steklov-mesh format.
    GenMesh {
        #[arg(long, value_enum)]
        domain: GenDomain,
        /// Subdivisions per side (square).
        #[arg(long, default_value_t = 8)]
        n: usize,
        #[arg(long, default_value_t = 3.0)]
        grading: f64,
        #[arg(long, default_value_t = 5000)]
        target_elems: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum GenDomain {
    Square,
    Lshape,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Md,
    Csv,
}

#[derive(Debug, Args)]
struct BoundOpts {
    /// Number of eigenvalues to bound.
    #[arg(long, default_value_t = DEFAULT_K, value_parser = clap::value_parser!(usize))]
    k: usize,
    /// Certify eigenpairs by residual enclosures and use the safe ends.
    #[arg(long)]
    certify: bool,
    #[arg(long, value_enum, default_value_t = Format::Md)]
    format: Format,
    /// Significant digits in numeric output.
    #[arg(long, default_value_t = DEFAULT_DIGITS)]
    digits: usize,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Reference eigenvalues for error and rate rows, comma separated.
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    reference: Option<Vec<f64>>,
}

#[derive(Debug)]
struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn input(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_INPUT,
            message: message.into(),
        }
    }
}

impl From<MeshError> for Failure {
    fn from(e: MeshError) -> Self {
        Failure::input(e.to_string())
    }
}

impl From<SolverError> for Failure {
    fn from(e: SolverError) -> Self {
        // asking for more modes than the mesh carries is a usage error
        let code = match e {
            SolverError::TooManyRequested { .. } => EXIT_INPUT,
            _ => EXIT_SOLVER,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

impl From<AssemblyError> for Failure {
    fn from(e: AssemblyError) -> Self {
        Failure::input(e.to_string())
    }
}

impl From<BoundsError> for Failure {
    fn from(e: BoundsError) -> Self {
        match e {
            BoundsError::Solver(s) => s.into(),
            BoundsError::NonPositiveLambda(_) => Failure {
                code: EXIT_SOLVER,
                message: e.to_string(),
            },
            other => Failure::input(other.to_string()),
        }
    }
}

/// Parses `args` (program name first), runs the command and returns the exit
/// code. Results go to stdout or `--out`; diagnostics go to stderr.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
        }
    };
    let result = match thread_pool() {
        Ok(Some(pool)) => pool.install(|| run(cli.command)),
        Ok(None) => run(cli.command),
        Err(f) => Err(f),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(f) => {
            eprintln!("error: {}", f.message);
            f.code
        }
    }
}

fn thread_pool() -> Result<Option<rayon::ThreadPool>, Failure> {
    let Ok(value) = std::env::var(THREADS_ENV) else {
        return Ok(None);
    };
    let n: usize =
        value.trim().parse().ok().filter(|&n| n >= 1).ok_or_else(|| {
            Failure::input(format!("{THREADS_ENV} must be a positive integer, got '{value}'"))
        })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build()
        .map(Some)
        .map_err(|e| Failure::input(format!("cannot start thread pool: {e}")))
}

fn run(command: Command) -> Result<(), Failure> {
    match command {
        Command::Square { n, opts } => run_square(&n, &opts),
        Command::Lshape {
            grading,
            target_elems,
            opts,
            dump,
        } => {
            validate(&opts)?;
            let (mesh, _) = generate_graded_lshape_with_target(grading, target_elems)?;
            run_single(&mesh, &opts, dump.as_deref())
        }
        Command::MeshInfo { file } => run_mesh_info(&file),
        Command::BoundFile { file, opts, dump } => {
            validate(&opts)?;
            let mesh = read_mesh(&file)?;
            run_single(&mesh, &opts, dump.as_deref())
        }
        Command::GenMesh {
            domain,
            n,
            grading,
            target_elems,
            out,
        } => {
            let mesh = match domain {
                GenDomain::Square => {
                    if n < 2 {
                        return Err(Failure::input("--n must be at least 2"));
                    }
                    generate_uniform_square(n)?
                }
                GenDomain::Lshape => generate_graded_lshape_with_target(grading, target_elems)?.0,
            };
            emit(out.as_deref(), &write_mesh_string(&mesh))
        }
    }
}

fn validate(opts: &BoundOpts) -> Result<(), Failure> {
    if opts.k == 0 {
        return Err(Failure::input("--k must be at least 1"));
    }
    if opts.digits == 0 || opts.digits > 17 {
        return Err(Failure::input("--digits must be between 1 and 17"));
    }
    if let Some(r) = &opts.reference {
        if r.iter().any(|v| !v.is_finite() || *v <= 0.0) {
            return Err(Failure::input("--reference values must be positive"));
        }
    }
    Ok(())
}

/// Reference values for a domain, cut to the number of computed rows.
fn reference(opts: &BoundOpts, domain: DomainTag) -> Option<Vec<f64>> {
    let r: Vec<f64> = match &opts.reference {
        Some(r) => r.clone(),
        None => reference_for(domain)?.to_vec(),
    };
    Some(r.into_iter().take(opts.k).collect())
}

fn run_square(ns: &[usize], opts: &BoundOpts) -> Result<(), Failure> {
    validate(opts)?;
    if let Some(&n) = ns.iter().find(|&&n| n < 2) {
        return Err(Failure::input(format!("--n values must be at least 2, got {n}")));
    }
    let reports = ns
        .par_iter()
        .map(|&n| -> Result<BoundsReport, Failure> {
            let mesh = generate_uniform_square(n)?;
            Ok(compute_bounds(&mesh, opts.k, opts.certify)?.with_label(format!("1/{n}"), 1.0 / n as f64))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let text = match opts.format {
        Format::Csv => csv(&reports, opts.digits),
        Format::Md => {
            let rates = match reference(opts, DomainTag::Square) {
                Some(r) => Some(convergence_rates(&reports, &r)?),
                None => None,
            };
            markdown_table(&reports, rates.as_ref(), opts.digits)
        }
    };
    emit(opts.out.as_deref(), &text)
}

fn run_single(mesh: &Mesh, opts: &BoundOpts, dump: Option<&Path>) -> Result<(), Failure> {
    let report = compute_bounds(mesh, opts.k, opts.certify)?;
    if let Some(dir) = dump {
        dump_matrices(mesh, opts.k, dir)?;
    }
    let text = match opts.format {
        Format::Csv => csv(std::slice::from_ref(&report), opts.digits),
        Format::Md => markdown_detail(&report, reference(opts, mesh.domain()).as_deref(), opts.digits),
    };
    emit(opts.out.as_deref(), &text)
}

fn run_mesh_info(file: &Path) -> Result<(), Failure> {
    let mesh = read_mesh(file)?;
    let report = check_admissibility(&mesh);
    let verdict = if report.passed() {
        "yes".to_string()
    } else {
        format!("no ({})", report.summary())
    };
    println!(
        "{} triangles, {} edges, {} boundary, admissible: {verdict}",
        mesh.num_triangles(),
        mesh.num_edges(),
        mesh.num_boundary_edges()
    );
    if report.passed() {
        Ok(())
    } else {
        Err(Failure::input("mesh is not admissible"))
    }
}

/// Writes `{cr,p1}_{m,n}.txt` (coordinate format) and `{cr,p1}_spectrum.csv`.
fn dump_matrices(mesh: &Mesh, k: usize, dir: &Path) -> Result<(), Failure> {
    let io = |e: std::io::Error| Failure::input(format!("{}: {e}", dir.display()));
    fs::create_dir_all(dir).map_err(io)?;
    for kind in [ElementKind::CrouzeixRaviart, ElementKind::P1] {
        let tag = match kind {
            ElementKind::CrouzeixRaviart => "cr",
            ElementKind::P1 => "p1",
        };
        let asm = assemble(mesh, kind)?;
        fs::write(dir.join(format!("{tag}_m.txt")), asm.m.to_coordinate_string()).map_err(io)?;
        fs::write(dir.join(format!("{tag}_n.txt")), asm.n.to_coordinate_string()).map_err(io)?;
        let pencil = Pencil::from_assembled(&asm);
        let spectrum = solve_largest(&pencil, k)?;
        let enclosures = spectrum
            .mu
            .iter()
            .zip(&spectrum.vectors)
            .map(|(&mu, x)| certify(&pencil, mu, x))
            .collect::<Result<Vec<_>, _>>()?;
        fs::write(
            dir.join(format!("{tag}_spectrum.csv")),
            spectrum_csv(&spectrum, Some(&enclosures)),
        )
        .map_err(io)?;
    }
    Ok(())
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), Failure> {
    match out {
        Some(path) => fs::write(path, text).map_err(|e| Failure::input(format!("{}: {e}", path.display()))),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|e| Failure::input(format!("stdout: {e}")))
        }
    }
}
