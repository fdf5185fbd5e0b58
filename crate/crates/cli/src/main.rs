//! `crossdim`: scenario runner and quick checks for cross-dimensional systems.
//!
//! Exit codes: 0 success, 2 invalid input, 3 numeric failure (including a
//! transience that was computed but not realized), 1 for I/O problems.

mod inline;
mod output;
mod run;
mod scenario;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use log::{debug, info};

use crossdim::quotient::{reduce_matrix_with, reduce_vecmat_with, reduce_vector_with};
use crossdim::{operator_vnorm, project_sysmatrix, project_vector, spectral_norm};

use crate::scenario::{parse_scenario, Issues, Overrides};

#[derive(Parser)]
#[command(name = "crossdim", version, about = "Cross-dimensional linear systems toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a JSON scenario file and write the trajectory CSV and report.
    Run {
        scenario: PathBuf,
        /// Output directory (default: the file's "output" field, else ./crossdim-out).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Integration step override.
        #[arg(long)]
        dt: Option<f64>,
        /// Endpoint tolerance override.
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Minimal representative of a vector, matrix or input matrix.
    Reduce {
        #[command(flatten)]
        operand: Operand,
        /// Accept block deviations up to this size.
        #[arg(long, default_value_t = 0.0)]
        eps: f64,
    },
    /// Least-squares projection of a vector or square matrix onto R^n.
    Project {
        #[command(flatten)]
        operand: Operand,
        #[arg(long)]
        n: usize,
    },
    /// Spectral and dimension-free operator norms of a matrix.
    Norm {
        #[arg(long, allow_hyphen_values = true)]
        matrix: String,
    },
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct Operand {
    /// Entries separated by commas or spaces.
    #[arg(long, allow_hyphen_values = true)]
    vector: Option<String>,
    /// Rows separated by ';'.
    #[arg(long, allow_hyphen_values = true)]
    matrix: Option<String>,
    /// Input matrix, reduced by row replication.
    #[arg(long = "input-matrix", allow_hyphen_values = true)]
    input_matrix: Option<String>,
}

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error("invalid scenario {path}:\n{issues}")]
    Scenario { path: PathBuf, issues: Issues },
    #[error("invalid argument: {0}")]
    Argument(String),
    #[error("numeric failure: {0}")]
    Numeric(#[from] crossdim::Error),
    #[error("transience not realized; artifacts written to {0}")]
    NotRealized(PathBuf),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Scenario { .. } | CliError::Argument(_) => 2,
            CliError::Numeric(_) | CliError::NotRealized(_) => 3,
            CliError::Io { .. } => 1,
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io { path: path.to_path_buf(), source }
}

fn run_file(path: &Path, out: Option<PathBuf>, ov: Overrides) -> Result<(), CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Scenario {
        path: path.to_path_buf(),
        issues: Issues(vec![format!("<file>: cannot read: {e}")]),
    })?;
    let sc = parse_scenario(&text, ov)
        .map_err(|issues| CliError::Scenario { path: path.to_path_buf(), issues })?;
    info!("running {} in {} mode", path.display(), sc.job.mode());
    debug!("schema version {}", sc.schema_version);
    let outcome = run::run(&sc.job)?;

    let dir = out.or(sc.output).unwrap_or_else(|| PathBuf::from("crossdim-out"));
    fs::create_dir_all(&dir).map_err(io_err(&dir))?;
    let stem = path.file_stem().map_or("scenario".into(), |s| s.to_string_lossy().into_owned());
    if let Some(traj) = &outcome.trajectory {
        let csv_path = dir.join(format!("{stem}.csv"));
        let file = fs::File::create(&csv_path).map_err(io_err(&csv_path))?;
        output::write_csv(traj, std::io::BufWriter::new(file)).map_err(io_err(&csv_path))?;
        debug!("wrote {} samples to {}", traj.len(), csv_path.display());
    }
    let report_path = dir.join(format!("{stem}.report.txt"));
    fs::write(&report_path, &outcome.report).map_err(io_err(&report_path))?;
    print!("{}", outcome.report);
    if outcome.realized {
        Ok(())
    } else {
        Err(CliError::NotRealized(dir))
    }
}

fn reduce(op: &Operand, eps: f64) -> Result<(), CliError> {
    if !(eps >= 0.0 && eps.is_finite()) {
        return Err(CliError::Argument(format!("--eps must be non-negative, got {eps}")));
    }
    if let Some(v) = &op.vector {
        let x = inline::parse_vector(v).map_err(CliError::Argument)?;
        let red = reduce_vector_with(&x, eps);
        println!("{}, factor {}", red.class.rep(), red.factor);
    } else if let Some(m) = &op.matrix {
        let a = inline::parse_matrix(m).map_err(CliError::Argument)?;
        let red = reduce_matrix_with(&a, eps);
        print!("factor {}\n{}", red.factor, red.class.rep());
    } else if let Some(m) = &op.input_matrix {
        let b = inline::parse_matrix(m).map_err(CliError::Argument)?;
        let red = reduce_vecmat_with(&b, eps);
        print!("factor {}\n{}", red.factor, red.class.rep());
    }
    Ok(())
}

fn project(op: &Operand, n: usize) -> Result<(), CliError> {
    if n == 0 {
        return Err(CliError::Argument("--n must be positive".into()));
    }
    if let Some(v) = &op.vector {
        let x = inline::parse_vector(v).map_err(CliError::Argument)?;
        println!("{}", project_vector(&x, n)?);
    } else if let Some(m) = &op.matrix {
        let a = inline::parse_matrix(m).map_err(CliError::Argument)?;
        if !a.is_square() {
            return Err(CliError::Argument(format!("--matrix must be square, got {}x{}", a.rows(), a.cols())));
        }
        print!("{}", project_sysmatrix(&a, n)?);
    } else {
        return Err(CliError::Argument("project takes --vector or --matrix".into()));
    }
    Ok(())
}

fn norm(matrix: &str) -> Result<(), CliError> {
    let a = inline::parse_matrix(matrix).map_err(CliError::Argument)?;
    println!("spectral norm: {:.12e}", spectral_norm(&a)?);
    println!("operator norm: {:.12e}", operator_vnorm(&a)?);
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("CROSSDIM_LOG", "warn")).init();
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run { scenario, out, dt, tol } => {
            run_file(scenario, out.clone(), Overrides { dt: *dt, tol: *tol })
        }
        Command::Reduce { operand, eps } => reduce(operand, *eps),
        Command::Project { operand, n } => project(operand, *n),
        Command::Norm { matrix } => norm(matrix),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
