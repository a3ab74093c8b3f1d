use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use truncated_hamburger::cli::{self, CmdOutput, SolveOptions, EXIT_MALFORMED};
use truncated_hamburger::io::ParameterFile;
use truncated_hamburger::solutions::{PerronGrid, DEFAULT_EPS_SEQUENCE};
use truncated_hamburger::Tolerances;

#[derive(Parser)]
#[command(name = "hamburger", about = "Truncated matrix Hamburger moment problems")]
struct Args {
    /// Tolerance override, e.g. `--tol psd_tol=1e-9` (repeatable).
    #[arg(long = "tol", global = true, value_parser = parse_tol)]
    tol: Vec<(String, f64)>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check the solvability conditions.
    Check { file: PathBuf },
    /// Produce the solution attached to a parameter.
    Solve {
        file: PathBuf,
        /// Parameter file; overrides the one embedded in the problem file.
        #[arg(long)]
        parameter: Option<PathBuf>,
        /// Shorthand for a unimodular parameter `e^{iθ}` (q = 1).
        #[arg(long, conflicts_with = "parameter", allow_hyphen_values = true)]
        theta: Option<f64>,
        #[arg(long)]
        dump_gram: bool,
        #[arg(long)]
        dump_operator: bool,
        #[arg(long)]
        contour_radius: Option<f64>,
        #[arg(long, default_value_t = 512)]
        contour_points: usize,
        /// Perron inversion grid `a:b:h`.
        #[arg(long, value_parser = parse_grid, allow_hyphen_values = true)]
        grid: Option<PerronGrid>,
        /// Comma-separated decreasing smoothing levels.
        #[arg(long, value_delimiter = ',')]
        eps_sequence: Option<Vec<f64>>,
        /// Print the sampled density as CSV.
        #[arg(long, requires = "grid")]
        csv: bool,
    },
    /// Solutions for `e^{iθ_j} I_q` over a uniform θ grid.
    Sweep {
        file: PathBuf,
        #[arg(long, default_value_t = 8)]
        theta_grid: usize,
    },
    /// Decide the scalar problem with an even number of moments.
    ScalarEven {
        #[arg(long, allow_hyphen_values = true)]
        moments: String,
    },
    /// Check a measure file against a problem file.
    Verify { file: PathBuf, measure: PathBuf },
}

fn parse_tol(s: &str) -> Result<(String, f64), String> {
    Tolerances::parse_override(s).map_err(|e| e.to_string())
}

fn parse_grid(s: &str) -> Result<PerronGrid, String> {
    PerronGrid::parse(s).map_err(|e| e.to_string())
}

fn read(path: &PathBuf) -> Result<String, CmdOutput> {
    std::fs::read_to_string(path).map_err(|e| CmdOutput {
        code: EXIT_MALFORMED,
        stdout: serde_json::json!({ "error": format!("{}: {e}", path.display()) }).to_string(),
    })
}

fn run(args: Args) -> Result<CmdOutput, CmdOutput> {
    Ok(match args.command {
        Command::Check { file } => cli::cmd_check(&read(&file)?, &args.tol),
        Command::Solve {
            file,
            parameter,
            theta,
            dump_gram,
            dump_operator,
            contour_radius,
            contour_points,
            grid,
            eps_sequence,
            csv,
        } => {
            let parameter = match (parameter, theta) {
                (Some(p), _) => Some(ParameterFile::parse(&read(&p)?).map_err(|e| CmdOutput {
                    code: EXIT_MALFORMED,
                    stdout: serde_json::json!({ "error": e.to_string() }).to_string(),
                })?),
                (None, Some(t)) => Some(ParameterFile::Theta {
                    constant_unimodular_theta: t,
                }),
                (None, None) => None,
            };
            let opts = SolveOptions {
                tol_overrides: args.tol,
                parameter,
                dump_gram,
                dump_operator,
                contour_radius,
                contour_points,
                grid,
                eps_sequence: eps_sequence.unwrap_or_else(|| DEFAULT_EPS_SEQUENCE.to_vec()),
                csv,
            };
            cli::cmd_solve(&read(&file)?, &opts)
        }
        Command::Sweep { file, theta_grid } => cli::cmd_sweep(&read(&file)?, theta_grid, &args.tol),
        Command::ScalarEven { moments } => match cli::parse_moment_list(&moments) {
            Ok(m) => cli::cmd_scalar_even(&m, &args.tol),
            Err(e) => CmdOutput {
                code: EXIT_MALFORMED,
                stdout: serde_json::json!({ "error": e.to_string() }).to_string(),
            },
        },
        Command::Verify { file, measure } => cli::cmd_verify(&read(&file)?, &read(&measure)?, &args.tol),
    })
}

fn main() -> ExitCode {
    let out = run(Args::parse()).unwrap_or_else(|e| e);
    // a closed pipe (e.g. `| head`) is not an error worth reporting
    let _ = writeln!(std::io::stdout(), "{}", out.stdout.trim_end());
    ExitCode::from(out.code as u8)
}
