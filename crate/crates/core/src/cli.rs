//! The `mtmc` command line.
//!
//! Exit codes: 0 on success, 1 on data or validation errors, 2 on usage errors.
//! Diagnostics go to stderr; verbosity follows `MTMC_LOG_LEVEL`.

use std::fs::{self, File};
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use crate::evaluation::{
    build_matrix, parse_run_log, read_combination_specs, write_combination_specs, write_run_log,
};
use crate::matrix::EvaluationMatrix;
use crate::report::{
    front_table, read_phi_csv, write_sweep_csv, FrontReport, SelectResponse, TABLE3_PHI_CSV,
};
use crate::select::{pareto_front, resolve_weights, select_on_front, sweep, SelectError};
use crate::service::{self, AppState};
use crate::synth::{generate, SynthConfig};

#[derive(Debug, Parser)]
#[command(
    name = "mtmc",
    version,
    about = "Pick hyperparameters from finished multi-task runs"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Table,
    Json,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build the evaluation matrix from a run log and combination specs
    Criteria {
        #[arg(long)]
        runs: PathBuf,
        #[arg(long)]
        combos: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// List the Pareto front of a matrix
    Pareto {
        #[arg(long)]
        matrix: PathBuf,
        #[arg(long, value_enum, default_value = "table")]
        format: Format,
    },
    /// Select one combination for a weight vector
    Select {
        #[arg(long)]
        matrix: PathBuf,
        /// Comma-separated weights in [0, 1], one per criterion
        #[arg(long, allow_hyphen_values = true)]
        phi: String,
        #[arg(long)]
        json: bool,
    },
    /// Select for every weight row of a CSV file
    Sweep {
        #[arg(long)]
        matrix: PathBuf,
        /// Defaults to the bundled 17-row, four-criteria weight table
        #[arg(long)]
        phi_file: Option<PathBuf>,
        /// Defaults to stdout
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Generate a synthetic run log and combination specs
    Synth {
        #[arg(long, default_value_t = 100)]
        combinations: usize,
        #[arg(long, default_value_t = 10)]
        folds: usize,
        #[arg(long, default_value_t = 15)]
        epochs: u32,
        #[arg(long, default_value_t = 5)]
        tasks: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 0.01)]
        noise_sd: f64,
        #[arg(long)]
        out_runs: PathBuf,
        #[arg(long)]
        out_combos: PathBuf,
    },
    /// Serve the HTTP API for a matrix
    Serve {
        #[arg(long)]
        matrix: PathBuf,
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
        /// Directory of static UI assets served under `/`
        #[arg(long = "static")]
        static_dir: Option<PathBuf>,
    },
}

/// Parses arguments, runs the command and maps the outcome to an exit code.
pub fn main_with_args<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    init_logging();
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(e.exit_code().clamp(0, 255) as u8);
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn init_logging() {
    let env = env_logger::Env::new().filter_or("MTMC_LOG_LEVEL", "warn");
    let _ = env_logger::Builder::from_env(env)
        .format_timestamp(None)
        .try_init();
}

pub fn run(command: Command) -> Result<()> {
    match command {
        Command::Criteria { runs, combos, out } => cmd_criteria(&runs, &combos, &out),
        Command::Pareto { matrix, format } => cmd_pareto(&matrix, format),
        Command::Select { matrix, phi, json } => cmd_select(&matrix, &phi, json),
        Command::Sweep {
            matrix,
            phi_file,
            out,
        } => cmd_sweep(&matrix, phi_file.as_deref(), out.as_deref()),
        Command::Synth {
            combinations,
            folds,
            epochs,
            tasks,
            seed,
            noise_sd,
            out_runs,
            out_combos,
        } => {
            let config = SynthConfig {
                n_combinations: combinations,
                n_folds: folds,
                n_epochs: epochs,
                n_tasks: tasks,
                seed,
                noise_sd,
            };
            cmd_synth(&config, &out_runs, &out_combos)
        }
        Command::Serve {
            matrix,
            port,
            host,
            static_dir,
        } => cmd_serve(&matrix, &host, port, static_dir.as_deref()),
    }
}

fn open(path: &Path) -> Result<BufReader<File>> {
    let f = File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
    Ok(BufReader::new(f))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    let f = File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
    Ok(BufWriter::new(f))
}

pub fn load_matrix(path: &Path) -> Result<EvaluationMatrix> {
    EvaluationMatrix::read_json(open(path)?)
        .with_context(|| format!("invalid matrix in {}", path.display()))
}

fn cmd_criteria(runs: &Path, combos: &Path, out: &Path) -> Result<()> {
    let records = parse_run_log(open(runs)?).with_context(|| format!("{}", runs.display()))?;
    let specs =
        read_combination_specs(open(combos)?).with_context(|| format!("{}", combos.display()))?;
    let matrix = build_matrix(&records, &specs)?;
    let mut w = create(out)?;
    writeln!(w, "{}", matrix.to_json())?;
    w.flush()?;
    println!(
        "combinations: {}, tasks: {}, criteria: {}",
        matrix.len(),
        matrix.tasks().len(),
        matrix.n_criteria()
    );
    Ok(())
}

fn cmd_pareto(path: &Path, format: Format) -> Result<()> {
    let matrix = load_matrix(path)?;
    let front = pareto_front(&matrix)?;
    let report = FrontReport::new(&matrix, &front);
    match format {
        Format::Json => println!("{}", serde_json::to_string(&report)?),
        Format::Table => print!("{}", front_table(&matrix, &report)),
    }
    Ok(())
}

/// Parses `a,b,c` into weights, naming the first component that is not a number.
pub fn parse_phi(text: &str) -> Result<Vec<f64>> {
    text.split(',')
        .enumerate()
        .map(|(i, s)| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| anyhow!("phi component {i}: `{}` is not a number", s.trim()))
        })
        .collect()
}

fn describe(e: SelectError) -> anyhow::Error {
    match e {
        SelectError::Dimension { expected, actual } => {
            anyhow!("phi has {actual} components, the matrix has {expected} criteria")
        }
        other => anyhow!(other),
    }
}

fn cmd_select(path: &Path, phi: &str, json: bool) -> Result<()> {
    let matrix = load_matrix(path)?;
    let phi = parse_phi(phi)?;
    let weights = resolve_weights(&phi, matrix.n_criteria()).map_err(describe)?;
    let front = pareto_front(&matrix)?;
    let result = select_on_front(&matrix, &front, weights)?;
    let response = SelectResponse::new(&matrix, &front, &result);
    if json {
        println!("{}", serde_json::to_string(&response)?);
        return Ok(());
    }
    let mut out = io::stdout().lock();
    writeln!(out, "selected: {}", response.selected_id)?;
    for (k, v) in &response.hyperparameters {
        writeln!(out, "  {k} = {v}")?;
    }
    let fallback = if phi.iter().all(|&w| w == 0.0) {
        " (all-zero weights replaced)"
    } else {
        ""
    };
    writeln!(
        out,
        "resolved phi: ({}){fallback}",
        response
            .resolved_phi
            .iter()
            .map(f64::to_string)
            .collect::<Vec<_>>()
            .join(", ")
    )?;
    writeln!(out, "projections:")?;
    for p in &response.projections {
        let mark = if p.combination_id == response.selected_id {
            " *"
        } else {
            ""
        };
        writeln!(out, "  {} {:.6}{mark}", p.combination_id, p.score)?;
    }
    Ok(())
}

fn cmd_sweep(path: &Path, phi_file: Option<&Path>, out: Option<&Path>) -> Result<()> {
    let matrix = load_matrix(path)?;
    let rows = match phi_file {
        Some(p) => read_phi_csv(open(p)?).with_context(|| format!("{}", p.display()))?,
        None => read_phi_csv(TABLE3_PHI_CSV.as_bytes())?,
    };
    let source = phi_file.map_or("bundled weights".to_string(), |p| p.display().to_string());
    let (lines, phis): (Vec<u64>, Vec<Vec<f64>>) = rows.into_iter().unzip();
    let results = sweep(&matrix, &phis).map_err(|e| match e {
        SelectError::SweepRow { row, source: inner } => {
            anyhow!(
                "{source}: line {} (phi row {}): {}",
                lines[row],
                row + 1,
                describe(*inner)
            )
        }
        other => anyhow!(other),
    })?;
    match out {
        Some(p) => {
            let mut w = create(p)?;
            write_sweep_csv(&matrix, &results, &mut w)?;
            w.flush()?;
        }
        None => write_sweep_csv(&matrix, &results, io::stdout().lock())?,
    }
    Ok(())
}

fn cmd_synth(config: &SynthConfig, out_runs: &Path, out_combos: &Path) -> Result<()> {
    let (specs, records) = generate(config)?;
    let mut w = create(out_runs)?;
    write_run_log(&records, &mut w)?;
    w.flush()?;
    let mut w = create(out_combos)?;
    write_combination_specs(&specs, &mut w)?;
    writeln!(w)?;
    w.flush()?;
    println!("records: {}, combinations: {}", records.len(), specs.len());
    Ok(())
}

fn cmd_serve(path: &Path, host: &str, port: u16, static_dir: Option<&Path>) -> Result<()> {
    let matrix = load_matrix(path)?;
    if let Some(dir) = static_dir {
        if !fs::metadata(dir).map(|m| m.is_dir()).unwrap_or(false) {
            bail!("static directory {} does not exist", dir.display());
        }
    }
    let state = Arc::new(AppState::new(matrix)?);
    let runtime = tokio::runtime::Runtime::new()?;
    runtime.block_on(async {
        let listener = tokio::net::TcpListener::bind((host, port))
            .await
            .with_context(|| format!("cannot bind {host}:{port}"))?;
        eprintln!("listening on http://{}", listener.local_addr()?);
        service::serve(listener, service::router(state, static_dir)).await?;
        Ok(())
    })
}
