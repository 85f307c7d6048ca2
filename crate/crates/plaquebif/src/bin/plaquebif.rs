//! Command-line front end: radial steady states, linearized modes,
//! bifurcation points, parameter sweeps, and the acceptance battery.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use plaquebif::acceptance::{run_all, AcceptanceOptions};
use plaquebif::bifurcation::{self, GridSpec};
use plaquebif::config::{parse_list, parse_scheme, GridConfig, ResolvedParams};
use plaquebif::grid::build_grid;
use plaquebif::model::ModelParams;
use plaquebif::modes::solve_mode;
use plaquebif::output::{self, Manifest};
use plaquebif::steady::{solve_steady, SteadySettings};
use plaquebif::tolerances;

const EXIT_SOLVER: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_VALIDATION: u8 = 3;

#[derive(Parser)]
#[command(
    name = "plaquebif",
    version,
    about = "Radial steady states, cos(n theta) modes and symmetry-breaking bifurcation points of the thin-annulus arterial plaque model"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Model parameters as CLI flags; names mirror the config-file keys exactly.
#[derive(Args, Debug, Default)]
struct ParamFlags {
    #[arg(long = "k1", value_name = "X", help_heading = "Model parameters")]
    k1: Option<f64>,
    #[arg(long = "k2", value_name = "X", help_heading = "Model parameters")]
    k2: Option<f64>,
    #[arg(long = "K1", value_name = "X", help_heading = "Model parameters")]
    cap_k1: Option<f64>,
    #[arg(long = "K2", value_name = "X", help_heading = "Model parameters")]
    cap_k2: Option<f64>,
    #[arg(long = "rho1", value_name = "X", help_heading = "Model parameters")]
    rho1: Option<f64>,
    #[arg(long = "rho2", value_name = "X", help_heading = "Model parameters")]
    rho2: Option<f64>,
    #[arg(long = "rho3", value_name = "X", help_heading = "Model parameters")]
    rho3: Option<f64>,
    #[arg(long = "D", value_name = "X", help_heading = "Model parameters")]
    cap_d: Option<f64>,
    #[arg(long = "lambda", value_name = "X", help_heading = "Model parameters")]
    lambda: Option<f64>,
    #[arg(long = "gamma", value_name = "X", help_heading = "Model parameters")]
    gamma: Option<f64>,
    #[arg(long = "M0", value_name = "X", help_heading = "Model parameters")]
    cap_m0: Option<f64>,
    #[arg(long = "beta1", value_name = "X", help_heading = "Model parameters")]
    beta1: Option<f64>,
    #[arg(long = "beta2", value_name = "X", help_heading = "Model parameters")]
    beta2: Option<f64>,
    #[arg(long = "H0", value_name = "X", help_heading = "Model parameters")]
    cap_h0: Option<f64>,
    #[arg(long = "eps", value_name = "X", help_heading = "Model parameters")]
    eps: Option<f64>,
    #[arg(long = "mu", value_name = "X", help_heading = "Model parameters")]
    mu: Option<f64>,
}

impl ParamFlags {
    fn overrides(&self) -> Vec<(String, f64)> {
        let pairs: [(&str, Option<f64>); 16] = [
            ("k1", self.k1),
            ("k2", self.k2),
            ("K1", self.cap_k1),
            ("K2", self.cap_k2),
            ("rho1", self.rho1),
            ("rho2", self.rho2),
            ("rho3", self.rho3),
            ("D", self.cap_d),
            ("lambda", self.lambda),
            ("gamma", self.gamma),
            ("M0", self.cap_m0),
            ("beta1", self.beta1),
            ("beta2", self.beta2),
            ("H0", self.cap_h0),
            ("eps", self.eps),
            ("mu", self.mu),
        ];
        pairs.into_iter().filter_map(|(k, v)| v.map(|x| (k.to_string(), x))).collect()
    }
}

#[derive(Args, Debug)]
struct CommonArgs {
    /// Flat key=value parameter file (keys match field names).
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Built-in parameter set to start from.
    #[arg(long, value_name = "ref-a|ref-b", default_value = "ref-a")]
    preset: String,
    /// Radial grid nodes.
    #[arg(long = "grid-n", value_name = "N", default_value_t = tolerances::GRID_N_PRODUCTION)]
    grid_n: usize,
    /// Discretization scheme: uniform-fd2 | stretched-collocation.
    #[arg(long, value_name = "SCHEME", default_value = "uniform-fd2")]
    scheme: String,
    /// Output directory.
    #[arg(long, value_name = "DIR", default_value = "out")]
    out: PathBuf,
    /// Output format for tables: csv | json.
    #[arg(long, value_name = "FMT", default_value = "csv")]
    format: String,
    /// Seed for randomized property checks.
    #[arg(long, value_name = "SEED", default_value_t = tolerances::DEFAULT_SEED)]
    seed: u64,
    #[command(flatten)]
    params: ParamFlags,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the radially symmetric steady state and its rho4.
    Steady {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Solve the linearized mode-n system around the steady state.
    Mode {
        /// Angular mode number.
        #[arg(long)]
        n: u32,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Locate the symmetry-breaking bifurcation point mu_n.
    Bifurcate {
        /// Angular mode number (n >= 2).
        #[arg(long)]
        n: u32,
        /// Largest mode in the separation table.
        #[arg(long = "m-max", default_value_t = 12)]
        m_max: u32,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Locate mu_n over a grid of modes and annulus widths.
    Sweep {
        /// Comma-separated mode list, e.g. 2,3.
        #[arg(long = "n-list", value_name = "LIST")]
        n_list: String,
        /// Comma-separated eps list, e.g. 1e-2,5e-3,2.5e-3.
        #[arg(long = "eps-list", value_name = "LIST")]
        eps_list: String,
        /// Parallel workers for independent rows.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Run the full acceptance battery and print one line per criterion.
    Validate {
        #[command(flatten)]
        common: CommonArgs,
        /// Parallel workers for sweep-backed criteria.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
}

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error(transparent)]
    Config(#[from] plaquebif::config::ConfigError),
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Grid(#[from] plaquebif::grid::GridError),
    #[error(transparent)]
    Steady(#[from] plaquebif::steady::SteadyError),
    #[error(transparent)]
    Mode(#[from] plaquebif::modes::ModeError),
    #[error(transparent)]
    Bifurcation(#[from] plaquebif::bifurcation::BifurcationError),
    #[error("sweep failed on every row; first error: {0}")]
    SweepAllFailed(String),
    #[error("cannot write output: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) | CliError::Usage(_) => EXIT_CONFIG,
            _ => EXIT_SOLVER,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

struct RunSetup {
    params: ModelParams,
    sources: BTreeMap<String, plaquebif::config::ValueSource>,
    grid_config: GridConfig,
    out: PathBuf,
    format: String,
    seed: u64,
}

fn resolve(common: &CommonArgs) -> Result<RunSetup, CliError> {
    let mut resolved = ResolvedParams::from_preset(&common.preset)
        .ok_or_else(|| CliError::Usage(format!("unknown preset `{}`", common.preset)))?;
    if let Some(path) = &common.config {
        resolved.apply_file(path)?;
    }
    resolved.apply_cli_overrides(&common.params.overrides())?;
    let scheme = parse_scheme(&common.scheme)?;
    if !matches!(common.format.as_str(), "csv" | "json") {
        return Err(CliError::Usage(format!(
            "unknown format `{}` (expected csv or json)",
            common.format
        )));
    }
    Ok(RunSetup {
        params: resolved.params,
        sources: resolved.sources,
        grid_config: GridConfig { n_nodes: common.grid_n, scheme },
        out: common.out.clone(),
        format: common.format.clone(),
        seed: common.seed,
    })
}

fn write_manifest(
    setup: &RunSetup,
    command: &str,
    args: BTreeMap<String, String>,
) -> Result<(), CliError> {
    let manifest = Manifest::new(
        command,
        &setup.params,
        &setup.sources,
        setup.grid_config,
        setup.seed,
        &setup.format,
        args,
    );
    output::write_file(&setup.out, "run.manifest.json", &output::to_json(&manifest))?;
    Ok(())
}

fn build(setup: &RunSetup) -> Result<plaquebif::grid::RadialGrid, CliError> {
    Ok(build_grid(setup.params.eps, setup.grid_config.n_nodes, setup.grid_config.scheme)?)
}

fn run(cli: Cli) -> Result<ExitCode, CliError> {
    let settings = SteadySettings::default();
    match cli.command {
        Command::Steady { common } => {
            let setup = resolve(&common)?;
            write_manifest(&setup, "steady", BTreeMap::new())?;
            let grid = build(&setup)?;
            let state = solve_steady(&setup.params, &grid, &settings)?;
            let diag = output::steady_diagnostics(&state, &setup.params);
            output::write_file(&setup.out, "steady.csv", &output::steady_csv(&state, &setup.params))?;
            output::write_file(&setup.out, "steady.diagnostics.json", &output::to_json(&diag))?;
            println!(
                "steady: rho4 = {}, J1 = {}, residual = {:.3e} -> {}",
                state.rho4,
                state.j1,
                state.residual_norm,
                setup.out.display()
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::Mode { n, common } => {
            let setup = resolve(&common)?;
            let mut args = BTreeMap::new();
            args.insert("n".to_string(), n.to_string());
            write_manifest(&setup, "mode", args)?;
            let grid = build(&setup)?;
            let state = solve_steady(&setup.params, &grid, &settings)?;
            let sol = solve_mode(&state, &setup.params, n)?;
            let name = format!("mode_n{n}.csv");
            output::write_file(&setup.out, &name, &output::mode_csv(&sol, &state, &setup.params))?;
            println!(
                "mode n={n}: J2n = {}, (p1n)'(1-eps) = {} -> {}",
                sol.j2n,
                sol.p1n_prime_inner,
                setup.out.display()
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::Bifurcate { n, m_max, common } => {
            let setup = resolve(&common)?;
            let mut args = BTreeMap::new();
            args.insert("n".to_string(), n.to_string());
            args.insert("m_max".to_string(), m_max.to_string());
            write_manifest(&setup, "bifurcate", args)?;
            let grid = build(&setup)?;
            let point = bifurcation::find_mu_n(&setup.params, n, &grid, &settings)?;
            let table =
                bifurcation::separation_table(&setup.params, &point, m_max, &grid, &settings)?;
            let report = output::BifurcationReport { point: &point, separation: &table };
            output::write_file(
                &setup.out,
                &format!("bifurcation_n{n}.json"),
                &output::to_json(&report),
            )?;
            output::write_file(
                &setup.out,
                &format!("separation_n{n}.csv"),
                &output::separation_csv(&table),
            )?;
            println!(
                "bifurcate n={n}: mu_n = {}, deviation = {}, valid = {} -> {}",
                point.mu_n,
                point.deviation,
                point.valid,
                setup.out.display()
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::Sweep { n_list, eps_list, jobs, common } => {
            let setup = resolve(&common)?;
            let ns: Vec<u32> = parse_list(&n_list).map_err(CliError::Usage)?;
            let eps: Vec<f64> = parse_list(&eps_list).map_err(CliError::Usage)?;
            let mut args = BTreeMap::new();
            args.insert("n_list".to_string(), n_list.clone());
            args.insert("eps_list".to_string(), eps_list.clone());
            args.insert("jobs".to_string(), jobs.to_string());
            write_manifest(&setup, "sweep", args)?;
            let spec =
                GridSpec { n_nodes: setup.grid_config.n_nodes, scheme: setup.grid_config.scheme };
            let result = bifurcation::sweep(&setup.params, &ns, &eps, spec, jobs, &settings);
            match setup.format.as_str() {
                "json" => output::write_file(&setup.out, "sweep.json", &output::to_json(&result))?,
                _ => output::write_file(&setup.out, "sweep.csv", &output::sweep_csv(&result))?,
            }
            let failures = result.rows.iter().filter(|r| r.error.is_some()).count();
            println!(
                "sweep: {} rows, {failures} failed -> {}",
                result.rows.len(),
                setup.out.display()
            );
            if !result.rows.is_empty() && failures == result.rows.len() {
                return Err(CliError::SweepAllFailed(
                    result.rows[0].error.clone().unwrap_or_default(),
                ));
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Validate { common, jobs } => {
            let setup = resolve(&common)?;
            let mut args = BTreeMap::new();
            args.insert("jobs".to_string(), jobs.to_string());
            write_manifest(&setup, "validate", args)?;
            let opts = AcceptanceOptions {
                n_grid: setup.grid_config.n_nodes.min(tolerances::GRID_N_TEST),
                seed: setup.seed,
                jobs,
            };
            let results = run_all(&opts);
            let mut all_ok = true;
            let mut lines = String::new();
            for r in &results {
                println!("{}", r.line());
                lines.push_str(&r.line());
                lines.push('\n');
                all_ok &= r.passed;
            }
            output::write_file(&setup.out, "validate.txt", &lines)?;
            if all_ok {
                println!("all {} checks passed", results.len());
                Ok(ExitCode::SUCCESS)
            } else {
                eprintln!("validation failed");
                Ok(ExitCode::from(EXIT_VALIDATION))
            }
        }
    }
}
