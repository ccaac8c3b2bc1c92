use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use sma_core::check::{run_check, CheckConfig};
use sma_core::driver::{
    builtin_case1, builtin_case2, emit_svg, parse_config, run_program, write_csv, LoadingProgram,
    PlotSpec,
};
use sma_core::{Error, MaterialParams, SolverOptions};

#[derive(Parser)]
#[command(
    name = "sma",
    version,
    about = "Three-phase shape memory alloy material point"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the program described by a JSON config.
    Run {
        #[arg(short, long)]
        config: PathBuf,
        #[arg(short, long, default_value = ".")]
        output: PathBuf,
    },
    /// Cool and reheat at zero stress.
    Case1 {
        #[arg(long)]
        plot: bool,
        #[arg(short, long, default_value = ".")]
        output: PathBuf,
    },
    /// Load and unload in uniaxial tension at constant temperature.
    Case2 {
        #[arg(long)]
        plot: bool,
        #[arg(short, long, default_value = ".")]
        output: PathBuf,
    },
    /// Finite-difference, oracle and projection checks.
    Check {
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        samples: Option<usize>,
    },
}

fn exit_code(e: &Error) -> u8 {
    match e.root() {
        Error::Solver { .. } => 2,
        _ => 1,
    }
}

fn fail(e: Error) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(exit_code(&e))
}

fn ensure_dir(dir: &Path) -> Result<(), Error> {
    std::fs::create_dir_all(dir).map_err(|source| Error::Io {
        path: dir.to_path_buf(),
        source,
    })
}

fn simulate(
    params: &MaterialParams,
    program: &LoadingProgram,
    options: &SolverOptions,
    dir: &Path,
    csv: &str,
    plots: &[PlotSpec],
) -> Result<(), Error> {
    let traj = run_program(params, program, options)?;
    ensure_dir(dir)?;
    let path = dir.join(csv);
    write_csv(&traj, &path)?;
    println!("wrote {} ({} steps)", path.display(), traj.records.len());
    for plot in plots {
        let path = dir.join(plot.file_name());
        emit_svg(&traj, &plot.x, &plot.y, &path)?;
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn builtin(name: &str, plot: bool, dir: &Path) -> Result<(), Error> {
    let params = MaterialParams::demo();
    let (program, x, y) = match name {
        "case1" => (builtin_case1(&params), "theta", "chi_M"),
        _ => (builtin_case2(&params), "eps_amplitude", "sig_amplitude"),
    };
    let plots: Vec<PlotSpec> = if plot {
        vec![PlotSpec {
            x: x.into(),
            y: y.into(),
            file: Some(format!("{name}.svg")),
        }]
    } else {
        Vec::new()
    };
    simulate(
        &params,
        &program,
        &SolverOptions::default(),
        dir,
        &format!("{name}.csv"),
        &plots,
    )
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Run { config, output } => std::fs::read_to_string(&config)
            .map_err(|source| Error::Io {
                path: config.clone(),
                source,
            })
            .and_then(|text| parse_config(&text))
            .and_then(|cfg| {
                simulate(
                    &cfg.material,
                    &cfg.program,
                    &cfg.solver,
                    &output,
                    &cfg.output.csv,
                    &cfg.output.plots,
                )
            }),
        Command::Case1 { plot, output } => builtin("case1", plot, &output),
        Command::Case2 { plot, output } => builtin("case2", plot, &output),
        Command::Check { seed, samples } => {
            let defaults = CheckConfig::default();
            let cfg = CheckConfig {
                seed: seed.unwrap_or(defaults.seed),
                samples: samples.unwrap_or(defaults.samples),
                ..defaults
            };
            let report = run_check(&cfg);
            println!("seed {}", report.seed);
            for item in &report.items {
                println!(
                    "{} {}: worst {:.3e} (tolerance {:.1e}, {} samples)",
                    if item.passed { "PASS" } else { "FAIL" },
                    item.name,
                    item.worst,
                    item.tolerance,
                    item.samples
                );
            }
            return if report.passed() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(3)
            };
        }
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => fail(e),
    }
}
