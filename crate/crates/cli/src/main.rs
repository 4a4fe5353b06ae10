use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use iscc_core::exec::Exec;
use iscc_cli::config::Experiment;
use iscc_cli::{fit, report, sweep, validate, CliError, Result};

#[derive(Parser)]
#[command(name = "iscc", version, about = "Sensing, computation and communication planning experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Common {
    /// Experiment config (JSON).
    config: PathBuf,
    /// Replace the config seed list; repeat for several seeds.
    #[arg(long = "seed")]
    seeds: Vec<u64>,
    /// Override the sampling-rate search stride, Hz.
    #[arg(long)]
    step: Option<u64>,
}

impl Common {
    fn load(&self) -> Result<Experiment> {
        Experiment::load(&self.config)?.with_overrides(&self.seeds, self.step)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Monte Carlo detector statistics against the model; exit 3 on any failed cell.
    Validate {
        #[command(flatten)]
        common: Common,
        /// Report CSV; defaults to the config `output`.
        #[arg(long)]
        output: Option<PathBuf>,
        /// Also export the simulated band powers.
        #[arg(long)]
        samples: Option<PathBuf>,
    },
    /// Fit class statistics from a band-power sample CSV.
    Fit {
        samples: PathBuf,
        /// ClassSet JSON to write.
        #[arg(long)]
        output: PathBuf,
        /// Config supplying the sensing parameters.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Class priors, comma separated; uniform by default.
        #[arg(long, value_delimiter = ',')]
        priors: Option<Vec<f64>>,
    },
    /// Run every scheme over the configured sweep and write one CSV row each.
    Sweep {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Solve the base scenario of the first seed and print the plans as JSON.
    Solve {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Print the compute-saving condition and ratio at one sampling rate.
    Explain {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 100.0)]
        f_s: f64,
    },
}

fn write_text(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| CliError::Io(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Validate { common, output, samples } => {
            let exp = common.load()?;
            let out = exp.output_path(output.as_deref())?;
            let rep = validate::run_validation(&exp, exp.config.seeds[0], samples.is_some())?;
            for w in &rep.warnings {
                eprintln!("warning: {w}");
            }
            validate::write_report_file(&out, &rep.cells)?;
            if let Some(p) = samples {
                validate::write_samples_file(&p, &rep.samples)?;
            }
            let failed: Vec<_> = rep.failures().collect();
            println!("{} cells, {} failed; report in {}", rep.cells.len(), failed.len(), out.display());
            for c in failed.iter().take(10) {
                println!(
                    "  FAIL {} class {} f_s {} eta {}: predicted {:.6e}, empirical {:.6e}, stderr {:.2e}",
                    c.kind.as_str(),
                    c.class,
                    c.f_s,
                    c.eta,
                    c.predicted,
                    c.empirical,
                    c.stderr
                );
            }
            if failed.is_empty() {
                Ok(())
            } else {
                Err(CliError::ValidationFailed(format!("{} of {} cells outside tolerance", failed.len(), rep.cells.len())))
            }
        }
        Command::Fit { samples, output, config, priors } => {
            let sp = match config {
                Some(c) => Experiment::load(&c)?.config.sensing,
                None => Default::default(),
            };
            let cs = fit::fit_file(&samples, &sp, priors.as_deref())?;
            let json = serde_json::to_string_pretty(&cs).map_err(|e| CliError::Run(e.to_string()))?;
            write_text(Some(&output), &(json + "\n"))?;
            println!("fitted {} classes into {}", cs.len(), output.display());
            Ok(())
        }
        Command::Sweep { common, output } => {
            let exp = common.load()?;
            let out = exp.output_path(output.as_deref())?;
            let rows = sweep::run_sweep(&exp, Exec::Parallel)?;
            sweep::write_sweep_file(&out, &rows)?;
            for (v, s, a) in sweep::mean_accuracy(&rows) {
                println!("{v:>12} {s:<24} {a:.6}");
            }
            println!("{} rows written to {}", rows.len(), out.display());
            Ok(())
        }
        Command::Solve { common, output } => {
            let exp = common.load()?;
            let rep = report::solve(&exp, exp.config.seeds[0])?;
            let json = serde_json::to_string_pretty(&rep).map_err(|e| CliError::Run(e.to_string()))?;
            write_text(output.as_deref(), &(json + "\n"))
        }
        Command::Explain { common, f_s } => {
            let exp = common.load()?;
            write_text(None, &report::explain(&exp, f_s)?)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
