use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use rayon::prelude::*;

use nlacoustics::diagnostics::{convergence_study, default_window, fit_decay, ConvergenceKind, ConvergenceSetup};
use nlacoustics::io::{parse_config, preset_with_overrides, read_energy_csv, run_experiment, RunReport};
use nlacoustics::model::ModelKind;
use nlacoustics::{Error, Result};

#[derive(Parser)]
#[command(name = "nlacoustics", version, about = "Nonlinear acoustics in velocity-enthalpy form")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a simulation described by a TOML file.
    Run {
        config: PathBuf,
        /// Override a key, e.g. `--set time.dt=5e-8`.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
    },
    /// 1D pulse experiment, all models unless one is given.
    Exp1d {
        #[arg(long)]
        model: Option<ModelKind>,
        /// Run to t = 5e-4 for the energy comparison instead of 1e-4.
        #[arg(long)]
        energy: bool,
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
    },
    /// 2D pulse experiment, all models unless one is given.
    Exp2d {
        #[arg(long)]
        model: Option<ModelKind>,
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
    },
    /// Refinement study with observed orders.
    Convergence {
        #[arg(long)]
        kind: ConvergenceKind,
        #[arg(long)]
        levels: Option<usize>,
        /// Directory for `convergence_<kind>.csv`.
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Fit `H = C0 exp(-C1 t)` to an energy file.
    FitDecay {
        energy_csv: PathBuf,
        /// Window start; defaults to 20% of the recorded span.
        #[arg(long)]
        from: Option<f64>,
        #[arg(long)]
        to: Option<f64>,
    },
}

fn print_report(r: &RunReport) {
    println!(
        "{}: {} steps, H {:.6e} -> {:.6e} (max {:.6e}), newton mean {:.2} max {}",
        r.name, r.steps, r.initial_hamiltonian, r.final_hamiltonian, r.max_hamiltonian, r.newton_mean_iters, r.newton_max_iters
    );
}

fn run_presets(family: &str, model: Option<ModelKind>, set: &[String]) -> Result<()> {
    let models: Vec<ModelKind> = model.map_or_else(|| ModelKind::ALL.to_vec(), |m| vec![m]);
    let configs = models
        .iter()
        .map(|m| preset_with_overrides(&format!("{family}-{m}"), set))
        .collect::<Result<Vec<_>>>()?;
    let results: Vec<(String, Result<RunReport>)> =
        configs.par_iter().map(|c| (c.name.clone(), run_experiment(c))).collect();
    let mut first_err = None;
    for (name, res) in results {
        match res {
            Ok(r) => print_report(&r),
            Err(e) => {
                eprintln!("{name}: {e}");
                first_err.get_or_insert(e);
            }
        }
    }
    first_err.map_or(Ok(()), Err)
}

fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run { config, set } => {
            let cfg = parse_config(&config, &set)?;
            print_report(&run_experiment(&cfg)?);
        }
        Command::Exp1d { model, energy, set } => run_presets(if energy { "energy1d" } else { "exp1d" }, model, &set)?,
        Command::Exp2d { model, set } => run_presets("exp2d", model, &set)?,
        Command::Convergence { kind, levels, out } => {
            let mut setup = ConvergenceSetup::default_for(kind);
            if let Some(l) = levels {
                setup.levels = l;
            }
            let table = convergence_study(&setup)?;
            fs::create_dir_all(&out)?;
            let mut text = String::from("resolution,error,order\n");
            println!("{:>14} {:>14} {:>8}", "resolution", "error", "order");
            for r in &table.rows {
                let order = r.order.map_or(String::new(), |o| format!("{o:.16e}"));
                text.push_str(&format!("{:.16e},{:.16e},{order}\n", r.resolution, r.error));
                println!("{:>14.4e} {:>14.4e} {:>8}", r.resolution, r.error, r.order.map_or("-".into(), |o| format!("{o:.3}")));
            }
            fs::write(out.join(format!("convergence_{kind}.csv")), text)?;
        }
        Command::FitDecay { energy_csv, from, to } => {
            let records = read_energy_csv(&energy_csv)?;
            let default = default_window(&records).ok_or_else(|| Error::Fit("energy file has no records".into()))?;
            let fit = fit_decay(&records, (from.unwrap_or(default.0), to.unwrap_or(default.1)))?;
            println!("{}", serde_json::to_string_pretty(&fit).expect("fit serializes"));
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_solver_failure() {
                ExitCode::from(3)
            } else if matches!(e, Error::Io(_) | Error::Csv(_)) {
                ExitCode::from(1)
            } else {
                ExitCode::from(2)
            }
        }
    }
}
