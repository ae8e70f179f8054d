use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use firmdyn::bankruptcy::{report, sweep, SweepGrid};
use firmdyn::cli_reports::{
    default_step, emit_csv, figure_preset, format_number, parse_scenario, run_portfolio,
    write_report, write_sweep, Mode, Scenario,
};
use firmdyn::firm_model::Param;
use firmdyn::physics_analogy::{boat_velocity, map_firm_to_boat, BoatParams};
use firmdyn::{Error, Result};

#[derive(Parser)]
#[command(
    name = "firmdyn",
    version,
    about = "Newtonian dynamics of a firm's flow of production"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Output {
    /// Write to this file instead of stdout
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario file and write its trajectory as CSV
    Simulate {
        config: PathBuf,
        #[command(flatten)]
        out: Output,
    },
    /// Reproduce a reference figure (fig1a ... fig4b) as CSV
    Figure {
        preset: String,
        #[arg(long)]
        step: Option<f64>,
        #[command(flatten)]
        out: Output,
    },
    /// Classify the firm of a scenario file and compute its survival time
    Bankruptcy {
        config: PathBuf,
        /// Skip the finite-difference sensitivities
        #[arg(long)]
        no_sensitivities: bool,
        #[command(flatten)]
        out: Output,
    },
    /// Survival times over a grid of parameter values
    Sweep {
        config: PathBuf,
        /// PARAM=v1,v2,... (repeatable; the grid is their cartesian product)
        #[arg(long, required = true)]
        vary: Vec<String>,
        #[arg(long)]
        sensitivities: bool,
        #[command(flatten)]
        out: Output,
    },
    /// Batch survival forecasts for a CSV of firms
    Portfolio {
        file: PathBuf,
        #[command(flatten)]
        out: Output,
    },
    /// Velocity of a motorboat, given directly or mapped from an untrended firm
    Boat {
        /// Scenario file of an untrended firm to map onto the boat
        #[arg(long, conflicts_with_all = ["force", "friction", "mass", "v0"])]
        config: Option<PathBuf>,
        /// Engine force F0 (N)
        #[arg(long, default_value_t = 80.0)]
        force: f64,
        /// Friction coefficient k (kg/s)
        #[arg(long, default_value_t = 0.08)]
        friction: f64,
        /// Mass m_b (kg)
        #[arg(long, default_value_t = 2.0)]
        mass: f64,
        /// Initial velocity (m/s)
        #[arg(long, default_value_t = 0.0)]
        v0: f64,
        /// Engine cutoff time (s)
        #[arg(long)]
        cutoff: Option<f64>,
        #[arg(long, default_value_t = 0.0)]
        t0: f64,
        #[arg(long, default_value_t = 100.0)]
        t1: f64,
        #[arg(long)]
        step: Option<f64>,
        #[command(flatten)]
        out: Output,
    },
}

fn open_output(out: &Output) -> Result<Box<dyn Write>> {
    Ok(match &out.output {
        Some(path) => Box::new(BufWriter::new(File::create(path)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn load_scenario(path: &Path) -> Result<Scenario> {
    parse_scenario(&std::fs::read_to_string(path)?)
}

fn parse_vary(spec: &str) -> Result<(Param, Vec<f64>)> {
    let bad = || Error::InvalidArgument(format!("--vary expects PARAM=v1,v2,..., got `{spec}`"));
    let (name, values) = spec.split_once('=').ok_or_else(bad)?;
    let param: Param = name.trim().parse()?;
    let values = values
        .split(',')
        .map(|v| v.trim().parse::<f64>().map_err(|_| bad()))
        .collect::<Result<Vec<_>>>()?;
    Ok((param, values))
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate { config, out } => {
            let trajectories = load_scenario(&config)?.run()?;
            emit_csv(&trajectories, open_output(&out)?)
        }
        Command::Figure { preset, step, out } => {
            let fig = figure_preset(&preset)?;
            let scenario = parse_scenario(&format!("preset = {}\n", fig.name))?;
            let scenario = Scenario {
                step: step.unwrap_or(scenario.step),
                ..scenario
            };
            emit_csv(&scenario.run()?, open_output(&out)?)
        }
        Command::Bankruptcy {
            config,
            no_sensitivities,
            out,
        } => {
            let scenario = load_scenario(&config)?;
            let r = report(
                &config.display().to_string(),
                &scenario.firm,
                !no_sensitivities,
            );
            write_report(&r, open_output(&out)?)?;
            match r.error {
                Some(e) => Err(Error::InvalidArgument(e)),
                None => Ok(()),
            }
        }
        Command::Sweep {
            config,
            vary,
            sensitivities,
            out,
        } => {
            let scenario = load_scenario(&config)?;
            let axes = vary
                .iter()
                .map(|v| parse_vary(v))
                .collect::<Result<Vec<_>>>()?;
            let varied: Vec<Param> = axes.iter().map(|(p, _)| *p).collect();
            let points = sweep(&scenario.firm, &SweepGrid { axes }, sensitivities)?;
            write_sweep(&varied, &points, open_output(&out)?)
        }
        Command::Portfolio { file, out } => {
            let summary = run_portfolio(File::open(&file)?, open_output(&out)?)?;
            if summary.errors > 0 {
                eprintln!("{} of {} rows failed", summary.errors, summary.rows);
            }
            Ok(())
        }
        Command::Boat {
            config,
            force,
            friction,
            mass,
            v0,
            cutoff,
            t0,
            t1,
            step,
            out,
        } => {
            let boat = match config {
                Some(path) => {
                    let scenario = load_scenario(&path)?;
                    if scenario.mode == Mode::FigurePreset {
                        return Err(Error::InvalidArgument(
                            "boat needs an explicit firm, not a preset".into(),
                        ));
                    }
                    BoatParams {
                        cutoff,
                        ..map_firm_to_boat(&scenario.firm)?
                    }
                }
                None => BoatParams {
                    engine_force: force,
                    friction,
                    mass,
                    initial_velocity: v0,
                    cutoff,
                },
            };
            boat.validate()?;
            let step = step.unwrap_or_else(default_step);
            if !(t0 < t1 && step > 0.0 && step.is_finite()) {
                return Err(Error::InvalidArgument("need t0 < t1 and step > 0".into()));
            }
            let mut w = open_output(&out)?;
            writeln!(w, "t,v")?;
            let n = ((t1 - t0) / step - 1e-9).ceil().max(1.0) as usize;
            for k in 0..=n {
                let t = if k == n { t1 } else { t0 + k as f64 * step };
                writeln!(
                    w,
                    "{},{}",
                    format_number(t),
                    format_number(boat_velocity(&boat, t))
                )?;
            }
            if let Some(t1) = boat.cutoff {
                writeln!(w, "# event,{},engine_cutoff", format_number(t1))?;
            }
            w.flush()?;
            Ok(())
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Io(_) => 2,
        Error::Csv(c) if c.is_io_error() => 2,
        _ => 1,
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        // output piped into a reader that stopped early
        Err(Error::Io(e)) if e.kind() == io::ErrorKind::BrokenPipe => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("firmdyn: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
