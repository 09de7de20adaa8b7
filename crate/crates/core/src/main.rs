use clap::{Parser, Subcommand};
use quadftc::config::RunConfig;
use quadftc::env::InitialCondition;
use quadftc::harness::{cmd_simulate, cmd_sweep, cmd_train, cmd_trim, ControllerSpec, HarnessError, SweepRow};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser, Debug)]
#[command(name = "quadftc", version, about = "Rotor-failure hover simulator and controllers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args, Debug)]
struct Common {
    /// Configuration file (`key = value` lines).
    #[arg(long)]
    config: PathBuf,
    /// Initial condition: nominal, ic1 .. ic5.
    #[arg(long)]
    ic: Option<InitialCondition>,
    /// none, dp or ddpg:PATH to an actor checkpoint.
    #[arg(long, default_value = "none")]
    controller: ControllerSpec,
    /// Episode length in seconds.
    #[arg(long)]
    duration: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Training episode length in seconds.
    #[arg(long)]
    horizon: Option<f64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Print the hover trim point.
    Trim(Common),
    /// Run one episode and write its trajectory.
    Simulate(Common),
    /// Train a DDPG agent.
    Train(Common),
    /// Run every configured initial condition.
    Sweep(Common),
}

fn effective_config(c: &Common) -> Result<RunConfig, HarnessError> {
    let mut cfg = RunConfig::load(&c.config)?;
    if let Some(ic) = c.ic {
        cfg.run.ic = ic;
    }
    if let Some(d) = c.duration {
        cfg.run.duration = d;
    }
    if let Some(s) = c.seed {
        cfg.run.seed = s;
    }
    if let Some(h) = c.horizon {
        cfg.ddpg.horizon = h;
    }
    if let Some(o) = &c.out {
        cfg.run.out_dir = o.clone();
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(cli: Cli) -> Result<(), HarnessError> {
    match &cli.command {
        Command::Trim(c) => {
            let cfg = effective_config(c)?;
            println!("{}", cmd_trim(&cfg)?);
        }
        Command::Simulate(c) => {
            let cfg = effective_config(c)?;
            let log = cmd_simulate(&cfg, &c.controller)?;
            println!("{}", log.summary);
        }
        Command::Train(c) => {
            let cfg = effective_config(c)?;
            let r = cmd_train(&cfg)?;
            let best = r.best_episode.map_or("none".to_string(), |e| e.to_string());
            println!(
                "episodes={} best_episode={} best_score={}",
                r.episodes, best, r.best_score
            );
        }
        Command::Sweep(c) => {
            let cfg = effective_config(c)?;
            for row in cmd_sweep(&cfg, &c.controller)? {
                match row {
                    SweepRow::Done(s) => println!("{s}"),
                    SweepRow::Failed { ic, error } => println!("ic={} error={error}", ic.name()),
                }
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(2)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            match &e {
                HarnessError::Config(_) => eprintln!("config error: {e}"),
                HarnessError::Runtime(_) => eprintln!("error: {e}"),
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
