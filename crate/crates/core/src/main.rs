use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};

use qcournot::cli::{execute, exit_code, load_config, Command, RunOptions, EXIT_CONFIG};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Cmd {
    Equilibrium,
    SweepEnergy,
    SweepRatio,
    SweepScale,
    Threshold,
    Verify,
}

impl From<Cmd> for Command {
    fn from(c: Cmd) -> Self {
        match c {
            Cmd::Equilibrium => Command::Equilibrium,
            Cmd::SweepEnergy => Command::SweepEnergy,
            Cmd::SweepRatio => Command::SweepRatio,
            Cmd::SweepScale => Command::SweepScale,
            Cmd::Threshold => Command::Threshold,
            Cmd::Verify => Command::Verify,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum PresetArg {
    Fig1,
    Fig2,
    Fig3,
}

/// Cournot equilibria of mixed quantum/classical computing markets.
#[derive(Debug, Parser)]
#[command(name = "qcournot", version)]
struct Args {
    command: Cmd,
    /// JSON run configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Built-in figure configuration, used instead of --config.
    #[arg(long, value_enum)]
    preset: Option<PresetArg>,
    /// Where to write the CSV/JSON table; overrides output.path in the config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Seed for the verification instance generator.
    #[arg(long)]
    seed: Option<u64>,
    /// Instances per verification suite.
    #[arg(long)]
    trials: Option<usize>,
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { 0 };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    ExitCode::from(run(args) as u8)
}

fn run(args: Args) -> i32 {
    let preset = args.preset.map(|p| match p {
        PresetArg::Fig1 => "fig1",
        PresetArg::Fig2 => "fig2",
        PresetArg::Fig3 => "fig3",
    });
    let config = match load_config(args.config.as_deref(), preset) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return exit_code(&e);
        }
    };
    let opts = RunOptions {
        seed: args.seed,
        trials: args.trials,
    };
    let outcome = match execute(args.command.into(), config.as_ref(), opts) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return exit_code(&e);
        }
    };

    let command: Command = args.command.into();
    let output = config.as_ref().map(|c| c.output.clone()).unwrap_or_default();
    let path = args.out.or(output.path);
    let rendered = outcome.render_table(output.format);
    match (rendered, path) {
        (Some(text), Some(path)) => {
            if let Err(e) = std::fs::write(&path, text) {
                eprintln!("error: cannot write {}: {e}", path.display());
                return EXIT_CONFIG;
            }
            println!("{}", outcome.report);
            println!("wrote {}", path.display());
        }
        // sweep tables go to stdout when there is no destination, so they can be piped
        (Some(text), None) if command.table_is_primary() => {
            eprintln!("{}", outcome.report);
            print!("{text}");
        }
        _ => println!("{}", outcome.report),
    }
    outcome.exit_code
}
