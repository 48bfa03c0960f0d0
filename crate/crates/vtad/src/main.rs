use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use vtad::pipeline::{run_eval, run_split, run_train};
use vtad::report::{load_report, render_report_table};
use vtad::{Overrides, RunConfig};
use vtad_core::catalog::build_catalog;
use vtad_core::Scenario;

/// Voice timbre attribute detection: split, train, evaluate, report.
#[derive(Parser)]
#[command(name = "vtad", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Partition annotations into a split manifest.
    Split(RunArgs),
    /// Train a comparator on the manifest's training side.
    Train(RunArgs),
    /// Score the manifest's trials and write the reports.
    Eval(RunArgs),
    /// Print the last evaluation report as a table.
    Report(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Run configuration file (TOML).
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_parser = parse_scenario)]
    scenario: Option<Scenario>,
    /// Output directory for manifests, checkpoints and reports.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_scenario(s: &str) -> Result<Scenario, String> {
    s.parse()
        .map_err(|_| "expected unseen, seen-speaker or seen-speaker-pair".to_string())
}

fn run(cli: Cli) -> vtad::Result<()> {
    let catalog = build_catalog();
    let (Command::Split(args) | Command::Train(args) | Command::Eval(args) | Command::Report(args)) =
        &cli.command;
    let overrides = Overrides {
        seed: args.seed,
        scenario: args.scenario,
        out: args.out.clone(),
    };
    let config = RunConfig::load(&args.config, &overrides, &catalog)?;
    match cli.command {
        Command::Split(_) => {
            let outcome = run_split(&config, &catalog)?;
            print!("{}", outcome.summary);
            println!(
                "{} training / {} evaluation records -> {}",
                outcome.plan.train.len(),
                outcome.plan.eval.len(),
                config.manifest_path().display()
            );
        }
        Command::Train(_) => {
            let log = run_train(&config, &catalog)?;
            for e in &log.epochs {
                println!("epoch {:>3}  loss {:.6}", e.epoch + 1, e.mean_loss);
            }
            println!("checkpoint -> {}", config.checkpoint_path().display());
        }
        Command::Eval(_) => {
            let report = run_eval(&config, &catalog)?;
            print!("{}", render_report_table(&report));
            println!("report -> {}", config.report_paths().0.display());
        }
        Command::Report(_) => {
            let report = load_report(&config.report_paths().1)?;
            print!("{}", render_report_table(&report));
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let message = e.to_string().replace('\n', " ");
            eprintln!("error[{}]: {message}", e.class());
            ExitCode::FAILURE
        }
    }
}
