mod args;
mod commands;
mod manifest;

use args::{Cli, Command};
use clap::Parser;

fn main() {
    let mut cli = Cli::parse();
    if let Some(config) = cli.config.clone() {
        if let Err(e) = commands::apply_config(&config, &mut cli.command) {
            eprintln!("error: {e:#}");
            std::process::exit(2);
        }
    }
    let result = match &cli.command {
        Command::Cluster(a) => commands::cmd_cluster(a),
        Command::Solve(a) => commands::cmd_solve(a),
        Command::Evaluate(a) => commands::cmd_evaluate(a, None),
        Command::Synth(a) => commands::cmd_synth(a),
        Command::Rerun(a) => commands::cmd_rerun(a),
    };
    if let Err(failure) = result {
        eprintln!("error: {}", failure.message);
        std::process::exit(failure.code);
    }
}
