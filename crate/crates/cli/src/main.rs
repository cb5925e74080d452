mod backend;
mod cli;
mod commands;
mod config;
mod failure;
mod output;

use clap::Parser;

use crate::cli::Cli;
use crate::commands::Ctx;
use crate::config::RunConfig;
use crate::failure::Failure;

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { failure::EXIT_USAGE } else { 0 };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    let result = RunConfig::resolve(&cli.global)
        // Any problem with the run configuration is a usage error.
        .map_err(|e| Failure { kind: "config", exit_code: failure::EXIT_USAGE, ..Failure::from(e) })
        .and_then(|cfg| commands::run(cli.command, &Ctx { cfg, pretty: cli.global.pretty }));
    if let Err(f) = result {
        eprintln!("{}", serde_json::json!({ "error": f }));
        std::process::exit(f.exit_code);
    }
}
