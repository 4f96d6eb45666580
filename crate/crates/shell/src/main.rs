use std::process::ExitCode;

use clap::Parser;
use shinohara_shell::cli::{run, Cli, Command, EXIT_USAGE};
use shinohara_shell::service;

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Command::Serve { port } = cli.command {
        let runtime = match tokio::runtime::Runtime::new() {
            Ok(rt) => rt,
            Err(e) => {
                eprintln!("error: {e}");
                return ExitCode::from(EXIT_USAGE);
            }
        };
        return match runtime.block_on(service::serve(port)) {
            Ok(()) => ExitCode::SUCCESS,
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(EXIT_USAGE)
            }
        };
    }
    let code = run(&cli.command, &mut std::io::stdout(), &mut std::io::stderr());
    ExitCode::from(code)
}
