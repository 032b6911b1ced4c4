mod args;
mod commands;

use clap::Parser;

use args::{Cli, Command};

fn main() {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Generate(c) => commands::resolve(c).and_then(commands::generate),
        Command::Solve(c) => commands::resolve(c).and_then(commands::solve),
        Command::Benchmark(c) => commands::resolve(c).and_then(commands::benchmark),
        Command::Verify(c) => commands::resolve(c).and_then(commands::verify),
    };
    let code = match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.code
        }
    };
    std::process::exit(code);
}
