use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use fluxlab_cli::{constants_json, load, run_file, EXIT_OK};

#[derive(Parser)]
#[command(name = "fluxlab", version, about = "Charge-fluxon scenario runner")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario file and write its reports
    Run { config: PathBuf },
    /// Check a scenario file and print its normalized form
    Validate { config: PathBuf },
    /// Print the physical constants table as JSON
    Constants,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { config } => run_file(&config).map(|out| {
            println!("{}", out.report_path.display());
            for f in &out.files {
                println!("{}", f.display());
            }
        }),
        Command::Validate { config } => load(&config).map(|c| print!("{}", c.to_json_pretty())),
        Command::Constants => {
            println!("{}", serde_json::to_string_pretty(&constants_json()).expect("constants serialize"));
            Ok(())
        }
    };
    match result {
        Ok(()) => ExitCode::from(EXIT_OK as u8),
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
