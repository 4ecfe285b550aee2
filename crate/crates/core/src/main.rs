use clap::Parser;
use pauli_blockade::cli::{configure_threads, run, Cli, EXIT_CONFIG};

fn main() {
    let cli = Cli::parse();
    if let Err(message) = configure_threads() {
        eprintln!("{}", serde_json::json!({ "error": "config", "message": message }));
        std::process::exit(EXIT_CONFIG);
    }
    std::process::exit(run(&cli));
}
