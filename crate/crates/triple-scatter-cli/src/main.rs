use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use triple_scatter_cli::run::{run_corpus, run_scan, run_verify, schema, Options, EXIT_CONFIG};

#[derive(Parser)]
#[command(name = "triple-scatter", version, about = "Scattering scans and verification suites")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Common {
    /// Run configuration (JSON)
    #[arg(long)]
    config: PathBuf,
    /// Output directory, overrides `output.dir`
    #[arg(long)]
    out: Option<PathBuf>,
    /// Seed for random κ draws
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Reject unknown config fields
    #[arg(long)]
    strict: bool,
    #[arg(long, hide = true)]
    debug_flip_kappa_sign: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Sweep the scattering matrix over the k grid
    Scan(Common),
    /// Run the verification suites and write a report
    Verify(Common),
    /// Write the Hardy-space test corpus
    Corpus(Common),
    /// Print the config JSON schema
    Schema,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("TRIPLE_SCATTER_LOG", "warn")).init();
    let cli = Cli::parse();
    let (common, runner): (Common, fn(&_, &_) -> _) = match cli.command {
        Command::Schema => {
            let text = serde_json::to_string_pretty(&schema()).expect("schema serializes");
            // a closed pipe is not an error worth reporting
            let _ = writeln!(std::io::stdout(), "{text}");
            return ExitCode::SUCCESS;
        }
        Command::Scan(c) => (c, run_scan),
        Command::Verify(c) => (c, run_verify),
        Command::Corpus(c) => (c, run_corpus),
    };
    let config = match triple_scatter_cli::load(&common.config.display().to_string(), common.strict) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_CONFIG as u8);
        }
    };
    let opts = Options {
        out: common.out,
        seed: common.seed,
        sabotage_kappa_sign: common.debug_flip_kappa_sign,
    };
    match runner(&config, &opts) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
