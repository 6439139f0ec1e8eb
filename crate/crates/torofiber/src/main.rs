use std::process::ExitCode;

use clap::Parser;

/// Calculator for toroidal degenerations of toric fiber spaces.
#[derive(Parser)]
#[command(name = "torofiber", version, about)]
struct Args {
    /// Subcommand: validate | reduce | fiber | rob | logcheck | weights | hodge | report
    subcommand: String,
    /// Input document (JSON; see docs/input_schema.json)
    file: std::path::PathBuf,
    /// Base cone as comma-separated 1-based target ray indices
    #[arg(long, value_delimiter = ',')]
    tau: Option<Vec<usize>>,
    /// Truncation degree for the log-stalk computations
    #[arg(short = 'K', long = "K")]
    truncation_k: Option<usize>,
    /// Series order for the log Poincare solvers
    #[arg(short = 'S', long = "S")]
    series_order: Option<usize>,
    /// Emit a single JSON document instead of the human-readable report
    #[arg(long)]
    json: bool,
    /// Include DOT output for the dual complex (fiber/report)
    #[arg(long)]
    dot: bool,
}

fn main() -> ExitCode {
    let args = Args::parse();
    let input = match std::fs::read_to_string(&args.file) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("torofiber: cannot read {}: {e}", args.file.display());
            return ExitCode::from(torofiber::cli::EXIT_INPUT_ERROR as u8);
        }
    };
    let (text, code) = torofiber::cli::execute(
        &args.subcommand,
        &input,
        args.tau,
        args.truncation_k,
        args.series_order,
        args.json,
        args.dot,
    );
    print!("{text}");
    ExitCode::from(code as u8)
}
