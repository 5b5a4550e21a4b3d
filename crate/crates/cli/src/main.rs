//! `gsm`: generate graphs, tokenize, encode, run the constructive pipelines
//! and check the library's properties, all through files in one directory.

mod bench;
mod encode;
mod generate;
mod io;
mod motif_oracle;
mod run;
mod tokenize;
mod verify;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "gsm", version, about = "Graph sequence model toolkit")]
struct Cli {
    /// Seed for every random choice the command makes.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Directory for inputs looked up by default name and for all outputs.
    #[arg(long, global = true, default_value = ".")]
    out_dir: PathBuf,

    /// Format of reports and bench tables.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Write graph.json and labels.json (plus factored.json for factored graphs).
    Generate(generate::Args),
    /// Tokenize a graph into tokenization.json.
    Tokenize(tokenize::Args),
    /// Locally encode a tokenization into encoded.bin.
    Encode(encode::Args),
    /// Run a constructive pipeline on fresh instances and write metrics.csv.
    Run(run::Args),
    /// Check a property suite; exits 1 if any property fails.
    Verify(verify::Args),
    /// Time the main operations and print a table.
    Bench(bench::Args),
}

pub struct Ctx {
    pub seed: u64,
    pub out_dir: PathBuf,
    pub format: Format,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let ctx = Ctx {
        seed: cli.seed,
        out_dir: cli.out_dir,
        format: cli.format,
    };
    if let Err(e) = std::fs::create_dir_all(&ctx.out_dir) {
        eprintln!("error: cannot create {}: {e}", ctx.out_dir.display());
        return ExitCode::from(2);
    }
    let result = match cli.command {
        Command::Generate(a) => generate::run(&ctx, a).map(|()| true),
        Command::Tokenize(a) => tokenize::run(&ctx, a).map(|()| true),
        Command::Encode(a) => encode::run(&ctx, a).map(|()| true),
        Command::Run(a) => run::run(&ctx, a).map(|()| true),
        Command::Verify(a) => verify::run(&ctx, a),
        Command::Bench(a) => bench::run(&ctx, a).map(|()| true),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
