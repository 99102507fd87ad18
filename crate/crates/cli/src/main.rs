use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use toral_markov_cli::{
    cmd_build, cmd_code, cmd_decode, cmd_shadow, cmd_verify, parse_matrix, parse_point, parse_word,
    CliError, RunConfig,
};

#[derive(Parser)]
#[command(name = "toral-markov", version, about = "Markov partitions for hyperbolic toral automorphisms")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build, verify and save a partition
    Build {
        #[arg(long, default_value = "2,1,1,1")]
        matrix: String,
        #[arg(long, default_value_t = 0.1)]
        beta: f64,
        #[arg(long, default_value_t = 100)]
        samples: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value_t = 15)]
        depth: usize,
        #[arg(long, default_value = ".")]
        out: PathBuf,
        #[arg(long)]
        svg: bool,
    },
    /// Re-check a saved partition
    Verify {
        #[arg(long = "in", default_value = "partition.json")]
        input: PathBuf,
        #[arg(long, default_value_t = 100)]
        samples: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
    },
    /// Itinerary of a point
    Code {
        #[arg(long)]
        point: String,
        #[arg(long, default_value_t = 15)]
        depth: usize,
        #[arg(long = "in", default_value = "partition.json")]
        input: PathBuf,
        #[arg(long)]
        all_codes: bool,
    },
    /// Point of a finite itinerary
    Decode {
        #[arg(long)]
        word: String,
        #[arg(long)]
        matrix_file: Option<PathBuf>,
        #[arg(long = "in", default_value = "partition.json")]
        input: PathBuf,
    },
    /// Shadow a pseudo-orbit given as "x y" lines
    Shadow {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value = "2,1,1,1")]
        matrix: String,
    },
}

fn run(cli: Cli) -> Result<(String, bool), CliError> {
    match cli.command {
        Command::Build { matrix, beta, samples, seed, depth, out, svg } => {
            let cfg = RunConfig { matrix: parse_matrix(&matrix)?, beta, samples, seed, depth, out, svg };
            let o = cmd_build(&cfg)?;
            Ok((o.text, o.passed))
        }
        Command::Verify { input, samples, seed } => {
            let o = cmd_verify(&input, samples, seed)?;
            Ok((o.text, o.passed))
        }
        Command::Code { point, depth, input, all_codes } => {
            Ok((cmd_code(&input, &parse_point(&point)?, depth, all_codes)?, true))
        }
        Command::Decode { word, matrix_file, input } => {
            Ok((cmd_decode(&input, &parse_word(&word)?, matrix_file.as_deref())?, true))
        }
        Command::Shadow { input, matrix } => {
            let o = cmd_shadow(&input, parse_matrix(&matrix)?)?;
            Ok((o.text, o.passed))
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok((text, passed)) => {
            print!("{text}");
            ExitCode::from(if passed { 0 } else { 3 })
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
