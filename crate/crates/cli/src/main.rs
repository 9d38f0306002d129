use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};

use ratunif::cli::{run, ModeChoice, OutputFormat, RunConfig};

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ModeArg {
    Auto,
    Fo,
    Ho,
}

/// Unify rational (cyclic) first-order and higher-order pattern terms.
#[derive(Parser, Debug)]
#[command(name = "ratunif", version)]
struct Args {
    /// Problem file.
    input: PathBuf,
    #[arg(long, value_enum, default_value = "auto")]
    mode: ModeArg,
    /// Print the saturation steps as comments before the result.
    #[arg(long)]
    trace: bool,
    /// Verify the unifier by expansion up to this depth.
    #[arg(long, value_name = "K")]
    check_depth: Option<usize>,
    #[arg(long)]
    json: bool,
    #[arg(long, value_name = "N")]
    max_steps: Option<usize>,
}

fn main() -> ExitCode {
    let args = Args::parse();
    let mut cfg = RunConfig::new(args.input);
    cfg.mode = match args.mode {
        ModeArg::Auto => ModeChoice::Auto,
        ModeArg::Fo => ModeChoice::FirstOrder,
        ModeArg::Ho => ModeChoice::HigherOrder,
    };
    cfg.trace = args.trace;
    cfg.check_depth = args.check_depth;
    if args.json {
        cfg.output = OutputFormat::Json;
    }
    if let Some(n) = args.max_steps {
        cfg.max_steps = n;
    }
    let out = run(&cfg);
    print!("{}", out.stdout);
    eprint!("{}", out.stderr);
    ExitCode::from(out.status.code() as u8)
}
