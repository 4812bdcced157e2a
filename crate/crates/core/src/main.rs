use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use algreach::cli::{
    bench, parse_graph, parse_script, run_script, verify_fuzz, EngineChoice, RunConfig,
};
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(
    name = "algreach",
    version,
    about = "Dynamic reachability and distances by algebraic updates"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Replay a change script and answer its queries
    Run {
        graph: PathBuf,
        script: PathBuf,
        #[command(flatten)]
        flags: Flags,
    },
    /// Random script checked against breadth-first search
    Verify {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 100)]
        steps: usize,
        #[command(flatten)]
        flags: Flags,
    },
    /// Incremental update versus recomputation timings
    Bench {
        /// Node counts, comma separated
        #[arg(long, value_delimiter = ',', num_args = 0..)]
        n: Vec<usize>,
        #[arg(long, default_value_t = 10)]
        steps: usize,
        #[command(flatten)]
        flags: Flags,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum EngineArg {
    Reach,
    Dist,
    Quotient,
}

#[derive(Clone, Copy, ValueEnum)]
enum PrimeModeArg {
    Random,
    Deterministic,
}

#[derive(Args)]
struct Flags {
    #[arg(long, value_enum, default_value = "reach")]
    engine: EngineArg,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    epoch: Option<usize>,
    #[arg(long)]
    primes: Option<usize>,
    #[arg(long, value_enum, default_value = "random")]
    prime_mode: PrimeModeArg,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    points: Option<usize>,
    /// Write the per-step (or bench) CSV here
    #[arg(long)]
    csv: Option<PathBuf>,
}

impl Flags {
    fn config(&self) -> RunConfig {
        let mut c = RunConfig::new(match self.engine {
            EngineArg::Reach => EngineChoice::Reach,
            EngineArg::Dist => EngineChoice::Dist,
            EngineArg::Quotient => EngineChoice::Quotient,
        });
        c.k = self.k;
        c.epoch = self.epoch;
        c.primes = self.primes;
        c.deterministic_primes = matches!(self.prime_mode, PrimeModeArg::Deterministic);
        c.seed = self.seed;
        c.points = self.points;
        c
    }
}

fn main() -> ExitCode {
    match real_main() {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn real_main() -> algreach::Result<ExitCode> {
    let cli = Cli::parse();
    let stdout = io::stdout();
    let mut out = stdout.lock();
    match cli.command {
        Command::Run {
            graph,
            script,
            flags,
        } => {
            let g = parse_graph(&fs::read_to_string(graph)?)?;
            let s = parse_script(&fs::read_to_string(script)?, g.n())?;
            let report = run_script(&g, &s, &flags.config())?;
            for a in &report.final_answers {
                writeln!(out, "{a}")?;
            }
            if let Some(path) = flags.csv {
                report.write_csv(&mut fs::File::create(path)?)?;
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Verify { n, steps, flags } => {
            let report = verify_fuzz(n, steps, flags.seed, &flags.config())?;
            write!(out, "{}", report.render())?;
            if let Some(path) = flags.csv {
                report.write_csv(&mut fs::File::create(path)?)?;
            }
            Ok(if report.mismatches() == 0 {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            })
        }
        Command::Bench { n, steps, flags } => {
            match &flags.csv {
                Some(path) => bench(&n, steps, &flags.config(), &mut fs::File::create(path)?)?,
                None => bench(&n, steps, &flags.config(), &mut out)?,
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}
