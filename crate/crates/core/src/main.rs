use clap::{Parser, Subcommand, ValueEnum};
use comb_clt::bounds::SigmaExponent;
use comb_clt::mc::{DumpFormat, DEFAULT_DUMP_LIMIT};
use comb_clt::runner::{run_file, scenario_files, verify_suite, RunOptions};
use comb_clt::solver::{example_rate_report, write_rate_report_csv};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "comb-clt", version, about = "Bounds and Monte-Carlo checks for the combinatorial CLT")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Override the Monte-Carlo seed of every scenario.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Override the Monte-Carlo replicate count of every scenario.
    #[arg(long, global = true)]
    replicates: Option<usize>,

    /// Output directory for reports.
    #[arg(long, global = true, env = "COMB_CLT_OUT", default_value = ".")]
    out: PathBuf,

    /// Number of scenarios evaluated concurrently.
    #[arg(long, global = true, value_parser = clap::value_parser!(u32).range(1..))]
    parallel: Option<u32>,

    /// Power of σ in the Theorem A denominator: 3/2 or 3.
    #[arg(long = "exponent-A", global = true)]
    exponent_a: Option<SigmaExponent>,
}

#[derive(Clone, Copy, ValueEnum)]
enum DumpArg {
    Csv,
    Binary,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate one scenario file.
    Run {
        file: PathBuf,
        /// Also write the standardized Monte-Carlo samples.
        #[arg(long)]
        dump_samples: Option<DumpArg>,
        /// Refuse sample dumps larger than this many values.
        #[arg(long, default_value_t = DEFAULT_DUMP_LIMIT)]
        dump_limit: usize,
    },
    /// Evaluate every scenario in a directory and check bound domination.
    VerifySuite { dir: PathBuf },
    /// Rate table of the |x|^-3 example as CSV.
    RateReport {
        /// Matrix orders, comma separated.
        #[arg(long, value_delimiter = ',', required = true)]
        n: Vec<u64>,
        #[arg(long, default_value_t = 1.0)]
        constant_a: f64,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut opts = RunOptions {
        seed: cli.seed,
        replicates: cli.replicates,
        exponent_a: cli.exponent_a,
        dump: None,
    };
    match cli.command {
        Command::Run { file, dump_samples, dump_limit } => {
            opts.dump = dump_samples.map(|d| {
                let f = match d {
                    DumpArg::Csv => DumpFormat::Csv,
                    DumpArg::Binary => DumpFormat::Binary,
                };
                (f, dump_limit)
            });
            match run_file(&file, &cli.out, &opts) {
                Ok(report) => {
                    for b in &report.bounds {
                        println!("theorem {}: total {:.6}", b.theorem, b.total);
                    }
                    if let Some(mc) = &report.mc {
                        println!(
                            "delta_hat {:.6} ± {:.6} (N = {})",
                            mc.raw.delta_hat, mc.raw.dkw_epsilon, mc.replicates
                        );
                    }
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(e.exit_code() as u8)
                }
            }
        }
        Command::VerifySuite { dir } => {
            let files = match scenario_files(&dir) {
                Ok(f) => f,
                Err(e) => {
                    eprintln!("error: cannot read {}: {e}", dir.display());
                    return ExitCode::from(2);
                }
            };
            if files.is_empty() {
                eprintln!("error: no scenario files in {}", dir.display());
                return ExitCode::from(2);
            }
            let entries = match verify_suite(&files, &cli.out, &opts, cli.parallel.map(|k| k as usize)) {
                Ok(e) => e,
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::from(e.exit_code() as u8);
                }
            };
            for e in &entries {
                println!("{}", e.summary_line());
            }
            let passed = entries.iter().filter(|e| e.passed()).count();
            println!("{passed}/{} scenarios passed", entries.len());
            if passed == entries.len() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Command::RateReport { n, constant_a } => match example_rate_report(&n, constant_a) {
            Ok(rows) => {
                if let Err(e) = write_rate_report_csv(&rows, std::io::stdout().lock()) {
                    eprintln!("error: {e}");
                    return ExitCode::from(2);
                }
                ExitCode::SUCCESS
            }
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(2)
            }
        },
    }
}
