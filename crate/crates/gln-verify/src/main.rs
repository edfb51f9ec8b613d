use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use gln_verify::{eval, run_suite, EvalArgs, Format, Object, RunConfig, Suite};

#[derive(Parser)]
#[command(name = "gln-verify", about = "Exact verification suites for congruence test vectors on GL(n)")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a verification suite and write its report.
    Verify {
        #[arg(long, value_enum)]
        suite: Suite,
        #[arg(long, default_value_t = 2)]
        p: u64,
        #[arg(long, default_value_t = 1)]
        m: u32,
        #[arg(long, default_value_t = 2)]
        rank: usize,
        #[arg(long)]
        pair_rank: Option<usize>,
        #[arg(long)]
        slope_max: Option<u32>,
        #[arg(long = "box")]
        box_size: Option<i64>,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
    /// Evaluate one object exactly.
    Eval {
        #[arg(value_enum)]
        object: Object,
        #[arg(long, default_value_t = 2)]
        p: u64,
        #[arg(long, default_value_t = 1)]
        m: u32,
        #[arg(long)]
        g: Option<String>,
        #[arg(long)]
        u: Option<String>,
        #[arg(long)]
        tau: Option<String>,
        #[arg(long)]
        c: Option<String>,
    },
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::Verify { suite, p, m, rank, pair_rank, slope_max, box_size, jobs, out, format } => {
            let cfg = RunConfig { suite, p, m, rank, pair_rank, slope_max, box_size, jobs };
            if let Err(e) = cfg.validate() {
                eprintln!("configuration error: {e}");
                return ExitCode::from(2);
            }
            let start = Instant::now();
            let report = run_suite(&cfg);
            let text = report.render(format);
            match out {
                Some(path) => {
                    if let Err(e) = std::fs::write(&path, &text) {
                        eprintln!("cannot write {}: {e}", path.display());
                        return ExitCode::from(2);
                    }
                }
                None => print!("{text}"),
            }
            eprintln!("{}: {} in {:.1?}", suite.name(), if report.passed() { "pass" } else { "fail" }, start.elapsed());
            if report.passed() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Command::Eval { object, p, m, g, u, tau, c } => {
            if !gln_local::arith::is_prime(p) || m == 0 {
                eprintln!("configuration error: p must be prime and m at least 1");
                return ExitCode::from(2);
            }
            match eval(object, &EvalArgs { p, m, g, u, tau, c }) {
                Ok(s) => {
                    println!("{s}");
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(2)
                }
            }
        }
    }
}
