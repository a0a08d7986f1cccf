use std::path::PathBuf;
use std::process;

use clap::{Args, Parser, Subcommand};

use kernel_bounds::harness::{
    cmd_approx, cmd_check, cmd_constants, cmd_crosscheck, cmd_solve, cmd_validate, threads_from_env, ExitCode,
    Invocation, Mode, Outcome, RunConfig,
};

#[derive(Parser)]
#[command(name = "kbounds", version, about = "Weighted kernel and gradient bounds for diffusion operators")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// TOML run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (overrides `output.dir`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Source of the constants `c_i`.
    #[arg(long, default_value = "measured", value_parser = ["measured", "closed-form"])]
    mode: String,
    #[arg(long)]
    dry_run: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Certify the structural conditions on every window of the sweep.
    Check(Common),
    /// Assemble the constant pipeline for the window around `t`.
    Constants {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 0.4)]
        t: f64,
    },
    /// Solve for the kernel and write profiles and functionals.
    Solve(Common),
    /// Compare the kernel with its envelopes.
    Validate(Common),
    /// Compare the solver with the Monte Carlo oracle.
    Crosscheck(Common),
    /// Run the cutoff sweep.
    Approx(Common),
}

fn invocation(c: &Common) -> Result<Invocation, kernel_bounds::Error> {
    let config = RunConfig::load(&c.config)?;
    let mode: Mode = c.mode.parse()?;
    Ok(Invocation::new(config, c.out.clone(), mode, c.dry_run))
}

fn main() {
    let cli = Cli::parse();
    if let Some(n) = threads_from_env() {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().ok();
    }
    let result = match &cli.command {
        Command::Check(c) => invocation(c).and_then(|i| cmd_check(&i)),
        Command::Constants { common, t } => invocation(common).and_then(|i| cmd_constants(&i, *t)),
        Command::Solve(c) => invocation(c).and_then(|i| cmd_solve(&i)),
        Command::Validate(c) => invocation(c).and_then(|i| cmd_validate(&i)),
        Command::Crosscheck(c) => invocation(c).and_then(|i| cmd_crosscheck(&i)),
        Command::Approx(c) => invocation(c).and_then(|i| cmd_approx(&i)),
    };
    match result {
        Ok(Outcome { exit, files, summary }) => {
            for line in summary {
                println!("{line}");
            }
            for f in files {
                println!("wrote {}", f.display());
            }
            process::exit(exit.code());
        }
        Err(e) => {
            eprintln!("error: {e}");
            process::exit(ExitCode::for_error(&e).code());
        }
    }
}
